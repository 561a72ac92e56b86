#include "chisme/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace chisme::config {

namespace {

std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return {};
    }
    const auto end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string current;
    for (const char c : text) {
        if (c == sep) {
            parts.push_back(trim(current));
            current.clear();
        } else {
            current += c;
        }
    }
    parts.push_back(trim(current));
    return parts;
}

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text) {
    ConfigFile file;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto comment = raw.find('#');
        if (comment != std::string::npos) {
            raw.erase(comment);
        }
        const std::string line = trim(raw);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected `key = value`", line_no);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("missing key before `=`", line_no);
        }
        if (file.entries.contains(key)) {
            throw ConfigError("duplicate key `" + key + "` (first set on line " +
                                  std::to_string(file.entries.at(key).line) + ")",
                              line_no);
        }
        file.entries.emplace(key, Entry{value, line_no, false});
    }
    return file;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path, 0);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str());
}

bool ConfigFile::has(const std::string& key) const {
    return entries.contains(key);
}

int ConfigFile::line_of(const std::string& key) const {
    const auto it = entries.find(key);
    return it == entries.end() ? 0 : it->second.line;
}

std::string ConfigFile::get_string(const std::string& key,
                                   const std::string& fallback) const {
    const auto it = entries.find(key);
    if (it == entries.end()) {
        return fallback;
    }
    it->second.consumed = true;
    return it->second.value;
}

std::int64_t ConfigFile::get_int(const std::string& key,
                                 std::int64_t fallback) const {
    const auto it = entries.find(key);
    if (it == entries.end()) {
        return fallback;
    }
    it->second.consumed = true;
    const std::string& text = it->second.value;
    std::int64_t value = 0;
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("`" + key + "` expects an integer, got `" + text + "`",
                          it->second.line);
    }
    return value;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
    const auto it = entries.find(key);
    if (it == entries.end()) {
        return fallback;
    }
    it->second.consumed = true;
    const std::string& text = it->second.value;
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("`" + key + "` expects a number, got `" + text + "`",
                          it->second.line);
    }
    return value;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
    const auto it = entries.find(key);
    if (it == entries.end()) {
        return fallback;
    }
    it->second.consumed = true;
    const std::string& text = it->second.value;
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    throw ConfigError("`" + key + "` expects true/false, got `" + text + "`",
                      it->second.line);
}

void ConfigFile::reject_unconsumed() const {
    for (const auto& [key, entry] : entries) {
        if (!entry.consumed) {
            throw ConfigError("unknown key `" + key + "`", entry.line);
        }
    }
}

namespace {

datagen::TaskKind task_from_name(const std::string& name, int line) {
    if (name == "classification") return datagen::TaskKind::Classification;
    if (name == "regression") return datagen::TaskKind::Regression;
    throw ConfigError("`task` must be classification or regression, got `" +
                          name + "`",
                      line);
}

// Swap syntax: groups separated by `|`, pairs by `,`, labels by `-`.
// `0-1|2-3` swaps (0,1) in group 0 and (2,3) in group 1; an empty group
// segment means no swaps for that group. `default` keeps the built-in
// pattern.
std::vector<std::vector<datagen::LabelPair>> parse_swaps(const std::string& text,
                                                         int line) {
    std::vector<std::vector<datagen::LabelPair>> swaps;
    for (const std::string& group_text : split(text, '|')) {
        std::vector<datagen::LabelPair> group;
        if (!group_text.empty()) {
            for (const std::string& pair_text : split(group_text, ',')) {
                if (pair_text.empty()) {
                    continue;
                }
                const auto dash = pair_text.find('-');
                if (dash == std::string::npos) {
                    throw ConfigError(
                        "swap pair must look like `a-b`, got `" + pair_text + "`",
                        line);
                }
                try {
                    group.push_back(
                        {std::stoi(pair_text.substr(0, dash)),
                         std::stoi(pair_text.substr(dash + 1))});
                } catch (const std::exception&) {
                    throw ConfigError(
                        "swap pair must use integer labels, got `" + pair_text +
                            "`",
                        line);
                }
            }
        }
        swaps.push_back(std::move(group));
    }
    return swaps;
}

template <typename Parse>
auto parse_named(const ConfigFile& file, const std::string& key,
                 const std::string& fallback, Parse&& parse) {
    const std::string name = file.get_string(key, fallback);
    try {
        return parse(name);
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what(), file.line_of(key));
    }
}

}  // namespace

RunSettings default_run_settings() {
    RunSettings settings;
    auto& exp = settings.experiment;
    exp.paradigm = engine::Paradigm::Chisme;
    exp.scenario.task = datagen::TaskKind::Classification;
    exp.scenario.n_clients = 20;
    exp.scenario.n_groups = 2;
    exp.scenario.samples_mean = 200;
    exp.scenario.samples_spread = 0.3;
    exp.scenario.input_dim = 2;
    exp.scenario.n_classes = 10;
    exp.scenario.eval_fraction = 0.25;
    exp.scenario.seed = 1;
    exp.model.kind = models::ModelKind::SoftmaxClassifier;
    exp.model.input_dim = 2;
    exp.model.output_dim = 10;
    exp.hyper.learning_rate = 0.25;
    exp.hyper.batch_size = 64;
    exp.hyper.epochs = 3;
    exp.connectivity = 1.0;
    exp.rewire_prob = 0.1;
    exp.reliability = 1.0;
    exp.rounds = 30;
    exp.seed = 1;
    settings.out_dir = "out";
    settings.loss_threshold = 0.5;
    return settings;
}

RunSettings parse_run_settings(const ConfigFile& file) {
    RunSettings settings = default_run_settings();
    auto& exp = settings.experiment;

    exp.paradigm = parse_named(file, "paradigm", "chisme",
                               [](const std::string& n) {
                                   return engine::paradigm_from_name(n);
                               });
    exp.schedule = parse_named(file, "schedule", "interleaved",
                               [](const std::string& n) {
                                   return engine::schedule_from_name(n);
                               });
    exp.seed = static_cast<std::uint64_t>(file.get_int("seed", 1));
    exp.rounds = static_cast<int>(file.get_int("rounds", 30));

    auto& sc = exp.scenario;
    sc.task = task_from_name(file.get_string("task", "classification"),
                             file.line_of("task"));
    sc.n_clients = static_cast<int>(file.get_int("n_clients", 20));
    sc.n_groups = static_cast<int>(file.get_int("n_groups", 2));
    sc.samples_mean = static_cast<int>(file.get_int("samples_mean", 200));
    sc.samples_spread = file.get_double("samples_spread", 0.3);
    sc.input_dim = static_cast<int>(file.get_int("input_dim", 2));
    sc.n_classes = static_cast<int>(file.get_int("n_classes", 10));
    sc.output_dim = static_cast<int>(file.get_int("output_dim", 1));
    sc.group_shift = file.get_double("group_shift", 0.5);
    sc.noise_std = file.get_double("noise_std", 0.1);
    sc.eval_fraction = file.get_double("eval_fraction", 0.25);
    sc.seed = exp.seed;
    const std::string swaps = file.get_string("swap_pairs", "default");
    if (swaps != "default") {
        sc.swap_pairs = parse_swaps(swaps, file.line_of("swap_pairs"));
    }

    auto& model = exp.model;
    model.kind = parse_named(file, "model", "softmax-classifier",
                             [](const std::string& n) {
                                 return models::model_kind_from_name(n);
                             });
    model.input_dim = sc.input_dim;
    model.output_dim = sc.task == datagen::TaskKind::Classification
                           ? sc.n_classes
                           : sc.output_dim;
    model.hidden_dim = static_cast<int>(file.get_int("hidden_dim", 8));
    if (model.kind != models::ModelKind::MlpClassifier) {
        model.hidden_dim = 0;
    }

    exp.hyper.learning_rate = file.get_double("learning_rate", 0.25);
    exp.hyper.batch_size = static_cast<int>(file.get_int("batch_size", 64));
    exp.hyper.epochs = static_cast<int>(file.get_int("epochs", 3));

    exp.connectivity = file.get_double("connectivity", 1.0);
    exp.rewire_prob = file.get_double("rewire_prob", 0.1);
    exp.reliability = file.get_double("reliability", 1.0);
    exp.experience_mode = file.get_bool("experience_counts_epochs", true)
                              ? protocol::ExperienceMode::SamplesTimesEpochs
                              : protocol::ExperienceMode::SamplesPerRound;

    settings.out_dir = file.get_string("out_dir", "out");
    settings.loss_threshold = file.get_double("loss_threshold", 0.5);

    file.reject_unconsumed();
    try {
        exp.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what(), 0);
    }
    return settings;
}

SweepSpec parse_sweep_spec(const ConfigFile& file) {
    // sweep keys are pulled before the base settings so reject_unconsumed
    // inside parse_run_settings sees them as consumed
    const std::string paradigms_text =
        file.get_string("paradigms", "chisme,gossip,local");
    const std::string seeds_text = file.get_string("seeds", "1,2,3,4,5");
    const std::string conditions_text =
        file.get_string("conditions", "1.0:1.0");

    SweepSpec spec;
    spec.base = parse_run_settings(file);

    for (const std::string& name : split(paradigms_text, ',')) {
        if (name.empty()) continue;
        try {
            spec.paradigms.push_back(engine::paradigm_from_name(name));
        } catch (const std::invalid_argument& err) {
            throw ConfigError(err.what(), file.line_of("paradigms"));
        }
    }
    for (const std::string& seed_text : split(seeds_text, ',')) {
        if (seed_text.empty()) continue;
        try {
            spec.seeds.push_back(
                static_cast<std::uint64_t>(std::stoll(seed_text)));
        } catch (const std::exception&) {
            throw ConfigError("`seeds` expects integers, got `" + seed_text + "`",
                              file.line_of("seeds"));
        }
    }
    for (const std::string& cond_text : split(conditions_text, ',')) {
        if (cond_text.empty()) continue;
        const auto colon = cond_text.find(':');
        if (colon == std::string::npos) {
            throw ConfigError(
                "`conditions` expects connectivity:reliability pairs, got `" +
                    cond_text + "`",
                file.line_of("conditions"));
        }
        try {
            spec.conditions.push_back(
                {std::stod(cond_text.substr(0, colon)),
                 std::stod(cond_text.substr(colon + 1))});
        } catch (const std::exception&) {
            throw ConfigError("`conditions` expects numbers, got `" + cond_text +
                                  "`",
                              file.line_of("conditions"));
        }
    }
    if (spec.paradigms.empty() || spec.seeds.empty() || spec.conditions.empty()) {
        throw ConfigError("sweep lists must be nonempty", 0);
    }
    return spec;
}

RunSettings load_run_settings(const std::string& path) {
    return parse_run_settings(ConfigFile::parse_file(path));
}

SweepSpec load_sweep_spec(const std::string& path) {
    return parse_sweep_spec(ConfigFile::parse_file(path));
}

}  // namespace chisme::config
