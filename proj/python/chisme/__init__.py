"""Decentralized differentiated learning simulator bindings."""

try:
    from ._chisme import *  # noqa: F401,F403
    from ._chisme import __doc__  # noqa: F401
except ImportError:  # running from a build tree, module beside the package
    from _chisme import *  # noqa: F401,F403

__version__ = "0.1.0"
