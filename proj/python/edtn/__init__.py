"""Energy-negotiated DTN models and discrete-event simulator."""

try:
    from edtn._edtn import *  # noqa: F401,F403  (installed wheel layout)
    from edtn import _edtn as _core
except ImportError:  # in-tree build: the extension sits on sys.path directly
    from _edtn import *  # noqa: F401,F403
    import _edtn as _core

__version__ = "0.1.0"
__doc__ = _core.__doc__
