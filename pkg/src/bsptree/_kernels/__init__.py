"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is used when the
extension was not built or when ``BSPTREE_PURE=1`` is set.
"""

import os

if os.environ.get("BSPTREE_PURE") == "1":
    from . import pure as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pure as _impl

BACKEND = _impl.BACKEND
perimeter = _impl.perimeter
area = _impl.area
diameter = _impl.diameter
project = _impl.project
projection_lengths = _impl.projection_lengths
contains = _impl.contains
contains_many = _impl.contains_many
split = _impl.split
clip_convex = _impl.clip_convex


def get_backend(name):
    """Return a specific backend module ("cython" or "python")."""
    if name == "python":
        from . import pure

        return pure
    if name == "cython":
        from . import _core  # type: ignore[attr-defined]

        return _core
    raise ValueError(f"unknown backend {name!r}")
