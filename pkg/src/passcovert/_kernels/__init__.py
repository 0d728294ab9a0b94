"""Kernel backend selection.

The compiled extension ``_core`` is used when it was built; otherwise the
NumPy fallback is imported. Set ``PASSCOVERT_PURE_PYTHON=1`` to force the
fallback (the benchmark and the cross-backend tests do this).
"""
import importlib
import os

from . import _fallback


def _load_compiled():
    if os.environ.get("PASSCOVERT_PURE_PYTHON", "") in ("1", "true", "yes"):
        return None
    try:
        return importlib.import_module(__name__ + "._core")
    except ImportError:
        return None


_compiled = _load_compiled()
BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _fallback

esp = _impl.esp
poibin_pmf = _impl.poibin_pmf
dep_components = _impl.dep_components
min_dep_search = _impl.min_dep_search

__all__ = ["BACKEND", "esp", "poibin_pmf", "dep_components", "min_dep_search"]
