"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the pure-Python
module takes over.  Setting ``DQIBENCH_PURE=1`` forces the fallback.
"""
from __future__ import annotations

import importlib
import os
from types import ModuleType


def load_backend(name: str) -> ModuleType:
    """Return the kernel module called ``name`` ("native" or "pure")."""
    if name not in ("native", "pure"):
        raise ValueError(f"unknown kernel backend {name!r}")
    return importlib.import_module(f"dqibench._{name}")


def _select() -> ModuleType:
    if os.environ.get("DQIBENCH_PURE", "") not in ("", "0"):
        return load_backend("pure")
    try:
        return load_backend("native")
    except ImportError:
        return load_backend("pure")


backend = _select()
BACKEND_NAME = backend.__name__.rsplit("._", 1)[-1]

gf2_rref = backend.gf2_rref
sturm_count = backend.sturm_count
anneal_f2 = backend.anneal_f2
anneal_fp = backend.anneal_fp
advrand_pass = backend.advrand_pass
