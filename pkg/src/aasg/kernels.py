"""Backend selection for the hot loops.

The compiled extension ``aasg._kernels`` is used when it imports; otherwise
the NumPy/SciPy module ``aasg._kernels_py``. Setting ``AASG_PURE_PYTHON=1``
forces the fallback. ``use()`` switches backends at runtime (tests, benchmarks).
"""
from __future__ import annotations

import importlib
import logging
import os
from contextlib import contextmanager

log = logging.getLogger(__name__)

_BACKENDS = {"cython": "aasg._kernels", "python": "aasg._kernels_py"}


def load(name: str):
    return importlib.import_module(_BACKENDS[name])


def available() -> list[str]:
    names = []
    for name in _BACKENDS:
        try:
            load(name)
        except ImportError:
            continue
        names.append(name)
    return names


def _initial():
    if os.environ.get("AASG_PURE_PYTHON", "") not in ("", "0"):
        return load("python")
    try:
        return load("cython")
    except ImportError:
        log.debug("compiled kernels unavailable, using the Python fallback")
        return load("python")


active = _initial()


def set_backend(name: str) -> None:
    global active
    active = load(name)


@contextmanager
def use(name: str):
    global active
    previous = active
    active = load(name)
    try:
        yield active
    finally:
        active = previous
