"""Kernel backend selection.

Hot loops (walk sampling, embedding training) exist twice: a numba-compiled
version in :mod:`hawe.kernels_nb` and a pure-numpy fallback in
:mod:`hawe.kernels_np`.  The compiled path is used whenever numba imports;
set ``HAWE_BACKEND=numpy`` to force the fallback or ``HAWE_BACKEND=numba``
to fail loudly when compilation is unavailable.

Walk sampling is bit-identical across the two backends.  Training follows
the same update rule but may differ in floating-point rounding because the
numpy path uses vectorised reductions; manifests therefore record which
backend produced an artifact.
"""

from __future__ import annotations

import os

ENV_VAR = "HAWE_BACKEND"

_numba_ok: bool | None = None


def numba_available() -> bool:
    global _numba_ok
    if _numba_ok is None:
        try:
            import numba  # noqa: F401

            _numba_ok = True
        except ImportError:
            _numba_ok = False
    return _numba_ok


def active_backend() -> str:
    """Resolve the backend name: ``"numba"`` or ``"numpy"``."""
    forced = os.environ.get(ENV_VAR, "").strip().lower()
    if forced == "numpy":
        return "numpy"
    if forced == "numba":
        if not numba_available():
            raise RuntimeError(f"{ENV_VAR}=numba but numba is not importable")
        return "numba"
    if forced not in ("", "auto"):
        raise RuntimeError(f"unknown {ENV_VAR} value {forced!r}; use 'numba' or 'numpy'")
    return "numba" if numba_available() else "numpy"


def get_kernels():
    """Import and return the active kernel module."""
    if active_backend() == "numba":
        from . import kernels_nb

        return kernels_nb
    from . import kernels_np

    return kernels_np
