"""Group-arithmetic kernels, selected once at import.

The compiled extension (``vvote._native``) is used when importable; otherwise
the pure-Python implementations are used. Set ``VVOTE_BACKEND=python`` to
force the fallback or ``VVOTE_BACKEND=native`` to fail loudly when the
extension is missing.
"""

from __future__ import annotations

import os
from types import ModuleType

from vvote._purepy import bls as _py_bls
from vvote._purepy import ristretto as _py_r255

NAMES = (
    "r255_basemul",
    "r255_mul",
    "r255_add",
    "r255_sub",
    "r255_is_valid",
    "r255_from_uniform",
    "r255_lincomb",
    "elgamal_encrypt_batch",
    "elgamal_reencrypt_batch",
    "bls_hash_to_g1",
    "bls_g2_basemul",
    "bls_sign",
    "bls_verify",
    "bls_g1_lincomb",
    "bls_g2_lincomb",
)


class PythonKernels:
    """Namespace exposing the fallback under the native function names."""

    BACKEND = "python"

    def __init__(self) -> None:
        for name in NAMES:
            mod = _py_bls if name.startswith("bls_") else _py_r255
            setattr(self, name, getattr(mod, name))


def _load_native() -> ModuleType | None:
    try:
        from vvote import _native  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _native


def load(preference: str | None = None):
    """Return a kernel namespace for ``preference`` ("auto", "native", "python")."""
    pref = (preference or os.environ.get("VVOTE_BACKEND") or "auto").lower()
    if pref == "python":
        return PythonKernels()
    native = _load_native()
    if native is None:
        if pref == "native":
            raise ImportError("VVOTE_BACKEND=native but vvote._native is not built")
        return PythonKernels()
    return native


K = load()
BACKEND: str = K.BACKEND

r255_basemul = K.r255_basemul
r255_mul = K.r255_mul
r255_add = K.r255_add
r255_sub = K.r255_sub
r255_is_valid = K.r255_is_valid
r255_from_uniform = K.r255_from_uniform
r255_lincomb = K.r255_lincomb
elgamal_encrypt_batch = K.elgamal_encrypt_batch
elgamal_reencrypt_batch = K.elgamal_reencrypt_batch
bls_hash_to_g1 = K.bls_hash_to_g1
bls_g2_basemul = K.bls_g2_basemul
bls_sign = K.bls_sign
bls_verify = K.bls_verify
bls_g1_lincomb = K.bls_g1_lincomb
bls_g2_lincomb = K.bls_g2_lincomb
