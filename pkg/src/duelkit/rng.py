"""Deterministic stream derivation so every run owns a private, replayable RNG."""

from __future__ import annotations

import hashlib

import numpy as np


def stable_seed(*parts: int | str | bool) -> int:
    """Hash a tuple of labels and indices into a 128-bit seed.

    Unlike builtin ``hash``, the result is identical across processes and
    platforms, so seeds derived positionally (experiment seed, dataset,
    agent, budget, run) never depend on execution order.
    """
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, bool):
            tag = f"b:{int(part)}"
        elif isinstance(part, (int, np.integer)):
            tag = f"i:{int(part)}"
        elif isinstance(part, str):
            tag = f"s:{part}"
        else:
            raise TypeError(f"unhashable seed part of type {type(part).__name__}")
        h.update(tag.encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest()[:16], "little")


def derive_rng(*parts: int | str | bool) -> np.random.Generator:
    """A fresh PCG64 generator keyed by the given parts."""
    return np.random.default_rng(np.random.SeedSequence(stable_seed(*parts)))
