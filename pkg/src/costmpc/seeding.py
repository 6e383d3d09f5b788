"""Deterministic seed-stream derivation.

A single master seed fans out into labeled child streams so that adding a
new consumer of randomness never perturbs the draws of an existing one.
Labels may be strings or integers; strings are hashed to stable 64-bit
values so the mapping is identical across processes and Python versions
(``hash()`` is salted per process and must not be used here).
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_to_int(label: "int | str") -> int:
    if isinstance(label, (int, np.integer)):
        return int(label)
    digest = hashlib.sha256(str(label).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def child_sequence(master_seed: int, *labels: "int | str") -> np.random.SeedSequence:
    """SeedSequence for the child stream named by ``labels``."""
    key = tuple(_label_to_int(x) for x in labels)
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)


def child_rng(master_seed: int, *labels: "int | str") -> np.random.Generator:
    """Generator seeded from the labeled child stream."""
    return np.random.default_rng(child_sequence(master_seed, *labels))


def child_seed(master_seed: int, *labels: "int | str") -> int:
    """A plain integer seed derived from the labeled child stream.

    Useful where an API takes a scalar seed (e.g. rollout seeds recorded in
    result files) rather than a Generator.
    """
    return int(child_sequence(master_seed, *labels).generate_state(1, np.uint64)[0])
