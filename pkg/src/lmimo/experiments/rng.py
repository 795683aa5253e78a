"""Deterministic random-stream derivation for experiment trials.

Every random draw in an experiment comes from a stream addressed by
(master seed, trial index, purpose label). The label is hashed into the
spawn key, so streams for different purposes never collide and adding a
new label never shifts existing ones.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


def _label_tag(label: str) -> int:
    digest = hashlib.blake2s(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_rng(master_seed: int, trial: int, label: str) -> np.random.Generator:
    """Independent generator for one (trial, purpose) pair."""
    seq = np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=(int(trial), _label_tag(label)))
    return np.random.default_rng(seq)


@dataclass(frozen=True)
class TrialStreams:
    """Bundle handing out purpose-labelled streams for one trial."""

    master_seed: int
    trial: int

    def get(self, label: str) -> np.random.Generator:
        return derive_rng(self.master_seed, self.trial, label)
