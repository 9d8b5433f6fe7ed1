"""Seed splitting.

Every random stream is derived from one 64-bit master seed with
``numpy.random.SeedSequence(master, spawn_key=(stage, index))``.  The stage
code is the CRC32 of the stage name, so streams for different stages (and
different trial indices within a stage) are independent and never depend on
the order in which other streams were consumed.
"""

import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def stage_code(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def derive_rng(seed: int, stage: str, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & MASK64, spawn_key=(stage_code(stage), int(index)))
    return np.random.default_rng(ss)


def derive_seed(seed: int, stage: str, index: int = 0) -> int:
    """A 64-bit child seed, for handing to APIs that take an int."""
    ss = np.random.SeedSequence(int(seed) & MASK64, spawn_key=(stage_code(stage), int(index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
