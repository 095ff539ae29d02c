"""Seed sub-streams.

A master seed is split into named, independent streams by hashing
``"<master>/<name>/<extra>..."`` with SHA-256 and keeping the first 8 bytes.
Adding draws to one stream (say more lab trials) therefore never shifts the
randomness seen by another (the recolouring stream).
"""

from __future__ import annotations

import hashlib
import random
from typing import Sequence

import numpy as np

RECOLOR = "recolor"
COMPLETION = "completion"
LAB = "lab"
LISTS = "lists"


def derive_seed(master: int, *names: object) -> int:
    key = "/".join([str(int(master))] + [str(n) for n in names])
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big")


def stream(master: int, *names: object) -> random.Random:
    return random.Random(derive_seed(master, *names))


def np_stream(master: int, *names: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *names))


def mixed_radix(x: int, radices: Sequence[int]) -> list[int]:
    """Digits of ``x`` in the given radices, least significant first."""
    digits = []
    for r in radices:
        x, d = divmod(x, r)
        digits.append(d)
    if x:
        raise ValueError("value exceeds the product of the radices")
    return digits


def draw_product(options: Sequence[Sequence[object]], rng: random.Random) -> tuple[list[object], int]:
    """One uniform draw from the product of ``options`` using a single
    ``randrange`` call; returns the chosen tuple and the product size."""
    radices = [len(o) for o in options]
    size = 1
    for r in radices:
        size *= r
    x = rng.randrange(size)
    return [o[d] for o, d in zip(options, mixed_radix(x, radices))], size
