"""Seeded synthetic protein corpora for tests and validation runs.

A corpus mixes unrelated random sequences with small mutated families so
the search space contains pairs that pass, pairs that fail the identity
threshold, and fragments that fail coverage.
"""

import random

from .seqio import SequenceRecord

STANDARD_RESIDUES = "ARNDCQEGHILKMFPSTWYV"


def synthetic_records(
    count: int,
    seed: int,
    *,
    min_len: int = 50,
    max_len: int = 500,
    family_fraction: float = 0.35,
    family_size: int = 3,
    mutation_rate: float = 0.12,
    fragment_fraction: float = 0.25,
) -> list[SequenceRecord]:
    """Deterministic corpus of `count` records for the given seed."""
    rng = random.Random(seed)
    residues: list[str] = []
    while len(residues) < count:
        length = rng.randint(min_len, max_len)
        base = "".join(rng.choice(STANDARD_RESIDUES) for _ in range(length))
        residues.append(base)
        if rng.random() < family_fraction:
            for _ in range(family_size - 1):
                if len(residues) >= count:
                    break
                variant = _mutate(base, rng, mutation_rate)
                if rng.random() < fragment_fraction:
                    variant = _fragment(variant, rng, min_len)
                residues.append(variant)
    return [
        SequenceRecord(i, f"s{i:05d}", seq) for i, seq in enumerate(residues)
    ]


def _mutate(seq: str, rng: random.Random, rate: float) -> str:
    out = list(seq)
    for pos, ch in enumerate(out):
        if rng.random() < rate:
            repl = rng.choice(STANDARD_RESIDUES)
            while repl == ch:
                repl = rng.choice(STANDARD_RESIDUES)
            out[pos] = repl
    return "".join(out)


def _fragment(seq: str, rng: random.Random, min_len: int) -> str:
    keep = max(min_len, int(len(seq) * rng.uniform(0.4, 0.9)))
    keep = min(keep, len(seq))
    start = rng.randint(0, len(seq) - keep)
    return seq[start:start + keep]
