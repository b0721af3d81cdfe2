"""Sequence-by-k-mer matrix construction and the overlap semiring.

A row per sequence, a column per possible k-mer (alphabet_size**k wide).
An entry holds the first occurrence position of that k-mer in that
sequence. Multiplying the matrix with its transpose under the overlap
semiring yields, per sequence pair, the number of distinct shared k-mers
plus up to two seed positions.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

from . import alphabet
from .seqio import SequenceRecord
from .sparse import LocalSparse, Semiring

log = logging.getLogger(__name__)

# Payload of the k-mer matrix: first-occurrence residue offset.
KmerEntry = int

Seed = tuple[int, int, int]  # (pos in row sequence, pos in col sequence, kmer code)


@dataclass(frozen=True)
class KmerParams:
    k: int = 6
    alphabet_size: int = alphabet.SIZE
    min_shared_kmers: int = 2

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.alphabet_size != alphabet.SIZE:
            raise ValueError(f"alphabet size is fixed at {alphabet.SIZE}")
        if self.min_shared_kmers < 0:
            raise ValueError("min_shared_kmers must be >= 0")

    @property
    def code_space(self) -> int:
        return self.alphabet_size ** self.k


def encode_kmer(residues: str, alphabet_size: int = alphabet.SIZE) -> int:
    """Bijective base-25 code, first residue most significant."""
    code = 0
    for ch in residues:
        try:
            code = code * alphabet_size + alphabet.INDEX[ch]
        except KeyError:
            raise ValueError(f"residue {ch!r} outside the alphabet") from None
    return code


def build_kmer_matrix(seqs: Iterable[SequenceRecord], params: KmerParams) -> LocalSparse:
    """n x alphabet_size**k matrix; one entry per distinct k-mer per sequence.

    Sequences shorter than k keep their row index but contribute no
    entries (counted and logged).
    """
    seqs = list(seqs)
    k = params.k
    base = params.alphabet_size
    msb = base ** (k - 1)
    index = alphabet.INDEX
    rows: list[int] = []
    cols: list[int] = []
    vals: list[int] = []
    short = 0
    for rec in seqs:
        s = rec.residues
        n = len(s)
        if n < k:
            short += 1
            continue
        code = 0
        for t in range(k):
            code = code * base + index[s[t]]
        seen = {code: 0}
        for pos in range(1, n - k + 1):
            code = (code - index[s[pos - 1]] * msb) * base + index[s[pos + k - 1]]
            if code not in seen:
                seen[code] = pos
        rows.extend([rec.id] * len(seen))
        cols.extend(seen.keys())
        vals.extend(seen.values())
    if short:
        log.warning("%d sequences shorter than k=%d produce no k-mers", short, k)
    return LocalSparse.from_arrays(len(seqs), params.code_space, rows, cols, vals)


@dataclass(slots=True)
class OverlapPayload:
    """Shared-k-mer count plus the two smallest-code seeds.

    Keeping the two smallest codes makes add commutative and
    associative, so merged results do not depend on accumulation order.
    """

    count: int
    seed1: Optional[Seed]
    seed2: Optional[Seed]


def _merge_payloads(x: OverlapPayload, y: OverlapPayload) -> OverlapPayload:
    seeds = [s for s in (x.seed1, x.seed2, y.seed1, y.seed2) if s is not None]
    seeds.sort(key=lambda s: s[2])
    return OverlapPayload(
        x.count + y.count,
        seeds[0] if seeds else None,
        seeds[1] if len(seeds) > 1 else None,
    )


def _pair_seed(a_pos: int, b_pos: int, row: int, col: int, code: int) -> OverlapPayload:
    return OverlapPayload(1, (a_pos, b_pos, code), None)


def overlap_semiring(params: KmerParams | None = None) -> Semiring:
    """Semiring whose product of A with its transpose counts shared k-mers.

    is_zero is always false: thresholding happens after the multiply, so
    the full candidate counts stay observable.
    """
    return Semiring(multiply=_pair_seed, add=_merge_payloads, is_zero=None)
