"""Batched Smith-Waterman local alignment with affine gaps.

Full-matrix scoring (no banding, no x-drop): a gap of length L costs
gap_open + (L-1) * gap_extend. The kernel fills the three Gotoh matrices
row by row with vectorized updates; the horizontal-gap recurrence is
resolved with a prefix max, which is exact whenever gap_open >=
gap_extend. Traceback tie-breaking is fixed (smallest end cell, then
diagonal over up over left, gaps closed as early as possible) so results
are identical across batch orders and platforms.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context
from time import perf_counter
from typing import Optional, Sequence

import numpy as np

from . import blosum62
from .alphabet import ALPHABET, INDEX, SIZE
from .seqio import SimilarityEdge

_NEG = -(1 << 29)

# byte -> alphabet index for fast sequence encoding
_LUT = np.full(256, INDEX["X"], dtype=np.int64)
for _ch, _ix in INDEX.items():
    _LUT[ord(_ch)] = _ix


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class AlignParams:
    gap_open: int = 11
    gap_extend: int = 2
    matrix: np.ndarray = field(default_factory=lambda: blosum62.MATRIX)
    min_identity: float = 0.30
    min_coverage: float = 0.70

    def __post_init__(self):
        if not (self.gap_open >= self.gap_extend >= 0):
            raise ValueError("need gap_open >= gap_extend >= 0")
        m = np.asarray(self.matrix)
        if m.shape != (SIZE, SIZE):
            raise ValueError(f"substitution matrix must be {SIZE}x{SIZE}")
        if not np.array_equal(m, m.T):
            raise ValueError("substitution matrix must be symmetric")


@dataclass(slots=True)
class AlignmentResult:
    """Optimal local alignment; spans are 0-based inclusive residue
    offsets, all -1 for the empty (score 0) alignment."""

    score: int
    i_begin: int
    i_end: int
    j_begin: int
    j_end: int
    matches: int
    aln_len: int
    cells: int


def encode(residues: str) -> np.ndarray:
    return _LUT[np.frombuffer(residues.encode("ascii"), dtype=np.uint8)]


def smith_waterman(a: str, b: str, params: AlignParams) -> AlignmentResult:
    result, _ = _smith_waterman_timed(a, b, params)
    return result


def _smith_waterman_timed(a: str, b: str, params: AlignParams) -> tuple[AlignmentResult, float]:
    """Returns the result plus seconds spent in the scoring fill."""
    if not a or not b:
        raise AlignmentError("cannot align an empty sequence")
    ai = encode(a)
    bi = encode(b)
    m, n = len(a), len(b)
    mat = np.asarray(params.matrix, dtype=np.int32)
    open_ = params.gap_open
    ext = params.gap_extend

    # Only H's zero boundary, F's top row, and E's left column are ever
    # read before being written, so the rest starts uninitialized.
    H = np.zeros((m + 1, n + 1), dtype=np.int32)
    E = np.empty((m + 1, n + 1), dtype=np.int32)
    F = np.empty((m + 1, n + 1), dtype=np.int32)
    E[:, 0] = _NEG
    F[0, :] = _NEG
    steps = np.arange(n, dtype=np.int32) * ext
    open_plus_steps = steps + open_
    sub_all = mat[np.ix_(ai, bi)]
    scratch = np.empty(n, dtype=np.int32)
    R = np.empty(n, dtype=np.int32)

    t0 = perf_counter()
    for i in range(1, m + 1):
        Hp = H[i - 1]
        Fi = F[i]
        np.subtract(Hp[1:], open_, out=Fi[1:])
        np.subtract(F[i - 1, 1:], ext, out=scratch)
        np.maximum(Fi[1:], scratch, out=Fi[1:])
        P = np.add(Hp[:n], sub_all[i - 1], out=scratch)
        np.maximum(P, Fi[1:], out=P)
        np.maximum(P, 0, out=P)
        # horizontal gaps as a prefix max over gap-open candidates;
        # exact because reopening (open) never beats extending (ext)
        R[0] = 0
        if n > 1:
            np.add(P[:-1], steps[1:], out=R[1:])
        np.maximum.accumulate(R, out=R)
        Ei = E[i]
        np.subtract(R, open_plus_steps, out=Ei[1:])
        np.maximum(P, Ei[1:], out=H[i, 1:])
    kernel_seconds = perf_counter() - t0

    flat = int(np.argmax(H))  # first occurrence = smallest (i_end, j_end)
    best = int(H.flat[flat])
    cells = m * n
    if best == 0:
        return AlignmentResult(0, -1, -1, -1, -1, 0, 0, cells), kernel_seconds

    i, j = divmod(flat, n + 1)
    i_end, j_end = i - 1, j - 1

    matches = 0
    aln_len = 0
    state = "H"
    while True:
        if state == "H":
            h = H[i, j]
            if h == 0:
                break
            if h == H[i - 1, j - 1] + mat[ai[i - 1], bi[j - 1]]:
                matches += a[i - 1] == b[j - 1]
                aln_len += 1
                i -= 1
                j -= 1
            elif h == F[i, j]:
                state = "F"
            elif h == E[i, j]:
                state = "E"
            else:  # pragma: no cover - recurrence violated
                raise AssertionError("traceback lost at H state")
        elif state == "F":
            f = F[i, j]
            aln_len += 1
            close = H[i - 1, j] - open_
            i -= 1
            if f == close:
                state = "H"
            elif f != F[i, j] - ext:  # pragma: no cover
                raise AssertionError("traceback lost at F state")
        else:
            e = E[i, j]
            aln_len += 1
            close = H[i, j - 1] - open_
            j -= 1
            if e == close:
                state = "H"
            elif e != E[i, j] - ext:  # pragma: no cover
                raise AssertionError("traceback lost at E state")

    result = AlignmentResult(
        score=best,
        i_begin=int(i),
        i_end=int(i_end),
        j_begin=int(j),
        j_end=int(j_end),
        matches=int(matches),
        aln_len=int(aln_len),
        cells=cells,
    )
    return result, kernel_seconds


def evaluate_pair(
    i: int,
    j: int,
    a: str,
    b: str,
    result: AlignmentResult,
    params: AlignParams,
) -> Optional[SimilarityEdge]:
    """Identity/coverage filter; returns a canonical edge or None.

    identity = matches / alignment length (gap columns included);
    coverage is each sequence's aligned span over its length; acceptance
    needs identity >= min_identity and min coverage >= min_coverage.
    Empty alignments have undefined identity and are rejected.
    """
    if i >= j:
        raise ValueError(f"pair not canonical: ({i}, {j})")
    if result.aln_len == 0:
        return None
    identity = result.matches / result.aln_len
    cov_a = (result.i_end - result.i_begin + 1) / len(a)
    cov_b = (result.j_end - result.j_begin + 1) / len(b)
    if identity >= params.min_identity and min(cov_a, cov_b) >= params.min_coverage:
        return SimilarityEdge(i, j, result.score, identity, cov_a, cov_b)
    return None


@dataclass
class BatchCounters:
    alignments: int = 0
    cells: int = 0
    kernel_seconds: float = 0.0

    def merge(self, other: "BatchCounters") -> None:
        self.alignments += other.alignments
        self.cells += other.cells
        self.kernel_seconds += other.kernel_seconds


def align_batch(
    pairs: Sequence[tuple], params: AlignParams
) -> tuple[list, list, BatchCounters]:
    """Align (seq_a, seq_b, payload) tuples in order.

    Returns (results, errors, counters); a failing pair leaves None in
    its result slot and an (index, exception) entry instead of aborting
    the batch. Results do not depend on batch order.
    """
    results: list = []
    errors: list = []
    counters = BatchCounters()
    for idx, (a, b, _payload) in enumerate(pairs):
        try:
            res, kernel = _smith_waterman_timed(a, b, params)
        except Exception as exc:  # noqa: BLE001 - isolation is the contract
            results.append(None)
            errors.append((idx, exc))
            continue
        results.append(res)
        counters.alignments += 1
        counters.cells += res.cells
        counters.kernel_seconds += kernel
    return results, errors, counters


# -- batch engine ----------------------------------------------------

_WORKER_PARAMS: Optional[AlignParams] = None


def _init_worker(params: AlignParams) -> None:
    global _WORKER_PARAMS
    _WORKER_PARAMS = params


def _run_chunk(chunk: list) -> tuple:
    t0 = perf_counter()
    results, errors, counters = align_batch(chunk, _WORKER_PARAMS)
    return results, errors, counters, os.getpid(), perf_counter() - t0


def _chunk(items: list, parts: int) -> list[list]:
    if parts <= 1 or len(items) <= 1:
        return [items]
    step = -(-len(items) // parts)
    return [items[i:i + step] for i in range(0, len(items), step)]


class _Pending:
    """Handle for a submitted batch; result() reassembles chunk outputs
    in submission order."""

    def __init__(self, futures=None, resolved=None):
        self._futures = futures
        self._resolved = resolved

    def result(self) -> tuple[list, list, BatchCounters, list]:
        if self._resolved is not None:
            return self._resolved
        results: list = []
        errors: list = []
        counters = BatchCounters()
        lanes: list = []
        offset = 0
        for fut in self._futures:
            chunk_results, chunk_errors, chunk_counters, lane, secs = fut.result()
            results.extend(chunk_results)
            errors.extend((offset + idx, exc) for idx, exc in chunk_errors)
            counters.merge(chunk_counters)
            lanes.append((lane, chunk_counters.kernel_seconds, secs))
            offset += len(chunk_results)
        self._resolved = (results, errors, counters, lanes)
        return self._resolved


class AlignEngine:
    """Dispatches batches either inline or across worker processes.

    Worker processes stand in for the accelerator lanes of the original
    design: the dispatching side stays free to run sparse work while a
    batch is in flight.
    """

    def __init__(self, params: AlignParams, lanes: int = 1, use_processes: bool = False):
        if lanes < 1:
            raise ValueError("need at least one alignment lane")
        self.params = params
        self.lanes = lanes
        self.use_processes = use_processes
        self._pool: Optional[ProcessPoolExecutor] = None

    def start(self) -> None:
        if self.use_processes and self._pool is None:
            self._pool = ProcessPoolExecutor(
                max_workers=self.lanes,
                mp_context=get_context("fork"),
                initializer=_init_worker,
                initargs=(self.params,),
            )
            # Warm the workers so forking happens before any lane threads
            # exist and startup cost lands on engine start.
            list(self._pool.map(_probe, range(self.lanes)))

    def submit(self, pairs: list) -> _Pending:
        if not self.use_processes:
            results, errors, counters = align_batch(pairs, self.params)
            return _Pending(resolved=(results, errors, counters,
                                      [(0, counters.kernel_seconds, counters.kernel_seconds)]))
        self.start()
        futures = [self._pool.submit(_run_chunk, chunk)
                   for chunk in _chunk(pairs, self.lanes)]
        return _Pending(futures=futures)

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc):
        self.close()


def _probe(_i: int) -> int:
    return 0
