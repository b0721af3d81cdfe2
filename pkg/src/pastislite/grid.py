"""Virtual sqrt(p) x sqrt(p) process grid with an in-process transport.

Workers are execution lanes driven by the grid: compute steps run per
rank (round-robin in sequential mode, via a thread pool otherwise) and
all data movement flows through a FIFO message transport, so a networked
backend could replace the transport without touching callers.

Broadcast accounting: one broadcast_row/broadcast_col call is a single
collective wave in which the sender column (or row) feeds every grid row
(or column) through a binomial tree; the wave increments its broadcast
counter once, while messages/bytes count the individual tree edges.
"""

import math
import threading
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from time import perf_counter
from typing import Callable, Mapping, Optional

from .sparse import LocalSparse, local_transpose

WORD_BYTES = 8


class GridError(ValueError):
    pass


class TransportTimeoutError(RuntimeError):
    """Raised when a receive finds no matching message in time (the
    in-process stand-in for a deadlocked collective)."""


@dataclass(frozen=True)
class GridConfig:
    size: int  # worker count p, a perfect square
    side: int  # sqrt(p)

    def rank_of(self, row: int, col: int) -> int:
        return row * self.side + col

    def coords_of(self, rank: int) -> tuple[int, int]:
        return divmod(rank, self.side)


@dataclass
class TrafficCounters:
    broadcasts_row: int = 0
    broadcasts_col: int = 0
    messages_sent: int = 0
    bytes_sent: int = 0
    tree_hops: int = 0


def payload_words(payload) -> int:
    """Deterministic payload size in words for counter accounting."""
    if isinstance(payload, LocalSparse):
        return payload.nnz
    if isinstance(payload, (bytes, str)):
        return (len(payload) + WORD_BYTES - 1) // WORD_BYTES
    return 1


class Transport:
    """Reliable, per-(sender, receiver) ordered message queues."""

    def __init__(self, size: int, *, blocking: bool, timeout: float = 10.0):
        self.size = size
        self.blocking = blocking
        self.timeout = timeout
        self._queues: dict[tuple[int, int], deque] = {}
        self._cv = threading.Condition()

    def _queue(self, src: int, dst: int) -> deque:
        q = self._queues.get((src, dst))
        if q is None:
            q = self._queues[(src, dst)] = deque()
        return q

    def send(self, src: int, dst: int, payload) -> None:
        with self._cv:
            self._queue(src, dst).append(payload)
            self._cv.notify_all()

    def recv(self, dst: int, src: int, timeout: Optional[float] = None):
        limit = self.timeout if timeout is None else timeout
        with self._cv:
            q = self._queue(src, dst)
            if not q and not self.blocking:
                raise TransportTimeoutError(
                    f"worker {dst} would deadlock waiting on {src}"
                )
            deadline = perf_counter() + limit
            while not q:
                remaining = deadline - perf_counter()
                if remaining <= 0:
                    raise TransportTimeoutError(
                        f"worker {dst} timed out waiting on {src} after {limit}s"
                    )
                self._cv.wait(remaining)
            return q.popleft()


def _tree_edges(n: int):
    """Binomial-tree edges over positions 0..n-1 rooted at 0, hop order."""
    h = 1
    while h < n:
        for src in range(h):
            dst = src + h
            if dst < n:
                yield src, dst
        h *= 2


class Grid:
    """p workers plus transport, counters, and collective drivers."""

    def __init__(self, config: GridConfig, mode: str = "sequential",
                 lanes: int = 1, timeout: float = 10.0):
        if mode not in ("sequential", "threaded"):
            raise GridError(f"unknown grid mode {mode!r}")
        self.config = config
        self.mode = mode
        self.counters = TrafficCounters()
        self.transport = Transport(config.size, blocking=(mode == "threaded"),
                                   timeout=timeout)
        self._pool = (
            ThreadPoolExecutor(max_workers=max(1, lanes))
            if mode == "threaded"
            else None
        )

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def map_workers(self, fn: Callable[[int], object],
                    seconds: Optional[list[float]] = None) -> list:
        """Run fn(rank) for every rank; results in rank order.

        seconds, when given, accumulates per-rank wall time (the
        per-worker compute accounting behind the imbalance metrics).
        """
        ranks = range(self.config.size)
        if seconds is None:
            if self._pool is not None:
                return list(self._pool.map(fn, ranks))
            return [fn(r) for r in ranks]

        def timed(rank):
            t0 = perf_counter()
            out = fn(rank)
            seconds[rank] += perf_counter() - t0
            return out

        if self._pool is not None:
            return list(self._pool.map(timed, ranks))
        return [timed(r) for r in ranks]

    # -- collectives -------------------------------------------------

    def _wave(self, groups: list[list[int]], payloads: Mapping[int, object]) -> dict:
        """One broadcast wave: groups[g][0] is the sender of payloads[g].

        Messages travel a binomial tree per group; every participant
        ends up holding the group's payload.
        """
        received: dict[int, object] = {}
        c = self.counters
        for g, members in enumerate(groups):
            payload = payloads[g]
            received[members[0]] = payload
            words = payload_words(payload)
            for s_pos, d_pos in _tree_edges(len(members)):
                src, dst = members[s_pos], members[d_pos]
                self.transport.send(src, dst, received[src])
                got = self.transport.recv(dst, src)
                received[dst] = got
                c.messages_sent += 1
                c.bytes_sent += words * WORD_BYTES
        q = self.config.side
        c.tree_hops += math.ceil(math.log2(q)) if q > 1 else 0
        return received

    def broadcast_row(self, sender_col: int, payloads: Mapping[int, object]) -> dict:
        """Workers (r, sender_col) broadcast payloads[r] along their rows.

        Returns rank -> payload for every worker. Counts as one row
        broadcast; tree edges and bytes are accounted per row.
        """
        q = self.config.side
        groups = []
        for row in range(q):
            order = [self.config.rank_of(row, (sender_col + o) % q) for o in range(q)]
            groups.append(order)
        self.counters.broadcasts_row += 1
        return self._wave(groups, payloads)

    def broadcast_col(self, sender_row: int, payloads: Mapping[int, object]) -> dict:
        """Column-wise twin of broadcast_row: payloads[c] spreads down column c."""
        q = self.config.side
        groups = []
        for col in range(q):
            order = [self.config.rank_of((sender_row + o) % q, col) for o in range(q)]
            groups.append(order)
        self.counters.broadcasts_col += 1
        return self._wave(groups, payloads)


def create_grid(p: int, mode: str = "sequential", lanes: int = 1,
                timeout: float = 10.0) -> Grid:
    if p < 1:
        raise GridError("worker count must be >= 1")
    q = math.isqrt(p)
    if q * q != p:
        raise GridError(f"worker count {p} is not a perfect square")
    return Grid(GridConfig(p, q), mode=mode, lanes=lanes, timeout=timeout)


# -- distributed matrices --------------------------------------------


def split_bounds(n: int, parts: int) -> list[tuple[int, int]]:
    """Ceiling-division ranges; the tail absorbs the remainder (possibly
    leaving trailing empty ranges when parts > n)."""
    step = -(-n // parts) if n else 0
    bounds = []
    for i in range(parts):
        lo = min(i * step, n)
        hi = min((i + 1) * step, n) if i < parts - 1 else n
        bounds.append((lo, hi))
    return bounds


@dataclass
class DistMatrix:
    """A matrix 2D-decomposed over the grid; block (r, c) covers
    row_bounds[r] x col_bounds[c] in its own index space."""

    grid: Grid
    nrows: int
    ncols: int
    blocks: dict[int, LocalSparse] = field(repr=False)
    row_bounds: list[tuple[int, int]] = field(default_factory=list)
    col_bounds: list[tuple[int, int]] = field(default_factory=list)

    def block(self, r: int, c: int) -> LocalSparse:
        return self.blocks[self.grid.config.rank_of(r, c)]

    @property
    def nnz(self) -> int:
        return sum(b.nnz for b in self.blocks.values())


def distribute(a: LocalSparse, grid: Grid) -> DistMatrix:
    """Slice a into sqrt(p) x sqrt(p) sub-blocks, one per worker."""
    q = grid.config.side
    row_b = split_bounds(a.nrows, q)
    col_b = split_bounds(a.ncols, q)
    blocks = {}
    for r in range(q):
        for c in range(q):
            blocks[grid.config.rank_of(r, c)] = a.submatrix(
                row_b[r][0], row_b[r][1], col_b[c][0], col_b[c][1]
            )
    return DistMatrix(grid, a.nrows, a.ncols, blocks, row_b, col_b)


def gather(dist: DistMatrix) -> LocalSparse:
    """Reassemble the global matrix from the workers' sub-blocks."""
    q = dist.grid.config.side
    rows: list[int] = []
    cols: list[int] = []
    vals: list = []
    for r in range(q):
        r0 = dist.row_bounds[r][0]
        for c in range(q):
            c0 = dist.col_bounds[c][0]
            blk = dist.block(r, c)
            rows.extend(i + r0 for i in blk.rows)
            for ci, col in enumerate(blk.cols):
                cols.extend([col + c0] * (blk.indptr[ci + 1] - blk.indptr[ci]))
            vals.extend(blk.vals)
    return LocalSparse.from_arrays(dist.nrows, dist.ncols, rows, cols, vals)


def distributed_transpose(dist: DistMatrix, remap=None) -> DistMatrix:
    """Transpose on the same grid: worker (r, c) ends up holding the
    locally-transposed sub-block that lived at (c, r)."""
    grid = dist.grid
    q = grid.config.side
    cfg = grid.config
    new_blocks: dict[int, LocalSparse] = {}
    for r in range(q):
        for c in range(q):
            src = cfg.rank_of(r, c)
            dst = cfg.rank_of(c, r)
            blk = dist.blocks[src]
            if src == dst:
                new_blocks[dst] = local_transpose(blk, remap)
            else:
                grid.transport.send(src, dst, blk)
                grid.counters.messages_sent += 1
                grid.counters.bytes_sent += payload_words(blk) * WORD_BYTES
    for r in range(q):
        for c in range(q):
            src = cfg.rank_of(r, c)
            dst = cfg.rank_of(c, r)
            if src != dst:
                got = grid.transport.recv(dst, src)
                new_blocks[dst] = local_transpose(got, remap)
    return DistMatrix(
        grid,
        dist.ncols,
        dist.nrows,
        new_blocks,
        list(dist.col_bounds),
        list(dist.row_bounds),
    )
