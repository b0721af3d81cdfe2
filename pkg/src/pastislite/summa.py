"""Plain and blocked 2D sparse SUMMA over the virtual grid.

The output matrix is formed in block_rows x block_cols blocks. Computing
block (r, c) takes row stripe r of A and column stripe c of B, each
2D-distributed over the full grid, and runs sqrt(p) stages: at stage t
the holders in grid column t broadcast their A piece along rows, the
holders in grid row t broadcast their B piece down columns, and each
worker multiply-accumulates locally.
"""

from dataclasses import dataclass
from time import perf_counter
from typing import Iterator, Optional

from .grid import DistMatrix, Grid, distribute, gather, split_bounds
from .sparse import (
    DimensionError,
    LocalSparse,
    Semiring,
    SpgemmCounters,
    local_spgemm,
    merge_accumulate,
)


@dataclass(frozen=True)
class BlockingFactor:
    block_rows: int = 1
    block_cols: int = 1

    def __post_init__(self):
        if self.block_rows < 1 or self.block_cols < 1:
            raise ValueError("blocking factors must be >= 1")

    @property
    def count(self) -> int:
        return self.block_rows * self.block_cols


@dataclass(frozen=True)
class BlockId:
    r: int
    c: int


@dataclass
class StripeSet:
    """Input stripes ready for blocked multiplication.

    a_stripes[r] holds global rows a_row_bounds[r] of A (all columns);
    b_stripes[c] holds global columns b_col_bounds[c] of B (all rows).
    Both are distributed over the full grid, sharing the inner-dimension
    split, so stage t's pieces always conform.
    """

    grid: Grid
    a_stripes: list[DistMatrix]
    b_stripes: list[DistMatrix]
    a_row_bounds: list[tuple[int, int]]
    b_col_bounds: list[tuple[int, int]]
    inner_dim: int


@dataclass
class DistBlock:
    """One computed output block, still distributed on the grid."""

    id: BlockId
    dist: DistMatrix
    row_range: tuple[int, int]  # global rows covered
    col_range: tuple[int, int]  # global cols covered


def stripe_inputs(a_dist: DistMatrix, b_dist: DistMatrix, bf: BlockingFactor) -> StripeSet:
    """Split A into row stripes and B into column stripes, each
    redistributed over the whole grid.

    The reshuffle is driver-side plumbing; the accounted communication
    of the algorithm is the per-stage broadcasts.
    """
    if a_dist.ncols != b_dist.nrows:
        raise DimensionError(
            f"inner dimensions differ: {a_dist.ncols} vs {b_dist.nrows}"
        )
    grid = a_dist.grid
    a = gather(a_dist)
    b = gather(b_dist)
    a_bounds = split_bounds(a.nrows, bf.block_rows)
    b_bounds = split_bounds(b.ncols, bf.block_cols)
    a_stripes = [
        distribute(a.submatrix(lo, hi, 0, a.ncols), grid) for lo, hi in a_bounds
    ]
    b_stripes = [
        distribute(b.submatrix(0, b.nrows, lo, hi), grid) for lo, hi in b_bounds
    ]
    return StripeSet(grid, a_stripes, b_stripes, a_bounds, b_bounds, a.ncols)


def summa_block(
    r: int,
    c: int,
    stripes: StripeSet,
    sr: Semiring,
    grid: Grid,
    *,
    counters: Optional[SpgemmCounters] = None,
    worker_seconds: Optional[list[float]] = None,
    timers: Optional[dict] = None,
) -> DistBlock:
    """Compute output block (r, c); equal to that block of the serial
    product under the semiring, exactly.

    timers, when given, receives "spgemm" (stage broadcasts plus local
    multiplies) and "merge" (partial-result accumulation) seconds.
    """
    q = grid.config.side
    astr = stripes.a_stripes[r]
    bstr = stripes.b_stripes[c]
    row0 = stripes.a_row_bounds[r][0]
    col0 = stripes.b_col_bounds[c][0]

    partials: list[list[LocalSparse]] = [[] for _ in range(grid.config.size)]
    t_stage = perf_counter()
    for t in range(q):
        a_parts = grid.broadcast_row(t, {i: astr.block(i, t) for i in range(q)})
        b_parts = grid.broadcast_col(t, {j: bstr.block(t, j) for j in range(q)})
        inner0 = astr.col_bounds[t][0]

        def step(rank):
            i, j = grid.config.coords_of(rank)
            partials[rank].append(
                local_spgemm(
                    a_parts[rank],
                    b_parts[rank],
                    sr,
                    row_offset=row0 + astr.row_bounds[i][0],
                    col_offset=col0 + bstr.col_bounds[j][0],
                    inner_offset=inner0,
                    counters=counters,
                )
            )

        grid.map_workers(step, seconds=worker_seconds)
    if timers is not None:
        timers["spgemm"] = timers.get("spgemm", 0.0) + (perf_counter() - t_stage)

    t_merge = perf_counter()
    add = sr.add
    blocks = {
        rank: merge_accumulate(parts, add) for rank, parts in enumerate(partials)
    }
    if timers is not None:
        timers["merge"] = timers.get("merge", 0.0) + (perf_counter() - t_merge)

    dist = DistMatrix(
        grid,
        stripes.a_row_bounds[r][1] - row0,
        stripes.b_col_bounds[c][1] - col0,
        blocks,
        list(astr.row_bounds),
        list(bstr.col_bounds),
    )
    return DistBlock(
        BlockId(r, c), dist, stripes.a_row_bounds[r], stripes.b_col_bounds[c]
    )


def blocked_summa(
    stripes: StripeSet,
    plan,
    sr: Semiring,
    grid: Grid,
    *,
    counters: Optional[SpgemmCounters] = None,
    worker_seconds: Optional[list[float]] = None,
    timers: Optional[dict] = None,
) -> Iterator[tuple[BlockId, str, DistBlock]]:
    """Yield the planned output blocks one at a time, in plan order.

    The consumer owns block lifetime; nothing beyond the block being
    formed is retained here, so peak memory is bounded by how many
    yielded blocks the caller keeps alive.
    """
    for block_id, cls in plan.entries:
        yield block_id, cls, summa_block(
            block_id.r,
            block_id.c,
            stripes,
            sr,
            grid,
            counters=counters,
            worker_seconds=worker_seconds,
            timers=timers,
        )
