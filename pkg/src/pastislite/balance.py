"""Symmetry-exploiting block planning and pruning.

The overlap matrix is symmetric, so each unordered candidate pair only
needs one surviving entry. The triangularity scheme skips every block
strictly below the diagonal and keeps the strict upper triangle of the
diagonal blocks. The index scheme computes all blocks and keeps, per
entry, exactly one of the two mirrored coordinates based on row/column
parity, which preserves the uniform nonzero distribution.
"""

from dataclasses import dataclass

from .sparse import LocalSparse
from .summa import BlockId, BlockingFactor

SCHEME_TRIANGULARITY = "triangularity"
SCHEME_INDEX = "index"
SCHEMES = (SCHEME_INDEX, SCHEME_TRIANGULARITY)

CLASS_FULL = "full"
CLASS_PARTIAL = "partial"
CLASS_AVOIDABLE = "avoidable"
CLASS_ALL = "all"


@dataclass(frozen=True)
class BlockPlan:
    scheme: str
    bf: BlockingFactor
    entries: tuple  # ((BlockId, class), ...) in row-major order

    @property
    def computed_blocks(self) -> int:
        return len(self.entries)


def classify_block(block: BlockId, b: int) -> str:
    """Triangularity classes for square blocking b x b.

    Blocks above the diagonal lie entirely in the strict upper triangle
    (full), diagonal blocks straddle it (partial), the rest never
    intersect it (avoidable).
    """
    if not (0 <= block.r < b and 0 <= block.c < b):
        raise ValueError(f"block {block} outside {b}x{b}")
    if block.r < block.c:
        return CLASS_FULL
    if block.r == block.c:
        return CLASS_PARTIAL
    return CLASS_AVOIDABLE


def block_class_counts(b: int) -> dict[str, int]:
    return {
        CLASS_FULL: b * (b - 1) // 2,
        CLASS_PARTIAL: b,
        CLASS_AVOIDABLE: b * (b - 1) // 2,
    }


def make_plan(scheme: str, bf: BlockingFactor) -> BlockPlan:
    """Row-major execution plan; triangularity omits avoidable blocks."""
    if scheme == SCHEME_TRIANGULARITY:
        if bf.block_rows != bf.block_cols:
            raise ValueError(
                "triangularity-based balancing requires square blocking, got "
                f"{bf.block_rows}x{bf.block_cols}"
            )
        entries = []
        for r in range(bf.block_rows):
            for c in range(bf.block_cols):
                cls = classify_block(BlockId(r, c), bf.block_rows)
                if cls != CLASS_AVOIDABLE:
                    entries.append((BlockId(r, c), cls))
        return BlockPlan(scheme, bf, tuple(entries))
    if scheme == SCHEME_INDEX:
        entries = [
            (BlockId(r, c), CLASS_ALL)
            for r in range(bf.block_rows)
            for c in range(bf.block_cols)
        ]
        return BlockPlan(scheme, bf, tuple(entries))
    raise ValueError(f"unknown balancing scheme {scheme!r}")


def prune_triangularity(
    block: LocalSparse, cls: str, row_offset: int = 0, col_offset: int = 0
) -> LocalSparse:
    """Full blocks pass through; partial blocks keep the strict upper
    triangle in global coordinates (self-pairs always drop)."""
    if cls == CLASS_FULL:
        return block
    if cls != CLASS_PARTIAL:
        raise ValueError(f"cannot prune class {cls!r}")
    return block.filter(lambda r, c, v: row_offset + r < col_offset + c)


def prune_index(
    block: LocalSparse, row_offset: int = 0, col_offset: int = 0
) -> LocalSparse:
    """Parity rule on global ids: keep lower-triangular entries whose
    indices share parity and upper-triangular entries whose indices
    differ in parity; each unordered pair then survives exactly once."""

    def keep(r, c, v):
        i = row_offset + r
        j = col_offset + c
        if i == j:
            return False
        if i > j:
            return (i & 1) == (j & 1)
        return (i & 1) != (j & 1)

    return block.filter(keep)


def prune_block(
    scheme: str,
    block: LocalSparse,
    cls: str,
    row_offset: int = 0,
    col_offset: int = 0,
) -> LocalSparse:
    if scheme == SCHEME_TRIANGULARITY:
        return prune_triangularity(block, cls, row_offset, col_offset)
    if scheme == SCHEME_INDEX:
        return prune_index(block, row_offset, col_offset)
    raise ValueError(f"unknown balancing scheme {scheme!r}")
