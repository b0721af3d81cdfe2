"""Column-compressed sparse matrices over arbitrary payloads, with a
semiring-parameterized local SpGEMM.

Storage keeps offsets only for non-empty columns (the k-mer matrices are
millions of columns wide, so per-column offset arrays would dwarf the
payload). One layout serves every sparsity regime.
"""

from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

# Output columns with at most this many rows use a dense accumulator.
DEFAULT_DENSE_THRESHOLD = 1 << 16


class DimensionError(ValueError):
    pass


class Semiring:
    """Multiply/add pair with a zero test.

    multiply(a, b, row, col, inner) -> C receives global indices so
    payloads can record positions. add must be associative and
    commutative on the payloads used here; that is what makes results
    independent of accumulation order.
    """

    __slots__ = ("multiply", "add", "is_zero")

    def __init__(self, multiply, add, is_zero=None):
        self.multiply = multiply
        self.add = add
        self.is_zero = is_zero if is_zero is not None else (lambda _: False)


def arithmetic_semiring() -> Semiring:
    return Semiring(
        multiply=lambda a, b, i, j, k: a * b,
        add=lambda x, y: x + y,
        is_zero=lambda c: c == 0,
    )


@dataclass
class SpgemmCounters:
    """Multiply invocations (flops), for compression-factor accounting."""

    flops: int = 0


class LocalSparse:
    """Immutable-by-convention sparse matrix compressed by column.

    cols lists the non-empty columns in ascending order; indptr has
    len(cols)+1 offsets into rows/vals; row indices are strictly
    increasing within each column.
    """

    __slots__ = ("nrows", "ncols", "cols", "indptr", "rows", "vals")

    def __init__(self, nrows, ncols, cols, indptr, rows, vals):
        self.nrows = nrows
        self.ncols = ncols
        self.cols = cols
        self.indptr = indptr
        self.rows = rows
        self.vals = vals

    @property
    def nnz(self) -> int:
        return len(self.vals)

    @classmethod
    def empty(cls, nrows: int, ncols: int) -> "LocalSparse":
        return cls(nrows, ncols, [], [0], [], [])

    @classmethod
    def from_coo(cls, nrows, ncols, entries, combine=None) -> "LocalSparse":
        """Build from (row, col, payload) triples.

        Duplicate coordinates are an error unless `combine` merges them
        (applied left-to-right in input order).
        """
        in_rows: list[int] = []
        in_cols: list[int] = []
        in_vals: list = []
        for r, c, v in entries:
            in_rows.append(r)
            in_cols.append(c)
            in_vals.append(v)
        return cls.from_arrays(nrows, ncols, in_rows, in_cols, in_vals, combine=combine)

    @classmethod
    def from_arrays(cls, nrows, ncols, in_rows, in_cols, in_vals, combine=None) -> "LocalSparse":
        """Build from parallel row/col/payload lists (order arbitrary)."""
        if not (len(in_rows) == len(in_cols) == len(in_vals)):
            raise ValueError("row/col/val lists must have equal length")
        if in_rows:
            row_arr = np.asarray(in_rows, dtype=np.int64)
            col_arr = np.asarray(in_cols, dtype=np.int64)
            if row_arr.min() < 0 or row_arr.max() >= nrows or col_arr.min() < 0 or col_arr.max() >= ncols:
                raise IndexError(f"entry outside {nrows}x{ncols}")
            order = np.lexsort((row_arr, col_arr)).tolist()
        else:
            order = ()

        out_cols: list[int] = []
        indptr = [0]
        rows: list[int] = []
        vals: list = []
        prev_c = prev_r = -1
        for idx in order:
            r = in_rows[idx]
            c = in_cols[idx]
            v = in_vals[idx]
            if c == prev_c and r == prev_r:
                if combine is None:
                    raise ValueError(f"duplicate entry at ({r}, {c})")
                vals[-1] = combine(vals[-1], v)
                continue
            if c != prev_c:
                if out_cols:
                    indptr.append(len(rows))
                out_cols.append(c)
                prev_c = c
            prev_r = r
            rows.append(r)
            vals.append(v)
        if out_cols:
            indptr.append(len(rows))
        return cls(nrows, ncols, out_cols, indptr, rows, vals)

    def check(self) -> None:
        """Validate structural invariants (test helper)."""
        assert len(self.indptr) == len(self.cols) + 1
        assert self.indptr[0] == 0 and self.indptr[-1] == self.nnz
        assert all(a <= b for a, b in zip(self.indptr, self.indptr[1:]))
        assert all(a < b for a, b in zip(self.cols, self.cols[1:]))
        assert all(0 <= c < self.ncols for c in self.cols)
        for ci in range(len(self.cols)):
            seg = self.rows[self.indptr[ci]:self.indptr[ci + 1]]
            assert len(seg) > 0, "empty column stored"
            assert all(a < b for a, b in zip(seg, seg[1:]))
            assert all(0 <= r < self.nrows for r in seg)

    def column(self, c: int) -> tuple[Sequence[int], Sequence]:
        ci = bisect_left(self.cols, c)
        if ci == len(self.cols) or self.cols[ci] != c:
            return (), ()
        lo, hi = self.indptr[ci], self.indptr[ci + 1]
        return self.rows[lo:hi], self.vals[lo:hi]

    def iter_columns(self) -> Iterator[tuple[int, Sequence[int], Sequence]]:
        for ci, c in enumerate(self.cols):
            lo, hi = self.indptr[ci], self.indptr[ci + 1]
            yield c, self.rows[lo:hi], self.vals[lo:hi]

    def to_coo(self) -> Iterator[tuple[int, int, object]]:
        """Entries in (col, row) order."""
        for c, rows, vals in self.iter_columns():
            for r, v in zip(rows, vals):
                yield r, c, v

    def submatrix(self, r0, r1, c0, c1) -> "LocalSparse":
        """Copy of the [r0,r1) x [c0,c1) window with local indices."""
        out_cols: list[int] = []
        indptr = [0]
        out_rows: list[int] = []
        out_vals: list = []
        lo_ci = bisect_left(self.cols, c0)
        hi_ci = bisect_left(self.cols, c1)
        for ci in range(lo_ci, hi_ci):
            lo, hi = self.indptr[ci], self.indptr[ci + 1]
            seg = self.rows[lo:hi]
            a = lo + bisect_left(seg, r0)
            b = lo + bisect_left(seg, r1)
            if a == b:
                continue
            out_cols.append(self.cols[ci] - c0)
            out_rows.extend(r - r0 for r in self.rows[a:b])
            out_vals.extend(self.vals[a:b])
            indptr.append(len(out_rows))
        return LocalSparse(r1 - r0, c1 - c0, out_cols, indptr, out_rows, out_vals)

    def filter(self, keep: Callable[[int, int, object], bool]) -> "LocalSparse":
        """Entries surviving keep(row, col, val); structure preserved."""
        out_cols: list[int] = []
        indptr = [0]
        out_rows: list[int] = []
        out_vals: list = []
        for c, rows, vals in self.iter_columns():
            start = len(out_rows)
            for r, v in zip(rows, vals):
                if keep(r, c, v):
                    out_rows.append(r)
                    out_vals.append(v)
            if len(out_rows) > start:
                out_cols.append(c)
                indptr.append(len(out_rows))
        return LocalSparse(self.nrows, self.ncols, out_cols, indptr, out_rows, out_vals)

    def dump(self, debug=repr) -> str:
        """Coordinate-list text ordered by (col, row), for oracle diffing."""
        lines = [f"{r}\t{c}\t{debug(v)}" for r, c, v in self.to_coo()]
        return "\n".join(lines) + ("\n" if lines else "")

    def __eq__(self, other):
        if not isinstance(other, LocalSparse):
            return NotImplemented
        return (
            self.nrows == other.nrows
            and self.ncols == other.ncols
            and self.cols == other.cols
            and self.indptr == other.indptr
            and self.rows == other.rows
            and self.vals == other.vals
        )

    def __repr__(self):
        return f"LocalSparse({self.nrows}x{self.ncols}, nnz={self.nnz})"


def local_transpose(a: LocalSparse, remap=None) -> LocalSparse:
    """(i, j) -> e becomes (j, i) -> remap(e)."""
    new_rows: list[int] = []
    for ci, c in enumerate(a.cols):
        new_rows.extend([c] * (a.indptr[ci + 1] - a.indptr[ci]))
    vals = a.vals if remap is None else [remap(v) for v in a.vals]
    return LocalSparse.from_arrays(a.ncols, a.nrows, new_rows, a.rows, vals)


def local_spgemm(
    a: LocalSparse,
    b: LocalSparse,
    sr: Semiring,
    *,
    row_offset: int = 0,
    col_offset: int = 0,
    inner_offset: int = 0,
    dense_threshold: int = DEFAULT_DENSE_THRESHOLD,
    counters: SpgemmCounters | None = None,
) -> LocalSparse:
    """C[i][j] = add over k of multiply(A[i][k], B[k][j], i, j, k).

    The offsets translate local indices into the global index space seen
    by the semiring. Columns accumulate either into a dense scratch
    vector (small row counts) or a hash map; both paths apply add in the
    same arrival order and emit rows ascending, so results are identical.
    """
    if a.ncols != b.nrows:
        raise DimensionError(f"inner dimensions differ: {a.ncols} vs {b.nrows}")
    multiply = sr.multiply
    add = sr.add
    is_zero = sr.is_zero
    flops = 0

    out_cols: list[int] = []
    indptr = [0]
    out_rows: list[int] = []
    out_vals: list = []

    use_dense = a.nrows <= dense_threshold
    if use_dense:
        scratch: list = [None] * a.nrows
        stamp = [-1] * a.nrows

    a_cols = a.cols
    a_indptr = a.indptr
    a_rows = a.rows
    a_vals = a.vals

    for j, brows, bvals in b.iter_columns():
        gj = col_offset + j
        if use_dense:
            touched: list[int] = []
            for k, bv in zip(brows, bvals):
                ci = bisect_left(a_cols, k)
                if ci == len(a_cols) or a_cols[ci] != k:
                    continue
                gk = inner_offset + k
                lo, hi = a_indptr[ci], a_indptr[ci + 1]
                for idx in range(lo, hi):
                    i = a_rows[idx]
                    v = multiply(a_vals[idx], bv, row_offset + i, gj, gk)
                    flops += 1
                    if stamp[i] == j:
                        scratch[i] = add(scratch[i], v)
                    else:
                        stamp[i] = j
                        scratch[i] = v
                        touched.append(i)
            if not touched:
                continue
            touched.sort()
            start = len(out_rows)
            for i in touched:
                v = scratch[i]
                if not is_zero(v):
                    out_rows.append(i)
                    out_vals.append(v)
            if len(out_rows) > start:
                out_cols.append(j)
                indptr.append(len(out_rows))
        else:
            acc: dict[int, object] = {}
            for k, bv in zip(brows, bvals):
                ci = bisect_left(a_cols, k)
                if ci == len(a_cols) or a_cols[ci] != k:
                    continue
                gk = inner_offset + k
                lo, hi = a_indptr[ci], a_indptr[ci + 1]
                for idx in range(lo, hi):
                    i = a_rows[idx]
                    v = multiply(a_vals[idx], bv, row_offset + i, gj, gk)
                    flops += 1
                    if i in acc:
                        acc[i] = add(acc[i], v)
                    else:
                        acc[i] = v
            if not acc:
                continue
            start = len(out_rows)
            for i in sorted(acc):
                v = acc[i]
                if not is_zero(v):
                    out_rows.append(i)
                    out_vals.append(v)
            if len(out_rows) > start:
                out_cols.append(j)
                indptr.append(len(out_rows))

    if counters is not None:
        counters.flops += flops
    return LocalSparse(a.nrows, b.ncols, out_cols, indptr, out_rows, out_vals)


def merge_accumulate(parts: Iterable[LocalSparse], add) -> LocalSparse:
    """Element-wise union of equal-shaped matrices, add combining duplicates.

    For commutative-monoid payloads the result is independent of the
    parts order.
    """
    parts = list(parts)
    if not parts:
        raise ValueError("merge_accumulate needs at least one part")
    first = parts[0]
    for p in parts[1:]:
        if (p.nrows, p.ncols) != (first.nrows, first.ncols):
            raise DimensionError("parts have differing dimensions")
    if len(parts) == 1:
        return first
    acc: dict[tuple[int, int], object] = {}
    for p in parts:
        for r, c, v in p.to_coo():
            key = (c, r)
            if key in acc:
                acc[key] = add(acc[key], v)
            else:
                acc[key] = v
    out_cols: list[int] = []
    indptr = [0]
    rows: list[int] = []
    vals: list = []
    for (c, r) in sorted(acc):
        if not out_cols or c != out_cols[-1]:
            if out_cols:
                indptr.append(len(rows))
            out_cols.append(c)
        rows.append(r)
        vals.append(acc[(c, r)])
    if out_cols:
        indptr.append(len(rows))
    return LocalSparse(first.nrows, first.ncols, out_cols, indptr, rows, vals)
