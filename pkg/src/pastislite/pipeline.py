"""Incremental similarity search: SUMMA blocks -> prune -> threshold ->
batch alignment -> edge emission, with optional pre-blocking.

Two logical lanes exist. The sparse lane (this process, plus the grid's
workers) forms overlap blocks; the alignment lane is the batch engine.
With pre-blocking on, up to `lookahead` submitted batches stay in flight
while the sparse lane forms the next block, so at most lookahead + 1
blocks are alive at once. With pre-blocking off each batch is awaited
immediately and the lanes run strictly sequentially. Output is identical
either way; only the schedule changes.
"""

import math
from collections import deque
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from time import perf_counter
from typing import Optional

from .align import AlignEngine, AlignParams, evaluate_pair
from .balance import SCHEME_INDEX, SCHEMES, SCHEME_TRIANGULARITY, make_plan, prune_block
from .grid import create_grid, distribute, distributed_transpose
from .kmer import KmerParams, build_kmer_matrix, overlap_semiring
from .seqio import EdgeWriter, read_fasta
from .sparse import SpgemmCounters
from .summa import BlockingFactor, blocked_summa, stripe_inputs


class PipelineError(RuntimeError):
    pass


@dataclass
class PipelineConfig:
    kmer: KmerParams = field(default_factory=KmerParams)
    align: AlignParams = field(default_factory=AlignParams)
    blocking: BlockingFactor = field(default_factory=BlockingFactor)
    scheme: str = SCHEME_INDEX
    workers: int = 1
    pre_blocking: bool = False
    lookahead: int = 1
    align_lanes: int = 1
    sparse_lanes: int = 1
    align_engine: str = "auto"  # auto | inline | pool

    def __post_init__(self):
        q = math.isqrt(self.workers)
        if self.workers < 1 or q * q != self.workers:
            raise ValueError(f"worker count {self.workers} is not a perfect square")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown balancing scheme {self.scheme!r}")
        if self.scheme == SCHEME_TRIANGULARITY and (
            self.blocking.block_rows != self.blocking.block_cols
        ):
            raise ValueError("triangularity-based balancing requires square blocking")
        if self.lookahead < 0:
            raise ValueError("lookahead must be >= 0")
        if self.align_lanes < 1 or self.sparse_lanes < 1:
            raise ValueError("lane counts must be >= 1")
        if self.align_engine not in ("auto", "inline", "pool"):
            raise ValueError(f"unknown align engine {self.align_engine!r}")

    def wants_process_pool(self) -> bool:
        if self.align_engine == "pool":
            return True
        if self.align_engine == "inline":
            return False
        return self.align_lanes > 1 or (self.pre_blocking and self.lookahead > 0)


@dataclass
class RunStats:
    discovered_candidates: int
    performed_alignments: int
    output_edges: int
    align_seconds: float
    spgemm_seconds: float
    sparse_all_seconds: float
    io_seconds: float
    cwait_seconds: float
    total_seconds: float
    alignments_per_second: float
    cups: float
    imbalance_align_pct: float
    imbalance_sparse_pct: float
    compression_factor: float
    peak_live_blocks: int

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class RawMetrics:
    """Everything compute_stats needs, gathered during a run."""

    discovered: int = 0
    performed: int = 0
    output_edges: int = 0
    timers: dict = field(default_factory=dict)
    total_seconds: float = 0.0
    total_cells: int = 0
    kernel_seconds: float = 0.0
    worker_sparse_seconds: list = field(default_factory=list)
    lane_kernel_seconds: dict = field(default_factory=dict)
    flops: int = 0
    overlap_nnz: int = 0
    peak_live_blocks: int = 0


def imbalance_pct(lane_seconds: list[float]) -> float:
    """100 * (max - avg) / avg across lanes; 0 for a single lane."""
    if len(lane_seconds) <= 1:
        return 0.0
    avg = sum(lane_seconds) / len(lane_seconds)
    if avg <= 0.0:
        return 0.0
    return 100.0 * (max(lane_seconds) - avg) / avg


def compute_stats(raw: RawMetrics) -> RunStats:
    t = raw.timers
    align_seconds = t.get("align", 0.0)
    spgemm_seconds = t.get("spgemm", 0.0)
    sparse_all = spgemm_seconds + t.get("merge", 0.0) + t.get("sparse_other", 0.0)
    io_seconds = t.get("io", 0.0)
    total = raw.total_seconds
    return RunStats(
        discovered_candidates=raw.discovered,
        performed_alignments=raw.performed,
        output_edges=raw.output_edges,
        align_seconds=align_seconds,
        spgemm_seconds=spgemm_seconds,
        sparse_all_seconds=sparse_all,
        io_seconds=io_seconds,
        cwait_seconds=t.get("cwait", 0.0),
        total_seconds=total,
        alignments_per_second=(raw.performed / total) if total > 0 else 0.0,
        cups=(raw.total_cells / raw.kernel_seconds) if raw.kernel_seconds > 0 else 0.0,
        imbalance_align_pct=imbalance_pct(list(raw.lane_kernel_seconds.values())),
        imbalance_sparse_pct=imbalance_pct(raw.worker_sparse_seconds),
        compression_factor=(raw.flops / raw.overlap_nnz) if raw.overlap_nnz else 0.0,
        peak_live_blocks=raw.peak_live_blocks,
    )


def simulate_schedule(
    align_times: list[float], sparse_times: list[float], lookahead: int
) -> tuple[float, float]:
    """Makespans of (sequential, pre-blocked) execution for given
    per-block lane costs, under the capacity rule that block t's sparse
    work may only start once block t-1-lookahead is fully aligned."""
    if len(align_times) != len(sparse_times):
        raise ValueError("need one align and one sparse time per block")
    sequential = sum(align_times) + sum(sparse_times)
    sp_free = 0.0
    al_free = 0.0
    al_done: list[float] = []
    for t in range(len(align_times)):
        gate = al_done[t - 1 - lookahead] if t - 1 - lookahead >= 0 else 0.0
        start = max(sp_free, gate)
        sp_free = start + sparse_times[t]
        al_start = max(sp_free, al_free)
        al_free = al_start + align_times[t]
        al_done.append(al_free)
    return sequential, al_free


@contextmanager
def _stage(block_id, name: str):
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        where = f"block ({block_id.r},{block_id.c})" if block_id else "setup"
        raise PipelineError(f"{where} stage {name}: {exc}") from exc


def run_search(config: PipelineConfig, input_path, output_path) -> RunStats:
    """Run the full search; writes triplet lines to output_path and
    returns the populated run statistics."""
    t_start = perf_counter()
    raw = RawMetrics()
    timers = raw.timers
    for key in ("io", "spgemm", "merge", "sparse_other", "align", "cwait"):
        timers[key] = 0.0

    t0 = perf_counter()
    records = read_fasta(input_path)
    timers["io"] += perf_counter() - t0
    residues = [r.residues for r in records]
    headers = {r.id: r.header for r in records}

    grid = create_grid(
        config.workers,
        mode="threaded" if config.sparse_lanes > 1 else "sequential",
        lanes=config.sparse_lanes,
    )
    raw.worker_sparse_seconds = [0.0] * config.workers
    engine = AlignEngine(
        config.align,
        lanes=config.align_lanes,
        use_processes=config.wants_process_pool(),
    )
    writer = EdgeWriter(output_path, headers)
    spg = SpgemmCounters()
    threshold = config.kmer.min_shared_kmers
    capacity = config.lookahead if config.pre_blocking else 0
    inflight: deque = deque()
    live = 0

    def drain_one():
        nonlocal live
        block_id, pairs, pending = inflight.popleft()
        with _stage(block_id, "align"):
            results, errors, counters, lanes = pending.result()
            if errors:
                idx, exc = errors[0]
                raise PipelineError(
                    f"block ({block_id.r},{block_id.c}) stage align: pair {pairs[idx][:2]}: {exc}"
                ) from exc
        raw.total_cells += counters.cells
        raw.kernel_seconds += counters.kernel_seconds
        for lane, kernel, batch_seconds in lanes:
            raw.lane_kernel_seconds[lane] = (
                raw.lane_kernel_seconds.get(lane, 0.0) + kernel
            )
            timers["align"] += batch_seconds
        with _stage(block_id, "evaluate"):
            t_eval = perf_counter()
            accepted = []
            for (i, j, _payload), res in zip(pairs, results):
                edge = evaluate_pair(i, j, residues[i], residues[j], res, config.align)
                if edge is not None:
                    accepted.append(edge)
            timers["align"] += perf_counter() - t_eval
        with _stage(block_id, "write"):
            t_io = perf_counter()
            for edge in accepted:
                writer.write(edge)
            timers["io"] += perf_counter() - t_io
        live -= 1

    try:
        with _stage(None, "index"):
            t0 = perf_counter()
            kmat = build_kmer_matrix(records, config.kmer)
            a_dist = distribute(kmat, grid)
            b_dist = distributed_transpose(a_dist)
            stripes = stripe_inputs(a_dist, b_dist, config.blocking)
            del kmat, a_dist, b_dist
            timers["sparse_other"] += perf_counter() - t0
        plan = make_plan(config.scheme, config.blocking)
        semiring = overlap_semiring(config.kmer)
        engine.start()

        blocks = blocked_summa(
            stripes,
            plan,
            semiring,
            grid,
            counters=spg,
            worker_seconds=raw.worker_sparse_seconds,
            timers=timers,
        )
        for block_id, cls, dblock in blocks:
            live += 1
            raw.peak_live_blocks = max(raw.peak_live_blocks, live)
            q = grid.config.side
            pruned_parts: list = [None] * config.workers
            with _stage(block_id, "prune"):
                t0 = perf_counter()

                def prune_step(rank):
                    r, c = grid.config.coords_of(rank)
                    blk = dblock.dist.block(r, c)
                    ro = dblock.row_range[0] + dblock.dist.row_bounds[r][0]
                    co = dblock.col_range[0] + dblock.dist.col_bounds[c][0]
                    pruned_parts[rank] = (
                        prune_block(config.scheme, blk, cls, ro, co),
                        ro,
                        co,
                        blk.nnz,
                    )

                grid.map_workers(prune_step, seconds=raw.worker_sparse_seconds)
                timers["sparse_other"] += perf_counter() - t0

            with _stage(block_id, "filter"):
                t0 = perf_counter()
                pairs = []
                for rank in range(config.workers):
                    pruned, ro, co, computed_nnz = pruned_parts[rank]
                    raw.overlap_nnz += computed_nnz
                    raw.discovered += pruned.nnz
                    for lr, lc, payload in pruned.to_coo():
                        if payload.count >= threshold:
                            gi, gj = ro + lr, co + lc
                            if gi > gj:
                                gi, gj = gj, gi
                            pairs.append((gi, gj, payload))
                timers["sparse_other"] += perf_counter() - t0

            raw.performed += len(pairs)
            t0 = perf_counter()
            batch = [(residues[i], residues[j], payload) for i, j, payload in pairs]
            timers["cwait"] += perf_counter() - t0
            with _stage(block_id, "submit"):
                inflight.append((block_id, pairs, engine.submit(batch)))
            while len(inflight) > capacity:
                drain_one()
        while inflight:
            drain_one()
    finally:
        writer.close()
        engine.close()
        grid.close()

    raw.output_edges = writer.count
    raw.flops = spg.flops
    raw.total_seconds = perf_counter() - t_start
    return compute_stats(raw)
