"""Analytic communication-cost estimates for plain and blocked SUMMA.

Seconds use the tree-broadcast model with log base 2; the structural
counts (messages, words) use the integer tree depth ceil(log2 q) so they
can be cross-checked against the grid's traffic counters without caring
about alpha or beta. At q = 1 every term vanishes while the message
count still reflects the (degenerate, zero-edge) broadcast waves.
"""

import math
from dataclasses import dataclass

from .summa import BlockingFactor


@dataclass(frozen=True)
class CostParams:
    alpha: float  # message startup seconds
    beta: float  # per-word transfer seconds
    submatrix_nnz: float  # nonzeros per n/sqrt(p) x n/sqrt(p) sub-matrix
    workers: int
    word_bytes: int = 8

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.submatrix_nnz < 0:
            raise ValueError("alpha, beta and submatrix_nnz must be >= 0")
        q = math.isqrt(self.workers)
        if self.workers < 1 or q * q != self.workers:
            raise ValueError(f"worker count {self.workers} is not a perfect square")

    @property
    def side(self) -> int:
        return math.isqrt(self.workers)


@dataclass(frozen=True)
class CostBreakdown:
    latency_term: float
    bandwidth_term: float
    total: float
    messages: int
    words: int

    def to_json(self) -> dict:
        return {
            "latency_term": self.latency_term,
            "bandwidth_term": self.bandwidth_term,
            "total": self.total,
            "messages": self.messages,
            "words": self.words,
        }


def tree_depth(side: int) -> int:
    return math.ceil(math.log2(side)) if side > 1 else 0


def plain_summa_cost(cp: CostParams) -> CostBreakdown:
    """2*alpha*sqrt(p)*log2(sqrt(p)) + 2*beta*s*sqrt(p)*log2(sqrt(p))."""
    q = cp.side
    log_q = math.log2(q) if q > 1 else 0.0
    latency = 2.0 * cp.alpha * q * log_q
    bandwidth = 2.0 * cp.beta * cp.submatrix_nnz * q * log_q
    messages = 2 * q
    words = round(2 * cp.submatrix_nnz * q * tree_depth(q))
    return CostBreakdown(latency, bandwidth, latency + bandwidth, messages, words)


def blocked_summa_cost(cp: CostParams, bf: BlockingFactor) -> CostBreakdown:
    """2*alpha*(br*bc)*sqrt(p)*log2(sqrt(p)) +
    beta*s*(br+bc)*sqrt(p)*log2(sqrt(p)).

    With br = bc = 1 this reduces to the plain cost exactly; the terms
    are grouped so the float results coincide bit-for-bit.
    """
    q = cp.side
    log_q = math.log2(q) if q > 1 else 0.0
    br, bc = bf.block_rows, bf.block_cols
    latency = 2.0 * cp.alpha * (br * bc) * q * log_q
    bandwidth = cp.beta * cp.submatrix_nnz * (br + bc) * q * log_q
    messages = 2 * br * bc * q
    words = round(cp.submatrix_nnz * (br + bc) * q * tree_depth(q))
    return CostBreakdown(latency, bandwidth, latency + bandwidth, messages, words)


def broadcast_hops(messages: int, side: int) -> int:
    """Latency hops implied by a broadcast count under tree accounting."""
    return messages * tree_depth(side)
