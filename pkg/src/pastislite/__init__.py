"""Desk-scale many-against-many protein similarity search.

Candidate pairs are discovered with a semiring sparse matrix product
executed as a blocked 2D sparse SUMMA over a virtual process grid,
pruned by symmetry-aware load-balancing schemes, aligned with batched
Smith-Waterman, and emitted as a similarity graph in triplet lines.
"""

from .align import AlignParams, AlignmentResult, align_batch, evaluate_pair, smith_waterman
from .kmer import KmerParams, OverlapPayload, build_kmer_matrix, encode_kmer, overlap_semiring
from .pipeline import PipelineConfig, RunStats, run_search
from .seqio import SequenceRecord, SimilarityEdge, canonicalize_output, read_fasta, write_edges
from .sparse import LocalSparse, Semiring, local_spgemm, local_transpose, merge_accumulate
from .summa import BlockId, BlockingFactor

__version__ = "0.1.0"

__all__ = [
    "AlignParams",
    "AlignmentResult",
    "BlockId",
    "BlockingFactor",
    "KmerParams",
    "LocalSparse",
    "OverlapPayload",
    "PipelineConfig",
    "RunStats",
    "Semiring",
    "SequenceRecord",
    "SimilarityEdge",
    "align_batch",
    "build_kmer_matrix",
    "canonicalize_output",
    "encode_kmer",
    "evaluate_pair",
    "local_spgemm",
    "local_transpose",
    "merge_accumulate",
    "overlap_semiring",
    "read_fasta",
    "run_search",
    "smith_waterman",
    "write_edges",
]
