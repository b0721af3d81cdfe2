"""Brute-force reference path for validation.

Everything here is written independently of the production modules:
k-mers are compared as raw substrings (no integer coding), the aligner
is a plain quadratic three-matrix dynamic program with explicit loops,
and candidate discovery enumerates all pairs. The validate subcommand
and the equivalence tests diff pipeline output against this path.
"""

from typing import Optional

from .align import AlignParams
from .kmer import KmerParams
from .seqio import SequenceRecord, SimilarityEdge, format_edge_line

_NEG = float("-inf")


def decode_kmer(code: int, k: int, alphabet: str, base: int) -> str:
    """Inverse of the positional k-mer code, most significant first."""
    out = []
    for _ in range(k):
        code, digit = divmod(code, base)
        out.append(alphabet[digit])
    if code:
        raise ValueError("code wider than k digits")
    return "".join(reversed(out))


def kmer_substrings(residues: str, k: int) -> set[str]:
    return {residues[i:i + k] for i in range(len(residues) - k + 1)}


def shared_kmer_count(a: str, b: str, k: int) -> int:
    return len(kmer_substrings(a, k) & kmer_substrings(b, k))


def reference_alignment(a: str, b: str, params: AlignParams) -> dict:
    """Quadratic-space Smith-Waterman with affine gaps and traceback.

    Conventions match the production contract: best cell ties resolve to
    the smallest (row, column); traceback prefers diagonal, then the
    vertical gap, then the horizontal gap, and closes gaps as early as
    possible.
    """
    m, n = len(a), len(b)
    mat = params.matrix
    open_ = params.gap_open
    ext = params.gap_extend
    from .alphabet import INDEX

    ai = [INDEX[ch] for ch in a]
    bi = [INDEX[ch] for ch in b]

    H = [[0] * (n + 1) for _ in range(m + 1)]
    E = [[_NEG] * (n + 1) for _ in range(m + 1)]
    F = [[_NEG] * (n + 1) for _ in range(m + 1)]
    best = 0
    best_i = best_j = 0
    for i in range(1, m + 1):
        Hi = H[i]
        Hp = H[i - 1]
        Ei = E[i]
        Fi = F[i]
        Fp = F[i - 1]
        row_scores = mat[ai[i - 1]]
        for j in range(1, n + 1):
            e = max(Hi[j - 1] - open_, Ei[j - 1] - ext)
            f = max(Hp[j] - open_, Fp[j] - ext)
            h = Hp[j - 1] + int(row_scores[bi[j - 1]])
            if e > h:
                h = e
            if f > h:
                h = f
            if h < 0:
                h = 0
            Ei[j] = e
            Fi[j] = f
            Hi[j] = h
            if h > best:
                best = h
                best_i, best_j = i, j

    if best == 0:
        return {
            "score": 0,
            "i_begin": -1,
            "i_end": -1,
            "j_begin": -1,
            "j_end": -1,
            "matches": 0,
            "aln_len": 0,
        }

    i, j = best_i, best_j
    matches = 0
    aln_len = 0
    state = "H"
    while True:
        if state == "H":
            h = H[i][j]
            if h == 0:
                break
            if h == H[i - 1][j - 1] + int(mat[ai[i - 1], bi[j - 1]]):
                matches += a[i - 1] == b[j - 1]
                aln_len += 1
                i -= 1
                j -= 1
            elif h == F[i][j]:
                state = "F"
            elif h == E[i][j]:
                state = "E"
            else:
                raise AssertionError("reference traceback lost (H)")
        elif state == "F":
            f = F[i][j]
            aln_len += 1
            close = H[i - 1][j] - open_
            i -= 1
            if f == close:
                state = "H"
            elif f != F[i][j] - ext:
                raise AssertionError("reference traceback lost (F)")
        else:
            e = E[i][j]
            aln_len += 1
            close = H[i][j - 1] - open_
            j -= 1
            if e == close:
                state = "H"
            elif e != E[i][j] - ext:
                raise AssertionError("reference traceback lost (E)")

    return {
        "score": best,
        "i_begin": i,
        "i_end": best_i - 1,
        "j_begin": j,
        "j_end": best_j - 1,
        "matches": matches,
        "aln_len": aln_len,
    }


def reference_edge(
    i: int,
    j: int,
    a: str,
    b: str,
    align_params: AlignParams,
) -> Optional[SimilarityEdge]:
    res = reference_alignment(a, b, align_params)
    if res["aln_len"] == 0:
        return None
    identity = res["matches"] / res["aln_len"]
    cov_a = (res["i_end"] - res["i_begin"] + 1) / len(a)
    cov_b = (res["j_end"] - res["j_begin"] + 1) / len(b)
    if identity >= align_params.min_identity and min(cov_a, cov_b) >= align_params.min_coverage:
        return SimilarityEdge(i, j, res["score"], identity, cov_a, cov_b)
    return None


def brute_force_edge_lines(
    records: list[SequenceRecord],
    kmer_params: KmerParams,
    align_params: AlignParams,
) -> list[str]:
    """All-pairs discovery + reference alignment, as sorted triplet lines."""
    k = kmer_params.k
    threshold = max(kmer_params.min_shared_kmers, 1)
    kmer_sets = [kmer_substrings(rec.residues, k) for rec in records]
    headers = {rec.id: rec.header for rec in records}
    lines = []
    for i in range(len(records)):
        ki = kmer_sets[i]
        if not ki:
            continue
        for j in range(i + 1, len(records)):
            shared = len(ki & kmer_sets[j])
            if shared < threshold:
                continue
            edge = reference_edge(
                i, j, records[i].residues, records[j].residues, align_params
            )
            if edge is not None:
                lines.append(format_edge_line(edge, headers))
    lines.sort()
    return lines
