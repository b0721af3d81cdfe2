"""FASTA input and similarity-graph triplet output.

Input records get dense 0-based ids in file order. Output edges are
6-column tab-separated lines; `canonicalize_output` sorts a triplet file
into a byte-stable form so runs with different parallelism or blocking
can be compared for equality.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .alphabet import INDEX, UNKNOWN

log = logging.getLogger(__name__)


class FastaError(ValueError):
    pass


@dataclass(slots=True)
class SequenceRecord:
    id: int
    header: str
    residues: str


@dataclass(slots=True)
class SimilarityEdge:
    """Canonical undirected edge: i < j, fractions in [0, 1]."""

    i: int
    j: int
    score: int
    identity: float
    coverage_i: float
    coverage_j: float


def read_fasta(path) -> list[SequenceRecord]:
    """Parse a FASTA file into records with ids 0..n-1 in file order.

    Residue lines are concatenated, whitespace-stripped and upper-cased;
    header is the first whitespace-delimited token of the description
    line. Bytes outside the 25-letter alphabet are mapped to 'X'.
    """
    records: list[SequenceRecord] = []
    header = None
    chunks: list[str] = []
    mapped = 0

    def flush():
        nonlocal mapped
        if header is None:
            return
        residues = "".join(chunks).upper()
        cleaned = []
        for ch in residues:
            if ch in INDEX:
                cleaned.append(ch)
            else:
                cleaned.append(UNKNOWN)
                mapped += 1
        residues = "".join(cleaned)
        if not residues:
            raise FastaError(f"record {header!r} has an empty sequence")
        records.append(SequenceRecord(len(records), header, residues))

    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith(">"):
                flush()
                header = line[1:].split()[0] if line[1:].split() else ""
                if not header:
                    raise FastaError("record with empty description line")
                chunks = []
            else:
                if header is None:
                    raise FastaError(f"residue data before first header in {path}")
                chunks.append(line)
    flush()

    if not records:
        raise FastaError(f"no FASTA records in {path}")
    if mapped:
        log.warning("mapped %d residue bytes outside the alphabet to %r", mapped, UNKNOWN)
    return records


def write_fasta(path, records: Iterable[SequenceRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(f">{rec.header}\n{rec.residues}\n")


def format_edge_line(edge: SimilarityEdge, headers: Mapping[int, str]) -> str:
    """One triplet line, without the trailing newline.

    Fractions are printed with exactly 4 decimals (round-half-even via
    the float formatter) so equal edges are byte-identical.
    """
    return (
        f"{headers[edge.i]}\t{headers[edge.j]}\t{edge.score}"
        f"\t{edge.identity:.4f}\t{edge.coverage_i:.4f}\t{edge.coverage_j:.4f}"
    )


class EdgeWriter:
    """Serialized sink for edges produced by the pipeline."""

    def __init__(self, path, headers: Mapping[int, str]):
        self._fh = open(path, "w", encoding="utf-8", newline="\n")
        self._headers = headers
        self.count = 0

    def write(self, edge: SimilarityEdge) -> None:
        if edge.i >= edge.j:
            raise ValueError(f"edge not canonical: ({edge.i}, {edge.j})")
        self._fh.write(format_edge_line(edge, self._headers) + "\n")
        self.count += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_edges(path, edges: Iterable[SimilarityEdge], headers: Mapping[int, str]) -> int:
    """Write a finite edge stream; returns the number of lines written."""
    with EdgeWriter(path, headers) as w:
        for edge in edges:
            w.write(edge)
        return w.count


def canonicalize_output(path_in, path_out) -> None:
    """Sort triplet lines lexicographically; idempotent, order-insensitive."""
    data = Path(path_in).read_bytes()
    lines = [ln for ln in data.split(b"\n") if ln]
    lines.sort()
    out = b"\n".join(lines)
    if lines:
        out += b"\n"
    Path(path_out).write_bytes(out)
