"""BLOSUM62 substitution scores over the 25-letter alphabet.

The 24 canonical symbols (ARNDCQEGHILKMFPSTWYVBZX*) carry the standard
NCBI scores. Selenocysteine U is scored identically to C, the usual NCBI
treatment; in particular U-U = U-C = C-C = 9. ``dump()`` renders the
embedded table as canonical text so it can be verified byte-for-byte
against a reference transcription (``python -m pastislite.blosum62``).
"""

import numpy as np

from .alphabet import ALPHABET, SIZE

# Standard NCBI BLOSUM62, one row per line, order matching the header row.
_CANONICAL_ORDER = "ARNDCQEGHILKMFPSTWYVBZX*"
_CANONICAL_ROWS = """
A  4 -1 -2 -2  0 -1 -1  0 -2 -1 -1 -1 -1 -2 -1  1  0 -3 -2  0 -2 -1  0 -4
R -1  5  0 -2 -3  1  0 -2  0 -3 -2  2 -1 -3 -2 -1 -1 -3 -2 -3 -1  0 -1 -4
N -2  0  6  1 -3  0  0  0  1 -3 -3  0 -2 -3 -2  1  0 -4 -2 -3  3  0 -1 -4
D -2 -2  1  6 -3  0  2 -1 -1 -3 -4 -1 -3 -3 -1  0 -1 -4 -3 -3  4  1 -1 -4
C  0 -3 -3 -3  9 -3 -4 -3 -3 -1 -1 -3 -1 -2 -3 -1 -1 -2 -2 -1 -3 -3 -2 -4
Q -1  1  0  0 -3  5  2 -2  0 -3 -2  1  0 -3 -1  0 -1 -2 -1 -2  0  3 -1 -4
E -1  0  0  2 -4  2  5 -2  0 -3 -3  1 -2 -3 -1  0 -1 -3 -2 -2  1  4 -1 -4
G  0 -2  0 -1 -3 -2 -2  6 -2 -4 -4 -2 -3 -3 -2  0 -2 -2 -3 -3 -1 -2 -1 -4
H -2  0  1 -1 -3  0  0 -2  8 -3 -3 -1 -2 -1 -2 -1 -2 -2  2 -3  0  0 -1 -4
I -1 -3 -3 -3 -1 -3 -3 -4 -3  4  2 -3  1  0 -3 -2 -1 -3 -1  3 -3 -3 -1 -4
L -1 -2 -3 -4 -1 -2 -3 -4 -3  2  4 -2  2  0 -3 -2 -1 -2 -1  1 -4 -3 -1 -4
K -1  2  0 -1 -3  1  1 -2 -1 -3 -2  5 -1 -3 -1  0 -1 -3 -2 -2  0  1 -1 -4
M -1 -1 -2 -3 -1  0 -2 -3 -2  1  2 -1  5  0 -2 -1 -1 -1 -1  1 -3 -1 -1 -4
F -2 -3 -3 -3 -2 -3 -3 -3 -1  0  0 -3  0  6 -4 -2 -2  1  3 -1 -3 -3 -1 -4
P -1 -2 -2 -1 -3 -1 -1 -2 -2 -3 -3 -1 -2 -4  7 -1 -1 -4 -3 -2 -2 -1 -2 -4
S  1 -1  1  0 -1  0  0  0 -1 -2 -2  0 -1 -2 -1  4  1 -3 -2 -2  0  0  0 -4
T  0 -1  0 -1 -1 -1 -1 -2 -2 -1 -1 -1 -1 -2 -1  1  5 -2 -2  0 -1 -1  0 -4
W -3 -3 -4 -4 -2 -2 -3 -2 -2 -3 -2 -3 -1  1 -4 -3 -2 11  2 -3 -4 -3 -2 -4
Y -2 -2 -2 -3 -2 -1 -2 -3  2 -1 -1 -2 -1  3 -3 -2 -2  2  7 -1 -3 -2 -1 -4
V  0 -3 -3 -3 -1 -2 -2 -3 -3  3  1 -2  1 -1 -2 -2  0 -3 -1  4 -3 -2 -1 -4
B -2 -1  3  4 -3  0  1 -1  0 -3 -4  0 -3 -3 -2  0 -1 -4 -3 -3  4  1 -1 -4
Z -1  0  0  1 -3  3  4 -2  0 -3 -3  1 -1 -3 -1  0 -1 -3 -2 -2  1  4 -1 -4
X  0 -1 -1 -1 -2 -1 -1 -1 -1 -1 -1 -1 -1 -1 -2  0  0 -2 -1 -1 -1 -1 -1 -4
* -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4  1
"""


def _build() -> np.ndarray:
    scores = {}
    for line in _CANONICAL_ROWS.strip().splitlines():
        parts = line.split()
        row = parts[0]
        values = [int(v) for v in parts[1:]]
        if len(values) != len(_CANONICAL_ORDER):
            raise ValueError(f"malformed substitution row {row!r}")
        for col, v in zip(_CANONICAL_ORDER, values):
            scores[row, col] = v

    # U takes the C row and column; U-U equals C-C.
    for sym in _CANONICAL_ORDER:
        scores["U", sym] = scores["C", sym]
        scores[sym, "U"] = scores[sym, "C"]
    scores["U", "U"] = scores["C", "C"]

    mat = np.zeros((SIZE, SIZE), dtype=np.int32)
    for i, a in enumerate(ALPHABET):
        for j, b in enumerate(ALPHABET):
            mat[i, j] = scores[a, b]
    return mat


MATRIX = _build()
MATRIX.setflags(write=False)


def score(a: str, b: str) -> int:
    return int(MATRIX[ALPHABET.index(a), ALPHABET.index(b)])


def dump() -> str:
    """Canonical text rendering of the embedded 25x25 table."""
    lines = ["   " + " ".join(f"{aa:>3}" for aa in ALPHABET)]
    for i, aa in enumerate(ALPHABET):
        lines.append(f"{aa:<2} " + " ".join(f"{int(v):>3}" for v in MATRIX[i]))
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    print(dump(), end="")
