"""Shared 25-letter amino-acid alphabet.

The 20 standard residues plus the ambiguity codes B and Z, unknown X,
selenocysteine U, and the stop symbol '*'. With k-mer length 6 the k-mer
code space has 25**6 = 244,140,625 columns.
"""

ALPHABET = "ARNDCQEGHILKMFPSTWYVBZXU*"
SIZE = len(ALPHABET)

INDEX = {aa: i for i, aa in enumerate(ALPHABET)}

# Residues outside the alphabet are normalized to this symbol on input.
UNKNOWN = "X"
