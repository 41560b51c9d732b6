"""Token embedding tables: text-format loading, lookup, seeded random init."""

from dataclasses import dataclass
from typing import Dict, Union
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError


@dataclass(frozen=True)
class EmbeddingTable:
    vocab_index: Dict[str, int]
    matrix: np.ndarray
    dim: int
    unk_row: int

    def __post_init__(self):
        rows, cols = self.matrix.shape
        if self.dim != cols or self.dim <= 0:
            raise InputError("embedding dim does not match matrix width")
        if not 0 <= self.unk_row < rows:
            raise InputError("unk row out of range")
        if any(not 0 <= r < rows for r in self.vocab_index.values()):
            raise InputError("vocab index points past the matrix")


def lookup(table: EmbeddingTable, token: str) -> np.ndarray:
    row = table.vocab_index.get(token, table.unk_row)
    return table.matrix[row]


def load_text_embeddings(source: Union[str, Path]) -> EmbeddingTable:
    """Parse the standard "V D" header + "token v1 .. vD" lines format."""
    try:
        with open(source, encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read embeddings: {exc}") from exc
    if not lines:
        raise ParseError("empty embedding file", 1)
    head = lines[0].split()
    if len(head) != 2:
        raise ParseError(f"expected header 'V D', got {lines[0]!r}", 1)
    try:
        v, d = int(head[0]), int(head[1])
    except ValueError as exc:
        raise ParseError(f"non-integer header {lines[0]!r}", 1) from exc
    if v <= 0 or d <= 0:
        raise ParseError("header dimensions must be positive", 1)
    if len(lines) - 1 != v:
        raise ParseError(f"expected {v} rows, found {len(lines) - 1}", 1)
    vocab_index: Dict[str, int] = {}
    matrix = np.empty((v, d), dtype=np.float64)
    for row, line in enumerate(lines[1:]):
        lineno = row + 2
        parts = line.split()
        if len(parts) != d + 1:
            raise ParseError(f"expected token plus {d} values, got {len(parts)} fields", lineno)
        token = parts[0]
        if token in vocab_index:
            raise ParseError(f"duplicate token {token!r}", lineno)
        try:
            matrix[row] = [float(x) for x in parts[1:]]
        except ValueError as exc:
            raise ParseError(f"bad number in row for {token!r}", lineno) from exc
        vocab_index[token] = row
    unk_row = vocab_index.get("<unk>", 0)
    return EmbeddingTable(vocab_index=vocab_index, matrix=matrix, dim=d, unk_row=unk_row)


def save_text_embeddings(table: EmbeddingTable, path: Union[str, Path]) -> None:
    tokens = sorted(table.vocab_index, key=table.vocab_index.get)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{len(tokens)} {table.dim}\n")
        for token in tokens:
            row = table.matrix[table.vocab_index[token]]
            f.write(token + " " + " ".join(repr(float(x)) for x in row) + "\n")


def random_init(vocab_size: int, dim: int, seed: int) -> EmbeddingTable:
    """Uniform [-0.05, 0.05] entries from a seeded generator; rows unnamed."""
    if vocab_size <= 0 or dim <= 0:
        raise InputError("vocab_size and dim must be positive")
    rng = np.random.default_rng(seed)
    matrix = rng.uniform(-0.05, 0.05, size=(vocab_size, dim))
    return EmbeddingTable(vocab_index={}, matrix=matrix, dim=dim, unk_row=0)
