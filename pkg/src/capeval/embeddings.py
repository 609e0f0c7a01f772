"""Word embedding tables and the Euclidean inter-word cost.

Two on-disk formats are supported: a whitespace text format for fixtures
(optional ``vocab dim`` first line, then ``token v1 ... vd`` rows) and the
canonical word2vec binary layout (ASCII ``"<vocab> <dim>\\n"`` header, then
per record a 0x20-terminated token followed by dim little-endian float32
values; a trailing 0x0A per record is tolerated and consumed).
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import DataFormatError


class EmbeddingParseError(DataFormatError):
    """An embedding file does not parse under its declared format."""


class MissingTokenError(KeyError):
    """A token required for a cost lookup is absent from the table."""

    def __init__(self, token: str):
        self.token = token
        super().__init__(token)

    def __str__(self) -> str:
        return f"token not in embedding table: {self.token!r}"


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def vector(self, token: str) -> np.ndarray:
        try:
            return self.vectors[token]
        except KeyError:
            raise MissingTokenError(token) from None


def word_cost(table: EmbeddingTable, w1: str, w2: str) -> float:
    """Euclidean distance between two embedded tokens."""
    return float(np.linalg.norm(table.vector(w1) - table.vector(w2)))


def _store(vectors: dict, token: str, values: np.ndarray, source: str) -> None:
    if token in vectors:
        warnings.warn(f"duplicate token {token!r} in {source}; keeping the last occurrence")
    vectors[token] = values


def _normalized(table: EmbeddingTable) -> EmbeddingTable:
    vectors = {}
    for token, vec in table.vectors.items():
        norm = math.sqrt(float(vec @ vec))
        if norm == 0.0:
            warnings.warn(f"token {token!r} has a zero vector; left unnormalized")
            vectors[token] = vec
        else:
            vectors[token] = vec / norm
    return EmbeddingTable(table.dim, vectors)


def _load_text(path: str | Path) -> EmbeddingTable:
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if lineno == 1 and len(fields) == 2:
                try:
                    _, dim = int(fields[0]), int(fields[1])
                    continue
                except ValueError:
                    pass  # not a header; fall through to a data row
            token, *raw = fields
            if dim is None:
                dim = len(raw)
                if dim == 0:
                    raise EmbeddingParseError(
                        f"token {token!r} has no vector components", path=path, line=lineno
                    )
            if len(raw) != dim:
                raise EmbeddingParseError(
                    f"token {token!r} has {len(raw)} components, expected {dim}",
                    path=path,
                    line=lineno,
                )
            try:
                values = np.array([float(x) for x in raw], dtype=np.float64)
            except ValueError:
                raise EmbeddingParseError(
                    f"non-numeric component for token {token!r}", path=path, line=lineno
                )
            if not np.all(np.isfinite(values)):
                raise EmbeddingParseError(
                    f"non-finite component for token {token!r}", path=path, line=lineno
                )
            _store(vectors, token, values, str(path))
    if dim is None or not vectors:
        raise EmbeddingParseError("embedding file contains no vectors", path=path)
    return EmbeddingTable(dim, vectors)


def _load_binary(path: str | Path) -> EmbeddingTable:
    data = Path(path).read_bytes()
    newline = data.find(b"\n")
    if newline < 0:
        raise EmbeddingParseError("missing header line", path=path, offset=0)
    header = data[:newline].split()
    if len(header) != 2:
        raise EmbeddingParseError("header must be '<vocab> <dim>'", path=path, offset=0)
    try:
        vocab, dim = int(header[0]), int(header[1])
    except ValueError:
        raise EmbeddingParseError("header must hold two integers", path=path, offset=0)
    if vocab < 1 or dim < 1:
        raise EmbeddingParseError(f"bad header values {vocab} {dim}", path=path, offset=0)
    vectors: dict[str, np.ndarray] = {}
    pos = newline + 1
    record_bytes = 4 * dim
    for _ in range(vocab):
        sep = data.find(b"\x20", pos)
        if sep < 0:
            raise EmbeddingParseError("truncated file while reading a token", path=path, offset=pos)
        try:
            token = data[pos:sep].decode("utf-8")
        except UnicodeDecodeError:
            raise EmbeddingParseError("token is not valid UTF-8", path=path, offset=pos)
        pos = sep + 1
        if pos + record_bytes > len(data):
            raise EmbeddingParseError(
                f"truncated vector for token {token!r}", path=path, offset=pos
            )
        values = np.frombuffer(data[pos : pos + record_bytes], dtype="<f4").astype(np.float64)
        pos += record_bytes
        if pos < len(data) and data[pos] == 0x0A:
            pos += 1
        _store(vectors, token, values, str(path))
    return EmbeddingTable(dim, vectors)


def load_embeddings(
    path: str | Path, format: str = "binary", normalize: bool = False
) -> EmbeddingTable:
    """Load a whole embedding table from disk."""
    if format == "text":
        table = _load_text(path)
    elif format == "binary":
        table = _load_binary(path)
    else:
        raise ValueError(f"unknown embedding format {format!r}")
    return _normalized(table) if normalize else table


def save_embeddings(table: EmbeddingTable, path: str | Path, format: str = "text") -> None:
    """Write a table back to disk; the text format round-trips float64 exactly."""
    if format == "text":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{len(table.vectors)} {table.dim}\n")
            for token, vec in table.vectors.items():
                fh.write(token + " " + " ".join(repr(float(x)) for x in vec) + "\n")
    elif format == "binary":
        with open(path, "wb") as fh:
            fh.write(f"{len(table.vectors)} {table.dim}\n".encode("ascii"))
            for token, vec in table.vectors.items():
                fh.write(token.encode("utf-8") + b"\x20")
                fh.write(vec.astype("<f4").tobytes())
                fh.write(b"\n")
    else:
        raise ValueError(f"unknown embedding format {format!r}")


def filter_vocabulary(table: EmbeddingTable, vocabulary: Iterable[str]) -> EmbeddingTable:
    """Restrict a table to the given tokens, preserving load order."""
    keep = set(vocabulary)
    return EmbeddingTable(
        table.dim, {t: v for t, v in table.vectors.items() if t in keep}
    )


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()
