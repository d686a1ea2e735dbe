"""Word vectors with character n-gram composition, plus text encoders.

In-vocabulary words resolve to their stored vectors by pure lookup.
Out-of-vocabulary words are composed as the mean of hashed subword-bucket
vectors over their boundary-marked character n-grams, which keeps close
misspellings close in embedding space. Two text encoders share one
contract (deterministic ``encode`` to a unit vector, fixed ``dim``, an
``id`` naming the backend): a self-contained pooled-subword baseline and
an adapter replaying externally precomputed sentence vectors.

Unencodable text is signalled by the zero-vector sentinel rather than an
exception so batch callers can skip and report it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .corpus import CorpusError, tokenize

DEFAULT_NMIN = 3
DEFAULT_NMAX = 6
DEFAULT_BUCKET_COUNT = 100_000
DEFAULT_SEED = 42

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


class EncodingNotFoundError(LookupError):
    """A precomputed-vector backend has no entry for the requested text."""


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    value = _FNV_OFFSET
    for byte in data:
        value = ((value ^ byte) * _FNV_PRIME) & _MASK64
    return value


def char_ngrams(word: str, nmin: int = DEFAULT_NMIN, nmax: int = DEFAULT_NMAX) -> list[str]:
    """Boundary-marked character n-grams of a word.

    The word is wrapped as ``<word>``; all substrings of length ``nmin`` to
    ``nmax`` are emitted shortest length first, left to right within each
    length. When the wrapped token is longer than ``nmax`` it is appended
    whole as a special gram.
    """
    if not word:
        raise ValueError("word must be non-empty")
    if not 1 <= nmin <= nmax:
        raise ValueError("require 1 <= nmin <= nmax")
    wrapped = f"<{word}>"
    length = len(wrapped)
    grams = [
        wrapped[i : i + n]
        for n in range(nmin, min(nmax, length) + 1)
        for i in range(length - n + 1)
    ]
    if length > nmax:
        grams.append(wrapped)
    return grams


def normalize_vector(vector: np.ndarray) -> np.ndarray:
    """Scale to unit length; a zero vector stays the zero sentinel."""
    vector = np.asarray(vector, dtype=np.float64)
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        return np.zeros(vector.shape, dtype=np.float64)
    return vector / norm


def is_sentinel(vector: np.ndarray) -> bool:
    """True for the zero-vector sentinel marking unencodable text."""
    return not np.any(np.asarray(vector))


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity, clamped to [-1, 1]. Rejects zero-norm inputs."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for a zero-norm (sentinel) vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


@dataclass
class EmbeddingTable:
    """Vocabulary vectors plus seeded subword-bucket vectors.

    Immutable after load; all lookups are read-only and safe to share
    across threads. Bucket vectors depend only on (seed, bucket_count,
    dim), so two tables loaded with equal parameters agree on every
    out-of-vocabulary embedding.
    """

    dim: int
    vocab: dict[str, np.ndarray]
    buckets: np.ndarray
    nmin: int
    nmax: int
    bucket_count: int
    seed: int


def _init_buckets(dim: int, bucket_count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    half_width = 0.5 / dim
    buckets = rng.uniform(-half_width, half_width, size=(bucket_count, dim))
    buckets.flags.writeable = False
    return buckets


def load_vectors(
    path: str | Path,
    nmin: int = DEFAULT_NMIN,
    nmax: int = DEFAULT_NMAX,
    bucket_count: int = DEFAULT_BUCKET_COUNT,
    seed: int = DEFAULT_SEED,
) -> EmbeddingTable:
    """Load a word-vector text file.

    Expected format: a header line ``"V D"`` followed by ``V`` rows of
    ``"word c1 ... cD"``. A missing header is tolerated by inferring the
    dimension from the first row. Rows whose component count disagrees
    with the dimension, or whose components fail to parse as finite
    numbers, reject the load with the offending line number.
    """
    if not 1 <= nmin <= nmax:
        raise CorpusError("require 1 <= nmin <= nmax")
    if bucket_count < 1:
        raise CorpusError("bucket_count must be a positive integer")
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusError(f"{path}: cannot read vector file: {exc}") from exc

    rows = [(idx + 1, line) for idx, line in enumerate(lines) if line.strip()]
    dim: int | None = None
    start = 0
    if rows:
        first_parts = rows[0][1].split()
        if len(first_parts) == 2:
            try:
                int(first_parts[0])
                dim = int(first_parts[1])
            except ValueError:
                dim = None
            else:
                start = 1
    if dim is None:
        if not rows:
            raise CorpusError(f"{path}: empty vector file without a header")
        dim = len(rows[0][1].split()) - 1
    if dim < 1:
        raise CorpusError(f"{path}: vector dimension must be positive, got {dim}")

    vocab: dict[str, np.ndarray] = {}
    for lineno, line in rows[start:]:
        parts = line.split()
        word = parts[0]
        if len(parts) - 1 != dim:
            raise CorpusError(
                f"{path}:{lineno}: expected {dim} components for '{word}', got {len(parts) - 1}"
            )
        if word in vocab:
            raise CorpusError(f"{path}:{lineno}: duplicate vocabulary word '{word}'")
        try:
            vector = np.array([float(p) for p in parts[1:]], dtype=np.float64)
        except ValueError as exc:
            raise CorpusError(f"{path}:{lineno}: non-numeric component for '{word}'") from exc
        if not np.all(np.isfinite(vector)):
            raise CorpusError(f"{path}:{lineno}: non-finite component for '{word}'")
        vector.flags.writeable = False
        vocab[word] = vector

    return EmbeddingTable(
        dim=dim,
        vocab=vocab,
        buckets=_init_buckets(dim, bucket_count, seed),
        nmin=nmin,
        nmax=nmax,
        bucket_count=bucket_count,
        seed=seed,
    )


def embed_word(table: EmbeddingTable, word: str) -> np.ndarray:
    """Embed a single word.

    In-vocabulary words return their stored vector unchanged. Unknown
    words return the mean of the bucket vectors indexed by the FNV-1a
    hashes of their character n-grams; a word yielding no n-grams (wrapped
    length below ``nmin``) returns the zero vector.
    """
    if not word:
        raise ValueError("word must be non-empty")
    stored = table.vocab.get(word)
    if stored is not None:
        return stored
    grams = char_ngrams(word, table.nmin, table.nmax)
    if not grams:
        return np.zeros(table.dim, dtype=np.float64)
    indices = [fnv1a_64(gram.encode("utf-8")) % table.bucket_count for gram in grams]
    return table.buckets[indices].mean(axis=0)


class TextEncoder(Protocol):
    """Deterministic text-to-unit-vector encoder contract."""

    dim: int
    id: str

    def encode(self, text: str) -> np.ndarray:
        """Encode normalized text; zero-vector sentinel when unencodable."""
        ...


class SubwordMeanEncoder:
    """Baseline encoder: mean of per-token word embeddings, normalized."""

    id = "subword-mean"

    def __init__(self, table: EmbeddingTable) -> None:
        self.table = table
        self.dim = table.dim

    def encode(self, text: str) -> np.ndarray:
        tokens = tokenize(text)
        if not tokens:
            return np.zeros(self.dim, dtype=np.float64)
        mean = np.mean([embed_word(self.table, token) for token in tokens], axis=0)
        return normalize_vector(mean)


def text_key(text: str) -> str:
    """Lookup key for precomputed encodings: SHA-256 hex of the text."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class PrecomputedEncoder:
    """Replays sentence vectors produced offline by an external encoder.

    Entries are keyed by the SHA-256 of the normalized text and are
    renormalized on lookup. A missing key raises
    :class:`EncodingNotFoundError`; there is no silent fallback.
    """

    id = "precomputed"

    def __init__(self, dim: int, vectors: dict[str, np.ndarray]) -> None:
        if dim < 1:
            raise ValueError("dim must be a positive integer")
        self.dim = dim
        self._vectors = {}
        for key, vector in vectors.items():
            arr = np.asarray(vector, dtype=np.float64)
            if arr.shape != (dim,):
                raise ValueError(f"vector for key {key!r} has shape {arr.shape}, expected ({dim},)")
            self._vectors[key] = arr

    @classmethod
    def load(cls, path: str | Path) -> "PrecomputedEncoder":
        """Load a JSONL file of ``{"sha256": hex, "vector": [reals]}``."""
        path = Path(path)
        try:
            raw = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise CorpusError(f"{path}: cannot read encoding file: {exc}") from exc
        vectors: dict[str, np.ndarray] = {}
        dim: int | None = None
        for lineno, line in enumerate(raw.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            key = obj.get("sha256")
            values = obj.get("vector")
            if not isinstance(key, str) or not isinstance(values, list):
                raise CorpusError(f"{path}:{lineno}: expected keys 'sha256' and 'vector'")
            vector = np.asarray(values, dtype=np.float64)
            if not np.all(np.isfinite(vector)):
                raise CorpusError(f"{path}:{lineno}: non-finite vector component")
            if dim is None:
                dim = vector.shape[0]
                if dim < 1:
                    raise CorpusError(f"{path}:{lineno}: empty vector")
            elif vector.shape[0] != dim:
                raise CorpusError(
                    f"{path}:{lineno}: vector has {vector.shape[0]} components, expected {dim}"
                )
            vectors[key] = vector
        if dim is None:
            raise CorpusError(f"{path}: no encodings found")
        return cls(dim=dim, vectors=vectors)

    def encode(self, text: str) -> np.ndarray:
        key = text_key(text)
        vector = self._vectors.get(key)
        if vector is None:
            raise EncodingNotFoundError(f"no precomputed encoding for text {text!r} (key {key})")
        return normalize_vector(vector)
