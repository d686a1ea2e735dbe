"""Project profiles and angular similarity ranking.

Profile vectors pool key-phrase embeddings weighted by phrase score, so
the most significant expressions dominate the project's direction in
embedding space. Ranking uses angular similarity ``1 - arccos(cos)/pi``
rather than raw cosine: the two orderings are identical, but the angular
map expands score differences where cosine saturates near 1, keeping
highly similar projects distinguishable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .corpus import ProjectRecord, assemble_text, tokenize
from .embedding import EmbeddingTable, cosine, embed_word, is_sentinel, normalize_vector
from .keyphrase import DEFAULT_MAX_PHRASE_LEN, ScoredPhrase, rake_extract

DEFAULT_TOP_K = 10
DEFAULT_SCORE_FLOOR = 0.3


class ProfileError(ValueError):
    """A project record cannot be reduced to a usable profile vector."""


@dataclass(frozen=True)
class ProjectProfile:
    id: str
    phrases: tuple[ScoredPhrase, ...]
    vector: np.ndarray


@dataclass(frozen=True)
class ProjectMatch:
    id: str
    score: float


def arc_cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Angular similarity ``1 - arccos(cos(u, v))/pi`` in [0, 1].

    Symmetric and strictly increasing in the cosine. Zero-norm (sentinel)
    inputs have no direction and are rejected.
    """
    return 1.0 - math.acos(cosine(u, v)) / math.pi


def build_profile(
    record: ProjectRecord,
    table: EmbeddingTable,
    stopwords: Iterable[str],
    max_phrase_len: int = DEFAULT_MAX_PHRASE_LEN,
    weighted: bool = True,
) -> ProjectProfile:
    """Reduce a project record to key phrases and a unit profile vector.

    The vector is the normalized score-weighted average of per-phrase mean
    word embeddings (plain average with ``weighted=False``). Records whose
    text produces no phrases fall back to the mean embedding of all
    non-stopword tokens. Raises :class:`ProfileError` when nothing
    embeddable remains.
    """
    text = assemble_text(record)
    phrases = rake_extract(text, stopwords, max_phrase_len)
    if phrases:
        total_weight = 0.0
        pooled = np.zeros(table.dim, dtype=np.float64)
        for phrase in phrases:
            phrase_mean = np.mean([embed_word(table, word) for word in phrase.words], axis=0)
            weight = phrase.score if weighted else 1.0
            pooled += weight * phrase_mean
            total_weight += weight
        vector = normalize_vector(pooled / total_weight)
    else:
        stopset = set(stopwords)
        tokens = [token for token in tokenize(text) if token not in stopset]
        if not tokens:
            raise ProfileError(f"project '{record.id}': no embeddable content")
        vector = normalize_vector(
            np.mean([embed_word(table, token) for token in tokens], axis=0)
        )
    if is_sentinel(vector):
        raise ProfileError(f"project '{record.id}': no embeddable content")
    vector.flags.writeable = False
    return ProjectProfile(id=record.id, phrases=tuple(phrases), vector=vector)


def build_profiles(
    records: Iterable[ProjectRecord],
    table: EmbeddingTable,
    stopwords: Iterable[str],
    max_phrase_len: int = DEFAULT_MAX_PHRASE_LEN,
    weighted: bool = True,
) -> list[ProjectProfile]:
    stopset = frozenset(stopwords)
    return [
        build_profile(record, table, stopset, max_phrase_len, weighted) for record in records
    ]


def top_k_similar(
    project_id: str,
    profiles: list[ProjectProfile],
    k: int = DEFAULT_TOP_K,
    floor: float = DEFAULT_SCORE_FLOOR,
) -> list[ProjectMatch]:
    """The k most similar projects to ``project_id`` (itself excluded).

    Matches scoring below ``floor`` are dropped. Order is deterministic:
    score descending, id ascending on ties.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if not 0.0 <= floor <= 1.0:
        raise ValueError("floor must be in [0, 1]")
    by_id = {profile.id: profile for profile in profiles}
    query = by_id.get(project_id)
    if query is None:
        raise KeyError(f"unknown project id '{project_id}'")
    matches = [
        ProjectMatch(id=profile.id, score=arc_cosine_similarity(query.vector, profile.vector))
        for profile in profiles
        if profile.id != project_id
    ]
    matches = [match for match in matches if match.score >= floor]
    matches.sort(key=lambda match: (-match.score, match.id))
    return matches[:k]
