"""Mapping raw project risks onto the curated risk database.

Raw risks from similar projects are matched to curated risks by plain
cosine similarity over sentence encodings (project ranking uses angular
similarity; risk matching deliberately does not). Matches at or above the
threshold feed the recommendation report; raw risks matching nothing form
the backlog exported for periodic expert curation. Before presentation,
curated risks that restate each other are removed by applying the same
similarity check between curated risk texts, keeping the highest-scoring
member of every duplicate cluster.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import CuratedRisk, RawRisk
from .embedding import EncodingNotFoundError, TextEncoder, is_sentinel
from .similarity import ProjectMatch, ProjectProfile, top_k_similar

DEFAULT_MATCH_THRESHOLD = 0.7


@dataclass(frozen=True)
class RiskMatch:
    raw_risk_id: str
    curated_id: str
    similarity: float


@dataclass(frozen=True)
class SkippedRisk:
    """A raw risk excluded from matching, with the reason."""

    risk_id: str
    reason: str


@dataclass(frozen=True)
class MatchResult:
    matches: tuple[RiskMatch, ...]
    skipped: tuple[SkippedRisk, ...]


@dataclass(frozen=True)
class RankedRisk:
    """A curated risk with its best match score and contributing raw risks."""

    curated: CuratedRisk
    similarity: float
    sources: tuple[str, ...]


@dataclass(frozen=True)
class BacklogEntry:
    risk: RawRisk
    best_similarity: float | None
    best_curated_id: str | None


@dataclass(frozen=True)
class RecommendParams:
    k: int = 10
    floor: float = 0.3
    threshold: float = DEFAULT_MATCH_THRESHOLD
    dedup_threshold: float | None = None

    def resolved_dedup_threshold(self) -> float:
        return self.threshold if self.dedup_threshold is None else self.dedup_threshold


@dataclass(frozen=True)
class RecommendationReport:
    project_id: str
    similar_projects: tuple[ProjectMatch, ...]
    risks: tuple[RankedRisk, ...]
    warnings: tuple[str, ...] = field(default=())


def _check_threshold(value: float, name: str = "threshold") -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")


def _encode_or_none(encoder: TextEncoder, text: str) -> tuple[np.ndarray | None, str | None]:
    """Encode text, mapping sentinel results and lookup misses to a reason."""
    try:
        vector = encoder.encode(text)
    except EncodingNotFoundError as exc:
        return None, str(exc)
    if is_sentinel(vector):
        return None, "text produced a sentinel (unencodable) vector"
    return vector, None


def _encode_curated(
    curated: Sequence[CuratedRisk], encoder: TextEncoder
) -> list[tuple[CuratedRisk, np.ndarray]]:
    encoded = []
    for risk in curated:
        vector, _ = _encode_or_none(encoder, risk.risk_text)
        if vector is not None:
            encoded.append((risk, vector))
    return encoded


def _score_raw_risks(
    raw: Sequence[RawRisk],
    curated: Sequence[CuratedRisk],
    encoder: TextEncoder,
) -> tuple[list[tuple[RawRisk, list[tuple[CuratedRisk, float]]]], list[SkippedRisk]]:
    """Cosine of every encodable raw risk against every encodable curated risk.

    Per-risk encoder failures (precomputed misses, sentinel encodings) skip
    that risk and are reported; they never abort the batch. Curated risks
    that cannot be encoded are silently excluded from the candidate set.
    """
    curated_encoded = _encode_curated(curated, encoder)
    scored: list[tuple[RawRisk, list[tuple[CuratedRisk, float]]]] = []
    skipped: list[SkippedRisk] = []
    for risk in raw:
        vector, reason = _encode_or_none(encoder, risk.text)
        if vector is None:
            skipped.append(SkippedRisk(risk_id=risk.risk_id, reason=reason or "unencodable"))
            continue
        sims = [
            (candidate, float(np.clip(np.dot(vector, cvec), -1.0, 1.0)))
            for candidate, cvec in curated_encoded
        ]
        scored.append((risk, sims))
    return scored, skipped


def match_risks(
    raw: Sequence[RawRisk],
    curated: Sequence[CuratedRisk],
    encoder: TextEncoder,
    threshold: float = DEFAULT_MATCH_THRESHOLD,
) -> MatchResult:
    """All (raw risk, curated risk) pairs with cosine similarity >= threshold.

    Matches preserve raw-risk file order, then curated order within each
    raw risk. Skipped raw risks (sentinel encodings or precomputed-backend
    misses) are reported alongside the matches.
    """
    _check_threshold(threshold)
    scored, skipped = _score_raw_risks(raw, curated, encoder)
    matches = [
        RiskMatch(raw_risk_id=risk.risk_id, curated_id=candidate.curated_id, similarity=sim)
        for risk, sims in scored
        for candidate, sim in sims
        if sim >= threshold
    ]
    return MatchResult(matches=tuple(matches), skipped=tuple(skipped))


def unmatched_backlog(
    raw: Sequence[RawRisk],
    curated: Sequence[CuratedRisk],
    encoder: TextEncoder,
    threshold: float = DEFAULT_MATCH_THRESHOLD,
) -> list[RawRisk]:
    """Exactly the encodable raw risks with no curated match at the threshold.

    Together with the matched risks this partitions the encodable raw set:
    disjoint, and their union covers every encodable raw risk.
    """
    _check_threshold(threshold)
    scored, _ = _score_raw_risks(raw, curated, encoder)
    return [
        risk for risk, sims in scored if not any(sim >= threshold for _, sim in sims)
    ]


def backlog_entries(
    raw: Sequence[RawRisk],
    curated: Sequence[CuratedRisk],
    encoder: TextEncoder,
    threshold: float = DEFAULT_MATCH_THRESHOLD,
) -> list[BacklogEntry]:
    """Backlog rows annotated with each risk's best (sub-threshold) candidate."""
    _check_threshold(threshold)
    scored, _ = _score_raw_risks(raw, curated, encoder)
    entries = []
    for risk, sims in scored:
        if any(sim >= threshold for _, sim in sims):
            continue
        if sims:
            best_candidate, best_sim = max(sims, key=lambda item: (item[1], item[0].curated_id))
            entries.append(
                BacklogEntry(
                    risk=risk, best_similarity=best_sim, best_curated_id=best_candidate.curated_id
                )
            )
        else:
            entries.append(BacklogEntry(risk=risk, best_similarity=None, best_curated_id=None))
    return entries


def group_matches(
    matches: Sequence[RiskMatch], curated: Sequence[CuratedRisk]
) -> list[RankedRisk]:
    """Group matches by curated risk: best similarity, contributing raw ids.

    Sorted by best similarity descending, curated_id ascending on ties.
    """
    by_id = {risk.curated_id: risk for risk in curated}
    best: dict[str, float] = {}
    sources: dict[str, list[str]] = {}
    for match in matches:
        if match.curated_id not in by_id:
            raise KeyError(f"match references unknown curated_id '{match.curated_id}'")
        current = best.get(match.curated_id)
        if current is None or match.similarity > current:
            best[match.curated_id] = match.similarity
        sources.setdefault(match.curated_id, [])
        if match.raw_risk_id not in sources[match.curated_id]:
            sources[match.curated_id].append(match.raw_risk_id)
    groups = [
        RankedRisk(
            curated=by_id[curated_id],
            similarity=best[curated_id],
            sources=tuple(sorted(sources[curated_id])),
        )
        for curated_id in best
    ]
    groups.sort(key=lambda group: (-group.similarity, group.curated.curated_id))
    return groups


def dedup_matches(
    groups: Sequence[RankedRisk],
    encoder: TextEncoder,
    dedup_threshold: float = DEFAULT_MATCH_THRESHOLD,
) -> list[RankedRisk]:
    """Remove curated risks that restate an already-kept one.

    Greedy scan in (similarity desc, curated_id asc) order: a risk is kept
    iff its risk text's cosine similarity to every already-kept risk text
    is below the threshold. The kept set is therefore pairwise below the
    threshold, and the highest-scoring member of any duplicate cluster
    always survives. Risk texts the encoder cannot encode are treated as
    unique and kept.
    """
    _check_threshold(dedup_threshold, "dedup_threshold")
    ordered = sorted(groups, key=lambda group: (-group.similarity, group.curated.curated_id))
    kept: list[RankedRisk] = []
    kept_vectors: list[np.ndarray] = []
    for group in ordered:
        vector, _ = _encode_or_none(encoder, group.curated.risk_text)
        if vector is None:
            kept.append(group)
            continue
        duplicate = any(
            float(np.clip(np.dot(vector, kept_vec), -1.0, 1.0)) >= dedup_threshold
            for kept_vec in kept_vectors
        )
        if not duplicate:
            kept.append(group)
            kept_vectors.append(vector)
    return kept


def recommend(
    project_id: str,
    profiles: list[ProjectProfile],
    raw: Sequence[RawRisk],
    curated: Sequence[CuratedRisk],
    encoder: TextEncoder,
    params: RecommendParams = RecommendParams(),
) -> RecommendationReport:
    """End-to-end recommendation for one project.

    Ranks similar projects, collects their tracked risks, matches those
    against the curated database, groups by curated risk, and removes
    duplicates. An empty curated database yields an empty risk list plus a
    warning flag rather than an error.
    """
    similar = top_k_similar(project_id, profiles, params.k, params.floor)
    similar_ids = {match.id for match in similar}
    collected = [risk for risk in raw if risk.project_id in similar_ids]
    result = match_risks(collected, curated, encoder, params.threshold)
    groups = group_matches(result.matches, curated)
    deduped = dedup_matches(groups, encoder, params.resolved_dedup_threshold())
    warnings = []
    if not curated:
        warnings.append("curated risk database is empty")
    if result.skipped:
        warnings.append(f"{len(result.skipped)} raw risk(s) skipped as unencodable")
    return RecommendationReport(
        project_id=project_id,
        similar_projects=tuple(similar),
        risks=tuple(deduped),
        warnings=tuple(warnings),
    )


def report_to_json(report: RecommendationReport) -> dict:
    """Persisted report shape, stable across runs."""
    return {
        "project_id": report.project_id,
        "similar": [{"id": match.id, "score": match.score} for match in report.similar_projects],
        "risks": [
            {
                "curated_id": group.curated.curated_id,
                "risk": group.curated.risk_text,
                "mitigation": group.curated.mitigation_text,
                "similarity": group.similarity,
                "sources": list(group.sources),
            }
            for group in report.risks
        ],
        "warnings": list(report.warnings),
    }


def backlog_to_json(entry: BacklogEntry) -> dict:
    return {
        "risk_id": entry.risk.risk_id,
        "project_id": entry.risk.project_id,
        "text": entry.risk.text,
        "best_similarity": entry.best_similarity,
        "best_curated_id": entry.best_curated_id,
    }
