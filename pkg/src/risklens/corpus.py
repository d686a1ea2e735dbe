"""Loading and normalization of project, risk, and parallel-pair corpora.

All inputs are line-delimited JSON (one object per line). Loaders either
return a fully validated collection or raise :class:`CorpusError` naming
the offending file, line, and reason; a load never returns partially
validated data. Free-text fields that feed similarity computations are
normalized on load (NFC, lowercase, collapsed whitespace) so downstream
scores are reproducible byte for byte.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterator

# Word tokens are alphanumeric runs; hyphens joining two alphanumeric runs
# stay inside the token ("ab-initio"), every other character separates.
WORD_RE = re.compile(r"[^\W_]+(?:-[^\W_]+)*", re.UNICODE)


class CorpusError(ValueError):
    """An input file failed validation."""


def normalize_text(text: str) -> str:
    """Normalize free text for embedding and comparison.

    Applies Unicode NFC, lowercases, then collapses whitespace runs to
    single spaces and strips the ends. The second NFC pass keeps the
    function idempotent for the rare code points whose lowercase form
    denormalizes.
    """
    text = unicodedata.normalize("NFC", text)
    text = unicodedata.normalize("NFC", text.lower())
    return " ".join(text.split())


def tokenize(text: str) -> list[str]:
    """Split text into word tokens (see ``WORD_RE``)."""
    return WORD_RE.findall(text)


@dataclass(frozen=True)
class ProjectRecord:
    """A project's identifying info plus its free-text description fields.

    ``fields`` is an ordered mapping of field name to raw text; the file's
    field order is preserved and controls concatenation order in
    :func:`assemble_text`.
    """

    id: str
    name: str
    fields: tuple[tuple[str, str], ...]

    def field_values(self) -> list[str]:
        return [value for _, value in self.fields]


@dataclass(frozen=True)
class RawRisk:
    """A risk as recorded in a project's register (text normalized)."""

    risk_id: str
    project_id: str
    text: str


@dataclass(frozen=True)
class CuratedRisk:
    """An expert-written canonical risk with its recommended mitigation.

    ``risk_text`` is normalized on load; ``mitigation_text`` rides along
    unmodified because it never enters a similarity computation.
    """

    curated_id: str
    risk_text: str
    mitigation_text: str


@dataclass(frozen=True)
class ParallelPair:
    """A positive training pair: a raw risk and its curated counterpart."""

    raw_text: str
    curated_text: str


def _iter_jsonl(path: Path) -> Iterator[tuple[int, dict[str, Any]]]:
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"{path}: cannot read file: {exc}") from exc
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise CorpusError(f"{path}:{lineno}: expected a JSON object, got {type(obj).__name__}")
        yield lineno, obj


def _require_str(obj: dict[str, Any], key: str, path: Path, lineno: int) -> str:
    if key not in obj:
        raise CorpusError(f"{path}:{lineno}: missing required field '{key}'")
    value = obj[key]
    if not isinstance(value, str):
        raise CorpusError(f"{path}:{lineno}: field '{key}' must be a string")
    return value


def load_projects(path: str | Path) -> list[ProjectRecord]:
    """Load project records, preserving file order.

    Each line must carry ``{"id", "name", "fields"}``. Ids must be unique
    within the load and at least one field value must be non-empty after
    normalization. Any violation rejects the whole load.
    """
    path = Path(path)
    records: list[ProjectRecord] = []
    seen: dict[str, int] = {}
    for lineno, obj in _iter_jsonl(path):
        record_id = _require_str(obj, "id", path, lineno)
        if not record_id:
            raise CorpusError(f"{path}:{lineno}: field 'id' must be non-empty")
        if record_id in seen:
            raise CorpusError(
                f"{path}:{lineno}: duplicate id '{record_id}' (first seen on line {seen[record_id]})"
            )
        seen[record_id] = lineno
        name = _require_str(obj, "name", path, lineno)
        fields_obj = obj.get("fields")
        if not isinstance(fields_obj, dict):
            raise CorpusError(f"{path}:{lineno}: field 'fields' must be an object")
        fields: list[tuple[str, str]] = []
        for field_name, field_value in fields_obj.items():
            if not isinstance(field_value, str):
                raise CorpusError(
                    f"{path}:{lineno}: value of field '{field_name}' must be a string"
                )
            fields.append((field_name, field_value))
        if not any(normalize_text(value) for _, value in fields):
            raise CorpusError(
                f"{path}:{lineno}: record '{record_id}' has no non-empty field value"
            )
        records.append(ProjectRecord(id=record_id, name=name, fields=tuple(fields)))
    return records


def load_raw_risks(path: str | Path) -> list[RawRisk]:
    """Load raw project risks (``{"risk_id", "project_id", "text"}`` per line)."""
    path = Path(path)
    risks: list[RawRisk] = []
    seen: dict[str, int] = {}
    for lineno, obj in _iter_jsonl(path):
        risk_id = _require_str(obj, "risk_id", path, lineno)
        if not risk_id:
            raise CorpusError(f"{path}:{lineno}: field 'risk_id' must be non-empty")
        if risk_id in seen:
            raise CorpusError(
                f"{path}:{lineno}: duplicate risk_id '{risk_id}' (first seen on line {seen[risk_id]})"
            )
        seen[risk_id] = lineno
        project_id = _require_str(obj, "project_id", path, lineno)
        if not project_id:
            raise CorpusError(f"{path}:{lineno}: field 'project_id' must be non-empty")
        text = normalize_text(_require_str(obj, "text", path, lineno))
        if not text:
            raise CorpusError(f"{path}:{lineno}: field 'text' is blank after normalization")
        risks.append(RawRisk(risk_id=risk_id, project_id=project_id, text=text))
    return risks


def load_curated_risks(path: str | Path) -> list[CuratedRisk]:
    """Load the curated risk database (``{"curated_id", "risk", "mitigation"}``)."""
    path = Path(path)
    risks: list[CuratedRisk] = []
    seen: dict[str, int] = {}
    for lineno, obj in _iter_jsonl(path):
        curated_id = _require_str(obj, "curated_id", path, lineno)
        if not curated_id:
            raise CorpusError(f"{path}:{lineno}: field 'curated_id' must be non-empty")
        if curated_id in seen:
            raise CorpusError(
                f"{path}:{lineno}: duplicate curated_id '{curated_id}'"
                f" (first seen on line {seen[curated_id]})"
            )
        seen[curated_id] = lineno
        risk_text = normalize_text(_require_str(obj, "risk", path, lineno))
        if not risk_text:
            raise CorpusError(f"{path}:{lineno}: field 'risk' is blank after normalization")
        mitigation = _require_str(obj, "mitigation", path, lineno)
        risks.append(
            CuratedRisk(curated_id=curated_id, risk_text=risk_text, mitigation_text=mitigation)
        )
    return risks


def load_parallel_pairs(path: str | Path) -> list[ParallelPair]:
    """Load a parallel training corpus (``{"raw", "curated"}`` per line)."""
    path = Path(path)
    pairs: list[ParallelPair] = []
    for lineno, obj in _iter_jsonl(path):
        raw_text = normalize_text(_require_str(obj, "raw", path, lineno))
        curated_text = normalize_text(_require_str(obj, "curated", path, lineno))
        if not raw_text:
            raise CorpusError(f"{path}:{lineno}: field 'raw' is blank after normalization")
        if not curated_text:
            raise CorpusError(f"{path}:{lineno}: field 'curated' is blank after normalization")
        pairs.append(ParallelPair(raw_text=raw_text, curated_text=curated_text))
    return pairs


def project_to_json(record: ProjectRecord) -> dict[str, Any]:
    return {"id": record.id, "name": record.name, "fields": dict(record.fields)}


def raw_risk_to_json(risk: RawRisk) -> dict[str, Any]:
    return {"risk_id": risk.risk_id, "project_id": risk.project_id, "text": risk.text}


def curated_risk_to_json(risk: CuratedRisk) -> dict[str, Any]:
    return {
        "curated_id": risk.curated_id,
        "risk": risk.risk_text,
        "mitigation": risk.mitigation_text,
    }


def parallel_pair_to_json(pair: ParallelPair) -> dict[str, Any]:
    return {"raw": pair.raw_text, "curated": pair.curated_text}


def dump_jsonl(items: list[Any], path: str | Path, to_json: Callable[[Any], dict[str, Any]]) -> None:
    """Write one JSON object per line; inverse of the matching loader."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for item in items:
            handle.write(json.dumps(to_json(item), ensure_ascii=False) + "\n")


def assemble_text(record: ProjectRecord) -> str:
    """Collapse a project record into one normalized text blob.

    The name is concatenated with the field values in stored field order,
    joined by ". " after per-part normalization; parts that normalize to
    empty are dropped. Raises :class:`CorpusError` when every field value
    is empty, since the resulting profile would be vacuous.
    """
    normalized_fields = [normalize_text(value) for value in record.field_values()]
    if not any(normalized_fields):
        raise CorpusError(f"project '{record.id}': all fields empty, nothing to assemble")
    parts = [normalize_text(record.name)] + normalized_fields
    return ". ".join(part for part in parts if part)
