"""Stopword-delimited key phrase extraction with degree/frequency scoring.

Candidate phrases are maximal runs of non-stopword tokens. A run breaks at
any stopword and at any punctuation between tokens (any non-whitespace
character outside the tokens themselves; hyphens joining alphanumerics stay
inside a token). Runs longer than ``max_phrase_len`` are cut to their first
``max_phrase_len`` tokens and the remainder of the run is discarded.

Scoring, over all candidate occurrences:

* ``freq(w)``  = number of occurrences of token ``w``
* ``deg(w)``   = sum of the containing candidate's length per occurrence
* word score   = ``deg(w) / freq(w)``
* phrase score = sum of its tokens' word scores (with multiplicity)

Since every occurrence contributes at least 1 to its own degree,
``deg(w) >= freq(w)``, so word scores are always >= 1 and a phrase's score
is at least its length.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

from .corpus import WORD_RE, CorpusError

DEFAULT_MAX_PHRASE_LEN = 4


@dataclass(frozen=True)
class ScoredPhrase:
    phrase: str
    words: tuple[str, ...]
    score: float


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load a stopword list, one token per line, '#' comments allowed.

    With no path, returns the packaged English list. The loaded set must be
    non-empty and is lowercased.
    """
    if path is None:
        text = resources.files("risklens").joinpath("data/stopwords_en.txt").read_text("utf-8")
        source = "packaged stopword list"
    else:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise CorpusError(f"{path}: cannot read stopword file: {exc}") from exc
        source = str(path)
    words = set()
    for line in text.splitlines():
        token = line.split("#", 1)[0].strip().lower()
        if token:
            words.add(token)
    if not words:
        raise CorpusError(f"{source}: stopword list is empty")
    return frozenset(words)


def _candidate_runs(text: str, stopwords: Iterable[str], max_phrase_len: int) -> list[list[str]]:
    """Yield candidate token runs, already truncated to max_phrase_len."""
    stopset = set(stopwords)
    candidates: list[list[str]] = []
    run: list[str] = []
    prev_end: int | None = None

    def flush() -> None:
        nonlocal run
        if run:
            candidates.append(run[:max_phrase_len])
            run = []

    for match in WORD_RE.finditer(text):
        token = match.group(0)
        if prev_end is not None and text[prev_end : match.start()].strip():
            flush()  # punctuation between tokens breaks the run
        prev_end = match.end()
        if token in stopset:
            flush()
        else:
            run.append(token)
    flush()
    return candidates


def rake_extract(
    text: str,
    stopwords: Iterable[str],
    max_phrase_len: int = DEFAULT_MAX_PHRASE_LEN,
) -> list[ScoredPhrase]:
    """Extract scored key phrases from normalized text.

    Returns phrases sorted by score descending, ties broken by phrase text
    ascending. Duplicate phrase texts collapse to one entry keeping the
    first occurrence's word list. Empty text yields an empty list.
    """
    if max_phrase_len < 1:
        raise ValueError("max_phrase_len must be a positive integer")
    candidates = _candidate_runs(text, stopwords, max_phrase_len)
    if not candidates:
        return []

    freq: dict[str, int] = defaultdict(int)
    degree: dict[str, int] = defaultdict(int)
    for candidate in candidates:
        length = len(candidate)
        for word in candidate:
            freq[word] += 1
            degree[word] += length
    word_score = {word: degree[word] / freq[word] for word in freq}

    phrases: dict[str, ScoredPhrase] = {}
    for candidate in candidates:
        phrase = " ".join(candidate)
        if phrase in phrases:
            continue
        score = sum(word_score[word] for word in candidate)
        phrases[phrase] = ScoredPhrase(phrase=phrase, words=tuple(candidate), score=score)

    return sorted(phrases.values(), key=lambda p: (-p.score, p.phrase))
