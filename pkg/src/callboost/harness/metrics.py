"""Callsign accuracy and word error rate."""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

from ..errors import ConfigurationError
from ..flags import NoResult


def normalize_icao(value) -> Optional[str]:
    """Map every "no callsign" spelling (None, NONE, NO_MATCH, "") to None."""
    if value is None or isinstance(value, NoResult):
        return None
    value = str(value).strip()
    if value.upper() in ("", "NONE", "NO_MATCH", "NO_CALLSIGN"):
        return None
    return value


def _same_ids(a: Mapping, b: Mapping, what: str) -> None:
    if a.keys() != b.keys():
        missing = sorted(set(b) - set(a))[:5]
        extra = sorted(set(a) - set(b))[:5]
        raise ConfigurationError(f"{what}: id sets differ (missing {missing}, unexpected {extra})")


def evaluate_callsigns(predictions: Mapping[str, object], references: Mapping[str, object]) -> float:
    """Percentage of utterances whose predicted ICAO code equals the reference.

    An utterance without a reference callsign is correct only when nothing was
    predicted for it.
    """
    _same_ids(predictions, references, "evaluate_callsigns")
    if not references:
        raise ConfigurationError("evaluate_callsigns: no utterances")
    correct = sum(normalize_icao(predictions[k]) == normalize_icao(references[k]) for k in references)
    return 100.0 * correct / len(references)


def edit_distance(hyp: Sequence[str], ref: Sequence[str]) -> int:
    """Unit-cost word edit distance (substitutions + deletions + insertions)."""
    prev = list(range(len(ref) + 1))
    for i, h in enumerate(hyp, 1):
        cur = [i]
        for j, r in enumerate(ref, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (h != r)))
        prev = cur
    return prev[-1]


def word_error_rate(hypotheses: Mapping[str, Sequence[str]], references: Mapping[str, Sequence[str]]) -> float:
    """Corpus WER in percent: total edit distance over total reference words."""
    _same_ids(hypotheses, references, "word_error_rate")
    errors = words = 0
    for k, ref in references.items():
        hyp = hypotheses[k]
        hyp = hyp.split() if isinstance(hyp, str) else list(hyp)
        ref = ref.split() if isinstance(ref, str) else list(ref)
        errors += edit_distance(hyp, ref)
        words += len(ref)
    if words == 0:
        return 0.0 if errors == 0 else float("inf")
    return 100.0 * errors / words
