"""Line-oriented files exchanged by the harness."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from ..errors import ConfigurationError
from ..flags import NO_CALLSIGN, NoResult
from .metrics import normalize_icao


@dataclass(frozen=True)
class Reference:
    icao: Optional[str]
    words: tuple[str, ...] = ()


def _lines(path):
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if line.strip() and not line.startswith("#"):
            yield lineno, line


def read_references(path) -> dict[str, Reference]:
    """``utterance_id<TAB>ICAO-or-NONE[<TAB>transcript]`` per line."""
    refs = {}
    for lineno, line in _lines(path):
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise ConfigurationError(f"{path}:{lineno}: expected id, ICAO and optional transcript")
        words = tuple(fields[2].split()) if len(fields) == 3 else ()
        refs[fields[0]] = Reference(normalize_icao(fields[1]), words)
    return refs


def write_references(path, refs: dict[str, Reference]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for uid, ref in refs.items():
            f.write(f"{uid}\t{ref.icao or 'NONE'}\t{' '.join(ref.words)}\n")


def read_hypotheses(path) -> dict[str, list[str]]:
    """``utterance_id<TAB>words`` per line (an empty second field is allowed)."""
    hyps = {}
    for lineno, line in _lines(path):
        uid, _, text = line.partition("\t")
        hyps[uid] = text.split()
    return hyps


def write_hypotheses(path, hyps: dict[str, object]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for uid, words in hyps.items():
            text = words.value if isinstance(words, NoResult) else " ".join(words)
            f.write(f"{uid}\t{text}\n")


def read_candidates(path) -> dict[str, Union[list[str], NoResult]]:
    """Injected NER output: ``utterance_id<TAB>callsign words`` or ``NO_CALLSIGN``."""
    out = {}
    for lineno, line in _lines(path):
        uid, _, text = line.partition("\t")
        text = text.strip()
        out[uid] = NO_CALLSIGN if text in ("", "NO_CALLSIGN") else text.split()
    return out


def read_predictions(path) -> dict[str, Optional[str]]:
    """``utterance_id<TAB>ICAO-or-NONE[<TAB>...]``; extra columns are ignored."""
    out = {}
    for lineno, line in _lines(path):
        fields = line.split("\t")
        if len(fields) < 2:
            raise ConfigurationError(f"{path}:{lineno}: expected id and ICAO")
        out[fields[0]] = normalize_icao(fields[1])
    return out
