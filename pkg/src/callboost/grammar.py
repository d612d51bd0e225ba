"""ICAO callsign parsing, spoken-form expansion and the inverse extractor.

Spoken forms follow ICAO phraseology: the airline telephony name, then the
flight number read digit by digit with letters in the NATO alphabet::

    SWR2689  ->  swiss two six eight nine
    DLH5KX   ->  lufthansa five kilo x-ray | hansa five kilo x-ray

Designators missing from the lexicon are spelled out letter by letter.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from itertools import product
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .errors import CallsignParseError, ConfigurationError

DIGIT_WORDS = {
    "0": "zero", "1": "one", "2": "two", "3": "three", "4": "four",
    "5": "five", "6": "six", "7": "seven", "8": "eight", "9": "nine",
}

NATO_WORDS = {
    "A": "alfa", "B": "bravo", "C": "charlie", "D": "delta", "E": "echo",
    "F": "foxtrot", "G": "golf", "H": "hotel", "I": "india", "J": "juliett",
    "K": "kilo", "L": "lima", "M": "mike", "N": "november", "O": "oscar",
    "P": "papa", "Q": "quebec", "R": "romeo", "S": "sierra", "T": "tango",
    "U": "uniform", "V": "victor", "W": "whiskey", "X": "x-ray", "Y": "yankee",
    "Z": "zulu",
}

_DIGIT_OF = {w: d for d, w in DIGIT_WORDS.items()}
_LETTER_OF = {w: c for c, w in NATO_WORDS.items()}
# common transcript spellings, accepted when reading only
_LETTER_OF.update({"alpha": "A", "juliet": "J", "whisky": "W", "xray": "X"})

_DESIGNATOR_RE = re.compile(r"[A-Z]{2,3}")


def digit_value(word: str) -> Optional[str]:
    return _DIGIT_OF.get(word)


def letter_value(word: str) -> Optional[str]:
    return _LETTER_OF.get(word)


def spoken_char(word: str) -> Optional[str]:
    """The code character a spoken digit/letter word stands for, or None."""
    return _DIGIT_OF.get(word) or _LETTER_OF.get(word)


@dataclass(frozen=True)
class ParsedCallsign:
    icao: str
    designator: str
    suffix: str


def parse_icao(code: str) -> ParsedCallsign:
    """Split an ICAO callsign into airline designator and flight-number suffix.

    >>> parse_icao("RYR1RK")
    ParsedCallsign(icao='RYR1RK', designator='RYR', suffix='1RK')
    """
    if not code:
        raise CallsignParseError(code, "", "empty code")
    bad = re.search(r"[^A-Z0-9]+", code)
    if bad:
        raise CallsignParseError(code, bad.group(), "invalid characters")
    run = re.match(r"[A-Z]*", code).group()
    if len(run) < 2:
        raise CallsignParseError(code, code[: len(run) + 1], "designator needs 2-3 letters")
    if len(run) > 3:
        raise CallsignParseError(code, run, "designator longer than 3 letters")
    suffix = code[len(run):]
    if not suffix:
        raise CallsignParseError(code, code, "missing flight number")
    return ParsedCallsign(code, run, suffix)


class AirlineLexicon:
    """Designator -> telephony names, case-insensitive on the designator.

    The reverse direction (name -> designator) resolves to the first designator
    that lists the name.
    """

    def __init__(self, entries: Union[dict, Iterable[tuple[str, Sequence[str]]]] = ()):
        self._names: dict[str, tuple[str, ...]] = {}
        self._by_words: dict[tuple[str, ...], str] = {}
        items = entries.items() if isinstance(entries, dict) else entries
        for designator, names in items:
            self.add(designator, names)

    def add(self, designator: str, names: Sequence[str]) -> None:
        designator = designator.upper()
        if not _DESIGNATOR_RE.fullmatch(designator):
            raise ConfigurationError(f"bad airline designator {designator!r}")
        cleaned = []
        for name in names:
            words = tuple(name.lower().split())
            if not words:
                raise ConfigurationError(f"empty telephony name for {designator}")
            if len(words) > 2:
                raise ConfigurationError(f"telephony name {name!r} has more than 2 words")
            cleaned.append(" ".join(words))
            self._by_words.setdefault(words, designator)
        if not cleaned:
            raise ConfigurationError(f"no telephony names for {designator}")
        self._names[designator] = tuple(dict.fromkeys(self._names.get(designator, ()) + tuple(cleaned)))
        self.__dict__.pop("name_tokens", None)

    def names(self, designator: str) -> tuple[str, ...]:
        return self._names.get(designator.upper(), ())

    def designator_for(self, words: Sequence[str]) -> Optional[str]:
        return self._by_words.get(tuple(words))

    def designators(self) -> list[str]:
        return list(self._names)

    @cached_property
    def name_tokens(self) -> frozenset:
        return frozenset(w for words in self._by_words for w in words)

    @property
    def max_name_words(self) -> int:
        return max((len(w) for w in self._by_words), default=0)

    def __contains__(self, designator) -> bool:
        return designator.upper() in self._names

    def __len__(self) -> int:
        return len(self._names)

    def __repr__(self):
        return f"AirlineLexicon({len(self)} airlines)"

    @classmethod
    def from_text(cls, text: str) -> "AirlineLexicon":
        lex = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ConfigurationError(f"lexicon line {lineno}: expected DESIGNATOR<TAB>names")
            lex.add(fields[0].strip(), [n for n in fields[1].split("|")])
        return lex

    @classmethod
    def from_file(cls, path) -> "AirlineLexicon":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def default(cls) -> "AirlineLexicon":
        """The bundled lexicon of common European and intercontinental carriers."""
        text = resources.files("callboost").joinpath("data/airlines.tsv").read_text(encoding="utf-8")
        return cls.from_text(text)

    def to_text(self) -> str:
        return "".join(f"{d}\t{'|'.join(n)}\n" for d, n in self._names.items())


FULL = "full"
SHORTENED = "shortened"


@dataclass(frozen=True)
class Expansion:
    words: tuple[str, ...]
    icao: str
    kind: str = field(default=FULL)

    def __post_init__(self):
        if not self.words:
            raise ValueError("expansion must have at least one word")
        object.__setattr__(self, "words", tuple(self.words))

    @property
    def text(self) -> str:
        return " ".join(self.words)

    @cached_property
    def suffix_words(self) -> int:
        """Number of trailing words that spell the flight number."""
        return min(len(parse_icao(self.icao).suffix), len(self.words))

    @property
    def name_words(self) -> tuple[str, ...]:
        """Leading words naming the airline (empty for shortened variants)."""
        if self.kind != FULL:
            return ()
        return self.words[: len(self.words) - self.suffix_words]


def _as_parsed(c) -> ParsedCallsign:
    return c if isinstance(c, ParsedCallsign) else parse_icao(c)


def suffix_words(suffix: str) -> list[str]:
    return [DIGIT_WORDS[ch] if ch.isdigit() else NATO_WORDS[ch] for ch in suffix]


def expand(c: Union[ParsedCallsign, str], lex: AirlineLexicon) -> list[Expansion]:
    """All full spoken forms of a callsign, in lexicon order, without duplicates."""
    c = _as_parsed(c)
    names = [n.split() for n in lex.names(c.designator)]
    if not names:
        names = [[NATO_WORDS[ch] for ch in c.designator]]
    tail = suffix_words(c.suffix)
    seen = dict.fromkeys(tuple(name) + tuple(tail) for name in names)
    return [Expansion(words, c.icao, FULL) for words in seen]


def shortened_variants(e: Expansion) -> list[Expansion]:
    """Forms a speaker may use instead of the full callsign.

    The telephony name dropped, and every shorter tail of the flight number,
    as long as at least two words remain.
    """
    if e.kind != FULL:
        raise ValueError("shortened_variants expects a full expansion")
    tail = e.words[len(e.words) - e.suffix_words:]
    return [Expansion(tail[i:], e.icao, SHORTENED) for i in range(len(tail) - 1)]


def _suffix_at(words: Sequence[str], j: int) -> str:
    if j >= len(words) or words[j] not in _DIGIT_OF:
        return ""
    chars = []
    while j < len(words):
        ch = spoken_char(words[j])
        if ch is None:
            break
        chars.append(ch)
        j += 1
    return "".join(chars)


def designators_at(words: Sequence[str], i: int, lex: AirlineLexicon):
    """Yield ``(designator, n_words)`` for every airline reading starting at ``i``.

    Telephony names come first (longest first), then NATO spellings of 3 and 2
    letters.
    """
    for n in range(min(lex.max_name_words, len(words) - i), 0, -1):
        d = lex.designator_for(words[i:i + n])
        if d is not None:
            yield d, n
    for n in (3, 2):
        letters = [letter_value(w) for w in words[i:i + n]]
        if len(letters) == n and all(letters):
            yield "".join(letters), n


def extract_icao(words: Union[str, Sequence[str]], lex: AirlineLexicon) -> Optional[str]:
    """ICAO code of the first callsign spoken in ``words``, or None.

    Scans left to right; at the first position where an airline reading is
    followed by a flight number (starting with a digit), the longest such span
    wins.
    """
    if isinstance(words, str):
        words = words.split()
    words = list(words)
    for i in range(len(words)):
        best = None
        for designator, n in designators_at(words, i, lex):
            suffix = _suffix_at(words, i + n)
            if suffix and (best is None or n + len(suffix) > best[0]):
                best = (n + len(suffix), designator + suffix)
        if best is not None:
            return best[1]
    return None
