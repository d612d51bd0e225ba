"""Re-ranking of a spotted callsign against the callsigns on radar.

The spotted word sequence is compared with every spoken form of every active
callsign using a word-level weighted Levenshtein distance, and the closest
callsign wins.  Dropping the airline name is cheap, since controllers routinely
shorten callsigns ("six lima yankee" for "hansa six lima yankee").
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from .flags import NO_CALLSIGN, NO_MATCH, NoResult
from .grammar import AirlineLexicon, Expansion, designators_at, digit_value, letter_value, spoken_char


@dataclass(frozen=True)
class LevCosts:
    substitution: float = 1.0
    insertion: float = 1.0
    deletion: float = 1.0
    airline_deletion: float = 0.25

    def __post_init__(self):
        if min(self.substitution, self.insertion, self.deletion, self.airline_deletion) < 0:
            raise ValueError("edit costs must be non-negative")

    def scaled(self, factor: float) -> "LevCosts":
        return LevCosts(self.substitution * factor, self.insertion * factor,
                        self.deletion * factor, self.airline_deletion * factor)


DEFAULT_COSTS = LevCosts()


def weighted_levenshtein(a: Sequence[str], b: Sequence[str], costs: LevCosts = DEFAULT_COSTS,
                         airline_tokens=frozenset()) -> float:
    """Word-level edit cost of turning ``b`` into ``a``.

    A token of ``b`` missing from ``a`` is a deletion, charged
    ``costs.airline_deletion`` when it is in ``airline_tokens``; a token of ``a``
    missing from ``b`` is an insertion.
    """
    drop = [costs.airline_deletion if w in airline_tokens else costs.deletion for w in b]
    prev = [0.0] * (len(b) + 1)
    for j in range(1, len(b) + 1):
        prev[j] = prev[j - 1] + drop[j - 1]
    for i in range(1, len(a) + 1):
        cur = [prev[0] + costs.insertion]
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            sub = prev[j - 1] if ai == b[j - 1] else prev[j - 1] + costs.substitution
            cur.append(min(sub, prev[j] + costs.insertion, cur[j - 1] + drop[j - 1]))
        prev = cur
    return prev[-1]


@dataclass(frozen=True)
class RerankResult:
    icao: Union[str, NoResult]
    distance: float
    margin: float
    examined: int
    skipped: bool = False
    expansion: Optional[tuple[str, ...]] = None


def _key(distance: float) -> float:
    # keeps ties that only differ by float rounding together
    return round(distance, 9)


def rerank(candidate: Union[Sequence[str], NoResult], expansions: Mapping[str, Sequence[Expansion]],
           costs: LevCosts = DEFAULT_COSTS, max_distance: Optional[float] = None) -> RerankResult:
    """Closest active callsign to ``candidate``.

    Ties go to the shorter expansion, then the alphabetically first ICAO code.
    ``margin`` is the runner-up callsign's distance minus the winner's
    (infinite when only one callsign competes).
    """
    if candidate is NO_CALLSIGN or isinstance(candidate, NoResult):
        return RerankResult(NO_MATCH, math.inf, 0.0, 0, skipped=True)
    candidate = list(candidate)
    scored = []
    examined = 0
    for icao, forms in expansions.items():
        best = None
        for e in forms:
            examined += 1
            d = weighted_levenshtein(candidate, e.words, costs, frozenset(e.name_words))
            key = (_key(d), len(e.words))
            if best is None or key < best[0]:
                best = (key, d, e.words)
        if best is not None:
            scored.append((best[0], icao, best[1], best[2]))
    if not scored:
        return RerankResult(NO_MATCH, math.inf, 0.0, examined)
    scored.sort(key=lambda s: (s[0], s[1]))
    (_, icao, distance, words) = scored[0]
    margin = scored[1][2] - distance if len(scored) > 1 else math.inf
    if max_distance is not None and distance > max_distance:
        return RerankResult(NO_MATCH, distance, max(margin, 0.0), examined)
    return RerankResult(icao, distance, max(margin, 0.0), examined, expansion=words)


# words never absorbed as the single tolerated misrecognition inside a callsign
_BREAK_WORDS = frozenset("""
    decimal point flight level heading descend descending climb climbing turn left right
    contact maintain speed knots runway squawk cleared to and reduce increase direct
    tower approach radar ground hello good morning afternoon evening bye qnh feet
    altitude via for on degrees information identified report ils
""".split())


def _core(words: Sequence[str], j: int, stop=frozenset()) -> tuple[int, int, bool]:
    """Greedy flight-number run from ``j``: (end index, pattern-token count, has letter)."""
    n = len(words)
    if j >= n or digit_value(words[j]) is None:
        return j, 0, False
    k, count, end, junk, has_letter = j, 0, j, False, False
    while k < n:
        w = words[k]
        if spoken_char(w) is not None:
            count += 1
            has_letter = has_letter or letter_value(w) is not None
            k += 1
            end = k
        elif (not junk and w not in _BREAK_WORDS and w not in stop and k + 1 < n
              and spoken_char(words[k + 1]) is not None):
            junk = True
            k += 1
        else:
            break
    return end, count, has_letter


def spot_callsign(hypothesis: Sequence[str], lex: AirlineLexicon) -> Union[list[str], NoResult]:
    """Longest span of ``hypothesis`` that looks like a spoken callsign.

    A span is an optional airline reading (telephony name or NATO-spelled
    designator) followed by at least two digit/letter words, the first a digit,
    with at most one unrecognised word inside (never a command keyword or part
    of an airline name).  Without an airline reading the span must contain a
    letter, so bare numbers such as flight levels are not taken for callsigns.
    """
    if isinstance(hypothesis, str):
        hypothesis = hypothesis.split()
    words = list(hypothesis)
    best = None
    for s in range(len(words)):
        options = [(n, True) for _, n in designators_at(words, s, lex)] + [(0, False)]
        for n, named in options:
            end, count, has_letter = _core(words, s + n, lex.name_tokens)
            if count < 2 or not (named or has_letter):
                continue
            if best is None or end - s > best[1] - best[0]:
                best = (s, end)
    if best is None:
        return NO_CALLSIGN
    return words[best[0]:best[1]]
