"""Callsign-centred augmentation of entity-tagged ATC utterances.

Four actions rewrite one utterance: *delete* removes the callsign span, *move*
puts the same callsign at another span boundary, *swap* replaces it with a
callsign from a pool and *add* inserts a pool callsign into an utterance that
has none.  Tags use the B-/I- convention over the entity classes below.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .grammar import Expansion

ENTITY_TYPES = ("CAL", "CMD", "VAL", "UNIT", "GREET")
OUTSIDE = "O"
TAGS = frozenset([OUTSIDE] + [f"{p}-{t}" for t in ENTITY_TYPES for p in "BI"])
ACTIONS = ("add", "delete", "swap", "move")


class AugmentError(ValueError):
    pass


class InapplicableAction(AugmentError):
    """The action does not fit the utterance (e.g. delete without a callsign)."""


class EmptyPool(AugmentError):
    pass


@dataclass(frozen=True)
class TaggedUtterance:
    tokens: tuple[str, ...]
    tags: tuple[str, ...]
    id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "tags", tuple(self.tags))

    def spans(self) -> list[tuple[str, int, int]]:
        """``(type, start, end)`` for every tag span; ``O`` runs are one span per token."""
        out = []
        for i, tag in enumerate(self.tags):
            if tag == OUTSIDE:
                out.append((OUTSIDE, i, i + 1))
            elif tag.startswith("B-") or not out or out[-1][0] != tag[2:]:
                out.append((tag[2:], i, i + 1))
            else:
                kind, start, _ = out[-1]
                out[-1] = (kind, start, i + 1)
        return out

    def callsign_span(self) -> Optional[tuple[int, int]]:
        spans = [(s, e) for kind, s, e in self.spans() if kind == "CAL"]
        return spans[0] if spans else None

    def boundaries(self) -> list[int]:
        return sorted({0, len(self.tokens)} | {s for _, s, _ in self.spans()})


def check_utterance(u: TaggedUtterance) -> list[str]:
    """Invariant violations of ``u`` (empty when it is well formed)."""
    problems = []
    if len(u.tokens) != len(u.tags):
        problems.append(f"{u.id}: {len(u.tokens)} tokens but {len(u.tags)} tags")
    unknown = set(u.tags) - TAGS
    if unknown:
        problems.append(f"{u.id}: unknown tags {sorted(unknown)}")
    for i, tag in enumerate(u.tags):
        if tag.startswith("I-") and (i == 0 or u.tags[i - 1] == OUTSIDE or u.tags[i - 1][2:] != tag[2:]):
            problems.append(f"{u.id}: {tag} at {i} does not continue a span")
    if sum(1 for t in u.tags if t == "B-CAL") > 1:
        problems.append(f"{u.id}: more than one callsign span")
    return problems


def _cal_tags(n: int) -> list[str]:
    return ["B-CAL"] + ["I-CAL"] * (n - 1)


def remove_callsign(u: TaggedUtterance) -> tuple[TaggedUtterance, int]:
    """Utterance without its callsign, plus the boundary the callsign occupied."""
    span = u.callsign_span()
    if span is None:
        raise InapplicableAction("utterance has no callsign")
    s, e = span
    return TaggedUtterance(u.tokens[:s] + u.tokens[e:], u.tags[:s] + u.tags[e:], u.id), s


def insert_callsign(u: TaggedUtterance, position: int, words: Sequence[str]) -> TaggedUtterance:
    if u.callsign_span() is not None:
        raise InapplicableAction("utterance already has a callsign")
    if position not in u.boundaries():
        raise ValueError(f"{position} is not a span boundary")
    words = tuple(words)
    return TaggedUtterance(u.tokens[:position] + words + u.tokens[position:],
                           u.tags[:position] + tuple(_cal_tags(len(words))) + u.tags[position:], u.id)


@dataclass(frozen=True)
class AugmentAction:
    kind: str
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ACTIONS:
            raise ValueError(f"unknown action {self.kind!r}")


def applicable_actions(u: TaggedUtterance) -> list[str]:
    if u.callsign_span() is None:
        return ["add"]
    rest, position = remove_callsign(u)
    if any(b != position for b in rest.boundaries()):
        return ["delete", "swap", "move"]
    return ["delete", "swap"]


def apply_action(u: TaggedUtterance, action: AugmentAction,
                 pool: Sequence[Union[Expansion, Sequence[str]]] = ()) -> TaggedUtterance:
    rng = random.Random(action.seed)
    kind = action.kind
    if kind not in applicable_actions(u):
        raise InapplicableAction(f"{kind} does not apply to {u.id or 'utterance'}")
    if kind in ("add", "swap") and not pool:
        raise EmptyPool(f"{kind} needs a callsign pool")

    if kind == "add":
        words = _words(rng.choice(pool))
        return insert_callsign(u, rng.choice(u.boundaries()), words)
    rest, position = remove_callsign(u)
    if kind == "delete":
        return rest
    if kind == "swap":
        return insert_callsign(rest, position, _words(rng.choice(pool)))
    # move
    s, e = u.callsign_span()
    choices = [b for b in rest.boundaries() if b != position]
    return insert_callsign(rest, rng.choice(choices), u.tokens[s:e])


def _words(item) -> tuple[str, ...]:
    return item.words if isinstance(item, Expansion) else tuple(item)


def generate_corpus(seed_corpus: Sequence[TaggedUtterance], target: int,
                    pool: Sequence[Union[Expansion, Sequence[str]]], seed: int = 0) -> list[TaggedUtterance]:
    """Originals first, then augmented copies cycling through the seed corpus.

    The action for each copy is drawn uniformly from those applicable to the
    source utterance.  Output depends only on the arguments.
    """
    if not seed_corpus:
        raise AugmentError("empty seed corpus")
    if target < len(seed_corpus):
        raise AugmentError(f"target {target} is smaller than the seed corpus ({len(seed_corpus)})")
    rng = random.Random(seed)
    out = list(seed_corpus)
    i = 0
    while len(out) < target:
        src = seed_corpus[i % len(seed_corpus)]
        kinds = applicable_actions(src)
        if not pool:
            kinds = [k for k in kinds if k not in ("add", "swap")]
        if not kinds:
            raise EmptyPool(f"callsign pool is empty and {src.id} has no callsign")
        kind = rng.choice(kinds)
        new = apply_action(src, AugmentAction(kind, rng.getrandbits(32)), pool)
        out.append(TaggedUtterance(new.tokens, new.tags, f"{src.id}-aug{len(out)}"))
        i += 1
    return out


def read_corpus(path) -> list[TaggedUtterance]:
    """Read ``token<TAB>tag`` lines; blank lines separate utterances, ``# id=`` names them."""
    return parse_corpus(Path(path).read_text(encoding="utf-8"))


def parse_corpus(text: str) -> list[TaggedUtterance]:
    corpus = []
    tokens, tags, uid = [], [], ""

    def flush():
        nonlocal tokens, tags, uid
        if tokens:
            corpus.append(TaggedUtterance(tokens, tags, uid or f"utt{len(corpus)}"))
        tokens, tags, uid = [], [], ""

    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            flush()
        elif line.startswith("#"):
            if line[1:].strip().startswith("id="):
                if tokens:
                    flush()
                uid = line[1:].strip()[3:]
        else:
            fields = line.split("\t")
            if len(fields) != 2 or fields[1] not in TAGS:
                raise AugmentError(f"line {lineno}: expected token<TAB>tag, got {line!r}")
            tokens.append(fields[0])
            tags.append(fields[1])
    flush()
    return corpus


def format_corpus(corpus: Iterable[TaggedUtterance]) -> str:
    blocks = []
    for u in corpus:
        lines = [f"# id={u.id}"] + [f"{t}\t{g}" for t, g in zip(u.tokens, u.tags)]
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def write_corpus(path, corpus: Iterable[TaggedUtterance]) -> None:
    Path(path).write_text(format_corpus(corpus), encoding="utf-8")
