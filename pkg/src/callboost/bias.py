"""Biasing machines built from surveillance data.

A biasing machine is a single hub state with a sigma self-loop plus a prefix
tree of callsign word sequences that leaves and re-enters the hub.  The last arc
of every callsign path carries the discount, so composing a lattice with it
leaves every path in place and lowers the cost of each completed callsign
occurrence by exactly the discount.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CallsignParseError, ConfigurationError
from .grammar import AirlineLexicon, Expansion, expand, parse_icao, shortened_variants
from .wfst import EPS, ONE, SIGMA, SymbolTable, Wfst, WfstBuilder, compose

log = logging.getLogger(__name__)

MAX_UTTERANCE_CALLSIGNS = 1000


@dataclass(frozen=True)
class SurveillanceSnapshot:
    utterance_id: str
    timestamp: float
    callsigns: tuple[str, ...] = ()


@dataclass(frozen=True)
class BoostConfig:
    discount: float = 2.0
    include_shortened: bool = False
    g_discount: float = 1.0

    def __post_init__(self):
        if self.discount < 0 or self.g_discount < 0:
            raise ConfigurationError("discounts must be non-negative")


def read_surveillance(path) -> dict[str, SurveillanceSnapshot]:
    """Read ``utterance_id<TAB>timestamp<TAB>ICAO,ICAO,...`` lines."""
    snapshots = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.rstrip("\n").split("\t")
        if len(fields) == 2:
            fields.append("")
        if len(fields) != 3:
            raise ConfigurationError(f"{path}:{lineno}: expected 3 tab-separated fields")
        uid, ts, codes = fields
        if uid in snapshots:
            raise ConfigurationError(f"{path}:{lineno}: duplicate utterance id {uid!r}")
        calls = tuple(c.strip() for c in codes.split(",") if c.strip())
        snapshots[uid] = SurveillanceSnapshot(uid, float(ts), calls)
    return snapshots


def write_surveillance(path, snapshots: Iterable[SurveillanceSnapshot]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in snapshots:
            f.write(f"{s.utterance_id}\t{s.timestamp:g}\t{','.join(s.callsigns)}\n")


def callsign_expansions(codes: Iterable[str], lex: AirlineLexicon, include_shortened: bool = False,
                        warnings: list | None = None) -> dict[str, list[Expansion]]:
    out: dict[str, list[Expansion]] = {}
    for code in codes:
        if code in out:
            continue
        try:
            full = expand(parse_icao(code), lex)
        except CallsignParseError as exc:
            log.warning("skipping callsign: %s", exc)
            if warnings is not None:
                warnings.append(str(exc))
            continue
        variants = list(full)
        if include_shortened:
            seen = {e.words for e in full}
            for e in full:
                for v in shortened_variants(e):
                    if v.words not in seen:
                        seen.add(v.words)
                        variants.append(v)
        out[code] = variants
    return out


def snapshot_expansions(snapshot: SurveillanceSnapshot, lex: AirlineLexicon, cfg: BoostConfig = BoostConfig(),
                        warnings: list | None = None) -> dict[str, list[Expansion]]:
    """ICAO -> spoken forms for every parseable callsign of the snapshot.

    Order follows the snapshot.  Unparseable codes are logged and appended to
    ``warnings`` instead of failing the utterance.
    """
    return callsign_expansions(snapshot.callsigns, lex, cfg.include_shortened, warnings)


def _hub_machine(sequences: Iterable[Sequence[str]], discount: float, table: SymbolTable) -> Wfst:
    builder = WfstBuilder(symbols=table)
    hub = builder.add_state()
    builder.set_start(hub)
    builder.set_final(hub, ONE)
    builder.add_arc(hub, SIGMA, SIGMA, ONE, hub)
    # prefix tree over all but the last word; the last word returns to the hub
    children: dict[tuple[int, int], int] = {}
    closing: set[tuple[int, int]] = set()
    for words in sequences:
        labels = [table.add(w) for w in words]
        q = hub
        for label in labels[:-1]:
            nxt = children.get((q, label))
            if nxt is None:
                nxt = children[(q, label)] = builder.add_state()
                builder.add_arc(q, label, label, ONE, nxt)
            q = nxt
        if (q, labels[-1]) not in closing:
            closing.add((q, labels[-1]))
            builder.add_arc(q, labels[-1], labels[-1], -discount, hub)
    return builder.build()


def build_biasing_fst(snapshot: SurveillanceSnapshot, lex: AirlineLexicon, cfg: BoostConfig,
                      table: SymbolTable) -> Wfst:
    """Per-utterance biasing machine for the callsigns active on radar."""
    if len(snapshot.callsigns) > MAX_UTTERANCE_CALLSIGNS:
        raise ConfigurationError(
            f"snapshot {snapshot.utterance_id} has {len(snapshot.callsigns)} callsigns;"
            f" per-utterance biasing is limited to {MAX_UTTERANCE_CALLSIGNS}"
        )
    expansions = snapshot_expansions(snapshot, lex, cfg)
    return _hub_machine((e.words for es in expansions.values() for e in es), cfg.discount, table)


def _with_callsign_slots(g: Wfst, sequences: Sequence[Sequence[str]], table: SymbolTable) -> Wfst:
    """Copy of ``g`` where every state can detour through any callsign and come back."""
    builder = WfstBuilder(symbols=table)
    for _ in g.states():
        builder.add_state()
    builder.set_start(g.start)
    for q in g.states():
        for arc in g.arcs(q):
            builder.add_arc(q, arc.ilabel, arc.olabel, arc.weight, arc.nextstate)
        if g.is_final(q):
            builder.set_final(q, g.final(q))
    labelled = [[table.add(w) for w in words] for words in sequences]
    for q in g.states():
        children: dict[tuple[int, int], int] = {}
        closing = set()
        entry = builder.add_state()
        builder.add_arc(q, EPS, EPS, ONE, entry)
        for labels in labelled:
            p = entry
            for label in labels[:-1]:
                nxt = children.get((p, label))
                if nxt is None:
                    nxt = children[(p, label)] = builder.add_state()
                    builder.add_arc(p, label, label, ONE, nxt)
                p = nxt
            if (p, labels[-1]) not in closing:
                closing.add((p, labels[-1]))
                builder.add_arc(p, labels[-1], labels[-1], ONE, q)
    return builder.build()


def extend_grammar(g: Wfst, all_callsigns: Sequence[str], lex: AirlineLexicon, cfg: BoostConfig,
                   table: SymbolTable | None = None) -> Wfst:
    """Grammar that also accepts every listed callsign anywhere in a sentence.

    Each state of ``g`` gets a detour through the callsign word sequences, and
    the result is composed with a hub machine that discounts every completed
    callsign by ``cfg.g_discount``.  Sentences without callsigns keep their
    weights; callsign n-grams ``g`` already had get the discount too.
    """
    if not all_callsigns:
        return g
    table = table or g.symbols
    if table is None:
        raise ConfigurationError("extend_grammar needs a symbol table")
    expansions = callsign_expansions(all_callsigns, lex, cfg.include_shortened)
    sequences = list(dict.fromkeys(e.words for es in expansions.values() for e in es))
    if not sequences or g.is_empty():
        return g
    slotted = _with_callsign_slots(g, sequences, table)
    return compose(slotted, _hub_machine(sequences, cfg.g_discount, table))
