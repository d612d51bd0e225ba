"""Synthetic ATC test sets with lattices, surveillance snapshots and references.

Each utterance is a short controller instruction addressed to a callsign.  The
lattice holds the reference wording plus confusable competitors for the
callsign (another airline's name, one flight-number word swapped).  With
probability ``noise_rate`` a competitor is made cheaper than the reference, so
the reference callsign sits off the 1-best but inside the lattice.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..bias import SurveillanceSnapshot, write_surveillance
from ..grammar import DIGIT_WORDS, NATO_WORDS, AirlineLexicon, expand, parse_icao, shortened_variants
from ..rescore import write_lattice_archive
from ..wfst import SymbolTable, Wfst, WfstBuilder
from .data import Reference, write_references

GREETINGS = ((), ("good", "morning"), ("hello",), ("servus",))
COMMANDS = (
    ("descend", "flight", "level", "{3}"),
    ("climb", "flight", "level", "{3}"),
    ("turn", "left", "heading", "{3}"),
    ("turn", "right", "heading", "{3}"),
    ("reduce", "speed", "{3}", "knots"),
    ("squawk", "{4}"),
    ("contact", "tower", "one", "one", "eight", "decimal", "{1}"),
    ("cleared", "ils", "approach", "runway", "{2}"),
)
_LETTERS = "ABCDEFGHJKLMNPRSTUVWXYZ"  # I and O avoided in flight numbers


@dataclass
class SynthConfig:
    n_utterances: int = 1000
    noise_rate: float = 0.4
    no_callsign_rate: float = 0.05
    shortened_rate: float = 0.15
    distractors: Optional[int] = None  # None: uniform in distractor_range per utterance
    distractor_range: tuple[int, int] = (5, 50)
    competitors: int = 2
    reference_rank: int = 2  # rank of the reference path in a noisy lattice
    max_gap: float = 1.5  # competitor-vs-reference cost gap stays below the default discount
    readback_rate: float = 0.2
    seed: int = 0


@dataclass
class SynthSet:
    table: SymbolTable
    lattices: dict[str, Wfst]
    snapshots: dict[str, SurveillanceSnapshot]
    references: dict[str, Reference]
    lexicon: AirlineLexicon
    noisy: set = field(default_factory=set)

    def inputs(self):
        """In-memory pipeline inputs, equivalent to writing and reloading the set."""
        from .pipeline import Inputs

        return Inputs(self.lexicon, dict(self.references), dict(self.snapshots), self.table, dict(self.lattices))

    def write(self, directory) -> dict[str, Path]:
        """Write the set as lattice archive, surveillance and reference files plus a run config."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {
            "lattices": directory / "lattices",
            "surveillance": directory / "surveillance.tsv",
            "references": directory / "references.tsv",
            "lexicon": directory / "lexicon.tsv",
        }
        write_lattice_archive(paths["lattices"], self.table, self.lattices)
        write_surveillance(paths["surveillance"], self.snapshots.values())
        write_references(paths["references"], self.references)
        paths["lexicon"].write_text(self.lexicon.to_text(), encoding="utf-8")
        conf = directory / "run.conf"
        conf.write_text("".join(f"{k} = {v.name}\n" for k, v in paths.items()), encoding="utf-8")
        paths["config"] = conf
        return paths


def _digits(rng: random.Random, n: int) -> list[str]:
    return [DIGIT_WORDS[str(rng.randrange(10))] for _ in range(n)]


def random_callsign(rng: random.Random, designators: list[str]) -> str:
    designator = rng.choice(designators)
    n_digits = rng.choice((1, 2, 3, 3, 4))
    number = str(rng.randrange(1, 10)) + "".join(str(rng.randrange(10)) for _ in range(n_digits - 1))
    n_letters = rng.choice((0, 0, 1, 2)) if n_digits < 4 else 0
    if n_digits + n_letters < 2:
        n_letters = 1
    return designator + number + "".join(rng.choice(_LETTERS) for _ in range(n_letters))


def _command(rng: random.Random) -> list[str]:
    out = []
    for tok in rng.choice(COMMANDS):
        if tok.startswith("{"):
            out.extend(_digits(rng, int(tok[1:-1])))
        else:
            out.append(tok)
    return out


def _swap_one(rng: random.Random, words: tuple[str, ...], start: int) -> tuple[str, ...]:
    i = rng.randrange(start, len(words))
    pool = DIGIT_WORDS.values() if words[i] in DIGIT_WORDS.values() else NATO_WORDS.values()
    if i == start:
        pool = DIGIT_WORDS.values()
    choice = rng.choice(sorted(set(pool) - {words[i]}))
    return words[:i] + (choice,) + words[i + 1:]


def _lattice(prefix, branches, suffix, table, rng) -> Wfst:
    """Chain for ``prefix``, one branch per ``(words, cost)``, chain for ``suffix``."""
    builder = WfstBuilder(symbols=table)
    q = builder.add_state()
    builder.set_start(q)

    def chain(q, words):
        for w in words:
            nxt = builder.add_state()
            label = table.add(w)
            builder.add_arc(q, label, label, round(rng.uniform(0.05, 0.3), 4), nxt)
            q = nxt
        return q

    q = chain(q, prefix)
    join = builder.add_state()
    for words, cost in branches:
        p = q
        for i, w in enumerate(words):
            nxt = join if i == len(words) - 1 else builder.add_state()
            label = table.add(w)
            builder.add_arc(p, label, label, cost if i == 0 else 0.0, nxt)
            p = nxt
    end = chain(join, suffix)
    builder.set_final(end)
    return builder.build()


def synth_testset(cfg: SynthConfig = SynthConfig(), lexicon: Optional[AirlineLexicon] = None) -> SynthSet:
    if cfg.n_utterances < 1:
        raise ValueError("need at least one utterance")
    lex = lexicon or AirlineLexicon.default()
    designators = lex.designators()
    rng = random.Random(cfg.seed)
    table = SymbolTable()
    out = SynthSet(table, {}, {}, {}, lex)
    width = len(str(cfg.n_utterances))

    for n in range(cfg.n_utterances):
        uid = f"utt{n:0{width}d}"
        has_callsign = rng.random() >= cfg.no_callsign_rate
        noisy = rng.random() < cfg.noise_rate
        greeting = rng.choice(GREETINGS)
        command = _command(rng)
        readback = rng.random() < cfg.readback_rate

        icao = random_callsign(rng, designators) if has_callsign else None
        taken = {icao} if icao else set()
        competitors_icao = set()
        if has_callsign:
            full = rng.choice(expand(parse_icao(icao), lex))
            spoken = full.words
            name_len = len(full.name_words)
            short = shortened_variants(full)
            if short and rng.random() < cfg.shortened_rate and any(w in NATO_WORDS.values() for w in short[0].words):
                spoken = short[0].words
                name_len = 0
            suffix = spoken[name_len:]
            alternatives = []
            tries = 0
            while len(alternatives) < cfg.competitors and tries < 20:
                tries += 1
                if len(alternatives) % 2 == 0:
                    other = rng.choice([d for d in designators if d != parse_icao(icao).designator])
                    alt = tuple(rng.choice(lex.names(other)).split()) + tuple(suffix)
                    alt_icao = other + parse_icao(icao).suffix
                else:
                    alt = _swap_one(rng, spoken, name_len)
                    alt_icao = None
                if alt != spoken and alt not in alternatives:
                    alternatives.append(alt)
                    if alt_icao:
                        competitors_icao.add(alt_icao)
            region = spoken
        else:
            # no callsign: the confusable region is the command value
            digits = [i for i, w in enumerate(command) if w in DIGIT_WORDS.values()]
            i = digits[-1]
            region = (command[i],)
            alternatives = [(rng.choice(sorted(set(DIGIT_WORDS.values()) - {command[i]})),)]
            greeting_part, command_tail = tuple(greeting) + tuple(command[:i]), tuple(command[i + 1:])

        # noisy: the cheapest competitors undercut the reference by less than max_gap
        m = len(alternatives)
        below = min(cfg.reference_rank - 1, m) if noisy and has_callsign else 0
        ref_cost = round(rng.uniform(0.2, cfg.max_gap), 4) if below else 0.0
        alt_costs = []
        for j in range(m):
            if j == 0 and below:
                alt_costs.append(0.0)
            elif j < below:
                alt_costs.append(round(rng.uniform(0.0, ref_cost * 0.9), 4))
            else:
                alt_costs.append(round(ref_cost + rng.uniform(0.2, cfg.max_gap), 4))
        if below:
            out.noisy.add(uid)
        branches = [(region, ref_cost)] + list(zip(alternatives, alt_costs))
        rng.shuffle(branches)

        if has_callsign:
            if readback:
                prefix, suffix_words, words = tuple(command), (), tuple(command) + spoken
            else:
                prefix, suffix_words = tuple(greeting), tuple(command)
                words = prefix + spoken + suffix_words
        else:
            prefix, suffix_words = greeting_part, command_tail
            words = prefix + region + suffix_words
        out.lattices[uid] = _lattice(prefix, branches, suffix_words, table, rng)

        k = cfg.distractors if cfg.distractors is not None else rng.randint(*cfg.distractor_range)
        distractors = []
        while len(distractors) < k:
            c = random_callsign(rng, designators)
            if c not in taken and c not in competitors_icao:
                taken.add(c)
                distractors.append(c)
        active = ([icao] if icao else []) + distractors
        rng.shuffle(active)
        out.snapshots[uid] = SurveillanceSnapshot(uid, 1_600_000_000.0 + 10.0 * n, tuple(active))
        out.references[uid] = Reference(icao, tuple(words))
    return out
