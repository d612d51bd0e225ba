"""Per-utterance lattice rescoring: compose the lattice with a biasing machine."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from .errors import ConfigurationError, ContractViolation
from .flags import NO_HYPOTHESIS, NoResult
from .wfst import EPS, SIGMA, SymbolTable, Wfst, WfstBuilder, compose, shortest_path, trim

SYMBOLS_FILE = "words.txt"


@dataclass
class Utterance:
    id: str
    lattice: Wfst
    reference: Optional[tuple[str, ...]] = None
    reference_icao: Optional[str] = None


def rescore_lattice(u: Union[Utterance, Wfst], bias: Wfst) -> Wfst:
    """``lattice o bias``, trimmed.  The lattice must be acyclic."""
    lattice = u.lattice if isinstance(u, Utterance) else u
    if not lattice.is_acyclic():
        raise ContractViolation("lattice is cyclic")
    return trim(compose(lattice, bias))


def best_hypothesis(lattice: Wfst, table: Optional[SymbolTable] = None) -> Union[list[str], NoResult]:
    """Words of the cheapest path, or ``NO_HYPOTHESIS`` for an empty lattice."""
    table = table or lattice.symbols
    if table is None:
        raise ConfigurationError("best_hypothesis needs a symbol table")
    best = shortest_path(lattice, 1)
    if not best:
        return NO_HYPOTHESIS
    labels, _ = best[0]
    return [table.word(x) for x in labels if x not in (EPS, SIGMA)]


def best_weight(lattice: Wfst) -> float:
    best = shortest_path(lattice, 1)
    return best[0][1] if best else float("inf")


def read_lattice_archive(directory) -> tuple[SymbolTable, dict[str, Wfst]]:
    """Load ``<utterance_id>.fst`` files sharing one ``words.txt`` symbol table."""
    directory = Path(directory)
    table_path = directory / SYMBOLS_FILE
    if not table_path.exists():
        raise ConfigurationError(f"{directory} has no {SYMBOLS_FILE}")
    table = SymbolTable.from_text(table_path.read_text(encoding="utf-8"))
    lattices = {}
    for path in sorted(directory.glob("*.fst")):
        lattices[path.stem] = Wfst.from_text(path.read_text(encoding="utf-8"), table)
    return table, lattices


def write_lattice_archive(directory, table: SymbolTable, lattices: dict[str, Wfst]) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / SYMBOLS_FILE).write_text(table.to_text(), encoding="utf-8")
    for uid, lattice in lattices.items():
        (directory / f"{uid}.fst").write_text(lattice.to_text(table), encoding="utf-8")


def lattice_from_paths(paths: Sequence[tuple[Sequence[str], float]], table: SymbolTable) -> Wfst:
    """Acyclic lattice with one branch per ``(words, cost)`` hypothesis.

    Convenience for tests and hand-made examples; the cost sits on the first arc.
    """
    builder = WfstBuilder(symbols=table)
    start = builder.add_state()
    builder.set_start(start)
    end = builder.add_state()
    builder.set_final(end)
    for words, cost in paths:
        if not words:
            raise ValueError("hypothesis must have at least one word")
        q = start
        for i, w in enumerate(words):
            nxt = end if i == len(words) - 1 else builder.add_state()
            builder.add_arc(q, table.add(w), table.add(w), cost if i == 0 else 0.0, nxt)
            q = nxt
    return trim(builder.build())
