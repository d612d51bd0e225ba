"""Weighted finite-state transducers over the tropical semiring.

Only what callsign biasing needs: construction, epsilon-aware composition with a
sigma (wildcard) label, trimming, union and n-best extraction on acyclic
machines.  Machines are immutable once built; use :class:`WfstBuilder` to make
new ones.

Label ids: ``0`` is epsilon, ``1`` is sigma.  A sigma arc on the *input* side of
the right-hand operand of :func:`compose` matches any non-epsilon output label of
the left-hand operand.
"""

from __future__ import annotations

import heapq
import math
import threading
from collections import deque
from typing import Iterable, NamedTuple, Optional, Sequence

from .errors import ConfigurationError, ContractViolation

EPS = 0
SIGMA = 1
EPS_SYMBOL = "<eps>"
SIGMA_SYMBOL = "<sigma>"

# Tropical semiring (min, +)
ZERO = math.inf
ONE = 0.0


def plus(a: float, b: float) -> float:
    return a if a <= b else b


def times(a: float, b: float) -> float:
    if a == ZERO or b == ZERO:
        return ZERO
    return a + b


class SymbolTable:
    """Bijective word <-> label id mapping with reserved ``<eps>`` and ``<sigma>``.

    Insertion is serialized by a lock so one table can be shared between
    threads building machines for different utterances.
    """

    def __init__(self, words: Iterable[str] = ()):
        self._ids = {EPS_SYMBOL: EPS, SIGMA_SYMBOL: SIGMA}
        self._words = [EPS_SYMBOL, SIGMA_SYMBOL]
        self._lock = threading.Lock()
        for w in words:
            self.add(w)

    def add(self, word: str) -> int:
        """Return the id of ``word``, inserting it if needed."""
        label = self._ids.get(word)
        if label is not None:
            return label
        if not word or any(c.isspace() for c in word):
            raise ValueError(f"invalid symbol {word!r}")
        with self._lock:
            label = self._ids.get(word)
            if label is None:
                label = len(self._words)
                self._words.append(word)
                self._ids[word] = label
        return label

    def find(self, word: str) -> int:
        return self._ids[word]

    def get(self, word: str, default=None):
        return self._ids.get(word, default)

    def word(self, label: int) -> str:
        return self._words[label]

    def __contains__(self, word) -> bool:
        return word in self._ids

    def __len__(self) -> int:
        return len(self._words)

    def __iter__(self):
        return iter(enumerate(self._words))

    def compatible_with(self, other: "SymbolTable") -> bool:
        """True if no word or id is mapped differently by the two tables."""
        if other is self:
            return True
        n = min(len(self._words), len(other._words))
        if self._words[:n] != other._words[:n]:
            return False
        longer = self if len(self._words) > n else other
        shorter = other if longer is self else self
        return not any(w in shorter._ids for w in longer._words[n:])

    def to_text(self) -> str:
        return "".join(f"{w}\t{i}\n" for i, w in enumerate(self._words))

    @classmethod
    def from_text(cls, text: str) -> "SymbolTable":
        pairs = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 2:
                raise ConfigurationError(f"symbol table line {lineno}: expected 'word id'")
            pairs.append((fields[0], int(fields[1])))
        mapping = dict(pairs)
        if mapping.get(EPS_SYMBOL) != EPS or mapping.get(SIGMA_SYMBOL) != SIGMA:
            raise ConfigurationError("symbol table must map <eps> to 0 and <sigma> to 1")
        ids = sorted(mapping.values())
        if ids != list(range(len(ids))) or len(mapping) != len(pairs):
            raise ConfigurationError("symbol table ids must be unique and contiguous from 0")
        table = cls()
        for word, _ in sorted(pairs, key=lambda p: p[1])[2:]:
            table.add(word)
        return table

    def __getstate__(self):
        return self._words

    def __setstate__(self, words):
        self._words = list(words)
        self._ids = {w: i for i, w in enumerate(self._words)}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"SymbolTable({len(self)} symbols)"


class Arc(NamedTuple):
    ilabel: int
    olabel: int
    weight: float
    nextstate: int


class Wfst:
    """Immutable weighted transducer.

    ``start`` is ``-1`` for the empty machine.  ``finals`` maps final states to
    their final weight.
    """

    __slots__ = ("_arcs", "_finals", "_start", "symbols")

    def __init__(self, arcs, finals, start, symbols=None):
        self._arcs = tuple(tuple(a) for a in arcs)
        self._finals = dict(finals)
        self._start = start if self._arcs else -1
        self.symbols = symbols
        n = len(self._arcs)
        if self._arcs and not 0 <= self._start < n:
            raise ContractViolation(f"start state {start} out of range")
        for q, state_arcs in enumerate(self._arcs):
            for arc in state_arcs:
                if not 0 <= arc.nextstate < n:
                    raise ContractViolation(f"arc from {q} to invalid state {arc.nextstate}")
        for q in self._finals:
            if not 0 <= q < n:
                raise ContractViolation(f"final state {q} out of range")

    @classmethod
    def empty(cls, symbols=None) -> "Wfst":
        return cls((), {}, -1, symbols)

    @property
    def start(self) -> int:
        return self._start

    @property
    def num_states(self) -> int:
        return len(self._arcs)

    @property
    def num_arcs(self) -> int:
        return sum(len(a) for a in self._arcs)

    def states(self) -> range:
        return range(len(self._arcs))

    def arcs(self, state: int) -> tuple:
        return self._arcs[state]

    def final(self, state: int) -> float:
        return self._finals.get(state, ZERO)

    def is_final(self, state: int) -> bool:
        return state in self._finals

    @property
    def finals(self) -> dict:
        return dict(self._finals)

    def is_empty(self) -> bool:
        return not self._arcs

    def topological_order(self) -> Optional[list]:
        """Topological order of all states, or None if the machine has a cycle."""
        indeg = [0] * self.num_states
        for state_arcs in self._arcs:
            for arc in state_arcs:
                indeg[arc.nextstate] += 1
        queue = deque(q for q in self.states() if indeg[q] == 0)
        order = []
        while queue:
            q = queue.popleft()
            order.append(q)
            for arc in self._arcs[q]:
                indeg[arc.nextstate] -= 1
                if indeg[arc.nextstate] == 0:
                    queue.append(arc.nextstate)
        return order if len(order) == self.num_states else None

    def is_acyclic(self) -> bool:
        return self.topological_order() is not None

    def __repr__(self):
        return f"<Wfst {self.num_states} states, {self.num_arcs} arcs>"

    # text format ----------------------------------------------------------

    def to_text(self, table: Optional[SymbolTable] = None) -> str:
        """Serialize in the tab-separated text format.

        Arc lines come first with the start state's arcs leading, so the first
        line's source state is the start state.  With ``table`` labels are written
        as words, otherwise as integer ids.
        """
        if self.is_empty():
            return ""
        label = table.word if table is not None else str
        lines = []
        order = [self._start] + [q for q in self.states() if q != self._start]
        for q in order:
            for arc in self._arcs[q]:
                lines.append(
                    f"{q}\t{arc.nextstate}\t{label(arc.ilabel)}\t{label(arc.olabel)}\t{_fmt(arc.weight)}"
                )
        if not self._arcs[self._start]:
            # no arcs out of start: a final line must come first to mark it
            lines.insert(0, f"{self._start}\t{_fmt(self.final(self._start))}")
            finals = [q for q in sorted(self._finals) if q != self._start]
        else:
            finals = sorted(self._finals)
        lines.extend(f"{q}\t{_fmt(self._finals[q])}" for q in finals)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, table: Optional[SymbolTable] = None) -> "Wfst":
        """Parse the text format.  Labels are looked up in ``table`` when given.

        A final line without a weight means weight one (0.0).  Unknown words are
        a configuration error rather than being inserted silently.
        """
        builder = WfstBuilder(symbols=table)
        start = None

        def ensure(q):
            while builder.num_states <= q:
                builder.add_state()

        def lab(tok, lineno):
            if table is None:
                return int(tok)
            try:
                return table.find(tok)
            except KeyError:
                raise ConfigurationError(f"line {lineno}: symbol {tok!r} not in table") from None

        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            fields = line.split("\t") if "\t" in line else line.split()
            if len(fields) in (4, 5):
                src, dst = int(fields[0]), int(fields[1])
                w = float(fields[4]) if len(fields) == 5 else ONE
                ensure(max(src, dst))
                if start is None:
                    start = src
                builder.add_arc(src, lab(fields[2], lineno), lab(fields[3], lineno), w, dst)
            elif len(fields) in (1, 2):
                q = int(fields[0])
                ensure(q)
                if start is None:
                    start = q
                builder.set_final(q, float(fields[1]) if len(fields) == 2 else ONE)
            else:
                raise ConfigurationError(f"line {lineno}: expected 1, 2, 4 or 5 fields")
        if start is None:
            return cls.empty(table)
        builder.set_start(start)
        return builder.build()


def _fmt(w: float) -> str:
    if w == ZERO:
        return "Infinity"
    short = "%#.6g" % w
    return short if float(short) == w else repr(float(w))


class WfstBuilder:
    """Mutable scratch space for building a :class:`Wfst`; not thread-safe."""

    def __init__(self, symbols: Optional[SymbolTable] = None):
        self._arcs: list[list[Arc]] = []
        self._finals: dict[int, float] = {}
        self._start = -1
        self.symbols = symbols

    @property
    def num_states(self) -> int:
        return len(self._arcs)

    def add_state(self) -> int:
        self._arcs.append([])
        return len(self._arcs) - 1

    def set_start(self, state: int) -> None:
        self._start = state

    def set_final(self, state: int, weight: float = ONE) -> None:
        if weight == ZERO:
            self._finals.pop(state, None)
        else:
            self._finals[state] = weight

    def add_arc(self, src: int, ilabel: int, olabel: int, weight: float, nextstate: int) -> None:
        self._arcs[src].append(Arc(ilabel, olabel, float(weight), nextstate))

    def build(self) -> Wfst:
        return Wfst(self._arcs, self._finals, self._start, self.symbols)


def _shared_symbols(machines: Sequence[Wfst]) -> Optional[SymbolTable]:
    table = None
    for m in machines:
        if m.symbols is None:
            continue
        if table is None:
            table = m.symbols
        elif not table.compatible_with(m.symbols):
            raise ConfigurationError("machines use incompatible symbol tables")
    return table


def compose(a: Wfst, b: Wfst) -> Wfst:
    """Compose ``a`` with ``b`` (``a``'s outputs matched against ``b``'s inputs).

    Epsilons are handled with a matching filter so each pair of successful
    paths yields exactly one composed path.  The filter state is ``0`` after a
    synchronized move, ``1`` after ``a`` moved alone on an output epsilon and
    ``2`` after ``b`` moved alone on an input epsilon.
    """
    table = _shared_symbols((a, b))
    if a.is_empty() or b.is_empty():
        return Wfst.empty(table)

    b_index: dict[int, tuple[dict, list, list]] = {}

    def index(qb):
        entry = b_index.get(qb)
        if entry is None:
            by_label: dict[int, list[Arc]] = {}
            eps_arcs, sigma_arcs = [], []
            for arc in b.arcs(qb):
                if arc.ilabel == EPS:
                    eps_arcs.append(arc)
                else:
                    by_label.setdefault(arc.ilabel, []).append(arc)
                    if arc.ilabel == SIGMA:
                        sigma_arcs.append(arc)
            entry = b_index[qb] = (by_label, eps_arcs, sigma_arcs)
        return entry

    builder = WfstBuilder(symbols=table)
    ids: dict[tuple[int, int, int], int] = {}
    queue: deque = deque()

    def state_id(triple):
        q = ids.get(triple)
        if q is None:
            q = ids[triple] = builder.add_state()
            queue.append(triple)
        return q

    builder.set_start(state_id((a.start, b.start, 0)))
    while queue:
        triple = queue.popleft()
        qa, qb, f = triple
        src = ids[triple]
        if a.is_final(qa) and b.is_final(qb):
            builder.set_final(src, times(a.final(qa), b.final(qb)))
        by_label, b_eps, b_sigma = index(qb)
        for arc_a in a.arcs(qa):
            x = arc_a.olabel
            if x == EPS:
                if f != 2:
                    builder.add_arc(src, arc_a.ilabel, EPS, arc_a.weight,
                                    state_id((arc_a.nextstate, qb, 1)))
                if f == 0:
                    for arc_b in b_eps:
                        builder.add_arc(src, arc_a.ilabel, arc_b.olabel,
                                        times(arc_a.weight, arc_b.weight),
                                        state_id((arc_a.nextstate, arc_b.nextstate, 0)))
                continue
            matches = by_label.get(x, ())
            if x != SIGMA and b_sigma:
                matches = list(matches) + b_sigma
            for arc_b in matches:
                olabel = x if arc_b.olabel == SIGMA and arc_b.ilabel == SIGMA else arc_b.olabel
                builder.add_arc(src, arc_a.ilabel, olabel, times(arc_a.weight, arc_b.weight),
                                state_id((arc_a.nextstate, arc_b.nextstate, 0)))
        if f != 1:
            for arc_b in b_eps:
                builder.add_arc(src, EPS, arc_b.olabel, arc_b.weight,
                                state_id((qa, arc_b.nextstate, 2)))
    return trim(builder.build())


def trim(f: Wfst) -> Wfst:
    """Drop states that are not both reachable from start and able to reach a final state."""
    if f.is_empty():
        return f
    n = f.num_states
    reach = [False] * n
    reach[f.start] = True
    stack = [f.start]
    reverse: list[list[int]] = [[] for _ in range(n)]
    while stack:
        q = stack.pop()
        for arc in f.arcs(q):
            reverse[arc.nextstate].append(q)
            if not reach[arc.nextstate]:
                reach[arc.nextstate] = True
                stack.append(arc.nextstate)
    coreach = [False] * n
    stack = [q for q in f.finals if reach[q]]
    for q in stack:
        coreach[q] = True
    while stack:
        q = stack.pop()
        for p in reverse[q]:
            if not coreach[p]:
                coreach[p] = True
                stack.append(p)
    keep = [q for q in range(n) if reach[q] and coreach[q]]
    if not keep or not coreach[f.start]:
        return Wfst.empty(f.symbols)
    if len(keep) == n:
        return f
    remap = {q: i for i, q in enumerate(keep)}
    arcs = [
        [arc._replace(nextstate=remap[arc.nextstate]) for arc in f.arcs(q) if arc.nextstate in remap]
        for q in keep
    ]
    finals = {remap[q]: w for q, w in f.finals.items() if q in remap}
    return Wfst(arcs, finals, remap[f.start], f.symbols)


def union(machines: Sequence[Wfst]) -> Wfst:
    """Machine accepting the union of the inputs' path sets, weights preserved.

    A fresh start state is joined to each non-empty input by an epsilon arc.
    """
    table = _shared_symbols(machines)
    parts = [m for m in machines if not m.is_empty()]
    if not parts:
        return Wfst.empty(table)
    builder = WfstBuilder(symbols=table)
    start = builder.add_state()
    builder.set_start(start)
    for m in parts:
        offset = builder.num_states
        for _ in m.states():
            builder.add_state()
        for q in m.states():
            for arc in m.arcs(q):
                builder.add_arc(q + offset, arc.ilabel, arc.olabel, arc.weight, arc.nextstate + offset)
        for q, w in m.finals.items():
            builder.set_final(q + offset, w)
        builder.add_arc(start, EPS, EPS, ONE, m.start + offset)
    return builder.build()


def linear_acceptor(words: Sequence[str], weight: float, table: SymbolTable) -> Wfst:
    """Single-path acceptor for ``words`` with the whole weight on the last arc."""
    builder = WfstBuilder(symbols=table)
    q = builder.add_state()
    builder.set_start(q)
    for i, word in enumerate(words):
        label = table.add(word)
        nxt = builder.add_state()
        builder.add_arc(q, label, label, weight if i == len(words) - 1 else ONE, nxt)
        q = nxt
    builder.set_final(q, weight if not words else ONE)
    return builder.build()


def sigma_acceptor(table: Optional[SymbolTable] = None, weight: float = ONE) -> Wfst:
    """One-state machine with a sigma self-loop; the identity under composition."""
    builder = WfstBuilder(symbols=table)
    q = builder.add_state()
    builder.set_start(q)
    builder.set_final(q)
    builder.add_arc(q, SIGMA, SIGMA, weight, q)
    return builder.build()


def shortest_path(f: Wfst, n: int = 1) -> list[tuple[tuple[int, ...], float]]:
    """Up to ``n`` best paths of an acyclic machine as ``(labels, weight)`` pairs.

    ``labels`` are the non-epsilon output labels along the path.  Results are
    sorted by weight, ties by label sequence.  Search is A* with the exact
    distance-to-final as heuristic, so complete paths pop in weight order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if f.is_empty():
        return []
    order = f.topological_order()
    if order is None:
        raise ContractViolation("shortest_path requires an acyclic machine")
    to_final = [ZERO] * f.num_states
    for q in reversed(order):
        best = f.final(q)
        for arc in f.arcs(q):
            best = plus(best, times(arc.weight, to_final[arc.nextstate]))
        to_final[q] = best
    if to_final[f.start] == ZERO:
        return []

    tol = 1e-9
    heap = [(to_final[f.start], (), 0, ONE, f.start, False)]
    counter = 1
    results = []
    while heap:
        if len(results) >= n and heap[0][0] > results[n - 1][1] + tol * (1 + abs(results[n - 1][1])):
            break
        est, labels, _, g, q, done = heapq.heappop(heap)
        if done:
            results.append((labels, g))
            results.sort(key=lambda r: (r[1], r[0]))
            continue
        if f.is_final(q):
            w = times(g, f.final(q))
            heapq.heappush(heap, (w, labels, counter, w, q, True))
            counter += 1
        for arc in f.arcs(q):
            rest = to_final[arc.nextstate]
            if rest == ZERO:
                continue
            g2 = times(g, arc.weight)
            lab2 = labels + (arc.olabel,) if arc.olabel != EPS else labels
            heapq.heappush(heap, (g2 + rest, lab2, counter, g2, arc.nextstate, False))
            counter += 1
    return results[:n]
