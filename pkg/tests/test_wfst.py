import math
import pickle
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from callboost.errors import ConfigurationError, ContractViolation
from callboost.wfst import (EPS, ONE, SIGMA, ZERO, SymbolTable, Wfst, WfstBuilder, compose, linear_acceptor, plus,
                            shortest_path, sigma_acceptor, times, trim, union)

from oracles import (best_by_string, cross_compose, enumerate_paths, machine_triples, random_machine,
                     same_weighted_multiset)


def build(parts, symbols=None):
    arcs, finals, start = parts
    n = 1 + max([start] + [max(s, d) for s, _, _, _, d in arcs] + list(finals))
    b = WfstBuilder(symbols)
    for _ in range(n):
        b.add_state()
    b.set_start(start)
    for s, il, ol, w, d in arcs:
        b.add_arc(s, il, ol, w, d)
    for q, w in finals.items():
        b.set_final(q, w)
    return b.build()


def test_semiring():
    assert plus(1.0, 2.0) == 1.0
    assert times(1.0, 2.0) == 3.0
    assert plus(ZERO, 4.0) == 4.0
    assert times(ONE, 4.0) == 4.0
    assert times(ZERO, 4.0) == ZERO


def test_symbol_table_reserves_eps_and_sigma():
    t = SymbolTable()
    assert t.find("<eps>") == EPS
    assert t.find("<sigma>") == SIGMA
    a = t.add("hello")
    assert t.add("hello") == a
    assert t.word(a) == "hello"
    assert t.get("missing") is None
    with pytest.raises(KeyError):
        t.find("missing")


def test_symbol_table_text_roundtrip_and_pickle():
    t = SymbolTable()
    for w in ["swiss", "two", "six"]:
        t.add(w)
    back = SymbolTable.from_text(t.to_text())
    assert back.to_text() == t.to_text()
    assert back.compatible_with(t)
    clone = pickle.loads(pickle.dumps(t))
    assert clone.find("six") == t.find("six")
    clone.add("new")


def test_symbol_table_rejects_wrong_reserved_ids():
    with pytest.raises(ConfigurationError):
        SymbolTable.from_text("<sigma>\t0\n<eps>\t1\n")


def test_incompatible_tables_refuse_to_compose():
    t1, t2 = SymbolTable(), SymbolTable()
    t1.add("a")
    t2.add("b")
    with pytest.raises(ConfigurationError):
        compose(linear_acceptor(["a"], 0.0, t1), linear_acceptor(["b"], 0.0, t2))


def test_hand_composition_with_sigma_and_epsilons():
    t = SymbolTable()
    x, y, z = (t.add(w) for w in "xyz")
    # a: x:y then x:eps
    a = build(([(0, x, y, 1.0, 1), (1, x, EPS, 0.5, 2)], {2: 0.0}, 0), t)
    # b: sigma:sigma loop plus y:z with a bonus
    b = build(([(0, SIGMA, SIGMA, 0.0, 0), (0, y, z, -2.0, 0)], {0: 0.0}, 0), t)
    assert shortest_path(compose(a, b), 3) == [((z,), -0.5), ((y,), 1.5)]


def test_compose_with_empty_is_empty():
    t = SymbolTable()
    a = linear_acceptor(["a"], 1.0, t)
    assert compose(a, Wfst.empty(t)).is_empty()
    assert compose(Wfst.empty(t), a).is_empty()


def test_linear_acceptor_weight_on_last_arc():
    t = SymbolTable()
    f = linear_acceptor(["a", "b"], 1.5, t)
    assert [a.weight for q in f.states() for a in f.arcs(q)] == [0.0, 1.5]
    empty_seq = linear_acceptor([], 1.5, t)
    assert shortest_path(empty_seq) == [((), 1.5)]


def test_union_keeps_all_paths():
    t = SymbolTable()
    u = union([linear_acceptor(["a"], 1.0, t), linear_acceptor(["b", "c"], 0.5, t), Wfst.empty(t)])
    assert best_by_string(u, t) == {"a": 1.0, "b c": 0.5}


def test_trim_drops_dead_states():
    f = build(([(0, 2, 2, 1.0, 1), (0, 3, 3, 1.0, 2), (3, 2, 2, 0.0, 1)], {1: 0.0}, 0))
    g = trim(f)
    assert g.num_states == 2
    assert machine_triples(g) == machine_triples(f)
    assert trim(build(([(0, 2, 2, 1.0, 1)], {}, 0))).is_empty()


def test_shortest_path_rejects_cycles():
    f = build(([(0, 2, 2, 1.0, 0)], {0: 0.0}, 0))
    assert not f.is_acyclic()
    with pytest.raises(ContractViolation):
        shortest_path(f)
    with pytest.raises(ValueError):
        shortest_path(linear_acceptor(["a"], 0.0, SymbolTable()), 0)


def test_shortest_path_ties_by_labels():
    f = build(([(0, 3, 3, 1.0, 1), (0, 2, 2, 1.0, 1)], {1: 0.0}, 0))
    assert shortest_path(f, 2) == [((2,), 1.0), ((3,), 1.0)]


def test_shortest_path_negative_weights():
    f = build(([(0, 2, 2, 3.0, 1), (0, 3, 3, 0.0, 2), (2, 4, 4, -5.0, 1)], {1: 0.0}, 0))
    assert shortest_path(f, 5) == [((3, 4), -5.0), ((2,), 3.0)]


def test_text_format_roundtrip():
    t = SymbolTable()
    f = union([linear_acceptor(["swiss", "two"], 0.1, t), linear_acceptor(["hansa"], 1 / 3, t)])
    text = f.to_text(t)
    g = Wfst.from_text(text, t)
    assert g.to_text(t) == text
    assert best_by_string(g, t) == best_by_string(f, t)


def test_text_format_unknown_word():
    t = SymbolTable()
    with pytest.raises(ConfigurationError):
        Wfst.from_text("0\t1\tnope\tnope\t0.5\n1\n", t)


def test_text_format_numeric_labels_without_table():
    f = Wfst.from_text("0\t1\t2\t3\t0.5\n1\t0.25\n")
    assert shortest_path(f) == [((3,), 0.75)]


def test_sigma_acceptor_is_identity():
    t = SymbolTable()
    lat = union([linear_acceptor(["a", "b"], 0.7, t), linear_acceptor(["c"], 0.2, t)])
    assert best_by_string(compose(lat, sigma_acceptor(t)), t) == best_by_string(lat, t)


machine_seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=150, deadline=None)
@given(machine_seeds)
def test_compose_matches_path_pairing(seed):
    rng = random.Random(seed)
    a = build(random_machine(rng, rng.randint(1, 5), [2, 3, 4]))
    b = build(random_machine(rng, rng.randint(1, 5), [2, 3, 4], sigma_input=True))
    want = cross_compose(enumerate_paths(a), enumerate_paths(b))
    assert same_weighted_multiset(machine_triples(compose(a, b)), want)


@settings(max_examples=100, deadline=None)
@given(machine_seeds)
def test_compose_is_associative_on_paths(seed):
    rng = random.Random(seed)
    a, b, c = (build(random_machine(rng, rng.randint(1, 4), [2, 3], max_arcs=6)) for _ in range(3))
    left = compose(compose(a, b), c)
    right = compose(a, compose(b, c))
    assert same_weighted_multiset(machine_triples(left), machine_triples(right))


@settings(max_examples=100, deadline=None)
@given(machine_seeds, st.integers(min_value=1, max_value=6))
def test_shortest_path_nbest_is_sorted_prefix(seed, n):
    rng = random.Random(seed)
    f = build(random_machine(rng, rng.randint(1, 6), [2, 3, 4]))
    got = shortest_path(f, n)
    weights = sorted(w for _, w in enumerate_paths(f))
    assert len(got) == min(n, len(weights))
    for (labels, w), want in zip(got, weights):
        assert math.isclose(w, want, abs_tol=1e-9)
    assert got == sorted(got, key=lambda r: (r[1], r[0]))


@settings(max_examples=100, deadline=None)
@given(machine_seeds)
def test_trim_preserves_paths(seed):
    rng = random.Random(seed)
    f = build(random_machine(rng, rng.randint(1, 6), [2, 3]))
    assert same_weighted_multiset(machine_triples(trim(f)), machine_triples(f))
