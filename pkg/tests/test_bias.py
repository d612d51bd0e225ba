import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from callboost.bias import (MAX_UTTERANCE_CALLSIGNS, BoostConfig, SurveillanceSnapshot, build_biasing_fst,
                            callsign_expansions, extend_grammar, read_surveillance, snapshot_expansions,
                            write_surveillance)
from callboost.errors import ConfigurationError
from callboost.grammar import AirlineLexicon
from callboost.rescore import lattice_from_paths, rescore_lattice
from callboost.wfst import SymbolTable, compose, linear_acceptor, shortest_path, sigma_acceptor

from oracles import best_by_string, derivation_weights


@pytest.fixture(scope="module")
def lex():
    return AirlineLexicon.default()


def snap(*codes):
    return SurveillanceSnapshot("u1", 0.0, codes)


def test_negative_discount_rejected():
    with pytest.raises(ConfigurationError):
        BoostConfig(discount=-1.0)
    with pytest.raises(ConfigurationError):
        BoostConfig(g_discount=-0.5)


def test_bad_codes_are_skipped_with_warning(lex):
    warnings = []
    got = snapshot_expansions(snap("SWR12", "X1", "DLH5"), lex, BoostConfig(), warnings)
    assert list(got) == ["SWR12", "DLH5"]
    assert len(warnings) == 1 and "X1" in warnings[0]


def test_shortened_forms_are_optional(lex):
    plain = callsign_expansions(["SWR123"], lex)["SWR123"]
    more = callsign_expansions(["SWR123"], lex, include_shortened=True)["SWR123"]
    assert [e.text for e in plain] == ["swiss one two three"]
    assert [e.text for e in more] == ["swiss one two three", "one two three", "two three"]


def test_too_many_callsigns(lex):
    codes = tuple(f"SWR{i}" for i in range(1, MAX_UTTERANCE_CALLSIGNS + 2))
    with pytest.raises(ConfigurationError):
        build_biasing_fst(snap(*codes), lex, BoostConfig(), SymbolTable())


def test_surveillance_file_roundtrip(tmp_path):
    path = tmp_path / "s.tsv"
    snaps = [SurveillanceSnapshot("a", 12.5, ("SWR1", "DLH2")), SurveillanceSnapshot("b", 13.0, ())]
    write_surveillance(path, snaps)
    back = read_surveillance(path)
    assert list(back.values()) == snaps


def test_surveillance_duplicate_ids(tmp_path):
    path = tmp_path / "s.tsv"
    path.write_text("a\t1\tSWR1\na\t2\tSWR2\n")
    with pytest.raises(ConfigurationError):
        read_surveillance(path)


def test_biasing_machine_discounts_each_occurrence(lex):
    t = SymbolTable()
    bias = build_biasing_fst(snap("SWR12", "DLH5"), lex, BoostConfig(discount=2.0), t)
    words = "swiss one two hansa five swiss one".split()
    labels = [t.add(w) for w in words]
    # oracle: derivations through the hub machine; the best uses both callsigns
    assert min(derivation_weights(bias, labels)) == -4.0
    assert 0.0 in derivation_weights(bias, labels)


def test_rescoring_promotes_active_callsign(lex):
    t = SymbolTable()
    lattice = lattice_from_paths([("austrian one two descend".split(), 0.0),
                                  ("swiss one two descend".split(), 1.0)], t)
    bias = build_biasing_fst(snap("SWR12"), lex, BoostConfig(), t)
    out = rescore_lattice(lattice, bias)
    assert best_by_string(out, t) == {"austrian one two descend": 0.0, "swiss one two descend": -1.0}


def test_rescoring_with_shared_prefixes(lex):
    # SWR12 and SWR123 share a trie path; a path naming SWR123 can match either
    t = SymbolTable()
    bias = build_biasing_fst(snap("SWR12", "SWR123"), lex, BoostConfig(discount=1.5), t)
    lattice = linear_acceptor("swiss one two three".split(), 0.0, t)
    assert best_by_string(rescore_lattice(lattice, bias), t) == {"swiss one two three": -1.5}


def test_extend_grammar_discounts_callsigns_anywhere(lex):
    t = SymbolTable()
    for w in "contact tower swiss one two hansa five".split():
        t.add(w)
    g = sigma_acceptor(t)
    ext = extend_grammar(g, ["SWR12", "DLH5"], lex, BoostConfig(g_discount=1.0), t)
    lattice = lattice_from_paths([("contact tower".split(), 0.0),
                                  ("swiss one two contact".split(), 0.5),
                                  ("hansa five swiss one two".split(), 1.0)], t)
    got = best_by_string(compose(lattice, ext), t)
    assert got == {"contact tower": 0.0, "swiss one two contact": -0.5, "hansa five swiss one two": -1.0}


def test_extend_grammar_without_callsigns_is_identity(lex):
    g = sigma_acceptor(SymbolTable())
    assert extend_grammar(g, [], lex, BoostConfig()) is g


def test_extend_grammar_needs_table(lex):
    g = sigma_acceptor(None)
    with pytest.raises(ConfigurationError):
        extend_grammar(g, ["SWR1"], lex, BoostConfig())


def test_empty_snapshot_keeps_best_weight(lex):
    t = SymbolTable()
    lattice = lattice_from_paths([("swiss one two".split(), 0.3)], t)
    out = rescore_lattice(lattice, build_biasing_fst(snap(), lex, BoostConfig(), t))
    assert shortest_path(out) == shortest_path(lattice)
    assert not math.isinf(shortest_path(out)[0][1])


def test_grammar_extension_examples(lex):
    t = SymbolTable()
    g = linear_acceptor("swiss two six eight nine".split(), 5.0, t)
    ext = extend_grammar(g, ["SWR2689"], lex, BoostConfig(g_discount=2.0), t)
    # the extended grammar is cyclic, so score the sentence through it
    sentence = linear_acceptor("swiss two six eight nine".split(), 0.0, t)
    assert shortest_path(compose(sentence, ext))[0][1] == 3.0
    # a 4-gram the grammar never saw becomes reachable
    g = linear_acceptor("contact tower".split(), 0.0, t)
    ext = extend_grammar(g, ["RYR1SG"], lex, BoostConfig(), t)
    sentence = linear_acceptor("ryanair one sierra golf contact tower".split(), 0.0, t)
    assert compose(sentence, g).is_empty()
    assert shortest_path(compose(sentence, ext))[0][1] == -1.0


def test_hub_example_with_both_names(lex):
    t = SymbolTable()
    bias = build_biasing_fst(snap("DLH5KX"), lex, BoostConfig(discount=2.0), t)
    for name in ("lufthansa", "hansa"):
        lattice = linear_acceptor(f"{name} five kilo x-ray".split(), 1.0, t)
        assert shortest_path(rescore_lattice(lattice, bias))[0][1] == -1.0


lattice_paths = st.lists(
    st.tuples(st.lists(st.sampled_from("swiss hansa one two five kilo descend".split()), min_size=1, max_size=6),
              st.floats(-1.0, 3.0)),
    min_size=1, max_size=4)


@settings(max_examples=60, deadline=None)
@given(lattice_paths, st.floats(0.0, 4.0), st.floats(0.0, 4.0))
def test_discount_properties(paths, d1, d2):
    lex = AirlineLexicon.default()
    t = SymbolTable()
    lattice = lattice_from_paths(paths, t)
    s = snap("SWR12", "DLH5K")
    before = best_by_string(lattice, t)
    zero = rescore_lattice(lattice, build_biasing_fst(s, lex, BoostConfig(discount=0.0), t))
    assert shortest_path(zero)[0][1] == shortest_path(lattice)[0][1]
    lo, hi = sorted((d1, d2))
    w_lo = shortest_path(rescore_lattice(lattice, build_biasing_fst(s, lex, BoostConfig(discount=lo), t)))[0][1]
    out_hi = rescore_lattice(lattice, build_biasing_fst(s, lex, BoostConfig(discount=hi), t))
    assert shortest_path(out_hi)[0][1] <= w_lo + 1e-9
    assert set(best_by_string(out_hi, t)) == set(before)
