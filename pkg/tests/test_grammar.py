import pytest
from hypothesis import given
from hypothesis import strategies as st

from callboost.errors import CallsignParseError, ConfigurationError
from callboost.grammar import (DIGIT_WORDS, FULL, NATO_WORDS, SHORTENED, AirlineLexicon, expand, extract_icao,
                               parse_icao, shortened_variants, spoken_char)


@pytest.fixture(scope="module")
def lex():
    return AirlineLexicon.default()


def test_parse_icao_splits_designator_and_suffix():
    p = parse_icao("RYR1RK")
    assert (p.designator, p.suffix) == ("RYR", "1RK")
    assert parse_icao("EZY12").designator == "EZY"
    assert parse_icao("BA123").designator == "BA"


@pytest.mark.parametrize("code, span", [
    ("", ""),
    ("A123", "A1"),
    ("ABCD12", "ABCD"),
    ("DLH", "DLH"),
    ("dlh12", "dlh"),
    ("DLH-12", "-"),
])
def test_parse_icao_errors_name_the_offending_span(code, span):
    with pytest.raises(CallsignParseError) as info:
        parse_icao(code)
    assert info.value.span == span


def test_expand_lists_every_telephony_name(lex):
    forms = expand("DLH5KX", lex)
    assert [e.text for e in forms] == ["lufthansa five kilo x-ray", "hansa five kilo x-ray"]
    assert all(e.kind == FULL and e.icao == "DLH5KX" for e in forms)
    assert forms[0].name_words == ("lufthansa",)


def test_expand_two_word_name(lex):
    assert expand("WZZ12", lex)[0].words == ("wizz", "air", "one", "two")


def test_unknown_designator_is_spelled(lex):
    assert expand("QQX7", lex)[0].text == "quebec quebec x-ray seven"


def test_shortened_variants(lex):
    full = expand("SWR2689", lex)[0]
    short = [v.text for v in shortened_variants(full)]
    assert short == ["two six eight nine", "six eight nine", "eight nine"]
    assert all(v.kind == SHORTENED and v.name_words == () for v in shortened_variants(full))
    with pytest.raises(ValueError):
        shortened_variants(shortened_variants(full)[0])


def test_extract_icao_examples(lex):
    assert extract_icao("good morning swiss two six eight nine descend", lex) == "SWR2689"
    assert extract_icao("hansa five kilo xray", lex) == "DLH5KX"
    assert extract_icao("descend flight level three two zero", lex) is None
    assert extract_icao("sierra whiskey romeo one two", lex) == "SWR12"
    assert extract_icao([], lex) is None


def test_extract_takes_first_callsign(lex):
    assert extract_icao("swiss one two austrian three four", lex) == "SWR12"


def test_accepted_alternate_spellings():
    assert spoken_char("alpha") == spoken_char("alfa") == "A"
    assert spoken_char("juliet") == "J"
    assert spoken_char("niner") is None


def test_lexicon_text_roundtrip(lex):
    back = AirlineLexicon.from_text(lex.to_text())
    assert back.to_text() == lex.to_text()
    assert len(back) == len(lex)
    assert back.designator_for(["hansa"]) == "DLH"


@pytest.mark.parametrize("text", ["DLHX\tfoo\n", "DLH\n", "DLH\ta b c\n", "DLH\t \n"])
def test_lexicon_rejects_bad_lines(text):
    with pytest.raises(ConfigurationError):
        AirlineLexicon.from_text(text)


def test_lexicon_names_do_not_collide_with_spelling_words(lex):
    spelling = set(DIGIT_WORDS.values()) | set(NATO_WORDS.values())
    assert not (lex.name_tokens & spelling)


suffixes = st.from_regex(r"[1-9][0-9]{0,3}[A-Z]{0,2}", fullmatch=True)


@given(st.sampled_from(AirlineLexicon.default().designators()) | st.from_regex(r"[A-Z]{2,3}", fullmatch=True),
       suffixes)
def test_every_expansion_extracts_back(designator, suffix):
    lex = AirlineLexicon.default()
    code = designator + suffix
    for e in expand(code, lex):
        assert extract_icao(e.words, lex) == code
