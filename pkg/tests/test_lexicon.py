import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rewriteqa.errors import ParseError
from rewriteqa.kb import Entity, KnowledgeBase
from rewriteqa.lexicon import (
    analyze,
    build_gazetteer,
    common_noun_positions,
    find_entities,
    load_pos_lexicon,
    load_triggers,
    tag,
    tokenize,
)

from support import GANDHI


def test_tokenize_strips_question_mark():
    assert tokenize("What is the population of Berlin?") == [
        "what", "is", "the", "population", "of", "berlin",
    ]


def test_tokenize_empty():
    assert tokenize("") == []
    assert tokenize("   ") == []


def test_tokenize_keyshia():
    assert tokenize("Who is keyshia cole dad?") == ["who", "is", "keyshia", "cole", "dad"]


def test_tokenize_keeps_internal_apostrophe():
    assert tokenize("Sonia Gandhi's daughter!") == ["sonia", "gandhi's", "daughter"]


def test_tag_lookup_and_unk():
    toks = tag(["female", "child"], {"female": "JJ", "child": "NN"})
    assert [(t.surface, t.pos) for t in toks] == [("female", "JJ"), ("child", "NN")]
    assert tag(["chembakolli"], {})[0].pos == "UNK"
    toks = tag(["what", "is"], {"what": "WP", "is": "VBZ"})
    assert [(t.surface, t.pos) for t in toks] == [("what", "WP"), ("is", "VBZ")]


def test_find_entities_berlin():
    words = tokenize("how many people live in berlin")
    assert find_entities(words, {"berlin": "E_Berlin"}) == [(5, 6, "E_Berlin")]


def test_find_entities_longest_match():
    words = "what is sonia gandhi s daughter".split()
    spans = find_entities(words, {"sonia gandhi": "E_SG", "sonia": "E_WRONG"})
    assert spans == [(2, 4, "E_SG")]


def test_find_entities_no_hits():
    assert find_entities("no names here".split(), {"berlin": "x"}) == []
    assert find_entities("anything".split(), {}) == []


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.sampled_from("a b c d e f".split()), min_size=1, max_size=12),
    st.dictionaries(
        st.tuples(st.sampled_from("a b c d e f".split()),
                  st.sampled_from(["", "b", "c d", "e f g"])),
        st.sampled_from(["E1", "E2", "E3"]),
        max_size=6,
    ),
)
def test_find_entities_spans_disjoint_and_greedy(words, raw_gazetteer):
    gazetteer = {" ".join(filter(None, key)): v for key, v in raw_gazetteer.items()}
    spans = find_entities(words, gazetteer)
    for (s1, e1, _), (s2, e2, _) in zip(spans, spans[1:]):
        assert e1 <= s2  # sorted and non-overlapping
    for start, end, _ in spans:
        assert 0 <= start < end <= len(words)
        # longest match at this start position wins
        for longer in range(end + 1, len(words) + 1):
            assert " ".join(words[start:longer]) not in gazetteer


def test_tokenize_idempotent_on_own_output():
    raw = "What is the name of Sonia Gandhi's daughter?"
    once = tokenize(raw)
    assert tokenize(" ".join(once)) == once


def test_analyze_and_common_nouns():
    kb = KnowledgeBase([Entity("SG", "Sonia Gandhi")])
    gazetteer = build_gazetteer(kb, {"sonia gandhi's": "SG"})
    pos = load_pos_lexicon(GANDHI / "pos.tsv")
    sentence = analyze("What is the name of Sonia Gandhi's daughter?", pos, gazetteer)
    assert sentence.entity_spans == ((5, 7, "SG"),)
    # "gandhi's" is protected by the entity span; name and daughter are not
    assert common_noun_positions(sentence) == [3, 7]


def test_gazetteer_alias_overrides_and_collisions():
    kb = KnowledgeBase([Entity("b", "Same Name"), Entity("a", "Same Name")])
    gazetteer = build_gazetteer(kb)
    assert gazetteer["same name"] == "a"  # deterministic smallest id
    gazetteer = build_gazetteer(kb, {"Same Name": "b"})
    assert gazetteer["same name"] == "b"


def test_trigger_loading_validates_against_kb(tmp_path):
    kb = KnowledgeBase(
        [Entity("x", "x"), Entity("y", "y")],
        unary_facts={"person": {"x"}},
        binary_facts={"child": {("x", "y")}},
    )
    path = tmp_path / "triggers.tsv"
    path.write_text("child\tchild\tbinary\npeople\tperson\tunary\n", encoding="utf-8")
    triggers = load_triggers(path, kb)
    assert triggers[("child",)][0].predicate == "child"
    path.write_text("child\tchild\tunary\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_triggers(path, kb)
    path.write_text("ghost\tnothing\tbinary\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_triggers(path, kb)


def test_pos_lexicon_parse_error(tmp_path):
    path = tmp_path / "pos.tsv"
    path.write_text("good\tNN\nbad line without tab\n", encoding="utf-8")
    with pytest.raises(ParseError) as err:
        load_pos_lexicon(path)
    assert "2" in str(err.value)
