import json
import random
from fractions import Fraction as F

import jsonschema
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import MODELS, load
from lpts_agar import (
    Dist,
    ModelError,
    ModelFile,
    build_cex,
    cex_document,
    coarsest_simulation,
    emit_cex,
    format_model,
    holds,
    load_cex,
    parse_model,
)
from lpts_agar.parse import CEX_SCHEMA, format_lpts, tokenize
from oracles import random_lpts

SMALL = """
lpts A { alphabet a; init x; x -a-> { 1/2: x, 1/2: y }; }
system = A;
spec = A;
"""


def test_parses_output_distribution():
    s = load("client_server.lpts").lpts["S"]
    s1 = s.state_id("s1")
    (t,) = [s.transitions[i] for i in s.on_action(s1, "output")]
    assert t.dist == Dist({s1: F(1, 10), s.state_id("s2"): F(9, 10)})


def test_states_numbered_by_first_use():
    m = parse_model(SMALL)
    a = m.lpts["A"]
    assert a.states == ("x", "y")
    assert a.start == 0
    assert m.system == ("A",) and m.spec == "A"
    assert m.components() == [a]


def test_every_fixture_parses():
    for path in sorted(MODELS.glob("*.lpts")):
        model = parse_model(path.read_text())
        assert model.system


def test_round_trip_is_stable_after_renumbering():
    rng = random.Random(0)
    for _ in range(100):
        l = random_lpts(rng)
        text = format_lpts("M", l) + "\nsystem = M;\nspec = M;\n"
        model = parse_model(text)
        once = format_model(model)
        assert format_model(parse_model(once)) == once
        assert model.lpts["M"].num_states <= l.num_states
        assert holds(l, model.lpts["M"]) and holds(model.lpts["M"], l)


@pytest.mark.parametrize(
    "text, message, line, col",
    [
        ("lpts A { alphabet a; init x; x -a-> { 0.5: x }; }", "decimal", 1, 39),
        ("lpts A { alphabet a; init x; x -a-> { 1/2: x }; }\nsystem = A; spec = A;", "sums to 1/2", 1, 37),
        ("lpts A { alphabet a; init x; x -b-> { 1: x }; }\nsystem = A; spec = A;", "not in the alphabet", 1, 33),
        ("lpts A { alphabet a; init x; x -a-> { 1/0: x }; }", "zero denominator", 1, 41),
        ("lpts A { alphabet a; init x; x -a-> { 0: y, 1: x }; }", "zero probability", 1, 39),
        ("lpts A { alphabet a; init x; x -a-> { 1/2: x, 1/2: x }; }", "listed twice", 1, 52),
        ("lpts A { alphabet a; init x; }\nsystem = B; spec = A;", "unknown LPTS 'B'", 2, 10),
        ("lpts A { alphabet a; init x; }\nsystem = A || A; spec = A;", "listed twice", 2, 15),
        ("lpts A { alphabet a; init x; }\nsystem = A; spec = Q;", "unknown LPTS 'Q'", 2, 20),
        ("lpts A { alphabet a; init x; }\nlpts A { alphabet a; init x; }\nsystem = A; spec = A;", "defined twice", 2, 1),
        ("lpts A { alphabet a; init x; }\nsystem = A;", "expected 'spec'", 2, 12),
        ("lpts A { alphabet a; init x; } $", "unexpected character", 1, 32),
        ("", "expected 'lpts'", 1, 1),
    ],
)
def test_errors_carry_positions(text, message, line, col):
    with pytest.raises(ModelError) as info:
        parse_model(text)
    err = info.value
    assert message in err.message
    assert (err.line, err.col) == (line, col)
    assert str(err).startswith(f"{line}:{col}: ")


def test_comments_are_ignored():
    text = "# header\n" + SMALL.replace("init x;", "init x; # start here\n")
    assert parse_model(text).lpts["A"].states == ("x", "y")


def test_tokenizer_positions():
    toks = tokenize("a ->\n  {")
    assert [(t.text, t.line, t.col) for t in toks] == [("a", 1, 1), ("->", 1, 3), ("{", 2, 3), ("", 2, 4)]


TOKENS = st.sampled_from(
    ["lpts", "A", "x", "y", "a", "{", "}", ";", ":", ",", "/", "->", "-", "||", "=", "1", "2", "0",
     "alphabet", "init", "system", "spec", " ", "\n", "#c\n", "1.5"]
)


@settings(max_examples=300, deadline=None)
@given(st.lists(TOKENS, max_size=40))
def test_parser_only_raises_model_errors(parts):
    try:
        parse_model(" ".join(parts))
    except ModelError:
        pass


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=60))
def test_parser_survives_arbitrary_text(text):
    try:
        parse_model(text)
    except ModelError:
        pass


def fixture_cex():
    model = load("nondeterministic.lpts")
    l1, l2 = model.lpts["L"], model.lpts["R"]
    r = coarsest_simulation(l1, l2)
    return build_cex(r.removal_trace, (0, 0), l1), l1


def test_cex_json_validates_and_round_trips():
    c, l1 = fixture_cex()
    doc = cex_document(c, l1, {"command": "check", "b": 1})
    text = emit_cex(doc, "json")
    obj = json.loads(text)
    jsonschema.validate(obj, CEX_SCHEMA)
    assert list(obj["meta"]) == ["b", "command"]
    back = load_cex(text)
    assert back.tree == doc.tree
    assert back.maps_to == doc.maps_to
    assert all("/" in e["prob"] for t in obj["transitions"] for e in t["support"])


def test_cex_dot_and_text_mention_images():
    c, l1 = fixture_cex()
    doc = cex_document(c, l1)
    dot = emit_cex(doc, "dot")
    assert dot.startswith("digraph")
    assert "root (l0)" in dot
    text = emit_cex(doc, "text")
    assert "root (l0)" in text and "-y->" in text
    with pytest.raises(ValueError):
        emit_cex(doc, "yaml")


def test_format_lpts_rejects_non_identifiers():
    l = random_lpts(random.Random(1))
    from lpts_agar import Lpts

    odd = Lpts(tuple(f"({s})" for s in l.states), l.start, l.alphabet, l.transitions)
    with pytest.raises(ValueError):
        format_lpts("M", odd)


def test_model_file_defaults():
    m = ModelFile({}, (), "A")
    assert m.options == {}
