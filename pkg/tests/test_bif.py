import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bncx.bif import parse_bif, read_bif, serialize_bif
from bncx.errors import StructuralError
from bncx.fixtures import disease_net, hub_net, random_bnc

SPRINKLER = """
// a small network
network sprinkler {
  property author = nobody ;
}
variable Rain {
  type discrete [ 2 ] { yes, no };
}
variable Sprinkler {
  type discrete [ 2 ] { on, off };
  property position = (1, 2) ;
}
variable Grass {
  type discrete [ 3 ] { dry, damp, very_wet };
}
probability ( Rain ) {
  table 0.2, 0.8;
}
probability ( Sprinkler | Rain ) {
  (yes) 0.01, 0.99;
  (no) 0.4, 0.6;
}
/* default row first, then overrides */
probability ( Grass | Sprinkler, Rain ) {
  default 0.1, 0.3, 0.6;
  (off, no) 1.0, 0.0, 0.0;
}
"""


def same_net(a, b):
    assert a.name == b.name
    assert [(v.name, v.states) for v in a.variables] == [(v.name, v.states) for v in b.variables]
    assert a.parents == b.parents
    for fa, fb in zip(a.cpts, b.cpts):
        assert fa.scope == fb.scope
        np.testing.assert_array_equal(fa.values, fb.values)


def test_parse_sprinkler():
    net, diags = parse_bif(SPRINKLER)
    assert diags == []
    assert net.name == "sprinkler"
    grass = net.index("Grass")
    assert net.variables[grass].states == ("dry", "damp", "very_wet")
    # parents keep header order: Sprinkler, Rain
    assert net.parents[grass] == (net.index("Sprinkler"), net.index("Rain"))
    cpt = net.cpts[grass].transposed((1, 0, 2))
    np.testing.assert_allclose(cpt[1, 1], [1.0, 0.0, 0.0])
    np.testing.assert_allclose(cpt[0, 0], [0.1, 0.3, 0.6])
    assert net.properties["network"] == ["author = nobody"]


def test_flat_table_child_fastest():
    text = """
    variable A { type discrete [ 2 ] { a0, a1 }; }
    variable B { type discrete [ 2 ] { b0, b1 }; }
    probability ( A ) { table 0.5, 0.5; }
    probability ( B | A ) { table 0.1, 0.9, 0.7, 0.3; }
    """
    net, diags = parse_bif(text)
    assert not diags
    np.testing.assert_allclose(net.cpts[1].transposed((0, 1)), [[0.1, 0.9], [0.7, 0.3]])


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("", "no variables"),
        ("variable A { type discrete [ 2 ] { a, b }; }", "no probability block"),
        ("variable A { type discrete [ 3 ] { a, b }; }", "declares 3 states"),
        ("variable A { type continuous; }", "non-discrete"),
        ("probability ( A ) { table 1.0; }", "undeclared"),
        ("variable A { type discrete [ 2 ] { a, b }; }\nprobability ( A ) { table 0.5, 0.6; }", "summing"),
        ("variable A { type discrete [ 2 ] { a, b }; }\nprobability ( A ) { table 0.5; }", "expected 2"),
        ("network x { foo }", "only properties"),
        ("garbage", "unexpected"),
        ('variable "A" { type discrete [ 2 ] { a, b }; }', "expected a name"),
    ],
)
def test_error_diagnostics(text, fragment):
    net, diags = parse_bif(text)
    assert net is None
    assert any(d.severity == "error" and fragment in d.message for d in diags), diags


def test_error_line_number():
    text = "variable A {\n type discrete [ 2 ] { a, b };\n}\nprobability ( A ) {\n table 0.5, 0.6;\n}\n"
    _, diags = parse_bif(text)
    assert diags[-1].line == 4


def test_renormalization_warning():
    text = "variable A { type discrete [ 2 ] { a, b }; }\nprobability ( A ) { table 0.5, 0.5000001; }"
    net, diags = parse_bif(text)
    assert net is not None
    assert [d.severity for d in diags] == ["warning"]


def test_non_utf8():
    net, diags = parse_bif(b"\xff\xfe\x00")
    assert net is None and "UTF-8" in diags[0].message


def test_read_bif_raises(tmp_path):
    p = tmp_path / "bad.bif"
    p.write_text("variable A { type discrete [ 2 ] { a, b }; }")
    with pytest.raises(StructuralError):
        read_bif(p)
    p.write_text(SPRINKLER)
    assert len(read_bif(p)) == 3


@pytest.mark.parametrize("make", [lambda: hub_net(2), disease_net, lambda: random_bnc(7).net])
def test_round_trip(make):
    net = make()
    back, diags = parse_bif(serialize_bif(net))
    assert not diags
    same_net(net, back)


def test_round_trip_keeps_properties():
    net, _ = parse_bif(SPRINKLER)
    again, _ = parse_bif(serialize_bif(net))
    same_net(net, again)
    assert again.properties == net.properties


TOKENS = list("{}()[],;|") + ["variable", "probability", "table", "default", "type", "discrete",
                              "network", "property", "A", "B", "a", "b", "2", "0.5", "1.0", '"q"']


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=300))
def test_fuzz_never_raises(data):
    net, diags = parse_bif(data)
    if net is None:
        assert any(d.severity == "error" for d in diags)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(TOKENS), max_size=60))
def test_fuzz_tokens(tokens):
    net, diags = parse_bif(" ".join(tokens))
    assert net is not None or diags
