import numpy as np
import pytest

from hmegen.decompose import latex_of
from hmegen.distort import Axis, DistortionParams, distort_hme
from hmegen.errors import AlignmentError, InkmlParseError, StructureError
from hmegen.ink import OnlineHME, RelationLabel, Stroke, Symbol
from hmegen.inkml import build_srt, parse_inkml, write_inkml

from conftest import QUADRATIC_LATEX, hme_from_latex

MINIMAL = b"""<ink xmlns="http://www.w3.org/2003/InkML">
  <annotation type="truth">$x$</annotation>
  <trace id="1">0 0, 10 0</trace>
  <traceGroup xml:id="TG">
    <annotation type="truth">Segmentation</annotation>
    <traceGroup xml:id="sym1">
      <annotation type="truth">x</annotation>
      <traceView traceDataRef="1"/>
    </traceGroup>
  </traceGroup>
</ink>"""

SUPERSCRIPT_WITH_MATHML = b"""<ink xmlns="http://www.w3.org/2003/InkML">
  <annotation type="truth">$x^2$</annotation>
  <annotationXML type="truth" encoding="Content-MathML">
    <math xmlns="http://www.w3.org/1998/Math/MathML">
      <msup><mi xml:id="x_1">x</mi><mn xml:id="2_1">2</mn></msup>
    </math>
  </annotationXML>
  <trace id="0">0 0, 5 -10</trace>
  <trace id="1">8 -12, 12 -16</trace>
  <traceGroup xml:id="TG">
    <annotation type="truth">Segmentation</annotation>
    <traceGroup xml:id="g1">
      <annotation type="truth">x</annotation>
      <traceView traceDataRef="0"/>
      <annotationXML href="x_1"/>
    </traceGroup>
    <traceGroup xml:id="g2">
      <annotation type="truth">2</annotation>
      <traceView traceDataRef="1"/>
      <annotationXML href="2_1"/>
    </traceGroup>
  </traceGroup>
</ink>"""


def hme_equal(a: OnlineHME, b: OnlineHME, tol: float = 1e-6) -> bool:
    if len(a.strokes) != len(b.strokes):
        return False
    for sa, sb in zip(a.strokes, b.strokes):
        if sa.points.shape != sb.points.shape:
            return False
        if np.max(np.abs(sa.points - sb.points)) > tol:
            return False
    if [s.label for s in a.symbols] != [s.label for s in b.symbols]:
        return False
    if [s.strokes for s in a.symbols] != [s.strokes for s in b.symbols]:
        return False
    if a.latex != b.latex:
        return False
    shape_a = [(rel.value, an.label, bn.label) for an, rel, bn in _edge_labels(a)]
    shape_b = [(rel.value, an.label, bn.label) for an, rel, bn in _edge_labels(b)]
    return shape_a == shape_b


def _edge_labels(hme: OnlineHME):
    if hme.srt is None:
        return []
    nodes = {n.symbol_id: n for n in hme.srt.nodes()}
    return [
        (nodes[pid], rel, nodes[cid]) for pid, rel, cid in hme.srt.edges()
    ]


class TestParse:
    def test_minimal_file(self):
        hme = parse_inkml(MINIMAL)
        assert len(hme.strokes) == 1
        assert np.allclose(hme.strokes[0].points, [[0, 0], [10, 0]])
        assert [s.label for s in hme.symbols] == ["x"]
        assert hme.latex == "x"

    def test_superscript_file_with_mathml(self):
        hme = parse_inkml(SUPERSCRIPT_WITH_MATHML)
        assert hme.latex == "x ^ { 2 }"
        assert hme.srt.root.symbol_id == "g1"
        sup = hme.srt.root.child(RelationLabel.SUPERSCRIPT)
        assert sup.symbol_id == "g2"

    def test_superscript_without_mathml_aligns_by_label(self):
        data = SUPERSCRIPT_WITH_MATHML.replace(b"<annotationXML", b"<junkXML").replace(
            b"</annotationXML>", b"</junkXML>"
        )
        # junk element still parses as XML; the mathml channel is simply gone
        hme = parse_inkml(data)
        assert hme.latex == "x ^ { 2 }"
        assert hme.srt.root.symbol_id == "g1"

    def test_truncated_xml(self):
        with pytest.raises(InkmlParseError, match="byte"):
            parse_inkml(MINIMAL[:60])

    def test_unresolved_trace_reference(self):
        data = MINIMAL.replace(b'traceDataRef="1"', b'traceDataRef="99"')
        with pytest.raises(StructureError, match="99"):
            parse_inkml(data)

    def test_missing_truth(self):
        data = MINIMAL.replace(b'<annotation type="truth">$x$</annotation>', b"")
        with pytest.raises(StructureError, match="truth"):
            parse_inkml(data)

    def test_no_truth_mode(self):
        data = MINIMAL.replace(b'<annotation type="truth">$x$</annotation>', b"")
        hme = parse_inkml(data, require_truth=False)
        assert hme.latex == ""
        assert hme.srt is None
        assert len(hme.strokes) == 1
        assert [s.label for s in hme.symbols] == ["x"]

    def test_extra_coordinate_channels_ignored(self):
        data = MINIMAL.replace(b"0 0, 10 0", b"0 0 123, 10 0 456")
        hme = parse_inkml(data)
        assert np.allclose(hme.strokes[0].points, [[0, 0], [10, 0]])


class TestBuildSrt:
    def test_quadratic_tree(self):
        labels = ["x", "2", "+", "2", "x", "+", "1"]
        symbols = [Symbol(f"s{i}", lab, (i,)) for i, lab in enumerate(labels)]
        srt = build_srt(symbols, "x^2+2x+1")
        assert latex_of(srt) == QUADRATIC_LATEX
        baseline = []
        node = srt.root
        while node is not None:
            baseline.append(node.label)
            node = node.child(RelationLabel.RIGHT)
        assert baseline == ["x", "+", "2", "x", "+", "1"]
        assert srt.root.child(RelationLabel.SUPERSCRIPT).label == "2"

    def test_single_symbol(self):
        srt = build_srt([Symbol("s0", "x", (0,))], "x")
        assert len(srt) == 1

    def test_fraction_edges(self):
        labels = ["-", "a", "b"]
        symbols = [Symbol(f"s{i}", lab, (i,)) for i, lab in enumerate(labels)]
        srt = build_srt(symbols, "\\frac{a}{b}")
        assert srt.root.label == "-"
        assert srt.root.child(RelationLabel.OVER).label == "a"
        assert srt.root.child(RelationLabel.UNDER).label == "b"
        assert latex_of(srt) == "\\frac { a } { b }"

    def test_truth_symbol_missing_from_segmentation(self):
        symbols = [Symbol("s0", "x", (0,))]
        with pytest.raises(AlignmentError, match="'\\+'"):
            build_srt(symbols, "x + 1")

    def test_unreferenced_symbol(self):
        symbols = [Symbol("s0", "x", (0,)), Symbol("s1", "y", (1,))]
        with pytest.raises(AlignmentError, match="s1"):
            build_srt(symbols, "x")


ROUND_TRIP_TEMPLATES = [
    "x",
    "x ^ { 2 }",
    QUADRATIC_LATEX,
    "a _ { i } + b",
    "\\frac { a + b } { 2 }",
    "\\sqrt { x + 1 }",
    "\\sum _ { i = 1 } ^ { n } x _ { i }",
    "( a + b ) \\times c",
    "| x - y | \\leq 1",
    "\\frac { \\sqrt { x } } { 2 } = y",
]


class TestRoundTrip:
    @pytest.mark.parametrize("template", ROUND_TRIP_TEMPLATES)
    def test_write_parse_stable(self, template):
        rng = np.random.default_rng(hash(template) % (2**32))
        for _ in range(5):  # 5 random geometries per template: 50 fixtures
            hme = hme_from_latex(template, rng=rng)
            once = parse_inkml(write_inkml(hme))
            assert hme_equal(hme, once)
            twice = parse_inkml(write_inkml(once))
            assert hme_equal(once, twice)

    def test_stroke_order_and_sets_exact(self):
        hme = hme_from_latex(QUADRATIC_LATEX, rng=np.random.default_rng(17))
        out = parse_inkml(write_inkml(hme))
        assert [s.strokes for s in out.symbols] == [s.strokes for s in hme.symbols]

    def test_nine_decimal_precision(self):
        rng = np.random.default_rng(99)
        pts = np.round(rng.uniform(0, 5000, size=(40, 2)), 9)
        hme = OnlineHME(
            [Stroke(pts[:20]), Stroke(pts[20:])],
            [Symbol("s0", "x", (0,)), Symbol("s1", "y", (1,))],
            None,
            "",
        )
        out = parse_inkml(write_inkml(hme), require_truth=False)
        for a, b in zip(out.strokes, hme.strokes):
            assert np.max(np.abs(a.points - b.points)) < 1e-6

    def test_provenance_round_trip(self):
        hme = hme_from_latex("x + 1")
        params = DistortionParams(3, Axis.HORIZONTAL, 5.0, -2.0, 1.1, 4.0)
        distorted = distort_hme(hme, params)
        data = write_inkml(distorted)
        text = data.decode("utf-8")
        for needle in ["distortion", ">3<", "5.0", "-2.0", "1.1", "4.0"]:
            assert needle in text
        back = parse_inkml(data)
        assert back.provenance == distorted.provenance

    def test_mathml_linkage_preserves_symbol_ids(self):
        hme = hme_from_latex("\\frac { a } { b } + c")
        out = parse_inkml(write_inkml(hme))
        assert [s.id for s in out.symbols] == [s.id for s in hme.symbols]
        assert out.srt.edges() == hme.srt.edges()
