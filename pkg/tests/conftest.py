import numpy as np
import pytest

from hmegen.ink import OnlineHME, Stroke, Symbol
from hmegen.inkml import _emission_order, build_srt, write_inkml
from hmegen.latex import parse_latex


def hme_from_latex(latex: str, rng: np.random.Generator | None = None) -> OnlineHME:
    """Build an expression with one symbol per truth token, laid out left to
    right with small zig-zag strokes."""
    skeleton = parse_latex(latex)
    order = _emission_order(skeleton)
    strokes: list[Stroke] = []
    symbols: list[Symbol] = []
    for i, node in enumerate(order):
        x0 = 12.0 * i
        if rng is None:
            pts = [(x0, 40.0), (x0 + 4.0, 60.0), (x0 + 8.0, 42.0)]
        else:
            xs = x0 + rng.uniform(0, 8, size=4)
            ys = rng.uniform(35, 65, size=4)
            pts = list(zip(xs, ys))
        strokes.append(Stroke(pts))
        symbols.append(Symbol(f"s{i}", node.label, (i,)))
    srt = build_srt(symbols, latex)
    from hmegen.decompose import latex_of

    hme = OnlineHME(strokes, symbols, srt, latex_of(srt))
    hme.validate()
    return hme


def random_hme(rng: np.random.Generator, n_symbols: int = 4) -> OnlineHME:
    labels = ["x", "y", "a", "b", "2", "3", "n", "c"]
    chain = " + ".join(
        labels[int(rng.integers(0, len(labels)))] for _ in range(n_symbols)
    )
    return hme_from_latex(chain, rng=rng)


QUADRATIC_LATEX = "x ^ { 2 } + 2 x + 1"


@pytest.fixture
def quadratic_hme() -> OnlineHME:
    return hme_from_latex(QUADRATIC_LATEX)


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory) -> str:
    """100 InkML files covering plain chains, scripts, fractions, and radicals."""
    root = tmp_path_factory.mktemp("corpus")
    templates = [
        "x ^ { 2 } + 2 x + 1",
        "a _ { i } + b",
        "\\frac { a + b } { 2 }",
        "\\sqrt { x + 1 }",
        "( a + b ) \\times c",
        "\\sum _ { i = 1 } ^ { n } x",
        "y = a x + b",
        "z ^ { 2 } = x ^ { 2 } + y ^ { 2 }",
        "\\alpha + \\beta",
        "| x - y | < 1",
    ]
    rng = np.random.default_rng(20240811)
    for i in range(100):
        hme = hme_from_latex(templates[i % len(templates)], rng=rng)
        (root / f"expr{i:03d}.inkml").write_bytes(write_inkml(hme))
    return str(root)
