"""Expression decomposition over symbol relation trees.

An expression is split into sub-expressions in a single, non-recursive
pass: drop all scripts (baseline), lift out every script/limit/radicand
part, and cut the top-level baseline at each binary operator outside
brackets. Results with fewer than two symbols are discarded and exact
duplicates removed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import StructureError
from .ink import OnlineHME, RelationLabel, Stroke, SrtNode, Symbol, SymbolRelationTree
from .latex import (
    BAR_BRACKET,
    BIG_OPERATORS,
    BINARY_OPERATORS,
    CLOSE_BRACKETS,
    FRACTION_BAR_LABEL,
    OPEN_BRACKETS,
    RADICAL_LABEL,
)

SCRIPT_RELATIONS = (RelationLabel.SUBSCRIPT, RelationLabel.SUPERSCRIPT)
PART_RELATIONS = (
    RelationLabel.SUBSCRIPT,
    RelationLabel.SUPERSCRIPT,
    RelationLabel.OVER,
    RelationLabel.UNDER,
    RelationLabel.INSIDE,
)


def latex_of(srt: SymbolRelationTree) -> str:
    """Canonical spaced LaTeX token stream for a tree; deterministic."""
    return " ".join(_emit(srt.root))


def _emit(node: SrtNode) -> list[str]:
    over = node.child(RelationLabel.OVER)
    under = node.child(RelationLabel.UNDER)
    inside = node.child(RelationLabel.INSIDE)
    sub = node.child(RelationLabel.SUBSCRIPT)
    sup = node.child(RelationLabel.SUPERSCRIPT)
    out: list[str] = []

    if node.label == FRACTION_BAR_LABEL and (over or under):
        if not (over and under):
            raise StructureError(
                f"fraction bar {node.symbol_id!r} needs both over and under parts"
            )
        out += ["\\frac", "{", *_emit(over), "}", "{", *_emit(under), "}"]
    elif node.label == RADICAL_LABEL:
        if inside is None:
            raise StructureError(f"radical {node.symbol_id!r} has no inside part")
        out += ["\\sqrt", "{", *_emit(inside), "}"]
        inside = None
    elif node.label in BIG_OPERATORS:
        out.append(node.label)
        if under is not None:
            out += ["_", "{", *_emit(under), "}"]
        if over is not None:
            out += ["^", "{", *_emit(over), "}"]
    else:
        if over or under:
            raise StructureError(
                f"no emission rule for over/under on {node.label!r} ({node.symbol_id!r})"
            )
        out.append(node.label)

    if inside is not None and node.label != RADICAL_LABEL:
        raise StructureError(
            f"no emission rule for inside on {node.label!r} ({node.symbol_id!r})"
        )
    if sub is not None:
        out += ["_", "{", *_emit(sub), "}"]
    if sup is not None:
        out += ["^", "{", *_emit(sup), "}"]

    right = node.child(RelationLabel.RIGHT)
    if right is not None:
        out += _emit(right)
    return out


def baseline_of(srt: SymbolRelationTree) -> SymbolRelationTree | None:
    """Copy of the tree with every sub/superscript subtree removed, at all depths.

    Returns None when the tree has no scripts (nothing new to generate).
    """
    root, removed = _strip_scripts(srt.root)
    if not removed:
        return None
    return SymbolRelationTree(root)


def _strip_scripts(node: SrtNode) -> tuple[SrtNode, bool]:
    removed = False
    children = {}
    for rel, child in node.children.items():
        if rel in SCRIPT_RELATIONS:
            removed = True
            continue
        copy, sub_removed = _strip_scripts(child)
        children[rel] = copy
        removed = removed or sub_removed
    return SrtNode(node.symbol_id, node.label, children), removed


def script_parts_of(srt: SymbolRelationTree) -> list[SymbolRelationTree]:
    """One standalone tree per script/over/under/inside edge anywhere in the tree."""
    parts: list[tuple[SymbolRelationTree, str]] = []
    _collect_parts(srt.root, parts)
    return [tree for tree, _ in parts]


def _collect_parts(
    node: SrtNode, parts: list[tuple[SymbolRelationTree, str]]
) -> None:
    for rel in PART_RELATIONS:
        child = node.child(rel)
        if child is not None:
            parts.append(
                (SymbolRelationTree(child.copy()), f"{node.symbol_id}:{rel.value}")
            )
    for rel in (*PART_RELATIONS, RelationLabel.RIGHT):
        child = node.child(rel)
        if child is not None:
            _collect_parts(child, parts)


def _is_fraction_bar(node: SrtNode) -> bool:
    return node.label == FRACTION_BAR_LABEL and (
        node.child(RelationLabel.OVER) is not None
        or node.child(RelationLabel.UNDER) is not None
    )


def operator_splits_of(srt: SymbolRelationTree) -> list[SymbolRelationTree]:
    """Left/right pieces around each top-level binary operator outside brackets.

    Only the root baseline is cut; the pieces keep their scripts. The
    operator itself belongs to neither piece.
    """
    return [tree for tree, _ in _operator_splits(srt)]


def _operator_splits(
    srt: SymbolRelationTree,
) -> list[tuple[SymbolRelationTree, str]]:
    chain: list[SrtNode] = []
    node: SrtNode | None = srt.root
    while node is not None:
        chain.append(node)
        node = node.child(RelationLabel.RIGHT)

    splits: list[tuple[SymbolRelationTree, str]] = []
    depth = 0
    bar_open = False
    for i, n in enumerate(chain):
        if n.label in OPEN_BRACKETS:
            depth += 1
            continue
        if n.label in CLOSE_BRACKETS:
            depth = max(0, depth - 1)
            continue
        if n.label == BAR_BRACKET:
            bar_open = not bar_open
            continue
        if depth > 0 or bar_open:
            continue
        if n.label in BINARY_OPERATORS and not _is_fraction_bar(n):
            if i > 0:
                splits.append((_chain_piece(chain[:i]), f"{n.symbol_id}:left"))
            if i + 1 < len(chain):
                splits.append((_chain_piece(chain[i + 1 :]), f"{n.symbol_id}:right"))
    return splits


def _chain_piece(nodes: list[SrtNode]) -> SymbolRelationTree:
    copies = []
    for n in nodes:
        copy = n.copy()
        copy.children.pop(RelationLabel.RIGHT, None)
        copies.append(copy)
    for a, b in zip(copies, copies[1:]):
        a.attach(RelationLabel.RIGHT, b)
    return SymbolRelationTree(copies[0])


@dataclass
class DecompositionResult:
    sub_hmes: list[OnlineHME]
    rule_trace: list[tuple[int, str]]  # (rule number, anchor) per sub-HME


def decompose(hme: OnlineHME) -> DecompositionResult:
    """All sub-expressions of one expression, filtered and deduplicated.

    Single pass: the three generation rules run once on the input (never
    on their own outputs), then sub-expressions with a single symbol are
    discarded and duplicates by (latex, symbol set) removed.
    """
    if hme.srt is None:
        raise StructureError("expression has no symbol relation tree")

    candidates: list[tuple[SymbolRelationTree, int, str]] = []
    base = baseline_of(hme.srt)
    if base is not None:
        candidates.append((base, 1, "baseline"))

    parts: list[tuple[SymbolRelationTree, str]] = []
    _collect_parts(hme.srt.root, parts)
    for tree, anchor in parts:
        candidates.append((tree, 2, anchor))

    for tree, anchor in _operator_splits(hme.srt):
        candidates.append((tree, 3, anchor))

    sub_hmes: list[OnlineHME] = []
    trace: list[tuple[int, str]] = []
    seen: set[tuple[str, frozenset[str]]] = set()
    for tree, rule, anchor in candidates:
        ids = tree.symbol_ids()
        if len(ids) < 2:
            continue
        sub = extract_sub_hme(hme, tree, rule, anchor)
        key = (sub.latex, frozenset(ids))
        if key in seen:
            continue
        seen.add(key)
        sub_hmes.append(sub)
        trace.append((rule, anchor))
    return DecompositionResult(sub_hmes, trace)


def extract_sub_hme(
    hme: OnlineHME, tree: SymbolRelationTree, rule: int, anchor: str
) -> OnlineHME:
    """Materialize a subtree as a standalone expression with its own strokes.

    Strokes keep their original coordinates and relative order; indices
    are remapped to the new stroke list.
    """
    wanted = set(tree.symbol_ids())
    symbols_in_order = [s for s in hme.symbols if s.id in wanted]
    if len(symbols_in_order) != len(wanted):
        raise StructureError("subtree references symbols missing from the expression")

    old_indices = sorted(i for s in symbols_in_order for i in s.strokes)
    index_map = {old: new for new, old in enumerate(old_indices)}
    strokes = [Stroke(hme.strokes[i].points) for i in old_indices]
    symbols = [
        Symbol(s.id, s.label, tuple(index_map[i] for i in s.strokes))
        for s in symbols_in_order
    ]
    sub_tree = tree.copy()
    provenance = dict(hme.provenance)
    provenance["rule"] = str(rule)
    provenance["anchor"] = anchor
    sub = OnlineHME(
        strokes=strokes,
        symbols=symbols,
        srt=sub_tree,
        latex=latex_of(sub_tree),
        provenance=provenance,
    )
    sub.validate()
    return sub
