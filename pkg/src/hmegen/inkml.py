"""InkML reading and writing for CROHME-style online expressions.

Reading accepts the CROHME dialect: <trace> elements, nested <traceGroup>
segmentation with per-symbol truth annotations, a top-level truth string,
and an optional MathML truth annotation whose xml:id attributes are linked
from trace groups via <annotationXML href=...>. The relation tree is built
from the MathML linkage when available, otherwise from the truth string
with label+order alignment.

Writing produces files this module parses back to an equal expression:
coordinates at nine decimals, provenance as annotations, and a MathML
truth subtree carrying explicit symbol links.
"""

from __future__ import annotations

import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from .decompose import latex_of
from .errors import AlignmentError, InkmlParseError, StructureError
from .ink import (
    OnlineHME,
    RelationLabel,
    Stroke,
    SrtNode,
    Symbol,
    SymbolRelationTree,
)
from .latex import (
    BIG_OPERATORS,
    FRACTION_BAR_LABEL,
    RADICAL_LABEL,
    attach_script,
    normalize_symbol,
    parse_latex,
)

logger = logging.getLogger("hmegen")

INKML_NS = "http://www.w3.org/2003/InkML"
XML_ID = "{http://www.w3.org/XML/1998/namespace}id"

COORD_FORMAT = "{:.9f}"


@dataclass
class SymbolGroup:
    """One leaf traceGroup: a labeled symbol with its trace references."""

    id: str
    label: str
    trace_refs: list[str]
    href: str | None = None


@dataclass
class InkmlDocument:
    """Raw parsed file contents before assembly into an OnlineHME."""

    traces: dict[str, Stroke]
    trace_order: list[str]
    trace_groups: list[SymbolGroup]
    annotations: dict[str, str] = field(default_factory=dict)
    math_truth: ET.Element | None = None


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _elem_id(elem: ET.Element) -> str | None:
    return elem.get(XML_ID) or elem.get("xml:id") or elem.get("id")


def _byte_offset(data: bytes, line: int, column: int) -> int:
    lines = data.split(b"\n")
    return sum(len(l) + 1 for l in lines[: line - 1]) + column


def parse_inkml_document(data: bytes) -> InkmlDocument:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        offset = _byte_offset(data, line, col)
        raise InkmlParseError(
            f"malformed XML at byte {offset} (line {line}, column {col}): {exc}"
        ) from exc
    if _local(root.tag) != "ink":
        raise InkmlParseError(f"root element is {_local(root.tag)!r}, expected 'ink'")

    doc = InkmlDocument(traces={}, trace_order=[], trace_groups=[])
    for child in root:
        tag = _local(child.tag)
        if tag == "annotation":
            key = child.get("type", "")
            doc.annotations[key] = (child.text or "").strip()
        elif tag == "annotationXML":
            for sub in child:
                if _local(sub.tag) == "math":
                    doc.math_truth = sub
        elif tag == "trace":
            tid = child.get("id") or _elem_id(child) or str(len(doc.trace_order))
            try:
                stroke = _parse_trace_text(child.text or "")
            except ValueError as exc:
                raise InkmlParseError(f"trace {tid!r}: {exc}") from exc
            doc.traces[tid] = stroke
            doc.trace_order.append(tid)
        elif tag == "traceGroup":
            _collect_leaf_groups(child, doc.trace_groups)
    return doc


def _parse_trace_text(text: str) -> Stroke:
    points = []
    for chunk in text.split(","):
        parts = chunk.split()
        if not parts:
            continue
        if len(parts) < 2:
            raise ValueError(f"point {chunk.strip()!r} has fewer than two coordinates")
        points.append((float(parts[0]), float(parts[1])))
    return Stroke(points)


def _collect_leaf_groups(elem: ET.Element, out: list[SymbolGroup]) -> None:
    children = [c for c in elem if _local(c.tag) == "traceGroup"]
    if children:
        for child in children:
            _collect_leaf_groups(child, out)
        return
    label = ""
    refs: list[str] = []
    href = None
    for child in elem:
        tag = _local(child.tag)
        if tag == "annotation" and child.get("type") == "truth":
            label = (child.text or "").strip()
        elif tag == "traceView":
            ref = child.get("traceDataRef")
            if ref:
                refs.append(ref.lstrip("#"))
        elif tag == "annotationXML":
            href = child.get("href")
    gid = _elem_id(elem) or f"s{len(out)}"
    out.append(SymbolGroup(id=gid, label=label, trace_refs=refs, href=href))


def parse_inkml(data: bytes, require_truth: bool = True) -> OnlineHME:
    """Parse one InkML file into an online expression.

    With ``require_truth`` unset, files without a truth annotation (or
    without segmentation) come back with an empty latex string and no
    relation tree, which is enough for rasterization.
    """
    doc = parse_inkml_document(data)
    strokes = [doc.traces[tid] for tid in doc.trace_order]
    index_of = {tid: i for i, tid in enumerate(doc.trace_order)}

    symbols: list[Symbol] = []
    hrefs: dict[str, str] = {}
    for group in doc.trace_groups:
        indices = []
        for ref in group.trace_refs:
            if ref not in index_of:
                raise StructureError(
                    f"trace group {group.id!r} references unknown trace {ref!r}"
                )
            indices.append(index_of[ref])
        if not group.label:
            raise StructureError(f"trace group {group.id!r} has no truth label")
        symbols.append(Symbol(group.id, normalize_symbol(group.label), tuple(indices)))
        if group.href:
            hrefs[group.id] = group.href

    truth = doc.annotations.get("truth")
    srt: SymbolRelationTree | None = None
    if symbols and doc.math_truth is not None:
        try:
            srt = build_srt(symbols, doc.math_truth, hrefs=hrefs)
        except StructureError:
            if truth is None:
                raise
            logger.debug("MathML truth unusable, falling back to latex alignment")
    if srt is None and symbols and truth:
        srt = build_srt(symbols, truth)
    if srt is None:
        if require_truth:
            raise StructureError("missing truth annotation")
        return OnlineHME(strokes, symbols, None, "", _provenance_of(doc))

    hme = OnlineHME(strokes, symbols, srt, latex_of(srt), _provenance_of(doc))
    hme.validate()
    return hme


def _provenance_of(doc: InkmlDocument) -> dict[str, str]:
    return {
        key[len("prov:") :]: value
        for key, value in doc.annotations.items()
        if key.startswith("prov:")
    }


def read_inkml(path: str | Path, require_truth: bool = True) -> OnlineHME:
    return parse_inkml(Path(path).read_bytes(), require_truth=require_truth)


# ---------------------------------------------------------------------------
# Relation-tree construction


def build_srt(
    symbols: list[Symbol],
    math_truth: str | ET.Element,
    hrefs: dict[str, str] | None = None,
) -> SymbolRelationTree:
    """Build the relation tree for segmented symbols from ground truth.

    ``math_truth`` is either a normalized/raw LaTeX string or a MathML
    element. Symbol assignment uses the explicit xml:id linkage when every
    node and symbol carries one, and label+order matching otherwise.
    """
    if isinstance(math_truth, str):
        skeleton = parse_latex(math_truth)
    else:
        skeleton = mathml_to_tree(math_truth)

    tree = SymbolRelationTree(skeleton)
    order = _emission_order(skeleton)

    node_ids = [n.symbol_id for n in order]
    if (
        hrefs
        and all(node_ids)
        and len(set(node_ids)) == len(node_ids)
        and set(node_ids) == set(hrefs.values())
        and len(hrefs) == len(symbols)
    ):
        by_href = {href: sid for sid, href in hrefs.items()}
        by_id = {s.id: s for s in symbols}
        for node in order:
            sym = by_id[by_href[node.symbol_id]]
            if sym.label != node.label:
                raise AlignmentError(
                    f"linked symbol {sym.id!r} is {sym.label!r}, truth says {node.label!r}"
                )
            node.symbol_id = sym.id
    else:
        _align_by_label(order, symbols)

    tree.validate(symbols)
    return tree


def _align_by_label(order: list[SrtNode], symbols: list[Symbol]) -> None:
    """Match the nth truth occurrence of each label to the nth trace group
    with that label, in file order."""
    used = [False] * len(symbols)
    for node in order:
        for i, sym in enumerate(symbols):
            if not used[i] and sym.label == node.label:
                used[i] = True
                node.symbol_id = sym.id
                break
        else:
            raise AlignmentError(
                f"truth symbol {node.label!r} has no unmatched trace group"
            )
    for i, sym in enumerate(symbols):
        if not used[i]:
            raise AlignmentError(
                f"trace group {sym.id!r} ({sym.label!r}) is absent from the truth"
            )


def _emission_order(node: SrtNode) -> list[SrtNode]:
    """Nodes in the order their tokens appear in the canonical latex stream."""
    out = [node]
    for rel in (
        RelationLabel.OVER,
        RelationLabel.UNDER,
        RelationLabel.INSIDE,
        RelationLabel.SUBSCRIPT,
        RelationLabel.SUPERSCRIPT,
        RelationLabel.RIGHT,
    ):
        child = node.child(rel)
        if child is not None:
            out.extend(_emission_order(child))
    return out


def mathml_to_tree(elem: ET.Element) -> SrtNode:
    """Convert presentation MathML into a relation-tree skeleton.

    Leaf nodes keep the element's xml:id in their symbol_id slot for later
    linkage; structural elements (mfrac, msqrt) carry the id of the bar or
    radical symbol they stand for.
    """
    head = _convert_mathml(elem)
    if head is None:
        raise StructureError("empty MathML truth")
    return head


def _convert_mathml(elem: ET.Element) -> SrtNode | None:
    tag = _local(elem.tag)
    if tag in ("math", "semantics", "mrow", "mstyle", "mpadded"):
        items = [_convert_mathml(c) for c in elem if _local(c.tag) != "annotation"]
        return _chain([i for i in items if i is not None])
    if tag in ("mi", "mn", "mo", "mtext"):
        text = (elem.text or "").strip()
        if not text:
            return None
        return SrtNode(_elem_id(elem) or "", normalize_symbol(text))
    if tag in ("msup", "msub", "msubsup", "munder", "mover", "munderover"):
        children = list(elem)
        base = _convert_mathml(children[0])
        if base is None:
            raise StructureError(f"{tag} element with empty base")
        tail = base.baseline_tail()
        markers = {
            "msup": "^", "msub": "_", "msubsup": "_^",
            "munder": "_", "mover": "^", "munderover": "_^",
        }[tag]
        for marker, script_elem in zip(markers, children[1:]):
            script = _convert_mathml(script_elem)
            if script is None:
                raise StructureError(f"{tag} element with empty script")
            if tag in ("munder", "mover", "munderover"):
                rel = RelationLabel.UNDER if marker == "_" else RelationLabel.OVER
                tail.attach(rel, script)
            else:
                attach_script(tail, marker, script)
        return base
    if tag == "mfrac":
        children = list(elem)
        if len(children) != 2:
            raise StructureError("mfrac must have exactly two children")
        num = _convert_mathml(children[0])
        den = _convert_mathml(children[1])
        if num is None or den is None:
            raise StructureError("mfrac with empty part")
        node = SrtNode(_elem_id(elem) or "", FRACTION_BAR_LABEL)
        node.attach(RelationLabel.OVER, num)
        node.attach(RelationLabel.UNDER, den)
        return node
    if tag in ("msqrt", "mroot"):
        if tag == "mroot":
            raise StructureError("unsupported MathML element 'mroot'")
        items = [_convert_mathml(c) for c in elem]
        inside = _chain([i for i in items if i is not None])
        if inside is None:
            raise StructureError("msqrt with empty content")
        node = SrtNode(_elem_id(elem) or "", RADICAL_LABEL)
        node.attach(RelationLabel.INSIDE, inside)
        return node
    raise StructureError(f"unsupported MathML element {tag!r}")


def _chain(items: list[SrtNode]) -> SrtNode | None:
    if not items:
        return None
    for a, b in zip(items, items[1:]):
        a.baseline_tail().attach(RelationLabel.RIGHT, b)
    return items[0]


# ---------------------------------------------------------------------------
# Writing


def write_inkml(hme: OnlineHME) -> bytes:
    """Serialize an expression so that parsing it back is stable in strokes
    (to 1e-6), labels, tree shape, and latex."""
    root = ET.Element("ink", {"xmlns": INKML_NS})
    if hme.latex:
        truth = ET.SubElement(root, "annotation", {"type": "truth"})
        truth.text = hme.latex
    for key in sorted(hme.provenance):
        ann = ET.SubElement(root, "annotation", {"type": f"prov:{key}"})
        ann.text = hme.provenance[key]

    mathml_ids: dict[str, str] = {}
    if hme.srt is not None:
        mathml_ids = {
            node.symbol_id: f"m{i}" for i, node in enumerate(hme.srt.nodes())
        }
        ann_xml = ET.SubElement(root, "annotationXML", {"type": "truth"})
        math = ET.SubElement(ann_xml, "math")
        for item in _tree_to_mathml(hme.srt.root, mathml_ids):
            math.append(item)

    for i, stroke in enumerate(hme.strokes):
        trace = ET.SubElement(root, "trace", {"id": str(i)})
        trace.text = ", ".join(
            f"{COORD_FORMAT.format(x)} {COORD_FORMAT.format(y)}"
            for x, y in stroke.points
        )

    group_root = ET.SubElement(root, "traceGroup", {"xml:id": "TG0"})
    seg = ET.SubElement(group_root, "annotation", {"type": "truth"})
    seg.text = "Segmentation"
    for sym in hme.symbols:
        group = ET.SubElement(group_root, "traceGroup", {"xml:id": sym.id})
        label = ET.SubElement(group, "annotation", {"type": "truth"})
        label.text = sym.label
        for idx in sym.strokes:
            ET.SubElement(group, "traceView", {"traceDataRef": str(idx)})
        if sym.id in mathml_ids:
            ET.SubElement(group, "annotationXML", {"href": mathml_ids[sym.id]})

    return ET.tostring(root, encoding="UTF-8", xml_declaration=True)


def _leaf_element(label: str, mathml_id: str) -> ET.Element:
    if label.isdigit() or label == ".":
        tag = "mn"
    elif len(label) == 1 and label.isalpha():
        tag = "mi"
    elif label.startswith("\\") and label[1:].isalpha() and label not in BIG_OPERATORS:
        tag = "mi"
    else:
        tag = "mo"
    elem = ET.Element(tag, {"xml:id": mathml_id})
    elem.text = label
    return elem


def _as_single(items: list[ET.Element]) -> ET.Element:
    if len(items) == 1:
        return items[0]
    row = ET.Element("mrow")
    row.extend(items)
    return row


def _tree_to_mathml(node: SrtNode, ids: dict[str, str]) -> list[ET.Element]:
    """Elements for the chain starting at ``node`` (callers wrap as needed)."""
    items: list[ET.Element] = []
    current: SrtNode | None = node
    while current is not None:
        over = current.child(RelationLabel.OVER)
        under = current.child(RelationLabel.UNDER)
        inside = current.child(RelationLabel.INSIDE)
        mathml_id = ids[current.symbol_id]

        if current.label == FRACTION_BAR_LABEL and (over or under):
            if not (over and under):
                raise StructureError(
                    f"fraction bar {current.symbol_id!r} needs both parts"
                )
            item = ET.Element("mfrac", {"xml:id": mathml_id})
            item.append(_as_single(_tree_to_mathml(over, ids)))
            item.append(_as_single(_tree_to_mathml(under, ids)))
        elif current.label == RADICAL_LABEL and inside is not None:
            item = ET.Element("msqrt", {"xml:id": mathml_id})
            item.extend(_tree_to_mathml(inside, ids))
        elif over is not None or under is not None:
            if current.label not in BIG_OPERATORS:
                raise StructureError(
                    f"over/under on non-limit symbol {current.label!r}"
                )
            base = _leaf_element(current.label, mathml_id)
            if over is not None and under is not None:
                item = ET.Element("munderover")
                item.append(base)
                item.append(_as_single(_tree_to_mathml(under, ids)))
                item.append(_as_single(_tree_to_mathml(over, ids)))
            elif under is not None:
                item = ET.Element("munder")
                item.append(base)
                item.append(_as_single(_tree_to_mathml(under, ids)))
            else:
                item = ET.Element("mover")
                item.append(base)
                item.append(_as_single(_tree_to_mathml(over, ids)))
        else:
            item = _leaf_element(current.label, mathml_id)

        sub = current.child(RelationLabel.SUBSCRIPT)
        sup = current.child(RelationLabel.SUPERSCRIPT)
        if sub is not None and sup is not None:
            wrap = ET.Element("msubsup")
            wrap.append(item)
            wrap.append(_as_single(_tree_to_mathml(sub, ids)))
            wrap.append(_as_single(_tree_to_mathml(sup, ids)))
            item = wrap
        elif sub is not None:
            wrap = ET.Element("msub")
            wrap.append(item)
            wrap.append(_as_single(_tree_to_mathml(sub, ids)))
            item = wrap
        elif sup is not None:
            wrap = ET.Element("msup")
            wrap.append(item)
            wrap.append(_as_single(_tree_to_mathml(sup, ids)))
            item = wrap

        items.append(item)
        current = current.child(RelationLabel.RIGHT)
    return items


# ---------------------------------------------------------------------------
# Manifest


def write_manifest(rows: list[tuple[str, str]], path: str | Path) -> None:
    """Line-delimited "relative-path TAB latex" records, UTF-8, LF endings."""
    text = "".join(f"{rel}\t{latex}\n" for rel, latex in rows)
    Path(path).write_bytes(text.encode("utf-8"))


def read_manifest(path: str | Path) -> list[tuple[str, str]]:
    rows = []
    for line in Path(path).read_bytes().decode("utf-8").splitlines():
        if not line:
            continue
        rel, _, latex = line.partition("\t")
        rows.append((rel, latex))
    return rows
