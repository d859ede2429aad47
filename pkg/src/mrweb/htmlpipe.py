"""Parser-based dataset construction for webpages.

Holds a small, error-tolerant HTML document model built on the standard
library parser, the source simplifier that strips invisible noise, the
synthetic link/image rewriters, and the converter from renderer geometry
dumps to resource lists.

Geometry dump wire format (UTF-8 JSON)::

    {
      "origin": "https://example.com/",
      "viewport": {"width": 1280, "height": 2400},
      "elements": [
        {"tag": "a", "box": [[x1, y1], [x2, y2]], "visible": true,
         "href": "...", "src": "...", "backgroundImage": "...", "text": "..."}
      ]
    }
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Any, Iterator, Optional, Union

from .resources import (
    BoundingBox,
    ResourceEntry,
    ResourceKind,
    ResourceList,
    UrlNormalizationError,
    classify_link,
    normalize_url,
)


class GeometryDumpError(ValueError):
    """Raised when a geometry dump document is structurally invalid."""


# ---------------------------------------------------------------------------
# Document model


@dataclass
class TextNode:
    text: str


@dataclass
class CommentNode:
    text: str


@dataclass
class RawNode:
    """Doctype declarations, processing instructions, CDATA: kept verbatim."""

    markup: str


@dataclass
class Element:
    tag: str
    attrs: list[tuple[str, Optional[str]]] = field(default_factory=list)
    children: list["Node"] = field(default_factory=list)

    def get(self, name: str) -> Optional[str]:
        for key, value in self.attrs:
            if key == name:
                return value if value is not None else ""
        return None

    def has(self, name: str) -> bool:
        return any(key == name for key, _ in self.attrs)

    def set(self, name: str, value: str) -> None:
        for i, (key, _) in enumerate(self.attrs):
            if key == name:
                self.attrs[i] = (name, value)
                return
        self.attrs.append((name, value))


Node = Union[Element, TextNode, CommentNode, RawNode]


@dataclass
class HtmlDocument:
    children: list[Node] = field(default_factory=list)
    source: Optional[str] = None

    def walk_elements(self) -> Iterator[Element]:
        yield from _walk_elements(self.children)


def _walk_elements(children: list[Node]) -> Iterator[Element]:
    for node in children:
        if isinstance(node, Element):
            yield node
            yield from _walk_elements(node.children)


_VOID_TAGS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)
_RAW_TEXT_TAGS = frozenset({"script", "style"})


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.document = HtmlDocument()
        self._stack: list[Element] = []

    def _children(self) -> list[Node]:
        return self._stack[-1].children if self._stack else self.document.children

    def _append(self, node: Node) -> None:
        children = self._children()
        if (
            isinstance(node, TextNode)
            and children
            and isinstance(children[-1], TextNode)
        ):
            children[-1].text += node.text
        else:
            children.append(node)

    def handle_starttag(self, tag: str, attrs: list[tuple[str, Optional[str]]]) -> None:
        element = Element(tag=tag, attrs=list(attrs))
        self._append(element)
        if tag not in _VOID_TAGS:
            self._stack.append(element)

    def handle_startendtag(self, tag: str, attrs: list[tuple[str, Optional[str]]]) -> None:
        self._append(Element(tag=tag, attrs=list(attrs)))

    def handle_endtag(self, tag: str) -> None:
        # tolerate stray end tags; close intermediate unclosed elements
        for i in range(len(self._stack) - 1, -1, -1):
            if self._stack[i].tag == tag:
                del self._stack[i:]
                return

    def handle_data(self, data: str) -> None:
        if data:
            self._append(TextNode(data))

    def handle_comment(self, data: str) -> None:
        self._append(CommentNode(data))

    def handle_decl(self, decl: str) -> None:
        self._append(RawNode(f"<!{decl}>"))

    def handle_pi(self, data: str) -> None:
        self._append(RawNode(f"<?{data}>"))

    def unknown_decl(self, data: str) -> None:
        self._append(RawNode(f"<![{data}]>"))


def parse_html(text: str) -> HtmlDocument:
    """Parse markup tolerantly; malformed input never raises."""
    builder = _TreeBuilder()
    builder.feed(text)
    builder.close()
    builder.document.source = text
    return builder.document


def _escape_text(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _escape_attr(value: str) -> str:
    return value.replace("&", "&amp;").replace('"', "&quot;")


def _serialize_into(node: Node, out: list[str], raw: bool) -> None:
    if isinstance(node, TextNode):
        out.append(node.text if raw else _escape_text(node.text))
    elif isinstance(node, CommentNode):
        out.append(f"<!--{node.text}-->")
    elif isinstance(node, RawNode):
        out.append(node.markup)
    else:
        out.append(f"<{node.tag}")
        for name, value in node.attrs:
            if value is None:
                out.append(f" {name}")
            else:
                out.append(f' {name}="{_escape_attr(value)}"')
        out.append(">")
        if node.tag in _VOID_TAGS:
            return
        child_raw = node.tag in _RAW_TEXT_TAGS
        for child in node.children:
            _serialize_into(child, out, child_raw)
        out.append(f"</{node.tag}>")


def serialize_html(doc: HtmlDocument) -> str:
    out: list[str] = []
    for node in doc.children:
        _serialize_into(node, out, raw=False)
    return "".join(out)


def _clone_node(node: Node) -> Node:
    if isinstance(node, TextNode):
        return TextNode(node.text)
    if isinstance(node, CommentNode):
        return CommentNode(node.text)
    if isinstance(node, RawNode):
        return RawNode(node.markup)
    return Element(
        tag=node.tag,
        attrs=list(node.attrs),
        children=[_clone_node(c) for c in node.children],
    )


def clone_document(doc: HtmlDocument) -> HtmlDocument:
    return HtmlDocument(children=[_clone_node(n) for n in doc.children], source=doc.source)


def count_nodes(doc: HtmlDocument) -> int:
    def count(nodes: list[Node]) -> int:
        total = 0
        for node in nodes:
            total += 1
            if isinstance(node, Element):
                total += count(node.children)
        return total

    return count(doc.children)


def visible_text(doc: HtmlDocument) -> str:
    """All text content outside script/style subtrees, concatenated."""
    parts: list[str] = []

    def walk(nodes: list[Node]) -> None:
        for node in nodes:
            if isinstance(node, TextNode):
                parts.append(node.text)
            elif isinstance(node, Element) and node.tag not in _RAW_TEXT_TAGS:
                walk(node.children)

    walk(doc.children)
    return "".join(parts)


# ---------------------------------------------------------------------------
# Simplification


_HIDDEN_STYLE = re.compile(
    r"(?:^|;)\s*(?:display\s*:\s*none|visibility\s*:\s*hidden)\s*(?:;|$)",
    re.IGNORECASE,
)

_KEPT_META_NAMES = {"viewport"}


def _is_hidden(element: Element) -> bool:
    if element.has("hidden"):
        return True
    style = element.get("style")
    return style is not None and _HIDDEN_STYLE.search(style) is not None


def _keep_metadata(element: Element) -> bool:
    if element.tag == "meta":
        if element.has("charset"):
            return True
        name = (element.get("name") or "").lower()
        return name in _KEPT_META_NAMES
    if element.tag == "link":
        rel = (element.get("rel") or "").lower().split()
        return "stylesheet" in rel
    if element.tag == "base":
        return False
    return True


def _simplify_children(children: list[Node]) -> list[Node]:
    result: list[Node] = []
    for node in children:
        if isinstance(node, CommentNode):
            continue
        if isinstance(node, Element):
            if node.tag in ("script", "noscript"):
                continue
            if _is_hidden(node):
                continue
            if node.tag in ("meta", "link", "base") and not _keep_metadata(node):
                continue
            result.append(
                Element(tag=node.tag, attrs=list(node.attrs),
                        children=_simplify_children(node.children))
            )
        else:
            result.append(_clone_node(node))

    # merge adjacent text nodes exposed by removals, then canonicalize
    # whitespace-only runs between elements to a single newline
    merged: list[Node] = []
    for node in result:
        if isinstance(node, TextNode) and merged and isinstance(merged[-1], TextNode):
            merged[-1].text += node.text
        else:
            merged.append(node)
    for node in merged:
        if isinstance(node, TextNode) and node.text.strip() == "":
            node.text = "\n"
    return merged


def _simplify_once(doc: HtmlDocument) -> HtmlDocument:
    return HtmlDocument(children=_simplify_children(doc.children), source=doc.source)


def simplify_html(doc: HtmlDocument) -> HtmlDocument:
    """Strip comments, scripts, hidden elements, and dispensable metadata.

    Keeps charset/viewport meta, the title, and stylesheets; collapses runs of
    whitespace between elements. The result is a serialization fixed point, so
    re-simplifying the output changes nothing, byte for byte.
    """
    simplified = _simplify_once(doc)
    text = serialize_html(simplified)
    for _ in range(4):
        again = _simplify_once(parse_html(text))
        again_text = serialize_html(again)
        if again_text == text:
            return again
        simplified, text = again, again_text
    return simplified


# ---------------------------------------------------------------------------
# Synthetic rewrites


def insert_links(doc: HtmlDocument, url_pool: list[str], seed: int) -> HtmlDocument:
    """Point every anchor's href at a pool URL drawn from a seeded generator."""
    if not url_pool:
        raise ValueError("url pool is empty")
    rng = random.Random(seed)
    out = clone_document(doc)
    for element in out.walk_elements():
        if element.tag == "a":
            element.set("href", rng.choice(url_pool))
    return out


@dataclass(frozen=True)
class ImageReplacement:
    document: HtmlDocument
    warnings: tuple[str, ...] = ()


_BACKGROUND_DECL = re.compile(r"(background(?:-image)?\s*:)([^;]*)", re.IGNORECASE)
_CSS_URL = re.compile(r"url\(\s*(['\"]?)([^)'\"]*)\1\s*\)", re.IGNORECASE)


class _ImageAssigner:
    """Hands out map URLs sequentially; reshuffles (seeded) when exhausted."""

    def __init__(self, image_map: list[str], seed: int):
        self._pool = list(image_map)
        self._rng = random.Random(seed)
        self._queue = list(self._pool)
        self.wrapped = False

    def next_url(self) -> str:
        if not self._queue:
            self.wrapped = True
            self._queue = list(self._pool)
            self._rng.shuffle(self._queue)
        return self._queue.pop(0)


def replace_images(doc: HtmlDocument, image_map: list[str], seed: int) -> ImageReplacement:
    """Swap every img src and inline-style background image for map entries.

    Entries are consumed in order, each once; if the document holds more
    images than the map, assignment wraps with a seeded shuffle and the result
    carries a reuse warning.
    """
    if not image_map:
        raise ValueError("image map is empty")
    assigner = _ImageAssigner(image_map, seed)
    out = clone_document(doc)

    for element in out.walk_elements():
        if element.tag == "img" and element.get("src") is not None:
            element.set("src", assigner.next_url())
        style = element.get("style")
        if style and _BACKGROUND_DECL.search(style):

            def rewrite_decl(decl: re.Match[str]) -> str:
                head, value = decl.group(1), decl.group(2)
                value = _CSS_URL.sub(
                    lambda m: f"url('{assigner.next_url()}')", value
                )
                return head + value

            element.set("style", _BACKGROUND_DECL.sub(rewrite_decl, style))

    warnings = (
        ("image map exhausted; entries were reused in seeded-shuffle order",)
        if assigner.wrapped
        else ()
    )
    return ImageReplacement(document=out, warnings=warnings)


# ---------------------------------------------------------------------------
# Geometry dumps and resource extraction


@dataclass(frozen=True)
class GeometryElement:
    tag: str
    box: BoundingBox
    visible: bool
    href: Optional[str] = None
    src: Optional[str] = None
    background_image: Optional[str] = None
    text: Optional[str] = None


@dataclass(frozen=True)
class GeometryDump:
    origin: str
    viewport_width: float
    viewport_height: float
    elements: tuple[GeometryElement, ...]


def _geometry_number(value: Any, where: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise GeometryDumpError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _geometry_optional_str(obj: dict[str, Any], key: str, where: str) -> Optional[str]:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise GeometryDumpError(f"{where}: {key!r} must be a string")
    return value


def parse_geometry_dump(text: str) -> GeometryDump:
    """Parse the renderer's per-element dump; errors name the element index."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GeometryDumpError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise GeometryDumpError("top-level value must be an object")
    for key in ("origin", "viewport", "elements"):
        if key not in doc:
            raise GeometryDumpError(f"missing key {key!r}")
    viewport = doc["viewport"]
    if not isinstance(viewport, dict) or not {"width", "height"} <= viewport.keys():
        raise GeometryDumpError("'viewport' must be an object with width and height")
    width = _geometry_number(viewport["width"], "viewport width")
    height = _geometry_number(viewport["height"], "viewport height")
    if not isinstance(doc["elements"], list):
        raise GeometryDumpError("'elements' must be an array")

    elements = []
    for i, item in enumerate(doc["elements"]):
        where = f"element {i}"
        if not isinstance(item, dict):
            raise GeometryDumpError(f"{where}: must be an object")
        for key in ("tag", "box", "visible"):
            if key not in item:
                raise GeometryDumpError(f"{where}: missing {key!r}")
        if not isinstance(item["tag"], str):
            raise GeometryDumpError(f"{where}: 'tag' must be a string")
        if not isinstance(item["visible"], bool):
            raise GeometryDumpError(f"{where}: 'visible' must be a boolean")
        box = item["box"]
        if (
            not isinstance(box, list)
            or len(box) != 2
            or any(not isinstance(p, list) or len(p) != 2 for p in box)
        ):
            raise GeometryDumpError(f"{where}: 'box' must be [[x1, y1], [x2, y2]]")
        (x1, y1), (x2, y2) = box
        bbox = BoundingBox(
            _geometry_number(x1, f"{where} x1"),
            _geometry_number(y1, f"{where} y1"),
            _geometry_number(x2, f"{where} x2"),
            _geometry_number(y2, f"{where} y2"),
        )
        if bbox.x1 > bbox.x2 or bbox.y1 > bbox.y2:
            raise GeometryDumpError(f"{where}: box corners out of order")
        if min(bbox.x1, bbox.y1) < 0:
            raise GeometryDumpError(f"{where}: negative coordinates")
        elements.append(
            GeometryElement(
                tag=item["tag"].lower(),
                box=bbox,
                visible=item["visible"],
                href=_geometry_optional_str(item, "href", where),
                src=_geometry_optional_str(item, "src", where),
                background_image=_geometry_optional_str(item, "backgroundImage", where),
                text=_geometry_optional_str(item, "text", where),
            )
        )
    if not isinstance(doc["origin"], str):
        raise GeometryDumpError("'origin' must be a string")
    return GeometryDump(
        origin=doc["origin"],
        viewport_width=width,
        viewport_height=height,
        elements=tuple(elements),
    )


def extract_resources(
    dump: GeometryDump, route_prefixes: tuple[str, ...] = ("/api",)
) -> ResourceList:
    """Build a resource list from a geometry dump.

    Keeps visible, positive-area elements; anchors become link entries (kind
    from the link classifier, visible text attached), img elements become
    image entries, and background-image bearers become background entries.
    URLs are normalized against the dump origin.
    """
    entries: list[ResourceEntry] = []
    for i, element in enumerate(dump.elements):
        if not element.visible or element.box.area <= 0:
            continue
        try:
            if element.tag == "a" and element.href:
                url = normalize_url(element.href, dump.origin)
                text = element.text.strip() if element.text else None
                entries.append(
                    ResourceEntry(
                        position=element.box,
                        kind=classify_link(url, dump.origin, route_prefixes),
                        url=url,
                        text=text or None,
                    )
                )
            if element.tag == "img" and element.src:
                entries.append(
                    ResourceEntry(
                        position=element.box,
                        kind=ResourceKind.IMAGE,
                        url=normalize_url(element.src, dump.origin),
                    )
                )
            if element.background_image:
                entries.append(
                    ResourceEntry(
                        position=element.box,
                        kind=ResourceKind.BACKGROUND_IMAGE,
                        url=normalize_url(element.background_image, dump.origin),
                    )
                )
        except UrlNormalizationError as exc:
            raise GeometryDumpError(f"element {i}: {exc}") from exc
    return ResourceList(
        origin=dump.origin,
        width=dump.viewport_width,
        height=dump.viewport_height,
        entries=tuple(entries),
    )
