"""Resource lists: the positioned, typed, URL-bearing inventory of a webpage.

A resource list pairs every navigational or visual element of a page (links,
images, backend routes) with its bounding box and target URL. It is the unit
of interchange between dataset construction, prompt assembly, and evaluation.

Wire format (UTF-8 JSON, one document per page)::

    {
      "origin": "https://example.com/",
      "width": 1280,
      "height": 2400,
      "entries": [
        {"position": [[x1, y1], [x2, y2]], "type": "image", "url": "/dog.png", "text": "..."}
      ]
    }

``text`` is optional and carried for link entries when known. Coordinates are
CSS pixels in page space (origin top-left); fractional values are allowed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Optional
from urllib.parse import urljoin, urlsplit, urlunsplit


class ResourceListFormatError(ValueError):
    """Raised when a resource-list document does not match the wire format."""


class UrlNormalizationError(ValueError):
    """Raised when a URL cannot be parsed well enough to normalize."""


class ResourceKind(str, Enum):
    INTERNAL_LINK = "internal-link"
    EXTERNAL_LINK = "external-link"
    BACKEND_ROUTE = "backend-route"
    IMAGE = "image"
    BACKGROUND_IMAGE = "background-image"


LINK_KINDS = frozenset(
    {ResourceKind.INTERNAL_LINK, ResourceKind.EXTERNAL_LINK, ResourceKind.BACKEND_ROUTE}
)
IMAGE_KINDS = frozenset({ResourceKind.IMAGE, ResourceKind.BACKGROUND_IMAGE})


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box [[x1, y1], [x2, y2]] in page coordinates."""

    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)

    @property
    def area(self) -> float:
        return max(0.0, self.x2 - self.x1) * max(0.0, self.y2 - self.y1)

    def clamped(self, width: float, height: float) -> "BoundingBox":
        """Clamp to [0, width] x [0, height]; may produce a zero-area box."""
        return BoundingBox(
            x1=min(max(self.x1, 0.0), width),
            y1=min(max(self.y1, 0.0), height),
            x2=min(max(self.x2, 0.0), width),
            y2=min(max(self.y2, 0.0), height),
        )

    def within(self, width: float, height: float) -> bool:
        return 0 <= self.x1 and 0 <= self.y1 and self.x2 <= width and self.y2 <= height

    def as_pairs(self) -> list[list[float]]:
        return [[self.x1, self.y1], [self.x2, self.y2]]


@dataclass(frozen=True)
class ResourceEntry:
    position: BoundingBox
    kind: ResourceKind
    url: str
    text: Optional[str] = None


@dataclass(frozen=True)
class ResourceList:
    """Ordered resource entries plus page dimensions and owning page URL."""

    origin: str
    width: float
    height: float
    entries: tuple[ResourceEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    entry_index: Optional[int] = None


@dataclass(frozen=True)
class ValidationReport:
    """Invariant breaches plus indices of entries clamped for being off-page.

    ``violations`` is empty iff every type invariant holds. Off-page entries
    are not violations: they are retained, clamped where geometry demands it,
    and surfaced through ``clamped_indices``.
    """

    violations: tuple[Violation, ...] = ()
    clamped_indices: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def validate(resource_list: ResourceList) -> ValidationReport:
    """Check every invariant of a resource list; violations are data, not errors."""
    violations: list[Violation] = []
    clamped: list[int] = []

    if not (resource_list.width > 0 and resource_list.height > 0):
        violations.append(
            Violation(
                code="page-size",
                message=f"page dimensions must be positive, got "
                f"{resource_list.width}x{resource_list.height}",
            )
        )

    for i, entry in enumerate(resource_list.entries):
        box = entry.position
        if not _finite(box.x1, box.y1, box.x2, box.y2):
            violations.append(
                Violation("box-nonfinite", f"entry {i}: non-finite coordinate", i)
            )
            continue
        if box.x1 < 0 or box.y1 < 0 or box.x2 < 0 or box.y2 < 0:
            violations.append(
                Violation("box-negative", f"entry {i}: negative coordinate", i)
            )
        if box.x1 > box.x2 or box.y1 > box.y2:
            violations.append(
                Violation(
                    "box-order",
                    f"entry {i}: expected x1 <= x2 and y1 <= y2, got "
                    f"[[{box.x1}, {box.y1}], [{box.x2}, {box.y2}]]",
                    i,
                )
            )
        if not entry.url:
            violations.append(Violation("empty-url", f"entry {i}: empty url", i))
        if not isinstance(entry.kind, ResourceKind):
            violations.append(
                Violation("bad-kind", f"entry {i}: unknown kind {entry.kind!r}", i)
            )
        if (
            resource_list.width > 0
            and resource_list.height > 0
            and _finite(box.x1, box.y1, box.x2, box.y2)
            and not box.within(resource_list.width, resource_list.height)
        ):
            clamped.append(i)

    return ValidationReport(tuple(violations), tuple(clamped))


def _strip_trailing_slashes(path: str) -> str:
    while len(path) > 1 and path.endswith("/"):
        path = path[:-1]
    return path


_DEFAULT_PORTS = {"http": 80, "https": 443}


def normalize_url(raw: str, origin: str) -> str:
    """Resolve ``raw`` against ``origin`` and canonicalize it.

    Lowercases scheme and host, drops default ports, strips fragments and
    trailing slashes on non-root paths, preserves query strings. Idempotent,
    so normalized URLs can be compared for identity during matching.
    """
    if not raw:
        raise UrlNormalizationError("cannot normalize empty URL")
    try:
        origin_parts = urlsplit(origin)
    except ValueError as exc:
        raise UrlNormalizationError(f"invalid origin URL {origin!r}: {exc}") from exc
    if not origin_parts.scheme:
        raise UrlNormalizationError(f"origin URL {origin!r} is not absolute")

    try:
        resolved = urljoin(origin, raw)
        parts = urlsplit(resolved)
        hostname = parts.hostname
        port = parts.port
    except ValueError as exc:
        raise UrlNormalizationError(f"cannot normalize URL {raw!r}: {exc}") from exc

    scheme = parts.scheme.lower()

    netloc = ""
    if parts.netloc:
        host = hostname or ""
        if ":" in host:  # IPv6 literal, re-bracket
            host = f"[{host}]"
        userinfo = ""
        if parts.username is not None:
            userinfo = parts.username
            if parts.password is not None:
                userinfo += f":{parts.password}"
            userinfo += "@"
        if port is not None and port != _DEFAULT_PORTS.get(scheme):
            netloc = f"{userinfo}{host}:{port}"
        else:
            netloc = f"{userinfo}{host}"

    path = parts.path
    if netloc and not path:
        path = "/"
    path = _strip_trailing_slashes(path)

    return urlunsplit((scheme, netloc, path, parts.query, ""))


def classify_link(
    target: str, origin: str, route_prefixes: Iterable[str] = ()
) -> ResourceKind:
    """Classify a normalized link target relative to its page of origin.

    Same host and a path under a configured route prefix: backend-route.
    Same host otherwise: internal-link. Anything else (including hostless
    schemes such as mailto): external-link.
    """
    target_host = (urlsplit(target).hostname or "").lower()
    origin_host = (urlsplit(origin).hostname or "").lower()
    if not target_host or target_host != origin_host:
        return ResourceKind.EXTERNAL_LINK

    path = urlsplit(target).path or "/"
    for prefix in route_prefixes:
        p = "/" + prefix.strip("/") if prefix.strip("/") else "/"
        if p == "/" or path == p or path.startswith(p + "/"):
            return ResourceKind.BACKEND_ROUTE
    return ResourceKind.INTERNAL_LINK


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ResourceListFormatError(message)


def _coerce_number(value: Any, what: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             f"{what} must be a number, got {value!r}")
    return value


def entry_from_obj(obj: dict[str, Any], index: int = 0) -> ResourceEntry:
    _require(isinstance(obj, dict), f"entry {index} must be an object")
    _require("position" in obj, f"entry {index} missing 'position'")
    _require("type" in obj, f"entry {index} missing 'type'")
    _require("url" in obj, f"entry {index} missing 'url'")
    pos = obj["position"]
    _require(
        isinstance(pos, list) and len(pos) == 2
        and all(isinstance(p, list) and len(p) == 2 for p in pos),
        f"entry {index}: position must be [[x1, y1], [x2, y2]]",
    )
    (x1, y1), (x2, y2) = pos
    box = BoundingBox(
        _coerce_number(x1, f"entry {index} x1"),
        _coerce_number(y1, f"entry {index} y1"),
        _coerce_number(x2, f"entry {index} x2"),
        _coerce_number(y2, f"entry {index} y2"),
    )
    try:
        kind = ResourceKind(obj["type"])
    except ValueError:
        raise ResourceListFormatError(
            f"entry {index}: unknown resource type {obj['type']!r}"
        ) from None
    url = obj["url"]
    _require(isinstance(url, str), f"entry {index}: url must be a string")
    text = obj.get("text")
    _require(text is None or isinstance(text, str),
             f"entry {index}: text must be a string when present")
    return ResourceEntry(position=box, kind=kind, url=url, text=text)


def entry_to_obj(entry: ResourceEntry) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "position": entry.position.as_pairs(),
        "type": entry.kind.value,
        "url": entry.url,
    }
    if entry.text is not None:
        obj["text"] = entry.text
    return obj


def parse_resource_list(text: str) -> ResourceList:
    """Parse the wire format; malformed documents raise ResourceListFormatError."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ResourceListFormatError(f"invalid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "top-level value must be an object")
    for key in ("origin", "width", "height", "entries"):
        _require(key in doc, f"missing key {key!r}")
    _require(isinstance(doc["origin"], str), "'origin' must be a string")
    width = _coerce_number(doc["width"], "'width'")
    height = _coerce_number(doc["height"], "'height'")
    _require(isinstance(doc["entries"], list), "'entries' must be an array")
    entries = tuple(
        entry_from_obj(e, i) for i, e in enumerate(doc["entries"])
    )
    return ResourceList(origin=doc["origin"], width=width, height=height, entries=entries)


def serialize_resource_list(resource_list: ResourceList) -> str:
    """Canonical serialization: fixed key order, 2-space indent, trailing newline."""
    doc = {
        "origin": resource_list.origin,
        "width": resource_list.width,
        "height": resource_list.height,
        "entries": [entry_to_obj(e) for e in resource_list.entries],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def serialize_action_list(resource_list: ResourceList) -> str:
    """Serialize only the entries array, the shape substituted into prompts."""
    return json.dumps(
        [entry_to_obj(e) for e in resource_list.entries], indent=2, ensure_ascii=False
    )
