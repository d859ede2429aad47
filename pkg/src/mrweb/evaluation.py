"""Pairing generated resources against reference resources and scoring pages.

Matching is URL-driven: candidates share a normalized URL and a compatible
kind, then a greedy pass assigns them in ascending order of position offset.
On top of the match this module computes the resource existence ratio and the
per-pair fine-grained differences (position, area, color, text), and bundles
everything with the visual metrics into one page-level report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Optional

from .color import delta_e_2000
from .raster import (
    EmbeddingVector,
    EmptyRegionError,
    RasterImage,
    clip_cosine,
    mae,
    mean_color_lab,
    nemd,
    pad_pair,
    psnr,
    ssim,
)
from .resources import (
    IMAGE_KINDS,
    LINK_KINDS,
    ResourceEntry,
    ResourceList,
    UrlNormalizationError,
    normalize_url,
)


class UndefinedMetric(ValueError):
    """A metric's denominator is degenerate; the value is excluded, not faked."""


class EvaluationError(RuntimeError):
    """An underlying image/resource failure, annotated with the page identity."""


@dataclass(frozen=True)
class MatchResult:
    """One-to-one pairing between reference and generated entry indices."""

    pairs: tuple[tuple[int, int], ...]
    unmatched_reference: tuple[int, ...]
    unmatched_generated: tuple[int, ...]


def _kinds_compatible(a: ResourceEntry, b: ResourceEntry) -> bool:
    # link kinds interchange, image kinds interchange; never across the divide
    if a.kind in LINK_KINDS and b.kind in LINK_KINDS:
        return True
    return a.kind in IMAGE_KINDS and b.kind in IMAGE_KINDS


def _match_key(entry: ResourceEntry, origin: str) -> str:
    try:
        return normalize_url(entry.url, origin)
    except UrlNormalizationError:
        return entry.url  # unparsable URLs still match on exact text


def position_offset(
    ref_entry: ResourceEntry, gen_entry: ResourceEntry, width: float, height: float
) -> float:
    """Largest normalized axis shift between the two bounding-box centers."""
    xp, yp = ref_entry.position.center
    xq, yq = gen_entry.position.center
    return max(abs(xp - xq) / width, abs(yp - yq) / height)


def area_difference(ref_entry: ResourceEntry, gen_entry: ResourceEntry) -> float:
    """Area mismatch relative to the reference element's area; may exceed 1."""
    area_ref = ref_entry.position.area
    if area_ref == 0:
        raise UndefinedMetric("reference entry has zero area")
    return abs(area_ref - gen_entry.position.area) / area_ref


def color_difference(
    ref_img: RasterImage,
    gen_img: RasterImage,
    ref_entry: ResourceEntry,
    gen_entry: ResourceEntry,
) -> float:
    """CIEDE2000 between the mean colors under each entry's box on its own page."""
    lab_ref = mean_color_lab(ref_img, ref_entry.position)
    lab_gen = mean_color_lab(gen_img, gen_entry.position)
    return delta_e_2000(lab_ref, lab_gen)


def _lcs_length(a: str, b: str) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0]
        for j, cb in enumerate(b, start=1):
            if ca == cb:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[len(b)]


def text_difference(ref_text: str, gen_text: str) -> float:
    """1 minus the matching-character similarity 2*LCS / (len_ref + len_gen)."""
    a = ref_text.strip()
    b = gen_text.strip()
    if not a and not b:
        return 0.0
    similarity = 2.0 * _lcs_length(a, b) / (len(a) + len(b))
    return 1.0 - similarity


def match_resources(reference: ResourceList, generated: ResourceList) -> MatchResult:
    """Greedily pair same-URL, kind-compatible entries by ascending offset.

    Ties break on the lower reference index, then the lower generated index,
    so the pairing is deterministic.
    """
    ref_keys = [_match_key(e, reference.origin) for e in reference.entries]
    gen_keys = [_match_key(e, generated.origin) for e in generated.entries]

    candidates: list[tuple[float, int, int]] = []
    for i, ref_entry in enumerate(reference.entries):
        for j, gen_entry in enumerate(generated.entries):
            if ref_keys[i] != gen_keys[j]:
                continue
            if not _kinds_compatible(ref_entry, gen_entry):
                continue
            offset = position_offset(
                ref_entry, gen_entry, reference.width, reference.height
            )
            candidates.append((offset, i, j))
    candidates.sort()

    used_ref: set[int] = set()
    used_gen: set[int] = set()
    pairs: list[tuple[int, int]] = []
    for _, i, j in candidates:
        if i in used_ref or j in used_gen:
            continue
        used_ref.add(i)
        used_gen.add(j)
        pairs.append((i, j))
    pairs.sort()

    return MatchResult(
        pairs=tuple(pairs),
        unmatched_reference=tuple(
            i for i in range(len(reference.entries)) if i not in used_ref
        ),
        unmatched_generated=tuple(
            j for j in range(len(generated.entries)) if j not in used_gen
        ),
    )


def rer(match: MatchResult, reference_size: int) -> float:
    """Resource existence ratio: matched references over total references."""
    if reference_size == 0:
        raise UndefinedMetric("RER is undefined for an empty reference list")
    return len(match.pairs) / reference_size


@dataclass(frozen=True)
class FineGrainedScores:
    """Per-pair difference sequences plus their means; None marks undefined."""

    position_offset: tuple[Optional[float], ...]
    area_difference: tuple[Optional[float], ...]
    color_difference: tuple[Optional[float], ...]
    text_difference: tuple[Optional[float], ...]
    rer: Optional[float]

    @staticmethod
    def mean_of(values: tuple[Optional[float], ...]) -> Optional[float]:
        defined = [v for v in values if v is not None]
        if not defined:
            return None
        return sum(defined) / len(defined)


@dataclass(frozen=True)
class PageArtifacts:
    """The decoded inputs for one side of an evaluation."""

    image: RasterImage
    resources: ResourceList
    embedding: Optional[EmbeddingVector] = None


@dataclass(frozen=True)
class EvaluationReport:
    page: Optional[str]
    strategy: Optional[str]
    seed: int
    visual: dict[str, Optional[float]]
    match: MatchResult
    reference_total: int
    generated_total: int
    fine_grained: FineGrainedScores
    reference_pixel_count: int
    resource_list_length: int
    flags: tuple[str, ...] = ()

    def to_obj(self) -> dict[str, Any]:
        fg = self.fine_grained
        return {
            "page": self.page,
            "strategy": self.strategy,
            "seed": self.seed,
            "visual": {
                "mae": self.visual["mae"],
                "psnr": self.visual["psnr"],
                "ssim": self.visual["ssim"],
                "nemd": self.visual["nemd"],
                "clip": self.visual["clip"],
            },
            "functional": {
                "rer": fg.rer,
                "matched": len(self.match.pairs),
                "reference_total": self.reference_total,
                "generated_total": self.generated_total,
                "pairs": [list(p) for p in self.match.pairs],
                "unmatched_reference": list(self.match.unmatched_reference),
                "unmatched_generated": list(self.match.unmatched_generated),
            },
            "fine_grained": {
                "position_offset": {
                    "values": list(fg.position_offset),
                    "mean": FineGrainedScores.mean_of(fg.position_offset),
                },
                "area_difference": {
                    "values": list(fg.area_difference),
                    "mean": FineGrainedScores.mean_of(fg.area_difference),
                },
                "color_difference": {
                    "values": list(fg.color_difference),
                    "mean": FineGrainedScores.mean_of(fg.color_difference),
                },
                "text_difference": {
                    "values": list(fg.text_difference),
                    "mean": FineGrainedScores.mean_of(fg.text_difference),
                },
            },
            "covariates": {
                "reference_pixel_count": self.reference_pixel_count,
                "resource_list_length": self.resource_list_length,
            },
            "flags": list(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), indent=2, ensure_ascii=False) + "\n"


def evaluate_pair(
    reference: PageArtifacts,
    generated: PageArtifacts,
    seed: int,
    page: Optional[str] = None,
    strategy: Optional[str] = None,
) -> EvaluationReport:
    """Score one generated page against its reference.

    Pads the screenshots deterministically, computes the visual metrics
    (reference first for the asymmetric one), matches the resource lists, and
    evaluates every fine-grained difference per matched pair. Undefined
    per-pair values are excluded from means and flagged, never zero-filled.
    """
    identity = page if page is not None else "<unnamed>"
    flags: list[str] = []
    try:
        ref_padded, gen_padded = pad_pair(reference.image, generated.image, seed)
        visual: dict[str, Optional[float]] = {
            "mae": mae(ref_padded, gen_padded),
            "psnr": psnr(ref_padded, gen_padded),
            "ssim": ssim(ref_padded, gen_padded),
            "nemd": nemd(ref_padded, gen_padded),
            "clip": None,
        }
        if reference.embedding is not None and generated.embedding is not None:
            visual["clip"] = clip_cosine(reference.embedding, generated.embedding)
        elif reference.embedding is not None or generated.embedding is not None:
            flags.append("clip skipped: embedding present for only one side")

        match = match_resources(reference.resources, generated.resources)
        try:
            rer_value: Optional[float] = rer(match, len(reference.resources))
        except UndefinedMetric:
            rer_value = None
            flags.append("rer undefined: empty reference list")

        offsets: list[Optional[float]] = []
        areas: list[Optional[float]] = []
        colors: list[Optional[float]] = []
        texts: list[Optional[float]] = []
        for pair_index, (i, j) in enumerate(match.pairs):
            ref_entry = reference.resources.entries[i]
            gen_entry = generated.resources.entries[j]
            offsets.append(
                position_offset(
                    ref_entry,
                    gen_entry,
                    reference.resources.width,
                    reference.resources.height,
                )
            )
            try:
                areas.append(area_difference(ref_entry, gen_entry))
            except UndefinedMetric:
                areas.append(None)
                flags.append(f"area difference undefined for pair {pair_index}")
            try:
                colors.append(
                    color_difference(
                        reference.image, generated.image, ref_entry, gen_entry
                    )
                )
            except EmptyRegionError:
                colors.append(None)
                flags.append(f"color difference undefined for pair {pair_index}")
            if ref_entry.text is not None:
                texts.append(text_difference(ref_entry.text, gen_entry.text or ""))
            else:
                texts.append(None)
        if not match.pairs:
            flags.append("no pairs")

        return EvaluationReport(
            page=page,
            strategy=strategy,
            seed=seed,
            visual=visual,
            match=match,
            reference_total=len(reference.resources),
            generated_total=len(generated.resources),
            fine_grained=FineGrainedScores(
                position_offset=tuple(offsets),
                area_difference=tuple(areas),
                color_difference=tuple(colors),
                text_difference=tuple(texts),
                rer=rer_value,
            ),
            reference_pixel_count=reference.image.width * reference.image.height,
            resource_list_length=len(reference.resources),
            flags=tuple(flags),
        )
    except (ValueError, OSError) as exc:
        raise EvaluationError(f"page {identity}: {exc}") from exc
