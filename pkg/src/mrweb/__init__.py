"""Workbench for multi-page resource-aware webpage generation and evaluation."""

from .resources import (
    BoundingBox,
    ResourceEntry,
    ResourceKind,
    ResourceList,
    classify_link,
    normalize_url,
    parse_resource_list,
    serialize_resource_list,
    validate,
)

__all__ = [
    "BoundingBox",
    "ResourceEntry",
    "ResourceKind",
    "ResourceList",
    "classify_link",
    "normalize_url",
    "parse_resource_list",
    "serialize_resource_list",
    "validate",
]

__version__ = "0.1.0"
