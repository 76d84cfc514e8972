"""Counting, sampling and scaling-limit checks for random distance-hereditary graphs."""

from __future__ import annotations

__version__ = "0.1.0"

from .enumeration import FAMILIES, count_graphs, count_trees  # noqa: E402
from .treecodec import DHTree, Graph, decompose, distance, gr  # noqa: E402

__all__ = [
    "FAMILIES",
    "DHTree",
    "Graph",
    "__version__",
    "count_graphs",
    "count_trees",
    "decompose",
    "distance",
    "gr",
]
