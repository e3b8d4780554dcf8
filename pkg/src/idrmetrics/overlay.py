"""Overlay maps: unit activity and novel cross-citation links on a base map,
with Pajek and JSON exports."""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import CategoryDistribution
from .simspace import CrossCitationMatrix, SimilarityMatrix


@dataclass(frozen=True)
class Link:
    source: str
    target: str
    observed: float
    expected: float
    ratio: float  # inf when the global share is zero

    def as_dict(self) -> dict:
        return {
            "from": self.source,
            "to": self.target,
            "observed": self.observed,
            "expected": self.expected,
            "ratio": None if math.isinf(self.ratio) else self.ratio,
        }


@dataclass(frozen=True)
class BaseMap:
    labels: tuple[str, ...]
    coords: Mapping[str, tuple[float, float]] | None = None
    edges: tuple[tuple[str, str, float], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        known = set(self.labels)
        if self.coords is not None:
            object.__setattr__(self, "coords", {k: (float(x), float(y)) for k, (x, y) in self.coords.items() if k in known})
        for a, b, _ in self.edges:
            if a not in known or b not in known:
                raise ValueError(f"base edge ({a!r}, {b!r}) references an unknown label")
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))


def base_map_from_similarity(S: SimilarityMatrix, threshold: float = 0.2, coords: Mapping[str, tuple[float, float]] | None = None) -> BaseMap:
    """Base map with an edge for every pair whose similarity reaches ``threshold``."""
    iu, ju = np.nonzero(np.triu(S.values >= threshold, k=1))
    edges = []
    for i, j in zip(iu, ju):
        a, b = sorted((S.labels[i], S.labels[j]))
        edges.append((a, b, float(S.values[i, j])))
    return BaseMap(S.labels, coords, tuple(edges))


def read_coords_csv(path: str | Path) -> dict[str, tuple[float, float]]:
    out = {}
    with Path(path).open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"label", "x", "y"} <= {h.strip() for h in reader.fieldnames}:
            raise ValueError(f"{path}:1: header must contain label,x,y")
        for row in reader:
            row = {k.strip(): (v or "").strip() for k, v in row.items() if k}
            try:
                out[row["label"]] = (float(row["x"]), float(row["y"]))
            except ValueError:
                raise ValueError(f"{path}:{reader.line_num}: invalid coordinates") from None
    return out


@dataclass(frozen=True)
class OverlayMap:
    base: BaseMap
    nodes: Mapping[str, float]
    links: tuple[Link, ...] = ()
    unplaced: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        known = set(self.base.labels)
        for lab in self.nodes:
            if lab not in known:
                raise ValueError(f"node {lab!r} not in base map")
        for link in self.links:
            if link.source not in known or link.target not in known:
                raise ValueError(f"link {link.source!r}->{link.target!r} has an endpoint outside the base map")
        if sum(self.nodes.values()) > 1 + 1e-9:
            raise ValueError("node sizes sum to more than 1")
        object.__setattr__(self, "nodes", dict(sorted(self.nodes.items())))
        object.__setattr__(self, "links", tuple(sorted(self.links, key=lambda l: (l.source, l.target))))

    def to_json_dict(self, decimals: int = 6) -> dict:
        base: dict = {
            "labels": list(self.base.labels),
            "edges": [{"from": a, "to": b, "similarity": round(s, decimals)} for a, b, s in self.base.edges],
        }
        if self.base.coords is not None:
            base["coords"] = {k: [round(x, decimals), round(y, decimals)] for k, (x, y) in sorted(self.base.coords.items())}
        links = []
        for link in self.links:
            d = link.as_dict()
            for k in ("observed", "expected", "ratio"):
                if d[k] is not None:
                    d[k] = round(d[k], decimals)
            links.append(d)
        return {
            "base": base,
            "nodes": {k: round(v, decimals) for k, v in self.nodes.items()},
            "links": links,
        }


def _exact(x: float) -> Fraction:
    return Fraction(repr(float(x)))


def filter_links(
    within: CrossCitationMatrix,
    global_: CrossCitationMatrix,
    min_share: float = 0.002,
    min_ratio: float = 5.0,
) -> list[Link]:
    """Cross-citations between distinct labels that are both frequent in the unit
    and over-represented relative to the global flows.

    A link i->j is kept when its share of the unit's citations is at least
    ``min_share`` and exceeds ``min_ratio`` times its global share. Both tests
    are done in exact arithmetic. Links absent from the global matrix are kept
    with an infinite ratio.
    """
    missing = [x for x in within.labels if x not in global_]
    if missing:
        raise ValueError(f"within-unit labels absent from the global matrix: {missing}")
    w_total = _exact(within.total)
    g_total = _exact(global_.total)
    if not w_total:
        return []
    share_cut = _exact(min_share)
    ratio_cut = _exact(min_ratio)
    w = within.dense()
    g = global_.aligned(within.labels)
    links = []
    for i, j in zip(*np.nonzero(w)):
        if i == j:
            continue
        wij = _exact(w[i, j])
        if wij < share_cut * w_total:
            continue
        observed = wij / w_total
        gij = _exact(g[i, j])
        if gij == 0:
            ratio = math.inf
            expected = Fraction(0)
        else:
            expected = gij / g_total
            if observed <= ratio_cut * expected:
                continue
            ratio = float(observed / expected)
        links.append(Link(within.labels[i], within.labels[j], float(observed), float(expected), ratio))
    return sorted(links, key=lambda l: (l.source, l.target))


def compose_overlay(base: BaseMap, dist: CategoryDistribution, links: Iterable[Link] = ()) -> OverlayMap:
    """Size base-map nodes by the unit's shares; labels not on the map go to ``unplaced``."""
    known = set(base.labels)
    props = dist.proportions
    nodes = {k: v for k, v in props.items() if k in known and v > 0}
    unplaced = tuple(sorted(k for k, v in props.items() if k not in known and v > 0))
    if not nodes:
        raise ValueError("no category of the distribution is on the base map")
    kept = tuple(l for l in links if l.source in known and l.target in known)
    return OverlayMap(base, nodes, kept, unplaced)


def _quote(label: str) -> str:
    # Pajek has no escape for double quotes inside labels.
    return '"' + label.replace('"', "'") + '"'


def export_pajek(omap: OverlayMap, decimals: int = 6) -> str:
    """Pajek ``.net`` text: ``*Vertices`` with sizes (and x y when known), then ``*Arcs``.

    Vertices are the sized nodes in lexicographic order; arc weights are the
    observed link shares.
    """
    labels = sorted(set(omap.nodes) | {l.source for l in omap.links} | {l.target for l in omap.links})
    ids = {lab: i for i, lab in enumerate(labels, start=1)}
    coords = omap.base.coords
    lines = [f"*Vertices {len(labels)}"]
    for lab in labels:
        size = f"{omap.nodes.get(lab, 0.0):.{decimals}f}"
        if coords is not None and lab in coords:
            x, y = coords[lab]
            lines.append(f"{ids[lab]} {_quote(lab)} {x:.{decimals}f} {y:.{decimals}f} {size}")
        else:
            lines.append(f"{ids[lab]} {_quote(lab)} {size}")
    lines.append("*Arcs")
    for link in sorted(omap.links, key=lambda l: (ids[l.source], ids[l.target])):
        lines.append(f"{ids[link.source]} {ids[link.target]} {link.observed:.{decimals}f}")
    return "\n".join(lines) + "\n"


@dataclass
class PajekNetwork:
    vertices: dict[int, str] = field(default_factory=dict)
    sizes: dict[str, float] = field(default_factory=dict)
    coords: dict[str, tuple[float, float]] = field(default_factory=dict)
    arcs: list[tuple[str, str, float]] = field(default_factory=list)


_SECTION = re.compile(r"^\*(\w+)(?:\s+(\d+))?\s*$", re.IGNORECASE)
_VERTEX = re.compile(r'^\s*(\d+)\s+"([^"]*)"\s*(.*)$')


def parse_pajek(text: str) -> PajekNetwork:
    """Read the Pajek subset written by :func:`export_pajek`."""
    net = PajekNetwork()
    section = None
    expected = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("%"):
            continue
        m = _SECTION.match(line.strip())
        if m:
            section = m.group(1).lower()
            if section == "vertices":
                expected = int(m.group(2) or 0)
            elif section not in ("arcs", "edges"):
                raise ValueError(f"line {lineno}: unsupported section {line!r}")
            continue
        if section == "vertices":
            vm = _VERTEX.match(line)
            if vm is None:
                raise ValueError(f"line {lineno}: malformed vertex line")
            vid, label, nums = int(vm.group(1)), vm.group(2), [float(x) for x in vm.group(3).split()]
            net.vertices[vid] = label
            if len(nums) == 3:
                net.coords[label] = (nums[0], nums[1])
                net.sizes[label] = nums[2]
            elif len(nums) == 1:
                net.sizes[label] = nums[0]
            else:
                raise ValueError(f"line {lineno}: expected 'id label [x y] size'")
        elif section in ("arcs", "edges"):
            parts = line.split()
            s, t, w = int(parts[0]), int(parts[1]), float(parts[2]) if len(parts) > 2 else 1.0
            net.arcs.append((net.vertices[s], net.vertices[t], w))
        else:
            raise ValueError(f"line {lineno}: data outside a section")
    if expected is not None and expected != len(net.vertices):
        raise ValueError(f"*Vertices declares {expected} vertices, found {len(net.vertices)}")
    return net


def export_journal_map(
    journal_dists: Mapping[str, CategoryDistribution] | CategoryDistribution,
    S: SimilarityMatrix,
    cutoff: float = 0.05,
    decimals: int = 6,
) -> dict:
    """Layout-ready journal map: similarity triplets at or above ``cutoff``
    (each unordered pair once) and per-facet node weights for every journal."""
    if isinstance(journal_dists, CategoryDistribution):
        journal_dists = {journal_dists.facet: journal_dists}
    for facet, dist in journal_dists.items():
        missing = sorted(j for j, p in dist.proportions.items() if p > 0 and j not in S)
        if missing:
            raise KeyError(f"{facet}: journals missing from similarity matrix: {missing}")
    iu, ju = np.nonzero(np.triu(S.values >= cutoff, k=1))
    triplets = [
        {"source": S.labels[i], "target": S.labels[j], "similarity": round(float(S.values[i, j]), decimals)}
        for i, j in zip(iu, ju)
    ]
    weights = {}
    for facet in sorted(journal_dists):
        props = journal_dists[facet].proportions
        weights[facet] = {j: round(props.get(j, 0.0), decimals) for j in S.labels}
    return {
        "journals": list(S.labels),
        "cutoff": cutoff,
        "similarities": triplets,
        "weights": weights,
    }


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, LF, trailing newline)."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"
