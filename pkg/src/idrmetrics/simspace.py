"""Similarity space: cross-citation counts, cosine similarities, distances and
the thresholded journal graph."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

# Above this many labels cross-citation counts are held as CSR.
DENSE_LIMIT = 1000


class DegenerateMatrixError(ValueError):
    pass


class ZeroVectorWarning(UserWarning):
    pass


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class _Labelled:
    labels: tuple[str, ...]

    def _index_map(self) -> dict[str, int]:
        cache = self.__dict__.get("_idx")
        if cache is None:
            cache = {lab: i for i, lab in enumerate(self.labels)}
            object.__setattr__(self, "_idx", cache)
        return cache

    def index(self, label: str) -> int:
        try:
            return self._index_map()[label]
        except KeyError:
            raise KeyError(f"label {label!r} not in matrix") from None

    def __contains__(self, label: object) -> bool:
        return label in self._index_map()

    def __len__(self) -> int:
        return len(self.labels)


def _check_labels(labels: Sequence[str]) -> tuple[str, ...]:
    labels = tuple(str(x) for x in labels)
    if len(set(labels)) != len(labels):
        raise ValueError("matrix labels must be unique")
    return labels


@dataclass(frozen=True, eq=False)
class CrossCitationMatrix(_Labelled):
    """Citation counts between labels; ``counts[i, j]`` is citations from i to j.

    ``counts`` is a dense array for up to ``DENSE_LIMIT`` labels and a CSR
    matrix above that, unless given explicitly.
    """

    labels: tuple[str, ...]
    counts: np.ndarray | sparse.csr_matrix

    def __post_init__(self) -> None:
        labels = _check_labels(self.labels)
        object.__setattr__(self, "labels", labels)
        c = self.counts
        if sparse.issparse(c):
            c = sparse.csr_matrix(c, dtype=float)
            data = c.data
        else:
            c = _readonly(c)
            data = c
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"cross-citation matrix must be square, got {c.shape}")
        if c.shape[0] != len(labels):
            raise ValueError(f"{len(labels)} labels for a {c.shape[0]}x{c.shape[0]} matrix")
        if data.size and (not np.all(np.isfinite(data)) or data.min() < 0):
            raise ValueError("cross-citation counts must be finite and non-negative")
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_dict(cls, counts: Mapping[tuple[str, str], float], labels: Iterable[str] | None = None) -> "CrossCitationMatrix":
        if labels is None:
            labels = sorted({a for a, _ in counts} | {b for _, b in counts})
        labels = tuple(labels)
        idx = {lab: i for i, lab in enumerate(labels)}
        n = len(labels)
        if n > DENSE_LIMIT:
            rows, cols, vals = [], [], []
            for (a, b), v in counts.items():
                rows.append(idx[a])
                cols.append(idx[b])
                vals.append(float(v))
            m = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
        else:
            m = np.zeros((n, n))
            for (a, b), v in counts.items():
                m[idx[a], idx[b]] += float(v)
        return cls(labels, m)

    def dense(self) -> np.ndarray:
        return self.counts.toarray() if sparse.issparse(self.counts) else self.counts

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def get(self, source: str, target: str) -> float:
        return float(self.counts[self.index(source), self.index(target)])

    def aligned(self, labels: Sequence[str]) -> np.ndarray:
        """Dense counts re-indexed to ``labels``; missing labels give zero rows."""
        n = len(labels)
        out = np.zeros((n, n))
        pos = [self._index_map().get(lab) for lab in labels]
        keep = [k for k, p in enumerate(pos) if p is not None]
        if keep:
            src = np.array([pos[k] for k in keep])
            out[np.ix_(keep, keep)] = self.dense()[np.ix_(src, src)]
        return out


@dataclass(frozen=True, eq=False)
class SimilarityMatrix(_Labelled):
    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        labels = _check_labels(self.labels)
        v = _readonly(self.values)
        if v.shape != (len(labels), len(labels)):
            raise ValueError(f"similarity matrix shape {v.shape} does not match {len(labels)} labels")
        if not np.allclose(v, v.T, rtol=0, atol=1e-12):
            raise ValueError("similarity matrix must be symmetric")
        if np.any(np.diag(v) != 1.0):
            raise ValueError("similarity matrix diagonal must be exactly 1")
        if v.size and (v.min() < 0 or v.max() > 1):
            raise ValueError("similarities must lie in [0, 1]")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", v)

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.index(a), self.index(b)])

    def submatrix(self, labels: Sequence[str]) -> np.ndarray:
        idx = [self.index(x) for x in labels]
        return self.values[np.ix_(idx, idx)]


@dataclass(frozen=True, eq=False)
class DistanceMatrix(_Labelled):
    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        labels = _check_labels(self.labels)
        v = _readonly(self.values)
        if v.shape != (len(labels), len(labels)):
            raise ValueError(f"distance matrix shape {v.shape} does not match {len(labels)} labels")
        if np.any(np.diag(v) != 0.0):
            raise ValueError("distance matrix diagonal must be 0")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", v)

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.index(a), self.index(b)])

    def submatrix(self, labels: Sequence[str]) -> np.ndarray:
        idx = [self.index(x) for x in labels]
        return self.values[np.ix_(idx, idx)]


def cosine_similarity(
    C: CrossCitationMatrix,
    dimension: str = "cited",
    *,
    zero_diagonal: bool = False,
) -> SimilarityMatrix:
    """Cosine similarity between the citation profiles of every pair of labels.

    In the ``"cited"`` dimension a label is described by its column (who cites
    it); in the ``"citing"`` dimension by its row. Labels whose vector is all
    zero get similarity 0 to every other label and a ``ZeroVectorWarning``.
    """
    if dimension not in ("cited", "citing"):
        raise ValueError(f"dimension must be 'cited' or 'citing', got {dimension!r}")
    m = C.counts
    is_sparse = sparse.issparse(m)
    if is_sparse:
        m = m.tocsr(copy=True)
        if zero_diagonal:
            m.setdiag(0)
            m.eliminate_zeros()
    else:
        m = np.array(m, dtype=float)
        if zero_diagonal:
            np.fill_diagonal(m, 0.0)
    if m.sum() == 0:
        raise DegenerateMatrixError("degenerate cross-citation matrix")
    # vectors as columns
    if dimension == "citing":
        m = m.T
    if is_sparse:
        norms = np.sqrt(np.asarray(m.multiply(m).sum(axis=0)).ravel())
    else:
        norms = np.sqrt((m * m).sum(axis=0))
    zero = norms == 0
    if zero.any():
        names = [C.labels[i] for i in np.flatnonzero(zero)]
        warnings.warn(f"zero citation vector for {names}; similarity set to 0", ZeroVectorWarning, stacklevel=2)
    inv = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, norms))
    if is_sparse:
        unit = m @ sparse.diags(inv)
        s = (unit.T @ unit).toarray()
    else:
        unit = m * inv
        s = unit.T @ unit
    s = (s + s.T) / 2.0
    np.clip(s, 0.0, 1.0, out=s)
    np.fill_diagonal(s, 1.0)
    return SimilarityMatrix(C.labels, s)


def to_distance(S: SimilarityMatrix) -> DistanceMatrix:
    d = 1.0 - S.values
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(S.labels, d)


def to_similarity(D: DistanceMatrix) -> SimilarityMatrix:
    """Inverse of :func:`to_distance`."""
    s = 1.0 - D.values
    np.fill_diagonal(s, 1.0)
    return SimilarityMatrix(D.labels, s)


@dataclass(frozen=True)
class JournalGraph:
    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    edge_threshold: float

    def __post_init__(self) -> None:
        node_set = set(self.nodes)
        norm = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on {a!r}")
            if a not in node_set or b not in node_set:
                raise ValueError(f"edge ({a!r}, {b!r}) references an unknown node")
            norm.add((a, b) if a < b else (b, a))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", frozenset(norm))

    def has_edge(self, a: str, b: str) -> bool:
        return ((a, b) if a < b else (b, a)) in self.edges

    def adjacency(self) -> np.ndarray:
        """Boolean adjacency matrix in ``nodes`` order."""
        idx = {n: i for i, n in enumerate(self.nodes)}
        a = np.zeros((len(self.nodes), len(self.nodes)), dtype=bool)
        for u, v in self.edges:
            a[idx[u], idx[v]] = a[idx[v], idx[u]] = True
        return a

    def neighbors(self, node: str) -> set[str]:
        out = set()
        for u, v in self.edges:
            if u == node:
                out.add(v)
            elif v == node:
                out.add(u)
        return out


def build_journal_graph(S: SimilarityMatrix, edge_threshold: float = 0.2) -> JournalGraph:
    if not 0 < edge_threshold <= 1:
        raise ValueError("edge_threshold must lie in (0, 1]")
    v = S.values
    iu, ju = np.nonzero(np.triu(v >= edge_threshold, k=1))
    edges = frozenset((S.labels[i], S.labels[j]) for i, j in zip(iu, ju))
    return JournalGraph(S.labels, edges, edge_threshold)


# --- CSV I/O -----------------------------------------------------------------

def read_matrix_csv(path: str | Path) -> CrossCitationMatrix:
    """Read a square count matrix: header row of labels, first column = citing label."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    header = [h.strip() for h in rows[0][1:]]
    n = len(header)
    if len(set(header)) != n:
        raise ValueError(f"{path}:1: duplicate labels in header")
    col = {lab: j for j, lab in enumerate(header)}
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    if len(body) != n:
        raise ValueError(f"{path}: expected {n} data rows, found {len(body)}")
    dense = n <= DENSE_LIMIT
    m = np.zeros((n, n)) if dense else sparse.lil_matrix((n, n))
    seen = set()
    for lineno, row in enumerate(body, start=2):
        label = row[0].strip()
        if label not in col:
            raise ValueError(f"{path}:{lineno}: row label {label!r} not in header")
        if label in seen:
            raise ValueError(f"{path}:{lineno}: duplicate row {label!r}")
        seen.add(label)
        if len(row) - 1 != n:
            raise ValueError(f"{path}:{lineno}: expected {n} values, found {len(row) - 1}")
        i = col[label]
        for j, cell in enumerate(row[1:]):
            cell = cell.strip()
            try:
                val = float(cell) if cell else 0.0
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric cell {cell!r}") from None
            if not math.isfinite(val) or val < 0:
                raise ValueError(f"{path}:{lineno}: invalid count {cell!r}")
            if val:
                m[i, j] = val
    return CrossCitationMatrix(tuple(header), m if dense else m.tocsr())


def format_matrix_csv(labels: Sequence[str], values: np.ndarray, decimals: int | None = 6) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([""] + list(labels))
    dense = values.toarray() if sparse.issparse(values) else np.asarray(values)
    for lab, row in zip(labels, dense):
        if decimals is None:
            w.writerow([lab] + [repr(float(x)) for x in row])
        else:
            w.writerow([lab] + [f"{x:.{decimals}f}" for x in row])
    return buf.getvalue()


def write_matrix_csv(path: str | Path, labels: Sequence[str], values: np.ndarray, decimals: int | None = 6) -> None:
    Path(path).write_text(format_matrix_csv(labels, values, decimals), encoding="utf-8")
