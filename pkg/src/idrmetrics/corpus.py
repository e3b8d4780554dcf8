"""Bibliographic records, lookup tables and category distributions.

Reads field-tagged exports (Web of Science plain-text style) or CSV, the
journal -> subject category thesaurus, journal rating lists and citation
baselines, and turns records into category distributions for a facet.
"""

from __future__ import annotations

import csv
import io
import json
import re
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass, field, fields
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .simspace import CrossCitationMatrix


class CorpusFormatError(ValueError):
    """Raised for unreadable input tables; the message carries ``file:line``."""


class EmptyDistributionError(ValueError):
    pass


class DocType(str, Enum):
    ARTICLE = "article"
    LETTER = "letter"
    PROCEEDINGS_PAPER = "proceedings_paper"
    REVIEW = "review"
    OTHER = "other"


DEFAULT_ALLOWED_TYPES = frozenset({DocType.ARTICLE, DocType.LETTER, DocType.PROCEEDINGS_PAPER, DocType.REVIEW})

FACETS = ("publications", "references", "citations", "journals")

_NON_ALNUM = re.compile(r"[^0-9A-Z]+")


def canonical_journal(name: str) -> str:
    """Uppercase, fold accents, turn punctuation into spaces, collapse whitespace.

    >>> canonical_journal("Res. Policy")
    'RES POLICY'
    """
    folded = unicodedata.normalize("NFKD", name).encode("ascii", "ignore").decode("ascii")
    return _NON_ALNUM.sub(" ", folded.upper()).strip()


def parse_doc_type(raw: str | None) -> DocType:
    """Map a document-type string to :class:`DocType`.

    Compound WoS values such as ``"Article; Proceedings Paper"`` take the
    first recognised part. ``"Book Review"`` is not a review.
    """
    if not raw:
        return DocType.OTHER
    for part in raw.split(";"):
        key = canonical_journal(part).replace(" ", "_").lower()
        try:
            dt = DocType(key)
        except ValueError:
            continue
        if dt is not DocType.OTHER:
            return dt
    return DocType.OTHER


@dataclass(frozen=True)
class Reference:
    journal: str
    raw: str


@dataclass(frozen=True)
class BibRecord:
    record_id: str
    journal: str
    year: int
    doc_type: DocType
    times_cited: int = 0
    references: tuple[Reference, ...] = ()
    source_unit: str | None = None

    def __post_init__(self) -> None:
        if not self.record_id:
            raise ValueError("record_id must be non-empty")
        canon = canonical_journal(self.journal)
        if not canon:
            raise ValueError("journal must be non-empty after canonicalisation")
        object.__setattr__(self, "journal", canon)
        if not 1900 <= self.year <= 2100:
            raise ValueError(f"year {self.year} outside [1900, 2100]")
        if self.times_cited < 0:
            raise ValueError("times_cited must be >= 0")
        object.__setattr__(self, "doc_type", DocType(self.doc_type))
        object.__setattr__(self, "references", tuple(self.references))


@dataclass(frozen=True)
class CitingRecord:
    record_id: str
    journal: str
    reference_count: int
    cited_unit_papers: frozenset[str]
    citing_unit: str | None = None

    def __post_init__(self) -> None:
        if self.reference_count < 1:
            raise ValueError("reference_count must be >= 1")
        cited = frozenset(self.cited_unit_papers)
        if not cited:
            raise ValueError("cited_unit_papers must be non-empty")
        object.__setattr__(self, "cited_unit_papers", cited)
        object.__setattr__(self, "journal", canonical_journal(self.journal))


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str
    record_id: str | None = None
    severity: str = "error"

    def __str__(self) -> str:
        rid = f" [{self.record_id}]" if self.record_id else ""
        return f"line {self.line}{rid}: {self.severity}: {self.message}"


@dataclass
class ParseResult:
    records: list = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    dropped: Counter = field(default_factory=Counter)

    @property
    def n_dropped(self) -> int:
        return sum(self.dropped.values())

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]


# --- tagged format -----------------------------------------------------------

@dataclass(frozen=True)
class TagMap:
    """Field tags of the tagged export. Override to load other dialects."""

    record_id: str = "UT"
    journal: str = "SO"
    journal_alt: str = "J9"
    year: str = "PY"
    doc_type: str = "DT"
    times_cited: str = "TC"
    references: str = "CR"
    reference_count: str = "NR"
    cited_records: str = "XC"
    unit: str = "XU"
    end_of_record: str = "ER"


def load_tag_map(path: str | Path) -> TagMap:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    known = {f.name for f in fields(TagMap)}
    unknown = set(data) - known
    if unknown:
        raise CorpusFormatError(f"{path}: unknown tag map keys {sorted(unknown)}")
    return TagMap(**{k: str(v) for k, v in data.items()})


_TAG_LINE = re.compile(r"^([A-Z][A-Z0-9])(?: (.*))?$")
_YEAR = re.compile(r"^\d{4}$")


def _tagged_blocks(text: str, end_tag: str, diags: list[Diagnostic]) -> Iterator[tuple[int, dict[str, list[str]]]]:
    block: dict[str, list[str]] = {}
    start = 0
    last_tag = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.lstrip("\ufeff").rstrip("\r")
        if not line.strip():
            continue
        if line[0] in " \t":
            if last_tag is None:
                diags.append(Diagnostic(lineno, "continuation line outside a field", severity="warning"))
            else:
                block[last_tag].append(line.strip())
            continue
        m = _TAG_LINE.match(line)
        if m is None:
            diags.append(Diagnostic(lineno, f"unrecognised line {line[:40]!r}", severity="warning"))
            continue
        tag, value = m.group(1), (m.group(2) or "").strip()
        if tag == end_tag:
            if block:
                yield start, block
            block, last_tag = {}, None
            continue
        if tag in ("FN", "VR", "EF") and not block:
            continue
        if not block:
            start = lineno
        block.setdefault(tag, [])
        if value:
            block[tag].append(value)
        last_tag = tag
    if block:
        diags.append(Diagnostic(start, "record not terminated before end of input", severity="warning"))
        yield start, block


def parse_reference(raw: str) -> Reference:
    """Best-effort journal extraction from a cited-reference string.

    WoS references look like ``AUTHOR, YEAR, SOURCE, Vvol, Ppage, DOI x``;
    the source follows the year, or the first field when the author is absent.
    """
    parts = [p.strip() for p in raw.split(",")]
    journal = ""
    if len(parts) >= 3 and _YEAR.match(parts[1]):
        journal = parts[2]
    elif len(parts) >= 2 and _YEAR.match(parts[0]):
        journal = parts[1]
    elif len(parts) >= 2:
        journal = parts[1] if not _YEAR.match(parts[1]) else ""
    elif parts:
        journal = parts[0]
    return Reference(canonical_journal(journal), raw.strip())


def _first(block: Mapping[str, list[str]], tag: str) -> str:
    vals = block.get(tag) or []
    return " ".join(vals).strip()


def _parse_int(value: str, what: str) -> int:
    value = value.strip()
    if not re.fullmatch(r"\d+", value):
        raise ValueError(f"invalid {what} {value!r}")
    return int(value)


def _bib_from_fields(get, refs: Sequence[str], source_unit: str | None) -> BibRecord:
    rid = get("record_id")
    if not rid:
        raise ValueError("missing record id")
    journal = get("journal") or get("journal_alt")
    if not canonical_journal(journal):
        raise ValueError("missing journal")
    year_raw = get("year")
    if not year_raw:
        raise ValueError("missing year")
    year = _parse_int(year_raw, "year")
    if not 1900 <= year <= 2100:
        raise ValueError(f"year {year} outside [1900, 2100]")
    tc_raw = get("times_cited")
    tc = _parse_int(tc_raw, "times cited") if tc_raw else 0
    unit = get("unit") or source_unit
    return BibRecord(
        record_id=rid,
        journal=journal,
        year=year,
        doc_type=parse_doc_type(get("doc_type")),
        times_cited=tc,
        references=tuple(parse_reference(r) for r in refs if r.strip()),
        source_unit=unit or None,
    )


DEFAULT_COLUMNS = {
    "record_id": "record_id",
    "journal": "journal",
    "year": "year",
    "doc_type": "doc_type",
    "times_cited": "times_cited",
    "references": "references",
    "unit": "source_unit",
}

CITING_COLUMNS = {
    "record_id": "record_id",
    "journal": "journal",
    "reference_count": "reference_count",
    "cited_records": "cited_unit_papers",
    "unit": "citing_unit",
}


def _looks_tagged(text: str) -> bool:
    for line in text.splitlines():
        line = line.lstrip("\ufeff")
        if line.strip():
            return bool(_TAG_LINE.match(line.rstrip("\r")))
    return False


def _csv_rows(text: str, columns: Mapping[str, str], required: Iterable[str], diags: list[Diagnostic]) -> Iterator[tuple[int, dict[str, str]]]:
    reader = csv.reader(io.StringIO(text.lstrip("\ufeff")))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        return
    except csv.Error as exc:
        diags.append(Diagnostic(1, f"unreadable CSV header: {exc}"))
        return
    pos = {h: i for i, h in enumerate(header)}
    missing = [columns[k] for k in required if columns[k] not in pos]
    if missing:
        diags.append(Diagnostic(1, f"CSV header lacks required columns {missing}"))
        return
    while True:
        try:
            row = next(reader)
        except StopIteration:
            return
        except csv.Error as exc:
            diags.append(Diagnostic(reader.line_num, f"unreadable CSV row: {exc}"))
            continue
        if not any(c.strip() for c in row):
            continue
        out = {}
        for key, col in columns.items():
            i = pos.get(col)
            out[key] = row[i].strip() if i is not None and i < len(row) else ""
        yield reader.line_num, out


def parse_records(
    text: str,
    allowed_types: Iterable[DocType | str] = DEFAULT_ALLOWED_TYPES,
    *,
    fmt: str = "auto",
    tags: TagMap | None = None,
    columns: Mapping[str, str] | None = None,
    source_unit: str | None = None,
) -> ParseResult:
    """Parse publication records from a tagged export or a CSV table.

    Records whose document type is not in ``allowed_types`` are dropped and
    counted in ``result.dropped``. Malformed records (no id, no journal, bad
    year or times-cited) produce an error diagnostic and are skipped.
    """
    allowed = {DocType(t) for t in allowed_types}
    result = ParseResult()
    if fmt == "auto":
        fmt = "tagged" if _looks_tagged(text) else "csv"
    if fmt == "tagged":
        tags = tags or TagMap()
        for start, block in _tagged_blocks(text, tags.end_of_record, result.diagnostics):
            def get(key: str, _b=block) -> str:
                return _first(_b, getattr(tags, key))

            _keep(result, start, get("record_id") or None, allowed,
                  lambda: _bib_from_fields(get, block.get(tags.references, []), source_unit))
    elif fmt == "csv":
        cols = {**DEFAULT_COLUMNS, **(columns or {})}
        for lineno, row in _csv_rows(text, cols, ("record_id", "journal"), result.diagnostics):
            refs = [r for r in row.get("references", "").split(";")]
            _keep(result, lineno, row.get("record_id") or None, allowed,
                  lambda row=row, refs=refs: _bib_from_fields(lambda k: row.get(k, ""), refs, source_unit))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return result


def _keep(result: ParseResult, line: int, rid: str | None, allowed: set[DocType], build) -> None:
    try:
        rec = build()
    except ValueError as exc:
        result.diagnostics.append(Diagnostic(line, str(exc), rid))
        return
    if rec.doc_type not in allowed:
        result.dropped[rec.doc_type.value] += 1
        return
    result.records.append(rec)


def _citing_from_fields(get, citing_unit: str | None) -> CitingRecord:
    rid = get("record_id")
    if not rid:
        raise ValueError("missing record id")
    journal = get("journal") or get("journal_alt")
    if not canonical_journal(journal):
        raise ValueError("missing journal")
    nr = _parse_int(get("reference_count"), "reference count")
    if nr < 1:
        raise ValueError("reference count must be >= 1")
    cited = frozenset(x.strip() for x in re.split(r"[;\s]+", get("cited_records")) if x.strip())
    if not cited:
        raise ValueError("no cited unit papers")
    return CitingRecord(rid, journal, nr, cited, (get("unit") or citing_unit) or None)


def parse_citing_records(
    text: str,
    *,
    fmt: str = "auto",
    tags: TagMap | None = None,
    columns: Mapping[str, str] | None = None,
    citing_unit: str | None = None,
) -> ParseResult:
    """Parse records of papers citing a unit.

    Tagged exports carry the reference count in ``NR`` and the cited unit
    record ids in ``XC`` (both configurable through :class:`TagMap`). CSV input
    uses ``record_id,journal,reference_count,cited_unit_papers,citing_unit``
    with cited ids separated by ``;``.
    """
    result = ParseResult()
    if fmt == "auto":
        fmt = "tagged" if _looks_tagged(text) else "csv"
    if fmt == "tagged":
        tags = tags or TagMap()
        for start, block in _tagged_blocks(text, tags.end_of_record, result.diagnostics):
            def get(key: str, _b=block) -> str:
                if key == "cited_records":
                    return ";".join(_b.get(tags.cited_records, []))
                return _first(_b, getattr(tags, key))

            _keep_citing(result, start, get("record_id") or None, lambda: _citing_from_fields(get, citing_unit))
    elif fmt == "csv":
        cols = {**CITING_COLUMNS, **(columns or {})}
        for lineno, row in _csv_rows(text, cols, ("record_id", "journal", "reference_count", "cited_records"), result.diagnostics):
            _keep_citing(result, lineno, row.get("record_id") or None,
                         lambda row=row: _citing_from_fields(lambda k: row.get(k, ""), citing_unit))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return result


def _keep_citing(result: ParseResult, line: int, rid: str | None, build) -> None:
    try:
        result.records.append(build())
    except ValueError as exc:
        result.diagnostics.append(Diagnostic(line, str(exc), rid))


def read_records(path: str | Path, allowed_types: Iterable[DocType | str] = DEFAULT_ALLOWED_TYPES, **kwargs) -> ParseResult:
    return parse_records(Path(path).read_text(encoding="utf-8"), allowed_types, **kwargs)


def read_citing_records(path: str | Path, **kwargs) -> ParseResult:
    return parse_citing_records(Path(path).read_text(encoding="utf-8"), **kwargs)


def exclude_same_unit(citing: Iterable[CitingRecord], unit: str) -> list[CitingRecord]:
    """Drop citing records from ``unit`` itself (self and colleague citations)."""
    return [c for c in citing if c.citing_unit != unit]


# --- lookup tables -------------------------------------------------------------

def _read_table(path: str | Path, required: Sequence[str]) -> Iterator[tuple[int, dict[str, str]]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except UnicodeDecodeError as exc:
        raise CorpusFormatError(f"{path}: not UTF-8 ({exc})") from None
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise CorpusFormatError(f"{path}:1: missing header row")
    names = [h.strip() for h in reader.fieldnames]
    reader.fieldnames = names
    missing = [c for c in required if c not in names]
    if missing:
        raise CorpusFormatError(f"{path}:1: header lacks columns {missing}")
    for row in reader:
        row = {k: (v or "").strip() for k, v in row.items() if k is not None}
        if not any(row.values()):
            continue
        yield reader.line_num, row


@dataclass(frozen=True)
class JournalThesaurus:
    """Journal -> subject categories, keyed by canonical journal name."""

    mapping: Mapping[str, frozenset[str]]

    def __post_init__(self) -> None:
        clean = {}
        for journal, cats in self.mapping.items():
            key = canonical_journal(journal)
            cats = frozenset(cats)
            if not key or not cats:
                raise ValueError(f"journal {journal!r} must map to at least one category")
            clean[key] = clean.get(key, frozenset()) | cats
        object.__setattr__(self, "mapping", clean)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "JournalThesaurus":
        m: dict[str, set[str]] = defaultdict(set)
        for journal, cat in pairs:
            m[journal].add(cat)
        return cls({j: frozenset(c) for j, c in m.items()})

    def categories_of(self, journal: str) -> frozenset[str]:
        return self.mapping.get(canonical_journal(journal), frozenset())

    @property
    def categories(self) -> frozenset[str]:
        return frozenset().union(*self.mapping.values()) if self.mapping else frozenset()

    def __contains__(self, journal: object) -> bool:
        return isinstance(journal, str) and canonical_journal(journal) in self.mapping

    def __len__(self) -> int:
        return len(self.mapping)


def load_thesaurus(path: str | Path) -> JournalThesaurus:
    pairs = []
    for lineno, row in _read_table(path, ("journal", "category")):
        if not canonical_journal(row["journal"]) or not row["category"]:
            raise CorpusFormatError(f"{path}:{lineno}: empty journal or category")
        pairs.append((row["journal"], row["category"]))
    return JournalThesaurus.from_pairs(pairs)


RANK_LABELS = ("1", "2", "3", "4", "4*")
DEFAULT_RANK_WEIGHTS = {"1": 1.0, "2": 2.0, "3": 3.0, "4": 4.0, "4*": 5.0}
# 1/3/9 continued geometrically for the top rank; see README.
DEFAULT_FUNDING_MULTIPLIERS = {"1": 0.0, "2": 1.0, "3": 3.0, "4": 9.0, "4*": 27.0}


def normalize_rank(label: str) -> str:
    lab = str(label).replace(" ", "").strip()
    if lab not in RANK_LABELS:
        raise ValueError(f"unknown rank {label!r}; expected one of {RANK_LABELS}")
    return lab


@dataclass(frozen=True)
class RatingScheme:
    """Journal ranks (1, 2, 3, 4, 4*) with ordinal weights and funding multipliers."""

    ranks: Mapping[str, str]
    weights: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_RANK_WEIGHTS))
    multipliers: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_FUNDING_MULTIPLIERS))

    def __post_init__(self) -> None:
        object.__setattr__(self, "ranks", {canonical_journal(j): normalize_rank(r) for j, r in self.ranks.items()})
        w = {normalize_rank(k): float(v) for k, v in self.weights.items()}
        m = {normalize_rank(k): float(v) for k, v in self.multipliers.items()}
        for table, name in ((w, "weights"), (m, "multipliers")):
            if set(table) != set(RANK_LABELS):
                raise ValueError(f"{name} must cover ranks {RANK_LABELS}")
        ws = [w[r] for r in RANK_LABELS]
        if any(a >= b for a, b in zip(ws, ws[1:])):
            raise ValueError("rank weights must be strictly increasing")
        ms = [m[r] for r in RANK_LABELS]
        if any(a > b for a, b in zip(ms, ms[1:])) or min(ms) < 0:
            raise ValueError("funding multipliers must be non-negative and non-decreasing")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "multipliers", m)

    def rank_of(self, journal: str) -> str | None:
        return self.ranks.get(canonical_journal(journal))

    def weight_of(self, journal: str) -> float | None:
        r = self.rank_of(journal)
        return None if r is None else self.weights[r]

    def journals_with_rank(self, rank: str) -> list[str]:
        rank = normalize_rank(rank)
        return sorted(j for j, r in self.ranks.items() if r == rank)


def load_rating_scheme(path: str | Path, **kwargs) -> RatingScheme:
    ranks = {}
    for lineno, row in _read_table(path, ("journal", "rank")):
        try:
            ranks[row["journal"]] = normalize_rank(row["rank"])
        except ValueError as exc:
            raise CorpusFormatError(f"{path}:{lineno}: {exc}") from None
    return RatingScheme(ranks, **kwargs)


@dataclass(frozen=True)
class CategoryBaseline:
    """Reference values for normalisation.

    ``mean_citations``: category -> mean citations per paper (> 0).
    ``impact_factors``: journal -> impact factor (>= 0).
    ``mean_impact_factor``: category -> mean impact factor of its journals.
    """

    mean_citations: Mapping[str, float] = field(default_factory=dict)
    impact_factors: Mapping[str, float] = field(default_factory=dict)
    mean_impact_factor: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for cat, v in self.mean_citations.items():
            if not v > 0:
                raise ValueError(f"mean citations for {cat!r} must be > 0, got {v}")
        for j, v in self.impact_factors.items():
            if not v >= 0:
                raise ValueError(f"impact factor for {j!r} must be >= 0, got {v}")
        for cat, v in self.mean_impact_factor.items():
            if not v >= 0:
                raise ValueError(f"mean impact factor for {cat!r} must be >= 0, got {v}")
        object.__setattr__(self, "impact_factors", {canonical_journal(j): float(v) for j, v in self.impact_factors.items()})
        object.__setattr__(self, "mean_citations", {c: float(v) for c, v in self.mean_citations.items()})
        object.__setattr__(self, "mean_impact_factor", {c: float(v) for c, v in self.mean_impact_factor.items()})

    def impact_factor(self, journal: str) -> float | None:
        return self.impact_factors.get(canonical_journal(journal))


def _float_cell(path, lineno, value, what) -> float:
    try:
        return float(value)
    except ValueError:
        raise CorpusFormatError(f"{path}:{lineno}: invalid {what} {value!r}") from None


def load_baseline(category_path: str | Path | None = None, journal_path: str | Path | None = None) -> CategoryBaseline:
    """Load ``category,mean_citations[,mean_impact_factor]`` and ``journal,impact_factor`` tables."""
    means, mean_if, ifs = {}, {}, {}
    if category_path is not None:
        for lineno, row in _read_table(category_path, ("category", "mean_citations")):
            v = _float_cell(category_path, lineno, row["mean_citations"], "mean_citations")
            if not v > 0:
                raise CorpusFormatError(f"{category_path}:{lineno}: mean_citations must be > 0")
            means[row["category"]] = v
            if row.get("mean_impact_factor"):
                mean_if[row["category"]] = _float_cell(category_path, lineno, row["mean_impact_factor"], "mean_impact_factor")
    if journal_path is not None:
        for lineno, row in _read_table(journal_path, ("journal", "impact_factor")):
            v = _float_cell(journal_path, lineno, row["impact_factor"], "impact_factor")
            if v < 0:
                raise CorpusFormatError(f"{journal_path}:{lineno}: impact_factor must be >= 0")
            ifs[row["journal"]] = v
    return CategoryBaseline(means, ifs, mean_if)


# --- distributions -------------------------------------------------------------

@dataclass(frozen=True)
class CategoryDistribution:
    """Counts of a unit's activity per label; shares are derived on demand.

    ``level`` is ``"category"`` for subject-category distributions and
    ``"journal"`` when labels are journals (intermediation measures).
    ``min_share`` is the threshold for the variety/disparity view; balance,
    entropy and Rao-Stirling use every nonzero label.
    """

    facet: str
    counts: Mapping[str, Fraction | float]
    n_items: int | None = None
    n_unmapped: int = 0
    min_share: float = 0.0001
    level: str = "category"

    def __post_init__(self) -> None:
        if self.facet not in FACETS:
            raise ValueError(f"unknown facet {self.facet!r}")
        if self.level not in ("category", "journal"):
            raise ValueError(f"unknown level {self.level!r}")
        if not 0 <= self.min_share < 1:
            raise ValueError("min_share must lie in [0, 1)")
        counts = {}
        for k in sorted(self.counts):
            v = self.counts[k]
            if v < 0:
                raise ValueError(f"negative count for {k!r}")
            counts[k] = v
        object.__setattr__(self, "counts", counts)

    @property
    def total(self):
        return sum(self.counts.values(), Fraction(0) if all(isinstance(v, (int, Fraction)) for v in self.counts.values()) else 0.0)

    @property
    def proportions(self) -> dict[str, float]:
        total = self.total
        if not total:
            return {k: 0.0 for k in self.counts}
        return {k: float(v / total) for k, v in self.counts.items()}

    @property
    def coverage(self) -> float:
        """Share of items that resolved to at least one label."""
        if not self.n_items:
            return 0.0
        return (self.n_items - self.n_unmapped) / self.n_items

    def nonzero(self) -> dict[str, float]:
        return {k: p for k, p in self.proportions.items() if p > 0}

    def thresholded(self, min_share: float | None = None) -> dict[str, float]:
        """Labels whose share is at least ``min_share`` (exact comparison)."""
        ms = _exact(self.min_share if min_share is None else min_share)
        total = _exact(self.total)
        props = self.proportions
        if not total:
            return {}
        return {k: props[k] for k, v in self.counts.items() if v > 0 and _exact(v) >= ms * total}

    def scaled(self, k: float) -> "CategoryDistribution":
        return CategoryDistribution(self.facet, {c: v * k for c, v in self.counts.items()}, self.n_items, self.n_unmapped, self.min_share, self.level)

    @classmethod
    def from_proportions(cls, props: Mapping[str, float], facet: str = "publications", **kwargs) -> "CategoryDistribution":
        return cls(facet, dict(props), **kwargs)


def _exact(x) -> Fraction:
    """Exact rational; floats are read through their shortest repr so 0.002 means 1/500."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


def facet_journals(records: Iterable, facet: str) -> list[str]:
    """Journal names of the items counted for ``facet``.

    publications: each record's journal; references: the journal of every
    cited reference; citations: each citing record's journal, once per citing
    paper; journals: the items are journal names already.
    """
    if facet == "publications":
        return [r.journal for r in records]
    if facet == "references":
        return [ref.journal for r in records for ref in r.references]
    if facet == "citations":
        return [c.journal for c in records]
    if facet == "journals":
        return [canonical_journal(j) for j in records]
    raise ValueError(f"unknown facet {facet!r}")


def build_distribution(records: Iterable, thesaurus: JournalThesaurus, facet: str, min_share: float = 0.0001) -> CategoryDistribution:
    """Category distribution of ``records`` for ``facet``.

    Each mappable item adds 1/k to each of its journal's k categories, so the
    counts sum exactly to the number of mapped items. Unmapped items are
    counted in ``n_unmapped`` and lower ``coverage``.
    """
    counts: dict[str, Fraction] = defaultdict(Fraction)
    items = facet_journals(records, facet)
    unmapped = 0
    for journal in items:
        cats = thesaurus.categories_of(journal)
        if not cats:
            unmapped += 1
            continue
        share = Fraction(1, len(cats))
        for c in cats:
            counts[c] += share
    if not counts:
        raise EmptyDistributionError("empty distribution")
    return CategoryDistribution(facet, dict(counts), len(items), unmapped, min_share)


def journal_distribution(records: Iterable, facet: str, min_share: float = 0.0) -> CategoryDistribution:
    """Distribution over journals (each item counts 1 for its own journal)."""
    items = [j for j in facet_journals(records, facet) if j]
    if not items:
        raise EmptyDistributionError("empty distribution")
    counts = Counter(items)
    return CategoryDistribution(facet, {j: Fraction(n) for j, n in counts.items()}, len(items), 0, min_share, level="journal")


def build_within_matrix(records: Iterable[BibRecord], thesaurus: JournalThesaurus, labels: Sequence[str] | None = None) -> CrossCitationMatrix:
    """Category-to-category citations inside a unit's own output.

    Each (publication, reference) pair with both journals mapped adds
    1/(k_citing * k_cited) to every (citing category, cited category) cell.
    """
    counts: dict[tuple[str, str], Fraction] = defaultdict(Fraction)
    for rec in records:
        src = thesaurus.categories_of(rec.journal)
        if not src:
            continue
        for ref in rec.references:
            dst = thesaurus.categories_of(ref.journal)
            if not dst:
                continue
            w = Fraction(1, len(src) * len(dst))
            for a in src:
                for b in dst:
                    counts[(a, b)] += w
    if labels is None:
        labels = sorted({a for a, _ in counts} | {b for _, b in counts})
    return CrossCitationMatrix.from_dict({k: float(v) for k, v in counts.items()}, labels)
