"""Manifest-driven command line: validate, indicators, performance, overlay, fund, all.

Exit codes: 0 success, 1 partial (some units or facets failed), 2 invalid manifest.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import os
import re
import sys
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import jsonschema

from . import corpus as cp
from . import indicators as ind
from . import overlay as ov
from . import performance as perf
from . import simspace as ss
from .schemas import validate_json

log = logging.getLogger("idrmetrics")

ENV_LOG_LEVEL = "IDRMETRICS_LOG_LEVEL"
EXIT_OK, EXIT_PARTIAL, EXIT_INVALID = 0, 1, 2
RUN_FACETS = ("publications", "references", "citations")

DEFAULT_PARAMETERS = {
    "min_share": 0.0001,
    "edge_threshold": 0.2,
    "neighborhood": "two",
    "link_min_share": 0.002,
    "link_min_ratio": 5.0,
    "min_refs": 11,
    "base_edge_threshold": 0.2,
    "journal_map_cutoff": 0.05,
    "similarity_dimension": "cited",
    "zero_self_citations": False,
    "multipliers": dict(cp.DEFAULT_FUNDING_MULTIPLIERS),
    "allowed_types": sorted(t.value for t in cp.DEFAULT_ALLOWED_TYPES),
}


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestDiagnostic:
    severity: str
    file: str
    line: int
    message: str

    def __str__(self) -> str:
        return f"{self.file}:{self.line}: {self.severity}: {self.message}"


@dataclass
class UnitSpec:
    name: str
    records: list[Path]
    citing: list[Path] = field(default_factory=list)
    submitted: float | None = None


@dataclass
class RunManifest:
    path: Path
    text: str
    units: list[UnitSpec]
    paths: dict[str, Path]
    output_dir: Path
    parameters: dict

    def unit(self, name: str) -> UnitSpec:
        for u in self.units:
            if u.name == name:
                return u
        raise ManifestError(f"unit {name!r} not in manifest")

    def line_of(self, needle: str) -> int:
        token = json.dumps(needle)
        for lineno, line in enumerate(self.text.splitlines(), start=1):
            if token in line:
                return lineno
        return 1


def parse_param(item: str) -> tuple[str, object]:
    """``key=value`` with a JSON value, falling back to a bare string."""
    if "=" not in item:
        raise ManifestError(f"--param expects key=value, got {item!r}")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def apply_params(params: dict, overrides: Sequence[tuple[str, object]]) -> dict:
    out = copy.deepcopy(params)
    for key, value in overrides:
        if key.startswith("multipliers."):
            out["multipliers"][key.split(".", 1)[1]] = value
        elif key not in DEFAULT_PARAMETERS:
            raise ManifestError(f"unknown parameter {key!r}")
        else:
            out[key] = value
    return out


def check_parameters(p: dict) -> list[str]:
    problems = []

    def num(key, lo, hi, lo_open=False, hi_open=False):
        v = p[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            problems.append(f"{key} must be a number")
            return
        if (v <= lo if lo_open else v < lo) or (v >= hi if hi_open else v > hi):
            problems.append(f"{key}={v} outside {'(' if lo_open else '['}{lo}, {hi}{')' if hi_open else ']'}")

    num("min_share", 0, 1, hi_open=True)
    num("edge_threshold", 0, 1, lo_open=True)
    num("base_edge_threshold", 0, 1, lo_open=True)
    num("link_min_share", 0, 1)
    num("link_min_ratio", 0, float("inf"))
    num("journal_map_cutoff", 0, 1)
    if not isinstance(p["min_refs"], int) or isinstance(p["min_refs"], bool) or p["min_refs"] < 1:
        problems.append("min_refs must be an integer >= 1")
    if p["neighborhood"] not in ind.NEIGHBORHOODS:
        problems.append(f"neighborhood must be one of {ind.NEIGHBORHOODS}")
    if p["similarity_dimension"] not in ("cited", "citing"):
        problems.append("similarity_dimension must be 'cited' or 'citing'")
    if not isinstance(p["zero_self_citations"], bool):
        problems.append("zero_self_citations must be true or false")
    try:
        perf.FundingModel(p["multipliers"])
        cp.RatingScheme({}, multipliers=p["multipliers"])
    except (ValueError, TypeError, AttributeError) as exc:
        problems.append(f"multipliers: {exc}")
    try:
        [cp.DocType(t) for t in p["allowed_types"]]
    except (ValueError, TypeError) as exc:
        problems.append(f"allowed_types: {exc}")
    return problems


PATH_KEYS = ("thesaurus", "rating_scheme", "category_baseline", "journal_impact", "global_matrix",
             "journal_matrix", "base_coords", "tag_map")


def load_manifest(path: str | Path, overrides: Sequence[tuple[str, object]] = ()) -> RunManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"{path}: cannot read manifest ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    try:
        validate_json(data, "manifest")
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise ManifestError(f"{path}:1: manifest {where}: {exc.message}") from None
    root = path.parent
    names = [u["name"] for u in data["units"]]
    if len(set(names)) != len(names):
        raise ManifestError(f"{path}:1: duplicate unit names")
    units = [
        UnitSpec(u["name"], [root / r for r in u["records"]], [root / c for c in u.get("citing", [])], u.get("submitted"))
        for u in data["units"]
    ]
    paths = {k: root / data[k] for k in PATH_KEYS if k in data}
    unknown = set(data.get("parameters", {})) - set(DEFAULT_PARAMETERS)
    if unknown:
        raise ManifestError(f"{path}:1: unknown parameters {sorted(unknown)}")
    params = copy.deepcopy(DEFAULT_PARAMETERS)
    for k, v in data.get("parameters", {}).items():
        if k == "multipliers":
            params["multipliers"].update(v)
        else:
            params[k] = v
    params = apply_params(params, overrides)
    return RunManifest(path, text, units, paths, root / data.get("output_dir", "out"), params)


# --- validation ----------------------------------------------------------------

def cmd_validate(manifest: RunManifest) -> list[ManifestDiagnostic]:
    diags: list[ManifestDiagnostic] = []
    mfile = str(manifest.path)

    def add(sev, file, line, msg):
        diags.append(ManifestDiagnostic(sev, str(file), line, msg))

    for problem in check_parameters(manifest.parameters):
        add("error", mfile, manifest.line_of("parameters"), problem)

    for key, p in manifest.paths.items():
        if not p.is_file():
            add("error", mfile, manifest.line_of(key), f"{key}: file not found: {p}")
    for unit in manifest.units:
        for p in unit.records + unit.citing:
            if not p.is_file():
                add("error", mfile, manifest.line_of(p.name) if p.name else 1, f"unit {unit.name}: file not found: {p}")

    def load(key, fn):
        p = manifest.paths.get(key)
        if p is None or not p.is_file():
            return None
        try:
            return fn(p)
        except (ValueError, OSError) as exc:
            file, line, msg = _split_location(str(exc), p)
            add("error", file, line, msg)
            return None

    thesaurus = load("thesaurus", cp.load_thesaurus)
    load("rating_scheme", cp.load_rating_scheme)
    baseline = load("category_baseline", lambda p: cp.load_baseline(p, None))
    load("journal_impact", lambda p: cp.load_baseline(None, p))
    gm = load("global_matrix", ss.read_matrix_csv)
    load("journal_matrix", ss.read_matrix_csv)
    coords = load("base_coords", ov.read_coords_csv)
    tags = load("tag_map", cp.load_tag_map)

    if gm is not None and thesaurus is not None:
        cats = thesaurus.categories
        for lab in gm.labels:
            if lab not in cats:
                add("warning", manifest.paths["global_matrix"], 1, f"matrix label {lab!r} absent from thesaurus")
        for cat in sorted(cats - set(gm.labels)):
            add("warning", manifest.paths["thesaurus"], 1, f"category {cat!r} absent from global matrix")
    if baseline is not None and thesaurus is not None:
        for cat in sorted(set(baseline.mean_citations) - thesaurus.categories):
            add("warning", manifest.paths["category_baseline"], 1, f"baseline category {cat!r} absent from thesaurus")
    if coords is not None and gm is not None:
        for lab in sorted(set(coords) - set(gm.labels)):
            add("warning", manifest.paths["base_coords"], 1, f"coordinate label {lab!r} absent from global matrix")

    allowed = manifest.parameters["allowed_types"]
    for unit in manifest.units:
        for p in unit.records:
            if p.is_file():
                res = cp.read_records(p, allowed, tags=tags)
                for d in res.errors:
                    add("warning", p, d.line, f"record skipped: {d.message}")
        for p in unit.citing:
            if p.is_file():
                res = cp.read_citing_records(p, tags=tags)
                for d in res.errors:
                    add("warning", p, d.line, f"citing record skipped: {d.message}")
    return diags


def _split_location(message: str, default_file: Path) -> tuple[str, int, str]:
    m = re.match(r"^(.*?):(\d+): (.*)$", message)
    if m:
        return m.group(1), int(m.group(2)), m.group(3)
    m = re.match(r"^(.*?): (.*)$", message)
    if m and m.group(1) == str(default_file):
        return m.group(1), 1, m.group(2)
    return str(default_file), 1, message


# --- shared run context --------------------------------------------------------

class Context:
    """Inputs shared by all units, loaded once and read-only afterwards."""

    def __init__(self, manifest: RunManifest):
        self.manifest = manifest
        self.params = manifest.parameters
        paths = manifest.paths
        try:
            self.tags = cp.load_tag_map(paths["tag_map"]) if "tag_map" in paths else None
            self.thesaurus = cp.load_thesaurus(paths["thesaurus"])
            self.global_matrix = ss.read_matrix_csv(paths["global_matrix"])
            self.scheme = (
                cp.load_rating_scheme(paths["rating_scheme"], multipliers=self.params["multipliers"])
                if "rating_scheme" in paths else None
            )
            self.baseline = (
                cp.load_baseline(paths.get("category_baseline"), paths.get("journal_impact"))
                if {"category_baseline", "journal_impact"} & set(paths) else None
            )
            self.journal_matrix = ss.read_matrix_csv(paths["journal_matrix"]) if "journal_matrix" in paths else None
            self.coords = ov.read_coords_csv(paths["base_coords"]) if "base_coords" in paths else None
        except (OSError, ValueError) as exc:
            raise ManifestError(str(exc)) from None
        dim, zero = self.params["similarity_dimension"], self.params["zero_self_citations"]
        self.category_similarity = ss.cosine_similarity(self.global_matrix, dim, zero_diagonal=zero)
        self.distances = ss.to_distance(self.category_similarity)
        self.journal_similarity = self.journal_graph = None
        if self.journal_matrix is not None:
            self.journal_similarity = ss.cosine_similarity(self.journal_matrix, dim, zero_diagonal=zero)
            self.journal_graph = ss.build_journal_graph(self.journal_similarity, self.params["edge_threshold"])
        self._units: dict[str, tuple[list, list]] = {}
        self._lock = threading.Lock()

    def unit_data(self, name: str) -> tuple[list[cp.BibRecord], list[cp.CitingRecord]]:
        with self._lock:
            if name in self._units:
                return self._units[name]
        spec = self.manifest.unit(name)
        records: list[cp.BibRecord] = []
        for p in spec.records:
            res = cp.read_records(p, self.params["allowed_types"], tags=self.tags, source_unit=name)
            for d in res.diagnostics:
                log.warning("%s:%s", p, d)
            if res.n_dropped:
                log.info("%s: dropped %d records by document type %s", p, res.n_dropped, dict(res.dropped))
            records.extend(res.records)
        citing: list[cp.CitingRecord] = []
        for p in spec.citing:
            res = cp.read_citing_records(p, tags=self.tags)
            for d in res.diagnostics:
                log.warning("%s:%s", p, d)
            citing.extend(res.records)
        citing = cp.exclude_same_unit(citing, name)
        with self._lock:
            self._units[name] = (records, citing)
        return records, citing

    def facet_items(self, name: str, facet: str) -> list:
        records, citing = self.unit_data(name)
        return citing if facet == "citations" else records

    def journal_dist_on_map(self, name: str, facet: str) -> tuple[cp.CategoryDistribution, float]:
        """Journal distribution restricted to journals of the journal map, with the covered share."""
        full = cp.journal_distribution(self.facet_items(name, facet), facet)
        S = self.journal_similarity
        kept = {j: c for j, c in full.counts.items() if j in S}
        if not kept:
            raise cp.EmptyDistributionError(f"no {facet} journal is on the journal map")
        coverage = float(sum(kept.values()) / full.total)
        return cp.CategoryDistribution(facet, kept, full.n_items, 0, 0.0, level="journal"), coverage


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name)


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def _units(manifest: RunManifest, unit: str | None) -> list[str]:
    if unit is None:
        return [u.name for u in manifest.units]
    manifest.unit(unit)
    return [unit]


def _facets(facet: str | None) -> tuple[str, ...]:
    if facet is None:
        return RUN_FACETS
    if facet not in RUN_FACETS:
        raise ManifestError(f"facet must be one of {RUN_FACETS}")
    return (facet,)


def _run_units(names: list[str], fn: Callable[[str], dict], jobs: int) -> list[dict]:
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, names))
    return [fn(n) for n in names]


_ERRORS = (ValueError, KeyError, ind.IndicatorUndefinedError)


def _err(exc: BaseException) -> str:
    return exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)


# --- indicators ----------------------------------------------------------------

def unit_indicator_report(ctx: Context, name: str, facets: Sequence[str]) -> dict:
    p = ctx.params
    report: dict = {"unit": name, "parameters": p, "facets": {}, "coherence": None, "errors": {}}
    for facet in facets:
        try:
            items = ctx.facet_items(name, facet)
            dist = cp.build_distribution(items, ctx.thesaurus, facet, p["min_share"])
            div = ind.diversity_report(dist, ctx.distances)
        except _ERRORS as exc:
            report["errors"][facet] = _err(exc)
            continue
        inter = None
        if ctx.journal_similarity is not None:
            try:
                jdist, jcov = ctx.journal_dist_on_map(name, facet)
                ir = ind.intermediation_report(jdist, ctx.journal_similarity, ctx.journal_graph, p["neighborhood"])
                inter = {**ir.as_dict(), "journal_coverage": jcov}
            except _ERRORS as exc:
                report["errors"][f"{facet}.intermediation"] = _err(exc)
        report["facets"][facet] = {
            "count": dist.n_items,
            "mapped": dist.n_items - dist.n_unmapped,
            "coverage": dist.coverage,
            "diversity": div.as_dict(),
            "intermediation": inter,
        }
    if "references" in facets:
        try:
            records, _ = ctx.unit_data(name)
            within = cp.build_within_matrix(records, ctx.thesaurus)
            ref_dist = cp.build_distribution(records, ctx.thesaurus, "references", p["min_share"])
            report["coherence"] = ind.coherence(within, ref_dist, ctx.distances).as_dict()
        except _ERRORS as exc:
            report["errors"]["coherence"] = _err(exc)
    return report


def indicator_rows(report: dict) -> list[list]:
    rows = []
    unit = report["unit"]
    for facet, body in report["facets"].items():
        rows.append([unit, facet, "count", body["count"]])
        rows.append([unit, facet, "coverage", body["coverage"]])
        for k, v in body["diversity"].items():
            rows.append([unit, facet, k, v])
        for k, v in (body["intermediation"] or {}).items():
            rows.append([unit, facet, k, v])
    if report["coherence"] is not None:
        rows.append([unit, "references", "coherence", report["coherence"]["coherence"]])
    return rows


def cmd_indicators(manifest: RunManifest, unit: str | None = None, facet: str | None = None, jobs: int = 1, ctx: Context | None = None) -> int:
    ctx = ctx or Context(manifest)
    names = _units(manifest, unit)
    facets = _facets(facet)
    out = manifest.output_dir / "indicators"
    reports = _run_units(names, lambda n: unit_indicator_report(ctx, n, facets), jobs)
    failed = 0
    for rep in reports:
        stem = _safe(rep["unit"])
        write_atomic(out / f"{stem}.json", ov.dumps(rep))
        write_atomic(out / f"{stem}.csv", _csv_text(["unit", "facet", "indicator", "value"], indicator_rows(rep)))
        if rep["errors"]:
            failed += 1
            for k, v in rep["errors"].items():
                log.error("indicators %s/%s: %s", rep["unit"], k, v)
    if ctx.scheme is not None and unit is None:
        ranks = ind.rank_diversity(ctx.scheme, ctx.thesaurus, ctx.distances, ctx.params["min_share"])
        write_atomic(out / "rating_ranks.json", ov.dumps({"parameters": ctx.params, "ranks": ranks}))
    _write_parameters(manifest)
    return _summarize("indicators", len(names), failed)


# --- performance ---------------------------------------------------------------

def cmd_performance(manifest: RunManifest, unit: str | None = None, jobs: int = 1, ctx: Context | None = None) -> int:
    ctx = ctx or Context(manifest)
    names = _units(manifest, unit)

    def one(name: str) -> dict:
        records, citing = ctx.unit_data(name)
        try:
            rep = perf.performance_report(records, citing, ctx.scheme, ctx.baseline, ctx.thesaurus, ctx.params["min_refs"])
        except perf.PerformanceError as exc:
            return {"unit": name, "fatal": str(exc)}
        return {"unit": name, "report": rep, "n_papers": len(records)}

    results = _run_units(names, one, jobs)
    units_json, rows, failed = {}, [], 0
    for res in results:
        name = res["unit"]
        if "fatal" in res:
            failed += 1
            log.error("performance %s: %s", name, res["fatal"])
            continue
        rep: perf.PerformanceReport = res["report"]
        units_json[name] = {"n_papers": res["n_papers"], **rep.as_dict()}
        if rep.errors:
            failed += 1
            for k, v in rep.errors.items():
                log.error("performance %s/%s: %s", name, k, v)
        for ind_name in perf.PerformanceReport.INDICATORS:
            m = getattr(rep, ind_name)
            if m is not None:
                rows.append([name, ind_name, m.mean, m.std_error, m.n, m.excluded])
        if rep.percent_rated is not None:
            rows.append([name, "percent_rated", rep.percent_rated, None, rep.mean_abs_rank.n + rep.mean_abs_rank.excluded, 0])
    out = manifest.output_dir / "performance"
    write_atomic(out / "performance.json", ov.dumps({"parameters": ctx.params, "units": units_json}))
    write_atomic(out / "performance.csv", _csv_text(["unit", "indicator", "mean", "std_error", "n", "excluded_count"], rows))
    _write_parameters(manifest)
    return _summarize("performance", len(names), failed)


# --- overlay -------------------------------------------------------------------

def cmd_overlay(manifest: RunManifest, unit: str | None = None, facet: str | None = None, jobs: int = 1, ctx: Context | None = None) -> int:
    """Overlay maps per unit and facet. Links always come from the unit's own
    referencing (publication category -> reference category)."""
    ctx = ctx or Context(manifest)
    names = _units(manifest, unit)
    facets = _facets(facet)
    p = ctx.params
    base = ov.base_map_from_similarity(ctx.category_similarity, p["base_edge_threshold"], ctx.coords)
    out = manifest.output_dir / "overlay"

    def one(name: str) -> dict:
        files, errors = {}, {}
        records, _ = ctx.unit_data(name)
        try:
            within = cp.build_within_matrix(records, ctx.thesaurus)
            links = ov.filter_links(within, ctx.global_matrix, p["link_min_share"], p["link_min_ratio"]) if within.labels else []
        except _ERRORS as exc:
            errors["links"] = _err(exc)
            links = []
        stem = _safe(name)
        for f in facets:
            try:
                dist = cp.build_distribution(ctx.facet_items(name, f), ctx.thesaurus, f, p["min_share"])
                omap = ov.compose_overlay(base, dist, links)
            except _ERRORS as exc:
                errors[f] = _err(exc)
                continue
            files[f"{stem}_{f}.json"] = ov.dumps(omap.to_json_dict())
            files[f"{stem}_{f}.net"] = ov.export_pajek(omap)
            files[f"{stem}_{f}_unplaced.json"] = ov.dumps({"unit": name, "facet": f, "unplaced": list(omap.unplaced)})
        if ctx.journal_similarity is not None:
            dists = {}
            for f in facets:
                try:
                    dists[f], _ = ctx.journal_dist_on_map(name, f)
                except _ERRORS as exc:
                    errors[f"{f}.journal_map"] = _err(exc)
            if dists:
                files[f"{stem}_journal_map.json"] = ov.dumps(ov.export_journal_map(dists, ctx.journal_similarity, p["journal_map_cutoff"]))
        return {"unit": name, "files": files, "errors": errors}

    failed = 0
    for res in _run_units(names, one, jobs):
        for fname, text in sorted(res["files"].items()):
            write_atomic(out / fname, text)
        if res["errors"]:
            failed += 1
            for k, v in res["errors"].items():
                log.error("overlay %s/%s: %s", res["unit"], k, v)
    _write_parameters(manifest)
    return _summarize("overlay", len(names), failed)


# --- funding -------------------------------------------------------------------

def cmd_fund(manifest: RunManifest, ctx: Context | None = None, stream=None) -> int:
    ctx = ctx or Context(manifest)
    stream = stream or sys.stdout
    if ctx.scheme is None:
        raise ManifestError("fund requires a rating_scheme")
    hists, submitted = {}, {}
    for spec in manifest.units:
        records, _ = ctx.unit_data(spec.name)
        hists[spec.name] = perf.rating_histogram(records, ctx.scheme)
        submitted[spec.name] = spec.submitted or sum(hists[spec.name].values())
    model = perf.FundingModel(ctx.params["multipliers"])
    try:
        alloc = perf.allocate_funding(hists, model, submitted)
    except perf.PerformanceError as exc:
        log.error("fund: %s", exc)
        return EXIT_PARTIAL
    ratios = perf.share_ratios(alloc)
    out = manifest.output_dir / "funding"
    rows = [[u, a.score, a.share, a.per_capita_score] for u, a in alloc.items()]
    write_atomic(out / "funding.csv", _csv_text(["unit", "score", "share", "per_capita_score"], rows))
    write_atomic(out / "funding.json", ov.dumps({
        "parameters": ctx.params,
        "histograms": hists,
        "allocations": {u: {"score": a.score, "share": a.share, "per_capita_score": a.per_capita_score} for u, a in alloc.items()},
        "share_ratios": ratios,
    }))
    _write_parameters(manifest)
    units = list(alloc)
    width = max(len(u) for u in units) + 2
    stream.write("share ratio (row / column)\n")
    stream.write(" " * width + "".join(f"{u:>{width}}" for u in units) + "\n")
    for a in units:
        cells = "".join(f"{'-' if ratios[a][b] is None else format(ratios[a][b], '.3f'):>{width}}" for b in units)
        stream.write(f"{a:<{width}}{cells}\n")
    return EXIT_OK


def cmd_all(manifest: RunManifest, jobs: int = 1) -> int:
    ctx = Context(manifest)
    codes = [
        cmd_indicators(manifest, jobs=jobs, ctx=ctx),
        cmd_performance(manifest, jobs=jobs, ctx=ctx),
        cmd_overlay(manifest, jobs=jobs, ctx=ctx),
    ]
    if ctx.scheme is not None:
        codes.append(cmd_fund(manifest, ctx=ctx))
    return max(codes)


def _write_parameters(manifest: RunManifest) -> None:
    write_atomic(manifest.output_dir / "parameters.json", ov.dumps(manifest.parameters))


def _summarize(cmd: str, n: int, failed: int) -> int:
    if failed:
        log.warning("%s: %d of %d units had failures", cmd, failed, n)
        return EXIT_PARTIAL
    log.info("%s: %d units done", cmd, n)
    return EXIT_OK


# --- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="idrmetrics", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("validate", "indicators", "performance", "overlay", "fund", "all"):
        p = sub.add_parser(name)
        p.add_argument("--manifest", required=True, type=Path)
        p.add_argument("--out", type=Path, help="output directory (overrides the manifest)")
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
        if name in ("indicators", "performance", "overlay"):
            p.add_argument("--unit")
        if name in ("indicators", "overlay"):
            p.add_argument("--facet", choices=RUN_FACETS)
        if name != "validate":
            p.add_argument("--jobs", type=int, default=1)
        else:
            p.add_argument("--strict", action="store_true", help="treat warnings as errors")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get(ENV_LOG_LEVEL, "WARNING").upper(), format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        manifest = load_manifest(args.manifest, [parse_param(x) for x in args.param])
        if args.out is not None:
            manifest.output_dir = args.out
        if args.command == "validate":
            diags = cmd_validate(manifest)
            for d in diags:
                print(d)
            bad = [d for d in diags if d.severity == "error" or args.strict]
            return EXIT_INVALID if bad else EXIT_OK
        problems = check_parameters(manifest.parameters)
        if problems:
            raise ManifestError("; ".join(problems))
        if args.command == "indicators":
            return cmd_indicators(manifest, args.unit, args.facet, args.jobs)
        if args.command == "performance":
            return cmd_performance(manifest, args.unit, args.jobs)
        if args.command == "overlay":
            return cmd_overlay(manifest, args.unit, args.facet, args.jobs)
        if args.command == "fund":
            return cmd_fund(manifest)
        return cmd_all(manifest, args.jobs)
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
