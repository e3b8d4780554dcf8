"""Deterministic two-unit demonstration corpus.

``DISC`` is a disciplinary unit: it publishes in a tight cluster of highly
rated management, business, finance and economics journals and cites mostly
within its own category. ``IDR`` is an interdisciplinary unit: it publishes in
bridging journals spread over planning, sociology, engineering and
environment, with lower ratings, and its papers cite distant categories.

The design is plain data (no random numbers) so every run writes identical
bytes. Run ``python -m idrmetrics.synthetic OUTDIR`` to write the files and a
ready-to-use ``manifest.json``.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

CATEGORIES = (
    "Business",
    "Economics",
    "Engineering",
    "Environment",
    "Finance",
    "Management",
    "Planning",
    "Sociology",
)

# journal -> (categories, rank or None, impact factor)
JOURNALS = {
    "ACAD MANAGE J": (("Management",), "4*", 6.0),
    "STRATEGIC MANAGE J": (("Management",), "4*", 5.0),
    "J MANAGE STUD": (("Management",), "4", 3.0),
    "J FINANC": (("Finance",), "4*", 4.5),
    "ECON J": (("Economics",), "4", 2.5),
    "J BUS RES": (("Business",), "3", 2.0),
    "RES POLICY": (("Management", "Planning"), "4", 3.5),
    "TECHNOVATION": (("Engineering", "Management"), "2", 2.5),
    "SCI PUBL POLICY": (("Planning", "Sociology"), "2", 1.5),
    "ENERG POLICY": (("Environment", "Planning"), None, 2.5),
    "IEEE T ENG MANAGE": (("Engineering", "Management"), "3", 1.5),
    "RES EVALUAT": (("Planning",), "1", 1.0),
    "SOC STUD SCI": (("Sociology",), None, 2.0),
    "SOCIOL REV": (("Sociology",), None, 1.0),
    "J CLEAN PROD": (("Engineering", "Environment"), None, 3.0),
    "ENVIRON SCI POLICY": (("Environment",), None, 2.0),
}

# global category-to-category citations (row cites column)
GLOBAL_FLOWS = {
    "Management": {"Management": 900, "Business": 300, "Finance": 120, "Economics": 200, "Planning": 40, "Engineering": 20, "Sociology": 15, "Environment": 5},
    "Business": {"Business": 700, "Management": 320, "Finance": 150, "Economics": 160, "Planning": 10, "Engineering": 10, "Sociology": 10, "Environment": 5},
    "Finance": {"Finance": 800, "Economics": 260, "Business": 120, "Management": 90, "Planning": 5},
    "Economics": {"Economics": 900, "Finance": 220, "Management": 120, "Business": 100, "Planning": 40, "Environment": 20, "Sociology": 20},
    "Planning": {"Planning": 500, "Sociology": 120, "Environment": 80, "Economics": 60, "Management": 40, "Engineering": 20},
    "Sociology": {"Sociology": 700, "Planning": 100, "Economics": 20, "Management": 20, "Environment": 10},
    "Engineering": {"Engineering": 900, "Environment": 150, "Management": 30, "Planning": 10},
    "Environment": {"Environment": 600, "Engineering": 160, "Planning": 90, "Sociology": 20, "Economics": 30},
}

# base-map layout used only for exported coordinates
COORDS = {
    "Business": (0.35, 0.55),
    "Economics": (0.10, 0.60),
    "Engineering": (0.85, 0.20),
    "Environment": (0.75, 0.45),
    "Finance": (0.20, 0.80),
    "Management": (0.40, 0.35),
    "Planning": (0.60, 0.60),
    "Sociology": (0.55, 0.85),
}

# journal-to-journal citations: dense blocks for the clusters, bridges cite across
_JOURNAL_BLOCKS = (
    (("ACAD MANAGE J", "STRATEGIC MANAGE J", "J MANAGE STUD", "J FINANC", "ECON J", "J BUS RES"), 40),
    (("SOC STUD SCI", "SOCIOL REV", "RES EVALUAT"), 40),
    (("J CLEAN PROD", "ENVIRON SCI POLICY", "IEEE T ENG MANAGE"), 40),
)
_JOURNAL_BRIDGES = {
    "RES POLICY": ("ACAD MANAGE J", "STRATEGIC MANAGE J", "SOC STUD SCI", "RES EVALUAT"),
    "TECHNOVATION": ("J MANAGE STUD", "IEEE T ENG MANAGE", "J CLEAN PROD"),
    "SCI PUBL POLICY": ("SOC STUD SCI", "RES EVALUAT", "ENVIRON SCI POLICY"),
    "ENERG POLICY": ("ENVIRON SCI POLICY", "J CLEAN PROD", "SOCIOL REV"),
}

# publication templates: (journal, references as (journal, count), times cited per copy)
UNITS = {
    "DISC": (
        ("ACAD MANAGE J", (("ACAD MANAGE J", 6), ("STRATEGIC MANAGE J", 4), ("J MANAGE STUD", 3), ("J BUS RES", 1)), (14, 9, 20, 11)),
        ("STRATEGIC MANAGE J", (("STRATEGIC MANAGE J", 5), ("ACAD MANAGE J", 5), ("ECON J", 2)), (12, 18, 7, 10)),
        ("J MANAGE STUD", (("J MANAGE STUD", 4), ("ACAD MANAGE J", 4), ("J BUS RES", 2), ("RES POLICY", 1)), (6, 8, 5, 9)),
        ("J FINANC", (("J FINANC", 8), ("ECON J", 3), ("J BUS RES", 1)), (15, 11, 13, 16)),
        ("ECON J", (("ECON J", 7), ("J FINANC", 3)), (9, 7, 12, 6)),
        ("J BUS RES", (("J BUS RES", 5), ("ACAD MANAGE J", 3), ("J FINANC", 2)), (4, 6, 3, 5)),
    ),
    "IDR": (
        ("RES POLICY", (("SOC STUD SCI", 3), ("J CLEAN PROD", 2), ("ECON J", 2), ("RES EVALUAT", 2), ("ACAD MANAGE J", 1)), (22, 14, 18, 16)),
        ("TECHNOVATION", (("SOCIOL REV", 2), ("ENERG POLICY", 2), ("J FINANC", 1), ("RES POLICY", 2), ("SCI PUBL POLICY", 1)), (10, 8, 12, 9)),
        ("SCI PUBL POLICY", (("IEEE T ENG MANAGE", 3), ("J CLEAN PROD", 2), ("J BUS RES", 2), ("RES POLICY", 1)), (7, 6, 9, 5)),
        ("ENERG POLICY", (("SOC STUD SCI", 2), ("ACAD MANAGE J", 2), ("ECON J", 3), ("TECHNOVATION", 2)), (15, 12, 11, 13)),
        ("SOC STUD SCI", (("J CLEAN PROD", 3), ("TECHNOVATION", 2), ("J FINANC", 1), ("RES POLICY", 2)), (9, 11, 6, 10)),
        ("IEEE T ENG MANAGE", (("SOCIOL REV", 3), ("SCI PUBL POLICY", 2), ("ECON J", 2), ("ENVIRON SCI POLICY", 1)), (5, 7, 4, 8)),
    ),
}

# unresolvable references (books, reports) added to every paper of a unit
UNMAPPED_REFS = {"DISC": 1, "IDR": 4}
YEARS = (2006, 2007, 2008, 2009)

# citing papers per unit: (journal, reference_count, cited template indices, citing unit)
CITERS = {
    "DISC": (
        ("ACAD MANAGE J", 45, (0, 1), None),
        ("J FINANC", 30, (3,), None),
        ("ECON J", 10, (4,), None),
        ("J BUS RES", 25, (5, 2), None),
        ("STRATEGIC MANAGE J", 60, (0,), "DISC"),
        ("J MANAGE STUD", 11, (2, 1), None),
    ),
    "IDR": (
        ("RES POLICY", 40, (0, 3), None),
        ("SOC STUD SCI", 20, (4,), None),
        ("J CLEAN PROD", 12, (1, 5), None),
        ("ENERG POLICY", 9, (3,), None),
        ("TECHNOVATION", 35, (2,), "IDR"),
        ("SCI PUBL POLICY", 15, (0, 2), None),
    ),
}


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def journal_flows() -> dict[str, dict[str, int]]:
    flows: dict[str, dict[str, int]] = {j: {} for j in JOURNALS}
    for members, weight in _JOURNAL_BLOCKS:
        for a in members:
            for b in members:
                flows[a][b] = flows[a].get(b, 0) + (weight * 3 if a == b else weight)
    for bridge, partners in _JOURNAL_BRIDGES.items():
        flows[bridge][bridge] = flows[bridge].get(bridge, 0) + 60
        for p in partners:
            flows[bridge][p] = flows[bridge].get(p, 0) + 25
            flows[p][bridge] = flows[p].get(bridge, 0) + 20
    return flows


def papers(unit: str) -> list[dict]:
    """Plain-data records of ``unit``: id, journal, year, times_cited, reference journals."""
    out = []
    for t, (journal, refs, tcs) in enumerate(UNITS[unit]):
        for copy, tc in enumerate(tcs):
            ref_journals = [j for j, n in refs for _ in range(n)] + ["BOOK"] * UNMAPPED_REFS[unit]
            out.append({
                "record_id": f"{unit}:{t:02d}{copy}",
                "journal": journal,
                "year": YEARS[(t + copy) % len(YEARS)],
                "times_cited": tc,
                "references": ref_journals,
            })
    return out


def citing(unit: str) -> list[dict]:
    out = []
    for k, (journal, nref, targets, cunit) in enumerate(CITERS[unit]):
        cited = sorted(f"{unit}:{t:02d}{c}" for t in targets for c in range(len(UNITS[unit][t][2])))
        out.append({"record_id": f"C-{unit}-{k:02d}", "journal": journal, "reference_count": nref,
                    "cited_unit_papers": cited, "citing_unit": cunit})
    return out


def _ref_string(journal: str, i: int) -> str:
    if journal == "BOOK":
        return f"SMITH A, {2000 + i % 8}, HDB INNOVATION STUDIES"
    return f"AUTHOR{i} B, {1995 + i % 14}, {journal}, V{1 + i % 30}, P{10 * i + 1}"


def tagged_records(unit: str) -> str:
    lines = ["FN Synthetic Export", "VR 1.0"]
    for p in papers(unit):
        lines += [f"UT {p['record_id']}", f"SO {p['journal']}", f"PY {p['year']}", "DT Article", f"TC {p['times_cited']}"]
        refs = [_ref_string(j, i) for i, j in enumerate(p["references"])]
        lines.append(f"CR {refs[0]}")
        lines += [f"   {r}" for r in refs[1:]]
        lines.append(f"NR {len(refs)}")
        lines.append("ER")
        lines.append("")
    # one out-of-scope document type, dropped by the default filter
    lines += [f"UT {unit}:BR", "SO RES POLICY", "PY 2008", "DT Book Review", "TC 0", "ER", "", "EF"]
    return "\n".join(lines) + "\n"


def citing_csv(unit: str) -> str:
    rows = [[c["record_id"], c["journal"], c["reference_count"], ";".join(c["cited_unit_papers"]), c["citing_unit"] or ""]
            for c in citing(unit)]
    return _csv(["record_id", "journal", "reference_count", "cited_unit_papers", "citing_unit"], rows)


def matrix_csv(labels, flows) -> str:
    rows = [[a] + [flows.get(a, {}).get(b, 0) for b in labels] for a in labels]
    return _csv([""] + list(labels), rows)


def category_baseline() -> dict[str, tuple[float, float]]:
    """Category -> (mean citations per paper, mean impact factor)."""
    out = {}
    for cat in CATEGORIES:
        ifs = [jif for j, (cats, _, jif) in JOURNALS.items() if cat in cats]
        out[cat] = (4.0 + 2.0 * (len(cat) % 4), sum(ifs) / len(ifs))
    return out


def write_fixture(outdir: str | Path) -> Path:
    """Write the corpus and its manifest under ``outdir``; returns the manifest path."""
    out = Path(outdir)
    (out / "data").mkdir(parents=True, exist_ok=True)
    files = {
        "data/thesaurus.csv": _csv(["journal", "category"], [[j, c] for j, (cats, _, _) in JOURNALS.items() for c in cats]),
        "data/rating.csv": _csv(["journal", "rank"], [[j, r] for j, (_, r, _) in JOURNALS.items() if r]),
        "data/category_baseline.csv": _csv(
            ["category", "mean_citations", "mean_impact_factor"],
            [[c, repr(m), repr(i)] for c, (m, i) in category_baseline().items()],
        ),
        "data/journal_impact.csv": _csv(["journal", "impact_factor"], [[j, repr(v)] for j, (_, _, v) in JOURNALS.items()]),
        "data/global_matrix.csv": matrix_csv(CATEGORIES, GLOBAL_FLOWS),
        "data/journal_matrix.csv": matrix_csv(tuple(JOURNALS), journal_flows()),
        "data/coords.csv": _csv(["label", "x", "y"], [[k, repr(x), repr(y)] for k, (x, y) in COORDS.items()]),
    }
    for unit in UNITS:
        files[f"data/{unit.lower()}_records.txt"] = tagged_records(unit)
        files[f"data/{unit.lower()}_citing.csv"] = citing_csv(unit)
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8", newline="")
    manifest = {
        "units": [
            {"name": u, "records": [f"data/{u.lower()}_records.txt"], "citing": [f"data/{u.lower()}_citing.csv"]}
            for u in UNITS
        ],
        "thesaurus": "data/thesaurus.csv",
        "rating_scheme": "data/rating.csv",
        "category_baseline": "data/category_baseline.csv",
        "journal_impact": "data/journal_impact.csv",
        "global_matrix": "data/global_matrix.csv",
        "journal_matrix": "data/journal_matrix.csv",
        "base_coords": "data/coords.csv",
        "output_dir": "out",
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit("usage: python -m idrmetrics.synthetic OUTDIR")
    print(write_fixture(sys.argv[1]))
