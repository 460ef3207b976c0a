"""Study-data ingestion, prevalence tables and report serialization.

Studies CSV comes in two shapes, both UTF-8 with a header row::

    study_id,n_participants,k_ab,n_ab,k_cd,n_cd
    study_id,n_participants,rho_ab,rho_cd

An optional trailing ``source`` column groups rows; without it every row
takes the file stem as its source.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .exceptions import DataError
from .testkit import FrequencyPair, Verdict, ci_strong_consistency, strong_test, weak_test

TOOL_VERSION = "0.1.0"
COUNT_COLUMNS = ("study_id", "n_participants", "k_ab", "n_ab", "k_cd", "n_cd")
FREQ_COLUMNS = ("study_id", "n_participants", "rho_ab", "rho_cd")
SUMMARY_COLUMNS = ("source", "pr_a", "pr_c", "weak_cre_pct", "strong_cre_pct", "strong_rcre_pct", "n")


@dataclass(frozen=True)
class StudyRecord:
    study_id: str
    n_participants: int
    rho_ab: float
    rho_cd: float
    source: str = ""
    k_ab: Optional[int] = None
    n_ab: Optional[int] = None
    k_cd: Optional[int] = None
    n_cd: Optional[int] = None

    def __post_init__(self):
        if self.n_participants < 1:
            raise DataError(f"{self.study_id}: n_participants must be positive")
        # FrequencyPair does the range and count checks
        self.pair()

    @property
    def has_counts(self) -> bool:
        return self.n_ab is not None

    def pair(self) -> FrequencyPair:
        return FrequencyPair(self.rho_ab, self.rho_cd, self.k_ab, self.n_ab, self.k_cd, self.n_cd)


def _int(text: str, name: str, line: int) -> int:
    try:
        v = int(text)
    except ValueError:
        raise DataError(f"line {line}: {name}={text!r} is not an integer") from None
    if v < 0:
        raise DataError(f"line {line}: {name} must be nonnegative")
    return v


def _float(text: str, name: str, line: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"line {line}: {name}={text!r} is not a number") from None
    if not 0.0 <= v <= 1.0:
        raise DataError(f"line {line}: {name}={v} outside [0, 1]")
    return v


def load_studies(path) -> list[StudyRecord]:
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        has_source = header[-1:] == ["source"]
        cols = tuple(header[:-1] if has_source else header)
        if cols == COUNT_COLUMNS:
            counts = True
        elif cols == FREQ_COLUMNS:
            counts = False
        else:
            raise DataError(f"{path}: unrecognised header {','.join(header)}")
        records = []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"line {line}: expected {len(header)} fields, got {len(row)}")
            vals = [c.strip() for c in row]
            source = vals[-1] if has_source else path.stem
            n_part = _int(vals[1], "n_participants", line)
            try:
                if counts:
                    k_ab, n_ab, k_cd, n_cd = (_int(v, c, line) for v, c in zip(vals[2:6], COUNT_COLUMNS[2:]))
                    if n_ab < 1 or n_cd < 1 or k_ab > n_ab or k_cd > n_cd:
                        raise DataError(f"line {line}: counts must satisfy 0 <= k <= n, n >= 1")
                    rec = StudyRecord(vals[0], n_part, k_ab / n_ab, k_cd / n_cd, source, k_ab, n_ab, k_cd, n_cd)
                else:
                    rec = StudyRecord(
                        vals[0], n_part, _float(vals[2], "rho_ab", line), _float(vals[3], "rho_cd", line), source
                    )
            except DataError as exc:
                msg = str(exc)
                raise DataError(msg if msg.startswith("line") else f"line {line}: {msg}") from None
            records.append(rec)
    return records


def write_studies(records: Sequence[StudyRecord], path) -> None:
    """Write records back in count form when every record has counts, else frequency form."""
    counts = all(r.has_counts for r in records)
    header = list(COUNT_COLUMNS if counts else FREQ_COLUMNS) + ["source"]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in records:
            if counts:
                w.writerow([r.study_id, r.n_participants, r.k_ab, r.n_ab, r.k_cd, r.n_cd, r.source])
            else:
                w.writerow([r.study_id, r.n_participants, _g6(r.rho_ab), _g6(r.rho_cd), r.source])


def convert_external(path, out, columns: Mapping[str, str], source: Optional[str] = None) -> int:
    """Rename the columns of a third-party CSV into the studies schema.

    ``columns`` maps schema names (``study_id``, ``n_participants`` and
    either the count or frequency columns) to names in the input file.
    Returns the number of rows written. No data is bundled; point this at a
    replication package you have obtained yourself.
    """
    target = COUNT_COLUMNS if "k_ab" in columns else FREQ_COLUMNS
    missing = [c for c in target if c not in columns]
    if missing:
        raise DataError(f"column mapping lacks {', '.join(missing)}")
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    with Path(out).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(target) + ["source"])
        for i, row in enumerate(rows, start=2):
            try:
                w.writerow([row[columns[c]] for c in target] + [source or Path(path).stem])
            except KeyError as exc:
                raise DataError(f"line {i}: missing column {exc.args[0]!r}") from None
    return len(rows)


def fixture_path() -> Path:
    return Path(str(resources.files("crelab") / "data" / "studies_fixture.csv"))


def golden_verdicts_path() -> Path:
    return Path(str(resources.files("crelab") / "data" / "studies_fixture_verdicts.json"))


# --------------------------------------------------------------------------
# Prevalence tables
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StudyVerdicts:
    study_id: str
    source: str
    weak: Verdict
    strong: Verdict
    ci_flags: Optional[frozenset] = None


@dataclass
class SummaryRow:
    source: str
    pr_a: float
    pr_c: float
    weak_cre_pct: float
    strong_cre_pct: float
    strong_rcre_pct: float
    n: int
    ci_cre_pct: Optional[float] = None
    weighted_violation_pct: float = 0.0


@dataclass
class SummaryTable:
    rows: list
    verdicts: list = field(default_factory=list)
    options: dict = field(default_factory=dict)

    def row(self, source: str) -> SummaryRow:
        for r in self.rows:
            if r.source == source:
                return r
        raise KeyError(source)


def _pct(mask) -> float:
    return 100.0 * float(np.mean(mask)) if len(mask) else 0.0


def classify_studies(
    records: Sequence[StudyRecord],
    tol: float = 0.0,
    ci_level: Optional[float] = None,
    weighting: str = "unweighted",
    ci_method: str = "wald",
) -> SummaryTable:
    """Per-source prevalence of weak and strong reversals.

    ``weighting`` only affects the PrA/PrC columns; the weighted violation
    share always uses participant counts.
    """
    if not records:
        raise DataError("no study records to classify")
    if weighting not in ("unweighted", "participants"):
        raise ValueError(f"unknown weighting {weighting!r}")
    verdicts = []
    for rec in records:
        fp = rec.pair()
        flags = None
        if ci_level is not None:
            if rec.has_counts:
                flags = ci_strong_consistency(rec.k_ab, rec.n_ab, rec.k_cd, rec.n_cd, ci_level, ci_method)
            else:
                flags = frozenset({strong_test(fp)})
        verdicts.append(StudyVerdicts(rec.study_id, rec.source, weak_test(fp, tol), strong_test(fp), flags))

    rows = []
    for src in dict.fromkeys(r.source for r in records):
        idx = [i for i, r in enumerate(records) if r.source == src]
        recs = [records[i] for i in idx]
        vs = [verdicts[i] for i in idx]
        part = np.array([r.n_participants for r in recs], dtype=float)
        wts = part if weighting == "participants" else np.ones(len(recs))
        strong = np.array([v.strong for v in vs], dtype=object)
        rows.append(
            SummaryRow(
                source=src,
                pr_a=float(np.average([r.rho_ab for r in recs], weights=wts)),
                pr_c=float(np.average([r.rho_cd for r in recs], weights=wts)),
                weak_cre_pct=_pct([v.weak == Verdict.CRE for v in vs]),
                strong_cre_pct=_pct(strong == Verdict.CRE),
                strong_rcre_pct=_pct(strong == Verdict.RCRE),
                n=len(recs),
                ci_cre_pct=_pct([Verdict.CRE in v.ci_flags for v in vs]) if ci_level is not None else None,
                weighted_violation_pct=100.0 * float(np.sum(part * (strong != Verdict.EU)) / part.sum()),
            )
        )
    opts = {"tol": tol, "ci_level": ci_level, "weighting": weighting, "ci_method": ci_method}
    return SummaryTable(rows, verdicts, opts)


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------


def _g6(x: float) -> str:
    return f"{x:.6g}"


def _round6(x: float) -> float:
    return float(_g6(x)) if math.isfinite(x) else x


def _plain(obj):
    """Convert results into JSON-ready values with floats at 6 significant digits."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return _round6(v) if math.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted(_plain(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if hasattr(obj, "summary"):
        return _plain(obj.summary())
    if dataclasses.is_dataclass(obj):
        return _plain({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)})
    return obj


def _table_rows(results) -> tuple[list, list]:
    """Header and rows for the CSV form of a result object."""
    if isinstance(results, SummaryTable):
        return list(SUMMARY_COLUMNS), [[getattr(r, c) for c in SUMMARY_COLUMNS] for r in results.rows]
    if hasattr(results, "k_ab") and hasattr(results, "choices"):  # RegionCounts
        return ["replication", "rho_ab", "rho_cd"], [
            [i, a / results.choices, c / results.choices] for i, (a, c) in enumerate(zip(results.k_ab, results.k_cd))
        ]
    if hasattr(results, "combos"):  # SweepSummary
        return ["x", "y", "p", "r", "cre"], [[int(x), int(y), p, r, int(c)] for x, y, p, r, c in results.combos]
    if hasattr(results, "assertions"):  # SuiteReport
        hdr = ["suite", "name", "passed", "estimate", "se", "tolerance"]
        return hdr, [[results.suite_id, a.name, a.passed, a.estimate, a.se, a.tolerance] for a in results.assertions]
    if isinstance(results, Sequence) and results and all(hasattr(r, "e_min") for r in results):
        return ["gamma", "e_min", "e_max"], [[r.gamma, r.e_min, r.e_max] for r in results]
    if isinstance(results, Sequence) and results and isinstance(results[0], Mapping):
        hdr = list(results[0])
        return hdr, [[row.get(k) for k in hdr] for row in results]
    if isinstance(results, Mapping):
        return list(results), [list(results.values())]
    raise TypeError(f"no CSV layout for {type(results).__name__}")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _g6(float(v))
    return str(v)


def render_report(results, fmt: str = "json", meta: Optional[Mapping] = None) -> str:
    if fmt == "json":
        meta = dict(meta or {})
        payload = {
            "meta": {
                "seed": meta.pop("seed", None),
                "tool_version": TOOL_VERSION,
                "config": _plain(meta.pop("config", meta)),
            },
            "results": _plain(results),
        }
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        header, rows = _table_rows(results)
        lines = [",".join(header)] + [",".join(_cell(v) for v in row) for row in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def write_report(results, fmt: str, path, meta: Optional[Mapping] = None) -> None:
    text = render_report(results, fmt, meta)
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_summary_csv(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        out.append({k: (row[k] if k == "source" else int(row[k]) if k == "n" else float(row[k])) for k in row})
    return out


def read_report(path) -> dict:
    with Path(path).open(encoding="utf-8") as fh:
        return json.load(fh)


def verdict_vector(table: SummaryTable) -> list[dict]:
    """Per-study verdicts in the layout of the golden fixture file."""
    return [{"study_id": v.study_id, "weak": v.weak.value, "strong": v.strong.value} for v in table.verdicts]
