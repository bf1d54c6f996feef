"""Delimited and JSON emission with exact rational columns.

Rational columns print as ``p/q`` exactly; decimal columns are 12-significant-
digit renderings of the same number, so emitted tables can be checked with
zero tolerance and still read at a glance.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from importlib import resources
from pathlib import Path


def fmt_rational(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def fmt_decimal(x) -> str:
    return f"{float(x):.12g}"


def parse_number(text: str):
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    if text.lstrip("+-").isdigit():
        return int(text)
    return float(text)


def write_csv(path: Path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


# --- report emission ---------------------------------------------------------


def emit_example(report, outdir: Path, fmt: str = "csv") -> list[Path]:
    outdir = Path(outdir)
    written = []
    att_rows = [
        ("".join(str(b) for b in state), fmt_rational(p), fmt_decimal(p))
        for state, p in sorted(report.attainability.mass.items(), reverse=True)
    ]
    lot_rows = [
        (rol.compact(),) + tuple(fmt_rational(f) for f in lot.probs)
        for rol, lot in report.lotteries
    ]
    m = len(report.values)
    sweep_lam = [
        (fmt_decimal(lam), rol.compact(), fmt_decimal(u)) for lam, rol, u in report.lam_rows
    ]
    sweep_omega = [
        (fmt_decimal(w), rol.compact(), fmt_decimal(u)) for w, rol, u in report.omega_rows
    ]
    if fmt == "csv":
        written.append(write_csv(outdir / "attainability.csv", ("state", "prob_rational", "prob_decimal"), att_rows))
        written.append(
            write_csv(outdir / "lotteries.csv", ("rol",) + tuple(f"f_{s}" for s in range(1, m + 1)), lot_rows)
        )
        written.append(write_csv(outdir / "sweep_lambda.csv", ("lambda_or_omega", "rol", "utility"), sweep_lam))
        written.append(write_csv(outdir / "sweep_omega.csv", ("lambda_or_omega", "rol", "utility"), sweep_omega))
    else:
        written.append(
            write_json(
                outdir / "example.json",
                {
                    "attainability": [
                        {"state": s, "prob": r} for s, r, _ in att_rows
                    ],
                    "lotteries": {row[0]: list(row[1:]) for row in lot_rows},
                    "sweep_lambda": [list(r) for r in sweep_lam],
                    "sweep_omega": [list(r) for r in sweep_omega],
                },
            )
        )
    return written


def emit_classify(report, outdir: Path, fmt: str = "csv") -> list[Path]:
    outdir = Path(outdir)
    rows = [
        (score, rol, count, str(tr).lower(), str(trm).lower())
        for score, rol, count, tr, trm in report.rows
    ]
    summary = {
        "overall": {
            "count": report.total,
            "trm_share": report.trm_share(),
            "truthful_share": report.truthful_total / report.total if report.total else 0.0,
        },
        "per_score": {
            str(score): {
                "count": total,
                "trm_share": trm / total if total else 0.0,
                "truthful_share": tt / total if total else 0.0,
            }
            for score, (total, trm, tt) in sorted(report.per_score.items())
        },
    }
    written = []
    if fmt == "csv":
        written.append(
            write_csv(
                outdir / "classified.csv",
                ("priority_score", "rol", "count", "is_truthful", "is_trm"),
                rows,
            )
        )
    written.append(write_json(outdir / "classify_summary.json", summary))
    return written


def emit_elite(report, outdir: Path, fmt: str = "csv") -> list[Path]:
    outdir = Path(outdir)
    rows = [
        (fmt_decimal(lam), fmt_decimal(p), fmt_decimal(report.cutoffs[lam]))
        for lam, p in zip(report.problem.levels, report.problem.level_probs)
    ]
    written = []
    if fmt == "csv":
        written.append(write_csv(outdir / "elite_cutoffs.csv", ("loss_dominance", "prob", "cutoff"), rows))
    stats = {
        "replications": report.replications,
        "envy_rate": report.envy_rate,
        "elite_filled_rate": report.elite_filled_rate,
        "displaced_rate": report.displaced_rate,
        "cutoffs": {fmt_decimal(l): report.cutoffs[l] for l in report.problem.levels},
    }
    written.append(write_json(outdir / "elite_stats.json", stats))
    return written


def read_classify_csv(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"priority_score", "rol", "count"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns priority_score, rol, count")
        for k, row in enumerate(reader, start=2):
            try:
                rows.append((int(row["priority_score"]), row["rol"].strip(), int(row["count"])))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}, line {k}: malformed row ({exc})") from None
    return rows


def bundled_table4_rows() -> list:
    ref = resources.files("lossmatch.data").joinpath("li2017_rols.csv")
    with resources.as_file(ref) as path:
        return read_classify_csv(path)
