"""CSV and SVG output for experiment records."""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .experiments import (RECORD_FIELDS, RunRecord, complexity_table,
                          phase_table)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    if v is None:
        return ""
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as err:
        raise OSError(f"cannot write {path}: {err}") from err


def write_records(records, path) -> None:
    rows = [[getattr(r, f) for f in RECORD_FIELDS] for r in records]
    _write_csv(Path(path), RECORD_FIELDS, rows)


def write_timings(records, path) -> None:
    rows = [[r.method, r.p, r.n, r.repetition, round(r.wall_time, 6)] for r in records]
    _write_csv(Path(path), ("method", "p", "n", "repetition", "wall_time"), rows)


def load_records(path) -> list[RunRecord]:
    out = []
    try:
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                out.append(RunRecord(
                    method=row["method"], p=int(row["p"]), n=int(row["n"]),
                    repetition=int(row["repetition"]), seed=int(row["seed"]),
                    recovered=row["recovered"] in ("1", "True", "true"),
                    l2_error=float(row["l2_error"]), error=row.get("error", "")))
    except OSError as err:
        raise OSError(f"cannot read {path}: {err}") from err
    return out


def emit_report(records, out_dir, plots: bool = True) -> list[Path]:
    """Write records.csv, per-(method, p) phase-transition tables, complexity.csv and figures."""
    from . import plotting

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = sorted(records, key=lambda r: (r.method, r.p, r.n, r.repetition))
    written = [out / "records.csv"]
    write_records(records, written[0])

    methods = sorted({r.method for r in records})
    ps = sorted({r.p for r in records})
    phase, l2 = {p: {} for p in ps}, {p: {} for p in ps}
    for m in methods:
        for p in ps:
            rows = phase_table(records, m, p)
            if not rows:
                continue
            path = out / f"phase_transition_{m}_{p}.csv"
            _write_csv(path, ("n", "success_ratio", "mean_l2", "sd_l2"), rows)
            written.append(path)
            ns = [r[0] for r in rows]
            phase[p][m] = (ns, [r[1] for r in rows])
            l2[p][m] = (ns, [r[2] for r in rows], [r[3] for r in rows])

    ctable = complexity_table(records)
    path = out / "complexity.csv"
    _write_csv(path, ("p", "method", "m_star", "n_star"), ctable)
    written.append(path)

    if plots and records:
        for p in ps:
            fig = out / f"phase_transition_p{p}.svg"
            plotting.plot_phase_transition(phase[p], p, fig)
            fig2 = out / f"l2_estimation_p{p}.svg"
            plotting.plot_l2_estimation(l2[p], p, fig2)
            written += [fig, fig2]
        curves = {}
        for p, m, _, nstar in ctable:
            curves.setdefault(m, ([], []))
            curves[m][0].append(p)
            curves[m][1].append(nstar)
        fig = out / "complexity.svg"
        plotting.plot_complexity(curves, fig)
        written.append(fig)
    return written
