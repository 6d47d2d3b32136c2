"""Report emission: merge metrics record files into CSV + Markdown tables.

Records are grouped into cells by (task, mode); each cell aggregates its
seeds into mean ± one standard deviation.  Tasks render as separate tables
with a deterministic row and column order.  Edge-model records additionally
render a per-edge-type precision/recall/F table.  Gap files written by suite
runs are surfaced verbatim so a partial report is explicit about what is
missing.
"""

from __future__ import annotations

import glob
import json
import math
import os

from ..graphs.edges import EDGE_TYPE_NAMES
from .records import MetricsRecord, read_records, seed_mean_std


def collect_records(records_dir: str) -> list[MetricsRecord]:
    records = []
    for path in sorted(glob.glob(os.path.join(records_dir, "*.jsonl"))):
        records.extend(read_records(path))
    return records


def collect_gaps(records_dir: str) -> list[dict]:
    gaps = []
    for path in sorted(glob.glob(os.path.join(records_dir, "*.gaps.json"))):
        with open(path) as f:
            gaps.extend(json.load(f))
    return gaps


def _is_scalar(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def cell_stats(records: list[MetricsRecord]
               ) -> dict[tuple[str, str], dict]:
    """(task, mode) -> {"metrics": {name: (mean, std)}, "seeds": [...],
    "tau": value-or-None}."""
    cells: dict[tuple[str, str], list[MetricsRecord]] = {}
    for r in records:
        cells.setdefault((r.task, r.mode), []).append(r)
    out = {}
    for key in sorted(cells):
        rs = cells[key]
        names = sorted({m for r in rs for m, v in r.metrics.items()
                        if _is_scalar(v)})
        metrics = {n: seed_mean_std([r for r in rs if n in r.metrics], n)
                   for n in names}
        taus = sorted({r.tau for r in rs if r.tau is not None})
        out[key] = {
            "metrics": metrics,
            "seeds": sorted({r.seed for r in rs}),
            "tau": taus[0] if len(taus) == 1 else (taus or None),
        }
    return out


def _fmt(mean: float, std: float, n: int) -> str:
    if math.isnan(mean):
        return "n/a"
    if n <= 1 or math.isnan(std):
        return f"{mean:.3f}"
    return f"{mean:.3f} ± {std:.3f}"


def _csv_quote(s: str) -> str:
    if any(c in s for c in ',"\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def render_csv(stats: dict) -> str:
    lines = ["task,mode,metric,mean,std,n_seeds,tau"]
    for (task, mode), cell in stats.items():
        tau = cell["tau"]
        for metric, (mean, std) in cell["metrics"].items():
            lines.append(",".join([
                _csv_quote(task), _csv_quote(mode), _csv_quote(metric),
                f"{mean:.6g}", f"{std:.6g}", str(len(cell["seeds"])),
                "" if tau is None else str(tau),
            ]))
    return "\n".join(lines) + "\n"


def _edge_type_table(cell: dict) -> list[str]:
    n = len(cell["seeds"])
    lines = ["| edge type | precision | recall | F |",
             "| --- | --- | --- | --- |"]
    for name in EDGE_TYPE_NAMES:
        if f"f_{name}" not in cell["metrics"]:
            continue
        row = [name]
        for prefix in ("p_", "r_", "f_"):
            mean, std = cell["metrics"].get(prefix + name, (math.nan, 0.0))
            row.append(_fmt(mean, std, n))
        lines.append("| " + " | ".join(row) + " |")
    return lines


def render_markdown(stats: dict, gaps: list[dict] | None = None) -> str:
    tasks = sorted({task for task, _ in stats})
    out = ["# Results", ""]
    for task in tasks:
        cells = {mode: cell for (t, mode), cell in stats.items() if t == task}
        # Headline columns: union of metric names, minus the per-type edge
        # columns which get their own table below.
        headline = sorted({
            m for cell in cells.values() for m in cell["metrics"]
            if not any(m.startswith(p) and m[2:] in EDGE_TYPE_NAMES
                       for p in ("p_", "r_", "f_"))})
        out.append(f"## {task}")
        out.append("")
        out.append("| mode | " + " | ".join(headline) + " | seeds | tau |")
        out.append("| --- |" + " --- |" * (len(headline) + 2))
        for mode in sorted(cells):
            cell = cells[mode]
            n = len(cell["seeds"])
            row = [mode]
            for m in headline:
                if m in cell["metrics"]:
                    row.append(_fmt(*cell["metrics"][m], n))
                else:
                    row.append("")
            row.append(",".join(str(s) for s in cell["seeds"]))
            row.append("" if cell["tau"] is None else str(cell["tau"]))
            out.append("| " + " | ".join(row) + " |")
        out.append("")
        for mode in sorted(cells):
            cell = cells[mode]
            if any(f"f_{n}" in cell["metrics"] for n in EDGE_TYPE_NAMES):
                out.append(f"### {task} / {mode}: per-edge-type quality")
                out.append("")
                out.extend(_edge_type_table(cell))
                out.append("")
    if gaps:
        out.append("## Gaps")
        out.append("")
        out.append("| suite | cell | seed | error |")
        out.append("| --- | --- | --- | --- |")
        for g in gaps:
            out.append("| {suite} | {cell} | {seed} | {error} |".format(
                suite=g.get("suite", ""), cell=g.get("cell", ""),
                seed=g.get("seed", ""), error=g.get("error", "")))
        out.append("")
    return "\n".join(out)


def emit_report(records: list[MetricsRecord], out_dir: str,
                gaps: list[dict] | None = None) -> dict[str, str]:
    if not records:
        raise ValueError("no records to report")
    os.makedirs(out_dir, exist_ok=True)
    stats = cell_stats(records)
    paths = {"csv": os.path.join(out_dir, "report.csv"),
             "markdown": os.path.join(out_dir, "report.md")}
    with open(paths["csv"], "w") as f:
        f.write(render_csv(stats))
    with open(paths["markdown"], "w") as f:
        f.write(render_markdown(stats, gaps))
    return paths


def report_from_dir(records_dir: str, out_dir: str) -> dict[str, str]:
    return emit_report(collect_records(records_dir), out_dir,
                       collect_gaps(records_dir))
