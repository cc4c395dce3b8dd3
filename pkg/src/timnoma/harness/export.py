"""CSV export of result tables and per-figure plot data."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .results import INT_FIELDS, SNR_FIELDS, USER_FIELDS, ResultTable, SnrRow, UserRow

LONG_HEADER = ("snr_db", "user", "metric", "value")
RESULTS_FILE = "results.csv"
META_FILE = "meta.json"

FIGURES = {
    3: ("mimo", "hybrid BER per user"),
    4: ("mimo", "hybrid vs TDMA BER per user"),
    5: ("siso", "hybrid BER, network and per user"),
    6: ("siso", "hybrid vs TDMA BER per user"),
    7: ("mimo", "hybrid rate, sum and per user"),
    8: ("siso", "hybrid rate, sum and per user"),
    9: ("mimo", "hybrid sum rate vs TDMA"),
    10: ("siso", "hybrid sum rate vs TDMA"),
    11: ("mimo", "hybrid/TDMA sum-rate ratio"),
    12: ("siso", "hybrid/TDMA sum-rate ratio"),
}


class FigureKindError(ValueError):
    pass


def _fmt(value) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])


def long_rows(table: ResultTable):
    for r in table.users:
        for name in USER_FIELDS[2:]:
            yield (r.snr_db, r.user, name, getattr(r, name))
    for a in table.aggregates:
        for name in SNR_FIELDS[1:]:
            yield (a.snr_db, "", name, getattr(a, name))


def export_results(table: ResultTable, path, figures: bool = True) -> list[Path]:
    """Write the long-form CSV, the run metadata and the matching figure files."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / RESULTS_FILE]
    _write_csv(written[0], LONG_HEADER, long_rows(table))
    (out / META_FILE).write_text(json.dumps(table.meta, indent=2, default=str) + "\n")
    written.append(out / META_FILE)
    kind = table.meta.get("kind")
    if figures and kind and table.aggregates:
        for fig, (fig_kind, _) in FIGURES.items():
            if fig_kind == kind:
                written.append(write_figure(table, fig, out))
    return written


def _value(name: str, text: str):
    return int(text) if name in INT_FIELDS else float(text)


def read_results(path) -> ResultTable:
    """Inverse of :func:`export_results` for the long-form CSV (and meta, if present)."""
    path = Path(path)
    csv_path = path / RESULTS_FILE if path.is_dir() else path
    user_vals: dict[tuple[float, int], dict] = {}
    snr_vals: dict[float, dict] = {}
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != LONG_HEADER:
            raise ValueError(f"{csv_path}: unexpected header {header}")
        for snr, user, metric, value in reader:
            s = float(snr)
            if user == "":
                snr_vals.setdefault(s, {"snr_db": s})[metric] = _value(metric, value)
            else:
                u = int(user)
                user_vals.setdefault((s, u), {"snr_db": s, "user": u})[metric] = _value(metric, value)
    users = [UserRow(**v) for v in user_vals.values()]
    aggs = [SnrRow(**v) for v in snr_vals.values()]
    meta = {}
    meta_path = csv_path.parent / META_FILE
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
    return ResultTable(users, aggs, meta)


def figure_data(table: ResultTable, figure: int):
    """Header and rows of one figure's plot-data file (x = SNR in dB)."""
    if figure not in FIGURES:
        raise ValueError(f"figure must be one of {sorted(FIGURES)}, got {figure}")
    kind = table.meta.get("kind")
    want = FIGURES[figure][0]
    if kind is not None and kind != want:
        raise FigureKindError(f"figure {figure} needs a {want} run, table holds a {kind} run")
    users = table.user_labels
    grid = table.snr_grid

    def col(metric):
        return [table.series(metric, u) for u in users]

    if figure in (3, 5):
        cols = col("ber_hybrid")
        header = ["snr_db"] + [f"ber_user{u}" for u in users]
        rows = [[s] + [c[i] for c in cols] for i, s in enumerate(grid)]
        if figure == 5:
            net = table.series("ber_network_hybrid")
            header.insert(1, "ber_network")
            rows = [[r[0], net[i]] + r[1:] for i, r in enumerate(rows)]
        else:
            c = table.meta.get("power", {}).get("c")
            c = math.nan if c is None else float(c)
            header.insert(1, "c")
            rows = [[r[0], c] + r[1:] for r in rows]
        return header, rows
    if figure in (4, 6):
        h, t = col("ber_hybrid"), col("ber_tdma")
        header = ["snr_db"]
        for u in users:
            header += [f"ber_hybrid_user{u}", f"ber_tdma_user{u}"]
        rows = []
        for i, s in enumerate(grid):
            row = [s]
            for a, b in zip(h, t):
                row += [a[i], b[i]]
            rows.append(row)
        return header, rows
    if figure in (7, 8):
        cols = col("rate_hybrid_mean")
        total = table.series("sum_rate_hybrid")
        header = ["snr_db", "sum_rate"] + [f"rate_user{u}" for u in users]
        return header, [[s, total[i]] + [c[i] for c in cols] for i, s in enumerate(grid)]
    if figure in (9, 10):
        h = table.series("sum_rate_hybrid")
        hw = table.series("sum_rate_hybrid_hw")
        t = table.series("tdma_average_rate")
        tw = table.series("tdma_average_hw")
        cols = col("rate_tdma_mean")
        header = ["snr_db", "sum_rate_hybrid", "sum_rate_hybrid_hw", "tdma_average_rate",
                  "tdma_average_hw"] + [f"rate_tdma_user{u}" for u in users]
        return header, [[s, h[i], hw[i], t[i], tw[i]] + [c[i] for c in cols]
                        for i, s in enumerate(grid)]
    ratio = table.series("ratio")
    return ["snr_db", "ratio"], [[s, ratio[i]] for i, s in enumerate(grid)]


def write_figure(table: ResultTable, figure: int, out_dir) -> Path:
    header, rows = figure_data(table, figure)
    out = Path(out_dir) / f"fig{figure:02d}.csv"
    _write_csv(out, header, rows)
    return out
