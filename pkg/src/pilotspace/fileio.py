"""Bit-stable file formats: complex matrices as JSON, curve tables as CSV.

Matrices are serialized as nested arrays of [re, im] pairs (row-major)
with an explicit dims header.  Floats go through ``repr``, the shortest
decimal that round-trips IEEE doubles exactly, so matrices written and
read back compare bit-equal and reruns produce byte-identical files.
"""

from __future__ import annotations

import io
import json
import math

import numpy as np


def format_float(x):
    """Exact-round-trip decimal text for a double (handles inf)."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def matrix_to_json_obj(M):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    rows, cols = M.shape
    return {
        "type": "complex_matrix",
        "rows": rows,
        "cols": cols,
        "data": [[[float(M[i, j].real), float(M[i, j].imag)] for j in range(cols)]
                 for i in range(rows)],
    }


def matrix_from_json_obj(obj):
    if not isinstance(obj, dict) or obj.get("type") != "complex_matrix":
        raise ValueError("not a complex_matrix JSON object")
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if len(data) != rows or any(len(r) != cols for r in data):
        raise ValueError("matrix data does not match the dims header")
    M = np.empty((rows, cols), dtype=complex)
    for i, row in enumerate(data):
        for j, (re, im) in enumerate(row):
            M[i, j] = complex(re, im)
    return M


def write_matrix(path, M):
    with open(path, "w") as fh:
        json.dump(matrix_to_json_obj(M), fh, indent=1)
        fh.write("\n")


def read_matrix(path):
    with open(path) as fh:
        return matrix_from_json_obj(json.load(fh))


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


CSV_HEADER = "strategy,delta_deg,psnr_db,relative_bound,relative_bound_db,trials"


def curve_table_csv(table):
    """Render a curve table as CSV text, rows sorted by (strategy, delta, psnr)."""
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for row in table.sorted_rows():
        if row.relative_bound > 0 and math.isfinite(row.relative_bound):
            in_db = format_float(10.0 * math.log10(row.relative_bound))
        else:
            in_db = "inf" if row.relative_bound > 0 else "-inf"
        buf.write(
            f"{row.strategy},{format_float(row.delta_deg)},{format_float(row.psnr_db)},"
            f"{format_float(row.relative_bound)},{in_db},{row.trials}\n"
        )
    return buf.getvalue()


def write_curve_table(path, table):
    with open(path, "w", newline="") as fh:
        fh.write(curve_table_csv(table))


def gnuplot_script(csv_path, table):
    """Plotting script (gnuplot syntax) for a curve-table CSV."""
    curves = sorted({(r.strategy, r.delta_deg) for r in table.rows})
    lines = [
        "set datafile separator ','",
        "set key outside",
        "set xlabel 'pSNR (dB)'",
        "set ylabel 'relative MSE lower bound (dB)'",
        "set grid",
    ]
    plots = []
    for strategy, delta in curves:
        cond = f"(stringcolumn(1) eq '{strategy}' && column(2) == {format_float(delta)})"
        title = f"{strategy} (delta={format_float(delta)} deg)"
        plots.append(
            f"'{csv_path}' using ($3):({cond} ? $5 : 1/0) with linespoints title '{title}'"
        )
    lines.append("plot \\\n    " + ", \\\n    ".join(plots))
    lines.append("pause -1 'press return to close'")
    return "\n".join(lines) + "\n"
