"""Scan tables over the (k, h) cone family and their serializations.

CSV output is deterministic byte-for-byte for fixed inputs except for the
timestamp comment line; JSON carries the full report objects with exact
window endpoints rendered as fraction strings.
"""

from __future__ import annotations

import datetime
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .cones import solve_cross_section
from .stability import StabilityReport, stability_verdict

VERSION = "0.1.0"
CSV_SCHEMA = "conestab-scan-v1"
CSV_COLUMNS = (
    "k,h,n,theta_star,H,Lambda,threshold,verdict,L,B_a4,"
    "alpha_min,alpha_max,criterion37"
)


@dataclass(frozen=True)
class ScanTable:
    n: int
    rows: tuple
    metadata: dict

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "metadata": self.metadata,
            "rows": [r.to_json() for r in self.rows],
        }


def _scan_one(args) -> StabilityReport:
    k, h, grid_n, tol = args
    cone = solve_cross_section(k, h)
    return stability_verdict(cone, tol=tol, grid_n=grid_n)


def scan(
    n: int,
    grid_n: int = 4096,
    tol: float = 1e-7,
    jobs: int = 1,
    weight: str = "frobenius",
    seed: int = 0,
) -> ScanTable:
    """Stability reports for every C(k,h) with k,h >= 1 and k+h = n."""
    tasks = [(k, n - k, grid_n, tol) for k in range(1, n)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_scan_one, tasks))
    else:
        rows = [_scan_one(t) for t in tasks]
    rows.sort(key=lambda r: r.k)
    metadata = {
        "version": VERSION,
        "tol": tol,
        "grid_n": grid_n,
        "weight": weight,
        "seed": seed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    return ScanTable(n=n, rows=tuple(rows), metadata=metadata)


def _csv_num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, Fraction):
        return repr(float(x))
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return repr(float(x))


def to_csv(table: ScanTable, weight: str = "frobenius") -> str:
    """Render the scan as CSV; window columns follow the selected weight."""
    md = table.metadata
    lines = [
        f"# schema: {CSV_SCHEMA}",
        f"# columns: {CSV_COLUMNS}",
        f"# meta: version={md['version']} grid_n={md['grid_n']} tol={md['tol']}"
        f" weight={weight} seed={md['seed']}",
        f"# generated: {md['timestamp']}",
        CSV_COLUMNS,
    ]
    for r in table.rows:
        win = r.windows.get(weight if weight != "max" else "frobenius")
        a_min = _csv_num(win.alpha_min) if win else ""
        a_max = _csv_num(win.alpha_max) if win else ""
        lines.append(
            ",".join(
                [
                    str(r.k),
                    str(r.h),
                    str(r.n),
                    repr(r.theta_star),
                    repr(r.H),
                    repr(r.Lambda),
                    repr(r.threshold),
                    r.verdict,
                    _csv_num(r.L),
                    _csv_num(r.B_a4),
                    a_min,
                    a_max,
                    str(r.criterion37_fired).lower(),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def to_json_str(table: ScanTable) -> str:
    return json.dumps(table.to_json(), sort_keys=True, indent=2) + "\n"
