"""Monthly energy reports, CSV emission, and yearly comparison math."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path

MONTHS = ("jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec")
WH_PER_MWH = 1e6


@dataclass
class MonthlyEnergyReport:
    controller: str
    monthly_wh: list[float]                 # 12 entries, mean over runs
    zone_monthly_wh: list[list[float]] | None = None  # [month][zone]

    def __post_init__(self):
        if len(self.monthly_wh) != 12:
            raise ValueError(f"need 12 monthly values, got {len(self.monthly_wh)}")

    @property
    def yearly_wh(self) -> float:
        return float(sum(self.monthly_wh))

    def monthly_mwh(self) -> list[float]:
        return [round_half_even(v / WH_PER_MWH) for v in self.monthly_wh]

    @property
    def yearly_mwh(self) -> float:
        return round_half_even(self.yearly_wh / WH_PER_MWH)


def round_half_even(value: float, places: int = 2) -> float:
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(float(value))).quantize(q, rounding=ROUND_HALF_EVEN))


def yearly_delta(report: MonthlyEnergyReport, reference: MonthlyEnergyReport) -> float:
    """Percent difference of yearly totals relative to the reference."""
    ref = reference.yearly_wh
    if ref == 0:
        raise ZeroDivisionError("reference report has zero yearly total")
    return 100.0 * (report.yearly_wh - ref) / ref


def write_report_csv(path: str | Path, reports: list[MonthlyEnergyReport]) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["controller", *MONTHS, "yearly_mwh"])
        for r in reports:
            writer.writerow(
                [r.controller]
                + [f"{v:.2f}" for v in r.monthly_mwh()]
                + [f"{r.yearly_mwh:.2f}"]
            )


def read_report_csv(path: str | Path) -> list[MonthlyEnergyReport]:
    """Read a report CSV back; monthly values are interpreted as MWh."""
    reports = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ("controller", *MONTHS) if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        for row in reader:
            monthly = [float(row[m]) * WH_PER_MWH for m in MONTHS]
            reports.append(MonthlyEnergyReport(controller=row["controller"], monthly_wh=monthly))
    return reports


def write_delta_csv(
    path: str | Path, reports: list[MonthlyEnergyReport], reference_name: str = "hvac-dpt"
) -> list[tuple[str, float]]:
    ref = next((r for r in reports if r.controller == reference_name), None)
    if ref is None:
        raise ValueError(f"no '{reference_name}' row to compare against")
    rows = []
    for r in reports:
        if r.controller == reference_name:
            continue
        rows.append((r.controller, round_half_even(yearly_delta(r, ref))))
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["controller", "delta_vs_hvac_dpt_pct"])
        for name, delta in rows:
            writer.writerow([name, f"{delta:+.2f}"])
    return rows
