"""Synthetic weather generation and CSV ingestion.

The generator replaces measured weather files with a deterministic
diurnal-plus-seasonal model so every experiment is reproducible from a
seed. Real series can be supplied through ``load_weather_csv``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

STEPS_PER_HOUR = 4
STEPS_PER_DAY = 96

# Denver-like monthly climate, index 0 = January.
MONTHLY_MEAN_C = [-1.0, 1.0, 5.0, 9.0, 14.0, 20.0, 23.0, 22.0, 17.0, 10.0, 3.0, -1.0]
MONTHLY_DIURNAL_AMP_C = [6.0, 6.5, 7.0, 7.5, 8.0, 8.5, 9.0, 8.5, 8.0, 7.5, 6.5, 6.0]
MONTHLY_SOLAR_PEAK_W = [350.0, 430.0, 540.0, 650.0, 750.0, 830.0, 850.0, 790.0, 660.0, 510.0, 380.0, 320.0]
MONTHLY_SUNRISE_H = [7.5, 7.0, 6.5, 6.0, 5.5, 5.0, 5.25, 5.75, 6.25, 6.75, 7.25, 7.5]
MONTHLY_SUNSET_H = [16.75, 17.5, 18.25, 19.0, 19.75, 20.25, 20.25, 19.75, 19.0, 18.0, 17.0, 16.5]

NOISE_AMP_C = 2.5
CLOUD_MIN = 0.35


class WeatherCsvError(ValueError):
    """Malformed weather CSV."""


@dataclass(frozen=True)
class WeatherSeries:
    outdoor_temp: np.ndarray    # degC, one entry per 15-minute step
    solar_radiation: np.ndarray  # W (effective per m^2 of aperture), >= 0

    def __post_init__(self):
        if len(self.outdoor_temp) != len(self.solar_radiation):
            raise ValueError("temperature and solar series must have equal length")
        if np.any(self.solar_radiation < 0):
            raise ValueError("solar radiation must be non-negative")

    def __len__(self) -> int:
        return len(self.outdoor_temp)


def generate_weather(seed: int, start_month: int, n_steps: int) -> WeatherSeries:
    """Deterministic synthetic weather for an episode starting at local midnight.

    Diurnal sinusoid (warmest at 15:00) on top of a monthly mean, with a
    bounded slow-moving noise component. Solar follows a half-sine between
    the month's sunrise and sunset, modulated by a seeded cloud factor.
    """
    if n_steps <= 0:
        raise ValueError("n_steps must be > 0")
    if not (1 <= start_month <= 12):
        raise ValueError("start_month must be in 1..12")

    m = start_month - 1
    rng = np.random.default_rng([int(seed), start_month, 0x5EED])

    t = np.arange(n_steps)
    hour = (t / STEPS_PER_HOUR) % 24.0

    base = MONTHLY_MEAN_C[m] + MONTHLY_DIURNAL_AMP_C[m] * np.sin(
        2.0 * math.pi * (hour - 9.0) / 24.0
    )
    # AR(1) noise, clipped so excursions stay bounded.
    white = rng.normal(0.0, 1.0, size=n_steps)
    noise = np.empty(n_steps)
    acc = 0.0
    for i in range(n_steps):
        acc = 0.98 * acc + 0.2 * white[i]
        noise[i] = acc
    noise = np.clip(noise * NOISE_AMP_C, -2.0 * NOISE_AMP_C, 2.0 * NOISE_AMP_C)
    outdoor = base + noise

    rise, set_ = MONTHLY_SUNRISE_H[m], MONTHLY_SUNSET_H[m]
    day_frac = (hour - rise) / (set_ - rise)
    shape = np.where(
        (day_frac > 0.0) & (day_frac < 1.0), np.sin(math.pi * np.clip(day_frac, 0.0, 1.0)), 0.0
    )
    # Cloud cover changes day by day, constant within a day.
    n_days = n_steps // STEPS_PER_DAY + 1
    cloud_by_day = rng.uniform(CLOUD_MIN, 1.0, size=n_days)
    cloud = cloud_by_day[t // STEPS_PER_DAY]
    solar = np.maximum(MONTHLY_SOLAR_PEAK_W[m] * shape * cloud, 0.0)

    return WeatherSeries(outdoor_temp=outdoor, solar_radiation=solar)


CSV_COLUMNS = ("step", "outdoor_c", "solar_w")


def load_weather_csv(path: str | Path) -> WeatherSeries:
    """Read a weather series with header ``step,outdoor_c,solar_w``.

    Errors cite the offending column or 1-based data row.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in CSV_COLUMNS:
            if col not in header:
                raise WeatherCsvError(f"{path.name}: missing column '{col}'")
        temps: list[float] = []
        solar: list[float] = []
        for row_no, row in enumerate(reader, start=1):
            for col in ("outdoor_c", "solar_w"):
                raw = (row.get(col) or "").strip()
                try:
                    value = float(raw)
                except ValueError:
                    raise WeatherCsvError(
                        f"{path.name}: non-numeric {col} {raw!r} at row {row_no}"
                    ) from None
                if math.isnan(value) or math.isinf(value):
                    raise WeatherCsvError(f"{path.name}: non-finite {col} at row {row_no}")
                if col == "outdoor_c" and not (-60.0 <= value <= 60.0):
                    raise WeatherCsvError(
                        f"{path.name}: outdoor_c {value} out of range [-60, 60] at row {row_no}"
                    )
                if col == "solar_w" and not (0.0 <= value <= 2000.0):
                    raise WeatherCsvError(
                        f"{path.name}: solar_w {value} out of range [0, 2000] at row {row_no}"
                    )
                (temps if col == "outdoor_c" else solar).append(value)
    if not temps:
        raise WeatherCsvError(f"{path.name}: series is empty (too short) at row 1")
    return WeatherSeries(
        outdoor_temp=np.asarray(temps, dtype=np.float64),
        solar_radiation=np.asarray(solar, dtype=np.float64),
    )


def save_weather_csv(series: WeatherSeries, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for i in range(len(series)):
            writer.writerow([i, repr(float(series.outdoor_temp[i])), repr(float(series.solar_radiation[i]))])
