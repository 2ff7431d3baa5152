"""CSV ingestion and emission.

Two wire formats are owned by the toolkit:

* canonical realized-variance data, header ``symbol,date,close,rv,bpv``
  (one row per symbol and day, bpv may be empty);
* forecast exchange files, header ``model,symbol,date,forecast``.

Floats are serialized with ``repr``, which round-trips bit-exactly in at
most 17 significant digits. All writers are atomic (temp file in the target
directory, then rename).
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
import math
import os
import tempfile
from contextlib import contextmanager

import pandas as pd

from .errors import FormatError
from .protocol import ForecastSet
from .series import RvObservation, RvSeries

logger = logging.getLogger(__name__)

RV_HEADER = ["symbol", "date", "close", "rv", "bpv"]
FORECAST_HEADER = ["model", "symbol", "date", "forecast"]

# Column names of the final Oxford-Man realized library release.
OMI_REQUIRED = ["rv5_ss", "bv", "close_price", "open_price"]


def _fmt(x: float) -> str:
    return repr(float(x))


@contextmanager
def atomic_write(path):
    """Write to a temp file next to ``path`` and rename on success."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _parse_date(text: str, where: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise FormatError(f"{where}: bad ISO date {text!r}") from None


def _parse_float(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise FormatError(f"{where}: bad number {text!r}") from None


def write_rv_csv(series_map, path) -> None:
    """Emit canonical realized-variance rows for one or many series."""
    if isinstance(series_map, RvSeries):
        series_list = [series_map]
    elif isinstance(series_map, dict):
        series_list = list(series_map.values())
    else:
        series_list = list(series_map)
    with atomic_write(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(RV_HEADER)
        for series in series_list:
            for o in series.observations:
                writer.writerow([
                    series.symbol, o.date.isoformat(), _fmt(o.close), _fmt(o.rv),
                    "" if o.bpv is None else _fmt(o.bpv),
                ])


def read_rv_csv(path, floor: float | None = None) -> dict[str, RvSeries]:
    """Read canonical data; rows with rv <= 0 are dropped (or floored).

    Dropping is the default because log models and ratio losses are
    undefined at zero; pass ``floor`` to substitute a small value instead.
    """
    rows: dict[str, list[RvObservation]] = {}
    seen: set[tuple[str, dt.date]] = set()
    dropped = 0
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RV_HEADER:
            raise FormatError(f"{path}: expected header {','.join(RV_HEADER)!r}, "
                              f"got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(RV_HEADER):
                raise FormatError(f"{path}:{lineno}: expected {len(RV_HEADER)} fields")
            where = f"{path}:{lineno}"
            symbol = row[0].strip()
            date = _parse_date(row[1], where)
            close = _parse_float(row[2], where)
            rv = _parse_float(row[3], where)
            bpv = None if row[4].strip() == "" else _parse_float(row[4], where)
            if (symbol, date) in seen:
                raise FormatError(f"{where}: duplicate row for ({symbol}, {date})")
            seen.add((symbol, date))
            if rv <= 0:
                if floor is None:
                    dropped += 1
                    continue
                rv = floor
            if bpv is not None and bpv <= 0 and floor is not None:
                bpv = floor
            rows.setdefault(symbol, []).append(
                RvObservation(date=date, close=close, rv=rv, bpv=bpv))
    if dropped:
        logger.info("%s: dropped %d rows with rv <= 0", path, dropped)
    return {
        sym: RvSeries(sym, tuple(sorted(obs, key=lambda o: o.date)))
        for sym, obs in rows.items()
    }


def normalize_symbol(symbol: str) -> str:
    """Oxford-Man symbols carry a leading dot; match with or without it."""
    return symbol.lstrip(".").upper()


def parse_omi_csv(path, floor: float | None = None) -> dict[str, RvSeries]:
    """Ingest an Oxford-Man realized library export.

    Needs a symbol column, a date column (or unnamed first column), and the
    5-minute subsampled measures. Rows with rv <= 0 are dropped and counted
    unless ``floor`` substitutes a value.
    """
    try:
        df = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        logger.warning("%s: empty file, no series ingested", path)
        return {}
    if df.empty:
        logger.warning("%s: no data rows, no series ingested", path)
        return {}

    sym_col = next((c for c in df.columns if c.lower() == "symbol"), None)
    if sym_col is None:
        raise FormatError(f"{path}: missing symbol column")
    date_col = next((c for c in df.columns if c.lower() == "date"), None)
    if date_col is None:
        date_col = df.columns[0]
        if date_col == sym_col:
            raise FormatError(f"{path}: missing date column")
    for col in OMI_REQUIRED:
        if col not in df.columns:
            raise FormatError(f"{path}: missing column {col!r}")

    rows: dict[str, list[RvObservation]] = {}
    seen: set[tuple[str, dt.date]] = set()
    dropped = 0
    dates = pd.to_datetime(df[date_col], errors="coerce", utc=True)
    for i in range(len(df)):
        lineno = i + 2
        if pd.isna(dates.iloc[i]):
            raise FormatError(f"{path}:{lineno}: bad date {df[date_col].iloc[i]!r}")
        date = dates.iloc[i].date()
        symbol = str(df[sym_col].iloc[i]).strip()
        close = df["close_price"].iloc[i]
        rv = df["rv5_ss"].iloc[i]
        bv = df["bv"].iloc[i]
        if pd.isna(close) or pd.isna(rv):
            raise FormatError(f"{path}:{lineno}: missing close_price or rv5_ss")
        if (symbol, date) in seen:
            raise FormatError(f"{path}:{lineno}: duplicate row for ({symbol}, {date})")
        seen.add((symbol, date))
        rv = float(rv)
        if rv <= 0:
            if floor is None:
                dropped += 1
                continue
            rv = floor
        bpv = None if pd.isna(bv) else float(bv)
        if bpv is not None and bpv <= 0:
            bpv = floor  # None when no floor: treated as missing
        rows.setdefault(symbol, []).append(
            RvObservation(date=date, close=float(close), rv=rv, bpv=bpv))
    if dropped:
        logger.info("%s: dropped %d rows with rv5_ss <= 0", path, dropped)
    return {
        sym: RvSeries(sym, tuple(sorted(obs, key=lambda o: o.date)))
        for sym, obs in rows.items()
    }


def write_forecasts(sets, path) -> None:
    """Emit forecast sets in the exchange schema."""
    with atomic_write(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(FORECAST_HEADER)
        for fs in sets:
            for date, value in fs.entries.items():
                writer.writerow([fs.model_id, fs.symbol, date.isoformat(), _fmt(value)])


def read_forecasts(path) -> list[ForecastSet]:
    """Read forecast sets; write-then-read round-trips bit-exactly."""
    groups: dict[tuple[str, str], dict[dt.date, float]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != FORECAST_HEADER:
            raise FormatError(f"{path}: expected header {','.join(FORECAST_HEADER)!r}, "
                              f"got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(FORECAST_HEADER):
                raise FormatError(f"{path}:{lineno}: expected {len(FORECAST_HEADER)} fields")
            where = f"{path}:{lineno}"
            model, symbol = row[0].strip(), row[1].strip()
            date = _parse_date(row[2], where)
            value = _parse_float(row[3], where)
            if not (math.isfinite(value) and value > 0):
                raise FormatError(f"{where}: forecast must be finite and > 0, got {row[3]}")
            key = (model, symbol)
            entries = groups.setdefault(key, {})
            if date in entries:
                raise FormatError(f"{where}: duplicate forecast for {key + (date,)}")
            entries[date] = value
    return [
        ForecastSet(model_id=model, symbol=symbol,
                    entries=dict(sorted(entries.items())))
        for (model, symbol), entries in groups.items()
    ]


def write_table(df: pd.DataFrame, path) -> None:
    """Emit a report table (plain CSV, no index)."""
    with atomic_write(path) as fh:
        df.to_csv(fh, index=False)
