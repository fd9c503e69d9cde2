"""Dataset ingestion and pre-smoothing.

Input CSVs carry a ``date,cases[,removals]`` header with ISO-8601 dates.
Rows are date-sorted and calendar gaps are zero-filled (with a warning in
the parse report); counts must be nonnegative integers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np


class MalformedRow(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass
class IncidenceDataset:
    dates: list
    cases: np.ndarray
    removals: np.ndarray | None = None
    population: int | None = None
    notes: list = field(default_factory=list)

    def __post_init__(self):
        self.cases = np.asarray(self.cases, dtype=np.int64)
        if self.removals is not None:
            self.removals = np.asarray(self.removals, dtype=np.int64)

    def __len__(self):
        return len(self.dates)


def ingest_csv(path, population: int | None = None) -> IncidenceDataset:
    """Parse a case-count CSV into a contiguous daily dataset."""
    rows = []
    has_removals = False
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(1, "empty file") from None
        header = [h.strip().lower() for h in header]
        if header[:2] != ["date", "cases"] or len(header) > 3 or (
            len(header) == 3 and header[2] != "removals"
        ):
            raise MalformedRow(1, f"expected header date,cases[,removals], got {header}")
        has_removals = len(header) == 3
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise MalformedRow(lineno, f"expected {len(header)} fields, got {len(row)}")
            try:
                day = date.fromisoformat(row[0].strip())
            except ValueError as err:
                raise MalformedRow(lineno, f"bad date {row[0]!r}: {err}") from None
            try:
                cases = int(row[1])
                removals = int(row[2]) if has_removals and row[2].strip() else 0
            except ValueError:
                raise MalformedRow(lineno, f"counts must be integers: {row[1:]}") from None
            if cases < 0 or removals < 0:
                raise MalformedRow(lineno, "counts must be nonnegative")
            rows.append((day, cases, removals))

    if not rows:
        raise MalformedRow(2, "no data rows")
    rows.sort(key=lambda r: r[0])
    notes = [f"parsed {len(rows)} rows from {path}"]

    days, cases, removals = [], [], []
    cursor = rows[0][0]
    idx = 0
    gaps = 0
    while idx < len(rows):
        day, c, r = rows[idx]
        if day == cursor:
            days.append(day)
            cases.append(c)
            removals.append(r)
            idx += 1
        elif day > cursor:
            days.append(cursor)
            cases.append(0)
            removals.append(0)
            gaps += 1
        else:
            raise MalformedRow(idx + 2, f"duplicate date {day}")
        cursor = cursor + timedelta(days=1)
    if gaps:
        notes.append(f"warning: zero-filled {gaps} missing day(s)")
    notes.append(f"total cases {int(np.sum(cases))}" + (
        f", total removals {int(np.sum(removals))}" if has_removals else ""
    ))
    return IncidenceDataset(
        dates=days,
        cases=np.asarray(cases),
        removals=np.asarray(removals) if has_removals else None,
        population=population,
        notes=notes,
    )


def presmooth(dataset: IncidenceDataset, window: int = 7) -> IncidenceDataset:
    """Trailing ``window``-day average of the case counts, rounded to
    integers (ties to even); fewer days are averaged near the start.

    Removal counts are left untouched; the binomial likelihood needs
    integer case counts, which is why the rounding happens here.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if window == 1:
        return dataset
    cases = dataset.cases.astype(np.float64)
    smoothed = np.empty_like(cases)
    csum = np.concatenate(([0.0], np.cumsum(cases)))
    for t in range(cases.size):
        lo = max(0, t + 1 - window)
        smoothed[t] = (csum[t + 1] - csum[lo]) / (t + 1 - lo)
    return IncidenceDataset(
        dates=list(dataset.dates),
        cases=np.rint(smoothed).astype(np.int64),
        removals=None if dataset.removals is None else dataset.removals.copy(),
        population=dataset.population,
        notes=[*dataset.notes, f"pre-smoothed cases with trailing {window}-day average"],
    )
