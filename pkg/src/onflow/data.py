"""Loading benchmark series and the descriptive statistics of asset pairs."""

import csv
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .exceptions import (
    DegenerateDataError,
    InvalidArgumentError,
    MalformedRowError,
    MissingFileError,
    UnknownAssetError,
)

#: Two-asset presets of the Old NYSE benchmark, keyed by pair number.
PAIRS = {
    1: ("comme", "kinar"),
    2: ("iroqu", "kinar"),
    3: ("coke", "ibm"),
    4: ("comme", "meico"),
}

ASSET_LABELS = {
    "comme": "Commercial Metals",
    "kinar": "Kin Ark",
    "iroqu": "Iroquois",
    "coke": "Coca Cola",
    "ibm": "IBM",
    "meico": "Meicco",
}

DATE_COLUMNS = {"date", "dates", "day", "time", "t"}


@dataclass(frozen=True)
class PriceSeries:
    """Prices of ``K`` assets at ``T + 1`` dates, normalized to start at one."""

    names: tuple
    prices: np.ndarray
    dates: tuple = None

    def __post_init__(self):
        prices = np.array(self.prices, dtype=float)
        if prices.ndim != 2 or prices.shape[0] < 1 or prices.shape[1] != len(self.names):
            raise InvalidArgumentError(f"prices shape {prices.shape} does not match {len(self.names)} names")
        if not np.all(prices > 0):
            raise InvalidArgumentError("prices must be strictly positive")
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n_steps(self):
        return self.prices.shape[0] - 1


@dataclass(frozen=True)
class PriceRelativeSeries:
    """Ratios ``S_t / S_{t-1}``, one row per trading step."""

    names: tuple
    relatives: np.ndarray

    def __post_init__(self):
        rel = np.array(self.relatives, dtype=float)
        if rel.ndim != 2 or rel.shape[1] != len(self.names):
            raise InvalidArgumentError(f"relatives shape {rel.shape} does not match {len(self.names)} names")
        if not np.all(np.isfinite(rel)) or not np.all(rel > 0):
            raise InvalidArgumentError("price relatives must be finite and strictly positive")
        rel.setflags(write=False)
        object.__setattr__(self, "relatives", rel)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n_steps(self):
        return self.relatives.shape[0]

    @property
    def n_assets(self):
        return self.relatives.shape[1]

    def select(self, columns):
        idx = _resolve_columns(self.names, columns)
        return PriceRelativeSeries(tuple(self.names[i] for i in idx), self.relatives[:, idx])

    def head(self, n_steps):
        return PriceRelativeSeries(self.names, self.relatives[:n_steps])


def _resolve_columns(names, selected):
    lookup = {}
    for i, name in enumerate(names):
        lookup.setdefault(name.strip().lower(), i)
    idx = []
    for name in selected:
        key = str(name).strip().lower()
        if key not in lookup:
            raise UnknownAssetError(name, names)
        idx.append(lookup[key])
    return idx


def _read_table(path, selected, positive_label):
    """Parse a header + numeric rows CSV, returning (names, matrix, dates)."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise MissingFileError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedRowError(f"{path}: empty file", row=1) from None
        date_col = header[0].lower() in DATE_COLUMNS
        names = header[1:] if date_col else header
        if not names:
            raise MalformedRowError(f"{path}: no asset columns in header", row=1)
        idx = _resolve_columns(names, selected) if selected is not None else list(range(len(names)))

        rows, dates = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise MalformedRowError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}", row=lineno
                )
            if date_col:
                dates.append(row[0].strip())
                row = row[1:]
            values = []
            for j in idx:
                cell = row[j].strip()
                try:
                    x = float(cell)
                except ValueError:
                    raise MalformedRowError(
                        f"{path}: row {lineno}, column {names[j]!r}: non-numeric value {cell!r}",
                        row=lineno, column=names[j],
                    ) from None
                if not np.isfinite(x) or x <= 0:
                    raise MalformedRowError(
                        f"{path}: row {lineno}, column {names[j]!r}: {positive_label} must be positive, got {cell!r}",
                        row=lineno, column=names[j],
                    )
                values.append(x)
            rows.append(values)
    if not rows:
        raise MalformedRowError(f"{path}: no data rows", row=2)
    return tuple(names[j] for j in idx), np.array(rows, dtype=float), (tuple(dates) if date_col else None)


def load_price_csv(path, selected=None):
    """Read a price CSV; each column is rescaled so its first price is one."""
    names, prices, dates = _read_table(path, selected, "price")
    return PriceSeries(names, prices / prices[0], dates)


def load_relatives_csv(path, selected=None):
    """Read a CSV whose rows are already price relatives."""
    names, rel, _ = _read_table(path, selected, "price relative")
    return PriceRelativeSeries(names, rel)


def load_relatives(path, selected=None, fmt="prices"):
    """Load either file layout and return price relatives."""
    if fmt == "prices":
        return to_price_relatives(load_price_csv(path, selected))
    if fmt == "relatives":
        return load_relatives_csv(path, selected)
    raise InvalidArgumentError(f"unknown format {fmt!r}; expected 'prices' or 'relatives'")


def nyse_path():
    """Path of the bundled Old NYSE file: 36 stocks, 5651 daily price relatives."""
    return resources.files("onflow.datasets").joinpath("nyse_o.csv")


def load_nyse(selected=None):
    with resources.as_file(nyse_path()) as path:
        return load_relatives_csv(path, selected)


def to_price_relatives(series):
    if series.n_steps < 1:
        raise InvalidArgumentError("need at least two price rows to form relatives")
    p = series.prices
    return PriceRelativeSeries(series.names, p[1:] / p[:-1])


def relative_correlation(rel):
    """Pearson correlation between the two columns of price relatives."""
    x = rel.relatives if isinstance(rel, PriceRelativeSeries) else np.asarray(rel, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise InvalidArgumentError(f"correlation needs exactly two assets, got shape {x.shape}")
    if x.shape[0] < 2:
        raise InvalidArgumentError("correlation needs at least two observations")
    if np.any(np.ptp(x, axis=0) == 0):
        raise DegenerateDataError("a column of price relatives has zero variance")
    centered = x - x.mean(axis=0)
    ss = np.einsum("ij,ij->j", centered, centered)
    return float(centered[:, 0] @ centered[:, 1] / np.sqrt(ss[0] * ss[1]))


def buy_and_hold_wealth(rel, asset_index):
    x = rel.relatives if isinstance(rel, PriceRelativeSeries) else np.asarray(rel, dtype=float)
    if not 0 <= asset_index < x.shape[1]:
        raise InvalidArgumentError(f"asset index {asset_index} out of range for {x.shape[1]} assets")
    return float(np.prod(x[:, asset_index]))
