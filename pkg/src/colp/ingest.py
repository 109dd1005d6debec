"""Reading categorical pairs from CSV files and pair-collection manifests.

Level names are coded 1..K in lexicographic order of the distinct strings,
so the coding depends only on the set of values, never on row order.  Rows
with a missing value in either column are dropped (listwise deletion).

A pair collection is a directory holding ``pairs.csv`` with columns
``file, x_column, y_column, truth, description`` (``truth`` is ``x_to_y`` or
``y_to_x``) and one CSV per pair.  Optional manifest columns
``discretize_x``/``discretize_y`` give a bin count for numeric columns.
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .sample import PairedSample, SampleError

log = logging.getLogger(__name__)

MISSING = frozenset({"", "NA", "N/A", "NaN", "nan", "null", "NULL", "?"})
MANIFEST_COLUMNS = ("file", "x_column", "y_column", "truth", "description")
TRUTHS = ("x_to_y", "y_to_x")
QUANTILE_METHOD = "linear"


class IngestError(ValueError):
    pass


@dataclass(frozen=True)
class PairFile:
    path: str
    x_column: str
    y_column: str
    truth: str | None = None
    description: str = ""
    discretize_x: int | None = None
    discretize_y: int | None = None

    def __post_init__(self):
        if self.x_column == self.y_column:
            raise IngestError(f"x and y column are both {self.x_column!r}")
        if self.truth is not None and self.truth not in TRUTHS:
            raise IngestError(f"truth must be one of {TRUTHS}, got {self.truth!r}")


@dataclass(frozen=True)
class LoadedPair:
    sample: PairedSample
    rows_read: int
    rows_dropped: int
    cut_points: dict


def encode_levels(values) -> tuple[np.ndarray, dict]:
    """Codes 1..K by lexicographic order of the distinct strings."""
    names = sorted(set(values))
    lookup = {name: i for i, name in enumerate(names, start=1)}
    return np.array([lookup[v] for v in values], dtype=np.int64), lookup


def discretize(values, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Cut at the k/bins empirical quantiles (linear interpolation between
    order statistics).  Returns ``(codes in 1..bins, cut points)``; a value
    equal to a cut point goes to the lower bin."""
    values = np.asarray(values, dtype=float)
    if bins < 2:
        raise IngestError("need at least 2 bins")
    if not np.all(np.isfinite(values)):
        raise IngestError("values must be finite")
    distinct = np.unique(values).size
    if distinct < bins:
        raise IngestError(f"only {distinct} distinct values for {bins} bins")
    cuts = np.quantile(values, np.arange(1, bins) / bins, method=QUANTILE_METHOD)
    if np.any(np.diff(cuts) <= 0):
        raise IngestError(f"quantile cut points collapse (ties): {cuts.tolist()}")
    codes = np.searchsorted(cuts, values, side="left") + 1
    return codes.astype(np.int64), cuts


def _read_columns(path, columns) -> tuple[list[list[str]], int, int]:
    path = Path(path)
    if not path.exists():
        raise IngestError(f"{path} does not exist")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestError(f"{path} is empty") from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise IngestError(f"{path}: missing column(s) {missing}; header is {header}")
        idx = [header.index(c) for c in columns]
        out = [[] for _ in columns]
        read = dropped = 0
        for row in reader:
            if not row:
                continue
            read += 1
            vals = [row[i].strip() if i < len(row) else "" for i in idx]
            if any(v in MISSING for v in vals):
                dropped += 1
                continue
            for col, v in zip(out, vals):
                col.append(v)
    return out, read, dropped


def load_pair(pair: PairFile, min_levels: int = 3) -> LoadedPair:
    """Read a pair; ``min_levels`` is the per-variable gate (3 for causal use)."""
    (xs, ys), read, dropped = _read_columns(pair.path, (pair.x_column, pair.y_column))
    if dropped:
        log.warning("%s: dropped %d of %d rows with missing values", pair.path, dropped, read)
    if not xs:
        raise IngestError(f"{pair.path}: no complete rows")
    cuts = {}
    coded = []
    for name, vals, bins in ((pair.x_column, xs, pair.discretize_x), (pair.y_column, ys, pair.discretize_y)):
        if bins:
            try:
                numeric = [float(v) for v in vals]
            except ValueError as exc:
                raise IngestError(f"column {name!r} is not numeric: {exc}") from None
            codes, c = discretize(numeric, int(bins))
            cuts[name] = c.tolist()
            labels = {f"q{j:02d}": j for j in range(1, int(bins) + 1)}
        else:
            codes, labels = encode_levels(vals)
        if len(labels) < min_levels:
            raise IngestError(f"column {name!r} has {len(labels)} distinct level(s); need at least {min_levels}")
        coded.append((codes, labels))
    (x, x_labels), (y, y_labels) = coded
    try:
        sample = PairedSample(x, y, len(x_labels), len(y_labels), x_labels, y_labels)
    except SampleError as exc:
        raise IngestError(str(exc)) from exc
    return LoadedPair(sample, read, dropped, cuts)


def read_pair(pair: PairFile, min_levels: int = 3) -> PairedSample:
    return load_pair(pair, min_levels).sample


def write_pair(sample: PairedSample, path, x_column: str = "x", y_column: str = "y"):
    xn, yn = sample.x_names(), sample.y_names()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([x_column, y_column])
        for a, b in zip(sample.x, sample.y):
            w.writerow([xn[a - 1], yn[b - 1]])


def _opt_int(value):
    value = (value or "").strip()
    return int(value) if value else None


def read_manifest(directory) -> list[PairFile]:
    directory = Path(directory)
    manifest = directory / "pairs.csv"
    if not manifest.exists():
        raise IngestError(f"{directory} has no pairs.csv manifest")
    with open(manifest, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = [c for c in MANIFEST_COLUMNS if c not in header]
        if missing:
            raise IngestError(f"{manifest}: missing manifest column(s) {missing}")
        pairs = []
        for lineno, row in enumerate(reader, start=2):
            row = {k.strip(): (v or "").strip() for k, v in row.items() if k is not None}
            if not any(row.values()):
                continue
            try:
                pairs.append(
                    PairFile(
                        path=os.fspath(directory / row["file"]),
                        x_column=row["x_column"],
                        y_column=row["y_column"],
                        truth=row["truth"],
                        description=row["description"],
                        discretize_x=_opt_int(row.get("discretize_x")),
                        discretize_y=_opt_int(row.get("discretize_y")),
                    )
                )
            except (IngestError, ValueError) as exc:
                raise IngestError(f"{manifest}:{lineno}: {exc}") from None
    if not pairs:
        raise IngestError(f"{manifest} lists no pairs")
    return pairs


def example_pairs_dir() -> Path:
    """Directory of the small synthetic pair collection bundled with the package."""
    return Path(__file__).parent / "datasets" / "pairs"
