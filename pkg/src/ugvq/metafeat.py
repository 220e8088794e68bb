"""Per-video metadata records and the 20 derived quality metrics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DegenerateInput, DuplicateItem, InputError, LengthMismatch, MissingColumn, NonNumericValue
from .stats import srocc

EPOCH = date(2005, 2, 14)

REQUIRED_COLUMNS = (
    "item", "max_resolution", "upload_date", "duration", "viewcount", "like", "dislike",
    "comment", "description_length", "subscribe", "channel_viewcount", "channel_comment",
    "channel_video", "channel_description_length",
)

# accepted on input, never used in derivation
IGNORED_COLUMNS = ("favorite", "favorites", "channel_dislike", "channel_dislikes",
                   "channel_favorite", "channel_favorites")

METRICS = (
    "Description length",
    "#like/#view",
    "Max resolution",
    "#subscribe",
    "#subscribe/#channel video",
    "#like",
    "#dislike",
    "#channel viewcount",
    "#viewcount",
    "#comment",
    "#like/date",
    "Channel description length",
    "#channel viewcount/#channel video",
    "Date",
    "#view/date",
    "#channel comment",
    "#comment/#view",
    "#channel video",
    "#channel comment/#channel video",
    "Duration",
)


@dataclass(frozen=True)
class MetadataRecord:
    item: str
    max_resolution_height: int
    upload_date: date
    duration: int
    viewcount: int
    like: int
    dislike: int
    comment: int
    description_length: int
    subscribe: int
    channel_viewcount: int
    channel_comment: int
    channel_video: int
    channel_description_length: int
    external_scores: dict = field(default_factory=dict)

    def __post_init__(self):
        counts = ("max_resolution_height", "viewcount", "like", "dislike", "comment",
                  "description_length", "subscribe", "channel_viewcount", "channel_comment",
                  "channel_video", "channel_description_length")
        for name in counts:
            if getattr(self, name) < 0:
                raise InputError(f"{self.item}: {name} must be nonnegative")
        if self.duration <= 0:
            raise InputError(f"{self.item}: duration must be positive")
        if self.channel_video < 1:
            raise InputError(f"{self.item}: channel_video must be at least 1")


@dataclass(frozen=True)
class DerivedFeatureTable:
    items: tuple[str, ...]
    values: np.ndarray
    columns: tuple[str, ...] = METRICS

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(len(self.items), len(self.columns))
        if not np.all(np.isfinite(values)):
            raise InputError("derived features must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "columns", tuple(self.columns))

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def select(self, names) -> np.ndarray:
        return self.values[:, [self.columns.index(n) for n in names]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("item", *self.columns))
        for item, row in zip(self.items, self.values):
            w.writerow((item, *(f"{v:.17g}" for v in row)))
        return buf.getvalue()

    @classmethod
    def from_csv(cls, source) -> "DerivedFeatureTable":
        text = Path(source).read_text(encoding="utf-8") if isinstance(source, (str, Path)) else source.read()
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], [r for r in rows[1:] if r]
        return cls(items=tuple(r[0] for r in body),
                   values=np.array([[float(v) for v in r[1:]] for r in body]).reshape(len(body), len(header) - 1),
                   columns=tuple(header[1:]))


def _int(value: str, column: str, item: str) -> int:
    try:
        f = float(value)
    except ValueError:
        raise NonNumericValue(f"{item}: column {column!r} has non-numeric value {value!r}") from None
    if not math.isfinite(f) or f != int(f):
        raise NonNumericValue(f"{item}: column {column!r} must be an integer, got {value!r}")
    return int(f)


def ingest_metadata(source) -> list[MetadataRecord]:
    """Parse the metadata CSV. Extra numeric columns become ``external_scores``."""
    fh = open(source, newline="", encoding="utf-8") if isinstance(source, (str, Path)) else source
    try:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise MissingColumn(f"metadata CSV lacks column(s): {', '.join(missing)}")
        extras = [h for h in header if h not in REQUIRED_COLUMNS and h not in IGNORED_COLUMNS]
        reader.fieldnames = header
        records, seen = [], set()
        for row in reader:
            item = row["item"].strip()
            if item in seen:
                raise DuplicateItem(f"item {item!r} appears twice")
            seen.add(item)
            try:
                uploaded = date.fromisoformat(row["upload_date"].strip())
            except ValueError:
                raise NonNumericValue(f"{item}: bad upload_date {row['upload_date']!r}") from None
            ints = {c: _int(row[c].strip(), c, item) for c in REQUIRED_COLUMNS if c not in ("item", "upload_date")}
            external = {}
            for c in extras:
                try:
                    external[c] = float(row[c])
                except (TypeError, ValueError):
                    continue
            records.append(MetadataRecord(
                item=item,
                max_resolution_height=ints.pop("max_resolution"),
                upload_date=uploaded,
                external_scores=external,
                **ints,
            ))
        return records
    finally:
        if fh is not source:
            fh.close()


def write_metadata_csv(records, dest, extra_columns=()) -> None:
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow((*REQUIRED_COLUMNS, *extra_columns))
        for r in records:
            w.writerow((r.item, r.max_resolution_height, r.upload_date.isoformat(), r.duration,
                        r.viewcount, r.like, r.dislike, r.comment, r.description_length,
                        r.subscribe, r.channel_viewcount, r.channel_comment, r.channel_video,
                        r.channel_description_length,
                        *(f"{r.external_scores[c]:.17g}" for c in extra_columns)))


def _ratio(num, den) -> float:
    return num / den if den else 0.0


def days_since_epoch(d: date) -> int:
    return (d - EPOCH).days


def metric_row(r: MetadataRecord) -> list[float]:
    days = days_since_epoch(r.upload_date)
    by_name = {
        "Description length": r.description_length,
        "#like/#view": _ratio(r.like, r.viewcount),
        "Max resolution": r.max_resolution_height,
        "#subscribe": r.subscribe,
        "#subscribe/#channel video": _ratio(r.subscribe, r.channel_video),
        "#like": r.like,
        "#dislike": r.dislike,
        "#channel viewcount": r.channel_viewcount,
        "#viewcount": r.viewcount,
        "#comment": r.comment,
        "#like/date": _ratio(r.like, days),
        "Channel description length": r.channel_description_length,
        "#channel viewcount/#channel video": _ratio(r.channel_viewcount, r.channel_video),
        "Date": days,
        "#view/date": _ratio(r.viewcount, days),
        "#channel comment": r.channel_comment,
        "#comment/#view": _ratio(r.comment, r.viewcount),
        "#channel video": r.channel_video,
        "#channel comment/#channel video": _ratio(r.channel_comment, r.channel_video),
        "Duration": r.duration,
    }
    return [float(by_name[m]) for m in METRICS]


def derive_metrics(records) -> DerivedFeatureTable:
    records = list(records)
    if not records:
        raise InputError("no metadata records")
    return DerivedFeatureTable(items=tuple(r.item for r in records),
                               values=np.array([metric_row(r) for r in records]))


def align(table: DerivedFeatureTable, items, mos) -> np.ndarray:
    """Reorder ``mos`` (given in ``items`` order) to ``table.items`` order."""
    mos = np.asarray(mos, dtype=float).reshape(-1)
    if items is None:
        if len(mos) != len(table.items):
            raise LengthMismatch(f"{len(table.items)} feature rows vs {len(mos)} scores")
        return mos
    if len(items) != len(mos):
        raise LengthMismatch("score items and values differ in length")
    lookup = dict(zip(items, mos))
    missing = [it for it in table.items if it not in lookup]
    if missing:
        raise LengthMismatch(f"no score for item(s): {', '.join(missing[:5])}")
    return np.array([lookup[it] for it in table.items])


def rank_metrics_by_srocc(table: DerivedFeatureTable, mos) -> list[tuple[str, float]]:
    """Metrics sorted by descending SROCC against ``mos``; ties by name.

    A constant metric has no rank information and scores 0.
    """
    mos = np.asarray(mos, dtype=float).reshape(-1)
    if len(mos) != len(table.items):
        raise LengthMismatch(f"{len(table.items)} feature rows vs {len(mos)} scores")
    out = []
    for k, name in enumerate(table.columns):
        try:
            r = srocc(table.values[:, k], mos)
        except DegenerateInput:
            r = 0.0
        out.append((name, r))
    return sorted(out, key=lambda t: (-t[1], t[0]))


class MetadataFeaturizer(TransformerMixin, BaseEstimator):
    """Map metadata records to the derived metric matrix.

    ``columns`` restricts the output to a subset (in the given order). When
    ``top_k`` is set, ``fit(records, mos)`` keeps the ``top_k`` metrics with
    the highest SROCC against ``mos``.
    """

    def __init__(self, columns=None, top_k=None):
        self.columns = columns
        self.top_k = top_k

    def fit(self, X, y=None):
        table = derive_metrics(X)
        if self.top_k is not None:
            if y is None:
                raise InputError("top_k selection needs target scores")
            ranked = rank_metrics_by_srocc(table, y)
            self.ranking_ = ranked
            self.columns_ = tuple(name for name, _ in ranked[: self.top_k])
        else:
            self.columns_ = tuple(self.columns) if self.columns is not None else METRICS
        unknown = [c for c in self.columns_ if c not in METRICS]
        if unknown:
            raise InputError(f"unknown metric(s): {unknown}")
        self.n_features_out_ = len(self.columns_)
        return self

    def transform(self, X):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "columns_")
        return derive_metrics(X).select(self.columns_)

    def get_feature_names_out(self, input_features=None):
        return np.array(self.columns_, dtype=object)
