"""Synthetic paired-comparison experiments with known ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import timedelta
from itertools import combinations

import numpy as np

from .errors import InputError
from .metafeat import EPOCH, MetadataRecord


def bt_probability(si: float, sj: float) -> float:
    """Logistic Bradley-Terry probability that ``i`` beats ``j``."""
    d = si - sj
    if d >= 0:
        return 1.0 / (1.0 + math.exp(-d))
    e = math.exp(d)
    return e / (1.0 + e)


@dataclass(frozen=True)
class SynthConfig:
    true_scores: tuple[float, ...]
    comparisons_per_pair: int = 10
    pair_coverage: float = 1.0
    noise_model: str = "bradley_terry"
    seed: int = 0
    items: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "true_scores", tuple(float(s) for s in self.true_scores))
        if self.comparisons_per_pair < 1:
            raise InputError("comparisons_per_pair must be at least 1")
        if not 0.0 < self.pair_coverage <= 1.0:
            raise InputError("pair_coverage must lie in (0, 1]")
        if self.noise_model not in ("bradley_terry", "coin_flip"):
            raise InputError(f"unknown noise model {self.noise_model!r}")
        if self.items is not None and len(self.items) != len(self.true_scores):
            raise InputError("items and true_scores differ in length")

    @property
    def item_names(self) -> tuple[str, ...]:
        if self.items is not None:
            return tuple(self.items)
        width = max(2, len(str(len(self.true_scores))))
        return tuple(f"v{k + 1:0{width}d}" for k in range(len(self.true_scores)))


def sampled_pairs(config: SynthConfig, rng: np.random.Generator) -> list[tuple[int, int]]:
    pairs = list(combinations(range(len(config.true_scores)), 2))
    if config.pair_coverage >= 1.0:
        return pairs
    k = max(1, math.ceil(config.pair_coverage * len(pairs)))
    keep = np.sort(rng.choice(len(pairs), size=k, replace=False))
    return [pairs[i] for i in keep]


def generate(config: SynthConfig) -> list[tuple[str, str, str]]:
    """Comparison records ``(item_a, item_b, winner)``, pairs in lexicographic order."""
    n = len(config.true_scores)
    if n < 2:
        raise InputError("need at least two items")
    rng = np.random.default_rng(config.seed)
    names = config.item_names
    s = config.true_scores
    records = []
    for i, j in sampled_pairs(config, rng):
        p = 0.5 if config.noise_model == "coin_flip" else bt_probability(s[i], s[j])
        for u in rng.random(config.comparisons_per_pair):
            records.append((names[i], names[j], names[i] if u < p else names[j]))
    return records


def random_scores(n: int, seed: int, scale: float = 1.0) -> np.ndarray:
    return scale * np.random.default_rng([seed, 1]).standard_normal(n)


def synthetic_metadata(items, quality, seed: int, extra_column: str | None = "nr_score") -> list[MetadataRecord]:
    """Plausible metadata whose counts loosely track ``quality``.

    Each field is a noisy monotone function of the score, so derived metrics
    carry varying amounts of signal; ``extra_column`` adds a weak external
    quality score.
    """
    rng = np.random.default_rng([seed, 2])
    q = np.asarray(quality, dtype=float)
    z = (q - q.mean()) / (q.std() or 1.0)
    resolutions = np.array([144, 240, 360, 480, 720, 1080])
    out = []
    for k, item in enumerate(items):
        def noisy(center, spread):
            return center + z[k] * spread[0] + rng.normal(0.0, spread[1])

        views = int(round(math.exp(noisy(11.5, (1.0, 1.5)))))
        like_rate = math.exp(noisy(-4.5, (0.5, 0.6)))
        res = resolutions[int(np.clip(round(noisy(3.0, (1.0, 1.0))), 0, 5))]
        days = int(np.clip(round(noisy(2000, (400, 600))), 1, 3300))
        channel_video = max(1, int(round(math.exp(noisy(3.5, (0.2, 1.2))))))
        out.append(MetadataRecord(
            item=item,
            max_resolution_height=int(res),
            upload_date=EPOCH + timedelta(days=days),
            duration=max(1, int(round(math.exp(rng.normal(5.1, 0.5))))),
            viewcount=views,
            like=int(round(views * like_rate)),
            dislike=int(round(views * math.exp(noisy(-6.5, (-0.2, 0.8))))),
            comment=int(round(views * math.exp(noisy(-6.0, (0.2, 0.8))))),
            description_length=max(0, int(round(math.exp(noisy(4.6, (0.8, 0.8)))))),
            subscribe=int(round(math.exp(noisy(6.5, (0.8, 2.0))))),
            channel_viewcount=int(round(math.exp(noisy(13.5, (0.6, 2.0))))),
            channel_comment=int(round(math.exp(noisy(2.5, (0.3, 1.5))))),
            channel_video=channel_video,
            channel_description_length=max(0, int(round(noisy(60.0, (30.0, 60.0))))),
            external_scores={} if extra_column is None else {extra_column: float(noisy(0.0, (0.3, 1.0)))},
        ))
    return out

