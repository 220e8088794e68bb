"""Linear and Gaussian-kernel epsilon-SVR predictors of MOS from metadata metrics.

Both models z-score their inputs with statistics fitted on the training set
and stored in the model, so predictions do not depend on the raw scale of a
feature column.

The SVR dual is written in the combined coefficients ``beta = alpha - alpha*``::

    min  1/2 beta' K beta - y' beta + eps * |beta|_1
    s.t. sum(beta) = 0,  -C <= beta_i <= C

and solved by sequential minimal optimization: each step moves mass ``t``
from one coefficient to another along the maximally violating pair and takes
the exact minimizer of the piecewise-quadratic objective along that line.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import DegenerateInput, DimensionMismatch, EmptyData, InputError, NonConvergence
from .stats import srocc

KKT_TOL = 1e-6
MAX_ITER = 200_000


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        return cls(mean, scale)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    standardizer: Standardizer

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def raw_coefficients(self) -> tuple[np.ndarray, float]:
        """Slope and intercept expressed on the unstandardized features."""
        a = self.weights / self.standardizer.scale
        return a, float(self.bias - a @ self.standardizer.mean)


@dataclass(frozen=True)
class SvrModel:
    coef: np.ndarray
    support_vectors: np.ndarray
    bias: float
    sigma2: float
    C: float
    epsilon: float
    standardizer: Standardizer
    n_iter: int = 0
    kkt_violation: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]


def _as_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape[0] == 0 or len(y) == 0:
        raise EmptyData("no training rows")
    if X.shape[0] != len(y):
        raise DimensionMismatch(f"{X.shape[0]} rows vs {len(y)} targets")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InputError("training data must be finite")
    return X, y


def fit_linear(X, y) -> LinearModel:
    """Ordinary least squares on standardized features (minimum-norm when underdetermined)."""
    X, y = _as_xy(X, y)
    if len(y) < 2:
        raise EmptyData("need at least two rows")
    std = Standardizer.fit(X)
    Z = std.transform(X)
    # columns are centred, so the intercept decouples from the slopes
    a = np.linalg.lstsq(Z, y - y.mean(), rcond=None)[0]
    return LinearModel(weights=a, bias=float(y.mean()), standardizer=std)


def gaussian_kernel(A: np.ndarray, B: np.ndarray, sigma2: float) -> np.ndarray:
    sq = (A**2).sum(axis=1)[:, None] + (B**2).sum(axis=1)[None, :] - 2.0 * A @ B.T
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-sq / (2.0 * sigma2))


def median_sigma2(Z: np.ndarray) -> float:
    """Median squared pairwise distance between distinct rows; 1.0 if degenerate."""
    n = Z.shape[0]
    if n < 2:
        return 1.0
    iu = np.triu_indices(n, k=1)
    d2 = ((Z[:, None, :] - Z[None, :, :]) ** 2).sum(axis=2)[iu]
    med = float(np.median(d2))
    return med if med > 0 else 1.0


def default_hyperparameters(X, y) -> dict:
    X, y = _as_xy(X, y)
    Z = Standardizer.fit(X).transform(X)
    return {"C": 10.0, "epsilon": 0.05 * float(np.std(y)), "sigma2": median_sigma2(Z)}


def _grid(C: float) -> tuple[float, float]:
    """Coefficient quantum and the box bound snapped onto it.

    Coefficients live on multiples of ``2**(e - 40)`` (``e`` = binary exponent
    of ``C``); with at most 4096 coefficients every partial sum is exactly
    representable, so the equality constraint holds bit-exactly.
    """
    q = math.ldexp(1.0, math.frexp(C)[1] - 1 - 40)
    return q, math.floor(C / q) * q


def _directional(beta, g, eps, C):
    """One-sided derivatives for raising (``up``) and lowering (``down``) each coefficient."""
    up = g + np.where(beta >= 0, eps, -eps)
    down = -g + np.where(beta > 0, -eps, eps)
    up[beta >= C] = np.inf
    down[beta <= -C] = np.inf
    return up, down


def _best_pair(up, down):
    """Most negative ``up[i] + down[j]`` over ``i != j``."""
    i1, j1 = int(np.argmin(up)), int(np.argmin(down))
    if i1 != j1:
        return i1, j1, up[i1] + down[j1]
    up2 = up.copy()
    up2[i1] = np.inf
    down2 = down.copy()
    down2[j1] = np.inf
    i2, j2 = int(np.argmin(up2)), int(np.argmin(down2))
    a, b = up[i1] + down2[j2], up2[i2] + down[j1]
    return (i1, j2, a) if a <= b else (i2, j1, b)


def kkt_violation(beta, K, y, eps, C) -> float:
    """Largest first-order descent rate along any feasible pairwise move (0 at optimum)."""
    g = K @ beta - y
    up, down = _directional(beta, g, eps, C)
    if len(beta) < 2:
        return 0.0
    _, _, v = _best_pair(up, down)
    return float(max(0.0, -v)) if np.isfinite(v) else 0.0


def _line_min(eta, slope, bi, bj, eps, tmax):
    """Minimize ``eta/2 t^2 + slope t + eps(|bi + t| + |bj - t|)`` over ``[0, tmax]``."""
    knots = sorted({0.0, tmax, *(x for x in (-bi, bj) if 0.0 < x < tmax)})

    def phi(t):
        return 0.5 * eta * t * t + slope * t + eps * (abs(bi + t) + abs(bj - t))

    best_t, best_v = 0.0, phi(0.0)
    for lo, hi in zip(knots[:-1], knots[1:]):
        mid = 0.5 * (lo + hi)
        lin = slope + eps * (math.copysign(1.0, bi + mid) - math.copysign(1.0, bj - mid))
        cands = [lo, hi]
        if eta > 0:
            cands.append(min(max(-lin / eta, lo), hi))
        for t in cands:
            v = phi(t)
            if v < best_v:
                best_t, best_v = t, v
    return best_t


def _bias(beta, g, eps, C):
    up, down = _directional(beta, g, eps, C)
    lower = -up[np.isfinite(up)]
    upper = down[np.isfinite(down)]
    lo = lower.max() if len(lower) else -np.inf
    hi = upper.min() if len(upper) else np.inf
    if np.isfinite(lo) and np.isfinite(hi):
        return 0.5 * (lo + hi)
    return float(lo if np.isfinite(lo) else hi)


def solve_svr_dual(K, y, C, eps, tol=KKT_TOL, max_iter=MAX_ITER):
    """SMO for the epsilon-SVR dual; returns ``(beta, bias, n_iter, violation)``.

    Starts from ``beta = 0`` and always picks the maximally violating pair
    (lowest indices on ties), so the result is deterministic.
    """
    n = len(y)
    q, C = _grid(C)
    beta = np.zeros(n)
    g = -y.astype(float)
    diag = np.diag(K)
    it = 0
    viol = 0.0
    while n >= 2:
        up, down = _directional(beta, g, eps, C)
        i, j, v = _best_pair(up, down)
        viol = max(0.0, -v) if np.isfinite(v) else 0.0
        if viol <= tol:
            break
        if it >= max_iter:
            raise NonConvergence(f"SMO stopped after {max_iter} iterations, KKT violation {viol:.3e}")
        it += 1
        tmax = min(C - beta[i], beta[j] + C)
        eta = diag[i] + diag[j] - 2.0 * K[i, j]
        t = _line_min(eta, g[i] - g[j], beta[i], beta[j], eps, tmax)
        if t != tmax:
            t = round(t / q) * q
        if t <= 0.0:
            raise NonConvergence(f"SMO stalled at KKT violation {viol:.3e}")
        beta[i] += t
        beta[j] -= t
        g += t * (K[:, i] - K[:, j])
    g = K @ beta - y
    return beta, _bias(beta, g, eps, C), it, viol


def fit_svr(X, y, C=None, epsilon=None, sigma2=None, tol=KKT_TOL, max_iter=MAX_ITER) -> SvrModel:
    X, y = _as_xy(X, y)
    defaults = default_hyperparameters(X, y)
    C = defaults["C"] if C is None else float(C)
    epsilon = defaults["epsilon"] if epsilon is None else float(epsilon)
    sigma2 = defaults["sigma2"] if sigma2 is None else float(sigma2)
    if not C > 0:
        raise InputError("C must be positive")
    if not epsilon >= 0:
        raise InputError("epsilon must be nonnegative")
    if not sigma2 > 0:
        raise InputError("sigma2 must be positive")
    std = Standardizer.fit(X)
    Z = std.transform(X)
    K = gaussian_kernel(Z, Z, sigma2)
    beta, b, it, viol = solve_svr_dual(K, y, C, epsilon, tol=tol, max_iter=max_iter)
    return SvrModel(coef=beta, support_vectors=Z, bias=float(b), sigma2=sigma2, C=C,
                    epsilon=epsilon, standardizer=std, n_iter=it, kkt_violation=viol)


def predict(model, X) -> np.ndarray | float:
    """Predict one feature vector (returns a float) or a matrix of rows."""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X2 = X.reshape(1, -1) if single else X
    if X2.shape[1] != model.n_features:
        raise DimensionMismatch(f"model expects {model.n_features} features, got {X2.shape[1]}")
    Z = model.standardizer.transform(X2)
    if isinstance(model, LinearModel):
        out = Z @ model.weights + model.bias
    else:
        out = gaussian_kernel(Z, model.support_vectors, model.sigma2) @ model.coef + model.bias
    return float(out[0]) if single else out


# -- serialization -----------------------------------------------------------


def model_to_dict(model) -> dict:
    std = {"mean": model.standardizer.mean.tolist(), "scale": model.standardizer.scale.tolist()}
    if isinstance(model, LinearModel):
        return {"kind": "linear", "weights": model.weights.tolist(), "bias": model.bias, "standardization": std}
    return {
        "kind": "svr",
        "coef": model.coef.tolist(),
        "support_vectors": model.support_vectors.tolist(),
        "bias": model.bias,
        "hyperparameters": {"C": model.C, "epsilon": model.epsilon, "sigma2": model.sigma2},
        "standardization": std,
        "n_iter": model.n_iter,
        "kkt_violation": model.kkt_violation,
        **model.extra,
    }


def model_from_dict(d: dict):
    std = Standardizer(np.array(d["standardization"]["mean"], dtype=float),
                       np.array(d["standardization"]["scale"], dtype=float))
    if d["kind"] == "linear":
        return LinearModel(np.array(d["weights"], dtype=float), float(d["bias"]), std)
    if d["kind"] == "svr":
        h = d["hyperparameters"]
        sv = np.array(d["support_vectors"], dtype=float).reshape(len(d["coef"]), len(std.mean))
        return SvrModel(coef=np.array(d["coef"], dtype=float), support_vectors=sv, bias=float(d["bias"]),
                        sigma2=float(h["sigma2"]), C=float(h["C"]), epsilon=float(h["epsilon"]),
                        standardizer=std, n_iter=int(d.get("n_iter", 0)),
                        kkt_violation=float(d.get("kkt_violation", 0.0)))
    raise InputError(f"unknown model kind {d['kind']!r}")


def dumps_model(model) -> str:
    return json.dumps(model_to_dict(model), indent=2)


# -- evaluation --------------------------------------------------------------


def fit_model(kind: str, X, y, **hyper):
    if kind == "linear":
        return fit_linear(X, y)
    if kind == "svr":
        return fit_svr(X, y, **hyper)
    raise InputError(f"unknown model kind {kind!r}")


def _safe_srocc(a, b) -> float:
    try:
        return srocc(a, b)
    except DegenerateInput:
        return 0.0


def incremental_feature_eval(table, mos, model_kind="linear", external=None, order=None,
                             cv_folds=None, **hyper) -> list[tuple[int, float]]:
    """SROCC of in-sample predictions using the top-k metrics, for every k.

    ``order`` defaults to the descending-SROCC metric ranking. ``external``
    (a per-item score vector) is appended as an extra feature at every k.
    With ``cv_folds`` set, predictions come from contiguous k-fold
    cross-validation instead of the in-sample fit.
    """
    from .metafeat import rank_metrics_by_srocc

    mos = np.asarray(mos, dtype=float).reshape(-1)
    if len(mos) != len(table.items):
        raise DimensionMismatch(f"{len(table.items)} feature rows vs {len(mos)} scores")
    if order is None:
        order = [name for name, _ in rank_metrics_by_srocc(table, mos)]
    ext = None if external is None else np.asarray(external, dtype=float).reshape(-1, 1)
    if ext is not None and len(ext) != len(mos):
        raise DimensionMismatch("external column length differs from scores")
    curve = []
    for k in range(1, len(order) + 1):
        X = table.select(order[:k])
        if ext is not None:
            X = np.hstack([X, ext])
        if cv_folds:
            pred = _cv_predictions(model_kind, X, mos, int(cv_folds), hyper)
        else:
            pred = predict(fit_model(model_kind, X, mos, **hyper), X)
        curve.append((k, _safe_srocc(pred, mos)))
    return curve


def _cv_predictions(kind, X, y, folds, hyper):
    n = len(y)
    if not 2 <= folds <= n:
        raise InputError(f"cv folds must lie in [2, {n}]")
    pred = np.empty(n)
    for test in np.array_split(np.arange(n), folds):
        train = np.setdiff1d(np.arange(n), test)
        pred[test] = predict(fit_model(kind, X[train], y[train], **hyper), X[test])
    return pred


# -- estimators --------------------------------------------------------------


class LinearRegressor(RegressorMixin, BaseEstimator):
    """Least squares on z-scored features.

    ``coef_`` and ``intercept_`` are reported on the raw feature scale.
    """

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        self.model_ = fit_linear(X, y)
        self.coef_, self.intercept_ = self.model_.raw_coefficients()
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        return predict(self.model_, check_array(X, dtype=float))


class GaussianSVR(RegressorMixin, BaseEstimator):
    """Epsilon-SVR with a Gaussian kernel; ``None`` hyperparameters use data-driven defaults."""

    def __init__(self, C=None, epsilon=None, sigma2=None, tol=KKT_TOL, max_iter=MAX_ITER):
        self.C = C
        self.epsilon = epsilon
        self.sigma2 = sigma2
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        self.model_ = fit_svr(X, y, C=self.C, epsilon=self.epsilon, sigma2=self.sigma2,
                              tol=self.tol, max_iter=self.max_iter)
        self.dual_coef_ = self.model_.coef
        self.intercept_ = self.model_.bias
        self.support_ = np.flatnonzero(self.model_.coef)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        return predict(self.model_, check_array(X, dtype=float))
