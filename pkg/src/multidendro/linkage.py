"""Inter-cluster proximities for every linkage method.

All methods work on variable-group merges: a cluster X_I made of
subclusters X_i (i in I) against a cluster X_J made of subclusters X_j.
The batched routines below evaluate many J at once; sums are taken in a
canonical order (terms sorted, then accumulated sequentially) so that a
value never depends on the order in which subclusters were listed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .proximity import DISTANCE, SIMILARITY, normalize_kind

METHODS = ("single", "complete", "arithmetic", "geometric", "harmonic",
           "versatile", "ward", "centroid", "flexible")
PARAMETRIC = ("versatile", "flexible")
DISTANCE_ONLY = ("ward", "centroid")
# methods whose weighted and unweighted forms differ
WEIGHTABLE = ("arithmetic", "geometric", "harmonic", "versatile",
              "centroid", "flexible")

_POWER = {"arithmetic": 1.0, "geometric": 0.0, "harmonic": -1.0}


class LinkageError(ValueError):
    """Raised for an invalid method specification."""


@dataclass(frozen=True)
class MethodSpec:
    method: str
    weighted: bool = False
    param: float | None = None

    def __post_init__(self):
        method = self.method.lower()
        if method == "average":
            method = "arithmetic"
        if method not in METHODS:
            raise LinkageError(f"unknown linkage method {self.method!r}")
        object.__setattr__(self, "method", method)
        if method in PARAMETRIC:
            if self.param is None:
                raise LinkageError(f"method {method!r} needs a parameter")
            p = float(self.param)
            if math.isnan(p):
                raise LinkageError("parameter must not be NaN")
            if method == "flexible" and not -1.0 <= p <= 1.0:
                raise LinkageError("flexible beta must lie in [-1, +1]")
            object.__setattr__(self, "param", p)
        elif self.param is not None:
            raise LinkageError(f"method {method!r} takes no parameter")

    @property
    def weighting(self) -> str:
        return "weighted" if self.weighted else "unweighted"

    def check_kind(self, kind: str) -> None:
        if self.method in DISTANCE_ONLY and normalize_kind(kind) != DISTANCE:
            raise LinkageError(
                f"{self.method} linkage is available only for distance data")

    def with_param(self, param) -> "MethodSpec":
        return MethodSpec(self.method, self.weighted, param)

    def __str__(self):
        s = self.method
        if self.param is not None:
            s += f"({self.param:g})"
        if self.method in WEIGHTABLE:
            s += ", " + self.weighting
        return s


@dataclass
class MergeContext:
    """Operands of one merge: subcluster sizes and current proximities.

    `cross[i, j]` is D(X_i, X_j); `within_I` and `within_J` are square
    matrices of the proximities among subclusters of each side (only the
    strict upper triangle is read).
    """

    sizes_I: np.ndarray
    sizes_J: np.ndarray
    cross: np.ndarray
    within_I: np.ndarray
    within_J: np.ndarray

    def __post_init__(self):
        self.sizes_I = np.asarray(self.sizes_I, dtype=float).ravel()
        self.sizes_J = np.asarray(self.sizes_J, dtype=float).ravel()
        p, q = self.sizes_I.size, self.sizes_J.size
        if p < 1 or q < 1:
            raise LinkageError("both sides need at least one subcluster")
        self.cross = np.asarray(self.cross, dtype=float).reshape(p, q)
        self.within_I = _square_or_empty(self.within_I, p)
        self.within_J = _square_or_empty(self.within_J, q)
        for a in (self.cross, self.within_I, self.within_J):
            if not np.all(np.isfinite(a)):
                raise LinkageError("proximities must be finite")


def _square_or_empty(a, k):
    if a is None:
        return np.zeros((k, k))
    a = np.asarray(a, dtype=float)
    if k == 1 and a.size <= 1:
        return np.zeros((1, 1))
    return a.reshape(k, k)


def canonical_sum(terms: np.ndarray) -> np.ndarray:
    """Sum along the last axis in sorted order."""
    terms = np.asarray(terms, dtype=float)
    if terms.shape[-1] == 0:
        return np.zeros(terms.shape[:-1])
    if terms.shape[-1] == 1:
        return terms[..., 0].copy()
    return np.cumsum(np.sort(terms, axis=-1), axis=-1)[..., -1]


def _power_mean(values: np.ndarray, weights: np.ndarray, p: float) -> np.ndarray:
    """Weighted power mean along the last axis (broadcast weights)."""
    if p == math.inf:
        return values.max(axis=-1)
    if p == -math.inf:
        return values.min(axis=-1)
    weights = np.broadcast_to(weights, values.shape)
    wsum = canonical_sum(weights)
    if p == 1.0:
        out = canonical_sum(weights * values) / wsum
    else:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if p == -1.0:
                out = 1.0 / (canonical_sum(weights * (1.0 / values)) / wsum)
            else:
                out = np.exp(_log_mean_power(np.log(values), weights, wsum, p))
        if p <= 0:
            # zero proximities with p <= 0: the mean tends to 0
            out = np.where(np.any(values == 0, axis=-1), 0.0, out)
    # a mean of equal values is that value, exactly
    lo, hi = values.min(axis=-1), values.max(axis=-1)
    return np.where(lo == hi, lo, out)


def _log_mean_power(lv, w, wsum, p):
    """log of (sum w v^p / W)^(1/p), stable for small and large |p|."""
    if p == 0.0:
        return canonical_sum(w * lv) / wsum
    t = p * lv
    t_safe = np.where(np.isfinite(t), t, -np.inf)
    # small exponents: log1p/expm1 keep the relative accuracy as p -> 0
    small = np.log1p(canonical_sum(w * np.expm1(t_safe)) / wsum)
    top = np.max(t_safe, axis=-1, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    large = top[..., 0] + np.log(canonical_sum(w * np.exp(t_safe - top)) / wsum)
    use_small = np.max(np.abs(t_safe), axis=-1) <= 1.0
    return np.where(use_small, small, large) / p


def generalized_mean(values, weights=None, p: float = 1.0) -> float:
    """Weighted generalized (power) mean of positive values.

    p = 0 gives the weighted geometric mean, p = -inf and +inf the
    minimum and maximum.  For p <= 0 any zero value makes the result 0.
    """
    v = np.asarray(values, dtype=float).ravel()
    w = np.ones_like(v) if weights is None else np.asarray(weights, float).ravel()
    if v.size == 0 or v.size != w.size:
        raise LinkageError("values and weights must have the same nonzero length")
    if np.any(w <= 0):
        raise LinkageError("weights must be positive")
    if np.any(v < 0):
        raise LinkageError("values must be nonnegative")
    return float(_power_mean(v, w, float(p)))


def _pairs(k):
    return np.triu_indices(k, 1)


def merge_rows(spec: MethodSpec, kind: str, sizes_I, within_I, cross,
               sizes_other) -> np.ndarray:
    """D(X_I, X_j) for a merged group I against many unmerged clusters j.

    `cross` has shape (|I|, m): column t holds the proximities between
    the subclusters of I and the t-th other cluster, whose size is
    `sizes_other[t]`.  Returns the m new proximities.
    """
    nI = np.asarray(sizes_I, dtype=float)
    nJ = np.asarray(sizes_other, dtype=float)
    C = np.asarray(cross, dtype=float).T  # (m, p)
    W = np.asarray(within_I, dtype=float)
    return _merge_batch(spec, kind, nI, W, C[:, :, None], nJ[:, None],
                        np.zeros((1, 1)))


def _merge_batch(spec, kind, nI, WI, C, nJ, WJ):
    """Core formulas.

    nI: (p,) sizes of I; WI: (p, p) within-I proximities.
    C: (m, p, q) cross proximities for m independent targets.
    nJ: (m, q) sizes of each target's subclusters; WJ: (q, q) or
    (m, q, q) within-J proximities.
    """
    method = spec.method
    m, p, q = C.shape
    flat = C.reshape(m, p * q)
    if p == q == 1:
        return flat[:, 0].copy()
    if method in ("single", "complete"):
        use_min = (method == "single") == (kind == DISTANCE)
        return flat.min(axis=1) if use_min else flat.max(axis=1)

    WJ = np.broadcast_to(WJ, (m, q, q))
    iu_I, iu_J = _pairs(p), _pairs(q)
    NI = nI.sum()
    NJ = nJ.sum(axis=1)  # (m,)

    if method in _POWER or method == "versatile":
        power = _POWER.get(method, spec.param)
        if spec.weighted:
            w = np.ones((1, p * q))
        else:
            w = (nI[None, :, None] * nJ[:, None, :]).reshape(m, p * q)
        return _power_mean(flat, w, power)

    if method == "centroid":
        if spec.weighted:
            a = np.full(p, 1.0 / p)
            b = np.full((m, q), 1.0 / q)
        else:
            a = nI / NI
            b = nJ / NJ[:, None]
        return _centroid_sq(a, b, C, WI, WJ, iu_I, iu_J)

    if method == "ward":
        # recover squared centroid distances from ward heights
        def centroid_sq(D, nu, nv):
            return D * D * (nu + nv) / (2.0 * nu * nv)

        QI = centroid_sq(WI, nI[:, None], nI[None, :])
        QJ = centroid_sq(WJ, nJ[:, :, None], nJ[:, None, :])
        QC = centroid_sq(C, nI[None, :, None], nJ[:, None, :])
        a = nI / NI
        b = nJ / NJ[:, None]
        s2 = _centroid_sq(a, b, QC, QI, QJ, iu_I, iu_J)
        s2 = np.maximum(s2, 0.0)
        return np.sqrt(2.0 * NI * NJ / (NI + NJ) * s2)

    if method == "flexible":
        beta = spec.param
        n_within = len(iu_I[0]) + len(iu_J[0])
        if n_within == 0:
            beta = 0.0
        if spec.weighted:
            alpha = np.full((m, p * q), (1.0 - beta) / (p * q))
            gI = np.full(len(iu_I[0]), 1.0)
            gJ = np.ones((m, len(iu_J[0])))
        else:
            prod = (nI[None, :, None] * nJ[:, None, :]).reshape(m, p * q)
            alpha = (1.0 - beta) * prod / (NI * NJ)[:, None]
            gI = (nI[:, None] * nI[None, :])[iu_I]
            gJ = (nJ[:, :, None] * nJ[:, None, :])[:, iu_J[0], iu_J[1]]
        gI = np.broadcast_to(gI, (m, gI.size))
        g = np.concatenate([gI, gJ], axis=1)
        within = np.concatenate(
            [np.broadcast_to(WI[iu_I], (m, len(iu_I[0]))),
             WJ[:, iu_J[0], iu_J[1]]], axis=1)
        if n_within:
            gamma = beta * g / canonical_sum(g)[:, None]
            within_term = canonical_sum(gamma * within)
        else:
            within_term = 0.0
        return canonical_sum(alpha * flat) + within_term

    raise LinkageError(f"unknown linkage method {method!r}")


def _centroid_sq(a, b, C, WI, WJ, iu_I, iu_J):
    m, p, q = C.shape
    cross = canonical_sum((a[None, :, None] * b[:, None, :] * C).reshape(m, p * q))
    wi = canonical_sum((a[:, None] * a[None, :] * WI)[iu_I][None, :]) \
        if len(iu_I[0]) else 0.0
    wj = canonical_sum((b[:, :, None] * b[:, None, :] * WJ)[:, iu_J[0], iu_J[1]]) \
        if len(iu_J[0]) else 0.0
    return cross - (wi + wj)


def merge_proximity(spec: MethodSpec, ctx: MergeContext,
                    kind: str = DISTANCE) -> float:
    """D(X_I, X_J) for one pair of (possibly multi-part) clusters.

    For centroid linkage the proximities in `ctx` must be squared
    Euclidean distances, and so is the result.  Ward linkage takes and
    returns plain (ward.D2-style) heights.
    """
    kind = normalize_kind(kind)
    spec.check_kind(kind)
    if ctx.sizes_J.size == 1:
        return float(merge_rows(spec, kind, ctx.sizes_I, ctx.within_I,
                                ctx.cross, ctx.sizes_J)[0])
    if ctx.sizes_I.size == 1:
        return float(merge_rows(spec, kind, ctx.sizes_J, ctx.within_J,
                                ctx.cross.T, ctx.sizes_I)[0])
    return float(_merge_batch(spec, kind, ctx.sizes_I, ctx.within_I,
                              ctx.cross[None], ctx.sizes_J[None],
                              ctx.within_J[None])[0])


__all__ = ["METHODS", "WEIGHTABLE", "MethodSpec", "MergeContext",
           "LinkageError", "generalized_mean", "merge_proximity",
           "merge_rows", "canonical_sum", "SIMILARITY"]
