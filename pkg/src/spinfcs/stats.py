"""Moment statistics, resampling uncertainties, and scaling diagnostics."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import lsq_linear

from .ensemble import TransferDistribution
from .errors import DegenerateWeightError, UndefinedMomentsError


def _grid_raw_moment(values: np.ndarray, probs: np.ndarray, k: int) -> float:
    """<M^k> on a grid symmetric about zero, folding +-M pairs first so an
    exactly symmetric mass yields exactly zero odd moments."""
    half = values.size // 2
    if not np.array_equal(values, -values[::-1]):
        raise ValueError("grid must be symmetric about zero")
    acc = probs[half] * (1.0 if k == 0 else 0.0)
    odd = k % 2 == 1
    for d in range(half, 0, -1):
        v = float(values[half + d]) ** k
        if odd:
            acc += probs[half + d] * v - probs[half - d] * v
        else:
            acc += probs[half + d] * v + probs[half - d] * v
    return float(acc)


def raw_moments(data, k_max: int = 4) -> np.ndarray:
    """<M^0>, ..., <M^k_max> of a distribution-like input.

    Accepts a TransferDistribution, a (values, probabilities) grid pair, or
    a 1-D array of samples.
    """
    if isinstance(data, TransferDistribution):
        return np.array([data.raw_moment(k) for k in range(k_max + 1)])
    if isinstance(data, tuple) and len(data) == 2:
        values = np.asarray(data[0], dtype=float)
        probs = np.asarray(data[1], dtype=float)
        return np.array(
            [_grid_raw_moment(values, probs, k) for k in range(k_max + 1)]
        )
    samples = np.asarray(data, dtype=float)
    if samples.size == 0:
        raise ValueError("empty sample array")
    return np.array([np.mean(samples**k) for k in range(k_max + 1)])


def central_moments(data, k_max: int = 4) -> np.ndarray:
    """Central moments alpha_0..alpha_k via the binomial expansion of raw
    power averages (the same arithmetic path for exact and sampled input).

    Slot 1 carries the mean (the first central moment is identically zero).
    """
    raw = raw_moments(data, k_max)
    mean = raw[1]
    alpha = np.zeros(k_max + 1)
    alpha[0] = 1.0
    if k_max >= 1:
        alpha[1] = mean
    for k in range(2, k_max + 1):
        acc = 0.0
        for i in range(k + 1):
            acc += math.comb(k, i) * raw[k - i] * (-mean) ** i
        alpha[k] = acc
    return alpha


def skew_kurt(alpha: np.ndarray) -> tuple[float, float]:
    """Skewness and excess kurtosis from central moments alpha_0..alpha_4.

    Raises:
        UndefinedMomentsError: if the variance is not positive.
    """
    if len(alpha) < 5:
        raise ValueError("need central moments through alpha_4")
    var = alpha[2]
    if not var > 0.0:
        raise UndefinedMomentsError(f"variance {var!r} is not positive")
    skew = alpha[3] / var**1.5
    kurt = alpha[4] / var**2 - 3.0
    return float(skew), float(kurt)


def distribution_moments(data) -> tuple[float, float, float, float]:
    """(mean, variance, skewness, excess kurtosis) of a distribution/sample."""
    alpha = central_moments(data, 4)
    s, q = skew_kurt(alpha)
    return float(alpha[1]), float(alpha[2]), s, q


def symmetrize(dist: TransferDistribution) -> TransferDistribution:
    """Mass-average M with -M; odd moments vanish exactly afterwards."""
    return dist.symmetrized()


@dataclass
class MomentReport:
    """Per-cycle transfer moments with jackknife uncertainties.

    Exact-mode reports carry zero sigmas.
    """

    cycles: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    skewness: np.ndarray
    kurtosis: np.ndarray
    sigma_mean: np.ndarray
    sigma_variance: np.ndarray
    sigma_skewness: np.ndarray
    sigma_kurtosis: np.ndarray

    @classmethod
    def from_distributions(cls, dists) -> "MomentReport":
        """Zero-uncertainty report from exact per-cycle distributions.

        Degenerate (zero-variance) rows get NaN skewness and kurtosis.
        """
        rows = []
        for d in dists:
            alpha = central_moments(d, 4)
            if alpha[2] > 0.0:
                s, q = skew_kurt(alpha)
            else:
                s, q = math.nan, math.nan
            rows.append((float(alpha[1]), float(alpha[2]), s, q))
        zeros = np.zeros(len(rows))
        return cls(
            cycles=np.array([d.cycles for d in dists], dtype=np.int64),
            mean=np.array([r[0] for r in rows]),
            variance=np.array([r[1] for r in rows]),
            skewness=np.array([r[2] for r in rows]),
            kurtosis=np.array([r[3] for r in rows]),
            sigma_mean=zeros.copy(),
            sigma_variance=zeros.copy(),
            sigma_skewness=zeros.copy(),
            sigma_kurtosis=zeros.copy(),
        )


@dataclass
class JackknifeResult:
    sigma: float
    bias: float
    estimates: np.ndarray = field(repr=False)


def jackknife_sigma(statistic, states) -> JackknifeResult:
    """Delete-one jackknife uncertainty of `statistic` over `states`.

    `statistic` maps a list of states to a float; it is re-evaluated with
    each state removed.  Returns the uncertainty
    sigma = sqrt((N-1)/N * sum_i (theta_(i) - theta_(.))^2) together with
    the jackknife bias estimate (N-1)(theta_(.) - theta_full).
    """
    states = list(states)
    n = len(states)
    if n < 2:
        raise ValueError("jackknife requires at least 2 states")
    estimates = np.array(
        [statistic(states[:i] + states[i + 1 :]) for i in range(n)]
    )
    center = estimates.mean()
    sigma = math.sqrt((n - 1) / n * np.sum((estimates - center) ** 2))
    bias = (n - 1) * (center - statistic(states))
    return JackknifeResult(sigma=float(sigma), bias=float(bias), estimates=estimates)


def weighted_cycle_average(values, sigmas) -> tuple[float, float]:
    """Inverse-variance weighted average and its uncertainty 1/sqrt(sum w).

    Infinite sigmas receive zero weight; zero or negative sigmas are
    rejected.
    """
    values = np.asarray(values, dtype=float)
    sigmas = np.asarray(sigmas, dtype=float)
    if values.shape != sigmas.shape or values.ndim != 1 or values.size == 0:
        raise ValueError("values and sigmas must be equal-length 1-D arrays")
    if np.any(sigmas <= 0.0):
        raise DegenerateWeightError("all sigmas must be positive")
    w = 1.0 / sigmas**2
    total = w.sum()
    if total == 0.0:
        raise DegenerateWeightError("all weights vanished (infinite sigmas)")
    avg = float(np.sum(w * np.where(w > 0, values, 0.0)) / total)
    return avg, float(1.0 / math.sqrt(total))


@dataclass(frozen=True)
class ExponentFit:
    """Power-law fit value ~ t^(1/z) over a cycle window."""

    z: float
    sigma_z: float
    t_min: int
    t_max: int
    n_points: int


def fit_dynamical_exponent(
    cycles,
    values,
    sigmas=None,
    window: tuple[int, int] = (10, None),
) -> ExponentFit:
    """Fit value ~ t^(1/z) by (weighted) least squares on log-log axes.

    `sigmas`, when given, weight each point by its propagated log-space
    uncertainty sigma/value and sigma_z comes from the weighted-fit
    covariance; otherwise the fit is unweighted and sigma_z comes from the
    residual variance.  Multiplying all values by a positive constant leaves
    z unchanged exactly.
    """
    cycles = np.asarray(cycles, dtype=float)
    values = np.asarray(values, dtype=float)
    t_lo = window[0]
    t_hi = window[1] if window[1] is not None else cycles.max()
    mask = (cycles >= t_lo) & (cycles <= t_hi)
    if mask.sum() < 3:
        raise ValueError(
            f"need >= 3 points in window [{t_lo}, {t_hi}], have {int(mask.sum())}"
        )
    t = cycles[mask]
    v = values[mask]
    if np.any(v <= 0.0):
        raise ValueError("power-law fit requires positive values in window")
    x = np.log(t)
    y = np.log(v)
    if sigmas is not None:
        s = np.asarray(sigmas, dtype=float)[mask]
        if np.any(s <= 0.0):
            raise DegenerateWeightError("sigmas must be positive for weighting")
        w = (v / s) ** 2  # sigma of log(v) is s/v
    else:
        w = np.ones_like(y)
    sw = w.sum()
    xm = np.sum(w * x) / sw
    ym = np.sum(w * y) / sw
    sxx = np.sum(w * (x - xm) ** 2)
    slope = np.sum(w * (x - xm) * (y - ym)) / sxx
    if slope <= 0.0:
        raise ValueError(f"fitted slope {slope!r} is not positive")
    if sigmas is not None:
        var_slope = 1.0 / sxx
    else:
        resid = y - ym - slope * (x - xm)
        dof = max(len(y) - 2, 1)
        var_slope = float(np.sum(resid**2) / dof / sxx)
    z = 1.0 / slope
    sigma_z = math.sqrt(var_slope) / slope**2
    return ExponentFit(
        z=float(z),
        sigma_z=float(sigma_z),
        t_min=int(t.min()),
        t_max=int(t.max()),
        n_points=int(mask.sum()),
    )


def _monotone_pl_residual(x, y, n_knots):
    """Normalized SSR of the best monotone piecewise-linear fit y(x)."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order]
    idx = np.unique(np.round(np.linspace(0, xs.size - 1, n_knots)).astype(int))
    knots = np.unique(xs[idx])
    n_k = knots.size
    tss = float(np.sum((ys - ys.mean()) ** 2))
    if n_k < 2 or tss == 0.0:
        return 0.0
    seg = np.clip(np.searchsorted(knots, xs, side="right") - 1, 0, n_k - 2)
    width = knots[seg + 1] - knots[seg]
    frac = np.where(width > 0, (xs - knots[seg]) / np.where(width > 0, width, 1.0), 0.0)
    hats = np.zeros((xs.size, n_k))
    rows = np.arange(xs.size)
    hats[rows, seg] = 1.0 - frac
    hats[rows, seg + 1] += frac
    # knot values v = v0 + cumulative nonnegative increments -> monotone
    steps = np.tril(np.ones((n_k, n_k)), -1)[:, :-1]
    design = np.hstack([np.ones((xs.size, 1)), hats @ steps])
    lo = np.concatenate([[-np.inf], np.zeros(n_k - 1)])
    hi = np.full(n_k, np.inf)
    best = np.inf
    for sign in (1.0, -1.0):  # try increasing and decreasing references
        fit = lsq_linear(design, sign * ys, bounds=(lo, hi))
        ssr = float(np.sum((design @ fit.x - sign * ys) ** 2))
        best = min(best, ssr)
    return best / tss


def collapse_residual(
    series,
    gamma: float,
    *,
    t_min: int = 8,
    n_knots: int = 12,
) -> float:
    """Quality of a mu * t^gamma data collapse (smaller is better).

    `series` is an iterable of (mu, cycles_array, values_array) triples from
    at least two distinct imbalances.  Points with t < t_min are excluded,
    everything is pooled and sorted by x = mu * t^gamma, and a monotone
    piecewise-linear reference with `n_knots` knots placed uniformly in rank
    of x is fit; the result is the sum of squared residuals normalized by
    the pooled variance.  Only the location of the minimum over gamma is
    meaningful, not its value.
    """
    xs = []
    ys = []
    mus = set()
    for mu, cycles, values in series:
        cycles = np.asarray(cycles, dtype=float)
        values = np.asarray(values, dtype=float)
        mask = cycles >= t_min
        if mask.any():
            mus.add(float(mu))
            xs.append(mu * cycles[mask] ** gamma)
            ys.append(values[mask])
    if len(mus) < 2:
        raise ValueError("collapse needs >= 2 distinct mu series after the cut")
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    if x.size < 3:
        raise ValueError("not enough points for a collapse residual")
    return _monotone_pl_residual(x, y, n_knots)


def collapse_scan(
    series,
    gammas,
    *,
    t_min: int = 8,
    n_knots: int = 12,
) -> tuple[np.ndarray, np.ndarray]:
    """Collapse residual on a gamma grid; returns (gammas, residuals)."""
    gammas = np.asarray(gammas, dtype=float)
    res = np.array(
        [collapse_residual(series, g, t_min=t_min, n_knots=n_knots) for g in gammas]
    )
    return gammas, res
