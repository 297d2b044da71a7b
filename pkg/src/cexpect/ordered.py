"""Order-statistic and record-value machinery.

Conditional laws of the sample maximum given a lower order statistic, their
closed-form means for the uniform and exponential families, Markov-property
checks on binned simulations, record extraction, capped record-sequence
simulation (through the kernel backend), and the MSE-ordering reports.

Given X_{j:n} = x the top n-j values are iid draws from F truncated above x,
so X_{n:n} | X_{j:n}=x is the max of m = n-j such draws with density

    m * ((F(z) - F(x)) / sf(x))^(m-1) * f(z) / sf(x),   z > x.

Regression tabulation integrates the equivalent quantile-space form
E = int_0^1 isf(sf(x) * (1 - w^(1/m))) dw, which stays accurate arbitrarily
far into the right tail where cdf arithmetic saturates.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _kernels
from .condexp import RegressionFunction, chebyshev_nodes
from .errors import DomainError, SampleSizeError
from .marginals import Exponential, Marginal, Uniform
from .quadrature import integrate
from .reports import ExperimentResult, inequality_report, threshold_report
from .rng import run_chunked, simulate_chunked

TAG_ORDER = 3
TAG_RECORDS = 4

RECORD_CAP_DEFAULT = 10**6
REGRESSION_BINS = 40
REGRESSION_INTERIOR = (0.05, 0.95)


def _isf(m: Marginal, s):
    """Inverse survival function, exact in the far right tail."""
    s = np.asarray(s, dtype=float)
    if isinstance(m, Uniform):
        return m.upper - (m.upper - m.lower) * s
    if isinstance(m, Exponential):
        return -np.log(s) / m.rate
    from .marginals import Normal

    if isinstance(m, Normal):
        from scipy.special import ndtri

        return m.mean_ - m.sd * ndtri(s)
    return m._quantile(np.clip(1.0 - s, 1e-16, 1.0 - 1e-16))


def cond_pdf_max_given_next(m: Marginal, z, x):
    """Density of X_{n:n} at z given X_{n-1:n} = x:  f(z) / (1 - F(x)), z > x."""
    return _cond_pdf_max(m, z, x, lag=1)


def cond_pdf_max_given_second(m: Marginal, z, x):
    """Density of X_{n:n} at z given X_{n-2:n} = x:
    2 (F(z) - F(x)) f(z) / (1 - F(x))^2, z > x.
    """
    return _cond_pdf_max(m, z, x, lag=2)


def _cond_pdf_max(m: Marginal, z, x, lag):
    sf_x = float(m.sf(x))
    if sf_x <= 0.0:
        raise DomainError(f"conditioning point x={x} has F(x)=1; conditional law undefined")
    z = np.asarray(z, dtype=float)
    sf_z = np.asarray(m.sf(z), dtype=float)
    ratio = np.clip((sf_x - sf_z) / sf_x, 0.0, 1.0)
    dens = lag * ratio ** (lag - 1) * np.asarray(m.pdf(z), dtype=float) / sf_x
    return np.where(z > x, dens, 0.0)


def _check_interior(m: Marginal, x):
    lo, hi = m.support()
    if not (lo < x < hi):
        raise DomainError(f"x={x} must lie strictly inside the support ({lo}, {hi})")


def cond_mean_max(m: Marginal, x, lag, method="auto"):
    """E(X_{n:n} | X_{n-lag:n} = x): the mean of the max of `lag` iid draws
    from F truncated above x.

    Closed forms for the uniform ((x + lag*b)/(lag+1)) and exponential
    (x + H_lag / rate) families; z-space quadrature of z * cond_pdf for
    everything else or when method="quadrature".
    """
    _check_interior(m, x)
    if method not in ("auto", "closed", "quadrature"):
        raise DomainError(f"unknown method {method!r}")
    if method != "quadrature":
        if isinstance(m, Uniform):
            return (x + lag * m.upper) / (lag + 1.0)
        if isinstance(m, Exponential):
            harmonic = sum(1.0 / i for i in range(1, lag + 1))
            return x + harmonic / m.rate
        if method == "closed":
            raise DomainError(f"no closed form for {type(m).__name__}")
    lo, hi = m.truncated_support()
    num = integrate(lambda z: z * _cond_pdf_max(m, z, x, lag), x, hi)
    den = integrate(lambda z: _cond_pdf_max(m, z, x, lag), x, hi)
    return float(num / den)


def g1(m: Marginal, x, method="auto"):
    """E(X_{n:n} | X_{n-1:n} = x)."""
    return cond_mean_max(m, x, lag=1, method=method)


def g2(m: Marginal, x, method="auto"):
    """E(X_{n:n} | X_{n-2:n} = x)."""
    return cond_mean_max(m, x, lag=2, method=method)


def max_regression(m: Marginal, n, j):
    """Tabulated x -> E(X_{n:n} | X_{j:n} = x) over the truncated support.

    Uses the quantile-space integral (see module docstring), which keeps the
    tabulation accurate at tail nodes where 1 - F(x) underflows cdf space.
    """
    if not 1 <= j <= n - 1:
        raise DomainError(f"need 1 <= j <= n-1, got j={j}, n={n}")
    mm = n - j
    lo, hi = m.truncated_support()
    grid = chebyshev_nodes(lo, hi)
    w_hi = 1.0 - 1e-13
    values = np.empty_like(grid)
    for i, x in enumerate(grid):
        sf_x = float(m.sf(x))
        if sf_x <= 0.0:
            values[i] = values[i - 1]
            continue

        def mean_of_max(w):
            w = np.maximum(w, 1e-300)
            shrink = -np.expm1(np.log(w) / mm)
            return _isf(m, sf_x * shrink)

        values[i] = integrate(mean_of_max, 0.0, w_hi)
    return RegressionFunction(grid, values)


def order_stat_matrix(m: Marginal, n, n_samples, seed, pool=None):
    """(n_samples, n) matrix of sorted iid rows; deterministic given seed."""
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")

    def worker(rng, count):
        x = m.sample(rng, count * n).reshape(count, n)
        x.sort(axis=1)
        return (x,)

    return simulate_chunked(worker, n_samples, seed, TAG_ORDER, pool=pool)[0]


def window_conditional_mean(matrix, j, x0, halfwidth):
    """Mean of the row max over rows with X_{j:n} in [x0 - h, x0 + h].

    Returns (mean, count).  `matrix` comes from order_stat_matrix; j is the
    1-based order-statistic index to condition on.
    """
    n = matrix.shape[1]
    if not 1 <= j <= n:
        raise DomainError(f"order statistic index {j} out of range 1..{n}")
    cond = matrix[:, j - 1]
    mask = np.abs(cond - x0) <= halfwidth
    count = int(np.count_nonzero(mask))
    if count == 0:
        raise SampleSizeError(f"no rows with X_{{{j}:{n}}} within {halfwidth} of {x0}")
    return float(np.mean(matrix[mask, n - 1])), count


def markov_property_check(
    m: Marginal,
    n,
    n_samples,
    seed,
    primary_bins=20,
    sub_bins=3,
    min_count=200,
    pool=None,
    name=None,
):
    """Markov check for order statistics: given X_{n-1:n}, the conditional
    mean of X_{n:n} must not depend on X_{n-2:n}.

    Rows are binned by X_{n-1:n} (equal-count bins); inside each bin the
    within-bin linear trend in X_{n-1:n} is removed (it exactly absorbs the
    confounding between the bin's residual spread and X_{n-2:n}), then the
    detrended residuals are split by X_{n-2:n} sub-bins and each sub-bin mean
    is tested against 0.  satisfied <=> max |z| <= 4.
    """
    if n < 3:
        raise DomainError(f"markov check needs n >= 3, got {n}")
    matrix = order_stat_matrix(m, n, n_samples, seed, pool=pool)
    t = matrix[:, n - 1]
    w = matrix[:, n - 2]
    v = matrix[:, n - 3]

    widened = False
    rows_per = n_samples // (primary_bins * sub_bins)
    if rows_per < min_count:
        primary_bins = max(4, n_samples // (min_count * sub_bins))
        widened = True

    qs = np.quantile(w, np.linspace(0.0, 1.0, primary_bins + 1))
    bin_ids = np.clip(np.searchsorted(qs[1:-1], w, side="right"), 0, primary_bins - 1)

    zs = []
    bin_rows = []
    for b in range(primary_bins):
        sel = bin_ids == b
        wb = w[sel]
        tb = t[sel]
        vb = v[sel]
        if wb.size < sub_bins * 2:
            continue
        wc = wb - wb.mean()
        denom = float(np.sum(wc * wc))
        slope = float(np.sum(wc * (tb - tb.mean())) / denom) if denom > 0 else 0.0
        resid = tb - tb.mean() - slope * wc
        sub_edges = np.quantile(vb, np.linspace(0.0, 1.0, sub_bins + 1))
        sub_ids = np.clip(np.searchsorted(sub_edges[1:-1], vb, side="right"), 0, sub_bins - 1)
        for s in range(sub_bins):
            r = resid[sub_ids == s]
            if r.size < 2:
                continue
            se = float(np.std(r, ddof=1)) / math.sqrt(r.size)
            zs.append(float(np.mean(r)) / se if se > 0 else 0.0)
        bin_rows.append(
            {
                "bin_mean_cond": float(wb.mean()),
                "bin_mean_max": float(tb.mean()),
                "count": int(wb.size),
            }
        )

    max_abs_z = float(np.max(np.abs(zs))) if zs else 0.0
    base = name or f"order-stats/markov(n={n})"
    report = threshold_report(base, max_abs_z, 4.0, n_samples, seed)
    details = {
        "max_abs_z": max_abs_z,
        "primary_bins": int(primary_bins),
        "sub_bins": int(sub_bins),
        "bins_widened": widened,
        "bin_conditional_means": bin_rows,
    }
    return ExperimentResult(experiment=base, reports=[report], details=details)


def mse_order_inequality(m: Marginal, n, k, l, n_samples, seed, pool=None, name=None):
    """Eq. between order statistics: conditioning on a higher order statistic
    predicts the maximum at least as well.  lhs conditions on X_{l:n}, rhs on
    X_{k:n}, k <= l; k = l degenerates to exact equality.
    """
    if not (1 <= k <= l <= n - 1):
        raise DomainError(f"need 1 <= k <= l <= n-1, got k={k}, l={l}, n={n}")
    reg_k = max_regression(m, n, k)
    reg_l = reg_k if l == k else max_regression(m, n, l)
    matrix = order_stat_matrix(m, n, n_samples, seed, pool=pool)
    target = matrix[:, n - 1]
    lhs_sq = (target - reg_l(matrix[:, l - 1])) ** 2
    rhs_sq = (target - reg_k(matrix[:, k - 1])) ** 2
    base = name or f"order-stats/mse(n={n},k={k},l={l})"
    return inequality_report(base, lhs_sq, rhs_sq, seed)


@dataclass(frozen=True)
class RecordSequence:
    """Upper record values and their 1-based record times."""

    values: np.ndarray
    times: np.ndarray


def extract_records(sequence):
    """Upper records of a sequence; the first element is a record by convention."""
    seq = np.asarray(sequence, dtype=float)
    if seq.ndim != 1 or seq.size == 0:
        raise DomainError("record extraction needs a nonempty 1-D sequence")
    running = np.maximum.accumulate(seq)
    before = np.empty_like(seq)
    before[0] = -np.inf
    before[1:] = running[:-1]
    idx = np.flatnonzero(seq > before)
    return RecordSequence(values=seq[idx], times=idx + 1)


def cumulative_hazard(m: Marginal, x):
    """R(x) = -log(1 - F(x)); requires 0 < F(x) < 1."""
    f = float(m.cdf(x))
    if not (0.0 < f < 1.0):
        raise DomainError(f"cumulative hazard needs 0 < F(x) < 1; F({x}) = {f}")
    return float(-np.log(m.sf(x)))


@dataclass
class RecordBatch:
    """Record values at depths (n, n-1, n-2) for sequences reaching depth n.

    values[:, 0] is the depth-n record, values[:, 1] the previous one,
    values[:, 2] the one before that.  Sequences that did not reach depth n
    within `cap` draws are discarded and counted.
    """

    values: np.ndarray
    depth: int
    n_sequences: int
    n_discarded: int
    cap: int


def simulate_records(m: Marginal, depth, n_sequences, seed, cap=RECORD_CAP_DEFAULT, pool=None):
    """Simulate iid sequences until record depth `depth` (or the draw cap).

    Record extraction runs in uniform space through the kernel backend
    (records are invariant under the monotone quantile transform), then the
    kept triples map through the marginal quantile.  Everything is chunked
    and deterministic per (seed, chunk), independent of worker count.
    """
    if depth < 3:
        raise DomainError(f"record depth must be >= 3, got {depth}")
    if cap < 1:
        raise DomainError(f"cap must be >= 1, got {cap}")

    def worker(rng, count):
        last3 = np.full((count, 3), np.nan)
        done = np.zeros(count, dtype=np.uint8)
        max_val = np.full(count, -np.inf)
        depths = np.zeros(count, dtype=np.int64)
        used = np.zeros(count, dtype=np.int64)
        idx = np.arange(count)
        state_last3 = last3.copy()
        state_done = done.copy()
        state_max = max_val.copy()
        state_depth = depths.copy()
        state_used = used.copy()
        consumed = 0
        block = 64
        while idx.size > 0 and consumed < cap:
            width = min(block, cap - consumed)
            draws = rng.random((idx.size, width))
            _kernels.scan_records(
                draws, state_max, state_depth, state_last3, state_used, state_done, depth
            )
            consumed += width
            block = min(block * 2, 65536)
            finished = state_done != 0
            if np.any(finished):
                rows = idx[finished]
                last3[rows] = state_last3[finished]
                done[rows] = 1
                used[rows] = state_used[finished]
                keep = ~finished
                idx = idx[keep]
                state_last3 = np.ascontiguousarray(state_last3[keep])
                state_done = np.ascontiguousarray(state_done[keep])
                state_max = np.ascontiguousarray(state_max[keep])
                state_depth = np.ascontiguousarray(state_depth[keep])
                state_used = np.ascontiguousarray(state_used[keep])
        if idx.size > 0:
            used[idx] = state_used
        return last3, done, used

    parts = run_chunked(worker, n_sequences, seed, TAG_RECORDS, chunk_size=8192, pool=pool)
    last3 = np.concatenate([p[0] for p in parts], axis=0)
    done = np.concatenate([p[1] for p in parts], axis=0)
    kept_u = last3[done != 0]
    kept_u = np.clip(kept_u, 1e-15, 1.0 - 1e-16)
    values = m._quantile(kept_u)
    return RecordBatch(
        values=values,
        depth=int(depth),
        n_sequences=int(n_sequences),
        n_discarded=int(n_sequences - values.shape[0]),
        cap=int(cap),
    )


def binned_regression(cond, target, n_bins=REGRESSION_BINS, interior=REGRESSION_INTERIOR):
    """Equal-count binned regression of target on cond.

    Bin edges are cond quantiles across the interior band (default 5th-95th
    percentile, 40 bins); rows outside the band fall into the edge bins.
    Returns (per-row predictions, diagnostics dict).
    """
    cond = np.asarray(cond, dtype=float)
    target = np.asarray(target, dtype=float)
    edges = np.quantile(cond, np.linspace(interior[0], interior[1], n_bins + 1))
    ids = np.clip(np.searchsorted(edges[1:-1], cond, side="right"), 0, n_bins - 1)
    counts = np.bincount(ids, minlength=n_bins).astype(float)
    if np.any(counts == 0):
        raise SampleSizeError("empty regression bin; raise n_samples")
    sum_t = np.bincount(ids, weights=target, minlength=n_bins)
    sum_c = np.bincount(ids, weights=cond, minlength=n_bins)
    mean_t = sum_t / counts
    mean_c = sum_c / counts
    diagnostics = {
        "bin_mean_cond": mean_c.tolist(),
        "bin_mean_target": mean_t.tolist(),
        "bin_count": counts.astype(int).tolist(),
    }
    return mean_t[ids], diagnostics


def record_gap_pvalue(batch: RecordBatch, rate=1.0):
    """KS p-value of the lag-1 record gaps against Exponential(rate)."""
    gaps = batch.values[:, 0] - batch.values[:, 1]
    return float(stats.kstest(gaps, lambda x: 1.0 - np.exp(-rate * x)).pvalue)


@dataclass
class RecordMseResult:
    report: object
    details: dict


def record_predictor_mse(
    m: Marginal,
    n,
    lag,
    n_samples,
    seed,
    cap=RECORD_CAP_DEFAULT,
    pool=None,
    name=None,
):
    """Paired record-prediction MSE report: conditioning on the previous
    record (lag 1) vs conditioning `lag` records back.

    lag=2 is the record-value MSE inequality; lag=1 degenerates to exact
    equality.  Both predictors are estimated by equal-count binned
    regression over the simulated record pairs, so the comparison treats
    both lags identically; closed forms serve as oracles in tests only.
    """
    if lag not in (1, 2):
        raise DomainError(f"lag must be 1 or 2, got {lag}")
    if n < 3:
        raise DomainError(f"record depth must be >= 3, got {n}")
    batch = simulate_records(m, n, n_samples, seed, cap=cap, pool=pool)
    kept = batch.values.shape[0]
    if kept < 1000:
        raise SampleSizeError(
            f"only {kept} sequences reached record depth {n} (cap {cap}); raise n_samples"
        )
    target = batch.values[:, 0]
    cond_1 = batch.values[:, 1]
    cond_lag = batch.values[:, lag]
    pred_1, diag_1 = binned_regression(cond_1, target)
    if lag == 1:
        pred_lag, diag_lag = pred_1, diag_1
    else:
        pred_lag, diag_lag = binned_regression(cond_lag, target)
    lhs_sq = (target - pred_1) ** 2
    rhs_sq = (target - pred_lag) ** 2
    base = name or f"records/depth={n},lag={lag}"
    report = inequality_report(base, lhs_sq, rhs_sq, seed)
    details = {
        "n_kept": int(kept),
        "n_discarded": int(batch.n_discarded),
        "cap": int(batch.cap),
        "lag1_bins": diag_1,
        f"lag{lag}_bins": diag_lag,
    }
    return RecordMseResult(report=report, details=details)
