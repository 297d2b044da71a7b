"""Broker-coalition market: traded price as a maximum of suggested prices.

n coalition brokers suggest prices X_1..X_n (iid, or Gaussian-copula
equicorrelated); an optional outsider contributes Y (one marginal, possibly
the exact max-distribution of m iid outsiders).  The traded price is the
rowwise maximum Z.  Individual predictors E(Z | X_i = x) come from exact
one-dimensional quadrature in the independent case (E[max(x, M)] =
x + int_x (1 - F_M)) and from tabulated Nadaraya-Watson regression in the
dependent case.  compare_strategies pits the coalition-average predictor
against each individual predictor on common draws.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .condexp import RegressionFunction, chebyshev_nodes, kernel_regress
from .errors import ConstructionError, DomainError, ExtrapolationError
from .marginals import Marginal, MaxOfIid, marginal_from_config
from .quadrature import integrate
from .reports import ExperimentResult, inequality_report
from .rng import simulate_chunked

TAG_MARKET = 5
PREDICTOR_NODES = 201


@dataclass(frozen=True)
class MarketConfig:
    """Coalition market scenario.

    rho_xx = None means iid brokers; otherwise broker prices share a
    Gaussian-copula equicorrelation (exactly equicorrelated Gaussians when
    the broker marginal is normal).  outsider = None disables the outsider
    (Z is then the coalition maximum alone).
    """

    n_brokers: int
    broker_marginal: Marginal
    rho_xx: float = None
    outsider: Marginal = None
    n_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.n_brokers < 1:
            raise ConstructionError(f"n_brokers must be >= 1, got {self.n_brokers}")
        if self.rho_xx is not None:
            k = self.n_brokers
            if k > 1 and not (-1.0 / (k - 1) < self.rho_xx < 1.0):
                raise ConstructionError(
                    f"equicorrelation rho_xx={self.rho_xx} must lie in "
                    f"(-1/{k - 1}, 1) for {k} brokers"
                )
        if self.n_samples < 1000:
            raise ConstructionError(f"n_samples must be >= 1000, got {self.n_samples}")

    @property
    def iid_brokers(self):
        return self.rho_xx is None or self.n_brokers == 1

    def _broker_chol(self):
        k = self.n_brokers
        corr = np.full((k, k), float(self.rho_xx))
        np.fill_diagonal(corr, 1.0)
        try:
            return np.linalg.cholesky(corr)
        except np.linalg.LinAlgError as exc:
            raise ConstructionError("equicorrelation matrix not positive definite") from exc


def market_from_config(cfg):
    """Build a MarketConfig from the scenario-config dict schema."""
    try:
        brokers = cfg["brokers"]
        marginal = marginal_from_config(brokers["marginal"])
        rho_xx = brokers.get("rho_xx")
        outsider_cfg = cfg.get("outsider")
        outsider = None
        if outsider_cfg is not None:
            base = marginal_from_config(outsider_cfg["marginal"])
            count = int(outsider_cfg.get("count", 1))
            outsider = base if count == 1 else MaxOfIid(base=base, count=count)
        return MarketConfig(
            n_brokers=int(brokers["count"]),
            broker_marginal=marginal,
            rho_xx=None if rho_xx is None else float(rho_xx),
            outsider=outsider,
            n_samples=int(cfg["n_samples"]),
            seed=int(cfg["seed"]),
        )
    except KeyError as exc:
        raise DomainError(f"market config is missing key {exc}") from exc


def simulate_market(cfg: MarketConfig, pool=None):
    """Simulated (X, Y, Z): broker prices, outsider price, rowwise max.

    Y is all -inf when the outsider is disabled.  Deterministic given
    cfg.seed; brokers draw before the outsider within each chunk.
    """
    k = cfg.n_brokers
    chol = None if cfg.iid_brokers else cfg._broker_chol()

    def worker(rng, count):
        if chol is None:
            u = rng.random((count, k))
        else:
            z = rng.standard_normal((count, k)) @ chol.T
            u = ndtr(z)
        x = cfg.broker_marginal._quantile(np.clip(u, 1e-15, 1.0 - 1e-16))
        if cfg.outsider is not None:
            y = cfg.outsider.sample(rng, count)
        else:
            y = np.full(count, -np.inf)
        z_price = np.maximum(x.max(axis=1), y)
        return x, y, z_price

    return simulate_chunked(worker, cfg.n_samples, cfg.seed, TAG_MARKET, pool=pool)


def competitor_max_cdf(cfg: MarketConfig, w):
    """cdf of M_-i = max(other brokers, outsider) in the iid-broker case."""
    w = np.asarray(w, dtype=float)
    out = np.ones_like(w)
    if cfg.n_brokers > 1:
        out = out * cfg.broker_marginal.cdf(w) ** (cfg.n_brokers - 1)
    if cfg.outsider is not None:
        out = out * cfg.outsider.cdf(w)
    return out


def individual_predictor(cfg: MarketConfig, i, x):
    """E(Z | X_i = x).  Exact quadrature for independent brokers:
    E[max(x, M)] = x + int_x^hi (1 - F_M(w)) dw, which is nondecreasing in x
    and always >= x.  The dependent case falls back to kernel regression on
    a dedicated simulated sample.
    """
    if not 0 <= i < cfg.n_brokers:
        raise DomainError(f"broker index {i} out of range 0..{cfg.n_brokers - 1}")
    lo, hi = _price_range(cfg)
    if not (lo <= x <= hi):
        raise ExtrapolationError(f"x={x} outside the price range [{lo:.6g}, {hi:.6g}]")
    if cfg.iid_brokers:
        if x >= hi:
            return float(x)
        return float(x + integrate(lambda w: 1.0 - competitor_max_cdf(cfg, w), x, hi))
    x_s, _, z_s = simulate_market(cfg)
    return kernel_regress(x_s[:, i], z_s, x)


def _price_range(cfg: MarketConfig):
    lo, hi = cfg.broker_marginal.truncated_support()
    if cfg.outsider is not None:
        _, o_hi = cfg.outsider.truncated_support()
        hi = max(hi, o_hi)
    return lo, hi


def predictor_table(cfg: MarketConfig, i=0, sample=None):
    """Tabulated individual predictor for fast rowwise evaluation.

    iid brokers share one exact quadrature table; dependent brokers get a
    Nadaraya-Watson table fit on `sample` (conditioning values clamp to the
    estimator's trusted interior band).
    """
    b_lo, b_hi = cfg.broker_marginal.truncated_support()
    if cfg.iid_brokers:
        grid = chebyshev_nodes(b_lo, b_hi, PREDICTOR_NODES)
        values = np.array([individual_predictor(cfg, i, g) for g in grid])
        return RegressionFunction(grid, values)
    if sample is None:
        raise DomainError("dependent-broker predictor table needs the simulated sample")
    x_s, _, z_s = sample[0], sample[1], sample[2]
    lo, hi = np.percentile(x_s[:, i], [5.0, 95.0])
    grid = np.linspace(lo, hi, PREDICTOR_NODES)
    values = np.array([kernel_regress(x_s[:, i], z_s, g) for g in grid])
    return RegressionFunction(grid, values)


def coalition_average_predictor(cfg: MarketConfig, prices, tables=None):
    """Mean over brokers of E(Z | X_i = prices[i])."""
    prices = np.asarray(prices, dtype=float)
    if prices.shape != (cfg.n_brokers,):
        raise DomainError(f"expected {cfg.n_brokers} prices, got shape {prices.shape}")
    if tables is None:
        return float(
            np.mean([individual_predictor(cfg, i, p) for i, p in enumerate(prices)])
        )
    return float(np.mean([tables[i](prices[i]) for i in range(cfg.n_brokers)]))


@dataclass
class CoalitionReport:
    """Per-broker and coalition predictor MSEs plus win probabilities."""

    per_broker_mse: list
    coalition_mse: float
    win_probabilities: list
    outsider_win_probability: float
    paired_ses: list
    satisfied: list
    n_samples: int
    seed: int
    details: dict = field(default_factory=dict)

    def to_json_dict(self):
        return {
            "per_broker_mse": self.per_broker_mse,
            "coalition_mse": self.coalition_mse,
            "win_probabilities": self.win_probabilities,
            "outsider_win_probability": self.outsider_win_probability,
            "paired_ses": self.paired_ses,
            "satisfied": self.satisfied,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "details": self.details,
        }


def compare_strategies(cfg: MarketConfig, pool=None, name=None):
    """Coalition-average predictor vs each individual predictor, plus win
    probabilities (strict-max winner; ties, probability zero for continuous
    models, break toward the lowest broker index, then the outsider).
    """
    sample = simulate_market(cfg, pool=pool)
    x, y, z = sample
    if cfg.iid_brokers:
        shared = predictor_table(cfg)
        tables = [shared] * cfg.n_brokers
    else:
        tables = [predictor_table(cfg, i, sample) for i in range(cfg.n_brokers)]
    preds = np.column_stack([tables[i](x[:, i]) for i in range(cfg.n_brokers)])
    coalition = preds[:, 0] if cfg.n_brokers == 1 else preds.mean(axis=1)

    lhs_sq = (z - coalition) ** 2
    base = name or "coalition"
    reports = []
    for i in range(cfg.n_brokers):
        rhs_sq = (z - preds[:, i]) ** 2
        reports.append(inequality_report(f"{base}/broker{i + 1}", lhs_sq, rhs_sq, cfg.seed))

    board = np.column_stack([x, y])
    winner = np.argmax(board, axis=1)
    win_counts = np.bincount(winner, minlength=cfg.n_brokers + 1)
    win_probs = win_counts / x.shape[0]

    report = CoalitionReport(
        per_broker_mse=[r.rhs_estimate for r in reports],
        coalition_mse=float(np.mean(lhs_sq)),
        win_probabilities=win_probs[: cfg.n_brokers].tolist(),
        outsider_win_probability=float(win_probs[cfg.n_brokers]),
        paired_ses=[r.paired_diff_se for r in reports],
        satisfied=[r.satisfied for r in reports],
        n_samples=int(cfg.n_samples),
        seed=int(cfg.seed),
        details={"win_probability_sum": float(win_probs.sum())},
    )
    result = ExperimentResult(experiment=base, reports=reports, details=report.to_json_dict())
    return report, result
