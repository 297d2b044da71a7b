"""Univariate distribution primitives: uniform, exponential, normal.

Each family exposes cdf/sf/pdf/quantile/mean/variance, the support, and
inverse-transform sampling (the only sampler in the package, so every draw
is reproducible from the quantile function and one uniform block).  Infinite
supports are truncated at the 1e-12 and 1 - 1e-12 quantiles for quadrature;
`truncated_support()` returns those endpoints.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from . import quadrature
from .errors import DomainError

TAIL_EPS = 1e-12


@dataclass(frozen=True)
class Marginal:
    """Base class; subclasses are immutable and safe to share across threads."""

    def cdf(self, x):
        raise NotImplementedError

    def sf(self, x):
        """Survival function 1 - cdf(x), computed without cancellation."""
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    def quantile(self, p):
        """Inverse cdf; p must lie strictly inside (0, 1)."""
        p = np.asarray(p, dtype=float)
        if np.any(p <= 0.0) or np.any(p >= 1.0):
            raise DomainError(f"quantile probability must be in (0, 1), got {p}")
        return self._quantile(p)

    def _quantile(self, p):
        raise NotImplementedError

    def mean(self):
        raise NotImplementedError

    def variance(self):
        raise NotImplementedError

    def support(self):
        """(left, right) endpoints, possibly infinite."""
        raise NotImplementedError

    def truncated_support(self):
        """Support clipped to the [1e-12, 1 - 1e-12] quantile range."""
        lo, hi = self.support()
        if not math.isfinite(lo):
            lo = float(self.quantile(TAIL_EPS))
        if not math.isfinite(hi):
            hi = float(self.quantile(1.0 - TAIL_EPS))
        return lo, hi

    def sample(self, rng, n):
        """n inverse-transform draws; deterministic given the rng state."""
        if n < 1:
            raise DomainError(f"sample size must be >= 1, got {n}")
        u = rng.random(n)
        return self._quantile(u)

    def to_config(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(Marginal):
    lower: float = 0.0
    upper: float = 1.0

    def __post_init__(self):
        if not (self.lower < self.upper):
            raise DomainError(
                f"uniform requires lower < upper, got [{self.lower}, {self.upper}]"
            )

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.lower) / (self.upper - self.lower), 0.0, 1.0)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((self.upper - x) / (self.upper - self.lower), 0.0, 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lower) & (x <= self.upper)
        return np.where(inside, 1.0 / (self.upper - self.lower), 0.0)

    def _quantile(self, p):
        return self.lower + p * (self.upper - self.lower)

    def mean(self):
        return 0.5 * (self.lower + self.upper)

    def variance(self):
        return (self.upper - self.lower) ** 2 / 12.0

    def support(self):
        return self.lower, self.upper

    def to_config(self):
        return {"family": "uniform", "lower": self.lower, "upper": self.upper}


@dataclass(frozen=True)
class Exponential(Marginal):
    rate: float = 1.0

    def __post_init__(self):
        if not (self.rate > 0.0):
            raise DomainError(f"exponential rate must be > 0, got {self.rate}")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0.0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0.0, np.exp(-self.rate * np.maximum(x, 0.0)), 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def _quantile(self, p):
        return -np.log1p(-p) / self.rate

    def mean(self):
        return 1.0 / self.rate

    def variance(self):
        return 1.0 / self.rate**2

    def support(self):
        return 0.0, math.inf

    def to_config(self):
        return {"family": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class Normal(Marginal):
    mean_: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        if not (self.sd > 0.0):
            raise DomainError(f"normal sd must be > 0, got {self.sd}")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return ndtr((x - self.mean_) / self.sd)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return ndtr(-(x - self.mean_) / self.sd)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mean_) / self.sd
        return np.exp(-0.5 * z * z) / (self.sd * math.sqrt(2.0 * math.pi))

    def _quantile(self, p):
        return self.mean_ + self.sd * ndtri(p)

    def mean(self):
        return self.mean_

    def variance(self):
        return self.sd**2

    def support(self):
        return -math.inf, math.inf

    def to_config(self):
        return {"family": "normal", "mean": self.mean_, "sd": self.sd}


@dataclass(frozen=True)
class MaxOfIid(Marginal):
    """Distribution of the max of `count` iid draws from `base`.

    Used to model a pool of outsiders as one marginal: F(y) = F0(y)^count.
    """

    base: Marginal = None
    count: int = 1

    def __post_init__(self):
        if self.base is None or not isinstance(self.base, Marginal):
            raise DomainError("MaxOfIid requires a base marginal")
        if self.count < 1:
            raise DomainError(f"MaxOfIid count must be >= 1, got {self.count}")

    def cdf(self, x):
        return self.base.cdf(x) ** self.count

    def sf(self, x):
        c = self.base.cdf(x)
        # 1 - c^m without cancellation for c near 1.
        return -np.expm1(self.count * np.log(np.maximum(c, np.finfo(float).tiny)))

    def pdf(self, x):
        return self.count * self.base.cdf(x) ** (self.count - 1) * self.base.pdf(x)

    def _quantile(self, p):
        return self.base._quantile(p ** (1.0 / self.count))

    def mean(self):
        lo, hi = self.truncated_support()
        return float(lo + quadrature.integrate(lambda w: 1.0 - self.cdf(w), lo, hi))

    def variance(self):
        lo, hi = self.truncated_support()
        m = self.mean()
        return float(quadrature.integrate(lambda w: (w - m) ** 2 * self.pdf(w), lo, hi))

    def support(self):
        return self.base.support()

    def to_config(self):
        return {"family": "max-of-iid", "base": self.base.to_config(), "count": self.count}


def marginal_from_config(cfg):
    """Build a marginal from its JSON-config dict representation."""
    if not isinstance(cfg, dict) or "family" not in cfg:
        raise DomainError(f"marginal config must be a dict with a 'family' key, got {cfg!r}")
    family = cfg["family"]
    try:
        if family == "uniform":
            return Uniform(lower=float(cfg["lower"]), upper=float(cfg["upper"]))
        if family == "exponential":
            return Exponential(rate=float(cfg["rate"]))
        if family == "normal":
            return Normal(mean_=float(cfg["mean"]), sd=float(cfg["sd"]))
        if family == "max-of-iid":
            return MaxOfIid(base=marginal_from_config(cfg["base"]), count=int(cfg["count"]))
    except KeyError as exc:
        raise DomainError(f"marginal config for {family!r} is missing key {exc}") from exc
    raise DomainError(f"unknown marginal family {family!r}")
