"""Report types and deterministic JSON/CSV emission.

Every verification produces rows for one shared CSV schema
(name, lhs, rhs, se, n, seed, satisfied, margin_sigmas) plus a typed JSON
object.  Serialization is byte-deterministic: floats use Python repr
(shortest round-trip), JSON keys are sorted, and CSV uses LF endings.
"""

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1
CSV_HEADER = ["name", "lhs", "rhs", "se", "n", "seed", "satisfied", "margin_sigmas"]

# One-sided slack for inequality verdicts: lhs <= rhs + 3 * paired SE.
INEQUALITY_SLACK_SIGMAS = 3.0
# Two-sided tolerance for equality checks: |lhs - rhs| <= 4 * paired SE.
EQUALITY_SLACK_SIGMAS = 4.0


@dataclass(frozen=True)
class InequalityReport:
    """Paired Monte Carlo estimates of two MSEs and a satisfied verdict.

    satisfied <=> lhs_estimate <= rhs_estimate + 3 * paired_diff_se, where
    paired_diff_se is the standard error of the per-draw difference under
    common random numbers (exactly 0 when both sides are the same
    computation, so degenerate cases report margin exactly 0).
    """

    name: str
    lhs_estimate: float
    rhs_estimate: float
    paired_diff_se: float
    n_samples: int
    seed: int
    satisfied: bool
    margin_sigmas: float

    def csv_row(self):
        return [
            self.name,
            repr(self.lhs_estimate),
            repr(self.rhs_estimate),
            repr(self.paired_diff_se),
            str(self.n_samples),
            str(self.seed),
            "true" if self.satisfied else "false",
            repr(self.margin_sigmas),
        ]

    def to_json_dict(self):
        return {
            "name": self.name,
            "lhs_estimate": self.lhs_estimate,
            "rhs_estimate": self.rhs_estimate,
            "paired_diff_se": self.paired_diff_se,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "satisfied": self.satisfied,
            "margin_sigmas": self.margin_sigmas,
        }


def inequality_report(name, lhs_sq, rhs_sq, seed):
    """Build an InequalityReport from paired per-draw squared errors."""
    lhs_sq = np.asarray(lhs_sq, dtype=float)
    rhs_sq = np.asarray(rhs_sq, dtype=float)
    n = lhs_sq.size
    if n < 1000:
        raise ValueError(f"reports need n_samples >= 1000, got {n}")
    lhs = float(np.mean(lhs_sq))
    rhs = float(np.mean(rhs_sq))
    d = lhs_sq - rhs_sq
    se = float(np.std(d, ddof=1)) / math.sqrt(n)
    satisfied = lhs <= rhs + INEQUALITY_SLACK_SIGMAS * se
    margin = (rhs - lhs) / se if se > 0.0 else 0.0
    return InequalityReport(
        name=name,
        lhs_estimate=lhs,
        rhs_estimate=rhs,
        paired_diff_se=se,
        n_samples=int(n),
        seed=int(seed),
        satisfied=bool(satisfied),
        margin_sigmas=float(margin),
    )


@dataclass(frozen=True)
class EqualityCheck:
    """Two-sided paired check: |lhs - rhs| within 4 paired standard errors."""

    name: str
    lhs_estimate: float
    rhs_estimate: float
    paired_diff_se: float
    n_samples: int
    seed: int
    satisfied: bool
    margin_sigmas: float  # signed (rhs - lhs) / se

    def csv_row(self):
        return [
            self.name,
            repr(self.lhs_estimate),
            repr(self.rhs_estimate),
            repr(self.paired_diff_se),
            str(self.n_samples),
            str(self.seed),
            "true" if self.satisfied else "false",
            repr(self.margin_sigmas),
        ]

    def to_json_dict(self):
        return {
            "name": self.name,
            "lhs_estimate": self.lhs_estimate,
            "rhs_estimate": self.rhs_estimate,
            "paired_diff_se": self.paired_diff_se,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "satisfied": self.satisfied,
            "margin_sigmas": self.margin_sigmas,
        }


def equality_check(name, lhs, rhs, diff_values, seed):
    """Build an EqualityCheck from the per-draw paired difference sample."""
    diff_values = np.asarray(diff_values, dtype=float)
    n = diff_values.size
    se = float(np.std(diff_values, ddof=1)) / math.sqrt(n)
    gap = abs(lhs - rhs)
    satisfied = gap <= EQUALITY_SLACK_SIGMAS * se if se > 0.0 else gap == 0.0
    margin = (rhs - lhs) / se if se > 0.0 else 0.0
    return EqualityCheck(
        name=name,
        lhs_estimate=float(lhs),
        rhs_estimate=float(rhs),
        paired_diff_se=se,
        n_samples=int(n),
        seed=int(seed),
        satisfied=bool(satisfied),
        margin_sigmas=float(margin),
    )


@dataclass(frozen=True)
class ThresholdReport:
    """A statistic checked against a hard threshold (no Monte Carlo slack)."""

    name: str
    statistic: float
    threshold: float
    n_samples: int
    seed: int
    satisfied: bool

    def csv_row(self):
        return [
            self.name,
            repr(self.statistic),
            repr(self.threshold),
            repr(0.0),
            str(self.n_samples),
            str(self.seed),
            "true" if self.satisfied else "false",
            repr(self.threshold - self.statistic),
        ]

    def to_json_dict(self):
        return {
            "name": self.name,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "satisfied": self.satisfied,
        }


def threshold_report(name, statistic, threshold, n_samples, seed):
    return ThresholdReport(
        name=name,
        statistic=float(statistic),
        threshold=float(threshold),
        n_samples=int(n_samples),
        seed=int(seed),
        satisfied=bool(statistic <= threshold),
    )


@dataclass
class ExperimentResult:
    """Everything one experiment run produced.

    `reports` drive the CSV and the satisfied verdict; `details` is
    experiment-specific JSON-able metadata (closed-form cross-checks,
    discard counters, diagnostics).
    """

    experiment: str
    reports: list
    details: dict = field(default_factory=dict)

    @property
    def all_satisfied(self):
        return all(r.satisfied for r in self.reports)

    def to_json_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "reports": [r.to_json_dict() for r in self.reports],
            "details": self.details,
        }


def render_json(obj):
    """Canonical JSON bytes: sorted keys, 2-space indent, trailing newline."""
    return (json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n").encode()


def render_csv(reports):
    """CSV bytes for a list of reports: fixed header, LF endings, UTF-8."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in reports:
        writer.writerow(r.csv_row())
    return buf.getvalue().encode()


def canonical_config_hash(cfg):
    """sha256 over a canonical serialization; stable under key reordering."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode()).hexdigest()
