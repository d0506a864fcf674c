"""Least-squares decay/growth fits shared by the diagnostic layers.

Two models are supported for a positive series v_n:

    stretched:  v_n ~ C * lam ** sqrt(n)
    plain:      v_n ~ C * lam ** n

Both are fitted linearly in log space.  ``lam`` above 1 means growth.
"""

from dataclasses import dataclass
import math

import numpy as np


@dataclass(frozen=True)
class RateEstimate:
    rate: float          # fitted lam (per unit of the model's abscissa)
    prefactor: float     # fitted C
    rms_residual: float  # RMS of log-space residuals
    n_range: tuple       # (first n, last n) used
    model: str           # "stretched" or "plain"

    @property
    def is_decaying(self):
        return self.rate < 1.0 - 1e-12


@dataclass(frozen=True)
class RateFit:
    stretched: RateEstimate
    plain: RateEstimate


def _loglinear(xs, logs, n_range, model):
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(A, logs, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = logs - (A @ coef)
    rms = float(np.sqrt(np.mean(resid**2)))
    return RateEstimate(math.exp(slope), math.exp(intercept), rms, n_range, model)


def rate_fit(ns, values):
    """Fit both decay models to a positive series indexed by ns.

    Zero entries are dropped (they carry no log-space information); an
    all-zero or negative series raises ValueError.  A constant series yields
    rate 1.0, which callers can detect via ``is_decaying``.
    """
    pairs = [(n, v) for n, v in zip(ns, values)]
    if any(v < 0 for _, v in pairs):
        raise ValueError("rate_fit requires a nonnegative series")
    pairs = [(n, v) for n, v in pairs if v > 0]
    if len(pairs) < 2:
        raise ValueError("rate_fit needs at least two positive entries")
    ns_arr = np.array([float(n) for n, _ in pairs])
    logs = np.array([math.log(float(v)) for _, v in pairs])
    n_range = (int(ns_arr[0]), int(ns_arr[-1]))
    stretched = _loglinear(np.sqrt(ns_arr), logs, n_range, "stretched")
    plain = _loglinear(ns_arr, logs, n_range, "plain")
    return RateFit(stretched=stretched, plain=plain)


def growth_fit(ns, norms):
    """Per-step growth rate of a positive series (plain model only)."""
    return rate_fit(ns, norms).plain
