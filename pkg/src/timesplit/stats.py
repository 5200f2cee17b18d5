"""Normal distribution helpers, paired one-sided t-test, Stouffer combination."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import stdtr

# Wichura (1988), algorithm AS 241, PPND16
_A = (
    3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
    1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
    3.3430575583588128105e4, 2.5090809287301226727e3,
)
_B = (
    1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
    5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
    2.8729085735721942674e4, 5.2264952788528545610e3,
)
_C = (
    1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
    3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4,
)
_D = (
    1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
    6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
    5.47593808499534494600e-4, 1.05075007164441684324e-9,
)
_E = (
    6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7,
)
_F = (
    1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15,
)


def _poly(coef: Sequence[float], x: float) -> float:
    acc = 0.0
    for c in reversed(coef):
        acc = acc * x + c
    return acc


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF."""
    if not 0.0 < p < 1.0 or math.isnan(p):
        raise ValueError(f"normal_quantile needs p in (0, 1), got {p!r}")
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _poly(_A, r) / _poly(_B, r)
    r = p if q < 0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        z = _poly(_C, r) / _poly(_D, r)
    else:
        r -= 5.0
        z = _poly(_E, r) / _poly(_F, r)
    return -z if q < 0 else z


def normal_cdf(z: float) -> float:
    if not math.isfinite(z):
        raise ValueError(f"normal_cdf needs a finite z, got {z!r}")
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def normal_sf(z: float) -> float:
    """Upper tail ``1 - Phi(z)`` without cancellation."""
    if not math.isfinite(z):
        raise ValueError(f"normal_sf needs a finite z, got {z!r}")
    return 0.5 * math.erfc(z / math.sqrt(2.0))


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    p_value: float
    df: int
    mean_difference: float
    degenerate: bool = False


def paired_t_test_one_sided(a: Sequence[float], b: Sequence[float], alternative: str = "a_greater") -> TTestResult:
    """Paired one-sided t-test on ``d = a - b``.

    ``alternative="a_greater"`` tests mean(d) > 0, ``"b_greater"`` tests mean(d) < 0.
    """
    if alternative not in ("a_greater", "b_greater"):
        raise ValueError("alternative must be 'a_greater' or 'b_greater'")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-D and of equal length")
    n = a.size
    if n < 2:
        raise ValueError("paired t-test needs at least two pairs")
    d = a - b
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    df = n - 1
    sign = 1.0 if alternative == "a_greater" else -1.0
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, 0.5, df, mean, degenerate=True)
        stat = math.copysign(math.inf, mean)
        p = 0.0 if sign * mean > 0 else 1.0
        return TTestResult(stat, p, df, mean, degenerate=True)
    t = mean / (sd / math.sqrt(n))
    # P(T >= t) for a_greater, P(T <= t) for b_greater
    p = float(stdtr(df, -sign * t))
    return TTestResult(t, p, df, mean)


def stouffer_combine(p_values: Sequence[float]) -> float:
    """Combine one-sided p-values with unit weights."""
    ps = [float(p) for p in p_values]
    if not ps:
        raise ValueError("stouffer_combine needs at least one p-value")
    for p in ps:
        if not 0.0 < p < 1.0:
            raise ValueError(f"p-values must lie strictly inside (0, 1), got {p!r}")
    z = sum(normal_quantile(1.0 - p) if p >= 0.5 else -normal_quantile(p) for p in ps)
    return normal_sf(z / math.sqrt(len(ps)))
