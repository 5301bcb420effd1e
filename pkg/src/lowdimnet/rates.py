"""Log-log least-squares slope fitting shared by dimension estimates and rate sweeps."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points: tuple[tuple[float, float], ...]


def fit_loglog(xs, ys) -> RateFit:
    """OLS fit of log(y) on log(x); inputs must be positive."""
    pts = [(float(x), float(y)) for x, y in zip(xs, ys)]
    if len(pts) < 2:
        raise ValueError("need at least 2 points for a slope fit")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("log-log fit requires positive coordinates")
    log_pts = tuple((math.log(x), math.log(y)) for x, y in pts)
    n = len(log_pts)
    mx = sum(p[0] for p in log_pts) / n
    my = sum(p[1] for p in log_pts) / n
    sxx = sum((p[0] - mx) ** 2 for p in log_pts)
    sxy = sum((p[0] - mx) * (p[1] - my) for p in log_pts)
    syy = sum((p[1] - my) ** 2 for p in log_pts)
    if sxx == 0:
        raise ValueError("all x values identical; slope undefined")
    slope = sxy / sxx
    intercept = my - slope * mx
    r_squared = 1.0 if syy == 0 else min(1.0, max(0.0, (sxy * sxy) / (sxx * syy)))
    return RateFit(slope=slope, intercept=intercept, r_squared=r_squared, points=log_pts)


def fit_rate(points) -> RateFit:
    """Convergence-rate fit: OLS of log(error) on log(n).

    Nonpositive errors are excluded with a warning; fewer than two surviving
    points is an error. The slope is the reported rate.
    """
    kept = []
    dropped = 0
    for n, err in points:
        if n <= 0:
            raise ValueError(f"sample size must be positive, got {n}")
        if err <= 0:
            dropped += 1
            continue
        kept.append((n, err))
    if dropped:
        warnings.warn(f"fit_rate: excluded {dropped} nonpositive error value(s)")
    if len(kept) < 2:
        raise ValueError("fit_rate needs at least 2 points with positive error")
    return fit_loglog([p[0] for p in kept], [p[1] for p in kept])
