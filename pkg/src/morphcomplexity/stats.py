"""Pareto step curve, area under it, and the Monte Carlo permutation test."""

import random
from dataclasses import dataclass


@dataclass
class ParetoCurve:
    """Step function f(x) = max{y_i : x_i >= x}, as (x, height) breakpoints.

    breakpoints are sorted by x ascending; the height applies on the
    interval (previous x, x], starting from 0.  f is non-increasing and
    upper-bounds every input point.
    """
    breakpoints: list

    def value(self, x):
        for bx, by in self.breakpoints:
            if x <= bx:
                return by
        raise ValueError("x=%g beyond the last breakpoint" % x)


@dataclass
class PermTestResult:
    observed_area: float
    n_perm: int
    count_leq: int
    p_value: float
    seed: int

    def to_json(self):
        return {"observed_area": self.observed_area, "n_perm": self.n_perm,
                "count_leq": self.count_leq, "p_value": self.p_value, "seed": self.seed}


def pareto_curve(points):
    """Tightest non-increasing step function upper-bounding all points."""
    if not points:
        raise ValueError("no points")
    for x, y in points:
        if x <= 0 or y < 0:
            raise ValueError("points must have x > 0 and y >= 0: (%g, %g)" % (x, y))
    best = []
    height = 0.0
    for x, y in sorted(points, key=lambda p: -p[0]):
        height = max(height, y)
        if best and best[-1][0] == x:
            best[-1] = (x, height)
        else:
            best.append((x, height))
    best.reverse()
    return ParetoCurve(breakpoints=best)


def pareto_area(curve_or_points):
    """Exact rectangle integral of the step curve over (0, max x]."""
    curve = curve_or_points
    if not isinstance(curve, ParetoCurve):
        curve = pareto_curve(curve_or_points)
    area = 0.0
    prev = 0.0
    for x, height in curve.breakpoints:
        area += (x - prev) * height
        prev = x
    return area


def _area_plan(xs):
    """Precomputed iteration plan for areas of permuted scatters.

    Returns (order, widths): point indices sorted by descending x and the
    rectangle width attached to each position (zero between tied x values,
    the last width reaching down to 0).
    """
    order = sorted(range(len(xs)), key=lambda i: -xs[i])
    widths = []
    for k, i in enumerate(order):
        nxt = xs[order[k + 1]] if k + 1 < len(order) else 0.0
        widths.append(xs[i] - nxt)
    return order, widths


def _area_of(order, widths, ys):
    area = 0.0
    height = 0.0
    for i, w in zip(order, widths):
        if ys[i] > height:
            height = ys[i]
        area += w * height
    return area


def perm_test(points, n_perm=10000, seed=0):
    """Monte Carlo permutation test for emptiness of the upper-right corner.

    Permutes the y values uniformly at random (Fisher-Yates via
    random.shuffle) and counts how often the permuted scatter's Pareto area
    is <= the observed one; the p-value is add-one smoothed so it is never
    exactly 0.  Each replica draws its permutation from an RNG stream keyed
    by (seed, replica index), so the result does not depend on evaluation
    order.
    """
    if len(points) < 3:
        raise ValueError("permutation test needs at least 3 points, got %d" % len(points))
    if n_perm < 1:
        raise ValueError("n_perm must be >= 1")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    order, widths = _area_plan(xs)
    observed = _area_of(order, widths, ys)
    count = 0
    for rep in range(n_perm):
        rng = random.Random(seed * 1000003 + rep)
        yy = ys[:]
        rng.shuffle(yy)
        if _area_of(order, widths, yy) <= observed:
            count += 1
    return PermTestResult(observed_area=observed, n_perm=n_perm, count_leq=count,
                          p_value=(count + 1) / (n_perm + 1), seed=seed)
