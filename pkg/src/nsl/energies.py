"""Pairwise nonlocal energies on a fixed space and field.

Every double integral over X x X becomes a sum over ordered pairs weighted by
w(x)w(y); diagonal pairs contribute zero (the numerator vanishes identically
there). Pair sums run over fixed row blocks and are combined by an
order-fixed tree reduction, so the result is bit-identical for any worker
count (see parallel.py).

Scale quantities at ball radius t:

  K_t  = sum_{0 < d <= t} |u(x)-u(y)|^p / rho(x,y) w(x) w(y)
  H_t  = sum_{0 < d <= t} |u(x)-u(y)|^p / sqrt(mu(B(x,t)) mu(B(y,t))) w w
  S_t  = sum_{x'} w(x') mu(B(x',t))^-2 sum_{x,y in B(x',t)} |u(x)-u(y)|^p w w

S_t has a second, algebraically equal route that integrates over the center
first: S_t = sum_{x,y} |u(x)-u(y)|^p f_t(x,y) w w with
f_t(x,y) = sum_{x' in B(x,t) ^ B(y,t)} w(x') mu(B(x',t))^-2. Both are
exposed; they must agree to 1e-10 relative.

The ball-average gradient surrogate g_t comes in the three normalizations
the estimates actually use: "plain" (p-th power with 1/t^p inside the
average), "truncated" (first power of inf{|u(x)-u(y)|, r} over t), and
"composed" (first power of |phi(u(x)) - phi(u(y))| over t for a 1-Lipschitz
phi with values in [0, r]).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import EnergySpec, PiecewiseLinearMap, ScalarField, as_values
from .kernels import kernel_matrix
from .parallel import block_reduce, map_blocks
from .space import MetricMeasureSpace

__all__ = [
    "ScaleEnergies",
    "gagliardo_p",
    "nguyen_a",
    "nguyen_b",
    "scale_energies",
    "scale_s_by_balls",
    "scale_s_by_pairs",
    "mollify",
    "g_scale",
]


@dataclass(frozen=True)
class ScaleEnergies:
    """The three ball-scale energies at a fixed t."""

    k: float
    h: float
    s: float

    def __post_init__(self) -> None:
        for name, val in (("k", self.k), ("h", self.h), ("s", self.s)):
            if val < 0 or not np.isfinite(val):
                raise ValueError(f"scale energy {name} must be finite and >= 0, got {val}")


def _pair_sum(space: MetricMeasureSpace, term_rows, workers=None) -> float:
    """Reduce term_rows(a, b) -> float over fixed row blocks."""
    return float(block_reduce(space.n, term_rows, workers))


def _offdiag(a: int, b: int, n: int) -> np.ndarray:
    cols = np.arange(n)[None, :]
    rows = np.arange(a, b)[:, None]
    return rows != cols


def gagliardo_p(space: MetricMeasureSpace, u, spec: EnergySpec) -> float:
    """p-th power of the fractional seminorm with kernel d^{ps} rho."""
    if spec.s is None:
        raise ValueError("gagliardo_p needs the fractional order s")
    vals = as_values(u, space.n)
    rho = kernel_matrix(space, spec.kernel)
    w = space.weights
    ps = spec.p * spec.s

    def rows(a: int, b: int) -> float:
        d = space.dist[a:b]
        mask = _offdiag(a, b, space.n)
        num = np.abs(vals[a:b, None] - vals[None, :]) ** spec.p
        num *= w[a:b, None] * w[None, :]
        terms = np.zeros_like(d)
        terms[mask] = num[mask] / (d[mask] ** ps * rho[a:b][mask])
        return float(np.sum(terms))

    return _pair_sum(space, rows)


def _nguyen(space: MetricMeasureSpace, u, spec: EnergySpec, radius: float | None) -> float:
    if spec.delta is None:
        raise ValueError("the threshold functional needs delta")
    vals = as_values(u, space.n)
    rho = kernel_matrix(space, spec.kernel)
    w = space.weights
    delta, p = spec.delta, spec.p

    def rows(a: int, b: int) -> float:
        d = space.dist[a:b]
        gap = np.abs(vals[a:b, None] - vals[None, :])
        mask = _offdiag(a, b, space.n) & (gap > delta)
        if radius is not None:
            mask &= d <= radius
        terms = np.zeros_like(d)
        terms[mask] = (
            delta**p / (rho[a:b][mask] * d[mask] ** p) * (w[a:b, None] * w[None, :])[mask]
        )
        return float(np.sum(terms))

    return _pair_sum(space, rows)


def nguyen_a(space: MetricMeasureSpace, u, spec: EnergySpec) -> float:
    """Threshold functional: delta^p-weighted sum over {|u(x)-u(y)| > delta}."""
    return _nguyen(space, u, spec, None)


def nguyen_b(space: MetricMeasureSpace, u, spec: EnergySpec) -> float:
    """Threshold functional restricted to pairs with d(x,y) <= r."""
    if spec.r is None:
        raise ValueError("nguyen_b needs the radius r")
    return _nguyen(space, u, spec, spec.r)


def _k_energy(space, vals, spec: EnergySpec, t: float) -> float:
    rho = kernel_matrix(space, spec.kernel)
    w = space.weights

    def rows(a: int, b: int) -> float:
        d = space.dist[a:b]
        mask = _offdiag(a, b, space.n) & (d <= t)
        terms = np.zeros_like(d)
        terms[mask] = (
            np.abs(vals[a:b, None] - vals[None, :])[mask] ** spec.p
            / rho[a:b][mask]
            * (w[a:b, None] * w[None, :])[mask]
        )
        return float(np.sum(terms))

    return _pair_sum(space, rows)


def _h_energy(space, vals, p: float, t: float, mass_radius: float | None = None) -> float:
    """H at scale t; mass_radius overrides the ball radius in the denominator."""
    m = space.ball_masses(t if mass_radius is None else mass_radius)
    w = space.weights

    def rows(a: int, b: int) -> float:
        d = space.dist[a:b]
        mask = _offdiag(a, b, space.n) & (d <= t)
        denom = np.sqrt(m[a:b, None] * m[None, :])
        terms = np.zeros_like(d)
        terms[mask] = (
            np.abs(vals[a:b, None] - vals[None, :])[mask] ** p
            / denom[mask]
            * (w[a:b, None] * w[None, :])[mask]
        )
        return float(np.sum(terms))

    return _pair_sum(space, rows)


def _ball_pair_totals(space, t: float, numer_rows) -> np.ndarray:
    """sum_{x,y in B(x',t)} numer(x,y) w(x) w(y), per center x'.

    numer_rows(sub_vals) maps the field restricted to a ball to the pair
    numerator matrix on that ball.
    """
    w = space.weights

    def rows(a: int, b: int) -> np.ndarray:
        out = np.empty(b - a)
        for i, center in enumerate(range(a, b)):
            members = np.nonzero(space.dist[center] <= t)[0]
            sub = numer_rows(members)
            ww = w[members]
            out[i] = float(np.sum(sub * (ww[:, None] * ww[None, :])))
        return out

    return np.concatenate(map_blocks(space.n, rows))


def scale_s_by_balls(space: MetricMeasureSpace, u, spec: EnergySpec) -> float:
    """S_t by the direct route: loop over centers, pair sum inside each ball."""
    if spec.t is None:
        raise ValueError("scale energies need the ball radius t")
    vals = as_values(u, space.n)
    p = spec.p

    def numer(members: np.ndarray) -> np.ndarray:
        sub = vals[members]
        return np.abs(sub[:, None] - sub[None, :]) ** p

    totals = _ball_pair_totals(space, spec.t, numer)
    m = space.ball_masses(spec.t)
    return float(np.sum(space.weights * totals / m**2))


def scale_s_by_pairs(space: MetricMeasureSpace, u, spec: EnergySpec) -> float:
    """S_t by integrating over the center first: pair sum against f_t."""
    if spec.t is None:
        raise ValueError("scale energies need the ball radius t")
    vals = as_values(u, space.n)
    m = space.ball_masses(spec.t)
    member = (space.dist <= spec.t).astype(np.float64)
    center_weight = space.weights / m**2
    f = member.T @ (center_weight[:, None] * member)
    gap = np.abs(vals[:, None] - vals[None, :]) ** spec.p
    ww = space.weights[:, None] * space.weights[None, :]
    return float(np.sum(gap * f * ww))


def scale_energies(space: MetricMeasureSpace, u, spec: EnergySpec) -> ScaleEnergies:
    """K_t, H_t, S_t at the scale spec.t (closed balls throughout)."""
    if spec.t is None:
        raise ValueError("scale energies need the ball radius t")
    vals = as_values(u, space.n)
    k = _k_energy(space, vals, spec, spec.t)
    h = _h_energy(space, vals, spec.p, spec.t)
    s = scale_s_by_balls(space, u, spec)
    return ScaleEnergies(k=k, h=h, s=s)


def mollify(space: MetricMeasureSpace, u, t: float) -> ScalarField:
    """Ball average over closed B(x, t): linear, constant-preserving."""
    if t <= 0:
        raise ValueError(f"regularization scale t must be > 0, got {t}")
    vals = as_values(u, space.n)
    if t < space.min_distance:
        # every closed ball is a singleton: the average is the value itself
        return ScalarField(vals.copy(), provenance="op:mollify")
    m = space.ball_masses(t)
    uw = vals * space.weights

    def rows(a: int, b: int) -> np.ndarray:
        inside = space.dist[a:b] <= t
        return inside @ uw / m[a:b]

    out = np.concatenate(map_blocks(space.n, rows))
    return ScalarField(out, provenance="op:mollify")


def g_scale(
    space: MetricMeasureSpace,
    u,
    spec: EnergySpec,
    mode: str = "plain",
    phi: PiecewiseLinearMap | None = None,
) -> ScalarField:
    """Ball-average gradient surrogate at scale t.

    mode "plain" averages |u(x)-u(y)|^p / t^p (the p-th power form);
    "truncated" averages inf{|u(x)-u(y)|, r} / t; "composed" averages
    |phi(u(x)) - phi(u(y))| / t for a 1-Lipschitz phi with range in [0, r].
    """
    if spec.t is None:
        raise ValueError("g_scale needs the ball radius t")
    vals = as_values(u, space.n)
    t = spec.t

    if mode == "plain":

        def numer(members: np.ndarray) -> np.ndarray:
            sub = vals[members]
            return np.abs((sub[:, None] - sub[None, :]) / t) ** spec.p

    elif mode == "truncated":
        r = np.inf if spec.r is None else spec.r

        def numer(members: np.ndarray) -> np.ndarray:
            sub = vals[members]
            return np.minimum(np.abs(sub[:, None] - sub[None, :]), r) / t

    elif mode == "composed":
        if phi is None:
            raise ValueError("composed mode needs a piecewise-linear map phi")
        mapped = phi(vals)

        def numer(members: np.ndarray) -> np.ndarray:
            sub = mapped[members]
            return np.abs(sub[:, None] - sub[None, :]) / t

    else:
        raise ValueError(f"unknown g_scale mode {mode!r}")

    totals = _ball_pair_totals(space, t, numer)
    m = space.ball_masses(t)
    return ScalarField(totals / m**2, provenance=f"op:g_scale:{mode}")
