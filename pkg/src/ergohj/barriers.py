"""Explicit barrier constructions and the pointwise equation residual.

For admissible data the stationary problem

    lambda - (J*u - u)(x) + |u'(x)|^m = f(x)

is confined between two explicit profiles built here:

- a coercive Lipschitz ramp ``theta(x) = kappa (|x| - R_star)_+`` whose
  residual is nonpositive away from its kink (a global subsolution),
- a growth profile ``psi`` that follows ``c |x|`` inside a fitted radius and
  ``c |x| f(x)^{1/m}`` outside, glued with a quintic smoothstep; scaled by
  ``c_lambda = 2 + max(0, -lambda)`` it is a strict supersolution away from
  the origin with margin at least 1.

``residual_ep`` evaluates the equation residual of any grid function with
either the centered or the monotone upwind gradient, and is the common
currency of all certificates in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid_kernel import (GridFunction, Kernel, centered_gradient,
                          godunov_magnitude, nonlocal_apply)
from .hypotheses import phi_derivative, phi_value
from .sources import SourceSpec

__all__ = [
    "PhiFactory", "ThetaFactory", "PsiFactory", "PsiBarFactory", "Barriers",
    "build_phi", "build_theta", "build_psi", "build_psi_bar",
    "EPResidual", "residual_ep",
]

_C_CAP = 1e12   # give up fitting a supersolution coefficient beyond this


# ---------------------------------------------------------------------------
# profile factories (callables that can also sample themselves onto grids)
# ---------------------------------------------------------------------------

class _Factory:
    def __call__(self, x):
        raise NotImplementedError

    def as_grid_function(self, grid) -> GridFunction:
        return GridFunction.from_callable(grid, self.__call__)


@dataclass
class PhiFactory(_Factory):
    """The growth envelope ``|x| f(x)^{1/m}`` with its derivative."""
    spec: SourceSpec

    def __call__(self, x):
        return phi_value(self.spec, x)

    def derivative(self, x):
        return phi_derivative(self.spec, x)


def build_phi(spec: SourceSpec) -> PhiFactory:
    return PhiFactory(spec)


@dataclass
class ThetaFactory(_Factory):
    """Coercive ramp ``kappa (|x| - R_star)_+``; globally Lipschitz."""
    kappa: float
    R_star: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.kappa * np.maximum(np.abs(x) - self.R_star, 0.0)

    def derivative_magnitude(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) > self.R_star, self.kappa, 0.0)


def build_theta(spec: SourceSpec, lam: float, kappa: float = 1.0,
                horizon: Optional[float] = None,
                scan_step: float = 1e-3) -> tuple[ThetaFactory, float]:
    """Smallest onset radius with ``f >= lam + kappa^m`` outward of it.

    The radius is located by an outward scan with step ``scan_step`` up to
    ``horizon`` (default 32); for the built-in radial families the suffix
    test on the scan is exact up to step resolution.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    need = lam + kappa ** spec.m
    min_f = spec.min_f()
    if lam > min_f + 1e-12:
        raise ValueError(f"lambda={lam:g} exceeds min f = {min_f:g}")
    if spec.family == "constant":
        if need > spec.c + spec.shift + 1e-12:
            raise ValueError(
                "data is not coercive and lambda + kappa^m exceeds sup f: "
                "no onset radius exists")
        return ThetaFactory(kappa=kappa, R_star=0.0), 0.0
    horizon = horizon if horizon is not None else 32.0
    radii = np.arange(0.0, horizon + scan_step, scan_step)
    vals = np.minimum(spec.f(radii), spec.f(-radii))
    ok = vals >= need - 1e-12
    if not ok[-1]:
        raise ValueError(
            f"f < lambda + kappa^m at the scan horizon {horizon:g}; "
            "no onset radius found (is f coercive?)")
    bad = np.flatnonzero(~ok)
    r_star = float(radii[bad[-1] + 1]) if bad.size else 0.0
    return ThetaFactory(kappa=kappa, R_star=r_star), r_star


def _smoothstep(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)
    return ((6.0 * s - 15.0) * s + 10.0) * s ** 3


def _smoothstep_d(s: np.ndarray) -> np.ndarray:
    inside = (s > 0.0) & (s < 1.0)
    s = np.clip(s, 0.0, 1.0)
    return np.where(inside, 30.0 * s ** 2 * (s - 1.0) ** 2, 0.0)


@dataclass
class Barriers:
    """Constants fitted while building the barrier pair."""
    R_star: float          # subsolution onset (kappa=1, lambda=0 ramp)
    kappa: float
    R_upper: float         # radius where f >= 1 and H1/H2 are in force
    c_star: float          # supersolution coefficient max(c0, c1, c2)
    c0: float
    c1: float
    c2: float
    K_glue: float          # convolution bound used in the glue-zone fit
    c_lambda: float        # 2 + lambda^-
    scan_horizon: float

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in
                ("R_star", "kappa", "R_upper", "c_star", "c0", "c1", "c2",
                 "K_glue", "c_lambda", "scan_horizon")}


@dataclass
class PsiFactory(_Factory):
    """Glued growth supersolution ``(1-chi) c|x| + chi c Phi(x)``."""
    spec: SourceSpec
    c: float
    R_upper: float
    c_lambda: float = 1.0     # as_grid_function samples c_lambda * psi_base

    def chi(self, x):
        return _smoothstep(np.abs(np.asarray(x, dtype=float)) - self.R_upper)

    def base(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        ch = self.chi(x)
        out = (1.0 - ch) * self.c * np.abs(x)
        grow = ch > 0.0
        if np.any(grow):
            # the growth branch is only sampled where chi > 0, i.e. f >= 1
            out[grow] += ch[grow] * self.c * phi_value(self.spec, x[grow])
        return out

    def __call__(self, x):
        return self.c_lambda * self.base(x)

    def base_derivative(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        ch = self.chi(x)
        dch = _smoothstep_d(np.abs(x) - self.R_upper) * np.sign(x)
        lin = self.c * np.sign(x)
        out = (1.0 - ch) * lin - dch * self.c * np.abs(x)
        grow = ch > 0.0
        if np.any(grow):
            xg = x[grow]
            out[grow] += (ch[grow] * self.c * phi_derivative(self.spec, xg)
                          + dch[grow] * self.c * phi_value(self.spec, xg))
        return out

    def scaled(self, c_lambda: float) -> "PsiFactory":
        return PsiFactory(self.spec, self.c, self.R_upper, c_lambda)


def _fit_coefficient(ineq: Callable[[float], float], label: str) -> float:
    """Smallest c >= 1 with ineq(c) >= 0, for ineq increasing beyond c=1."""
    lo, hi = 1.0, 2.0
    while ineq(hi) < 0.0:
        hi *= 2.0
        if hi > _C_CAP:
            raise ValueError(
                f"no finite supersolution coefficient satisfies {label} "
                f"on the scanned range (would exceed {_C_CAP:g})")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ineq(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def build_psi(spec: SourceSpec, lam: float, horizon: Optional[float] = None,
              scan_step: float = 5e-3) -> tuple[PsiFactory, Barriers]:
    """Fit the glued supersolution and collect the constants it needed.

    The coefficient ``c`` is the smallest value clearing three inequalities:
    ``c^m - c >= max f`` over the inner ball, ``c^m - c >= m/(m-1)`` for the
    outer growth branch, and a glue-zone inequality
    ``c^m (1-1/m)^m - K c >= sup f`` over the glue annulus, with ``K``
    measured from the sampled profile.  ``psi_lambda = (2+lambda^-) psi``.
    """
    m = spec.m
    if horizon is None:
        from .hypotheses import default_scan_radius
        horizon = min(32.0, max(8.0, default_scan_radius(spec)))
    # onset radius for the ramp with kappa=1, lambda=0 (used by psi_bar too)
    theta0, r_star = build_theta(spec, 0.0, kappa=1.0, horizon=horizon,
                                 scan_step=scan_step)

    radii = np.arange(0.0, horizon + scan_step, scan_step)
    f_scan = np.minimum(spec.f(radii), spec.f(-radii))
    ge_one = f_scan >= 1.0 - 1e-12
    if not ge_one[-1]:
        raise ValueError(f"f stays below 1 at the scan horizon {horizon:g}")
    bad = np.flatnonzero(~ge_one)
    r_one = float(radii[bad[-1] + 1]) if bad.size else 0.0

    # push past r_one until the growth-branch inequalities hold on the scan
    r_upper = r_one
    probe = np.arange(max(r_one, scan_step), horizon, 0.05)
    if probe.size:
        z = np.linspace(-1.0, 1.0, 33)
        dphi = np.abs(phi_derivative(spec, probe))
        ball = probe[:, None] + z[None, :]
        ball = np.where(np.abs(ball) < 1e-9, 1e-9, ball)
        sup_ball = np.max(np.abs(phi_derivative(spec, ball)), axis=1)
        h1_ok = sup_ball <= dphi ** m * (1.0 + 1e-9)
        h2_ok = probe * spec.df(probe) >= -spec.f(probe) * (1.0 + 1e-9)
        ok = h1_ok & h2_ok
        if not ok[-1]:
            raise ValueError(
                "the growth-ceiling inequality for the envelope fails at the "
                f"scan horizon {horizon:g}; no supersolution radius found")
        bad = np.flatnonzero(~ok)
        if bad.size:
            r_upper = max(r_upper, float(probe[bad[-1] + 1]))

    x_dense = np.arange(0.0, r_upper + 2.0 + scan_step, scan_step)
    f_inner_max = float(np.max(np.maximum(spec.f(x_dense[x_dense <= r_upper + 1.0]),
                                          spec.f(-x_dense[x_dense <= r_upper + 1.0]))))
    glue = x_dense[(x_dense >= r_upper) & (x_dense <= r_upper + 1.0)]
    f_glue_max = float(np.max(np.maximum(spec.f(glue), spec.f(-glue)))) if glue.size else f_inner_max
    phi_band = x_dense[(x_dense >= r_upper) & (x_dense <= r_upper + 2.0)]
    K = (r_upper + 1.0) + (float(np.max(phi_value(spec, phi_band))) if phi_band.size else 0.0)

    c0 = _fit_coefficient(lambda c: c ** m - c - f_inner_max, "c^m - c >= max f (inner ball)")
    c1 = _fit_coefficient(lambda c: c ** m - c - m / (m - 1.0), "c^m - c >= m/(m-1)")
    g = (1.0 - 1.0 / m) ** m
    c2 = _fit_coefficient(lambda c: g * c ** m - K * c - f_glue_max, "glue-zone inequality")
    c_star = max(c0, c1, c2)
    c_lam = 2.0 + max(0.0, -lam)

    psi = PsiFactory(spec=spec, c=c_star, R_upper=r_upper, c_lambda=c_lam)
    bars = Barriers(R_star=r_star, kappa=1.0, R_upper=r_upper, c_star=c_star,
                    c0=c0, c1=c1, c2=c2, K_glue=K, c_lambda=c_lam,
                    scan_horizon=float(horizon))
    return psi, bars


@dataclass
class PsiBarFactory(_Factory):
    """C^2-flavored cap of ``2 psi``: quadratic inside the ramp onset.

    Equals ``2 psi`` for ``|x| >= R_star``; inside, an even quadratic that
    matches value and slope at the onset, clipped below at zero.  For
    ``R_star = 0`` it is just ``2 psi``.
    """
    psi: PsiFactory
    R_star: float
    _a: float = 0.0
    _b: float = 0.0

    def __post_init__(self):
        if self.R_star > 1e-9:
            r = self.R_star
            val = 2.0 * float(self.psi.base(np.array([r]))[0])
            slope = 2.0 * float(self.psi.base_derivative(np.array([r]))[0])
            self._a = slope / (2.0 * r)
            self._b = val - 0.5 * slope * r

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        outer = 2.0 * self.psi.base(x)
        if self.R_star <= 1e-9:
            return outer
        inner = np.maximum(self._a * x * x + self._b, 0.0)
        return np.where(np.abs(x) >= self.R_star, outer, inner)


def build_psi_bar(psi: PsiFactory, barriers: Barriers) -> PsiBarFactory:
    return PsiBarFactory(psi=psi, R_star=barriers.R_star)


# ---------------------------------------------------------------------------
# equation residual
# ---------------------------------------------------------------------------

@dataclass
class EPResidual:
    """Pointwise residual ``lambda - L[u] + |D_h u|^m - f`` plus summaries."""
    values: GridFunction
    scheme: str
    max: float
    min: float
    n_positive: int
    n_negative: int

    def summary(self) -> dict:
        return {"scheme": self.scheme, "max": self.max, "min": self.min,
                "n_positive": self.n_positive, "n_negative": self.n_negative}


def residual_ep(lam: float, u: GridFunction, spec: SourceSpec, kernel: Kernel,
                scheme: str = "godunov", sign_tol: float = 0.0) -> EPResidual:
    """Residual of the stationary equation for a candidate profile ``u``.

    ``scheme="centered"`` suits smooth verification; ``scheme="godunov"``
    matches the monotone solver's own discretization.
    """
    grid = u.grid
    Lu = nonlocal_apply(kernel, u).values
    if scheme == "centered":
        gmag = np.abs(centered_gradient(u))
    elif scheme == "godunov":
        gmag = godunov_magnitude(u.values, grid.h)
    else:
        raise ValueError(f"unknown gradient scheme {scheme!r}")
    res = lam - Lu + gmag ** spec.m - spec.f(grid.nodes)
    gf = GridFunction(grid, res, None)
    return EPResidual(values=gf, scheme=scheme,
                      max=float(np.max(res)), min=float(np.min(res)),
                      n_positive=int(np.sum(res > sign_tol)),
                      n_negative=int(np.sum(res < -sign_tol)))
