"""Uniform 1-D grids, discretized convolution kernels, and the discrete
non-local operators.

The central objects are

- ``Grid``: a uniform lattice covering ``[-(R+1), R+1]`` split into an
  interior ball ``|x| < R`` and an outer band ``R <= |x| <= R+1``,
- ``Kernel``: quadrature weights of a symmetric, compactly supported,
  radially decreasing probability density with support radius 1,
- ``GridFunction``: node values plus a tail rule used to read the one-cell
  halo that the convolution stencil needs,
- the operators ``nonlocal_apply`` (whole-space ``J*u - u``) and
  ``nonlocal_dirichlet_apply`` (truncated form with prescribed band data).

Everything here is pure: operators return new ``GridFunction`` objects and
never mutate their inputs.  Summations are fixed left-to-right (plain
``numpy.convolve``), so repeated runs are bitwise identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "Grid",
    "GridFunction",
    "Kernel",
    "KERNEL_PROFILES",
    "build_kernel",
    "nonlocal_apply",
    "nonlocal_dirichlet_apply",
    "annulus_mass",
    "sandwich_check",
    "SandwichReport",
    "centered_gradient",
    "godunov_magnitude",
    "discrete_laplacian",
]

_DIV_TOL = 1e-12


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Uniform symmetric lattice over [-(R+1), R+1] with 0 as a node."""

    R: float
    h: float
    nodes: np.ndarray = field(repr=False)
    interior_mask: np.ndarray = field(repr=False)
    outer_band_mask: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, R: float, h: float) -> "Grid":
        if R <= 1.0:
            raise ValueError(f"truncation radius must exceed 1, got R={R}")
        _check_unit_divisible(h)
        n_half = (R + 1.0) / h
        if abs(n_half - round(n_half)) > 1e-9:
            raise ValueError(
                f"(R+1)/h must be an integer so the band is node-aligned; "
                f"got R={R}, h={h}"
            )
        n_half = int(round(n_half))
        idx = np.arange(-n_half, n_half + 1)
        nodes = idx * h
        absx = np.abs(nodes)
        interior = absx < R - 1e-12
        band = ~interior
        g = cls(R=float(R), h=float(h), nodes=nodes,
                interior_mask=interior, outer_band_mask=band)
        g.nodes.setflags(write=False)
        g.interior_mask.setflags(write=False)
        g.outer_band_mask.setflags(write=False)
        return g

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def index_zero(self) -> int:
        return self.nodes.size // 2

    @property
    def cells_per_unit(self) -> int:
        return int(round(1.0 / self.h))

    def index_of(self, x: float) -> int:
        i = int(round((x + self.R + 1.0) / self.h))
        if not (0 <= i < self.size) or abs(self.nodes[i] - x) > 1e-9:
            raise ValueError(f"{x} is not a node of this grid")
        return i

    def ball_mask(self, radius: float) -> np.ndarray:
        return np.abs(self.nodes) <= radius + 1e-12

    def boundary_indices(self) -> tuple[int, int]:
        """Indices of the two nodes at |x| = R."""
        j = int(round(self.R / self.h))
        return self.index_zero - j, self.index_zero + j


def _check_unit_divisible(h: float) -> None:
    if h <= 0:
        raise ValueError(f"spacing must be positive, got h={h}")
    inv = 1.0 / h
    if abs(inv - round(inv)) > _DIV_TOL * inv:
        raise ValueError(
            f"1/h must be an integer so the kernel support spans whole "
            f"cells; got h={h} (1/h={inv})"
        )


# ---------------------------------------------------------------------------
# grid functions
# ---------------------------------------------------------------------------

TailRule = Union[None, str, Callable[[np.ndarray], np.ndarray]]


@dataclass
class GridFunction:
    """Real values on the nodes of a grid, plus an optional tail rule.

    ``extension`` controls how values just outside the stored domain are
    produced when a convolution stencil needs them:

    - ``None``: no rule; operators that need a halo raise,
    - ``"constant"``: continue with the edge value,
    - ``"linear"``: continue with the one-sided edge slope,
    - a callable: evaluated at the halo coordinates (analytic families).
    """

    grid: Grid
    values: np.ndarray
    extension: TailRule = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.nodes.shape:
            raise ValueError("values must have one entry per grid node")

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray],
                      extension: TailRule = "formula") -> "GridFunction":
        vals = np.asarray(fn(grid.nodes), dtype=float)
        if extension == "formula":
            extension = fn
        return cls(grid, vals, extension)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "GridFunction":
        return cls(grid, np.full(grid.size, float(value)), "constant")

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy(), self.extension)

    def at_zero(self) -> float:
        return float(self.values[self.grid.index_zero])

    def assert_finite(self, what: str = "grid function") -> None:
        if not np.all(np.isfinite(self.values)):
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise FloatingPointError(
                f"{what} is not finite at node x={self.grid.nodes[bad]:g}")

    def values_with_halo(self, n_cells: int) -> np.ndarray:
        """Node values extended by ``n_cells`` on each side via the tail rule."""
        if n_cells <= 0:
            return self.values
        g, v = self.grid, self.values
        if self.extension is None:
            raise ValueError(
                "stencil exits the stored domain at node "
                f"x={g.nodes[-1] + g.h:g} and no extension rule is declared")
        left = g.nodes[0] - g.h * np.arange(n_cells, 0, -1)
        right = g.nodes[-1] + g.h * np.arange(1, n_cells + 1)
        if callable(self.extension):
            lv = np.asarray(self.extension(left), dtype=float)
            rv = np.asarray(self.extension(right), dtype=float)
        elif self.extension == "constant":
            lv = np.full(n_cells, v[0])
            rv = np.full(n_cells, v[-1])
        elif self.extension == "linear":
            sl = (v[1] - v[0]) / g.h
            sr = (v[-1] - v[-2]) / g.h
            lv = v[0] + sl * (left - g.nodes[0])
            rv = v[-1] + sr * (right - g.nodes[-1])
        else:
            raise ValueError(f"unknown extension rule {self.extension!r}")
        return np.concatenate([lv, v, rv])

    def eval_extended(self, xq: np.ndarray, n_cells: int) -> np.ndarray:
        """Linear interpolation on the lattice extended by ``n_cells`` cells."""
        ext = self.values_with_halo(n_cells)
        x0 = self.grid.nodes[0] - n_cells * self.grid.h
        xe = x0 + self.grid.h * np.arange(ext.size)
        return np.interp(xq, xe, ext)

    def __add__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self.grid, self.values + other.values, None)
        return GridFunction(self.grid, self.values + other, self.extension)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self.grid, self.values - other.values, None)
        return GridFunction(self.grid, self.values - other, self.extension)

    def __mul__(self, scalar: float):
        return GridFunction(self.grid, self.values * scalar, None)

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def _biweight(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) <= 1.0, (15.0 / 16.0) * (1.0 - s * s) ** 2, 0.0)


def _triweight(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) <= 1.0, (35.0 / 32.0) * (1.0 - s * s) ** 3, 0.0)


def _epanechnikov(s: np.ndarray) -> np.ndarray:
    # kept in the registry as a negative example: mass 1 and radially
    # decreasing, but the derivative does not vanish at the support edge
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) <= 1.0, 0.75 * (1.0 - s * s), 0.0)


KERNEL_PROFILES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "biweight": _biweight,
    "triweight": _triweight,
    "epanechnikov": _epanechnikov,
}


@dataclass(frozen=True)
class Kernel:
    """Quadrature weights of a unit-mass even kernel with support radius 1.

    ``weights[j + half_width]`` is the (renormalized) weight at offset
    ``j*h`` for ``j`` in ``-half_width .. half_width``; the discrete mass
    ``sum(weights) * h`` is 1 up to one rounding.
    """

    profile: str
    h: float
    weights: np.ndarray = field(repr=False)
    norm_factor: float
    support_radius: float = 1.0

    @property
    def half_width(self) -> int:
        return (self.weights.size - 1) // 2

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights) * self.h)

    @property
    def offsets(self) -> np.ndarray:
        hw = self.half_width
        return self.h * np.arange(-hw, hw + 1)

    def profile_fn(self) -> Callable[[np.ndarray], np.ndarray]:
        return KERNEL_PROFILES[self.profile]

    def check_invariants(self) -> None:
        w, hw = self.weights, self.half_width
        if not np.array_equal(w, w[::-1]):
            raise AssertionError("kernel weights are not symmetric")
        half = w[hw:]
        if np.any(np.diff(half) > 0):
            raise AssertionError("kernel weights are not radially decreasing")
        inner = np.abs(self.offsets) < self.support_radius - 1e-12
        if np.any(w[inner] <= 0):
            raise AssertionError("kernel is not strictly positive on the open support")
        if abs(self.mass - 1.0) > 1e-12:
            raise AssertionError(f"kernel mass {self.mass} deviates from 1")


def build_kernel(profile: str, h: float) -> Kernel:
    """Discretize a named kernel profile at spacing ``h``.

    Trapezoid weights on the uniform lattice, renormalized so the discrete
    mass is exactly 1.  Profiles must join the zero tail in a C^1 way at
    the support edge; ones that do not (e.g. ``epanechnikov``) are refused,
    because the operator estimates used elsewhere lean on that regularity.
    """
    if profile not in KERNEL_PROFILES:
        raise ValueError(
            f"unknown kernel profile {profile!r}; known: {sorted(KERNEL_PROFILES)}")
    _check_unit_divisible(h)
    fn = KERNEL_PROFILES[profile]
    edge = float(fn(np.array([1.0]))[0])
    d = 1e-7
    edge_slope = (edge - float(fn(np.array([1.0 - d]))[0])) / d
    if abs(edge) > 1e-10 or abs(edge_slope) > 1e-4:
        raise ValueError(
            f"profile {profile!r} does not match C^1 at the support edge "
            f"(value {edge:g}, one-sided slope {edge_slope:g})")

    n1 = int(round(1.0 / h))
    j = np.arange(-n1, n1 + 1)
    w = fn(j * h)
    w[0] *= 0.5          # trapezoid ends; zero for admissible profiles
    w[-1] *= 0.5
    raw_mass = float(np.sum(w) * h)
    norm = 1.0 / raw_mass
    w = w * norm
    w = 0.5 * (w + w[::-1])   # enforce exact symmetry
    w.setflags(write=False)
    k = Kernel(profile=profile, h=float(h), weights=w, norm_factor=norm)
    k.check_invariants()
    return k


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def _kernel_matches_grid(kernel: Kernel, grid: Grid) -> None:
    if abs(kernel.h - grid.h) > 1e-12:
        raise ValueError(
            f"kernel spacing {kernel.h} does not match grid spacing {grid.h}")


def nonlocal_apply(kernel: Kernel, u: GridFunction) -> GridFunction:
    """Whole-space operator ``(J*u)(x) - u(x)`` at every node.

    The one-unit halo is read through ``u``'s tail rule; without a rule the
    call raises, naming the first node whose stencil leaves the domain.
    """
    _kernel_matches_grid(kernel, u.grid)
    hw = kernel.half_width
    ext = u.values_with_halo(hw)
    conv = np.convolve(ext, kernel.weights * kernel.h, mode="valid")
    return GridFunction(u.grid, conv - u.values, None)


def _band_values(grid: Grid, psi) -> np.ndarray:
    if isinstance(psi, GridFunction):
        if psi.grid is not grid and not np.array_equal(psi.grid.nodes, grid.nodes):
            raise ValueError("outer condition lives on a different grid")
        vals = psi.values
    elif np.isscalar(psi):
        vals = np.full(grid.size, float(psi))
    elif callable(psi):
        vals = np.asarray(psi(grid.nodes), dtype=float)
    else:
        raise ValueError("outer condition must be a GridFunction, scalar or callable")
    band = vals[grid.outer_band_mask]
    if not np.all(np.isfinite(band)):
        raise ValueError("outer condition does not cover the band with finite values")
    return vals


def nonlocal_dirichlet_apply(kernel: Kernel, v: GridFunction, psi) -> GridFunction:
    """Truncated operator with prescribed band data.

    Convolves interior values of ``v`` against the kernel, sources the band
    ``R <= |x| <= R+1`` from ``psi``, and subtracts ``v``.  The result is
    meaningful on interior nodes only; band entries are set to zero.
    """
    grid = v.grid
    _kernel_matches_grid(kernel, grid)
    psi_vals = _band_values(grid, psi)
    full = np.where(grid.interior_mask, v.values, psi_vals)
    conv = np.convolve(full, kernel.weights * kernel.h, mode="same")
    out = np.zeros(grid.size)
    inner = grid.interior_mask
    out[inner] = conv[inner] - v.values[inner]
    return GridFunction(grid, out, None)


def annulus_mass(kernel: Kernel, eps: float) -> float:
    """Kernel mass of the annulus ``1-eps <= |y| <= 1``.

    Trapezoid quadrature on the kernel lattice; when ``1-eps`` falls inside
    a cell the partial cell is integrated from the stored profile, so the
    value converges at the same O(h^2) rate as the kernel itself and stays
    strictly positive for every ``eps`` in (0, 1).
    """
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0,1), got {eps}")
    h, hw = kernel.h, kernel.half_width
    a = 1.0 - eps
    w_pos = kernel.weights[hw:]          # offsets 0..1, w_pos[-1] already halved
    j0 = int(math.ceil(a / h - 1e-12))
    j0 = min(j0, hw)
    # trapezoid over the whole cells [j0*h, 1]
    if j0 < hw:
        inner = 0.5 * w_pos[j0] + np.sum(w_pos[j0 + 1:hw]) + w_pos[hw]
        side = h * float(inner)
    else:
        side = 0.0
    # partial cell [a, j0*h]
    delta = j0 * h - a
    if delta > 1e-15:
        fn = kernel.profile_fn()
        ja = float(fn(np.array([a]))[0]) * kernel.norm_factor
        jb = w_pos[j0] if j0 < hw else 2.0 * w_pos[hw]
        side += 0.5 * delta * (ja + float(jb))
    c_eps = 2.0 * side
    return float(min(c_eps, 1.0))


@dataclass
class SandwichReport:
    ok: bool
    c_eps: float
    tol_used: float
    n_checked: int
    violations: list  # (x, lower_slack, upper_slack) with negative slack = violation

    def worst(self) -> Optional[tuple]:
        if not self.violations:
            return None
        return min(self.violations, key=lambda t: min(t[1], t[2]))


def sandwich_check(kernel: Kernel, psi: GridFunction, eps: float,
                   tol: Optional[float] = None) -> SandwichReport:
    """Verify the two-sided bound on ``-L[psi]`` for a profile nondecreasing
    in ``|x|``::

        -psi(|x|+1) + psi(|x|)  <=  -L[psi](x)  <=  -c_eps psi(|x|+1-eps) + psi(|x|)

    checked at every interior node.  Off-node evaluations of ``psi`` use
    linear interpolation on the extended lattice, and the default tolerance
    budgets for that interpolation error.
    """
    grid = psi.grid
    absx = np.abs(grid.nodes)
    order = np.argsort(absx, kind="stable")
    ordered = psi.values[order]
    diffs = np.diff(ordered)
    bad = np.flatnonzero(diffs < -1e-10)
    if bad.size:
        i = int(bad[0])
        xa, xb = grid.nodes[order[i]], grid.nodes[order[i + 1]]
        raise ValueError(
            f"psi is not nondecreasing in |x|: psi({xb:g}) < psi({xa:g})")

    c_eps = annulus_mass(kernel, eps)
    halo = grid.cells_per_unit + 1
    Lpsi = nonlocal_apply(kernel, psi).values
    inner = grid.interior_mask
    x = absx[inner]
    here = psi.values[inner]
    at_plus1 = psi.eval_extended(x + 1.0, halo)
    at_plus1me = psi.eval_extended(x + 1.0 - eps, halo)
    minus_L = -Lpsi[inner]

    if tol is None:
        slope = np.max(np.abs(np.diff(psi.values))) / grid.h
        tol = 0.5 * grid.h * slope + 1e-9
    lower_slack = minus_L - (-at_plus1 + here) + tol
    upper_slack = (-c_eps * at_plus1me + here) - minus_L + tol
    mask = (lower_slack < 0) | (upper_slack < 0)
    xs = grid.nodes[inner]
    violations = [(float(xs[i]), float(lower_slack[i]), float(upper_slack[i]))
                  for i in np.flatnonzero(mask)]
    return SandwichReport(ok=not violations, c_eps=c_eps, tol_used=float(tol),
                          n_checked=int(x.size), violations=violations)


# ---------------------------------------------------------------------------
# difference stencils (shared by the scheme and the residual evaluator)
# ---------------------------------------------------------------------------

def centered_gradient(u: GridFunction) -> np.ndarray:
    """Second-order centered difference, one-sided at the domain ends."""
    v, h = u.values, u.grid.h
    g = np.empty_like(v)
    g[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    g[0] = (v[1] - v[0]) / h
    g[-1] = (v[-1] - v[-2]) / h
    return g


def godunov_magnitude(values: np.ndarray, h: float) -> np.ndarray:
    """Monotone upwind magnitude ``max(D^- v, -D^+ v, 0)`` per node.

    At the two domain ends only the available one-sided difference competes
    with zero.
    """
    v = values
    back = np.full_like(v, -np.inf)
    fwd = np.full_like(v, -np.inf)
    back[1:] = (v[1:] - v[:-1]) / h
    fwd[:-1] = (v[:-1] - v[1:]) / h
    return np.maximum(np.maximum(back, fwd), 0.0)


def discrete_laplacian(values: np.ndarray, h: float) -> np.ndarray:
    """Three-point Laplacian; zero at the domain ends (never used there)."""
    v = values
    lap = np.zeros_like(v)
    lap[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    return lap
