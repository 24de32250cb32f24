"""Right-hand-side families for the ergodic problem.

A ``SourceSpec`` bundles the data ``f`` with the gradient exponent ``m``.
Four closed-form families are built in (plus tabulated data):

- ``power``:      f(x) = c |x|^alpha
- ``exp_linear``: f(x) = c exp(alpha |x|)
- ``double_exp``: f(x) = c exp(p^|x|)
- ``constant``:   f(x) = c0

Every family accepts an additive ``shift`` so that e.g. ``1 + x^2`` is
``power(c=1, alpha=2, shift=1)``; the shift is also how the
shift-equivariance experiments perturb a spec.

Exponentials are evaluated with a saturation cap of ``F_CAP`` instead of
overflowing to inf: above-threshold growth families are exactly the ones
probed by the non-existence scans, and a saturated finite value keeps those
scans numeric instead of crashing.  Trend checks at large radii work on
``log f`` directly and never hit the cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["SourceSpec", "F_CAP"]

F_CAP = 1e300

_FAMILIES = ("power", "exp_linear", "double_exp", "constant", "tabulated")


@dataclass(frozen=True)
class SourceSpec:
    family: str
    m: float
    c: float = 1.0
    alpha: Optional[float] = None     # power / exp_linear rate
    p: Optional[float] = None         # double_exp base
    shift: float = 0.0
    table_x: Optional[np.ndarray] = field(default=None, repr=False)
    table_f: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown source family {self.family!r}")
        if not self.m > 2.0:
            raise ValueError(f"gradient exponent must satisfy m > 2, got m={self.m}")
        if self.family in ("power", "exp_linear"):
            if self.c is None or self.c <= 0 or self.alpha is None or self.alpha <= 0:
                raise ValueError(f"{self.family} needs c > 0 and alpha > 0")
        elif self.family == "double_exp":
            if self.c is None or self.c <= 0 or self.p is None or self.p <= 1:
                raise ValueError("double_exp needs c > 0 and p > 1")
        elif self.family == "tabulated":
            if self.table_x is None or self.table_f is None:
                raise ValueError("tabulated needs table_x and table_f")
            object.__setattr__(self, "table_x", np.asarray(self.table_x, float))
            object.__setattr__(self, "table_f", np.asarray(self.table_f, float))
            if self.table_x.ndim != 1 or self.table_x.shape != self.table_f.shape:
                raise ValueError("tabulated arrays must be 1-D and congruent")

    # -- constructors -------------------------------------------------------

    @classmethod
    def power(cls, c: float, alpha: float, m: float, shift: float = 0.0) -> "SourceSpec":
        return cls("power", m=m, c=c, alpha=alpha, shift=shift)

    @classmethod
    def exp_linear(cls, c: float, alpha: float, m: float, shift: float = 0.0) -> "SourceSpec":
        return cls("exp_linear", m=m, c=c, alpha=alpha, shift=shift)

    @classmethod
    def double_exp(cls, c: float, p: float, m: float, shift: float = 0.0) -> "SourceSpec":
        return cls("double_exp", m=m, c=c, p=p, shift=shift)

    @classmethod
    def constant(cls, c0: float, m: float) -> "SourceSpec":
        return cls("constant", m=m, c=c0)

    @classmethod
    def tabulated(cls, x, f, m: float, shift: float = 0.0) -> "SourceSpec":
        return cls("tabulated", m=m, table_x=np.asarray(x, float),
                   table_f=np.asarray(f, float), shift=shift)

    def shifted(self, k: float) -> "SourceSpec":
        """The spec for f + k."""
        return SourceSpec(self.family, m=self.m, c=self.c, alpha=self.alpha,
                          p=self.p, shift=self.shift + k,
                          table_x=self.table_x, table_f=self.table_f)

    # -- evaluation ---------------------------------------------------------

    @property
    def has_closed_derivative(self) -> bool:
        return self.family != "tabulated"

    def f(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        a = np.abs(x)
        fam = self.family
        if fam == "power":
            base = self.c * a ** self.alpha
        elif fam == "exp_linear":
            with np.errstate(over="ignore"):
                base = np.minimum(self.c * np.exp(self.alpha * a), F_CAP)
        elif fam == "double_exp":
            with np.errstate(over="ignore"):
                base = np.minimum(self.c * np.exp(np.minimum(self.p ** a, 750.0)), F_CAP)
        elif fam == "constant":
            base = np.full_like(a, self.c)
        else:
            lo, hi = self.table_x[0], self.table_x[-1]
            if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
                raise ValueError(
                    f"tabulated source queried outside [{lo:g}, {hi:g}]")
            base = np.interp(x, self.table_x, self.table_f)
        return base + self.shift

    def df(self, x) -> np.ndarray:
        """Pointwise derivative; centered differences for tabulated data."""
        x = np.asarray(x, dtype=float)
        a, s = np.abs(x), np.sign(x)
        fam = self.family
        if fam == "power":
            with np.errstate(divide="ignore", invalid="ignore"):
                d = self.c * self.alpha * np.where(a > 0, a ** (self.alpha - 1.0), 0.0)
            if self.alpha < 1.0:
                d = np.where(a > 0, d, np.inf)
            return s * d
        if fam == "exp_linear":
            with np.errstate(over="ignore"):
                return s * np.minimum(self.c * self.alpha * np.exp(self.alpha * a), F_CAP)
        if fam == "double_exp":
            with np.errstate(over="ignore"):
                grow = np.minimum(self.p ** a, 750.0)
                d = self.c * np.exp(np.minimum(grow + np.log(np.log(self.p) * grow + 1e-300), 700.0))
                return s * np.minimum(d, F_CAP)
        if fam == "constant":
            return np.zeros_like(a)
        dx = 1e-6 * max(1.0, np.max(np.abs(self.table_x)))
        return (self.f(x + dx) - self.f(x - dx)) / (2.0 * dx)

    def log_f(self, x) -> np.ndarray:
        """log of the unshifted family value; safe at radii where f overflows."""
        x = np.asarray(x, dtype=float)
        a = np.abs(x)
        fam = self.family
        if fam == "power":
            with np.errstate(divide="ignore"):
                return np.log(self.c) + self.alpha * np.log(a)
        if fam == "exp_linear":
            return np.log(self.c) + self.alpha * a
        if fam == "double_exp":
            return np.log(self.c) + self.p ** a
        if fam == "constant":
            return np.full_like(a, np.log(self.c))
        return np.log(np.maximum(self.f(x) - self.shift, 1e-300))

    def min_f(self) -> float:
        """Global minimum of f (all built-in families are radial, nondecreasing)."""
        fam = self.family
        if fam == "power":
            return self.shift
        if fam == "exp_linear":
            return self.c + self.shift
        if fam == "double_exp":
            return self.c * float(np.exp(self.p ** 0.0)) + self.shift
        if fam == "constant":
            return self.c + self.shift
        return float(np.min(self.table_f)) + self.shift

    @property
    def m_star(self) -> float:
        return self.m / (self.m - 1.0)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        d = {"family": self.family, "m": self.m, "c": self.c, "shift": self.shift}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.p is not None:
            d["p"] = self.p
        if self.family == "tabulated":
            d["table_x"] = [float(v) for v in self.table_x]
            d["table_f"] = [float(v) for v in self.table_f]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SourceSpec":
        return cls(
            family=d["family"], m=float(d["m"]), c=float(d.get("c", 1.0)),
            alpha=(None if d.get("alpha") is None else float(d["alpha"])),
            p=(None if d.get("p") is None else float(d["p"])),
            shift=float(d.get("shift", 0.0)),
            table_x=(np.asarray(d["table_x"], float) if "table_x" in d else None),
            table_f=(np.asarray(d["table_f"], float) if "table_f" in d else None),
        )

    def label(self) -> str:
        fam = self.family
        if fam == "power":
            core = f"{self.c:g}|x|^{self.alpha:g}"
        elif fam == "exp_linear":
            core = f"{self.c:g}exp({self.alpha:g}|x|)"
        elif fam == "double_exp":
            core = f"{self.c:g}exp({self.p:g}^|x|)"
        elif fam == "constant":
            core = f"{self.c:g}"
        else:
            core = "tabulated"
        if self.shift:
            return f"{core}+{self.shift:g}"
        return core
