"""Pointwise and grid geometry of entire graphs.

A graph u(x) = A*x + w(x), with w periodic on a cell of length L, is the
only desk-scale representation of an unbounded linear-growth graph.  All
finite differences are centered and second order on the periodic grid;
the background A*x enters only through its (periodic) derivatives.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GraphPoint",
    "GraphField",
    "speed",
    "curvature_from_second_derivative",
    "turning_angle",
    "surface_diffusion_operator",
]


@dataclass(frozen=True)
class GraphPoint:
    """Slope/height pair of a graph at a single point."""

    psi: float  # slope du/dx
    phi: float = 0.0  # height

    def __post_init__(self):
        if not math.isfinite(self.psi):
            raise ValueError("graph point requires a finite slope")

    @property
    def speed(self) -> float:
        return speed(self.psi)


def speed(psi):
    """Metric factor sqrt(1 + psi^2) of a graph with slope psi.

    Accepts scalars or arrays; always >= 1.
    """
    if isinstance(psi, np.ndarray):
        return np.sqrt(1.0 + psi.astype(float) ** 2)
    return math.sqrt(1.0 + psi * psi)


def curvature_from_second_derivative(psi, phi_xx):
    """Curvature of a graph from slope and second derivative.

    k = phi_xx / (1 + psi^2)^(3/2)
    """
    if isinstance(psi, np.ndarray) or isinstance(phi_xx, np.ndarray):
        v2 = 1.0 + np.asarray(psi, dtype=float) ** 2
        return np.asarray(phi_xx, dtype=float) / (v2 * np.sqrt(v2))
    v2 = 1.0 + psi * psi
    return phi_xx / (v2 * math.sqrt(v2))


def turning_angle(psi_a, psi_b):
    """Change of tangent angle between slopes psi_a and psi_b.

    Equal to arctan(psi_b) - arctan(psi_a); bounded by pi in absolute
    value for any pair of finite slopes.
    """
    return np.arctan(psi_b) - np.arctan(psi_a)


@dataclass(frozen=True)
class GraphField:
    """Uniformly sampled periodic perturbation of a linear graph.

    The represented graph is u(x) = slope_offset*x + w(x) with w periodic
    of period domain_length and ``values[i] = w(i * domain_length / n)``.
    """

    domain_length: float
    slope_offset: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if self.domain_length <= 0:
            raise ValueError("domain_length must be positive")
        if vals.ndim != 1 or vals.size < 8 or vals.size % 2 != 0:
            raise ValueError("values must be a 1-d array, n >= 8 and even")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        if not math.isfinite(self.slope_offset):
            raise ValueError("slope_offset must be finite")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def dx(self) -> float:
        return self.domain_length / self.n

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    def with_values(self, values: np.ndarray) -> "GraphField":
        return GraphField(self.domain_length, self.slope_offset, values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,w\n")
        for xi, wi in zip(self.x, self.values):
            # + 0.0 normalizes signed zeros so equal fields serialize equally
            buf.write(f"{float(xi) + 0.0!r},{float(wi) + 0.0!r}\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str, slope_offset: float = 0.0) -> "GraphField":
        lines = [ln for ln in text.strip().splitlines() if ln and not ln.startswith("#")]
        if not lines or lines[0].strip() != "x,w":
            raise ValueError("expected CSV header 'x,w'")
        xs, ws = [], []
        for ln in lines[1:]:
            sx, sw = ln.split(",")
            xs.append(float(sx))
            ws.append(float(sw))
        xs = np.asarray(xs)
        ws = np.asarray(ws)
        if xs.size < 2 or xs[0] != 0.0 or np.any(np.diff(xs) <= 0):
            raise ValueError("x column must ascend from 0")
        # x spacing implies the cell length: x ends one step short of L
        dx = xs[1] - xs[0]
        return GraphField(dx * xs.size, slope_offset, ws)


def _d1(arr: np.ndarray, dx: float) -> np.ndarray:
    """Centered first derivative on the periodic grid."""
    return (np.roll(arr, -1) - np.roll(arr, 1)) / (2.0 * dx)


def _d2(arr: np.ndarray, dx: float) -> np.ndarray:
    """Centered second derivative on the periodic grid."""
    return (np.roll(arr, -1) - 2.0 * arr + np.roll(arr, 1)) / (dx * dx)


def surface_diffusion_operator(f: GraphField) -> GraphField:
    """Fourth-order driving term -d/dx((1/v) d/dx k) of the graph flow.

    Computed in the factored form: slope and curvature of u = A*x + w
    first, then the weighted flux (1/v) dk/dx, then the outer divergence.
    Each pass is a centered second-order difference, so every factor can
    be tested on its own.
    """
    if f.n < 8:
        raise ValueError("grid too coarse: n >= 8 required")
    dx = f.dx
    w = f.values
    ux = f.slope_offset + _d1(w, dx)
    v = np.sqrt(1.0 + ux * ux)
    k = _d2(w, dx) / v**3
    flux = _d1(k, dx) / v
    return GraphField(f.domain_length, 0.0, -_d1(flux, dx))
