"""Auxiliary convexity functionals along profile trajectories.

Along a self-similar profile the functional

    Q(y) = k^2 + c1 + c2 S + (y^2 + phi^2)/4 - S^2/4

and along a travelling-wave profile the functional

    M(y) = k^2 + 2 (a y + b phi)

both satisfy the same weighted convexity identity

    (1/v) d/dy ( (1/v) dQ/dy ) = 2 w^2 >= 0,     w = (1/v) dk/dy,

for any choice of the constants.  The checks here evaluate the left
side by nested centered differences over a trajectory's dense samples
and report the worst deviation from 2 w^2, independently of the
integration route that produced the samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .soliton import ProfileState, Trajectory

__all__ = [
    "QParams",
    "IdentityReport",
    "q_value",
    "q_paper_constants",
    "m_value",
    "convexity_residual_q",
    "convexity_residual_m",
    "tangential_identity_residual",
    "cauchy_schwarz_check",
    "cauchy_schwarz_holds",
    "q_upper_bound_residual",
    "steady_first_integral_residuals",
]


@dataclass(frozen=True)
class QParams:
    c1: float
    c2: float

    def __post_init__(self):
        if not (math.isfinite(self.c1) and math.isfinite(self.c2)):
            raise ValueError("Q parameters must be finite")


@dataclass
class IdentityReport:
    identity: str
    max_residual: float
    y_at_max: float
    samples_used: int
    threshold: Optional[float] = None
    extra: Optional[dict] = None

    def __post_init__(self):
        if self.max_residual < 0:
            raise ValueError("residual must be nonnegative")

    @property
    def passed(self) -> Optional[bool]:
        if self.threshold is None:
            return None
        return self.max_residual <= self.threshold

    def to_dict(self) -> dict:
        out = {
            "identity": self.identity,
            "max_residual": self.max_residual,
            "y_at_max": self.y_at_max,
            "samples": self.samples_used,
            "threshold": self.threshold,
            "pass": self.passed,
        }
        if self.extra:
            out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


def q_value(s: ProfileState, p: QParams) -> float:
    """Q functional at one state."""
    return (
        s.k * s.k
        + p.c1
        + p.c2 * s.S
        + 0.25 * (s.y * s.y + s.phi * s.phi)
        - 0.25 * s.S * s.S
    )


def q_paper_constants(phi0: float) -> QParams:
    """Constants tied to the initial height: (-phi0^2/4, -|phi0|/2).

    With these, Q is dominated by k^2 in the integration direction of
    increasing arc length (see ``q_upper_bound_residual``).
    """
    return QParams(-0.25 * phi0 * phi0, -0.5 * abs(phi0))


def m_value(s: ProfileState, a: float, b: float) -> float:
    """M functional at one state for wave direction (a, b)."""
    return s.k * s.k + 2.0 * (a * s.y + b * s.phi)


def _uniform_h(y: np.ndarray) -> float:
    """Signed uniform sample spacing; negative for backward trajectories."""
    d = np.diff(y)
    h = d[0]
    if h == 0 or not np.allclose(d, h, rtol=1e-6, atol=0.0):
        raise ValueError("identity checks need uniform dense sampling (sample_h)")
    return float(h)


def _weighted_second(y: np.ndarray, v: np.ndarray, F: np.ndarray):
    """(1/v) d/dy((1/v) dF/dy) by nested centered differences.

    Returns (lhs, sl) where sl slices the original sample indices that
    the doubly-interior stencil reaches.
    """
    h = _uniform_h(y)
    g = (F[2:] - F[:-2]) / (2.0 * h) / v[1:-1]
    lhs = (g[2:] - g[:-2]) / (2.0 * h) / v[2:-2]
    return lhs, slice(2, -2)


def _series(traj: Trajectory):
    v = np.sqrt(1.0 + traj.psi**2)
    return traj.y, traj.phi, traj.k, traj.w, traj.S, v


def convexity_residual_q(traj: Trajectory, params: Optional[QParams] = None) -> IdentityReport:
    """Worst-case |(1/v)((1/v)Q')' - 2 w^2| over a self-similar trajectory.

    The identity holds for any constants, so with ``params=None`` the
    check runs at (0, 0) and at the initial-height constants and takes
    the worse of the two; their near-equality doubles as a regression
    check on the arc-length integration.
    """
    if traj.kind.name != "selfsimilar":
        raise ValueError("Q convexity applies to self-similar trajectories")
    if traj.n < 7:
        raise ValueError("need at least 7 samples")
    y, phi, k, w, S, v = _series(traj)
    param_sets = (
        [params]
        if params is not None
        else [QParams(0.0, 0.0), q_paper_constants(float(phi[np.argmin(np.abs(y))]))]
    )
    worst = None
    for p in param_sets:
        Q = k * k + p.c1 + p.c2 * S + 0.25 * (y * y + phi * phi) - 0.25 * S * S
        lhs, sl = _weighted_second(y, v, Q)
        res = np.abs(lhs - 2.0 * w[sl] ** 2)
        i = int(np.argmax(res))
        if worst is None or res[i] > worst[0]:
            worst = (float(res[i]), float(y[sl][i]), lhs)
    lhs = worst[2]
    return IdentityReport(
        identity="q_convexity",
        max_residual=worst[0],
        y_at_max=worst[1],
        samples_used=traj.n,
        extra={"min_weighted_second": float(np.min(lhs))},
    )


def convexity_residual_m(
    traj: Trajectory, a: Optional[float] = None, b: Optional[float] = None
) -> IdentityReport:
    """Worst-case |(1/v)((1/v)M')' - 2 w^2| over a travelling-wave trajectory."""
    if traj.kind.name != "travelling":
        raise ValueError("M convexity applies to travelling-wave trajectories")
    if traj.n < 7:
        raise ValueError("need at least 7 samples")
    if a is None:
        a = traj.kind.a
    if b is None:
        b = traj.kind.b
    y, phi, k, w, S, v = _series(traj)
    M = k * k + 2.0 * (a * y + b * phi)
    lhs, sl = _weighted_second(y, v, M)
    res = np.abs(lhs - 2.0 * w[sl] ** 2)
    i = int(np.argmax(res))
    return IdentityReport(
        identity="m_convexity",
        max_residual=float(res[i]),
        y_at_max=float(y[sl][i]),
        samples_used=traj.n,
        extra={"min_weighted_second": float(np.min(lhs))},
    )


def tangential_identity_residual(traj: Trajectory, a: float, b: float) -> IdentityReport:
    """Check d/dy((a + b psi)/v) = k (b - a psi) along any trajectory."""
    if traj.n < 3:
        raise ValueError("need at least 3 samples")
    y, phi, k, w, S, v = _series(traj)
    h = _uniform_h(y)
    F = (a + b * traj.psi) / v
    lhs = (F[2:] - F[:-2]) / (2.0 * h)
    rhs = k[1:-1] * (b - a * traj.psi[1:-1])
    res = np.abs(lhs - rhs)
    i = int(np.argmax(res))
    return IdentityReport(
        identity="tangential",
        max_residual=float(res[i]),
        y_at_max=float(y[1:-1][i]),
        samples_used=traj.n,
    )


def cauchy_schwarz_check(s: ProfileState) -> bool:
    """|phi psi + y| <= v sqrt(phi^2 + y^2), with a 1e-12 slack."""
    r2 = s.phi * s.phi + s.y * s.y
    if r2 <= 0.0:
        raise ValueError("undefined at phi = y = 0")
    return abs(s.phi * s.psi + s.y) <= s.v * math.sqrt(r2) + 1e-12


def cauchy_schwarz_holds(phi: np.ndarray, psi: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized form of ``cauchy_schwarz_check``."""
    v = np.sqrt(1.0 + psi * psi)
    return np.abs(phi * psi + y) <= v * np.sqrt(phi * phi + y * y) + 1e-12


def q_upper_bound_residual(traj: Trajectory) -> float:
    """Largest value of Q - k^2 with the initial-height constants.

    The bound Q <= k^2 is proved for increasing arc length from y = 0;
    a backward trajectory maps onto a forward one of the reflected
    profile (also self-similar) with S replaced by |S|, so the check
    applies the c2 term to |S|.  Nonpositive output certifies the bound.
    """
    if traj.kind.name != "selfsimilar":
        raise ValueError("the Q bound applies to self-similar trajectories")
    y, phi, k, w, S, v = _series(traj)
    phi0 = float(phi[np.argmin(np.abs(y))])
    qmk = (
        -0.25 * phi0 * phi0
        - 0.5 * abs(phi0) * np.abs(S)
        + 0.25 * (y * y + phi * phi)
        - 0.25 * S * S
    )
    return float(np.max(qmk))


def steady_first_integral_residuals(traj: Trajectory):
    """Deviation from the two first integrals of the equilibrium ODE.

    Returns (max |w - w0|, max |k - w0 S - k0|).
    """
    if traj.kind.name != "steady":
        raise ValueError("first integrals apply to steady trajectories")
    w0, k0 = traj.w[0], traj.k[0]
    res_w = float(np.max(np.abs(traj.w - w0)))
    res_k = float(np.max(np.abs(traj.k - w0 * traj.S - k0)))
    return res_w, res_k
