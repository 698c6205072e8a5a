"""Profile ODEs for graphical solitons of the surface diffusion flow.

The three profile equations (equilibrium, self-similar, travelling wave)
are integrated as one first-order system in the state

    (phi, psi, k, w, S),   psi = dphi/dy,   v = sqrt(1 + psi^2),

where the curvature k and the weighted curvature derivative
w = (1/v) dk/dy are carried as independent states and S is the signed
arc length measured from y = 0.  Carrying k and w keeps the first
integrals of the equilibrium equation directly observable and avoids
differentiating through v^3 twice.

The closure equations are

    dphi/dy = psi
    dpsi/dy = k v^3
    dk/dy   = w v
    dS/dy   = v
    dw/dy   = 0                      (steady)
            = -(phi - y psi)/4       (self-similar)
            = a psi - b              (travelling wave, direction (a, b))

Integration is by an adaptive Dormand-Prince 5(4) pair with cubic
Hermite dense output.  A run ends either with the budget exhausted or
with a breakdown certificate: loss of graphicality (slope beyond the
configured ceiling), an excess-turning witness (accumulated plus
projected turning above pi on an interval of constant curvature sign),
or a numerical failure (non-finite state, step underflow).
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "SolitonKind",
    "ProfileState",
    "IntegratorOptions",
    "BreakdownCertificate",
    "Trajectory",
    "ClassificationReport",
    "vector_field",
    "integrate",
    "shoot_bidirectional",
    "redundant_derivative_check",
    "sample_initial_state",
    "run_sweep",
]


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

_KIND_NAMES = ("steady", "selfsimilar", "travelling")


@dataclass(frozen=True)
class SolitonKind:
    """Which profile equation drives the state.

    ``travelling`` carries the direction (a, b) of u(x,t) = phi(x-at)+bt;
    a zero direction vector is rejected.
    """

    name: str
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if self.name not in _KIND_NAMES:
            raise ValueError(f"unknown soliton kind {self.name!r}")
        if self.name == "travelling" and self.a * self.a + self.b * self.b == 0.0:
            raise ValueError("travelling wave needs a nonzero direction (a, b)")

    @staticmethod
    def steady() -> "SolitonKind":
        return SolitonKind("steady")

    @staticmethod
    def self_similar() -> "SolitonKind":
        return SolitonKind("selfsimilar")

    @staticmethod
    def travelling(a: float, b: float) -> "SolitonKind":
        return SolitonKind("travelling", a, b)


@dataclass(frozen=True)
class ProfileState:
    """State of the first-order profile system at one location y."""

    y: float
    phi: float
    psi: float
    k: float
    w: float
    S: float

    @property
    def v(self) -> float:
        return math.sqrt(1.0 + self.psi * self.psi)

    @property
    def theta(self) -> float:
        return math.atan(self.psi)

    def is_finite(self) -> bool:
        return all(
            math.isfinite(x) for x in (self.y, self.phi, self.psi, self.k, self.w, self.S)
        )

    @staticmethod
    def initial(phi: float = 0.0, psi: float = 0.0, k: float = 0.0, w: float = 0.0) -> "ProfileState":
        return ProfileState(0.0, phi, psi, k, w, 0.0)


@dataclass(frozen=True)
class IntegratorOptions:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    min_step: float = 1e-14
    max_step: float = 1.0
    initial_step: float = 1e-3
    slope_ceiling: float = 1e6
    theta_sample: float = 0.01
    event_tol: float = 1e-9
    triviality_tol: float = 1e-9
    # Uniform output spacing; overrides theta-resolved sampling so that
    # finite-difference identity checks see an exactly uniform grid.
    sample_h: Optional[float] = None

    def validate(self) -> None:
        for name in ("abs_tol", "rel_tol", "min_step", "max_step", "initial_step",
                     "slope_ceiling", "theta_sample", "event_tol", "triviality_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"option {name} must be positive")
        if self.sample_h is not None and self.sample_h <= 0:
            raise ValueError("option sample_h must be positive")


@dataclass(frozen=True)
class BreakdownCertificate:
    """Machine-checkable witness that a profile is not an entire graph.

    kind is one of 'angle_excess', 'graphicality_loss', 'non_finite',
    'step_underflow'.  For an angle-excess witness, detail carries the
    interval, the turning bound (strictly above pi) and the curvature
    floor used for the projection; for graphicality loss it carries the
    slope magnitude at the event.
    """

    kind: str
    y_event: float
    direction: int
    detail: dict

    def __post_init__(self):
        if self.kind == "angle_excess" and not self.detail.get("value", 0.0) > math.pi:
            raise ValueError("angle-excess witness must exceed pi")
        if self.kind == "graphicality_loss":
            slope = self.detail.get("slope", 0.0)
            ceiling = self.detail.get("ceiling", 0.0)
            if not abs(slope) >= ceiling:
                raise ValueError("graphicality-loss slope below the configured ceiling")

    def to_dict(self) -> dict:
        return {
            "type": self.kind,
            "y_event": self.y_event,
            "direction": self.direction,
            "detail": self.detail,
        }


@dataclass
class Trajectory:
    """Dense output of one directional integration."""

    kind: SolitonKind
    direction: int
    y: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    k: np.ndarray
    w: np.ndarray
    S: np.ndarray
    outcome: str  # 'completed' | 'breakdown'
    certificate: Optional[BreakdownCertificate]
    options: IntegratorOptions
    max_abs_k: float
    max_turning: float

    @property
    def theta(self) -> np.ndarray:
        return np.arctan(self.psi)

    @property
    def n(self) -> int:
        return self.y.size

    def state(self, i: int) -> ProfileState:
        return ProfileState(
            self.y[i], self.phi[i], self.psi[i], self.k[i], self.w[i], self.S[i]
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# kind={self.kind.name}\n")
        buf.write(f"# a={self.kind.a!r}\n")
        buf.write(f"# b={self.kind.b!r}\n")
        buf.write(f"# direction={self.direction}\n")
        buf.write(f"# outcome={self.outcome}\n")
        buf.write("y,phi,psi,theta,k,w,S\n")
        theta = self.theta
        for i in range(self.n):
            row = (self.y[i], self.phi[i], self.psi[i], theta[i], self.k[i], self.w[i], self.S[i])
            buf.write(",".join(repr(float(x)) for x in row) + "\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "Trajectory":
        meta = {}
        rows = []
        header_seen = False
        for ln in text.strip().splitlines():
            if not ln:
                continue
            if ln.startswith("#"):
                key, _, val = ln[1:].strip().partition("=")
                meta[key.strip()] = val.strip()
                continue
            if not header_seen:
                if ln.strip() != "y,phi,psi,theta,k,w,S":
                    raise ValueError("bad trajectory header")
                header_seen = True
                continue
            parts = ln.split(",")
            if len(parts) != 7:
                raise ValueError("truncated trajectory row")
            rows.append([float(p) for p in parts])
        if not header_seen or not rows:
            raise ValueError("empty trajectory file")
        try:
            kind = SolitonKind(meta["kind"], float(meta.get("a", 0.0)), float(meta.get("b", 0.0)))
            direction = int(meta.get("direction", 1))
            outcome = meta.get("outcome", "completed")
        except KeyError as exc:
            raise ValueError(f"missing trajectory metadata {exc}") from exc
        arr = np.asarray(rows)
        return Trajectory(
            kind=kind,
            direction=direction,
            y=arr[:, 0],
            phi=arr[:, 1],
            psi=arr[:, 2],
            k=arr[:, 4],
            w=arr[:, 5],
            S=arr[:, 6],
            outcome=outcome,
            certificate=None,
            options=IntegratorOptions(),
            max_abs_k=float(np.max(np.abs(arr[:, 4]))),
            max_turning=float(np.max(np.abs(arr[:, 3] - arr[0, 3]))),
        )


# --------------------------------------------------------------------------
# vector field
# --------------------------------------------------------------------------

def vector_field(kind: SolitonKind, s: ProfileState):
    """Right-hand side of the first-order profile system.

    Returns (dphi, dpsi, dk, dw, dS, dy) with dy = 1.
    """
    v2 = 1.0 + s.psi * s.psi
    v = math.sqrt(v2)
    if kind.name == "steady":
        dw = 0.0
    elif kind.name == "selfsimilar":
        dw = -0.25 * (s.phi - s.y * s.psi)
    else:
        dw = kind.a * s.psi - kind.b
    return (s.psi, s.k * v2 * v, s.w * v, dw, v, 1.0)


def _make_rhs(kind: SolitonKind) -> Callable:
    """Specialized scalar RHS f(y, phi, psi, k, w) -> 5 derivatives."""
    if kind.name == "steady":

        def f(y, phi, psi, k, w):
            v2 = 1.0 + psi * psi
            v = math.sqrt(v2)
            return psi, k * v2 * v, w * v, 0.0, v

    elif kind.name == "selfsimilar":
        # internal variable chi = phi - y psi instead of phi: chi' = -y k v^3
        # and w' = -chi/4, so the linear equilibria (chi = k = w = 0) are
        # exact fixed points in floating point; phi = chi + y psi on output

        def f(y, chi, psi, k, w):
            v2 = 1.0 + psi * psi
            v = math.sqrt(v2)
            kv3 = k * v2 * v
            return -y * kv3, kv3, w * v, -0.25 * chi, v

    else:
        a, b = kind.a, kind.b

        def f(y, phi, psi, k, w):
            v2 = 1.0 + psi * psi
            v = math.sqrt(v2)
            return psi, k * v2 * v, w * v, a * psi - b, v

    return f


# --------------------------------------------------------------------------
# Dormand-Prince 5(4) coefficients
# --------------------------------------------------------------------------

_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# difference between the 5th and the embedded 4th order weights
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

_PINNED_THETA = math.pi / 2.0 - 0.1  # slope clearly pinned at vertical
_KMIN_FLOOR = 1e-8
_ANGLE_MARGIN = 1e-9  # witness value is pi plus this margin


def _hermite(s0, f0, s1, f1, h, tau):
    """Cubic Hermite interpolant between two accepted step endpoints."""
    t2 = tau * tau
    t3 = t2 * tau
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + tau
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return tuple(
        h00 * a + h10 * h * da + h01 * b + h11 * h * db
        for a, da, b, db in zip(s0, f0, s1, f1)
    )


class _Recorder:
    """Sample buffer plus the running monitors of one integration."""

    def __init__(self, y0: float, s0, theta0: float, store: bool):
        self.store = store
        self.ys = [y0]
        self.rows = [s0]
        self.max_abs_k = abs(s0[2])
        self.theta0 = theta0
        self.max_turning = 0.0
        # angle monitor over maximal intervals of constant curvature sign
        self.seg_sign = _sign(s0[2])
        self.seg_y = y0
        self.seg_theta = theta0
        self.seg_kmin = abs(s0[2]) if self.seg_sign != 0 else math.inf
        self.seg_best = (0.0, math.inf, y0)  # (turning, kmin, start) of best closed segment

    def add(self, y, s, theta):
        if self.store:
            self.ys.append(y)
            self.rows.append(s)
        ak = abs(s[2])
        if ak > self.max_abs_k:
            self.max_abs_k = ak
        turn = abs(theta - self.theta0)
        if turn > self.max_turning:
            self.max_turning = turn
        sign = _sign(s[2])
        if sign != self.seg_sign:
            self._close_segment(y, theta)
            self.seg_sign = sign
            self.seg_y = y
            self.seg_theta = theta
            self.seg_kmin = ak if sign != 0 else math.inf
        elif sign != 0 and ak < self.seg_kmin:
            self.seg_kmin = ak

    def _close_segment(self, y, theta):
        turn = abs(theta - self.seg_theta)
        if turn > self.seg_best[0]:
            self.seg_best = (turn, self.seg_kmin, self.seg_y)

    def segment(self, y, theta):
        """Data of the still-open constant-sign interval ending at y."""
        return abs(theta - self.seg_theta), self.seg_kmin, self.seg_y


def _sign(x: float) -> int:
    if x > 0.0:
        return 1
    if x < 0.0:
        return -1
    return 0


def _certify(rec: _Recorder, y_end: float, s_end, direction: int,
             opts: IntegratorOptions, failure: str) -> BreakdownCertificate:
    """Build the strongest certificate supported by the recorded data.

    Preference order: an excess-turning witness in the style of the
    steady-state case analysis (observed turning on a constant-sign
    interval, extended at the observed curvature floor until the bound
    passes pi), then plain graphicality loss at the slope ceiling, then
    the numerical failure itself.
    """
    psi_end = s_end[1]
    theta_end = math.atan(psi_end)
    turning, kmin, seg_start = rec.segment(y_end, theta_end)
    if (
        rec.seg_sign != 0
        and kmin >= _KMIN_FLOOR
        and math.isfinite(kmin)
        and abs(theta_end) >= _PINNED_THETA
    ):
        target = math.pi + _ANGLE_MARGIN
        extension = (target - turning) / kmin
        a = min(seg_start, y_end + direction * extension)
        b = max(seg_start, y_end + direction * extension)
        return BreakdownCertificate(
            kind="angle_excess",
            y_event=y_end,
            direction=direction,
            detail={
                "interval": [a, b],
                "value": target,
                "observed_turning": turning,
                "kappa_min": kmin,
            },
        )
    if abs(psi_end) >= opts.slope_ceiling:
        return BreakdownCertificate(
            kind="graphicality_loss",
            y_event=y_end,
            direction=direction,
            detail={"slope": psi_end, "ceiling": opts.slope_ceiling},
        )
    detail = {"slope": psi_end}
    return BreakdownCertificate(
        kind=failure, y_event=y_end, direction=direction, detail=detail
    )


def integrate(
    kind: SolitonKind,
    init: ProfileState,
    direction: int = 1,
    y_budget: float = 200.0,
    opts: Optional[IntegratorOptions] = None,
    store: bool = True,
) -> Trajectory:
    """Advance one profile from ``init`` until breakdown or budget.

    direction is +1 or -1; y_budget is the maximum |y - y0| travelled.
    With ``store=False`` only monitors and the outcome are kept, which
    is what classification sweeps need.
    """
    if opts is None:
        opts = IntegratorOptions()
    opts.validate()
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    if y_budget <= 0:
        raise ValueError("y_budget must be positive")
    if not init.is_finite():
        raise ValueError("initial state must be finite")

    f = _make_rhs(kind)
    uses_chi = kind.name == "selfsimilar"
    y = init.y
    y_final = init.y + direction * y_budget
    first = init.phi - y * init.psi if uses_chi else init.phi
    s = (first, init.psi, init.k, init.w, init.S)
    theta = math.atan(init.psi)
    rec = _Recorder(y, s, theta, store)

    sample_h = opts.sample_h
    grid_i = 0  # index of the last emitted uniform sample
    atol, rtol = opts.abs_tol, opts.rel_tol
    ceiling = opts.slope_ceiling

    d = f(y, *s[:4])
    h = direction * min(opts.initial_step, opts.max_step, y_budget)
    outcome = None
    certificate = None

    while True:
        # clamp the step to the budget and, in uniform-sampling mode, to
        # the next output grid point so samples land exactly on the grid
        if direction * (y + h - y_final) > 0.0:
            h = y_final - y
        target = None
        if sample_h is not None:
            y_next_grid = init.y + direction * (grid_i + 1) * sample_h
            if direction * (y + h - y_next_grid) >= 0.0:
                h = y_next_grid - y
                target = grid_i + 1
        if abs(h) < opts.min_step and target is None and abs(y - y_final) > opts.min_step:
            outcome = "breakdown"
            certificate = _certify(rec, y, s, direction, opts, "step_underflow")
            break

        p, q, r, u, z = s
        f1 = d
        # stage 2
        g = (
            p + h * _A21 * f1[0],
            q + h * _A21 * f1[1],
            r + h * _A21 * f1[2],
            u + h * _A21 * f1[3],
            z + h * _A21 * f1[4],
        )
        f2 = f(y + _C2 * h, *g[:4])
        g = (
            p + h * (_A31 * f1[0] + _A32 * f2[0]),
            q + h * (_A31 * f1[1] + _A32 * f2[1]),
            r + h * (_A31 * f1[2] + _A32 * f2[2]),
            u + h * (_A31 * f1[3] + _A32 * f2[3]),
            z + h * (_A31 * f1[4] + _A32 * f2[4]),
        )
        f3 = f(y + _C3 * h, *g[:4])
        g = (
            p + h * (_A41 * f1[0] + _A42 * f2[0] + _A43 * f3[0]),
            q + h * (_A41 * f1[1] + _A42 * f2[1] + _A43 * f3[1]),
            r + h * (_A41 * f1[2] + _A42 * f2[2] + _A43 * f3[2]),
            u + h * (_A41 * f1[3] + _A42 * f2[3] + _A43 * f3[3]),
            z + h * (_A41 * f1[4] + _A42 * f2[4] + _A43 * f3[4]),
        )
        f4 = f(y + _C4 * h, *g[:4])
        g = (
            p + h * (_A51 * f1[0] + _A52 * f2[0] + _A53 * f3[0] + _A54 * f4[0]),
            q + h * (_A51 * f1[1] + _A52 * f2[1] + _A53 * f3[1] + _A54 * f4[1]),
            r + h * (_A51 * f1[2] + _A52 * f2[2] + _A53 * f3[2] + _A54 * f4[2]),
            u + h * (_A51 * f1[3] + _A52 * f2[3] + _A53 * f3[3] + _A54 * f4[3]),
            z + h * (_A51 * f1[4] + _A52 * f2[4] + _A53 * f3[4] + _A54 * f4[4]),
        )
        f5 = f(y + _C5 * h, *g[:4])
        g = (
            p + h * (_A61 * f1[0] + _A62 * f2[0] + _A63 * f3[0] + _A64 * f4[0] + _A65 * f5[0]),
            q + h * (_A61 * f1[1] + _A62 * f2[1] + _A63 * f3[1] + _A64 * f4[1] + _A65 * f5[1]),
            r + h * (_A61 * f1[2] + _A62 * f2[2] + _A63 * f3[2] + _A64 * f4[2] + _A65 * f5[2]),
            u + h * (_A61 * f1[3] + _A62 * f2[3] + _A63 * f3[3] + _A64 * f4[3] + _A65 * f5[3]),
            z + h * (_A61 * f1[4] + _A62 * f2[4] + _A63 * f3[4] + _A64 * f4[4] + _A65 * f5[4]),
        )
        f6 = f(y + h, *g[:4])
        s1 = (
            p + h * (_B1 * f1[0] + _B3 * f3[0] + _B4 * f4[0] + _B5 * f5[0] + _B6 * f6[0]),
            q + h * (_B1 * f1[1] + _B3 * f3[1] + _B4 * f4[1] + _B5 * f5[1] + _B6 * f6[1]),
            r + h * (_B1 * f1[2] + _B3 * f3[2] + _B4 * f4[2] + _B5 * f5[2] + _B6 * f6[2]),
            u + h * (_B1 * f1[3] + _B3 * f3[3] + _B4 * f4[3] + _B5 * f5[3] + _B6 * f6[3]),
            z + h * (_B1 * f1[4] + _B3 * f3[4] + _B4 * f4[4] + _B5 * f5[4] + _B6 * f6[4]),
        )
        finite = all(map(math.isfinite, s1))
        if finite:
            f7 = f(y + h, *s1[:4])
            err = 0.0
            for i in range(5):
                e = h * (
                    _E1 * f1[i]
                    + _E3 * f3[i]
                    + _E4 * f4[i]
                    + _E5 * f5[i]
                    + _E6 * f6[i]
                    + _E7 * f7[i]
                )
                scale = atol + rtol * max(abs(s[i]), abs(s1[i]))
                e = abs(e) / scale
                if e > err:
                    err = e
        if not finite or not math.isfinite(err):
            h *= 0.5
            if abs(h) < opts.min_step:
                outcome = "breakdown"
                certificate = _certify(rec, y, s, direction, opts, "non_finite")
                break
            continue
        if err > 1.0:
            h *= max(0.2, 0.9 * err**-0.2)
            if abs(h) < opts.min_step:
                outcome = "breakdown"
                certificate = _certify(rec, y, s, direction, opts, "step_underflow")
                break
            continue

        # accepted
        y1 = y + h
        if target is not None and abs(y1 - (init.y + direction * target * sample_h)) <= 1e-12 * max(1.0, abs(y1)):
            y1 = init.y + direction * target * sample_h

        # slope-ceiling event: bisect the Hermite interpolant in this step
        if abs(s1[1]) >= ceiling:
            lo, hi = 0.0, 1.0
            while (hi - lo) * abs(h) > opts.event_tol:
                mid = 0.5 * (lo + hi)
                sm = _hermite(s, f1, s1, f7, h, mid)
                if abs(sm[1]) >= ceiling:
                    hi = mid
                else:
                    lo = mid
            y_e = y + hi * h
            s_e = _hermite(s, f1, s1, f7, h, hi)
            theta_e = math.atan(s_e[1])
            rec.add(y_e, s_e, theta_e)
            outcome = "breakdown"
            certificate = _certify(rec, y_e, s_e, direction, opts, "graphicality_loss")
            break

        theta1 = math.atan(s1[1])
        if store and sample_h is None and abs(theta1 - theta) > opts.theta_sample:
            # refine by bisection until consecutive samples are close in theta
            taus = [(0.0, theta), (1.0, theta1)]
            i = 0
            while i < len(taus) - 1 and len(taus) < 4096:
                (ta, tha), (tb, thb) = taus[i], taus[i + 1]
                if abs(thb - tha) > opts.theta_sample and tb - ta > 1e-9:
                    tm = 0.5 * (ta + tb)
                    sm = _hermite(s, f1, s1, f7, h, tm)
                    taus.insert(i + 1, (tm, math.atan(sm[1])))
                else:
                    i += 1
            for tau, _ in taus[1:-1]:
                sj = _hermite(s, f1, s1, f7, h, tau)
                rec.add(y + tau * h, sj, math.atan(sj[1]))
        if sample_h is None or target is not None:
            rec.add(y1, s1, theta1)
            if target is not None:
                grid_i = target
        else:
            # off-grid point in uniform mode: monitors only
            rec_store, rec.store = rec.store, False
            rec.add(y1, s1, theta1)
            rec.store = rec_store

        y, s, d, theta = y1, s1, f7, theta1
        if direction * (y - y_final) >= 0.0 or abs(y - y_final) < 1e-15 * max(1.0, abs(y_final)):
            outcome = "completed"
            break
        h *= min(5.0, 0.9 * (err + 1e-300) ** -0.2) if err > 0 else 5.0
        if abs(h) > opts.max_step:
            h = direction * opts.max_step

    ys = np.asarray(rec.ys)
    rows = np.asarray(rec.rows)
    phi_out = rows[:, 0] + ys * rows[:, 1] if uses_chi else rows[:, 0]
    return Trajectory(
        kind=kind,
        direction=direction,
        y=ys,
        phi=phi_out,
        psi=rows[:, 1],
        k=rows[:, 2],
        w=rows[:, 3],
        S=rows[:, 4],
        outcome=outcome,
        certificate=certificate,
        options=opts,
        max_abs_k=rec.max_abs_k,
        max_turning=rec.max_turning,
    )


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

@dataclass
class ClassificationReport:
    """Outcome of bidirectional shooting from one initial state."""

    kind: SolitonKind
    init: ProfileState
    outcome: str  # 'trivial' | 'breakdown' | 'inconclusive'
    certificate: Optional[BreakdownCertificate]
    direction: int
    max_abs_k: float
    total_turning: float
    options: IntegratorOptions
    seed: Optional[int] = None
    forward: Optional[Trajectory] = None
    backward: Optional[Trajectory] = None

    def to_dict(self) -> dict:
        return {
            "kind": {"name": self.kind.name, "a": self.kind.a, "b": self.kind.b},
            "init": asdict(self.init),
            "seed": self.seed,
            "outcome": self.outcome,
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "direction": self.direction,
            "max_abs_k": self.max_abs_k,
            "total_turning": self.total_turning,
            "options": asdict(self.options),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


def shoot_bidirectional(
    kind: SolitonKind,
    init: ProfileState,
    y_budget: float = 200.0,
    opts: Optional[IntegratorOptions] = None,
    store: bool = True,
    seed: Optional[int] = None,
) -> ClassificationReport:
    """Integrate in both directions and classify the initial state.

    Trivial requires both directions to complete the budget with
    negligible curvature and turning; a certificate from either
    direction yields Breakdown; anything else is Inconclusive.
    """
    if opts is None:
        opts = IntegratorOptions()
    fwd = integrate(kind, init, 1, y_budget, opts, store=store)
    bwd = integrate(kind, init, -1, y_budget, opts, store=store)
    max_abs_k = max(fwd.max_abs_k, bwd.max_abs_k)
    total_turning = max(fwd.max_turning, bwd.max_turning)
    certificate = None
    direction = 0
    if fwd.certificate is not None and bwd.certificate is not None:
        # report the certificate closer to the initial point
        if abs(fwd.certificate.y_event - init.y) <= abs(bwd.certificate.y_event - init.y):
            certificate, direction = fwd.certificate, 1
        else:
            certificate, direction = bwd.certificate, -1
    elif fwd.certificate is not None:
        certificate, direction = fwd.certificate, 1
    elif bwd.certificate is not None:
        certificate, direction = bwd.certificate, -1

    if certificate is not None:
        outcome = "breakdown"
    elif (
        fwd.outcome == "completed"
        and bwd.outcome == "completed"
        and max_abs_k <= opts.triviality_tol
        and total_turning <= opts.triviality_tol
    ):
        outcome = "trivial"
    else:
        outcome = "inconclusive"
    return ClassificationReport(
        kind=kind,
        init=init,
        outcome=outcome,
        certificate=certificate,
        direction=direction,
        max_abs_k=max_abs_k,
        total_turning=total_turning,
        options=opts,
        seed=seed,
        forward=fwd if store else None,
        backward=bwd if store else None,
    )


def redundant_derivative_check(traj: Trajectory) -> float:
    """Cross-check the reduction: FD(psi) vs k v^3 and FD(k) vs w v.

    Centered three-point differences on the (possibly nonuniform) sample
    grid; returns the larger of the two maximal residuals.  Both are
    O(h^2) in the local sample spacing for a consistent trajectory.
    """
    if traj.n < 5:
        raise ValueError("need at least 5 samples")
    y, psi, k, w = traj.y, traj.psi, traj.k, traj.w
    hm = y[1:-1] - y[:-2]
    hp = y[2:] - y[1:-1]
    denom = hm * hp * (hm + hp)
    if np.any(denom == 0.0):
        raise ValueError("degenerate sample spacing")

    def d(fv):
        return (
            -(hp**2) * fv[:-2] + (hp**2 - hm**2) * fv[1:-1] + hm**2 * fv[2:]
        ) / denom

    v = np.sqrt(1.0 + psi[1:-1] ** 2)
    res_psi = np.max(np.abs(d(psi) - k[1:-1] * v**3))
    res_k = np.max(np.abs(d(k) - w[1:-1] * v))
    return float(max(res_psi, res_k))


# --------------------------------------------------------------------------
# seeded sweeps
# --------------------------------------------------------------------------

def sample_initial_state(rng: np.random.Generator) -> ProfileState:
    """Draw a non-trivial initial state.

    phi, psi uniform in [-2, 2]; k, w uniform in [-1, 1]; resampled until
    |k| + |w| >= 1e-3 so the measure-zero trivial set is excluded.
    """
    while True:
        phi, psi = rng.uniform(-2.0, 2.0, size=2)
        k, w = rng.uniform(-1.0, 1.0, size=2)
        if abs(k) + abs(w) >= 1e-3:
            return ProfileState(0.0, float(phi), float(psi), float(k), float(w), 0.0)


def _sweep_one(args) -> ClassificationReport:
    kind_name, a, b, seed, index, y_budget, opts_dict = args
    kind = SolitonKind(kind_name, a, b)
    opts = IntegratorOptions(**opts_dict)
    rng = np.random.default_rng([seed, index])
    init = sample_initial_state(rng)
    return shoot_bidirectional(kind, init, y_budget, opts, store=False, seed=seed)


def run_sweep(
    kind: SolitonKind,
    count: int,
    seed: int,
    y_budget: float = 200.0,
    opts: Optional[IntegratorOptions] = None,
    workers: int = 1,
) -> list:
    """Classify ``count`` seeded random initial states.

    Run i uses the PRNG stream (seed, i), so results do not depend on
    worker count or scheduling.
    """
    if opts is None:
        opts = IntegratorOptions()
    jobs = [
        (kind.name, kind.a, kind.b, seed, i, y_budget, asdict(opts))
        for i in range(count)
    ]
    if workers <= 1:
        return [_sweep_one(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_one, jobs))
