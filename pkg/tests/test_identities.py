import math

import numpy as np
import pytest

from sdflow.identities import (
    IdentityReport,
    QParams,
    cauchy_schwarz_check,
    cauchy_schwarz_holds,
    convexity_residual_m,
    convexity_residual_q,
    m_value,
    q_paper_constants,
    q_upper_bound_residual,
    q_value,
    steady_first_integral_residuals,
    tangential_identity_residual,
)
from sdflow.soliton import IntegratorOptions, ProfileState, SolitonKind, integrate

SELFSIM = SolitonKind.self_similar()
DENSE = IntegratorOptions(sample_h=1e-3)


def dense_traj(kind, init, y_max=0.5, direction=1):
    traj = integrate(kind, init, direction, y_max, DENSE)
    assert traj.outcome == "completed"
    return traj


@pytest.fixture(scope="module")
def ss_traj():
    return dense_traj(SELFSIM, ProfileState.initial(phi=0.5, psi=0.3, k=0.4, w=0.2), y_max=0.8)


@pytest.fixture(scope="module")
def tw_traj():
    kind = SolitonKind.travelling(1.0, 1.0)
    return dense_traj(kind, ProfileState.initial(phi=0.2, psi=-0.4, k=0.3, w=-0.1), y_max=0.8)


# ------------------------------------------------------------------ Q, M values

def test_q_value_examples():
    assert q_value(ProfileState(0, 0, 0, 1, 0, 0), QParams(0, 0)) == 1.0
    assert q_value(ProfileState(2, 0, 0, 0, 0, 2), QParams(0, 0)) == 0.0
    s = ProfileState(1, 1, 0, 1, 0, math.sqrt(2))
    assert q_value(s, QParams(1, 1)) == pytest.approx(2 + math.sqrt(2), abs=1e-15)


def test_q_paper_constants():
    assert q_paper_constants(0.0) == QParams(0.0, 0.0)
    assert q_paper_constants(2.0) == QParams(-1.0, -1.0)
    assert q_paper_constants(-2.0) == QParams(-1.0, -1.0)


def test_m_value_examples():
    assert m_value(ProfileState(0, 0, 0, 1, 0, 0), 3.0, -2.0) == 1.0
    assert m_value(ProfileState(1, 1, 0, 0, 0, 0), 1.0, 2.0) == 6.0
    # line state phi = b y / a at y = -1 with a = b = 1
    assert m_value(ProfileState(-1, -1, 1, 0, 0, 0), 1.0, 1.0) == -4.0


def test_qparams_must_be_finite():
    with pytest.raises(ValueError):
        QParams(math.nan, 0.0)


# ------------------------------------------------------------------ convexity Q

def test_q_convexity_zero_on_lines():
    traj = dense_traj(SELFSIM, ProfileState.initial(psi=1.0), y_max=0.2)
    rep = convexity_residual_q(traj)
    assert rep.max_residual <= 1e-10


def test_q_convexity_on_integrated_trajectory(ss_traj):
    rep = convexity_residual_q(ss_traj)
    assert rep.max_residual <= 1e-4
    assert rep.extra["min_weighted_second"] >= -1e-6
    assert rep.samples_used == ss_traj.n


def test_q_convexity_parameter_invariance(ss_traj):
    # c1, c2 enter affinely; the weighted second difference kills them up
    # to finite-difference noise in S
    r0 = convexity_residual_q(ss_traj, QParams(0.0, 0.0))
    r1 = convexity_residual_q(ss_traj, q_paper_constants(0.5))
    assert abs(r0.max_residual - r1.max_residual) <= 1e-5


def test_q_convexity_rejects_wrong_kind(tw_traj):
    with pytest.raises(ValueError):
        convexity_residual_q(tw_traj)


def test_q_convexity_needs_uniform_sampling():
    traj = integrate(SELFSIM, ProfileState.initial(k=0.3), 1, 0.5)
    with pytest.raises(ValueError):
        convexity_residual_q(traj)


# ------------------------------------------------------------------ convexity M

def test_m_convexity_zero_on_lines():
    kind = SolitonKind.travelling(2.0, 1.0)
    traj = dense_traj(kind, ProfileState.initial(psi=0.5), y_max=0.2)
    rep = convexity_residual_m(traj)
    assert rep.max_residual <= 1e-10


def test_m_convexity_on_integrated_trajectory(tw_traj):
    rep = convexity_residual_m(tw_traj)
    assert rep.max_residual <= 1e-4
    assert rep.extra["min_weighted_second"] >= -1e-6


def test_m_convexity_mismatched_direction_fails(tw_traj):
    rep = convexity_residual_m(tw_traj, a=2.0, b=-1.0)
    assert rep.max_residual > 1e-2


def test_m_convexity_rejects_wrong_kind(ss_traj):
    with pytest.raises(ValueError):
        convexity_residual_m(ss_traj)


# ------------------------------------------------------------------- tangential

def test_tangential_zero_for_constant_slope():
    traj = dense_traj(SolitonKind.steady(), ProfileState.initial(psi=0.7), y_max=0.3)
    rep = tangential_identity_residual(traj, 1.3, -0.4)
    assert rep.max_residual <= 1e-12


def test_tangential_on_integrated_trajectory(tw_traj):
    rep = tangential_identity_residual(tw_traj, 1.0, 1.0)
    assert rep.max_residual <= 1e-4


def test_tangential_zero_direction(tw_traj):
    rep = tangential_identity_residual(tw_traj, 0.0, 0.0)
    assert rep.max_residual == 0.0


# --------------------------------------------------------------- Cauchy-Schwarz

def test_cauchy_schwarz_examples():
    assert cauchy_schwarz_check(ProfileState(1, 0, 0, 0, 0, 0))
    assert cauchy_schwarz_check(ProfileState(0, 1, 3, 0, 0, 0))
    with pytest.raises(ValueError):
        cauchy_schwarz_check(ProfileState(0, 0, 1, 0, 0, 0))


def test_cauchy_schwarz_randomized_million():
    rng = np.random.default_rng(13)
    n = 1_000_000
    phi = rng.standard_cauchy(n)
    psi = rng.standard_cauchy(n)
    y = rng.standard_cauchy(n)
    ok = np.abs(phi) + np.abs(y) > 0
    assert np.all(cauchy_schwarz_holds(phi[ok], psi[ok], y[ok]))


# --------------------------------------------------------------------- Q bound

def test_q_bound_both_directions(ss_traj):
    assert q_upper_bound_residual(ss_traj) <= 1e-9
    back = dense_traj(SELFSIM, ProfileState.initial(phi=0.5, psi=0.3, k=0.4, w=0.2),
                      y_max=0.8, direction=-1)
    assert q_upper_bound_residual(back) <= 1e-9


def test_q_bound_wrong_kind(tw_traj):
    with pytest.raises(ValueError):
        q_upper_bound_residual(tw_traj)


# -------------------------------------------------------------- first integrals

def test_steady_first_integrals():
    traj = integrate(SolitonKind.steady(), ProfileState.initial(k=0.1, w=1e-4), 1, 50.0)
    res_w, res_k = steady_first_integral_residuals(traj)
    assert res_w <= 1e-8
    assert res_k <= 1e-7


def test_first_integrals_wrong_kind(ss_traj):
    with pytest.raises(ValueError):
        steady_first_integral_residuals(ss_traj)


# --------------------------------------------------------------------- reports

def test_identity_report_serialization(ss_traj):
    rep = convexity_residual_q(ss_traj)
    rep.threshold = 1e-4
    payload = rep.to_dict()
    assert payload["pass"] is True
    assert payload["identity"] == "q_convexity"
    assert set(payload) >= {"identity", "max_residual", "y_at_max", "samples", "threshold", "pass"}
    with pytest.raises(ValueError):
        IdentityReport("x", -1.0, 0.0, 5)
