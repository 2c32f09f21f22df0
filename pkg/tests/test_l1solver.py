"""L1 forward solvers: weights, convolution paths, oracles, protocols."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracrheo.errors import DomainError, FracRheoError
from fracrheo.l1solver import (
    PAPER_PROTOCOL_DURATION_S,
    StrainProtocol,
    UniformGrid,
    forward_solve,
    history_convolve,
    l1_weights,
    paper_protocol,
    rasterize_protocol,
    step_fkv,
    step_fm,
    step_fqlv,
    step_sb,
)
from fracrheo.models import FKVParams, FMParams, FQLVParams, SBParams, relax_sb
from fracrheo.specfun import gamma_fn


# ---------------------------------------------------------------- weights

@settings(max_examples=60, deadline=None)
@given(nu=st.floats(-0.99, 0.99), n=st.integers(1, 400))
def test_weights_telescope(nu, n):
    b = l1_weights(nu, n)
    assert b[0] == 1.0
    assert np.sum(b) == pytest.approx(float(n) ** (1.0 - nu), rel=1e-12)


def test_weights_monotone_for_derivative_orders():
    b = l1_weights(0.5, 100)
    assert np.all(b > 0)
    assert np.all(np.diff(b) < 0)


def test_weights_domain():
    with pytest.raises(DomainError):
        l1_weights(1.0, 10)
    with pytest.raises(DomainError):
        l1_weights(-1.0, 10)


# ---------------------------------------------------------- convolution

def test_history_convolve_paths_agree(rng):
    w = l1_weights(0.3, 5000)
    x = rng.standard_normal(5000)
    direct = history_convolve(w, x, method="direct")
    fft = history_convolve(w, x, method="fft")
    scale = np.max(np.abs(direct))
    assert np.max(np.abs(direct - fft)) < 1e-12 * scale
    with pytest.raises(DomainError):
        history_convolve(w, x, method="magic")


def test_direct_path_is_exactly_causal(rng):
    """Perturbing increments after index k leaves outputs up to k unchanged."""
    w = l1_weights(0.4, 200)
    x = rng.standard_normal(200)
    y = history_convolve(w, x, method="direct")
    x2 = x.copy()
    x2[120:] += 10.0
    y2 = history_convolve(w, x2, method="direct")
    assert np.array_equal(y[:120], y2[:120])


# -------------------------------------------------------------- validation

def test_grid_validation():
    with pytest.raises(DomainError):
        UniformGrid(dt=0.0, n_steps=10)
    with pytest.raises(DomainError):
        UniformGrid(dt=0.1, n_steps=0)
    g = UniformGrid(dt=0.5, n_steps=4, t0=1.0)
    np.testing.assert_allclose(g.times(), [1.0, 1.5, 2.0, 2.5, 3.0])
    assert g.t_end == 3.0


def test_strain_validation():
    g = UniformGrid(dt=0.1, n_steps=3)
    p = SBParams(E=1.0, alpha=0.5)
    with pytest.raises(DomainError):
        step_sb(p, [0.1, 0.2, 0.3, 0.4], g)  # nonzero initial strain
    with pytest.raises(DomainError):
        step_sb(p, [[0.0, 0.1]], g)


def test_forward_solve_dispatch():
    g = UniformGrid(dt=0.1, n_steps=10)
    eps = np.linspace(0.0, 1.0, 11)
    p = SBParams(E=1.0, alpha=0.5)
    np.testing.assert_array_equal(forward_solve(p, eps, g), step_sb(p, eps, g))
    with pytest.raises(FracRheoError):
        forward_solve("not params", eps, g)


# ------------------------------------------------------------------ oracles

def _step_strain(n, level=1.0):
    eps = np.full(n + 1, level)
    eps[0] = 0.0
    return eps


def test_sb_step_response_matches_kernel():
    p = SBParams(E=2.0, alpha=0.3)
    dt = 0.01
    g = UniformGrid(dt=dt, n_steps=int(100 / dt))
    sigma = step_sb(p, _step_strain(g.n_steps), g)
    t = g.times()
    mask = t >= 1.0
    rel = np.abs(sigma[mask] / relax_sb(p, t[mask]) - 1.0)
    assert np.max(rel) < 0.01


def test_linearity_of_linear_solvers(rng):
    g = UniformGrid(dt=0.05, n_steps=200)
    e1 = np.concatenate(([0.0], rng.standard_normal(200))).cumsum() * 0.01
    e1 -= e1[0]
    e2 = np.concatenate(([0.0], rng.standard_normal(200))).cumsum() * 0.01
    e2 -= e2[0]
    for solver, p in [
        (step_sb, SBParams(E=3.0, alpha=0.4)),
        (step_fkv, FKVParams(E1=1.0, alpha1=0.2, E2=2.0, alpha2=0.7)),
        (step_fm, FMParams(E1=1.0, alpha1=0.2, E2=2.0, alpha2=0.8)),
    ]:
        combo = solver(p, 2.0 * e1 - 3.0 * e2, g)
        parts = 2.0 * solver(p, e1, g) - 3.0 * solver(p, e2, g)
        np.testing.assert_allclose(combo, parts, rtol=1e-9, atol=1e-12)


def test_fkv_is_sum_of_sb_solves():
    g = UniformGrid(dt=0.02, n_steps=500)
    eps = (g.times() / g.t_end) ** 2
    p = FKVParams(E1=1.5, alpha1=0.25, E2=0.5, alpha2=0.75)
    total = step_fkv(p, eps, g)
    parts = (step_sb(SBParams(E=p.E1, alpha=p.alpha1), eps, g)
             + step_sb(SBParams(E=p.E2, alpha=p.alpha2), eps, g))
    np.testing.assert_allclose(total, parts, rtol=1e-12)


def test_fm_recovers_sb_in_stiff_series_limit():
    """E2 -> inf removes the series element: FM solve -> SB(E1, alpha1)."""
    g = UniformGrid(dt=0.01, n_steps=2000)
    eps = _step_strain(g.n_steps, 0.5)
    fm = step_fm(FMParams(E1=3.0, alpha1=0.3, E2=1.0e12, alpha2=0.8), eps, g)
    sb = step_sb(SBParams(E=3.0, alpha=0.3), eps, g)
    np.testing.assert_allclose(fm[1:], sb[1:], rtol=1e-8)


def test_fqlv_linearizes_to_sb_for_tiny_nonlinearity():
    g = UniformGrid(dt=0.05, n_steps=2000)
    eps = _step_strain(g.n_steps, 1.0)
    p = FQLVParams(A=5.0e4, B=1e-9, E=0.7, alpha=0.3)
    fqlv = step_fqlv(p, eps, g)
    sb = step_sb(SBParams(E=p.E * p.A * p.B, alpha=p.alpha), eps, g)
    np.testing.assert_allclose(fqlv[1:], sb[1:], rtol=1e-7)


def test_smooth_strain_convergence_order_sb():
    """Manufactured eps = t^2 has the closed-form response
    2*E*t^(2-a)/Gamma(3-a); halving dt should shrink the error at
    roughly order 2-a."""
    p = SBParams(E=2.0, alpha=0.5)
    errs = []
    for dt in (0.01, 0.005):
        g = UniformGrid(dt=dt, n_steps=int(round(1.0 / dt)))
        t = g.times()
        sigma = step_sb(p, t**2, g)
        mask = t >= 0.2
        exact = 2.0 * p.E * t[mask] ** 1.5 / gamma_fn(2.5)
        errs.append(np.max(np.abs(sigma[mask] / exact - 1.0)))
    order = np.log2(errs[0] / errs[1])
    assert order > 1.35


# ----------------------------------------------------------------- protocols

def test_protocol_validation():
    with pytest.raises(DomainError):
        StrainProtocol(steps=(), ramp_s=1.0)
    with pytest.raises(DomainError):
        StrainProtocol(steps=((0.0, 0.5), (0.0, 1.0)), ramp_s=1.0)
    with pytest.raises(DomainError):
        StrainProtocol(steps=((0.0, 0.5), (10.0, 0.25)), ramp_s=1.0)
    with pytest.raises(DomainError):
        StrainProtocol(steps=((0.0, 0.5),), ramp_s=0.0)


def test_paper_protocol_shape():
    proto = paper_protocol()
    assert proto.onsets == (0.0, 1800.0, 4500.0, 7200.0, 9900.0)
    assert proto.levels == (0.25, 0.50, 1.00, 1.50, 2.00)
    assert PAPER_PROTOCOL_DURATION_S == 12600.0


def test_rasterize_protocol():
    proto = StrainProtocol(steps=((0.0, 0.5), (10.0, 1.0)), ramp_s=1.0)
    g = UniformGrid(dt=0.5, n_steps=40)
    strain, meta = rasterize_protocol(proto, g)
    assert meta["ramp_steps"] == 2
    assert meta["snapped_onsets_s"] == [0.0, 10.0]
    t = g.times()
    np.testing.assert_allclose(strain[t >= 11.0], 1.0)
    np.testing.assert_allclose(strain[(t >= 1.0) & (t < 10.0)], 0.5)
    assert strain[0] == 0.0


def test_rasterize_errors():
    proto = StrainProtocol(steps=((0.0, 0.5), (10.0, 1.0)), ramp_s=1.0)
    with pytest.raises(DomainError):
        rasterize_protocol(proto, UniformGrid(dt=0.5, n_steps=10))  # too short
    with pytest.raises(DomainError):
        rasterize_protocol(proto, UniformGrid(dt=2.0, n_steps=20))  # ramp < dt
    squeezed = StrainProtocol(steps=((0.0, 0.5), (0.4, 1.0)), ramp_s=1.0)
    with pytest.raises(DomainError):
        rasterize_protocol(squeezed, UniformGrid(dt=1.0, n_steps=20))
