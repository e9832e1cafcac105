import math

import numpy as np
import pytest

from cavity_esd.atom_field import (
    Branch,
    CutoffTooSmallError,
    DrivenJCParams,
    ThermalFieldSpec,
    amplitudes,
    dressed_frame,
    dressed_states,
    evolved_thermal_state,
    fock_log_negativity,
    fock_state,
    state_cutoff,
    thermal_log_negativity,
    thermal_negativity,
    thermal_weights,
)
from cavity_esd.qmath import DensityMatrix, hermitian_eigenvalues, jacobi_eigh, negativity_oracle

FIG1_DOTTED = DrivenJCParams(omega=5, omega0=1, omega_c=0, lam=0)
FIG1_SOLID = DrivenJCParams(omega=5, omega0=1, omega_c=2, lam=2)


def random_params(rng, branch=Branch.HALF_PLANE):
    return DrivenJCParams(
        omega=rng.uniform(0, 10),
        omega0=rng.uniform(0, 10),
        omega_c=rng.uniform(0, 10),
        lam=rng.uniform(0, 5),
        g=rng.uniform(1e-3, 3),
        branch=branch,
    )


def test_params_validation():
    with pytest.raises(ValueError):
        DrivenJCParams(1, 1, 0, -1)
    with pytest.raises(ValueError):
        DrivenJCParams(1, 1, 0, 0, g=0)
    with pytest.raises(ValueError):
        DrivenJCParams(-1, 1, 0, 0)
    assert DrivenJCParams(1, 1, 0, 0, branch="principal").branch is Branch.PRINCIPAL


def test_undriven_frame():
    f = dressed_frame(FIG1_DOTTED)
    assert (f.theta, f.g_prime, f.delta2, f.omega_prime) == (0.0, 1.0, -4.0, 1.0)
    assert f.angle_defined


def test_fig1_solid_frame_half_plane():
    f = dressed_frame(FIG1_SOLID)
    assert f.delta1 == -1
    assert f.theta == pytest.approx(math.pi - math.atan(4), abs=1e-14)
    assert f.theta == pytest.approx(1.81577, abs=1e-5)
    assert f.g_prime == pytest.approx((1 - 1 / math.sqrt(17)) / 2, abs=1e-14)
    assert f.g_prime == pytest.approx(0.37873, abs=1e-5)
    assert f.delta2 == pytest.approx(math.sqrt(17) - 3, abs=1e-14)


def test_fig1_solid_frame_principal():
    f = dressed_frame(DrivenJCParams(5, 1, 2, 2, branch=Branch.PRINCIPAL))
    assert f.theta == pytest.approx(-1.32582, abs=1e-5)
    assert f.g_prime == pytest.approx(0.62127, abs=1e-5)
    assert f.delta2 == pytest.approx(math.sqrt(17) - 3, abs=1e-14)


def test_undefined_angle_flag():
    f = dressed_frame(DrivenJCParams(omega=1, omega0=1, omega_c=1, lam=0))
    assert not f.angle_defined
    assert f.theta == 0.0


def test_frame_invariants(rng):
    for _ in range(500):
        for branch in Branch:
            p = random_params(rng, branch)
            f = dressed_frame(p)
            assert f.delta1 == p.omega0 - p.omega_c
            assert abs(f.omega_prime - p.omega_c - math.hypot(f.delta1, 2 * p.lam)) <= 1e-12
            assert 0 <= f.g_prime <= p.g
            if branch is Branch.HALF_PLANE:
                assert 0 <= f.theta < math.pi
            else:
                assert -math.pi / 2 < f.theta <= math.pi / 2


def test_half_plane_upper_eigenvector(rng):
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    for _ in range(500):
        p = random_params(rng)
        f = dressed_frame(p)
        h = 0.5 * f.delta1 * sz + p.lam * sx
        plus, minus = dressed_states(f.theta)
        top = 0.5 * math.hypot(f.delta1, 2 * p.lam)
        assert np.max(np.abs(h @ plus - top * plus)) <= 1e-12
        assert np.max(np.abs(h @ minus + top * minus)) <= 1e-12
        assert hermitian_eigenvalues(h)[1] == pytest.approx(top, abs=1e-12)


def test_principal_disagrees_for_negative_detuning():
    w, v = jacobi_eigh(-0.5 * np.diag([1.0, -1.0]) + 2.0 * np.array([[0, 1], [1, 0]]))
    upper = v[:, 1] * np.sign(v[0, 1].real)
    f = dressed_frame(DrivenJCParams(5, 1, 2, 2, branch=Branch.PRINCIPAL))
    plus, _ = dressed_states(f.theta)
    assert abs(abs(upper @ plus) - 1) > 0.1


def test_amplitudes_examples():
    f = dressed_frame(FIG1_DOTTED)
    a, b, w = amplitudes(f, 0, 0.0)
    assert (a, b) == (1, 0)
    assert w == pytest.approx(math.sqrt(5))
    a, b, _ = amplitudes(f, 0, math.pi / (2 * math.sqrt(5)))
    assert abs(b) ** 2 == pytest.approx(0.2, abs=1e-14)
    assert abs(a) ** 2 == pytest.approx(0.8, abs=1e-14)


def test_resonant_amplitudes():
    p = DrivenJCParams(omega=1, omega0=1, omega_c=0, lam=0)
    f = dressed_frame(p)
    assert f.delta2 == 0
    t = np.linspace(0, 7, 50)
    a, b, _ = amplitudes(f, 0, t)
    np.testing.assert_allclose(a, np.cos(f.g_prime * t), atol=1e-15)
    np.testing.assert_allclose(b, -1j * np.sin(f.g_prime * t), atol=1e-15)


def test_decoupled_limit():
    # lambda = 0 with omega_c > omega0 puts theta at pi, so g' = 0
    p = DrivenJCParams(omega=1, omega0=1, omega_c=2, lam=0)
    f = dressed_frame(p)
    assert f.theta == pytest.approx(math.pi)
    assert f.g_prime == pytest.approx(0, abs=1e-30)
    a, b, _ = amplitudes(f, 0, np.linspace(0, 5, 11))
    np.testing.assert_allclose(np.abs(a), 1, atol=1e-12)
    np.testing.assert_allclose(b, 0, atol=1e-12)
    np.testing.assert_allclose(fock_log_negativity(p, 0, np.linspace(0, 5, 11)), 0, atol=1e-12)


def test_unitarity(rng):
    for _ in range(1000):
        f = dressed_frame(random_params(rng))
        a, b, _ = amplitudes(f, int(rng.integers(0, 21)), rng.uniform(0, 50))
        assert abs(abs(a) ** 2 + abs(b) ** 2 - 1) <= 1e-12


def test_fock_negativity_examples():
    assert fock_log_negativity(FIG1_DOTTED, 0, 0.0) == 0
    res = DrivenJCParams(omega=1, omega0=1, omega_c=0, lam=0)
    assert fock_log_negativity(res, 0, math.pi / 4) == pytest.approx(1, abs=1e-14)


def test_fock_negativity_fig1_dotted_maximum():
    # |beta_1|^2 = sin^2 / 5 peaks at 1/5, so max |alpha beta| = 2/5
    expected = math.log2(1.8)
    t_peak = math.pi / (2 * math.sqrt(5))
    assert fock_log_negativity(FIG1_DOTTED, 0, t_peak) == pytest.approx(expected, abs=1e-14)
    grid = np.linspace(0, 10, 200001)
    e = fock_log_negativity(FIG1_DOTTED, 0, grid)
    assert e.max() <= expected + 1e-14
    assert e.max() == pytest.approx(expected, abs=1e-8)


def test_fock_against_oracle(rng):
    for _ in range(200):
        p = random_params(rng)
        n = int(rng.integers(0, 21))
        t = rng.uniform(0, 50)
        rho = fock_state(p, n, t)
        assert rho.dims == (2, n + 2)
        e = fock_log_negativity(p, n, t)
        assert 0 <= e <= 1
        assert abs(e - negativity_oracle(rho)[1]) <= 1e-9


def test_resonant_periodicity():
    p = DrivenJCParams(omega=1.5, omega0=1.5, omega_c=0.5, lam=0)
    f = dressed_frame(p)
    assert f.delta2 == 0
    for n in (0, 1, 4):
        period = math.pi / amplitudes(f, n, 0.0)[2]
        t = np.linspace(0, 20, 301)
        np.testing.assert_allclose(
            fock_log_negativity(p, n, t + period), fock_log_negativity(p, n, t), atol=1e-10
        )


def test_thermal_weight_examples():
    w = thermal_weights(ThermalFieldSpec(0.0, cutoff=4))
    np.testing.assert_array_equal(w, [1, 0, 0, 0, 0])
    w = thermal_weights(ThermalFieldSpec(1.0, cutoff=5, tail_tol=0.1))
    np.testing.assert_allclose(w, 2.0 ** -(np.arange(6) + 1), rtol=1e-15)
    w = thermal_weights(ThermalFieldSpec(0.1))
    assert w[0] == pytest.approx(1 / 1.1, rel=1e-15)
    # smallest N with (0.1 / 1.1)^(N + 1) <= 1e-12
    assert len(w) - 1 == 11
    assert (0.1 / 1.1) ** 12 <= 1e-12 < (0.1 / 1.1) ** 11


def test_thermal_cutoff_raised_and_reported(caplog):
    with caplog.at_level("INFO"):
        w = thermal_weights(ThermalFieldSpec(0.3, cutoff=2))
    assert len(w) > 3
    assert 1 - w.sum() <= 1e-12
    assert "raised" in caplog.text


def test_thermal_cutoff_too_small_when_fixed():
    spec = ThermalFieldSpec(0.3, cutoff=2, auto_raise=False)
    with pytest.raises(CutoffTooSmallError):
        thermal_weights(spec)
    with pytest.raises(CutoffTooSmallError):
        evolved_thermal_state(FIG1_DOTTED, spec, 1.0)


def test_vacuum_thermal_state_is_pure_fock():
    spec = ThermalFieldSpec(0.0)
    for t in (0.0, 0.3, 2.0):
        rho = evolved_thermal_state(FIG1_SOLID, spec, t)
        np.testing.assert_allclose(rho.mat, fock_state(FIG1_SOLID, 0, t).mat, atol=1e-15)
        assert thermal_log_negativity(FIG1_SOLID, spec, t) == pytest.approx(
            fock_log_negativity(FIG1_SOLID, 0, t), abs=1e-14
        )
    w = hermitian_eigenvalues(evolved_thermal_state(FIG1_SOLID, spec, 1.3).mat)
    np.testing.assert_allclose(w, [0, 0, 0, 1], atol=1e-12)


def test_thermal_initial_state():
    spec = ThermalFieldSpec(0.3)
    rho = evolved_thermal_state(FIG1_SOLID, spec, 0.0)
    levels = rho.dims[1]
    w = (0.3 / 1.3) ** np.arange(levels) / 1.3
    plus = np.diag([1.0, 0.0])
    np.testing.assert_allclose(rho.mat, np.kron(plus, np.diag(w)), atol=1e-16)
    assert thermal_log_negativity(FIG1_SOLID, spec, 0.0) == 0


@pytest.mark.parametrize("m", [0.1, 0.3, 1.0])
def test_thermal_state_validity(m):
    spec = ThermalFieldSpec(m)
    cut = state_cutoff(spec)
    for t in (0.5, 3.0, 9.0):
        rho = evolved_thermal_state(FIG1_DOTTED, spec, t)
        assert rho.dims == (2, cut + 1)
        rho.check(trace_deficit_tol=spec.tail_tol)
        full = sum(m**n / (1 + m) ** (n + 1) for n in range(cut + 1))
        assert full - rho.trace() <= spec.tail_tol


def test_thermal_closed_form_matches_oracle():
    spec = ThermalFieldSpec(0.1)
    rho = evolved_thermal_state(FIG1_DOTTED, spec, 1.0)
    assert thermal_log_negativity(FIG1_DOTTED, spec, 1.0) == pytest.approx(negativity_oracle(rho)[1], abs=1e-9)
    ts = np.linspace(0, 10, 7)
    n = thermal_negativity(FIG1_SOLID, spec, ts)
    for t, nn in zip(ts, n):
        assert nn == pytest.approx(negativity_oracle(evolved_thermal_state(FIG1_SOLID, spec, t))[0], abs=1e-9)
