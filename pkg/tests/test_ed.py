import math

import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, settings
from hypothesis import strategies as st

from shotnoise.ed import (
    Probe,
    covariance_map,
    eigendecompose,
    gamma_rate,
    generator,
    long_time_qfi_density,
    qfi,
    saturation_residual,
    snl_gamma_monitor,
    verify_growth_bound,
)
from shotnoise.operators import (
    Family,
    ModelSpec,
    ProductStateSpec,
    build_hamiltonian,
    local_sensing_terms,
    random_local_model,
    random_product_state,
    realize_product_state,
)

from oracles import quadrature_generator, variance


def setup(model, theta=0.7, phi=0.3):
    H, dH = build_hamiltonian(model)
    psi = realize_product_state(ProductStateSpec(model.n_sites, theta, phi))
    return H, dH, eigendecompose(H), psi


TFI4 = ModelSpec(Family.TFI_PERIODIC, 4, {"J": 2.0, "lambda": 5.0})
CI5 = ModelSpec(Family.CHAOTIC_ISING_OPEN, 5, {"J": 1.0, "h": 1.0, "lambda": 1.0})


def test_eigendecomposition_reconstructs_h():
    H, _, eig, _ = setup(CI5)
    V, E = eig.vectors, eig.energies
    assert np.allclose(V @ np.diag(E) @ V.conj().T, H.toarray(), atol=1e-12)
    assert eig.min_gap > eig.tol_deg


def test_eigendecompose_rejects_bad_input():
    with pytest.raises(ValueError):
        eigendecompose(np.array([[0, 1], [0, 0]], dtype=float))
    with pytest.raises(ValueError):
        eigendecompose(np.eye(8), max_sites=2)


@pytest.mark.parametrize("model", [TFI4, random_local_model(3, np.random.default_rng(11))])
def test_generator_matches_quadrature(model):
    H, dH, eig, psi = setup(model)
    t = 0.9
    G = generator(eig, dH, t)
    ref = quadrature_generator(H.toarray(), dH.toarray(), t)
    assert np.allclose(G, ref, atol=1e-9)
    assert abs(qfi(G, psi) - 4 * variance(ref, psi)) < 1e-8


def test_generator_on_degenerate_spectrum():
    # H proportional to dH: G(t) = t dH exactly, every frequency on the kernel
    m = ModelSpec(Family.TFI_PERIODIC, 4, {"J": 0.0, "lambda": 1.3})
    _, dH, eig, _ = setup(m)
    assert np.allclose(generator(eig, dH, 2.5), 2.5 * dH.toarray(), atol=1e-12)


def test_probe_matches_dense_generator():
    _, dH, eig, psi = setup(CI5)
    p = Probe(eig, dH, psi)
    for t in (0.0, 0.3, 4.0):
        assert abs(p.qfi(t) - qfi(generator(eig, dH, t), psi)) < 1e-9 * max(1, p.qfi(t))


def test_gamma_against_expm():
    H, dH, eig, psi = setup(CI5)
    t = 1.7
    state = sl.expm(-1j * H.toarray() * t) @ psi
    expect = 2 * math.sqrt(variance(dH.toarray(), state))
    assert abs(gamma_rate(eig, dH, psi, t) - expect) < 1e-10


def test_negative_time_rejected():
    _, dH, eig, psi = setup(TFI4)
    with pytest.raises(ValueError):
        generator(eig, dH, -1.0)
    with pytest.raises(ValueError):
        gamma_rate(eig, dH, psi, -0.1)


def test_exact_rate_matches_finite_difference():
    _, dH, eig, psi = setup(CI5)
    p = Probe(eig, dH, psi)
    h = 1e-5
    for t in (0.2, 1.0, 3.3):
        fd = (math.sqrt(p.qfi(t + h)) - math.sqrt(p.qfi(t - h))) / (2 * h)
        assert abs(p.sqrt_qfi_rate(t) - fd) < 1e-5


def test_rate_at_origin_is_gamma():
    _, dH, eig, psi = setup(TFI4)
    p = Probe(eig, dH, psi)
    assert p.sqrt_qfi_rate(0.0) == pytest.approx(p.gamma(0.0))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 4))
def test_bound_holds_on_random_models(seed, n):
    rng = np.random.default_rng(seed)
    model = random_local_model(n, rng)
    state = random_product_state(n, rng)
    H, dH = build_hamiltonian(model)
    recs = verify_growth_bound(eigendecompose(H), dH, realize_product_state(state), np.linspace(0, 4, 25))
    assert all(not r.violated for r in recs)


def test_fd_method_agrees_with_exact():
    _, dH, eig, psi = setup(CI5)
    grid = np.linspace(0, 2, 401)
    exact = verify_growth_bound(eig, dH, psi, grid)
    fd = verify_growth_bound(eig, dH, psi, grid, method="fd")
    inner = slice(1, -1)
    diff = [abs(a.sqrt_qfi_rate - b.sqrt_qfi_rate) for a, b in zip(exact[inner], fd[inner])]
    assert max(diff) < 1e-3
    assert all(not r.violated for r in fd)
    with pytest.raises(ValueError):
        verify_growth_bound(eig, dH, psi, [0.0, 1.0, 0.5])


@pytest.mark.parametrize("n", [2, 3, 6])
def test_commuting_case_saturates(n):
    m = ModelSpec(Family.TFI_PERIODIC, n, {"J": 0.0, "lambda": 0.8})
    _, dH, eig, psi = setup(m, theta=math.pi / 2, phi=0.0)
    for r in verify_growth_bound(eig, dH, psi, [0.0, 0.5, 1.0, 3.0]):
        assert abs(r.qfi - 4 * n * r.t**2) < 1e-10 * max(1, r.qfi)
        assert abs(r.bound_slack) < 1e-8
    res, phase_ok = saturation_residual(eig, dH, psi, 1.0)
    assert res == 0.0 and phase_ok


def test_saturation_residual_positive_when_not_saturated():
    _, dH, eig, psi = setup(CI5)
    res, _ = saturation_residual(eig, dH, psi, 2.0)
    assert res > 1e-3
    with pytest.raises(ValueError):
        saturation_residual(eig, dH, psi, 0.0)


def test_long_time_density_is_late_limit():
    _, dH, eig, psi = setup(CI5)
    dens = long_time_qfi_density(eig, dH, psi)
    p = Probe(eig, dH, psi)
    t = 1e7
    assert abs(p.qfi(t) / t**2 - dens) < 1e-4 * dens


def test_long_time_density_commuting():
    m = ModelSpec(Family.TFI_PERIODIC, 5, {"J": 0.0, "lambda": 1.0})
    _, dH, eig, psi = setup(m, theta=1.0)
    assert long_time_qfi_density(eig, dH, psi) == pytest.approx(4 * 5 * math.sin(1.0) ** 2)


def test_covariance_map_sums_to_gamma_squared():
    m = ModelSpec(Family.TFI_PERIODIC, 6, {"J": 2.0, "lambda": 5.0})
    H, dH, eig, psi = setup(m, theta=math.pi / 2, phi=0.0)
    terms = local_sensing_terms(m)
    cm = covariance_map(eig, terms, psi, 0.5)
    assert np.allclose(cm.matrix, cm.matrix.T)
    assert abs(4 * cm.matrix.sum() - gamma_rate(eig, dH, psi, 0.5) ** 2) < 1e-9
    # brute force at one pair
    state = sl.expm(-1j * H.toarray() * 0.5) @ psi
    a, b = terms[0] @ state, terms[3] @ state
    ref = np.vdot(a, b).real - np.vdot(state, a).real * np.vdot(state, b).real
    assert abs(cm.matrix[0, 3] - ref) < 1e-12
    prof = cm.distance_profile(periodic=True)
    assert len(prof) == 4 and prof[0] > prof[3]


def test_covariance_at_zero_time_is_diagonal():
    m = ModelSpec(Family.CHAOTIC_ISING_OPEN, 4, {"J": 1.0, "h": 1.0, "lambda": 1.0})
    _, _, eig, psi = setup(m, theta=0.9)
    M = covariance_map(eig, local_sensing_terms(m), psi, 0.0).matrix
    assert np.allclose(M, math.sin(0.9) ** 2 * np.eye(4), atol=1e-12)


def test_snl_monitor_commuting():
    out = snl_gamma_monitor(Family.TFI_PERIODIC, {"J": 0.0, "lambda": 1.0}, [2, 4, 6], 0.8, 0.0, 3.0)
    assert [n for n, _ in out] == [2, 4, 6]
    assert all(abs(r - math.sin(0.8)) < 1e-12 for _, r in out)
    with pytest.raises(ValueError):
        snl_gamma_monitor(Family.TFI_PERIODIC, {"J": 1.0, "lambda": 1.0}, [16], 0.8, 0.0, 1.0)


def test_snl_monitor_commuting_is_one():
    out = snl_gamma_monitor(Family.TFI_PERIODIC, {"J": 0.0, "lambda": 2.0}, [3, 5, 8], math.pi / 2, 0.0, 1.0)
    assert all(abs(r - 1) < 1e-12 for _, r in out)


def test_snl_monitor_tfi_bounded():
    out = snl_gamma_monitor(Family.TFI_PERIODIC, {"J": 2.0, "lambda": 5.0}, range(4, 13), math.pi / 2, 0.0, 0.5)
    ratios = np.array([r for _, r in out])
    assert np.all(np.isfinite(ratios)) and ratios.max() < 1.1
    assert np.all(np.diff(ratios) <= 1e-9)


def test_saturation_examples():
    m = ModelSpec(Family.TFI_PERIODIC, 4, {"J": 2.0, "lambda": 5.0})
    _, dH, eig, psi = setup(m, theta=math.pi / 2, phi=0.0)
    early, _ = saturation_residual(eig, dH, psi, 1e-5)
    late, _ = saturation_residual(eig, dH, psi, 1.0)
    assert early < 1e-8
    assert late > 0
