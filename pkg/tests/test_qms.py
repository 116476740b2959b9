import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgauss import gaussian, qms, states
from qgauss.errors import DomainError, TailClipWarning
from qgauss.fourier import qft
from qgauss.moments import estimate_wS

D = 60


def test_config_validation():
    for bad in (0, -3, 2.5, True):
        with pytest.raises(DomainError):
            qms.McConfig(bad)
    with pytest.raises(DomainError):
        qms.McConfig(10, t=-1.0)
    with pytest.raises(DomainError):
        qms.McConfig(10, seed=-1)
    with pytest.raises(DomainError):
        qms.McConfig(10, seed=2**64)
    assert qms.McConfig(10, seed=2**64 - 1).seed == 2**64 - 1


@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6))
def test_sample_streams_depend_only_on_seed_and_index(seed, j):
    a = qms.normals(seed, j, 3)
    assert np.array_equal(a, qms.normals(seed, j, 3))
    assert not np.array_equal(a, qms.normals(seed, j + 1, 3))


def test_draws_independent_of_sample_count():
    assert np.array_equal(qms._draws(5, 200, 1)[:50], qms._draws(5, 50, 1))


def test_zero_time_is_identity():
    rho = states.gibbs_dm(2.0, D)
    out = qms.qms_mc(rho, qms.McConfig(50, 1, 0.0, 1 + 1j))
    assert np.abs(out.rho - rho).max() < 1e-14


def test_deterministic_given_seed():
    rho = states.coherent_dm(0.3, 30)
    cfg = qms.McConfig(500, 42, 0.2, 0.5 - 1j)
    a, b = qms.qms_mc(rho, cfg), qms.qms_mc(rho, cfg)
    assert np.array_equal(a.rho, b.rho)
    assert a.to_json() == b.to_json()


def test_vacuum_probe_matches_channel_law():
    cfg = qms.McConfig(10_000, 7, 0.25, 1.0)
    out = qms.qms_mc(states.vacuum_dm(D), cfg)
    p = out.probe(1j)
    # factor e^{-2t(u,Cu)} with (i, C i) = sigma(1, i)^2 = 1
    predicted = math.exp(-0.5) * qft(states.vacuum_dm(D), 1j)
    assert abs(p.est - predicted) < 3 * p.stderr
    assert out.clipped == 0


def test_mc_output_state_invariants():
    out = qms.qms_mc(states.gibbs_dm(1.0, D), qms.McConfig(2000, 3, 0.2, 0.7 + 0.4j))
    rho = out.rho
    assert np.abs(rho - rho.conj().T).max() == 0.0
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.linalg.eigvalsh(rho).min() >= -1e-9
    assert out.trace_defect < 1e-10


@pytest.mark.parametrize("rho,g,z,t", [
    (states.vacuum_dm(D), gaussian.vacuum(), 1.0, 0.25),
    (states.gibbs_dm(2.0, D), gaussian.gibbs(2.0), 1 + 1j, 0.1),
])
def test_mc_covariance_matches_law(rho, g, z, t):
    out = qms.qms_mc(rho, qms.McConfig(10_000, 11, t, z))
    exact = gaussian.qms_evolve(g, z, t)
    assert qms.max_zscore(out.params.S, exact.S, out.S_stderr) < 3
    # the per-sample estimate and the averaged state agree on second moments
    assert np.allclose(estimate_wS(out.rho).S, out.params.S, atol=1e-10)


@pytest.mark.parametrize("z,t", [(1.0, 0.25), (1 + 1j, 0.1), (-0.3 + 0.8j, 0.4)])
def test_exact_semigroup_matches_covariance_law(z, t):
    for rho, g in [(states.vacuum_dm(D), gaussian.vacuum()), (states.gibbs_dm(2.0, D), gaussian.gibbs(2.0))]:
        est = estimate_wS(qms.qms_exact(rho, z, t))
        assert est.isclose(gaussian.qms_evolve(g, z, t), atol=1e-9)


def test_exact_semigroup_vacuum_example():
    S = estimate_wS(qms.qms_exact(states.vacuum_dm(D), 1.0, 0.25)).S
    assert np.allclose(S, np.diag([1.0, 2.0]), atol=1e-12)


def test_exact_semigroup_composes():
    rho = states.coherent_dm(0.2 - 0.1j, 40)
    two = qms.qms_exact(qms.qms_exact(rho, 0.5 + 1j, 0.1), 0.5 + 1j, 0.15)
    assert np.abs(two - qms.qms_exact(rho, 0.5 + 1j, 0.25)).max() < 1e-13
    with pytest.raises(DomainError):
        qms.qms_exact(rho, 1, -0.1)


def test_mc_agrees_with_exact_semigroup():
    rho = states.gibbs_dm(2.0, D)
    out = qms.qms_mc(rho, qms.McConfig(10_000, 5, 0.2, 0.6 - 0.8j))
    exact = qms.qms_exact(rho, 0.6 - 0.8j, 0.2)
    for p in out.probes:
        assert abs(p.est - qft(exact, p.u)) < 4 * p.stderr + 1e-12


def test_stderr_scales_as_inverse_sqrt_samples():
    rho = states.vacuum_dm(D)
    small = qms.qms_mc(rho, qms.McConfig(1_000, 9, 0.3, 1.0)).probe(1j).stderr
    large = qms.qms_mc(rho, qms.McConfig(10_000, 9, 0.3, 1.0)).probe(1j).stderr
    assert 0.5 * math.sqrt(10) < small / large < 2 * math.sqrt(10)


def test_no_gaussian_fixed_point():
    g = gaussian.gibbs(1.0)
    traces = [np.trace(gaussian.qms_evolve(g, 0.4 + 0.3j, t).S) for t in (0.0, 0.1, 0.2, 0.4)]
    assert np.all(np.diff(traces) > 0)
    mc = [np.trace(qms.qms_mc(states.gibbs_dm(1.0, D), qms.McConfig(4000, 2, t, 1.0)).params.S)
          for t in (0.0, 0.2, 0.4)]
    assert np.all(np.diff(mc) > 0)


def test_semigroup_mc_check():
    assert qms.semigroup_mc_check(states.vacuum_dm(D), 1.0, 0.0, 0.0, qms.McConfig(100, 1)) == 0.0
    defect = qms.semigroup_mc_check(states.vacuum_dm(D), 1.0, 0.1, 0.1, qms.McConfig(10_000, 4))
    assert defect < 3
    with pytest.raises(DomainError):
        qms.semigroup_mc_check(states.vacuum_dm(D), 1.0, -0.1, 0.1, qms.McConfig(10))


def test_tail_clip_warning():
    with pytest.warns(TailClipWarning):
        out = qms.qms_mc(states.vacuum_dm(10), qms.McConfig(200, 1, 4.0, 1.0))
    assert out.clipped > 0


def test_bosonic_identity_and_displacement():
    rho = states.gibbs_dm(2.0, D)
    out = qms.bosonic_mc(rho, (0.0, 0.0), np.zeros((2, 2)), 20, seed=1)
    assert np.abs(out.rho - rho).max() < 1e-13
    out = qms.bosonic_mc(states.vacuum_dm(D), (1.0, 0.0), np.zeros((2, 2)), 20, seed=1)
    assert abs(out.params.w - (-1.0)) < 1e-10


def test_bosonic_mc_covariance():
    out = qms.bosonic_mc(states.vacuum_dm(D), (0.0, 0.0), np.eye(2), 10_000, seed=3)
    assert qms.max_zscore(out.params.S, 2 * np.eye(2), out.S_stderr) < 3


def test_bosonic_mc_rejects_non_psd():
    with pytest.raises(DomainError):
        qms.bosonic_mc(states.vacuum_dm(10), (0, 0), [[1.0, 2.0], [2.0, 1.0]], 10)


@pytest.mark.parametrize("C,mu", [(np.eye(2), (0.0, 0.0)), ([[0.5, 0.2], [0.2, 0.3]], (0.3, -0.2)),
                                  ([[0.0, 0.0], [0.0, 0.8]], (0.0, 0.0))])
def test_bosonic_quadrature_matches_law(C, mu):
    noise = gaussian.NoiseMatrix(C, mu)
    for rho, g in [(states.vacuum_dm(D), gaussian.vacuum()), (states.gibbs_dm(2.0, D), gaussian.gibbs(2.0))]:
        est = estimate_wS(qms.bosonic_quadrature(rho, noise))
        assert est.isclose(gaussian.apply_bosonic(g, noise), atol=1e-9)


@pytest.mark.parametrize("name,params", [
    ("coherent", {"u": 0.3 - 0.2j}),
    ("squeeze", {"zeta": 0.4 * np.exp(0.6j)}),
    ("bosonic", {"noise": gaussian.NoiseMatrix(np.eye(2) * 0.5, (0.1, 0.2))}),
    ("qms", {"z": 1 + 0.5j, "t": 0.2}),
])
def test_matrix_and_exact_channels_agree(name, params):
    rho, g = states.gibbs_dm(2.0, 80), gaussian.gibbs(2.0)
    est = estimate_wS(qms.apply_channel_matrix(rho, name, params))
    assert est.isclose(qms.apply_channel_exact(g, name, params), atol=1e-8)


def test_unknown_channel():
    with pytest.raises(ValueError):
        qms.apply_channel_exact(gaussian.vacuum(), "nope", {})
    with pytest.raises(ValueError):
        qms.apply_channel_matrix(states.vacuum_dm(4), "nope", {})


def test_result_json_schema():
    out = qms.qms_mc(states.vacuum_dm(8), qms.McConfig(10, 0, 0.1, 1.0, probes=(1j,)))
    js = out.to_json()
    assert set(js) == {"rho", "probes", "clipped"}
    assert set(js["probes"][0]) == {"u", "est", "stderr"}
    assert js["rho"]["dim"] == 8


def test_max_zscore():
    assert qms.max_zscore([1.0, 2.0], [1.0, 2.1], [1.0, 0.05]) == pytest.approx(2.0)
    assert qms.max_zscore([1.0], [1.0 + 1e-13], [0.0]) == 0.0
    assert qms.max_zscore([1.0], [1.5], [0.0]) == math.inf
