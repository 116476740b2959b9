import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgauss import gaussian, moments, states
from qgauss.errors import DomainError, PrecisionWarning, ShapeError
from qgauss.fock import canonical_operators

D = 60
DIRECTIONS = (math.sqrt(2), 1j * math.sqrt(2), 1 + 1j)


def direct_moment(rho, A, n):
    return np.trace(rho @ np.linalg.matrix_power(A, n)).real


def test_annihilation_observable_examples():
    ops = canonical_operators(D)
    assert np.abs(2 * moments.annihilation_observable(math.sqrt(2), D) - 2 * ops.P).max() < 1e-14
    assert np.abs(moments.annihilation_observable(1j * math.sqrt(2), D) + ops.Q).max() < 1e-14
    assert not moments.annihilation_observable(0, D).any()
    A = moments.annihilation_observable(1, 3)
    assert A[0, 1] == pytest.approx(-0.5j)
    assert np.allclose(A, A.conj().T)


def test_yosida_scalar_case():
    lam = np.array([0.0, 1.0, 5.0, 100.0])
    out = moments.yosida(np.diag(lam), 0.1)
    assert np.allclose(out, np.diag(lam / (1 + 0.1 * lam)))


def test_yosida_rejects_bad_input():
    with pytest.raises(DomainError):
        moments.yosida(np.eye(2), 0.0)
    with pytest.raises(DomainError):
        moments.yosida(-np.eye(2), 1.0)


def test_yosida_resolvent_bound():
    A = 2 * moments.annihilation_observable(1, 40)
    eps = 1e-3
    err = np.linalg.norm(moments.yosida(1j * A, eps) - 1j * A, 2)
    assert err <= eps * np.linalg.norm(A, 2) ** 2 * (1 + 1e-12)


@given(st.floats(1e-3, 1.0), st.floats(0.1, 0.99))
def test_yosida_increases_for_psd(eps1, ratio):
    A = canonical_operators(20).N
    eps2 = eps1 * ratio
    diff = moments.yosida(A, eps2) - moments.yosida(A, eps1)
    assert np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)).min() >= -1e-12


def test_spectral_parts_examples():
    parts = moments.spectral_parts(np.diag([2.0, -3.0]))
    assert np.allclose(parts.plus, np.diag([2.0, 0.0]))
    assert np.allclose(parts.minus, np.diag([0.0, 3.0]))
    psd = canonical_operators(10).N
    assert not np.abs(moments.spectral_parts(psd).minus).max() > 1e-14
    P2 = 2 * moments.annihilation_observable(math.sqrt(2), 40)
    parts = moments.spectral_parts(P2)
    assert np.trace(parts.plus).real == pytest.approx(np.trace(parts.minus).real, abs=1e-8)


def test_spectral_parts_rejects_non_hermitian():
    with pytest.raises(ShapeError):
        moments.spectral_parts(np.array([[0, 1], [0, 0]]))


@given(st.integers(0, 2**32 - 1))
def test_spectral_parts_invariants(seed):
    r = np.random.default_rng(seed)
    X = r.normal(size=(6, 6)) + 1j * r.normal(size=(6, 6))
    A = X + X.conj().T
    p, m = moments.spectral_parts(A)
    assert np.abs(p - m - A).max() < 1e-10
    assert np.abs(p @ m).max() < 1e-8
    assert np.linalg.eigvalsh(p).min() > -1e-10 and np.linalg.eigvalsh(m).min() > -1e-10


def test_eps_schedule_validation():
    assert moments.EpsSchedule().eps == (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
    for bad in [(1e-2, 1e-1), (1e-1,), (1e-1, 0.0), (1e-1, 1e-1)]:
        with pytest.raises(DomainError):
            moments.EpsSchedule(bad)
    with pytest.raises(DomainError):
        moments.EpsSchedule(h=0.0)


def test_traceable_trace_examples():
    ops = canonical_operators(D)
    ident = moments.traceable_trace(states.gibbs_dm(1.0, D), np.eye(D))
    assert ident.value == pytest.approx(1.0)
    vac = moments.traceable_trace(states.vacuum_dm(D), ops.N)
    assert vac.value == 0.0 and not vac.curve.any()
    res = moments.traceable_trace(states.gibbs_dm(1.0, D), ops.N)
    assert abs(res.value - 0.5819767069) < 1e-8
    assert abs(res.value - math.exp(-1) / (1 - math.exp(-1))) < 1e-8
    assert res.agreement < 1e-8 and abs(res.hs_value - res.direct_value) < 1e-10
    assert res.converged


def test_traceable_trace_indefinite_observable():
    rho = states.coherent_dm(0.4 - 0.3j, D)
    A = 2 * moments.annihilation_observable(1 + 1j, D)
    res = moments.traceable_trace(rho, A)
    assert abs(res.value - res.direct_value) < 1e-8
    assert abs(res.hs_value - res.direct_value) < 1e-10


def test_traceable_trace_yosida_curve_monotone_for_psd():
    res = moments.traceable_trace(states.gibbs_dm(0.5, D), canonical_operators(D).N)
    assert np.all(np.diff(res.curve) > 0)


def test_convergence_flag_detects_growing_increments():
    assert not moments._converging(np.array([0.0, 1e-3, 1e-1, 1.0]))
    assert moments._converging(np.array([1.0, 0.1, 0.01, 0.001]))


@pytest.mark.parametrize("n,expected,tol", [(1, 0.0, 1e-8), (2, 2.0, 1e-6), (4, 12.0, 1e-4)])
def test_derivative_vacuum_examples(n, expected, tol):
    A = 2 * canonical_operators(D).P
    assert abs(moments.moment_by_derivative(states.vacuum_dm(D), A, n) - expected) < tol


@pytest.mark.parametrize("n", range(1, 7))
def test_stencil_weights_differentiate_monomials(n):
    k, w = moments._stencil(n)
    # the stencil applied to t^n at t=0 is n!; lower powers of matching parity vanish
    assert w @ k.astype(float) ** n == pytest.approx(math.factorial(n))
    for p in range(n - 1, -1, -2):
        assert w @ k.astype(float) ** p == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("n", range(1, 7))
def test_stencil_and_spectral_methods_agree(n):
    rho = states.gibbs_dm(2.0, D)
    A = 2 * moments.annihilation_observable(1 + 1j, D)
    h = 5e-2
    a = moments.moment_by_derivative(rho, A, n, h, method="stencil")
    b = moments.moment_by_derivative(rho, A, n, h, method="spectral")
    assert a == pytest.approx(b, rel=1e-6, abs=1e-6)


def test_derivative_full_output_and_errors():
    rho, A = states.gibbs_dm(2.0, D), 2 * canonical_operators(D).Q
    est = moments.moment_by_derivative(rho, A, 3, full_output=True)
    assert abs(est.imag_residue) < 1e-10
    with pytest.raises(DomainError):
        moments.moment_by_derivative(rho, A, 0)
    with pytest.raises(DomainError):
        moments.moment_by_derivative(rho, A, 2, -1.0)
    with pytest.raises(ValueError):
        moments.moment_by_derivative(rho, A, 2, method="other")


def test_derivative_warns_when_step_too_small():
    A = 2 * canonical_operators(D).P
    with pytest.warns(PrecisionWarning):
        moments.moment_by_derivative(states.vacuum_dm(D), A, 2, 1e-15)
    with warnings.catch_warnings():
        warnings.simplefilter("error", PrecisionWarning)
        moments.moment_by_derivative(states.vacuum_dm(D), A, 2)


@pytest.mark.parametrize("n", range(1, 7))
def test_yosida_matches_matrix_power(n):
    rho = states.gibbs_dm(1.0, D)
    A = 2 * moments.annihilation_observable(1, D)
    assert abs(moments.moment_by_yosida(rho, A, n) - direct_moment(rho, A, n)) < 1e-8


def test_yosida_identity_observable():
    est = moments.moment_by_yosida(states.gibbs_dm(1.0, D), np.eye(D), 1, full_output=True)
    eps = np.array(moments.DEFAULT_EPS)
    assert np.allclose(est.curve, 1 / (1 + 1j * eps))
    assert est.value == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 3, 5])
@pytest.mark.parametrize("z", DIRECTIONS)
def test_yosida_odd_moments_vanish_at_zero_mean(n, z):
    rho = states.squeezed_dm(0.3 * np.exp(0.4j), 0, D)
    A = 2 * moments.annihilation_observable(z, D)
    assert abs(moments.moment_by_yosida(rho, A, n)) < 1e-6


def test_matrix_form_of_yosida_agrees_with_eigen_route():
    rho = states.coherent_dm(0.3j, 30)
    A = 2 * moments.annihilation_observable(0.5 - 1j, 30)
    for eps in (1e-1, 1e-2):
        Y = moments.yosida(1j * A, eps)
        mat = ((-1j) ** 3 * np.trace(rho @ np.linalg.matrix_power(Y, 3)))
        est = moments.moment_by_yosida(rho, A, 3, moments.EpsSchedule((eps, eps / 2)), full_output=True)
        assert mat == pytest.approx(est.curve[0], abs=1e-12)


TEST_STATES = [
    ("vacuum", states.vacuum_dm(D), gaussian.vacuum()),
    ("gibbs2", states.gibbs_dm(2.0, D), gaussian.gibbs(2.0)),
    ("coherent", states.coherent_dm(0.5, D), gaussian.coherent(0.5)),
    ("squeezed", states.squeezed_dm(0.2 * np.exp(0.5j), 0.3 - 0.2j, D), gaussian.squeezed(0.2 * np.exp(0.5j), 0.3 - 0.2j)),
]


@pytest.mark.parametrize("name,rho,g", TEST_STATES, ids=[t[0] for t in TEST_STATES])
@pytest.mark.parametrize("z", [math.sqrt(2), 1j * math.sqrt(2), 1 + 1j, 2.0, -1.2 + 1.6j])
def test_three_route_agreement(name, rho, g, z):
    for row in moments.moment_report(rho, z, 6, g):
        assert max(row.discrepancies) < 1e-5


def test_moment_report_without_params_uses_recurrence():
    rho = states.fock_dm(1, D)
    rows = moments.moment_report(rho, math.sqrt(2), 4)
    # closed form is the Gaussian prediction (3 * 6^2 = 108); the matrix routes see 60
    assert rows[3].closed_form == pytest.approx(108.0)
    assert rows[3].yosida_value == pytest.approx(60.0, abs=1e-6)
    assert rows[3].derivative_value == pytest.approx(60.0, abs=1e-6)
    js = rows[0].to_json()
    assert set(js) == {"z", "n", "closed", "yosida", "derivative", "defects"}


def test_variance_and_uncertainty_vacuum():
    ops = canonical_operators(D)
    vac = states.vacuum_dm(D)
    assert moments.variance(vac, ops.P) == pytest.approx(0.5)
    assert moments.variance(vac, ops.Q) == pytest.approx(0.5)
    rep = moments.uncertainty_check(vac)
    assert rep.deviation_product == pytest.approx(0.5)
    assert rep.slack == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("rho", [states.vacuum_dm(D), states.gibbs_dm(2.0, D), states.gibbs_dm(0.5, D)])
def test_hs_ccr(rho):
    assert abs(moments.hs_ccr_check(rho) + 0.5) < 1e-8


def test_hs_ccr_truncation_defect():
    # the top level breaks the CCR by D * rho[D-1, D-1] / 2
    rho = np.full(6, 1 / 6)
    rho = np.diag(rho).astype(complex)
    assert moments.hs_ccr_check(rho) == pytest.approx(-0.5 * (1 - 6 / 6))


def test_uncertainty_gibbs():
    rep = moments.uncertainty_check(states.gibbs_dm(2.0, D))
    assert rep.product == pytest.approx((1 / math.tanh(1) / 2) ** 2, rel=1e-10)
    assert rep.slack > 0


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_uncertainty_slack_nonnegative_random_states(seed, rank):
    r = np.random.default_rng(seed)
    X = np.zeros((30, rank), dtype=complex)
    X[:12] = r.normal(size=(12, rank)) + 1j * r.normal(size=(12, rank))
    rho = X @ X.conj().T
    rho /= np.trace(rho).real
    assert moments.uncertainty_check(rho).slack >= -1e-9


def test_estimate_wS_examples():
    est = moments.estimate_wS(states.gibbs_dm(2.0, D))
    assert abs(est.w) < 1e-12 and np.allclose(est.S, np.eye(2) / math.tanh(1), atol=1e-6)
    est = moments.estimate_wS(states.coherent_dm(0.5, D))
    assert abs(est.w + 1j) < 1e-10 and np.allclose(est.S, np.eye(2), atol=1e-10)
    est = moments.estimate_wS(states.fock_dm(1, D))
    assert abs(est.w) < 1e-12 and np.allclose(est.S, 3 * np.eye(2))
    assert np.array_equal(est.S, est.S.T)


def test_gaussianity_test_verdicts():
    assert moments.gaussianity_test(states.gibbs_dm(2.0, D), DIRECTIONS).passed
    coh = moments.gaussianity_test(states.coherent_dm(0.5, D), DIRECTIONS)
    assert coh.passed and coh.params.isclose(gaussian.coherent(0.5), atol=1e-9)
    odd = [d["defect"] for d in coh.defects if d["n"] % 2 == 1]
    assert max(odd) < 1e-4
    fock = moments.gaussianity_test(states.fock_dm(1, D), DIRECTIONS)
    assert not fock.passed and fock.reason
    assert fock.defect(math.sqrt(2), 4) == pytest.approx(108 - 60)


def test_gaussianity_test_inputs():
    with pytest.raises(DomainError):
        moments.gaussianity_test(states.vacuum_dm(10), [], 4)
    with pytest.raises(DomainError):
        moments.gaussianity_test(states.vacuum_dm(10), [1], 3)
    # at dim 2 the truncated P^2, Q^2 are too small and the estimate is inadmissible
    psi = np.array([1.0, 1.0]) / math.sqrt(2)
    verdict = moments.gaussianity_test(np.outer(psi, psi).astype(complex), [1])
    assert not verdict.passed and "inadmissible" in verdict.reason


def test_sqrtm_psd_clips_rounding():
    rho = np.diag([1.0, -1e-17]).astype(complex)
    r = moments.sqrtm_psd(rho)
    assert np.isfinite(r).all() and np.allclose(r @ r, np.diag([1.0, 0.0]))
