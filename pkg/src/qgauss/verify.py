"""Self-verification suites behind ``qgauss verify``.

Each check measures a nonnegative defect and compares it with a threshold;
thresholds are collected in :data:`TOLERANCES` and multiplied by
``tol_scale``, except for the pass/fail-shaped checks in :data:`UNSCALED`.
Reports hold no timings, so equal inputs give equal bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fock, fourier, gaussian, moments, qms, states
from .gaussian import sigma

SUITES = ("fock", "fourier", "moments", "qms")

TOLERANCES = {
    "fock": {
        "ladder_commutator": 1e-12,
        "weyl_unitary": 1e-12,
        "squeeze_unitary": 1e-12,
        "weyl_ccr_quarter": 1e-6,
        "weyl_ccr_monotone": 1.0,
        "coherent_overlap": 1e-10,
        "weyl_vacuum_coherent": 1e-10,
        "grid_apply": 1e-6,
    },
    "fourier": {
        "qft_vacuum": 1e-8,
        "qft_gibbs": 1e-6,
        "qft_properties": 1e-8,
        "inversion": 1e-3,
        "parseval": 1e-6,
        "completeness": 1e-6,
        "kb_orthonormality": 1e-6,
        "purity_gap": 1e-12,
    },
    "moments": {
        "three_route": 1e-4,
        "gaussianity_pass": 1e-4,
        "gaussianity_fail": 1.0,
        "hs_ccr": 1e-8,
        "uncertainty_slack": 1e-9,
        "estimate_gibbs": 1e-6,
    },
    "qms": {
        "vacuum_probe": 3.0,
        "covariance": 3.0,
        "semigroup": 3.0,
        "bosonic_covariance": 3.0,
        "trace_preservation": 1e-10,
    },
}

UNSCALED = {"weyl_ccr_monotone", "purity_gap", "gaussianity_fail"}


@dataclass(frozen=True)
class Check:
    id: str
    defect: float
    threshold: float

    @property
    def passed(self):
        return bool(self.defect < self.threshold)


@dataclass
class VerifyReport:
    suite: str
    dim: int
    seed: int
    tol_scale: float
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_json(self):
        return {
            "suite": self.suite,
            "dim": self.dim,
            "seed": self.seed,
            "tol_scale": self.tol_scale,
            "checks": [
                {"id": c.id, "defect": float(c.defect), "threshold": float(c.threshold), "pass": c.passed}
                for c in self.checks
            ],
            "pass": self.passed,
        }


class _Collector:
    def __init__(self, suite, tol_scale):
        self.suite, self.scale, self.checks = suite, tol_scale, []

    def add(self, name, defect):
        tol = TOLERANCES[self.suite][name] * (1.0 if name in UNSCALED else self.scale)
        self.checks.append(Check(f"{self.suite}.{name}", float(defect), tol))


def _random_pairs(rng, k, radius=1.0):
    r = radius * np.sqrt(rng.uniform(0, 1, (k, 2)))
    ph = rng.uniform(0, 2 * np.pi, (k, 2))
    z = r * np.exp(1j * ph)
    return z[:, 0], z[:, 1]


def weyl_ccr_defect(dim, pairs, cols=None):
    """Largest ``||(W_z W_z' - e^{-i sigma(z,z')} W_{z+z'}) e_k||`` block norm over ``pairs``."""
    cols = dim // 2 if cols is None else cols
    worst = 0.0
    for z, w in zip(*pairs):
        D = fock.weyl_matrix(z, dim) @ fock.weyl_matrix(w, dim)
        D -= np.exp(-1j * sigma(z, w)) * fock.weyl_matrix(z + w, dim)
        worst = max(worst, np.linalg.norm(D[:, :cols], 2))
    return float(worst)


def suite_fock(dim, rng, tol_scale=1.0):
    c = _Collector("fock", tol_scale)
    a, ad = fock.ladder(dim)
    target = np.eye(dim)
    target[-1, -1] = 1 - dim
    c.add("ladder_commutator", np.abs(a @ ad - ad @ a - target).max())
    zs = rng.uniform(-1, 1, 4) + 1j * rng.uniform(-1, 1, 4)
    I = np.eye(dim)
    c.add("weyl_unitary", max(np.abs(W.conj().T @ W - I).max() for W in map(lambda z: fock.weyl_matrix(z, dim), zs)))
    c.add("squeeze_unitary", max(np.abs(U.conj().T @ U - I).max()
                                 for U in map(lambda z: fock.squeeze_matrix(0.5 * z, dim), zs)))
    pairs = _random_pairs(rng, 10)
    c.add("weyl_ccr_quarter", weyl_ccr_defect(dim, pairs, dim // 4))
    half, full = weyl_ccr_defect(dim // 2, pairs), weyl_ccr_defect(dim, pairs)
    c.add("weyl_ccr_monotone", full / half if half > 0 else 0.0)
    z, w = pairs[0][0], pairs[1][0]
    ov = np.vdot(fock.coherent_vector(z, dim), fock.coherent_vector(w, dim))
    c.add("coherent_overlap", abs(ov - np.exp(-0.5 * (abs(z) ** 2 + abs(w) ** 2) + np.conj(z) * w)))
    c.add("weyl_vacuum_coherent", np.abs(fock.weyl_matrix(z, dim)[:, 0] - fock.coherent_vector(z, dim)).max())
    grid = fock.RealGrid.uniform(-8, 8, 321)
    coeffs = np.zeros(dim, dtype=complex)
    coeffs[: min(4, dim)] = rng.normal(size=min(4, dim))
    coeffs /= np.linalg.norm(coeffs)
    direct = fock.weyl_grid_apply(z, coeffs, grid)
    via_matrix = fock.evaluate(fock.weyl_matrix(z, dim) @ coeffs, grid)
    c.add("grid_apply", np.abs(direct - via_matrix).max())
    return c.checks


def suite_fourier(dim, rng, tol_scale=1.0):
    c = _Collector("fourier", tol_scale)
    zs = rng.uniform(-1.4, 1.4, 25) + 1j * rng.uniform(-1.4, 1.4, 25)
    vac = states.vacuum_dm(dim)
    c.add("qft_vacuum", np.abs(fourier.qft(vac, zs) - np.exp(-0.5 * np.abs(zs) ** 2) / fourier.SQRT_PI).max())
    worst = 0.0
    for beta in (1.0, 2.0):
        F = fourier.qft(states.gibbs_dm(beta, dim), zs)
        G = gaussian.char_fn(gaussian.gibbs(beta), zs)
        worst = max(worst, np.abs(F - G).max())
    c.add("qft_gibbs", worst)
    c.add("qft_properties", fourier.qft_properties_check(states.gibbs_dm(1.0, dim), 0.3, 0.2j)["max"])
    grid = fourier.QuadratureGrid.default()
    test_states = [vac, states.fock_dm(1, dim), states.gibbs_dm(2.0, dim)]
    c.add("inversion", max(fourier.inversion_error(r, grid) for r in test_states))
    c.add("parseval", max(fourier.parseval_check(r, r, grid).defect for r in test_states))
    e0 = np.eye(dim)[0]
    c.add("completeness", fourier.completeness_check(e0, grid, e0, e0))
    c.add("kb_orthonormality", max(fourier.kb_onb_check(j, k, grid) for j, k in ((0, 0), (0, 1), (2, 2))))
    # pure states have purity 1, gibbs(1) well below 0.95
    pure = fourier.purity(states.coherent_dm(0.5, dim), grid)
    mixed = fourier.purity(states.gibbs_dm(1.0, dim), grid)
    c.add("purity_gap", max(0.0, 0.999 - pure) + max(0.0, mixed - 0.95))
    return c.checks


def suite_moments(dim, rng, tol_scale=1.0):
    c = _Collector("moments", tol_scale)
    directions = (math.sqrt(2), 1j * math.sqrt(2), 1 + 1j)
    cases = [(states.gibbs_dm(2.0, dim), gaussian.gibbs(2.0)), (states.coherent_dm(0.5, dim), gaussian.coherent(0.5))]
    worst = 0.0
    for rho, g in cases:
        for z in directions:
            worst = max(worst, max(max(r.discrepancies) for r in moments.moment_report(rho, z, 6, g)))
    c.add("three_route", worst)
    c.add("gaussianity_pass", max(moments.gaussianity_test(rho, directions).max_defect for rho, _ in cases))
    fail = moments.gaussianity_test(states.fock_dm(1, dim), directions)
    # the Fock state must fail, with a 4th-moment defect beyond 10x the pass tolerance
    excess = fail.defect(math.sqrt(2), 4) / (10 * TOLERANCES["moments"]["gaussianity_pass"] * tol_scale)
    c.add("gaussianity_fail", math.inf if fail.passed else 1.0 / excess)
    c.add("hs_ccr", max(abs(moments.hs_ccr_check(r) + 0.5) for r in (states.vacuum_dm(dim), states.gibbs_dm(2.0, dim))))
    probe_states = [states.vacuum_dm(dim), states.fock_dm(1, dim), states.gibbs_dm(1.0, dim),
                    states.squeezed_dm(0.3 * np.exp(0.7j), 0.4 - 0.2j, dim)]
    c.add("uncertainty_slack", max(0.0, max(-moments.uncertainty_check(r).slack for r in probe_states)))
    est = moments.estimate_wS(states.gibbs_dm(2.0, dim))
    c.add("estimate_gibbs", max(abs(est.w), np.abs(est.S - gaussian.gibbs(2.0).S).max()))
    return c.checks


def suite_qms(dim, rng, tol_scale=1.0, samples=10_000):
    c = _Collector("qms", tol_scale)
    seed = int(rng.integers(0, 2**63))
    vac = states.vacuum_dm(dim)
    r = qms.qms_mc(vac, qms.McConfig(samples, seed, 0.25, 1.0, probes=(1j,)))
    p = r.probe(1j)
    predicted = np.exp(-2 * 0.25 * gaussian.quad_form(gaussian.qms_noise(1.0), 1j)) * fourier.qft(vac, 1j)
    c.add("vacuum_probe", qms.max_zscore(p.est, predicted, p.stderr))
    worst, trace = 0.0, r.trace_defect
    for k, (rho, g, z, t) in enumerate([
        (vac, gaussian.vacuum(), 1.0, 0.25),
        (states.gibbs_dm(2.0, dim), gaussian.gibbs(2.0), 1 + 1j, 0.1),
    ]):
        res = qms.qms_mc(rho, qms.McConfig(samples, seed + k + 1, t, z))
        worst = max(worst, qms.max_zscore(res.params.S, gaussian.qms_evolve(g, z, t).S, res.S_stderr))
        trace = max(trace, res.trace_defect)
    c.add("covariance", worst)
    c.add("semigroup", qms.semigroup_mc_check(vac, 1.0, 0.1, 0.1, qms.McConfig(samples, seed + 10)))
    b = qms.bosonic_mc(vac, (0.0, 0.0), np.eye(2), samples // 4, seed + 20)
    c.add("bosonic_covariance", qms.max_zscore(b.params.S, 2 * np.eye(2), b.S_stderr))
    c.add("trace_preservation", max(trace, b.trace_defect))
    return c.checks


_RUNNERS = {"fock": suite_fock, "fourier": suite_fourier, "moments": suite_moments, "qms": suite_qms}


def run_suite(suite, dim=60, tol_scale=1.0, seed=0) -> VerifyReport:
    """Run one suite (or ``"all"``) and collect the checks in a report."""
    dim = fock.check_dim(dim)
    if suite != "all" and suite not in _RUNNERS:
        raise ValueError(f"unknown suite {suite!r}")
    if not tol_scale > 0:
        raise ValueError("tol_scale must be positive")
    names = SUITES if suite == "all" else (suite,)
    report = VerifyReport(suite, dim, int(seed), float(tol_scale))
    for k, name in enumerate(names):
        rng = np.random.default_rng([int(seed), k])
        report.checks.extend(_RUNNERS[name](dim, rng, tol_scale))
    return report
