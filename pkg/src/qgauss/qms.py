r"""Monte Carlo realization of bosonic Gaussian channels and the Brownian Weyl semigroup.

``T_t^z(rho) = E[W_{x z} rho W_{x z}^*]`` with ``x ~ N(0, t)``, and the general
channel ``E[W_z rho W_z^*]`` with ``X = (-2y, 2x) ~ N(mu, C)`` for ``z = x + iy``.

Sample ``j`` draws its normals from a Philox stream seeded by ``(seed, j)``,
so results do not depend on evaluation order or chunking.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import gaussian
from .errors import DomainError, TailClipWarning
from .fock import canonical_operators, squeeze_matrix, weyl_family
from .fourier import SQRT_PI
from .gaussian import GaussianParams, NoiseMatrix
from .moments import annihilation_observable
from .serialize import operator_to_json
from .states import as_density_matrix

DEFAULT_PROBES = (1.0 + 0j, 1j, (1 + 1j) / math.sqrt(2), 0.5 + 0j)
CLIP_FRACTION = 1e-3
_CHUNK = 512
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class McConfig:
    samples: int
    seed: int = 0
    t: float = 0.0
    z: complex = 0j
    probes: tuple = DEFAULT_PROBES

    def __post_init__(self):
        if isinstance(self.samples, bool) or int(self.samples) != self.samples or self.samples < 1:
            raise DomainError(f"samples must be a positive integer, got {self.samples!r}")
        if not self.t >= 0:
            raise DomainError(f"time must be nonnegative, got {self.t!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed <= _SEED_MASK:
            raise DomainError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "probes", tuple(complex(u) for u in self.probes))


@dataclass(frozen=True)
class Probe:
    u: complex
    est: complex
    stderr: float


@dataclass
class McResult:
    """Averaged output state, characteristic-function probes and moment statistics.

    ``params`` is the ``(w, S)`` estimate from per-sample first and second
    moments of ``P`` and ``Q``; ``S_stderr`` holds delta-method standard errors
    of its entries.
    """

    rho: np.ndarray
    probes: list
    clipped: int
    samples: int
    params: GaussianParams
    S_stderr: np.ndarray
    trace_defect: float = 0.0
    extra: dict = field(default_factory=dict)

    def probe(self, u) -> Probe:
        for p in self.probes:
            if abs(p.u - complex(u)) < 1e-12:
                return p
        raise KeyError(u)

    def to_json(self):
        return {
            "rho": operator_to_json(self.rho),
            "probes": [{"u": [p.u.real, p.u.imag], "est": [p.est.real, p.est.imag], "stderr": p.stderr}
                       for p in self.probes],
            "clipped": self.clipped,
        }


def normals(seed, j, k=1):
    """``k`` standard normals from the stream of sample ``j``."""
    ss = np.random.SeedSequence([int(seed) & _SEED_MASK, int(j)])
    return np.random.Generator(np.random.Philox(ss)).standard_normal(k)


def _draws(seed, samples, k):
    return np.stack([normals(seed, j, k) for j in range(samples)])


def _count_clips(disp, dim, samples):
    clipped = int(np.sum(np.abs(disp) > 0.4 * math.sqrt(dim)))
    if clipped > CLIP_FRACTION * samples:
        warnings.warn(f"{clipped} of {samples} displacements exceed 0.4*sqrt(dim)", TailClipWarning, stacklevel=3)
    return clipped


def _moment_ops(dim):
    ops = canonical_operators(dim)
    P, Q = ops.P, ops.Q
    D = P - Q
    return [P, Q, P @ P, Q @ Q, D @ D]


def _params_from_moments(vals):
    """``(w, S)`` and delta-method standard errors from per-sample ``(P, Q, P^2, Q^2, (P-Q)^2)``."""
    n = vals.shape[0]
    mean = vals.mean(axis=0)
    cov = np.atleast_2d(np.cov(vals, rowvar=False)) if n > 1 else np.zeros((5, 5))
    l, m, pp, qq, dd = mean
    S = np.array([[2 * (pp - l * l), dd - pp - qq + 2 * l * m], [0.0, 2 * (qq - m * m)]])
    S[1, 0] = S[0, 1]
    grads = {
        (0, 0): [-4 * l, 0, 2, 0, 0],
        (1, 1): [0, -4 * m, 0, 2, 0],
        (0, 1): [2 * m, 2 * l, -1, -1, 1],
    }
    se = np.zeros((2, 2))
    for (i, k), g in grads.items():
        g = np.asarray(g, dtype=float)
        se[i, k] = se[k, i] = math.sqrt(max(g @ cov @ g, 0.0) / n)
    return GaussianParams(math.sqrt(2) * complex(l, -m), S), se


def _finish(rho_sum, samples):
    rho = rho_sum / samples
    rho = 0.5 * (rho + rho.conj().T)
    defect = abs(np.trace(rho).real - 1.0)
    return rho / np.trace(rho).real, defect


def _probe_list(us, vals):
    out = []
    n = vals.shape[0]
    for k, u in enumerate(us):
        col = vals[:, k]
        se = math.sqrt((col.real.var(ddof=1) + col.imag.var(ddof=1)) / n) if n > 1 else 0.0
        out.append(Probe(u, complex(col.mean()), se))
    return out


def max_zscore(est, exact, stderr, atol=1e-10):
    """Largest ``|est - exact| / stderr`` over entries.

    Differences below ``atol`` count as zero, since entries the noise does not
    touch carry rounding-level standard errors.
    """
    diff = np.abs(np.asarray(est) - np.asarray(exact))
    diff = np.where(diff < atol, 0.0, diff)
    se = np.asarray(stderr, dtype=float)
    safe = np.where(se > 0, se, 1.0)
    return float(np.max(np.where(diff == 0, 0.0, np.where(se > 0, diff / safe, np.inf))))


def qms_mc(rho, cfg: McConfig) -> McResult:
    """Monte Carlo average of ``W_{x_j z} rho W_{x_j z}^*`` with ``x_j ~ N(0, t)``.

    All displacements lie on the line through ``z``, so with
    ``W_{xz} = R V e^{-i x|z| mu} V^* R^*`` (see :class:`qgauss.fock.WeylFamily`)
    the average reduces to a Hadamard product with the mean phase matrix.
    Per-sample values of probes and moments come from the same factorization.
    """
    rho = as_density_matrix(rho)
    dim = rho.shape[0]
    n = cfg.samples
    x = math.sqrt(cfg.t) * _draws(cfg.seed, n, 1)[:, 0]
    clipped = _count_clips(x * abs(cfg.z), dim, n)

    fam = weyl_family(dim)
    R = np.exp(1j * np.angle(cfg.z) * np.arange(dim))
    RV = R[:, None] * fam.V
    B = RV.conj().T @ rho @ RV
    E = np.exp(-1j * np.outer(x * abs(cfg.z), fam.mu))

    M = E.T @ E.conj()
    rho_out, defect = _finish(RV @ (B * M) @ RV.conj().T, n)

    def per_sample(O):
        K = RV.conj().T @ O @ RV
        return np.sum((E @ (B * K.T)) * E.conj(), axis=1)

    probe_vals = np.stack([per_sample(fam.matrix(u)) / SQRT_PI for u in cfg.probes], axis=1)
    mom_vals = np.stack([per_sample(O).real for O in _moment_ops(dim)], axis=1)
    params, se = _params_from_moments(mom_vals)
    return McResult(rho_out, _probe_list(cfg.probes, probe_vals), clipped, n, params, se, defect)


def _displacements(mu, C, seed, samples):
    lam, V = np.linalg.eigh(np.asarray(C, dtype=float))
    L = V * np.sqrt(np.clip(lam, 0, None))
    X = np.asarray(mu, dtype=float) + _draws(seed, samples, 2) @ L.T
    # X = (-2y, 2x)
    return X[:, 1] / 2 - 1j * X[:, 0] / 2


def bosonic_mc(rho, mu, C, samples, seed=0, probes=DEFAULT_PROBES) -> McResult:
    """Monte Carlo average of ``W_z rho W_z^*`` with ``X = (-2y, 2x) ~ N(mu, C)``.

    ``C`` may be a :class:`NoiseMatrix`, whose own mean then replaces ``mu``.
    Raises :class:`DomainError` if ``C`` is not PSD.
    """
    noise = C if isinstance(C, NoiseMatrix) else NoiseMatrix(C, mu)
    cfg = McConfig(samples, seed, probes=probes)
    rho = as_density_matrix(rho)
    dim = rho.shape[0]
    zs = _displacements(noise.mu, noise.C, cfg.seed, cfg.samples)
    clipped = _count_clips(zs, dim, cfg.samples)
    fam = weyl_family(dim)
    W_u = np.stack([fam.matrix(u) for u in cfg.probes])
    ops = np.stack(_moment_ops(dim))
    acc = np.zeros((dim, dim), dtype=complex)
    probe_vals, mom_vals = [], []
    for start in range(0, cfg.samples, _CHUNK):
        out = fam.conjugate(rho, zs[start:start + _CHUNK])
        acc += out.sum(axis=0)
        probe_vals.append(np.einsum("nab,kba->nk", out, W_u) / SQRT_PI)
        mom_vals.append(np.einsum("nab,kba->nk", out, ops).real)
    rho_out, defect = _finish(acc, cfg.samples)
    params, se = _params_from_moments(np.concatenate(mom_vals))
    return McResult(rho_out, _probe_list(cfg.probes, np.concatenate(probe_vals)), clipped,
                    cfg.samples, params, se, defect)


def semigroup_mc_check(rho, z, t1, t2, cfg: McConfig) -> float:
    """Largest probe discrepancy between ``T_{t1+t2}`` and ``T_{t2} T_{t1}``, in standard errors.

    Each of the three Monte Carlo runs uses its own seed derived from ``cfg.seed``.
    The composed route's error includes first-stage noise carried through the
    second stage.
    """
    if not (t1 >= 0 and t2 >= 0):
        raise DomainError("times must be nonnegative")

    def run(t, state, k):
        c = McConfig(cfg.samples, (cfg.seed + k) & _SEED_MASK, t, z, cfg.probes)
        return qms_mc(state, c)

    direct = run(t1 + t2, rho, 0)
    mid = run(t1, rho, 1)
    composed = run(t2, mid.rho, 2)
    worst = 0.0
    for pd, pm, pc in zip(direct.probes, mid.probes, composed.probes):
        gain = abs(pc.est / pm.est) if abs(pm.est) > 1e-12 else 1.0
        se = math.sqrt(pd.stderr**2 + pc.stderr**2 + (gain * pm.stderr) ** 2)
        diff = abs(pd.est - pc.est)
        if diff <= 1e-13:
            continue
        worst = max(worst, diff / se if se > 0 else math.inf)
    return worst


# --- deterministic matrix-level channels ---------------------------------


def qms_exact(rho, z, t):
    """Exact ``T_t^z`` on the truncated matrix.

    In the eigenbasis of ``sigma(z, a)`` (eigenvalues ``lam``) the semigroup
    damps ``rho_mn`` by ``exp(-2t (lam_m - lam_n)^2)``.
    """
    if not t >= 0:
        raise DomainError(f"time must be nonnegative, got {t!r}")
    rho = np.asarray(rho, dtype=complex)
    lam, V = np.linalg.eigh(annihilation_observable(z, rho.shape[0]))
    B = V.conj().T @ rho @ V
    d = lam[:, None] - lam[None, :]
    return V @ (B * np.exp(-2.0 * t * d * d)) @ V.conj().T


def bosonic_quadrature(rho, noise: NoiseMatrix, order=24):
    """``E[W_z rho W_z^*]`` by tensor Gauss-Hermite quadrature over the noise."""
    rho = np.asarray(rho, dtype=complex)
    x, w = np.polynomial.hermite_e.hermegauss(order)
    w = w / w.sum()
    lam, V = np.linalg.eigh(noise.C)
    L = V * np.sqrt(np.clip(lam, 0, None))
    xi = np.stack(np.meshgrid(x, x, indexing="ij"), axis=-1).reshape(-1, 2)
    weights = np.outer(w, w).ravel()
    X = noise.mu + xi @ L.T
    zs = X[:, 1] / 2 - 1j * X[:, 0] / 2
    out = weyl_family(rho.shape[0]).conjugate(rho, zs)
    return np.einsum("n,nab->ab", weights, out)


def apply_channel_matrix(rho, name, params):
    """Matrix-level counterpart of the ``(w, S)`` channel laws.

    ``name`` is one of ``coherent`` (``u``), ``squeeze`` (``zeta``),
    ``bosonic`` (``noise``) or ``qms`` (``z``, ``t``).
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    if name == "coherent":
        W = weyl_family(dim).matrix(params["u"])
        return W @ rho @ W.conj().T
    if name == "squeeze":
        U = squeeze_matrix(params["zeta"], dim)
        return U @ rho @ U.conj().T
    if name == "bosonic":
        return bosonic_quadrature(rho, params["noise"])
    if name == "qms":
        return qms_exact(rho, params["z"], params["t"])
    raise ValueError(f"unknown channel {name!r}")


def apply_channel_exact(g: GaussianParams, name, params) -> GaussianParams:
    if name == "coherent":
        return gaussian.apply_coherent(g, params["u"])
    if name == "squeeze":
        return gaussian.apply_squeeze(g, params["zeta"])
    if name == "bosonic":
        return gaussian.apply_bosonic(g, params["noise"])
    if name == "qms":
        return gaussian.qms_evolve(g, params["z"], params["t"])
    raise ValueError(f"unknown channel {name!r}")
