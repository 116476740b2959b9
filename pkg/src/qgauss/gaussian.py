r"""Exact (w, S) calculus for one-mode Gaussian states.

A Gaussian state ``rho(w, S)`` is pinned down by its quantum Fourier transform

.. math::

    \mathcal F\rho(z) = \pi^{-1/2}\exp\!\big(-i(w,z) - \tfrac12 (z,Sz)\big),

where ``(z, u) = Re(conj(z) u)`` is the real inner product on C with
orthonormal basis ``{1, i}``.  ``w`` is kept as one complex number and ``S`` as
a real symmetric 2x2 matrix in that basis.  ``S`` follows the adjugate
convention: its off-diagonal entry carries the opposite sign to the usual
symmetrized P-Q covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InadmissibleCovarianceError, ShapeError

SYMMETRY_TOL = 1e-12
ADMISSIBILITY_TOL = 1e-9

# (n-1)!! for even n fits in int64 up to n = 34 (33!! ~ 6.3e18)
_EXACT_DF_LIMIT = 33


def sigma(z, u):
    """Standard symplectic form ``Im(conj(z) u)``."""
    return np.imag(np.conj(z) * u)


def real_ip(z, u):
    """Real inner product ``Re(conj(z) u)``."""
    return np.real(np.conj(z) * u)


def as_vec(z):
    """Complex number(s) as real 2-vectors ``(Re z, Im z)`` along the last axis."""
    z = np.asarray(z, dtype=complex)
    return np.stack([z.real, z.imag], axis=-1)


def as_complex(v):
    v = np.asarray(v, dtype=float)
    return v[..., 0] + 1j * v[..., 1]


def quad_form(S, z):
    """``(z, S z)`` for scalar or array ``z``."""
    v = as_vec(z)
    return np.einsum("...i,ij,...j->...", v, np.asarray(S, float), v)


def uncertainty_margin(S):
    """``(1,S1)(i,Si) - (1,Si)^2 - 1``; nonnegative for admissible covariances."""
    S = np.asarray(S, dtype=float)
    return float(S[0, 0] * S[1, 1] - S[0, 1] ** 2 - 1.0)


def is_admissible(S, tol=ADMISSIBILITY_TOL) -> bool:
    """``S - i Sigma >= 0``: positive diagonal and determinant at least one."""
    S = np.asarray(S, dtype=float)
    return bool(S[0, 0] > 0 and S[1, 1] > 0 and uncertainty_margin(S) >= -tol)


@dataclass(frozen=True)
class GaussianParams:
    """Mean value vector ``w`` and covariance ``S`` of a Gaussian state.

    Construction does not check admissibility; use :func:`make_gaussian` for
    validated input.  Estimated parameters of arbitrary states are also
    carried in this type.
    """

    w: complex
    S: np.ndarray

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        if S.shape != (2, 2):
            raise ShapeError(f"covariance must be 2x2, got shape {S.shape}")
        S.setflags(write=False)
        object.__setattr__(self, "w", complex(self.w))
        object.__setattr__(self, "S", S)

    @property
    def w_vec(self):
        return as_vec(self.w)

    def to_json(self):
        return {"w": [self.w.real, self.w.imag], "S": self.S.tolist()}

    @classmethod
    def from_json(cls, obj):
        re, im = obj["w"]
        return make_gaussian(complex(re, im), np.array(obj["S"], dtype=float))

    def isclose(self, other, atol=1e-12):
        return abs(self.w - other.w) <= atol and bool(np.allclose(self.S, other.S, rtol=0, atol=atol))


def make_gaussian(w, S) -> GaussianParams:
    """Validated constructor.

    Raises
    ------
    ShapeError
        ``S`` is not a symmetric 2x2 matrix.
    InadmissibleCovarianceError
        ``S`` violates ``(1,S1)(i,Si) >= (1,Si)^2 + 1`` (or is not positive).
    """
    S = np.asarray(S, dtype=float)
    if S.shape != (2, 2):
        raise ShapeError(f"covariance must be 2x2, got shape {S.shape}")
    if abs(S[0, 1] - S[1, 0]) > SYMMETRY_TOL:
        raise ShapeError("covariance matrix is not symmetric")
    S = 0.5 * (S + S.T)
    if not is_admissible(S):
        raise InadmissibleCovarianceError(
            f"(1,S1)(i,Si) - (1,Si)^2 = {S[0, 0] * S[1, 1] - S[0, 1] ** 2:.6g} < 1"
            if S[0, 0] > 0 and S[1, 1] > 0
            else "covariance diagonal must be positive"
        )
    return GaussianParams(w, S)


def char_fn(g: GaussianParams, z):
    """Closed-form quantum Fourier transform of ``rho(w, S)`` at ``z``."""
    z = np.asarray(z, dtype=complex)
    val = np.exp(-1j * real_ip(g.w, z) - 0.5 * quad_form(g.S, z)) / np.sqrt(np.pi)
    return complex(val) if val.ndim == 0 else val


# --- named states ---------------------------------------------------------


def vacuum() -> GaussianParams:
    return GaussianParams(0j, np.eye(2))


def gibbs(beta) -> GaussianParams:
    """Thermal state ``(1 - e^{-beta}) e^{-beta N}``: ``w = 0``, ``S = coth(beta/2) I``."""
    if not beta > 0:
        raise DomainError(f"inverse temperature must be positive, got {beta!r}")
    return GaussianParams(0j, np.eye(2) / math.tanh(0.5 * beta))


def coherent(u) -> GaussianParams:
    return apply_coherent(vacuum(), u)


def squeezed(zeta, u=0j) -> GaussianParams:
    """Squeezed coherent state ``S_zeta W_u |0><0| W_u^* S_zeta^*``."""
    return apply_squeeze(coherent(u), zeta)


# --- channels -------------------------------------------------------------


def apply_coherent(g: GaussianParams, u) -> GaussianParams:
    """Output of ``rho -> W_u rho W_u^*``: mean shifts by ``-2iu``."""
    return GaussianParams(g.w - 2j * complex(u), g.S)


def squeeze_u(zeta):
    """Real symmetric, unit-determinant matrix through which ``S_zeta`` acts.

    For ``zeta = r e^{i theta}`` it maps ``z -> z cosh r - conj(z) e^{i theta} sinh r``.
    """
    zeta = complex(zeta)
    r, theta = abs(zeta), np.angle(zeta)
    ch, sh = math.cosh(r), math.sinh(r)
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[ch - sh * c, -sh * s], [-sh * s, ch + sh * c]])


def apply_squeeze(g: GaussianParams, zeta) -> GaussianParams:
    U = squeeze_u(zeta)
    return GaussianParams(as_complex(U @ g.w_vec), U @ g.S @ U)


@dataclass(frozen=True)
class NoiseMatrix:
    """Covariance ``C`` and mean ``mu`` of the classical vector ``X = (-2y, 2x)``.

    ``x + iy`` is the random displacement of a bosonic Gaussian channel.
    """

    C: np.ndarray
    mu: np.ndarray = (0.0, 0.0)

    def __post_init__(self):
        C = np.array(self.C, dtype=float)
        mu = np.array(self.mu, dtype=float)
        if C.shape != (2, 2) or mu.shape != (2,):
            raise ShapeError("noise covariance must be 2x2 and its mean a 2-vector")
        if abs(C[0, 1] - C[1, 0]) > SYMMETRY_TOL:
            raise ShapeError("noise covariance is not symmetric")
        if np.linalg.eigvalsh(0.5 * (C + C.T)).min() < -SYMMETRY_TOL:
            raise DomainError("noise covariance is not positive semidefinite")
        C.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "mu", mu)


def apply_bosonic(g: GaussianParams, noise: NoiseMatrix) -> GaussianParams:
    """Output of ``rho -> E[W_z rho W_z^*]``: ``w - mu``, ``S + C``."""
    return GaussianParams(g.w - as_complex(noise.mu), g.S + noise.C)


def qms_noise(z):
    """Matrix ``C`` with ``(u, C u) = sigma(z, u)^2`` for ``z = r + is``."""
    z = complex(z)
    r, s = z.real, z.imag
    return np.array([[s * s, -r * s], [-r * s, r * r]])


def qms_evolve(g: GaussianParams, z, t) -> GaussianParams:
    """Brownian Weyl semigroup at time ``t``: ``S -> S + 4t C``, ``w`` unchanged.

    For ``z != 0`` and ``t > 0`` the added term is a nonzero PSD matrix, so
    ``S`` strictly grows and no Gaussian state is invariant.
    """
    if not t >= 0:
        raise DomainError(f"time must be nonnegative, got {t!r}")
    return GaussianParams(g.w, g.S + 4.0 * t * qms_noise(z))


# --- moments --------------------------------------------------------------


def double_factorial(k):
    """``k!!`` with ``(-1)!! = 0!! = 1``; exact integer while it fits in 64 bits."""
    if k <= 0:
        return 1
    if k <= _EXACT_DF_LIMIT:
        out = 1
        for j in range(k, 0, -2):
            out *= j
        return out
    # log-gamma route beyond the int64 boundary
    if k % 2:
        m = (k + 1) // 2
        return math.exp(math.lgamma(2 * m + 1) - m * math.log(2) - math.lgamma(m + 1))
    m = k // 2
    return math.exp(m * math.log(2) + math.lgamma(m + 1))


def central_moment(g: GaussianParams, z, n) -> float:
    """``<(2 sigma(z,a) - (w,z) I)^n>`` of a Gaussian state.

    Zero for odd ``n``; ``(z,Sz)^{n/2} (n-1)!!`` for even ``n``.
    """
    n = int(n)
    if n < 0:
        raise DomainError("moment order must be nonnegative")
    if n % 2:
        return 0.0
    return float(quad_form(g.S, z)) ** (n // 2) * double_factorial(n - 1)


def raw_moments(m1, m2, n_max):
    """Moments ``m_3 .. m_{n_max}`` from the first two, via the Gaussian recurrence.

    ``m_n = 1_even(n) (m2 - m1^2)^{n/2} (n-1)!! + sum_{k=1}^n (-1)^{k+1} C(n,k) m_{n-k} m1^k``
    with ``m_0 = 1``.  Returns an empty list when ``n_max < 3``.
    """
    var = m2 - m1 * m1
    if var < -1e-12 * max(1.0, abs(m2)):
        raise DomainError(f"m2 < m1^2 (variance {var:.3g})")
    var = max(var, 0.0)
    m = [1.0, float(m1), float(m2)]
    for n in range(3, int(n_max) + 1):
        val = var ** (n // 2) * double_factorial(n - 1) if n % 2 == 0 else 0.0
        for k in range(1, n + 1):
            val += (-1) ** (k + 1) * math.comb(n, k) * m[n - k] * m1**k
        m.append(val)
    return m[3:]


def gaussian_raw_moments(g: GaussianParams, z, n_max):
    """``[m_0, ..., m_{n_max}]`` with ``m_n = <(2 sigma(z,a))^n>`` of ``rho(w, S)``."""
    m1 = float(real_ip(g.w, z))
    m2 = float(quad_form(g.S, z)) + m1 * m1
    return ([1.0, m1, m2] + raw_moments(m1, m2, n_max))[: int(n_max) + 1]


def moment_generating(g: GaussianParams, z, t):
    """``exp((w,z) t + (z,Sz) t^2 / 2)``."""
    return np.exp(real_ip(g.w, z) * t + 0.5 * quad_form(g.S, z) * np.asarray(t) ** 2)


def mean_lm(g: GaussianParams):
    """Mean momentum ``l`` and position ``m`` from ``w = sqrt(2)(l - im)``."""
    return g.w.real / math.sqrt(2), -g.w.imag / math.sqrt(2)


def variance_P(g: GaussianParams) -> float:
    return 0.5 * float(g.S[0, 0])


def variance_Q(g: GaussianParams) -> float:
    return 0.5 * float(g.S[1, 1])


def uncertainty_product(g: GaussianParams) -> float:
    """``V(P) V(Q)``; at least 1/2 for admissible ``S``."""
    return math.sqrt(variance_P(g) * variance_Q(g))
