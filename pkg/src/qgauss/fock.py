r"""Truncated Fock-space matrices for the one-mode CCR.

Everything lives in the number basis :math:`\{\varphi_0, \dots, \varphi_{D-1}\}`
of Hermite functions.  Operators are plain ``(D, D)`` complex arrays and
vectors are length-``D`` complex arrays; the truncation level ``D`` is read
off the shape.

Conventions::

    a phi_k      = sqrt(k) phi_{k-1}
    Q = (a^+ + a)/sqrt(2),   P = i(a^+ - a)/sqrt(2)
    W_z          = exp(z a^+ - conj(z) a)
    S_zeta       = exp((zeta a^+^2 - conj(zeta) a^2)/2)

Truncation only corrupts the top few levels, so identities are checked on the
"low block" (the first half of the basis) by the test-suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import gammainc

from .errors import InvalidDimensionError, ShapeError

DEFAULT_DIM = 60

_PI_QUARTER = np.pi ** -0.25


def check_dim(dim) -> int:
    """Validate a truncation level and return it as ``int``."""
    if isinstance(dim, bool) or int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"truncation level must be an integer >= 2, got {dim!r}")
    return int(dim)


def ladder(dim):
    """Truncated annihilation and creation operators.

    Parameters
    ----------
    dim : int
        Truncation level ``D >= 2``.

    Returns
    -------
    a, a_dag : ndarray
        ``a[k-1, k] = sqrt(k)``; ``a_dag`` is the conjugate transpose.
        ``a_dag`` drops the image of the top level.
    """
    dim = check_dim(dim)
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    return a, a.conj().T


class CanonicalOperators(NamedTuple):
    Q: np.ndarray
    P: np.ndarray
    N: np.ndarray
    H: np.ndarray


def canonical_operators(dim) -> CanonicalOperators:
    """Position, momentum, number and oscillator Hamiltonian, truncated."""
    a, ad = ladder(dim)
    Q = (ad + a) / np.sqrt(2)
    P = 1j * (ad - a) / np.sqrt(2)
    N = np.diag(np.arange(dim, dtype=float)).astype(complex)
    H = N + 0.5 * np.eye(dim)
    return CanonicalOperators(Q, P, N, H)


def coherent_vector(z, dim):
    r"""Number-basis coefficients of :math:`\psi_z`, truncated to ``dim`` levels.

    ``coeffs[k] = exp(-|z|^2/2) z^k / sqrt(k!)``, built by the ratio
    ``z / sqrt(k)`` so no factorial is ever formed.
    """
    dim = check_dim(dim)
    z = complex(z)
    out = np.empty(dim, dtype=complex)
    out[0] = np.exp(-0.5 * abs(z) ** 2)
    for k in range(1, dim):
        out[k] = out[k - 1] * z / np.sqrt(k)
    return out


def coherent_tail_mass(z, dim) -> float:
    """Probability weight of :math:`\\psi_z` above the truncation, ``1 - ||psi||^2``.

    Evaluated as a regularized incomplete gamma function, which does not
    suffer the cancellation of ``1 - sum |c_k|^2``.
    """
    dim = check_dim(dim)
    x = abs(complex(z)) ** 2
    if x == 0.0:
        return 0.0
    return float(gammainc(dim, x))


def _expm_skew(G):
    # exp(G) for skew-Hermitian G through the Hermitian matrix iG
    lam, V = np.linalg.eigh(1j * G)
    return (V * np.exp(-1j * lam)) @ V.conj().T


def weyl_matrix(z, dim):
    """Truncated Weyl (displacement) operator ``exp(z a^+ - conj(z) a)``.

    The generator is exponentiated through a Hermitian eigendecomposition, so
    the result is unitary to machine precision.
    """
    a, ad = ladder(dim)
    z = complex(z)
    if z == 0:
        return np.eye(a.shape[0], dtype=complex)
    return _expm_skew(z * ad - np.conj(z) * a)


def squeeze_matrix(zeta, dim):
    """Truncated squeezing operator ``exp((zeta a^+^2 - conj(zeta) a^2)/2)``."""
    a, ad = ladder(dim)
    zeta = complex(zeta)
    if zeta == 0:
        return np.eye(a.shape[0], dtype=complex)
    return _expm_skew(0.5 * (zeta * ad @ ad - np.conj(zeta) * a @ a))


def ccr_defect(dim):
    """``[a, a^+] - I``; zero except the last diagonal entry, which is ``-dim``."""
    a, ad = ladder(dim)
    return a @ ad - ad @ a - np.eye(dim)


class WeylFamily:
    r"""All truncated Weyl operators of one truncation level at once.

    Writing ``z = r e^{i phi}``, the truncated operator factors exactly as
    ``W_z = R_phi exp(r(a^+ - a)) R_phi^*`` with ``R_phi = e^{i phi N}``, and
    ``exp(r(a^+ - a)) = V e^{-i r mu} V^*`` where ``(mu, V)`` diagonalize
    ``sqrt(2) P``.  One eigendecomposition therefore serves every ``z``, which
    is what makes phase-plane quadratures over ~10^4 nodes affordable.

    Use :func:`weyl_family` to get a cached instance.
    """

    def __init__(self, dim):
        self.dim = check_dim(dim)
        a, ad = ladder(self.dim)
        self.mu, self.V = np.linalg.eigh(1j * (ad - a))
        self._levels = np.arange(self.dim)
        self._offsets = np.arange(-self.dim + 1, self.dim)

    def _polar(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
        return np.abs(z), np.angle(z)

    def matrices(self, z):
        """Stack of ``W_z`` for a 1-d array of ``z``; shape ``(n, D, D)``."""
        r, phi = self._polar(z)
        R = np.exp(1j * phi[:, None] * self._levels[None, :])
        E = np.exp(-1j * r[:, None] * self.mu[None, :])
        core = np.einsum("am,nm,bm->nab", self.V, E, self.V.conj(), optimize=True)
        return R[:, :, None] * core * R.conj()[:, None, :]

    def matrix(self, z):
        return self.matrices(z)[0]

    def _diagonal_profile(self, M):
        # G[d, m] = sum_{a-b=d} M[a, b] V[a, m] conj(V[b, m])
        X = M[:, :, None] * self.V[:, None, :] * self.V.conj()[None, :, :]
        return np.stack([np.diagonal(X, offset=-d, axis1=0, axis2=1).sum(axis=-1) for d in self._offsets])

    def trace(self, rho, z):
        """``tr(rho W_z)`` for every entry of ``z`` (any shape)."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise ShapeError(f"expected a {self.dim}x{self.dim} operator, got {rho.shape}")
        zz = np.asarray(z, dtype=complex)
        r, phi = self._polar(zz)
        G = self._diagonal_profile(rho.T)
        out = np.empty(r.shape, dtype=complex)
        for sl in _chunks(r.size, 8192):
            E = np.exp(-1j * r[sl, None] * self.mu[None, :])
            phase = np.exp(1j * phi[sl, None] * self._offsets[None, :])
            out[sl] = np.sum(phase * (E @ G.T), axis=1)
        return out.reshape(zz.shape)

    def combine(self, coeffs, z):
        """``sum_j coeffs[j] W_{z_j}`` as a single ``(D, D)`` matrix."""
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel()
        r, phi = self._polar(z)
        K = np.zeros((self._offsets.size, self.dim), dtype=complex)
        for sl in _chunks(r.size, 8192):
            E = np.exp(-1j * r[sl, None] * self.mu[None, :])
            phase = np.exp(1j * phi[sl, None] * self._offsets[None, :])
            K += (phase * c[sl, None]).T @ E
        d = self._levels[:, None] - self._levels[None, :]
        Kab = K[d + self.dim - 1]
        return np.einsum("am,bm,abm->ab", self.V, self.V.conj(), Kab, optimize=True)

    def amplitudes(self, u, f, z):
        """``<u, W_z f>`` for every entry of ``z``."""
        u = np.asarray(u, dtype=complex)
        f = np.asarray(f, dtype=complex)
        r, phi = self._polar(z)
        out = np.empty(r.size, dtype=complex)
        for sl in _chunks(r.size, 8192):
            Rc = np.exp(-1j * phi[sl, None] * self._levels[None, :])
            fu = (Rc * f[None, :]) @ self.V.conj()
            uu = (Rc * u[None, :]) @ self.V.conj()
            E = np.exp(-1j * r[sl, None] * self.mu[None, :])
            out[sl] = np.sum(uu.conj() * E * fu, axis=1)
        return out.reshape(np.shape(z))

    def conjugate(self, rho, z):
        """Stack of ``W_z rho W_z^*``; shape ``(n, D, D)``."""
        W = self.matrices(z)
        return W @ np.asarray(rho, dtype=complex)[None] @ np.conj(np.swapaxes(W, 1, 2))


@lru_cache(maxsize=16)
def weyl_family(dim) -> WeylFamily:
    return WeylFamily(dim)


def _chunks(n, size):
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


# --- position-space route -------------------------------------------------


@dataclass(frozen=True)
class RealGrid:
    """Sampling of the real line with quadrature weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).ravel()
        wts = np.asarray(self.weights, dtype=float).ravel()
        if pts.size == 0 or pts.shape != wts.shape:
            raise ShapeError("grid points and weights must be nonempty and of equal length")
        if np.any(np.diff(pts) <= 0):
            raise ShapeError("grid points must be strictly increasing")
        if np.any(wts <= 0):
            raise ShapeError("grid weights must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    @classmethod
    def uniform(cls, lo=-10.0, hi=10.0, n=401):
        """Uniform nodes with trapezoid weights."""
        pts = np.linspace(lo, hi, n)
        w = np.full(n, (hi - lo) / (n - 1))
        w[[0, -1]] *= 0.5
        return cls(pts, w)

    @classmethod
    def gauss_hermite(cls, n):
        """Gauss-Hermite nodes, weights rescaled for integrands without ``e^{-x^2}``.

        Exact for ``phi_j phi_k`` whenever ``j + k < 2n``.
        """
        x, w = hermgauss(n)
        return cls(x, w * np.exp(x * x))

    def to_json(self):
        return {"points": self.points.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, obj):
        return cls(np.array(obj["points"], float), np.array(obj["weights"], float))


def _points(grid):
    return grid.points if isinstance(grid, RealGrid) else np.asarray(grid, dtype=float)


def hermite_grid(dim, grid):
    """Hermite functions sampled on a grid; row ``k`` holds ``phi_k(x)``.

    Uses the normalized three-term recurrence
    ``phi_{k+1} = (sqrt(2) x phi_k - sqrt(k) phi_{k-1}) / sqrt(k+1)``,
    which stays finite where factorial-based formulas overflow.
    """
    x = _points(grid)
    if x.size == 0:
        raise ShapeError("grid must be nonempty")
    out = np.empty((int(dim), x.size))
    out[0] = _PI_QUARTER * np.exp(-0.5 * x * x)
    if dim > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, int(dim) - 1):
        out[k + 1] = (np.sqrt(2.0) * x * out[k] - np.sqrt(k) * out[k - 1]) / np.sqrt(k + 1)
    return out


def evaluate(coeffs, grid):
    """Position-space samples of ``sum_k coeffs[k] phi_k``."""
    coeffs = np.asarray(coeffs, dtype=complex)
    return coeffs @ hermite_grid(coeffs.size, grid)


def weyl_grid_apply(z, coeffs, grid):
    """Apply ``W_z`` in the Schrödinger representation.

    Returns samples of ``x -> e^{-is(r - sqrt(2) x)} f(x - sqrt(2) r)`` with
    ``z = r + is`` and ``f = sum_k coeffs[k] phi_k``.  ``f`` is re-evaluated
    at the shifted points, not interpolated.
    """
    z = complex(z)
    r, s = z.real, z.imag
    x = _points(grid)
    shifted = evaluate(coeffs, x - np.sqrt(2.0) * r)
    return np.exp(-1j * s * (r - np.sqrt(2.0) * x)) * shifted
