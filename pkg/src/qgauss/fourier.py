r"""Quantum (non-commutative) Fourier transform and phase-plane quadratures.

``qft(rho)(z) = tr(rho W_z) / sqrt(pi)`` maps Hilbert-Schmidt operators
unitarily onto ``L2(C)``; the Weyl transform
``W(phi) = pi^{-1/2} int phi(z) W_{-z} dz`` inverts it.  Integrals over the
phase plane are sums over a :class:`QuadratureGrid`.

Truncating the generator ``z a^+ - conj(z) a`` before exponentiating corrupts
the top Fock levels of ``W_z``.  Everything here therefore works in a padded
space of :func:`work_dim` levels and compresses back, so the matrices used are
compressions of the true Weyl operators rather than truncated exponentials.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AccuracyWarning, DomainError, ShapeError
from .fock import check_dim, weyl_family
from .gaussian import sigma

SQRT_PI = np.sqrt(np.pi)
BOUNDARY_MASS_LIMIT = 1e-6


def work_dim(dim) -> int:
    """Padded level count used to evaluate Weyl operators for a ``dim``-level problem."""
    return 2 * check_dim(dim) + 20


def _embed(M, size):
    M = np.asarray(M, dtype=complex)
    out = np.zeros((size,) * M.ndim, dtype=complex)
    out[tuple(slice(0, n) for n in M.shape)] = M
    return out


def weyl_block(z, dim):
    """Compression of ``W_z`` onto the first ``dim`` levels."""
    dim = check_dim(dim)
    return weyl_family(work_dim(dim)).matrix(z)[:dim, :dim]


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes in C with area weights.  ``boundary`` flags the outer ring of nodes."""

    nodes: np.ndarray
    weights: np.ndarray
    boundary: np.ndarray | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=complex).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if nodes.size == 0 or nodes.shape != weights.shape:
            raise ShapeError("grid nodes and weights must be nonempty and of equal length")
        if np.any(weights <= 0):
            raise ShapeError("grid weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if self.boundary is not None:
            object.__setattr__(self, "boundary", np.asarray(self.boundary, dtype=bool).ravel())

    @classmethod
    def rectangle(cls, re_min, re_max, im_min, im_max, n_re, n_im=None):
        """Tensor-product trapezoid rule on a rectangle."""
        n_im = n_re if n_im is None else n_im
        x = np.linspace(re_min, re_max, n_re)
        y = np.linspace(im_min, im_max, n_im)
        wx = np.full(n_re, (re_max - re_min) / (n_re - 1))
        wy = np.full(n_im, (im_max - im_min) / (n_im - 1))
        wx[[0, -1]] *= 0.5
        wy[[0, -1]] *= 0.5
        X, Y = np.meshgrid(x, y, indexing="ij")
        edge = np.zeros((n_re, n_im), dtype=bool)
        edge[[0, -1], :] = True
        edge[:, [0, -1]] = True
        return cls(X + 1j * Y, np.outer(wx, wy), edge)

    @classmethod
    def square(cls, half_width=6.0, n=201):
        return cls.rectangle(-half_width, half_width, -half_width, half_width, n)

    @classmethod
    def default(cls):
        return cls.square(6.0, 201)

    @property
    def area(self):
        return float(self.weights.sum())

    def integrate(self, values):
        return np.sum(self.weights * np.asarray(values).ravel())

    def boundary_mass(self, magnitude):
        """Share of ``sum w |f|`` carried by boundary nodes (0 when unknown)."""
        if self.boundary is None:
            return 0.0
        m = self.weights * np.abs(np.asarray(magnitude)).ravel()
        total = m.sum()
        return float(m[self.boundary].sum() / total) if total > 0 else 0.0

    def to_json(self):
        return {
            "points": [[z.real, z.imag] for z in self.nodes.tolist()],
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        pts = np.asarray(obj["points"], dtype=float).reshape(-1, 2)
        return cls(pts[:, 0] + 1j * pts[:, 1], np.asarray(obj["weights"], dtype=float))


def qft(rho, z):
    """``tr(rho W_z) / sqrt(pi)`` for scalar or array ``z``.

    ``rho`` may be any square operator (not only a state).
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"expected a square operator, got shape {rho.shape}")
    n = work_dim(rho.shape[0])
    val = weyl_family(n).trace(_embed(rho, n), z) / SQRT_PI
    return complex(val) if np.ndim(val) == 0 else val


def trace_norm(rho):
    return float(np.linalg.svd(np.asarray(rho, dtype=complex), compute_uv=False).sum())


def qft_properties_check(rho, u, z):
    """Defects of the four algebraic properties of the transform at ``(u, z)``.

    Keys: ``bound`` (``|F rho(z)| <= ||rho||_1 / sqrt(pi)``), ``adjoint``
    (``F rho^*(z) = conj(F rho(-z))``), ``right_weyl``
    (``F[rho W_u](z) = e^{-i sigma(u,z)} F rho(z+u)``), ``conjugation``
    (``F[W_u^* rho W_u](z) = e^{-2i sigma(u,z)} F rho(z)``) and ``max``.
    """
    rho = np.asarray(rho, dtype=complex)
    u, z = complex(u), complex(z)
    W_u = weyl_block(u, rho.shape[0])
    F = qft(rho, z)
    out = {
        "bound": max(0.0, abs(F) - trace_norm(rho) / SQRT_PI),
        "adjoint": float(abs(qft(rho.conj().T, z) - np.conj(qft(rho, -z)))),
        "right_weyl": float(abs(qft(rho @ W_u, z) - np.exp(-1j * sigma(u, z)) * qft(rho, z + u))),
        "conjugation": float(abs(qft(W_u.conj().T @ rho @ W_u, z) - np.exp(-2j * sigma(u, z)) * F)),
    }
    out["max"] = max(out.values())
    return out


def weyl_transform(values, grid: QuadratureGrid, dim):
    """Quadrature approximation of ``pi^{-1/2} int phi(z) W_{-z} dz``.

    ``values`` are samples of ``phi`` at ``grid.nodes``.  Warns with
    :class:`AccuracyWarning` when more than 1e-6 of the mass of
    ``|phi| e^{-|z|^2/2}`` sits on the grid boundary.
    """
    dim = check_dim(dim)
    phi = np.asarray(values, dtype=complex).ravel()
    if phi.shape != grid.nodes.shape:
        raise ShapeError("samples do not match the grid")
    mass = grid.boundary_mass(np.abs(phi) * np.exp(-0.5 * np.abs(grid.nodes) ** 2))
    if mass > BOUNDARY_MASS_LIMIT:
        warnings.warn(f"boundary carries {mass:.2e} of the integrand mass", AccuracyWarning, stacklevel=2)
    return weyl_family(work_dim(dim)).combine(grid.weights * phi / SQRT_PI, -grid.nodes)[:dim, :dim]


def inversion_error(rho, grid: QuadratureGrid):
    """Spectral-norm distance between ``W(qft rho)`` and ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    back = weyl_transform(qft(rho, grid.nodes), grid, rho.shape[0])
    return float(np.linalg.norm(back - rho, 2))


class ParsevalResult(NamedTuple):
    lhs: complex
    rhs: complex
    defect: float


def parseval_check(rho, eta, grid: QuadratureGrid) -> ParsevalResult:
    """Compare ``int conj(F rho) F eta dz`` with ``tr(rho^* eta)``."""
    rho = np.asarray(rho, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    if rho.shape != eta.shape:
        raise ShapeError("operators must share a truncation level")
    F_rho = qft(rho, grid.nodes)
    F_eta = F_rho if eta is rho else qft(eta, grid.nodes)
    lhs = complex(grid.integrate(np.conj(F_rho) * F_eta))
    rhs = complex(np.trace(rho.conj().T @ eta))
    return ParsevalResult(lhs, rhs, abs(lhs - rhs))


def purity(rho, grid: QuadratureGrid) -> float:
    """``||F rho||^2`` by quadrature; equals ``tr rho^2``, hence 1 exactly for pure states."""
    F = qft(rho, grid.nodes)
    return float(grid.integrate(np.abs(F) ** 2).real)


def completeness_check(f, grid: QuadratureGrid, u, v) -> float:
    """``|pi^{-1} int <u, W_z f><W_z f, v> dz - <u, v>|`` by quadrature."""
    f = np.asarray(f, dtype=complex)
    if abs(np.linalg.norm(f) - 1) > 1e-10:
        raise DomainError("fiducial vector must have unit norm")
    n = work_dim(f.size)
    fam = weyl_family(n)
    f, u, v = (_embed(x, n) for x in (f, u, v))
    left = fam.amplitudes(u, f, grid.nodes)
    right = np.conj(fam.amplitudes(v, f, grid.nodes))
    integral = grid.integrate(left * right) / np.pi
    return float(abs(integral - np.vdot(u, v)))


def kb_function(phi, z):
    r"""Klauder-Bargmann image ``<psi_z, phi> / sqrt(pi)``.

    Equals ``e^{-|z|^2/2} sum_k conj(z)^k / sqrt(k!) coeffs[k] / sqrt(pi)``;
    evaluated by the ratio recurrence so the terms stay O(1).
    """
    c = np.asarray(phi, dtype=complex)
    z = np.asarray(z, dtype=complex)
    zc = np.conj(z)
    term = np.exp(-0.5 * np.abs(z) ** 2).astype(complex)
    acc = c[0] * term
    for k in range(1, c.size):
        term = term * zc / np.sqrt(k)
        acc = acc + c[k] * term
    out = acc / SQRT_PI
    return complex(out) if out.ndim == 0 else out


def kb_basis(k, z):
    """Canonical coherent-state function ``e^{-|z|^2/2} conj(z)^k / sqrt(pi k!)``."""
    e = np.zeros(int(k) + 1, dtype=complex)
    e[-1] = 1.0
    return kb_function(e, z)


def kb_onb_check(j, k, grid: QuadratureGrid) -> float:
    """``|int conj(phi_j) phi_k dz - delta_jk|`` by quadrature."""
    val = grid.integrate(np.conj(kb_basis(j, grid.nodes)) * kb_basis(k, grid.nodes))
    return float(abs(val - (1.0 if j == k else 0.0)))


def kb_norm(phi, grid: QuadratureGrid) -> float:
    """``int |<psi_z, phi>|^2 dz / pi``, which the isometry equates to ``||phi||^2``."""
    return float(grid.integrate(np.abs(kb_function(phi, grid.nodes)) ** 2).real)


def weyl_kernel(u, z, v):
    """Closed form of ``<psi_u, W_z psi_v> / pi``."""
    u, z, v = complex(u), complex(z), complex(v)
    return np.exp(-0.5 * abs(z + v - u) ** 2 + 1j * sigma(u, z + v) - 1j * sigma(z, v)) / np.pi
