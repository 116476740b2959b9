r"""Moments of annihilation observables on truncated states.

Three independent routes to ``<(2 sigma(z,a))^n>_rho``:

* the Gaussian closed form / recurrence from the first two moments,
* Yosida approximations ``(iA)_eps = iA (I + i eps A)^{-1}`` extrapolated to
  ``eps = 0``,
* finite differences of ``t -> tr(rho e^{itA})`` at ``t = 0``.

Also here: spectral positive/negative parts, the Hilbert-Schmidt form of the
CCR, the uncertainty inequality and a gaussianity decision procedure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import AAA

from . import gaussian
from .errors import DomainError, PrecisionWarning, ShapeError
from .fock import canonical_operators, check_dim, ladder
from .gaussian import GaussianParams, real_ip

HERMITIAN_TOL = 1e-10
DEFAULT_EPS = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
DEFAULT_STEP = 1e-3
CANCELLATION_TOL = 1e-13


def annihilation_observable(z, dim):
    """``sigma(z, a) = (conj(z) a - z a^+) / 2i`` as a truncated Hermitian matrix."""
    a, ad = ladder(dim)
    z = complex(z)
    return (np.conj(z) * a - z * ad) / 2j


def _hermitian(A, name="observable"):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {A.shape}")
    if np.abs(A - A.conj().T).max(initial=0.0) > HERMITIAN_TOL:
        raise ShapeError(f"{name} is not Hermitian")
    return A


def yosida(L, eps):
    """``L (I + eps L)^{-1}``.

    Raises
    ------
    DomainError
        ``eps <= 0`` or ``I + eps L`` numerically singular.
    """
    if not eps > 0:
        raise DomainError(f"Yosida parameter must be positive, got {eps!r}")
    L = np.asarray(L, dtype=complex)
    M = np.eye(L.shape[0]) + eps * L
    if np.linalg.cond(M) > 1e14:
        raise DomainError("I + eps*L is singular")
    # L commutes with its resolvent, so the right inverse equals the left one
    return np.linalg.solve(M, L)


class SpectralParts(NamedTuple):
    plus: np.ndarray
    minus: np.ndarray


def spectral_parts(A) -> SpectralParts:
    """Split Hermitian ``A`` as ``A_+ - A_-`` with ``A_+ A_- = 0``, both PSD."""
    A = _hermitian(A)
    lam, V = np.linalg.eigh(A)
    pos = np.where(lam > 0, lam, 0.0)
    neg = np.where(lam < 0, -lam, 0.0)
    return SpectralParts((V * pos) @ V.conj().T, (V * neg) @ V.conj().T)


def sqrtm_psd(rho):
    """Square root of a PSD matrix; eigenvalues below zero (rounding) are clipped."""
    lam, V = np.linalg.eigh(np.asarray(rho, dtype=complex))
    return (V * np.sqrt(np.clip(lam, 0.0, None))) @ V.conj().T


@dataclass(frozen=True)
class EpsSchedule:
    """Yosida parameters (strictly decreasing, positive) and a finite-difference step."""

    eps: tuple = DEFAULT_EPS
    h: float = DEFAULT_STEP

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps)
        if len(eps) < 2 or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise DomainError("eps schedule must hold at least two positive, strictly decreasing values")
        if not self.h > 0:
            raise DomainError(f"finite-difference step must be positive, got {self.h!r}")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "h", float(self.h))


def extrapolate_to_zero(x, y):
    """Value at ``x = 0`` of the rational (AAA) interpolant through ``(x, y)``.

    Yosida curves are Stieltjes-type functions of ``eps``, for which rational
    extrapolation beats polynomial fits by orders of magnitude.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scale = max(1.0, float(np.abs(y).max()))
    if np.ptp(y) <= 1e-15 * scale:
        return float(y[-1])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        val = complex(AAA(x, y)(0.0))
    if not np.isfinite(val):
        return float(np.polyval(np.polyfit(x, y, len(x) - 1), 0.0))
    return val.real


def _converging(curve):
    steps = np.abs(np.diff(curve))
    scale = max(1.0, float(np.abs(curve).max()))
    # increments must shrink once they are above rounding level
    live = steps > 1e-13 * scale
    return bool(np.all(np.diff(steps[live]) <= 0)) if live.sum() > 1 else True


def _eig_weights(rho, A):
    """Eigenvalues of ``A`` and the diagonal of ``rho`` in its eigenbasis."""
    lam, V = np.linalg.eigh(A)
    p = np.einsum("ak,ab,bk->k", V.conj(), rho, V).real
    return lam, p


@dataclass(frozen=True)
class TraceableTrace:
    value: float
    curve: np.ndarray
    eps: tuple
    hs_value: float
    direct_value: float
    converged: bool

    @property
    def agreement(self):
        return abs(self.value - self.hs_value)


def traceable_trace(rho, A, sched: EpsSchedule | None = None) -> TraceableTrace:
    """``lim tr(rho[(A_+)_eps - (A_-)_eps])`` together with its cross-checks.

    ``hs_value`` is ``||A_+^{1/2} rho^{1/2}||_2^2 - ||A_-^{1/2} rho^{1/2}||_2^2``
    and ``direct_value`` is ``tr(rho A)``; all three agree in finite dimension.
    ``converged`` is False when the increments along the curve stop shrinking.
    """
    sched = sched or EpsSchedule()
    rho = np.asarray(rho, dtype=complex)
    A = _hermitian(A)
    lam, p = _eig_weights(rho, A)
    pos, neg = np.clip(lam, 0, None), np.clip(-lam, 0, None)
    curve = np.array([np.sum(p * (pos / (1 + e * pos) - neg / (1 + e * neg))) for e in sched.eps])
    parts = spectral_parts(A)
    r = sqrtm_psd(rho)
    hs = np.linalg.norm(sqrtm_psd(parts.plus) @ r) ** 2 - np.linalg.norm(sqrtm_psd(parts.minus) @ r) ** 2
    return TraceableTrace(
        value=extrapolate_to_zero(sched.eps, curve),
        curve=curve,
        eps=sched.eps,
        hs_value=float(hs),
        direct_value=float(np.trace(rho @ A).real),
        converged=_converging(curve),
    )


class MomentEstimate(NamedTuple):
    value: float
    imag_residue: float
    curve: np.ndarray


def _diff_symbol(lam, n, h):
    # the order-2 central n-th difference applied to e^{i t lam}, evaluated per eigenvalue
    s = (2j * np.sin(0.5 * h * lam) / h) ** n
    return s * np.cos(0.5 * h * lam) if n % 2 else s


def _stencil(n):
    """Offsets and weights of the order-2 central difference for ``d^n/dt^n``."""
    m = (n + 1) // 2
    k = np.arange(-m, m + 1)
    if n % 2 == 0:
        w = np.array([(-1) ** (m - abs(j)) * math.comb(n, m - j) if abs(j) <= m else 0 for j in k], float)
        return k, w
    # mu delta^n: average of delta^n shifted by +-1/2, expressed on integer points
    half = np.arange(n + 1) - n / 2
    coeff = np.array([(-1) ** i * math.comb(n, i) for i in range(n + 1)], float)[::-1]
    w = np.zeros(k.size)
    for c, x in zip(coeff, half):
        for shift in (-0.5, 0.5):
            w[int(round(x + shift)) + m] += 0.5 * c
    return k, w


def moment_by_derivative(rho, A, n, h=DEFAULT_STEP, *, method="spectral", full_output=False):
    """``(-i)^n d^n/dt^n tr(rho e^{itA})`` at ``t = 0`` by central differences.

    Order-2 central differences at steps ``h`` and ``h/2`` are combined by one
    Richardson step.  ``method="stencil"`` samples ``phi(t)`` on the stencil
    and sums, which loses digits to cancellation for ``h`` below about
    ``1e-2``; ``method="spectral"`` applies the same linear stencil to each
    eigen-component of ``phi`` in closed form, so no cancellation occurs.

    Warns with :class:`PrecisionWarning` when the stencil values coincide to
    ``1e-13`` (the difference is then rounding noise).
    """
    n = int(n)
    if n < 1:
        raise DomainError("moment order must be at least 1")
    if not h > 0:
        raise DomainError(f"step must be positive, got {h!r}")
    rho = np.asarray(rho, dtype=complex)
    lam, p = _eig_weights(rho, _hermitian(A))
    k, wts = _stencil(n)
    phi = np.array([np.sum(p * np.exp(1j * h * j * lam)) for j in k])
    if np.ptp(phi.real) + np.ptp(phi.imag) < CANCELLATION_TOL * max(1.0, abs(phi).max()) and np.any(lam * p):
        warnings.warn(f"stencil values agree to {CANCELLATION_TOL:g}; step h={h:g} too small", PrecisionWarning, stacklevel=2)

    if method == "spectral":
        def diff(step):
            return np.sum(p * _diff_symbol(lam, n, step))
    elif method == "stencil":
        def diff(step):
            vals = np.array([np.sum(p * np.exp(1j * step * j * lam)) for j in k])
            return wts @ vals / step**n
    else:
        raise ValueError(f"unknown method {method!r}")
    d_h, d_h2 = diff(h), diff(h / 2)
    val = (-1j) ** n * (4 * d_h2 - d_h) / 3
    if full_output:
        return MomentEstimate(float(val.real), float(val.imag), np.array([d_h, d_h2]))
    return float(val.real)


def moment_by_yosida(rho, A, n, sched: EpsSchedule | None = None, *, full_output=False):
    """``(-i)^n lim tr(rho ((iA)_eps)^n)`` along ``sched.eps``.

    The curve is a function of ``A`` alone, evaluated in its eigenbasis.  Its
    real part is even in ``eps``, so the extrapolation runs in ``eps^2``.
    """
    n = int(n)
    if n < 1:
        raise DomainError("moment order must be at least 1")
    sched = sched or EpsSchedule()
    rho = np.asarray(rho, dtype=complex)
    lam, p = _eig_weights(rho, _hermitian(A))
    curve = np.array([np.sum(p * (lam / (1 + 1j * e * lam)) ** n) for e in sched.eps])
    eps2 = np.asarray(sched.eps) ** 2
    val = extrapolate_to_zero(eps2, curve.real)
    residue = extrapolate_to_zero(sched.eps, curve.imag)
    if full_output:
        return MomentEstimate(val, residue, curve)
    return val


def _tr(rho, A):
    return complex(np.trace(rho @ A))


def variance(rho, A) -> float:
    """``tr(rho A^2) - tr(rho A)^2``."""
    rho = np.asarray(rho, dtype=complex)
    A = _hermitian(A)
    m1 = _tr(rho, A).real
    return _tr(rho, A @ A).real - m1 * m1


def _hs_pq(rho):
    """``<P rho^{1/2}, Q rho^{1/2}>_2``."""
    ops = canonical_operators(rho.shape[0])
    r = sqrtm_psd(rho)
    return complex(np.vdot(ops.P @ r, ops.Q @ r))


def hs_ccr_check(rho) -> float:
    """``Im <P rho^{1/2}, Q rho^{1/2}>_2``; the CCR make this ``-1/2``.

    In truncation the top level deviates by ``D rho[D-1, D-1] / 2``.
    """
    return _hs_pq(np.asarray(rho, dtype=complex)).imag


@dataclass(frozen=True)
class UncertaintyReport:
    var_P: float
    var_Q: float
    product: float
    bound: float

    @property
    def slack(self):
        return self.product - self.bound

    @property
    def deviation_product(self):
        """``V(P) V(Q)``."""
        return math.sqrt(max(self.product, 0.0))


def uncertainty_check(rho) -> UncertaintyReport:
    """``V(P)^2 V(Q)^2`` against ``1/4 + (l m - Re<P rho^{1/2}, Q rho^{1/2}>_2)^2``."""
    rho = np.asarray(rho, dtype=complex)
    ops = canonical_operators(rho.shape[0])
    vp, vq = variance(rho, ops.P), variance(rho, ops.Q)
    l, m = _tr(rho, ops.P).real, _tr(rho, ops.Q).real
    return UncertaintyReport(vp, vq, vp * vq, 0.25 + (l * m - _hs_pq(rho).real) ** 2)


def estimate_wS(rho) -> GaussianParams:
    """Mean vector and covariance from first and second moments of ``P`` and ``Q``.

    No gaussianity or admissibility is asserted; the result is a candidate.
    """
    rho = np.asarray(rho, dtype=complex)
    ops = canonical_operators(rho.shape[0])
    P, Q = ops.P, ops.Q
    l, m = _tr(rho, P).real, _tr(rho, Q).real
    pp, qq = _tr(rho, P @ P).real, _tr(rho, Q @ Q).real
    D = P - Q
    s11 = 2 * (pp - l * l)
    s22 = 2 * (qq - m * m)
    s12 = _tr(rho, D @ D).real - pp - qq + 2 * l * m
    S = np.array([[s11, s12], [s12, s22]])
    return GaussianParams(math.sqrt(2) * complex(l, -m), 0.5 * (S + S.T))


@dataclass(frozen=True)
class GaussianityVerdict:
    passed: bool
    params: GaussianParams
    defects: list = field(default_factory=list)
    reason: str = ""

    @property
    def max_defect(self):
        return max((d["defect"] for d in self.defects), default=0.0)

    def defect(self, z, n):
        """Defect recorded for direction ``z`` and order ``n`` (``n=0`` is the qft check)."""
        for d in self.defects:
            if d["n"] == n and abs(d["z"] - complex(z)) < 1e-12:
                return d["defect"]
        raise KeyError((z, n))


def gaussianity_test(rho, directions=(math.sqrt(2), 1j * math.sqrt(2), 1 + 1j), n_max=6, tol=1e-4):
    """Decide whether ``rho`` is Gaussian from its moments along ``directions``.

    ``(w, S)`` are estimated from second moments; then for each ``z`` the
    central moments ``<(2 sigma(z,a) - (w,z))^n>``, ``n = 1..n_max``, are
    compared with the Gaussian values (0 for odd ``n``, ``(z,Sz)^{n/2}(n-1)!!``
    for even ``n``), and ``qft(rho, z)`` with the closed-form characteristic
    function (recorded as ``n = 0``).  PASS iff every absolute defect is below
    ``tol``.
    """
    from .fourier import qft

    directions = [complex(z) for z in directions]
    if not directions:
        raise DomainError("need at least one direction")
    if n_max < 4 or n_max % 2:
        raise DomainError("n_max must be an even integer >= 4")
    rho = np.asarray(rho, dtype=complex)
    g = estimate_wS(rho)
    if not gaussian.is_admissible(g.S):
        return GaussianityVerdict(False, g, [], "estimated covariance is inadmissible")
    defects = []
    for z in directions:
        A = 2 * annihilation_observable(z, rho.shape[0]) - real_ip(g.w, z) * np.eye(rho.shape[0])
        lam, p = _eig_weights(rho, A)
        for n in range(1, n_max + 1):
            measured = float(np.sum(p * lam**n))
            predicted = gaussian.central_moment(g, z, n)
            defects.append({"z": z, "n": n, "measured": measured, "predicted": predicted,
                            "defect": abs(measured - predicted)})
        F, G = qft(rho, z), gaussian.char_fn(g, z)
        defects.append({"z": z, "n": 0, "measured": F, "predicted": G, "defect": abs(F - G)})
    worst = max(defects, key=lambda d: d["defect"])
    passed = worst["defect"] < tol
    reason = "" if passed else f"defect {worst['defect']:.3g} at z={worst['z']}, n={worst['n']}"
    return GaussianityVerdict(passed, g, defects, reason)


# --- report ---------------------------------------------------------------


@dataclass(frozen=True)
class MomentReport:
    z: complex
    n: int
    closed_form: float
    yosida_value: float
    derivative_value: float

    @property
    def discrepancies(self):
        """``|closed - yosida|, |closed - derivative|, |yosida - derivative|``."""
        c, y, d = self.closed_form, self.yosida_value, self.derivative_value
        return (abs(c - y), abs(c - d), abs(y - d))

    def to_json(self):
        return {
            "z": [self.z.real, self.z.imag],
            "n": self.n,
            "closed": self.closed_form,
            "yosida": self.yosida_value,
            "derivative": self.derivative_value,
            "defects": list(self.discrepancies),
        }


def moment_report(rho, z, n_max, params: GaussianParams | None = None, sched: EpsSchedule | None = None):
    """Three-route table of ``<(2 sigma(z,a))^n>`` for ``n = 1..n_max``.

    The closed form uses ``params`` when given (exact Gaussian parameters),
    otherwise the Gaussian recurrence seeded with the first two matrix moments;
    for a non-Gaussian state it is then the Gaussian prediction, and the
    discrepancies measure non-gaussianity.
    """
    sched = sched or EpsSchedule()
    rho = np.asarray(rho, dtype=complex)
    check_dim(rho.shape[0])
    z = complex(z)
    A = 2 * annihilation_observable(z, rho.shape[0])
    if params is not None:
        closed = gaussian.gaussian_raw_moments(params, z, n_max)
    else:
        m1, m2 = _tr(rho, A).real, _tr(rho, A @ A).real
        closed = [1.0, m1, m2] + gaussian.raw_moments(m1, m2, n_max)
    return [
        MomentReport(
            z,
            n,
            float(closed[n]),
            moment_by_yosida(rho, A, n, sched),
            moment_by_derivative(rho, A, n, sched.h),
        )
        for n in range(1, int(n_max) + 1)
    ]
