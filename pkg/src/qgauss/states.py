"""Truncated density matrices for the named test states, and the CLI state grammar.

Grammar::

    vacuum | gibbs:beta=F | coherent:u=RE,IM | squeezed:r=F,theta=F,u=RE,IM
           | fock:n=K | file:PATH
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import gaussian
from .errors import DomainError, ShapeError
from .fock import check_dim, coherent_vector, squeeze_matrix, weyl_matrix

STATE_TOL = 1e-10


def as_density_matrix(rho, *, tol=STATE_TOL):
    """Return ``rho`` as a complex array after checking the state invariants.

    Raises
    ------
    ShapeError
        Not square, or not Hermitian within ``tol``.
    DomainError
        Negative eigenvalue below ``-tol`` or trace off by more than ``tol``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"density matrix must be square, got shape {rho.shape}")
    check_dim(rho.shape[0])
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ShapeError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise DomainError(f"density matrix trace {np.trace(rho).real:.12g} != 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -tol:
        raise DomainError("density matrix has a negative eigenvalue")
    return rho


def pure_state(psi):
    """Projector onto ``psi`` after normalizing away the truncation tail."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def vacuum_dm(dim):
    return fock_dm(0, dim)


def fock_dm(n, dim):
    dim = check_dim(dim)
    if not 0 <= n < dim:
        raise DomainError(f"Fock level {n} outside truncation 0..{dim - 1}")
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return rho


def gibbs_dm(beta, dim):
    """``diag((1 - e^{-beta}) e^{-beta k})``, renormalized after truncation."""
    dim = check_dim(dim)
    if not beta > 0:
        raise DomainError(f"inverse temperature must be positive, got {beta!r}")
    p = np.exp(-beta * np.arange(dim))
    return np.diag(p / p.sum()).astype(complex)


def coherent_dm(u, dim):
    return pure_state(coherent_vector(u, dim))


def squeezed_dm(zeta, u, dim):
    """``S_zeta W_u |0><0| W_u^* S_zeta^*`` in truncation."""
    psi = squeeze_matrix(zeta, dim) @ weyl_matrix(u, dim)[:, 0]
    return pure_state(psi)


# --- grammar --------------------------------------------------------------

_PAIR = re.compile(r"([A-Za-z_]\w*)=(.*?)(?=,[A-Za-z_]\w*=|$)")


def parse_kv(text):
    """``"r=0.5,u=1,2"`` -> ``{"r": "0.5", "u": "1,2"}``."""
    if not text:
        return {}
    out = {}
    pos = 0
    for m in _PAIR.finditer(text):
        if m.start() != pos:
            raise ValueError(f"cannot parse arguments {text!r}")
        out[m.group(1)] = m.group(2)
        pos = m.end() + 1
    if pos < len(text):
        raise ValueError(f"cannot parse arguments {text!r}")
    return out


def parse_complex(text):
    """Locale-independent ``"RE,IM"`` (or a bare real) to ``complex``."""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"expected RE,IM, got {text!r}")


def format_complex(z):
    z = complex(z)
    return f"{z.real!r},{z.imag!r}"


@dataclass(frozen=True)
class StateSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def gaussian(self):
        """Exact ``GaussianParams`` for Gaussian kinds, else ``None``."""
        p = self.params
        if self.kind == "vacuum":
            return gaussian.vacuum()
        if self.kind == "gibbs":
            return gaussian.gibbs(p["beta"])
        if self.kind == "coherent":
            return gaussian.coherent(p["u"])
        if self.kind == "squeezed":
            return gaussian.squeezed(p["r"] * np.exp(1j * p["theta"]), p["u"])
        return None

    def density_matrix(self, dim):
        p = self.params
        if self.kind == "vacuum":
            return vacuum_dm(dim)
        if self.kind == "gibbs":
            return gibbs_dm(p["beta"], dim)
        if self.kind == "coherent":
            return coherent_dm(p["u"], dim)
        if self.kind == "squeezed":
            return squeezed_dm(p["r"] * np.exp(1j * p["theta"]), p["u"], dim)
        if self.kind == "fock":
            return fock_dm(p["n"], dim)
        if self.kind == "file":
            from .serialize import load_operator

            rho = as_density_matrix(load_operator(p["path"]))
            if rho.shape[0] != dim:
                raise ShapeError(f"state file has dim {rho.shape[0]}, requested {dim}")
            return rho
        raise ValueError(f"unknown state kind {self.kind!r}")


def parse_state(text) -> StateSpec:
    """Parse the state mini-grammar; raises ``ValueError`` on malformed input."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    if kind == "vacuum" and not rest:
        return StateSpec("vacuum")
    if kind == "file" and rest:
        return StateSpec("file", {"path": rest})
    kv = parse_kv(rest)
    try:
        if kind == "gibbs" and set(kv) == {"beta"}:
            beta = float(kv["beta"])
            if not beta > 0:
                raise ValueError("beta must be positive")
            return StateSpec("gibbs", {"beta": beta})
        if kind == "coherent" and set(kv) == {"u"}:
            return StateSpec("coherent", {"u": parse_complex(kv["u"])})
        if kind == "squeezed" and set(kv) <= {"r", "theta", "u"} and "r" in kv:
            return StateSpec(
                "squeezed",
                {
                    "r": float(kv["r"]),
                    "theta": float(kv.get("theta", 0.0)),
                    "u": parse_complex(kv.get("u", "0,0")),
                },
            )
        if kind == "fock" and set(kv) == {"n"}:
            n = int(kv["n"])
            if n < 0:
                raise ValueError("Fock level must be nonnegative")
            return StateSpec("fock", {"n": n})
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad state spec {text!r}: {exc}") from None
    raise ValueError(f"bad state spec {text!r}")
