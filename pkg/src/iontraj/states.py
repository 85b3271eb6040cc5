"""Initial-state preparation: Fock, coherent, Gaussian momentum packets, spinors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import ClassVar

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .hilbert import HilbertError, HilbertLayout, QuantumState, kron_states

__all__ = [
    "QuantumState", "StateError", "Fock", "Coherent", "GaussianMomentum", "Spinor",
    "fock", "coherent", "gaussian_momentum", "spinor", "product", "to_density",
    "momentum_eigenbasis", "required_coherent_dim",
]

COHERENT_TAIL = 1e-10
PACKET_TAIL = 1e-6


class StateError(ValueError):
    pass


@dataclass(frozen=True)
class Fock:
    kind: ClassVar[str] = "fock"
    n: int = 0


@dataclass(frozen=True)
class Coherent:
    """Coherent state ``|theta>``; ``cutoff`` keeps levels ``0..cutoff`` only.

    The cutoff projects onto a bounded block and renormalizes, which is how
    bounded-model scenarios start inside their invariant subspace.
    """

    kind: ClassVar[str] = "coherent"
    theta: complex = 1.0
    cutoff: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "theta", complex(self.theta))


@dataclass(frozen=True)
class GaussianMomentum:
    kind: ClassVar[str] = "gaussian_momentum"
    p0: float = 0.0
    mu: float = 0.1


@dataclass(frozen=True)
class Spinor:
    """``a |up> + b e^{i phi} |down>`` with real, non-negative amplitudes."""

    kind: ClassVar[str] = "spinor"
    a: float = 1.0
    b: float = 0.0
    phi: float = 0.0


STATE_TYPES = {cls.kind: cls for cls in (Fock, Coherent, GaussianMomentum, Spinor)}


def fock(n: int, dim: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise StateError(f"Fock level {n} outside truncated dim {dim}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def _poisson_log_weights(theta: complex, n: np.ndarray) -> np.ndarray:
    r2 = abs(theta) ** 2
    if r2 == 0:
        return np.where(n == 0, 0.0, -np.inf)
    return -r2 + n * math.log(r2) - gammaln(n + 1)


def required_coherent_dim(theta: complex, tail: float = COHERENT_TAIL) -> int:
    """Smallest dim whose discarded Poisson tail is below ``tail``."""
    dim = 2
    while True:
        n = np.arange(dim)
        kept = np.exp(_poisson_log_weights(theta, n)).sum()
        if 1.0 - kept < tail:
            return dim
        dim += 1


def coherent(theta: complex, dim: int, cutoff: int | None = None) -> np.ndarray:
    """Fock amplitudes ``e^{-|t|^2/2} t^n / sqrt(n!)``, renormalized.

    Raises ``StateError`` if the truncation discards more than 1e-10 of the
    Poisson weight (unless an explicit ``cutoff`` is requested).
    """
    if dim < 2:
        raise StateError("dim must be >= 2")
    theta = complex(theta)
    n = np.arange(dim)
    if cutoff is None:
        need = required_coherent_dim(theta)
        if dim < need:
            raise StateError(
                f"coherent state theta={theta} needs dim >= {need} for tail < {COHERENT_TAIL}, got {dim}"
            )
    elif not 0 <= cutoff < dim:
        raise StateError(f"cutoff {cutoff} outside truncated dim {dim}")
    mag = np.exp(0.5 * _poisson_log_weights(theta, n))
    phase = np.exp(1j * np.angle(theta) * n) if theta != 0 else np.ones(dim)
    c = mag * phase
    if cutoff is not None:
        c[cutoff + 1:] = 0.0
    return c / np.linalg.norm(c)


@lru_cache(maxsize=32)
def momentum_eigenbasis(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and phase-fixed eigenvectors of the truncated ``pbar``.

    ``pbar = D J D^dag`` with ``D = diag(i^n)`` and ``J`` the real Jacobi
    matrix with off-diagonal ``sqrt(n)``.  Eigenvectors of ``J`` are signed
    so that they follow the orthonormal-polynomial recurrence with a positive
    vacuum component, the truncated analogue of momentum eigenfunctions
    centred at zero position.  Returned arrays are read-only.
    """
    off = np.sqrt(np.arange(1, dim, dtype=float))
    lam, U = eigh_tridiagonal(np.zeros(dim), off)
    peak = np.argmax(np.abs(U), axis=0)
    for k in range(dim):
        # sign of P_m(lam) from the three-term recurrence, rescaled to avoid overflow
        p_prev, p = 0.0, 1.0
        for j in range(peak[k]):
            p_prev, p = p, (lam[k] * p - math.sqrt(j) * p_prev) / math.sqrt(j + 1)
            s = abs(p) + abs(p_prev)
            if s > 1e100:
                p, p_prev = p / s, p_prev / s
        if np.sign(p) != np.sign(U[peak[k], k]):
            U[:, k] = -U[:, k]
    V = (1j ** np.arange(dim))[:, None] * U
    lam.setflags(write=False)
    V.setflags(write=False)
    return lam, V


def gaussian_momentum(p0: float, mu: float, dim: int) -> np.ndarray:
    """Packet with amplitude ``exp[-(p - p0)^2 / (4 mu)]`` over ``pbar`` eigenstates.

    The momentum probability is then Gaussian with variance ``mu`` (in
    ``pbar`` units).  Raises if more than 1e-6 of the weight sits on the
    outermost 10% of the truncated spectrum.
    """
    if not mu > 0:
        raise StateError(f"packet width mu must be positive, got {mu}")
    lam, V = momentum_eigenbasis(dim)
    amp = np.exp(-((lam - p0) ** 2) / (4.0 * mu))
    weight = amp**2 / np.sum(amp**2)
    n_edge = max(1, math.ceil(0.1 * dim))
    edge = np.argsort(np.abs(lam))[-n_edge:]
    if weight[edge].sum() > PACKET_TAIL:
        raise StateError(
            f"dim {dim} too small for packet p0={p0}, mu={mu}: "
            f"{weight[edge].sum():.2e} of the weight on extreme momenta"
        )
    psi = V @ amp
    return psi / np.linalg.norm(psi)


def spinor(a: float, b: float, phi: float = 0.0) -> np.ndarray:
    """Normalized ``|a| |up> + |b| e^{i phi} |down>``."""
    a, b = abs(a), abs(b)
    norm = math.hypot(a, b)
    if norm == 0:
        raise StateError("spinor amplitudes are both zero")
    return np.array([a / norm, b / norm * np.exp(1j * phi)], dtype=complex)


def _factor_vector(spec, dim: int) -> np.ndarray:
    if isinstance(spec, Fock):
        return fock(spec.n, dim)
    if isinstance(spec, Coherent):
        return coherent(spec.theta, dim, spec.cutoff)
    if isinstance(spec, GaussianMomentum):
        return gaussian_momentum(spec.p0, spec.mu, dim)
    if isinstance(spec, Spinor):
        if dim != 2:
            raise StateError("spinor requires a two-level factor")
        return spinor(spec.a, spec.b, spec.phi)
    if isinstance(spec, np.ndarray):
        v = np.asarray(spec, dtype=complex)
        if v.shape != (dim,):
            raise StateError(f"vector of shape {v.shape} for factor of dim {dim}")
        return v / np.linalg.norm(v)
    raise StateError(f"unknown state spec {spec!r}")


def product(specs: dict, layout: HilbertLayout) -> QuantumState:
    """Tensor product in layout order.

    Unlisted modes default to the vacuum and unlisted spins to ``|up>``.
    """
    unknown = set(specs) - set(layout.labels)
    if unknown:
        raise HilbertError(f"state specs for unknown factors {sorted(unknown)}")
    vecs = []
    for f in layout.factors:
        default = Fock(0) if f.kind == "mode" else Spinor(1.0, 0.0)
        vecs.append(_factor_vector(specs.get(f.label, default), f.dim))
    return QuantumState(layout, kron_states(vecs))


def to_density(state: QuantumState) -> QuantumState:
    return QuantumState(state.layout, state.density())
