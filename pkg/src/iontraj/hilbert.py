"""Truncated Fock-space and pseudo-spin operator algebra.

Conventions
-----------
* Factor order is fixed: ``x`` mode, ``y`` mode, ``spin`` and, for the
  four-level ion, ``spin2``.  Modes always precede spins.
* The qubit basis is ordered ``(|e>, |g>) = (|up>, |down>)`` so that
  ``sigma_z = diag(1, -1)`` and ``sigma_+ = |e><g|``.
* Positions and momenta are dimensionless: ``xbar = a + a^dag`` and
  ``pbar = i (a^dag - a)``.  The physical momentum is ``p = pbar / (2 Delta)``
  with ``Delta = 1 / sqrt(2 m nu)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np


class HilbertError(ValueError):
    """Raised for malformed layouts, dimension mismatches and bad labels."""


@dataclass(frozen=True)
class Factor:
    kind: str  # "mode" or "spin"
    dim: int
    label: str

    def __post_init__(self):
        if self.kind not in ("mode", "spin"):
            raise HilbertError(f"unknown factor kind {self.kind!r}")
        if self.kind == "mode" and self.dim < 2:
            raise HilbertError(f"mode {self.label!r} needs dim >= 2, got {self.dim}")
        if self.kind == "spin" and self.dim != 2:
            raise HilbertError(f"spin {self.label!r} must have dim 2, got {self.dim}")


@dataclass(frozen=True)
class HilbertLayout:
    """Ordered tensor factors defining how single-factor operators embed."""

    factors: tuple[Factor, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise HilbertError("layout needs at least one factor")
        labels = [f.label for f in self.factors]
        if len(set(labels)) != len(labels):
            raise HilbertError(f"duplicate factor labels in {labels}")

    @classmethod
    def standard(cls, dims: dict[str, int] | None = None, spins: Sequence[str] = ("spin",)) -> "HilbertLayout":
        """Layout in the canonical order (x, y, spin[, spin2]).

        ``dims`` maps mode labels (``"x"``, ``"y"``) to truncation dims; only
        the modes present are included.
        """
        dims = dims or {}
        unknown = set(dims) - {"x", "y"}
        if unknown:
            raise HilbertError(f"unknown mode labels {sorted(unknown)}")
        factors = [Factor("mode", int(dims[m]), m) for m in ("x", "y") if m in dims]
        factors += [Factor("spin", 2, s) for s in spins]
        return cls(tuple(factors))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f.label for f in self.factors)

    @property
    def modes(self) -> tuple[Factor, ...]:
        return tuple(f for f in self.factors if f.kind == "mode")

    @property
    def spins(self) -> tuple[Factor, ...]:
        return tuple(f for f in self.factors if f.kind == "spin")

    def __contains__(self, label: str) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise HilbertError(f"layout has no factor {label!r} (has {self.labels})") from None

    def factor(self, label: str) -> Factor:
        return self.factors[self.index(label)]

    def dim(self, label: str) -> int:
        return self.factor(label).dim


def _single(kind: str, dim: int, label: str | None = None) -> HilbertLayout:
    return HilbertLayout((Factor(kind, dim, label or kind),))


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense complex matrix tagged with the layout it acts on."""

    layout: HilbertLayout
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        n = self.layout.total_dim
        if data.shape != (n, n):
            raise HilbertError(f"operator shape {data.shape} does not match layout dim {n}")
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.layout, self.data.conj().T)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T), initial=0.0))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermiticity_error() < tol

    def _check(self, other: "OperatorMatrix"):
        if other.layout != self.layout:
            raise HilbertError("operators live on different layouts")

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.layout, self.data @ other.data)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.layout, self.data + other.data)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.layout, self.data - other.data)
        return NotImplemented

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return OperatorMatrix(self.layout, self.data * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return OperatorMatrix(self.layout, self.data / scalar)

    def __neg__(self):
        return OperatorMatrix(self.layout, -self.data)


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    return a @ b - b @ a


def zeros(layout: HilbertLayout) -> OperatorMatrix:
    return OperatorMatrix(layout, np.zeros((layout.total_dim,) * 2, dtype=complex))


def identity(layout_or_dim: HilbertLayout | int) -> OperatorMatrix:
    layout = layout_or_dim if isinstance(layout_or_dim, HilbertLayout) else _single("mode", layout_or_dim)
    return OperatorMatrix(layout, np.eye(layout.total_dim, dtype=complex))


# -- single-mode operators -------------------------------------------------

def _check_dim(dim: int):
    if int(dim) != dim or dim < 2:
        raise HilbertError(f"invalid mode dimension {dim!r}; need an integer >= 2")


def ladder(dim: int) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Truncated annihilation and creation operators ``(a, a^dag)``."""
    _check_dim(dim)
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    layout = _single("mode", dim)
    return OperatorMatrix(layout, a), OperatorMatrix(layout, a.conj().T)


def number(dim: int) -> OperatorMatrix:
    _check_dim(dim)
    return OperatorMatrix(_single("mode", dim), np.diag(np.arange(dim, dtype=complex)))


def xbar(dim: int) -> OperatorMatrix:
    a, ad = ladder(dim)
    return a + ad


def pbar(dim: int) -> OperatorMatrix:
    a, ad = ladder(dim)
    return 1j * (ad - a)


def bounded_A(eta: float, dim: int) -> OperatorMatrix:
    """``A(eta) = [1 - eta^2 n / 2] a`` on the truncated space.

    With ``eta**2 = 2/N`` the block ``span{|0>..|N>}`` is invariant under
    both ``A`` and ``A^dag`` because ``A^dag |N> = 0``.
    """
    _check_dim(dim)
    if not eta > 0:
        raise HilbertError(f"eta must be positive, got {eta}")
    a, _ = ladder(dim)
    n = np.arange(dim, dtype=float)
    return OperatorMatrix(a.layout, (1.0 - eta**2 * n / 2.0)[:, None] * a.data)


def upper_bound_A(N: int, dim: int) -> OperatorMatrix:
    """``A(eta)`` at ``eta^2 = 2/N`` written as ``[(N - n)/N] a``.

    Same operator as ``bounded_A(sqrt(2/N), dim)`` but the blocking factor at
    ``n = N`` is exactly zero, so the invariant block is exact in floating
    point.
    """
    _check_dim(dim)
    bounded_eta(N)
    a, _ = ladder(dim)
    n = np.arange(dim, dtype=float)
    return OperatorMatrix(a.layout, ((N - n) / N)[:, None] * a.data)


def bounded_eta(N: int) -> float:
    """Lamb-Dicke parameter giving the upper bound ``N`` (``eta^2 = 2/N``)."""
    if int(N) != N or N < 1:
        raise HilbertError(f"upper bound N must be an integer >= 1, got {N!r}")
    return float(np.sqrt(2.0 / N))


# -- pseudo-spin -----------------------------------------------------------

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "+": np.array([[0, 1], [0, 0]], dtype=complex),  # |e><g|
    "-": np.array([[0, 0], [1, 0]], dtype=complex),
    "i": np.eye(2, dtype=complex),
}


def pauli(axis: str) -> OperatorMatrix:
    """Pauli, raising (``"+"``) or lowering (``"-"``) matrix in the (|e>, |g>) basis."""
    try:
        m = _PAULI[axis]
    except KeyError:
        raise HilbertError(f"unknown Pauli axis {axis!r}") from None
    return OperatorMatrix(_single("spin", 2), m.copy())


def spin_rotation_z(theta: float) -> np.ndarray:
    """``exp(-i theta sigma_z / 2)``; conjugation rotates (sx, sy) by ``theta``."""
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


# -- embedding and expectations -------------------------------------------

def embed(op: OperatorMatrix | np.ndarray, label: str, layout: HilbertLayout) -> OperatorMatrix:
    """Tensor ``op`` on factor ``label`` with identities on the other factors."""
    m = op.data if isinstance(op, OperatorMatrix) else np.asarray(op, dtype=complex)
    k = layout.index(label)
    if m.shape != (layout.dims[k],) * 2:
        raise HilbertError(
            f"operator of shape {m.shape} cannot act on factor {label!r} of dim {layout.dims[k]}"
        )
    mats = [m if i == k else np.eye(d) for i, d in enumerate(layout.dims)]
    return OperatorMatrix(layout, reduce(np.kron, mats))


def embed_many(ops: dict[str, OperatorMatrix | np.ndarray], layout: HilbertLayout) -> OperatorMatrix:
    """Tensor product of several single-factor operators (identity elsewhere)."""
    for label in ops:
        layout.index(label)
    mats = []
    for f in layout.factors:
        if f.label in ops:
            m = ops[f.label]
            m = m.data if isinstance(m, OperatorMatrix) else np.asarray(m, dtype=complex)
            if m.shape != (f.dim, f.dim):
                raise HilbertError(f"operator of shape {m.shape} cannot act on factor {f.label!r}")
            mats.append(m)
        else:
            mats.append(np.eye(f.dim))
    return OperatorMatrix(layout, reduce(np.kron, mats))


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure state vector (1-D data) or density matrix (2-D data) on a layout."""

    layout: HilbertLayout
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        n = self.layout.total_dim
        if data.shape not in ((n,), (n, n)):
            raise HilbertError(f"state shape {data.shape} does not match layout dim {n}")
        object.__setattr__(self, "data", data)

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    def density(self) -> np.ndarray:
        return np.outer(self.data, self.data.conj()) if self.is_pure else self.data

    def trace(self) -> float:
        if self.is_pure:
            return float(np.vdot(self.data, self.data).real)
        return float(np.trace(self.data).real)

    def purity(self) -> float:
        if self.is_pure:
            return self.trace() ** 2
        return float(np.vdot(self.data, self.data).real)

    def check(self, tol: float = 1e-10) -> None:
        """Raise ``HilbertError`` unless normalized (and Hermitian, PSD for rho)."""
        if abs(self.trace() - 1.0) > tol:
            raise HilbertError(f"state not normalized: trace/norm^2 = {self.trace()!r}")
        if not self.is_pure:
            rho = self.data
            if np.max(np.abs(rho - rho.conj().T)) > tol:
                raise HilbertError("density matrix is not Hermitian")
            lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
            if lam < -tol:
                raise HilbertError(f"density matrix has negative eigenvalue {lam:.3e}")


def expect_array(m: np.ndarray, data: np.ndarray) -> complex:
    """``<psi|M|psi>`` for a vector, ``Tr(M rho)`` for a matrix."""
    if data.ndim == 1:
        return complex(np.vdot(data, m @ data))
    return complex(np.einsum("ij,ji->", m, data))


def expectation(op: OperatorMatrix, state: QuantumState) -> complex:
    if op.layout != state.layout:
        raise HilbertError("operator and state live on different layouts")
    return expect_array(op.data, state.data)


def kron_states(vectors: Iterable[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, [np.asarray(v, dtype=complex) for v in vectors])


def apply_factor(op: OperatorMatrix | np.ndarray, label: str, state: QuantumState) -> np.ndarray:
    """``(op on label) |psi>`` without forming the embedded matrix (pure states)."""
    if not state.is_pure:
        raise HilbertError("apply_factor needs a pure state")
    layout = state.layout
    m = op.data if isinstance(op, OperatorMatrix) else np.asarray(op, dtype=complex)
    k = layout.index(label)
    if m.shape != (layout.dims[k],) * 2:
        raise HilbertError(f"operator of shape {m.shape} cannot act on factor {label!r}")
    t = state.data.reshape(layout.dims)
    out = np.moveaxis(np.tensordot(m, t, axes=([1], [k])), 0, k)
    return out.reshape(-1)


def factor_expectation(op: OperatorMatrix | np.ndarray, label: str, state: QuantumState) -> complex:
    """Expectation of a single-factor operator; cheap for pure states."""
    if state.is_pure:
        return complex(np.vdot(state.data, apply_factor(op, label, state)))
    return expectation(embed(op, label, state.layout), state)
