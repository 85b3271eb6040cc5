"""Unitary and Lindblad time evolution with observable recording.

Three propagators are available for closed systems:

``rk4``
    classical fixed-step fourth-order Runge-Kutta on ``d psi/d tau = -i H psi``.
``exact``
    one dense eigendecomposition, then ``psi(tau) = V exp(-i w tau) V^dag psi0``
    evaluated at every sample time.
``momentum``
    for Hamiltonians of the form ``sum_k pbar_k (x) M_k + M_0`` (continuum
    spin-orbit models); the mode momenta are diagonalized separately and only
    the small internal blocks are diagonalized per momentum grid point.  Exact
    like ``exact`` but feasible at a few thousand basis states.

Open systems use RK4 on the master equation or, for small spaces, the matrix
exponential of the Liouvillian superoperator.

By default both closed and open evolutions are restricted to the set of basis
states reachable from the initial support through the nonzero structure of
``H`` and the jump operators.  This is exact (the complement is never
populated) and makes the bounded models cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.linalg import expm

from .hilbert import (
    HilbertError,
    HilbertLayout,
    OperatorMatrix,
    QuantumState,
    _PAULI,
    embed,
    expect_array,
    ladder,
    pbar,
    xbar,
)
from .models import MomentumForm
from .states import momentum_eigenbasis

METHODS = ("rk4", "exact", "momentum")
CSV_COLUMNS = (
    "tau", "x", "y", "px", "py", "sx", "sy", "sz",
    "trace", "purity", "tail_x", "tail_y", "leakage",
)
IMAG_TOL = 1e-9
NEGATIVE_EIG_TOL = 1e-6
LIOUVILLIAN_MAX_DIM = 64
SUPEROP_RK4_MAX_DIM = 32


class DynamicsError(RuntimeError):
    pass


class TruncationError(DynamicsError):
    """Population reached the top of a truncated mode."""

    def __init__(self, mode: str, population: float, tau: float):
        self.mode, self.population, self.tau = mode, population, tau
        super().__init__(
            f"truncation inadequate for mode {mode!r}: tail population {population:.3e} "
            f"at tau={tau:.6g}; increase its dimension"
        )


class IntegrationInstabilityError(DynamicsError):
    pass


@dataclass(frozen=True)
class EvolutionConfig:
    """Integration settings.

    ``dissipation`` is a sequence of ``(mode label, rate)`` pairs with rates
    in tau units.  ``reduce`` enables the reachable-subspace restriction.
    """

    t_max: float
    dt: float = 1e-3
    sample_every: int = 10
    method: str = "rk4"
    dissipation: tuple[tuple[str, float], ...] = ()
    tail_tolerance: float = 1e-6
    reduce: bool = True

    def __post_init__(self):
        object.__setattr__(
            self, "dissipation", tuple((str(m), float(r)) for m, r in self.dissipation)
        )
        self.validate()

    def validate(self) -> None:
        if not (np.isfinite(self.t_max) and self.t_max >= 0):
            raise ValueError(f"t_max must be finite and >= 0, got {self.t_max}")
        if not self.tail_tolerance > 0:
            raise ValueError("tail_tolerance must be positive")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ValueError(f"sample_every must be an integer >= 1, got {self.sample_every}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        for mode, rate in self.dissipation:
            if not (np.isfinite(rate) and rate >= 0):
                raise ValueError(f"damping rate for {mode!r} must be >= 0, got {rate}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    def sample_steps(self) -> np.ndarray:
        return np.arange(0, self.n_steps + 1, self.sample_every)

    def sample_times(self) -> np.ndarray:
        return self.sample_steps() * self.dt

    @property
    def dissipative(self) -> bool:
        return any(rate > 0 for _, rate in self.dissipation)


@dataclass
class TrajectoryRecord:
    """Sampled observables; NaN marks quantities with no matching factor."""

    tau: np.ndarray
    x: np.ndarray
    y: np.ndarray
    px: np.ndarray
    py: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    trace: np.ndarray
    purity: np.ndarray
    tail_x: np.ndarray
    tail_y: np.ndarray
    leakage: np.ndarray
    energy: np.ndarray
    min_eig: np.ndarray
    extra: dict[str, np.ndarray] = field(default_factory=dict)
    final: QuantumState | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.tau)

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[str, float]]) -> "TrajectoryRecord":
        names = [f.name for f in fields(cls) if f.name not in ("extra", "final")]
        cols = {n: np.array([r.get(n, math.nan) for r in rows], dtype=float) for n in names}
        extra_keys = [k for k in rows[0] if k not in cols] if rows else []
        extra = {k: np.array([r[k] for r in rows], dtype=float) for k in extra_keys}
        return cls(**cols, extra=extra)

    def column(self, name: str) -> np.ndarray:
        if name in self.extra:
            return self.extra[name]
        if name in ("extra", "final") or name not in self.__dataclass_fields__:
            raise KeyError(f"no column {name!r}")
        return getattr(self, name)

    def table(self, columns: Sequence[str] = CSV_COLUMNS) -> np.ndarray:
        return np.column_stack([self.column(c) for c in columns])


# -- observables -------------------------------------------------------------

def _real(z: complex, name: str) -> float:
    if abs(z.imag) > IMAG_TOL * max(1.0, abs(z.real)):
        raise DynamicsError(f"expectation of {name} has imaginary part {z.imag:.3e}")
    return float(z.real)


def _embedded_block(m: np.ndarray, label: str, layout: HilbertLayout, support: np.ndarray) -> np.ndarray:
    """Dense ``support x support`` block of ``m`` embedded on factor ``label``."""
    k = layout.index(label)
    out = sparse.identity(1, dtype=complex, format="csr")
    for i, d in enumerate(layout.dims):
        out = sparse.kron(out, sparse.csr_matrix(m) if i == k else sparse.identity(d), format="csr")
    return out[support][:, support].toarray()


def _mode_levels(layout: HilbertLayout, label: str) -> np.ndarray:
    """Fock level of ``label`` for every basis index of the layout."""
    return np.indices(layout.dims)[layout.index(label)].ravel()


def tail_levels(dim: int) -> int:
    """Number of top levels watched by the truncation guard."""
    return max(1, math.ceil(0.1 * dim))


class ObservableContext:
    """Precomputed observable matrices for one layout and support.

    ``support`` lists the retained basis indices (all of them if None);
    ``bounds`` maps bounded mode labels to their upper level ``N``.
    """

    def __init__(
        self,
        layout: HilbertLayout,
        support: np.ndarray | None = None,
        bounds: Mapping[str, int] | None = None,
        hamiltonian: np.ndarray | None = None,
        extra: Mapping[str, OperatorMatrix] | None = None,
    ):
        self.layout = layout
        self.support = np.arange(layout.total_dim) if support is None else np.asarray(support)
        self.bounds = dict(bounds or {})
        self.hamiltonian = hamiltonian
        idx = np.ix_(self.support, self.support)
        self.ops: dict[str, np.ndarray] = {}
        for label, names in (("x", ("x", "px")), ("y", ("y", "py"))):
            if label in layout and layout.factor(label).kind == "mode":
                d = layout.dim(label)
                self.ops[names[0]] = _embedded_block(xbar(d).data, label, layout, self.support)
                self.ops[names[1]] = _embedded_block(pbar(d).data, label, layout, self.support)
        if "spin" in layout:
            for axis in "xyz":
                self.ops["s" + axis] = _embedded_block(_PAULI[axis], "spin", layout, self.support)
        self.extra = {k: v.data[idx] for k, v in (extra or {}).items()}
        self.tail_masks: dict[str, np.ndarray] = {}
        for f in layout.modes:
            levels = _mode_levels(layout, f.label)[self.support]
            self.tail_masks[f.label] = levels >= f.dim - tail_levels(f.dim)
        leak = np.zeros(len(self.support), dtype=bool)
        for label, N in self.bounds.items():
            leak |= _mode_levels(layout, label)[self.support] > N
        self.leak_mask = leak if self.bounds else None

    def populations(self, data: np.ndarray) -> np.ndarray:
        return np.abs(data) ** 2 if data.ndim == 1 else np.real(np.diagonal(data))


def record_observables(state: QuantumState | np.ndarray, context: ObservableContext) -> dict[str, float]:
    """One sample row: expectations, norm/trace, purity, tails and leakage.

    ``state`` may be a ``QuantumState`` on the full layout or a raw vector or
    density matrix on ``context.support``.
    """
    if isinstance(state, QuantumState):
        data = state.data
        if len(data) != len(context.support):
            data = data[context.support] if data.ndim == 1 else data[np.ix_(context.support, context.support)]
    else:
        data = np.asarray(state)
    row: dict[str, float] = {}
    for name in ("x", "y", "px", "py", "sx", "sy", "sz"):
        m = context.ops.get(name)
        row[name] = _real(expect_array(m, data), name) if m is not None else math.nan
    pops = context.populations(data)
    row["trace"] = float(np.sum(pops))
    row["purity"] = row["trace"] ** 2 if data.ndim == 1 else float(np.vdot(data, data).real)
    for label in ("x", "y"):
        mask = context.tail_masks.get(label)
        row[f"tail_{label}"] = float(np.sum(pops[mask])) if mask is not None else math.nan
    row["leakage"] = float(np.sum(pops[context.leak_mask])) if context.leak_mask is not None else math.nan
    h = context.hamiltonian
    row["energy"] = _real(expect_array(h, data), "H") if h is not None else math.nan
    row["min_eig"] = math.nan
    if data.ndim == 2:
        row["min_eig"] = float(np.linalg.eigvalsh(0.5 * (data + data.conj().T))[0])
    for name, m in context.extra.items():
        row[name] = _real(expect_array(m, data), name)
    return row


def _guard_tail(row: Mapping[str, float], tol: float, tau: float) -> None:
    for label in ("x", "y"):
        v = row[f"tail_{label}"]
        if v > tol:
            raise TruncationError(label, v, tau)


# -- support reduction -------------------------------------------------------

def reachable_support(seed: np.ndarray, operators: Sequence[np.ndarray]) -> np.ndarray:
    """Indices reachable from ``seed`` through nonzero entries of ``operators``.

    An entry ``M[i, j] != 0`` links ``j -> i``.  The closure of the seed under
    these links is invariant for any dynamics generated by the operators.
    """
    n = operators[0].shape[0] if operators else len(seed)
    adj = np.zeros((n, n), dtype=bool)
    for m in operators:
        adj |= m != 0
    mask = np.zeros(n, dtype=bool)
    mask[seed] = True
    frontier = mask.copy()
    while frontier.any():
        new = adj[:, frontier].any(axis=1) & ~mask
        mask |= new
        frontier = new
    return np.flatnonzero(mask)


def _initial_support(data: np.ndarray) -> np.ndarray:
    if data.ndim == 1:
        return np.flatnonzero(data != 0)
    return np.flatnonzero(np.any(data != 0, axis=0) | np.any(data != 0, axis=1))


def _embed_state(layout: HilbertLayout, support: np.ndarray, data: np.ndarray) -> QuantumState:
    n = layout.total_dim
    if data.ndim == 1:
        out = np.zeros(n, dtype=complex)
        out[support] = data
    else:
        out = np.zeros((n, n), dtype=complex)
        out[np.ix_(support, support)] = data
    return QuantumState(layout, out)


# -- closed systems ----------------------------------------------------------

def _rk4_step(f, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_hermitian(h: np.ndarray, tol: float = 1e-10) -> None:
    err = float(np.max(np.abs(h - h.conj().T), initial=0.0))
    if err > tol:
        raise HilbertError(f"Hamiltonian is not Hermitian (max deviation {err:.3e})")


def evolve_unitary(
    H: OperatorMatrix | MomentumForm,
    psi0: QuantumState,
    config: EvolutionConfig,
    *,
    bounds: Mapping[str, int] | None = None,
    extra: Mapping[str, OperatorMatrix] | None = None,
) -> TrajectoryRecord:
    """Propagate a pure state and sample observables every ``sample_every`` steps.

    ``H`` may be a dense ``OperatorMatrix`` or a ``MomentumForm``; the latter
    is required for ``method="momentum"`` and is densified otherwise.
    """
    if H.layout != psi0.layout:
        raise HilbertError("Hamiltonian and state live on different layouts")
    if not psi0.is_pure:
        raise HilbertError("evolve_unitary needs a pure state; use evolve_lindblad for density matrices")
    psi0.check()
    if config.method == "momentum":
        if not isinstance(H, MomentumForm):
            raise DynamicsError("method 'momentum' needs a momentum-diagonal Hamiltonian")
        return _evolve_momentum(H, psi0, config, bounds=bounds)
    if isinstance(H, MomentumForm):
        H = H.dense()
    h_full = H.data
    _check_hermitian(h_full)

    if config.reduce:
        support = reachable_support(_initial_support(psi0.data), [h_full])
    else:
        support = np.arange(len(psi0.data))
    h = h_full[np.ix_(support, support)]
    psi = psi0.data[support].copy()
    ctx = ObservableContext(psi0.layout, support, bounds, h, extra)

    rows = []
    taus = config.sample_times()
    if config.method == "exact":
        w, V = np.linalg.eigh(h)
        c0 = V.conj().T @ psi
        for tau in taus:
            row = record_observables(V @ (np.exp(-1j * w * tau) * c0), ctx)
            _guard_tail(row, config.tail_tolerance, tau)
            rows.append({"tau": tau, **row})
        rec = TrajectoryRecord.from_rows(rows)
        rec.final = _embed_state(psi0.layout, support, V @ (np.exp(-1j * w * taus[-1]) * c0))
        return rec

    mh = -1j * h
    f = lambda v: mh @ v  # noqa: E731
    step = 0
    for k, tau in zip(config.sample_steps(), taus):
        while step < k:
            psi = _rk4_step(f, psi, config.dt)
            step += 1
        row = record_observables(psi, ctx)
        _guard_tail(row, config.tail_tolerance, tau)
        rows.append({"tau": tau, **row})
    rec = TrajectoryRecord.from_rows(rows)
    rec.final = _embed_state(psi0.layout, support, psi)
    return rec


def _evolve_momentum(
    form: MomentumForm,
    psi0: QuantumState,
    config: EvolutionConfig,
    bounds: Mapping[str, int] | None = None,
) -> TrajectoryRecord:
    layout = form.layout
    if layout.factors[: len(layout.modes)] != layout.modes:
        raise DynamicsError("momentum method needs modes ordered before spins")
    modes = [f.label for f in layout.modes]
    mdims = [f.dim for f in layout.modes]
    D = form.internal_dim
    n_modes = len(modes)
    bases = [momentum_eigenbasis(d) for d in mdims]

    # h(p) on the momentum grid: shape (*mdims, D, D)
    hp = np.broadcast_to(form.constant, (*mdims, D, D)).astype(complex)
    for label, m in form.terms:
        k = modes.index(label)
        shape = [1] * n_modes
        shape[k] = mdims[k]
        hp = hp + bases[k][0].reshape(*shape, 1, 1) * m
    w, U = np.linalg.eigh(hp)

    def to_momentum(t):
        for k, (_, V) in enumerate(bases):
            t = np.moveaxis(np.tensordot(V.conj().T, t, axes=([1], [k])), 0, k)
        return t

    def to_fock(t):
        for k, (_, V) in enumerate(bases):
            t = np.moveaxis(np.tensordot(V, t, axes=([1], [k])), 0, k)
        return t

    c = to_momentum(psi0.data.reshape(*mdims, D))
    b0 = np.einsum("...ji,...j->...i", U.conj(), c)

    ladders = [ladder(d)[0].data.diagonal(1) for d in mdims]
    spin_ops = {}
    if "spin" in layout:
        for axis in "xyz":
            spin_ops["s" + axis] = embed_internal(layout, _PAULI[axis])

    rows = []
    for tau in config.sample_times():
        ct = np.einsum("...ij,...j->...i", U, np.exp(-1j * w * tau) * b0)
        psi = to_fock(ct)
        row = _tensor_observables(psi, modes, mdims, ladders, spin_ops, bounds)
        row["energy"] = float(np.vdot(ct, np.einsum("...ij,...j->...i", hp, ct)).real)
        _guard_tail(row, config.tail_tolerance, tau)
        rows.append({"tau": tau, **row})
    rec = TrajectoryRecord.from_rows(rows)
    rec.final = QuantumState(layout, psi.reshape(-1))
    return rec


def embed_internal(layout: HilbertLayout, m: np.ndarray, label: str = "spin") -> np.ndarray:
    """Matrix on the internal (all-spins) space acting as ``m`` on ``label``."""
    mats = [m if f.label == label else np.eye(2) for f in layout.spins]
    out = mats[0]
    for x in mats[1:]:
        out = np.kron(out, x)
    return out


def _tensor_observables(psi, modes, mdims, ladders, spin_ops, bounds) -> dict[str, float]:
    """Observables of a pure state stored as a tensor ``(*mode dims, internal)``."""
    row: dict[str, float] = {}
    prob = np.abs(psi) ** 2
    norm = float(prob.sum())
    n_modes = len(modes)
    names = {"x": ("x", "px"), "y": ("y", "py")}
    for label in ("x", "y"):
        row[names[label][0]] = row[names[label][1]] = math.nan
        row[f"tail_{label}"] = math.nan
    for k, label in enumerate(modes):
        lo = [slice(None)] * psi.ndim
        hi = [slice(None)] * psi.ndim
        lo[k], hi[k] = slice(0, mdims[k] - 1), slice(1, mdims[k])
        shape = [1] * psi.ndim
        shape[k] = mdims[k] - 1
        a_mean = complex(np.vdot(psi[tuple(lo)], ladders[k].reshape(shape) * psi[tuple(hi)]))
        row[names[label][0]] = 2.0 * a_mean.real
        row[names[label][1]] = 2.0 * a_mean.imag
        marg = prob.sum(axis=tuple(i for i in range(psi.ndim) if i != k))
        row[f"tail_{label}"] = float(marg[mdims[k] - tail_levels(mdims[k]):].sum())
    flat = psi.reshape(-1, psi.shape[-1])
    rho_int = flat.T @ flat.conj()
    for name in ("sx", "sy", "sz"):
        m = spin_ops.get(name)
        row[name] = _real(complex(np.einsum("ij,ji->", m, rho_int)), name) if m is not None else math.nan
    row["trace"] = norm
    row["purity"] = norm**2
    if bounds:
        leak = np.zeros(psi.shape[:n_modes], dtype=bool)
        for label, N in bounds.items():
            k = modes.index(label)
            shape = [1] * n_modes
            shape[k] = mdims[k]
            leak = leak | (np.arange(mdims[k]).reshape(shape) > N)
        row["leakage"] = float(prob.sum(axis=-1)[leak].sum())
    else:
        row["leakage"] = math.nan
    row["min_eig"] = math.nan
    return row


# -- open systems ------------------------------------------------------------

def damping_operators(
    layout: HilbertLayout, dissipation: Sequence[tuple[str, float]]
) -> list[tuple[OperatorMatrix, float]]:
    """Collapse operators ``(a_s, zeta_s)`` for vibrational damping of each listed mode."""
    out = []
    for label, rate in dissipation:
        f = layout.factor(label)
        if f.kind != "mode":
            raise HilbertError(f"damping acts on modes only; {label!r} is a {f.kind}")
        out.append((embed(ladder(f.dim)[0], label, layout), float(rate)))
    return out


def liouvillian(h: np.ndarray, collapse: Sequence[tuple[np.ndarray, float]]) -> np.ndarray:
    """Superoperator ``L`` with ``vec(d rho/d tau) = L vec(rho)``, row-major ``vec``."""
    n = h.shape[0]
    eye = np.eye(n)
    # row-major vec: vec(A X B) = (A kron B^T) vec(X)
    out = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for L, rate in collapse:
        ldl = L.conj().T @ L
        out = out + rate * (
            np.kron(L, L.conj()) - 0.5 * np.kron(ldl, eye) - 0.5 * np.kron(eye, ldl.T)
        )
    return out


def lindblad_rhs(rho: np.ndarray, h: np.ndarray, collapse: Sequence[tuple[np.ndarray, float]]) -> np.ndarray:
    out = -1j * (h @ rho - rho @ h)
    for L, rate in collapse:
        Ld = L.conj().T
        ldl = Ld @ L
        out = out + 0.5 * rate * (2.0 * L @ rho @ Ld - ldl @ rho - rho @ ldl)
    return out


def evolve_lindblad(
    H: OperatorMatrix | MomentumForm,
    collapse: Sequence[tuple[OperatorMatrix, float]],
    rho0: QuantumState,
    config: EvolutionConfig,
    *,
    bounds: Mapping[str, int] | None = None,
    extra: Mapping[str, OperatorMatrix] | None = None,
) -> TrajectoryRecord:
    """Integrate the master equation with jump operators ``collapse``.

    ``method="rk4"`` steps the density matrix and re-symmetrizes it after each
    step; ``method="exact"`` exponentiates the Liouvillian once per sample
    interval (small supports only).
    """
    if isinstance(H, MomentumForm):
        H = H.dense()
    if H.layout != rho0.layout:
        raise HilbertError("Hamiltonian and state live on different layouts")
    for L, rate in collapse:
        if L.layout != H.layout:
            raise HilbertError("collapse operator lives on a different layout")
        if not (np.isfinite(rate) and rate >= 0):
            raise ValueError(f"collapse rate must be >= 0, got {rate}")
    _check_hermitian(H.data)
    rho_full = rho0.density()
    QuantumState(rho0.layout, rho_full).check()
    if config.method == "momentum":
        raise DynamicsError("method 'momentum' is for closed systems only")

    if config.reduce:
        ops = [H.data] + [L.data for L, _ in collapse] + [L.data.conj().T @ L.data for L, _ in collapse]
        support = reachable_support(_initial_support(rho_full), ops)
    else:
        support = np.arange(rho_full.shape[0])
    idx = np.ix_(support, support)
    h = H.data[idx]
    jumps = [(L.data[idx], rate) for L, rate in collapse if rate > 0]
    rho = rho_full[idx].copy()
    n = len(support)
    ctx = ObservableContext(rho0.layout, support, bounds, h, extra)

    rows = []
    steps, taus = config.sample_steps(), config.sample_times()

    def sample(r, tau):
        row = record_observables(r, ctx)
        if row["min_eig"] < -NEGATIVE_EIG_TOL:
            raise IntegrationInstabilityError(
                f"density matrix eigenvalue {row['min_eig']:.3e} at tau={tau:.6g}; reduce dt"
            )
        _guard_tail(row, config.tail_tolerance, tau)
        rows.append({"tau": tau, **row})

    if config.method == "exact":
        if n > LIOUVILLIAN_MAX_DIM:
            raise DynamicsError(
                f"exact Liouvillian needs support <= {LIOUVILLIAN_MAX_DIM} states, got {n}"
            )
        Lsup = liouvillian(h, jumps)
        v0 = rho.reshape(-1)
        prop = expm(Lsup * (config.sample_every * config.dt))
        v = v0
        for i, tau in enumerate(taus):
            if i:
                v = prop @ v
            sample(v.reshape(n, n), tau)
        rec = TrajectoryRecord.from_rows(rows)
        rec.final = _embed_state(rho0.layout, support, v.reshape(n, n))
        return rec

    if n <= SUPEROP_RK4_MAX_DIM:
        # small supports: RK4 on vec(rho) with the superoperator, same update
        Lsup = liouvillian(h, jumps)
        f = lambda v: Lsup @ v  # noqa: E731
        state = rho.reshape(-1)
        to_rho = lambda v: v.reshape(n, n)  # noqa: E731
    else:
        f = lambda r: lindblad_rhs(r, h, jumps)  # noqa: E731
        state = rho
        to_rho = lambda r: r  # noqa: E731

    step = 0
    for k, tau in zip(steps, taus):
        while step < k:
            state = _rk4_step(f, state, config.dt)
            r = to_rho(state)
            state = (0.5 * (r + r.conj().T)).reshape(state.shape)
            step += 1
        sample(to_rho(state), tau)
    rec = TrajectoryRecord.from_rows(rows)
    rec.final = _embed_state(rho0.layout, support, to_rho(state))
    return rec


def evolve(
    H: OperatorMatrix | MomentumForm,
    state: QuantumState,
    config: EvolutionConfig,
    *,
    bounds: Mapping[str, int] | None = None,
    extra: Mapping[str, OperatorMatrix] | None = None,
) -> TrajectoryRecord:
    """Dispatch on dissipation: master equation if any rate is positive."""
    if config.dissipative or not state.is_pure:
        collapse = damping_operators(state.layout, config.dissipation)
        return evolve_lindblad(H, collapse, state, config, bounds=bounds, extra=extra)
    return evolve_unitary(H, state, config, bounds=bounds, extra=extra)
