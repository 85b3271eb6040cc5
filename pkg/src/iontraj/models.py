"""Hamiltonian families for the trapped-ion spin-orbit simulator.

Every builder works in dimensionless momenta, ``p_s = pbar_s / (2 Delta_s)``,
and returns the generator of evolution in the dimensionless time ``tau``.
Couplings are therefore already divided by the chosen frequency unit.

Sign and axis conventions follow each source Hamiltonian literally:

==========================  ============================================================
spec                        Hamiltonian
==========================  ============================================================
``Rashba2D``                ``a_x p_x sy - a_y p_y sx``
``Dresselhaus2D``           ``b_x p_x sx - b_y p_y sy``
``RashbaDresselhaus``       ``a_x sx p_y - a_y sy p_x + b_x sx p_x + b_y sy p_y``
``Rashba1DGap``             ``g p_x sy + W sz``
``Dirac1D``                 ``g p_x sx + W sz``
``FourLevelRashba``         ``G (p_x sy - p_y sx) (x) sx'``
``BoundedJC``               ``chi A sigma_k + chi^* A^dag sigma_-k``
``BoundedRashbaDresselhaus`` ``a_x P_x sy - a_y P_y sx + b_x P_x sx - b_y P_y sy``
==========================  ============================================================

with ``P_s = i (A_s^dag - A_s) / (2 Delta_s)`` the bounded momentum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from functools import reduce
from typing import ClassVar

import numpy as np

from .hilbert import (
    HilbertLayout,
    OperatorMatrix,
    _PAULI,
    upper_bound_A,
    bounded_eta,
    embed,
    embed_many,
    ladder,
    pbar,
)


class ModelError(ValueError):
    pass


SX, SY, SZ = _PAULI["x"], _PAULI["y"], _PAULI["z"]


def length_scale(mass: float, trap_frequency: float) -> float:
    """``Delta = 1 / sqrt(2 m nu)`` in units with hbar = 1."""
    if mass <= 0 or trap_frequency <= 0:
        raise ModelError("mass and trap frequency must be positive")
    return 1.0 / math.sqrt(2.0 * mass * trap_frequency)


@dataclass(frozen=True)
class CouplingSet:
    """Laser-level parameters of one axis pair and the SO couplings they induce.

    ``alpha_s = Delta_s eta_s Omega_s`` for the Rashba part and
    ``beta_s = Delta_s eta~_s Omega~_s`` for the Dresselhaus part; the tilde
    pair is kept independent of the carrier Stark frequency.
    """

    rabi_x: float = 0.0
    rabi_y: float = 0.0
    lamb_dicke_x: float = 0.0
    lamb_dicke_y: float = 0.0
    rabi_tilde_x: float = 0.0
    rabi_tilde_y: float = 0.0
    lamb_dicke_tilde_x: float = 0.0
    lamb_dicke_tilde_y: float = 0.0
    mass: float | None = None
    trap_x: float | None = None
    trap_y: float | None = None
    delta_x: float = 1.0
    delta_y: float = 1.0

    def delta(self, axis: str) -> float:
        trap = self.trap_x if axis == "x" else self.trap_y
        if self.mass is not None and trap is not None:
            return length_scale(self.mass, trap)
        return self.delta_x if axis == "x" else self.delta_y

    def alpha(self, axis: str) -> float:
        if axis == "x":
            return self.delta("x") * self.lamb_dicke_x * self.rabi_x
        return self.delta("y") * self.lamb_dicke_y * self.rabi_y

    def beta(self, axis: str) -> float:
        if axis == "x":
            return self.delta("x") * self.lamb_dicke_tilde_x * self.rabi_tilde_x
        return self.delta("y") * self.lamb_dicke_tilde_y * self.rabi_tilde_y

    def rashba_dresselhaus(self) -> "RashbaDresselhaus":
        return RashbaDresselhaus(
            alpha_x=self.alpha("x"), alpha_y=self.alpha("y"),
            beta_x=self.beta("x"), beta_y=self.beta("y"),
            delta_x=self.delta("x"), delta_y=self.delta("y"),
        )


# -- momentum-diagonal form --------------------------------------------------

@dataclass(frozen=True, eq=False)
class MomentumForm:
    """``H = sum_k pbar_{mode_k} (x) M_k + 1 (x) M_0`` on a layout.

    ``M_k`` act on the internal (spin) space, the tensor product of all spin
    factors.  Continuum SO Hamiltonians have this form, so they are diagonal
    in the joint eigenbasis of the mode momenta.
    """

    layout: HilbertLayout
    terms: tuple[tuple[str, np.ndarray], ...]
    constant: np.ndarray

    @property
    def internal_dim(self) -> int:
        return int(np.prod([f.dim for f in self.layout.spins]))

    def dense(self) -> OperatorMatrix:
        layout = self.layout
        mode_dims = [f.dim for f in layout.modes]
        n_modes = int(np.prod(mode_dims))
        out = np.kron(np.eye(n_modes), self.constant)
        for label, m in self.terms:
            mats = [pbar(f.dim).data if f.label == label else np.eye(f.dim) for f in layout.modes]
            out = out + np.kron(reduce(np.kron, mats), m)
        return OperatorMatrix(layout, out)


def _internal(layout: HilbertLayout, ops: dict[str, np.ndarray]) -> np.ndarray:
    mats = [ops.get(f.label, np.eye(2)) for f in layout.spins]
    return reduce(np.kron, mats).astype(complex)


def _check_finite(spec) -> None:
    for f in fields(spec):
        v = getattr(spec, f.name)
        if isinstance(v, (int, float, complex)) and not isinstance(v, bool):
            if not np.isfinite(v):
                raise ModelError(f"{type(spec).__name__}.{f.name} is not finite: {v!r}")


def _check_positive(spec, *names) -> None:
    for name in names:
        if not getattr(spec, name) > 0:
            raise ModelError(f"{type(spec).__name__}.{name} must be positive")


# -- model specs -------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpec:
    kind: ClassVar[str] = ""
    modes: ClassVar[tuple[str, ...]] = ("x", "y")
    spins: ClassVar[tuple[str, ...]] = ("spin",)

    def validate(self) -> None:
        _check_finite(self)

    def check_layout(self, layout: HilbertLayout) -> None:
        for label in self.modes:
            if label not in layout or layout.factor(label).kind != "mode":
                raise ModelError(f"{type(self).__name__} needs a mode factor {label!r}")
        for label in self.spins:
            if label not in layout or layout.factor(label).kind != "spin":
                raise ModelError(f"{type(self).__name__} needs a spin factor {label!r}")

    def default_layout(self, dims: dict[str, int]) -> HilbertLayout:
        missing = [m for m in self.modes if m not in dims]
        if missing:
            raise ModelError(f"no truncation dims for modes {missing}")
        return HilbertLayout.standard({m: dims[m] for m in dims}, spins=self.spins)

    def momentum_form(self, layout: HilbertLayout) -> MomentumForm | None:
        """Momentum-diagonal representation, or None if the model has none."""
        return None

    def hamiltonian(self, layout: HilbertLayout) -> OperatorMatrix:
        form = self.momentum_form(layout)
        if form is None:
            raise NotImplementedError
        return form.dense()


@dataclass(frozen=True)
class Laser(ModelSpec):
    """Four-sideband laser coupling before phase adjustment.

    ``H = K (x) sigma_+ + K^dag (x) sigma_-`` with
    ``K = i [Ox ex (e^{i p1} a_x + e^{i p2} a_x^dag) + Oy ey (e^{i p3} a_y + e^{i p4} a_y^dag)]``.
    """

    kind: ClassVar[str] = "laser"
    rabi_x: float = 1.0
    rabi_y: float = 1.0
    lamb_dicke_x: float = 1.0
    lamb_dicke_y: float = 1.0
    phi1: float = 0.0
    phi2: float = math.pi
    phi3: float = math.pi / 2
    phi4: float = 3 * math.pi / 2

    def hamiltonian(self, layout):
        k = None
        for label, rabi, eta, p_a, p_ad in (
            ("x", self.rabi_x, self.lamb_dicke_x, self.phi1, self.phi2),
            ("y", self.rabi_y, self.lamb_dicke_y, self.phi3, self.phi4),
        ):
            a, ad = ladder(layout.dim(label))
            piece = rabi * eta * (np.exp(1j * p_a) * a.data + np.exp(1j * p_ad) * ad.data)
            term = embed_many({label: piece, "spin": _PAULI["+"]}, layout)
            k = term if k is None else k + term
        h = 1j * k
        return h + h.dag()


@dataclass(frozen=True)
class Rashba2D(ModelSpec):
    kind: ClassVar[str] = "rashba2d"
    alpha_x: float = 1.0
    alpha_y: float = 1.0
    delta_x: float = 1.0
    delta_y: float = 1.0

    def validate(self):
        super().validate()
        _check_positive(self, "delta_x", "delta_y")

    def momentum_form(self, layout):
        return MomentumForm(layout, (
            ("x", self.alpha_x / (2 * self.delta_x) * _internal(layout, {"spin": SY})),
            ("y", -self.alpha_y / (2 * self.delta_y) * _internal(layout, {"spin": SX})),
        ), 0 * _internal(layout, {}))


@dataclass(frozen=True)
class Dresselhaus2D(ModelSpec):
    kind: ClassVar[str] = "dresselhaus2d"
    beta_x: float = 1.0
    beta_y: float = 1.0
    delta_x: float = 1.0
    delta_y: float = 1.0

    def validate(self):
        super().validate()
        _check_positive(self, "delta_x", "delta_y")

    def momentum_form(self, layout):
        return MomentumForm(layout, (
            ("x", self.beta_x / (2 * self.delta_x) * _internal(layout, {"spin": SX})),
            ("y", -self.beta_y / (2 * self.delta_y) * _internal(layout, {"spin": SY})),
        ), 0 * _internal(layout, {}))


@dataclass(frozen=True)
class RashbaDresselhaus(ModelSpec):
    kind: ClassVar[str] = "rashba_dresselhaus"
    alpha_x: float = 1.0
    alpha_y: float = 1.0
    beta_x: float = 1.0
    beta_y: float = 1.0
    delta_x: float = 1.0
    delta_y: float = 1.0

    def validate(self):
        super().validate()
        _check_positive(self, "delta_x", "delta_y")

    def momentum_form(self, layout):
        cx, cy = 1 / (2 * self.delta_x), 1 / (2 * self.delta_y)
        sx, sy = _internal(layout, {"spin": SX}), _internal(layout, {"spin": SY})
        return MomentumForm(layout, (
            ("y", self.alpha_x * cy * sx),
            ("x", -self.alpha_y * cx * sy),
            ("x", self.beta_x * cx * sx),
            ("y", self.beta_y * cy * sy),
        ), 0 * sx)


@dataclass(frozen=True)
class Rashba1DGap(ModelSpec):
    kind: ClassVar[str] = "rashba1d_gap"
    modes: ClassVar[tuple[str, ...]] = ("x",)
    gamma: float = 1.0
    stark: float = 1.0
    delta_x: float = 1.0

    def validate(self):
        super().validate()
        _check_positive(self, "delta_x")

    def momentum_form(self, layout):
        return MomentumForm(layout, (
            ("x", self.gamma / (2 * self.delta_x) * _internal(layout, {"spin": SY})),
        ), self.stark * _internal(layout, {"spin": SZ}))


@dataclass(frozen=True)
class Dirac1D(ModelSpec):
    kind: ClassVar[str] = "dirac1d"
    modes: ClassVar[tuple[str, ...]] = ("x",)
    gamma: float = 1.0
    stark: float = 1.0
    delta_x: float = 1.0

    def validate(self):
        super().validate()
        _check_positive(self, "delta_x")

    def momentum_form(self, layout):
        return MomentumForm(layout, (
            ("x", self.gamma / (2 * self.delta_x) * _internal(layout, {"spin": SX})),
        ), self.stark * _internal(layout, {"spin": SZ}))


@dataclass(frozen=True)
class FourLevelRashba(ModelSpec):
    """Isotropic Rashba coupling dressed by ``sx'`` on the primed doublet."""

    kind: ClassVar[str] = "four_level_rashba"
    spins: ClassVar[tuple[str, ...]] = ("spin", "spin2")
    coupling: float = 1.0
    delta: float = 1.0

    def validate(self):
        super().validate()
        _check_positive(self, "delta")

    def momentum_form(self, layout):
        c = self.coupling / (2 * self.delta)
        return MomentumForm(layout, (
            ("x", c * _internal(layout, {"spin": SY, "spin2": SX})),
            ("y", -c * _internal(layout, {"spin": SX, "spin2": SX})),
        ), 0 * _internal(layout, {}))


def chi(eta: float, omega: float, phi: float = 0.0) -> complex:
    """Bounded-interaction prefactor ``eta (1 - eta^2/2) Omega e^{i phi}``."""
    return eta * (1.0 - eta**2 / 2.0) * omega * np.exp(1j * phi)


def chi_n(n: int, eta: float, omega: float, phi: float = 0.0) -> complex:
    """Effective coupling of the ``|n> <-> |n+1>`` link inside the bounded block."""
    if n < 0:
        raise ModelError("n must be >= 0")
    return math.sqrt(n + 1) * (1.0 - eta**2 * n / 2.0) * chi(eta, omega, phi)


def _check_bounded_dim(layout, label, N):
    if layout.dim(label) <= N + 1:
        raise ModelError(
            f"mode {label!r} has dim {layout.dim(label)}; bounded model with N={N} needs dim > N+1"
        )


@dataclass(frozen=True)
class BoundedJC(ModelSpec):
    """``chi A(eta) sigma_k + chi^* A^dag(eta) sigma_-k`` with ``eta^2 = 2/N``.

    ``coupling`` overrides ``chi(eta)`` with an effective value; needed at
    ``N = 1`` where the laser-form prefactor vanishes identically.
    """

    kind: ClassVar[str] = "bounded_jc"
    modes: ClassVar[tuple[str, ...]] = ("x",)
    N: int = 1
    rabi: float = 1.0
    phase: float = 0.0
    k: int = 1
    coupling: complex | None = None

    def validate(self):
        super().validate()
        if int(self.N) != self.N or self.N < 1:
            raise ModelError(f"BoundedJC.N must be an integer >= 1, got {self.N!r}")
        if self.k not in (1, -1):
            raise ModelError("BoundedJC.k must be +1 or -1")

    @property
    def eta(self) -> float:
        return bounded_eta(self.N)

    @property
    def chi(self) -> complex:
        if self.coupling is not None:
            return complex(self.coupling)
        # eta (1 - eta^2/2) with eta^2 = 2/N, exact zero at N = 1
        return self.eta * (1.0 - 1.0 / self.N) * self.rabi * np.exp(1j * self.phase)

    def hamiltonian(self, layout):
        _check_bounded_dim(layout, "x", self.N)
        A = upper_bound_A(self.N, layout.dim("x")).data
        up, down = ("+", "-") if self.k == 1 else ("-", "+")
        h = self.chi * embed_many({"x": A, "spin": _PAULI[up]}, layout)
        return h + h.dag()


@dataclass(frozen=True)
class BoundedRashbaDresselhaus(ModelSpec):
    kind: ClassVar[str] = "bounded_rashba_dresselhaus"
    N_x: int = 1
    N_y: int = 1
    alpha_x: float = 0.0
    alpha_y: float = 0.0
    beta_x: float = 1.0
    beta_y: float = 1.0
    delta_x: float = 1.0
    delta_y: float = 1.0

    def validate(self):
        super().validate()
        _check_positive(self, "delta_x", "delta_y")
        for name in ("N_x", "N_y"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ModelError(f"{name} must be an integer >= 1, got {v!r}")

    @property
    def bounds(self) -> dict[str, int]:
        return {"x": self.N_x, "y": self.N_y}

    def hamiltonian(self, layout):
        p_ub = {}
        for label, N, delta in (("x", self.N_x, self.delta_x), ("y", self.N_y, self.delta_y)):
            _check_bounded_dim(layout, label, N)
            A = upper_bound_A(N, layout.dim(label)).data
            p_ub[label] = 1j * (A.conj().T - A) / (2 * delta)
        terms = (
            (self.alpha_x, "x", SY), (-self.alpha_y, "y", SX),
            (self.beta_x, "x", SX), (-self.beta_y, "y", SY),
        )
        out = None
        for c, label, s in terms:
            t = c * embed_many({label: p_ub[label], "spin": s}, layout)
            out = t if out is None else out + t
        return out


MODEL_TYPES: dict[str, type[ModelSpec]] = {
    cls.kind: cls
    for cls in (
        Laser, Rashba2D, Dresselhaus2D, RashbaDresselhaus, Rashba1DGap, Dirac1D,
        FourLevelRashba, BoundedJC, BoundedRashbaDresselhaus,
    )
}


def build(spec: ModelSpec, layout: HilbertLayout) -> OperatorMatrix:
    """Hermitian Hamiltonian of ``spec`` on ``layout`` (tau units)."""
    spec.validate()
    spec.check_layout(layout)
    return spec.hamiltonian(layout)


def build_laser(spec: Laser, layout: HilbertLayout) -> OperatorMatrix:
    return build(spec, layout)


def build_bounded_jc(spec: BoundedJC, layout: HilbertLayout) -> OperatorMatrix:
    return build(spec, layout)


def momentum_form(spec: ModelSpec, layout: HilbertLayout) -> MomentumForm | None:
    spec.validate()
    spec.check_layout(layout)
    return spec.momentum_form(layout)


def bounded_blocks(spec: ModelSpec | None) -> dict[str, int]:
    """Upper-bound level per mode for bounded models, else empty."""
    if isinstance(spec, BoundedRashbaDresselhaus):
        return spec.bounds
    if isinstance(spec, BoundedJC):
        return {"x": spec.N}
    return {}


def laser_rashba_equivalent(spec: Laser) -> tuple[float, Rashba2D]:
    """Spin rotation relating the Rashba-phase laser coupling to ``Rashba2D``.

    For phases ``(0, pi, pi/2, 3pi/2)`` the laser Hamiltonian expands to
    ``-Ox ex pbar_x sx + Oy ey pbar_y sy``.  Conjugating with
    ``R = exp(-i theta sz / 2)`` at ``theta = pi/2`` maps it onto
    ``Rashba2D(alpha_x=-2 Dx ex Ox, alpha_y=2 Dy ey Oy)`` (``Delta = 1``):
    the Pauli axes are swapped relative to the printed Rashba form and the
    momentum carries a factor 2 relative to ``Delta eta Omega p``.

    Returns ``(theta, rashba_spec)`` such that
    ``R H_laser R^dag == build(rashba_spec)``.
    """
    return math.pi / 2, Rashba2D(
        alpha_x=-2 * spec.lamb_dicke_x * spec.rabi_x,
        alpha_y=2 * spec.lamb_dicke_y * spec.rabi_y,
    )
