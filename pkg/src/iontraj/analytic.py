"""Closed-form mean trajectories of the spin-orbit models.

All generators take an :class:`AnalyticParams` bundle and a grid of
dimensionless times and return a :class:`Curve` of ``(<xbar>, <ybar>)``.
Formulas are evaluated literally; momenta without brackets are first moments
and expectation values of products are factorized into products of moments
unless a second moment is supplied explicitly.

Axis convention: ``axis`` names ``s``; ``r`` is the other one.  Each formula
is stated for ``s`` and evaluated for both axes by swapping roles, so the
returned curve always has an x and a y column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants

from .hilbert import (
    QuantumState, _PAULI, apply_factor, embed, expectation, factor_expectation, pbar, xbar,
)

FREQUENCY_FORMS = ("momentum", "xi")
# the form selected by the numerical cross-check on the zb-rashba preset
DEFAULT_FREQUENCY_FORM = "momentum"


class SingularParametersError(ValueError):
    """Parameters at which a closed form divides by zero."""


@dataclass(frozen=True)
class AnalyticParams:
    """Primitive inputs of the closed forms.

    Derived quantities (``xi``, ``kappa_s``, ``varkappa``, ``Lambda``,
    ``varpi``) are properties so they can never disagree with the primitives.
    Second moments default to squares of the first moments.

    Parameters
    ----------
    axis : {"x", "y"}
        The ``s`` axis of the formula.
    epsilon : float
        Anisotropy ratio of the Rashba couplings.
    px, py : float
        First momentum moments ``<pbar_x>``, ``<pbar_y>``.
    px2, py2, pxpy : float, optional
        Second moments ``<pbar_x^2>``, ``<pbar_y^2>``, ``<pbar_x pbar_y>``.
    sx, sy, sz : float
        Initial pseudo-spin expectations.
    kappa : float
        ``alpha / beta`` for the combined Rashba-Dresselhaus coupling.
    gamma_ratio : float
        ``gamma_x / gamma_y`` of the Lissajous configuration.
    ratio_amplitude : float
        Amplitude ``<pbar_s pbar_r^-1>`` of the slow Lissajous axis.
    x0, y0 : float
        Initial position offsets.
    """

    axis: str = "x"
    epsilon: float = 1.0
    px: float = 0.0
    py: float = 0.0
    px2: float | None = None
    py2: float | None = None
    pxpy: float | None = None
    sx: float = 0.0
    sy: float = 0.0
    sz: float = 0.0
    kappa: float = 1.0
    gamma_ratio: float = 1.0
    ratio_amplitude: float = 1.0
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise ValueError(f"axis must be 'x' or 'y', got {self.axis!r}")
        for name in ("epsilon", "px", "py", "sx", "sy", "sz", "kappa", "gamma_ratio",
                     "ratio_amplitude", "x0", "y0"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        for name in ("px2", "py2"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0")

    # -- moments --------------------------------------------------------
    @property
    def r(self) -> str:
        return "y" if self.axis == "x" else "x"

    @property
    def mx2(self) -> float:
        return self.px**2 if self.px2 is None else self.px2

    @property
    def my2(self) -> float:
        return self.py**2 if self.py2 is None else self.py2

    @property
    def mxy(self) -> float:
        return self.px * self.py if self.pxpy is None else self.pxpy

    @property
    def xi(self) -> float:
        return math.sqrt(self.mx2 + self.my2)

    def p(self, axis: str) -> float:
        return self.px if axis == "x" else self.py

    def sigma(self, axis: str) -> float:
        return {"x": self.sx, "y": self.sy, "z": self.sz}[axis]

    def offset(self, axis: str) -> float:
        return self.x0 if axis == "x" else self.y0

    # -- combined-coupling parameters ----------------------------------
    def kappa_axis(self, axis: str) -> float:
        """``kappa_s = 2 (kappa^2 + (-1)^{1 + delta_sy})``."""
        sign = 1.0 if axis == "y" else -1.0
        return 2.0 * (self.kappa**2 + sign)

    @property
    def kappa_x(self) -> float:
        return self.kappa_axis("x")

    @property
    def kappa_y(self) -> float:
        return self.kappa_axis("y")

    @property
    def varkappa(self) -> float:
        return 2.0 * self.kappa * (self.kappa * self.xi**2 + 2.0 * self.mxy)

    @property
    def Lambda(self) -> float:
        k = self.kappa
        return (k * self.py + self.px) * self.sy + (k * self.px + self.py) * self.sx

    @property
    def varpi(self) -> float:
        return self.gamma_ratio * self.py

    def with_axis(self, axis: str) -> "AnalyticParams":
        return replace(self, axis=axis)

    @classmethod
    def from_state(cls, state: QuantumState, **kwargs) -> "AnalyticParams":
        """Moments and offsets measured on ``state``; ``kwargs`` fill the rest."""
        layout = state.layout
        vals: dict[str, float] = {}
        pvec = {}
        for label in ("x", "y"):
            if label in layout:
                d = layout.dim(label)
                vals["p" + label] = factor_expectation(pbar(d), label, state).real
                vals[label + "0"] = factor_expectation(xbar(d), label, state).real
                if state.is_pure:
                    pvec[label] = apply_factor(pbar(d), label, state)
                    vals[f"p{label}2"] = float(np.vdot(pvec[label], pvec[label]).real)
                else:
                    P = embed(pbar(d), label, layout)
                    vals[f"p{label}2"] = expectation(P @ P, state).real
        if "x" in layout and "y" in layout:
            if state.is_pure:
                vals["pxpy"] = float(np.vdot(pvec["x"], pvec["y"]).real)
            else:
                Px = embed(pbar(layout.dim("x")), "x", layout)
                Py = embed(pbar(layout.dim("y")), "y", layout)
                vals["pxpy"] = expectation(Px @ Py, state).real
        if "spin" in layout:
            for a in "xyz":
                vals["s" + a] = factor_expectation(_PAULI[a], "spin", state).real
        vals.update(kwargs)
        return cls(**vals)


@dataclass(frozen=True)
class Curve:
    tau: np.ndarray
    x: np.ndarray
    y: np.ndarray
    regime: str = ""

    def axis(self, label: str) -> np.ndarray:
        return self.x if label == "x" else self.y

    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])


def _grid(tau) -> np.ndarray:
    t = np.asarray(tau, dtype=float)
    if t.ndim != 1:
        raise ValueError("tau grid must be one-dimensional")
    return t


def _curve(tau, s_axis: str, s_vals, r_vals, regime: str = "") -> Curve:
    if s_axis == "x":
        return Curve(tau, s_vals, r_vals, regime)
    return Curve(tau, r_vals, s_vals, regime)


# -- anisotropic Rashba ----------------------------------------------------

def eq8_frequency(params: AnalyticParams, form: str = DEFAULT_FREQUENCY_FORM) -> float:
    """Trembling angular frequency: ``2 xi^{1/2}`` or ``2 <pbar_x>``."""
    if form == "xi":
        return 2.0 * math.sqrt(params.xi)
    if form == "momentum":
        return 2.0 * params.px
    raise ValueError(f"unknown frequency form {form!r}; expected one of {FREQUENCY_FORMS}")


def _eq8_axis(p: AnalyticParams, s: str, tau: np.ndarray, omega: float) -> np.ndarray:
    r = "y" if s == "x" else "x"
    xi, eps = p.xi, p.epsilon
    sign = 1.0 if s == "x" else -1.0  # (-1)^{1 + delta_sx}
    eps_s = eps if s == "y" else 1.0  # eps^{delta_sy}
    drift = sign * eps_s * p.sigma(r) * tau
    cos_term = eps * p.p(r) / (2.0 * xi) * (np.cos(omega * tau) - 1.0) * p.sz
    sin_term = (
        eps * p.p(r) / (2.0 * xi**1.5)
        * (np.sin(omega * tau) - omega * tau)
        * (p.sx * p.px + eps * p.sy * p.py)
    )
    return p.offset(s) + drift + cos_term + sin_term


def traj_eq8(params: AnalyticParams, tau, frequency: str = DEFAULT_FREQUENCY_FORM) -> Curve:
    """Mean position under the anisotropic Rashba coupling.

    Both axes are evaluated from the same ``s``-formula.  ``frequency``
    selects the trembling frequency: ``"xi"`` is the printed ``2 xi^{1/2}``,
    ``"momentum"`` is ``2 <pbar_x>`` (the frequency of the reduced form).
    """
    tau = _grid(tau)
    if params.xi == 0:
        raise SingularParametersError("xi = 0: the closed form divides by powers of xi")
    omega = eq8_frequency(params, frequency)
    return Curve(tau, _eq8_axis(params, "x", tau, omega), _eq8_axis(params, "y", tau, omega), "eq8")


def traj_eq8ab(params: AnalyticParams, tau) -> Curve:
    """Reduced trochoid for an x-packet with y in the vacuum and ``<sx> = 0``.

    Uses ``<pbar_x>`` for ``pbar_x`` and the second moment ``<pbar_y^2>`` for
    ``pbar_y^2``.  Offsets are zero by construction.
    """
    tau = _grid(tau)
    px, eps, xi = params.px, params.epsilon, params.xi
    if px == 0:
        raise SingularParametersError("<pbar_x> = 0: the reduced form divides by pbar_x")
    w = 2.0 * px
    c = eps**2 * params.my2
    x = (c / (2 * px**2) - 1.0) * tau - c / (2 * px**3) * np.sin(w * tau)
    y = eps * px / (2.0 * xi) * (np.cos(w * tau) - 1.0)
    return Curve(tau, x, y, "eq8ab")


# -- Rashba plus Dresselhaus ------------------------------------------------

def _eq9_axis(p: AnalyticParams, s: str, tau: np.ndarray) -> np.ndarray:
    r = "y" if s == "x" else "x"
    vk = p.varkappa
    ks = p.kappa_axis(s)
    sign = 1.0 if s == "x" else -1.0
    drift = sign * (p.sigma(s) - p.kappa * p.sigma(r)) * tau
    cos_term = -ks * vk**-2 * p.p(r) * p.sz * (1.0 - np.cos(vk * tau))
    sin_term = -ks * vk**-3 * p.p(r) * p.Lambda * (np.sin(vk * tau) - tau)
    return p.offset(s) + drift + cos_term + sin_term


def eq9_regime(params: AnalyticParams, tol: float = 1e-12) -> str:
    """``"locked"`` for kappa=1 and a sz eigenstate, ``"uniform"`` for kappa=1
    and a ``sigma_s`` eigenstate, else ``"generic"``."""
    if abs(params.kappa - 1.0) > tol:
        return "generic"
    if abs(abs(params.sz) - 1.0) <= tol:
        return "locked"
    if abs(abs(params.sigma(params.axis)) - 1.0) <= tol:
        return "uniform"
    return "generic"


def traj_eq9(params: AnalyticParams, tau) -> Curve:
    """Isotropic Rashba-Dresselhaus mean trajectory, evaluated literally.

    The returned curve's ``regime`` tags the kappa=1 special cases, in which
    the output coincides with :func:`traj_eq10` or :func:`traj_eq11`.
    """
    tau = _grid(tau)
    if params.varkappa == 0:
        raise SingularParametersError("varkappa = 0: the closed form divides by varkappa")
    return Curve(tau, _eq9_axis(params, "x", tau), _eq9_axis(params, "y", tau), eq9_regime(params))


def _check_matched(params: AnalyticParams) -> None:
    if params.kappa != 1.0:
        raise ValueError("the matched-coupling forms need kappa = 1")
    if params.kappa_axis(params.axis) != 0.0:
        raise ValueError(
            f"axis {params.axis!r} has kappa_s = {params.kappa_axis(params.axis)}; "
            "only the x axis locks at kappa = 1"
        )
    if params.varkappa == 0:
        raise SingularParametersError("varkappa = 0")


def traj_eq10(params: AnalyticParams, tau) -> Curve:
    """kappa = 1, sz eigenstate: axis ``s`` frozen, axis ``r`` harmonic."""
    tau = _grid(tau)
    _check_matched(params)
    s, r = params.axis, params.r
    vk = params.varkappa
    s_vals = np.full_like(tau, params.offset(s) - params.kappa_axis(s) * vk**-2 * params.p(r))
    r_vals = params.offset(r) - params.kappa_axis(r) * vk**-2 * params.p(s) * (1.0 - np.cos(vk * tau))
    return _curve(tau, s, s_vals, r_vals, "locked")


def traj_eq11(params: AnalyticParams, tau) -> Curve:
    """kappa = 1, ``sigma_s`` eigenstate: uniform motion along ``s``, trembling along ``r``."""
    tau = _grid(tau)
    _check_matched(params)
    s, r = params.axis, params.r
    vk = params.varkappa
    sign = 1.0 if s == "x" else -1.0
    s_vals = params.offset(s) + sign * params.sigma(s) * tau
    r_vals = (
        params.offset(r) + sign * tau
        - params.kappa_axis(r) * vk**-3 * params.p(s) * (params.py + params.px)
        * (np.sin(vk * tau) - tau)
    )
    return _curve(tau, s, s_vals, r_vals, "uniform")


# -- Lissajous ----------------------------------------------------------

def traj_eq12(params: AnalyticParams, tau) -> Curve:
    """Lissajous curve with angular frequencies ``varpi`` (axis s) and ``sqrt(varpi)`` (axis r)."""
    tau = _grid(tau)
    vp = params.varpi
    if not vp > 0:
        raise ValueError(f"varpi must be positive, got {vp}")
    s, r = params.axis, params.r
    if params.p(r) == 0:
        raise SingularParametersError(f"<pbar_{r}> = 0 gives a degenerate curve")
    s_vals = params.offset(s) - params.p(r) * (1.0 - np.cos(vp * tau))
    r_vals = params.offset(r) + params.ratio_amplitude * (1.0 - np.cos(math.sqrt(vp) * tau))
    return _curve(tau, s, s_vals, r_vals, "lissajous")


def lissajous_period(varpi: float, p: int, q: int) -> float:
    """Closure time ``2 pi q / sqrt(varpi)`` for a ``p:q`` frequency ratio."""
    if not varpi > 0:
        raise ValueError("varpi must be positive")
    return 2.0 * math.pi * q / math.sqrt(varpi)


def physical_frequencies(varpi: float, eta_omega_hz: float) -> tuple[float, float]:
    """``(eta Omega varpi, eta Omega sqrt(varpi))`` in Hz."""
    if not (varpi > 0 and eta_omega_hz > 0):
        raise ValueError("varpi and eta*Omega must be positive")
    return eta_omega_hz * varpi, eta_omega_hz * math.sqrt(varpi)


def energy_scale_ev(frequency_hz: float) -> float:
    """``h f`` in eV, for order-of-magnitude comparisons of coupling energies."""
    return constants.h * frequency_hz / constants.e
