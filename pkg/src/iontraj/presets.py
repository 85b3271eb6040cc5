"""Named scenarios: the six Lissajous panels and three trembling-motion demos."""

from __future__ import annotations

import math

from .analytic import DEFAULT_FREQUENCY_FORM, AnalyticParams
from .config import AnalyticOverlay, OutputConfig, ScenarioConfig, Units
from .dynamics import EvolutionConfig
from .hilbert import HilbertLayout
from .models import BoundedRashbaDresselhaus, Dirac1D, RashbaDresselhaus, Rashba2D
from .states import Coherent, GaussianMomentum, Spinor, product

COHERENT_DIM = 15
LISSAJOUS_T_MAX = 50.0
DAMPING_FACTOR = 1e-4

FIG2A_VARPI = 1.96
FIG2A_F1_HZ = 50e3
# closure time of the 7:5 curve, 10 pi / sqrt(varpi)
FIG2A_PERIOD = 10 * math.pi / math.sqrt(FIG2A_VARPI)
FIG2A_SAMPLES_PER_PERIOD = 1000

# |up> - i |down>
PHI_MINUS = Spinor(1.0, 1.0, -math.pi / 2)
UP = Spinor(1.0, 0.0)

PRESET_NAMES = (
    "fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig2f", "zb-rashba", "zb-locked", "dirac1d",
)


class PresetError(KeyError):
    pass


def _outputs(name: str) -> OutputConfig:
    return OutputConfig(csv=f"{name}.csv", svg=f"{name}.svg")


def _fig2a() -> ScenarioConfig:
    dt = FIG2A_PERIOD / FIG2A_SAMPLES_PER_PERIOD
    params = AnalyticParams(axis="x", py=1.0, gamma_ratio=FIG2A_VARPI, ratio_amplitude=1.0)
    # four closure periods sampled on a grid that tiles them exactly
    overlay = AnalyticOverlay("12", params, t_max=4 * FIG2A_PERIOD - dt, dt=dt)
    return ScenarioConfig(
        name="fig2a", analytic=overlay, outputs=_outputs("fig2a"),
        units=Units(eta_omega_hz=FIG2A_F1_HZ / FIG2A_VARPI),
    )


def _lissajous(name: str, N: int = 1, theta: complex = 1.0, beta_x: float = 1.0,
               beta_y: float = 1.0, damped: bool = False) -> ScenarioConfig:
    model = BoundedRashbaDresselhaus(N_x=N, N_y=N, beta_x=beta_x, beta_y=beta_y)
    dissipation = ()
    if damped:
        dissipation = (
            ("x", DAMPING_FACTOR * beta_x / model.delta_x),
            ("y", DAMPING_FACTOR * beta_y / model.delta_y),
        )
    return ScenarioConfig(
        name=name,
        model=model,
        dims={"x": COHERENT_DIM, "y": COHERENT_DIM},
        initial={
            "x": Coherent(theta, cutoff=N),
            "y": Coherent(theta, cutoff=N),
            "spin": PHI_MINUS,
        },
        evolution=EvolutionConfig(t_max=LISSAJOUS_T_MAX, dissipation=dissipation),
        outputs=_outputs(name),
    )


ZB_P0 = 2.0
ZB_MU = 0.1
ZB_DIMS = {"x": 300, "y": 40}
ZB_T_MAX = 8.0
ZB_DT = 0.01
LOCKED_DIMS = {"x": 220, "y": 80}
LOCKED_T_MAX = 4.0


def _zb_rashba() -> ScenarioConfig:
    # epsilon = alpha_x / alpha_y = 4, the regime eps^2 pbar_y^2 >> pbar_x^2
    model = Rashba2D(alpha_x=2.0, alpha_y=0.5)
    initial = {"x": GaussianMomentum(ZB_P0, ZB_MU), "spin": UP}
    state = product(initial, HilbertLayout.standard(ZB_DIMS))
    params = AnalyticParams.from_state(state, axis="y", epsilon=model.alpha_x / model.alpha_y)
    return ScenarioConfig(
        name="zb-rashba",
        model=model,
        dims=dict(ZB_DIMS),
        initial=initial,
        evolution=EvolutionConfig(t_max=ZB_T_MAX, dt=ZB_DT, sample_every=1, method="momentum"),
        analytic=AnalyticOverlay("8", params, ZB_T_MAX, ZB_DT, DEFAULT_FREQUENCY_FORM),
        outputs=_outputs("zb-rashba"),
    )


def _zb_locked() -> ScenarioConfig:
    # alpha = beta: kappa = 1; |up> is a sigma_z eigenstate
    model = RashbaDresselhaus(alpha_x=2.0, alpha_y=2.0, beta_x=2.0, beta_y=2.0)
    initial = {"x": GaussianMomentum(ZB_P0, ZB_MU), "spin": UP}
    state = product(initial, HilbertLayout.standard(LOCKED_DIMS))
    params = AnalyticParams.from_state(state, axis="x", kappa=model.alpha_x / model.beta_x)
    return ScenarioConfig(
        name="zb-locked",
        model=model,
        dims=dict(LOCKED_DIMS),
        initial=initial,
        evolution=EvolutionConfig(t_max=LOCKED_T_MAX, dt=ZB_DT, sample_every=1, method="momentum"),
        analytic=AnalyticOverlay("9", params, LOCKED_T_MAX, ZB_DT),
        outputs=_outputs("zb-locked"),
    )


def _dirac1d() -> ScenarioConfig:
    return ScenarioConfig(
        name="dirac1d",
        model=Dirac1D(gamma=2.0, stark=1.0),
        dims={"x": ZB_DIMS["x"]},
        initial={"x": GaussianMomentum(ZB_P0, ZB_MU), "spin": UP},
        evolution=EvolutionConfig(t_max=ZB_T_MAX, dt=ZB_DT, sample_every=1, method="momentum"),
        outputs=_outputs("dirac1d"),
    )


_BUILDERS = {
    "fig2a": _fig2a,
    "fig2b": lambda: _lissajous("fig2b"),
    "fig2c": lambda: _lissajous("fig2c", theta=1 - 1j),
    "fig2d": lambda: _lissajous("fig2d", N=2),
    "fig2e": lambda: _lissajous("fig2e", N=2, beta_x=0.4, beta_y=1.0),
    "fig2f": lambda: _lissajous("fig2f", damped=True),
    "zb-rashba": _zb_rashba,
    "zb-locked": _zb_locked,
    "dirac1d": _dirac1d,
}


def preset(name: str) -> ScenarioConfig:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise PresetError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
