"""Built-in simulators with known boundary behaviour.

Two models ship with the package:

* a two-dimensional trigonometric test function on the unit square whose
  restriction to the edges x1 = 0, x2 = 0 and x1 = 1 is known in closed
  form, and
* a hormonal-crosstalk model of root development in Arabidopsis: 18 coupled
  ODEs for hormone and protein concentrations, integrated to a fixed end
  time, with the PLS protein concentration as scalar output. Setting the
  rate k6 (PLS transcription) or k8 (PLS translation) to zero decouples the
  output subsystem, so the output is known analytically on those two
  hyperplanes of rate space.

A small registry maps evaluator names to ready-made AxisBoundary objects so
that serialized emulator configurations can refer to built-in boundaries by
name.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .emulator import AxisBoundary
from .errors import (
    ConfigError,
    DomainError,
    InvalidParameterError,
    ModelEvaluationError,
    ShapeError,
    StiffnessError,
    UsageError,
)

# ---------------------------------------------------------------------------
# Toy trigonometric function on the unit square.

TOY_DIM = 2
TOY_BOX = np.array([[0.0, 1.0], [0.0, 1.0]])


def toy_f(x) -> float:
    """f(x) = -sin(2 pi x2) + 0.9 sin(2 pi (1 - x1)(1 - x2)) on [0, 1]^2."""
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise ShapeError(f"toy_f expects a 2-d point, got shape {x.shape}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise DomainError(f"toy_f is defined on the unit square, got {x.tolist()}")
    x1, x2 = float(x[0]), float(x[1])
    return -math.sin(2.0 * math.pi * x2) + 0.9 * math.sin(
        2.0 * math.pi * (1.0 - x1) * (1.0 - x2)
    )


def _toy_edge_x1_zero(x) -> float:
    # f(0, x2) = -sin(2 pi x2) + 0.9 sin(2 pi (1 - x2)) = -1.9 sin(2 pi x2)
    return -1.9 * math.sin(2.0 * math.pi * float(x[1]))


def _toy_edge_x2_zero(x) -> float:
    # f(x1, 0) = 0.9 sin(2 pi (1 - x1)) = -0.9 sin(2 pi x1)
    return -0.9 * math.sin(2.0 * math.pi * float(x[0]))


def _toy_edge_x1_one(x) -> float:
    # f(1, x2) = -sin(2 pi x2)
    return -math.sin(2.0 * math.pi * float(x[1]))


def toy_boundary_K() -> AxisBoundary:
    """The edge x1 = 0, where f(0, x2) = -1.9 sin(2 pi x2)."""
    return AxisBoundary(axis=0, location=0.0, evaluator=_toy_edge_x1_zero, name="toy2d_x1_zero")


def toy_boundary_L() -> AxisBoundary:
    """The edge x2 = 0, where f(x1, 0) = -0.9 sin(2 pi x1)."""
    return AxisBoundary(axis=1, location=0.0, evaluator=_toy_edge_x2_zero, name="toy2d_x2_zero")


def toy_boundary_x1_one() -> AxisBoundary:
    """The edge x1 = 1, where f(1, x2) = -sin(2 pi x2). Parallel to toy_boundary_K."""
    return AxisBoundary(axis=0, location=1.0, evaluator=_toy_edge_x1_one, name="toy2d_x1_one")


# ---------------------------------------------------------------------------
# Hormonal crosstalk ODE model.

STATE_NAMES = (
    "Auxin", "X", "PLSp", "Ra", "Ra*", "CK", "ET", "PLSm", "Re", "Re*",
    "CTR1", "CTR1*", "PIN1m", "PIN1pi", "PIN1pm", "IAA", "cytokinin", "ACC",
)

RATE_NAMES = (
    "k1", "k1a", "k2", "k2a", "k2b", "k2c", "k3", "k3a", "k3auxin",
    "k4", "k5", "k6", "k6a", "k7", "k8", "k9", "k10", "k10a", "k11",
    "k12", "k12a", "k13", "k14", "k15", "k16", "k16a", "k17", "k18",
    "k18a", "k19", "k20a", "k20b", "k20c", "k1v21", "k22a", "k1v23",
    "k1v24", "k25a", "k25b",
    "V_IAA", "Km_IAA", "V_CK", "Km_CK", "V_ACC", "Km_ACC",
)

# The six rate constants varied during emulation, in axis order, with the
# upper end of each range (all ranges start at 0).
VARIED_RATES = ("k4", "k6", "k6a", "k7", "k8", "k9")
VARIED_HI = (10.0, 1.0, 20.0, 10.0, 10.0, 1.0)

_PLSP = STATE_NAMES.index("PLSp")
_IDX = {name: i for i, name in enumerate(STATE_NAMES)}


@dataclass(frozen=True)
class ArabidopsisSpec:
    """A full parameterization of the crosstalk model.

    rates maps all 45 named rate constants; initial_state maps all 18 named
    concentrations; t_end is the output time. Missing or unknown names fail
    loudly, listing them.
    """

    rates: Mapping[str, float]
    initial_state: Mapping[str, float]
    t_end: float = 2.0

    def __post_init__(self):
        rates = {str(k): float(v) for k, v in dict(self.rates).items()}
        state = {str(k): float(v) for k, v in dict(self.initial_state).items()}
        missing = sorted(set(RATE_NAMES) - set(rates))
        if missing:
            raise ConfigError(f"rates missing {len(missing)} names: {', '.join(missing)}")
        extra = sorted(set(rates) - set(RATE_NAMES))
        if extra:
            raise ConfigError(f"unknown rate names: {', '.join(extra)}")
        missing = sorted(set(STATE_NAMES) - set(state))
        if missing:
            raise ConfigError(
                f"initial_state missing {len(missing)} names: {', '.join(missing)}"
            )
        extra = sorted(set(state) - set(STATE_NAMES))
        if extra:
            raise ConfigError(f"unknown state names: {', '.join(extra)}")
        for k, v in rates.items():
            if not math.isfinite(v) or v < 0.0:
                raise ConfigError(f"rate {k} must be finite and nonnegative, got {v}")
        for k, v in state.items():
            if not math.isfinite(v) or v < 0.0:
                raise ConfigError(f"initial concentration {k} must be finite and nonnegative, got {v}")
        t_end = float(self.t_end)
        if not math.isfinite(t_end) or t_end <= 0.0:
            raise ConfigError(f"t_end must be positive and finite, got {t_end}")
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "initial_state", state)
        object.__setattr__(self, "t_end", t_end)

    def initial_vector(self) -> np.ndarray:
        return np.array([self.initial_state[name] for name in STATE_NAMES])

    def with_rates(self, overrides: Mapping[str, float]) -> "ArabidopsisSpec":
        unknown = sorted(set(overrides) - set(RATE_NAMES))
        if unknown:
            raise ConfigError(f"unknown rate names: {', '.join(unknown)}")
        rates = dict(self.rates)
        rates.update({k: float(v) for k, v in overrides.items()})
        return ArabidopsisSpec(rates=rates, initial_state=self.initial_state, t_end=self.t_end)


def load_arabidopsis_spec(path) -> ArabidopsisSpec:
    """Load a model parameterization from a .json or .toml file."""
    text = open(path, "rb").read()
    name = str(path)
    if name.endswith(".json"):
        doc = json.loads(text.decode("utf-8"))
    elif name.endswith(".toml"):
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        doc = tomllib.loads(text.decode("utf-8"))
    else:
        raise ConfigError(f"unsupported model config format: {name} (use .json or .toml)")
    if not isinstance(doc, dict) or "rates" not in doc or "initial_state" not in doc:
        raise ConfigError("model config needs 'rates' and 'initial_state' tables")
    return ArabidopsisSpec(
        rates=doc["rates"],
        initial_state=doc["initial_state"],
        t_end=doc.get("t_end", 2.0),
    )


@lru_cache(maxsize=1)
def default_arabidopsis_spec() -> ArabidopsisSpec:
    """The shipped placeholder parameterization (see data/arabidopsis_defaults.json)."""
    with resources.files("kbemu.data").joinpath("arabidopsis_defaults.json").open("rb") as fh:
        doc = json.load(fh)
    return ArabidopsisSpec(rates=doc["rates"], initial_state=doc["initial_state"], t_end=doc["t_end"])


def _ratio(num: float, den: float) -> float:
    # conc/scale with the convention 0/anything = 0; positive/0 diverges on
    # purpose (downstream saturation maps inf to 0 or the finiteness check
    # rejects it).
    if num == 0.0:
        return 0.0
    if den == 0.0:
        return math.inf
    return num / den


def _inh(conc: float, scale: float) -> float:
    # 1 / (1 + conc/scale)
    return 1.0 / (1.0 + _ratio(conc, scale))


def _sat(conc: float, scale: float) -> float:
    # conc / (scale + conc)
    if conc == 0.0:
        return 0.0
    return conc / (scale + conc)


def arabidopsis_rhs(t: float, y, rates: Mapping[str, float]) -> np.ndarray:
    """Right-hand side of the 18-state crosstalk system.

    States are clamped at zero before evaluation (small negative excursions
    are a solver artifact, and several terms assume nonnegative
    concentrations). The last three states are boundary species held
    constant. A nonfinite derivative raises ModelEvaluationError naming the
    state.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (len(STATE_NAMES),):
        raise ShapeError(f"state must have shape ({len(STATE_NAMES)},), got {y.shape}")
    s = np.maximum(y, 0.0)
    (auxin, xs, plsp, ra, ras, ck, et, plsm, re, res,
     ctr1, ctr1s, pin1m, pin1pi, pin1pm, iaa, cyto, acc) = s
    r = rates

    auxin_prod = (
        r["k1a"] * _inh(xs, r["k1"])
        + r["k2"]
        + r["k2a"] * et * _inh(ck, r["k2b"]) * _sat(plsp, r["k2c"])
        + r["V_IAA"] * _sat(iaa, r["Km_IAA"])
    )
    auxin_decay = r["k3"] * auxin + r["k3a"] * pin1pm * _sat(auxin, r["k3auxin"])

    ra_flux = -r["k4"] * auxin * ra + r["k5"] * ras
    re_flux = r["k11"] * res * et - (r["k10"] + r["k10a"] * plsp) * re
    ctr1_flux = -r["k14"] * res * ctr1 + r["k15"] * ctr1s

    pin1_recycle = r["k25a"] * pin1pm * _inh(auxin, r["k25b"])
    pin1m_prod = 0.0
    if xs > 0.0 and auxin > 0.0:
        pin1m_prod = r["k20a"] / (r["k20b"] + ck) * xs * _sat(auxin, r["k20c"])

    dy = np.array([
        auxin_prod - auxin_decay,                                   # Auxin
        r["k16"] - r["k16a"] * ctr1s - r["k17"] * xs,               # X
        r["k8"] * plsm - r["k9"] * plsp,                            # PLSp
        ra_flux,                                                    # Ra
        -ra_flux,                                                   # Ra*
        r["k18a"] * _inh(auxin, r["k18"]) - r["k19"] * ck
        + r["V_CK"] * _sat(cyto, r["Km_CK"]),                       # CK
        r["k12"] + r["k12a"] * auxin * ck - r["k13"] * et
        + r["V_ACC"] * _sat(acc, r["Km_ACC"]),                      # ET
        r["k6"] * ras * _inh(et, r["k6a"]) - r["k7"] * plsm,        # PLSm
        re_flux,                                                    # Re
        -re_flux,                                                   # Re*
        ctr1_flux,                                                  # CTR1
        -ctr1_flux,                                                 # CTR1*
        pin1m_prod - r["k1v21"] * pin1m,                            # PIN1m
        r["k22a"] * pin1m - (r["k1v23"] + r["k1v24"]) * pin1pi
        + pin1_recycle,                                             # PIN1pi
        r["k1v24"] * pin1pi - pin1_recycle,                         # PIN1pm
        0.0,                                                        # IAA
        0.0,                                                        # cytokinin
        0.0,                                                        # ACC
    ])
    if not np.all(np.isfinite(dy)):
        bad = STATE_NAMES[int(np.argmax(~np.isfinite(dy)))]
        raise ModelEvaluationError(f"nonfinite derivative for state {bad} at t = {t}")
    return dy


def integrate(spec: ArabidopsisSpec, rtol: float = 1e-8, atol: float = 1e-10) -> np.ndarray:
    """Integrate the crosstalk system to t_end with an explicit embedded 4(5) pair.

    Returns the final state vector in STATE_NAMES order. The method is
    never switched implicitly; if the explicit solver cannot advance, a
    StiffnessError reports how far it got.
    """
    rates = spec.rates
    sol = solve_ivp(
        arabidopsis_rhs,
        (0.0, spec.t_end),
        spec.initial_vector(),
        method="RK45",
        rtol=rtol,
        atol=atol,
        args=(rates,),
    )
    if not sol.success:
        raise StiffnessError(
            f"explicit 4(5) integration failed at t = {sol.t[-1]:.6g} of {spec.t_end}: "
            f"{sol.message}"
        )
    return sol.y[:, -1]


def plsp_output(spec: ArabidopsisSpec) -> float:
    """[PLSp] at t_end by full integration."""
    return float(integrate(spec)[_PLSP])


def plsp_boundary_k8(spec: ArabidopsisSpec) -> float:
    """[PLSp](t_end) when k8 = 0: pure exponential decay of the initial PLSp."""
    if spec.rates["k8"] != 0.0:
        raise UsageError(f"plsp_boundary_k8 needs k8 = 0, got {spec.rates['k8']}")
    return spec.initial_state["PLSp"] * math.exp(-spec.rates["k9"] * spec.t_end)


def plsp_boundary_k6(spec: ArabidopsisSpec) -> float:
    """[PLSp](t_end) when k6 = 0: PLSm decays freely and feeds PLSp.

    The two-exponential solution is evaluated through expm1 so the
    coincident-decay limit k7 == k9 needs no special case and no
    cancellation occurs for nearby rates.
    """
    if spec.rates["k6"] != 0.0:
        raise UsageError(f"plsp_boundary_k6 needs k6 = 0, got {spec.rates['k6']}")
    k7 = spec.rates["k7"]
    k9 = spec.rates["k9"]
    t = spec.t_end
    plsp0 = spec.initial_state["PLSp"]
    plsm0 = spec.initial_state["PLSm"]
    # k8 PLSm0 / (k9 - k7) * (e^{-k7 t} - e^{-k9 t})
    #   = k8 PLSm0 t e^{-k9 t} * expm1((k9 - k7) t) / ((k9 - k7) t)
    h = (k9 - k7) * t
    phi = 1.0 if h == 0.0 else math.expm1(h) / h
    return plsp0 * math.exp(-k9 * t) + spec.rates["k8"] * plsm0 * t * math.exp(-k9 * t) * phi


def input_transform(k_values) -> np.ndarray:
    """Map the six varied rates to the emulation cube [-1, 1]^6.

    Each rate range is [0, hi]; the map s = 2 sqrt(k / hi) - 1 spreads the
    fast low-rate variation. Accepts the rates in VARIED_RATES order.
    """
    k = np.asarray(k_values, dtype=float)
    if k.shape != (6,):
        raise ShapeError(f"expected 6 varied rates, got shape {k.shape}")
    hi = np.asarray(VARIED_HI)
    if np.any(k < 0.0) or np.any(k > hi):
        bad = int(np.argmax((k < 0.0) | (k > hi)))
        raise DomainError(
            f"rate {VARIED_RATES[bad]} = {k[bad]} outside its range [0, {hi[bad]}]"
        )
    return 2.0 * np.sqrt(k / hi) - 1.0


def inverse_input_transform(scaled) -> np.ndarray:
    """Scaled cube coordinates back to raw rates, k = hi ((s + 1) / 2)^2."""
    s = np.asarray(scaled, dtype=float)
    if s.shape != (6,):
        raise ShapeError(f"expected a 6-d scaled point, got shape {s.shape}")
    if np.any(s < -1.0) or np.any(s > 1.0):
        bad = int(np.argmax((s < -1.0) | (s > 1.0)))
        raise DomainError(f"scaled coordinate {bad} = {s[bad]} outside [-1, 1]")
    hi = np.asarray(VARIED_HI)
    return hi * np.square((s + 1.0) / 2.0)


def spec_from_scaled(scaled, base: Optional[ArabidopsisSpec] = None) -> ArabidopsisSpec:
    """Model spec with the varied rates taken from a scaled cube point."""
    base = default_arabidopsis_spec() if base is None else base
    raw = inverse_input_transform(scaled)
    return base.with_rates(dict(zip(VARIED_RATES, raw)))


def make_plsp_simulator(base: Optional[ArabidopsisSpec] = None) -> Callable[[np.ndarray], float]:
    """The emulation target: scaled cube point -> [PLSp](t_end) by integration."""
    base = default_arabidopsis_spec() if base is None else base

    def simulator(scaled) -> float:
        return plsp_output(spec_from_scaled(scaled, base))

    return simulator


_K6_AXIS = VARIED_RATES.index("k6")
_K8_AXIS = VARIED_RATES.index("k8")


def arabidopsis_boundary_k6(base: Optional[ArabidopsisSpec] = None) -> AxisBoundary:
    """The hyperplane k6 = 0 (scaled coordinate -1) with its closed-form output."""
    spec0 = default_arabidopsis_spec() if base is None else base

    def evaluator(scaled) -> float:
        return plsp_boundary_k6(spec_from_scaled(scaled, spec0))

    return AxisBoundary(axis=_K6_AXIS, location=-1.0, evaluator=evaluator,
                        name="arabidopsis_k6_zero" if base is None else None)


def arabidopsis_boundary_k8(base: Optional[ArabidopsisSpec] = None) -> AxisBoundary:
    """The hyperplane k8 = 0 (scaled coordinate -1) with its closed-form output."""
    spec0 = default_arabidopsis_spec() if base is None else base

    def evaluator(scaled) -> float:
        return plsp_boundary_k8(spec_from_scaled(scaled, spec0))

    return AxisBoundary(axis=_K8_AXIS, location=-1.0, evaluator=evaluator,
                        name="arabidopsis_k8_zero" if base is None else None)


# ---------------------------------------------------------------------------
# Registry of named builtin boundaries, for serialized emulator configs.

_BOUNDARY_FACTORIES: dict[str, Callable[[], AxisBoundary]] = {
    "toy2d_x1_zero": toy_boundary_K,
    "toy2d_x2_zero": toy_boundary_L,
    "toy2d_x1_one": toy_boundary_x1_one,
    "arabidopsis_k6_zero": arabidopsis_boundary_k6,
    "arabidopsis_k8_zero": arabidopsis_boundary_k8,
}


def boundary_names() -> tuple[str, ...]:
    return tuple(sorted(_BOUNDARY_FACTORIES))


def get_boundary(name: str) -> AxisBoundary:
    """Resolve a builtin boundary evaluator by registry name."""
    try:
        factory = _BOUNDARY_FACTORIES[name]
    except KeyError:
        raise ConfigError(
            f"unknown builtin evaluator {name!r}; known: {', '.join(boundary_names())}"
        ) from None
    return factory()


def register_boundary(name: str, factory: Callable[[], AxisBoundary]) -> None:
    """Add a named boundary factory (for user extensions and tests)."""
    if not callable(factory):
        raise InvalidParameterError("factory must be callable")
    _BOUNDARY_FACTORIES[str(name)] = factory
