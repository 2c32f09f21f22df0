"""Constitutive parameter sets and analytic relaxation functions.

Four material models: the Scott-Blair element (single power-law
relaxation), the fractional Kelvin-Voigt model (two elements in
parallel, sum of power laws), the fractional Maxwell model (two
elements in series, Miller-Ross relaxation), and the fractional
quasi-linear model (power-law reduced relaxation times an exponential
instantaneous elastic response).

Pseudo-constants are stored in SI units (Pa*s^alpha); report layers
convert to kPa for display.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .specfun import gamma_fn, mittag_leffler

ALPHA_MIN = 0.0001
ALPHA_MAX = 0.9999


@dataclass(frozen=True)
class SBParams:
    """Scott-Blair element: pseudo-constant E [Pa*s^alpha] and order alpha."""

    E: float
    alpha: float

    def __post_init__(self):
        if self.E < 0:
            raise DomainError(f"pseudo-constant must be >= 0, got {self.E:g}")
        if not ALPHA_MIN <= self.alpha <= ALPHA_MAX:
            raise DomainError(
                f"fractional order must lie in [{ALPHA_MIN}, {ALPHA_MAX}], "
                f"got {self.alpha:g}"
            )


@dataclass(frozen=True)
class FKVParams:
    """Fractional Kelvin-Voigt: two Scott-Blair elements in parallel."""

    E1: float
    alpha1: float
    E2: float
    alpha2: float

    def __post_init__(self):
        if self.E1 < 0 or self.E2 < 0:
            raise DomainError("pseudo-constants must be >= 0")
        for a in (self.alpha1, self.alpha2):
            if not 0.0 < a < 1.0:
                raise DomainError(f"fractional orders must lie in (0, 1), got {a:g}")


@dataclass(frozen=True)
class FMParams:
    """Fractional Maxwell: two Scott-Blair elements in series.

    Requires 0 < alpha1 < alpha2 < 1 (and hence 0 < alpha2 - alpha1 < 1).
    """

    E1: float
    alpha1: float
    E2: float
    alpha2: float

    def __post_init__(self):
        if self.E1 <= 0 or self.E2 <= 0:
            raise DomainError("pseudo-constants must be > 0")
        if not (0.0 < self.alpha1 < self.alpha2 < 1.0):
            raise DomainError(
                f"orders must satisfy 0 < alpha1 < alpha2 < 1, got "
                f"alpha1={self.alpha1:g}, alpha2={self.alpha2:g}"
            )


@dataclass(frozen=True)
class FQLVParams:
    """Quasi-linear model: sigma_e(eps) = A*(exp(B*eps)-1) elastic response
    convolved with the reduced relaxation kernel E*t^-alpha/Gamma(1-alpha)."""

    A: float
    B: float
    E: float
    alpha: float

    def __post_init__(self):
        if self.A <= 0:
            raise DomainError(f"A must be > 0, got {self.A:g}")
        if self.B < 0:
            raise DomainError(f"B must be >= 0, got {self.B:g}")
        if not 0.0 <= self.E <= 1.0:
            raise DomainError(f"reduced pseudo-constant must lie in [0, 1], got {self.E:g}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"fractional order must lie in (0, 1), got {self.alpha:g}")


ModelParams = SBParams | FKVParams | FMParams | FQLVParams


def _check_positive_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("relaxation kernel is singular at t <= 0")
    return t


def relax_sb(p: SBParams, t):
    """Scott-Blair relaxation modulus E/Gamma(1-alpha) * t^-alpha [Pa]."""
    t = _check_positive_time(t)
    return (p.E / gamma_fn(1.0 - p.alpha)) * t ** (-p.alpha)


def relax_fkv(p: FKVParams, t):
    """Kelvin-Voigt relaxation: sum of the two parallel power laws [Pa]."""
    t = _check_positive_time(t)
    g1 = (p.E1 / gamma_fn(1.0 - p.alpha1)) * t ** (-p.alpha1)
    g2 = (p.E2 / gamma_fn(1.0 - p.alpha2)) * t ** (-p.alpha2)
    return g1 + g2


def relax_fm(p: FMParams, t):
    """Miller-Ross relaxation of the fractional Maxwell model [Pa]:
    E1 * t^-alpha1 * ml(alpha2-alpha1, 1-alpha1, -(E1/E2) * t^(alpha2-alpha1)).
    """
    t = _check_positive_time(t)
    a = p.alpha2 - p.alpha1
    b = 1.0 - p.alpha1
    lam = p.E1 / p.E2
    scalar = t.ndim == 0
    tt = np.atleast_1d(t)
    out = np.empty_like(tt)
    for i, ti in enumerate(tt):
        out[i] = p.E1 * ti ** (-p.alpha1) * mittag_leffler(a, b, -lam * ti**a)
    return out[0] if scalar else out


def elastic_stress(p: FQLVParams, strain):
    """Instantaneous elastic stress A*(exp(B*eps)-1) [Pa]."""
    strain = np.asarray(strain, dtype=float)
    return p.A * np.expm1(p.B * strain)


def elastic_tangent(p: FQLVParams, strain):
    """Derivative of the elastic stress, A*B*exp(B*eps) [Pa]."""
    strain = np.asarray(strain, dtype=float)
    return p.A * p.B * np.exp(p.B * strain)


_KIND_OF_TYPE = {SBParams: "sb", FKVParams: "fkv", FMParams: "fm", FQLVParams: "fqlv"}


def params_to_json(p: ModelParams) -> dict:
    """Serialize with unit-bearing field names."""
    if isinstance(p, SBParams):
        return {"model": "sb", "E_Pa_s_alpha": p.E, "alpha": p.alpha}
    if isinstance(p, FKVParams):
        return {
            "model": "fkv",
            "E1_Pa_s_alpha1": p.E1,
            "alpha1": p.alpha1,
            "E2_Pa_s_alpha2": p.E2,
            "alpha2": p.alpha2,
        }
    if isinstance(p, FMParams):
        return {
            "model": "fm",
            "E1_Pa_s_alpha1": p.E1,
            "alpha1": p.alpha1,
            "E2_Pa_s_alpha2": p.E2,
            "alpha2": p.alpha2,
        }
    if isinstance(p, FQLVParams):
        return {
            "model": "fqlv",
            "A_Pa": p.A,
            "B": p.B,
            "E_s_alpha": p.E,
            "alpha": p.alpha,
        }
    raise TypeError(f"not a parameter set: {p!r}")


def params_from_json(d: dict) -> ModelParams:
    kind = d.get("model")
    if kind == "sb":
        return SBParams(E=d["E_Pa_s_alpha"], alpha=d["alpha"])
    if kind == "fkv":
        return FKVParams(
            E1=d["E1_Pa_s_alpha1"], alpha1=d["alpha1"],
            E2=d["E2_Pa_s_alpha2"], alpha2=d["alpha2"],
        )
    if kind == "fm":
        return FMParams(
            E1=d["E1_Pa_s_alpha1"], alpha1=d["alpha1"],
            E2=d["E2_Pa_s_alpha2"], alpha2=d["alpha2"],
        )
    if kind == "fqlv":
        return FQLVParams(A=d["A_Pa"], B=d["B"], E=d["E_s_alpha"], alpha=d["alpha"])
    raise DomainError(f"unknown model kind: {kind!r}")


def model_kind(p: ModelParams) -> str:
    return _KIND_OF_TYPE[type(p)]
