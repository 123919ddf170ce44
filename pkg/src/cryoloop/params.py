"""Physical parameters: validation, unit conversion, derived quantities.

Config files use ordinary frequencies (MHz, kHz) and ns, matching the
"2pi x MHz" convention the device community quotes; everything internal is
angular (rad/s) and seconds.  ``SystemParams`` is the single frozen source
of truth consumed by the integrators, so a parameter set constructed once
can be shared freely across trajectory workers.

Derived quantities:

* dispersive shift  chi = g^2 Ec / (Delta_qb (Delta_qb - Ec)) -- provided
  as a helper only.  Evaluated at the canonical device set it gives
  +2pi x 4.13 MHz while the operating value is -2pi x 2.5 MHz; the two are
  irreconcilable, so the simulator takes chi directly from config (default
  -2pi x 2.5 MHz) and the formula stays available for sensitivity studies.
* Purcell rate      gamma_p = kappa_b g^2 / Delta_qb^2
* critical photon number of the dispersive approximation
                    n_crit = Delta_qb^2 / (4 g^2)
* inflection detuning of the driven Kerr resonator
                    Delta_ac = sqrt(3/4) (kappa_a + kappa_d)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Bad or missing configuration value; the message names the key."""


class DegenerateDetuning(ValueError):
    """A derivation divided by a vanishing detuning."""


class DegenerateCoupling(ValueError):
    """A derivation divided by a vanishing coupling."""


def mhz_to_rad(nu_mhz: float) -> float:
    """Ordinary frequency in MHz -> angular frequency in rad/s."""
    return TWO_PI * 1e6 * nu_mhz


def rad_to_mhz(omega: float) -> float:
    return omega / (TWO_PI * 1e6)


def khz_to_rad(nu_khz: float) -> float:
    return TWO_PI * 1e3 * nu_khz


def ns_to_s(t_ns: float) -> float:
    return t_ns * 1e-9


@dataclass(frozen=True)
class KerrParams:
    """Kerr resonator: nonlinearity, port decays, initial detuning, phase."""

    K: float            # rad/s, negative in the operating regime
    kappa_a: float      # top-port (tee side) decay, rad/s
    kappa_d: float      # bottom-port (drive side) decay, rad/s
    delta_a0: float     # initial Kerr-drive detuning, rad/s
    theta_a: float      # propagation phase, rad

    def __post_init__(self):
        if not (self.kappa_a > 0):
            raise ConfigError("kappa_a must be positive")
        if not (self.kappa_d > 0):
            raise ConfigError("kappa_d must be positive")


@dataclass(frozen=True)
class CavityQubitParams:
    """3d cavity and dispersively coupled qubit."""

    kappa_b: float      # tee-port cavity decay, rad/s
    kappa_p: float      # Purcell-filtered port decay, rad/s
    chi: float          # dispersive shift, rad/s
    g: float            # qubit-cavity coupling, rad/s
    delta_qb: float     # qubit-cavity detuning, rad/s
    E_c: float          # anharmonicity / hbar, rad/s
    gamma_qb: float     # intrinsic qubit decay, 1/s
    theta_b: float      # propagation phase, rad

    def __post_init__(self):
        if self.kappa_b < 0 or self.kappa_p < 0:
            raise ConfigError("kappa_b and kappa_p must be non-negative")
        if self.gamma_qb < 0:
            raise ConfigError("gamma_qb must be non-negative")


@dataclass(frozen=True)
class NoiseParams:
    n_bar: float        # thermal occupation of the baths
    dt: float           # integration step, s
    master_seed: int

    def __post_init__(self):
        if not (self.dt > 0):
            raise ConfigError("dt_ns must be positive")
        if self.n_bar < 0:
            raise ConfigError("n_bar must be non-negative")


@dataclass(frozen=True)
class DerivedParams:
    gamma_p: float      # Purcell contribution to qubit decay, 1/s
    gamma_total: float  # gamma_qb + gamma_p, 1/s
    n_crit: float       # dispersive breakdown photon number
    delta_ac: float     # inflection detuning of the Kerr steady state, rad/s


def derive_dispersive_shift(g: float, delta_qb: float, e_c: float,
                            mode: str = "formula") -> float:
    """Dispersive shift from (g, Delta_qb, Ec), all in rad/s.

    ``mode="formula"`` evaluates g^2 Ec / (Delta_qb (Delta_qb - Ec)).
    ``mode="quoted"`` returns the canonical operating value
    (-2pi x 2.5 MHz) and only accepts the canonical device parameters, as
    the quoted value cannot be produced by the printed formula.
    """
    if mode == "quoted":
        canonical = (mhz_to_rad(122.0), mhz_to_rad(1200.0), mhz_to_rad(300.0))
        for value, ref in zip((g, delta_qb, e_c), canonical):
            if abs(value - ref) > 1e-6 * abs(ref):
                raise ValueError(
                    "quoted-mode dispersive shift is only defined for the "
                    "canonical device parameter set"
                )
        return mhz_to_rad(-2.5)
    if mode != "formula":
        raise ValueError(f"unknown mode {mode!r}")
    if delta_qb == 0 or delta_qb == e_c:
        raise DegenerateDetuning(
            "dispersive-shift formula requires delta_qb != 0 and delta_qb != E_c"
        )
    return g * g * e_c / (delta_qb * (delta_qb - e_c))


def derive_purcell_rate(kappa_b: float, g: float, delta_qb: float) -> float:
    """Cavity-mediated qubit decay kappa_b g^2 / Delta_qb^2 (inputs rad/s)."""
    if delta_qb == 0:
        raise DegenerateDetuning("Purcell rate requires delta_qb != 0")
    return kappa_b * (g / delta_qb) ** 2


def derive_ncrit(delta_qb: float, g: float) -> float:
    """Critical photon number Delta_qb^2 / (4 g^2) of the dispersive regime."""
    if g == 0:
        raise DegenerateCoupling("n_crit requires g != 0")
    return (delta_qb / (2.0 * g)) ** 2


def critical_detuning(kappa_a: float, kappa_d: float) -> float:
    """Inflection detuning sqrt(3/4) (kappa_a + kappa_d)."""
    return math.sqrt(0.75) * (kappa_a + kappa_d)


@dataclass(frozen=True)
class SystemParams:
    """Immutable bundle of all physical parameters (internal units)."""

    kerr: KerrParams
    cavity: CavityQubitParams
    noise: NoiseParams
    derived: DerivedParams
    chi_correction: bool = False  # optional Stark-shift reduction at high n_b

    @property
    def kappa_total(self) -> float:
        return self.kerr.kappa_a + self.kerr.kappa_d

    def with_gamma_total(self, gamma_total: float) -> "SystemParams":
        """Copy with the total qubit decay pinned (e.g. from a T1 target)."""
        if gamma_total < 0:
            raise ConfigError("gamma_total must be non-negative")
        return replace(self, derived=replace(self.derived, gamma_total=gamma_total))

    def with_chi(self, chi: float) -> "SystemParams":
        return replace(self, cavity=replace(self.cavity, chi=chi))

    def with_chi_correction(self, on: bool) -> "SystemParams":
        return replace(self, chi_correction=bool(on))


#: Canonical device parameter set (config-file units).
PAPER_CONFIG = {
    "K_MHz": -0.4,
    "kappa_a_MHz": 5.0,
    "kappa_d_MHz": 0.3,
    "kappa_b_MHz": 1.0,
    "kappa_p_MHz": 4.0,
    "chi_MHz": -2.5,
    "g_MHz": 122.0,
    "delta_qb_MHz": 1200.0,
    "Ec_MHz": 300.0,
    "gamma_qb_kHz": 5.0,
    "n_bar": 0.0,
    "theta_a_rad": 0.0,
    "theta_b_rad": 0.0,
    "dt_ns": 0.05,
    "master_seed": 7,
}

_INT_KEYS = {"master_seed"}


def load_and_validate(config: Mapping | str | Path | None = None,
                      defaults: bool = True) -> SystemParams:
    """Build :class:`SystemParams` from a flat config mapping or TOML path.

    With ``defaults=True`` missing keys fall back to the canonical device
    values; with ``defaults=False`` every key in :data:`PAPER_CONFIG` must
    be present.  Unknown keys, non-finite numbers and invariant violations
    raise :class:`ConfigError` naming the offending key.
    """
    if config is None:
        config = {}
    elif isinstance(config, (str, Path)):
        with open(config, "rb") as fh:
            config = tomllib.load(fh)

    unknown = sorted(set(config) - set(PAPER_CONFIG))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if not defaults:
        missing = sorted(set(PAPER_CONFIG) - set(config))
        if missing:
            raise ConfigError(f"missing config keys: {', '.join(missing)}")

    values = dict(PAPER_CONFIG)
    values.update(config)
    for key, val in values.items():
        if key in _INT_KEYS:
            if not isinstance(val, int):
                raise ConfigError(f"{key} must be an integer")
            continue
        if not isinstance(val, (int, float)) or isinstance(val, bool) \
                or not math.isfinite(float(val)):
            raise ConfigError(f"{key} must be a finite number")

    kappa_a = mhz_to_rad(values["kappa_a_MHz"])
    kappa_d = mhz_to_rad(values["kappa_d_MHz"])
    kerr = KerrParams(
        K=mhz_to_rad(values["K_MHz"]),
        kappa_a=kappa_a,
        kappa_d=kappa_d,
        delta_a0=3.5 * (kappa_a + kappa_d),
        theta_a=values["theta_a_rad"],
    )
    cavity = CavityQubitParams(
        kappa_b=mhz_to_rad(values["kappa_b_MHz"]),
        kappa_p=mhz_to_rad(values["kappa_p_MHz"]),
        chi=mhz_to_rad(values["chi_MHz"]),
        g=mhz_to_rad(values["g_MHz"]),
        delta_qb=mhz_to_rad(values["delta_qb_MHz"]),
        E_c=mhz_to_rad(values["Ec_MHz"]),
        gamma_qb=khz_to_rad(values["gamma_qb_kHz"]),
        theta_b=values["theta_b_rad"],
    )
    noise = NoiseParams(
        n_bar=float(values["n_bar"]),
        dt=ns_to_s(values["dt_ns"]),
        master_seed=values["master_seed"],
    )
    gamma_p = derive_purcell_rate(cavity.kappa_b, cavity.g, cavity.delta_qb)
    derived = DerivedParams(
        gamma_p=gamma_p,
        gamma_total=cavity.gamma_qb + gamma_p,
        n_crit=derive_ncrit(cavity.delta_qb, cavity.g),
        delta_ac=critical_detuning(kerr.kappa_a, kerr.kappa_d),
    )
    return SystemParams(kerr=kerr, cavity=cavity, noise=noise, derived=derived)


def paper_params() -> SystemParams:
    """Canonical device parameters."""
    return load_and_validate({})
