"""TOML configuration with CLI overrides.

One declarative file drives a run; every SimConfig/UnitMap field is
addressable.  Overrides are "section.key=value" strings parsed with the
same validation as file values.  An annotated example lives in the
README and in example_config() below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import tomli

from .fields import SimConfig
from .integrator import StepperSpec
from .raman import (
    DEFAULT_NOISE_SCALE,
    DampedOscillatorKernel,
    RamanSpec,
    load_kernel_table,
)
from .units import (
    FIG2_LOSS_GAMMA,
    UnitMap,
    gamma_from_db_per_km,
    gamma_from_db_per_period,
    xi_to_zeta,
)


class ConfigError(ValueError):
    """Invalid configuration; message names the offending field."""


_DEFAULTS = {
    "model": {
        "soliton_order": 1.0,
        "n_bar": 1.0e8,
        "gamma": 0.0,
        "dispersion": "anomalous",
        "input_shape": "sech",
        "input_width": 1.0,
        "noise": True,
        "kerr": True,
    },
    "grid": {"n_points": 512, "tau_window": 10.0},
    "stepper": {
        "d_zeta": 0.005,
        "scheme": "semi-implicit-midpoint",
        "divergence_threshold": 1.0e6,
        "midpoint_iterations": 4,
    },
    "run": {
        "xi_max": 4.0,
        "planes": [],
        "cutoffs": [0.125],
        "trajectories": 1000,
        "seed": 12345,
        "chunk_size": 128,
        "workers": 1,
        "n_batches": 16,
        "dump_trajectories": 0,
    },
    "units": {"t0_s": 1.0e-12, "k2_s2_per_m": -1.0e-26},
    "raman": {
        "enabled": False,
        "raman_fraction": 0.18,
        "tau1_s": 12.2e-15,
        "tau2_s": 32.0e-15,
        "temperature": 300.0,
        "kernel_table": "",
        "noise_scale": DEFAULT_NOISE_SCALE,
    },
}


def example_config() -> str:
    """A complete annotated configuration file."""
    return """\
# solnoise run configuration (TOML).  All keys optional; defaults shown.

[model]
soliton_order = 1.0       # amplitude of the sech input (N)
n_bar = 1e8               # photon-number scale in the noise correlation
gamma = 0.0               # amplitude loss per unit zeta; the string
                          # "fig2-loss" selects the 0.0236 dB/period preset
# loss_db_per_km = 0.1    # alternative to gamma (uses [units])
# loss_db_per_period = 0.0236   # alternative to gamma
dispersion = "anomalous"  # anomalous | normal | off
input_shape = "sech"      # sech | gaussian
input_width = 1.0         # gaussian width (ignored for sech)
noise = true              # false: deterministic run
kerr = true               # false: linear propagation (shot-noise baseline)

[grid]
n_points = 512            # power of two
tau_window = 10.0         # grid spans [-tau_window, tau_window)

[stepper]
d_zeta = 0.005
scheme = "semi-implicit-midpoint"   # or "explicit-euler" (reference)
divergence_threshold = 1e6
midpoint_iterations = 4

[run]
xi_max = 4.0              # propagation length in soliton periods
planes = [1.0, 2.0, 3.0, 4.0]   # output planes (xi); empty -> [xi_max]
cutoffs = [0.125]         # filter cutoffs (units 1/t0)
trajectories = 1000
seed = 12345
chunk_size = 128
workers = 1               # 0 -> machine parallelism
n_batches = 16            # batches for error bars
dump_trajectories = 0     # write the first K trajectories as binary

[units]
t0_s = 1e-12              # pulse width (s)
k2_s2_per_m = -1e-26      # group-velocity dispersion (s^2/m)

[raman]
enabled = false
raman_fraction = 0.18
tau1_s = 12.2e-15         # damped-oscillator kernel constants
tau2_s = 32e-15
temperature = 300.0       # K
kernel_table = ""         # path to a two-column (t [s], h [1/s]) table
noise_scale = 50.0          # thermal-noise normalisation (calibrated default)
"""


@dataclass
class ResolvedConfig:
    """Validated bundle of everything a run needs."""

    sim: SimConfig
    stepper: StepperSpec
    units: UnitMap
    planes_xi: list
    cutoffs: list
    trajectories: int
    chunk_size: int
    workers: int
    n_batches: int
    dump_trajectories: int
    raw: dict = dc_field(default_factory=dict)


def _coerce(value: str):
    low = value.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        pass
    if value.startswith("[") and value.endswith("]"):
        inner = value[1:-1].strip()
        return [] if not inner else [_coerce(v) for v in inner.split(",")]
    return value.strip()


def apply_overrides(data: dict, overrides) -> dict:
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        path, value = item.split("=", 1)
        parts = path.strip().split(".")
        if len(parts) != 2:
            raise ConfigError(f"override key {path!r} must be section.key")
        sec, key = parts
        if sec not in _DEFAULTS:
            raise ConfigError(f"unknown config section {sec!r}")
        data.setdefault(sec, {})[key] = _coerce(value)
    return data


def _merged(data: dict) -> dict:
    merged = {}
    for sec, defaults in _DEFAULTS.items():
        merged[sec] = dict(defaults)
        for key, val in data.get(sec, {}).items():
            if key not in defaults and not (
                sec == "model" and key in ("loss_db_per_km", "loss_db_per_period")
            ):
                raise ConfigError(f"unknown key [{sec}] {key!r}")
            merged[sec][key] = val
    for sec in data:
        if sec not in _DEFAULTS:
            raise ConfigError(f"unknown config section [{sec}]")
    return merged


def _resolve_gamma(model: dict, units: UnitMap) -> float:
    sources = [
        k for k in ("gamma", "loss_db_per_km", "loss_db_per_period")
        if model.get(k) not in (None, 0.0, "")
    ]
    if len(sources) > 1:
        raise ConfigError(f"[model] gamma specified more than once: {sources}")
    gamma = model.get("gamma", 0.0)
    if isinstance(gamma, str):
        if gamma == "fig2-loss":
            return FIG2_LOSS_GAMMA
        raise ConfigError(f"[model] gamma preset {gamma!r} unknown (try 'fig2-loss')")
    if model.get("loss_db_per_km"):
        return gamma_from_db_per_km(units, float(model["loss_db_per_km"]))
    if model.get("loss_db_per_period"):
        return gamma_from_db_per_period(float(model["loss_db_per_period"]))
    return float(gamma)


def resolve(data: dict, overrides=None) -> ResolvedConfig:
    data = apply_overrides(dict(data), overrides)
    cfg = _merged(data)
    m, g, st, run, un, ra = (
        cfg["model"], cfg["grid"], cfg["stepper"], cfg["run"], cfg["units"], cfg["raman"],
    )

    try:
        units = UnitMap(t0=float(un["t0_s"]), k2=float(un["k2_s2_per_m"]))
    except ValueError as exc:
        raise ConfigError(f"[units] {exc}") from exc

    raman_spec = None
    if ra["enabled"]:
        try:
            if ra["kernel_table"]:
                kernel = load_kernel_table(str(ra["kernel_table"]))
            else:
                kernel = DampedOscillatorKernel(
                    tau1_s=float(ra["tau1_s"]), tau2_s=float(ra["tau2_s"])
                )
            raman_spec = RamanSpec(
                enabled=True,
                raman_fraction=float(ra["raman_fraction"]),
                temperature=float(ra["temperature"]),
                pulse_width_s=units.t0,
                kernel=kernel,
                noise_scale=float(ra["noise_scale"]),
            )
        except ValueError as exc:
            raise ConfigError(f"[raman] {exc}") from exc

    try:
        gamma = _resolve_gamma(m, units)
        sim = SimConfig(
            soliton_order=float(m["soliton_order"]),
            n_bar=float(m["n_bar"]),
            gamma=gamma,
            dispersion=str(m["dispersion"]),
            d_zeta=float(st["d_zeta"]),
            zeta_max=xi_to_zeta(float(run["xi_max"])),
            n_points=int(g["n_points"]),
            tau_window=float(g["tau_window"]),
            seed=int(run["seed"]),
            noise=bool(m["noise"]),
            kerr=bool(m["kerr"]),
            input_shape=str(m["input_shape"]),
            input_width=float(m["input_width"]),
            raman=raman_spec,
        )
    except ValueError as exc:
        raise ConfigError(f"[model]/[grid] {exc}") from exc

    try:
        stepper = StepperSpec(
            scheme=str(st["scheme"]),
            d_zeta=float(st["d_zeta"]),
            divergence_threshold=float(st["divergence_threshold"]),
            midpoint_iterations=int(st["midpoint_iterations"]),
        )
    except ValueError as exc:
        raise ConfigError(f"[stepper] {exc}") from exc

    planes = [float(x) for x in run["planes"]] or [float(run["xi_max"])]
    if any(not 0 < x <= float(run["xi_max"]) * (1 + 1e-9) for x in planes):
        raise ConfigError("[run] planes must lie in (0, xi_max]")
    cutoffs = [float(c) for c in run["cutoffs"]]
    if not cutoffs or any(c <= 0 for c in cutoffs):
        raise ConfigError("[run] cutoffs must be positive and non-empty")
    trajectories = int(run["trajectories"])
    if trajectories < 1:
        raise ConfigError("[run] trajectories must be >= 1")
    workers = int(run["workers"])
    if workers < 0:
        raise ConfigError("[run] workers must be >= 0")
    if workers == 0:
        import os

        workers = os.cpu_count() or 1

    return ResolvedConfig(
        sim=sim,
        stepper=stepper,
        units=units,
        planes_xi=planes,
        cutoffs=cutoffs,
        trajectories=trajectories,
        chunk_size=int(run["chunk_size"]),
        workers=workers,
        n_batches=int(run["n_batches"]),
        dump_trajectories=int(run["dump_trajectories"]),
        raw=cfg,
    )


def load_config(path: str, overrides=None) -> ResolvedConfig:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc
    return resolve(data, overrides)
