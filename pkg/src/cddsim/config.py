"""Run-configuration ingestion (INI), resolved-parameter echo, and manifests.

Config files are flat key-value INI with one section per subsystem.  All
frequencies are in MHz and all times in us; unknown sections or keys are
rejected so typos fail loudly.  The manifest written next to every output
echoes the fully resolved configuration (in MHz and in rad/us), the seed, and
the produced files; re-running from the manifest's embedded config reproduces
the outputs byte for byte.
"""

from __future__ import annotations

import configparser
import json
import math
import time
from dataclasses import dataclass
from typing import Optional

from . import __version__
from .drive import AmpMod, DoubleDrive, DriveScheme, PhaseMod, SingleDrive, \
    alpha_of, omega2_mhz
from .evolve import SimulationConfig
from .noise import AmplitudeNoiseSpec, HyperfineEnsemble

__all__ = ["ConfigError", "load_config", "config_to_ini", "build_manifest",
           "write_manifest", "EXAMPLE_CONFIG"]

TWO_PI = 2.0 * math.pi

UNIT_CONVENTION = (
    "Configured frequencies are ordinary MHz, converted internally to angular"
    " rad/us (factor 2*pi). The bath diffusion coefficient c_mhz3 is used"
    " as-is as the diffusion of the angular transition-frequency shift"
    " (rad/us)^2 per us, and the sigma_z Hamiltonian coefficient is half that"
    " shift; this pairing reproduces the free-induction and spin-echo"
    " calibration targets, while applying an extra (2*pi)^2 to c_mhz3 does"
    " not."
)


class ConfigError(Exception):
    """Invalid or missing configuration; `key` names the offending entry."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


_SCHEME_KEYS = {"type", "omega1_mhz", "alpha", "omega2_mhz"}
_BATH_KEYS = {"tau_us", "c_mhz3"}
_AMP_KEYS = {"relative_error", "tau_us"}
_HYPERFINE_KEYS = {"centers_mhz", "weights", "peak_width_mhz"}
_RUN_KEYS = {"init_axis", "duration_us", "dt_us", "n_realizations",
             "master_seed", "drive_realization", "awg_hold_ns",
             "phase_jitter_rad"}
_SECTIONS = {"scheme": _SCHEME_KEYS, "bath": _BATH_KEYS,
             "amp_noise": _AMP_KEYS, "hyperfine": _HYPERFINE_KEYS,
             "run": _RUN_KEYS}


def _get_float(section, key: str, default=None) -> Optional[float]:
    raw = section.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing required key [{section.name}] {key}",
                              key=key)
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key} = {raw!r} is not a number",
                          key=key) from None


def _get_int(section, key: str, default: int) -> int:
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key} = {raw!r} is not an integer",
                          key=key) from None


def _get_floats(section, key: str, default):
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"[{section.name}] {key} = {raw!r} is not a "
                          "comma-separated list of numbers", key=key) from None


def _parse_scheme(section) -> DriveScheme:
    kind = section.get("type")
    if kind is None:
        raise ConfigError("missing required key [scheme] type", key="type")
    omega1 = _get_float(section, "omega1_mhz", 9.0)
    try:
        if kind == "single":
            return SingleDrive(omega1)
        if kind == "phase_mod":
            return PhaseMod(omega1, _get_float(section, "alpha"))
        if kind == "amp_mod":
            return AmpMod(omega1, _get_float(section, "alpha"))
        if kind == "double":
            return DoubleDrive(omega1, _get_float(section, "omega2_mhz"))
    except ValueError as exc:
        raise ConfigError(f"invalid [scheme] parameters: {exc}") from exc
    raise ConfigError(
        f"[scheme] type must be single, phase_mod, amp_mod or double, "
        f"got {kind!r}", key="type")


def load_config(path: str, require_scheme: bool = True) -> SimulationConfig:
    """Parse an INI run configuration into a SimulationConfig.

    Unknown sections or keys raise ConfigError naming the offender.  When
    `require_scheme` is false (undriven calibration runs), the [scheme]
    section may be omitted entirely.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file {path!r} not found or unreadable")

    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]", key=section)
        for key in parser[section]:
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]",
                                  key=key)

    scheme = None
    if parser.has_section("scheme"):
        scheme = _parse_scheme(parser["scheme"])
    elif require_scheme:
        raise ConfigError("missing required section [scheme]", key="scheme")

    bath = parser["bath"] if parser.has_section("bath") else \
        configparser.SectionProxy(parser, "bath")
    amp = parser["amp_noise"] if parser.has_section("amp_noise") else \
        configparser.SectionProxy(parser, "amp_noise")
    hyper = parser["hyperfine"] if parser.has_section("hyperfine") else \
        configparser.SectionProxy(parser, "hyperfine")
    run = parser["run"] if parser.has_section("run") else \
        configparser.SectionProxy(parser, "run")

    try:
        amp_noise = AmplitudeNoiseSpec(
            relative_error=_get_float(amp, "relative_error", 0.0075),
            tau=_get_float(amp, "tau_us", 500.0))
        hyperfine = HyperfineEnsemble.from_lists(
            _get_floats(hyper, "centers_mhz", (-2.2, 0.0, 2.2)),
            _get_floats(hyper, "weights", (1.0, 1.0, 1.0)),
            _get_float(hyper, "peak_width_mhz", 1.0))
    except ValueError as exc:
        raise ConfigError(f"invalid noise parameters: {exc}") from exc

    dt_raw = run.get("dt_us")
    dt = None if dt_raw in (None, "auto") else _get_float(run, "dt_us")
    hold_raw = run.get("awg_hold_ns")
    hold = None if hold_raw in (None, "none") else _get_float(run, "awg_hold_ns")

    config = SimulationConfig(
        scheme=scheme,
        duration=_get_float(run, "duration_us", 10.0),
        n_realizations=_get_int(run, "n_realizations", 400),
        master_seed=_get_int(run, "master_seed", 12345),
        init_axis=run.get("init_axis", "y"),
        dt=dt,
        bath_tau=_get_float(bath, "tau_us", 10.0),
        bath_c=_get_float(bath, "c_mhz3", 6.6667e-5),
        amp_noise=amp_noise,
        hyperfine=hyperfine,
        drive_realization=run.get("drive_realization", "canonical"),
        awg_hold_ns=hold,
        phase_jitter_rad=_get_float(run, "phase_jitter_rad", 0.0),
    )
    try:
        config.validate()
    except ValueError as exc:
        key = "dt_us" if "dt" in str(exc) else None
        raise ConfigError(str(exc), key=key) from exc
    return config


def config_to_ini(config: SimulationConfig) -> str:
    """Render a fully resolved configuration back to INI text."""
    lines = []
    scheme = config.scheme
    if scheme is not None:
        lines.append("[scheme]")
        if isinstance(scheme, SingleDrive):
            lines.append("type = single")
        elif isinstance(scheme, PhaseMod):
            lines.append("type = phase_mod")
            lines.append(f"alpha = {scheme.alpha!r}")
        elif isinstance(scheme, AmpMod):
            lines.append("type = amp_mod")
            lines.append(f"alpha = {scheme.alpha!r}")
        else:
            lines.append("type = double")
            lines.append(f"omega2_mhz = {scheme.omega2!r}")
        lines.append(f"omega1_mhz = {scheme.omega1!r}")
        lines.append("")
    lines += [
        "[bath]",
        f"tau_us = {config.bath_tau!r}",
        f"c_mhz3 = {config.bath_c!r}",
        "",
        "[amp_noise]",
        f"relative_error = {config.amp_noise.relative_error!r}",
        f"tau_us = {config.amp_noise.tau!r}",
        "",
        "[hyperfine]",
        "centers_mhz = " + ", ".join(repr(c) for c in config.hyperfine.centers),
        "weights = " + ", ".join(repr(w) for w in config.hyperfine.weights),
        f"peak_width_mhz = {config.hyperfine.peak_width!r}",
        "",
        "[run]",
        f"init_axis = {config.init_axis}",
        f"duration_us = {config.duration!r}",
        f"dt_us = {config.resolved_dt()!r}",
        f"n_realizations = {config.n_realizations}",
        f"master_seed = {config.master_seed}",
        f"drive_realization = {config.drive_realization}",
    ]
    if config.awg_hold_ns is not None:
        lines.append(f"awg_hold_ns = {config.awg_hold_ns!r}")
    if config.phase_jitter_rad:
        lines.append(f"phase_jitter_rad = {config.phase_jitter_rad!r}")
    return "\n".join(lines) + "\n"


def _config_echo(config: SimulationConfig) -> dict:
    scheme = config.scheme
    echo: dict = {}
    if scheme is not None:
        echo["scheme"] = {
            "type": type(scheme).__name__,
            "omega1_mhz": scheme.omega1,
            "omega1_rad_per_us": TWO_PI * scheme.omega1,
            "alpha": alpha_of(scheme),
            "omega2_mhz": omega2_mhz(scheme),
            "omega2_rad_per_us": TWO_PI * omega2_mhz(scheme),
        }
    bath_sigma = math.sqrt(0.5 * config.bath_c * config.bath_tau)
    echo["bath"] = {
        "tau_us": config.bath_tau,
        "c_configured_mhz3": config.bath_c,
        "c_internal_rad2_per_us3": config.bath_c,
        "stationary_sigma_rad_per_us": bath_sigma,
        "sigma_z_coefficient_scale": 0.5,
    }
    omega1a = TWO_PI * scheme.omega1 if scheme is not None else 0.0
    echo["amp_noise"] = {
        "relative_error": config.amp_noise.relative_error,
        "tau_us": config.amp_noise.tau,
        "diffusion_rad2_per_us3": config.amp_noise.diffusion(omega1a),
    }
    echo["hyperfine"] = {
        "centers_mhz": list(config.hyperfine.centers),
        "weights": list(config.hyperfine.weights),
        "peak_width_mhz": config.hyperfine.peak_width,
        "peak_width_is_gaussian_sigma": True,
    }
    echo["run"] = {
        "init_axis": config.init_axis,
        "duration_us": config.duration,
        "dt_us": config.resolved_dt(),
        "n_realizations": config.n_realizations,
        "master_seed": config.master_seed,
        "drive_realization": config.drive_realization,
        "awg_hold_ns": config.awg_hold_ns,
        "phase_jitter_rad": config.phase_jitter_rad,
    }
    return echo


@dataclass
class ManifestTimer:
    start: float = 0.0

    def __post_init__(self):
        self.start = time.monotonic()

    def elapsed(self) -> float:
        return time.monotonic() - self.start


def build_manifest(command: str, config: Optional[SimulationConfig],
                   outputs: list[str], runtime_seconds: float,
                   workers: int, extra: Optional[dict] = None) -> dict:
    manifest = {
        "artifact_version": __version__,
        "command": command,
        "workers": workers,
        "runtime_seconds": runtime_seconds,
        "outputs": sorted(outputs),
        "unit_convention": UNIT_CONVENTION,
    }
    if config is not None:
        manifest["master_seed"] = config.master_seed
        manifest["config"] = _config_echo(config)
        manifest["config_hash"] = config.config_hash()
        manifest["resolved_config_ini"] = config_to_ini(config)
    if extra:
        manifest.update(extra)
    return manifest


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


EXAMPLE_CONFIG = """\
# Full reference parameter set for the modulated-driving simulator.
# Frequencies in MHz, times in us.

[scheme]
type = phase_mod        # single | phase_mod | amp_mod | double
omega1_mhz = 9.0        # drive Rabi frequency
alpha = 0.1             # modulation strength, 2*omega2/omega1
# omega2_mhz = 0.45     # amplitude of the second drive; 'double' only

[bath]
tau_us = 10.0           # bath correlation time
c_mhz3 = 6.6667e-5      # bath diffusion coefficient (see manifest for units)

[amp_noise]
relative_error = 0.0075 # stationary relative drive-amplitude error
tau_us = 500.0          # amplitude-noise correlation time

[hyperfine]
centers_mhz = -2.2, 0.0, 2.2   # detuning peaks
weights = 1, 1, 1              # relative weights (normalized)
peak_width_mhz = 1.0           # Gaussian standard deviation of each peak

[run]
init_axis = y           # x (drive axis) | y (transverse) | z
duration_us = 40.0
dt_us = auto            # auto = 1/(40*omega1) when driven
n_realizations = 400
master_seed = 12345
drive_realization = canonical   # canonical | iq
"""
