"""Named experiment protocols wired end-to-end from configuration.

Each experiment resolves defaults (preset-dependent where sensible),
applies overrides, runs the physics modules and writes two artifacts into
the output directory:

* ``<experiment>_trace.csv``   the primary trace; time-domain traces carry
  ``#``-prefixed metadata lines before the column header, spectral
  profiles use the plain two-column profile format,
* ``<experiment>_summary.txt`` flat key = value results with units
  suffixed in the key names.

Identical configuration and seed give byte-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bloch, fitting, geometry, pumping, resonator, spectra
from .config import ConfigError, parse_config_text

PRESETS = (geometry.GROUND_CONFIG, geometry.EXCITED_CONFIG)

#: Measured Rabi frequencies (Hz, not angular) anchored per preset.  The
#: excited value is below the pure g-factor scaling of the ground one
#: because of extra insertion loss in that resonator assembly.
PRESET_RABI_HZ = {
    geometry.GROUND_CONFIG: 14.9e6,
    geometry.EXCITED_CONFIG: 6.2e6,
}


@dataclass(frozen=True)
class Param:
    """One configurable value: default (may depend on preset) and type."""

    default: object
    kind: str = "float"  # float | int | bool | str
    choices: tuple | None = None
    minimum: float | None = None

    def resolve_default(self, preset: str):
        return self.default(preset) if callable(self.default) else self.default

    def parse(self, key: str, raw: str):
        try:
            if self.kind == "float":
                val = float(raw)
            elif self.kind == "int":
                val = int(raw)
            elif self.kind == "bool":
                if raw not in ("true", "false"):
                    raise ValueError("expected true or false")
                val = raw == "true"
            else:
                val = raw
        except ValueError as exc:
            raise ConfigError(key, f"cannot parse {raw!r} as {self.kind}: {exc}") from None
        if self.choices is not None and val not in self.choices:
            raise ConfigError(key, f"must be one of {self.choices}")
        if self.minimum is not None and val < self.minimum:
            raise ConfigError(key, f"must be >= {self.minimum}")
        return val


def _rate_params(default_pump_flip):
    return {
        "t1_opt_s": Param(11e-3, minimum=1e-12),
        "t1_spin_s": Param(53e-3, minimum=1e-12),
        "branch_same": Param(0.5),
        "pump_rate_flip": Param(default_pump_flip, minimum=0.0),
        "pump_rate_preserve": Param(0.0, minimum=0.0),
        "temperature_k": Param(0.8),
        "splitting_hz": Param(3.12e9, minimum=0.0),
        "burn_duration_s": Param(0.1, minimum=1e-12),
    }


def _ensemble_params():
    return {
        "rabi_frequency_hz": Param(lambda p: PRESET_RABI_HZ[p], minimum=1.0),
        "line_fwhm_hz": Param(9e6, minimum=1e-3),
        "line_kind": Param("lorentzian", kind="str", choices=spectra.LINE_KINDS),
        "amplitude_spread": Param(0.01, minimum=0.0),
        "n_samples": Param(2001, kind="int", minimum=1),
        "quadrature": Param("grid", kind="str", choices=("grid", "monte-carlo")),
        "span_fwhm": Param(20.0, minimum=0.1),
    }


def _ensemble_from(params, seed):
    return bloch.EnsembleSpec(
        detuning_line=spectra.LineShape(params["line_kind"], params["line_fwhm_hz"]),
        rabi_spread=bloch.AmplitudeSpread(params["amplitude_spread"]),
        n_samples=params["n_samples"],
        quadrature=params["quadrature"],
        seed=seed,
        span_fwhm=params["span_fwhm"],
    )


def _rate_params_from(params):
    return pumping.RateParams(
        t1_opt=params["t1_opt_s"],
        t1_spin=params["t1_spin_s"],
        branch_same=params["branch_same"],
        pump_rate_flip=params["pump_rate_flip"],
        pump_rate_preserve=params["pump_rate_preserve"],
        temperature=params["temperature_k"],
        splitting=params["splitting_hz"],
    )


def _interp_max(x, y):
    """Location of the first local maximum, refined parabolically."""
    i = int(np.argmax(y))
    for j in range(1, len(y) - 1):  # first local max beats the global argmax
        if y[j] >= y[j - 1] and y[j] > y[j + 1]:
            i = j
            break
    if 0 < i < len(y) - 1:
        denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
        if denom != 0.0:
            return float(x[i] + 0.5 * (x[i] - x[i - 1]) * (y[i - 1] - y[i + 1]) / denom)
    return float(x[i])


# ---------------------------------------------------------------------------
# Runners.  Each returns (summary dict, trace description).


def _run_rabi(params, seed):
    spec = _ensemble_from(params, seed)
    f_set = params["rabi_frequency_hz"]
    omega = 2.0 * math.pi * f_set
    t_end = params["trace_periods"] / f_set
    t = np.linspace(0.0, t_end, params["trace_points"])
    times, inversion = bloch.rabi_trace(spec, omega, t)
    res = fitting.fit((times, inversion), "sinusoid-decay")
    f_fit = res.parameters["frequency"]
    summary = {
        "rabi_frequency_set_hz": f_set,
        "rabi_frequency_hz": f_fit,
        "rabi_frequency_sigma_hz": res.uncertainties["frequency"],
        "pi_time_s": 1.0 / (2.0 * f_fit),
        "first_maximum_s": _interp_max(times, inversion),
        "contrast_decay_rate_hz": res.parameters["decay_rate"],
        "fit_residual_norm": res.residual_norm,
        "pi_fidelity_line_avg": bloch.pi_fidelity_avg(omega, spec),
        "pi_fidelity_center": bloch.pi_fidelity_center(omega, spec.rabi_spread),
    }
    return summary, ("time_s", "inversion", times, inversion)


def _run_ramsey(params, seed):
    spec = _ensemble_from(params, seed)
    omega = 2.0 * math.pi * params["rabi_frequency_hz"]
    taus = np.linspace(0.0, params["tau_max_s"], params["tau_points"])
    t2 = params["t2_s"]
    x, sig = bloch.ramsey_trace(spec, omega, taus, t2=t2, ideal_pulses=params["ideal_pulses"])
    res = fitting.fit((x, sig), "single-exponential")
    summary = {
        "t2_star_s": res.parameters["tau"],
        "t2_star_sigma_s": res.uncertainties["tau"],
        "initial_transfer": float(sig[0]),
        "ideal_lorentzian_limit_s": 1.0 / (math.pi * params["line_fwhm_hz"]),
        "fit_residual_norm": res.residual_norm,
    }
    return summary, ("tau_s", "inversion", x, sig)


def _run_echo(params, seed):
    spec = _ensemble_from(params, seed)
    omega = 2.0 * math.pi * params["rabi_frequency_hz"]
    taus = np.linspace(params["tau_min_s"], params["tau_max_s"], params["tau_points"])
    x2, amp = bloch.echo_trace(spec, omega, taus, params["t2_s"], ideal_pulses=params["ideal_pulses"])
    res = fitting.fit((x2, amp), "single-exponential")
    summary = {
        "t2_set_s": params["t2_s"],
        "t2_fit_s": res.parameters["tau"],
        "t2_fit_sigma_s": res.uncertainties["tau"],
        "echo_amplitude_at_zero": res.parameters["amplitude"] + res.parameters["offset"],
        "fit_residual_norm": res.residual_norm,
    }
    return summary, ("two_tau_s", "echo_amplitude", x2, amp)


def _run_holeburn(params, seed):
    rp = _rate_params_from(params)
    waits = np.concatenate(
        [[0.0], np.geomspace(params["wait_min_s"], params["wait_max_s"], params["wait_points"] - 1)]
    )
    x, sig = pumping.antihole_trace(rp, params["burn_duration_s"], waits)
    res = fitting.fit((x, sig), "biexponential")
    summary = {
        "decay_time_s": res.parameters["tau_slow"],
        "decay_time_sigma_s": res.uncertainties["tau_slow"],
        "rise_time_s": res.parameters["tau_fast"],
        "rise_time_sigma_s": res.uncertainties["tau_fast"],
        "signal_at_zero_wait": float(sig[0]),
        "peak_wait_s": _interp_max(x, sig),
        "peak_signal": float(np.max(sig)),
        "fit_residual_norm": res.residual_norm,
    }
    return summary, ("wait_s", "antihole_excess", x, sig)


def _run_pumping_efficiency(params, seed):
    rp = _rate_params_from(params)
    burn = params["burn_duration_s"]
    eff_th = pumping.pumping_efficiency(rp, burn, baseline="thermal")
    eff_up = pumping.pumping_efficiency(rp, burn, baseline="unpolarized")

    line = spectra.LineShape(params["line_kind"], params["line_fwhm_hz"])
    rm = spectra.ReadoutModel(
        baseline_absorption=params["baseline_absorption"], probe_width=params["probe_width_hz"]
    )
    antihole = spectra.antihole_spectrum(line, max(min(eff_th, 1.0), -1.0), rm)
    unit_hole = spectra.antihole_spectrum(line, -1.0, rm)
    area_ratio = spectra.hole_area_ratio(unit_hole, antihole)

    # same-burn comparison: deplete the probed state through the
    # spin-preserving line at the same stimulated rate and compare the
    # population moved in by the flip burn with the one moved out.
    rp_hole = pumping.RateParams(
        t1_opt=rp.t1_opt,
        t1_spin=rp.t1_spin,
        branch_same=rp.branch_same,
        pump_rate_flip=0.0,
        pump_rate_preserve=rp.pump_rate_flip if rp.pump_rate_flip > 0 else rp.pump_rate_preserve,
        temperature=rp.temperature,
        splitting=rp.splitting,
    )
    p_th = pumping.thermal_state(rp).as_array()
    p_anti = pumping.evolve(pumping.thermal_state(rp), rp, burn).as_array()
    p_hole = pumping.evolve(pumping.thermal_state(rp_hole), rp_hole, burn).as_array()
    depletion = p_th[0] - p_hole[0]
    ratio_same_burn = (p_anti[0] - p_th[0]) / depletion if depletion > 0 else math.nan

    summary = {
        "efficiency_thermal_baseline": eff_th,
        "efficiency_unpolarized_baseline": eff_up,
        "area_ratio_vs_unit_hole": area_ratio,
        "area_ratio_same_burn_populations": float(ratio_same_burn),
        "antihole_fwhm_hz": spectra.profile_fwhm(antihole),
        "target_population_after_burn": float(p_anti[0]),
        "thermal_target_population": float(p_th[0]),
    }
    return summary, ("profile", antihole)


def _run_resonator(params, seed):
    rp = resonator.ResonatorParams(
        conversion=params["conversion_t_per_sqrt_w"],
        f0=params["f0_hz"],
        fwhm=params["fwhm_hz"],
        insertion_loss_db=params["insertion_loss_db"],
    )
    f = np.linspace(rp.f0 - params["span_hz"] / 2, rp.f0 + params["span_hz"] / 2, params["points"])
    db = np.asarray(resonator.s21(rp, f))
    # fit in linear power units where the response is a true Lorentzian
    res = fitting.fit((f, 10.0 ** (db / 10.0)), "lorentzian")
    peak_power = res.parameters["amplitude"] + res.parameters["offset"]
    summary = {
        "f0_set_hz": rp.f0,
        "fwhm_set_hz": rp.fwhm,
        "f0_hz": res.parameters["center"],
        "fwhm_hz": res.parameters["fwhm"],
        "insertion_loss_db": -10.0 * math.log10(peak_power),
        "q_factor": rp.quality_factor,
        "s21_peak_db": float(resonator.s21(rp, rp.f0)),
        "b1_at_100w_resonant_t": resonator.field_from_power(rp, 100.0),
        "fit_residual_norm": res.residual_norm,
    }
    return summary, ("frequency_hz", "s21_db", f, db)


def _run_heating_budget(params, seed):
    hm = resonator.HeatingModel(slope=params["slope_k_per_w"], max_delta_t=params["max_delta_t_k"])
    report = resonator.heating_budget(
        hm, params["p_peak_w"], params["pulse_len_s"], params["rep_period_s"]
    )
    rates = np.geomspace(1.0, 1e5, params["points"])
    periods = 1.0 / rates
    dts = np.array(
        [
            resonator.heating_budget(hm, params["p_peak_w"], params["pulse_len_s"], p).delta_t
            for p in periods
            if p >= params["pulse_len_s"]
        ]
    )
    rates = rates[: dts.size]
    summary = {
        "delta_t_k": report.delta_t,
        "ok": report.ok,
        "max_rep_rate_hz": report.max_rep_rate,
        "average_power_w": report.average_power,
        "cw_delta_t_per_mw_k": hm.slope * 1e-3,
    }
    return summary, ("rep_rate_hz", "delta_t_k", rates, dts)


_COMMON = {"preset": Param(geometry.GROUND_CONFIG, kind="str", choices=PRESETS)}

EXPERIMENTS = {
    "rabi": (
        _run_rabi,
        {
            **_COMMON,
            **_ensemble_params(),
            "trace_periods": Param(15.0, minimum=1.0),
            "trace_points": Param(2001, kind="int", minimum=16),
        },
    ),
    "ramsey": (
        _run_ramsey,
        {
            **_COMMON,
            **_ensemble_params(),
            "tau_max_s": Param(2e-7, minimum=1e-12),
            "tau_points": Param(401, kind="int", minimum=16),
            "ideal_pulses": Param(False, kind="bool"),
            "t2_s": Param(math.inf, minimum=1e-12),
        },
    ),
    "echo": (
        _run_echo,
        {
            **_COMMON,
            **_ensemble_params(),
            "tau_min_s": Param(1e-8, minimum=0.0),
            "tau_max_s": Param(1.5e-6, minimum=1e-12),
            "tau_points": Param(201, kind="int", minimum=16),
            "ideal_pulses": Param(False, kind="bool"),
            "t2_s": Param(1e-6, minimum=1e-12),
        },
    ),
    "holeburn": (
        _run_holeburn,
        {
            **_COMMON,
            **_rate_params(200.0),
            "wait_min_s": Param(1e-4, minimum=1e-9),
            "wait_max_s": Param(0.4, minimum=1e-6),
            "wait_points": Param(61, kind="int", minimum=21),
        },
    ),
    "pumping-efficiency": (
        _run_pumping_efficiency,
        {
            **_COMMON,
            **_rate_params(2000.0),
            "line_fwhm_hz": Param(9e6, minimum=1e-3),
            "line_kind": Param("lorentzian", kind="str", choices=spectra.LINE_KINDS),
            "baseline_absorption": Param(0.04),
            "probe_width_hz": Param(0.5e6, minimum=1.0),
        },
    ),
    "resonator": (
        _run_resonator,
        {
            **_COMMON,
            "f0_hz": Param(3.12e9, minimum=1.0),
            "fwhm_hz": Param(60e6, minimum=1.0),
            "insertion_loss_db": Param(5.0, minimum=0.0),
            "conversion_t_per_sqrt_w": Param(resonator.calibrate_conversion(), minimum=0.0),
            "span_hz": Param(600e6, minimum=1.0),
            "points": Param(1201, kind="int", minimum=32),
        },
    ),
    "heating-budget": (
        _run_heating_budget,
        {
            **_COMMON,
            "slope_k_per_w": Param(50.0, minimum=1e-9),
            "max_delta_t_k": Param(0.1, minimum=1e-9),
            "p_peak_w": Param(100.0, minimum=0.0),
            "pulse_len_s": Param(33e-9, minimum=1e-12),
            "rep_period_s": Param(2e-3, minimum=1e-12),
            "points": Param(101, kind="int", minimum=8),
        },
    ),
}

EXPERIMENT_NAMES = tuple(EXPERIMENTS)


@dataclass
class ExperimentConfig:
    """Fully resolved configuration for one experiment run."""

    experiment: str
    preset: str
    params: dict
    output_dir: Path
    seed: int | None = None

    @property
    def needs_seed(self) -> bool:
        return self.params.get("quadrature") == "monte-carlo"


def build_config(
    experiment: str,
    config_text: str | None = None,
    set_overrides: dict[str, str] | None = None,
    output_dir="out",
    seed: int | None = None,
) -> ExperimentConfig:
    """Resolve defaults, file values and overrides into a validated config.

    Raises :class:`ConfigError` naming the offending key for unknown keys,
    unparsable values, range violations, a mismatched ``experiment`` line
    or a missing seed with Monte Carlo quadrature.
    """
    if experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {experiment!r}; expected one of {EXPERIMENT_NAMES}")
    _, schema = EXPERIMENTS[experiment]

    raw: dict[str, str] = {}
    if config_text is not None:
        raw.update(parse_config_text(config_text))
    raw.update(set_overrides or {})

    file_experiment = raw.pop("experiment", experiment)
    if file_experiment != experiment:
        raise ConfigError("experiment", f"config is for {file_experiment!r}, not {experiment!r}")
    if "seed" in raw:
        file_seed = Param(None, kind="int").parse("seed", raw.pop("seed"))
        seed = seed if seed is not None else file_seed
    if "output_dir" in raw:
        output_dir = raw.pop("output_dir")

    preset_raw = raw.pop("preset", None)
    preset = (
        schema["preset"].parse("preset", preset_raw)
        if preset_raw is not None
        else schema["preset"].resolve_default(None)
    )

    params = {name: spec.resolve_default(preset) for name, spec in schema.items() if name != "preset"}
    for key, value in raw.items():
        if key not in schema or key == "preset":
            raise ConfigError(key, f"unknown key for experiment {experiment!r}")
        params[key] = schema[key].parse(key, value)

    cfg = ExperimentConfig(
        experiment=experiment, preset=preset, params=params, output_dir=Path(output_dir), seed=seed
    )
    if cfg.needs_seed and cfg.seed is None:
        raise ConfigError("seed", "monte-carlo quadrature requires a seed")
    _validate_physics(cfg)
    return cfg


def _validate_physics(cfg: ExperimentConfig):
    """Construct the owning module's types so their invariants run early."""
    p = cfg.params
    try:
        if cfg.experiment in ("rabi", "ramsey", "echo"):
            _ensemble_from(p, cfg.seed)
        elif cfg.experiment in ("holeburn", "pumping-efficiency"):
            _rate_params_from(p)
            if cfg.experiment == "pumping-efficiency":
                spectra.ReadoutModel(
                    baseline_absorption=p["baseline_absorption"], probe_width=p["probe_width_hz"]
                )
        elif cfg.experiment == "resonator":
            resonator.ResonatorParams(
                conversion=p["conversion_t_per_sqrt_w"],
                f0=p["f0_hz"],
                fwhm=p["fwhm_hz"],
                insertion_loss_db=p["insertion_loss_db"],
            )
        else:
            resonator.HeatingModel(slope=p["slope_k_per_w"], max_delta_t=p["max_delta_t_k"])
            if p["rep_period_s"] < p["pulse_len_s"]:
                raise ValueError("rep_period_s must be >= pulse_len_s")
    except ValueError as exc:
        raise ConfigError(cfg.experiment, str(exc)) from exc


def _format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def run(cfg: ExperimentConfig) -> dict:
    """Execute the experiment and write trace + summary files.

    Returns the summary mapping.  Output files are
    ``<experiment>_trace.csv`` and ``<experiment>_summary.txt`` inside
    ``cfg.output_dir`` (created if needed).
    """
    runner, _ = EXPERIMENTS[cfg.experiment]
    summary, trace = runner(cfg.params, cfg.seed)

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    stem = cfg.experiment
    trace_path = cfg.output_dir / f"{stem}_trace.csv"
    if trace[0] == "profile":
        trace[1].to_csv(trace_path)
    else:
        xname, yname, x, y = trace
        with open(trace_path, "w") as fh:
            fh.write(f"# experiment = {cfg.experiment}\n")
            fh.write(f"# preset = {cfg.preset}\n")
            for key in sorted(cfg.params):
                fh.write(f"# {key} = {_format_value(cfg.params[key])}\n")
            if cfg.seed is not None:
                fh.write(f"# seed = {cfg.seed}\n")
            fh.write(f"{xname},{yname}\n")
            for xi, yi in zip(x, y):
                fh.write(f"{float(xi)!r},{float(yi)!r}\n")

    summary_path = cfg.output_dir / f"{stem}_summary.txt"
    with open(summary_path, "w") as fh:
        fh.write(f"experiment = {cfg.experiment}\n")
        fh.write(f"preset = {cfg.preset}\n")
        if cfg.seed is not None:
            fh.write(f"seed = {cfg.seed}\n")
        for key, value in summary.items():
            fh.write(f"{key} = {_format_value(value)}\n")
    return summary
