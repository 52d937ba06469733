"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines.  Criterion 3 asserts the declared pumping-efficiency bracket
[0.8, 1.0]; with bidirectional stimulated pumping, detailed balance at
0.8 K and the default lifetimes (11 ms optical, 53 ms spin) the
normalized transfer is capped near 0.68 for any branching fraction, so
that single check fails and documents the gap between the bracket and
this model.  Everything else passes.
"""

import math
import time

import numpy as np
import pytest

from erspin_sim import bloch, experiments, geometry, pumping, resonator, spectra
from oracles import brute_pi_fidelity_avg, rk4_bloch_batch, rk4_rates_batch

# Line-averaged pi-pulse transfer at 2 pi x 14.9 MHz over a 9 MHz
# Lorentzian, computed once by the RK4 + dense-sum oracle below and frozen.
FROZEN_PI_FIDELITY_AVG = 0.73908929


def _report(num: int, name: str, ok: bool, detail: str) -> bool:
    print(f"[criterion {num:02d}] {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


@pytest.fixture(scope="module")
def run_experiment(tmp_path_factory):
    cache = {}

    def runner(name, **overrides):
        key = (name, tuple(sorted(overrides.items())))
        if key not in cache:
            out = tmp_path_factory.mktemp(f"{name.replace('-', '_')}")
            cfg = experiments.build_config(
                name, set_overrides={k: str(v) for k, v in overrides.items()}, output_dir=out
            )
            cache[key] = experiments.run(cfg)
        return cache[key]

    return runner


def test_criterion_01_zeeman_consistency():
    geometry.field_for_splitting(10.5, 3.12e9)  # warm-up
    t0 = time.perf_counter()
    b = geometry.field_for_splitting(10.5, 3.12e9)
    elapsed = time.perf_counter() - t0
    ok = abs(b - 21.23e-3) <= 0.01e-3 and elapsed < 1e-3
    assert _report(1, "zeeman-consistency", ok, f"B = {b * 1e3:.4f} mT in {elapsed * 1e6:.0f} us")


def test_criterion_02_holeburn_roundtrip(run_experiment):
    t0 = time.perf_counter()
    summary = run_experiment("holeburn")
    elapsed = time.perf_counter() - t0
    rise, decay = summary["rise_time_s"], summary["decay_time_s"]
    ok = (
        abs(rise - 11e-3) <= 0.20 * 11e-3
        and abs(decay - 53e-3) <= 0.10 * 53e-3
        and elapsed < 5.0
    )
    assert _report(
        2,
        "holeburn-roundtrip",
        ok,
        f"rise = {rise * 1e3:.2f} ms, decay = {decay * 1e3:.2f} ms in {elapsed:.2f} s",
    )


def test_criterion_03_pumping_efficiency_bracket(run_experiment):
    t0 = time.perf_counter()
    summary = run_experiment("pumping-efficiency")
    elapsed = time.perf_counter() - t0
    eff = summary["efficiency_thermal_baseline"]
    ratio = summary["area_ratio_vs_unit_hole"]
    consistent = abs(ratio - eff) <= 0.02 * abs(eff)
    in_bracket = 0.8 <= eff <= 1.0
    ok = in_bracket and consistent and elapsed < 5.0
    assert _report(
        3,
        "pumping-efficiency-bracket",
        ok,
        f"efficiency = {eff:.3f} (bracket [0.8, 1.0]), area ratio = {ratio:.3f}, "
        f"unpolarized baseline = {summary['efficiency_unpolarized_baseline']:.3f}",
    ), (
        "normalized transfer with the default branching stays near "
        f"{eff:.2f}; symmetric stimulated pumping with t1_spin = 53 ms and "
        "t1_opt = 11 ms cannot reach the 0.8 floor for any branching"
    )


def test_criterion_04_antihole_linewidth():
    prof = spectra.antihole_spectrum(
        spectra.LineShape("lorentzian", 9e6), 0.5, spectra.ReadoutModel()
    )
    fwhm = spectra.profile_fwhm(prof)
    ok = abs(fwhm - 9e6) <= 0.05 * 9e6
    assert _report(4, "antihole-linewidth", ok, f"FWHM = {fwhm / 1e6:.3f} MHz")


def test_criterion_05_pi_pulse_timing(run_experiment):
    # single resonant spin: the first maximum sits at pi/Omega
    single = bloch.EnsembleSpec(
        detuning_line=spectra.LineShape("lorentzian", 9e6),
        rabi_spread=bloch.AmplitudeSpread(0.0),
        n_samples=1,
    )
    t = np.linspace(0.0, 60e-9, 6001)
    _, w = bloch.rabi_trace(single, 2.0 * math.pi * 14.9e6, t)
    t_single = t[int(np.argmax(w))]
    # ensemble fit: pi time from the fitted oscillation frequency
    ground = run_experiment("rabi")
    excited = run_experiment("rabi", preset="excited-config")
    t_fit = ground["pi_time_s"]
    ratio = ground["rabi_frequency_hz"] / excited["rabi_frequency_hz"]
    ok = (
        abs(t_single - 33.6e-9) <= 0.5e-9
        and abs(t_fit - 33.6e-9) <= 0.5e-9
        and abs(ratio - 14.9 / 6.2) <= 0.01 * (14.9 / 6.2)
    )
    assert _report(
        5,
        "pi-pulse-timing",
        ok,
        f"single-spin max = {t_single * 1e9:.2f} ns, fitted pi time = {t_fit * 1e9:.2f} ns, "
        f"frequency ratio = {ratio:.4f} vs {14.9 / 6.2:.4f}",
    )


def test_criterion_06_averaged_pi_fidelity():
    spec = bloch.EnsembleSpec(
        detuning_line=spectra.LineShape("lorentzian", 9e6),
        rabi_spread=bloch.AmplitudeSpread(0.0),
    )
    value = bloch.pi_fidelity_avg(2.0 * math.pi * 14.9e6, spec)
    brute = brute_pi_fidelity_avg(2.0 * math.pi * 14.9e6, 9e6)
    ok = (
        0.72 <= value <= 0.84
        and abs(value - FROZEN_PI_FIDELITY_AVG) <= 1e-4
        and abs(brute - FROZEN_PI_FIDELITY_AVG) <= 1e-4
    )
    assert _report(
        6,
        "averaged-pi-fidelity",
        ok,
        f"value = {value:.6f}, oracle = {brute:.6f}, frozen = {FROZEN_PI_FIDELITY_AVG}",
    )


def test_criterion_07_excited_contrast_ceiling():
    contrast = spectra.excited_readout_contrast(0.3, 0.3, spectra.ReadoutModel())
    ok = abs(contrast - 0.5) < 1e-12
    assert _report(7, "excited-contrast-ceiling", ok, f"contrast = {contrast!r}")


def test_criterion_08_ground_state_sign_flip():
    line = spectra.LineShape("lorentzian", 9e6)
    rm = spectra.ReadoutModel()
    anti = spectra.antihole_spectrum(line, 0.83, rm)
    hole = spectra.antihole_spectrum(line, -0.83, rm)  # perfect pi-pulse flips the sign
    base = rm.baseline_absorption
    dev = np.max(np.abs((anti.alpha - base) + (hole.alpha - base)))
    ok = dev < 1e-9
    assert _report(8, "ground-state-sign-flip", ok, f"max deviation = {dev:.2e}")


def test_criterion_09_resonator_response(run_experiment):
    rp = resonator.ResonatorParams(conversion=resonator.calibrate_conversion())
    peak = resonator.s21(rp, 3.12e9)
    low = resonator.s21(rp, 3.12e9 - 30e6)
    high = resonator.s21(rp, 3.12e9 + 30e6)
    summary = run_experiment("resonator")
    ok = (
        peak == pytest.approx(-5.0, abs=1e-12)
        and low == pytest.approx(peak - 10.0 * math.log10(2.0), abs=1e-12)
        and high == pytest.approx(peak - 10.0 * math.log10(2.0), abs=1e-12)
        and abs(summary["fwhm_hz"] - 60e6) <= 1.0
        and abs(summary["f0_hz"] - 3.12e9) <= 1.0
    )
    assert _report(
        9,
        "resonator-response",
        ok,
        f"peak = {peak:.3f} dB, -3 dB at +-30 MHz, fitted fwhm = {summary['fwhm_hz']:.1f} Hz",
    )


def test_criterion_10_heating_budget():
    hm = resonator.HeatingModel()
    cw = resonator.heating_budget(hm, 1e-3, 1.0, 1.0).delta_t
    base = resonator.heating_budget(hm, 100.0, 33e-9, 1e-3).delta_t
    linear = all(
        resonator.heating_budget(hm, 100.0, 33e-9, 1e-3 / k).delta_t
        == pytest.approx(k * base, rel=1e-12)
        for k in (2.0, 5.0, 10.0)
    )
    ok = cw == pytest.approx(0.05, abs=1e-15) and linear
    assert _report(10, "heating-budget", ok, f"cw 1 mW -> {cw:.6f} K, duty-cycle linearity ok")


def test_criterion_11_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)

    n_pulses = 10_000
    omega = rng.uniform(0.0, 2.0 * math.pi * 20e6, n_pulses)
    phase = rng.uniform(0.0, 2.0 * math.pi, n_pulses)
    det = rng.uniform(-2e7, 2e7, n_pulses)
    dur = rng.uniform(0.0, 1e-7, n_pulses)
    starts = rng.standard_normal((n_pulses, 3))
    starts /= np.linalg.norm(starts, axis=1, keepdims=True)
    brute = rk4_bloch_batch(starts, omega, phase, det, dur, steps=2000)
    ours = np.empty_like(brute)
    for i in range(n_pulses):
        p = bloch.Pulse(rabi=omega[i], duration=dur[i], phase=phase[i])
        ours[i] = bloch.propagate(bloch.BlochVector(*starts[i]), p, det[i]).as_array()
    bloch_dev = float(np.max(np.abs(ours - brute)))
    norm_dev = float(np.max(np.abs(np.linalg.norm(ours, axis=1) - 1.0)))
    assert norm_dev < 1e-9  # rotation preserves every Bloch-vector norm

    n_sets = 100
    params = []
    for _ in range(n_sets):
        params.append(
            pumping.RateParams(
                t1_opt=rng.uniform(5e-3, 20e-3),
                t1_spin=rng.uniform(20e-3, 100e-3),
                branch_same=rng.uniform(0.0, 1.0),
                pump_rate_flip=rng.uniform(0.0, 1500.0),
                pump_rate_preserve=rng.uniform(0.0, 1500.0),
                temperature=rng.uniform(0.5, 4.0),
                splitting=rng.uniform(1e9, 5e9),
            )
        )
    durations = rng.uniform(1e-3, 50e-3, n_sets)
    p0 = np.array([pumping.thermal_state(rp).as_array() for rp in params])
    gens = np.array([pumping.rate_generator(rp) for rp in params])
    brute_p = rk4_rates_batch(p0, gens, durations, steps=20000)
    ours_p = np.array(
        [
            pumping.evolve(pumping.thermal_state(rp), rp, float(t)).as_array()
            for rp, t in zip(params, durations)
        ]
    )
    rate_dev = float(np.max(np.abs(ours_p - brute_p)))

    elapsed = time.perf_counter() - t0
    ok = bloch_dev < 1e-6 and rate_dev < 1e-6 and elapsed < 60.0
    assert _report(
        11,
        "oracle-equivalence",
        ok,
        f"pulse dev = {bloch_dev:.2e} (1e4 pulses), rate dev = {rate_dev:.2e} "
        f"(1e2 sets) in {elapsed:.1f} s",
    )


def test_criterion_12_refocusing_identity():
    # per-detuning echo amplitude across the 9 MHz line, ideal pulses, no t2
    detunings = np.linspace(-4.5e6, 4.5e6, 41)
    tau = 0.4e-6
    amps = []
    for d in detunings:
        spec = bloch.EnsembleSpec(
            detuning_line=spectra.LineShape("lorentzian", 9e6, center=d),
            rabi_spread=bloch.AmplitudeSpread(0.0),
            n_samples=1,
        )
        _, amp = bloch.echo_trace(
            spec, 2.0 * math.pi * 14.9e6, [tau], t2=math.inf, ideal_pulses=True
        )
        amps.append(amp[0])
    spread = float(np.max(amps) - np.min(amps))
    ensemble = bloch.EnsembleSpec(
        detuning_line=spectra.LineShape("lorentzian", 9e6),
        rabi_spread=bloch.AmplitudeSpread(0.0),
    )
    _, full = bloch.echo_trace(
        ensemble, 2.0 * math.pi * 14.9e6, [tau], t2=math.inf, ideal_pulses=True
    )
    ok = spread < 1e-6 and abs(full[0] - 1.0) < 1e-6
    assert _report(
        12,
        "refocusing-identity",
        ok,
        f"per-detuning spread = {spread:.2e}, ensemble amplitude = {full[0]:.9f}",
    )
