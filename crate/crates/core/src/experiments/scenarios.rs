use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, TAU};

use super::config::{AnalysisSource, ScenarioConfig, ScenarioId, Sideband};
use super::fit::{fit_gaussian_decay, fit_line, fit_sinusoid, unwrap_phases, SinusoidFit};
use super::measure::{expected_bit, expected_parity, sample_bit, sample_parity, Tally};
use super::result::RunResult;
use super::ExperimentError;
use crate::qubit::{alignment_signal, sideband_phases, NoiseState, RfPhases, TwoQubitState};
use crate::signal_chain::{ChainGraph, DriftProfile, Transition};

/// Stream reserved for quantities shared by every point of a run.
const SHARED_STREAM: u64 = u64::MAX;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn nested(outer: usize, inner: usize) -> u64 {
    ((outer as u64) << 32) | inner as u64
}

/// Evenly spaced analysis phases over one full turn, endpoint excluded.
fn analysis_grid(points: usize) -> Vec<f64> {
    (0..points).map(|j| TAU * j as f64 / points as f64).collect()
}

fn fit_summary(result: &mut RunResult, fit: &SinusoidFit) {
    result.note("amplitude", fit.amplitude);
    result.note("phase", fit.phase);
    result.note("offset", fit.offset);
    result.note("residual_rms", fit.residual_rms);
}

/// Per-qubit phase added to analysis pulses by their source.
fn source_offset(cfg: &ScenarioConfig) -> f64 {
    match cfg.analysis_source {
        AnalysisSource::Microwave => 0.0,
        AnalysisSource::Raman => 0.5 * cfg.analysis_offset,
    }
}

fn analysed(phi_g: f64, analysis: f64, contrast: f64) -> Result<TwoQubitState, ExperimentError> {
    Ok(TwoQubitState::ground()
        .ms_gate(phi_g, contrast)?
        .rotate(1, FRAC_PI_2, analysis)?
        .rotate(2, FRAC_PI_2, analysis)?)
}

/// Parity after the gate and an analysis pulse at `analysis` on both ions.
/// `gate_phase` is called once per shot when `varying`, once otherwise.
fn measure_parity(
    cfg: &ScenarioConfig,
    rng: &mut ChaCha8Rng,
    analysis: f64,
    varying: bool,
    mut gate_phase: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> Result<(f64, f64), ExperimentError> {
    let noise = &cfg.noise;
    if !varying {
        let probs = analysed(gate_phase(rng), analysis, noise.contrast)?.probabilities();
        if !noise.shot_noise {
            return Ok((expected_parity(&probs, noise.detection_error), 0.0));
        }
        let mut tally = Tally::default();
        for _ in 0..cfg.shots {
            tally.push(sample_parity(&probs, noise.detection_error, rng));
        }
        return Ok((tally.mean(), tally.std_err()));
    }
    let mut tally = Tally::default();
    for _ in 0..cfg.shots {
        let probs = analysed(gate_phase(rng), analysis, noise.contrast)?.probabilities();
        tally.push(if noise.shot_noise {
            sample_parity(&probs, noise.detection_error, rng)
        } else {
            expected_parity(&probs, noise.detection_error)
        });
    }
    Ok((tally.mean(), tally.std_err()))
}

/// Parity fringe at fixed gate phase over `analysis_points`, fitted at ω = 2.
fn fringe_phase(
    cfg: &ScenarioConfig,
    outer: usize,
    phi_g: f64,
    per_qubit_offset: f64,
    analysis_points: usize,
) -> Result<SinusoidFit, ExperimentError> {
    let grid = analysis_grid(analysis_points);
    let pts = grid
        .par_iter()
        .enumerate()
        .map(|(j, &phi)| {
            let mut rng = rng_for(cfg.seed, nested(outer, j));
            measure_parity(cfg, &mut rng, phi + per_qubit_offset, false, |_| phi_g).map(|(m, _)| (phi, m))
        })
        .collect::<Result<Vec<_>, _>>()?;
    fit_sinusoid(&pts, 2.0)
}

/// Raman–microwave Ramsey sequences.
///
/// `delay` sweep: Raman π/2 at `first_phase`, Gaussian clock dephasing
/// `ξ ~ N(0, √2·T/τ)`, microwave π/2 at `second_phase + ξ`; the contrast
/// series `(2P − 1)/(1 − 2ε)` is fitted with a Gaussian decay.
/// `raman_phase` sweep: microwave π/2 at `first_phase`, the fixed delay, then
/// a Raman π/2 at the swept phase; fitted at ω = 1.
pub fn run_ramsey(cfg: &ScenarioConfig) -> Result<RunResult, ExperimentError> {
    cfg.expect(ScenarioId::Ramsey)?;
    let xs = cfg.sweep.values();
    let by_delay = cfg.sweep.name == "delay";
    let tau = cfg.noise.dephasing_time;
    let eps = cfg.noise.detection_error;
    let opts = cfg.ramsey;

    let rows = xs
        .par_iter()
        .enumerate()
        .map(|(i, &x)| -> Result<(f64, f64), ExperimentError> {
            let mut rng = rng_for(cfg.seed, i as u64);
            let (delay, first, second) =
                if by_delay { (x, opts.first_phase, opts.second_phase) } else { (opts.delay, opts.first_phase, x) };
            let sigma = if tau.is_finite() { std::f64::consts::SQRT_2 * delay / tau } else { 0.0 };
            let p_one = |xi: f64| -> Result<f64, ExperimentError> {
                let s = TwoQubitState::ground().rotate(1, FRAC_PI_2, first)?.rotate(1, FRAC_PI_2, second + xi)?;
                Ok(s.prob_one(1)?)
            };
            if !cfg.noise.shot_noise {
                let coherence = (-0.5 * sigma * sigma).exp();
                let p = 0.5 + (p_one(0.0)? - 0.5) * coherence;
                return Ok((expected_bit(p, eps), 0.0));
            }
            let normal = Normal::new(0.0, sigma).map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
            let mut tally = Tally::default();
            for _ in 0..cfg.shots {
                let xi = normal.sample(&mut rng);
                tally.push(sample_bit(p_one(xi)?, eps, &mut rng));
            }
            Ok((tally.mean(), tally.std_err()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut result = RunResult::new(cfg.id, cfg.seed);
    for (&x, &(m, se)) in xs.iter().zip(&rows) {
        result.push("p1", x, m, se);
    }
    if by_delay {
        let scale = 1.0 - 2.0 * eps;
        let contrast: Vec<(f64, f64)> = xs.iter().zip(&rows).map(|(&t, &(m, _))| (t, (2.0 * m - 1.0) / scale)).collect();
        for (&(t, c), &(_, se)) in contrast.iter().zip(&rows) {
            result.push("contrast", t, c, 2.0 * se / scale);
        }
        let fit = fit_gaussian_decay(&contrast)?;
        result.note("tau", fit.tau);
        result.note("initial_contrast", fit.initial);
        result.note("residual_rms", fit.residual_rms);
        result.note("points_used", fit.used as f64);
    } else {
        let pts: Vec<_> = xs.iter().zip(&rows).map(|(&x, &(m, _))| (x, m)).collect();
        fit_summary(&mut result, &fit_sinusoid(&pts, 1.0)?);
    }
    Ok(result)
}

/// Parity against analysis phase after one gate, fitted at ω = 2. The fitted
/// phase is `φG + φ' − π/2`, recorded as `model_phase`.
pub fn run_parity_scan(cfg: &ScenarioConfig) -> Result<RunResult, ExperimentError> {
    cfg.expect(ScenarioId::ParityScan)?;
    let o = cfg.parity_scan;
    let rf = RfPhases::new(o.phi_a, o.phi_b_red, o.phi_b_blue);
    let phi_g = sideband_phases(&cfg.geometry, &rf, &NoiseState::default()).gate;
    let offset = source_offset(cfg);
    let xs = cfg.sweep.values();
    let rows = xs
        .par_iter()
        .enumerate()
        .map(|(i, &phi)| measure_parity(cfg, &mut rng_for(cfg.seed, i as u64), phi + offset, false, |_| phi_g))
        .collect::<Result<Vec<_>, _>>()?;

    let mut result = RunResult::new(cfg.id, cfg.seed);
    for (&x, &(m, se)) in xs.iter().zip(&rows) {
        result.push("parity", x, m, se);
    }
    let pts: Vec<_> = xs.iter().zip(&rows).map(|(&x, &(m, _))| (x, m)).collect();
    fit_summary(&mut result, &fit_sinusoid(&pts, 2.0)?);
    result.note("gate_phase", phi_g);
    result.note("model_phase", crate::wrap_phase(phi_g + 2.0 * offset - FRAC_PI_2));
    Ok(result)
}

/// Fitted fringe phase against a phase step on the red, blue or both
/// sideband tones; the slope of the unwrapped phases is the summary.
pub fn run_sideband_shift(cfg: &ScenarioConfig) -> Result<RunResult, ExperimentError> {
    cfg.expect(ScenarioId::SidebandShift)?;
    let xs = cfg.sweep.values();
    let o = cfg.sideband_shift;
    let offset = source_offset(cfg);
    let fits = xs
        .iter()
        .enumerate()
        .map(|(i, &step)| {
            let rf = match o.sideband {
                Sideband::Red => RfPhases::new(0.0, step, 0.0),
                Sideband::Blue => RfPhases::new(0.0, 0.0, step),
                Sideband::Both => RfPhases::new(0.0, step, step),
            };
            let phi_g = sideband_phases(&cfg.geometry, &rf, &NoiseState::default()).gate;
            fringe_phase(cfg, i, phi_g, offset, o.analysis_points)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let phases = unwrap_phases(&fits.iter().map(|f| f.phase).collect::<Vec<_>>());
    let mut result = RunResult::new(cfg.id, cfg.seed);
    for ((&x, &p), f) in xs.iter().zip(&phases).zip(&fits) {
        result.push("fringe_phase", x, p, f.phase_std_err(o.analysis_points));
    }
    for (&x, f) in xs.iter().zip(&fits) {
        result.push("fringe_amplitude", x, f.amplitude, 0.0);
    }
    let line = fit_line(&xs.iter().copied().zip(phases.iter().copied()).collect::<Vec<_>>())?;
    result.note("slope", line.slope);
    result.note("slope_std_err", line.slope_std_err);
    result.note("intercept", line.intercept);
    Ok(result)
}

/// Parity scan with a uniform random phase jump added to both sideband tones,
/// redrawn every shot (or once per analysis point).
pub fn run_random_phase(cfg: &ScenarioConfig) -> Result<RunResult, ExperimentError> {
    cfg.expect(ScenarioId::RandomPhase)?;
    let o = cfg.random_phase;
    let offset = source_offset(cfg);
    let xs = cfg.sweep.values();
    let geometry = cfg.geometry;
    let gate = move |jump: f64| sideband_phases(&geometry, &RfPhases::new(0.0, jump, jump), &NoiseState::default()).gate;
    let draw = move |rng: &mut ChaCha8Rng| o.offset + o.range * rng.random::<f64>();

    let rows = xs
        .par_iter()
        .enumerate()
        .map(|(i, &phi)| -> Result<(f64, f64, Option<f64>), ExperimentError> {
            let mut rng = rng_for(cfg.seed, i as u64);
            if o.per_shot {
                let (m, se) = measure_parity(cfg, &mut rng, phi + offset, true, |r| gate(draw(r)))?;
                Ok((m, se, None))
            } else {
                let jump = draw(&mut rng);
                let (m, se) = measure_parity(cfg, &mut rng, phi + offset, false, |_| gate(jump))?;
                Ok((m, se, Some(jump)))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut result = RunResult::new(cfg.id, cfg.seed);
    for (i, (&x, &(m, se, jump))) in xs.iter().zip(&rows).enumerate() {
        result.push("parity", x, m, se);
        if let Some(j) = jump {
            result.draw(i, "jump", j);
        }
    }
    let pts: Vec<_> = xs.iter().zip(&rows).map(|(&x, &(m, _, _))| (x, m)).collect();
    fit_summary(&mut result, &fit_sinusoid(&pts, 2.0)?);
    Ok(result)
}

/// Repeated parity-scan fits over the sweep times with a repetition-rate
/// random walk fed through `chain` and a path-drift random walk on the B arm.
///
/// The gate phase at each time comes from the red and blue beat-note phases
/// the chain delivers; analysis pulses carry the microwave (or copropagating
/// Raman) tone phase. The summary holds the peak-to-peak spread of the
/// unwrapped fringe phase in degrees.
pub fn run_stability(cfg: &ScenarioConfig, chain: &ChainGraph) -> Result<RunResult, ExperimentError> {
    cfg.expect(ScenarioId::Stability)?;
    let times = cfg.sweep.values();
    let o = cfg.stability;
    let noise = cfg.noise;
    let mut shared = rng_for(cfg.seed, SHARED_STREAM);

    let end = *times.last().expect("sweep has points");
    let samples = (end / o.drift_step_interval).ceil() as usize + 1;
    let drift_times: Vec<f64> = (0..samples).map(|k| k as f64 * o.drift_step_interval).collect();
    let mut offset = 0.0;
    let mut drift_offsets = Vec::with_capacity(samples);
    for _ in 0..samples {
        drift_offsets.push(offset);
        let z: f64 = StandardNormal.sample(&mut shared);
        offset += noise.rep_rate_drift_step * o.drift_step_interval.sqrt() * z;
    }
    let profile = DriftProfile::new(drift_times, drift_offsets)?;

    let mut path = Vec::with_capacity(times.len());
    let mut x = 0.0;
    let mut last = times[0];
    for &t in &times {
        let z: f64 = StandardNormal.sample(&mut shared);
        x += noise.path_drift_step * (t - last).sqrt() * z;
        last = t;
        path.push(x);
    }

    let drifting = chain.with_drift(profile.clone());
    let gate_chain = drifting.configured_for(Transition::RedSideband)?;
    let (source_chain, source) = match cfg.analysis_source {
        AnalysisSource::Microwave => (drifting.configured_for(Transition::Microwave)?, Transition::Microwave),
        AnalysisSource::Raman => {
            (drifting.configured_for(Transition::CarrierCopropagating)?, Transition::CarrierCopropagating)
        }
    };
    let static_offset = source_offset(cfg);

    let mut gate_phases = Vec::with_capacity(times.len());
    let mut source_phases = Vec::with_capacity(times.len());
    for (&t, &dx) in times.iter().zip(&path) {
        let red = gate_chain.effective_drive(t, Transition::RedSideband)?.phase;
        let blue = gate_chain.effective_drive(t, Transition::BlueSideband)?.phase;
        let rf = RfPhases::from_beat_phases(red, blue);
        gate_phases.push(sideband_phases(&cfg.geometry, &rf, &NoiseState { path_drift: dx, clock_phase: 0.0 }).gate);
        source_phases.push(source_chain.effective_drive(t, source)?.phase + static_offset);
    }

    let fits = (0..times.len())
        .map(|i| fringe_phase(cfg, i, gate_phases[i], source_phases[i], o.analysis_points))
        .collect::<Result<Vec<_>, _>>()?;
    let phases = unwrap_phases(&fits.iter().map(|f| f.phase).collect::<Vec<_>>());

    let mut result = RunResult::new(cfg.id, cfg.seed);
    for (i, (&t, &p)) in times.iter().zip(&phases).enumerate() {
        result.push("fringe_phase", t, p, fits[i].phase_std_err(o.analysis_points));
        result.draw(i, "path_drift", path[i]);
        result.draw(i, "rep_rate_offset", profile.at(t));
        result.draw(i, "gate_phase", gate_phases[i]);
    }
    let max = phases.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = phases.iter().copied().fold(f64::INFINITY, f64::min);
    result.note("spread_deg", (max - min).to_degrees());
    result.note("mean_amplitude", fits.iter().map(|f| f.amplitude).sum::<f64>() / fits.len() as f64);
    Ok(result)
}

/// Ion brightness after shuttling, one series per wave-front tilt.
pub fn run_alignment_scan(cfg: &ScenarioConfig) -> Result<RunResult, ExperimentError> {
    cfg.expect(ScenarioId::Alignment)?;
    let xs = cfg.sweep.values();
    let wavelength = cfg.geometry.effective_wavelength();
    let eps = cfg.noise.detection_error;
    let mut result = RunResult::new(cfg.id, cfg.seed);
    for (a, &deg) in cfg.alignment.angles_deg.iter().enumerate() {
        let theta = deg.to_radians();
        let rows = xs
            .par_iter()
            .enumerate()
            .map(|(j, &d)| -> Result<(f64, f64), ExperimentError> {
                let p = alignment_signal(d, theta, wavelength)?;
                if !cfg.noise.shot_noise {
                    return Ok((expected_bit(p, eps), 0.0));
                }
                let mut rng = rng_for(cfg.seed, nested(a, j));
                let mut tally = Tally::default();
                for _ in 0..cfg.shots {
                    tally.push(sample_bit(p, eps, &mut rng));
                }
                Ok((tally.mean(), tally.std_err()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let series = format!("theta_{deg}deg");
        for (&d, &(m, se)) in xs.iter().zip(&rows) {
            result.push(&series, d, m, se);
        }
        result.note(&format!("first_dark_m_{series}"), wavelength / (2.0 * theta.sin().abs()));
    }
    Ok(result)
}

/// Runs `cfg`. Only the stability scenario reads `chain`.
pub fn run_scenario(cfg: &ScenarioConfig, chain: Option<&ChainGraph>) -> Result<RunResult, ExperimentError> {
    match cfg.id {
        ScenarioId::Ramsey => run_ramsey(cfg),
        ScenarioId::ParityScan => run_parity_scan(cfg),
        ScenarioId::SidebandShift => run_sideband_shift(cfg),
        ScenarioId::RandomPhase => run_random_phase(cfg),
        ScenarioId::Stability => {
            let chain = chain.ok_or_else(|| ExperimentError::InvalidConfig("stability needs a signal chain".into()))?;
            run_stability(cfg, chain)
        }
        ScenarioId::Alignment => run_alignment_scan(cfg),
    }
}
