//! Linear least-squares fits.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::wrap_phase;

const MAX_REWEIGHT: usize = 20;

/// `y = offset + amplitude·cos(ω·x + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub amplitude: f64,
    /// In (−π, π].
    pub phase: f64,
    pub offset: f64,
    pub residual_rms: f64,
}

impl SinusoidFit {
    pub fn eval(&self, omega: f64, x: f64) -> f64 {
        self.offset + self.amplitude * (omega * x + self.phase).cos()
    }

    /// One-sigma phase uncertainty implied by the residuals.
    pub fn phase_std_err(&self, points: usize) -> f64 {
        if self.amplitude == 0.0 || points <= 3 {
            return f64::INFINITY;
        }
        let sigma = self.residual_rms * (points as f64 / (points - 3) as f64).sqrt();
        sigma * (2.0 / points as f64).sqrt() / self.amplitude
    }
}

/// `y = initial·exp(−(T/τ)²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub tau: f64,
    pub initial: f64,
    pub residual_rms: f64,
    /// Points kept after dropping non-positive contrasts.
    pub used: usize,
}

fn least_squares(design: DMatrix<f64>, y: DVector<f64>, what: &str) -> Result<DVector<f64>, ExperimentError> {
    let svd = design.svd(true, true);
    let max = svd.singular_values.max();
    let cols = svd.singular_values.len();
    if !(max > 0.0) || svd.rank(max * 1e-10) < cols {
        return Err(ExperimentError::DegenerateFit(format!("{what} design matrix is rank deficient")));
    }
    svd.solve(&y, max * 1e-12).map_err(|e| ExperimentError::DegenerateFit(e.to_string()))
}

/// Fits offset, amplitude and phase at known angular frequency `omega` on the
/// basis `{1, cos ωx, sin ωx}`. `phase = atan2(−b, a)` for coefficients `a`
/// (cosine) and `b` (sine).
pub fn fit_sinusoid(points: &[(f64, f64)], omega: f64) -> Result<SinusoidFit, ExperimentError> {
    if points.len() < 3 {
        return Err(ExperimentError::InsufficientData(format!("sinusoid fit needs 3 points, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) || !omega.is_finite() {
        return Err(ExperimentError::InsufficientData("non-finite fit input".into()));
    }
    let n = points.len();
    let design = DMatrix::from_fn(n, 3, |i, j| {
        let x = omega * points[i].0;
        match j {
            0 => 1.0,
            1 => x.cos(),
            _ => x.sin(),
        }
    });
    let y = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let coef = least_squares(design.clone(), y.clone(), "sinusoid")?;
    let residual = &y - &design * &coef;
    let (c, a, b) = (coef[0], coef[1], coef[2]);
    Ok(SinusoidFit {
        amplitude: a.hypot(b),
        phase: wrap_phase((-b).atan2(a)),
        offset: c,
        residual_rms: (residual.norm_squared() / n as f64).sqrt(),
    })
}

/// Fits `c·exp(−(T/τ)²)` as a weighted line in `(T², ln c)`. The weights are
/// the inverse variances `c²` of `ln c`, with `c` taken from the data on the
/// first pass and from the fitted model on later passes.
/// Non-positive contrasts are dropped. A non-decaying fit returns `τ = ∞`.
pub fn fit_gaussian_decay(points: &[(f64, f64)]) -> Result<DecayFit, ExperimentError> {
    let kept: Vec<(f64, f64)> = points.iter().copied().filter(|&(t, c)| c > 0.0 && t.is_finite() && c.is_finite()).collect();
    if kept.len() < points.len() {
        log::warn!("decay fit: dropped {} non-positive contrast points", points.len() - kept.len());
    }
    if kept.is_empty() {
        return Err(ExperimentError::InsufficientData("every contrast is non-positive".into()));
    }
    if kept.len() < 3 {
        return Err(ExperimentError::InsufficientData(format!("decay fit needs 3 positive points, got {}", kept.len())));
    }
    let n = kept.len();
    let t_max = kept.iter().map(|&(t, _)| t * t).fold(0.0, f64::max);
    let solve = |weights: &[f64]| -> Result<(f64, f64), ExperimentError> {
        let design = DMatrix::from_fn(n, 2, |i, j| {
            let (t, _) = kept[i];
            if j == 0 { weights[i] } else { -weights[i] * t * t }
        });
        let y = DVector::from_iterator(n, kept.iter().zip(weights).map(|(&(_, c), w)| w * c.ln()));
        let coef = least_squares(design, y, "decay")?;
        Ok((coef[0], coef[1]))
    };
    // sqrt-weights start at the measured contrast, then follow the model
    let mut weights: Vec<f64> = kept.iter().map(|&(_, c)| c).collect();
    let (mut ln_c0, mut beta) = solve(&weights)?;
    for _ in 0..MAX_REWEIGHT {
        weights = kept.iter().map(|&(t, _)| (ln_c0 - beta.max(0.0) * t * t).exp()).collect();
        let (next_c0, next_beta) = solve(&weights)?;
        let settled = (next_beta - beta).abs() <= 1e-12 * beta.abs().max(1e-300);
        (ln_c0, beta) = (next_c0, next_beta);
        if settled {
            break;
        }
    }
    // decays below 1e-12 over the sampled span count as none
    let tau = if beta * t_max > 1e-12 { beta.sqrt().recip() } else { f64::INFINITY };
    let initial = ln_c0.exp();
    let rss: f64 = kept
        .iter()
        .map(|&(t, c)| {
            let model = if tau.is_finite() { initial * (-(t / tau).powi(2)).exp() } else { initial };
            (c - model).powi(2)
        })
        .sum();
    Ok(DecayFit { tau, initial, residual_rms: (rss / n as f64).sqrt(), used: n })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_err: f64,
}

/// Ordinary least-squares line.
pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit, ExperimentError> {
    if points.len() < 2 {
        return Err(ExperimentError::InsufficientData("line fit needs 2 points".into()));
    }
    let n = points.len();
    let design = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { points[i].0 });
    let y = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let coef = least_squares(design.clone(), y.clone(), "line")?;
    let rss = (&y - &design * &coef).norm_squared();
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let slope_std_err = if n > 2 { (rss / (n - 2) as f64 / sxx).sqrt() } else { 0.0 };
    Ok(LineFit { slope: coef[1], intercept: coef[0], slope_std_err })
}

/// Removes 2π jumps between consecutive phases.
pub fn unwrap_phases(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    for &p in phases {
        match out.last() {
            None => out.push(p),
            Some(&prev) => out.push(prev + wrap_phase(p - prev)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::{PI, TAU};

    fn grid(n: usize, stop: f64) -> Vec<f64> {
        (0..n).map(|i| stop * i as f64 / n as f64).collect()
    }

    proptest! {
        #[test]
        fn recovers_noise_free_sinusoid(a in 0.05f64..2.0, phase in -3.1f64..3.1, c in -1.0f64..1.0, two in any::<bool>()) {
            let omega = if two { 2.0 } else { 1.0 };
            let pts: Vec<_> = grid(24, TAU).into_iter().map(|x| (x, c + a * (omega * x + phase).cos())).collect();
            let fit = fit_sinusoid(&pts, omega).unwrap();
            prop_assert!((fit.amplitude - a).abs() < 1e-9);
            prop_assert!(wrap_phase(fit.phase - phase).abs() < 1e-9);
            prop_assert!((fit.offset - c).abs() < 1e-9);
        }
    }

    #[test]
    fn phase_in_half_open_range() {
        let pts: Vec<_> = grid(12, TAU).into_iter().map(|x| (x, (x + PI).cos())).collect();
        let fit = fit_sinusoid(&pts, 1.0).unwrap();
        assert!(fit.phase > -PI && fit.phase <= PI);
        assert!((fit.phase.abs() - PI).abs() < 1e-9);
    }

    #[test]
    fn noisy_phase_within_three_degrees() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let xs = grid(24, TAU);
        let mut ok = 0;
        for trial in 0..1000 {
            let phase = -3.0 + 6.0 * trial as f64 / 1000.0;
            let pts: Vec<_> = xs.iter().map(|&x| (x, (2.0 * x + phase).cos() + noise.sample(&mut rng))).collect();
            let fit = fit_sinusoid(&pts, 2.0).unwrap();
            if wrap_phase(fit.phase - phase).abs() < 3f64.to_radians() {
                ok += 1;
            }
        }
        assert!(ok >= 950, "{ok}");
    }

    #[test]
    fn degenerate_design() {
        let pts = vec![(1.0, 0.0), (1.0, 0.5), (1.0, 1.0)];
        assert!(matches!(fit_sinusoid(&pts, 1.0), Err(ExperimentError::DegenerateFit(_))));
        assert!(matches!(fit_sinusoid(&pts[..2], 1.0), Err(ExperimentError::InsufficientData(_))));
    }

    #[test]
    fn recovers_gaussian_decay() {
        let pts: Vec<_> = (0..20).map(|i| {
            let t = 4.0 * i as f64 / 19.0;
            (t, 0.9 * (-(t / 1.8f64).powi(2)).exp())
        }).collect();
        let fit = fit_gaussian_decay(&pts).unwrap();
        assert!((fit.tau - 1.8).abs() < 1e-9);
        assert!((fit.initial - 0.9).abs() < 1e-9);
    }

    #[test]
    fn decay_filters_and_flat() {
        let mut pts: Vec<_> = (0..5).map(|i| (i as f64, 0.5)).collect();
        pts.push((6.0, -0.1));
        let fit = fit_gaussian_decay(&pts).unwrap();
        assert_eq!(fit.used, 5);
        assert!(fit.tau.is_infinite());
        assert!(fit_gaussian_decay(&[(0.0, -1.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn line_and_unwrap() {
        let pts: Vec<_> = (0..5).map(|i| (i as f64, 2.0 - 0.5 * i as f64)).collect();
        let fit = fit_line(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        let wrapped: Vec<_> = (0..20).map(|i| wrap_phase(-0.5 * i as f64)).collect();
        let un = unwrap_phases(&wrapped);
        assert!((un[19] + 9.5).abs() < 1e-12);
    }
}
