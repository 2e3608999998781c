//! Projective readout with per-qubit detection flips.

use rand::Rng;

/// Running mean and standard error.
#[derive(Clone, Copy, Debug, Default)]
pub struct Tally {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Tally {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 { f64::NAN } else { self.sum / self.n as f64 }
    }

    /// Standard error of the mean from the unbiased sample variance.
    pub fn std_err(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

fn flip<R: Rng>(bit: bool, error: f64, rng: &mut R) -> bool {
    if error > 0.0 && rng.random::<f64>() < error { !bit } else { bit }
}

/// One readout of a single qubit: 1.0 for a detected `|1⟩`.
pub fn sample_bit<R: Rng>(p_one: f64, detection_error: f64, rng: &mut R) -> f64 {
    let bit = rng.random::<f64>() < p_one;
    if flip(bit, detection_error, rng) { 1.0 } else { 0.0 }
}

/// One two-qubit readout: +1 for even parity, −1 for odd.
pub fn sample_parity<R: Rng>(probs: &[f64; 4], detection_error: f64, rng: &mut R) -> f64 {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    let mut outcome = 3;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            outcome = i;
            break;
        }
    }
    let b1 = flip(outcome & 2 != 0, detection_error, rng);
    let b2 = flip(outcome & 1 != 0, detection_error, rng);
    if b1 == b2 { 1.0 } else { -1.0 }
}

/// Mean detected `|1⟩` probability.
pub fn expected_bit(p_one: f64, detection_error: f64) -> f64 {
    detection_error + (1.0 - 2.0 * detection_error) * p_one
}

/// Mean detected parity.
pub fn expected_parity(probs: &[f64; 4], detection_error: f64) -> f64 {
    let parity = probs[0] + probs[3] - probs[1] - probs[2];
    (1.0 - 2.0 * detection_error).powi(2) * parity
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampled_means_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let probs = [0.4, 0.1, 0.2, 0.3];
        let mut t = Tally::default();
        for _ in 0..200_000 {
            t.push(sample_parity(&probs, 0.05, &mut rng));
        }
        assert!((t.mean() - expected_parity(&probs, 0.05)).abs() < 5.0 * t.std_err());
        let mut b = Tally::default();
        for _ in 0..200_000 {
            b.push(sample_bit(0.7, 0.1, &mut rng));
        }
        assert!((b.mean() - expected_bit(0.7, 0.1)).abs() < 5.0 * b.std_err());
    }

    #[test]
    fn std_err_scales_with_shots() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let run = |shots: usize, rng: &mut ChaCha8Rng| {
            let mut t = Tally::default();
            for _ in 0..shots {
                t.push(sample_bit(0.5, 0.0, rng));
            }
            t.std_err()
        };
        let (a, b, c) = (run(100, &mut rng), run(10_000, &mut rng), run(1_000_000, &mut rng));
        assert!((a / b - 10.0).abs() < 0.5, "{}", a / b);
        assert!((b / c - 10.0).abs() < 0.5, "{}", b / c);
    }
}
