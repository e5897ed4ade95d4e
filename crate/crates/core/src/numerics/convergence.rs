//! Observed convergence order from (spacing, error) samples: least-squares
//! slope of log error against log spacing.

use super::NumericsError;

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceEstimate {
    pub order: f64,
    /// Errors decreased monotonically with the spacing; a false value means
    /// the fit is reported on a noisy sequence.
    pub monotone: bool,
}

/// Fit `log(err) ~ order * log(h) + c` over at least three samples with
/// positive errors. Non-monotone sequences are flagged, not rejected.
pub fn convergence_order(samples: &[(f64, f64)]) -> Result<ConvergenceEstimate, NumericsError> {
    if samples.len() < 3 || samples.iter().any(|(h, e)| *h <= 0.0 || *e <= 0.0) {
        return Err(NumericsError::BadConvergenceSamples);
    }
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = sorted.windows(2).all(|w| w[0].1 <= w[1].1);
    if !monotone {
        eprintln!("warning: error sequence is not monotone in the spacing");
    }

    let n = sorted.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (h, e) in &sorted {
        let x = h.ln();
        let y = e.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok(ConvergenceEstimate { order, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_errors_fit_order_two() {
        let samples: Vec<(f64, f64)> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h: &f64| (h, h * h))
            .collect();
        let est = convergence_order(&samples).unwrap();
        assert!((est.order - 2.0).abs() < 1e-12);
        assert!(est.monotone);
    }

    #[test]
    fn linear_errors_fit_order_one() {
        let samples: Vec<(f64, f64)> = [0.2, 0.1, 0.05, 0.025]
            .iter()
            .map(|&h: &f64| (h, 3.0 * h))
            .collect();
        let est = convergence_order(&samples).unwrap();
        assert!((est.order - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples_are_rejected() {
        assert!(matches!(
            convergence_order(&[(0.1, 0.01), (0.05, 0.0025)]),
            Err(NumericsError::BadConvergenceSamples)
        ));
    }

    #[test]
    fn non_monotone_sequences_are_flagged() {
        let est =
            convergence_order(&[(0.1, 0.01), (0.05, 0.02), (0.025, 0.001)]).unwrap();
        assert!(!est.monotone);
    }
}
