//! Small-amplitude odd cats against single-photon boson sampling.
//!
//! `n` odd cats followed by `m - n` vacua pass through a Haar-random
//! unitary; on the `n`-photon shell every cat amplitude is compared with the
//! permanent amplitude of `|1,..,1,0,..,0>`.

use crate::amplitudes::{fock_gamma_s, gamma_s, FockConfig, Signature};
use crate::error::{Error, Result};
use crate::optics::haar_random_unitary;
use crate::propagation::propagate_register;
use crate::sampler::{enumerate_signatures, CutoffPolicy};
use crate::states::{make_register, odd_cat, vacuum, ODD_CAT_MIN_ALPHA};
use num_complex::Complex64;
use serde::Serialize;

pub const MAX_REDUCTION_PHOTONS: usize = 3;
pub const MAX_REDUCTION_MODES: usize = 6;
pub const MAX_REDUCTION_ALPHA: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub seed: u64,
    pub signatures_checked: usize,
    pub max_deviation: f64,
    /// `max_deviation / alpha^2`
    pub fitted_c: f64,
}

pub fn fock_reduction_check(n: usize, m: usize, alpha: f64, seed: u64) -> Result<ReductionReport> {
    if m == 0 || m > MAX_REDUCTION_MODES || n > MAX_REDUCTION_PHOTONS || n > m {
        return Err(Error::InvalidArgument(format!(
            "need n <= {MAX_REDUCTION_PHOTONS}, 1 <= m <= {MAX_REDUCTION_MODES}, n <= m; got n={n}, m={m}"
        )));
    }
    if !(ODD_CAT_MIN_ALPHA..=MAX_REDUCTION_ALPHA).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in [{ODD_CAT_MIN_ALPHA:e}, {MAX_REDUCTION_ALPHA:e}], got {alpha}"
        )));
    }

    let cat = odd_cat(Complex64::new(alpha, 0.0))?;
    let mut specs = vec![cat; n];
    specs.extend(std::iter::repeat_n(vacuum(), m - n));
    let register = make_register(specs)?;
    let u = haar_random_unitary(m, seed);
    let output = propagate_register(&u, &register)?;
    let fock_input = FockConfig::single_photons(n, m)?;

    let shell: Vec<Signature> = enumerate_signatures(&CutoffPolicy::explicit(vec![n; m])?)?
        .filter(|s| s.total() == n)
        .collect();
    let mut max_deviation = 0.0f64;
    for s in &shell {
        let cat_amp = gamma_s(&output, s)?;
        let fock_amp = fock_gamma_s(&u, &fock_input, s)?;
        max_deviation = max_deviation.max((cat_amp - fock_amp).norm());
    }

    Ok(ReductionReport {
        n,
        m,
        alpha,
        seed,
        signatures_checked: shell.len(),
        max_deviation,
        fitted_c: max_deviation / (alpha * alpha),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionSweep {
    pub reports: Vec<ReductionReport>,
    /// Least-squares slope of `ln(max_deviation)` against `ln(alpha)`.
    pub slope: f64,
}

pub fn reduction_sweep(n: usize, m: usize, alphas: &[f64], seed: u64) -> Result<ReductionSweep> {
    let reports = alphas
        .iter()
        .map(|&a| fock_reduction_check(n, m, a, seed))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = reports.iter().map(|r| (r.alpha, r.max_deviation)).collect();
    Ok(ReductionSweep {
        slope: log_log_slope(&points),
        reports,
    })
}

/// Least-squares slope of `ln y` against `ln x`. Non-positive `y` are
/// dropped; fewer than two usable points give NaN.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return f64::NAN;
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_laws() {
        let pts: Vec<(f64, f64)> = [1e-2, 1e-3, 1e-4].iter().map(|&a| (a, 3.0 * a * a)).collect();
        assert!((log_log_slope(&pts) - 2.0).abs() < 1e-12);
        assert!(log_log_slope(&[(1.0, 1.0)]).is_nan());
    }

    #[test]
    fn two_photons_in_four_modes() {
        let r = fock_reduction_check(2, 4, 1e-3, 7).unwrap();
        assert_eq!(r.signatures_checked, 10);
        assert!(r.max_deviation <= 1e-4);
        assert!(r.fitted_c <= 100.0);
    }

    #[test]
    fn all_vacuum_is_exact() {
        let r = fock_reduction_check(0, 3, 1e-3, 1).unwrap();
        assert_eq!(r.signatures_checked, 1);
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn argument_checks() {
        assert!(fock_reduction_check(4, 6, 1e-3, 0).is_err());
        assert!(fock_reduction_check(2, 7, 1e-3, 0).is_err());
        assert!(fock_reduction_check(3, 2, 1e-3, 0).is_err());
        assert!(fock_reduction_check(2, 4, 0.05, 0).is_err());
    }

    #[test]
    fn deviation_follows_single_photon_fidelity() {
        // On the n-photon shell only the |1> component of each cat
        // contributes, so gamma_S = g^n * fock_gamma_S with
        // g = sqrt(x / sinh x), x = alpha^2: the deviation decays like
        // n * alpha^4 / 12 (log-log slope 4) until it reaches rounding level.
        let alphas = [1e-2, 3e-3, 1e-3];
        let sweep = reduction_sweep(2, 4, &alphas, 3).unwrap();
        assert!((sweep.slope - 4.0).abs() < 0.2, "slope {}", sweep.slope);
        for r in &sweep.reports {
            let predicted = 2.0 * r.alpha.powi(4) / 12.0;
            assert!(r.max_deviation <= 1.5 * predicted + 1e-15, "{r:?}");
        }
    }
}
