//! Two small-amplitude odd cats on a 50/50 beamsplitter reproduce
//! Hong-Ou-Mandel bunching: the coincidence outcome `(1,1)` vanishes and
//! `(2,0)`, `(0,2)` each approach probability one half with amplitudes
//! `+1/sqrt 2` and `-1/sqrt 2`.

use crate::amplitudes::{gamma_s, Signature};
use crate::error::{Error, Result};
use crate::optics::hadamard2;
use crate::propagation::propagate_register;
use crate::sampler::{auto_cutoff, build_distribution, SampledDistribution};
use crate::states::{make_register, odd_cat};
use num_complex::Complex64;
use serde::Serialize;

/// Tail target used for the HOM distribution.
pub const HOM_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct HomReport {
    pub alpha: f64,
    pub p11: f64,
    pub p20: f64,
    pub p02: f64,
    pub gamma11: Complex64,
    pub gamma20: Complex64,
    pub gamma02: Complex64,
    /// `|P(2,0) - 1/2|`
    pub dev20: f64,
    /// `|P(0,2) - 1/2|`
    pub dev02: f64,
    /// `gamma(0,2) < 0 < gamma(2,0)` on the real axis.
    pub signs_match: bool,
    pub captured_mass: f64,
    #[serde(skip)]
    pub distribution: SampledDistribution,
}

pub fn hom_check(alpha: f64) -> Result<HomReport> {
    if !(1e-6..=0.1).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must lie in [1e-6, 0.1], got {alpha}")));
    }
    let cat = odd_cat(Complex64::new(alpha, 0.0))?;
    let register = make_register(vec![cat.clone(), cat])?;
    let u = hadamard2();
    let policy = auto_cutoff(&register, &u, HOM_EPSILON)?;
    let distribution = build_distribution(&u, &register, &policy)?;
    let output = propagate_register(&u, &register)?;

    let s11 = Signature::new(vec![1, 1])?;
    let s20 = Signature::new(vec![2, 0])?;
    let s02 = Signature::new(vec![0, 2])?;
    let gamma11 = gamma_s(&output, &s11)?;
    let gamma20 = gamma_s(&output, &s20)?;
    let gamma02 = gamma_s(&output, &s02)?;
    let p11 = distribution.probability(&s11);
    let p20 = distribution.probability(&s20);
    let p02 = distribution.probability(&s02);

    Ok(HomReport {
        alpha,
        p11,
        p20,
        p02,
        gamma11,
        gamma20,
        gamma02,
        dev20: (p20 - 0.5).abs(),
        dev02: (p02 - 0.5).abs(),
        signs_match: gamma02.re < 0.0 && gamma20.re > 0.0,
        captured_mass: distribution.captured_mass,
        distribution,
    })
}
