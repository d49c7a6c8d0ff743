//! Output amplitudes `gamma_S = <S| U |psi_in>` for photon-number signatures.
//!
//! Three routes are provided for cat-state inputs:
//!
//! * [`gamma_s`] streams over the `prod_i t_i` propagated branches, summing
//!   `coeff * prod_j f_{S_j}(beta_j)` in contiguous chunks with compensated
//!   accumulation and a fixed-order reduction.
//! * [`gamma_s_tensor`] evaluates the same sum grouped as
//!   `sum_t prod_j A[j][t]` with `A[j][t] = lambda_{t_j} f_{S_j}(beta_t^(j))`,
//!   recomputing every branch from scratch. It exists as an independent check.
//! * [`gamma_s_product`] is the polynomial-time single-branch case.
//!
//! [`fock_gamma_s`] is the Fock-input reference, a normalized permanent.

use crate::error::{Error, Result};
use crate::numeric::{ComplexKahan, MAX_PHOTONS};
use crate::optics::{permanent, UnitaryMatrix, PERMANENT_CAP};
use crate::propagation::{branch_digits, expand_register, propagate_coherent, OutputSuperposition};
use crate::states::fock_amplitude_unchecked;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Branches per work unit in [`gamma_s`]. The partition depends only on the
/// branch count, so results do not depend on the worker count.
pub const GAMMA_CHUNK_TERMS: u64 = 1 << 12;

/// Photon counts per output mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signature(Vec<usize>);

impl Signature {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if let Some(&n) = counts.iter().find(|&&n| n > MAX_PHOTONS) {
            return Err(Error::NOverflow(n));
        }
        Ok(Signature(counts))
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// Input photon counts per mode for the Fock reference path.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FockConfig(Vec<usize>);

impl FockConfig {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if let Some(&n) = counts.iter().find(|&&n| n > MAX_PHOTONS) {
            return Err(Error::NOverflow(n));
        }
        Ok(FockConfig(counts))
    }

    /// `n` single photons followed by `m - n` vacua.
    pub fn single_photons(n: usize, m: usize) -> Result<Self> {
        if n > m {
            return Err(Error::InvalidArgument(format!("{n} photons do not fit in {m} modes")));
        }
        Ok(FockConfig((0..m).map(|i| usize::from(i < n)).collect()))
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimMismatch { expected, found });
    }
    Ok(())
}

fn branch_product(coeff: Complex64, betas: &[Complex64], counts: &[usize]) -> Complex64 {
    betas
        .iter()
        .zip(counts)
        .fold(coeff, |acc, (&b, &n)| acc * fock_amplitude_unchecked(b, n))
}

/// `gamma_S` by streaming over all propagated branches.
pub fn gamma_s(output: &OutputSuperposition, signature: &Signature) -> Result<Complex64> {
    check_len(output.num_modes(), signature.len())?;
    let counts = signature.counts();
    let total = output.len();
    let chunks = total.div_ceil(GAMMA_CHUNK_TERMS);

    let partials: Vec<ComplexKahan> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * GAMMA_CHUNK_TERMS;
            let end = (start + GAMMA_CHUNK_TERMS).min(total);
            let mut acc = ComplexKahan::default();
            output.for_each_in_range(start..end, |coeff, betas| {
                acc.add(branch_product(coeff, betas, counts));
            });
            acc
        })
        .collect();

    let mut acc = ComplexKahan::default();
    for p in &partials {
        acc.merge(p);
    }
    Ok(acc.total())
}

/// `gamma_S` as `sum_t prod_j A[j][t]`, each branch rebuilt from its index.
pub fn gamma_s_tensor(output: &OutputSuperposition, signature: &Signature) -> Result<Complex64> {
    check_len(output.num_modes(), signature.len())?;
    let register = output.register();
    let radices = register.term_counts();
    let mut total = Complex64::new(0.0, 0.0);
    for (index, branch) in expand_register(register).enumerate() {
        let digits = branch_digits(&radices, index as u64);
        let betas = propagate_coherent(output.unitary(), &branch.alphas)?;
        let mut product = Complex64::new(1.0, 0.0);
        for (j, (&beta, &n)) in betas.iter().zip(signature.counts()).enumerate() {
            let weight = register.modes()[j].terms()[digits[j]].weight;
            product *= weight * fock_amplitude_unchecked(beta, n);
        }
        total += product;
    }
    Ok(total)
}

/// Single coherent branch: `prod_j f_{S_j}((U alpha)_j)`.
pub fn gamma_s_product(u: &UnitaryMatrix, alphas: &[Complex64], signature: &Signature) -> Result<Complex64> {
    check_len(u.dim(), signature.len())?;
    let betas = propagate_coherent(u, alphas)?;
    Ok(branch_product(Complex64::new(1.0, 0.0), &betas, signature.counts()))
}

/// Fock-input amplitude `Per(U_{S,T}) / sqrt(prod s_i! prod t_j!)`.
///
/// `U_{S,T}` takes row `i` of `U` repeated `S_i` times and column `j`
/// repeated `T_j` times, matching `beta = U alpha` for coherent inputs.
/// Returns exactly zero when the photon totals differ.
pub fn fock_gamma_s(u: &UnitaryMatrix, input: &FockConfig, signature: &Signature) -> Result<Complex64> {
    let m = u.dim();
    check_len(m, input.counts().len())?;
    check_len(m, signature.len())?;
    let n = input.total();
    if n != signature.total() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if n > PERMANENT_CAP {
        return Err(Error::TooLarge { n, cap: PERMANENT_CAP });
    }
    let rows: Vec<usize> = expand_multiplicities(signature.counts());
    let cols: Vec<usize> = expand_multiplicities(input.counts());
    let sub = DMatrix::from_fn(n, n, |a, b| u[(rows[a], cols[b])]);
    let per = permanent(&sub)?;
    // every count is at most n <= 30, so the factorial product stays finite
    let norm: f64 = signature
        .counts()
        .iter()
        .chain(input.counts())
        .map(|&k| (1..=k).map(|i| i as f64).product::<f64>())
        .product();
    Ok(per / norm.sqrt())
}

fn expand_multiplicities(counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(mode, &k)| std::iter::repeat_n(mode, k))
        .collect()
}
