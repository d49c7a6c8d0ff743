//! Single-mode coherent superpositions ("cat states") and the multi-mode
//! input register.

use crate::error::{Error, Result};
use crate::numeric::{complex_expm1, factorial_exact, ln_factorial, EXACT_FACTORIAL_MAX, MAX_PHOTONS};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Cats whose Gram norm squared falls at or below this are rejected.
pub const DEGENERATE_NORM_SQUARED: f64 = 1e-24;

/// Smallest amplitude accepted by [`odd_cat`].
pub const ODD_CAT_MIN_ALPHA: f64 = 1e-6;

/// Cap on the number of expanded branches of a register.
pub const REGISTER_TERM_CAP: u128 = 1 << 40;

/// Fock-basis amplitude `<n|alpha> = e^{-|alpha|^2/2} alpha^n / sqrt(n!)`.
pub fn fock_amplitude(alpha: Complex64, n: usize) -> Result<Complex64> {
    if n > MAX_PHOTONS {
        return Err(Error::NOverflow(n));
    }
    Ok(fock_amplitude_unchecked(alpha, n))
}

/// [`fock_amplitude`] for callers that have already checked `n <= 170`.
pub(crate) fn fock_amplitude_unchecked(alpha: Complex64, n: usize) -> Complex64 {
    debug_assert!(n <= MAX_PHOTONS);
    let mag2 = alpha.norm_sqr();
    if n == 0 {
        return Complex64::new((-0.5 * mag2).exp(), 0.0);
    }
    if mag2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if n <= EXACT_FACTORIAL_MAX && mag2 < 700.0 {
        let scale = (-0.5 * mag2).exp() / factorial_exact(n).sqrt();
        return alpha.powu(n as u32) * scale;
    }
    let ln_modulus = -0.5 * mag2 + n as f64 * 0.5 * mag2.ln() - 0.5 * ln_factorial(n);
    Complex64::from_polar(ln_modulus.exp(), n as f64 * alpha.arg())
}

/// Overlap `<a|b>` of two coherent states.
pub fn coherent_overlap(a: Complex64, b: Complex64) -> Complex64 {
    overlap_exponent(a, b).exp()
}

fn overlap_exponent(a: Complex64, b: Complex64) -> Complex64 {
    Complex64::new(-0.5 * (a.norm_sqr() + b.norm_sqr()), 0.0) + a.conj() * b
}

/// One branch `weight * |alpha>` of a cat state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatTerm {
    pub weight: Complex64,
    pub alpha: Complex64,
}

/// A normalized superposition of distinct coherent states on one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CatSpec {
    terms: Vec<CatTerm>,
}

impl CatSpec {
    pub fn terms(&self) -> &[CatTerm] {
        &self.terms
    }

    /// Number of coherent branches `t`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `<cat|cat>` evaluated directly from the Gram matrix of overlaps.
    pub fn norm_squared(&self) -> f64 {
        let mut total = Complex64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &self.terms {
                total += a.weight.conj() * b.weight * coherent_overlap(a.alpha, b.alpha);
            }
        }
        total.re
    }

    /// Fock amplitude `<n|cat>`.
    pub fn fock_amplitude(&self, n: usize) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            total += term.weight * fock_amplitude(term.alpha, n)?;
        }
        Ok(total)
    }

    pub fn to_json(&self) -> CatSpecJson {
        CatSpecJson::Explicit {
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    lambda: [t.weight.re, t.weight.im],
                    alpha: [t.alpha.re, t.alpha.im],
                })
                .collect(),
        }
    }
}

/// Gram norm squared `sum_jk conj(l_j) l_k <a_j|a_k>`, arranged so that
/// near-cancelling superpositions (odd cats at small amplitude) keep their
/// relative precision: `<a_j|a_k> = 1 + expm1(z_jk)` and the constant part
/// collapses to `|sum_j l_j|^2`.
fn gram_norm_squared(terms: &[CatTerm]) -> f64 {
    let weight_sum: Complex64 = terms.iter().map(|t| t.weight).sum();
    let mut total = weight_sum.norm_sqr();
    for a in terms {
        for b in terms {
            if a.alpha != b.alpha {
                total += (a.weight.conj() * b.weight * complex_expm1(overlap_exponent(a.alpha, b.alpha))).re;
            }
        }
    }
    total
}

/// Build a normalized cat from `(weight, alpha)` pairs.
///
/// Terms with identical `alpha` (exact equality) are merged by summing
/// their weights, zero weights are dropped, and the rest are rescaled so the
/// state has unit norm under the coherent-state Gram matrix.
pub fn make_cat<I>(terms: I) -> Result<CatSpec>
where
    I: IntoIterator<Item = (Complex64, Complex64)>,
{
    let mut merged: Vec<CatTerm> = Vec::new();
    for (weight, alpha) in terms {
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !finite(weight) || !finite(alpha) {
            return Err(Error::NonFinite);
        }
        match merged.iter_mut().find(|t| t.alpha == alpha) {
            Some(existing) => existing.weight += weight,
            None => merged.push(CatTerm { weight, alpha }),
        }
    }
    merged.retain(|t| t.weight != Complex64::new(0.0, 0.0));
    if merged.is_empty() {
        return Err(Error::EmptyCat);
    }

    let norm_squared = gram_norm_squared(&merged);
    if !(norm_squared > DEGENERATE_NORM_SQUARED) {
        return Err(Error::DegenerateNorm(norm_squared));
    }
    let inv_norm = 1.0 / norm_squared.sqrt();
    for t in &mut merged {
        t.weight *= inv_norm;
    }
    Ok(CatSpec { terms: merged })
}

/// Single-term cat `|alpha>`.
pub fn coherent(alpha: Complex64) -> CatSpec {
    CatSpec {
        terms: vec![CatTerm {
            weight: Complex64::new(1.0, 0.0),
            alpha,
        }],
    }
}

pub fn vacuum() -> CatSpec {
    coherent(Complex64::new(0.0, 0.0))
}

/// `(|alpha> + |-alpha>)`, normalized; only even photon numbers.
pub fn even_cat(alpha: Complex64) -> Result<CatSpec> {
    let one = Complex64::new(1.0, 0.0);
    make_cat([(one, alpha), (one, -alpha)])
}

/// `(|alpha> - |-alpha>)`, normalized; only odd photon numbers. Tends to the
/// single-photon state as `alpha -> 0`.
pub fn odd_cat(alpha: Complex64) -> Result<CatSpec> {
    if alpha.norm() < ODD_CAT_MIN_ALPHA {
        return Err(Error::DegenerateNorm(gram_norm_squared(&[
            CatTerm {
                weight: Complex64::new(1.0, 0.0),
                alpha,
            },
            CatTerm {
                weight: Complex64::new(-1.0, 0.0),
                alpha: -alpha,
            },
        ])));
    }
    let one = Complex64::new(1.0, 0.0);
    make_cat([(one, alpha), (-one, -alpha)])
}

/// Photon-number statistics of a cat, truncated at `cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumberDist {
    /// `P(n)` for `n = 0..=cutoff`.
    pub probabilities: Vec<f64>,
    pub captured_mass: f64,
}

pub fn photon_number_dist(cat: &CatSpec, cutoff: usize) -> Result<PhotonNumberDist> {
    let probabilities = (0..=cutoff)
        .map(|n| cat.fock_amplitude(n).map(|a| a.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    let captured_mass = probabilities.iter().sum();
    Ok(PhotonNumberDist {
        probabilities,
        captured_mass,
    })
}

/// Tensor product of per-mode cats.
#[derive(Debug, Clone, PartialEq)]
pub struct InputRegister {
    modes: Vec<CatSpec>,
    term_count: u64,
}

impl InputRegister {
    pub fn modes(&self) -> &[CatSpec] {
        &self.modes
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    /// Per-mode branch counts `t_i`.
    pub fn term_counts(&self) -> Vec<usize> {
        self.modes.iter().map(CatSpec::len).collect()
    }

    /// `prod_i t_i`, the number of branches in the expanded input.
    pub fn term_count(&self) -> u64 {
        self.term_count
    }

    /// Reorder modes: mode `i` of the result is mode `perm[i]` of `self`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<InputRegister> {
        let m = self.num_modes();
        if perm.len() != m {
            return Err(Error::DimMismatch {
                expected: m,
                found: perm.len(),
            });
        }
        let specs = perm
            .iter()
            .map(|&p| {
                self.modes
                    .get(p)
                    .cloned()
                    .ok_or(Error::ModeOutOfRange { mode: p, modes: m })
            })
            .collect::<Result<Vec<_>>>()?;
        make_register(specs)
    }
}

pub fn make_register(specs: Vec<CatSpec>) -> Result<InputRegister> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("register needs at least one mode".into()));
    }
    let mut count: u128 = 1;
    for spec in &specs {
        count = count.saturating_mul(spec.len() as u128);
        if count > REGISTER_TERM_CAP {
            return Err(Error::TermExplosion {
                what: "register term",
                count,
                cap: REGISTER_TERM_CAP,
            });
        }
    }
    Ok(InputRegister {
        modes: specs,
        term_count: count as u64,
    })
}

/// JSON form of a cat. Explicit weights are renormalized on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CatSpecJson {
    Explicit { terms: Vec<TermJson> },
    Shorthand(CatShorthand),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub lambda: [f64; 2],
    pub alpha: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CatShorthand {
    Vacuum,
    EvenCat { alpha: [f64; 2] },
    OddCat { alpha: [f64; 2] },
    Coherent { alpha: [f64; 2] },
}

fn c([re, im]: [f64; 2]) -> Complex64 {
    Complex64::new(re, im)
}

impl CatSpecJson {
    pub fn build(&self) -> Result<CatSpec> {
        match self {
            CatSpecJson::Explicit { terms } => make_cat(terms.iter().map(|t| (c(t.lambda), c(t.alpha)))),
            CatSpecJson::Shorthand(CatShorthand::Vacuum) => Ok(vacuum()),
            CatSpecJson::Shorthand(CatShorthand::EvenCat { alpha }) => even_cat(c(*alpha)),
            CatSpecJson::Shorthand(CatShorthand::OddCat { alpha }) => odd_cat(c(*alpha)),
            CatSpecJson::Shorthand(CatShorthand::Coherent { alpha }) => {
                make_cat([(Complex64::new(1.0, 0.0), c(*alpha))])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn fock_amplitude_values() {
        assert_eq!(fock_amplitude(re(0.0), 0).unwrap(), re(1.0));
        assert_eq!(fock_amplitude(re(0.0), 3).unwrap(), re(0.0));
        let a = Complex64::new(0.3, -0.4);
        let f1 = fock_amplitude(a, 1).unwrap();
        assert!((f1 - a * (-0.5 * a.norm_sqr()).exp()).norm() < 1e-16);
        // e^{-1/2} / sqrt(2)
        let f2 = fock_amplitude(re(1.0), 2).unwrap();
        assert!((f2.re - 0.428_881_942_480_353_3).abs() < 1e-15);
        assert!(matches!(fock_amplitude(re(1.0), 171), Err(Error::NOverflow(171))));
    }

    #[test]
    fn fock_amplitude_log_path_matches_direct() {
        // n = 21..30 goes through log space; compare with a direct product.
        let a = Complex64::new(2.1, 1.3);
        for n in 21..=30usize {
            let mut direct = re((-0.5 * a.norm_sqr()).exp());
            for k in 1..=n {
                direct = direct * a / (k as f64).sqrt();
            }
            let got = fock_amplitude(a, n).unwrap();
            assert!((got - direct).norm() <= 1e-12 * direct.norm(), "n={n}");
        }
        let big = fock_amplitude(re(40.0), 10).unwrap();
        assert!(big.re.is_finite());
    }

    #[test]
    fn overlap_cases() {
        let a = Complex64::new(0.7, 0.2);
        assert!((coherent_overlap(a, a) - re(1.0)).norm() < 1e-16);
        let expected = (-2.0 * a.norm_sqr()).exp();
        assert!((coherent_overlap(a, -a) - re(expected)).norm() < 1e-16);
    }

    #[test]
    fn overlap_matches_truncated_fock_sum() {
        let pairs = [
            (Complex64::new(1.2, -0.5), Complex64::new(-0.3, 1.1)),
            (Complex64::new(2.0, 0.0), Complex64::new(0.0, 2.0)),
            (Complex64::new(-1.0, 1.0), Complex64::new(1.4, 0.2)),
        ];
        for (a, b) in pairs {
            let mut sum = re(0.0);
            for n in 0..=60 {
                sum += fock_amplitude(a, n).unwrap().conj() * fock_amplitude(b, n).unwrap();
            }
            assert!((sum - coherent_overlap(a, b)).norm() < 1e-10);
        }
    }

    #[test]
    fn make_cat_cases() {
        let vac = make_cat([(re(1.0), re(0.0))]).unwrap();
        assert_eq!(vac.terms()[0].weight, re(1.0));
        assert_eq!(vac, vacuum());

        let alpha = Complex64::new(0.8, 0.3);
        let even = make_cat([(re(1.0), alpha), (re(1.0), -alpha)]).unwrap();
        let expected = 1.0 / (2.0 * (1.0 + (-2.0 * alpha.norm_sqr()).exp())).sqrt();
        for t in even.terms() {
            assert!((t.weight - re(expected)).norm() < 1e-15);
        }

        assert!(matches!(make_cat([(re(1.0), alpha), (re(-1.0), alpha)]), Err(Error::EmptyCat)));
        assert!(matches!(make_cat(Vec::new()), Err(Error::EmptyCat)));
        assert!(matches!(make_cat([(re(0.0), alpha)]), Err(Error::EmptyCat)));
        assert!(matches!(make_cat([(re(f64::NAN), alpha)]), Err(Error::NonFinite)));
    }

    #[test]
    fn merging_is_exact_only() {
        let a = re(0.5);
        let near = re(0.5 + 1e-15);
        let cat = make_cat([(re(1.0), a), (re(2.0), a), (re(1.0), near)]).unwrap();
        assert_eq!(cat.len(), 2);
        assert!((cat.terms()[0].weight / cat.terms()[1].weight - re(3.0)).norm() < 1e-12);
    }

    #[test]
    fn odd_cat_degenerate_below_minimum() {
        assert!(matches!(odd_cat(re(1e-7)), Err(Error::DegenerateNorm(_))));
        assert!(matches!(odd_cat(re(0.0)), Err(Error::DegenerateNorm(_))));
        assert!(odd_cat(re(1e-6)).is_ok());
        assert!(matches!(
            make_cat([(re(1.0), re(0.0)), (re(-1.0), re(-0.0))]),
            Err(Error::EmptyCat)
        ));
    }

    #[test]
    fn even_cat_matches_make_cat() {
        let a = Complex64::new(1.0, -0.25);
        assert_eq!(even_cat(a).unwrap(), make_cat([(re(1.0), a), (re(1.0), -a)]).unwrap());
    }

    #[test]
    fn parity_and_limits() {
        let even = photon_number_dist(&even_cat(re(1.0)).unwrap(), 30).unwrap();
        for n in (1..=30).step_by(2) {
            assert!(even.probabilities[n] <= 1e-20);
        }
        let odd = photon_number_dist(&odd_cat(re(0.5)).unwrap(), 30).unwrap();
        for n in (0..=30).step_by(2) {
            assert!(odd.probabilities[n] <= 1e-20);
        }
        let small = photon_number_dist(&odd_cat(re(1e-3)).unwrap(), 10).unwrap();
        assert!(small.probabilities[1] >= 1.0 - 1e-5);
    }

    #[test]
    fn vacuum_and_coherent_statistics() {
        let vac = vacuum();
        assert_eq!(vac.fock_amplitude(0).unwrap(), re(1.0));
        assert!((vac.norm_squared() - 1.0).abs() < 1e-16);
        let d = photon_number_dist(&vac, 4).unwrap();
        assert_eq!(d.probabilities, vec![1.0, 0.0, 0.0, 0.0, 0.0]);

        let coh = photon_number_dist(&coherent(re(1.0)), 40).unwrap();
        assert!((coh.probabilities[0] - (-1.0f64).exp()).abs() < 1e-16);
        assert!((coh.probabilities[0] - 0.367_879_441_171_442_3).abs() < 1e-15);
        // Poisson(1) pmf by recurrence
        let mut p = (-1.0f64).exp();
        for n in 1..=40 {
            p /= n as f64;
            assert!((coh.probabilities[n] - p).abs() <= 1e-13 * p, "n={n}");
        }
    }

    #[test]
    fn register_term_counts() {
        let a = re(0.4);
        let reg = make_register(vec![odd_cat(a).unwrap(), odd_cat(a).unwrap()]).unwrap();
        assert_eq!(reg.num_modes(), 2);
        assert_eq!(reg.term_count(), 4);
        let reg = make_register(vec![vacuum(); 5]).unwrap();
        assert_eq!(reg.term_count(), 1);
        assert!(matches!(make_register(vec![]), Err(Error::InvalidArgument(_))));
        let big = make_register(vec![even_cat(a).unwrap(); 41]);
        assert!(matches!(big, Err(Error::TermExplosion { .. })));
        assert!(make_register(vec![even_cat(a).unwrap(); 40]).is_ok());
    }

    #[test]
    fn boson_sampling_layout_in_small_alpha_limit() {
        let a = re(1e-4);
        let mut specs = vec![odd_cat(a).unwrap(); 2];
        specs.extend(vec![vacuum(); 3]);
        let reg = make_register(specs).unwrap();
        for (i, cat) in reg.modes().iter().enumerate() {
            let want = if i < 2 { 1 } else { 0 };
            let d = photon_number_dist(cat, 5).unwrap();
            assert!(d.probabilities[want] > 1.0 - 1e-7);
        }
    }

    #[test]
    fn json_forms() {
        let specs: Vec<CatSpecJson> = serde_json::from_str(
            r#"[{"kind": "vacuum"},
                {"kind": "even_cat", "alpha": [1.0, 0.0]},
                {"kind": "odd_cat", "alpha": [0.5, 0.5]},
                {"kind": "coherent", "alpha": [0.0, 1.0]},
                {"terms": [{"lambda": [2.0, 0.0], "alpha": [1.0, 0.0]},
                           {"lambda": [2.0, 0.0], "alpha": [-1.0, 0.0]}]}]"#,
        )
        .unwrap();
        let cats: Vec<CatSpec> = specs.iter().map(|s| s.build().unwrap()).collect();
        assert_eq!(cats[0], vacuum());
        assert_eq!(cats[1], even_cat(re(1.0)).unwrap());
        assert_eq!(cats[2], odd_cat(Complex64::new(0.5, 0.5)).unwrap());
        assert_eq!(cats[3], coherent(Complex64::new(0.0, 1.0)));
        // pre-normalization weights of 2 renormalize to the even cat
        for (x, y) in cats[4].terms().iter().zip(cats[1].terms()) {
            assert!((x.weight - y.weight).norm() < 1e-15);
        }
        let round = cats[2].to_json().build().unwrap();
        for (x, y) in round.terms().iter().zip(cats[2].terms()) {
            assert!((x.weight - y.weight).norm() < 1e-15);
        }
    }
}
