//! Truncated outcome distributions `P_S = |gamma_S|^2` and exact sampling.
//!
//! Photon number is unbounded for coherent-state inputs, so distributions
//! are built over a box of per-mode cutoffs and carry the total probability
//! they capture. Stored entries are the raw `|gamma_S|^2`; sampling
//! renormalizes by the captured mass.

use crate::amplitudes::{gamma_s, Signature};
use crate::error::{Error, Result};
use crate::numeric::{NeumaierSum, MAX_PHOTONS};
use crate::optics::UnitaryMatrix;
use crate::propagation::propagate_register;
use crate::states::InputRegister;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{DiscreteCDF, Poisson};
use std::io::Write;

/// Cap on the number of signatures in one enumeration.
pub const SIGNATURE_CAP: u128 = 100_000_000;

/// Per-mode photon-number cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffPolicy {
    /// Largest photon count `N_i` kept on each mode.
    pub per_mode_max: Vec<usize>,
    /// Missing mass targeted by [`auto_cutoff`]; `None` for explicit cutoffs.
    pub tail_epsilon: Option<f64>,
}

impl CutoffPolicy {
    pub fn explicit(per_mode_max: Vec<usize>) -> Result<Self> {
        if let Some(&n) = per_mode_max.iter().find(|&&n| n > MAX_PHOTONS) {
            return Err(Error::NOverflow(n));
        }
        Ok(CutoffPolicy {
            per_mode_max,
            tail_epsilon: None,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.per_mode_max.len()
    }

    /// `prod_i (N_i + 1)`.
    pub fn signature_count(&self) -> u128 {
        self.per_mode_max
            .iter()
            .fold(1u128, |acc, &n| acc.saturating_mul(n as u128 + 1))
    }
}

/// Smallest `N` with `P(Poisson(mu) > N) <= bound`.
fn poisson_cutoff(mu: f64, bound: f64) -> Result<usize> {
    if mu == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mu).map_err(|e| Error::InvalidArgument(format!("Poisson mean {mu}: {e}")))?;
    // Start the scan just below the mean; the tail there is at least ~1/2.
    let mut n = (mu.floor() as usize).saturating_sub(1);
    while n > 0 && dist.sf(n as u64 - 1) <= bound {
        n -= 1;
    }
    while dist.sf(n as u64) > bound {
        n += 1;
        if n > MAX_PHOTONS {
            return Err(Error::NOverflow(n));
        }
    }
    Ok(n)
}

/// Per-mode cutoffs from a union bound over branches and modes.
///
/// Each propagated branch is a product of coherent states, so its photon
/// number on mode `j` is Poisson with mean `|beta_j|^2`. Taking
/// `mu_j = max_t |beta_t^(j)|^2` and requiring each Poisson tail to fall
/// below `epsilon / (m * prod_i t_i)` targets a captured mass of at least
/// `1 - epsilon`. For strongly interfering superpositions this is a
/// heuristic envelope rather than a proof; [`SampledDistribution`] records the
/// mass actually captured.
pub fn auto_cutoff(reg: &InputRegister, u: &UnitaryMatrix, epsilon: f64) -> Result<CutoffPolicy> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let output = propagate_register(u, reg)?;
    let m = output.num_modes();
    let mut mu = vec![0.0f64; m];
    output.for_each_in_range(0..output.len(), |_, betas| {
        for (mx, b) in mu.iter_mut().zip(betas) {
            *mx = mx.max(b.norm_sqr());
        }
    });
    let bound = epsilon / (m as f64 * output.len() as f64);
    let per_mode_max = mu
        .iter()
        .map(|&mu_j| poisson_cutoff(mu_j, bound))
        .collect::<Result<Vec<_>>>()?;
    Ok(CutoffPolicy {
        per_mode_max,
        tail_epsilon: Some(epsilon),
    })
}

/// Lexicographic walk over the cutoff box (mode 0 most significant).
#[derive(Debug, Clone)]
pub struct SignatureIter {
    limits: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl Iterator for SignatureIter {
    type Item = Signature;

    fn next(&mut self) -> Option<Signature> {
        let current = self.current.as_mut()?;
        let out = Signature::new(current.clone()).expect("cutoffs are validated");
        let mut level = current.len();
        loop {
            if level == 0 {
                self.current = None;
                break;
            }
            level -= 1;
            if current[level] < self.limits[level] {
                current[level] += 1;
                break;
            }
            current[level] = 0;
        }
        Some(out)
    }
}

pub fn enumerate_signatures(policy: &CutoffPolicy) -> Result<SignatureIter> {
    let count = policy.signature_count();
    if count > SIGNATURE_CAP {
        return Err(Error::TermExplosion {
            what: "signature",
            count,
            cap: SIGNATURE_CAP,
        });
    }
    if let Some(&n) = policy.per_mode_max.iter().find(|&&n| n > MAX_PHOTONS) {
        return Err(Error::NOverflow(n));
    }
    Ok(SignatureIter {
        limits: policy.per_mode_max.clone(),
        current: Some(vec![0; policy.num_modes()]),
    })
}

/// Outcome probabilities over a cutoff box, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledDistribution {
    pub modes: usize,
    pub entries: Vec<(Signature, f64)>,
    pub captured_mass: f64,
    pub cutoffs: CutoffPolicy,
    pub register_digest: String,
    pub unitary_digest: String,
}

impl SampledDistribution {
    /// Probability of `signature`, zero if it lies outside the stored support.
    pub fn probability(&self, signature: &Signature) -> f64 {
        self.entries
            .binary_search_by(|(s, _)| s.cmp(signature))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    /// Entries divided by the captured mass.
    pub fn normalized(&self) -> Result<SampledDistribution> {
        if !(self.captured_mass > 0.0) {
            return Err(Error::EmptyDistribution);
        }
        let mut out = self.clone();
        for (_, p) in &mut out.entries {
            *p /= self.captured_mass;
        }
        out.captured_mass = sum_in_order(out.entries.iter().map(|(_, p)| *p));
        Ok(out)
    }

    /// Empirical distribution of a sample set.
    pub fn from_samples(modes: usize, samples: &[Signature]) -> Result<SampledDistribution> {
        if samples.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let mut sorted: Vec<&Signature> = samples.iter().collect();
        if let Some(bad) = sorted.iter().find(|s| s.len() != modes) {
            return Err(Error::DimMismatch {
                expected: modes,
                found: bad.len(),
            });
        }
        sorted.sort();
        let weight = 1.0 / samples.len() as f64;
        let mut entries: Vec<(Signature, f64)> = Vec::new();
        for s in sorted {
            match entries.last_mut() {
                Some((last, p)) if last == s => *p += weight,
                _ => entries.push((s.clone(), weight)),
            }
        }
        let mut per_mode_max = vec![0; modes];
        for (s, _) in &entries {
            for (mx, &n) in per_mode_max.iter_mut().zip(s.counts()) {
                *mx = (*mx).max(n);
            }
        }
        let captured_mass = sum_in_order(entries.iter().map(|(_, p)| *p));
        Ok(SampledDistribution {
            modes,
            entries,
            captured_mass,
            cutoffs: CutoffPolicy {
                per_mode_max,
                tail_epsilon: None,
            },
            register_digest: String::new(),
            unitary_digest: String::new(),
        })
    }

    /// CSV with header `s_1,...,s_m,probability` and a trailing
    /// `# captured_mass=<value>` comment line.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.modes).map(|i| format!("s_{i}")).collect();
        header.push("probability".into());
        csv.write_record(&header)?;
        for (s, p) in &self.entries {
            let mut row: Vec<String> = s.counts().iter().map(usize::to_string).collect();
            row.push(format!("{p:e}"));
            csv.write_record(&row)?;
        }
        csv.flush().map_err(|e| Error::io("<distribution csv>", e))?;
        let mut inner = csv
            .into_inner()
            .map_err(|e| Error::io("<distribution csv>", e.into_error()))?;
        writeln!(inner, "# captured_mass={:e}", self.captured_mass).map_err(|e| Error::io("<distribution csv>", e))?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "modes": self.modes,
            "captured_mass": self.captured_mass,
            "cutoffs": self.cutoffs,
            "register_digest": self.register_digest,
            "unitary_digest": self.unitary_digest,
            "entries": self.entries.iter().map(|(s, p)| serde_json::json!({
                "signature": s,
                "probability": p,
            })).collect::<Vec<_>>(),
        })
    }
}

fn sum_in_order(values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = NeumaierSum::default();
    values.for_each(|v| acc.add(v));
    acc.total()
}

fn digest_f64s(values: impl Iterator<Item = f64>) -> String {
    let mut hasher = Sha256::new();
    for v in values {
        hasher.update(v.to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

/// SHA-256 over the little-endian bytes of every register weight and amplitude.
pub fn register_digest(reg: &InputRegister) -> String {
    digest_f64s(reg.modes().iter().flat_map(|cat| {
        std::iter::once(cat.len() as f64).chain(
            cat.terms()
                .iter()
                .flat_map(|t| [t.weight.re, t.weight.im, t.alpha.re, t.alpha.im]),
        )
    }))
}

/// SHA-256 over the little-endian bytes of the unitary, row-major.
pub fn unitary_digest(u: &UnitaryMatrix) -> String {
    let m = u.dim();
    digest_f64s(
        std::iter::once(m as f64).chain((0..m).flat_map(|i| (0..m).flat_map(move |j| [u[(i, j)].re, u[(i, j)].im]))),
    )
}

/// Evaluate `|gamma_S|^2` on every signature of the cutoff box.
pub fn build_distribution(u: &UnitaryMatrix, reg: &InputRegister, policy: &CutoffPolicy) -> Result<SampledDistribution> {
    let m = u.dim();
    if reg.num_modes() != m {
        return Err(Error::DimMismatch {
            expected: m,
            found: reg.num_modes(),
        });
    }
    if policy.num_modes() != m {
        return Err(Error::DimMismatch {
            expected: m,
            found: policy.num_modes(),
        });
    }
    let signatures: Vec<Signature> = enumerate_signatures(policy)?.collect();
    let output = propagate_register(u, reg)?;
    let probabilities = signatures
        .par_iter()
        .map(|s| gamma_s(&output, s).map(|g| g.norm_sqr()))
        .collect::<Result<Vec<f64>>>()?;
    let captured_mass = sum_in_order(probabilities.iter().copied());
    Ok(SampledDistribution {
        modes: m,
        entries: signatures.into_iter().zip(probabilities).collect(),
        captured_mass,
        cutoffs: policy.clone(),
        register_digest: register_digest(reg),
        unitary_digest: unitary_digest(u),
    })
}

/// I.i.d. draws by inverse CDF over the lexicographic entry order.
///
/// Uniforms come from `ChaCha20Rng::seed_from_u64(seed)`, one per sample.
pub fn draw_samples(dist: &SampledDistribution, count: usize, seed: u64) -> Result<Vec<Signature>> {
    let mut cdf = Vec::with_capacity(dist.entries.len());
    let mut running = 0.0;
    for (_, p) in &dist.entries {
        running += p;
        cdf.push(running);
    }
    if !(running > 0.0) {
        return Err(Error::EmptyDistribution);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let last = dist.entries.len() - 1;
    Ok((0..count)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * running;
            let idx = cdf.partition_point(|&c| c <= u).min(last);
            dist.entries[idx].0.clone()
        })
        .collect())
}

/// `(1/2) sum_S |P_a(S) - P_b(S)|` over the union of supports.
pub fn total_variation(a: &SampledDistribution, b: &SampledDistribution) -> Result<f64> {
    if a.modes != b.modes {
        return Err(Error::DimMismatch {
            expected: a.modes,
            found: b.modes,
        });
    }
    let mut acc = NeumaierSum::default();
    let (mut i, mut j) = (0, 0);
    while i < a.entries.len() || j < b.entries.len() {
        let order = match (a.entries.get(i), b.entries.get(j)) {
            (Some((sa, _)), Some((sb, _))) => sa.cmp(sb),
            (Some(_), None) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        };
        match order {
            std::cmp::Ordering::Less => {
                acc.add(a.entries[i].1.abs());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                acc.add(b.entries[j].1.abs());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                acc.add((a.entries[i].1 - b.entries[j].1).abs());
                i += 1;
                j += 1;
            }
        }
    }
    Ok(0.5 * acc.total())
}

/// Samples CSV: header `s_1,...,s_m`, one signature per row.
pub fn write_samples_csv<W: Write>(modes: usize, samples: &[Signature], writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let header: Vec<String> = (1..=modes).map(|i| format!("s_{i}")).collect();
    csv.write_record(&header)?;
    for s in samples {
        csv.write_record(s.counts().iter().map(usize::to_string))?;
    }
    csv.flush().map_err(|e| Error::io("<samples csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{hadamard2, haar_random_unitary};
    use crate::states::{coherent, even_cat, make_register, odd_cat, vacuum};
    use num_complex::Complex64;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn sig(v: &[usize]) -> Signature {
        Signature::new(v.to_vec()).unwrap()
    }

    /// P(Poisson(mu) > n) by direct upward summation of the pmf.
    fn poisson_tail_oracle(mu: f64, n: usize) -> f64 {
        let mut pmf = (-mu).exp();
        for k in 1..=n {
            pmf *= mu / k as f64;
        }
        let mut tail = 0.0;
        let mut k = n;
        loop {
            k += 1;
            pmf *= mu / k as f64;
            tail += pmf;
            if pmf < tail * 1e-18 && k as f64 > mu {
                break;
            }
        }
        tail
    }

    #[test]
    fn tail_oracle_matches_library_tail() {
        for &mu in &[0.5, 1.0, 2.0, 7.5] {
            for n in 0..30 {
                let oracle = poisson_tail_oracle(mu, n);
                let lib = Poisson::new(mu).unwrap().sf(n as u64);
                assert!((oracle - lib).abs() <= 1e-9 * oracle + 1e-300, "mu={mu} n={n}");
            }
        }
    }

    #[test]
    fn vacuum_needs_no_photons() {
        let reg = make_register(vec![vacuum(); 3]).unwrap();
        let policy = auto_cutoff(&reg, &haar_random_unitary(3, 1), 1e-9).unwrap();
        assert_eq!(policy.per_mode_max, vec![0, 0, 0]);
        assert_eq!(policy.tail_epsilon, Some(1e-9));
    }

    #[test]
    fn coherent_unit_amplitude_cutoff() {
        // Poisson(1): P(n >= 12) ~ 8.3e-10 is the first tail below 1e-9, so
        // counts 0..=11 are kept
        let first = (0..).find(|&n| poisson_tail_oracle(1.0, n) <= 1e-9).unwrap();
        assert_eq!(first, 11);
        let reg = make_register(vec![coherent(re(1.0))]).unwrap();
        let policy = auto_cutoff(&reg, &UnitaryMatrix::identity(1), 1e-9).unwrap();
        assert_eq!(policy.per_mode_max, vec![first]);
    }

    #[test]
    fn cutoffs_shrink_as_epsilon_grows() {
        let cat = even_cat(re(1.3)).unwrap();
        let reg = make_register(vec![cat.clone(), cat, coherent(re(0.4))]).unwrap();
        let u = haar_random_unitary(3, 4);
        let mut prev: Option<Vec<usize>> = None;
        for eps in [1e-14, 1e-10, 1e-6, 1e-3, 0.1, 0.5] {
            let p = auto_cutoff(&reg, &u, eps).unwrap().per_mode_max;
            if let Some(prev) = &prev {
                assert!(p.iter().zip(prev).all(|(a, b)| a <= b));
            }
            prev = Some(p);
        }
        assert!(auto_cutoff(&reg, &u, 0.0).is_err());
        assert!(auto_cutoff(&reg, &u, 1.0).is_err());
    }

    #[test]
    fn signature_enumeration() {
        let p = CutoffPolicy::explicit(vec![1, 1]).unwrap();
        let all: Vec<_> = enumerate_signatures(&p).unwrap().collect();
        assert_eq!(all, vec![sig(&[0, 0]), sig(&[0, 1]), sig(&[1, 0]), sig(&[1, 1])]);
        let p = CutoffPolicy::explicit(vec![2, 0, 3]).unwrap();
        assert_eq!(enumerate_signatures(&p).unwrap().count() as u128, p.signature_count());
        let p = CutoffPolicy::explicit(vec![0]).unwrap();
        assert_eq!(enumerate_signatures(&p).unwrap().collect::<Vec<_>>(), vec![sig(&[0])]);
        let p = CutoffPolicy::explicit(vec![99; 5]).unwrap();
        assert!(matches!(enumerate_signatures(&p), Err(Error::TermExplosion { .. })));
    }

    #[test]
    fn hom_distribution() {
        let cat = odd_cat(re(1e-3)).unwrap();
        let reg = make_register(vec![cat.clone(), cat]).unwrap();
        let u = hadamard2();
        let policy = auto_cutoff(&reg, &u, 1e-12).unwrap();
        let d = build_distribution(&u, &reg, &policy).unwrap();
        assert!(d.probability(&sig(&[1, 1])) <= 1e-12);
        assert!((d.probability(&sig(&[2, 0])) - 0.5).abs() < 1e-6);
        assert!((d.probability(&sig(&[0, 2])) - 0.5).abs() < 1e-6);
        assert!(d.captured_mass >= 1.0 - 1e-12);
        assert_eq!(d, build_distribution(&u, &reg, &policy).unwrap());
    }

    #[test]
    fn coherent_distribution_is_poisson_product() {
        let alphas = [Complex64::new(0.7, 0.2), re(-0.5), Complex64::new(0.0, 0.9)];
        let reg = make_register(alphas.iter().map(|&a| coherent(a)).collect()).unwrap();
        let u = haar_random_unitary(3, 12);
        let policy = auto_cutoff(&reg, &u, 1e-9).unwrap();
        let d = build_distribution(&u, &reg, &policy).unwrap();
        let betas = crate::propagation::propagate_coherent(&u, &alphas).unwrap();
        for (s, p) in &d.entries {
            let expected: f64 = s
                .counts()
                .iter()
                .zip(&betas)
                .map(|(&n, b)| {
                    let mu = b.norm_sqr();
                    (1..=n).fold((-mu).exp(), |acc, k| acc * mu / k as f64)
                })
                .product();
            assert!((p - expected).abs() < 1e-10);
        }
        assert!(d.captured_mass >= 1.0 - 1e-9);
    }

    #[test]
    fn captured_mass_grows_with_cutoffs() {
        let reg = make_register(vec![even_cat(re(1.0)).unwrap(), odd_cat(re(0.8)).unwrap()]).unwrap();
        let u = haar_random_unitary(2, 5);
        let mut prev = 0.0;
        for n in 0..8 {
            let d = build_distribution(&u, &reg, &CutoffPolicy::explicit(vec![n, n]).unwrap()).unwrap();
            assert!(d.captured_mass >= prev - 1e-15);
            prev = d.captured_mass;
            let again = build_distribution(&u, &reg, &CutoffPolicy::explicit(vec![n + 1, n]).unwrap()).unwrap();
            assert!(again.captured_mass >= d.captured_mass - 1e-15);
        }
    }

    #[test]
    fn sampling_point_mass_and_determinism() {
        let reg = make_register(vec![vacuum(); 2]).unwrap();
        let u = UnitaryMatrix::identity(2);
        let d = build_distribution(&u, &reg, &CutoffPolicy::explicit(vec![2, 2]).unwrap()).unwrap();
        let samples = draw_samples(&d, 50, 1).unwrap();
        assert!(samples.iter().all(|s| *s == sig(&[0, 0])));

        let reg = make_register(vec![even_cat(re(1.0)).unwrap(), coherent(re(0.5))]).unwrap();
        let u = haar_random_unitary(2, 8);
        let d = build_distribution(&u, &reg, &auto_cutoff(&reg, &u, 1e-6).unwrap()).unwrap();
        assert_eq!(draw_samples(&d, 1000, 77).unwrap(), draw_samples(&d, 1000, 77).unwrap());
        assert_ne!(draw_samples(&d, 1000, 77).unwrap(), draw_samples(&d, 1000, 78).unwrap());
    }

    #[test]
    fn empty_distribution_cannot_be_sampled() {
        let d = SampledDistribution {
            modes: 1,
            entries: vec![(sig(&[0]), 0.0)],
            captured_mass: 0.0,
            cutoffs: CutoffPolicy::explicit(vec![0]).unwrap(),
            register_digest: String::new(),
            unitary_digest: String::new(),
        };
        assert!(matches!(draw_samples(&d, 1, 0), Err(Error::EmptyDistribution)));
    }

    #[test]
    fn total_variation_cases() {
        let a = SampledDistribution::from_samples(2, &[sig(&[1, 0])]).unwrap();
        let b = SampledDistribution::from_samples(2, &[sig(&[0, 1])]).unwrap();
        assert_eq!(total_variation(&a, &a).unwrap(), 0.0);
        assert_eq!(total_variation(&a, &b).unwrap(), 1.0);
        let c = SampledDistribution::from_samples(2, &[sig(&[0, 1]), sig(&[1, 0]), sig(&[1, 0]), sig(&[2, 2])]).unwrap();
        assert_eq!(total_variation(&a, &c).unwrap(), total_variation(&c, &a).unwrap());
        assert!((total_variation(&a, &c).unwrap() - 0.5).abs() < 1e-15);
        let d = SampledDistribution::from_samples(3, &[sig(&[0, 0, 1])]).unwrap();
        assert!(matches!(total_variation(&a, &d), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn csv_layout() {
        let cat = odd_cat(re(0.1)).unwrap();
        let reg = make_register(vec![cat.clone(), cat]).unwrap();
        let d = build_distribution(&hadamard2(), &reg, &CutoffPolicy::explicit(vec![1, 2]).unwrap()).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "s_1,s_2,probability");
        assert_eq!(lines.len(), 1 + 6 + 1);
        assert!(lines[1].starts_with("0,0,"));
        assert!(lines[6].starts_with("1,2,"));
        assert!(lines[7].starts_with("# captured_mass="));
        let p: f64 = lines[3].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(p, d.entries[2].1);

        let mut buf = Vec::new();
        write_samples_csv(2, &[sig(&[2, 0]), sig(&[0, 2])], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "s_1,s_2\n2,0\n0,2\n");
    }
}
