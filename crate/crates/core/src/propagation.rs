//! Propagation of expanded coherent superpositions through a unitary.
//!
//! A register of per-mode cats expands into `prod_i t_i` multi-mode coherent
//! branches, indexed by a branch vector `(t_1, .., t_m)` in mixed-radix
//! lexicographic order (mode 0 most significant). A unitary maps each branch
//! to another coherent branch with `beta_j = sum_k U[j][k] alpha_k`; the
//! coefficients are untouched.

use crate::error::{Error, Result};
use crate::optics::UnitaryMatrix;
use crate::states::InputRegister;
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;
use std::ops::Range;

/// Cap on `m * term_count` for the JSON-lines term dump.
pub const DUMP_CAP: u128 = 1_000_000;

/// One multi-mode coherent branch with its amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiModeTerm {
    pub coeff: Complex64,
    pub alphas: Vec<Complex64>,
}

/// `beta = U alpha`.
pub fn propagate_coherent(u: &UnitaryMatrix, alphas: &[Complex64]) -> Result<Vec<Complex64>> {
    let m = u.dim();
    if alphas.len() != m {
        return Err(Error::DimMismatch {
            expected: m,
            found: alphas.len(),
        });
    }
    let mut beta = vec![Complex64::new(0.0, 0.0); m];
    for (j, b) in beta.iter_mut().enumerate() {
        for (k, &a) in alphas.iter().enumerate() {
            *b += u[(j, k)] * a;
        }
    }
    Ok(beta)
}

/// Mixed-radix digits of a branch index (mode 0 most significant).
pub fn branch_digits(radices: &[usize], mut index: u64) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for (d, &r) in digits.iter_mut().zip(radices).rev() {
        *d = (index % r as u64) as usize;
        index /= r as u64;
    }
    digits
}

fn input_term(reg: &InputRegister, digits: &[usize]) -> MultiModeTerm {
    let mut coeff = Complex64::new(1.0, 0.0);
    let mut alphas = Vec::with_capacity(digits.len());
    for (cat, &d) in reg.modes().iter().zip(digits) {
        let term = cat.terms()[d];
        coeff *= term.weight;
        alphas.push(term.alpha);
    }
    MultiModeTerm { coeff, alphas }
}

/// Lazy iterator over the expanded input branches.
pub struct RegisterTerms<'a> {
    register: &'a InputRegister,
    radices: Vec<usize>,
    next: u64,
}

impl Iterator for RegisterTerms<'_> {
    type Item = MultiModeTerm;

    fn next(&mut self) -> Option<MultiModeTerm> {
        if self.next >= self.register.term_count() {
            return None;
        }
        let digits = branch_digits(&self.radices, self.next);
        self.next += 1;
        Some(input_term(self.register, &digits))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.register.term_count() - self.next) as usize;
        (left, Some(left))
    }
}

/// Enumerate `sum_t lambda_t1 .. lambda_tm |alpha_t1, .., alpha_tm>` term by term.
pub fn expand_register(reg: &InputRegister) -> RegisterTerms<'_> {
    RegisterTerms {
        register: reg,
        radices: reg.term_counts(),
        next: 0,
    }
}

/// The output state `U |psi_in>` as a lazily enumerated superposition.
#[derive(Debug, Clone)]
pub struct OutputSuperposition {
    register: InputRegister,
    unitary: UnitaryMatrix,
    radices: Vec<usize>,
    /// `columns[k][b]` is `U[:, k] * alpha_b^(k)`.
    columns: Vec<Vec<Vec<Complex64>>>,
}

pub fn propagate_register(u: &UnitaryMatrix, reg: &InputRegister) -> Result<OutputSuperposition> {
    let m = u.dim();
    if reg.num_modes() != m {
        return Err(Error::DimMismatch {
            expected: m,
            found: reg.num_modes(),
        });
    }
    let columns = reg
        .modes()
        .iter()
        .enumerate()
        .map(|(k, cat)| {
            cat.terms()
                .iter()
                .map(|t| (0..m).map(|j| u[(j, k)] * t.alpha).collect())
                .collect()
        })
        .collect();
    Ok(OutputSuperposition {
        register: reg.clone(),
        unitary: u.clone(),
        radices: reg.term_counts(),
        columns,
    })
}

impl OutputSuperposition {
    pub fn register(&self) -> &InputRegister {
        &self.register
    }

    pub fn unitary(&self) -> &UnitaryMatrix {
        &self.unitary
    }

    pub fn num_modes(&self) -> usize {
        self.unitary.dim()
    }

    /// Number of branches, `prod_i t_i`.
    pub fn len(&self) -> u64 {
        self.register.term_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The propagated branch at `index`, computed from scratch.
    pub fn term(&self, index: u64) -> MultiModeTerm {
        Cursor::new(self, index).term()
    }

    /// All propagated branches in order.
    pub fn terms(&self) -> PropagatedTerms<'_> {
        self.terms_in(0..self.len())
    }

    /// Propagated branches with indices in `range`.
    pub fn terms_in(&self, range: Range<u64>) -> PropagatedTerms<'_> {
        let end = range.end.min(self.len());
        PropagatedTerms {
            cursor: (range.start < end).then(|| Cursor::new(self, range.start)),
            remaining: end.saturating_sub(range.start),
        }
    }

    /// Visit `(coeff, betas)` for each branch in `range`, in order, without
    /// allocating per branch. Each `betas` is bit-identical to
    /// [`propagate_coherent`] on that branch's input amplitudes.
    pub fn for_each_in_range<F>(&self, range: Range<u64>, mut visit: F)
    where
        F: FnMut(Complex64, &[Complex64]),
    {
        if range.start >= range.end {
            return;
        }
        let mut cursor = Cursor::new(self, range.start);
        let mut index = range.start;
        loop {
            visit(cursor.coeff(), cursor.betas());
            index += 1;
            if index >= range.end {
                break;
            }
            cursor.advance();
        }
    }

    /// Write every branch as a JSON line `{"coeff": [re, im], "alphas": [[re, im], ..]}`.
    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        let size = self.len() as u128 * self.num_modes() as u128;
        if size > DUMP_CAP {
            return Err(Error::TermExplosion {
                what: "term dump entry",
                count: size,
                cap: DUMP_CAP,
            });
        }
        #[derive(Serialize)]
        struct Line {
            coeff: [f64; 2],
            alphas: Vec<[f64; 2]>,
        }
        let mut result = Ok(());
        self.for_each_in_range(0..self.len(), |coeff, betas| {
            if result.is_err() {
                return;
            }
            let line = Line {
                coeff: [coeff.re, coeff.im],
                alphas: betas.iter().map(|b| [b.re, b.im]).collect(),
            };
            result = serde_json::to_writer(&mut writer, &line)
                .map_err(std::io::Error::from)
                .and_then(|_| writer.write_all(b"\n"));
        });
        result.map_err(|e| Error::io("<term dump>", e))
    }
}

/// Lazy iterator over propagated branches.
pub struct PropagatedTerms<'a> {
    cursor: Option<Cursor<'a>>,
    remaining: u64,
}

impl Iterator for PropagatedTerms<'_> {
    type Item = MultiModeTerm;

    fn next(&mut self) -> Option<MultiModeTerm> {
        if self.remaining == 0 {
            return None;
        }
        let cursor = self.cursor.as_mut()?;
        let term = cursor.term();
        self.remaining -= 1;
        if self.remaining > 0 {
            cursor.advance();
        }
        Some(term)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining as usize, Some(self.remaining as usize))
    }
}

/// Mixed-radix walker keeping per-level prefix sums, so advancing to the
/// next branch only recomputes the levels whose digit changed.
struct Cursor<'a> {
    out: &'a OutputSuperposition,
    digits: Vec<usize>,
    /// `partial[k]` = sum over modes `0..=k` of their column contributions.
    partial: Vec<Vec<Complex64>>,
    /// `coeffs[k]` = product of weights of modes `0..=k`.
    coeffs: Vec<Complex64>,
}

impl<'a> Cursor<'a> {
    fn new(out: &'a OutputSuperposition, index: u64) -> Self {
        let m = out.num_modes();
        let mut cursor = Cursor {
            out,
            digits: branch_digits(&out.radices, index),
            partial: vec![vec![Complex64::new(0.0, 0.0); m]; m],
            coeffs: vec![Complex64::new(0.0, 0.0); m],
        };
        cursor.refresh_from(0);
        cursor
    }

    fn refresh_from(&mut self, level: usize) {
        let m = self.out.num_modes();
        for k in level..m {
            let d = self.digits[k];
            let weight = self.out.register.modes()[k].terms()[d].weight;
            let contrib = &self.out.columns[k][d];
            if k == 0 {
                self.coeffs[0] = Complex64::new(1.0, 0.0) * weight;
                for (p, &c) in self.partial[0].iter_mut().zip(contrib) {
                    *p = Complex64::new(0.0, 0.0) + c;
                }
            } else {
                self.coeffs[k] = self.coeffs[k - 1] * weight;
                let (before, after) = self.partial.split_at_mut(k);
                let prev = &before[k - 1];
                for j in 0..m {
                    after[0][j] = prev[j] + contrib[j];
                }
            }
        }
    }

    fn advance(&mut self) {
        let mut level = self.digits.len();
        while level > 0 {
            level -= 1;
            self.digits[level] += 1;
            if self.digits[level] < self.out.radices[level] {
                self.refresh_from(level);
                return;
            }
            self.digits[level] = 0;
        }
        // wrapped past the last branch; restart from the first
        self.refresh_from(0);
    }

    fn coeff(&self) -> Complex64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    fn betas(&self) -> &[Complex64] {
        &self.partial[self.partial.len() - 1]
    }

    fn term(&self) -> MultiModeTerm {
        MultiModeTerm {
            coeff: self.coeff(),
            alphas: self.betas().to_vec(),
        }
    }
}
