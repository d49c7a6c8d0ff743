//! Linear-optics unitaries and matrix permanents.
//!
//! A [`UnitaryMatrix`] `U` acts on coherent amplitudes as `beta = U alpha`,
//! i.e. row `j` of `U` collects the contributions reaching output mode `j` and
//! column `k` describes where input mode `k` is routed. All mode indices in
//! this crate are zero-based.
//!
//! Beamsplitter phase convention (a choice, the physics only fixes it up to
//! relabeling): the 2x2 block on modes `(i, j)` is
//!
//! ```text
//! [  cos(theta)              e^{i phi} sin(theta) ]
//! [ -e^{-i phi} sin(theta)   cos(theta)           ]
//! ```
//!
//! and the 50/50 "Hadamard" splitter is `(1/sqrt 2) [[1, 1], [1, -1]]`.

use crate::error::{Error, Result};
use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::ops::Index;

use crate::numeric::ComplexKahan;

/// Default tolerance on `max |U U^dagger - I|`.
pub const DEFAULT_UNITARITY_TOL: f64 = 1e-10;

/// Largest matrix accepted by [`permanent`].
pub const PERMANENT_CAP: usize = 30;

/// Largest matrix accepted by [`permanent_naive`].
pub const NAIVE_PERMANENT_CAP: usize = 9;

/// An m x m unitary transfer matrix of a passive linear-optics network.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: DMatrix<Complex64>,
}

impl UnitaryMatrix {
    pub fn identity(m: usize) -> Self {
        assert!(m > 0, "unitary must have at least one mode");
        UnitaryMatrix {
            matrix: DMatrix::identity(m, m),
        }
    }

    /// Build from row-major nested vectors, validating unitarity.
    pub fn from_rows(rows: &[Vec<Complex64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::NonSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        validate_unitary(matrix, tol)
    }

    /// Number of optical modes.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.matrix[(i, j)]).collect())
            .collect()
    }

    /// `max |U U^dagger - I|` over all entries.
    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }

    /// Multiply every entry by a global phase `e^{i theta}`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        UnitaryMatrix {
            matrix: self.matrix.map(|z| z * phase),
        }
    }

    /// Relabel modes: entry `(i, j)` of the result is `U[(perm[i], perm[j])]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        let m = self.dim();
        if perm.len() != m {
            return Err(Error::DimMismatch {
                expected: m,
                found: perm.len(),
            });
        }
        if let Some(&bad) = perm.iter().find(|&&p| p >= m) {
            return Err(Error::ModeOutOfRange { mode: bad, modes: m });
        }
        Ok(UnitaryMatrix {
            matrix: DMatrix::from_fn(m, m, |i, j| self.matrix[(perm[i], perm[j])]),
        })
    }
}

impl Index<(usize, usize)> for UnitaryMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.matrix[idx]
    }
}

fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let product = m * m.adjoint();
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((product[(i, j)] - target).norm());
        }
    }
    worst
}

/// Check that `entries` is a finite square unitary within `tol`.
pub fn validate_unitary(entries: DMatrix<Complex64>, tol: f64) -> Result<UnitaryMatrix> {
    if entries.nrows() != entries.ncols() {
        return Err(Error::NonSquare {
            rows: entries.nrows(),
            cols: entries.ncols(),
        });
    }
    if entries.nrows() == 0 {
        return Err(Error::InvalidArgument("unitary must have at least one mode".into()));
    }
    if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let deviation = unitarity_deviation(&entries);
    if !(deviation <= tol) {
        return Err(Error::NotUnitary(deviation));
    }
    Ok(UnitaryMatrix { matrix: entries })
}

/// The 50/50 beamsplitter `(1/sqrt 2) [[1, 1], [1, -1]]`.
pub fn hadamard2() -> UnitaryMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    UnitaryMatrix {
        matrix: DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(h, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(-h, 0.0),
            ],
        ),
    }
}

/// Beamsplitter between modes `i < j` embedded in `m` modes.
pub fn beamsplitter(m: usize, i: usize, j: usize, theta: f64, phi: f64) -> Result<UnitaryMatrix> {
    if m == 0 {
        return Err(Error::InvalidArgument("unitary must have at least one mode".into()));
    }
    if j >= m {
        return Err(Error::ModeOutOfRange { mode: j, modes: m });
    }
    if i >= j {
        return Err(Error::ModeOutOfRange { mode: i, modes: m });
    }
    let (s, c) = theta.sin_cos();
    let mut u = UnitaryMatrix::identity(m);
    u.matrix[(i, i)] = Complex64::new(c, 0.0);
    u.matrix[(j, j)] = Complex64::new(c, 0.0);
    u.matrix[(i, j)] = Complex64::from_polar(s, phi);
    u.matrix[(j, i)] = -Complex64::from_polar(s, -phi);
    Ok(u)
}

/// Phase `e^{i phi}` on mode `i`, identity elsewhere.
pub fn phase_shifter(m: usize, i: usize, phi: f64) -> Result<UnitaryMatrix> {
    if m == 0 {
        return Err(Error::InvalidArgument("unitary must have at least one mode".into()));
    }
    if i >= m {
        return Err(Error::ModeOutOfRange { mode: i, modes: m });
    }
    let mut u = UnitaryMatrix::identity(m);
    u.matrix[(i, i)] = Complex64::from_polar(1.0, phi);
    Ok(u)
}

/// The network "`first`, then `second`": as a matrix, `second * first`.
pub fn compose(first: &UnitaryMatrix, second: &UnitaryMatrix) -> Result<UnitaryMatrix> {
    if first.dim() != second.dim() {
        return Err(Error::DimMismatch {
            expected: first.dim(),
            found: second.dim(),
        });
    }
    validate_unitary(&second.matrix * &first.matrix, DEFAULT_UNITARITY_TOL)
}

/// Haar-random unitary on `m` modes, deterministic in `seed`.
///
/// Entries of an m x m matrix of standard complex Gaussians are drawn in
/// row-major order (real part then imaginary part) from `ChaCha20Rng`
/// seeded with `seed_from_u64(seed)`. The matrix is QR-factorized and each
/// column of `Q` is multiplied by the phase of the matching diagonal entry of
/// `R`, which removes the bias of the factorization's phase convention.
pub fn haar_random_unitary(m: usize, seed: u64) -> UnitaryMatrix {
    assert!(m > 0, "unitary must have at least one mode");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(m * m);
    for _ in 0..m * m {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        entries.push(Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2);
    }
    let gaussian = DMatrix::from_row_slice(m, m, &entries);
    let qr = gaussian.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..m {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 {
            d / norm
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix { matrix: q }
}

fn check_square(m: &DMatrix<Complex64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Matrix permanent by Ryser's formula with Gray-code subset order.
///
/// Column subsets are visited in reflected Gray-code order, so each step adds
/// or removes exactly one column from the running row sums.
pub fn permanent(m: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = check_square(m)?;
    if n > PERMANENT_CAP {
        return Err(Error::TooLarge {
            n,
            cap: PERMANENT_CAP,
        });
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }

    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut in_subset = vec![false; n];
    let mut subset_size = 0usize;
    let mut acc = ComplexKahan::default();

    for step in 1u64..(1u64 << n) {
        let col = step.trailing_zeros() as usize;
        let column = m.column(col);
        if in_subset[col] {
            for (s, &x) in row_sums.iter_mut().zip(column.iter()) {
                *s -= x;
            }
            subset_size -= 1;
        } else {
            for (s, &x) in row_sums.iter_mut().zip(column.iter()) {
                *s += x;
            }
            subset_size += 1;
        }
        in_subset[col] = !in_subset[col];

        let product = row_sums
            .iter()
            .fold(Complex64::new(1.0, 0.0), |p, &s| p * s);
        if subset_size.is_multiple_of(2) {
            acc.add(product);
        } else {
            acc.add(-product);
        }
    }

    let total = acc.total();
    Ok(if n % 2 == 0 { total } else { -total })
}

/// Definitional permanent: sum over all `n!` permutations.
pub fn permanent_naive(m: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = check_square(m)?;
    if n > NAIVE_PERMANENT_CAP {
        return Err(Error::TooLarge {
            n,
            cap: NAIVE_PERMANENT_CAP,
        });
    }
    let mut total = Complex64::new(0.0, 0.0);
    for sigma in (0..n).permutations(n) {
        total += sigma
            .iter()
            .enumerate()
            .fold(Complex64::new(1.0, 0.0), |p, (row, &col)| p * m[(row, col)]);
    }
    Ok(total)
}

/// On-disk matrix form: `{"dim": m, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let rows = m.nrows();
        MatrixFile {
            dim: rows,
            re: (0..rows)
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
                .collect(),
            im: (0..rows)
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
                .collect(),
        }
    }

    /// Raw square matrix; no unitarity check.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        let n = self.dim;
        let shape_ok = |part: &Vec<Vec<f64>>| part.len() == n && part.iter().all(|r| r.len() == n);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            let cols = self
                .re
                .iter()
                .chain(self.im.iter())
                .map(Vec::len)
                .find(|&l| l != n)
                .unwrap_or(self.re.len().max(self.im.len()));
            return Err(Error::NonSquare { rows: n, cols });
        }
        Ok(DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(self.re[i][j], self.im[i][j])
        }))
    }

    pub fn to_unitary(&self, tol: f64) -> Result<UnitaryMatrix> {
        validate_unitary(self.to_matrix()?, tol)
    }
}
