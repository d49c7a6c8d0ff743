//! Small numerical helpers shared across modules: factorial tables and
//! compensated summation.

use num_complex::Complex64;
use std::sync::OnceLock;

/// Largest photon number whose factorial is representable as an `f64`.
pub const MAX_PHOTONS: usize = 170;

/// Above this, factorial-dependent quantities are evaluated in log space.
pub(crate) const EXACT_FACTORIAL_MAX: usize = 20;

fn factorial_table() -> &'static [f64; EXACT_FACTORIAL_MAX + 1] {
    static TABLE: OnceLock<[f64; EXACT_FACTORIAL_MAX + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; EXACT_FACTORIAL_MAX + 1];
        for n in 1..=EXACT_FACTORIAL_MAX {
            t[n] = t[n - 1] * n as f64;
        }
        t
    })
}

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; MAX_PHOTONS + 1];
        for n in 1..=MAX_PHOTONS {
            t[n] = t[n - 1] + (n as f64).ln();
        }
        t
    })
}

/// `n!` for `n <= 20`; these are exact in double precision.
pub(crate) fn factorial_exact(n: usize) -> f64 {
    factorial_table()[n]
}

/// `ln(n!)` for `n <= 170`.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    if n <= EXACT_FACTORIAL_MAX {
        factorial_exact(n).ln()
    } else {
        ln_factorial_table()[n]
    }
}

/// Neumaier-compensated accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexKahan {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexKahan {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &ComplexKahan) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re.total(), self.im.total())
    }
}

/// Neumaier's improved Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `e^z - 1` without cancellation for small `|z|`.
pub(crate) fn complex_expm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half_sin = (0.5 * z.im).sin();
    let em1 = z.re.exp_m1();
    // Re: e^x cos y - 1 = expm1(x) cos y - 2 sin^2(y/2)
    let re = em1 * c - 2.0 * half_sin * half_sin;
    let im = z.re.exp() * s;
    Complex64::new(re, im)
}
