//! Canned checks of the small-amplitude behaviour of cat-state sampling,
//! plus configuration loading and the command-line driver.

mod bound;
pub mod cli;
pub mod config;
mod hom;
mod reduction;

pub use bound::{bound_check, hardness_bound, ln_hardness_bound, HardnessBoundReport};
pub use hom::{hom_check, HomReport};
pub use reduction::{fock_reduction_check, log_log_slope, reduction_sweep, ReductionReport, ReductionSweep};

/// Format with nine significant digits.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..9).contains(&exponent) {
        let decimals = (8 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}
