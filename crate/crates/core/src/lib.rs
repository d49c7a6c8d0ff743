//! Exact simulation of boson sampling with coherent-state superposition
//! ("cat state") inputs.
//!
//! Each input mode carries a superposition of coherent states. A passive
//! linear-optics unitary maps every multi-mode coherent branch to another
//! coherent branch, so output photon-number amplitudes are sums over the
//! `prod_i t_i` branches of products of single-mode Fock amplitudes. The
//! crate builds those amplitudes, truncated outcome distributions, and
//! reproducible samples, and cross-checks the small-amplitude limit against
//! permanent-based Fock boson sampling.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitudes;
pub mod error;
pub mod experiments;
pub mod numeric;
pub mod optics;
pub mod propagation;
pub mod sampler;
pub mod states;

pub use amplitudes::{fock_gamma_s, gamma_s, gamma_s_product, gamma_s_tensor, FockConfig, Signature};
pub use error::{Error, Result};
pub use optics::{
    beamsplitter, compose, haar_random_unitary, hadamard2, permanent, permanent_naive, phase_shifter,
    validate_unitary, UnitaryMatrix,
};
pub use propagation::{expand_register, propagate_coherent, propagate_register, MultiModeTerm, OutputSuperposition};
pub use sampler::{
    auto_cutoff, build_distribution, draw_samples, enumerate_signatures, total_variation, CutoffPolicy,
    SampledDistribution,
};
pub use states::{
    coherent, coherent_overlap, even_cat, fock_amplitude, make_cat, make_register, odd_cat, photon_number_dist,
    vacuum, CatSpec, CatTerm, InputRegister,
};

pub use num_complex::Complex64;
