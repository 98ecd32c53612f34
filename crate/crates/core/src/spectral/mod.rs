//! Exact generators on enumerable boxes: spectral gap, relaxation and
//! mixing times, semigroup evaluation and the decay inequalities.

mod checks;
mod generator;
mod semigroup;

pub use checks::{generator_report, verify_lemma_f1, verify_variance_decay, Check, SpectralReport};
pub use generator::{ExactGenerator, GapResult, CROSS_CHECK_CAP, DENSE_CAP, GENERATOR_CAP};
pub use semigroup::MIXING_CAP;
