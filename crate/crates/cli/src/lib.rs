//! Library half of the `histeval` binary: the evaluation runner and sample
//! file readers, kept out of `main` so integration tests can drive them
//! directly.

pub mod eval;
pub mod input;

pub use eval::{
    run_eval, EvalDocument, EvalError, EvalOptions, EvalOutcome, OutputFormat, SampleSource,
};
pub use input::{read_samples, InputError, InputFormat};
