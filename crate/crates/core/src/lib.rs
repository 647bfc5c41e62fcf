//! Weighted Besov sequence spaces `b^s_{p,q}` on dyadic level structures,
//! best n-term, continuous-threshold and linear approximation, width
//! asymptotics, a periodized wavelet transform on `[0,1]^d`, and corner
//! singularity benchmarks.
//!
//! ```
//! use besov_core::{besov_seq_norm, cube_structure, Index, SpaceParams, WeightedSequence};
//!
//! let st = cube_structure(1, 3).unwrap();
//! let a = WeightedSequence::new(st, [(Index::new(0, 1, 0), 3.0), (Index::new(1, 1, 1), 4.0)]).unwrap();
//! assert_eq!(besov_seq_norm(&a, &SpaceParams::hilbert(0.0, 1)).unwrap(), 5.0);
//! ```

pub mod error;
pub mod nterm;
pub mod parallel;
pub mod poisson;
pub mod sequence;
pub mod space;
pub mod sum;
pub mod wavelet;
pub mod widths;

pub use error::{Error, Result};
pub use nterm::{
    extremal_lower_sequence, limiting_case_functional, nterm_continuous, partial_sum_approx, plan_thresholds,
    sigma_n_bruteforce, sigma_n_exact, ApproxResult, ExtremalKind, ThresholdPlan,
};
pub use parallel::Execution;
pub use poisson::{
    benchmark_singularity_rates, eval_corner_singularity, eval_radial_cusp, CornerSingularity, RadialCusp,
    SingularityBenchmark,
};
pub use sequence::{
    besov_seq_norm, cube_structure, make_level_structure, scale_isomorphism, Index, LevelStructure, WeightedSequence,
};
pub use space::{embedding_relation, Embedding, Exponent, SpaceParams};
pub use wavelet::{analyze, besov_norm_function, synthesize, GridFunction, WaveletFamily};
pub use widths::{fit_rate, gluskin_gelfand, width_exponent, widths_table, RateReport, TheoryExponent, WidthFamily, WidthKind};
