//! Exact structure of semantic-loss minima for propositional constraints
//! under the independence assumption, plus the gradient-descent experiments
//! that probe them empirically.
//!
//! The pipeline runs from a parsed [`Formula`] through its prime implicants
//! to the cubical set of possible independent parameters, its homology, and
//! the losses and optimizers that land on (or near) that set.

pub mod cubical;
pub mod distributions;
pub mod error;
pub mod formula;
pub mod homology;
pub mod implicants;
pub mod losses;
pub mod optimize;
pub mod random;
mod unionfind;

pub use cubical::{cube_of, cubical_set, is_convex, CubicalSet, ElementaryCube, Interval, EPS_DET};
pub use distributions::{
    condition, is_possible, mixture_bounds, mixture_path, mixture_support, representable_conditional, wmc,
    DenseDistribution, IndependentParams, MixtureBounds, MixtureParams,
};
pub use error::{Error, Result};
pub use formula::{mnist_add_formula, BinaryOp, Expr, Formula, Limits, PartialAssignment, World};
pub use homology::{chain_complex, homology, smith_normal_form, ChainComplex, HomologyResult, SmithForm};
pub use implicants::{
    connected_components, implicant_graph, is_implicant, minimal_cover, prime_implicants, ImplicantGraph,
    PrimeImplicantSet,
};
pub use losses::{
    dense_loss, entropy_reg_loss, fuzzy_loss, fuzzy_value, landscape_csv, landscape_grid, semantic_grad_mu,
    semantic_loss, EntropyVariant, FuzzyForm, FuzzyLogic, LossSpec,
};
pub use optimize::{
    classify_minimum, experiment, gd_minimize, initialize, ExperimentReport, InitSpec, MinimumClass, ModelKind,
    ModelSpec, Objective, RunConfig, RunResult,
};
pub use random::random_formula;
pub use unionfind::UnionFind;
