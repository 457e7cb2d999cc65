//! Coset covering numbers of balls in finitely generated groups.
//!
//! `c_{G,S}(r)` is the least number of cosets of infinite-index subgroups
//! needed to cover the ball `B_r(G, S)`. This crate computes roster-restricted
//! upper bounds by set cover, certified lower bounds by LP duality, and the
//! random-walk, growth and spectral lower bounds, together with the tooling
//! (word metrics, Schreier graphs, exact walk distributions) behind them.

pub mod cover;
pub mod doubling;
pub mod error;
pub mod group;
pub mod hom;
pub mod lattice;
pub mod numeric;
pub mod presets;
pub mod report;
pub mod spectral;
pub mod stallings;
pub mod subgroup;
pub mod walk;

pub use error::{Error, Result};
pub use group::{
    ball, growth_function, make_group, word_length, Ball, Element, Family, GeneratorChoice,
    GroupSpec, MarkedGroup,
};
pub use report::{assemble_bound_report, BoundReport, Table};
pub use subgroup::{schreier_ball, CosetKey, IndexEvidence, SchreierBall, SubgroupOracle};
pub use walk::{WalkConfig, WalkMeasure, WalkStats};
