//! Multiple imputation for country-year panel data.
//!
//! The crate reconstructs a complete panel from an incomplete one with
//! chained-equations predictive mean matching, pools per-imputation
//! estimates with Rubin's rules, screens unreliable variables, runs a
//! four-way quality check (descriptive comparison, kernel-density overlap,
//! correlation preservation, convergence statistics), benchmarks against
//! classic single-imputation baselines under controlled amputation, and
//! builds composite capacity indices with country rankings.
//!
//! Start with [`mice::run_mice`] for imputation, [`screening::pipeline_run`]
//! for the full screen-impute-check pipeline, or the `panelmi` binary for
//! batch use. The `examples/` directory holds one runnable example per
//! capability.

pub mod baselines;
pub mod cli;
pub mod datamodel;
pub mod diagnostics;
pub mod error;
pub mod indices;
pub mod ingest;
pub mod linmodel;
pub mod mice;
pub mod pmm;
pub mod pooling;
pub mod screening;

pub use datamodel::{build_panel, Capacity, PanelDataset, Role, VariableMeta};
pub use error::{Error, Result};
