//! Damped nonlinear Schrödinger equation `i u_t + Δu + i a u = μ|u|^α u` on a
//! periodic box: spectral solver, conserved-quantity diagnostics, blow-up
//! criteria and the experiment runner built on top of them.

pub mod criteria;
pub mod cutoff;
pub mod diagnostics;
pub mod experiments;
pub mod model;
pub mod snapshot;
pub mod solver;
pub mod spectral;

pub use criteria::{negativity_time, radial_criterion, sigma_criterion, Branch, CriterionVerdict, Theorem};
pub use cutoff::{evaluate_cutoff, theta, vartheta, verify_positivity, Completion, CutoffKind, RadialCutoff};
pub use diagnostics::{DiagnosticSample, Probe, VirialWeight};
pub use model::{classify, gaussian_data, make_grid, CriticalityClass, Field, Grid, ModelError, Power, ProblemSpec, Sign};
pub use solver::{run, BlowUpReason, RunOutcome, RunResult, SolverConfig, SolverError};
pub use spectral::Spectral;
