//! Box-domain space-time grids, sampled scalar fields, and problem data.

mod field;
mod grid;
mod problem;

pub use field::{sample, sample_slice, Field, FieldKind};
pub use grid::{make_grid, Grid, MIN_CELLS_PER_AXIS, MIN_TIME_STEPS};
pub use problem::{
    probe_directions, validate, Coefficient, Hypothesis, MatrixCoefficient, ProblemSpec,
    ValidationReport, Violation, ELLIPTICITY_SLACK,
};
