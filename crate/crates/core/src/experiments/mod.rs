//! Near-critical forcing families, sweeps over their scale, and the fit of
//! the logarithmic law.

mod bump;
mod export;
mod fit;
mod manufactured;
mod sweep;

pub use bump::{
    bump, bump_profile, check_bump, BumpCenter, BumpFamily, CELLS_PER_RADIUS, CENTER_TIME_FRACTION,
    DEFAULT_GAMMA,
};
pub use export::{
    csv_rows, export, read_csv, render_svg, render_text, write_csv, ExportFormat, SweepCsvRow,
    SWEEP_CSV_HEADER,
};
pub use manufactured::{
    convergence_study, manufactured_problem, ConvergenceReport, ConvergenceRow, DEFAULT_LEVELS, DEFAULT_T_FINAL, DT_PER_H2,
};
pub use fit::{fit_points, LogFit, MIN_FIT_POINTS};
pub use sweep::{
    fit_log_law, run_sweep, spread, strictly_decreasing, SkippedRow, SweepOptions, SweepResult,
    SweepRow, SweepTemplate,
};
