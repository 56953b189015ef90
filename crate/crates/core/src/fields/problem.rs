use std::fmt;
use std::sync::Arc;

use super::field::{Field, FieldKind};
use super::grid::Grid;
use crate::error::{Error, Result};

/// A scalar coefficient: either one value everywhere or a space-time field.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Uniform(f64),
    Sampled(Field),
}

impl Coefficient {
    #[inline]
    pub fn at(&self, level: usize, cell: usize) -> f64 {
        match self {
            Coefficient::Uniform(v) => *v,
            Coefficient::Sampled(f) => f.slice(level)[cell],
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Coefficient::Uniform(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Uniform(v) => *v == 0.0,
            Coefficient::Sampled(f) => f.is_zero(),
        }
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        match self {
            Coefficient::Uniform(v) if !v.is_finite() => {
                Err(Error::Config(format!("non-finite coefficient {v}")))
            }
            Coefficient::Sampled(f) if f.kind() != FieldKind::SpaceTime || **f.grid() != *grid => {
                Err(Error::Config(
                    "sampled coefficient must be a space-time field on the problem grid".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Symmetric coefficient matrix `A(x, t)`, upper triangle stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCoefficient {
    dim: usize,
    entries: Vec<Coefficient>,
}

fn packed(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * (i + 1) / 2 + j
}

impl MatrixCoefficient {
    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, a: f64) -> Self {
        Self::diagonal((0..dim).map(|_| Coefficient::Uniform(a)).collect())
    }

    pub fn diagonal(diag: Vec<Coefficient>) -> Self {
        let dim = diag.len();
        let mut entries = vec![Coefficient::Uniform(0.0); dim * (dim + 1) / 2];
        for (i, d) in diag.into_iter().enumerate() {
            entries[packed(dim, i, i)] = d;
        }
        MatrixCoefficient { dim, entries }
    }

    /// Builds from the packed upper triangle `a_00, a_01, .., a_11, ..`.
    pub fn from_upper(dim: usize, entries: Vec<Coefficient>) -> Result<Self> {
        if entries.len() != dim * (dim + 1) / 2 {
            return Err(Error::Config(format!(
                "{} matrix entries given, dimension {dim} needs {}",
                entries.len(),
                dim * (dim + 1) / 2
            )));
        }
        Ok(MatrixCoefficient { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &Coefficient {
        &self.entries[packed(self.dim, i, j)]
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, level: usize, cell: usize) -> f64 {
        self.entry(i, j).at(level, cell)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (i + 1..self.dim).all(|j| self.entry(i, j).is_zero()))
    }

    pub fn is_uniform(&self) -> bool {
        self.entries.iter().all(Coefficient::is_uniform)
    }
}

/// Data of the initial-boundary-value problem with its ellipticity and
/// integrability constants.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    grid: Arc<Grid>,
    pub a: MatrixCoefficient,
    pub omega: Coefficient,
    pub f: Field,
    pub phi0: Field,
    pub lambda: f64,
    pub q: f64,
}

impl ProblemSpec {
    pub fn new(
        grid: &Arc<Grid>,
        a: MatrixCoefficient,
        omega: Coefficient,
        f: Field,
        phi0: Field,
        lambda: f64,
        q: f64,
    ) -> Result<Self> {
        if a.dim() != grid.dim() {
            return Err(Error::Config(format!(
                "coefficient matrix is {0}x{0} on a {1}-dimensional grid",
                a.dim(),
                grid.dim()
            )));
        }
        for e in &a.entries {
            e.check_grid(grid)?;
        }
        omega.check_grid(grid)?;
        if f.kind() != FieldKind::SpaceTime || **f.grid() != **grid {
            return Err(Error::Config(
                "forcing must be a space-time field on the problem grid".into(),
            ));
        }
        if phi0.kind() != FieldKind::TimeSlice || **phi0.grid() != **grid {
            return Err(Error::Config(
                "initial data must be a time slice on the problem grid".into(),
            ));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Config(format!("lambda = {lambda} must be positive")));
        }
        if !q.is_finite() {
            return Err(Error::Config(format!("q = {q} must be finite")));
        }
        Ok(ProblemSpec {
            grid: Arc::clone(grid),
            a,
            omega,
            f,
            phi0,
            lambda,
            q,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Releases the forcing field, dropping the rest of the spec.
    pub fn into_forcing(self) -> Field {
        self.f
    }

    pub fn with_forcing(&self, f: Field) -> Result<Self> {
        Self::new(
            &self.grid,
            self.a.clone(),
            self.omega.clone(),
            f,
            self.phi0.clone(),
            self.lambda,
            self.q,
        )
    }

    pub fn with_initial(&self, phi0: Field) -> Result<Self> {
        Self::new(
            &self.grid,
            self.a.clone(),
            self.omega.clone(),
            self.f.clone(),
            phi0,
            self.lambda,
            self.q,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Uniform ellipticity of `A`.
    H1,
    /// Sign of `ω` and integrability exponent of `f`.
    H2,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::H1 => write!(f, "(H1)"),
            Hypothesis::H2 => write!(f, "(H2)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub hypothesis: Hypothesis,
    pub detail: String,
    /// Worst offending sample, when the violation is pointwise.
    pub point: Option<(Vec<f64>, f64)>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.hypothesis, self.detail)?;
        if let Some((x, t)) = &self.point {
            write!(f, " at x = {x:?}, t = {t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn names(&self, hypothesis: Hypothesis) -> bool {
        self.violations.iter().any(|v| v.hypothesis == hypothesis)
    }
}

/// Slack allowed in the ellipticity probe.
pub const ELLIPTICITY_SLACK: f64 = 1e-10;

/// Unit probe directions `e_i` and `(e_i ± e_j)/√2`.
pub fn probe_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut probes = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        probes.push(e);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in i + 1..dim {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; dim];
                e[i] = s;
                e[j] = sign * s;
                probes.push(e);
            }
        }
    }
    probes
}

/// Checks (H1) and (H2) sample by sample.
pub fn validate(spec: &ProblemSpec) -> ValidationReport {
    let grid = spec.grid();
    let dim = grid.dim();
    let cells = grid.cells();
    let mut violations = Vec::new();

    let probes = probe_directions(dim);
    // uniform entries need a single sample
    let levels = if spec.a.is_uniform() { 1 } else { grid.levels() };
    let cell_count = if spec.a.is_uniform() { 1 } else { cells };
    let mut worst: Option<(f64, usize, usize)> = None;
    for level in 0..levels {
        for cell in 0..cell_count {
            for xi in &probes {
                let mut form = 0.0;
                for i in 0..dim {
                    for j in 0..dim {
                        form += xi[i] * spec.a.at(i, j, level, cell) * xi[j];
                    }
                }
                let margin = form - spec.lambda;
                if margin < -ELLIPTICITY_SLACK && worst.is_none_or(|w| margin < w.0) {
                    worst = Some((margin, level, cell));
                }
            }
        }
    }
    if let Some((margin, level, cell)) = worst {
        violations.push(Violation {
            hypothesis: Hypothesis::H1,
            detail: format!(
                "xi^T A xi falls below lambda |xi|^2 = {} by {:e}",
                spec.lambda, -margin
            ),
            point: Some(point_of(grid, level, cell)),
        });
    }

    let omega_min = match &spec.omega {
        Coefficient::Uniform(v) => (*v < 0.0).then_some((*v, 0usize)),
        Coefficient::Sampled(f) => f
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v < 0.0)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, v)| (*v, i)),
    };
    if let Some((value, index)) = omega_min {
        violations.push(Violation {
            hypothesis: Hypothesis::H2,
            detail: format!("omega = {value} is negative"),
            point: Some(point_of(grid, index / cells, index % cells)),
        });
    }

    let critical = 1.0 + dim as f64 / 2.0;
    if spec.q <= critical {
        violations.push(Violation {
            hypothesis: Hypothesis::H2,
            detail: format!("q = {} does not exceed 1 + N/2 = {critical}", spec.q),
            point: None,
        });
    }

    ValidationReport { violations }
}

fn point_of(grid: &Grid, level: usize, cell: usize) -> (Vec<f64>, f64) {
    let mut x = vec![0.0; grid.dim()];
    grid.cell_center(cell, &mut x);
    (x, grid.time(level))
}
