//! TOML problem descriptions.
//!
//! ```toml
//! [grid]
//! bounds = [[0.0, 1.0], [0.0, 1.0]]
//! nx = [32, 32]
//! t_final = 0.5
//! nt = 64
//!
//! [coefficients]
//! a = { kind = "diagonal", values = [1.0, 2.0] }
//! omega = 0.5
//! lambda = 1.0
//!
//! [forcing]
//! f = { kind = "sine_product", amplitude = 3.0, decay = 1.0 }
//! phi0 = 0.0
//! q = 4.0
//!
//! [sweep]
//! eps = [0.25, 0.125, 0.0625]
//! ```
//!
//! Scalar data is either a number or a table naming a registered function
//! through `kind`; see [`ScalarFn`].

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiments::{bump_profile, BumpCenter, BumpFamily, SweepOptions, SweepTemplate, DEFAULT_GAMMA};
use crate::fields::{
    make_grid, sample, sample_slice, Coefficient, Field, Grid, MatrixCoefficient, ProblemSpec,
};
use crate::moser::{DEFAULT_BETA0, DEFAULT_I_MAX};
use crate::solver::SolveOptions;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: GridSection,
    #[serde(default)]
    pub coefficients: CoefficientSection,
    pub forcing: ForcingSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub moser: MoserSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub bounds: Vec<[f64; 2]>,
    pub nx: Vec<usize>,
    pub t_final: f64,
    pub nt: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSection {
    #[serde(default)]
    pub a: MatrixSpec,
    #[serde(default)]
    pub omega: ScalarSpec,
    #[serde(default = "one")]
    pub lambda: f64,
}

impl Default for CoefficientSection {
    fn default() -> Self {
        CoefficientSection {
            a: MatrixSpec::default(),
            omega: ScalarSpec::default(),
            lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSection {
    #[serde(default)]
    pub f: ScalarSpec,
    #[serde(default)]
    pub phi0: ScalarSpec,
    pub q: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub eps: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub center: Option<Vec<f64>>,
    pub t0: Option<f64>,
    #[serde(default = "one_usize")]
    pub concurrent_rows: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub max_iterations: Option<usize>,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            tolerance: default_tolerance(),
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoserSection {
    #[serde(default = "default_beta0")]
    pub beta0: f64,
    pub alpha: Option<f64>,
    #[serde(default = "default_i_max")]
    pub i_max: usize,
}

impl Default for MoserSection {
    fn default() -> Self {
        MoserSection {
            beta0: DEFAULT_BETA0,
            alpha: None,
            i_max: DEFAULT_I_MAX,
        }
    }
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}
fn default_tolerance() -> f64 {
    SolveOptions::default().tolerance
}
fn default_beta0() -> f64 {
    DEFAULT_BETA0
}
fn default_i_max() -> usize {
    DEFAULT_I_MAX
}

/// A number or a registered function.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ScalarSpec {
    Number(f64),
    Function(ScalarFn),
}

impl Default for ScalarSpec {
    fn default() -> Self {
        ScalarSpec::Number(0.0)
    }
}

/// Registered scalar functions of `(x, t)`. Positions are absolute.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarFn {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude·Π_k sin(m_k π (x_k − lo_k)/L_k)·e^{−decay·t}`; modes default to 1.
    SineProduct {
        #[serde(default = "one")]
        amplitude: f64,
        modes: Option<Vec<u32>>,
        #[serde(default)]
        decay: f64,
    },
    /// `constant + gradient·x + rate·t`.
    Affine {
        #[serde(default)]
        constant: f64,
        gradient: Vec<f64>,
        #[serde(default)]
        rate: f64,
    },
    /// `amplitude·exp(−|x − center|²/width²)`, constant in time; center
    /// defaults to the box midpoint.
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        width: f64,
        center: Option<Vec<f64>>,
    },
    /// `ε^{−γ} ψ((x − x₀)/ε, (t − t₀)/ε²)`; center defaults to the box
    /// midpoint at `t₀ = 0.6T`.
    Bump {
        eps: f64,
        #[serde(default = "default_gamma")]
        gamma: f64,
        center: Option<Vec<f64>>,
        t0: Option<f64>,
    },
}

/// The coefficient matrix.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSpec {
    #[default]
    Identity,
    Scaled { value: f64 },
    Diagonal { values: Vec<ScalarSpec> },
    /// Row-major upper triangle `a11, a12, …, a1N, a22, …, aNN`.
    Upper { entries: Vec<ScalarSpec> },
}

type Evaluator<'a> = Box<dyn Fn(&[f64], f64) -> f64 + Sync + 'a>;

impl ScalarFn {
    fn evaluator(&self, grid: &Grid) -> Result<Evaluator<'_>> {
        let dim = grid.dim();
        let check_len = |name: &str, len: usize| {
            if len == dim {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} has {len} entries on a {dim}-dimensional grid")))
            }
        };
        Ok(match self {
            ScalarFn::Zero => Box::new(|_, _| 0.0),
            ScalarFn::Constant { value } => {
                let v = *value;
                Box::new(move |_, _| v)
            }
            ScalarFn::SineProduct {
                amplitude,
                modes,
                decay,
            } => {
                let modes: Vec<f64> = match modes {
                    Some(m) => {
                        check_len("modes", m.len())?;
                        m.iter().map(|&k| k as f64).collect()
                    }
                    None => vec![1.0; dim],
                };
                let lo = grid.lo().to_vec();
                let len: Vec<f64> = (0..dim).map(|k| grid.hi()[k] - grid.lo()[k]).collect();
                let (amp, decay) = (*amplitude, *decay);
                Box::new(move |x, t| {
                    let mut v = amp * (-decay * t).exp();
                    for k in 0..x.len() {
                        v *= (modes[k] * std::f64::consts::PI * (x[k] - lo[k]) / len[k]).sin();
                    }
                    v
                })
            }
            ScalarFn::Affine {
                constant,
                gradient,
                rate,
            } => {
                check_len("gradient", gradient.len())?;
                let (c, r) = (*constant, *rate);
                Box::new(move |x, t| c + r * t + x.iter().zip(gradient).map(|(a, b)| a * b).sum::<f64>())
            }
            ScalarFn::Gaussian {
                amplitude,
                width,
                center,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::Config(format!("gaussian width = {width} must be positive")));
                }
                let c = match center {
                    Some(c) => {
                        check_len("center", c.len())?;
                        c.clone()
                    }
                    None => grid.box_center(),
                };
                let (amp, inv_w2) = (*amplitude, 1.0 / (width * width));
                Box::new(move |x, _| {
                    let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                    amp * (-r2 * inv_w2).exp()
                })
            }
            ScalarFn::Bump { eps, gamma, center, t0 } => {
                let family = bump_family(grid, *gamma, center.as_deref(), *t0)?;
                let c = family.center_on(grid);
                crate::experiments::check_bump(*eps, &c, grid)?;
                let (amp, inv_e2) = (eps.powf(-gamma), 1.0 / (eps * eps));
                Box::new(move |x, t| {
                    let mut rho2: f64 = x.iter().zip(&c.x).map(|(a, b)| (a - b) * (a - b) * inv_e2).sum();
                    let s = (t - c.t) * inv_e2;
                    rho2 += s * s;
                    amp * bump_profile(rho2)
                })
            }
        })
    }
}

fn bump_family(grid: &Grid, gamma: f64, center: Option<&[f64]>, t0: Option<f64>) -> Result<BumpFamily> {
    let default = BumpCenter::default_for(grid);
    let x = match center {
        Some(c) if c.len() != grid.dim() => {
            return Err(Error::Config(format!(
                "bump center has {} entries on a {}-dimensional grid",
                c.len(),
                grid.dim()
            )))
        }
        Some(c) => c.to_vec(),
        None => default.x,
    };
    Ok(BumpFamily {
        gamma,
        center: Some(BumpCenter {
            x,
            t: t0.unwrap_or(default.t),
        }),
    })
}

impl ScalarSpec {
    /// Constant specs stay uniform; everything else is sampled on the grid.
    pub fn coefficient(&self, grid: &Arc<Grid>) -> Result<Coefficient> {
        match self {
            ScalarSpec::Number(v) => Ok(Coefficient::Uniform(*v)),
            ScalarSpec::Function(ScalarFn::Zero) => Ok(Coefficient::Uniform(0.0)),
            ScalarSpec::Function(ScalarFn::Constant { value }) => Ok(Coefficient::Uniform(*value)),
            ScalarSpec::Function(f) => Ok(Coefficient::Sampled(sample(f.evaluator(grid)?, grid)?)),
        }
    }

    pub fn spacetime(&self, grid: &Arc<Grid>) -> Result<Field> {
        match self {
            ScalarSpec::Number(v) => sample(|_, _| *v, grid),
            ScalarSpec::Function(f) => sample(f.evaluator(grid)?, grid),
        }
    }

    pub fn initial(&self, grid: &Arc<Grid>) -> Result<Field> {
        match self {
            ScalarSpec::Number(v) => sample_slice(|_, _| *v, grid, 0.0),
            ScalarSpec::Function(f) => sample_slice(f.evaluator(grid)?, grid, 0.0),
        }
    }
}

impl MatrixSpec {
    pub fn build(&self, grid: &Arc<Grid>) -> Result<MatrixCoefficient> {
        let dim = grid.dim();
        match self {
            MatrixSpec::Identity => Ok(MatrixCoefficient::identity(dim)),
            MatrixSpec::Scaled { value } => Ok(MatrixCoefficient::scaled_identity(dim, *value)),
            MatrixSpec::Diagonal { values } => {
                if values.len() != dim {
                    return Err(Error::Config(format!(
                        "diagonal has {} values on a {dim}-dimensional grid",
                        values.len()
                    )));
                }
                let diag = values.iter().map(|v| v.coefficient(grid)).collect::<Result<_>>()?;
                Ok(MatrixCoefficient::diagonal(diag))
            }
            MatrixSpec::Upper { entries } => {
                let entries = entries.iter().map(|v| v.coefficient(grid)).collect::<Result<_>>()?;
                MatrixCoefficient::from_upper(dim, entries)
            }
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        let bounds: Vec<(f64, f64)> = self.grid.bounds.iter().map(|b| (b[0], b[1])).collect();
        Ok(Arc::new(make_grid(&bounds, &self.grid.nx, self.grid.t_final, self.grid.nt)?))
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tolerance: self.solver.tolerance,
            max_iterations: self.solver.max_iterations,
        }
    }

    /// The problem with the configured forcing.
    pub fn problem(&self) -> Result<ProblemSpec> {
        let grid = self.grid()?;
        ProblemSpec::new(
            &grid,
            self.coefficients.a.build(&grid)?,
            self.coefficients.omega.coefficient(&grid)?,
            self.forcing.f.spacetime(&grid)?,
            self.forcing.phi0.initial(&grid)?,
            self.coefficients.lambda,
            self.forcing.q,
        )
    }

    /// The problem without forcing, for sweeps.
    pub fn sweep_template(&self) -> Result<SweepTemplate> {
        let grid = self.grid()?;
        Ok(SweepTemplate {
            a: self.coefficients.a.build(&grid)?,
            omega: self.coefficients.omega.coefficient(&grid)?,
            phi0: self.forcing.phi0.initial(&grid)?,
            lambda: self.coefficients.lambda,
            q: self.forcing.q,
            grid,
        })
    }

    pub fn sweep_section(&self) -> Result<&SweepSection> {
        self.sweep
            .as_ref()
            .ok_or_else(|| Error::Config("missing [sweep] section".into()))
    }

    pub fn bump_family(&self) -> Result<BumpFamily> {
        let s = self.sweep_section()?;
        let grid = self.grid()?;
        bump_family(&grid, s.gamma, s.center.as_deref(), s.t0)
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            solve: self.solve_options(),
            beta0: self.moser.beta0,
            alpha: self.moser.alpha,
            i_max: self.moser.i_max,
            concurrent_rows: self.sweep.as_ref().map_or(1, |s| s.concurrent_rows),
        }
    }
}
