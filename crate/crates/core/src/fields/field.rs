use std::sync::Arc;

use rayon::prelude::*;

use super::grid::Grid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// All `nt + 1` time levels, time-major.
    SpaceTime,
    /// A single time level.
    TimeSlice,
}

/// Scalar samples at cell midpoints.
///
/// Space-time values are stored time-major with each slice row-major, so
/// slice `n` occupies `values[n·cells .. (n+1)·cells]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid>,
    kind: FieldKind,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>, kind: FieldKind) -> Self {
        Self::constant(grid, kind, 0.0)
    }

    pub fn constant(grid: &Arc<Grid>, kind: FieldKind, value: f64) -> Self {
        let len = expected_len(grid, kind);
        Field {
            grid: Arc::clone(grid),
            kind,
            values: vec![value; len],
        }
    }

    pub fn from_values(grid: &Arc<Grid>, kind: FieldKind, values: Vec<f64>) -> Result<Self> {
        let len = expected_len(grid, kind);
        if values.len() != len {
            return Err(Error::Config(format!(
                "field has {} values, grid expects {len}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            let field = Field {
                grid: Arc::clone(grid),
                kind,
                values,
            };
            return Err(field.evaluation_error(i));
        }
        Ok(Field {
            grid: Arc::clone(grid),
            kind,
            values,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of stored time levels (1 for a time slice).
    pub fn slice_count(&self) -> usize {
        match self.kind {
            FieldKind::SpaceTime => self.grid.levels(),
            FieldKind::TimeSlice => 1,
        }
    }

    pub fn slice(&self, level: usize) -> &[f64] {
        let cells = self.grid.cells();
        &self.values[level * cells..(level + 1) * cells]
    }

    pub(crate) fn slice_mut(&mut self, level: usize) -> &mut [f64] {
        let cells = self.grid.cells();
        &mut self.values[level * cells..(level + 1) * cells]
    }

    /// Copy of one time level as a time-slice field.
    pub fn time_slice(&self, level: usize) -> Field {
        Field {
            grid: Arc::clone(&self.grid),
            kind: FieldKind::TimeSlice,
            values: self.slice(level).to_vec(),
        }
    }

    /// Range of flat indices entering space-time quadrature.
    ///
    /// Level `n ≥ 1` stands for the interval `(t_{n-1}, t_n]`, matching the
    /// backward Euler update; the initial level carries no measure. A time
    /// slice is integrated over space only.
    pub fn quadrature_range(&self) -> std::ops::Range<usize> {
        match self.kind {
            FieldKind::SpaceTime => self.grid.cells()..self.values.len(),
            FieldKind::TimeSlice => 0..self.values.len(),
        }
    }

    /// Quadrature weight of one sample in the raw measure.
    pub fn sample_weight(&self) -> f64 {
        match self.kind {
            FieldKind::SpaceTime => self.grid.cell_volume() * self.grid.dt(),
            FieldKind::TimeSlice => self.grid.cell_volume(),
        }
    }

    /// Total measure of the quadrature set: `|Ω_T|` or `|Ω|`.
    pub fn measure(&self) -> f64 {
        self.quadrature_range().len() as f64 * self.sample_weight()
    }

    pub fn map<F>(&self, op: F) -> Result<Field>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let values: Vec<f64> = self.values.par_iter().map(|&v| op(v)).collect();
        self.with_values(values)
    }

    pub fn zip_with<F>(&self, other: &Field, op: F) -> Result<Field>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        self.check_compatible(other)?;
        let values: Vec<f64> = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(&a, &b)| op(a, b))
            .collect();
        self.with_values(values)
    }

    pub fn scaled(&self, factor: f64) -> Result<Field> {
        self.map(|v| factor * v)
    }

    pub fn negated(&self) -> Field {
        Field {
            grid: Arc::clone(&self.grid),
            kind: self.kind,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// Scales in place; used where a second copy of a large field is wasteful.
    pub fn scale_in_place(&mut self, factor: f64) -> Result<()> {
        self.values.par_iter_mut().for_each(|v| *v *= factor);
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(self.evaluation_error(i)),
            None => Ok(()),
        }
    }

    pub fn check_compatible(&self, other: &Field) -> Result<()> {
        if self.kind != other.kind || *self.grid != *other.grid {
            return Err(Error::Config(
                "fields live on different grids or have different kinds".into(),
            ));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Space-time location `(x, t)` of a flat index.
    pub fn location(&self, index: usize) -> (Vec<f64>, f64) {
        let cells = self.grid.cells();
        let mut x = vec![0.0; self.grid.dim()];
        self.grid.cell_center(index % cells, &mut x);
        let t = match self.kind {
            FieldKind::SpaceTime => self.grid.time(index / cells),
            FieldKind::TimeSlice => 0.0,
        };
        (x, t)
    }

    fn with_values(&self, values: Vec<f64>) -> Result<Field> {
        let field = Field {
            grid: Arc::clone(&self.grid),
            kind: self.kind,
            values,
        };
        match field.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(field.evaluation_error(i)),
            None => Ok(field),
        }
    }

    fn evaluation_error(&self, index: usize) -> Error {
        let (point, time) = self.location(index);
        Error::Evaluation {
            point,
            time,
            value: self.values[index],
        }
    }
}

fn expected_len(grid: &Grid, kind: FieldKind) -> usize {
    match kind {
        FieldKind::SpaceTime => grid.cells() * grid.levels(),
        FieldKind::TimeSlice => grid.cells(),
    }
}

/// Samples `func(x, t)` at every cell midpoint and time level.
pub fn sample<F>(func: F, grid: &Arc<Grid>) -> Result<Field>
where
    F: Fn(&[f64], f64) -> f64 + Sync,
{
    sample_kind(func, grid, FieldKind::SpaceTime, 0.0)
}

/// Samples `func(x, t)` at every cell midpoint of the single level `t`.
pub fn sample_slice<F>(func: F, grid: &Arc<Grid>, t: f64) -> Result<Field>
where
    F: Fn(&[f64], f64) -> f64 + Sync,
{
    sample_kind(func, grid, FieldKind::TimeSlice, t)
}

fn sample_kind<F>(func: F, grid: &Arc<Grid>, kind: FieldKind, slice_time: f64) -> Result<Field>
where
    F: Fn(&[f64], f64) -> f64 + Sync,
{
    let cells = grid.cells();
    let len = expected_len(grid, kind);
    let dim = grid.dim();
    let values: Vec<f64> = (0..len)
        .into_par_iter()
        .map_init(
            || vec![0.0; dim],
            |x, i| {
                grid.cell_center(i % cells, x);
                let t = match kind {
                    FieldKind::SpaceTime => grid.time(i / cells),
                    FieldKind::TimeSlice => slice_time,
                };
                func(x, t)
            },
        )
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        let mut point = vec![0.0; dim];
        grid.cell_center(i % cells, &mut point);
        let time = match kind {
            FieldKind::SpaceTime => grid.time(i / cells),
            FieldKind::TimeSlice => slice_time,
        };
        return Err(Error::Evaluation {
            point,
            time,
            value: values[i],
        });
    }
    Ok(Field {
        grid: Arc::clone(grid),
        kind,
        values,
    })
}
