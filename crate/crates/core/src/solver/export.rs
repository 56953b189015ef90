//! Space-time dumps.
//!
//! Both formats start with the text header `N, nx..., nt, T`. The CSV dump
//! then holds one line per time level (row-major cells). The binary dump
//! follows the header line with little-endian `f64` values, time-major.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{Field, FieldKind, Grid};

fn header(grid: &Grid) -> String {
    let mut parts = vec![grid.dim().to_string()];
    parts.extend(grid.nx().iter().map(|n| n.to_string()));
    parts.push(grid.nt().to_string());
    parts.push(format!("{:?}", grid.t_final()));
    parts.join(", ")
}

pub fn write_solution_csv(field: &Field, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "{}", header(field.grid()))?;
        for level in 0..field.slice_count() {
            let row: Vec<String> = field.slice(level).iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}

pub fn write_solution_binary(field: &Field, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "{}", header(field.grid()))?;
        for v in field.values() {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}

/// Reads a CSV dump back onto `grid`, checking the header against it.
pub fn read_solution_csv(grid: &Arc<Grid>, path: &Path) -> Result<Field> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty dump", path.display())))?
        .map_err(|e| Error::io(path, e))?;
    if first.trim() != header(grid) {
        return Err(Error::Config(format!(
            "{}: header `{first}` does not match grid `{}`",
            path.display(),
            header(grid)
        )));
    }
    let mut values = Vec::with_capacity(grid.cells() * grid.levels());
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        for tok in line.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{}: bad value `{tok}`", path.display())))?;
            values.push(v);
        }
    }
    Field::from_values(grid, FieldKind::SpaceTime, values)
}
