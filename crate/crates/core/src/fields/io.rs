//! The OLF1 binary field format.
//!
//! Layout: magic `OLF1`; `u32` nx, ny; `f64` h, x0, y0; `u32` component count
//! (1, 2 or 4); then each component as nx·ny `f64` values in node order. All
//! numbers are little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{FieldError, Grid2D, MatrixField, ScalarField, VectorField2};

pub const OLF1_MAGIC: &[u8; 4] = b"OLF1";

#[derive(Debug, Clone, PartialEq)]
pub enum AnyField {
    Scalar(ScalarField),
    Vector(VectorField2),
    Matrix(MatrixField),
}

impl AnyField {
    pub fn grid(&self) -> &Grid2D {
        match self {
            AnyField::Scalar(f) => f.grid(),
            AnyField::Vector(f) => f.grid(),
            AnyField::Matrix(f) => f.grid(),
        }
    }

    fn components(&self) -> Vec<&[f64]> {
        match self {
            AnyField::Scalar(f) => vec![f.values()],
            AnyField::Vector(f) => vec![f.vx(), f.vy()],
            AnyField::Matrix(f) => f.components().to_vec(),
        }
    }
}

impl From<ScalarField> for AnyField {
    fn from(f: ScalarField) -> Self {
        AnyField::Scalar(f)
    }
}

impl From<VectorField2> for AnyField {
    fn from(f: VectorField2) -> Self {
        AnyField::Vector(f)
    }
}

impl From<MatrixField> for AnyField {
    fn from(f: MatrixField) -> Self {
        AnyField::Matrix(f)
    }
}

fn dim(n: usize) -> Result<u32, FieldError> {
    u32::try_from(n).map_err(|_| FieldError::Format(format!("dimension {n} does not fit in u32")))
}

pub fn write_field<W: Write>(mut w: W, field: &AnyField) -> Result<(), FieldError> {
    let g = field.grid();
    let comps = field.components();
    w.write_all(OLF1_MAGIC)?;
    w.write_all(&dim(g.nx())?.to_le_bytes())?;
    w.write_all(&dim(g.ny())?.to_le_bytes())?;
    for v in [g.h(), g.origin().0, g.origin().1] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&(comps.len() as u32).to_le_bytes())?;
    for c in comps {
        for v in c {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, FieldError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, FieldError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_field<R: Read>(mut r: R) -> Result<AnyField, FieldError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != OLF1_MAGIC {
        return Err(FieldError::Format(format!("bad magic {magic:?}")));
    }
    let nx = read_u32(&mut r)? as usize;
    let ny = read_u32(&mut r)? as usize;
    let h = read_f64(&mut r)?;
    let x0 = read_f64(&mut r)?;
    let y0 = read_f64(&mut r)?;
    let grid = Grid2D::new(nx, ny, h, (x0, y0))?;
    let ncomp = read_u32(&mut r)?;
    if !matches!(ncomp, 1 | 2 | 4) {
        return Err(FieldError::Format(format!(
            "component count must be 1, 2 or 4, got {ncomp}"
        )));
    }
    let mut comps = Vec::with_capacity(ncomp as usize);
    for _ in 0..ncomp {
        let mut bytes = vec![0u8; grid.len() * 8];
        r.read_exact(&mut bytes)?;
        let c: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
            .collect();
        comps.push(c);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(FieldError::Format("trailing bytes after last component".into()));
    }
    let mut it = comps.into_iter();
    let mut next = || it.next().expect("component count checked");
    Ok(match ncomp {
        1 => AnyField::Scalar(ScalarField::new(grid, next())?),
        2 => AnyField::Vector(VectorField2::new(grid, next(), next())?),
        _ => AnyField::Matrix(MatrixField::new(grid, next(), next(), next(), next())?),
    })
}

pub fn write_field_file(path: impl AsRef<Path>, field: &AnyField) -> Result<(), FieldError> {
    write_field(BufWriter::new(File::create(path)?), field)
}

pub fn read_field_file(path: impl AsRef<Path>) -> Result<AnyField, FieldError> {
    read_field(BufReader::new(File::open(path)?))
}
