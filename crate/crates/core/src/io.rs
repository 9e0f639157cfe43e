//! File formats: the `BPGF` binary container for grid functions and plain
//! CSV exports.
//!
//! Layout of a `BPGF` file (all little-endian):
//! magic `b"BPGF"`, `u32` dim, `u32` samples per axis, `f64` domain length,
//! then `n^dim` interleaved `(re, im)` doubles, row-major with the x index
//! fastest.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Dim, GridFunction};

const MAGIC: &[u8; 4] = b"BPGF";

pub fn write_bpgf<W: Write>(w: &mut W, f: &GridFunction) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(f.dim().rank() as u32).to_le_bytes())?;
    w.write_all(&(f.n() as u32).to_le_bytes())?;
    w.write_all(&f.domain_len().to_le_bytes())?;
    for s in f.samples() {
        w.write_all(&s.re.to_le_bytes())?;
        w.write_all(&s.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_bpgf<R: Read>(r: &mut R) -> Result<GridFunction> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::BadFormat("missing BPGF magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let dim = match u32::from_le_bytes(b4) {
        1 => Dim::One,
        2 => Dim::Two,
        d => return Err(Error::BadFormat(format!("unsupported dim {}", d))),
    };
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let l = f64::from_le_bytes(b8);
    let total = n.pow(dim.rank() as u32);
    let mut samples = Vec::with_capacity(total);
    for _ in 0..total {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        samples.push(Complex64::new(re, im));
    }
    GridFunction::from_samples(dim, n, l, samples)
}

/// CSV export `(index, re, im)` over the flattened sample order.
pub fn write_samples_csv<W: Write>(w: &mut W, f: &GridFunction) -> Result<()> {
    writeln!(w, "index,re,im")?;
    for (i, s) in f.samples().iter().enumerate() {
        writeln!(w, "{},{:.17e},{:.17e}", i, s.re, s.im)?;
    }
    Ok(())
}

/// Run-length-encoded CSV for boolean grids: `(start_index, run_length)` over
/// the flattened cell order.
pub fn write_bool_rle_csv<W: Write>(w: &mut W, cells: &[bool]) -> Result<()> {
    writeln!(w, "start_index,run_length")?;
    let mut i = 0usize;
    while i < cells.len() {
        if cells[i] {
            let start = i;
            while i < cells.len() && cells[i] {
                i += 1;
            }
            writeln!(w, "{},{}", start, i - start)?;
        } else {
            i += 1;
        }
    }
    Ok(())
}
