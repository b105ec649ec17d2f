//! Field serialization.
//!
//! Binary layout, all little-endian 64-bit: `dim`, `nx`, `nt` as unsigned
//! integers, then `extent`, `dt` as IEEE doubles, then the values in storage
//! order (time-major, x fastest).

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::{Grid, SpaceTimeField};

pub fn write_binary<W: Write>(field: &SpaceTimeField, mut w: W) -> Result<()> {
    let g = field.grid();
    w.write_all(&(g.dim() as u64).to_le_bytes())?;
    w.write_all(&(g.nx() as u64).to_le_bytes())?;
    w.write_all(&(g.nt() as u64).to_le_bytes())?;
    w.write_all(&g.extent().to_le_bytes())?;
    w.write_all(&g.dt().to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SpaceTimeField> {
    let mut word = [0u8; 8];
    let mut next = |r: &mut R| -> Result<[u8; 8]> {
        r.read_exact(&mut word)
            .map_err(|e| Error::Format(format!("truncated input: {e}")))?;
        Ok(word)
    };
    let dim = u64::from_le_bytes(next(&mut r)?) as usize;
    let nx = u64::from_le_bytes(next(&mut r)?) as usize;
    let nt = u64::from_le_bytes(next(&mut r)?) as usize;
    let extent = f64::from_le_bytes(next(&mut r)?);
    let dt = f64::from_le_bytes(next(&mut r)?);
    let grid = Grid::new(dim, extent, nx, nt, dt).map_err(|e| Error::Format(e.to_string()))?;
    let count = grid.n_levels() * grid.n_space();
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        values.push(f64::from_le_bytes(next(&mut r)?));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes", rest.len())));
    }
    SpaceTimeField::new(grid, values)
}

/// CSV with columns `t,x,u` (1D) or `t,x,y,u` (2D), one row per node.
pub fn write_csv<W: Write>(field: &SpaceTimeField, mut w: W) -> Result<()> {
    let g = field.grid();
    if g.dim() == 1 {
        writeln!(w, "t,x,u")?;
    } else {
        writeln!(w, "t,x,y,u")?;
    }
    for n in 0..g.n_levels() {
        let t = g.time(n);
        for s in 0..g.n_space() {
            let x = g.coords(s);
            if g.dim() == 1 {
                writeln!(w, "{t},{},{}", x[0], field.at(n, s))?;
            } else {
                writeln!(w, "{t},{},{},{}", x[0], x[1], field.at(n, s))?;
            }
        }
    }
    Ok(())
}
