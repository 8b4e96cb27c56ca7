//! Plain-text and binary matrix dumps.
//!
//! Binary layout: 4-byte magic `LLMX`, `u32` dtype tag (4 = f32, 8 = f64),
//! `u64` dimension, then row-major little-endian values.

use std::io::{self, Read, Write};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

pub const MAGIC: [u8; 4] = *b"LLMX";

/// Nonzero entries as `row col value` lines (0-based indices).
pub fn write_triplets<T: Real, W: Write>(m: &Matrix<T>, out: &mut W) -> io::Result<()> {
    let n = m.dim();
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            if v != T::zero() {
                writeln!(out, "{i} {j} {:.11e}", v.to_f64_lossy())?;
            }
        }
    }
    Ok(())
}

pub fn write_binary<T: Real, W: Write>(m: &Matrix<T>, out: &mut W) -> io::Result<()> {
    let width = std::mem::size_of::<T>();
    out.write_all(&MAGIC)?;
    out.write_all(&(width as u32).to_le_bytes())?;
    out.write_all(&(m.dim() as u64).to_le_bytes())?;
    for &v in m.as_slice() {
        let x = v.to_f64_lossy();
        if width == 4 {
            out.write_all(&(x as f32).to_le_bytes())?;
        } else {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_binary<T: Real, R: Read>(input: &mut R) -> Result<Matrix<T>> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if header[..4] != MAGIC {
        return Err(Error::InvalidInput("bad matrix magic".into()));
    }
    let tag = u32::from_le_bytes(header[4..8].try_into().unwrap());
    let n = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let mut data = Vec::with_capacity(n * n);
    match tag {
        4 => {
            let mut buf = [0u8; 4];
            for _ in 0..n * n {
                input.read_exact(&mut buf)?;
                data.push(T::lit(f32::from_le_bytes(buf) as f64));
            }
        }
        8 => {
            let mut buf = [0u8; 8];
            for _ in 0..n * n {
                input.read_exact(&mut buf)?;
                data.push(T::lit(f64::from_le_bytes(buf)));
            }
        }
        _ => return Err(Error::InvalidInput(format!("unknown dtype tag {tag}"))),
    }
    Matrix::from_row_major(n, data)
}

/// One coordinate per line.
pub fn write_nodes<T: Real, W: Write>(nodes: &[T], out: &mut W) -> io::Result<()> {
    for &x in nodes {
        writeln!(out, "{:.11e}", x.to_f64_lossy())?;
    }
    Ok(())
}
