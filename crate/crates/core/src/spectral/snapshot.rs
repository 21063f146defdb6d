//! Binary snapshot files.
//!
//! ```text
//! BCNS1 <d> <N> <rank> <t>\n
//! <little-endian f64 re, f64 im> ...
//! ```
//!
//! `rank` is 0 for a scalar and 1 for a vector field; `t` is written with
//! Rust's shortest round-trip formatting. Coefficients follow storage order
//! (row-major, axis 0 slowest, DFT index order along each axis) with
//! components outermost.

use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;

use super::field::{Rank, SpectralField};
use super::grid::shared_grid;
use crate::error::{Error, Result};

pub const MAGIC: &str = "BCNS1";

pub fn write_snapshot<W: Write>(mut w: W, f: &SpectralField, t: f64) -> Result<()> {
    let rank = match f.rank() {
        Rank::Scalar => 0,
        Rank::Vector => 1,
    };
    writeln!(w, "{MAGIC} {} {} {} {}", f.grid().dim(), f.grid().n(), rank, t)?;
    let mut buf = Vec::with_capacity(16 * f.grid().len() * f.ncomp());
    for c in 0..f.ncomp() {
        for z in f.coeffs(c) {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: BufRead>(mut r: R) -> Result<(SpectralField, f64)> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let parts: Vec<&str> = header.trim_end_matches('\n').split(' ').collect();
    if parts.len() != 5 || parts[0] != MAGIC {
        return Err(Error::Snapshot(format!("bad header {:?}", header.trim_end())));
    }
    let field = |i: usize, name: &str| -> Result<usize> {
        parts[i]
            .parse()
            .map_err(|_| Error::Snapshot(format!("bad {name} {:?}", parts[i])))
    };
    let (d, n, rank) = (field(1, "dimension")?, field(2, "mode count")?, field(3, "rank")?);
    let t: f64 = parts[4]
        .parse()
        .map_err(|_| Error::Snapshot(format!("bad time {:?}", parts[4])))?;
    let grid = shared_grid(d, n).map_err(|e| Error::Snapshot(e.to_string()))?;
    let rank = match rank {
        0 => Rank::Scalar,
        1 => Rank::Vector,
        other => return Err(Error::Snapshot(format!("bad rank {other}"))),
    };
    let mut f = SpectralField::zeros(&grid, rank);
    let mut buf = vec![0u8; 16 * grid.len()];
    for c in 0..f.ncomp() {
        r.read_exact(&mut buf)
            .map_err(|_| Error::Snapshot("truncated coefficient data".into()))?;
        for (z, chunk) in f.coeffs_mut(c).iter_mut().zip(buf.chunks_exact(16)) {
            let re = f64::from_le_bytes(chunk[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(chunk[8..].try_into().expect("8 bytes"));
            *z = Complex64::new(re, im);
        }
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Snapshot("trailing bytes after coefficients".into()));
    }
    Ok((f, t))
}

pub fn save_snapshot(path: &Path, f: &SpectralField, t: f64) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_snapshot(&mut w, f, t)?;
    w.flush()?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<(SpectralField, f64)> {
    let file = std::fs::File::open(path)?;
    read_snapshot(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random::{random_field, RandomSpec};
    use crate::spectral::Grid;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn roundtrip_is_bit_exact(seed in any::<u64>(), t in any::<f64>(), vector in any::<bool>()) {
            let g = Grid::new(2, 8).unwrap();
            let rank = if vector { Rank::Vector } else { Rank::Scalar };
            let f = random_field(&g, rank, seed, &RandomSpec::default());
            let mut bytes = Vec::new();
            write_snapshot(&mut bytes, &f, t).unwrap();
            let (back, t2) = read_snapshot(&bytes[..]).unwrap();
            prop_assert_eq!(t.to_bits(), t2.to_bits());
            prop_assert_eq!(back.rank(), rank);
            for c in 0..f.ncomp() {
                for (a, b) in f.coeffs(c).iter().zip(back.coeffs(c)) {
                    prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                    prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
                }
            }
        }
    }

    #[test]
    fn header_layout() {
        let g = Grid::new(3, 8).unwrap();
        let f = SpectralField::zeros(&g, Rank::Vector);
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &f, 0.5).unwrap();
        assert!(bytes.starts_with(b"BCNS1 3 8 1 0.5\n"));
        assert_eq!(bytes.len(), "BCNS1 3 8 1 0.5\n".len() + 3 * 512 * 16);
    }

    #[test]
    fn corrupt_inputs_rejected() {
        assert!(read_snapshot(&b"BCNS2 2 8 0 0\n"[..]).is_err());
        assert!(read_snapshot(&b"BCNS1 2 8 0\n"[..]).is_err());
        assert!(read_snapshot(&b"BCNS1 2 7 0 0\n"[..]).is_err());
        assert!(read_snapshot(&b"BCNS1 2 8 0 0\n\x00\x01"[..]).is_err());
    }
}
