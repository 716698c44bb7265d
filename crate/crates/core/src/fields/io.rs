//! Density snapshots.
//!
//! Binary layout, all little-endian: the magic bytes `PLAD`, a `u32` format
//! version, then `d`, `n` and `L` as `f64`, then the `n^d` cell values as
//! `f64` in row-major order.

use std::io::{Read, Write};

use crate::scalar::Scalar;

use super::{DensityField, FieldError, Grid};

pub const MAGIC: [u8; 4] = *b"PLAD";
pub const VERSION: u32 = 1;

pub fn write_plad<T: Scalar, W: Write>(field: &DensityField<T>, mut w: W) -> Result<(), FieldError> {
    let g = field.grid();
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for v in [g.dim() as f64, g.n() as f64, g.half_width().as_f64()] {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in field.values() {
        w.write_all(&v.as_f64().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_plad<T: Scalar, R: Read>(mut r: R) -> Result<DensityField<T>, FieldError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(FieldError::Format("bad magic".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(FieldError::Format(format!("unsupported version {version}")));
    }
    let read_f64 = |r: &mut R| -> Result<f64, FieldError> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    let d = read_f64(&mut r)?;
    let n = read_f64(&mut r)?;
    let half_width = read_f64(&mut r)?;
    let as_count = |v: f64, what: &str| -> Result<usize, FieldError> {
        if v.fract() == 0.0 && (1.0..=1e9).contains(&v) {
            Ok(v as usize)
        } else {
            Err(FieldError::Format(format!("{what} is not a count: {v}")))
        }
    };
    let grid = Grid::new(as_count(d, "d")?, T::lit(half_width), as_count(n, "n")?)?;
    let values = (0..grid.len())
        .map(|_| read_f64(&mut r).map(T::lit))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(FieldError::Format("trailing bytes after cell values".into()));
    }
    DensityField::new(grid, values)
}

/// One row per cell: indices, center coordinates, value.
pub fn write_csv<T: Scalar, W: Write>(field: &DensityField<T>, mut w: W) -> Result<(), FieldError> {
    let g = field.grid();
    if g.dim() == 1 {
        writeln!(w, "i,x,value")?;
    } else {
        writeln!(w, "i,j,x,y,value")?;
    }
    for (flat, v) in field.values().iter().enumerate() {
        let [i, j] = g.multi_index(flat);
        let c = g.center(flat);
        if g.dim() == 1 {
            writeln!(w, "{i},{},{}", c[0].as_f64(), v.as_f64())?;
        } else {
            writeln!(w, "{i},{j},{},{},{}", c[0].as_f64(), c[1].as_f64(), v.as_f64())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{discretize, Profile};

    #[test]
    fn roundtrip() {
        let g = Grid::new(2, 3.0, 12).unwrap();
        let f = discretize(&Profile::gaussian(&[0.2, -0.1], 0.8, 1.3), &g).unwrap();
        let mut buf = Vec::new();
        write_plad(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 24 + 8 * 144);
        assert_eq!(&buf[..4], b"PLAD");
        let back: DensityField<f64> = read_plad(buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn header_layout() {
        let g = Grid::new(1, 2.5, 8).unwrap();
        let mut buf = Vec::new();
        write_plad(&DensityField::zeros(g), &mut buf).unwrap();
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(f64::from_le_bytes(buf[8..16].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 8.0);
        assert_eq!(f64::from_le_bytes(buf[24..32].try_into().unwrap()), 2.5);
    }

    #[test]
    fn rejects_corruption() {
        let g = Grid::new(1, 1.0, 8).unwrap();
        let mut buf = Vec::new();
        write_plad(&DensityField::zeros(g), &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_plad::<f64, _>(bad.as_slice()).is_err());
        assert!(read_plad::<f64, _>(&buf[..buf.len() - 3]).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(read_plad::<f64, _>(long.as_slice()).is_err());
    }

    #[test]
    fn csv_rows() {
        let g = Grid::new(2, 1.0, 8).unwrap();
        let mut buf = Vec::new();
        write_csv(&DensityField::zeros(g), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert_eq!(text.lines().nth(2).unwrap(), "0,1,-0.875,-0.625,0");
    }
}
