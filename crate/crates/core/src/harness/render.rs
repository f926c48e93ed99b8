//! Portable-pixmap renders of escape times and Beltrami supports.

use num_complex::Complex64;
use std::io::Write;

use crate::grid::BeltramiField;
use crate::rational::RationalMap;
use crate::Result;

fn write_ppm_header<W: Write>(out: &mut W, width: usize, height: usize) -> std::io::Result<()> {
    write!(out, "P6\n{width} {height}\n255\n")
}

/// Escape-time render over the filled-set bounding square.
pub fn render_julia<W: Write>(map: &RationalMap, size: usize, mut out: W) -> Result<()> {
    let half = 1.15 * map.escape_bound()?.max(1.0);
    write_ppm_header(&mut out, size, size)?;
    let max_iter = 96usize;
    let mut row = Vec::with_capacity(3 * size);
    for j in 0..size {
        row.clear();
        for i in 0..size {
            let z = Complex64::new(
                -half + 2.0 * half * (i as f64 + 0.5) / size as f64,
                half - 2.0 * half * (j as f64 + 0.5) / size as f64,
            );
            let mut w = z;
            let mut n = 0usize;
            while n < max_iter && w.norm_sqr() < 1e8 && w.re.is_finite() {
                w = map.evaluate(w);
                n += 1;
            }
            if n == max_iter {
                row.extend_from_slice(&[16, 16, 48]);
            } else {
                let t = n as f64 / max_iter as f64;
                let v = (255.0 * t.sqrt()) as u8;
                row.extend_from_slice(&[v, v / 2 + 64, 255 - v / 3]);
            }
        }
        out.write_all(&row)?;
    }
    Ok(())
}

/// |dilatation| heat map; zero cells are black.
pub fn render_beltrami<W: Write>(field: &BeltramiField, mut out: W) -> Result<()> {
    let spec = field.spec();
    write_ppm_header(&mut out, spec.nx, spec.ny)?;
    let scale = field.sup_norm.max(1e-12);
    let mut row = Vec::with_capacity(3 * spec.nx);
    for j in (0..spec.ny).rev() {
        row.clear();
        for i in 0..spec.nx {
            let m = field.field.at(i, j).norm() / scale;
            if m == 0.0 {
                row.extend_from_slice(&[0, 0, 0]);
            } else {
                let v = (40.0 + 215.0 * m) as u8;
                row.extend_from_slice(&[v, 255 - v / 2, 64]);
            }
        }
        out.write_all(&row)?;
    }
    Ok(())
}
