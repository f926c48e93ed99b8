//! Uniform complex-valued lattices shared by the Beltrami machinery.

use num_complex::Complex64;
use std::io::{Read, Write};

use crate::error::Error;
use crate::Result;

/// Uniform lattice over a bounding rectangle, square cells of spacing `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Square lattice of `n` x `n` cells covering `[lo, hi]` on both axes.
    pub fn square(lo: f64, hi: f64, n: usize) -> Self {
        assert!(hi > lo && n >= 2);
        Self {
            x0: lo,
            y0: lo,
            h: (hi - lo) / n as f64,
            nx: n,
            ny: n,
        }
    }

    /// Square lattice covering all `points` with a relative margin.
    pub fn covering(points: &[Complex64], margin: f64, n: usize) -> Self {
        let mut lo_x = f64::INFINITY;
        let mut hi_x = f64::NEG_INFINITY;
        let mut lo_y = f64::INFINITY;
        let mut hi_y = f64::NEG_INFINITY;
        for z in points {
            lo_x = lo_x.min(z.re);
            hi_x = hi_x.max(z.re);
            lo_y = lo_y.min(z.im);
            hi_y = hi_y.max(z.im);
        }
        let side = (hi_x - lo_x).max(hi_y - lo_y).max(1e-6);
        let cx = 0.5 * (lo_x + hi_x);
        let cy = 0.5 * (lo_y + hi_y);
        let half = 0.5 * side * (1.0 + margin);
        Self {
            x0: cx - half,
            y0: cy - half,
            h: 2.0 * half / n as f64,
            nx: n,
            ny: n,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Center of cell (i, j), row-major with i the column.
    pub fn center(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(
            self.x0 + (i as f64 + 0.5) * self.h,
            self.y0 + (j as f64 + 0.5) * self.h,
        )
    }

    /// Cell containing `z`, or None outside the lattice.
    pub fn cell_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let fi = (z.re - self.x0) / self.h;
        let fj = (z.im - self.y0) / self.h;
        if fi < 0.0 || fj < 0.0 {
            return None;
        }
        let i = fi as usize;
        let j = fj as usize;
        if i < self.nx && j < self.ny {
            Some((i, j))
        } else {
            None
        }
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.h * self.nx as f64
    }

    pub fn y_max(&self) -> f64 {
        self.y0 + self.h * self.ny as f64
    }
}

/// Complex samples on a lattice, row-major.
#[derive(Clone, Debug)]
pub struct GridField {
    pub spec: GridSpec,
    pub values: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); spec.len()],
            spec,
        }
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(spec.len());
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                values.push(f(spec.center(i, j)));
            }
        }
        Self { spec, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.spec.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.values[j * self.spec.nx + i] = v;
    }

    /// Nearest-cell sample; zero outside the lattice.
    pub fn sample_nearest(&self, z: Complex64) -> Complex64 {
        match self.spec.cell_of(z) {
            Some((i, j)) => self.at(i, j),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Bilinear interpolation between cell centers; clamped at the boundary.
    pub fn sample_bilinear(&self, z: Complex64) -> Complex64 {
        let s = &self.spec;
        let fx = ((z.re - s.x0) / s.h - 0.5).clamp(0.0, (s.nx - 1) as f64);
        let fy = ((z.im - s.y0) / s.h - 0.5).clamp(0.0, (s.ny - 1) as f64);
        let i0 = (fx as usize).min(s.nx - 2);
        let j0 = (fy as usize).min(s.ny - 2);
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let v00 = self.at(i0, j0);
        let v10 = self.at(i0 + 1, j0);
        let v01 = self.at(i0, j0 + 1);
        let v11 = self.at(i0 + 1, j0 + 1);
        v00 * ((1.0 - tx) * (1.0 - ty))
            + v10 * (tx * (1.0 - ty))
            + v01 * ((1.0 - tx) * ty)
            + v11 * (tx * ty)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Smallest cell distance from any nonzero value to the lattice edge.
    pub fn support_margin_cells(&self) -> usize {
        let mut margin = usize::MAX;
        for j in 0..self.spec.ny {
            for i in 0..self.spec.nx {
                if self.at(i, j).norm() > 0.0 {
                    let m = i
                        .min(j)
                        .min(self.spec.nx - 1 - i)
                        .min(self.spec.ny - 1 - j);
                    margin = margin.min(m);
                }
            }
        }
        if margin == usize::MAX {
            self.spec.nx.min(self.spec.ny)
        } else {
            margin
        }
    }
}

/// Complex dilatation samples with sup-norm strictly below 1.
#[derive(Clone, Debug)]
pub struct BeltramiField {
    pub field: GridField,
    pub sup_norm: f64,
}

impl BeltramiField {
    pub fn new(field: GridField) -> Self {
        let sup_norm = field.sup_norm();
        Self { field, sup_norm }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.field.spec
    }

    pub fn scaled(&self, t: f64) -> Self {
        let mut field = self.field.clone();
        for v in field.values.iter_mut() {
            *v *= t;
        }
        Self::new(field)
    }
}

const GRID_HEADER_REALS: usize = 8;

/// Binary layout: width u64, height u64, eight f64 (x0, y0, x_max, y_max,
/// spacing, sup_norm, two reserved zeros), then row-major re/im pairs.
/// All fields little-endian.
pub fn write_grid<W: Write>(field: &GridField, sup_norm: f64, mut out: W) -> Result<()> {
    let s = &field.spec;
    out.write_all(&(s.nx as u64).to_le_bytes())?;
    out.write_all(&(s.ny as u64).to_le_bytes())?;
    let reals = [s.x0, s.y0, s.x_max(), s.y_max(), s.h, sup_norm, 0.0, 0.0];
    for r in reals {
        out.write_all(&r.to_le_bytes())?;
    }
    for v in &field.values {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_grid<R: Read>(mut input: R) -> Result<(GridField, f64)> {
    let mut u64buf = [0u8; 8];
    input.read_exact(&mut u64buf)?;
    let nx = u64::from_le_bytes(u64buf) as usize;
    input.read_exact(&mut u64buf)?;
    let ny = u64::from_le_bytes(u64buf) as usize;
    if nx == 0 || ny == 0 || nx.saturating_mul(ny) > (1 << 28) {
        return Err(Error::Config(format!("implausible grid dimensions {nx} x {ny}")));
    }
    let mut reals = [0.0f64; GRID_HEADER_REALS];
    for r in reals.iter_mut() {
        input.read_exact(&mut u64buf)?;
        *r = f64::from_le_bytes(u64buf);
    }
    let spec = GridSpec {
        x0: reals[0],
        y0: reals[1],
        h: reals[4],
        nx,
        ny,
    };
    let mut values = Vec::with_capacity(nx * ny);
    for _ in 0..nx * ny {
        input.read_exact(&mut u64buf)?;
        let re = f64::from_le_bytes(u64buf);
        input.read_exact(&mut u64buf)?;
        let im = f64::from_le_bytes(u64buf);
        values.push(Complex64::new(re, im));
    }
    Ok((GridField { spec, values }, reals[5]))
}

pub fn write_beltrami<W: Write>(mu: &BeltramiField, out: W) -> Result<()> {
    write_grid(&mu.field, mu.sup_norm, out)
}

pub fn read_beltrami<R: Read>(input: R) -> Result<BeltramiField> {
    let (field, sup_norm) = read_grid(input)?;
    Ok(BeltramiField { field, sup_norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_roundtrip() {
        let spec = GridSpec::square(-2.0, 2.0, 64);
        let (i, j) = (13, 40);
        let z = spec.center(i, j);
        assert_eq!(spec.cell_of(z), Some((i, j)));
        assert_eq!(spec.cell_of(Complex64::new(5.0, 0.0)), None);
    }

    #[test]
    fn bilinear_reproduces_linear_fields() {
        let spec = GridSpec::square(0.0, 1.0, 32);
        let f = GridField::from_fn(spec, |z| Complex64::new(2.0 * z.re - z.im, z.im));
        let z = Complex64::new(0.47, 0.62);
        let v = f.sample_bilinear(z);
        assert!((v - Complex64::new(2.0 * z.re - z.im, z.im)).norm() < 1e-12);
    }

    #[test]
    fn binary_roundtrip() {
        let spec = GridSpec::square(-1.0, 1.0, 8);
        let f = GridField::from_fn(spec, |z| z * Complex64::new(0.25, 0.5));
        let mut buf = Vec::new();
        write_grid(&f, 0.75, &mut buf).unwrap();
        let (g, sup) = read_grid(&buf[..]).unwrap();
        assert_eq!(g.spec, f.spec);
        assert_eq!(sup, 0.75);
        assert_eq!(g.values, f.values);
    }

    #[test]
    fn support_margin() {
        let spec = GridSpec::square(-1.0, 1.0, 16);
        let mut f = GridField::zeros(spec);
        f.set(8, 8, Complex64::new(1.0, 0.0));
        assert_eq!(f.support_margin_cells(), 7);
    }
}
