//! Measurable Riemann mapping on a lattice: the Beurling transform as a
//! frequency multiplier, a Neumann-series solve of the Beltrami equation,
//! and straightening of a quasiregular map into a rational one.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::Error;
use crate::grid::{BeltramiField, GridField, GridSpec};
use crate::poly::Polynomial;
use crate::rational::RationalMap;
use crate::surgery::QuasiregularMap;
use crate::Result;

fn fft2(values: &mut [Complex64], nx: usize, ny: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let row_fft = if inverse {
        planner.plan_fft_inverse(nx)
    } else {
        planner.plan_fft_forward(nx)
    };
    for row in values.chunks_mut(nx) {
        row_fft.process(row);
    }
    let mut transposed = vec![Complex64::new(0.0, 0.0); values.len()];
    for j in 0..ny {
        for i in 0..nx {
            transposed[i * ny + j] = values[j * nx + i];
        }
    }
    let col_fft = if inverse {
        planner.plan_fft_inverse(ny)
    } else {
        planner.plan_fft_forward(ny)
    };
    for col in transposed.chunks_mut(ny) {
        col_fft.process(col);
    }
    for j in 0..ny {
        for i in 0..nx {
            values[j * nx + i] = transposed[i * ny + j];
        }
    }
    if inverse {
        let scale = 1.0 / (nx * ny) as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }
}

fn angular_frequency(k: usize, n: usize, length: f64) -> f64 {
    let signed = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
    2.0 * std::f64::consts::PI * signed as f64 / length
}

fn apply_multiplier(field: &GridField, mut multiplier: impl FnMut(Complex64) -> Complex64) -> GridField {
    let spec = field.spec;
    let mut values = field.values.clone();
    fft2(&mut values, spec.nx, spec.ny, false);
    let lx = spec.h * spec.nx as f64;
    let ly = spec.h * spec.ny as f64;
    for ky in 0..spec.ny {
        let xi_y = angular_frequency(ky, spec.ny, ly);
        for kx in 0..spec.nx {
            let xi_x = angular_frequency(kx, spec.nx, lx);
            let xi = Complex64::new(xi_x, xi_y);
            values[ky * spec.nx + kx] *= multiplier(xi);
        }
    }
    fft2(&mut values, spec.nx, spec.ny, true);
    GridField { spec, values }
}

fn require_interior_support(field: &GridField) -> Result<()> {
    let margin = field.support_margin_cells();
    if margin < 2 {
        return Err(Error::WraparoundContamination);
    }
    Ok(())
}

/// Two-dimensional principal-value convolution with the kernel -1/(pi z^2),
/// realized as the frequency multiplier conj(xi)/xi.
pub fn beurling_transform(field: &GridField) -> Result<GridField> {
    require_interior_support(field)?;
    Ok(apply_multiplier(field, |xi| {
        if xi.norm_sqr() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            xi.conj() / xi
        }
    }))
}

/// Solid Cauchy transform (the d-bar inverse), zero-mean convention.
pub fn cauchy_transform(field: &GridField) -> Result<GridField> {
    require_interior_support(field)?;
    let half_i = Complex64::new(0.0, 0.5);
    Ok(apply_multiplier(field, |xi| {
        if xi.norm_sqr() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0) / (half_i * xi)
        }
    }))
}

/// Grid-sampled normalized solution of the Beltrami equation, fixing 0, 1
/// and infinity.
#[derive(Clone, Debug)]
pub struct NormalizedQcMap {
    /// raw displacement f(z) - z before normalization
    pub displacement: GridField,
    f0: Complex64,
    scale: Complex64,
    /// area moments of d-bar f for the far-field expansion
    moment0: Complex64,
    moment1: Complex64,
    center: Complex64,
    /// sup |d-bar f - mu d f| over smooth cells, finite differences
    pub residual: f64,
    pub iterations: usize,
}

impl NormalizedQcMap {
    /// Evaluates the normalized map. Inside the lattice core the stored
    /// displacement is interpolated; far out the Cauchy tail is used.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let s = &self.displacement.spec;
        let pad = 6.0 * s.h;
        let inside = z.re > s.x0 + pad
            && z.re < s.x_max() - pad
            && z.im > s.y0 + pad
            && z.im < s.y_max() - pad;
        let raw = if inside {
            z + self.displacement.sample_bilinear(z)
        } else {
            let d = z - self.center;
            z + (self.moment0 / d + self.moment1 / (d * d)) / std::f64::consts::PI
        };
        (raw - self.f0) / self.scale
    }

    pub fn displacement_sup(&self) -> f64 {
        self.displacement.sup_norm()
    }
}

/// Neumann-series solve of d-bar f = mu d f for the normalized solution.
///
/// Iterates g <- mu (1 + S g) to the fixed point, sets f = z + C g, then
/// normalizes affinely so f(0) = 0 and f(1) = 1.
pub fn solve_mrmt(mu: &BeltramiField, max_iter: usize, tol: f64) -> Result<NormalizedQcMap> {
    if mu.sup_norm > 0.95 {
        return Err(Error::MrmtNonConvergence {
            max_iter: 0,
            increment: mu.sup_norm,
        });
    }
    require_interior_support(&mu.field)?;
    let spec = mu.field.spec;

    let mut g = GridField::zeros(spec);
    let mut iterations = 0usize;
    let mut increment = f64::INFINITY;
    for it in 0..max_iter {
        iterations = it + 1;
        let s_g = apply_multiplier(&g, |xi| {
            if xi.norm_sqr() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                xi.conj() / xi
            }
        });
        let mut next = GridField::zeros(spec);
        let mut delta = 0.0f64;
        for idx in 0..spec.len() {
            let m = mu.field.values[idx];
            let v = if m.norm_sqr() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                m * (Complex64::new(1.0, 0.0) + s_g.values[idx])
            };
            delta = delta.max((v - g.values[idx]).norm());
            next.values[idx] = v;
        }
        g = next;
        increment = delta;
        if delta < tol {
            break;
        }
    }
    if increment >= tol.max(1e-6) {
        return Err(Error::MrmtNonConvergence {
            max_iter,
            increment,
        });
    }

    let displacement = cauchy_transform(&g)?;

    // far-field moments of g
    let cell_area = spec.h * spec.h;
    let center = Complex64::new(
        0.5 * (spec.x0 + spec.x_max()),
        0.5 * (spec.y0 + spec.y_max()),
    );
    let mut moment0 = Complex64::new(0.0, 0.0);
    let mut moment1 = Complex64::new(0.0, 0.0);
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let v = g.at(i, j);
            if v.norm_sqr() > 0.0 {
                let w = spec.center(i, j);
                moment0 += v * cell_area;
                moment1 += v * (w - center) * cell_area;
            }
        }
    }

    let mut map = NormalizedQcMap {
        displacement,
        f0: Complex64::new(0.0, 0.0),
        scale: Complex64::new(1.0, 0.0),
        moment0,
        moment1,
        center,
        residual: 0.0,
        iterations,
    };
    let f0 = map.eval(Complex64::new(0.0, 0.0));
    let f1 = map.eval(Complex64::new(1.0, 0.0));
    let scale = f1 - f0;
    if scale.norm() < 1e-9 {
        return Err(Error::MrmtNonConvergence {
            max_iter,
            increment: scale.norm(),
        });
    }
    map.f0 = f0;
    map.scale = scale;

    map.residual = beltrami_residual(&map, mu);
    Ok(map)
}

/// sup |d-bar f - mu d f| via central differences, skipping cells where mu
/// jumps (support edges) and the outer lattice band.
fn beltrami_residual(map: &NormalizedQcMap, mu: &BeltramiField) -> f64 {
    let spec = map.displacement.spec;
    let f_at = |i: usize, j: usize| {
        let z = spec.center(i, j);
        (z + map.displacement.at(i, j) - map.f0) / map.scale
    };
    let jump_tol = 0.25 * (mu.sup_norm + 1e-12);
    let mut worst = 0.0f64;
    for j in 4..spec.ny - 4 {
        for i in 4..spec.nx - 4 {
            // smooth cells only: the dilatation must be near-constant over
            // the 5x5 neighborhood (support edges and phase singularities
            // put curvature spikes in f that pollute finite differences)
            let center = mu.field.at(i, j);
            let mut mixed = false;
            for dj in -2i64..=2 {
                for di in -2i64..=2 {
                    let nb = mu
                        .field
                        .at((i as i64 + di) as usize, (j as i64 + dj) as usize);
                    if (nb - center).norm() > jump_tol {
                        mixed = true;
                    }
                }
            }
            if mixed {
                continue;
            }
            let fx = (f_at(i + 1, j) - f_at(i - 1, j)) / (2.0 * spec.h);
            let fy = (f_at(i, j + 1) - f_at(i, j - 1)) / (2.0 * spec.h);
            let fz = (fx - Complex64::i() * fy) * 0.5;
            let fzbar = (fx + Complex64::i() * fy) * 0.5;
            worst = worst.max((fzbar - mu.field.at(i, j) * fz).norm());
        }
    }
    worst
}

/// One-byte kind tag distinguishing grid files; the payload shares the
/// Beltrami grid layout.
pub const GRID_KIND_QCMAP: u8 = 1;

pub fn write_qcmap<W: std::io::Write>(map: &NormalizedQcMap, mut out: W) -> Result<()> {
    out.write_all(&[GRID_KIND_QCMAP])?;
    crate::grid::write_grid(&map.displacement, map.residual, out)
}

pub fn read_qcmap<R: std::io::Read>(mut input: R) -> Result<(GridField, f64)> {
    let mut tag = [0u8; 1];
    input.read_exact(&mut tag)?;
    if tag[0] != GRID_KIND_QCMAP {
        return Err(Error::Config(format!("unexpected grid kind tag {}", tag[0])));
    }
    crate::grid::read_grid(input)
}

/// Rational map fitted to the straightened dynamics.
#[derive(Clone, Debug)]
pub struct RationalFit {
    pub fitted: RationalMap,
    pub residual: f64,
    pub degree: usize,
}

const STRAIGHTEN_RESIDUAL_LIMIT: f64 = 0.05;

/// Straightens P by the normalized solution for sigma and fits a rational
/// map of the given degree to the conjugated dynamics.
///
/// Samples z_k on an annulus clear of the dilatation support, forms
/// u = f(z), v = f(P(z)), and solves the cross-multiplied least squares
/// N(u) - v D(u) = 0 for the coefficients by a singular-vector solve.
pub fn straighten(
    qr: &QuasiregularMap,
    sigma: &BeltramiField,
    fit_degree: usize,
) -> Result<RationalFit> {
    let f = solve_mrmt(sigma, 200, 1e-8)?;
    straighten_with(qr, sigma, fit_degree, &f)
}

pub fn straighten_with(
    qr: &QuasiregularMap,
    sigma: &BeltramiField,
    fit_degree: usize,
    f: &NormalizedQcMap,
) -> Result<RationalFit> {
    let samples = sample_ring(sigma.spec(), qr, 12 * (2 * fit_degree + 2));
    let pairs: Vec<(Complex64, Complex64)> = samples
        .iter()
        .map(|&z| (f.eval(z), f.eval(qr.eval(z))))
        .collect();

    let (num, den) = fit_rational(&pairs, fit_degree)?;
    let fitted = RationalMap::new(num, den)?;
    let fitted = if fitted.degree() < 2 {
        return Err(Error::StraighteningFailure {
            residual: f64::INFINITY,
            limit: STRAIGHTEN_RESIDUAL_LIMIT,
        });
    } else {
        fitted
    };

    // residual on held-out points
    let test = sample_ring(sigma.spec(), qr, 97);
    let mut residual = 0.0f64;
    for &z in &test {
        let u = f.eval(z);
        let v = f.eval(qr.eval(z));
        let fv = fitted.evaluate(u);
        if fv.re.is_finite() && fv.im.is_finite() {
            residual = residual.max((fv - v).norm());
        }
    }
    if residual > STRAIGHTEN_RESIDUAL_LIMIT {
        return Err(Error::StraighteningFailure {
            residual,
            limit: STRAIGHTEN_RESIDUAL_LIMIT,
        });
    }
    let degree = fitted.degree();
    Ok(RationalFit {
        fitted,
        residual,
        degree,
    })
}

/// Sample ring in the lattice's good region, avoiding the surgery disk.
fn sample_ring(spec: &GridSpec, qr: &QuasiregularMap, count: usize) -> Vec<Complex64> {
    let center = Complex64::new(
        0.5 * (spec.x0 + spec.x_max()),
        0.5 * (spec.y0 + spec.y_max()),
    );
    let half = 0.5 * (spec.x_max() - spec.x0);
    let r_lo = 0.45 * half;
    let r_hi = 0.62 * half;
    let mut out = Vec::with_capacity(count);
    let mut k = 0usize;
    while out.len() < count {
        let t = k as f64;
        let r = r_lo + (r_hi - r_lo) * (0.5 + 0.5 * (t * 0.7123).sin());
        let theta = t * 2.399963; // golden-angle sweep
        let z = center + Complex64::from_polar(r, theta);
        k += 1;
        if qr.surgery.config.in_disk(z) || qr.surgery.config.in_disk(qr.base.evaluate(z)) {
            continue;
        }
        out.push(z);
        if k > 100 * count {
            break;
        }
    }
    out
}

/// Least-squares rational fit from (u, v) samples.
///
/// Denominator degrees are swept from 0 upward and the simplest model whose
/// sample residual comes close to the best achievable wins: a rank-deficient
/// full system signals a degree drop (a polynomial conjugate must come back
/// as a polynomial, without spurious far poles).
fn fit_rational(
    pairs: &[(Complex64, Complex64)],
    degree: usize,
) -> Result<(Polynomial, Polynomial)> {
    let mut attempts = Vec::new();
    for den_degree in 0..=degree {
        if let Some(fit) = fit_rational_fixed(pairs, degree, den_degree) {
            let residual = sample_residual(&fit, pairs);
            attempts.push((den_degree, fit, residual));
        }
    }
    if attempts.is_empty() {
        return Err(Error::Config("rational fit produced no solvable system".into()));
    }
    let best = attempts
        .iter()
        .map(|(_, _, r)| *r)
        .fold(f64::INFINITY, f64::min);
    let chosen = attempts
        .into_iter()
        .find(|(_, _, r)| *r <= (1.25 * best).max(1e-12))
        .expect("the minimizer always qualifies");
    Ok(chosen.1)
}

fn sample_residual(fit: &(Polynomial, Polynomial), pairs: &[(Complex64, Complex64)]) -> f64 {
    let mut worst = 0.0f64;
    for &(u, v) in pairs {
        let den = fit.1.eval(u);
        if den.norm() < 1e-30 {
            return f64::INFINITY;
        }
        worst = worst.max((fit.0.eval(u) / den - v).norm());
    }
    worst
}

/// Cross-multiplied solve at fixed numerator/denominator degrees via the
/// smallest singular vector, in a real embedding.
fn fit_rational_fixed(
    pairs: &[(Complex64, Complex64)],
    num_degree: usize,
    den_degree: usize,
) -> Option<(Polynomial, Polynomial)> {
    let cols_c = num_degree + 1 + den_degree + 1;
    let rows = pairs.len();
    if 2 * rows < 2 * cols_c {
        return None;
    }
    let mut m = DMatrix::<f64>::zeros(2 * rows, 2 * cols_c);
    for (r, &(u, v)) in pairs.iter().enumerate() {
        let mut row_entries = Vec::with_capacity(cols_c);
        let mut up = Complex64::new(1.0, 0.0);
        for _ in 0..=num_degree {
            row_entries.push(up);
            up *= u;
        }
        let mut up = Complex64::new(1.0, 0.0);
        for _ in 0..=den_degree {
            row_entries.push(-v * up);
            up *= u;
        }
        for (c, val) in row_entries.iter().enumerate() {
            // complex multiply as 2x2 real block
            m[(2 * r, 2 * c)] = val.re;
            m[(2 * r, 2 * c + 1)] = -val.im;
            m[(2 * r + 1, 2 * c)] = val.im;
            m[(2 * r + 1, 2 * c + 1)] = val.re;
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.as_ref()?;
    let mut min_idx = 0;
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < svd.singular_values[min_idx] {
            min_idx = i;
        }
    }
    let row = v_t.row(min_idx);
    let mut coeffs = Vec::with_capacity(cols_c);
    for c in 0..cols_c {
        coeffs.push(Complex64::new(row[2 * c], -row[2 * c + 1]));
    }
    let num_raw = &coeffs[..num_degree + 1];
    let den_raw = &coeffs[num_degree + 1..];
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let trim = |cs: &[Complex64]| -> Vec<Complex64> {
        let mut v: Vec<Complex64> = cs.to_vec();
        while v.len() > 1 && v.last().unwrap().norm() < 1e-9 * scale {
            v.pop();
        }
        v
    };
    let num = Polynomial::new(trim(num_raw)).ok()?;
    let den = Polynomial::new(trim(den_raw)).ok()?;
    // normalize the denominator to monic form
    let lead = den.leading();
    Some((
        num.scale(Complex64::new(1.0, 0.0) / lead),
        den.scale(Complex64::new(1.0, 0.0) / lead),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::JordanCurve;
    use crate::surgery::{build_blend, build_quasiregular, SurgeryConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk_indicator(spec: GridSpec) -> GridField {
        // anti-aliased indicator: cell-averaged membership, so the boundary
        // dipole layer of the sampled field stays below the oracle tolerance
        let h = spec.h;
        GridField::from_fn(spec, |z| {
            let mut hits = 0;
            for a in 0..4 {
                for b in 0..4 {
                    let sub = z
                        + Complex64::new(
                            ((a as f64 + 0.5) / 4.0 - 0.5) * h,
                            ((b as f64 + 0.5) / 4.0 - 0.5) * h,
                        );
                    if sub.norm() < 1.0 {
                        hits += 1;
                    }
                }
            }
            Complex64::new(hits as f64 / 16.0, 0.0)
        })
    }

    #[test]
    fn beurling_of_zero_is_zero() {
        let spec = GridSpec::square(-2.0, 2.0, 64);
        let out = beurling_transform(&GridField::zeros(spec)).unwrap();
        assert!(out.sup_norm() < 1e-14);
    }

    #[test]
    fn beurling_of_disk_indicator_matches_closed_form() {
        // S(chi_disk) = 0 inside, -1/z^2 outside (from differentiating the
        // Cauchy transform of the indicator)
        let spec = GridSpec::square(-4.0, 4.0, 512);
        let out = beurling_transform(&disk_indicator(spec)).unwrap();
        let mut worst_in = 0.0f64;
        let mut worst_out = 0.0f64;
        for j in (0..spec.ny).step_by(5) {
            for i in (0..spec.nx).step_by(5) {
                let z = spec.center(i, j);
                let r = z.norm();
                let v = out.at(i, j);
                if r < 0.7 {
                    worst_in = worst_in.max(v.norm());
                } else if r > 1.3 && r < 1.9 {
                    let exact = -Complex64::new(1.0, 0.0) / (z * z);
                    worst_out = worst_out.max((v - exact).norm());
                }
            }
        }
        assert!(worst_in < 1e-2, "interior error {worst_in}");
        assert!(worst_out < 1e-2, "exterior error {worst_out}");
    }

    #[test]
    fn beurling_preserves_l2_norm() {
        let spec = GridSpec::square(-2.0, 2.0, 128);
        // random-ish compactly supported zero-mean field
        let field = GridField::from_fn(spec, |z| {
            if z.norm() < 0.8 {
                Complex64::new((7.0 * z.re).sin() * (5.0 * z.im).cos(), (3.0 * z.re * z.im).sin())
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let out = beurling_transform(&field).unwrap();
        let l2 = |f: &GridField| f.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let (a, b) = (l2(&field), l2(&out));
        // the DC mode is dropped by the multiplier; everything else is unitary
        let mean = field.values.iter().sum::<Complex64>() / field.values.len() as f64;
        let dc_l2 = mean.norm() * (field.values.len() as f64).sqrt();
        assert!(
            (a * a - b * b - dc_l2 * dc_l2).abs() / (a * a) < 1e-3,
            "L2 {a} -> {b} (dc {dc_l2})"
        );
    }

    #[test]
    fn support_touching_boundary_rejected() {
        let spec = GridSpec::square(-1.0, 1.0, 64);
        let field = GridField::from_fn(spec, |_| Complex64::new(1.0, 0.0));
        match beurling_transform(&field) {
            Err(Error::WraparoundContamination) => {}
            other => panic!("expected WraparoundContamination, got {:?}", other.map(|f| f.sup_norm()))
        }
    }

    #[test]
    fn mrmt_zero_field_gives_identity() {
        let spec = GridSpec::square(-2.0, 2.0, 128);
        let mu = BeltramiField::new(GridField::zeros(spec));
        let f = solve_mrmt(&mu, 50, 1e-10).unwrap();
        assert!(f.residual < 1e-10);
        for &z in &[c(0.3, 0.4), c(-1.2, 0.7), c(1.5, -1.5)] {
            assert!((f.eval(z) - z).norm() < 1e-10);
        }
    }

    fn radial_stretch_mu(spec: GridSpec, strength: f64) -> BeltramiField {
        BeltramiField::new(GridField::from_fn(spec, |z| {
            if z.norm() < 1.0 && z.norm() > 0.0 {
                strength * z / z.conj()
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    #[test]
    fn mrmt_radial_stretch_oracle_coarse() {
        // mu = (1/3) z / conj(z) on the disk: f(z) = z |z| inside, fixing 0, 1
        let spec = GridSpec::square(-4.0, 4.0, 256);
        let mu = radial_stretch_mu(spec, 1.0 / 3.0);
        let f = solve_mrmt(&mu, 100, 1e-9).unwrap();
        assert!((f.eval(c(0.25, 0.0)) - c(0.0625, 0.0)).norm() < 1e-2);
        let mut worst = 0.0f64;
        for k in 0..400 {
            let theta = k as f64 * 0.157;
            let r = 0.05 + 0.85 * ((k as f64 * 0.01618) % 1.0);
            let z = Complex64::from_polar(r, theta);
            let expect = z * z.norm();
            worst = worst.max((f.eval(z) - expect).norm());
        }
        assert!(worst < 2e-2, "radial stretch sup error {worst}");
    }

    #[test]
    fn mrmt_normalization_is_exact() {
        let spec = GridSpec::square(-4.0, 4.0, 128);
        let mu = radial_stretch_mu(spec, 0.3);
        let f = solve_mrmt(&mu, 100, 1e-9).unwrap();
        assert!(f.eval(c(0.0, 0.0)).norm() < 1e-12);
        assert!((f.eval(c(1.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mrmt_output_dilatation_recovers_mu() {
        let spec = GridSpec::square(-4.0, 4.0, 256);
        let mu = radial_stretch_mu(spec, 1.0 / 3.0);
        let f = solve_mrmt(&mu, 100, 1e-9).unwrap();
        let h = spec.h;
        let mut worst = 0.0f64;
        for k in 0..200 {
            let theta = k as f64 * 0.31;
            let r = 0.2 + 0.6 * ((k as f64 * 0.017) % 1.0);
            // snap to a cell center so bilinear kinks do not enter the stencil
            let raw = Complex64::from_polar(r, theta);
            let (ci, cj) = spec.cell_of(raw).unwrap();
            let z = spec.center(ci, cj);
            if z.norm() < 0.15 || z.norm() > 0.85 {
                continue;
            }
            let fx = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
            let fy = (f.eval(z + Complex64::new(0.0, h)) - f.eval(z - Complex64::new(0.0, h)))
                / (2.0 * h);
            let fz = (fx - Complex64::i() * fy) * 0.5;
            let fzbar = (fx + Complex64::i() * fy) * 0.5;
            worst = worst.max((fzbar / fz - mu.field.sample_nearest(z)).norm());
        }
        assert!(worst < 3e-2, "recovered dilatation error {worst}");
    }

    #[test]
    fn mrmt_scaling_trend() {
        let spec = GridSpec::square(-4.0, 4.0, 128);
        let mut last_residual = f64::INFINITY;
        let mut last_disp = f64::INFINITY;
        for t in [1.0, 0.5, 0.25] {
            let mu = radial_stretch_mu(spec, t / 3.0);
            let f = solve_mrmt(&mu, 120, 1e-10).unwrap();
            assert!(f.residual <= last_residual * 1.05);
            let disp = f.displacement_sup();
            assert!(disp < last_disp);
            last_residual = f.residual;
            last_disp = disp;
        }
    }

    #[test]
    fn qcmap_file_roundtrip() {
        let spec = GridSpec::square(-2.0, 2.0, 64);
        let mu = radial_stretch_mu(spec, 0.2);
        let f = solve_mrmt(&mu, 80, 1e-9).unwrap();
        let mut buf = Vec::new();
        write_qcmap(&f, &mut buf).unwrap();
        let (grid, residual) = read_qcmap(&buf[..]).unwrap();
        assert_eq!(grid.spec, f.displacement.spec);
        assert_eq!(residual, f.residual);
    }

    fn trivial_quasiregular() -> QuasiregularMap {
        // z^2 + 4 (Cantor Julia dust) with a surgery disk around the
        // repelling fixed point x* = (1 + i sqrt(15))/2
        let map = RationalMap::polynomial_from_real(&[4.0, 0.0, 1.0]).unwrap();
        let p = 0.5;
        let a = (1.0 + 3.0 * p) / 4.0;
        let fixed = c(0.5, 15.0f64.sqrt() / 2.0);
        let curve = JordanCurve::circle(fixed, 0.45, 96);
        let radius = 0.25;
        let outward = fixed / fixed.norm();
        let target = fixed + radius * a * outward;
        let config = SurgeryConfig::new(curve, fixed, fixed, radius, p, target).unwrap();
        let blend = build_blend(p, 128).unwrap();
        build_quasiregular(&map, blend, config).unwrap()
    }

    #[test]
    fn straighten_recovers_base_map_for_zero_sigma() {
        let qr = trivial_quasiregular();
        // zero sigma and the base map in place of P: conjugation by identity
        let spec = GridSpec::square(-4.0, 4.0, 128);
        let sigma = BeltramiField::new(GridField::zeros(spec));
        // bypass the surgery by a P that is exactly R: build from the base
        let base_only = QuasiregularMap {
            base: qr.base.clone(),
            surgery: crate::surgery::SurgeryMap {
                blend: qr.surgery.blend.clone(),
                config: {
                    // park the disk far away so the surgery never acts on samples
                    let curve = JordanCurve::circle(c(50.0, 50.0), 2.0, 96);
                    let p = 0.5;
                    let a = (1.0 + 3.0 * p) / 4.0;
                    SurgeryConfig::new(
                        curve,
                        c(50.0, 50.0),
                        c(50.0, 50.0),
                        0.5,
                        p,
                        c(50.0, 50.0) + 0.5 * a * Complex64::i(),
                    )
                    .unwrap()
                },
            },
        };
        let fit = straighten(&base_only, &sigma, 2).unwrap();
        assert!(fit.residual < 1e-8, "residual {}", fit.residual);
        assert_eq!(fit.degree, 2);
        // coefficients match z^2 + 4 after monic normalization
        let num = fit.fitted.numerator();
        let den = fit.fitted.denominator();
        let scale = num.leading() / den.coeffs()[0];
        assert!((scale - c(1.0, 0.0)).norm() < 1e-8);
        assert!((num.coeffs()[0] / num.leading() - c(4.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn fitted_map_conjugacy_identity() {
        let qr = trivial_quasiregular();
        let spec = GridSpec::square(-4.0, 4.0, 256);
        let sigma = crate::surgery::invariant_beltrami(&qr, 64, spec).unwrap();
        let f = solve_mrmt(&sigma, 200, 1e-8).unwrap();
        let fit = straighten_with(&qr, &sigma, 2, &f).unwrap();
        let mut worst = 0.0f64;
        for k in 0..100 {
            let theta = k as f64 * 0.618;
            let r = 1.0 + 1.2 * ((k as f64 * 0.0317) % 1.0);
            let z = Complex64::from_polar(r, theta);
            if qr.surgery.config.in_disk(z) || qr.surgery.config.in_disk(qr.base.evaluate(z)) {
                continue;
            }
            let lhs = f.eval(qr.eval(z));
            let rhs = fit.fitted.evaluate(f.eval(z));
            worst = worst.max((lhs - rhs).norm());
        }
        assert!(
            worst <= (2.0 * fit.residual).max(1e-6),
            "conjugacy error {worst} vs residual {}",
            fit.residual
        );
    }

    #[test]
    fn fitted_critical_count_obeys_degree_convention() {
        let qr = trivial_quasiregular();
        let spec = GridSpec::square(-4.0, 4.0, 256);
        let sigma = crate::surgery::invariant_beltrami(&qr, 64, spec).unwrap();
        let fit = straighten(&qr, &sigma, 2).unwrap();
        let crit = fit.fitted.critical_points().unwrap();
        assert_eq!(
            crit.finite_multiplicity() + crit.infinity_multiplicity(),
            2 * fit.fitted.degree() - 2
        );
    }
}
