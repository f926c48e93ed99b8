//! Rational maps, orbits, critical points, preimages, and the escape census.

use num_complex::Complex64;

use crate::error::Error;
use crate::poly::Polynomial;
use crate::roots;
use crate::Result;

/// Finite-part sentinel for values at a pole.
pub const POINT_AT_INFINITY: Complex64 = Complex64::new(f64::INFINITY, f64::INFINITY);

pub fn is_point_at_infinity(z: Complex64) -> bool {
    !z.re.is_finite() || !z.im.is_finite()
}

/// Default radius beyond which an orbit counts as escaping.
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e4;
/// Default orbit truncation horizon.
pub const DEFAULT_HORIZON: usize = 1000;

/// A degree-d rational map given as numerator/denominator in reduced form.
#[derive(Clone, Debug)]
pub struct RationalMap {
    numerator: Polynomial,
    denominator: Polynomial,
    degree: usize,
}

/// Finite critical points with multiplicities.
///
/// The point at infinity is not listed; for a map of degree d the finite
/// multiplicities plus the deficit at infinity total 2d - 2.
#[derive(Clone, Debug)]
pub struct CriticalSet {
    pub points: Vec<(Complex64, usize)>,
    map_degree: usize,
}

impl CriticalSet {
    pub fn finite_multiplicity(&self) -> usize {
        self.points.iter().map(|&(_, m)| m).sum()
    }

    /// Multiplicity attributed to the point at infinity by the 2d - 2 convention.
    pub fn infinity_multiplicity(&self) -> usize {
        (2 * self.map_degree - 2).saturating_sub(self.finite_multiplicity())
    }
}

/// A forward orbit, truncated at escape or at the horizon.
#[derive(Clone, Debug)]
pub struct OrbitRecord {
    pub samples: Vec<Complex64>,
    pub escaped: bool,
    pub escape_index: Option<usize>,
}

/// Per-critical-point escape verdicts and the count s.
#[derive(Clone, Debug)]
pub struct EscapeCensus {
    pub verdicts: Vec<(Complex64, bool)>,
    pub count: usize,
}

impl RationalMap {
    /// Builds a rational map, checking reduction and the degree floor.
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Result<Self> {
        let degree = numerator.degree().max(denominator.degree());
        if degree < 2 {
            return Err(Error::DegreeTooLow { degree, min: 2 });
        }
        // Common-root check: a denominator root where the numerator nearly
        // vanishes too signals a non-reduced representation.
        if denominator.degree() >= 1 {
            let num_scale: f64 = numerator.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
            for root in roots::all_roots(&denominator)? {
                let nv = numerator.eval(root);
                if nv.norm() < 1e-9 * num_scale * (1.0 + root.norm()).powi(numerator.degree() as i32) {
                    return Err(Error::NonReduced { root });
                }
            }
        }
        Ok(Self {
            numerator,
            denominator,
            degree,
        })
    }

    /// Polynomial map p(z) (denominator 1).
    pub fn from_polynomial(p: Polynomial) -> Result<Self> {
        Self::new(p, Polynomial::one())
    }

    /// Polynomial map from real ascending coefficients.
    pub fn polynomial_from_real(coeffs: &[f64]) -> Result<Self> {
        Self::from_polynomial(Polynomial::from_real(coeffs)?)
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.denominator
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_polynomial(&self) -> bool {
        self.denominator.is_constant()
    }

    /// Evaluates the map. Poles return the infinity sentinel; an exact 0/0
    /// returns NaN, which construction precludes for reduced maps.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let nv = self.numerator.eval(z);
        let dv = self.denominator.eval(z);
        if dv.norm() == 0.0 {
            if nv.norm() == 0.0 {
                return Complex64::new(f64::NAN, f64::NAN);
            }
            return POINT_AT_INFINITY;
        }
        nv / dv
    }

    /// Derivative (n'd - nd') / d^2 at a point.
    pub fn derivative_at(&self, z: Complex64) -> Complex64 {
        let n = self.numerator.eval(z);
        let d = self.denominator.eval(z);
        let np = self.numerator.derivative().eval(z);
        let dp = self.denominator.derivative().eval(z);
        (np * d - n * dp) / (d * d)
    }

    /// Finite critical points with multiplicities.
    pub fn critical_points(&self) -> Result<CriticalSet> {
        let wronskian = self
            .numerator
            .derivative()
            .mul(&self.denominator)
            .sub(&self.numerator.mul(&self.denominator.derivative()));
        let points = if wronskian.degree() == 0 {
            Vec::new()
        } else {
            roots::clustered_roots(&wronskian)?
        };
        Ok(CriticalSet {
            points,
            map_degree: self.degree,
        })
    }

    /// Forward orbit from `z0`, truncated at escape or after `horizon` steps.
    pub fn iterate_orbit(&self, z0: Complex64, horizon: usize, escape_radius: f64) -> OrbitRecord {
        let mut samples = Vec::with_capacity(horizon.min(4096) + 1);
        samples.push(z0);
        let mut z = z0;
        if z.norm() > escape_radius {
            return OrbitRecord {
                samples,
                escaped: true,
                escape_index: Some(0),
            };
        }
        for i in 1..=horizon {
            z = self.evaluate(z);
            samples.push(z);
            // Overflow counts as escape at this index.
            if !z.re.is_finite() || !z.im.is_finite() || z.norm() > escape_radius {
                return OrbitRecord {
                    samples,
                    escaped: true,
                    escape_index: Some(i),
                };
            }
        }
        OrbitRecord {
            samples,
            escaped: false,
            escape_index: None,
        }
    }

    /// Number of finite critical points whose orbit escapes within the horizon.
    pub fn escape_census(&self, horizon: usize, escape_radius: f64) -> Result<EscapeCensus> {
        let crit = self.critical_points()?;
        let mut verdicts = Vec::new();
        let mut count = 0;
        for &(c, _) in &crit.points {
            let escaped = self.iterate_orbit(c, horizon, escape_radius).escaped;
            if escaped {
                count += 1;
            }
            verdicts.push((c, escaped));
        }
        Ok(EscapeCensus { verdicts, count })
    }

    /// All finite preimages of `w`, with multiplicity, as roots of n - w*d.
    pub fn preimages(&self, w: Complex64) -> Result<Vec<Complex64>> {
        let shifted = self.numerator.sub(&self.denominator.scale(w));
        if shifted.degree() == 0 {
            return Ok(Vec::new());
        }
        let clusters = roots::clustered_roots(&shifted)?;
        let mut out = Vec::new();
        for (z, m) in clusters {
            for _ in 0..m {
                out.push(z);
            }
        }
        Ok(out)
    }

    /// Distinct finite preimages of `w` (multiplicities collapsed).
    pub fn distinct_preimages(&self, w: Complex64) -> Result<Vec<Complex64>> {
        let shifted = self.numerator.sub(&self.denominator.scale(w));
        if shifted.degree() == 0 {
            return Ok(Vec::new());
        }
        Ok(roots::clustered_roots(&shifted)?
            .into_iter()
            .map(|(z, _)| z)
            .collect())
    }

    /// Finite fixed points with their multipliers.
    pub fn fixed_points(&self) -> Result<Vec<(Complex64, Complex64)>> {
        // Roots of n(z) - z d(z).
        let mut dz = vec![Complex64::new(0.0, 0.0)];
        dz.extend_from_slice(self.denominator.coeffs());
        let zd = Polynomial::new(dz)?;
        let eq = self.numerator.sub(&zd);
        if eq.degree() == 0 {
            return Ok(Vec::new());
        }
        let pts = roots::clustered_roots(&eq)?;
        Ok(pts
            .into_iter()
            .map(|(z, _)| (z, self.derivative_at(z)))
            .collect())
    }

    /// Forward critical-orbit samples.
    ///
    /// `pc_points` collects the first `depth` forward images of every finite
    /// critical point; `p_points` keeps only points from critical orbits
    /// that stay bounded within `horizon` (the Julia-membership proxy).
    pub fn postcritical_sample(
        &self,
        depth: usize,
        horizon: usize,
        escape_radius: f64,
    ) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let crit = self.critical_points()?;
        let mut pc = Vec::new();
        let mut p = Vec::new();
        for &(c, _) in &crit.points {
            let orbit = self.iterate_orbit(c, horizon.max(depth), escape_radius);
            let bounded = !orbit.escaped;
            for i in 1..=depth.min(orbit.samples.len() - 1) {
                let z = orbit.samples[i];
                if is_point_at_infinity(z) {
                    break;
                }
                push_dedup(&mut pc, z);
                if bounded {
                    push_dedup(&mut p, z);
                }
            }
        }
        Ok((pc, p))
    }

    /// Radius beyond which orbits of this polynomial provably grow.
    pub fn escape_bound(&self) -> Result<f64> {
        if !self.is_polynomial() {
            return Err(Error::NotPolynomial);
        }
        let mut r = self.numerator.root_bound().max(2.0);
        for _ in 0..200 {
            let grows = (0..64).all(|k| {
                let z = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / 64.0);
                self.evaluate(z).norm() >= 2.0 * r
            });
            if grows {
                return Ok(r);
            }
            r *= 1.25;
        }
        Ok(r)
    }

    /// Green's function of the basin of infinity, G(z) = lim log|R^n z| / d^n.
    ///
    /// Returns 0 when the orbit stays bounded within the horizon. Once the
    /// orbit is far out the remaining tail is summed analytically, so values
    /// are accurate well past the tolerances used by the census machinery.
    pub fn green_value(&self, z: Complex64, horizon: usize) -> f64 {
        debug_assert!(self.is_polynomial());
        let d = self.degree as f64;
        let lead = (self.numerator.leading().norm()).max(1e-300);
        let mut w = z;
        let mut scale = 1.0; // 1/d^n
        for _ in 0..horizon {
            let r = w.norm();
            if !r.is_finite() {
                return f64::INFINITY;
            }
            if r > 1e12 {
                // |R(w)| = |a_d| |w|^d (1 + O(1/w)); sum the geometric tail.
                return scale * (r.ln() + lead.ln() / (d - 1.0));
            }
            w = self.evaluate(w);
            scale /= d;
        }
        0.0
    }
}

fn push_dedup(list: &mut Vec<Complex64>, z: Complex64) {
    const TOL: f64 = 1e-9;
    if !list.iter().any(|p| (*p - z).norm() < TOL * (1.0 + z.norm())) {
        list.push(z);
    }
}

/// Writes an orbit as CSV with columns n, re, im, abs.
pub fn write_orbit_csv<W: std::io::Write>(orbit: &OrbitRecord, mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,re,im,abs")?;
    for (n, z) in orbit.samples.iter().enumerate() {
        writeln!(out, "{},{:.17e},{:.17e},{:.17e}", n, z.re, z.im, z.norm())?;
    }
    Ok(())
}
