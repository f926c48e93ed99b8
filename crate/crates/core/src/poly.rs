//! Dense complex polynomials with compensated evaluation.

use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

/// Polynomial with complex coefficients in ascending degree order.
///
/// The leading coefficient is always nonzero; trailing near-zero
/// coefficients are trimmed on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

/// Relative threshold below which a trailing coefficient counts as zero.
const TRIM_EPS: f64 = 1e-14;

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

// Complex product with a first-order error term; the residual beyond the
// returned error is O(eps^2) and irrelevant at the compensation level.
fn two_prod_complex(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (p1, e1) = two_prod(a.re, b.re);
    let (p2, e2) = two_prod(a.im, b.im);
    let (p3, e3) = two_prod(a.re, b.im);
    let (p4, e4) = two_prod(a.im, b.re);
    let (re, e5) = two_sum(p1, -p2);
    let (im, e6) = two_sum(p3, p4);
    let err = Complex64::new(e1 - e2 + e5, e3 + e4 + e6);
    (Complex64::new(re, im), err)
}

fn two_sum_complex(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (re, er) = two_sum(a.re, b.re);
    let (im, ei) = two_sum(a.im, b.im);
    (Complex64::new(re, im), Complex64::new(er, ei))
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients; trims trailing zeros.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        let max: f64 = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().unwrap().norm() <= TRIM_EPS * max {
            coeffs.pop();
        }
        if coeffs.last().unwrap().norm() == 0.0 {
            return Err(Error::ZeroLeadingCoefficient);
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// The constant polynomial `c`.
    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() == 1
    }

    /// Horner evaluation with error-free compensation of products and sums.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut s = *self.coeffs.last().unwrap();
        let mut e = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev().skip(1) {
            let (p, pe) = two_prod_complex(s, z);
            let (s2, se) = two_sum_complex(p, c);
            e = e * z + (pe + se);
            s = s2;
        }
        s + e
    }

    /// Plain Horner evaluation without compensation.
    pub fn eval_naive(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::constant(Complex64::new(0.0, 0.0));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Polynomial { coeffs }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial { coeffs: out }
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            out[i] += a;
        }
        for (i, &b) in other.coeffs.iter().enumerate() {
            out[i] -= b;
        }
        // May be identically zero (e.g. p - p); keep a single entry then.
        let max: f64 = out.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return Polynomial::constant(Complex64::new(0.0, 0.0));
        }
        while out.len() > 1 && out.last().unwrap().norm() <= TRIM_EPS * max {
            out.pop();
        }
        Polynomial { coeffs: out }
    }

    pub fn scale(&self, s: Complex64) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// Cauchy bound: every root satisfies |z| <= 1 + max |a_k / a_n|.
    pub fn root_bound(&self) -> f64 {
        let lead = self.leading().norm();
        let m = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| c.norm() / lead)
            .fold(0.0, f64::max);
        1.0 + m
    }
}

impl std::fmt::Display for Polynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.norm() == 0.0 && self.coeffs.len() > 1 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if k == 0 {
                write!(f, "({c})")?;
            } else if k == 1 {
                write!(f, "({c})z")?;
            } else {
                write!(f, "({c})z^{k}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_matches_monomial_sum() {
        // random degree-5 polynomial against a naive monomial-sum oracle
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        let coeffs: Vec<Complex64> = (0..6).map(|_| c(next(), next())).collect();
        let p = Polynomial::new(coeffs.clone()).unwrap();
        for _ in 0..100 {
            let z = c(next(), next());
            // monomial sum: sum a_k * z^k with explicit powers
            let mut acc = Complex64::new(0.0, 0.0);
            let mut zp = Complex64::new(1.0, 0.0);
            for &a in &coeffs {
                acc += a * zp;
                zp *= z;
            }
            let v = p.eval(z);
            let denom = acc.norm().max(1e-30);
            assert!(
                (v - acc).norm() / denom < 1e-12,
                "rel err {} at {}",
                (v - acc).norm() / denom,
                z
            );
        }
    }

    #[test]
    fn derivative_of_cubic() {
        // z^3 - 3z -> 3z^2 - 3
        let p = Polynomial::from_real(&[0.0, -3.0, 0.0, 1.0]).unwrap();
        let d = p.derivative();
        assert_eq!(d.degree(), 2);
        assert!((d.eval(c(1.0, 0.0))).norm() < 1e-14);
        assert!((d.eval(c(-1.0, 0.0))).norm() < 1e-14);
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = Polynomial::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert!(Polynomial::new(vec![c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn root_bound_contains_roots() {
        // z^2 - 4: roots at +-2, bound = 1 + 4 = 5
        let p = Polynomial::from_real(&[-4.0, 0.0, 1.0]).unwrap();
        assert!(p.root_bound() >= 2.0);
    }
}
