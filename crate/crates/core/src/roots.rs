//! Polynomial root finding by Aberth-Ehrlich simultaneous iteration.
//!
//! Deflation is avoided on purpose: repeated roots are recovered by
//! clustering the converged approximations, which keeps preimage
//! computations robust near critical values.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::poly::Polynomial;
use crate::Result;

/// Clustering tolerance for multiplicity detection.
pub const CLUSTER_TOL: f64 = 1e-7;

const MAX_ITER: usize = 400;
const CONVERGENCE_EPS: f64 = 1e-13;

// Fixed seed: the solver must be reproducible run to run, and callers never
// observe the initialization.
const INIT_SEED: u64 = 0x51_1355_7e11;

/// All roots of `p`, unclustered, each simple root appearing once and a
/// root of multiplicity m appearing m times (as a converged cluster).
pub fn all_roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    let degree = p.degree();
    if degree == 0 {
        return Ok(Vec::new());
    }
    let deriv = p.derivative();
    let radius = p.root_bound() * 1.25;
    let mut rng = ChaCha8Rng::seed_from_u64(INIT_SEED ^ degree as u64);

    // Random phases on a circle beyond the Cauchy bound, slightly jittered
    // in radius to break symmetric stalls.
    let mut zs: Vec<Complex64> = (0..degree)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + rng.gen::<f64>() * 0.5) / degree as f64;
            let r = radius * (1.0 + 0.1 * rng.gen::<f64>());
            Complex64::from_polar(r, theta)
        })
        .collect();

    let scale = p.leading().norm().max(1e-300);
    let mut last_max_step = f64::INFINITY;
    for iter in 0..MAX_ITER {
        let mut max_step: f64 = 0.0;
        for i in 0..degree {
            let zi = zs[i];
            let pv = p.eval(zi);
            if pv.norm() == 0.0 {
                continue;
            }
            let dv = deriv.eval(zi);
            let newton = if dv.norm() > 0.0 { pv / dv } else { pv / Complex64::new(1e-12, 0.0) };
            let mut repulse = Complex64::new(0.0, 0.0);
            for (j, &zj) in zs.iter().enumerate() {
                if j != i {
                    let d = zi - zj;
                    if d.norm() > 1e-300 {
                        repulse += Complex64::new(1.0, 0.0) / d;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulse;
            let step = if denom.norm() > 1e-300 { newton / denom } else { newton };
            zs[i] = zi - step;
            max_step = max_step.max(step.norm() / (1.0 + zs[i].norm()));
        }
        if max_step < CONVERGENCE_EPS {
            return Ok(zs);
        }
        // Stall escape: re-jitter if no progress for a while.
        if iter > 50 && iter % 25 == 0 && max_step > 0.5 * last_max_step && max_step > 1e-6 {
            for z in zs.iter_mut() {
                let jitter = Complex64::from_polar(1e-6 * radius, rng.gen::<f64>() * std::f64::consts::TAU);
                *z += jitter;
            }
        }
        last_max_step = max_step;
    }

    // Accept anyway if every residual is tiny relative to the coefficient scale.
    let residual = zs
        .iter()
        .map(|&z| p.eval(z).norm() / (scale * (1.0 + z.norm()).powi(degree as i32)))
        .fold(0.0, f64::max);
    if residual < 1e-10 {
        Ok(zs)
    } else {
        Err(Error::RootFinding {
            iterations: MAX_ITER,
            residual,
        })
    }
}

/// Roots grouped into (location, multiplicity) clusters.
pub fn clustered_roots(p: &Polynomial) -> Result<Vec<(Complex64, usize)>> {
    let raw = all_roots(p)?;
    Ok(cluster(&raw, CLUSTER_TOL.max(1e-7 * p.root_bound())))
}

/// Greedy proximity clustering; cluster location is the member mean.
pub fn cluster(points: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut used = vec![false; points.len()];
    let mut out = Vec::new();
    for i in 0..points.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![points[i]];
        used[i] = true;
        // One sweep is enough at the tolerances involved: clusters come from
        // a converged simultaneous iteration, so members are mutually close.
        for j in (i + 1)..points.len() {
            if !used[j] && (points[j] - points[i]).norm() <= tol {
                members.push(points[j]);
                used[j] = true;
            }
        }
        let mean = members.iter().sum::<Complex64>() / members.len() as f64;
        out.push((mean, members.len()));
    }
    out
}
