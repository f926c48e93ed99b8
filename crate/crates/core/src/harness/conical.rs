//! Conical-point detection by disk pullbacks along an orbit.

use num_complex::Complex64;

use crate::curve::JordanCurve;
use crate::lift::{lift_curve_with, LiftOptions};
use crate::rational::RationalMap;
use crate::Result;

/// Certificate that disk pullbacks along the orbit of x0 keep bounded degree.
#[derive(Clone, Debug)]
pub struct ConicalCertificate {
    pub x0: Complex64,
    pub delta: f64,
    pub degree_bound: usize,
    /// times k whose accumulated pullback degree stays within the bound
    pub good_times: Vec<usize>,
    /// accumulated degree per time k; None when a lift was indeterminate
    pub component_degrees: Vec<Option<usize>>,
}

/// Pullback region: explicit polyline, or an analytic disk once the scale
/// drops below what curve vertices can resolve.
enum Region {
    Poly(JordanCurve),
    Disk { center: Complex64, radius: f64 },
}

const CURVE_VERTICES: usize = 128;

/// Pulls the disk D(R^k(x0), delta) back along the orbit for every k up to
/// the horizon, recording the accumulated covering degree.
///
/// Per step, the component containing the orbit point is found by lifting
/// the disk boundary and testing the winding number; its covering degree is
/// the boundary lift's. Once a component is smaller than floating-point
/// granularity at its location, steps continue on an analytic disk via the
/// derivative, with a clearance check certifying degree one.
pub fn detect_conical(
    map: &RationalMap,
    x0: Complex64,
    delta: f64,
    d_max: usize,
    horizon: usize,
) -> Result<ConicalCertificate> {
    let orbit = map.iterate_orbit(x0, horizon, crate::rational::DEFAULT_ESCAPE_RADIUS);
    if orbit.escaped {
        return Err(crate::error::Error::Config(format!(
            "orbit of {x0} escapes at index {:?}; conical detection needs a bounded orbit",
            orbit.escape_index
        )));
    }
    let crit = map.critical_points()?;
    let crit_points: Vec<Complex64> = crit.points.iter().map(|&(c, _)| c).collect();
    let crit_mult: Vec<usize> = crit.points.iter().map(|&(_, m)| m).collect();

    let opts = LiftOptions {
        critical_margin: 1e-6,
        ..LiftOptions::default()
    };

    let mut good_times = Vec::new();
    let mut component_degrees = Vec::new();
    for k in 0..=horizon {
        let degree = pullback_chain_degree(
            map,
            &orbit.samples,
            k,
            delta,
            &crit_points,
            &crit_mult,
            &opts,
        );
        component_degrees.push(degree);
        if let Some(d) = degree {
            if d <= d_max {
                good_times.push(k);
            }
        }
    }

    Ok(ConicalCertificate {
        x0,
        delta,
        degree_bound: d_max,
        good_times,
        component_degrees,
    })
}

fn pullback_chain_degree(
    map: &RationalMap,
    orbit: &[Complex64],
    k: usize,
    delta: f64,
    crit_points: &[Complex64],
    crit_mult: &[usize],
    opts: &LiftOptions,
) -> Option<usize> {
    let mut region = Region::Poly(JordanCurve::circle(orbit[k], delta, CURVE_VERTICES));
    let mut acc = 1usize;
    for j in (1..=k).rev() {
        let anchor = orbit[j - 1];
        match region {
            Region::Poly(curve) => {
                // analytic fast path once vertices cannot separate from the center
                let scale_floor = 1e3 * f64::EPSILON * (1.0 + orbit[j].norm());
                if curve.diameter() < scale_floor {
                    let radius = 0.5 * curve.diameter();
                    let pulled = disk_step(map, anchor, radius, crit_points)?;
                    region = Region::Disk {
                        center: anchor,
                        radius: pulled,
                    };
                    continue;
                }
                // lift the boundary from the fiber point nearest the anchor
                let mut fiber = map.distinct_preimages(curve.vertices()[0]).ok()?;
                fiber.sort_by(|a, b| {
                    (a - anchor)
                        .norm()
                        .partial_cmp(&(b - anchor).norm())
                        .unwrap()
                });
                let mut found = None;
                for start in fiber {
                    let lift = match lift_curve_with(map, &curve, start, opts) {
                        Ok(l) => l,
                        Err(_) => continue,
                    };
                    if lift.curve.contains(anchor).unwrap_or(false) {
                        found = Some(lift);
                        break;
                    }
                }
                let lift = found?;
                // cross-check the covering degree against the critical count
                let inside_mult: usize = crit_points
                    .iter()
                    .zip(crit_mult)
                    .filter_map(|(&c, &m)| {
                        lift.curve.contains(c).ok().and_then(|inside| inside.then_some(m))
                    })
                    .sum();
                debug_assert_eq!(lift.covering_degree, 1 + inside_mult);
                acc *= lift.covering_degree;
                region = Region::Poly(lift.curve);
            }
            Region::Disk { center, radius } => {
                debug_assert_eq!(center, orbit[j]);
                let r = disk_step(map, anchor, radius, crit_points)?;
                region = Region::Disk {
                    center: anchor,
                    radius: r,
                };
            }
        }
        if acc > 1 << 20 {
            return Some(acc); // degree bound long blown; stop refining
        }
    }
    Some(acc)
}

/// Analytic pullback of a tiny disk along the branch through `anchor`:
/// valid with degree one when the linearized preimage stays far from every
/// critical point.
fn disk_step(
    map: &RationalMap,
    anchor: Complex64,
    radius: f64,
    crit_points: &[Complex64],
) -> Option<f64> {
    let dv = map.derivative_at(anchor).norm();
    if dv < 1e-300 {
        return None;
    }
    let pulled = 2.0 * radius / dv; // factor-2 slack over the linearization
    let clearance = crit_points
        .iter()
        .map(|&c| (c - anchor).norm())
        .fold(f64::INFINITY, f64::min);
    if clearance > 8.0 * pulled {
        Some(pulled)
    } else {
        None
    }
}

/// Default disk radius: half the distance from the orbit to the critical
/// set, floored at 1e-3.
pub fn default_conical_delta(map: &RationalMap, x0: Complex64, horizon: usize) -> Result<f64> {
    let orbit = map.iterate_orbit(x0, horizon, crate::rational::DEFAULT_ESCAPE_RADIUS);
    let crit = map.critical_points()?;
    let mut dist = f64::INFINITY;
    for &z in &orbit.samples {
        for &(c, _) in &crit.points {
            dist = dist.min((z - c).norm());
        }
    }
    Ok((0.5 * dist).max(1e-3))
}

/// Detection with the default delta, halving it on retries when too many
/// times come back indeterminate.
pub fn detect_conical_auto(
    map: &RationalMap,
    x0: Complex64,
    d_max: usize,
    horizon: usize,
) -> Result<ConicalCertificate> {
    let mut delta = default_conical_delta(map, x0, horizon)?;
    let mut best: Option<ConicalCertificate> = None;
    for _ in 0..5 {
        let cert = detect_conical(map, x0, delta, d_max, horizon)?;
        let indeterminate = cert.component_degrees.iter().filter(|d| d.is_none()).count();
        let acceptable = indeterminate * 4 <= cert.component_degrees.len();
        let better = best
            .as_ref()
            .map(|b| cert.good_times.len() > b.good_times.len())
            .unwrap_or(true);
        if better {
            best = Some(cert);
        }
        if acceptable {
            break;
        }
        delta *= 0.5;
    }
    Ok(best.expect("at least one detection attempt runs"))
}

/// Key-value report of a certificate.
pub fn write_conical_report<W: std::io::Write>(
    cert: &ConicalCertificate,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "x0 = {:.12e} {:+.12e}i", cert.x0.re, cert.x0.im)?;
    writeln!(out, "delta = {:.12e}", cert.delta)?;
    writeln!(out, "degree_bound = {}", cert.degree_bound)?;
    writeln!(out, "good_times = {}", cert.good_times.len())?;
    for (k, d) in cert.component_degrees.iter().enumerate() {
        match d {
            Some(d) => writeln!(out, "k = {k}  degree = {d}")?,
            None => writeln!(out, "k = {k}  degree = indeterminate")?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn repelling_fixed_point_of_chebyshev_is_conical() {
        // x0 = 2 for z^2 - 2: pullback components contract toward the fixed
        // point and never meet the critical point 0
        let map = RationalMap::polynomial_from_real(&[-2.0, 0.0, 1.0]).unwrap();
        let cert = detect_conical(&map, c(2.0, 0.0), 0.1, 1, 50).unwrap();
        assert_eq!(cert.good_times.len(), 51, "degrees: {:?}", cert.component_degrees);
        for (k, d) in cert.component_degrees.iter().enumerate() {
            assert_eq!(*d, Some(1), "k = {k}");
        }
    }

    #[test]
    fn time_zero_has_degree_one() {
        let map = RationalMap::polynomial_from_real(&[4.0, 0.0, 1.0]).unwrap();
        let fixed = c(0.5, 15.0f64.sqrt() / 2.0);
        let cert = detect_conical(&map, fixed, 0.05, 4, 0).unwrap();
        assert_eq!(cert.component_degrees, vec![Some(1)]);
        assert_eq!(cert.good_times, vec![0]);
    }

    #[test]
    fn critical_point_in_component_doubles_degree() {
        // z^2 - 2 from x0 = 0 (the critical point): orbit 0, -2, 2, 2, ...
        // the first pullback of a disk around -2 contains 0, so the degree
        // picks up the factor (1 + 1)
        let map = RationalMap::polynomial_from_real(&[-2.0, 0.0, 1.0]).unwrap();
        let cert = detect_conical(&map, c(0.0, 0.0), 0.4, 8, 3).unwrap();
        assert_eq!(cert.component_degrees[0], Some(1));
        assert_eq!(cert.component_degrees[1], Some(2), "all: {:?}", cert.component_degrees);
        // deeper times keep the single doubling: the orbit never returns to 0
        assert_eq!(cert.component_degrees[2], Some(2));
    }

    #[test]
    fn degrees_nondecreasing_in_k() {
        let map = RationalMap::polynomial_from_real(&[-2.0, 0.0, 1.0]).unwrap();
        let cert = detect_conical(&map, c(0.0, 0.0), 0.3, 16, 8).unwrap();
        let mut last = 0usize;
        for d in cert.component_degrees.iter().flatten() {
            assert!(*d >= last);
            last = *d;
        }
    }

    #[test]
    fn escaping_orbit_rejected() {
        let map = RationalMap::polynomial_from_real(&[4.0, 0.0, 1.0]).unwrap();
        assert!(detect_conical(&map, c(0.0, 0.0), 0.1, 2, 20).is_err());
    }

    #[test]
    fn auto_delta_respects_floor() {
        let map = RationalMap::polynomial_from_real(&[-2.0, 0.0, 1.0]).unwrap();
        let delta = default_conical_delta(&map, c(2.0, 0.0), 50).unwrap();
        // orbit sits at 2, critical point at 0: delta = 1
        assert!((delta - 1.0).abs() < 1e-12);
    }
}
