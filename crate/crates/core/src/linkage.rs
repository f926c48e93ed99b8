//! Linked pullback curves and the fundamental-annulus intersection census.

use num_complex::Complex64;

use crate::curve::{quasihyperbolic_length, JordanCurve, PunctureSet};
use crate::error::Error;
use crate::lift::{self, LiftOptions, PullbackComponent};
use crate::moduli::AnnulusRegion;
use crate::rational::{RationalMap, DEFAULT_ESCAPE_RADIUS, DEFAULT_HORIZON};
use crate::Result;

/// One pullback curve admitted into a certificate.
#[derive(Clone, Debug)]
pub struct FoundCurve {
    pub level: usize,
    pub curve: JordanCurve,
    pub length: f64,
    pub linked: bool,
    pub covering_degree: usize,
}

/// Search record: every pullback component up to the depth that is linked
/// with the postcritical proxy and has bounded quasihyperbolic length.
#[derive(Clone, Debug)]
pub struct LinkageCertificate {
    pub base_curve: JordanCurve,
    pub found: Vec<FoundCurve>,
    pub length_bound: f64,
    /// Lift or metric failures, recorded per level without aborting the sweep.
    pub failures: Vec<(usize, String)>,
}

/// Pullback sweep with a default truncated puncture set for the metric.
pub fn linked_pullback_search(
    map: &RationalMap,
    base: &JordanCurve,
    max_depth: usize,
    length_bound: f64,
    p_points: &[Complex64],
) -> Result<LinkageCertificate> {
    let punctures = PunctureSet::truncated(map, 6, 2, DEFAULT_HORIZON, DEFAULT_ESCAPE_RADIUS)?;
    linked_pullback_search_with(
        map,
        base,
        max_depth,
        length_bound,
        p_points,
        &punctures,
        &LiftOptions::default(),
    )
}

pub fn linked_pullback_search_with(
    map: &RationalMap,
    base: &JordanCurve,
    max_depth: usize,
    length_bound: f64,
    p_points: &[Complex64],
    punctures: &PunctureSet,
    opts: &LiftOptions,
) -> Result<LinkageCertificate> {
    let mut found = Vec::new();
    let mut failures = Vec::new();

    let mut parents: Vec<PullbackComponent> = vec![PullbackComponent {
        curve: base.clone(),
        level: 0,
        accumulated_degree: 1,
    }];
    for level in 1..=max_depth {
        let mut next = Vec::new();
        for parent in &parents {
            match lift::pullback_components_with(map, &parent.curve, opts) {
                Ok(lifts) => {
                    for l in lifts {
                        next.push(PullbackComponent {
                            curve: l.curve,
                            level,
                            accumulated_degree: parent.accumulated_degree * l.covering_degree,
                        });
                    }
                }
                Err(e) => failures.push((level, e.to_string())),
            }
        }
        for comp in &next {
            let linked = match comp.curve.is_linked(p_points) {
                Ok(l) => l,
                Err(e) => {
                    failures.push((level, e.to_string()));
                    continue;
                }
            };
            if !linked {
                continue;
            }
            let length = match quasihyperbolic_length(&comp.curve, punctures) {
                Ok(l) => l,
                Err(e) => {
                    failures.push((level, e.to_string()));
                    continue;
                }
            };
            if length <= length_bound {
                found.push(FoundCurve {
                    level,
                    curve: comp.curve.clone(),
                    length,
                    linked,
                    covering_degree: comp.accumulated_degree,
                });
            }
        }
        parents = next;
    }

    Ok(LinkageCertificate {
        base_curve: base.clone(),
        found,
        length_bound,
        failures,
    })
}

/// Key-value text report: header, then level/length/linked per row.
pub fn write_certificate<W: std::io::Write>(
    cert: &LinkageCertificate,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "base_vertices = {}", cert.base_curve.len())?;
    writeln!(out, "base_diameter = {:.12e}", cert.base_curve.diameter())?;
    writeln!(out, "length_bound = {:.12e}", cert.length_bound)?;
    writeln!(out, "found_count = {}", cert.found.len())?;
    writeln!(out, "failure_count = {}", cert.failures.len())?;
    for (i, f) in cert.found.iter().enumerate() {
        writeln!(
            out,
            "found.{i} : level = {}  length = {:.12e}  linked = {}",
            f.level, f.length, f.linked
        )?;
    }
    for (level, msg) in &cert.failures {
        writeln!(out, "failure : level = {level}  message = {msg}")?;
    }
    Ok(())
}

/// Count of fundamental-ring copies meeting the curve interior, and the
/// index of the copy whose forward orbit stays clear of it.
#[derive(Clone, Copy, Debug)]
pub struct IntersectionCensus {
    pub n_alpha: usize,
    /// Orbit index i of the safe copy R^i(F); negative for backward images.
    pub first_safe_index: i64,
    /// Green's-function window inside the safe copy available for targets:
    /// orbits started there exit the curve interior in one step for good.
    pub safe_g_window: (f64, f64),
}

const GREEN_HORIZON: usize = 256;

/// Census of the fundamental-annulus orbit against a curve interior.
///
/// The fundamental ring F sits between the equipotentials G = rho and
/// G = d rho, so its orbit copies are the bands [rho d^i, rho d^(i+1)].
/// A band meets the (connected) interior exactly when its level interval
/// overlaps the interior's Green's-function range.
pub fn intersection_census(
    curve: &JordanCurve,
    fatou_annulus: &AnnulusRegion,
    map: &RationalMap,
    horizon: usize,
) -> Result<IntersectionCensus> {
    if !map.is_polynomial() {
        return Err(Error::NotPolynomial);
    }
    let d = map.degree() as f64;

    let mean_g = |c: &JordanCurve| {
        c.vertices()
            .iter()
            .map(|&v| map.green_value(v, GREEN_HORIZON))
            .sum::<f64>()
            / c.len() as f64
    };
    let rho = mean_g(&fatou_annulus.inner);
    let rho_outer = mean_g(&fatou_annulus.outer);
    if rho <= 0.0 || (rho_outer / rho - d).abs() > 0.2 {
        return Err(Error::Config(format!(
            "region is not a fundamental annulus: inner level {rho}, outer level {rho_outer}"
        )));
    }

    // sup of G over the closed interior is attained on the curve
    let g_hi = curve
        .vertices()
        .iter()
        .map(|&v| map.green_value(v, GREEN_HORIZON))
        .fold(0.0, f64::max);
    if g_hi <= 0.0 {
        return Err(Error::NoSafeCopy { horizon });
    }

    // inf of G over the interior, from a coarse interior sample
    let c0 = curve.centroid();
    let r = 0.5 * curve.diameter();
    let mut g_int_min = g_hi;
    let mut samples = 0usize;
    let m = 24;
    for j in 0..m {
        for i in 0..m {
            let z = c0
                + Complex64::new(
                    (i as f64 / (m - 1) as f64 * 2.0 - 1.0) * r,
                    (j as f64 / (m - 1) as f64 * 2.0 - 1.0) * r,
                );
            if curve.dist_to(z) > 1e-9 * curve.diameter() && curve.winding_number(z) == 1 {
                g_int_min = g_int_min.min(map.green_value(z, GREEN_HORIZON));
                samples += 1;
            }
        }
    }
    if samples == 0 {
        g_int_min = 0.9 * g_hi;
    }

    let band = |i: i64| {
        let lo = rho * d.powi(i as i32);
        (lo, lo * d)
    };
    let mut n_alpha = 0usize;
    for i in -(horizon as i64)..=(horizon as i64) {
        let (lo, hi) = band(i);
        if lo < g_hi && hi > g_int_min {
            n_alpha += 1;
        }
    }

    // the copy containing the interior's top level: forward images stay above it
    let j0 = ((g_hi / rho).ln() / d.ln() - 1e-12).floor() as i64;
    let (lo, hi) = band(j0);
    if j0.unsigned_abs() as usize > horizon || hi <= g_int_min {
        return Err(Error::NoSafeCopy { horizon });
    }
    debug_assert!(lo < g_hi && g_hi <= hi * (1.0 + 1e-9));

    Ok(IntersectionCensus {
        n_alpha,
        first_safe_index: j0,
        safe_g_window: (lo.max(g_hi / d), g_hi),
    })
}
