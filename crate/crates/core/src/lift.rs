//! Analytic continuation of curve preimages under a rational map.
//!
//! Lifting walks the base polyline and tracks one preimage by Newton
//! correction from the previous point. The lift closes after as many base
//! laps as the covering degree of the component.

use num_complex::Complex64;

use crate::curve::JordanCurve;
use crate::error::Error;
use crate::rational::RationalMap;
use crate::Result;

#[derive(Clone, Copy, Debug)]
pub struct LiftOptions {
    /// Relative Newton tolerance on |R(z) - w|.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Maximum recursive halvings of one base edge.
    pub max_subdivision: usize,
    /// Required distance from the base polyline to critical values,
    /// relative to the base diameter.
    pub critical_margin: f64,
}

impl Default for LiftOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-11,
            max_newton: 40,
            max_subdivision: 24,
            critical_margin: 1e-4,
        }
    }
}

/// One component of the preimage of a base curve.
#[derive(Clone, Debug)]
pub struct LiftResult {
    pub curve: JordanCurve,
    /// Degree of the covering (component) -> (base).
    pub covering_degree: usize,
    /// Laps of the base walked until the lift closed; equals the covering degree.
    pub base_laps: usize,
    /// The fiber points over the base start vertex that lie on this component.
    pub fiber_points: Vec<Complex64>,
}

struct Lifter<'a> {
    map: &'a RationalMap,
    opts: LiftOptions,
    scale: f64,
    base_diameter: f64,
    vertices: Vec<Complex64>,
}

impl<'a> Lifter<'a> {
    fn newton(&self, start: Complex64, w: Complex64) -> Option<Complex64> {
        let mut z = start;
        // tolerance tied to the base-curve scale so microscopic pullback
        // curves stay resolvable, floored at the arithmetic granularity
        let tol = (self.opts.newton_tol * self.base_diameter)
            .max(64.0 * f64::EPSILON * (1.0 + w.norm()));
        for _ in 0..self.opts.max_newton {
            let fv = self.map.evaluate(z) - w;
            if fv.norm() <= tol {
                return Some(z);
            }
            let dv = self.map.derivative_at(z);
            if dv.norm() < 1e-300 || !dv.re.is_finite() || !dv.im.is_finite() {
                return None;
            }
            let step = fv / dv;
            if !step.re.is_finite() || !step.im.is_finite() {
                return None;
            }
            z -= step;
        }
        None
    }

    /// Moves the lift from the fiber over `w_from` to the fiber over `w_to`,
    /// halving the target step whenever the corrector jumps implausibly far.
    fn advance(
        &mut self,
        z: &mut Complex64,
        w_from: Complex64,
        w_to: Complex64,
        depth: usize,
    ) -> Result<()> {
        let dv = self.map.derivative_at(*z);
        let dv_norm = dv.norm().max(1e-300);
        let predicted = (w_to - w_from).norm() / dv_norm;
        let corrected = self.newton(*z, w_to);
        let accept = match corrected {
            Some(z_new) => {
                let jump = (z_new - *z).norm();
                if jump <= 3.0 * predicted + 1e-13 * self.scale {
                    Some(z_new)
                } else {
                    None
                }
            }
            None => None,
        };
        match accept {
            Some(z_new) => {
                *z = z_new;
                self.vertices.push(z_new);
                Ok(())
            }
            None => {
                if depth >= self.opts.max_subdivision {
                    return Err(Error::BranchAmbiguity { near: w_to });
                }
                let mid = 0.5 * (w_from + w_to);
                self.advance(z, w_from, mid, depth + 1)?;
                // drop the intermediate vertex so lift vertices stay aligned
                // with base vertices where no subdivision was needed
                self.advance(z, mid, w_to, depth + 1)
            }
        }
    }
}

fn critical_value_margin_check(map: &RationalMap, base: &JordanCurve, opts: &LiftOptions) -> Result<()> {
    let crit = map.critical_points()?;
    let margin = opts.critical_margin * base.diameter();
    for &(c, _) in &crit.points {
        let v = map.evaluate(c);
        if !v.re.is_finite() || !v.im.is_finite() {
            continue;
        }
        if base.dist_to(v) < margin {
            return Err(Error::BranchAmbiguity { near: v });
        }
    }
    Ok(())
}

/// Lifts `base` under `map` starting from the preimage `start` of the
/// first base vertex. Walks the base until the lift closes.
pub fn lift_curve(map: &RationalMap, base: &JordanCurve, start: Complex64) -> Result<LiftResult> {
    lift_curve_with(map, base, start, &LiftOptions::default())
}

pub fn lift_curve_with(
    map: &RationalMap,
    base: &JordanCurve,
    start: Complex64,
    opts: &LiftOptions,
) -> Result<LiftResult> {
    critical_value_margin_check(map, base, opts)?;
    let w0 = base.vertices()[0];

    let mut lifter = Lifter {
        map,
        opts: *opts,
        scale: (1.0 + start.norm()).max(base.diameter()),
        base_diameter: base.diameter(),
        vertices: Vec::with_capacity(base.len() * map.degree()),
    };

    // Refine the start onto the fiber of the first base vertex.
    let z0 = lifter.newton(start, w0).ok_or(Error::BranchAmbiguity { near: w0 })?;
    if (z0 - start).norm() > 0.25 * (1.0 + start.norm()) {
        // the caller's start was not actually near this fiber
        return Err(Error::BranchAmbiguity { near: w0 });
    }

    // Fiber separation sets the closure tolerance: the lift has closed when
    // it returns to z0 rather than to a different fiber point.
    let fiber = map.distinct_preimages(w0)?;
    let sep = fiber
        .iter()
        .filter(|f| (**f - z0).norm() > 1e-9 * (1.0 + z0.norm()))
        .map(|f| (*f - z0).norm())
        .fold(f64::INFINITY, f64::min);
    let close_tol = if sep.is_finite() {
        0.45 * sep
    } else {
        1e-6 * (1.0 + z0.norm())
    };

    lifter.vertices.push(z0);
    let mut z = z0;
    let mut fiber_points = vec![z0];
    let max_laps = map.degree();
    let n = base.len();
    let mut gap = f64::INFINITY;

    for lap in 1..=max_laps {
        for k in 0..n {
            let w_from = base.vertices()[k];
            let w_to = base.vertices()[(k + 1) % n];
            lifter.advance(&mut z, w_from, w_to, 0)?;
        }
        gap = (z - z0).norm();
        if gap < close_tol {
            // the final point duplicates the start
            lifter.vertices.pop();
            let curve = JordanCurve::new_unchecked(lifter.vertices)?;
            return Ok(LiftResult {
                curve,
                covering_degree: lap,
                base_laps: lap,
                fiber_points,
            });
        }
        fiber_points.push(z);
    }

    Err(Error::ContinuationFailure {
        laps: max_laps,
        gap,
    })
}

/// All components of the preimage of `base`, with covering degrees.
pub fn pullback_components(map: &RationalMap, base: &JordanCurve) -> Result<Vec<LiftResult>> {
    pullback_components_with(map, base, &LiftOptions::default())
}

pub fn pullback_components_with(
    map: &RationalMap,
    base: &JordanCurve,
    opts: &LiftOptions,
) -> Result<Vec<LiftResult>> {
    let w0 = base.vertices()[0];
    let fiber = map.distinct_preimages(w0)?;
    let mut used = vec![false; fiber.len()];
    let mut out = Vec::new();
    for i in 0..fiber.len() {
        if used[i] {
            continue;
        }
        let lift = lift_curve_with(map, base, fiber[i], opts)?;
        for fp in &lift.fiber_points {
            for (j, f) in fiber.iter().enumerate() {
                if (*f - fp).norm() < 1e-6 * (1.0 + f.norm()) {
                    used[j] = true;
                }
            }
        }
        out.push(lift);
    }
    let total: usize = out.iter().map(|l| l.covering_degree).sum();
    debug_assert_eq!(total, map.degree(), "covering degrees must partition the map degree");
    Ok(out)
}

/// Component of the iterated preimage, with the accumulated covering degree.
#[derive(Clone, Debug)]
pub struct PullbackComponent {
    pub curve: JordanCurve,
    pub level: usize,
    pub accumulated_degree: usize,
}

/// All components of the k-th iterated preimage of `base`. The accumulated
/// covering degrees over all components at level k sum to degree(map)^k.
pub fn iterated_pullback(map: &RationalMap, base: &JordanCurve, k: usize) -> Result<Vec<PullbackComponent>> {
    iterated_pullback_with(map, base, k, &LiftOptions::default())
}

pub fn iterated_pullback_with(
    map: &RationalMap,
    base: &JordanCurve,
    k: usize,
    opts: &LiftOptions,
) -> Result<Vec<PullbackComponent>> {
    assert!(k >= 1);
    let mut level_curves = vec![PullbackComponent {
        curve: base.clone(),
        level: 0,
        accumulated_degree: 1,
    }];
    for level in 1..=k {
        let mut next = Vec::new();
        for parent in &level_curves {
            for lift in pullback_components_with(map, &parent.curve, opts)? {
                next.push(PullbackComponent {
                    curve: lift.curve,
                    level,
                    accumulated_degree: parent.accumulated_degree * lift.covering_degree,
                });
            }
        }
        level_curves = next;
    }
    Ok(level_curves)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn squaring() -> RationalMap {
        RationalMap::polynomial_from_real(&[0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn unit_circle_lifts_to_itself_with_degree_two() {
        let base = JordanCurve::circle(c(0.0, 0.0), 1.0, 64);
        let lift = lift_curve(&squaring(), &base, c(1.0, 0.0)).unwrap();
        assert_eq!(lift.covering_degree, 2);
        assert_eq!(lift.base_laps, 2);
        for v in lift.curve.vertices() {
            assert!((v.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn radius_four_circle_lifts_to_radius_two() {
        let base = JordanCurve::circle(c(0.0, 0.0), 4.0, 64);
        let lift = lift_curve(&squaring(), &base, c(2.0, 0.0)).unwrap();
        assert_eq!(lift.covering_degree, 2);
        for v in lift.curve.vertices() {
            assert!((v.norm() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn forward_images_of_lift_vertices_lie_on_base() {
        let map = RationalMap::polynomial_from_real(&[4.0, 0.0, 1.0]).unwrap(); // z^2 + 4
        let base = JordanCurve::circle(c(4.5, 1.9), 0.4, 64);
        let fiber = map.distinct_preimages(base.vertices()[0]).unwrap();
        let lift = lift_curve(&map, &base, fiber[0]).unwrap();
        for &v in lift.curve.vertices() {
            let fwd = map.evaluate(v);
            assert!(base.dist_to(fwd) < 10.0 * 1e-11 * (1.0 + fwd.norm()));
        }
    }

    #[test]
    fn off_center_circle_splits_into_two_components() {
        // preimage of a small disk away from the critical value 0 of z^2
        let base = JordanCurve::circle(c(4.0, 0.0), 0.5, 64);
        let comps = pullback_components(&squaring(), &base).unwrap();
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|l| l.covering_degree == 1));
    }

    #[test]
    fn iterated_pullback_of_unit_circle() {
        let base = JordanCurve::circle(c(0.0, 0.0), 1.0, 64);
        let comps = iterated_pullback(&squaring(), &base, 2).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].accumulated_degree, 4);
        for v in comps[0].curve.vertices() {
            assert!((v.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pullback_partitions_preimage_count() {
        // z^2 + 4 around its repelling fixed point
        let map = RationalMap::polynomial_from_real(&[4.0, 0.0, 1.0]).unwrap();
        let fixed = map
            .fixed_points()
            .unwrap()
            .into_iter()
            .find(|(_, m)| m.norm() > 1.0)
            .unwrap()
            .0;
        let base = JordanCurve::circle(fixed, 0.3, 64);
        let comps = pullback_components(&map, &base).unwrap();
        let total: usize = comps.iter().map(|l| l.covering_degree).sum();
        assert_eq!(total, 2);
    }

    #[test]
    fn degree_sums_for_cubic_pullbacks() {
        // z^3 - 3z has critical values +-2; keep the base away from them
        let map = RationalMap::polynomial_from_real(&[0.0, -3.0, 0.0, 1.0]).unwrap();
        let base = JordanCurve::circle(c(0.0, 0.0), 6.0, 96);
        for k in 1..=2 {
            let comps = iterated_pullback(&map, &base, k).unwrap();
            let total: usize = comps.iter().map(|l| l.accumulated_degree).sum();
            assert_eq!(total, 3usize.pow(k as u32), "level {k}");
        }
    }

    #[test]
    fn base_through_critical_value_rejected() {
        // unit circle around 0 passes near the critical value of z^2 + 1 at 1
        let map = RationalMap::polynomial_from_real(&[1.0, 0.0, 1.0]).unwrap();
        let base = JordanCurve::circle(c(1.0, 0.0), 1e-6, 64);
        match lift_curve(&map, &base, c(0.0, 0.0)) {
            Err(Error::BranchAmbiguity { .. }) => {}
            other => panic!("expected BranchAmbiguity, got {other:?}"),
        }
    }
}
