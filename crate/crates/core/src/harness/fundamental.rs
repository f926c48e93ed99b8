//! Fundamental annuli in the basin of infinity, traced along equipotentials
//! of the Green's function.

use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::curve::JordanCurve;
use crate::error::Error;
use crate::moduli::AnnulusRegion;
use crate::rational::RationalMap;
use crate::Result;

const GREEN_HORIZON: usize = 256;

/// Closed ring between the equipotentials G = rho and G = d rho; the map
/// sends the inner boundary onto the outer one.
#[derive(Clone, Debug)]
pub struct FundamentalAnnulus {
    pub region: AnnulusRegion,
    pub green_level: f64,
}

/// Largest Green value attained at a critical point; levels above it are
/// smooth Jordan equipotentials.
pub fn critical_green_level(map: &RationalMap) -> Result<f64> {
    let crit = map.critical_points()?;
    Ok(crit
        .points
        .iter()
        .map(|&(c, _)| map.green_value(c, GREEN_HORIZON))
        .fold(0.0, f64::max))
}

/// Traces the equipotential {G = rho} by marching squares with bisection
/// refinement of every crossing.
pub fn trace_equipotential(map: &RationalMap, rho: f64, resolution: usize) -> Result<JordanCurve> {
    if !map.is_polynomial() {
        return Err(Error::NotPolynomial);
    }
    let crit_level = critical_green_level(map)?;
    if rho <= crit_level {
        return Err(Error::LevelTooDeep {
            rho,
            reason: format!("level must exceed the critical equipotential {crit_level:.6}"),
        });
    }

    // bounding square strictly containing the level set
    let mut radius = map.escape_bound()?.max(1.0);
    for _ in 0..200 {
        let min_g = (0..32)
            .map(|k| {
                let z = Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / 32.0);
                map.green_value(z, GREEN_HORIZON)
            })
            .fold(f64::INFINITY, f64::min);
        if min_g > rho {
            break;
        }
        radius *= 1.3;
    }
    radius *= 1.1;

    let n = resolution.max(64);
    let h = 2.0 * radius / n as f64;
    let node = |i: usize, j: usize| Complex64::new(-radius + i as f64 * h, -radius + j as f64 * h);
    let mut values = vec![0.0f64; (n + 1) * (n + 1)];
    for j in 0..=n {
        for i in 0..=n {
            values[j * (n + 1) + i] = map.green_value(node(i, j), GREEN_HORIZON) - rho;
        }
    }

    // crossings keyed by (horizontal?, i, j) where the edge starts at node (i, j)
    type EdgeKey = (bool, usize, usize);
    let mut crossings: BTreeMap<EdgeKey, Complex64> = BTreeMap::new();
    let refine = |a: Complex64, b: Complex64| -> Complex64 {
        let mut lo = a;
        let mut hi = b;
        let g = |z: Complex64| map.green_value(z, GREEN_HORIZON) - rho;
        let mut g_lo = g(lo);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            let gm = g(mid);
            if (gm > 0.0) == (g_lo > 0.0) {
                lo = mid;
                g_lo = gm;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let val = |i: usize, j: usize, values: &[f64]| values[j * (n + 1) + i];
    for j in 0..=n {
        for i in 0..n {
            let (a, b) = (val(i, j, &values), val(i + 1, j, &values));
            if (a > 0.0) != (b > 0.0) {
                crossings.insert((true, i, j), refine(node(i, j), node(i + 1, j)));
            }
        }
    }
    for j in 0..n {
        for i in 0..=n {
            let (a, b) = (val(i, j, &values), val(i, j + 1, &values));
            if (a > 0.0) != (b > 0.0) {
                crossings.insert((false, i, j), refine(node(i, j), node(i, j + 1)));
            }
        }
    }

    // cell-local segments pairing crossed edges
    let mut adjacency: BTreeMap<EdgeKey, Vec<EdgeKey>> = BTreeMap::new();
    for j in 0..n {
        for i in 0..n {
            let edges = [
                (true, i, j),      // bottom
                (false, i + 1, j), // right
                (true, i, j + 1),  // top
                (false, i, j),     // left
            ];
            let crossed: Vec<_> = edges
                .iter()
                .filter(|e| crossings.contains_key(*e))
                .copied()
                .collect();
            match crossed.len() {
                0 => {}
                2 => {
                    adjacency.entry(crossed[0]).or_default().push(crossed[1]);
                    adjacency.entry(crossed[1]).or_default().push(crossed[0]);
                }
                4 => {
                    // saddle: resolve by the sign at the cell center
                    let center = map
                        .green_value(node(i, j) + Complex64::new(0.5 * h, 0.5 * h), GREEN_HORIZON)
                        - rho;
                    let corner = val(i, j, &values);
                    let (p0, p1, p2, p3) = (edges[0], edges[1], edges[2], edges[3]);
                    // pair edges so the contour separates the corner sign from the center
                    let pairs = if (center > 0.0) == (corner > 0.0) {
                        [(p0, p1), (p2, p3)]
                    } else {
                        [(p0, p3), (p1, p2)]
                    };
                    for (u, v) in pairs {
                        adjacency.entry(u).or_default().push(v);
                        adjacency.entry(v).or_default().push(u);
                    }
                }
                _ => {
                    return Err(Error::LevelTooDeep {
                        rho,
                        reason: "degenerate marching cell".into(),
                    })
                }
            }
        }
    }

    // walk loops
    let mut visited: BTreeMap<EdgeKey, bool> = BTreeMap::new();
    let mut loops: Vec<Vec<Complex64>> = Vec::new();
    for start in crossings.keys() {
        if visited.get(start).copied().unwrap_or(false) {
            continue;
        }
        let mut this_loop = Vec::new();
        let mut prev: Option<EdgeKey> = None;
        let mut cur = *start;
        loop {
            visited.insert(cur, true);
            this_loop.push(crossings[&cur]);
            let next = adjacency
                .get(&cur)
                .and_then(|nbrs| nbrs.iter().find(|&&e| Some(e) != prev).copied());
            match next {
                Some(e) if e == *start => break,
                Some(e) => {
                    prev = Some(cur);
                    cur = e;
                }
                None => break, // open chain from a boundary clip; discarded below
            }
        }
        if this_loop.len() >= 8 {
            loops.push(this_loop);
        }
    }

    if loops.is_empty() {
        return Err(Error::LevelTooDeep {
            rho,
            reason: "no contour found at this level".into(),
        });
    }
    if loops.len() > 1 {
        return Err(Error::LevelTooDeep {
            rho,
            reason: format!("level curve has {} components", loops.len()),
        });
    }

    let mut resampled = resample_closed(&loops[0], resolution.max(crate::curve::MIN_VERTICES));
    // arclength resampling leaves chord-midpoint vertices off the level set;
    // project each back along the local gradient
    for v in resampled.iter_mut() {
        *v = project_to_level(map, rho, *v, h);
    }
    JordanCurve::new_unchecked(resampled)
}

fn project_to_level(map: &RationalMap, rho: f64, z0: Complex64, h: f64) -> Complex64 {
    let mut z = z0;
    for _ in 0..6 {
        let g = map.green_value(z, GREEN_HORIZON) - rho;
        if g.abs() < 1e-13 * rho.max(1.0) {
            break;
        }
        let step = 1e-4 * h;
        let gx = (map.green_value(z + step, GREEN_HORIZON)
            - map.green_value(z - step, GREEN_HORIZON))
            / (2.0 * step);
        let gy = (map.green_value(z + Complex64::new(0.0, step), GREEN_HORIZON)
            - map.green_value(z - Complex64::new(0.0, step), GREEN_HORIZON))
            / (2.0 * step);
        let grad = Complex64::new(gx, gy);
        let n2 = grad.norm_sqr();
        if n2 < 1e-30 {
            break;
        }
        z -= grad * (g / n2);
    }
    z
}

/// Resamples a closed polyline to `count` vertices at equal arclength.
fn resample_closed(points: &[Complex64], count: usize) -> Vec<Complex64> {
    let n = points.len();
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    for k in 0..n {
        let seg = (points[(k + 1) % n] - points[k]).norm();
        cumulative.push(cumulative[k] + seg);
    }
    let total = *cumulative.last().unwrap();
    let mut out = Vec::with_capacity(count);
    let mut seg_idx = 0usize;
    for k in 0..count {
        let s = total * k as f64 / count as f64;
        while seg_idx + 1 < cumulative.len() - 1 && cumulative[seg_idx + 1] <= s {
            seg_idx += 1;
        }
        let seg_len = cumulative[seg_idx + 1] - cumulative[seg_idx];
        let t = if seg_len > 0.0 { (s - cumulative[seg_idx]) / seg_len } else { 0.0 };
        let a = points[seg_idx];
        let b = points[(seg_idx + 1) % n];
        out.push(a + (b - a) * t);
    }
    out
}

/// Builds the ring between {G = rho} and {G = d rho} and verifies the
/// boundary mapping property.
pub fn fundamental_annulus(
    map: &RationalMap,
    rho: f64,
    resolution: usize,
) -> Result<FundamentalAnnulus> {
    let inner = trace_equipotential(map, rho, resolution)?;
    let outer = trace_equipotential(map, rho * map.degree() as f64, resolution)?;

    // forward image of the inner boundary lies on the outer level set
    let d = map.degree() as f64;
    for &v in inner.vertices().iter().step_by(7) {
        let g = map.green_value(map.evaluate(v), GREEN_HORIZON);
        if (g - d * rho).abs() > 1e-6 * d * rho {
            return Err(Error::LevelTooDeep {
                rho,
                reason: format!("boundary mapping violated: G(R(v)) = {g}, want {}", d * rho),
            });
        }
    }

    let region = AnnulusRegion::new(outer, inner)?;
    Ok(FundamentalAnnulus {
        region,
        green_level: rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squaring() -> RationalMap {
        RationalMap::polynomial_from_real(&[0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn squaring_equipotentials_are_circles() {
        // G(z) = log |z|: level ln 2 is the circle of radius 2
        let curve = trace_equipotential(&squaring(), 2.0f64.ln(), 256).unwrap();
        for &v in curve.vertices() {
            assert!((v.norm() - 2.0).abs() < 1e-9, "|v| = {}", v.norm());
        }
    }

    #[test]
    fn squaring_fundamental_annulus() {
        let fa = fundamental_annulus(&squaring(), 2.0f64.ln(), 256).unwrap();
        for &v in fa.region.inner.vertices() {
            assert!((v.norm() - 2.0).abs() < 1e-9);
        }
        for &v in fa.region.outer.vertices() {
            assert!((v.norm() - 4.0).abs() < 1e-9);
        }
        // R(inner) lands on the outer level set
        let map = squaring();
        for &v in fa.region.inner.vertices() {
            let image = map.evaluate(v);
            assert!((image.norm() - 4.0).abs() < 1e-6);
        }
    }

    #[test]
    fn z2_plus_4_forward_mapping_check() {
        let map = RationalMap::polynomial_from_real(&[4.0, 0.0, 1.0]).unwrap();
        let crit_level = critical_green_level(&map).unwrap();
        let rho = crit_level * 1.5;
        let fa = fundamental_annulus(&map, rho, 256).unwrap();
        // geometric check: forward images of inner vertices near the outer polyline
        for &v in fa.region.inner.vertices().iter().step_by(5) {
            let image = map.evaluate(v);
            let dist = fa.region.outer.dist_to(image);
            assert!(dist < 1e-3 * fa.region.outer.diameter(), "dist {dist}");
        }
    }

    #[test]
    fn green_functional_equation_on_annulus_points() {
        let map = RationalMap::polynomial_from_real(&[4.0, 0.0, 1.0]).unwrap();
        let rho = critical_green_level(&map).unwrap() * 1.5;
        let fa = fundamental_annulus(&map, rho, 128).unwrap();
        let c = fa.region.inner.centroid();
        let mut checked = 0;
        for k in 0..100 {
            let theta = k as f64 * 0.0628;
            let r = 0.5 * (fa.region.inner.diameter() + fa.region.outer.diameter()) / 2.0 * 0.5;
            let z = c + Complex64::from_polar(r, theta);
            let g = map.green_value(z, GREEN_HORIZON);
            if g <= 0.0 {
                continue;
            }
            let gr = map.green_value(map.evaluate(z), GREEN_HORIZON);
            assert!((gr - 2.0 * g).abs() < 1e-4 * (1.0 + gr));
            checked += 1;
        }
        assert!(checked > 50);
    }

    #[test]
    fn too_deep_level_rejected() {
        let map = RationalMap::polynomial_from_real(&[4.0, 0.0, 1.0]).unwrap();
        let crit_level = critical_green_level(&map).unwrap();
        match trace_equipotential(&map, crit_level * 0.5, 128) {
            Err(Error::LevelTooDeep { .. }) => {}
            other => panic!("expected LevelTooDeep, got {:?}", other.map(|c| c.len())),
        }
    }
}
