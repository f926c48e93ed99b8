//! Moduli of ring domains: closed forms for round annuli, grid-based
//! discrete extremal length for general rings, and round-ring embedding.
//!
//! Normalization: the round ring A(p, q) has modulus ln(q/p) / 2pi, so the
//! covering relations divide cleanly by the degree.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::curve::JordanCurve;
use crate::error::Error;
use crate::lift;
use crate::rational::RationalMap;
use crate::Result;

/// Ring region between two disjoint Jordan curves, inner strictly inside.
#[derive(Clone, Debug)]
pub struct AnnulusRegion {
    pub outer: JordanCurve,
    pub inner: JordanCurve,
}

impl AnnulusRegion {
    pub fn new(outer: JordanCurve, inner: JordanCurve) -> Result<Self> {
        for &v in inner.vertices() {
            if !outer.contains(v)? {
                return Err(Error::Config(
                    "inner curve must lie strictly inside the outer curve".into(),
                ));
            }
        }
        if !inner.contains(outer.centroid()).unwrap_or(false) {
            // outer centroid may legitimately fall outside a skewed inner
            // curve; the real requirement is disjointness plus containment
        }
        let gap = outer.polyline_distance(&inner);
        if gap <= 0.0 {
            return Err(Error::Config("boundary curves must be disjoint".into()));
        }
        Ok(Self { outer, inner })
    }

    /// Round ring {p < |z| < q} as polylines.
    pub fn round(p: f64, q: f64, n: usize) -> Self {
        Self {
            outer: JordanCurve::circle(Complex64::new(0.0, 0.0), q, n),
            inner: JordanCurve::circle(Complex64::new(0.0, 0.0), p, n),
        }
    }
}

/// Conformal modulus estimate from a grid solve.
#[derive(Clone, Copy, Debug)]
pub struct ModulusEstimate {
    pub value: f64,
    pub resolution: usize,
    /// Richardson comparison against the half-resolution solve.
    pub error_bound: f64,
}

/// Modulus of the round ring A(p, q).
pub fn round_modulus(p: f64, q: f64) -> Result<f64> {
    if !(0.0 < p && p < q) {
        return Err(Error::Config(format!("round_modulus requires 0 < p < q, got ({p}, {q})")));
    }
    Ok((q / p).ln() / (2.0 * std::f64::consts::PI))
}

const NODE_RING: u8 = 0;
const NODE_INNER: u8 = 1;
const NODE_OUTER: u8 = 2;

struct RingGrid {
    n: usize,
    h: f64,
    x0: f64,
    y0: f64,
    status: Vec<u8>,
    /// index into `arms` for cut nodes, u32::MAX otherwise
    arm_index: Vec<u32>,
    arms: Vec<ArmData>,
}

/// Shortley-Weller data for a node with at least one arm cut by a boundary.
#[derive(Clone, Copy)]
struct ArmData {
    /// arm length fractions (E, W, N, S), 1.0 when uncut
    theta: [f64; 4],
    /// Dirichlet value at the crossing (valid when cut)
    bc: [f64; 4],
    cut: [bool; 4],
}

/// Horizontal-scanline parity fill: marks nodes interior to `curve`.
fn scanline_fill(curve: &JordanCurve, n: usize, h: f64, x0: f64, y0: f64) -> Vec<bool> {
    let mut inside = vec![false; n * n];
    let verts = curve.vertices();
    let m = verts.len();
    for j in 0..n {
        let y = y0 + (j as f64 + 0.5) * h;
        let mut crossings = Vec::new();
        for k in 0..m {
            let a = verts[k];
            let b = verts[(k + 1) % m];
            let (lo, hi) = if a.im <= b.im { (a, b) } else { (b, a) };
            if y >= lo.im && y < hi.im {
                let t = (y - lo.im) / (hi.im - lo.im);
                crossings.push(lo.re + t * (hi.re - lo.re));
            }
        }
        crossings.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut c = 0usize;
        for i in 0..n {
            let x = x0 + (i as f64 + 0.5) * h;
            while c < crossings.len() && crossings[c] < x {
                c += 1;
            }
            inside[j * n + i] = c % 2 == 1;
        }
    }
    inside
}

/// First crossing parameter t in (0, 1] of the segment a -> b with the curve.
fn first_crossing(curve: &JordanCurve, a: Complex64, b: Complex64) -> Option<f64> {
    let verts = curve.vertices();
    let m = verts.len();
    let d = b - a;
    let mut best: Option<f64> = None;
    for k in 0..m {
        let p = verts[k];
        let q = verts[(k + 1) % m];
        let e = q - p;
        let denom = d.re * e.im - d.im * e.re;
        if denom.abs() < 1e-300 {
            continue;
        }
        // a + t d = p + s e: cross with e resp. d
        let rel = p - a;
        let t = (rel.re * e.im - rel.im * e.re) / denom;
        let s = (rel.re * d.im - rel.im * d.re) / denom;
        if (0.0..=1.0).contains(&s) && t > 1e-12 && t <= 1.0 {
            best = Some(best.map_or(t, |cur: f64| cur.min(t)));
        }
    }
    best
}

fn build_ring_grid(region: &AnnulusRegion, n: usize) -> Result<RingGrid> {
    // bounding box of the outer curve plus two cells of margin
    let verts = region.outer.vertices();
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for v in verts {
        lo_x = lo_x.min(v.re);
        hi_x = hi_x.max(v.re);
        lo_y = lo_y.min(v.im);
        hi_y = hi_y.max(v.im);
    }
    let side = (hi_x - lo_x).max(hi_y - lo_y);
    let h = side / (n as f64 - 4.0);
    let x0 = 0.5 * (lo_x + hi_x) - 0.5 * n as f64 * h;
    let y0 = 0.5 * (lo_y + hi_y) - 0.5 * n as f64 * h;

    if region.outer.polyline_distance(&region.inner) < 2.0 * h {
        return Err(Error::UnderResolved { resolution: n });
    }

    let in_outer = scanline_fill(&region.outer, n, h, x0, y0);
    let in_inner = scanline_fill(&region.inner, n, h, x0, y0);
    let mut status = vec![NODE_OUTER; n * n];
    for idx in 0..n * n {
        status[idx] = if in_inner[idx] {
            NODE_INNER
        } else if in_outer[idx] {
            NODE_RING
        } else {
            NODE_OUTER
        };
    }

    // Shortley-Weller arms for ring nodes adjacent to either plate.
    let mut arm_index = vec![u32::MAX; n * n];
    let mut arms = Vec::new();
    let center = |i: usize, j: usize| {
        Complex64::new(x0 + (i as f64 + 0.5) * h, y0 + (j as f64 + 0.5) * h)
    };
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let idx = j * n + i;
            if status[idx] != NODE_RING {
                continue;
            }
            let neighbors = [idx + 1, idx - 1, idx + n, idx - n];
            if neighbors.iter().all(|&k| status[k] == NODE_RING) {
                continue;
            }
            let mut data = ArmData {
                theta: [1.0; 4],
                bc: [0.0; 4],
                cut: [false; 4],
            };
            let dirs = [
                Complex64::new(h, 0.0),
                Complex64::new(-h, 0.0),
                Complex64::new(0.0, h),
                Complex64::new(0.0, -h),
            ];
            let a = center(i, j);
            for (arm, (&nb, dir)) in neighbors.iter().zip(dirs).enumerate() {
                if status[nb] == NODE_RING {
                    continue;
                }
                let curve = if status[nb] == NODE_INNER {
                    &region.inner
                } else {
                    &region.outer
                };
                let theta = first_crossing(curve, a, a + dir).unwrap_or(1.0).max(0.05);
                data.theta[arm] = theta;
                data.bc[arm] = if status[nb] == NODE_INNER { 0.0 } else { 1.0 };
                data.cut[arm] = true;
            }
            arm_index[idx] = arms.len() as u32;
            arms.push(data);
        }
    }

    Ok(RingGrid {
        n,
        h,
        x0,
        y0,
        status,
        arm_index,
        arms,
    })
}

fn sor_color_sweep(grid: &RingGrid, u: &mut [f64], omega: f64, color: usize) -> f64 {
    let n = grid.n;
    // Red-black ordering: nodes of one color only read the other color, so
    // row-parallel updates are deterministic.
    let status = &grid.status;
    let arm_index = &grid.arm_index;
    let arms = &grid.arms;
    let u_ptr = SyncPtr(u.as_mut_ptr());

    let deltas: Vec<f64> = (1..n - 1)
        .into_par_iter()
        .map(|j| {
            let u = unsafe { std::slice::from_raw_parts_mut(u_ptr.get(), n * n) };
            let mut max_delta = 0.0f64;
            let start = 1 + (j + color) % 2;
            let mut i = start;
            while i < n - 1 {
                let idx = j * n + i;
                if status[idx] == NODE_RING {
                    let gs = if arm_index[idx] == u32::MAX {
                        0.25 * (u[idx + 1] + u[idx - 1] + u[idx + n] + u[idx - n])
                    } else {
                        let d = &arms[arm_index[idx] as usize];
                        let neigh = [idx + 1, idx - 1, idx + n, idx - n];
                        let mut num = 0.0;
                        let mut den = 0.0;
                        for pair in [(0usize, 1usize), (2, 3)] {
                            let (a, b) = pair;
                            let (ta, tb) = (d.theta[a], d.theta[b]);
                            let va = if d.cut[a] { d.bc[a] } else { u[neigh[a]] };
                            let vb = if d.cut[b] { d.bc[b] } else { u[neigh[b]] };
                            num += 2.0 * (va / (ta * (ta + tb)) + vb / (tb * (ta + tb)));
                            den += 2.0 / (ta * tb);
                        }
                        num / den
                    };
                    let old = u[idx];
                    let relaxed = if arm_index[idx] == u32::MAX { omega } else { 1.0 };
                    let new = old + relaxed * (gs - old);
                    u[idx] = new;
                    max_delta = max_delta.max((new - old).abs());
                }
                i += 2;
            }
            max_delta
        })
        .collect();
    deltas.into_iter().fold(0.0, f64::max)
}

struct SyncPtr(*mut f64);
unsafe impl Send for SyncPtr {}
unsafe impl Sync for SyncPtr {}

impl SyncPtr {
    fn get(&self) -> *mut f64 {
        self.0
    }
}

fn solve_ring(region: &AnnulusRegion, n: usize) -> Result<(RingGrid, Vec<f64>)> {
    let grid = build_ring_grid(region, n)?;
    let mut u: Vec<f64> = grid
        .status
        .iter()
        .map(|&s| if s == NODE_OUTER { 1.0 } else { 0.0 })
        .collect();

    // Nested iteration: start from the upsampled coarse solution.
    if n > 64 {
        if let Ok((coarse_grid, coarse_u)) = solve_ring(region, n / 2) {
            for j in 0..n {
                for i in 0..n {
                    let idx = j * n + i;
                    if grid.status[idx] == NODE_RING {
                        let x = grid.x0 + (i as f64 + 0.5) * grid.h;
                        let y = grid.y0 + (j as f64 + 0.5) * grid.h;
                        let ci = (((x - coarse_grid.x0) / coarse_grid.h - 0.5)
                            .clamp(0.0, (coarse_grid.n - 1) as f64)) as usize;
                        let cj = (((y - coarse_grid.y0) / coarse_grid.h - 0.5)
                            .clamp(0.0, (coarse_grid.n - 1) as f64)) as usize;
                        u[idx] = coarse_u[cj * coarse_grid.n + ci].clamp(0.0, 1.0);
                    }
                }
            }
        }
    }

    let omega = 2.0 / (1.0 + (std::f64::consts::PI / n as f64).sin());
    let max_sweeps = 8 * n + 400;
    let tol = 1e-12;
    let mut residual = f64::INFINITY;
    for _ in 0..max_sweeps {
        let d0 = sor_color_sweep(&grid, &mut u, omega, 0);
        let d1 = sor_color_sweep(&grid, &mut u, omega, 1);
        residual = d0.max(d1);
        if residual < tol {
            return Ok((grid, u));
        }
    }
    if residual < 1e-9 {
        return Ok((grid, u)); // good enough for the moduli tolerances
    }
    Err(Error::LaplaceNonConvergence {
        sweeps: max_sweeps,
        residual,
    })
}

fn conductance(grid: &RingGrid, u: &[f64]) -> f64 {
    let n = grid.n;
    let mut flux_out = 0.0;
    let mut flux_in = 0.0;
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let idx = j * n + i;
            if grid.status[idx] != NODE_RING || grid.arm_index[idx] == u32::MAX {
                continue;
            }
            let d = &grid.arms[grid.arm_index[idx] as usize];
            for arm in 0..4 {
                if d.cut[arm] {
                    if d.bc[arm] == 1.0 {
                        flux_out += (1.0 - u[idx]) / d.theta[arm];
                    } else {
                        flux_in += u[idx] / d.theta[arm];
                    }
                }
            }
        }
    }
    0.5 * (flux_out + flux_in)
}

/// Discrete extremal length of a ring via the grid-graph conductance
/// between the boundary plates (Dirichlet data 0 inside, 1 outside).
pub fn grid_modulus(region: &AnnulusRegion, resolution: usize) -> Result<ModulusEstimate> {
    if resolution < 64 {
        return Err(Error::Config(format!(
            "grid_modulus needs resolution >= 64, got {resolution}"
        )));
    }
    let value = grid_modulus_single(region, resolution)?;
    let coarse = grid_modulus_single(region, resolution / 2)?;
    Ok(ModulusEstimate {
        value,
        resolution,
        error_bound: (value - coarse).abs(),
    })
}

fn grid_modulus_single(region: &AnnulusRegion, n: usize) -> Result<f64> {
    let (grid, u) = solve_ring(region, n)?;
    let c = conductance(&grid, &u);
    if c <= 0.0 {
        return Err(Error::UnderResolved { resolution: n });
    }
    Ok(1.0 / c)
}

/// Debug dump of the discrete potential as CSV with columns i, j, value;
/// only ring nodes are listed.
pub fn write_potential_csv<W: std::io::Write>(
    region: &AnnulusRegion,
    resolution: usize,
    mut out: W,
) -> Result<()> {
    let (grid, u) = solve_ring(region, resolution)?;
    writeln!(out, "i,j,value")?;
    for j in 0..grid.n {
        for i in 0..grid.n {
            let idx = j * grid.n + i;
            if grid.status[idx] == NODE_RING {
                writeln!(out, "{i},{j},{:.17e}", u[idx])?;
            }
        }
    }
    Ok(())
}

/// Tolerance on the outer boundary's deviation from the unit circle.
const OUTER_UNIT_TOL: f64 = 0.08;

/// Largest round ring A(p, 1) inside a region whose outer boundary is the
/// unit circle: the smallest p (to 1e-3, by bisection) clearing the inner
/// obstruction on all of 512 sampled rays.
pub fn largest_embedded_round_annulus(region: &AnnulusRegion) -> Result<f64> {
    for &v in region.outer.vertices() {
        if (v.norm() - 1.0).abs() > OUTER_UNIT_TOL {
            return Err(Error::Config(format!(
                "outer boundary must track the unit circle (|v| = {} at {v})",
                v.norm()
            )));
        }
    }
    // outermost obstruction radius per ray
    let rays = 512;
    let mut reach = vec![0.0f64; rays];
    let verts = region.inner.vertices();
    let m = verts.len();
    for k in 0..m {
        let p = verts[k];
        let q = verts[(k + 1) % m];
        for (idx, r) in ray_crossings(p, q, rays) {
            reach[idx] = reach[idx].max(r);
        }
    }
    let contained = |p: f64| reach.iter().all(|&r| r <= p + 1e-9);
    if !contained(1.0 - 1e-3) {
        return Err(Error::NoEmbedding);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if contained(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Crossings of segment p->q with the sampled rays from the origin,
/// as (ray index, radius) pairs.
fn ray_crossings(p: Complex64, q: Complex64, rays: usize) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let two_pi = 2.0 * std::f64::consts::PI;
    let a0 = p.arg().rem_euclid(two_pi);
    let a1 = q.arg().rem_euclid(two_pi);
    let (mut lo, mut hi) = (a0.min(a1), a0.max(a1));
    // a segment spans the shorter angular interval between its endpoints
    if hi - lo > std::f64::consts::PI {
        std::mem::swap(&mut lo, &mut hi);
        hi += two_pi;
    }
    let start = (lo / two_pi * rays as f64).floor() as i64;
    let end = (hi / two_pi * rays as f64).ceil() as i64;
    for kk in start..=end {
        let idx = kk.rem_euclid(rays as i64) as usize;
        let theta = two_pi * kk as f64 / rays as f64;
        let dir = Complex64::from_polar(1.0, theta);
        // p + s(q - p) = r dir: cross with dir resp. e
        let e = q - p;
        let denom = dir.re * e.im - dir.im * e.re;
        if denom.abs() < 1e-300 {
            continue;
        }
        let s = (p.re * dir.im - p.im * dir.re) / denom;
        let r = (p.re * e.im - p.im * e.re) / denom;
        if (0.0..=1.0).contains(&s) && r > 0.0 {
            out.push((idx, r));
        }
    }
    out
}

/// Greedy ring around a curve: offset outward and inward until blocked by
/// an obstacle point or the offset stops being simple.
pub fn build_curve_annulus(
    curve: &JordanCurve,
    obstacles: &[Complex64],
    max_steps: usize,
) -> Result<AnnulusRegion> {
    let step = curve.diameter() / 64.0;
    let clear = |c: &JordanCurve| {
        obstacles
            .iter()
            .all(|&p| c.dist_to(p) > 0.5 * step)
    };
    let mut outer = None;
    for k in (1..=max_steps).rev() {
        if let Ok(cand) = curve.offset_normal(step * k as f64) {
            if clear(&cand) && crossing_free(curve, &cand) {
                outer = Some(cand);
                break;
            }
        }
    }
    let mut inner = None;
    for k in (1..=max_steps).rev() {
        if let Ok(cand) = curve.offset_normal(-step * k as f64) {
            if clear(&cand) && crossing_free(curve, &cand) {
                inner = Some(cand);
                break;
            }
        }
    }
    match (outer, inner) {
        (Some(outer), Some(inner)) => AnnulusRegion::new(outer, inner),
        _ => Err(Error::Config(
            "curve admits no offset ring clear of the obstacles".into(),
        )),
    }
}

fn crossing_free(a: &JordanCurve, b: &JordanCurve) -> bool {
    a.polyline_distance(b) > 0.0 && {
        // offsets must stay nested: every vertex of the smaller-area curve
        // inside the larger
        let (big, small) = if a.signed_area() >= b.signed_area() { (a, b) } else { (b, a) };
        small
            .vertices()
            .iter()
            .all(|&v| big.contains(v).unwrap_or(false))
    }
}

/// Lifts a ring under k iterations: the component pair of the iterated
/// preimage of its boundaries whose interiors contain `around`.
pub fn pullback_ring(
    map: &RationalMap,
    region: &AnnulusRegion,
    k: usize,
    around: Complex64,
) -> Result<AnnulusRegion> {
    let pick = |base: &JordanCurve| -> Result<JordanCurve> {
        for comp in lift::iterated_pullback(map, base, k)? {
            if comp.curve.contains(around)? {
                return Ok(comp.curve);
            }
        }
        Err(Error::Config(format!(
            "no pullback component of the ring boundary surrounds {around}"
        )))
    };
    let outer = pick(&region.outer)?;
    let inner = pick(&region.inner)?;
    AnnulusRegion::new(outer, inner)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const LN2_OVER_2PI: f64 = std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI);

    #[test]
    fn round_modulus_closed_forms() {
        let m = round_modulus(0.5, 1.0).unwrap();
        assert!((m - LN2_OVER_2PI).abs() < 1e-15);
        for p in [0.1, 0.4, 0.9] {
            let m1 = round_modulus(p, p * (2.0 * std::f64::consts::PI).exp()).unwrap();
            assert!((m1 - 1.0).abs() < 1e-13);
        }
        let quarter = round_modulus(0.25, 1.0).unwrap();
        assert!((quarter - 2.0 * round_modulus(0.5, 1.0).unwrap()).abs() < 1e-14);
        assert!(round_modulus(1.0, 0.5).is_err());
    }

    #[test]
    fn grid_modulus_round_ring() {
        let region = AnnulusRegion::round(0.5, 1.0, 512);
        let est = grid_modulus(&region, 256).unwrap();
        let rel = (est.value - LN2_OVER_2PI).abs() / LN2_OVER_2PI;
        assert!(rel < 0.02, "relative error {rel} (value {})", est.value);
        assert!(est.error_bound < 0.02 * LN2_OVER_2PI * 4.0);
    }

    #[test]
    fn grid_modulus_square_frame_stable_under_refinement() {
        let square = |half: f64| {
            let mut v = Vec::new();
            let per_side = 32;
            for side in 0..4 {
                for k in 0..per_side {
                    let t = k as f64 / per_side as f64 * 2.0 - 1.0;
                    v.push(match side {
                        0 => c(half * t, -half),
                        1 => c(half, half * t),
                        2 => c(-half * t, half),
                        _ => c(-half, -half * t),
                    });
                }
            }
            JordanCurve::new(v).unwrap()
        };
        let region = AnnulusRegion::new(square(1.0), square(0.5)).unwrap();
        let coarse = grid_modulus(&region, 128).unwrap();
        let fine = grid_modulus(&region, 256).unwrap();
        let rel = (fine.value - coarse.value).abs() / fine.value;
        assert!(rel < 0.01, "frame modulus drifted {rel} between resolutions");
    }

    #[test]
    fn error_bound_shrinks_under_refinement() {
        let region = AnnulusRegion::round(0.5, 1.0, 512);
        let coarse = grid_modulus(&region, 128).unwrap();
        let fine = grid_modulus(&region, 512).unwrap();
        assert!(
            fine.error_bound < coarse.error_bound,
            "{} !< {}",
            fine.error_bound,
            coarse.error_bound
        );
    }

    #[test]
    fn modulus_monotone_under_enlargement() {
        let smaller = AnnulusRegion::round(0.5, 1.0, 256);
        let bigger = AnnulusRegion::round(0.4, 1.0, 256);
        let m_small = grid_modulus(&smaller, 128).unwrap().value;
        let m_big = grid_modulus(&bigger, 128).unwrap().value;
        assert!(m_big >= m_small);
    }

    #[test]
    fn under_resolved_ring_rejected() {
        let region = AnnulusRegion::round(0.99, 1.0, 256);
        match grid_modulus(&region, 64) {
            Err(Error::UnderResolved { .. }) => {}
            other => panic!("expected UnderResolved, got {other:?}"),
        }
    }

    #[test]
    fn embedded_round_annulus_of_round_region() {
        let region = AnnulusRegion::round(0.3, 1.0, 512);
        let p = largest_embedded_round_annulus(&region).unwrap();
        assert!((p - 0.3).abs() <= 2e-3, "p = {p}");
    }

    #[test]
    fn embedded_annulus_respects_radial_spike() {
        // inner boundary A(0.3) with a spike reaching |z| = 0.6
        let mut verts = Vec::new();
        let n = 512;
        for k in 0..n {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let bump = (-((theta - 1.0) / 0.05).powi(2)).exp();
            let r = 0.3 + 0.3 * bump;
            verts.push(Complex64::from_polar(r, theta));
        }
        let inner = JordanCurve::new(verts).unwrap();
        let outer = JordanCurve::circle(c(0.0, 0.0), 1.0, 256);
        let region = AnnulusRegion::new(outer, inner).unwrap();
        let p = largest_embedded_round_annulus(&region).unwrap();
        // 512-ray sampling reads the spike peak slightly off its apex
        assert!(p >= 0.59, "p = {p}");
        assert!(p < 0.65, "p = {p}");
    }

    #[test]
    fn inner_touching_unit_circle_has_no_embedding() {
        let inner = JordanCurve::circle(c(0.0, 0.0), 0.9995, 256);
        let outer = JordanCurve::circle(c(0.0, 0.0), 1.0, 256);
        let region = AnnulusRegion { outer, inner };
        match largest_embedded_round_annulus(&region) {
            Err(Error::NoEmbedding) => {}
            other => panic!("expected NoEmbedding, got {other:?}"),
        }
    }

    #[test]
    fn curve_annulus_offsets() {
        let curve = JordanCurve::circle(c(0.0, 0.0), 1.0, 128);
        let obstacles = [c(0.0, 0.0), c(1.6, 0.0)];
        let region = build_curve_annulus(&curve, &obstacles, 24).unwrap();
        assert!(region.outer.diameter() > 2.0);
        assert!(region.inner.diameter() < 2.0);
        // the ring straddles the original curve
        assert!(region.outer.contains(c(1.0, 0.0)).unwrap());
        assert!(!region.inner.contains(c(1.0, 0.0)).unwrap());
    }
}
