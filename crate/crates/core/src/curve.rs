//! Jordan curves as closed polylines: membership, linkage, and length
//! estimates against a truncated puncture set.

use num_complex::Complex64;

use crate::error::Error;
use crate::rational::RationalMap;
use crate::Result;

/// Minimum vertex count for a usable polyline curve.
pub const MIN_VERTICES: usize = 16;

/// Closed simple polyline, positively oriented. The first vertex is not
/// repeated; the closing edge is implicit.
#[derive(Clone, Debug)]
pub struct JordanCurve {
    vertices: Vec<Complex64>,
}

impl JordanCurve {
    /// Builds a curve, enforcing vertex count and simplicity, and orienting
    /// it positively.
    pub fn new(vertices: Vec<Complex64>) -> Result<Self> {
        let curve = Self::new_unchecked(vertices)?;
        curve.verify_simple()?;
        Ok(curve)
    }

    /// Builds a curve without the O(n^2) simplicity check. Used by lifting
    /// and contour tracing, whose outputs are simple by construction.
    pub fn new_unchecked(mut vertices: Vec<Complex64>) -> Result<Self> {
        if vertices.len() >= 2 {
            let first = vertices[0];
            let last = *vertices.last().unwrap();
            let scale = vertices.iter().map(|v| (*v - first).norm()).fold(0.0, f64::max);
            if (last - first).norm() < 1e-12 * scale.max(1e-300) {
                vertices.pop();
            }
        }
        if vertices.len() < MIN_VERTICES {
            return Err(Error::TooFewVertices {
                min: MIN_VERTICES,
                got: vertices.len(),
            });
        }
        let mut curve = Self { vertices };
        if curve.signed_area() < 0.0 {
            curve.vertices.reverse();
        }
        Ok(curve)
    }

    /// Regular n-gon approximating a circle.
    pub fn circle(center: Complex64, radius: f64, n: usize) -> Self {
        let vertices = (0..n)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                center + Complex64::from_polar(radius, theta)
            })
            .collect();
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge(&self, k: usize) -> (Complex64, Complex64) {
        let n = self.vertices.len();
        (self.vertices[k % n], self.vertices[(k + 1) % n])
    }

    pub fn centroid(&self) -> Complex64 {
        self.vertices.iter().sum::<Complex64>() / self.vertices.len() as f64
    }

    pub fn diameter(&self) -> f64 {
        let c = self.centroid();
        2.0 * self
            .vertices
            .iter()
            .map(|v| (*v - c).norm())
            .fold(0.0, f64::max)
    }

    pub fn euclidean_length(&self) -> f64 {
        (0..self.vertices.len())
            .map(|k| {
                let (a, b) = self.edge(k);
                (b - a).norm()
            })
            .sum()
    }

    /// Shoelace area; positive for positive orientation.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = 0.0;
        for k in 0..n {
            let a = self.vertices[k];
            let b = self.vertices[(k + 1) % n];
            acc += a.re * b.im - b.re * a.im;
        }
        0.5 * acc
    }

    /// Pairwise segment-intersection scan.
    pub fn verify_simple(&self) -> Result<()> {
        let n = self.vertices.len();
        let tol = 1e-12 * self.diameter().max(1e-300);
        for i in 0..n {
            let (a1, a2) = self.edge(i);
            for j in (i + 1)..n {
                // adjacent edges share an endpoint by construction
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (b1, b2) = self.edge(j);
                if segments_intersect(a1, a2, b1, b2, tol) {
                    return Err(Error::SelfIntersection { i, j });
                }
            }
        }
        Ok(())
    }

    pub fn dist_to(&self, z: Complex64) -> f64 {
        (0..self.vertices.len())
            .map(|k| {
                let (a, b) = self.edge(k);
                point_segment_distance(z, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum vertex-to-edge distance between two polylines.
    pub fn polyline_distance(&self, other: &JordanCurve) -> f64 {
        let mut d = f64::INFINITY;
        for &v in &self.vertices {
            d = d.min(other.dist_to(v));
        }
        for &v in &other.vertices {
            d = d.min(self.dist_to(v));
        }
        d
    }

    /// Integer winding number about `z` by summed edge angles.
    pub fn winding_number(&self, z: Complex64) -> i32 {
        let n = self.vertices.len();
        let mut total = 0.0;
        for k in 0..n {
            let a = self.vertices[k] - z;
            let b = self.vertices[(k + 1) % n] - z;
            let cross = a.re * b.im - a.im * b.re;
            let dot = a.re * b.re + a.im * b.im;
            total += cross.atan2(dot);
        }
        (total / (2.0 * std::f64::consts::PI)).round() as i32
    }

    /// True iff the winding number about `z` is exactly 1. Points within
    /// tolerance of the polyline are errors, never members.
    pub fn contains(&self, z: Complex64) -> Result<bool> {
        let tol = 1e-9 * self.diameter().max(1e-300);
        if self.dist_to(z) <= tol {
            return Err(Error::AmbiguousPoint);
        }
        Ok(self.winding_number(z) == 1)
    }

    /// True iff some point of `p_points` lies in the interior.
    pub fn is_linked(&self, p_points: &[Complex64]) -> Result<bool> {
        let mut linked = false;
        for &p in p_points {
            if self.contains(p)? {
                linked = true;
            }
        }
        Ok(linked)
    }

    /// Doubles the vertex count by edge-midpoint insertion.
    pub fn refined(&self) -> JordanCurve {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(2 * n);
        for k in 0..n {
            let (a, b) = self.edge(k);
            out.push(a);
            out.push(0.5 * (a + b));
        }
        JordanCurve { vertices: out }
    }

    /// Offsets every vertex along the outward vertex normal; positive
    /// `delta` grows the curve. The result is only validated for simplicity.
    pub fn offset_normal(&self, delta: f64) -> Result<JordanCurve> {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let prev = self.vertices[(k + n - 1) % n];
            let cur = self.vertices[k];
            let next = self.vertices[(k + 1) % n];
            let t1 = (cur - prev) / (cur - prev).norm().max(1e-300);
            let t2 = (next - cur) / (next - cur).norm().max(1e-300);
            let t = t1 + t2;
            let t = t / t.norm().max(1e-300);
            // outward normal of a positively oriented curve: rotate tangent by -pi/2
            let normal = Complex64::new(t.im, -t.re);
            out.push(cur + normal * delta);
        }
        let curve = JordanCurve { vertices: out };
        curve.verify_simple()?;
        if curve.signed_area() <= 0.0 {
            return Err(Error::SelfIntersection { i: 0, j: 0 });
        }
        Ok(curve)
    }

    pub fn translated(&self, by: Complex64) -> JordanCurve {
        JordanCurve {
            vertices: self.vertices.iter().map(|v| v + by).collect(),
        }
    }

    pub fn rotated(&self, phase: f64) -> JordanCurve {
        let rot = Complex64::from_polar(1.0, phase);
        JordanCurve {
            vertices: self.vertices.iter().map(|v| v * rot).collect(),
        }
    }

    pub fn mapped(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Result<JordanCurve> {
        JordanCurve::new_unchecked(self.vertices.iter().map(|&v| f(v)).collect())
    }
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn segments_intersect(a1: Complex64, a2: Complex64, b1: Complex64, b2: Complex64, tol: f64) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
    {
        return true;
    }
    // near-degenerate overlaps count as intersections
    let close = |p: Complex64, q1: Complex64, q2: Complex64| point_segment_distance(p, q1, q2) <= tol;
    (d1.abs() <= tol && close(a1, b1, b2))
        || (d2.abs() <= tol && close(a2, b1, b2))
        || (d3.abs() <= tol && close(b1, a1, a2))
        || (d4.abs() <= tol && close(b2, a1, a2))
}

pub(crate) fn point_segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a).re * ab.re + (z - a).im * ab.im) / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

/// Finite stand-in for the boundary of the dynamical surface: forward
/// critical-orbit samples and their preimages down to `depth` levels.
#[derive(Clone, Debug)]
pub struct PunctureSet {
    pub points: Vec<Complex64>,
    pub depth: usize,
}

impl PunctureSet {
    pub fn new(points: Vec<Complex64>, depth: usize) -> Self {
        Self { points, depth }
    }

    /// Builds the truncated puncture set of a map: postcritical samples to
    /// `forward_depth`, then all preimages up to `backward_depth` levels.
    pub fn truncated(
        map: &RationalMap,
        forward_depth: usize,
        backward_depth: usize,
        horizon: usize,
        escape_radius: f64,
    ) -> Result<Self> {
        let (pc, _) = map.postcritical_sample(forward_depth, horizon, escape_radius)?;
        let mut layer = pc.clone();
        let mut all = pc;
        for _ in 0..backward_depth {
            let mut next = Vec::new();
            for &w in &layer {
                for z in map.distinct_preimages(w)? {
                    if !all.iter().any(|p| (*p - z).norm() < 1e-9 * (1.0 + z.norm())) {
                        all.push(z);
                        next.push(z);
                    }
                }
            }
            layer = next;
            if layer.is_empty() {
                break;
            }
        }
        Ok(Self {
            points: all,
            depth: backward_depth,
        })
    }

    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.points
            .iter()
            .map(|p| (*p - z).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Line integral of |dz| / dist(z, punctures) along the polyline,
/// trapezoid rule per segment.
pub fn quasihyperbolic_length(curve: &JordanCurve, punctures: &PunctureSet) -> Result<f64> {
    assert!(!punctures.points.is_empty(), "puncture set must be nonempty");
    let n = curve.len();
    let mut densities = Vec::with_capacity(n);
    for &v in curve.vertices() {
        let d = punctures.distance_to(v);
        if d <= 1e-12 * (1.0 + v.norm()) {
            return Err(Error::SingularMetric { dist: d });
        }
        densities.push(1.0 / d);
    }
    let mut total = 0.0;
    for k in 0..n {
        let (a, b) = curve.edge(k);
        let rho = 0.5 * (densities[k] + densities[(k + 1) % n]);
        total += (b - a).norm() * rho;
    }
    Ok(total)
}

/// Length of a polyline in the exact hyperbolic metric of the round
/// annulus {r1 < |z| < r2}.
pub fn hyperbolic_length_round_annulus(curve: &JordanCurve, r1: f64, r2: f64) -> Result<f64> {
    assert!(0.0 < r1 && r1 < r2);
    let ell = (r2 / r1).ln();
    let density = |z: Complex64| -> Result<f64> {
        let r = z.norm();
        if r <= r1 || r >= r2 {
            return Err(Error::SingularMetric {
                dist: (r - r1).abs().min((r - r2).abs()),
            });
        }
        let u = (r / r1).ln() / ell;
        Ok(std::f64::consts::PI / (ell * r * (std::f64::consts::PI * u).sin()))
    };
    let n = curve.len();
    let mut total = 0.0;
    for k in 0..n {
        let (a, b) = curve.edge(k);
        total += (b - a).norm() * 0.5 * (density(a)? + density(b)?);
    }
    Ok(total)
}

/// Writes a curve as CSV with columns re, im; the closing edge is implicit.
pub fn write_curve_csv<W: std::io::Write>(curve: &JordanCurve, mut out: W) -> std::io::Result<()> {
    writeln!(out, "re,im")?;
    for v in curve.vertices() {
        writeln!(out, "{:.17e},{:.17e}", v.re, v.im)?;
    }
    Ok(())
}

/// Reads a curve from CSV with columns re, im; a leading header row is skipped.
pub fn read_curve_csv<R: std::io::BufRead>(input: R) -> Result<JordanCurve> {
    let mut vertices = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split(',');
        let re = parts.next().map(str::trim).unwrap_or("");
        let im = parts.next().map(str::trim).unwrap_or("");
        match (re.parse::<f64>(), im.parse::<f64>()) {
            (Ok(re), Ok(im)) => vertices.push(Complex64::new(re, im)),
            _ if lineno == 0 => continue, // header row
            _ => {
                return Err(Error::Config(format!(
                    "curve CSV line {} is not `re,im`: {trimmed}",
                    lineno + 1
                )))
            }
        }
    }
    JordanCurve::new(vertices)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent crossing-number oracle (horizontal ray to +infinity).
    fn raycast_contains(curve: &JordanCurve, z: Complex64) -> bool {
        let n = curve.len();
        let mut crossings = 0;
        for k in 0..n {
            let (a, b) = curve.edge(k);
            let (lo, hi) = if a.im <= b.im { (a, b) } else { (b, a) };
            if z.im >= lo.im && z.im < hi.im {
                let t = (z.im - lo.im) / (hi.im - lo.im);
                let x = lo.re + t * (hi.re - lo.re);
                if x > z.re {
                    crossings += 1;
                }
            }
        }
        crossings % 2 == 1
    }

    #[test]
    fn unit_circle_membership() {
        let curve = JordanCurve::circle(c(0.0, 0.0), 1.0, 64);
        assert!(curve.contains(c(0.0, 0.0)).unwrap());
        assert!(!curve.contains(c(2.0, 0.0)).unwrap());
    }

    #[test]
    fn point_on_curve_is_ambiguous() {
        let curve = JordanCurve::circle(c(0.0, 0.0), 1.0, 64);
        let on_curve = curve.vertices()[5];
        match curve.contains(on_curve) {
            Err(Error::AmbiguousPoint) => {}
            other => panic!("expected AmbiguousPoint, got {other:?}"),
        }
    }

    #[test]
    fn contains_agrees_with_raycast_on_star_polygons() {
        // deterministic pseudo-random star-shaped polygons and probe points
        let mut state = 0xabcdef12345u64;
        let mut rnd = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut checked = 0usize;
        for _ in 0..20 {
            let lobes = 2 + (rnd() * 5.0) as usize;
            let amp = 0.2 + 0.3 * rnd();
            let phase = rnd() * std::f64::consts::TAU;
            let verts: Vec<Complex64> = (0..96)
                .map(|k| {
                    let theta = 2.0 * std::f64::consts::PI * k as f64 / 96.0;
                    let r = 1.0 + amp * (lobes as f64 * theta + phase).sin();
                    Complex64::from_polar(r, theta)
                })
                .collect();
            let curve = JordanCurve::new(verts).unwrap();
            for _ in 0..500 {
                let z = c(rnd() * 4.0 - 2.0, rnd() * 4.0 - 2.0);
                if curve.dist_to(z) < 1e-3 {
                    continue;
                }
                assert_eq!(curve.contains(z).unwrap(), raycast_contains(&curve, z), "z = {z}");
                checked += 1;
            }
        }
        assert!(checked > 8000);
    }

    #[test]
    fn linkage() {
        let curve = JordanCurve::circle(c(0.0, 0.0), 1.0, 64);
        assert!(curve.is_linked(&[c(0.5, 0.0)]).unwrap());
        assert!(!curve.is_linked(&[c(3.0, 0.0), c(0.0, 4.0)]).unwrap());
        assert!(!curve.is_linked(&[]).unwrap());
    }

    #[test]
    fn self_intersection_detected() {
        // bowtie on 16 vertices
        let mut verts = Vec::new();
        for k in 0..8 {
            let t = k as f64 / 8.0;
            verts.push(c(-1.0 + 2.0 * t, -1.0 + 2.0 * t));
        }
        for k in 0..8 {
            let t = k as f64 / 8.0;
            verts.push(c(1.0 - 2.0 * t, -1.0 + 2.0 * t));
        }
        assert!(JordanCurve::new(verts).is_err());
    }

    #[test]
    fn quasihyperbolic_circle_about_origin_is_two_pi() {
        let punctures = PunctureSet::new(vec![c(0.0, 0.0)], 0);
        for r in [0.25, 1.0, 7.0] {
            let curve = JordanCurve::circle(c(0.0, 0.0), r, 256);
            let len = quasihyperbolic_length(&curve, &punctures).unwrap();
            assert!(
                (len - 2.0 * std::f64::consts::PI).abs() < 1e-3,
                "r = {r}: len = {len}"
            );
        }
    }

    #[test]
    fn quasihyperbolic_two_puncture_bounds() {
        let punctures = PunctureSet::new(vec![c(0.0, 0.0), c(3.0, 0.0)], 0);
        let curve = JordanCurve::circle(c(0.0, 0.0), 1.0, 256);
        let len = quasihyperbolic_length(&curve, &punctures).unwrap();
        // density is between 1/2 (farthest) and 1/min-dist pointwise
        let lower = 2.0 * std::f64::consts::PI * 0.5;
        let upper = 2.0 * std::f64::consts::PI * 1.0 * 1.001;
        assert!(len > lower && len < upper, "len = {len}");
    }

    #[test]
    fn quasihyperbolic_monotone_in_puncture_distance() {
        let curve = JordanCurve::circle(c(0.0, 0.0), 1.0, 128);
        let mut last = f64::INFINITY;
        for scale in [2.0, 4.0, 8.0, 16.0] {
            let punctures = PunctureSet::new(vec![c(scale, 0.0)], 0);
            let len = quasihyperbolic_length(&curve, &punctures).unwrap();
            assert!(len < last, "scale {scale}: {len} not < {last}");
            last = len;
        }
    }

    #[test]
    fn quasihyperbolic_rigid_motion_invariance() {
        let curve = JordanCurve::circle(c(0.3, -0.2), 1.0, 128);
        let punctures = PunctureSet::new(vec![c(0.1, 0.05), c(2.0, 1.0)], 0);
        let base = quasihyperbolic_length(&curve, &punctures).unwrap();

        let shift = c(11.0, -4.5);
        let moved = curve.translated(shift);
        let moved_punctures =
            PunctureSet::new(punctures.points.iter().map(|p| p + shift).collect(), 0);
        let translated = quasihyperbolic_length(&moved, &moved_punctures).unwrap();
        assert!((base - translated).abs() < 1e-12 * base);

        let rot = curve.rotated(1.234);
        let rot_punctures = PunctureSet::new(
            punctures
                .points
                .iter()
                .map(|p| p * Complex64::from_polar(1.0, 1.234))
                .collect(),
            0,
        );
        let rotated = quasihyperbolic_length(&rot, &rot_punctures).unwrap();
        assert!((base - rotated).abs() < 1e-9 * base);
    }

    #[test]
    fn singular_metric_on_touching_puncture() {
        let curve = JordanCurve::circle(c(0.0, 0.0), 1.0, 64);
        let punctures = PunctureSet::new(vec![curve.vertices()[0]], 0);
        match quasihyperbolic_length(&curve, &punctures) {
            Err(Error::SingularMetric { .. }) => {}
            other => panic!("expected SingularMetric, got {other:?}"),
        }
    }

    #[test]
    fn offset_grows_and_shrinks() {
        let curve = JordanCurve::circle(c(0.0, 0.0), 1.0, 128);
        let grown = curve.offset_normal(0.2).unwrap();
        let shrunk = curve.offset_normal(-0.2).unwrap();
        assert!((grown.diameter() - 2.4).abs() < 1e-2);
        assert!((shrunk.diameter() - 1.6).abs() < 1e-2);
    }

    #[test]
    fn hyperbolic_round_annulus_core_curve() {
        // core circle of A(r1, r2): length 2 pi^2 / log(r2/r1)
        let r1: f64 = 0.25;
        let r2: f64 = 4.0;
        let core = (r1 * r2).sqrt();
        let curve = JordanCurve::circle(c(0.0, 0.0), core, 512);
        let len = hyperbolic_length_round_annulus(&curve, r1, r2).unwrap();
        let expected = 2.0 * std::f64::consts::PI.powi(2) / (r2 / r1).ln();
        assert!((len - expected).abs() < 1e-3 * expected);
    }

    #[test]
    fn curve_csv_roundtrip() {
        let curve = JordanCurve::circle(c(0.5, -0.25), 2.0, 64);
        let mut buf = Vec::new();
        write_curve_csv(&curve, &mut buf).unwrap();
        let back = read_curve_csv(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(back.len(), curve.len());
        for (a, b) in curve.vertices().iter().zip(back.vertices()) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
