//! Property tests for the core geometric invariants.

use num_complex::Complex64;
use proptest::prelude::*;

use qcsurgery::curve::{quasihyperbolic_length, JordanCurve, PunctureSet};
use qcsurgery::poly::Polynomial;
use qcsurgery::rational::RationalMap;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Independent crossing-number oracle for curve membership.
fn raycast_contains(curve: &JordanCurve, z: Complex64) -> bool {
    let verts = curve.vertices();
    let n = verts.len();
    let mut crossings = 0;
    for k in 0..n {
        let a = verts[k];
        let b = verts[(k + 1) % n];
        let (lo, hi) = if a.im <= b.im { (a, b) } else { (b, a) };
        if z.im >= lo.im && z.im < hi.im {
            let t = (z.im - lo.im) / (hi.im - lo.im);
            if lo.re + t * (hi.re - lo.re) > z.re {
                crossings += 1;
            }
        }
    }
    crossings % 2 == 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn preimages_forward_evaluate_roundtrip(
        c0 in -2.0f64..2.0,
        c1 in -2.0f64..2.0,
        c2 in 0.3f64..2.0,
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
    ) {
        let map = RationalMap::from_polynomial(
            Polynomial::from_real(&[c0, c1, 0.0, c2]).unwrap()
        ).unwrap();
        let w = map.evaluate(c(re, im));
        prop_assume!(w.norm() < 1e6);
        for z in map.preimages(w).unwrap() {
            let back = map.evaluate(z);
            prop_assert!((back - w).norm() <= 1e-9 * (1.0 + w.norm()),
                "preimage {z} maps to {back}, wanted {w}");
        }
    }

    #[test]
    fn winding_membership_matches_raycast(
        lobes in 2usize..6,
        amp in 0.1f64..0.45,
        phase in 0.0f64..std::f64::consts::TAU,
        px in -2.0f64..2.0,
        py in -2.0f64..2.0,
    ) {
        let verts: Vec<Complex64> = (0..96)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 96.0;
                Complex64::from_polar(1.0 + amp * (lobes as f64 * theta + phase).sin(), theta)
            })
            .collect();
        let curve = JordanCurve::new(verts).unwrap();
        let z = c(px, py);
        prop_assume!(curve.dist_to(z) > 1e-3);
        prop_assert_eq!(curve.contains(z).unwrap(), raycast_contains(&curve, z));
    }

    #[test]
    fn quasihyperbolic_length_is_rigid_motion_invariant(
        radius in 0.2f64..2.0,
        shift_re in -5.0f64..5.0,
        shift_im in -5.0f64..5.0,
        rot in 0.0f64..std::f64::consts::TAU,
        puncture_r in 0.0f64..0.4,
    ) {
        let curve = JordanCurve::circle(c(0.1, -0.2), radius, 128);
        let punctures = PunctureSet::new(vec![c(puncture_r, 0.0), c(0.0, -3.0)], 0);
        prop_assume!(curve.vertices().iter()
            .all(|v| punctures.distance_to(*v) > 1e-3));
        let base = quasihyperbolic_length(&curve, &punctures).unwrap();

        let shift = c(shift_re, shift_im);
        let moved = curve.translated(shift);
        let moved_punctures = PunctureSet::new(
            punctures.points.iter().map(|p| p + shift).collect(), 0);
        let translated = quasihyperbolic_length(&moved, &moved_punctures).unwrap();
        prop_assert!((translated - base).abs() <= 1e-9 * base);

        let turner = Complex64::from_polar(1.0, rot);
        let rotated = curve.rotated(rot);
        let rotated_punctures = PunctureSet::new(
            punctures.points.iter().map(|p| p * turner).collect(), 0);
        let spun = quasihyperbolic_length(&rotated, &rotated_punctures).unwrap();
        prop_assert!((spun - base).abs() <= 1e-8 * base);
    }

    #[test]
    fn escape_census_monotone_in_horizon(
        coeff in -2.0f64..2.0,
        h1 in 1usize..40,
        h2 in 40usize..400,
    ) {
        let map = RationalMap::polynomial_from_real(&[coeff, 0.0, 1.0]).unwrap();
        let s1 = map.escape_census(h1, 1e4).unwrap().count;
        let s2 = map.escape_census(h2, 1e4).unwrap().count;
        prop_assert!(s1 <= s2);
    }
}
