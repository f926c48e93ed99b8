//! The end-to-end instability experiment: pick a linked pullback curve,
//! place the surgery, build and verify the invariant structure, straighten,
//! and compare escape censuses.

use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::fundamental::{critical_green_level, fundamental_annulus, FundamentalAnnulus};
use super::misiurewicz::{find_misiurewicz_cubic, CubicParams};
use crate::curve::{quasihyperbolic_length, JordanCurve, PunctureSet};
use crate::error::Error;
use crate::grid::GridSpec;
use crate::linkage::{linked_pullback_search_with, intersection_census, write_certificate, LinkageCertificate};
use crate::lift::LiftOptions;
use crate::moduli::{largest_embedded_round_annulus, AnnulusRegion};
use crate::mrmt::{solve_mrmt, straighten_with, write_qcmap};
use crate::rational::RationalMap;
use crate::surgery::{build_blend, build_quasiregular, invariant_beltrami, verify_invariance, SurgeryConfig};
use crate::Result;

const GREEN_HORIZON: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentOutcome {
    /// every requested depth certified the escape-count increase
    Success,
    /// the linkage hypothesis failed (no linked pullback curves)
    NotApplicable,
    /// some depth failed; the bundle records per-stage errors
    Partial,
}

/// Per-depth record of the pipeline.
#[derive(Clone, Debug)]
pub struct DepthReport {
    pub depth: usize,
    pub curve_diameter: f64,
    pub curve_length: f64,
    pub covering_degree: usize,
    pub n_alpha: usize,
    pub safe_index: i64,
    pub p_embedding: f64,
    pub p: f64,
    pub blend_sup: f64,
    pub sigma_sup: f64,
    pub invariance_fraction: f64,
    pub solve_residual: f64,
    pub solve_iterations: usize,
    pub fit_residual: f64,
    pub fit_degree: usize,
    pub s_after: usize,
    pub surgery_displacement: f64,
    pub success: bool,
    pub error: Option<(String, String)>,
}

impl DepthReport {
    fn failed(depth: usize, stage: &str, message: String) -> Self {
        Self {
            depth,
            curve_diameter: 0.0,
            curve_length: 0.0,
            covering_degree: 0,
            n_alpha: 0,
            safe_index: 0,
            p_embedding: 0.0,
            p: 0.0,
            blend_sup: 0.0,
            sigma_sup: 0.0,
            invariance_fraction: 0.0,
            solve_residual: 0.0,
            solve_iterations: 0,
            fit_residual: 0.0,
            fit_degree: 0,
            s_after: 0,
            surgery_displacement: 0.0,
            success: false,
            error: Some((stage.to_string(), message)),
        }
    }
}

/// Everything the experiment produced, ready for a deterministic report.
#[derive(Clone, Debug)]
pub struct ReportBundle {
    pub map_label: String,
    pub config_echo: String,
    pub s_before: usize,
    pub outcome: ExperimentOutcome,
    pub depths: Vec<DepthReport>,
    pub certificate: Option<LinkageCertificate>,
    pub files: Vec<PathBuf>,
}

impl ReportBundle {
    /// Deterministic report text: fixed float formatting, no clocks.
    pub fn report_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# instability experiment report");
        let _ = writeln!(
            out,
            "# presets assume a totally disconnected Julia set; this is a"
        );
        let _ = writeln!(
            out,
            "# working hypothesis of the construction, not certified here"
        );
        let _ = writeln!(out, "map = {}", self.map_label);
        let _ = writeln!(out, "s_before = {}", self.s_before);
        let _ = writeln!(
            out,
            "outcome = {}",
            match self.outcome {
                ExperimentOutcome::Success => "success",
                ExperimentOutcome::NotApplicable => "not-applicable",
                ExperimentOutcome::Partial => "partial",
            }
        );
        let _ = writeln!(out, "depth_count = {}", self.depths.len());
        for d in &self.depths {
            let _ = writeln!(out, "[depth {}]", d.depth);
            if let Some((stage, message)) = &d.error {
                let _ = writeln!(out, "stage_error = {stage}: {message}");
                continue;
            }
            let _ = writeln!(out, "curve_diameter = {:.12e}", d.curve_diameter);
            let _ = writeln!(out, "curve_length = {:.12e}", d.curve_length);
            let _ = writeln!(out, "covering_degree = {}", d.covering_degree);
            let _ = writeln!(out, "n_alpha = {}", d.n_alpha);
            let _ = writeln!(out, "safe_index = {}", d.safe_index);
            let _ = writeln!(out, "p_embedding = {:.12e}", d.p_embedding);
            let _ = writeln!(out, "p = {:.12e}", d.p);
            let _ = writeln!(out, "blend_sup = {:.12e}", d.blend_sup);
            let _ = writeln!(out, "beltrami_sup = {:.12e}", d.sigma_sup);
            let _ = writeln!(out, "invariance_fraction = {:.6}", d.invariance_fraction);
            let _ = writeln!(out, "solve_residual = {:.12e}", d.solve_residual);
            let _ = writeln!(out, "solve_iterations = {}", d.solve_iterations);
            let _ = writeln!(out, "fit_residual = {:.12e}", d.fit_residual);
            let _ = writeln!(out, "fit_degree = {}", d.fit_degree);
            let _ = writeln!(out, "s_after = {}", d.s_after);
            let _ = writeln!(out, "surgery_displacement = {:.12e}", d.surgery_displacement);
            let _ = writeln!(out, "success = {}", d.success);
        }
        let _ = writeln!(out, "[config]");
        out.push_str(&self.config_echo);
        out
    }
}

/// Resolves a map spec: a preset name, `cubic:A,B`, `quad:c`, or
/// `poly:c0,c1,...` with ascending real coefficients.
pub fn resolve_map(spec: &str, search_k: usize, search_seeds: usize, seed: u64) -> Result<(RationalMap, String)> {
    match spec {
        "misiurewicz-cubic" => {
            let params = preset_misiurewicz_cubic(search_k, search_seeds, seed)?;
            let label = format!(
                "cubic z^3 - 3A^2 z + B with A = {:.12e}, B = {:.12e} (landing k = {}, multiplier = {:.6})",
                params.a, params.b, params.k, params.multiplier
            );
            Ok((params.map()?, label))
        }
        "z2" | "squaring" => Ok((
            RationalMap::polynomial_from_real(&[0.0, 0.0, 1.0])?,
            "z^2".into(),
        )),
        "z2p4" | "quad-plus-4" => Ok((
            RationalMap::polynomial_from_real(&[4.0, 0.0, 1.0])?,
            "z^2 + 4".into(),
        )),
        "z2m2" | "quad-minus-2" => Ok((
            RationalMap::polynomial_from_real(&[-2.0, 0.0, 1.0])?,
            "z^2 - 2".into(),
        )),
        other => {
            if let Some(rest) = other.strip_prefix("cubic:") {
                let parts: Vec<&str> = rest.split(',').collect();
                if parts.len() != 2 {
                    return Err(Error::Config(format!("cubic spec needs `cubic:A,B`, got `{other}`")));
                }
                let a: f64 = parts[0].trim().parse().map_err(|_| Error::Config(format!("bad A in `{other}`")))?;
                let b: f64 = parts[1].trim().parse().map_err(|_| Error::Config(format!("bad B in `{other}`")))?;
                Ok((
                    RationalMap::polynomial_from_real(&[b, -3.0 * a * a, 0.0, 1.0])?,
                    format!("cubic z^3 - 3A^2 z + B with A = {a:.12e}, B = {b:.12e}"),
                ))
            } else if let Some(rest) = other.strip_prefix("quad:") {
                let c: f64 = rest.trim().parse().map_err(|_| Error::Config(format!("bad c in `{other}`")))?;
                Ok((
                    RationalMap::polynomial_from_real(&[c, 0.0, 1.0])?,
                    format!("z^2 + c with c = {c:.12e}"),
                ))
            } else if let Some(rest) = other.strip_prefix("poly:") {
                let coeffs: std::result::Result<Vec<f64>, _> =
                    rest.split(',').map(|s| s.trim().parse::<f64>()).collect();
                let coeffs = coeffs.map_err(|_| Error::Config(format!("bad coefficient list `{other}`")))?;
                Ok((
                    RationalMap::polynomial_from_real(&coeffs)?,
                    format!("polynomial with coefficients {coeffs:?}"),
                ))
            } else {
                Err(Error::Config(format!("unknown map spec `{other}`")))
            }
        }
    }
}

/// Clearance of an anchor point from everything the surgery must avoid:
/// critical points and values, other fixed points, and puncture samples.
fn anchor_clearance(map: &RationalMap, x_star: Complex64, punctures: &PunctureSet) -> Result<f64> {
    let crit = map.critical_points()?;
    let fixed = map.fixed_points()?;
    let mut obstacles: Vec<Complex64> = Vec::new();
    obstacles.extend(crit.points.iter().map(|&(c, _)| c));
    obstacles.extend(crit.points.iter().map(|&(c, _)| map.evaluate(c)));
    obstacles.extend(fixed.iter().map(|&(z, _)| z));
    obstacles.extend(punctures.points.iter().copied());
    let mut d_min = f64::INFINITY;
    for q in obstacles {
        let dist = (q - x_star).norm();
        if dist > 1e-9 * (1.0 + x_star.norm()) {
            d_min = d_min.min(dist);
        }
    }
    Ok(if d_min.is_finite() { d_min } else { 1.0 })
}

/// Deterministic preset pick.
///
/// Two desk constraints compete: slow pullback contraction (small
/// multiplier) keeps deep surgery supports resolvable, but the top Green
/// band then hugs the curve (G ~ r^(log d / log |mult|)) and forces a thick
/// blend parameter p, which the Beltrami solve cannot afford. Candidates
/// whose forced p exceeds the solve budget are dropped; among the rest the
/// predicted depth-3 support size (clearance / |mult|^3) wins.
fn preset_misiurewicz_cubic(k: usize, seeds: usize, seed: u64) -> Result<CubicParams> {
    let found = find_misiurewicz_cubic(k, seeds, seed)?;
    let mut best: Option<(f64, CubicParams)> = None;
    for params in found {
        let mult = params.multiplier.abs();
        if mult <= 1.2 || mult >= 12.0 {
            continue;
        }
        let map = params.map()?;
        let degree = map.degree() as f64;
        // blend parameter the target geometry will force (kappa = 0.88)
        let s = degree.ln() / mult.ln();
        let a_needed = (1.04 / degree).powf(1.0 / s) / 0.88;
        let p_needed = (4.0 * a_needed - 1.0) / 3.0;
        if p_needed > 0.55 {
            continue;
        }
        let mut punctures = PunctureSet::truncated(&map, 8, 2, 1000, 1e4)?;
        let cap = map.escape_bound()?;
        punctures.points.retain(|z| z.norm() <= cap);
        let x_star = Complex64::new(params.fixed_point, 0.0);
        let clearance = anchor_clearance(&map, x_star, &punctures)?;
        let score = clearance / mult.powi(3);
        if best.as_ref().map(|(sc, _)| score > *sc).unwrap_or(true) {
            best = Some((score, params));
        }
    }
    best.map(|(_, p)| p).ok_or_else(|| Error::Stage {
        stage: "preset-search".into(),
        message: format!("no usable landing parameters found for k = {k}"),
    })
}

struct Setup {
    map: RationalMap,
    label: String,
    s_before: usize,
    punctures: PunctureSet,
    x_star: Complex64,
    bounded_critical: Vec<Complex64>,
    fundamental: FundamentalAnnulus,
    base_curve: JordanCurve,
    certificate: LinkageCertificate,
}

fn prepare(config: &ExperimentConfig) -> Result<(Setup, Option<ExperimentOutcome>)> {
    let (map, label) = resolve_map(&config.map, config.search_k, config.search_seeds, config.seed)?;
    let census = map.escape_census(config.escape_horizon, config.escape_radius)?;
    let s_before = census.count;
    let bounded_critical: Vec<Complex64> = census
        .verdicts
        .iter()
        .filter(|(_, escaped)| !escaped)
        .map(|&(c, _)| c)
        .collect();

    let (_, p_points) = map.postcritical_sample(12, config.escape_horizon, config.escape_radius)?;
    let mut punctures =
        PunctureSet::truncated(&map, 8, 2, config.escape_horizon, config.escape_radius)?;
    // escaping-orbit samples beyond the escape bound carry no geometry the
    // curves ever see; dropping them keeps lattice hulls tight
    let cap = map.escape_bound()?;
    punctures.points.retain(|z| z.norm() <= cap);

    // anchor: a repelling fixed point on the postcritical proxy if there is
    // one, otherwise any repelling fixed point (the search then comes back
    // empty and the run reports not-applicable)
    let fixed = map.fixed_points()?;
    let near_p = |z: Complex64| {
        p_points
            .iter()
            .any(|p| (p - z).norm() < 1e-6 * (1.0 + z.norm()))
    };
    let x_star = fixed
        .iter()
        .filter(|(z, m)| m.norm() > 1.0 && near_p(*z))
        .map(|&(z, _)| z)
        .next()
        .or_else(|| {
            fixed
                .iter()
                .filter(|(_, m)| m.norm() > 1.0)
                .min_by(|(_, m1), (_, m2)| m1.norm().partial_cmp(&m2.norm()).unwrap())
                .map(|&(z, _)| z)
        })
        .ok_or_else(|| Error::Stage {
            stage: "anchor".into(),
            message: "map has no repelling fixed point".into(),
        })?;

    // base curve radius: clear of critical points, critical values, other
    // fixed points, and punctures away from the anchor itself
    let d_min = anchor_clearance(&map, x_star, &punctures)?;
    let mut r0 = config.base_radius_factor * d_min;
    let mut base_curve = JordanCurve::circle(x_star, r0, config.curve_vertices);
    for _ in 0..8 {
        let shell_clear = punctures.points.iter().all(|&q| {
            let dist = (q - x_star).norm();
            !(0.9 * r0..=1.1 * r0).contains(&dist)
        });
        if shell_clear {
            break;
        }
        r0 *= 0.77;
        base_curve = JordanCurve::circle(x_star, r0, config.curve_vertices);
    }

    let base_length = quasihyperbolic_length(&base_curve, &punctures)?;
    let length_bound = config.length_bound_factor * base_length;
    let max_depth = *config.depths.last().unwrap();
    let certificate = linked_pullback_search_with(
        &map,
        &base_curve,
        max_depth,
        length_bound,
        &p_points,
        &punctures,
        &LiftOptions::default(),
    )?;

    // Fundamental level aligned with the base curve's Green ceiling: a lift
    // divides G by the degree exactly, so one alignment serves every depth
    // and the safe band stays within reach of the surgery disk.
    let rho = if config.rho > 0.0 {
        config.rho
    } else {
        let crit_level = critical_green_level(&map)?;
        let floor = if crit_level > 1e-9 { 1.25 * crit_level } else { 0.05 };
        let g_top = base_curve
            .vertices()
            .iter()
            .map(|&v| map.green_value(v, GREEN_HORIZON))
            .fold(0.0, f64::max)
            * 1.02;
        if g_top <= 0.0 {
            floor
        } else {
            let d = map.degree() as f64;
            let m = (g_top / floor).ln() / d.ln();
            g_top / d.powf(m.floor())
        }
    };
    let fundamental = fundamental_annulus(&map, rho, config.annulus_resolution)?;

    let not_applicable = certificate.found.is_empty() || p_points.is_empty();
    Ok((
        Setup {
            map,
            label,
            s_before,
            punctures,
            x_star,
            bounded_critical,
            fundamental,
            base_curve,
            certificate,
        },
        not_applicable.then_some(ExperimentOutcome::NotApplicable),
    ))
}

/// Runs the full experiment; `out_dir`, when given, receives curve CSVs,
/// grid files, the certificate, renders, and the report.
pub fn run_instability_experiment(
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
) -> Result<ReportBundle> {
    let (setup, early) = prepare(config)?;
    let mut bundle = ReportBundle {
        map_label: setup.label.clone(),
        config_echo: config.canonical_text(),
        s_before: setup.s_before,
        outcome: early.unwrap_or(ExperimentOutcome::Success),
        depths: Vec::new(),
        certificate: Some(setup.certificate.clone()),
        files: Vec::new(),
    };

    if early.is_none() {
        // the Green profile is self-similar along the pullback, so a blend
        // parameter that works at one depth is tried first at the next
        let mut preferred_a: Option<f64> = None;
        for &depth in &config.depths {
            let report = run_depth(config, &setup, depth, out_dir, &mut bundle.files, &mut preferred_a);
            bundle.depths.push(report);
        }
        let all_ok = bundle.depths.iter().all(|d| d.success);
        bundle.outcome = if all_ok {
            ExperimentOutcome::Success
        } else {
            ExperimentOutcome::Partial
        };
    }

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let cert_path = dir.join("certificate.txt");
        let mut cert_file = std::fs::File::create(&cert_path)?;
        write_certificate(setup.certificate(), &mut cert_file)?;
        bundle.files.push(cert_path);

        let base_path = dir.join("base_curve.csv");
        crate::curve::write_curve_csv(&setup.base_curve, std::fs::File::create(&base_path)?)?;
        bundle.files.push(base_path);

        if config.render {
            let render_path = dir.join("julia.ppm");
            super::render::render_julia(&setup.map, 512, std::fs::File::create(&render_path)?)?;
            bundle.files.push(render_path);
        }

        let report_path = dir.join("report.txt");
        std::fs::write(&report_path, bundle.report_text())?;
        bundle.files.push(report_path);
    }
    Ok(bundle)
}

impl Setup {
    fn certificate(&self) -> &LinkageCertificate {
        &self.certificate
    }
}

fn run_depth(
    config: &ExperimentConfig,
    setup: &Setup,
    depth: usize,
    out_dir: Option<&Path>,
    files: &mut Vec<PathBuf>,
    preferred_a: &mut Option<f64>,
) -> DepthReport {
    match run_depth_inner(config, setup, depth, out_dir, files, preferred_a) {
        Ok(report) => report,
        Err(StageError { stage, error }) => DepthReport::failed(depth, &stage, error.to_string()),
    }
}

struct StageError {
    stage: String,
    error: Error,
}

fn stage<T>(name: &str, result: Result<T>) -> std::result::Result<T, StageError> {
    result.map_err(|error| StageError {
        stage: name.to_string(),
        error,
    })
}

fn run_depth_inner(
    config: &ExperimentConfig,
    setup: &Setup,
    depth: usize,
    out_dir: Option<&Path>,
    files: &mut Vec<PathBuf>,
    preferred_a: &mut Option<f64>,
) -> std::result::Result<DepthReport, StageError> {
    let map = &setup.map;

    // linked pullback curve at this depth around the anchor
    let gamma = stage(
        "curve-selection",
        setup
            .certificate
            .found
            .iter()
            .filter(|f| f.level == depth)
            .filter(|f| f.curve.contains(setup.x_star).unwrap_or(false))
            .min_by(|a, b| a.length.partial_cmp(&b.length).unwrap())
            .cloned()
            .ok_or_else(|| Error::Stage {
                stage: "curve-selection".into(),
                message: format!("no linked pullback curve at depth {depth}"),
            }),
    )?;

    let census = stage(
        "intersection-census",
        intersection_census(&gamma.curve, &setup.fundamental.region, map, config.census_horizon),
    )?;
    let (w_lo, w_hi) = census.safe_g_window;

    // first orbit hit of a bounded critical point inside the curve
    let mut b_hit: Option<(usize, Complex64)> = None;
    for &c in &setup.bounded_critical {
        let orbit = map.iterate_orbit(c, config.escape_horizon, config.escape_radius);
        for (m, &z) in orbit.samples.iter().enumerate().skip(1) {
            if gamma.curve.contains(z).unwrap_or(false) {
                if b_hit.map(|(best, _)| m < best).unwrap_or(true) {
                    b_hit = Some((m, z));
                }
                break;
            }
        }
    }
    let (_, b) = stage(
        "first-hit",
        b_hit.ok_or_else(|| Error::Stage {
            stage: "first-hit".into(),
            message: "no bounded critical orbit enters the curve interior".into(),
        }),
    )?;

    // the top Green band hugs the curve (G ~ r^(log d / log |mult|)), so the
    // disk must reach close to it for the target circle to touch the band
    let disk_radius = 0.88 * gamma.curve.dist_to(b);

    // embedding obstruction in disk coordinates: punctures inside the disk
    let mut r_obs = 0.04f64;
    for &q in &setup.punctures.points {
        let m = (q - b).norm() / disk_radius;
        if m < 1.0 && (q - b).norm() > 1e-9 * (1.0 + b.norm()) {
            r_obs = r_obs.max((1.15 * m).min(0.9));
        }
    }
    let image_region = AnnulusRegion {
        outer: JordanCurve::circle(Complex64::new(0.0, 0.0), 1.0, 256),
        inner: JordanCurve::circle(Complex64::new(0.0, 0.0), r_obs, 128),
    };
    let p_embedding = stage("ring-embedding", largest_embedded_round_annulus(&image_region))?;

    // smallest blend parameter whose target circle meets the safe window
    let green = |z: Complex64| map.green_value(z, GREEN_HORIZON);
    let a_min = (1.0 + 3.0 * p_embedding.max(0.05)) / 4.0 + 1e-3;
    let try_radius = |a_cand: f64| -> Option<(f64, Complex64)> {
        let mut best: Option<(f64, Complex64)> = None;
        for t in 0..256 {
            let theta = 2.0 * std::f64::consts::PI * t as f64 / 256.0;
            let z = b + disk_radius * a_cand * Complex64::from_polar(1.0, theta);
            let g = green(z);
            if g > w_lo * 1.02 && g < w_hi * 0.98 {
                // prefer the deepest interior of the window
                let margin = (g - w_lo).min(w_hi - g);
                if best.map(|(m, _)| margin > m).unwrap_or(true) {
                    best = Some((margin, z));
                }
            }
        }
        best.map(|(_, z)| (a_cand, z))
    };
    let mut placement: Option<(f64, Complex64)> = None;
    if let Some(a_prev) = *preferred_a {
        if a_prev >= a_min {
            placement = try_radius(a_prev);
        }
    }
    let mut a_cand = a_min;
    while a_cand < 0.80 && placement.is_none() {
        placement = try_radius(a_cand);
        a_cand += 2.5e-3;
    }
    let (a_sel, target) = stage(
        "target-placement",
        placement.ok_or_else(|| Error::Stage {
            stage: "target-placement".into(),
            message: format!(
                "no circle radius in [{a_min:.4}, 0.80) meets the safe window ({w_lo:.3e}, {w_hi:.3e})"
            ),
        }),
    )?;
    *preferred_a = Some(a_sel);
    let p = (4.0 * a_sel - 1.0) / 3.0;

    let surgery_config = stage(
        "surgery-config",
        SurgeryConfig::new(gamma.curve.clone(), b, b, disk_radius, p, target),
    )?;
    let blend = stage("blend", build_blend(p, config.blend_resolution))?;
    let blend_sup = blend.sup_norm();
    let qr = stage("quasiregular", build_quasiregular(map, blend, surgery_config))?;

    // lattice sized by the dust hull, not the looser escape bound: the
    // support must stay resolvable at deep depths
    let hull = setup
        .punctures
        .points
        .iter()
        .map(|q| q.norm())
        .fold(1.05, f64::max)
        .max(b.norm() + 2.0 * disk_radius);
    let half = 1.3 * hull;
    let spec = GridSpec::square(-half, half, config.resolution);
    let sigma = stage(
        "invariant-beltrami",
        invariant_beltrami(&qr, config.beltrami_horizon, spec),
    )?;

    // the lattice alone under-samples tiny deep supports; probe the field at
    // preimages of the blend's maximal-dilatation locus to pin its sup
    let mut sigma_sup = sigma.sup_norm;
    {
        let blend = &qr.surgery.blend;
        let mut zeta_max = Complex64::new(0.0, 0.0);
        let mut mu_max = 0.0f64;
        for ir in 0..48 {
            let r = blend.p() + (1.0 - blend.p()) * (ir as f64 + 0.5) / 48.0;
            for it in 0..512 {
                let theta = 2.0 * std::f64::consts::PI * it as f64 / 512.0;
                let zeta = Complex64::from_polar(r, theta);
                let m = blend.dilatation_at(zeta).norm();
                if m > mu_max {
                    mu_max = m;
                    zeta_max = zeta;
                }
            }
        }
        let w_star = qr.surgery.config.from_disk_coords(zeta_max);
        if let Ok(preimages) = map.preimages(w_star) {
            for z_star in preimages {
                sigma_sup = sigma_sup.max(
                    crate::surgery::invariant_dilatation_at(&qr, z_star, config.beltrami_horizon)
                        .norm(),
                );
            }
        }
    }

    let invariance = verify_invariance(&sigma, &qr, 4000, config.beltrami_horizon, config.seed);
    if invariance.pass_fraction < 0.95 {
        return Err(StageError {
            stage: "verify-invariance".into(),
            error: Error::Stage {
                stage: "verify-invariance".into(),
                message: format!("pass fraction {:.4} below 0.95", invariance.pass_fraction),
            },
        });
    }

    let f = stage("beltrami-solve", solve_mrmt(&sigma, 200, 1e-8))?;
    let fit = stage(
        "straighten",
        straighten_with(&qr, &sigma, map.degree(), &f),
    )?;
    let s_after = stage(
        "census-after",
        fit.fitted
            .escape_census(config.escape_horizon, config.escape_radius),
    )?
    .count;

    let surgery_displacement = qr.surgery.displacement_sup(4096);

    if let Some(dir) = out_dir {
        let result: Result<()> = (|| {
            std::fs::create_dir_all(dir)?;
            let curve_path = dir.join(format!("curve_depth{depth}.csv"));
            crate::curve::write_curve_csv(&gamma.curve, std::fs::File::create(&curve_path)?)?;
            files.push(curve_path);

            let sigma_path = dir.join(format!("beltrami_depth{depth}.grid"));
            crate::grid::write_beltrami(&sigma, std::fs::File::create(&sigma_path)?)?;
            files.push(sigma_path);

            let qcmap_path = dir.join(format!("qcmap_depth{depth}.grid"));
            write_qcmap(&f, std::fs::File::create(&qcmap_path)?)?;
            files.push(qcmap_path);

            if config.render {
                let ppm_path = dir.join(format!("beltrami_depth{depth}.ppm"));
                super::render::render_beltrami(&sigma, std::fs::File::create(&ppm_path)?)?;
                files.push(ppm_path);
            }
            Ok(())
        })();
        stage("write-artifacts", result)?;
    }

    Ok(DepthReport {
        depth,
        curve_diameter: gamma.curve.diameter(),
        curve_length: gamma.length,
        covering_degree: gamma.covering_degree,
        n_alpha: census.n_alpha,
        safe_index: census.first_safe_index,
        p_embedding,
        p,
        blend_sup,
        sigma_sup,
        invariance_fraction: invariance.pass_fraction,
        solve_residual: f.residual,
        solve_iterations: f.iterations,
        fit_residual: fit.residual,
        fit_degree: fit.degree,
        s_after,
        surgery_displacement,
        success: s_after > setup.s_before && fit.residual < 0.05,
        error: None,
    })
}
