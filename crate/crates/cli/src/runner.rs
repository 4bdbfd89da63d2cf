//! Command implementations: certify, verify, sharpness, decay, solve.
//!
//! Each command loads the JSON config, runs its computation, writes JSON/CSV
//! artifacts into the output directory, prints one line per result, and
//! reports overall success for the process exit status.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use schrograph::numeric::fmt_f64;
use schrograph::report::param_map;
use schrograph::{
    ball_region, calculus, check_compatibility_46, check_lemma_51, check_lemma_52, check_lemma_61,
    check_prop_43, check_prop_44, cutoff_eta, distance_laplacian_bound, exponent_xi,
    growth_estimate, intrinsic_bound, jump_size, materialize, residual_report, supersolution_zeta,
    truncated_lp_norm, validate_region, DirichletProblem, Graph, GraphFunction, GraphRegion,
    MetricBound, Potential, PseudoMetric, TestFunctionParams, VerificationReport, VertexId,
    WeightFamily,
};

use crate::config::{ExperimentConfig, PotentialConfig};

pub struct RunContext {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub quiet: bool,
}

impl RunContext {
    pub fn new(config_path: &Path, out_dir: Option<&Path>, quiet: bool) -> Result<Self> {
        let config = ExperimentConfig::load(config_path)?;
        let out_dir = config.resolve_out_dir(out_dir);
        std::fs::create_dir_all(&out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        Ok(RunContext {
            config,
            out_dir,
            quiet,
        })
    }

    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            use std::io::Write;
            let _ = writeln!(std::io::stdout(), "{}", line.as_ref());
        }
    }

    fn write_json(&self, name: &str, value: &serde_json::Value) -> Result<()> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, serde_json::to_string_pretty(value)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Metric quantities certified on a region, plus the potential infimum.
struct Certified {
    jump: MetricBound,
    q1: MetricBound,
    q2: MetricBound,
    c0: f64,
    region_local_c0: bool,
}

fn certify_quantities(
    g: &Graph,
    m: &PseudoMetric,
    potential: &Potential,
    region: &GraphRegion,
) -> Result<Certified> {
    let jump = jump_size(g, m, region)?;
    let q1 = intrinsic_bound(g, m, 1.0, region)?;
    let q2 = intrinsic_bound(g, m, 2.0, region)?;
    let cert = potential.certify(region.vertices())?;
    Ok(Certified {
        jump,
        q1,
        q2,
        c0: cert.infimum,
        region_local_c0: cert.region_local,
    })
}

// ---------------------------------------------------------------- certify

pub fn cmd_certify(ctx: &RunContext) -> Result<bool> {
    let cfg = &ctx.config;
    let g = cfg.build_graph()?;
    let m = cfg.build_metric(&g)?;
    let x0 = cfg.base_vertex(&g)?;
    let r = cfg.radii.last().copied().unwrap_or(10.0);
    let region = ball_region(&g, &m, &x0, r)?;
    let cert = certify_quantities(&g, &m, &potential_or_fail(ctx, &g)?, &region)?;
    let dl = distance_laplacian_bound(&g, &m, &x0, &region)?;

    let intrinsic_ok = cert.q2.value <= 1.0 + cfg.tol.inequality;
    let dl_ok = dl <= cert.q1.value * (1.0 + 1e-12) + 1e-12;

    let mut doc = json!({
        "jump_size": cert.jump.value,
        "jump_size_exact": cert.jump.exact,
        "intrinsic_bound_q1": cert.q1.value,
        "intrinsic_bound_q2": cert.q2.value,
        "bounds_exact": cert.q1.exact,
        "distance_laplacian_bound": dl,
        "c0": cert.c0,
        "c0_region_local": cert.region_local_c0,
        "p": cfg.p,
        "certified": intrinsic_ok && dl_ok,
    });

    ctx.say(format!(
        "jump size s        = {} (exact: {})",
        fmt_f64(cert.jump.value),
        cert.jump.exact
    ));
    ctx.say(format!("q=1 bound C0       = {}", fmt_f64(cert.q1.value)));
    ctx.say(format!("q=2 bound          = {}", fmt_f64(cert.q2.value)));
    ctx.say(format!("|Laplacian d| max  = {}", fmt_f64(dl)));

    if !intrinsic_ok {
        ctx.say(format!(
            "certification refused: metric is not intrinsic (q=2 bound {} > 1)",
            fmt_f64(cert.q2.value)
        ));
        ctx.write_json("certify.json", &doc)?;
        return Ok(false);
    }
    if !dl_ok {
        ctx.say("certification refused: distance-Laplacian bound exceeds the q=1 bound");
        ctx.write_json("certify.json", &doc)?;
        return Ok(false);
    }

    let beta_star = schrograph::beta_threshold(cert.c0, cfg.p, cert.jump.value)?;
    let alpha_star = schrograph::alpha_threshold(cert.c0, cfg.p, cert.jump.value, cert.q1.value)?;
    doc["beta_star"] = json!(beta_star);
    doc["alpha_star"] = json!(alpha_star);
    ctx.say(format!(
        "beta* (p = {})     = {}",
        cfg.p,
        fmt_f64(beta_star)
    ));
    ctx.say(format!(
        "alpha* (p = {})    = {}",
        cfg.p,
        fmt_f64(alpha_star)
    ));
    ctx.write_json("certify.json", &doc)?;
    Ok(true)
}

fn potential_or_fail(ctx: &RunContext, g: &Graph) -> Result<Potential> {
    ctx.config.build_potential(g).map_err(|e| anyhow!("{e}"))
}

// ----------------------------------------------------------------- verify

const DEFAULT_CHECKS: &[&str] = &[
    "region",
    "potential",
    "identity",
    "convexity",
    "compat46",
    "lemma51",
    "lemma52",
    "lemma61",
    "prop43",
    "prop44",
];

pub fn cmd_verify(ctx: &RunContext) -> Result<bool> {
    let cfg = &ctx.config;
    let g = cfg.build_graph()?;
    let m = cfg.build_metric(&g)?;
    let x0 = cfg.base_vertex(&g)?;
    let r_main = cfg.max_radius()?;
    let region = ball_region(&g, &m, &x0, r_main)?;
    if region.is_empty() {
        bail!("the configured radius yields an empty region");
    }
    let potential = potential_or_fail(ctx, &g)?;

    let explicit = !cfg.checks.is_empty();
    let selected: Vec<String> = if explicit {
        cfg.checks.clone()
    } else {
        DEFAULT_CHECKS
            .iter()
            .filter(|c| (cfg.p >= 2.0) || **c != "prop43")
            .map(|s| s.to_string())
            .collect()
    };
    for name in &selected {
        if !DEFAULT_CHECKS.contains(&name.as_str()) {
            bail!(
                "unknown check '{name}' (known: {})",
                DEFAULT_CHECKS.join(", ")
            );
        }
    }

    // certification of the potential is a prerequisite shared by the
    // verifier checks; when it fails, dependent checks are skipped but the
    // independent ones still run
    let cert = potential.certify(region.vertices());
    let needs_params = selected.iter().any(|c| {
        matches!(
            c.as_str(),
            "compat46" | "lemma51" | "lemma52" | "lemma61" | "prop43" | "prop44"
        )
    });

    // resolve test-function parameters and validate every constraint before
    // any computation
    let tp = match (&cert, needs_params) {
        (Ok(cert), true) => {
            let jump = jump_size(&g, &m, &region)?;
            let q1 = intrinsic_bound(&g, &m, 1.0, &region)?;
            let beta_star = schrograph::beta_threshold(cert.infimum, cfg.p, jump.value)?;
            let beta = cfg.beta.unwrap_or(0.8 * beta_star);
            let alpha = cfg.alpha.unwrap_or(0.5 * (beta + beta_star));
            // the square-route ramp choice needs alpha > beta; an explicit
            // linear-route alpha below beta falls back to a neutral ramp
            let delta = cfg.delta.unwrap_or_else(|| {
                let square = 0.5 * (0.5 - beta / (2.0 * alpha));
                if square > 0.0 {
                    square
                } else {
                    0.25
                }
            });
            let tp = TestFunctionParams {
                base: x0.clone(),
                alpha,
                cutoff_radius: r_main,
                ramp_fraction: delta,
                jump_size: jump.value,
                one_intrinsic_bound: q1.value,
                exponent: cfg.p,
                potential_infimum: cert.infimum,
                weight_rate: beta,
            };
            let square_route = selected
                .iter()
                .any(|c| matches!(c.as_str(), "lemma51" | "prop43"));
            if square_route {
                tp.validate_square_threshold_context()
                    .map_err(|e| anyhow!("{e}"))?;
            }
            // an explicit alpha with p < 2 declares the linear-route
            // membership class, whose rate must stay below its threshold
            let linear_route = selected
                .iter()
                .any(|c| matches!(c.as_str(), "lemma61" | "prop44"));
            if cfg.p < 2.0 && cfg.alpha.is_some() && linear_route {
                tp.validate_linear_threshold_context()
                    .map_err(|e| anyhow!("{e}"))?;
            }
            if explicit && selected.iter().any(|c| c == "prop43") && cfg.p < 2.0 {
                bail!(
                    "parameter constraint violated: p >= 2 required by prop43 (got {})",
                    cfg.p
                );
            }
            Some(tp)
        }
        _ => None,
    };

    let mut all_pass = true;
    let mut run = |name: &str, outcome: Result<VerificationReport>| -> Result<()> {
        match outcome {
            Ok(report) => {
                let verdict = if report.passed() { "PASS" } else { "FAIL" };
                ctx.say(format!(
                    "check {name}: {verdict} (min margin {}, {} vertices)",
                    fmt_f64(report.min_margin),
                    report.n_vertices
                ));
                report.write_json(&ctx.out_dir.join(format!("{name}.json")))?;
                report.write_margins_csv(&ctx.out_dir.join(format!("{name}.csv")))?;
                if !report.passed() {
                    all_pass = false;
                }
            }
            Err(e) => {
                ctx.say(format!("check {name}: REJECTED ({e})"));
                all_pass = false;
            }
        }
        Ok(())
    };

    for name in &selected {
        match name.as_str() {
            "region" => run("region", Ok(validate_region(&region)))?,
            "potential" => {
                let report = match &cert {
                    Ok(c) => {
                        let mut rep =
                            VerificationReport::structural("potential", vec![], region.len());
                        rep.params = param_map([
                            ("infimum", json!(c.infimum)),
                            ("region_local", json!(c.region_local)),
                        ]);
                        rep
                    }
                    Err(e) => VerificationReport::structural(
                        "potential",
                        vec![format!("{e}")],
                        region.len(),
                    ),
                };
                run("potential", Ok(report))?;
            }
            "identity" => run("identity", identity_check(ctx, &g, &x0))?,
            "convexity" => run("convexity", convexity_check(ctx, &g, &x0))?,
            "compat46" => {
                let outcome = tp
                    .as_ref()
                    .ok_or_else(uncertified)
                    .and_then(|tp| {
                        let eta = cutoff_eta(&g, &m, tp)?;
                        let xi = exponent_xi(&g, &m, tp)?;
                        check_compatibility_46(&eta, &xi, &region)
                    })
                    .map_err(|e| anyhow!("{e}"));
                run("compat46", outcome)?;
            }
            "lemma51" => {
                let outcome = tp
                    .as_ref()
                    .ok_or_else(uncertified)
                    .and_then(|tp| check_lemma_51(&g, &m, &potential, tp, &region))
                    .map_err(|e| anyhow!("{e}"));
                run("lemma51", outcome)?;
            }
            "lemma52" => {
                let outcome = tp
                    .as_ref()
                    .ok_or_else(uncertified)
                    .and_then(|tp| check_lemma_52(&g, &m, tp, &region))
                    .map_err(|e| anyhow!("{e}"));
                run("lemma52", outcome)?;
            }
            "lemma61" => {
                let outcome = tp
                    .as_ref()
                    .ok_or_else(uncertified)
                    .and_then(|tp| check_lemma_61(&g, &m, &potential, tp, &region))
                    .map_err(|e| anyhow!("{e}"));
                run("lemma61", outcome)?;
            }
            "prop43" => {
                let outcome = tp
                    .as_ref()
                    .ok_or_else(uncertified)
                    .and_then(|tp| proposition_43(&g, &m, &potential, tp))
                    .map_err(|e| anyhow!("{e}"));
                run("prop43", outcome)?;
            }
            "prop44" => {
                let outcome = tp
                    .as_ref()
                    .ok_or_else(uncertified)
                    .and_then(|tp| proposition_44(&g, &m, &potential, tp))
                    .map_err(|e| anyhow!("{e}"));
                run("prop44", outcome)?;
            }
            _ => unreachable!("validated above"),
        }
    }
    Ok(all_pass)
}

fn uncertified() -> schrograph::Error {
    schrograph::Error::InvalidParameter("potential certification failed".into())
}

/// Cutoff scaled down so its support sits well inside the solve region.
fn inner_params(tp: &TestFunctionParams) -> TestFunctionParams {
    let mut tp = tp.clone();
    tp.cutoff_radius = (0.6 * tp.cutoff_radius).max(2.0 * tp.jump_size + 1.0);
    tp
}

fn pipeline_solution(
    g: &Graph,
    m: &PseudoMetric,
    potential: &Potential,
    tp: &TestFunctionParams,
) -> schrograph::Result<(GraphFunction, GraphRegion, TestFunctionParams)> {
    let tp_in = inner_params(tp);
    let solve_radius = tp_in.cutoff_radius + 4.0 * tp_in.jump_size + 1.0;
    let region = ball_region(g, m, &tp_in.base, solve_radius)?;
    let problem = DirichletProblem::new(
        region.clone(),
        &GraphFunction::constant(1.0),
        potential.clone(),
    )?;
    Ok((problem.solve()?, region, tp_in))
}

fn proposition_43(
    g: &Graph,
    m: &PseudoMetric,
    potential: &Potential,
    tp: &TestFunctionParams,
) -> schrograph::Result<VerificationReport> {
    let (u, region, tp_in) = pipeline_solution(g, m, potential, tp)?;
    let eta = cutoff_eta(g, m, &tp_in)?;
    let xi = exponent_xi(g, m, &tp_in)?;
    check_prop_43(g, &u, potential, &eta, &xi, tp_in.exponent, &region)
}

fn proposition_44(
    g: &Graph,
    m: &PseudoMetric,
    potential: &Potential,
    tp: &TestFunctionParams,
) -> schrograph::Result<VerificationReport> {
    let (u, region, tp_in) = pipeline_solution(g, m, potential, tp)?;
    let eta = cutoff_eta(g, m, &tp_in)?;
    let zeta = supersolution_zeta(g, m, &tp_in)?;
    let v = eta.product(&zeta)?;
    check_prop_44(g, &u, potential, &v, tp_in.exponent, &region)
}

/// Randomized identity suite: integration by parts and the product
/// Laplacian on seeded random finitely supported pairs.
fn identity_check(ctx: &RunContext, g: &Graph, x0: &VertexId) -> Result<VerificationReport> {
    let cfg = &ctx.config;
    let comb = PseudoMetric::combinatorial();
    let inner = schrograph::ball(g, &comb, x0, 5.5)?;
    let region = ball_region(g, &comb, x0, 7.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut margins = Vec::new();
    for trial in 0..100 {
        let f = random_sparse(&mut rng, &inner);
        let h = random_sparse(&mut rng, &inner);
        let (lhs, rhs) = calculus::integration_by_parts(g, &f, &h, &region)?;
        let scale = lhs.abs().max(rhs.abs());
        let mut worst = cfg.tol.identity * (1.0 + scale) - (lhs - rhs).abs();
        for x in f.domain().unwrap().iter().chain(h.domain().unwrap().iter()) {
            let (lhs, rhs) = calculus::laplacian_of_product(g, &f, &h, x)?;
            let scale = lhs.abs().max(rhs.abs());
            worst = worst.min(cfg.tol.identity * (1.0 + scale) - (lhs - rhs).abs());
        }
        margins.push((format!("trial{trial}"), worst));
    }
    Ok(VerificationReport::from_margins(
        "identity",
        param_map([
            ("seed", json!(cfg.seed)),
            ("trials", json!(100)),
            ("tol", json!(cfg.tol.identity)),
        ]),
        0.0,
        margins,
        inner.len(),
    ))
}

fn random_sparse(rng: &mut ChaCha8Rng, candidates: &[VertexId]) -> GraphFunction {
    let k = rng.random_range(1..=8.min(candidates.len()));
    let mut values = BTreeMap::new();
    for _ in 0..k {
        let v = candidates[rng.random_range(0..candidates.len())].clone();
        values.insert(v, rng.random_range(-2.0..2.0));
    }
    GraphFunction::sparse(values)
}

/// Pointwise convexity inequality over the built-in map grid with a seeded
/// random function.
fn convexity_check(ctx: &RunContext, g: &Graph, x0: &VertexId) -> Result<VerificationReport> {
    let cfg = &ctx.config;
    let comb = PseudoMetric::combinatorial();
    let inner = schrograph::ball(g, &comb, x0, 4.5)?;
    let closure = schrograph::ball(g, &comb, x0, 5.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut margins = Vec::new();
    let alphas = [1e-6, 1e-3, 1.0, 10.0];
    let mut grid: Vec<(String, calculus::ConvexMap)> = Vec::new();
    for p in [2.0, 3.0, 4.0] {
        for a in alphas {
            grid.push((
                format!("quarter_p{p}_a{a:e}"),
                calculus::ConvexMap::power_quarter(p, a)?,
            ));
        }
    }
    for p in [1.0, 1.5, 2.0] {
        for a in alphas {
            grid.push((
                format!("half_p{p}_a{a:e}"),
                calculus::ConvexMap::power_half(p, a)?,
            ));
        }
    }
    for (label, psi) in grid {
        let mut values = BTreeMap::new();
        for v in &closure {
            values.insert(v.clone(), rng.random_range(-10.0..10.0));
        }
        let u = GraphFunction::sparse(values);
        let mut worst = f64::INFINITY;
        for x in &inner {
            let (lhs, rhs) = calculus::convexity_inequality(g, &u, &psi, x)?;
            worst = worst.min(lhs - rhs);
        }
        margins.push((label, worst));
    }
    Ok(VerificationReport::from_margins(
        "convexity",
        param_map([
            ("seed", json!(cfg.seed)),
            ("tol", json!(cfg.tol.inequality)),
        ]),
        cfg.tol.inequality,
        margins,
        inner.len(),
    ))
}

// -------------------------------------------------------------- sharpness

pub fn cmd_sharpness(ctx: &RunContext) -> Result<bool> {
    let cfg = &ctx.config;
    let g = cfg.build_graph()?;
    if g.lattice_dim() != Some(1) {
        bail!("sharpness needs the lattice(1) family (closed-form witness)");
    }
    let m = cfg.build_metric(&g)?;
    let sigma = match m.kind() {
        schrograph::MetricKind::Combinatorial => 1.0,
        schrograph::MetricKind::Scaled { scale } => scale,
        schrograph::MetricKind::EdgeLength => bail!("sharpness needs a hop-scaled metric"),
    };
    let c0 = match &cfg.potential {
        PotentialConfig::Constant { c0 } => *c0,
        PotentialConfig::File { .. } => bail!("sharpness needs a constant potential"),
    };
    if !(c0 > 0.0) {
        bail!("potential certification failed: inf V = {c0} violates c0 > 0");
    }
    let x0 = cfg.base_vertex(&g)?;
    // default: hop-aligned radii, so balls coincide with full layers and the
    // fitted slope is free of staircase bias
    let radii: Vec<f64> = if cfg.radii.is_empty() {
        (4..=24).map(|k| sigma * (k as f64 + 0.5)).collect()
    } else {
        cfg.radii.clone()
    };

    let u = schrograph::make_symmetric_growing_solution(c0)?;
    let est = growth_estimate(&g, &u, cfg.p, &x0, &m, &radii)?;
    let (threshold, threshold_kind) = if cfg.p >= 2.0 {
        (schrograph::beta_threshold(c0, cfg.p, sigma)?, "beta_star")
    } else {
        (
            schrograph::alpha_threshold(c0, cfg.p, sigma, 2.0 * sigma)?,
            "alpha_star",
        )
    };
    let consistent = est.beta_hat > threshold;

    // the zero function sits inside every admissible class
    let mut zero_member = true;
    for k in 1..=5 {
        let rate = threshold * k as f64 / 6.0;
        let w = WeightFamily::new(g.clone(), m.clone(), x0.clone(), rate)?;
        let norm = truncated_lp_norm(&GraphFunction::zero(), cfg.p, &w, *radii.last().unwrap())?;
        zero_member &= norm == 0.0;
    }

    std::fs::write(ctx.out_dir.join("growth.csv"), est.to_csv())?;
    std::fs::write(ctx.out_dir.join("growth_summary.json"), est.summary_json())?;
    let doc = json!({
        "beta_hat": est.beta_hat,
        "residual": est.residual,
        "verdict": est.verdict,
        "threshold": threshold,
        "threshold_kind": threshold_kind,
        "consistent": consistent,
        "zero_member": zero_member,
        "c0": c0,
        "p": cfg.p,
    });
    ctx.write_json("sharpness.json", &doc)?;
    ctx.say(format!("fitted growth rate = {}", fmt_f64(est.beta_hat)));
    ctx.say(format!(
        "{threshold_kind}          = {}",
        fmt_f64(threshold)
    ));
    ctx.say(format!("consistent (rate > threshold): {consistent}"));
    Ok(consistent && zero_member)
}

// ------------------------------------------------------------------ decay

pub fn cmd_decay(ctx: &RunContext) -> Result<bool> {
    let cfg = &ctx.config;
    let g = cfg.build_graph()?;
    if g.lattice_dim() != Some(1) {
        bail!("decay needs the lattice(1) family");
    }
    let c0 = match &cfg.potential {
        PotentialConfig::Constant { c0 } => *c0,
        PotentialConfig::File { .. } => bail!("decay needs a constant potential"),
    };
    if !(c0 > 0.0) {
        bail!("potential certification failed: inf V = {c0} violates c0 > 0");
    }
    let mut rs = Vec::new();
    for r in &cfg.radii {
        if r.fract() != 0.0 || *r < 2.0 {
            bail!("decay radii must be integers >= 2, got {r}");
        }
        rs.push(*r as i64);
    }
    if rs.is_empty() {
        bail!("this command needs a nonempty 'radii' schedule");
    }

    let (lambda, _) = schrograph::lattice_characteristic_roots(c0)?;
    let mut csv = String::from("R,u0,normalized_product\n");
    let mut rows = Vec::new();
    let mut pass = true;
    let mut last_u0 = f64::INFINITY;
    for r in rs {
        let verts: Vec<VertexId> = (-r..=r).map(VertexId::from).collect();
        let region = materialize(&g, &verts)?;
        let problem = DirichletProblem::new(
            region,
            &GraphFunction::constant(1.0),
            Potential::constant(c0),
        )?;
        let u = problem.solve()?;
        let u0 = u.eval(&VertexId::from(0))?;
        let product = u0 * (lambda.powi(r as i32) + lambda.powi(-(r as i32))) / 2.0;
        csv.push_str(&format!("{r},{},{}\n", fmt_f64(u0), fmt_f64(product)));
        rows.push(json!({"R": r, "u0": u0, "normalized_product": product}));
        pass &= (product - 1.0).abs() <= 1e-8 && u0 < last_u0;
        last_u0 = u0;
        ctx.say(format!(
            "R = {r:3}: u(0) = {}, normalized product = {}",
            fmt_f64(u0),
            fmt_f64(product)
        ));
    }
    std::fs::write(ctx.out_dir.join("decay.csv"), csv)?;
    ctx.write_json("decay.json", &json!({"c0": c0, "rows": rows, "pass": pass}))?;
    Ok(pass)
}

// ------------------------------------------------------------------ solve

pub fn cmd_solve(ctx: &RunContext) -> Result<bool> {
    let cfg = &ctx.config;
    let g = cfg.build_graph()?;
    let m = cfg.build_metric(&g)?;
    let x0 = cfg.base_vertex(&g)?;
    let radius = match cfg.radius {
        Some(r) => r,
        None => cfg.max_radius()?,
    };
    let region = ball_region(&g, &m, &x0, radius)?;
    let boundary = cfg.boundary_function(&g)?;
    let potential = potential_or_fail(ctx, &g)?;
    potential
        .certify(region.vertices())
        .map_err(|e| anyhow!("{e}"))?;
    let problem = DirichletProblem::new(region.clone(), &boundary, potential.clone())?;
    let interior: Vec<VertexId> = problem.interior_vertices().cloned().collect();
    let u = problem.solve()?;
    u.save(&ctx.out_dir.join("solution.txt"))?;
    let report = residual_report(&g, &potential, &u, &interior, 1e-8)?;
    report.write_json(&ctx.out_dir.join("solve_report.json"))?;
    report.write_margins_csv(&ctx.out_dir.join("solve_report.csv"))?;
    ctx.say(format!(
        "solved {} vertices ({} interior): residual check {}",
        region.len(),
        interior.len(),
        if report.passed() { "PASS" } else { "FAIL" }
    ));
    Ok(report.passed())
}
