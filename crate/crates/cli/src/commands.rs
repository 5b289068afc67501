use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use qgnls::asymptotics::{
    ground_state_existence, predict_edge, rank_edges, refine_k_matching, EdgeStatePrediction,
    MatchingOptions, RankOptions, RefinedState,
};
use qgnls::comparison::{
    compare_at_mass, large_mass_comparisons, reproduce_dumbbell, reproduce_periodic,
    reproduce_tadpole, verify_comparison_lemma, CaseStudy, MassComparison, SweepConfig, Winner,
};
use qgnls::linear_dtn::{dtn_matrix, dtn_via_scattering, to_graph_convention};
use qgnls::nonlinear_dtn::trace_edge_manifold;
use qgnls::solver::{
    constant_seed, continue_branch, seed_from_prediction, solve_state, sweep_lambda,
    validate_state, ArclengthOptions, Branch, BranchPoint, Discretization, DiscretizationOptions,
    NewtonOptions, StationaryState, Termination,
};
use qgnls::{EdgeKind, MetricGraph};

use crate::args::*;
use crate::output::{emit, json, num, read, read_table, Table};
use crate::CliError;

/// Largest relative error of the `dE/dΛ = Λ dQ/dΛ` check accepted under `--strict`.
const IDENTITY_TOLERANCE: f64 = 1e-2;

static VERBOSE: AtomicBool = AtomicBool::new(false);

fn note(msg: impl std::fmt::Display) {
    if VERBOSE.load(Ordering::Relaxed) {
        eprintln!("qgnls: {msg}");
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    VERBOSE.store(cli.verbose, Ordering::Relaxed);
    let strict = cli.strict;
    match &cli.command {
        Command::Graph(GraphCommand::Validate(a)) => graph_validate(a),
        Command::Graph(GraphCommand::Absorb(a)) => graph_absorb(a),
        Command::Dtn(DtnCommand::Linear(a)) => dtn(a, "linear"),
        Command::Dtn(DtnCommand::Scattering(a)) => dtn(a, "scattering"),
        Command::Dtn(DtnCommand::Manifold(a)) => manifold(a),
        Command::Predict(a) => predict(a, strict),
        Command::Rank(a) => rank(a, strict),
        Command::Solve(a) => solve(a, strict),
        Command::Continue(a) => continuation(a, strict),
        Command::Compare(a) => compare(a, strict),
        Command::Reproduce(r) => reproduce(r, strict),
    }
}

fn load_graph(path: &Path) -> Result<MetricGraph, CliError> {
    MetricGraph::parse(&read(path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn negative_lambda(v: f64) -> Result<f64, CliError> {
    if v < 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "Lambda must be negative, got {v}"
        )))
    }
}

/// `start:end:count` with `count >= 2`.
fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("range '{s}' is not start:end:count"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n < 2 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect())
}

#[derive(Serialize)]
struct EdgeSummary {
    id: String,
    #[serde(flatten)]
    kind: EdgeKind,
}

#[derive(Serialize)]
struct GraphSummary {
    vertices: Vec<String>,
    boundary: Vec<String>,
    edges: Vec<EdgeSummary>,
    compact: bool,
    total_length: Option<f64>,
    degree2_vertices: Vec<String>,
    spec: String,
}

fn graph_validate(a: &GraphFile) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let summary = GraphSummary {
        vertices: g.vertex_ids().to_vec(),
        boundary: g
            .boundary()
            .iter()
            .map(|&v| g.vertex_id(v).to_string())
            .collect(),
        edges: (0..g.edges().len())
            .map(|e| EdgeSummary {
                id: g.edge(e).id.clone(),
                kind: g.classify_edge(e),
            })
            .collect(),
        compact: g.is_compact(),
        total_length: g.is_compact().then(|| g.total_length()),
        degree2_vertices: (0..g.vertex_count())
            .filter(|&v| g.degree(v) == 2 && !g.boundary().contains(&v))
            .map(|v| g.vertex_id(v).to_string())
            .collect(),
        spec: g.to_spec(),
    };
    emit(a.out.as_deref(), &json("qgnls.graph", &summary)?)
}

fn graph_absorb(a: &GraphFile) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?.absorb_degree2()?;
    emit(a.out.as_deref(), &g.to_spec())
}

fn dtn(a: &DtnArgs, route: &str) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let mu = positive("mu", a.mu)?;
    let m = if route == "linear" {
        dtn_matrix(&g, mu)?
    } else {
        dtn_via_scattering(&g, mu)?
    };
    let matrix = if a.graph_convention {
        to_graph_convention(&m.matrix, mu)
    } else {
        m.matrix.clone()
    };
    let mut header = vec!["vertex"];
    header.extend(m.boundary.iter().map(String::as_str));
    let mut t = Table::new(&format!("dtn {route}"), &header)?;
    t.meta("graph", a.graph.display());
    t.meta("mu", mu);
    t.meta(
        "convention",
        if a.graph_convention {
            "graph (-Laplacian + mu^2)"
        } else {
            "scaled (-Laplacian + 1)"
        },
    );
    for (i, id) in m.boundary.iter().enumerate() {
        t.row(
            std::iter::once(id.clone()).chain((0..m.boundary.len()).map(|j| num(matrix[(i, j)]))),
        )?;
    }
    emit(a.out.as_deref(), &t.finish()?)
}

fn manifold(a: &ManifoldArgs) -> Result<(), CliError> {
    let l = positive("L", a.half_length)?;
    let amps = parse_range(&a.grid)?;
    let samples = trace_edge_manifold(l, &amps)?;
    let mut t = Table::new("dtn manifold", &["amplitude", "p", "q", "regime", "drift"])?;
    t.meta("L", l);
    t.meta("grid", &a.grid);
    for s in samples {
        let regime = serde_json::to_value(s.orbit)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        t.row([num(s.amplitude), num(s.p), num(s.q), regime, num(s.drift)])?;
    }
    emit(a.out.as_deref(), &t.finish()?)
}

#[derive(Serialize)]
struct PredictionEntry {
    #[serde(flatten)]
    prediction: EdgeStatePrediction,
    #[serde(skip_serializing_if = "Option::is_none")]
    refined: Option<RefinedState>,
}

#[derive(Serialize)]
struct PredictReport {
    mu: f64,
    predictions: Vec<PredictionEntry>,
    skipped: Vec<String>,
}

fn predict(a: &PredictArgs, strict: bool) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let mu = positive("mu", a.mu)?;
    let edges: Vec<usize> = match &a.edge {
        Some(id) => vec![g.edge_by_id(id)?],
        None => (0..g.edges().len())
            .filter(|&e| g.edge(e).is_finite())
            .collect(),
    };
    let results: Vec<Result<PredictionEntry, qgnls::Error>> = edges
        .par_iter()
        .map(|&e| {
            let prediction = predict_edge(&g, e, mu)?;
            let refined = if a.refine {
                Some(refine_k_matching(&g, e, mu, MatchingOptions::default())?)
            } else {
                None
            };
            Ok(PredictionEntry {
                prediction,
                refined,
            })
        })
        .collect();
    let mut report = PredictReport {
        mu,
        predictions: Vec::new(),
        skipped: Vec::new(),
    };
    for (e, r) in edges.iter().zip(results) {
        match r {
            Ok(p) => report.predictions.push(p),
            Err(err) if a.edge.is_none() && err.is_config_error() => {
                report.skipped.push(format!("{}: {err}", g.edge(*e).id))
            }
            Err(err) => return Err(err.into()),
        }
    }
    emit(a.out.as_deref(), &json("qgnls.predict", &report)?)?;
    let warned: Vec<&str> = report
        .predictions
        .iter()
        .filter(|p| !p.prediction.warnings.is_empty())
        .filter_map(|p| p.prediction.edge.as_deref())
        .collect();
    if strict && !warned.is_empty() {
        return Err(CliError::Validation(format!(
            "predictions carry warnings on {}",
            warned.join(", ")
        )));
    }
    Ok(())
}

fn rank(a: &RankArgs, strict: bool) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Report {
        #[serde(flatten)]
        rank: qgnls::asymptotics::RankReport,
        existence: qgnls::asymptotics::ExistenceReport,
    }
    let g = load_graph(&a.graph)?;
    let mu = positive("mu", a.mu)?;
    let rank = rank_edges(
        &g,
        mu,
        RankOptions {
            tie_tolerance: a.tie_tolerance,
        },
    )?;
    let inconclusive = rank.inconclusive;
    let report = Report {
        rank,
        existence: ground_state_existence(&g),
    };
    emit(a.out.as_deref(), &json("qgnls.rank", &report)?)?;
    if strict && inconclusive {
        return Err(CliError::Validation(
            "the leading candidates cannot be ordered".into(),
        ));
    }
    Ok(())
}

enum Seed {
    Prediction(String),
    Constant,
    File(PathBuf),
}

fn parse_seed(s: &str) -> Result<Seed, CliError> {
    if s == "constant" {
        Ok(Seed::Constant)
    } else if let Some(e) = s.strip_prefix("prediction:") {
        Ok(Seed::Prediction(e.to_string()))
    } else if let Some(p) = s.strip_prefix("file:") {
        Ok(Seed::File(PathBuf::from(p)))
    } else {
        Err(CliError::Config(format!(
            "seed '{s}' is not prediction:<edge>, constant or file:<path>"
        )))
    }
}

/// State values read from an `edge,x,phi` dump, interpolated onto the grid.
fn seed_from_file(
    d: &Discretization,
    path: &Path,
    lambda: f64,
) -> Result<StationaryState, CliError> {
    let (header, rows) = read_table(path)?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("{}: missing column '{name}'", path.display())))
    };
    let (ce, cx, cp) = (col("edge")?, col("x")?, col("phi")?);
    let mut by_edge: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &rows {
        let parse = |i: usize| {
            r[i].parse::<f64>()
                .map_err(|_| CliError::Config(format!("{}: bad number '{}'", path.display(), r[i])))
        };
        by_edge
            .entry(r[ce].clone())
            .or_default()
            .push((parse(cx)?, parse(cp)?));
    }
    for v in by_edge.values_mut() {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let g = d.graph();
    for e in g.edges() {
        if !by_edge.contains_key(&e.id) {
            return Err(CliError::Config(format!(
                "{}: no values for edge '{}'",
                path.display(),
                e.id
            )));
        }
    }
    let values = d.sample(|edge, x| {
        let pts = &by_edge[&g.edge(edge).id];
        let k = pts.partition_point(|p| p.0 < x);
        if k == 0 {
            pts[0].1
        } else if k == pts.len() {
            pts[k - 1].1
        } else {
            let ((x0, y0), (x1, y1)) = (pts[k - 1], pts[k]);
            if x1 == x0 {
                y0
            } else {
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    });
    Ok(StationaryState::new(d, lambda, values, 0))
}

fn make_seed(
    d: &Discretization,
    seed: &Seed,
    lambda: f64,
    perturb: &PerturbArgs,
) -> Result<StationaryState, CliError> {
    let state = match seed {
        Seed::Constant => Ok(constant_seed(d, lambda)?),
        Seed::Prediction(edge) => {
            let g = d.graph();
            let pred = predict_edge(g, g.edge_by_id(edge)?, (-lambda).sqrt())?;
            Ok(seed_from_prediction(&pred, d)?)
        }
        Seed::File(p) => seed_from_file(d, p, lambda),
    }?;
    if perturb.perturb == 0.0 {
        return Ok(state);
    }
    if !(perturb.perturb.is_finite() && perturb.perturb > 0.0) {
        return Err(CliError::Config(format!(
            "perturb must be non-negative, got {}",
            perturb.perturb
        )));
    }
    let mut rng = StdRng::seed_from_u64(perturb.rng_seed);
    let values = state
        .values
        .iter()
        .map(|v| v * (1.0 + perturb.perturb * rng.random_range(-1.0..=1.0)))
        .collect();
    Ok(StationaryState::new(d, lambda, values, 0))
}

fn discretize(
    g: &MetricGraph,
    mu_grid: f64,
    mu_cut: f64,
    ppw: f64,
) -> Result<Discretization, CliError> {
    let mut opts = DiscretizationOptions::new(mu_grid, positive("ppw", ppw)?);
    opts.cut_length = Some(30.0 / mu_cut);
    Ok(Discretization::new(g, opts)?)
}

fn solve(a: &SolveArgs, strict: bool) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Report {
        lambda: f64,
        mu: f64,
        mass: f64,
        energy: f64,
        residual: f64,
        iterations: usize,
        loc_edge: Option<String>,
        loc_ratio: Option<f64>,
        validation: qgnls::solver::StateReport,
        grid_warnings: Vec<String>,
    }
    let g = load_graph(&a.graph)?;
    let lambda = negative_lambda(a.lambda)?;
    let mu = (-lambda).sqrt();
    let d = discretize(&g, mu, mu, a.ppw)?;
    let seed = make_seed(&d, &parse_seed(&a.seed)?, lambda, &a.perturb)?;
    note(format_args!(
        "{} unknowns, seed {}",
        seed.values.len(),
        a.seed
    ));
    let state = solve_state(&d, &seed, NewtonOptions::default())?;
    note(format_args!(
        "converged in {} iterations, residual {:.2e}",
        state.iterations, state.residual
    ));
    let validation = validate_state(&d, &state);
    let clean = validation.is_clean();
    if let Some(out) = &a.out {
        let mut t = Table::new("solve", &["edge", "x", "phi"])?;
        t.meta("graph", a.graph.display());
        t.meta("lambda", lambda);
        t.meta("ppw", a.ppw);
        t.meta("seed", &a.seed);
        t.meta(
            "perturb",
            format!("{} (rng seed {})", a.perturb.perturb, a.perturb.rng_seed),
        );
        t.meta(
            "perturb",
            format!("{} (rng seed {})", a.perturb.perturb, a.perturb.rng_seed),
        );
        for grid in d.grids() {
            let id = &g.edge(grid.edge).id;
            for (i, &node) in grid.nodes.iter().enumerate() {
                t.row([id.clone(), num(grid.coordinate(i)), num(state.values[node])])?;
            }
        }
        emit(Some(out), &t.finish()?)?;
    }
    let report = Report {
        lambda,
        mu,
        mass: state.mass,
        energy: state.energy,
        residual: state.residual,
        iterations: state.iterations,
        loc_edge: state.localization.map(|(e, _)| g.edge(e).id.clone()),
        loc_ratio: state.localization.map(|(_, r)| r),
        validation,
        grid_warnings: d.warnings().to_vec(),
    };
    emit(None, &json("qgnls.state", &report)?)?;
    if strict && !clean {
        return Err(CliError::Validation(
            "the state report lists violations".into(),
        ));
    }
    Ok(())
}

const BRANCH_COLUMNS: [&str; 7] = [
    "Lambda",
    "mu",
    "Q",
    "E",
    "residual",
    "loc_edge",
    "loc_ratio",
];

fn branch_table(command: &str, b: &Branch) -> Result<Table, CliError> {
    let mut t = Table::new(command, &BRANCH_COLUMNS)?;
    t.meta(
        "termination",
        serde_json::to_string(&b.termination).unwrap_or_default(),
    );
    t.meta("turning_points", format!("{:?}", b.turning_points));
    t.meta(
        "bifurcation_suspects",
        format!("{:?}", b.bifurcation_suspects),
    );
    for p in &b.points {
        t.row([
            num(p.lambda),
            num(p.mu),
            num(p.mass),
            num(p.energy),
            num(p.residual),
            p.loc_edge.clone().unwrap_or_default(),
            num(p.loc_ratio),
        ])?;
    }
    Ok(t)
}

fn identity_error(b: &Branch) -> f64 {
    b.differential_identity()
        .iter()
        .map(|&(_, r)| r)
        .fold(0.0, f64::max)
}

fn continuation(a: &ContinueArgs, strict: bool) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let seed_spec = parse_seed(&a.seed)?;
    let (branch, mode) = if a.arclength {
        let start = negative_lambda(a.lambda.unwrap_or(f64::NAN))?;
        let lambda_min = negative_lambda(a.lambda_min.unwrap_or(4.0 * start))?;
        let lambda_max = negative_lambda(a.lambda_max.unwrap_or(0.25 * start))?;
        if !(lambda_min < start && start < lambda_max) {
            return Err(CliError::Config(format!(
                "need lambda-min < lambda < lambda-max, got {lambda_min} < {start} < {lambda_max}"
            )));
        }
        let d = discretize(&g, (-lambda_min).sqrt(), (-lambda_max).sqrt(), a.ppw)?;
        let seed = make_seed(&d, &seed_spec, start, &a.perturb)?;
        let opts = ArclengthOptions {
            lambda_min,
            lambda_max,
            initial_step: positive("step", a.step)?,
            max_step: positive("max-step", a.max_step)?,
            max_points: a.max_points,
            increasing: !a.decreasing,
            ..ArclengthOptions::default()
        };
        (
            continue_branch(&d, &seed, opts)?,
            format!("arclength from {start} in [{lambda_min}, {lambda_max}]"),
        )
    } else {
        let spec = a.lambda_range.as_deref().ok_or_else(|| {
            CliError::Config("give --lambda-range a:b:n or --arclength --lambda v".into())
        })?;
        let lambdas = parse_range(spec)?;
        for &l in &lambdas {
            negative_lambda(l)?;
        }
        let hi = lambdas.iter().fold(0.0f64, |m, l| m.max(-l)).sqrt();
        let lo = lambdas.iter().fold(f64::INFINITY, |m, l| m.min(-l)).sqrt();
        let d = discretize(&g, hi, lo, a.ppw)?;
        let seed = make_seed(&d, &seed_spec, lambdas[0], &a.perturb)?;
        (
            sweep_lambda(&d, &seed, &lambdas, NewtonOptions::default())?,
            format!("natural over {spec}"),
        )
    };
    note(format_args!(
        "{} points, termination {:?}",
        branch.points.len(),
        branch.termination
    ));
    let mut t = branch_table("continue", &branch)?;
    t.meta("graph", a.graph.display());
    t.meta("mode", mode);
    t.meta("seed", &a.seed);
    t.meta("ppw", a.ppw);
    let identity = identity_error(&branch);
    t.meta("max_identity_error", identity);
    emit(a.out.as_deref(), &t.finish()?)?;
    if strict {
        if !matches!(branch.termination, Termination::Completed) {
            return Err(CliError::Validation(format!(
                "branch ended early: {:?}",
                branch.termination
            )));
        }
        if identity > IDENTITY_TOLERANCE {
            return Err(CliError::Validation(format!(
                "dE/dLambda identity error {identity:.3e}"
            )));
        }
    }
    Ok(())
}

fn read_branch(path: &Path) -> Result<Branch, CliError> {
    let (header, rows) = read_table(path)?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("{}: missing column '{name}'", path.display())))
    };
    let (cl, cq, ce) = (col("Lambda")?, col("Q")?, col("E")?);
    let points = rows
        .iter()
        .map(|r| {
            let parse = |i: usize| {
                r[i].parse::<f64>().map_err(|_| {
                    CliError::Config(format!("{}: bad number '{}'", path.display(), r[i]))
                })
            };
            let lambda = parse(cl)?;
            Ok(BranchPoint {
                lambda,
                mu: (-lambda).sqrt(),
                mass: parse(cq)?,
                energy: parse(ce)?,
                residual: 0.0,
                loc_edge: None,
                loc_ratio: 0.0,
                det_sign: 0.0,
                values: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Branch {
        points,
        turning_points: Vec::new(),
        bifurcation_suspects: Vec::new(),
        steps: Vec::new(),
        termination: Termination::Completed,
    })
}

#[derive(Serialize)]
struct ComparisonRow {
    q: f64,
    winner: Winner,
    #[serde(rename = "E1")]
    e1: f64,
    #[serde(rename = "E2")]
    e2: f64,
    lemma_hypotheses_ok: bool,
    conclusion_holds: Option<bool>,
}

impl From<&MassComparison> for ComparisonRow {
    fn from(c: &MassComparison) -> Self {
        ComparisonRow {
            q: c.q,
            winner: c.winner,
            e1: c.e1,
            e2: c.e2,
            lemma_hypotheses_ok: c.hypothesis.holds(),
            conclusion_holds: c.conclusion_holds,
        }
    }
}

fn compare(a: &CompareArgs, strict: bool) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Report {
        first: String,
        second: String,
        comparisons: Vec<ComparisonRow>,
        lemma: qgnls::comparison::LemmaReport,
    }
    let (b1, b2) = (read_branch(&a.first)?, read_branch(&a.second)?);
    let comparisons = match a.mass {
        Some(q) => vec![compare_at_mass(&b1, &b2, q)?],
        None => large_mass_comparisons(&b1, &b2)?,
    };
    let lemma = verify_comparison_lemma(&b1, &b2)?;
    let failed = !lemma.within_hypotheses() || !lemma.violations.is_empty();
    let report = Report {
        first: a.first.display().to_string(),
        second: a.second.display().to_string(),
        comparisons: comparisons.iter().map(ComparisonRow::from).collect(),
        lemma,
    };
    emit(a.out.as_deref(), &json("qgnls.compare", &report)?)?;
    if strict && failed {
        return Err(CliError::Validation(
            "comparison lemma hypotheses or conclusion failed".into(),
        ));
    }
    Ok(())
}

fn sweep_config(
    s: &SweepArgs,
    mu_min: f64,
    mu_max: f64,
    points: usize,
    ppw: f64,
) -> Result<SweepConfig, CliError> {
    let cfg = SweepConfig {
        mu_min: positive("mu-min", s.mu_min.unwrap_or(mu_min))?,
        mu_max: positive("mu-max", s.mu_max.unwrap_or(mu_max))?,
        points: s.points.unwrap_or(points),
        points_per_wavelength: positive("ppw", s.ppw.unwrap_or(ppw))?,
    };
    if cfg.mu_min >= cfg.mu_max || cfg.points < 3 {
        return Err(CliError::Config(
            "need mu-min < mu-max and at least 3 points".into(),
        ));
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct BranchFile {
    label: String,
    edge: Option<String>,
    file: String,
    points: usize,
    termination: Termination,
    max_identity_error: f64,
}

#[derive(Serialize)]
struct StudyReport<'a> {
    name: &'a str,
    graph: &'a str,
    config: &'a SweepConfig,
    branches: Vec<BranchFile>,
    pairs: &'a [qgnls::comparison::PairSummary],
    fits: &'a [qgnls::comparison::FitReport],
    existence: &'a Option<qgnls::asymptotics::ExistenceReport>,
    notes: &'a [String],
}

fn reproduce(r: &ReproduceCommand, strict: bool) -> Result<(), CliError> {
    use std::f64::consts::PI;
    let (study, out_dir, stem) = match r {
        ReproduceCommand::Dumbbell(a) => {
            let (len, lo, hi) = match (a.long_edges, a.internal_length) {
                (true, _) => (4.0 * PI, 0.8, 1.8),
                (false, Some(l)) => (positive("internal-length", l)?, 2.0, 4.0),
                (false, None) => (PI, 2.0, 4.0),
            };
            let cfg = sweep_config(&a.sweep, lo, hi, 21, 30.0)?;
            let s = reproduce_dumbbell(a.k, positive("loop-length", a.loop_length)?, len, cfg)?;
            (s, &a.sweep.out_dir, format!("dumbbell-k{}", a.k))
        }
        ReproduceCommand::Tadpole(a) => {
            let cfg = sweep_config(&a.sweep, 3.0, 6.0, 16, 20.0)?;
            let s = reproduce_tadpole(a.halflines, positive("loop-length", a.loop_length)?, cfg)?;
            (s, &a.sweep.out_dir, format!("tadpole-k{}", a.halflines))
        }
        ReproduceCommand::Periodic(a) => {
            let shortest = positive("l0", a.l0)?.min(positive("lstar", a.lstar)?);
            // 2 mu l >= 2 pi on the shortest half-length keeps both branches asymptotic
            let mu_min = PI / shortest;
            let cfg = sweep_config(&a.sweep, mu_min, 2.0 * mu_min, 21, 30.0)?;
            let s = reproduce_periodic(a.cells, a.l0, a.lstar, cfg)?;
            (s, &a.sweep.out_dir, format!("periodic-c{}", a.cells))
        }
    };
    write_study(&study, out_dir, &stem, strict)
}

fn write_study(s: &CaseStudy, dir: &Path, stem: &str, strict: bool) -> Result<(), CliError> {
    note(format_args!("{}: {} branches", s.name, s.branches.len()));
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for b in &s.branches {
        let path = dir.join(format!("{stem}-{}.csv", b.label));
        let mut t = branch_table(&format!("reproduce {}", s.name), &b.branch)?;
        t.meta("study", &s.name);
        t.meta("branch", &b.label);
        t.meta(
            "mu_range",
            format!("[{}, {}]", s.config.mu_min, s.config.mu_max),
        );
        t.meta("ppw", s.config.points_per_wavelength);
        emit(Some(&path), &t.finish()?)?;
        files.push(BranchFile {
            label: b.label.clone(),
            edge: b.edge.clone(),
            file: path.display().to_string(),
            points: b.branch.points.len(),
            termination: b.branch.termination.clone(),
            max_identity_error: identity_error(&b.branch),
        });
    }
    let report = StudyReport {
        name: &s.name,
        graph: &s.graph,
        config: &s.config,
        branches: files,
        pairs: &s.pairs,
        fits: &s.fits,
        existence: &s.existence,
        notes: &s.notes,
    };
    emit(None, &json("qgnls.reproduce", &report)?)?;
    if strict {
        let violations: usize = s.pairs.iter().map(|p| p.lemma.violations.len()).sum();
        let identity = report
            .branches
            .iter()
            .map(|b| b.max_identity_error)
            .fold(0.0, f64::max);
        if violations > 0 || identity > IDENTITY_TOLERANCE {
            return Err(CliError::Validation(format!(
                "{violations} lemma violations, identity error {identity:.3e}"
            )));
        }
    }
    Ok(())
}
