//! Fixed-mass energy comparison of solution branches and the case studies
//! built on it.
//!
//! Two branches with decreasing `Q(Λ)` and `Q₁(Λ) < Q₂(Λ)` on a common
//! window satisfy `E₁ > E₂` at every common mass in that window; the
//! harness checks both the hypothesis and the conclusion on computed data.

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{
    ground_state_existence, predict_edge, EdgeStatePrediction, ExistenceReport,
};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::solver::{
    constant_seed, seed_from_prediction, sweep_lambda, Branch, Discretization,
    DiscretizationOptions, NewtonOptions,
};

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch–Carlson).
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    /// `x` must be strictly increasing with at least two points.
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::domain(
                "interpolation needs at least two points of matching length",
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain(
                "interpolation nodes must be strictly increasing",
            ));
        }
        let delta: Vec<f64> = (0..n - 1)
            .map(|k| (y[k + 1] - y[k]) / (x[k + 1] - x[k]))
            .collect();
        let h: Vec<f64> = (0..n - 1).map(|k| x[k + 1] - x[k]).collect();
        let mut m = vec![0.0; n];
        // three-point slopes, then the Fritsch–Carlson limiter
        for k in 1..n - 1 {
            m[k] = if delta[k - 1] * delta[k] <= 0.0 {
                0.0
            } else {
                (h[k] * delta[k - 1] + h[k - 1] * delta[k]) / (h[k - 1] + h[k])
            };
        }
        let end = |d0: f64, d1: f64, h0: f64, h1: f64| {
            let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if s * d0 <= 0.0 {
                0.0
            } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                s
            }
        };
        if n == 2 {
            m[0] = delta[0];
            m[1] = delta[0];
        } else {
            m[0] = end(delta[0], delta[1], h[0], h[1]);
            m[n - 1] = end(delta[n - 2], delta[n - 3], h[n - 2], h[n - 3]);
        }
        for k in 0..n - 1 {
            if delta[k] == 0.0 {
                m[k] = 0.0;
                m[k + 1] = 0.0;
                continue;
            }
            let (a, b) = (m[k] / delta[k], m[k + 1] / delta[k]);
            if a < 0.0 {
                m[k] = 0.0;
            }
            if b < 0.0 {
                m[k + 1] = 0.0;
            }
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                m[k] = t * a * delta[k];
                m[k + 1] = t * b * delta[k];
            }
        }
        Ok(MonotoneCubic {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Value at `t`, clamped to the domain.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let t = t.clamp(self.x[0], self.x[n - 1]);
        let k = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            i => (i - 1).min(n - 2),
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.m[k] + h01 * self.y[k + 1] + h11 * h * self.m[k + 1]
    }
}

const MONOTONE_TOL: f64 = 1e-8;

/// The part of a branch where `Q` decreases in `Λ`, starting from the
/// large-mass end, with interpolants of `Q(Λ)` and `E(Λ)`.
#[derive(Clone, Debug)]
struct Curve {
    lambda: Vec<f64>,
    mass: Vec<f64>,
    energy: Vec<f64>,
    q: MonotoneCubic,
    e: MonotoneCubic,
}

impl Curve {
    fn new(b: &Branch) -> Result<Self> {
        let mut pts: Vec<(f64, f64, f64)> = b
            .points
            .iter()
            .map(|p| (p.lambda, p.mass, p.energy))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        let mut end = 1;
        while end < pts.len() && pts[end].1 < pts[end - 1].1 + MONOTONE_TOL {
            end += 1;
        }
        pts.truncate(end);
        if pts.len() < 2 {
            return Err(Error::domain(
                "branch has fewer than two points with Q decreasing in Lambda",
            ));
        }
        let lambda: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let mass: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let energy: Vec<f64> = pts.iter().map(|p| p.2).collect();
        let q = MonotoneCubic::new(&lambda, &mass)?;
        let e = MonotoneCubic::new(&lambda, &energy)?;
        Ok(Curve {
            lambda,
            mass,
            energy,
            q,
            e,
        })
    }

    fn mass_range(&self) -> (f64, f64) {
        (self.mass[self.mass.len() - 1], self.mass[0])
    }

    fn lambda_at_mass(&self, q: f64) -> Result<f64> {
        let (lo, hi) = self.mass_range();
        if !(q >= lo && q <= hi) {
            return Err(Error::Range(format!(
                "mass {q} outside the branch range [{lo}, {hi}]"
            )));
        }
        if let Some(i) = self.mass.iter().position(|&m| m == q) {
            return Ok(self.lambda[i]);
        }
        let k = self.mass.partition_point(|&m| m > q);
        let (mut a, mut b) = (
            self.lambda[k.saturating_sub(1)],
            self.lambda[k.min(self.lambda.len() - 1)],
        );
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.q.eval(mid) > q {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }

    fn energy_at_mass(&self, q: f64) -> Result<(f64, f64)> {
        if let Some(i) = self.mass.iter().position(|&m| m == q) {
            return Ok((self.energy[i], self.lambda[i]));
        }
        let l = self.lambda_at_mass(q)?;
        Ok((self.e.eval(l), l))
    }
}

/// `(E, Λ)` on the branch at mass `q`.
pub fn energy_at_mass(b: &Branch, q: f64) -> Result<(f64, f64)> {
    Curve::new(b)?.energy_at_mass(q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    First,
    Second,
    Tie,
}

/// Ordering of `Q₁ - Q₂` on the common `Λ` window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Hypothesis {
    FirstBelow,
    SecondBelow,
    Identical,
    /// `Q₁ - Q₂` changes sign near `lambda`.
    Crossing {
        lambda: f64,
    },
    /// The `Λ` ranges do not overlap.
    Unchecked,
}

impl Hypothesis {
    pub fn holds(&self) -> bool {
        matches!(
            self,
            Hypothesis::FirstBelow | Hypothesis::SecondBelow | Hypothesis::Identical
        )
    }

    fn expected(&self) -> Option<Winner> {
        match self {
            Hypothesis::FirstBelow => Some(Winner::Second),
            Hypothesis::SecondBelow => Some(Winner::First),
            Hypothesis::Identical => Some(Winner::Tie),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassComparison {
    pub q: f64,
    pub e1: f64,
    pub e2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Branch with the lower energy.
    pub winner: Winner,
    pub hypothesis: Hypothesis,
    /// Whether the energy ordering matches the mass ordering; `None` when
    /// the hypothesis does not hold.
    pub conclusion_holds: Option<bool>,
}

const ENERGY_TIE: f64 = 1e-10;
const MASS_TIE: f64 = 1e-12;

fn hypothesis(a: &Curve, b: &Curve) -> (Hypothesis, Option<(f64, f64)>) {
    let lo = a.lambda[0].max(b.lambda[0]);
    let hi = a.lambda[a.lambda.len() - 1].min(b.lambda[b.lambda.len() - 1]);
    if !(lo < hi) {
        return (Hypothesis::Unchecked, None);
    }
    let mut xs: Vec<f64> = a
        .lambda
        .iter()
        .chain(&b.lambda)
        .copied()
        .filter(|&l| l >= lo && l <= hi)
        .collect();
    xs.push(lo);
    xs.push(hi);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut sign = 0i8;
    let mut last_lambda = lo;
    for &l in &xs {
        let (q1, q2) = (a.q.eval(l), b.q.eval(l));
        let d = q1 - q2;
        let s = if d.abs() <= MASS_TIE * q1.abs().max(q2.abs()) {
            0
        } else {
            d.signum() as i8
        };
        if s != 0 {
            if sign != 0 && s != sign {
                return (
                    Hypothesis::Crossing {
                        lambda: 0.5 * (last_lambda + l),
                    },
                    Some((lo, hi)),
                );
            }
            sign = s;
            last_lambda = l;
        }
    }
    let h = match sign {
        0 => Hypothesis::Identical,
        -1 => Hypothesis::FirstBelow,
        _ => Hypothesis::SecondBelow,
    };
    (h, Some((lo, hi)))
}

fn compare_curves(a: &Curve, b: &Curve, h: Hypothesis, q: f64) -> Result<MassComparison> {
    let (e1, lambda1) = a.energy_at_mass(q)?;
    let (e2, lambda2) = b.energy_at_mass(q)?;
    let winner = if (e1 - e2).abs() <= ENERGY_TIE * e1.abs().max(e2.abs()) {
        Winner::Tie
    } else if e1 < e2 {
        Winner::First
    } else {
        Winner::Second
    };
    let conclusion_holds = h.expected().map(|w| w == winner || winner == Winner::Tie);
    Ok(MassComparison {
        q,
        e1,
        e2,
        lambda1,
        lambda2,
        winner,
        hypothesis: h,
        conclusion_holds,
    })
}

/// Which branch has the lower energy at mass `q`, with the check of the
/// mass ordering on the common `Λ` window.
pub fn compare_at_mass(first: &Branch, second: &Branch, q: f64) -> Result<MassComparison> {
    let (a, b) = (Curve::new(first)?, Curve::new(second)?);
    let (h, _) = hypothesis(&a, &b);
    compare_curves(&a, &b, h, q)
}

fn common_masses(a: &Curve, b: &Curve, window: (f64, f64)) -> Vec<f64> {
    let range = |c: &Curve| (c.q.eval(window.1), c.q.eval(window.0));
    let ((a0, a1), (b0, b1)) = (range(a), range(b));
    let (lo, hi) = (a0.max(b0), a1.min(b1));
    if !(lo <= hi) {
        return Vec::new();
    }
    let mut qs: Vec<f64> = a
        .mass
        .iter()
        .chain(&b.mass)
        .copied()
        .filter(|&q| q >= lo && q <= hi)
        .collect();
    qs.push(hi);
    qs.sort_by(|x, y| y.total_cmp(x));
    qs.dedup();
    qs
}

/// Orderings at the three largest common masses.
pub fn large_mass_comparisons(first: &Branch, second: &Branch) -> Result<Vec<MassComparison>> {
    let (a, b) = (Curve::new(first)?, Curve::new(second)?);
    let (h, window) = hypothesis(&a, &b);
    let Some(window) = window else {
        return Err(Error::Range("branches have no common Lambda window".into()));
    };
    common_masses(&a, &b, window)
        .into_iter()
        .take(3)
        .map(|q| compare_curves(&a, &b, h, q))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub window: Option<(f64, f64)>,
    pub hypothesis: Hypothesis,
    pub masses_checked: usize,
    /// Common masses where the energy ordering contradicts the mass ordering.
    pub violations: Vec<MassComparison>,
}

impl LemmaReport {
    pub fn within_hypotheses(&self) -> bool {
        self.hypothesis.holds()
    }
}

/// Checks that `Q₁ - Q₂` keeps its sign on the common window and that the
/// energy ordering at every common sampled mass is the opposite one.
pub fn verify_comparison_lemma(first: &Branch, second: &Branch) -> Result<LemmaReport> {
    let (a, b) = (Curve::new(first)?, Curve::new(second)?);
    let (h, window) = hypothesis(&a, &b);
    let mut report = LemmaReport {
        window,
        hypothesis: h,
        masses_checked: 0,
        violations: Vec::new(),
    };
    let Some(window) = window else {
        return Ok(report);
    };
    if !h.holds() {
        return Ok(report);
    }
    for q in common_masses(&a, &b, window) {
        let c = compare_curves(&a, &b, h, q)?;
        report.masses_checked += 1;
        if c.conclusion_holds == Some(false) {
            report.violations.push(c);
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub edge: Option<String>,
    /// Least-squares `c` in `(Q₀ - Q)/(μ²ℓe^{-2μℓ}) ≈ c + B/(μℓ)`.
    pub fitted: f64,
    pub intercept_slope: f64,
    pub predicted: f64,
    pub relative_error: f64,
    pub points: usize,
    pub mu_range: (f64, f64),
}

/// Smallest predicted correction, relative to the leading mass, that a fit
/// point may carry.
const RESOLVABLE: f64 = 1e-7;

/// Fits the coefficient of the exponential mass correction on the branch
/// points with `μ` in `mu_range` and compares it with the prediction.  The
/// `B/(μℓ)` term absorbs the next order of the expansion.  Points whose
/// predicted correction is below grid accuracy are skipped.
pub fn asymptotic_vs_numeric(
    branch: &Branch,
    pred: &EdgeStatePrediction,
    mu_range: (f64, f64),
) -> Result<FitReport> {
    let lead = pred.leading_mass / pred.mu;
    let ell = pred.ell;
    let scale = |mu: f64| mu * mu * ell * (-2.0 * mu * ell).exp();
    let used: Vec<_> = branch
        .points
        .iter()
        .filter(|p| p.mu >= mu_range.0 && p.mu <= mu_range.1)
        .filter(|p| (pred.coefficient * scale(p.mu)).abs() >= RESOLVABLE * lead * p.mu)
        .collect();
    let samples: Vec<(f64, f64)> = used
        .iter()
        .map(|p| (1.0 / (p.mu * ell), (lead * p.mu - p.mass) / scale(p.mu)))
        .collect();
    let (mu_lo, mu_hi) = used
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.mu), b.max(p.mu))
        });
    if samples.len() < 3 || !(mu_hi > 1.2 * mu_lo) {
        return Err(Error::domain(format!(
            "fit window too narrow: {} points over mu in [{mu_lo}, {mu_hi}]",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let (sx, sy) = samples
        .iter()
        .fold((0.0, 0.0), |(a, b), s| (a + s.0, b + s.1));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let slope = sxy / sxx;
    let fitted = my - slope * mx;
    let predicted = pred.coefficient;
    let relative_error = if predicted == 0.0 {
        fitted.abs()
    } else {
        ((fitted - predicted) / predicted).abs()
    };
    Ok(FitReport {
        edge: pred.edge.clone(),
        fitted,
        intercept_slope: slope,
        predicted,
        relative_error,
        points: samples.len(),
        mu_range: (mu_lo, mu_hi),
    })
}

/// Heuristic energy `-Q³/(3M²)` of a state made of `M` equal bumps meeting
/// at a vertex; an annotation only.
pub fn bump_energy_heuristic(q: f64, bumps: usize) -> f64 {
    -q.powi(3) / (3.0 * (bumps * bumps) as f64)
}

/// Two loops of length `loop_len` joined by `k` edges of length `internal_len`.
pub fn dumbbell(k: usize, loop_len: f64, internal_len: f64) -> Result<MetricGraph> {
    let mut b = MetricGraph::builder()
        .vertex("a")
        .vertex("b")
        .looped("la", "a", loop_len)
        .looped("lb", "b", loop_len);
    for i in 0..k {
        b = b.edge(format!("e{i}"), "a", "b", internal_len);
    }
    b.build()
}

/// A loop of length `loop_len` with `halflines` half-lines at its vertex.
pub fn tadpole(halflines: usize, loop_len: f64) -> Result<MetricGraph> {
    let mut b = MetricGraph::builder()
        .vertex("v")
        .looped("loop", "v", loop_len);
    for i in 0..halflines {
        b = b.halfline(format!("h{i}"), "v");
    }
    b.build()
}

/// Ring of `cells` cells; cell `i` joins `a{i}` and `b{i}` by two edges of
/// length `2 lstar` (the halves of a loop) and `b{i}` to `a{i+1}` by an edge
/// of length `2 l0`.
pub fn periodic_ring(cells: usize, l0: f64, lstar: f64) -> Result<MetricGraph> {
    if cells == 0 {
        return Err(Error::domain("a periodic ring needs at least one cell"));
    }
    let mut b = MetricGraph::builder();
    for i in 0..cells {
        b = b.vertex(format!("a{i}")).vertex(format!("b{i}"));
    }
    for i in 0..cells {
        let (a, bb, next) = (
            format!("a{i}"),
            format!("b{i}"),
            format!("a{}", (i + 1) % cells),
        );
        b = b
            .edge(format!("h{i}u"), a.clone(), bb.clone(), 2.0 * lstar)
            .edge(format!("h{i}d"), a, bb.clone(), 2.0 * lstar)
            .edge(format!("c{i}"), bb, next, 2.0 * l0);
    }
    b.build()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    /// Branches run from `mu_max` down to `mu_min`.
    pub mu_max: f64,
    pub mu_min: f64,
    pub points: usize,
    pub points_per_wavelength: f64,
}

impl SweepConfig {
    pub fn lambdas(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n)
            .map(|i| {
                let mu = self.mu_max + (self.mu_min - self.mu_max) * i as f64 / (n - 1) as f64;
                -mu * mu
            })
            .collect()
    }

    pub fn discretize(&self, g: &MetricGraph) -> Result<Discretization> {
        let mut opts = DiscretizationOptions::new(self.mu_max, self.points_per_wavelength);
        opts.cut_length = Some(30.0 / self.mu_min);
        Discretization::new(g, opts)
    }
}

/// Branch of states localized on `edge`, seeded from the prediction at
/// `mu_max` and swept down to `mu_min`.
pub fn edge_branch(d: &Discretization, edge: &str, cfg: &SweepConfig) -> Result<Branch> {
    let e = d.graph().edge_by_id(edge)?;
    let pred = predict_edge(d.graph(), e, cfg.mu_max)?;
    let seed = seed_from_prediction(&pred, d)?;
    sweep_lambda(d, &seed, &cfg.lambdas(), NewtonOptions::default())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabeledBranch {
    pub label: String,
    pub edge: Option<String>,
    pub branch: Branch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSummary {
    pub first: String,
    pub second: String,
    pub lemma: LemmaReport,
    pub large_mass: Vec<MassComparison>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseStudy {
    pub name: String,
    pub graph: String,
    pub config: SweepConfig,
    pub branches: Vec<LabeledBranch>,
    pub pairs: Vec<PairSummary>,
    pub fits: Vec<FitReport>,
    pub existence: Option<ExistenceReport>,
    pub notes: Vec<String>,
}

fn pair(branches: &[LabeledBranch], i: usize, j: usize) -> Result<PairSummary> {
    let (a, b) = (&branches[i], &branches[j]);
    Ok(PairSummary {
        first: a.label.clone(),
        second: b.label.clone(),
        lemma: verify_comparison_lemma(&a.branch, &b.branch)?,
        large_mass: large_mass_comparisons(&a.branch, &b.branch)?,
    })
}

fn edge_branches(
    d: &Discretization,
    labels: &[(&str, &str)],
    cfg: &SweepConfig,
) -> Result<Vec<LabeledBranch>> {
    labels
        .par_iter()
        .map(|&(label, edge)| {
            Ok(LabeledBranch {
                label: label.into(),
                edge: Some(edge.into()),
                branch: edge_branch(d, edge, cfg)?,
            })
        })
        .collect()
}

/// Loop-centered, edge-centered and constant branches on a dumbbell with
/// `k` internal edges.
pub fn reproduce_dumbbell(
    k: usize,
    loop_len: f64,
    internal_len: f64,
    cfg: SweepConfig,
) -> Result<CaseStudy> {
    let g = dumbbell(k, loop_len, internal_len)?;
    let d = cfg.discretize(&g)?;
    let mut branches = edge_branches(&d, &[("loop", "la"), ("edge", "e0")], &cfg)?;
    let lambdas = cfg.lambdas();
    let constant = sweep_lambda(
        &d,
        &constant_seed(&d, lambdas[0])?,
        &lambdas,
        NewtonOptions::default(),
    )?;
    branches.push(LabeledBranch {
        label: "constant".into(),
        edge: None,
        branch: constant,
    });
    let pairs = vec![pair(&branches, 0, 1)?];
    let fits = ["la", "e0"]
        .iter()
        .zip(&branches)
        .filter_map(|(e, b)| {
            let pred = predict_edge(&g, g.edge_index(e)?, cfg.mu_max).ok()?;
            asymptotic_vs_numeric(&b.branch, &pred, (cfg.mu_min, cfg.mu_max)).ok()
        })
        .collect();
    Ok(CaseStudy {
        name: format!("dumbbell K={k}"),
        graph: g.to_spec(),
        config: cfg,
        branches,
        pairs,
        fits,
        existence: None,
        notes: Vec::new(),
    })
}

/// Loop-centered branch on a tadpole with `halflines` half-lines, its mass
/// correction fit and the existence verdict.
pub fn reproduce_tadpole(halflines: usize, loop_len: f64, cfg: SweepConfig) -> Result<CaseStudy> {
    let g = tadpole(halflines, loop_len)?;
    let d = cfg.discretize(&g)?;
    let branches = edge_branches(&d, &[("loop", "loop")], &cfg)?;
    let pred = predict_edge(&g, g.edge_by_id("loop")?, cfg.mu_max)?;
    let mut notes = Vec::new();
    let above = branches[0]
        .branch
        .points
        .iter()
        .filter(|p| p.mass > 2.0 * p.mu)
        .count();
    notes.push(format!(
        "{above} of {} points have Q > 2 mu",
        branches[0].branch.points.len()
    ));
    let fits = asymptotic_vs_numeric(&branches[0].branch, &pred, (cfg.mu_min, cfg.mu_max))
        .into_iter()
        .collect();
    Ok(CaseStudy {
        name: format!("tadpole K={halflines}"),
        graph: g.to_spec(),
        config: cfg,
        branches,
        pairs: Vec::new(),
        fits,
        existence: Some(ground_state_existence(&g)),
        notes,
    })
}

/// Edge-centered and half-loop-centered branches on a periodic ring.
pub fn reproduce_periodic(
    cells: usize,
    l0: f64,
    lstar: f64,
    cfg: SweepConfig,
) -> Result<CaseStudy> {
    let g = periodic_ring(cells, l0, lstar)?;
    let d = cfg.discretize(&g)?;
    let branches = edge_branches(&d, &[("edge", "c0"), ("loop", "h0u")], &cfg)?;
    let pairs = vec![pair(&branches, 0, 1)?];
    let mut notes = Vec::new();
    if ((l0 - lstar) / lstar).abs() < 1e-9 {
        notes.push("equal half-lengths: the first-order comparison is not conclusive".into());
    }
    Ok(CaseStudy {
        name: format!("periodic cells={cells}"),
        graph: g.to_spec(),
        config: cfg,
        branches,
        pairs,
        fits: Vec::new(),
        existence: None,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::BranchPoint;

    fn synthetic(points: &[(f64, f64, f64)]) -> Branch {
        Branch {
            points: points
                .iter()
                .map(|&(lambda, mass, energy)| BranchPoint {
                    lambda,
                    mu: (-lambda).sqrt(),
                    mass,
                    energy,
                    residual: 0.0,
                    loc_edge: None,
                    loc_ratio: 0.0,
                    det_sign: 1.0,
                    values: Vec::new(),
                })
                .collect(),
            turning_points: Vec::new(),
            bifurcation_suspects: Vec::new(),
            steps: Vec::new(),
            termination: crate::solver::Termination::Completed,
        }
    }

    #[test]
    fn interpolant_is_monotone_and_exact_at_nodes() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [0.0, 0.1, 3.0, 3.1, 10.0];
        let f = MonotoneCubic::new(&x, &y).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert_eq!(f.eval(*a), *b);
        }
        let mut last = f64::NEG_INFINITY;
        for i in 0..=400 {
            let v = f.eval(i as f64 / 100.0);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn constant_state_energy_at_mass() {
        // Q = c²T, E = -c⁴T with c² = -Λ/2
        let t = 7.0;
        let pts: Vec<(f64, f64, f64)> = (1..=20)
            .map(|i| -0.5 * i as f64)
            .map(|l| (l, -0.5 * l * t, -0.25 * l * l * t))
            .collect();
        let b = synthetic(&pts);
        for q in [2.0, 5.5, 20.0] {
            let (e, _) = energy_at_mass(&b, q).unwrap();
            assert!(
                (e + q * q / t).abs() < 1e-3 * q * q / t,
                "{e} vs {}",
                -q * q / t
            );
        }
        assert!(matches!(energy_at_mass(&b, 100.0), Err(Error::Range(_))));
    }

    #[test]
    fn identical_branches_tie() {
        let pts: Vec<(f64, f64, f64)> = (1..10)
            .map(|i| -(i as f64))
            .map(|l| (l, -l, -l * l))
            .collect();
        let b = synthetic(&pts);
        let c = compare_at_mass(&b, &b, 4.5).unwrap();
        assert_eq!(c.winner, Winner::Tie);
        assert_eq!(c.hypothesis, Hypothesis::Identical);
    }

    #[test]
    fn crossing_pair_flagged() {
        let a: Vec<(f64, f64, f64)> = (1..10).map(|i| -(i as f64)).map(|l| (l, -l, l)).collect();
        let b: Vec<(f64, f64, f64)> = (1..10)
            .map(|i| -(i as f64))
            .map(|l| (l, -l + 0.3 * (l + 5.0), l))
            .collect();
        let r = verify_comparison_lemma(&synthetic(&a), &synthetic(&b)).unwrap();
        assert!(matches!(r.hypothesis, Hypothesis::Crossing { .. }));
        assert!(!r.within_hypotheses());
    }

    #[test]
    fn ring_degrees() {
        let g = periodic_ring(3, 1.0, 0.5).unwrap();
        assert!((0..g.vertex_count()).all(|v| g.degree(v) == 3));
        match g.classify_edge(g.edge_index("c1").unwrap()) {
            crate::EdgeKind::Internal {
                n_minus, n_plus, ..
            } => assert_eq!((n_minus, n_plus), (2, 2)),
            k => panic!("{k:?}"),
        }
    }
}
