use serde::Serialize;

use super::discretize::Discretization;
use super::iterate::{
    newton_solve, petviashvili, singular_jacobian, NewtonOptions, PetviashviliOptions,
};
use super::linalg::{Border, Factorization};
use super::state::StationaryState;
use crate::error::{Error, Result};

/// Converges a guess at fixed `Λ`: Newton first, then Petviashvili followed
/// by Newton if the direct iteration fails.
pub fn solve_state(
    d: &Discretization,
    guess: &StationaryState,
    newton: NewtonOptions,
) -> Result<StationaryState> {
    match newton_solve(d, guess.lambda, &guess.values, &[], newton) {
        Ok(out) => Ok(StationaryState::new(
            d,
            guess.lambda,
            out.values,
            out.iterations,
        )),
        Err(first) => {
            let p = petviashvili(
                d,
                guess.lambda,
                &guess.values,
                PetviashviliOptions::default(),
            )
            .map_err(|_| first)?;
            let out = newton_solve(d, guess.lambda, &p.values, &[], newton)?;
            Ok(StationaryState::new(
                d,
                guess.lambda,
                out.values,
                p.iterations + out.iterations,
            ))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub mu: f64,
    pub mass: f64,
    pub energy: f64,
    pub residual: f64,
    pub loc_edge: Option<String>,
    pub loc_ratio: f64,
    /// Sign of the determinant of the Jacobian (bordered in arclength mode).
    pub det_sign: f64,
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl BranchPoint {
    fn new(d: &Discretization, s: StationaryState, det_sign: f64) -> Self {
        let (loc_edge, loc_ratio) = match s.localization {
            Some((e, r)) => (Some(d.graph().edge(e).id.clone()), r),
            None => (None, 0.0),
        };
        BranchPoint {
            lambda: s.lambda,
            mu: s.mu(),
            mass: s.mass,
            energy: s.energy,
            residual: s.residual,
            loc_edge,
            loc_ratio,
            det_sign,
            values: s.values,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Termination {
    /// The requested `Λ` range was covered.
    Completed,
    StepCollapse {
        lambda: f64,
    },
    MaxPoints,
    /// The sweep stopped at a point where the corrector failed.
    CorrectorFailure {
        lambda: f64,
        message: String,
    },
}

/// Sampled solution branch `Λ ↦ (Q, E, Φ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    /// Indices after which `dΛ/ds` changes sign.
    pub turning_points: Vec<usize>,
    /// Indices after which the determinant sign changes without a turning point.
    pub bifurcation_suspects: Vec<usize>,
    pub steps: Vec<f64>,
    pub termination: Termination,
}

impl Branch {
    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mass).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.energy).collect()
    }

    /// `|dE/dΛ - Λ dQ/dΛ| / |dE/dΛ|` at interior points, with three-point
    /// differences on the (possibly nonuniform) `Λ` samples.
    pub fn differential_identity(&self) -> Vec<(f64, f64)> {
        let p = &self.points;
        (1..p.len().saturating_sub(1))
            .filter_map(|i| {
                let (x0, x1, x2) = (p[i - 1].lambda, p[i].lambda, p[i + 1].lambda);
                let (h0, h1) = (x1 - x0, x2 - x1);
                if h0 == 0.0 || h1 == 0.0 || h0.signum() != h1.signum() {
                    return None;
                }
                let deriv = |f0: f64, f1: f64, f2: f64| {
                    -h1 / (h0 * (h0 + h1)) * f0
                        + (h1 - h0) / (h0 * h1) * f1
                        + h0 / (h1 * (h0 + h1)) * f2
                };
                let de = deriv(p[i - 1].energy, p[i].energy, p[i + 1].energy);
                let dq = deriv(p[i - 1].mass, p[i].mass, p[i + 1].mass);
                Some((x1, (de - x1 * dq).abs() / de.abs()))
            })
            .collect()
    }
}

/// Natural-parameter continuation over the given `Λ` values, in order, with
/// a secant predictor.  Stops at the first point that fails to converge.
pub fn sweep_lambda(
    d: &Discretization,
    seed: &StationaryState,
    lambdas: &[f64],
    newton: NewtonOptions,
) -> Result<Branch> {
    let mut points: Vec<BranchPoint> = Vec::new();
    let mut steps = Vec::new();
    let mut termination = Termination::Completed;
    for (i, &lambda) in lambdas.iter().enumerate() {
        if !(lambda < 0.0) {
            return Err(Error::domain(format!(
                "Lambda must be negative, got {lambda}"
            )));
        }
        let guess: Vec<f64> = match points.len() {
            0 => seed.values.clone(),
            1 => points[0].values.clone(),
            n => {
                let (a, b) = (&points[n - 2], &points[n - 1]);
                let t = (lambda - b.lambda) / (b.lambda - a.lambda);
                b.values
                    .iter()
                    .zip(&a.values)
                    .map(|(y1, y0)| y1 + t * (y1 - y0))
                    .collect()
            }
        };
        let guess = StationaryState::new(d, lambda, guess, 0);
        let state = match solve_state(d, &guess, newton) {
            Ok(s) => s,
            Err(e) if i > 0 => {
                termination = Termination::CorrectorFailure {
                    lambda,
                    message: e.to_string(),
                };
                break;
            }
            Err(e) => return Err(e),
        };
        let det = d
            .jacobian(&state.values, lambda)
            .and_then(|j| Factorization::new(&j, d.topology(), None))
            .map_or(0.0, |f| f.det_sign());
        if let Some(last) = points.last() {
            steps.push(lambda - last.lambda);
        }
        points.push(BranchPoint::new(d, state, det));
    }
    let bifurcation_suspects = sign_changes(&points, &[]);
    Ok(Branch {
        points,
        turning_points: Vec::new(),
        bifurcation_suspects,
        steps,
        termination,
    })
}

fn sign_changes(points: &[BranchPoint], skip: &[usize]) -> Vec<usize> {
    (1..points.len())
        .filter(|&i| {
            let (a, b) = (points[i - 1].det_sign, points[i].det_sign);
            a != 0.0 && b != 0.0 && a != b && !skip.contains(&(i - 1))
        })
        .map(|i| i - 1)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArclengthOptions {
    /// Stop once `Λ` leaves `[lambda_min, lambda_max]`.
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub max_points: usize,
    /// Start towards increasing `Λ` (decreasing `μ`).
    pub increasing: bool,
    pub newton: NewtonOptions,
}

impl Default for ArclengthOptions {
    fn default() -> Self {
        ArclengthOptions {
            lambda_min: f64::NEG_INFINITY,
            lambda_max: -1e-3,
            initial_step: 0.05,
            min_step: 1e-6,
            max_step: 2.0,
            max_points: 500,
            increasing: true,
            newton: NewtonOptions {
                max_iterations: 8,
                tolerance: 1e-11,
                max_halvings: 0,
            },
        }
    }
}

fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
}

/// Pseudo-arclength continuation in `(Φ, Λ)` with the `L²(Γ) × ℝ` metric,
/// a secant predictor and a Newton corrector on the bordered system.
pub fn continue_branch(
    d: &Discretization,
    seed: &StationaryState,
    opts: ArclengthOptions,
) -> Result<Branch> {
    let w = d.weights();
    let first = solve_state(d, seed, NewtonOptions::default())?;
    let lambda0 = first.lambda;

    // initial tangent from J dΦ/dΛ = -∂F/∂Λ
    let jac = d.jacobian(&first.values, lambda0)?;
    let fac = Factorization::new(&jac, d.topology(), None).map_err(singular_jacobian)?;
    let dl: Vec<f64> = d
        .lambda_derivative(&first.values, lambda0)
        .into_iter()
        .map(|x| -x)
        .collect();
    let (du, _) = fac.solve(&dl, 0.0);
    let sign = if opts.increasing { 1.0 } else { -1.0 };
    let norm = (weighted_dot(w, &du, &du) + 1.0).sqrt();
    let mut tu: Vec<f64> = du.iter().map(|x| sign * x / norm).collect();
    let mut tl = sign / norm;

    let mut points = vec![BranchPoint::new(d, first, 0.0)];
    let mut tangent_signs = vec![tl.signum()];
    let mut steps = Vec::new();
    let mut ds = opts.initial_step;
    let mut termination = Termination::MaxPoints;
    while points.len() < opts.max_points {
        let last = points.last().unwrap();
        if last.lambda < opts.lambda_min || last.lambda > opts.lambda_max {
            termination = Termination::Completed;
            break;
        }
        let (u0, l0) = (last.values.clone(), last.lambda);
        match corrector(d, &u0, l0, &tu, tl, ds, opts.newton) {
            Some((u, l, det)) => {
                let du: Vec<f64> = u.iter().zip(&u0).map(|(a, b)| a - b).collect();
                let dln = l - l0;
                let n = (weighted_dot(w, &du, &du) + dln * dln).sqrt();
                tu = du.iter().map(|x| x / n).collect();
                tl = dln / n;
                let state = StationaryState::new(d, l, u, 0);
                points.push(BranchPoint::new(d, state, det));
                tangent_signs.push(tl.signum());
                steps.push(ds);
                ds = (ds * 1.5).min(opts.max_step);
            }
            None => {
                ds *= 0.5;
                if ds < opts.min_step {
                    termination = Termination::StepCollapse { lambda: l0 };
                    break;
                }
            }
        }
    }
    if points.len() >= 2 {
        points[0].det_sign = points[1].det_sign;
    }
    let turning_points: Vec<usize> = (1..tangent_signs.len())
        .filter(|&i| tangent_signs[i] != tangent_signs[i - 1])
        .map(|i| i - 1)
        .collect();
    let bifurcation_suspects = sign_changes(&points, &turning_points);
    Ok(Branch {
        points,
        turning_points,
        bifurcation_suspects,
        steps,
        termination,
    })
}

fn corrector(
    d: &Discretization,
    u0: &[f64],
    l0: f64,
    tu: &[f64],
    tl: f64,
    ds: f64,
    newton: NewtonOptions,
) -> Option<(Vec<f64>, f64, f64)> {
    let w = d.weights();
    let mut u: Vec<f64> = u0.iter().zip(tu).map(|(a, t)| a + ds * t).collect();
    let mut l = l0 + ds * tl;
    let row: Vec<f64> = w.iter().zip(tu).map(|(w, t)| w * t).collect();
    for _ in 0..newton.max_iterations {
        if !(l < 0.0) {
            return None;
        }
        let f = d.residual(&u, l, &[]);
        let arc = weighted_dot(
            w,
            tu,
            &u.iter().zip(u0).map(|(a, b)| a - b).collect::<Vec<_>>(),
        ) + tl * (l - l0)
            - ds;
        let jac = d.jacobian(&u, l).ok()?;
        let col = d.lambda_derivative(&u, l);
        let fac = Factorization::new(
            &jac,
            d.topology(),
            Some(Border {
                column: &col,
                row: &row,
                corner: tl,
            }),
        )
        .ok()?;
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let (du, dl) = fac.solve(&rhs, -arc);
        for (ui, di) in u.iter_mut().zip(&du) {
            *ui += di;
        }
        l += dl;
        if d.relative_residual(&u, l, &[]) < newton.tolerance {
            return Some((u, l, fac.det_sign()));
        }
    }
    None
}
