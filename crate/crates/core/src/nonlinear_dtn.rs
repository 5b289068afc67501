//! Nonlinear Dirichlet-to-Neumann data of the scaled equation
//! `-Ψ'' + Ψ - 2Ψ³ = 0`.
//!
//! Three pieces: boundary data of all solutions on a single Neumann edge
//! (by shooting), the single-bump part of that set parametrized by the
//! elliptic modulus, and the small solutions on a remainder graph.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::{complete_k, jacobi};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::linear_dtn::solve_linear_bvp;
use crate::ode::{integrate, Outcome, Tolerances};
use crate::solver::{newton_solve, Discretization, DiscretizationOptions, NewtonOptions};

/// Orbit type of the solution with `Ψ(0) = A`, `Ψ'(0) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitType {
    Zero,
    /// `|A| = 1/√2`.
    Constant,
    /// Sign-definite periodic orbit inside the separatrix.
    Dnoidal,
    /// `|A| = 1`, the sech profile.
    Soliton,
    /// Sign-changing periodic orbit outside the separatrix.
    Cnoidal,
    /// The integration left the bounded region or failed.
    Divergent,
}

/// Boundary data `(Ψ(L), Ψ'(L))` of the solution started at rest from `Ψ(0) = amplitude`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DtnSample {
    pub amplitude: f64,
    pub p: f64,
    pub q: f64,
    pub orbit: OrbitType,
    /// Change of `Ψ'² - Ψ² + Ψ⁴` along the integration.
    pub drift: f64,
}

const ORBIT_TOL: f64 = 1e-14;

fn orbit_type(a: f64) -> OrbitType {
    let a = a.abs();
    if a < ORBIT_TOL {
        OrbitType::Zero
    } else if (a - FRAC_1_SQRT_2).abs() < ORBIT_TOL {
        OrbitType::Constant
    } else if (a - 1.0).abs() < ORBIT_TOL {
        OrbitType::Soliton
    } else if a < 1.0 {
        OrbitType::Dnoidal
    } else {
        OrbitType::Cnoidal
    }
}

fn hamiltonian(y: &[f64; 2]) -> f64 {
    y[1] * y[1] - y[0] * y[0] + y[0].powi(4)
}

/// Shoots one solution from `Ψ(0) = amplitude`, `Ψ'(0) = 0` to `z = l`.
pub fn shoot(l: f64, amplitude: f64) -> Result<DtnSample> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::domain(format!(
            "edge length must be positive, got {l}"
        )));
    }
    let y0 = [amplitude, 0.0];
    let h0 = hamiltonian(&y0);
    let rhs = |y: &[f64; 2]| [y[1], y[0] - 2.0 * y[0].powi(3)];
    let divergent = DtnSample {
        amplitude,
        p: f64::NAN,
        q: f64::NAN,
        orbit: OrbitType::Divergent,
        drift: f64::NAN,
    };
    Ok(match integrate(rhs, y0, l, Tolerances::default()) {
        Ok(Outcome::Reached { y, .. }) => {
            let drift = (hamiltonian(&y) - h0).abs();
            DtnSample {
                amplitude,
                p: y[0],
                q: y[1],
                orbit: orbit_type(amplitude),
                drift,
            }
        }
        Ok(Outcome::Escaped { .. }) | Err(Error::Convergence(_)) => divergent,
        Err(e) => return Err(e),
    })
}

/// Samples the DtN manifold of the edge `[0, l]` with a Neumann end at `0`.
/// Divergent solutions are reported, not dropped.
pub fn trace_edge_manifold(l: f64, amplitudes: &[f64]) -> Result<Vec<DtnSample>> {
    amplitudes.par_iter().map(|&a| shoot(l, a)).collect()
}

/// Positive solutions on `[0, L]`, maximal at the Neumann end and
/// decreasing towards `L`, parametrized by `k` in `(k_minus, k_plus)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingleBumpBranch {
    pub l: f64,
    pub k_minus: f64,
    pub k_plus: f64,
}

const K_LOW: f64 = 0.5;
const K_HIGH: f64 = SQRT_2 - 1e-9;

/// Bisects a sign change of `f` on `[a, b]` down to adjacent doubles.
pub(crate) fn bisect(mut a: f64, mut b: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::numerical(format!("no sign change on [{a}, {b}]")));
    }
    let neg_at_a = fa < 0.0;
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Ok(m);
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
}

/// The window `(k_-, k_+)` of single-bump solutions on `[0, l]`.
pub fn single_bump_window(l: f64) -> Result<SingleBumpBranch> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::domain(format!(
            "half-length must be positive, got {l}"
        )));
    }
    // ¼ period of dn in z must cover the edge
    let quarter = |k: f64| -> Result<f64> { Ok((2.0 - k * k).sqrt() * complete_k(k)? - l) };
    if quarter(K_LOW)? >= 0.0 {
        return Err(Error::domain(format!(
            "single-bump window does not fit in (0.5, 1) for L = {l}; L must exceed {:.6}",
            quarter(K_LOW)? + l
        )));
    }
    let k_minus = bisect(K_LOW, 1.0 - f64::EPSILON, quarter)?;
    // first zero of dn(u; k) = cn(k u; 1/k) for k > 1
    let zero = |k: f64| -> Result<f64> { Ok(k * l / (2.0 - k * k).sqrt() - complete_k(1.0 / k)?) };
    if zero(K_HIGH)? <= 0.0 {
        return Err(Error::domain(format!(
            "no upper window edge below sqrt 2 for L = {l}"
        )));
    }
    let k_plus = bisect(1.0 + 2.0 * f64::EPSILON, K_HIGH, zero)?;
    Ok(SingleBumpBranch { l, k_minus, k_plus })
}

impl SingleBumpBranch {
    pub fn new(l: f64) -> Result<Self> {
        single_bump_window(l)
    }

    pub fn contains(&self, k: f64) -> bool {
        k >= self.k_minus && k <= self.k_plus
    }

    /// `(p_L, q_L) = (Ψ(L), Ψ'(L))`.
    pub fn values(&self, k: f64) -> Result<(f64, f64)> {
        if !self.contains(k) {
            return Err(Error::domain(format!(
                "k = {k} is outside the single-bump window ({}, {})",
                self.k_minus, self.k_plus
            )));
        }
        raw_values(self.l, k)
    }

    /// Centered-difference `(∂p_L/∂k, ∂q_L/∂k)`.
    pub fn derivatives(&self, k: f64) -> Result<(f64, f64)> {
        self.values(k)?;
        let width = self.k_plus - self.k_minus;
        let h = (1e-2 * width).min(k - self.k_minus).min(self.k_plus - k);
        let (lo, hi) = if h > 1e-4 * width {
            (k - h, k + h)
        } else if k - self.k_minus < self.k_plus - k {
            (k, k + 1e-2 * width)
        } else {
            (k - 1e-2 * width, k)
        };
        let (p0, q0) = raw_values(self.l, lo)?;
        let (p1, q1) = raw_values(self.l, hi)?;
        let step = hi - lo;
        Ok(((p1 - p0) / step, (q1 - q0) / step))
    }
}

fn raw_values(l: f64, k: f64) -> Result<(f64, f64)> {
    let s2 = 2.0 - k * k;
    let j = jacobi(l / s2.sqrt(), k)?;
    Ok((j.dn / s2.sqrt(), -k * k / s2 * j.sn * j.cn))
}

/// `(p_L, q_L)` for `k` in the window of `[0, l]`.
pub fn single_bump_values(l: f64, k: f64) -> Result<(f64, f64)> {
    single_bump_window(l)?.values(k)
}

/// `(∂p_L/∂k, ∂q_L/∂k)` for `k` in the window of `[0, l]`.
pub fn single_bump_derivatives(l: f64, k: f64) -> Result<(f64, f64)> {
    single_bump_window(l)?.derivatives(k)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemainderOptions {
    /// Largest admissible `max |p_j|`.
    pub p0: f64,
    pub points_per_wavelength: f64,
    /// Truncation length of half-lines (scaled units).
    pub cut_length: f64,
    pub newton: NewtonOptions,
}

impl Default for RemainderOptions {
    fn default() -> Self {
        RemainderOptions {
            p0: 0.1,
            points_per_wavelength: 40.0,
            cut_length: 30.0,
            newton: NewtonOptions {
                max_iterations: 50,
                tolerance: 1e-10,
                max_halvings: 12,
            },
        }
    }
}

/// Small solutions on a fixed scaled remainder graph; the grid is built once.
#[derive(Clone, Debug)]
pub struct RemainderDtn {
    graph: MetricGraph,
    disc: Arc<Discretization>,
    opts: RemainderOptions,
}

/// Small solution of the scaled equation with Dirichlet data `p`.
#[derive(Clone, Debug)]
pub struct SmallSolution {
    pub discretization: Arc<Discretization>,
    pub values: Vec<f64>,
    pub p: Vec<f64>,
    /// Sum of derivatives towards each boundary vertex.
    pub q: Vec<f64>,
    pub sup_norm: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl RemainderDtn {
    /// `gc_mu` is a remainder graph already scaled by `μ`; its boundary
    /// vertices carry the data.
    pub fn new(gc_mu: &MetricGraph, opts: RemainderOptions) -> Result<Self> {
        if gc_mu.boundary().is_empty() {
            return Err(Error::domain("remainder graph has no boundary vertices"));
        }
        let mut d = DiscretizationOptions::new(1.0, opts.points_per_wavelength);
        d.dirichlet = true;
        d.cut_length = Some(opts.cut_length);
        let disc = Discretization::new(gc_mu, d)?;
        Ok(RemainderDtn {
            graph: gc_mu.clone(),
            disc: Arc::new(disc),
            opts,
        })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    /// Solves with boundary values `p`, seeded from the linear solution.
    pub fn solve(&self, p: &[f64]) -> Result<SmallSolution> {
        let nb = self.graph.boundary().len();
        if p.len() != nb {
            return Err(Error::domain(format!(
                "expected {nb} boundary values, got {}",
                p.len()
            )));
        }
        let pmax = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(pmax <= self.opts.p0) {
            return Err(Error::domain(format!(
                "boundary data {pmax:.3e} exceed the smallness threshold {}",
                self.opts.p0
            )));
        }
        let lin = solve_linear_bvp(&self.graph, p)?;
        let seed = self.disc.sample(|e, x| lin.value(e, x));
        let out =
            newton_solve(&self.disc, -1.0, &seed, p, self.opts.newton).map_err(|e| match e {
                Error::Convergence(m) => {
                    Error::Convergence(format!("{m}; boundary data may be too large"))
                }
                other => other,
            })?;
        let sup_norm = out.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if sup_norm >= FRAC_1_SQRT_2 {
            return Err(Error::Validation(format!(
                "small solution has sup-norm {sup_norm:.4} >= 1/sqrt 2"
            )));
        }
        let q = self.disc.boundary_flux(&out.values, -1.0);
        Ok(SmallSolution {
            discretization: Arc::clone(&self.disc),
            values: out.values,
            p: p.to_vec(),
            q,
            sup_norm,
            residual: out.residual,
            iterations: out.iterations,
        })
    }
}

/// Small solution on `gc_mu` with boundary values `p`.
pub fn remainder_dtn(
    gc_mu: &MetricGraph,
    p: &[f64],
    opts: RemainderOptions,
) -> Result<SmallSolution> {
    RemainderDtn::new(gc_mu, opts)?.solve(p)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "check")]
pub enum SmallSolutionViolation {
    SupNorm {
        value: f64,
    },
    /// `|Ψ|` exceeds its boundary maximum at an interior point.
    InteriorMaximum {
        edge: String,
        x: f64,
        excess: f64,
    },
    Negative {
        edge: String,
        x: f64,
        value: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallSolutionReport {
    pub sup_norm: f64,
    /// `max |Ψ| - max |p|`, positive when the maximum principle fails on the grid.
    pub max_principle_excess: f64,
    pub violations: Vec<SmallSolutionViolation>,
}

impl SmallSolutionReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the sup-norm bound, that the maximum of `|Ψ|` sits on the
/// boundary, and nonnegativity for nonnegative data.  Deviations up to
/// `tolerance` (relative to `max |p|`) are accepted as grid artifacts.
pub fn validate_small_solution(sol: &SmallSolution, tolerance: f64) -> SmallSolutionReport {
    let d = &sol.discretization;
    let pmax = sol.p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = tolerance * pmax.max(f64::MIN_POSITIVE);
    let mut violations = Vec::new();
    if sol.sup_norm >= FRAC_1_SQRT_2 {
        violations.push(SmallSolutionViolation::SupNorm {
            value: sol.sup_norm,
        });
    }
    let is_vertex = |i: usize| i < d.graph().vertex_count() && d.dirichlet_nodes().contains(&i);
    let mut excess = f64::NEG_INFINITY;
    let mut worst: Option<(usize, usize)> = None;
    let nonneg = sol.p.iter().all(|&v| v >= 0.0);
    let mut most_negative: Option<(usize, usize, f64)> = None;
    for grid in d.grids() {
        for (i, &node) in grid.nodes.iter().enumerate() {
            if is_vertex(node) {
                continue;
            }
            let v = sol.values[node];
            if v.abs() - pmax > excess {
                excess = v.abs() - pmax;
                worst = Some((grid.edge, i));
            }
            if nonneg && v < -tol && most_negative.is_none_or(|(_, _, m)| v < m) {
                most_negative = Some((grid.edge, i, v));
            }
        }
    }
    let name = |e: usize| d.graph().edge(e).id.clone();
    if excess > tol {
        if let Some((e, i)) = worst {
            violations.push(SmallSolutionViolation::InteriorMaximum {
                edge: name(e),
                x: d.grid(e).coordinate(i),
                excess,
            });
        }
    }
    if let Some((e, i, value)) = most_negative {
        violations.push(SmallSolutionViolation::Negative {
            edge: name(e),
            x: d.grid(e).coordinate(i),
            value,
        });
    }
    SmallSolutionReport {
        sup_norm: sol.sup_norm,
        max_principle_excess: excess.max(0.0),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifold_special_orbits() {
        let s = trace_edge_manifold(3.0, &[0.0, FRAC_1_SQRT_2, 1.0]).unwrap();
        assert_eq!((s[0].p, s[0].q), (0.0, 0.0));
        assert!((s[1].p - FRAC_1_SQRT_2).abs() < 1e-12 && s[1].q.abs() < 1e-12);
        let (sech, tanh) = (1.0 / 3.0f64.cosh(), 3.0f64.tanh());
        assert!((s[2].p - sech).abs() < 1e-9 && (s[2].q + sech * tanh).abs() < 1e-9);
        assert_eq!(s[2].orbit, OrbitType::Soliton);
    }

    #[test]
    fn window_brackets_one() {
        let w = single_bump_window(4.0).unwrap();
        assert!(w.k_minus < 1.0 && w.k_plus > 1.0);
        assert!(single_bump_window(1.0).is_err());
    }

    #[test]
    fn values_at_k_one_are_sech() {
        let (p, q) = single_bump_values(6.0, 1.0).unwrap();
        let (sech, tanh) = (1.0 / 6.0f64.cosh(), 6.0f64.tanh());
        assert!((p - sech).abs() < 1e-15 && (q + sech * tanh).abs() < 1e-15);
        assert!(single_bump_values(6.0, 0.9).is_err());
    }

    #[test]
    fn window_edges_hit_constraints() {
        let w = single_bump_window(5.0).unwrap();
        let (_, q) = raw_values(5.0, w.k_minus).unwrap();
        let (p, _) = raw_values(5.0, w.k_plus).unwrap();
        assert!(q.abs() < 1e-10 && p.abs() < 1e-10);
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = MetricGraph::builder()
            .vertex("a")
            .vertex("b")
            .edge("e", "a", "b", 3.0)
            .boundary("a")
            .build()
            .unwrap();
        let s = remainder_dtn(&g, &[0.0], RemainderOptions::default()).unwrap();
        assert_eq!(s.sup_norm, 0.0);
        assert_eq!(s.q, vec![0.0]);
    }

    #[test]
    fn large_data_rejected() {
        let g = MetricGraph::builder()
            .vertex("a")
            .vertex("b")
            .edge("e", "a", "b", 3.0)
            .boundary("a")
            .build()
            .unwrap();
        assert!(remainder_dtn(&g, &[0.2], RemainderOptions::default()).is_err());
    }
}
