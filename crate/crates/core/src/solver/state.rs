use serde::Serialize;

use super::discretize::Discretization;

/// Discrete stationary state `Φ` at `Λ = -μ²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryState {
    pub lambda: f64,
    #[serde(skip)]
    pub values: Vec<f64>,
    pub residual: f64,
    pub mass: f64,
    pub energy: f64,
    /// Edge carrying the largest share of the mass, with that share.
    pub localization: Option<(usize, f64)>,
    pub iterations: usize,
}

impl StationaryState {
    pub fn new(d: &Discretization, lambda: f64, values: Vec<f64>, iterations: usize) -> Self {
        let residual = d.relative_residual(&values, lambda, &[]);
        let mass = mass(d, &values);
        let energy = energy(d, &values);
        let localization = localization_edge(d, &values);
        StationaryState {
            lambda,
            values,
            residual,
            mass,
            energy,
            localization,
            iterations,
        }
    }

    pub fn mu(&self) -> f64 {
        (-self.lambda).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// `Q = ∫ Φ²` by the trapezoid rule on every edge.
pub fn mass(d: &Discretization, u: &[f64]) -> f64 {
    d.weights().iter().zip(u).map(|(w, x)| w * x * x).sum()
}

fn trapezoid(h: f64, f: &[f64]) -> f64 {
    let n = f.len() - 1;
    h * (f[1..n].iter().sum::<f64>() + 0.5 * (f[0] + f[n]))
}

/// Fourth-order finite-difference derivative along one edge.
pub fn edge_derivative(h: f64, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    let c = 1.0 / (12.0 * h);
    for i in 2..n - 2 {
        d[i] = c * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
    }
    let fwd = |f: &[f64]| -25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4];
    let fwd1 = |f: &[f64]| -3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4];
    d[0] = c * fwd(&f[0..5]);
    d[1] = c * fwd1(&f[0..5]);
    let rev: Vec<f64> = f[n - 5..].iter().rev().copied().collect();
    d[n - 1] = -c * fwd(&rev);
    d[n - 2] = -c * fwd1(&rev);
    d
}

/// `E = ∫ (Φ'² - Φ⁴)`.
pub fn energy(d: &Discretization, u: &[f64]) -> f64 {
    d.grids()
        .iter()
        .map(|g| {
            let f = d.edge_values(u, g.edge);
            let df = edge_derivative(g.h, &f);
            let grad: Vec<f64> = df.iter().map(|x| x * x).collect();
            let quart: Vec<f64> = f.iter().map(|x| x.powi(4)).collect();
            trapezoid(g.h, &grad) - trapezoid(g.h, &quart)
        })
        .sum()
}

/// `ΛQ + ∫Φ⁴`, equal to the energy for exact solutions.
pub fn energy_from_identity(d: &Discretization, u: &[f64], lambda: f64) -> f64 {
    let quart: f64 = d.weights().iter().zip(u).map(|(w, x)| w * x.powi(4)).sum();
    lambda * mass(d, u) + quart
}

/// `∫_e Φ²` for every edge.
pub fn edge_masses(d: &Discretization, u: &[f64]) -> Vec<f64> {
    d.grids()
        .iter()
        .map(|g| {
            let f: Vec<f64> = d.edge_values(u, g.edge).iter().map(|x| x * x).collect();
            trapezoid(g.h, &f)
        })
        .collect()
}

/// Share of the mass carried by `edge`.
pub fn localization_ratio(d: &Discretization, u: &[f64], edge: usize) -> f64 {
    let masses = edge_masses(d, u);
    let total: f64 = masses.iter().sum();
    if total == 0.0 {
        0.0
    } else {
        masses[edge] / total
    }
}

fn localization_edge(d: &Discretization, u: &[f64]) -> Option<(usize, f64)> {
    let masses = edge_masses(d, u);
    let total: f64 = masses.iter().sum();
    if total == 0.0 {
        return None;
    }
    masses
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(e, m)| (e, m / total))
}
