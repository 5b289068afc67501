//! Linear Dirichlet-to-Neumann map of `-Δ + 1` on a scaled graph.
//!
//! On a finite edge of (scaled) length `ℓ` the solution is written as
//! `u(s) = a e^{-s} + b e^{-(ℓ-s)}`, `s ∈ [0, ℓ]`, and on a half-line as
//! `u(s) = c e^{-s}`.  Continuity and Kirchhoff conditions at the vertices,
//! with Dirichlet data on the boundary vertices, give a square dense system
//! for the coefficients.  The basis stays bounded for any `ℓ`.
//!
//! Neumann data are sums of derivatives taken towards the boundary vertex
//! (out of the graph), so a single edge `[0, ℓ]` with a free end at 0 has
//! `q = tanh(ℓ) p`.
//!
//! The same map is produced independently by [`dtn_via_scattering`].

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeEnd, EdgeShape, MetricGraph};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DtnMatrix {
    pub mu: f64,
    /// Boundary vertex ids, in row order.
    pub boundary: Vec<String>,
    pub matrix: DMatrix<f64>,
}

impl DtnMatrix {
    /// Degrees of the boundary vertices, the `μ → ∞` limit of the map.
    pub fn degree_limit(g: &MetricGraph) -> DVector<f64> {
        DVector::from_iterator(
            g.boundary().len(),
            g.boundary().iter().map(|&v| g.degree(v) as f64),
        )
    }

    /// Spectral norm of `M - diag(d)`.
    pub fn distance_to_degrees(&self, g: &MetricGraph) -> f64 {
        let d = Self::degree_limit(g);
        let diff = &self.matrix - DMatrix::from_diagonal(&d);
        diff.singular_values().max()
    }
}

/// `M_Γ = μ M`, the map of `-Δ + μ²` on the unscaled graph.
pub fn to_graph_convention(m: &DMatrix<f64>, mu: f64) -> DMatrix<f64> {
    m * mu
}

/// `M = M_Γ / μ`.
pub fn from_graph_convention(m_gamma: &DMatrix<f64>, mu: f64) -> DMatrix<f64> {
    m_gamma / mu
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EdgeCoefficients {
    /// `a e^{-s} + b e^{-(ℓ-s)}`; `offset` maps the edge coordinate to `s`.
    Finite {
        a: f64,
        b: f64,
        length: f64,
        offset: f64,
    },
    HalfLine {
        c: f64,
    },
}

impl EdgeCoefficients {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            EdgeCoefficients::Finite {
                a,
                b,
                length,
                offset,
            } => {
                let s = x + offset;
                a * (-s).exp() + b * (s - length).exp()
            }
            EdgeCoefficients::HalfLine { c } => c * (-x).exp(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            EdgeCoefficients::Finite {
                a,
                b,
                length,
                offset,
            } => {
                let s = x + offset;
                -a * (-s).exp() + b * (s - length).exp()
            }
            EdgeCoefficients::HalfLine { c } => -c * (-x).exp(),
        }
    }

    fn end_value(&self, end: EdgeEnd) -> f64 {
        match (*self, end) {
            (EdgeCoefficients::Finite { a, b, length, .. }, EdgeEnd::Start) => {
                a + b * (-length).exp()
            }
            (EdgeCoefficients::Finite { a, b, length, .. }, EdgeEnd::End) => {
                a * (-length).exp() + b
            }
            (EdgeCoefficients::HalfLine { c }, _) => c,
        }
    }

    /// Derivative pointing from the vertex into the edge.
    fn end_outgoing(&self, end: EdgeEnd) -> f64 {
        match (*self, end) {
            (EdgeCoefficients::Finite { a, b, length, .. }, EdgeEnd::Start) => {
                -a + b * (-length).exp()
            }
            (EdgeCoefficients::Finite { a, b, length, .. }, EdgeEnd::End) => {
                a * (-length).exp() - b
            }
            (EdgeCoefficients::HalfLine { c }, _) => -c,
        }
    }

    /// Exact `∫ u²` over the edge.
    pub fn l2_norm_squared(&self) -> f64 {
        match *self {
            EdgeCoefficients::Finite { a, b, length, .. } => {
                let e = (-length).exp();
                0.5 * (a * a + b * b) * (-(-2.0 * length).exp_m1()) + 2.0 * a * b * length * e
            }
            EdgeCoefficients::HalfLine { c } => 0.5 * c * c,
        }
    }
}

/// Solution of `(-Δ + 1)u = 0` with Dirichlet data on the boundary and
/// Kirchhoff conditions elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeBasisSolution {
    pub edges: Vec<EdgeCoefficients>,
}

impl EdgeBasisSolution {
    pub fn value(&self, edge: usize, x: f64) -> f64 {
        self.edges[edge].value(x)
    }

    pub fn vertex_value(&self, g: &MetricGraph, v: usize) -> f64 {
        g.incidences(v)
            .first()
            .map_or(0.0, |&(e, end)| self.edges[e].end_value(end))
    }

    /// Sum of derivatives towards each boundary vertex.
    pub fn neumann_data(&self, g: &MetricGraph) -> DVector<f64> {
        DVector::from_iterator(
            g.boundary().len(),
            g.boundary().iter().map(|&v| {
                -g.incidences(v)
                    .iter()
                    .map(|&(e, end)| self.edges[e].end_outgoing(end))
                    .sum::<f64>()
            }),
        )
    }

    /// Exact `‖u‖²_{L²}` from the coefficients.
    pub fn l2_norm_squared(&self) -> f64 {
        self.edges
            .iter()
            .map(EdgeCoefficients::l2_norm_squared)
            .sum()
    }
}

/// Solves the linear boundary value problem on the scaled graph `g_mu`
/// with values `p` on `g_mu.boundary()`.
pub fn solve_linear_bvp(g_mu: &MetricGraph, p: &[f64]) -> Result<EdgeBasisSolution> {
    let boundary = g_mu.boundary();
    if p.len() != boundary.len() {
        return Err(Error::domain(format!(
            "expected {} boundary values, got {}",
            boundary.len(),
            p.len()
        )));
    }
    let mut first = Vec::with_capacity(g_mu.edges().len());
    let mut n = 0;
    for e in g_mu.edges() {
        first.push(n);
        n += if e.is_finite() { 2 } else { 1 };
    }

    // Each edge end contributes a row for its value and one for its outgoing
    // derivative, expressed in the unknowns.
    let end_row = |e: usize, end: EdgeEnd, outgoing: bool| -> Vec<(usize, f64)> {
        let i = first[e];
        match g_mu.edge(e).shape {
            EdgeShape::HalfLine { .. } => vec![(i, if outgoing { -1.0 } else { 1.0 })],
            EdgeShape::Segment { length, .. } | EdgeShape::Loop { length, .. } => {
                let x = (-length).exp();
                match (end, outgoing) {
                    (EdgeEnd::Start, false) => vec![(i, 1.0), (i + 1, x)],
                    (EdgeEnd::Start, true) => vec![(i, -1.0), (i + 1, x)],
                    (EdgeEnd::End, false) => vec![(i, x), (i + 1, 1.0)],
                    (EdgeEnd::End, true) => vec![(i, x), (i + 1, -1.0)],
                }
            }
        }
    };

    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let mut row = 0;
    for v in 0..g_mu.vertex_count() {
        let inc = g_mu.incidences(v);
        if inc.is_empty() {
            continue;
        }
        let (e0, end0) = inc[0];
        for &(e, end) in &inc[1..] {
            for (j, c) in end_row(e, end, false) {
                a[(row, j)] += c;
            }
            for (j, c) in end_row(e0, end0, false) {
                a[(row, j)] -= c;
            }
            row += 1;
        }
        if let Some(bi) = boundary.iter().position(|&b| b == v) {
            for (j, c) in end_row(e0, end0, false) {
                a[(row, j)] += c;
            }
            rhs[row] = p[bi];
        } else {
            for &(e, end) in &inc {
                for (j, c) in end_row(e, end, true) {
                    a[(row, j)] += c;
                }
            }
        }
        row += 1;
    }
    debug_assert_eq!(row, n);

    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("singular edge-coefficient system"))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical(
            "edge-coefficient system is ill-conditioned",
        ));
    }
    let edges = g_mu
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let i = first[k];
            match e.shape {
                EdgeShape::HalfLine { .. } => EdgeCoefficients::HalfLine { c: x[i] },
                EdgeShape::Segment { length, .. } => EdgeCoefficients::Finite {
                    a: x[i],
                    b: x[i + 1],
                    length,
                    offset: 0.0,
                },
                EdgeShape::Loop { length, .. } => EdgeCoefficients::Finite {
                    a: x[i],
                    b: x[i + 1],
                    length,
                    offset: 0.5 * length,
                },
            }
        })
        .collect();
    Ok(EdgeBasisSolution { edges })
}

/// Exact `‖u‖²_{L²(Γ_μ)}`.
pub fn linear_solution_norm(sol: &EdgeBasisSolution) -> f64 {
    sol.l2_norm_squared()
}

/// DtN matrix of `-Δ + 1` on `g` scaled by `μ`, with respect to `g.boundary()`.
pub fn dtn_matrix(g: &MetricGraph, mu: f64) -> Result<DtnMatrix> {
    let g_mu = g.scale(mu)?;
    let nb = g.boundary().len();
    let mut m = DMatrix::zeros(nb, nb);
    for j in 0..nb {
        let mut p = vec![0.0; nb];
        p[j] = 1.0;
        let sol = solve_linear_bvp(&g_mu, &p)?;
        m.set_column(j, &sol.neumann_data(&g_mu));
    }
    Ok(DtnMatrix {
        mu,
        boundary: g
            .boundary()
            .iter()
            .map(|&v| g.vertex_id(v).to_string())
            .collect(),
        matrix: m,
    })
}

/// Length given to the finite piece that replaces the start of a half-line
/// in the scattering construction.
const DUMMY_PIECE: f64 = 1.0;

/// Scattering data of the compact core with leads attached at the boundary
/// vertices and at one dummy vertex on every half-line.
struct Scattering {
    /// `Σ` restricted to the boundary leads.
    sigma: DMatrix<f64>,
}

fn scattering_block(g: &MetricGraph, mu: f64) -> Result<Scattering> {
    // Compact core: finite edges plus one finite piece per half-line.
    struct Bond {
        leave: usize,
        arrive: usize,
        leave_branch: (usize, EdgeEnd),
        arrive_branch: (usize, EdgeEnd),
        length: f64,
    }
    let nv = g.vertex_count();
    let mut core_edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut dummies = Vec::new();
    for e in g.edges() {
        match e.shape {
            EdgeShape::Segment { from, to, length } => core_edges.push((from, to, length)),
            EdgeShape::Loop { vertex, length } => core_edges.push((vertex, vertex, length)),
            EdgeShape::HalfLine { vertex } => {
                let w = nv + dummies.len();
                dummies.push(w);
                core_edges.push((vertex, w, DUMMY_PIECE));
            }
        }
    }
    let n_all = nv + dummies.len();
    let mut degree = vec![0usize; n_all];
    let mut bonds = Vec::with_capacity(2 * core_edges.len());
    for (k, &(s, t, length)) in core_edges.iter().enumerate() {
        degree[s] += 1;
        degree[t] += 1;
        bonds.push(Bond {
            leave: s,
            arrive: t,
            leave_branch: (k, EdgeEnd::Start),
            arrive_branch: (k, EdgeEnd::End),
            length,
        });
        bonds.push(Bond {
            leave: t,
            arrive: s,
            leave_branch: (k, EdgeEnd::End),
            arrive_branch: (k, EdgeEnd::Start),
            length,
        });
    }
    let leads: Vec<usize> = g
        .boundary()
        .iter()
        .copied()
        .chain(dummies.iter().copied())
        .collect();
    let mut lead_of = vec![None; n_all];
    for (i, &v) in leads.iter().enumerate() {
        lead_of[v] = Some(i);
        degree[v] += 1;
    }

    let nb = bonds.len();
    let nl = leads.len();
    let decay: Vec<f64> = bonds.iter().map(|b| (-mu * b.length).exp()).collect();
    // I - Ũ e^{-μL}
    let mut a = DMatrix::<f64>::identity(nb, nb);
    for (i, out) in bonds.iter().enumerate() {
        for (j, inc) in bonds.iter().enumerate() {
            if out.leave == inc.arrive {
                let n = degree[out.leave] as f64;
                let delta = if out.leave_branch == inc.arrive_branch {
                    1.0
                } else {
                    0.0
                };
                a[(i, j)] -= (2.0 / n - delta) * decay[j];
            }
        }
    }
    let mut t_in = DMatrix::<f64>::zeros(nb, nl);
    let mut t_out = DMatrix::<f64>::zeros(nl, nb);
    for (i, b) in bonds.iter().enumerate() {
        if let Some(l) = lead_of[b.leave] {
            t_in[(i, l)] = 2.0 / degree[b.leave] as f64;
        }
        if let Some(l) = lead_of[b.arrive] {
            t_out[(l, i)] = 2.0 / degree[b.arrive] as f64 * decay[i];
        }
    }
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numerical("I - U exp(-mu L) is singular"))?;
    let cond = a.abs().row_sum().max() * inv.abs().row_sum().max();
    if !(cond < 1e12) {
        return Err(Error::numerical(format!(
            "scattering resolvent ill-conditioned (condition {cond:.3e})"
        )));
    }
    let mut sigma_c = t_out * inv * t_in;
    for (l, &v) in leads.iter().enumerate() {
        sigma_c[(l, l)] += 2.0 / degree[v] as f64 - 1.0;
    }
    let nbnd = g.boundary().len();
    Ok(Scattering {
        sigma: sigma_c.view((0, 0), (nbnd, nbnd)).into_owned(),
    })
}

/// Boundary block `Σ(μ)` of the scattering matrix of `-Δ + μ²` on `g`.
pub fn scattering_matrix(g: &MetricGraph, mu: f64) -> Result<DMatrix<f64>> {
    if !(mu > 0.0) {
        return Err(Error::domain(format!("mu must be positive, got {mu}")));
    }
    Ok(scattering_block(g, mu)?.sigma)
}

/// DtN map from the scattering matrix, `M = (I - Σ)(I + Σ)^{-1}`, in the
/// unit-spectral convention of [`dtn_matrix`].
pub fn dtn_via_scattering(g: &MetricGraph, mu: f64) -> Result<DtnMatrix> {
    let sigma = scattering_matrix(g, mu)?;
    let n = sigma.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let plus = (&id + &sigma)
        .try_inverse()
        .ok_or_else(|| Error::numerical("I + Sigma is singular"))?;
    let m_gamma = to_graph_convention(&((&id - &sigma) * plus), mu);
    Ok(DtnMatrix {
        mu,
        boundary: g
            .boundary()
            .iter()
            .map(|&v| g.vertex_id(v).to_string())
            .collect(),
        matrix: from_graph_convention(&m_gamma, mu),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge(l: f64) -> MetricGraph {
        MetricGraph::builder()
            .vertex("o")
            .vertex("v")
            .edge("e", "o", "v", l)
            .boundary("v")
            .build()
            .unwrap()
    }

    #[test]
    fn single_edge_profile() {
        let g = single_edge(3.0);
        let sol = solve_linear_bvp(&g, &[2.0]).unwrap();
        for z in [0.0, 0.7, 2.2, 3.0] {
            let exact = 2.0 * f64::cosh(z) / f64::cosh(3.0);
            assert!((sol.value(0, z) - exact).abs() < 1e-14);
        }
        let q = sol.neumann_data(&g)[0];
        assert!((q - 2.0 * f64::tanh(3.0)).abs() < 1e-14);
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = single_edge(1.0);
        let sol = solve_linear_bvp(&g, &[0.0]).unwrap();
        assert_eq!(sol.value(0, 0.5), 0.0);
        assert_eq!(sol.neumann_data(&g)[0], 0.0);
        assert_eq!(linear_solution_norm(&sol), 0.0);
    }

    #[test]
    fn interval_reflectionless_limit() {
        let g = single_edge(1.0);
        let s = scattering_matrix(&g, 40.0).unwrap();
        assert!(s[(0, 0)].abs() < 1e-15);
        let m = dtn_via_scattering(&g, 40.0).unwrap();
        assert!((m.matrix[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn loop_and_halfline_boundary() {
        // loop of scaled length L and K half-lines at a boundary vertex:
        // q = (2 tanh(L/2) + K) p
        let g = MetricGraph::builder()
            .vertex("v")
            .looped("l", "v", 2.0)
            .halfline("h1", "v")
            .halfline("h2", "v")
            .boundary("v")
            .build()
            .unwrap();
        let m = dtn_matrix(&g, 1.5).unwrap();
        let expect = 2.0 * f64::tanh(1.5) + 2.0;
        assert!((m.matrix[(0, 0)] - expect).abs() < 1e-13);
        let s = dtn_via_scattering(&g, 1.5).unwrap();
        assert!((s.matrix[(0, 0)] - expect).abs() < 1e-12);
    }
}
