use serde::Serialize;

use super::linalg::{Csr, Topology};
use crate::error::{Error, Result};
use crate::graph::{EdgeShape, MetricGraph};

/// Mass matrix used with the three-point second difference.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Numerov weights `h/12 (1, 10, 1)`; fourth order on the edges.
    #[default]
    Compact,
    /// Trapezoid weights; second order.
    Lumped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscretizationOptions {
    /// Decay rate the grid must resolve; `0` selects 64 intervals per edge.
    pub mu: f64,
    pub points_per_wavelength: f64,
    pub scheme: Scheme,
    /// Boundary vertices of the graph carry Dirichlet data.
    pub dirichlet: bool,
    /// Half-line truncation length; defaults to `30/μ`.
    pub cut_length: Option<f64>,
    /// Upper bound on the number of grid nodes.
    pub max_nodes: usize,
}

impl DiscretizationOptions {
    pub fn new(mu: f64, points_per_wavelength: f64) -> Self {
        DiscretizationOptions {
            mu,
            points_per_wavelength,
            scheme: Scheme::Compact,
            dirichlet: false,
            cut_length: None,
            max_nodes: 2_000_000,
        }
    }
}

/// Uniform grid on one edge.  `nodes[0]` sits at coordinate `x0`; for a
/// half-line the last node is the truncation point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeGrid {
    pub edge: usize,
    pub nodes: Vec<usize>,
    pub x0: f64,
    pub h: f64,
    pub truncated: bool,
}

impl EdgeGrid {
    pub fn coordinate(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct Discretization {
    graph: MetricGraph,
    options: DiscretizationOptions,
    n: usize,
    grids: Vec<EdgeGrid>,
    cut_nodes: Vec<usize>,
    dirichlet_nodes: Vec<usize>,
    stiffness: Csr,
    mass: Csr,
    weights: Vec<f64>,
    topology: Topology,
    warnings: Vec<String>,
}

const MIN_INTERVALS: usize = 4;
const FALLBACK_INTERVALS: usize = 64;

impl Discretization {
    pub fn new(g: &MetricGraph, options: DiscretizationOptions) -> Result<Self> {
        let mu = options.mu;
        let ppw = options.points_per_wavelength;
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::domain(format!(
                "mu must be a non-negative number, got {mu}"
            )));
        }
        if !(ppw > 0.0) {
            return Err(Error::domain(format!(
                "points per wavelength must be positive, got {ppw}"
            )));
        }
        let mut warnings = Vec::new();
        if ppw < 8.0 {
            warnings.push(format!("resolution {ppw} points per wavelength is below 8"));
        }
        if g.edges().is_empty() {
            return Err(Error::domain("graph has no edges"));
        }
        let cut = match options.cut_length {
            Some(c) if c > 0.0 => c,
            Some(c) => {
                return Err(Error::domain(format!(
                    "cut length must be positive, got {c}"
                )))
            }
            None if g.has_halflines() && mu == 0.0 => {
                return Err(Error::domain(
                    "half-lines need mu > 0 to set the truncation length",
                ))
            }
            None => 30.0 / mu.max(f64::MIN_POSITIVE),
        };
        let intervals_for = |len: f64| -> Result<usize> {
            if mu == 0.0 {
                return Ok(FALLBACK_INTERVALS);
            }
            let n = (len * mu * ppw).ceil();
            if !(n < options.max_nodes as f64) {
                return Err(Error::domain(format!(
                    "grid of {n} intervals exceeds the node limit"
                )));
            }
            Ok((n as usize).max(MIN_INTERVALS))
        };
        // separators roughly every 1/μ so that chain blocks stay short
        let spacing = if mu == 0.0 {
            16
        } else {
            (ppw.round() as usize).max(2)
        };

        let nv = g.vertex_count();
        let mut n = nv;
        let mut grids = Vec::with_capacity(g.edges().len());
        let mut cut_nodes = Vec::new();
        let mut globals: Vec<usize> = (0..nv).collect();
        let mut chains = Vec::new();
        for (e, edge) in g.edges().iter().enumerate() {
            let (start, end, len, x0, truncated) = match edge.shape {
                EdgeShape::Segment { from, to, length } => (from, Some(to), length, 0.0, false),
                EdgeShape::Loop { vertex, length } => {
                    (vertex, Some(vertex), length, -0.5 * length, false)
                }
                EdgeShape::HalfLine { vertex } => (vertex, None, cut, 0.0, true),
            };
            let m = intervals_for(len)?;
            let mut nodes = Vec::with_capacity(m + 1);
            nodes.push(start);
            let mut chain_start = n;
            for i in 1..m {
                let node = n;
                n += 1;
                nodes.push(node);
                if i % spacing == 0 && m - i >= 2 {
                    if node > chain_start {
                        chains.push((chain_start, node - chain_start));
                    }
                    globals.push(node);
                    chain_start = node + 1;
                }
            }
            if n > chain_start {
                chains.push((chain_start, n - chain_start));
            }
            match end {
                Some(v) => nodes.push(v),
                None => {
                    nodes.push(n);
                    cut_nodes.push(n);
                    globals.push(n);
                    n += 1;
                }
            }
            grids.push(EdgeGrid {
                edge: e,
                nodes,
                x0,
                h: len / m as f64,
                truncated,
            });
            if n > options.max_nodes {
                return Err(Error::domain(format!(
                    "grid exceeds the node limit of {}",
                    options.max_nodes
                )));
            }
        }
        let mut global_of = vec![None; n];
        for (i, &node) in globals.iter().enumerate() {
            global_of[node] = Some(i);
        }
        let topology = Topology {
            globals,
            global_of,
            chains,
        };

        let dirichlet_nodes: Vec<usize> = if options.dirichlet {
            g.boundary().to_vec()
        } else {
            Vec::new()
        };
        let mut is_dirichlet = vec![false; n];
        for &v in &dirichlet_nodes {
            is_dirichlet[v] = true;
        }

        let mut rows: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); n];
        let mut weights = vec![0.0; n];
        for grid in &grids {
            let h = grid.h;
            let nodes = &grid.nodes;
            let m = nodes.len() - 1;
            for (i, &node) in nodes.iter().enumerate() {
                weights[node] += if i == 0 || i == m { 0.5 * h } else { h };
            }
            let (m_side, m_diag_end, m_off_end, m_diag_int) = match options.scheme {
                Scheme::Compact => (h / 12.0, 5.0 * h / 12.0, h / 12.0, 10.0 * h / 12.0),
                Scheme::Lumped => (0.0, 0.5 * h, 0.0, h),
            };
            for i in 1..m {
                let row = &mut rows[nodes[i]];
                row.push((nodes[i - 1], -1.0 / h, m_side));
                row.push((nodes[i], 2.0 / h, m_diag_int));
                row.push((nodes[i + 1], -1.0 / h, m_side));
            }
            for (end, nb) in [(nodes[0], nodes[1]), (nodes[m], nodes[m - 1])] {
                if is_dirichlet[end] {
                    continue;
                }
                rows[end].push((end, 1.0 / h, m_diag_end));
                rows[end].push((nb, -1.0 / h, m_off_end));
            }
        }
        for &v in &dirichlet_nodes {
            rows[v].push((v, 1.0, 0.0));
        }
        for (v, row) in rows.iter().enumerate().take(nv) {
            if row.is_empty() {
                return Err(Error::domain(format!(
                    "vertex {} has no incident edges",
                    g.vertex_id(v)
                )));
            }
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut kv = Vec::new();
        let mut mv = Vec::new();
        for mut row in rows {
            row.sort_by_key(|r| r.0);
            let mut last = usize::MAX;
            for (j, k, m) in row {
                if j == last {
                    *kv.last_mut().unwrap() += k;
                    *mv.last_mut().unwrap() += m;
                } else {
                    cols.push(j);
                    kv.push(k);
                    mv.push(m);
                    last = j;
                }
            }
            row_ptr.push(cols.len());
        }
        let stiffness = Csr {
            n,
            row_ptr: row_ptr.clone(),
            cols: cols.clone(),
            vals: kv,
        };
        let mass = Csr {
            n,
            row_ptr,
            cols,
            vals: mv,
        };
        Ok(Discretization {
            graph: g.clone(),
            options,
            n,
            grids,
            cut_nodes,
            dirichlet_nodes,
            stiffness,
            mass,
            weights,
            topology,
            warnings,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn options(&self) -> &DiscretizationOptions {
        &self.options
    }

    pub fn grids(&self) -> &[EdgeGrid] {
        &self.grids
    }

    pub fn grid(&self, edge: usize) -> &EdgeGrid {
        &self.grids[edge]
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn stiffness(&self) -> &Csr {
        &self.stiffness
    }

    pub fn mass_matrix(&self) -> &Csr {
        &self.mass
    }

    pub fn cut_nodes(&self) -> &[usize] {
        &self.cut_nodes
    }

    /// Dirichlet vertex nodes, in the order of `graph().boundary()`.
    pub fn dirichlet_nodes(&self) -> &[usize] {
        &self.dirichlet_nodes
    }

    /// Trapezoid weights; `Σ wᵢ fᵢ` integrates over the (truncated) graph.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Smallest grid step.
    pub fn min_step(&self) -> f64 {
        self.grids.iter().map(|g| g.h).fold(f64::INFINITY, f64::min)
    }

    /// Coefficient of the transparent condition `Φ' = -√(-Λ) Φ` at the cuts.
    pub fn robin(lambda: f64) -> f64 {
        (-lambda).max(0.0).sqrt()
    }

    fn check_lambda(lambda: f64) -> Result<()> {
        if !(lambda < 0.0) {
            return Err(Error::domain(format!(
                "Lambda must be negative, got {lambda}"
            )));
        }
        Ok(())
    }

    /// Linear part `-Δ - Λ` with transparent cut conditions.
    pub fn assemble_operator(&self, lambda: f64) -> Result<Csr> {
        Self::check_lambda(lambda)?;
        let mut a = self.stiffness.clone();
        for (v, m) in a.vals.iter_mut().zip(&self.mass.vals) {
            *v -= lambda * m;
        }
        self.add_robin(&mut a, lambda);
        Ok(a)
    }

    fn add_robin(&self, a: &mut Csr, lambda: f64) {
        let r = Self::robin(lambda);
        for &c in &self.cut_nodes {
            for k in a.row_ptr[c]..a.row_ptr[c + 1] {
                if a.cols[k] == c {
                    a.vals[k] += r;
                }
            }
        }
    }

    /// Jacobian `-Δ - Λ - 6Φ²` of [`Self::residual`].
    pub fn jacobian(&self, u: &[f64], lambda: f64) -> Result<Csr> {
        Self::check_lambda(lambda)?;
        let mut a = self.stiffness.clone();
        for i in 0..self.n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.cols[k];
                a.vals[k] -= self.mass.vals[k] * (lambda + 6.0 * u[j] * u[j]);
            }
        }
        self.add_robin(&mut a, lambda);
        Ok(a)
    }

    /// `M Φ³`.
    pub fn cubic_term(&self, u: &[f64]) -> Vec<f64> {
        let cube: Vec<f64> = u.iter().map(|x| x * x * x).collect();
        self.mass.mul_vec(&cube)
    }

    /// `∂F/∂Λ = -MΦ - Φ/(2√(-Λ))` at the cut nodes.
    pub fn lambda_derivative(&self, u: &[f64], lambda: f64) -> Vec<f64> {
        let mut d: Vec<f64> = self.mass.mul_vec(u).into_iter().map(|x| -x).collect();
        let r = Self::robin(lambda);
        if r > 0.0 {
            for &c in &self.cut_nodes {
                d[c] -= u[c] / (2.0 * r);
            }
        }
        d
    }

    /// Discrete `F(Φ) = -ΔΦ - ΛΦ - 2Φ³`; Dirichlet rows read `Φ_v - p_v`.
    pub fn residual(&self, u: &[f64], lambda: f64, dirichlet: &[f64]) -> Vec<f64> {
        let (f, _) = self.residual_with_scale(u, lambda, dirichlet);
        f
    }

    fn residual_with_scale(&self, u: &[f64], lambda: f64, dirichlet: &[f64]) -> (Vec<f64>, f64) {
        let r = Self::robin(lambda);
        let mut f = vec![0.0; self.n];
        let mut scale = 0.0f64;
        for i in 0..self.n {
            let (mut ku, mut ak, mut mu_, mut am, mut mc, mut ac) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for k in self.stiffness.row_ptr[i]..self.stiffness.row_ptr[i + 1] {
                let j = self.stiffness.cols[k];
                let (kij, mij) = (self.stiffness.vals[k], self.mass.vals[k]);
                let c = u[j] * u[j] * u[j];
                ku += kij * u[j];
                ak += (kij * u[j]).abs();
                mu_ += mij * u[j];
                am += (mij * u[j]).abs();
                mc += mij * c;
                ac += (mij * c).abs();
            }
            f[i] = ku - lambda * mu_ - 2.0 * mc;
            scale = scale.max(ak + lambda.abs() * am + 2.0 * ac);
        }
        for &c in &self.cut_nodes {
            f[c] += r * u[c];
        }
        for (k, &v) in self.dirichlet_nodes.iter().enumerate() {
            f[v] -= dirichlet.get(k).copied().unwrap_or(0.0);
        }
        (f, scale)
    }

    /// Sup-norm of the residual relative to the magnitude of its terms.
    pub fn relative_residual(&self, u: &[f64], lambda: f64, dirichlet: &[f64]) -> f64 {
        let (f, scale) = self.residual_with_scale(u, lambda, dirichlet);
        let m = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if m == 0.0 {
            0.0
        } else if scale == 0.0 {
            f64::INFINITY
        } else {
            m / scale
        }
    }

    /// Sum of the derivatives of `Φ` towards each Dirichlet vertex, third
    /// order accurate from the equation `Φ'' = -ΛΦ - 2Φ³`.
    pub fn boundary_flux(&self, u: &[f64], lambda: f64) -> Vec<f64> {
        let g = |x: f64| -lambda * x - 2.0 * x * x * x;
        self.dirichlet_nodes
            .iter()
            .map(|&v| {
                let mut q = 0.0;
                for grid in &self.grids {
                    let m = grid.nodes.len() - 1;
                    for (end, nb) in [(0, 1), (m, m - 1)] {
                        if grid.nodes[end] == v {
                            let (u0, u1) = (u[v], u[grid.nodes[nb]]);
                            q += (u0 - u1) / grid.h + grid.h / 6.0 * (2.0 * g(u0) + g(u1));
                        }
                    }
                }
                q
            })
            .collect()
    }

    /// Grid values of `f(edge, x)` in edge coordinates.
    pub fn sample(&self, mut f: impl FnMut(usize, f64) -> f64) -> Vec<f64> {
        let mut u = vec![0.0; self.n];
        let mut set = vec![false; self.n];
        for grid in &self.grids {
            for (i, &node) in grid.nodes.iter().enumerate() {
                if !set[node] {
                    u[node] = f(grid.edge, grid.coordinate(i));
                    set[node] = true;
                }
            }
        }
        u
    }

    /// Values of `u` along an edge, in coordinate order.
    pub fn edge_values(&self, u: &[f64], edge: usize) -> Vec<f64> {
        self.grids[edge].nodes.iter().map(|&i| u[i]).collect()
    }

    /// Grid neighbours of every node.
    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.n];
        for grid in &self.grids {
            for w in grid.nodes.windows(2) {
                if w[0] != w[1] {
                    nb[w[0]].push(w[1]);
                    nb[w[1]].push(w[0]);
                }
            }
        }
        nb
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_resolution_rule() {
        let g = MetricGraph::builder()
            .vertex("a")
            .vertex("b")
            .edge("e", "a", "b", std::f64::consts::PI)
            .build()
            .unwrap();
        let d = Discretization::new(&g, DiscretizationOptions::new(4.0, 20.0)).unwrap();
        assert!(d.grid(0).h <= 1.0 / 80.0);
        assert!(d.len() >= 252);
        let d0 = Discretization::new(&g, DiscretizationOptions::new(0.0, 20.0)).unwrap();
        assert!((d0.grid(0).h - std::f64::consts::PI / 64.0).abs() < 1e-15);
    }

    #[test]
    fn operator_is_symmetric() {
        let g = MetricGraph::builder()
            .vertex("a")
            .vertex("b")
            .looped("l", "a", 2.0)
            .edge("e", "a", "b", 1.0)
            .halfline("h", "b")
            .build()
            .unwrap();
        let d = Discretization::new(&g, DiscretizationOptions::new(3.0, 10.0)).unwrap();
        let a = d.assemble_operator(-9.0).unwrap().to_dense();
        assert!((&a - a.transpose()).amax() < 1e-12);
        assert!(d.assemble_operator(0.0).is_err());
    }

    #[test]
    fn weights_integrate_length() {
        let g = MetricGraph::builder()
            .vertex("a")
            .looped("l", "a", 2.0)
            .edge("e", "a", "b", 1.5)
            .vertex("b")
            .build()
            .unwrap();
        let d = Discretization::new(&g, DiscretizationOptions::new(2.0, 12.0)).unwrap();
        let total: f64 = d.weights().iter().sum();
        assert!((total - 3.5).abs() < 1e-12);
    }
}
