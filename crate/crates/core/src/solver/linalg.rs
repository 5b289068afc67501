//! Direct solver for matrices with the sparsity of a graph discretization.
//!
//! Unknowns split into *global* nodes (vertices, half-line cuts and
//! separators placed along the edges) and *chains*, runs of consecutive
//! interior nodes between two globals.  Every chain row couples only to its
//! chain neighbours and to the globals at its ends, so each chain block is
//! tridiagonal.  Chains are eliminated with a pivoted tridiagonal LU and the
//! remaining Schur complement on the globals is factored densely.
//!
//! An optional dense border (one extra row and column) supports the
//! bordered systems of arclength continuation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Compressed sparse rows, square.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }
}

/// Split of the unknowns into globals and tridiagonal chains.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub globals: Vec<usize>,
    /// `global_of[node]` is the position in `globals`, if any.
    pub global_of: Vec<Option<usize>>,
    /// Contiguous node ranges `start..start + len`.
    pub chains: Vec<(usize, usize)>,
}

/// Dense border `[[A, c], [rᵀ, d]]`.
#[derive(Clone, Debug)]
pub struct Border<'a> {
    pub column: &'a [f64],
    pub row: &'a [f64],
    pub corner: f64,
}

#[derive(Clone, Debug)]
struct Tridiagonal {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl Tridiagonal {
    /// Gaussian elimination with partial pivoting, LAPACK `gttrf` layout.
    fn factor(mut dl: Vec<f64>, mut d: Vec<f64>, mut du: Vec<f64>) -> Result<Self> {
        let n = d.len();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swap[i] = true;
            }
        }
        if d.iter().any(|&x| x == 0.0 || !x.is_finite()) {
            return Err(Error::numerical("singular chain block"));
        }
        Ok(Tridiagonal {
            dl,
            d,
            du,
            du2,
            swap,
        })
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    fn det_sign(&self) -> f64 {
        let swaps = self.swap.iter().filter(|&&s| s).count();
        let mut s = if swaps % 2 == 0 { 1.0 } else { -1.0 };
        for &x in &self.d {
            s *= x.signum();
        }
        s
    }
}

#[derive(Clone, Debug)]
struct ChainFactor {
    start: usize,
    len: usize,
    tri: Tridiagonal,
    /// Schur indices of the globals this chain's rows couple to.
    coupled: Vec<usize>,
    /// `T⁻¹ B`, `len × coupled.len()`, column-major.
    x: Vec<f64>,
    /// Entries `(schur row, local index, value)` of global rows in this chain.
    inbound: Vec<(usize, usize, f64)>,
}

/// Factorization of a bordered or plain matrix over a [`Topology`].
#[derive(Clone, Debug)]
pub struct Factorization {
    n: usize,
    bordered: bool,
    topo_globals: Vec<usize>,
    chains: Vec<ChainFactor>,
    schur: nalgebra::linalg::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    det_sign: f64,
    /// Smallest over largest pivot magnitude of the Schur factor.
    pub pivot_ratio: f64,
}

const SINGULAR_RATIO: f64 = 1e-14;

impl Factorization {
    pub fn new(a: &Csr, topo: &Topology, border: Option<Border<'_>>) -> Result<Self> {
        let n = a.n;
        let ng = topo.globals.len();
        let bordered = border.is_some();
        let ns = ng + usize::from(bordered);
        let mut chain_of = vec![usize::MAX; n];
        for (c, &(start, len)) in topo.chains.iter().enumerate() {
            chain_of[start..start + len].fill(c);
        }

        let mut s = DMatrix::<f64>::zeros(ns, ns);
        let mut inbound: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); topo.chains.len()];
        for (gi, &node) in topo.globals.iter().enumerate() {
            for (j, v) in a.row(node) {
                if let Some(gj) = topo.global_of[j] {
                    s[(gi, gj)] += v;
                } else {
                    let c = chain_of[j];
                    inbound[c].push((gi, j - topo.chains[c].0, v));
                }
            }
        }
        if let Some(b) = &border {
            for (gi, &node) in topo.globals.iter().enumerate() {
                s[(gi, ng)] = b.column[node];
                s[(ng, gi)] = b.row[node];
            }
            s[(ng, ng)] = b.corner;
            for (c, &(start, len)) in topo.chains.iter().enumerate() {
                for l in 0..len {
                    inbound[c].push((ng, l, b.row[start + l]));
                }
            }
        }

        let mut det_sign = 1.0;
        let mut chains = Vec::with_capacity(topo.chains.len());
        for (c, &(start, len)) in topo.chains.iter().enumerate() {
            let mut dl = vec![0.0; len.saturating_sub(1)];
            let mut d = vec![0.0; len];
            let mut du = vec![0.0; len.saturating_sub(1)];
            let mut coupled: Vec<usize> = Vec::new();
            let mut entries: Vec<(usize, usize, f64)> = Vec::new();
            for l in 0..len {
                let node = start + l;
                for (j, v) in a.row(node) {
                    if let Some(gj) = topo.global_of[j] {
                        entries.push((l, gj, v));
                        if !coupled.contains(&gj) {
                            coupled.push(gj);
                        }
                    } else if j == node {
                        d[l] += v;
                    } else if j + 1 == node && l > 0 {
                        dl[l - 1] += v;
                    } else if j == node + 1 && l + 1 < len {
                        du[l] += v;
                    } else {
                        return Err(Error::numerical(format!(
                            "entry ({node}, {j}) outside the chain pattern"
                        )));
                    }
                }
            }
            if let Some(b) = &border {
                coupled.push(ng);
                for l in 0..len {
                    entries.push((l, ng, b.column[start + l]));
                }
            }
            let tri = Tridiagonal::factor(dl, d, du)?;
            det_sign *= tri.det_sign();
            let k = coupled.len();
            let mut x = vec![0.0; len * k];
            for (l, gj, v) in entries {
                let col = coupled.iter().position(|&g| g == gj).unwrap();
                x[col * len + l] += v;
            }
            for col in 0..k {
                tri.solve_in_place(&mut x[col * len..(col + 1) * len]);
            }
            for &(gi, l, v) in &inbound[c] {
                for (col, &gj) in coupled.iter().enumerate() {
                    s[(gi, gj)] -= v * x[col * len + l];
                }
            }
            chains.push(ChainFactor {
                start,
                len,
                tri,
                coupled,
                x,
                inbound: std::mem::take(&mut inbound[c]),
            });
        }

        let lu = s.lu();
        let u = lu.u();
        let diag = u.diagonal();
        let max = diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let min = diag.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        let pivot_ratio = if ns == 0 {
            1.0
        } else if max > 0.0 {
            min / max
        } else {
            0.0
        };
        if !(pivot_ratio > SINGULAR_RATIO) {
            return Err(Error::numerical(format!(
                "singular matrix (pivot ratio {pivot_ratio:.2e})"
            )));
        }
        for v in diag.iter() {
            det_sign *= v.signum();
        }
        det_sign *= lu.p().determinant::<f64>();
        Ok(Factorization {
            n,
            bordered,
            topo_globals: topo.globals.clone(),
            chains,
            schur: lu,
            det_sign,
            pivot_ratio,
        })
    }

    /// Sign of the determinant of the (bordered) matrix.
    pub fn det_sign(&self) -> f64 {
        self.det_sign
    }

    /// Solves `A x = b` (or the bordered system with extra component `b_border`).
    pub fn solve(&self, b: &[f64], b_border: f64) -> (Vec<f64>, f64) {
        let ng = self.topo_globals.len();
        let ns = ng + usize::from(self.bordered);
        let mut x = b.to_vec();
        let mut rhs = DVector::<f64>::zeros(ns);
        for (gi, &node) in self.topo_globals.iter().enumerate() {
            rhs[gi] = b[node];
        }
        if self.bordered {
            rhs[ng] = b_border;
        }
        for ch in &self.chains {
            let y = &mut x[ch.start..ch.start + ch.len];
            ch.tri.solve_in_place(y);
            for &(gi, l, v) in &ch.inbound {
                rhs[gi] -= v * y[l];
            }
        }
        let xs = self
            .schur
            .solve(&rhs)
            .unwrap_or_else(|| DVector::from_element(ns, f64::NAN));
        for (gi, &node) in self.topo_globals.iter().enumerate() {
            x[node] = xs[gi];
        }
        for ch in &self.chains {
            for (col, &gj) in ch.coupled.iter().enumerate() {
                let g = xs[gj];
                for l in 0..ch.len {
                    x[ch.start + l] -= ch.x[col * ch.len + l] * g;
                }
            }
        }
        debug_assert_eq!(x.len(), self.n);
        (x, if self.bordered { xs[ng] } else { 0.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Path 0-1-2-3-4-5 closed into a ring through global 0, with globals {0, 3}.
    fn ring() -> (Csr, Topology) {
        let n = 6;
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for i in 0..n {
            let next = (i + 1) % n;
            let prev = (i + n - 1) % n;
            rows[i].push((i, 2.5 + 0.1 * i as f64));
            rows[i].push((next, -1.0 - 0.05 * i as f64));
            rows[i].push((prev, -0.7));
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in rows {
            for (j, v) in r {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        let a = Csr {
            n,
            row_ptr,
            cols,
            vals,
        };
        let topo = Topology {
            globals: vec![0, 3],
            global_of: vec![Some(0), None, None, Some(1), None, None],
            chains: vec![(1, 2), (4, 2)],
        };
        (a, topo)
    }

    #[test]
    fn matches_dense_solve() {
        let (a, topo) = ring();
        let b: Vec<f64> = (0..6).map(|i| (i as f64).sin() + 0.3).collect();
        let f = Factorization::new(&a, &topo, None).unwrap();
        let (x, _) = f.solve(&b, 0.0);
        let dense = a
            .to_dense()
            .lu()
            .solve(&DVector::from_vec(b.clone()))
            .unwrap();
        for i in 0..6 {
            assert!((x[i] - dense[i]).abs() < 1e-13);
        }
        let det = a.to_dense().determinant();
        assert_eq!(f.det_sign(), det.signum());
    }

    #[test]
    fn bordered_matches_dense() {
        let (a, topo) = ring();
        let col: Vec<f64> = (0..6).map(|i| 0.1 * i as f64 - 0.2).collect();
        let row: Vec<f64> = (0..6).map(|i| 0.3 - 0.05 * i as f64).collect();
        let border = Border {
            column: &col,
            row: &row,
            corner: 0.7,
        };
        let f = Factorization::new(&a, &topo, Some(border)).unwrap();
        let b: Vec<f64> = (0..6).map(|i| 1.0 + i as f64).collect();
        let (x, xb) = f.solve(&b, -0.4);
        let mut m = DMatrix::zeros(7, 7);
        m.view_mut((0, 0), (6, 6)).copy_from(&a.to_dense());
        for i in 0..6 {
            m[(i, 6)] = col[i];
            m[(6, i)] = row[i];
        }
        m[(6, 6)] = 0.7;
        let mut rhs = DVector::zeros(7);
        for i in 0..6 {
            rhs[i] = b[i];
        }
        rhs[6] = -0.4;
        let dense = m.clone().lu().solve(&rhs).unwrap();
        for i in 0..6 {
            assert!((x[i] - dense[i]).abs() < 1e-12);
        }
        assert!((xb - dense[6]).abs() < 1e-12);
        assert_eq!(f.det_sign(), m.determinant().signum());
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let tri = Tridiagonal::factor(vec![1.0, 1.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let mut b = vec![1.0, 2.0, 3.0];
        tri.solve_in_place(&mut b);
        // [[0,1,0],[1,0,1],[0,1,1]] x = [1,2,3]
        assert!((b[1] - 1.0).abs() < 1e-15);
        assert!((b[0] + b[2] - 2.0).abs() < 1e-15);
        assert!((b[1] + b[2] - 3.0).abs() < 1e-15);
    }
}
