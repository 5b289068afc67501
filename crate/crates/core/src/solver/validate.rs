use serde::Serialize;

use super::discretize::Discretization;
use super::state::StationaryState;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "check")]
pub enum StateViolation {
    Negative {
        edge: String,
        x: f64,
        value: f64,
    },
    /// More than one strict local maximum on the graph.
    MultipleMaxima {
        locations: Vec<(String, f64)>,
    },
    /// The state increases away from its maximum on the localization edge.
    NotMonotone {
        edge: String,
        x: f64,
    },
    /// A level is attained more than twice on one edge.
    Preimages {
        edge: String,
        level: f64,
        count: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateReport {
    pub strict_maxima: usize,
    pub violations: Vec<StateViolation>,
}

impl StateReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

const LEVELS: usize = 64;

/// One representative node per connected plateau (values within `tol`)
/// whose outside neighbours all lie strictly below it.
fn plateau_maxima(u: &[f64], nb: &[Vec<usize>], tol: f64) -> Vec<usize> {
    let candidate: Vec<bool> = (0..u.len())
        .map(|i| nb[i].iter().all(|&j| u[j] <= u[i] + tol))
        .collect();
    let mut done = vec![false; u.len()];
    let mut visited = vec![false; u.len()];
    let mut out = Vec::new();
    for start in 0..u.len() {
        if !candidate[start] || done[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut plateau = vec![start];
        visited[start] = true;
        let mut strict = true;
        let mut below = false;
        while let Some(i) = stack.pop() {
            for &j in &nb[i] {
                if (u[j] - u[start]).abs() <= tol {
                    if !visited[j] {
                        visited[j] = true;
                        if !candidate[j] {
                            strict = false;
                        }
                        stack.push(j);
                        plateau.push(j);
                    }
                } else if u[j] < u[start] {
                    below = true;
                } else {
                    strict = false;
                }
            }
        }
        for &i in &plateau {
            visited[i] = false;
            if strict {
                done[i] = true;
            }
        }
        if strict && below {
            out.push(start);
        }
    }
    out
}

/// Checks positivity, a single global maximum, monotone decay away from the
/// maximum on the localization edge, and at most two preimages of every
/// level on each edge.
pub fn validate_state(d: &Discretization, state: &StationaryState) -> StateReport {
    let u = &state.values;
    let g = d.graph();
    let scale = state.max_abs().max(f64::MIN_POSITIVE);
    let tol = 1e-9 * scale;
    let name = |e: usize| g.edge(e).id.clone();
    let mut violations = Vec::new();

    let mut lowest: Option<(usize, f64, f64)> = None;
    for grid in d.grids() {
        for (i, &node) in grid.nodes.iter().enumerate() {
            if u[node] < -tol && lowest.is_none_or(|(_, _, v)| u[node] < v) {
                lowest = Some((grid.edge, grid.coordinate(i), u[node]));
            }
        }
    }
    if let Some((e, x, value)) = lowest {
        violations.push(StateViolation::Negative {
            edge: name(e),
            x,
            value,
        });
    }

    let nb = d.neighbours();
    let location = |node: usize| -> (String, f64) {
        for grid in d.grids() {
            if let Some(i) = grid.nodes.iter().position(|&n| n == node) {
                return (name(grid.edge), grid.coordinate(i));
            }
        }
        (String::new(), f64::NAN)
    };
    let maxima = plateau_maxima(u, &nb, tol);
    if maxima.len() > 1 {
        violations.push(StateViolation::MultipleMaxima {
            locations: maxima.iter().map(|&m| location(m)).collect(),
        });
    }

    if let Some((e, _)) = state.localization {
        let f = d.edge_values(u, e);
        let top = (0..f.len())
            .max_by(|&a, &b| f[a].total_cmp(&f[b]))
            .unwrap_or(0);
        let rising = (top + 1..f.len())
            .find(|&i| f[i] > f[i - 1] + tol)
            .or_else(|| (1..=top).rev().find(|&i| f[i - 1] > f[i] + tol));
        if let Some(i) = rising {
            violations.push(StateViolation::NotMonotone {
                edge: name(e),
                x: d.grid(e).coordinate(i),
            });
        }
    }

    for grid in d.grids() {
        let f = d.edge_values(u, grid.edge);
        let (lo, hi) = f
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        if hi - lo <= tol {
            continue;
        }
        for j in 1..LEVELS {
            let level = lo + (hi - lo) * j as f64 / LEVELS as f64;
            let mut count = 0;
            let mut side = 0i8;
            for &v in &f {
                let s = if v > level + tol {
                    1
                } else if v < level - tol {
                    -1
                } else {
                    0
                };
                if s != 0 {
                    if side != 0 && s != side {
                        count += 1;
                    }
                    side = s;
                }
            }
            if count > 2 {
                violations.push(StateViolation::Preimages {
                    edge: name(grid.edge),
                    level,
                    count,
                });
                break;
            }
        }
    }
    StateReport {
        strict_maxima: maxima.len(),
        violations,
    }
}
