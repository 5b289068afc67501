use std::cmp::Ordering;

use serde::Serialize;

use super::{predict_edge, EdgeStatePrediction};
use crate::error::{Error, Result};
use crate::graph::{EdgeKind, MetricGraph};

/// Which comparison placed an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Longest pendant, ties to the fewest incident edges.
    Pendant,
    /// Shortest loop with a single other edge at its vertex.
    LoopN1,
    /// Loop with two other edges; no tie-breaker is known.
    LoopN2,
    /// Longest loop with `N >= 3` or internal edge, ties to the smallest
    /// correction factor.
    Longest,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedEdge {
    pub edge: String,
    pub kind: EdgeKind,
    pub rule: Rule,
    /// Length entering the comparison (pendant length, otherwise half-length).
    pub ell: f64,
    /// `(N-2)/(N+2)`, `s(N₋)s(N₊)` or `(N-1)/(N+1)` for pendants.
    pub factor: f64,
    pub prediction: Option<EdgeStatePrediction>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub mu: f64,
    /// Best first.
    pub ranking: Vec<RankedEdge>,
    pub winner_rule: Rule,
    /// Set when the leading candidates cannot be ordered.
    pub inconclusive: bool,
    /// Edges tied with the winner.
    pub tied: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankOptions {
    /// Relative tolerance for equal lengths and factors.
    pub tie_tolerance: f64,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            tie_tolerance: 1e-9,
        }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Compares two candidates of the same rule; `Less` means `a` is preferred.
fn compare(a: &RankedEdge, b: &RankedEdge, tol: f64) -> Ordering {
    let by_len = |longer_first: bool| {
        if close(a.ell, b.ell, tol) {
            Ordering::Equal
        } else if longer_first {
            b.ell.total_cmp(&a.ell)
        } else {
            a.ell.total_cmp(&b.ell)
        }
    };
    let by_factor = || {
        if close(a.factor, b.factor, tol) {
            Ordering::Equal
        } else {
            a.factor.total_cmp(&b.factor)
        }
    };
    match a.rule {
        Rule::Pendant | Rule::Longest => by_len(true).then_with(by_factor),
        Rule::LoopN1 => by_len(false),
        Rule::LoopN2 => Ordering::Equal,
    }
}

/// Orders the finite edges by the energy of their localized states at large
/// fixed mass.
pub fn rank_edges(g: &MetricGraph, mu: f64, opts: RankOptions) -> Result<RankReport> {
    let mut notes = Vec::new();
    if g.has_halflines() {
        notes.push("graph is unbounded; half-lines are not ranked".to_string());
    }
    let s = |n: usize| ((n as f64 - 1.0) / (n as f64 + 1.0)).sqrt();
    let mut edges = Vec::new();
    for (e, edge) in g.edges().iter().enumerate() {
        let kind = g.classify_edge(e);
        let (rule, ell, factor) = match kind {
            EdgeKind::Pendant { length, n } => {
                (Rule::Pendant, length, (n as f64 - 1.0) / (n as f64 + 1.0))
            }
            EdgeKind::Loop { length, n: 1 } => (Rule::LoopN1, 0.5 * length, -1.0 / 3.0),
            EdgeKind::Loop { length, n: 2 } => (Rule::LoopN2, 0.5 * length, 0.0),
            EdgeKind::Loop { length, n } => (
                Rule::Longest,
                0.5 * length,
                (n as f64 - 2.0) / (n as f64 + 2.0),
            ),
            EdgeKind::Internal {
                length,
                n_minus,
                n_plus,
            } => (Rule::Longest, 0.5 * length, s(n_minus) * s(n_plus)),
            EdgeKind::HalfLine => continue,
        };
        let prediction = if mu > 0.0 {
            predict_edge(g, e, mu).ok()
        } else {
            None
        };
        edges.push(RankedEdge {
            edge: edge.id.clone(),
            kind,
            rule,
            ell,
            factor,
            prediction,
        });
    }
    if edges.is_empty() {
        return Err(Error::domain("graph has no finite edges to rank"));
    }
    let tol = opts.tie_tolerance;
    edges.sort_by(|a, b| {
        a.rule
            .cmp(&b.rule)
            .then_with(|| compare(a, b, tol))
            .then_with(|| a.edge.cmp(&b.edge))
    });
    let winner_rule = edges[0].rule;
    let tied: Vec<String> = edges
        .iter()
        .filter(|e| e.rule == winner_rule && compare(&edges[0], e, tol) == Ordering::Equal)
        .map(|e| e.edge.clone())
        .collect();
    let mut inconclusive = false;
    if winner_rule == Rule::LoopN2 {
        inconclusive = true;
        notes.push(
            "leading candidates are loops with N = 2; there is no tie-breaker at this order".into(),
        );
    } else if tied.len() > 1 {
        let equivalent = edges
            .iter()
            .filter(|e| tied.contains(&e.edge))
            .all(|e| e.kind == edges[0].kind || close(e.factor, edges[0].factor, tol));
        inconclusive = !equivalent || winner_rule == Rule::Longest && !all_same_kind(&edges, &tied);
        if inconclusive {
            notes.push(
                "leading candidates tie at first exponential order; higher-order terms are needed"
                    .into(),
            );
        } else {
            notes.push("leading candidates are equivalent edges".into());
        }
    }
    Ok(RankReport {
        mu,
        ranking: edges,
        winner_rule,
        inconclusive,
        tied,
        notes,
    })
}

fn all_same_kind(edges: &[RankedEdge], ids: &[String]) -> bool {
    let mut kinds = edges
        .iter()
        .filter(|e| ids.contains(&e.edge))
        .map(|e| std::mem::discriminant(&e.kind));
    let first = kinds.next();
    kinds.all(|k| Some(k) == first)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Existence {
    Exists,
    NotAmongEdgeStates,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExistenceReport {
    pub verdict: Existence,
    pub reason: String,
}

/// Whether the constrained energy minimizer exists, decided from the edge
/// types of the graph.
pub fn ground_state_existence(g: &MetricGraph) -> ExistenceReport {
    if !g.has_halflines() {
        return ExistenceReport {
            verdict: Existence::Exists,
            reason: "bounded graph".into(),
        };
    }
    let kinds: Vec<EdgeKind> = (0..g.edges().len()).map(|e| g.classify_edge(e)).collect();
    if kinds.iter().any(|k| matches!(k, EdgeKind::Pendant { .. })) {
        return ExistenceReport {
            verdict: Existence::Exists,
            reason: "pendant edge present".into(),
        };
    }
    if kinds
        .iter()
        .any(|k| matches!(k, EdgeKind::Loop { n: 1, .. }))
    {
        return ExistenceReport {
            verdict: Existence::Exists,
            reason: "loop with a single other edge gives Q > 2 mu".into(),
        };
    }
    if kinds
        .iter()
        .any(|k| matches!(k, EdgeKind::Loop { n: 2, .. }))
    {
        let unfolds = g.vertex_count() == 1 && g.edges().len() == 3;
        let mut reason =
            "loop with two other edges gives Q close to 2 mu; higher-order terms decide"
                .to_string();
        if unfolds {
            reason.push_str(
                "; this graph unfolds to the real line, where the soliton is the ground state",
            );
        }
        return ExistenceReport {
            verdict: Existence::Inconclusive,
            reason,
        };
    }
    ExistenceReport {
        verdict: Existence::NotAmongEdgeStates,
        reason: "every loop and internal edge has Q < 2 mu".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dumbbell(k: usize, internal: f64) -> MetricGraph {
        let mut b = MetricGraph::builder()
            .vertex("a")
            .vertex("b")
            .looped("la", "a", 2.0 * PI)
            .looped("lb", "b", 2.0 * PI);
        for i in 0..k {
            b = b.edge(format!("e{i}"), "a", "b", internal);
        }
        b.build().unwrap()
    }

    #[test]
    fn pendant_beats_loops() {
        let g = MetricGraph::builder()
            .vertex("a")
            .vertex("b")
            .looped("l", "a", 10.0)
            .edge("p", "a", "b", 0.1)
            .build()
            .unwrap();
        let r = rank_edges(&g, 5.0, RankOptions::default()).unwrap();
        assert_eq!(r.ranking[0].edge, "p");
        assert_eq!(r.winner_rule, Rule::Pendant);
    }

    #[test]
    fn dumbbells() {
        let r = rank_edges(&dumbbell(1, PI), 3.0, RankOptions::default()).unwrap();
        assert_eq!(r.winner_rule, Rule::LoopN1);
        let r = rank_edges(&dumbbell(3, PI), 3.0, RankOptions::default()).unwrap();
        assert!(r.ranking[0].edge.starts_with('l'));
        let r = rank_edges(&dumbbell(3, 4.0 * PI), 3.0, RankOptions::default()).unwrap();
        assert!(r.ranking[0].edge.starts_with('e'));
        assert!(!r.inconclusive);
        let r = rank_edges(&dumbbell(2, PI), 3.0, RankOptions::default()).unwrap();
        assert!(r.inconclusive && r.winner_rule == Rule::LoopN2);
    }

    fn tadpole(k: usize) -> MetricGraph {
        let mut b = MetricGraph::builder().vertex("v").looped("l", "v", 2.0);
        for i in 0..k {
            b = b.halfline(format!("h{i}"), "v");
        }
        b.build().unwrap()
    }

    #[test]
    fn tadpole_existence() {
        assert_eq!(
            ground_state_existence(&tadpole(1)).verdict,
            Existence::Exists
        );
        let two = ground_state_existence(&tadpole(2));
        assert_eq!(two.verdict, Existence::Inconclusive);
        assert!(two.reason.contains("unfolds"));
        assert_eq!(
            ground_state_existence(&tadpole(3)).verdict,
            Existence::NotAmongEdgeStates
        );
        assert_eq!(
            ground_state_existence(&dumbbell(1, 1.0)).verdict,
            Existence::Exists
        );
    }
}
