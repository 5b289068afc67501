//! Large-`μ` predictions for edge-localized states.
//!
//! With `ℓ` the pendant length, or the half-length of a loop or internal
//! edge, the states satisfy
//!
//! ```text
//! pendant   k = 1 + 8 (N-1)/(N+1) e^{-2μℓ}           Q = μ  - 8 (N-1)/(N+1) μ²ℓ e^{-2μℓ}
//! loop      k = 1 + 8 (N-2)/(N+2) e^{-2μℓ}           Q = 2μ - 16 (N-2)/(N+2) μ²ℓ e^{-2μℓ}
//! internal  k = 1 + 8 s(N₋) s(N₊) e^{-2μℓ}            Q = 2μ - 16 s(N₋) s(N₊) μ²ℓ e^{-2μℓ}
//! ```
//!
//! with `s(N) = √((N-1)/(N+1))`.  Energies are `-μ³/3` (pendant) and
//! `-2μ³/3` to leading order.  The maximum of an internal state sits at
//! `a* = ½ atanh((N₋-N₊)/(N₊N₋-1))` from the midpoint, towards `v₊` when
//! positive.

mod matching;
mod rank;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeKind, MetricGraph};

pub use matching::{refine_k_matching, MatchingOptions, RefinedState};
pub use rank::{
    ground_state_existence, rank_edges, Existence, ExistenceReport, RankOptions, RankReport,
    RankedEdge, Rule,
};

/// Character of the elliptic profile on the localization edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `k < 1`, sign-definite.
    Dnoidal,
    /// `k > 1`, the cnoidal family under the real transformation.
    Cnoidal,
    /// The first correction to `k = 1` vanishes.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeStatePrediction {
    pub edge: Option<String>,
    pub kind: EdgeKind,
    pub mu: f64,
    /// `ℓ` of the expansions: pendant length or half-length.
    pub ell: f64,
    pub k: f64,
    /// Offset of the maximum from the midpoint, in scaled units.
    pub a: f64,
    pub mass: f64,
    pub energy: f64,
    /// `c` in `Q = Q₀ - c μ²ℓ e^{-2μℓ}`.
    pub coefficient: f64,
    /// `Q₀`, either `μ` or `2μ`.
    pub leading_mass: f64,
    pub regime: Regime,
    pub warnings: Vec<String>,
}

/// Relative size of the correction above which a warning is attached.
pub const TRUST_THRESHOLD: f64 = 0.05;

fn check(ell: f64, mu: f64) -> Result<()> {
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::domain(format!(
            "edge length must be positive, got {ell}"
        )));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::domain(format!("mu must be positive, got {mu}")));
    }
    Ok(())
}

fn regime(c: f64) -> Regime {
    if c > 0.0 {
        Regime::Cnoidal
    } else if c < 0.0 {
        Regime::Dnoidal
    } else {
        Regime::Undetermined
    }
}

fn assemble(
    kind: EdgeKind,
    ell: f64,
    mu: f64,
    k_coef: f64,
    q_lead: f64,
    e_lead: f64,
    a: f64,
) -> EdgeStatePrediction {
    let decay = (-2.0 * mu * ell).exp();
    let coefficient = 8.0 * k_coef * q_lead / mu;
    let correction = coefficient * mu * mu * ell * decay;
    let mut warnings = Vec::new();
    if correction.abs() > TRUST_THRESHOLD * q_lead {
        warnings.push(format!(
            "mass correction is {:.1}% of the leading term; mu = {mu} is outside the asymptotic regime",
            100.0 * correction.abs() / q_lead
        ));
    }
    EdgeStatePrediction {
        edge: None,
        kind,
        mu,
        ell,
        k: 1.0 + 8.0 * k_coef * decay,
        a,
        mass: q_lead - correction,
        energy: e_lead,
        coefficient,
        leading_mass: q_lead,
        regime: regime(k_coef),
        warnings,
    }
}

/// Pendant edge of length `ell` attached at a vertex with `n` other edges.
pub fn predict_pendant(ell: f64, n: usize, mu: f64) -> Result<EdgeStatePrediction> {
    check(ell, mu)?;
    if n < 1 {
        return Err(Error::domain(
            "a pendant edge needs N >= 1 edges at its attachment vertex",
        ));
    }
    let c = (n as f64 - 1.0) / (n as f64 + 1.0);
    Ok(assemble(
        EdgeKind::Pendant { length: ell, n },
        ell,
        mu,
        c,
        mu,
        -mu.powi(3) / 3.0,
        0.0,
    ))
}

/// Loop of total length `2 ell_half` at a vertex with `n` other edges.
pub fn predict_loop(ell_half: f64, n: usize, mu: f64) -> Result<EdgeStatePrediction> {
    check(ell_half, mu)?;
    if n < 1 {
        return Err(Error::domain(
            "a loop needs N >= 1 other edges at its vertex",
        ));
    }
    let c = (n as f64 - 2.0) / (n as f64 + 2.0);
    let kind = EdgeKind::Loop {
        length: 2.0 * ell_half,
        n,
    };
    Ok(assemble(
        kind,
        ell_half,
        mu,
        c,
        2.0 * mu,
        -2.0 * mu.powi(3) / 3.0,
        0.0,
    ))
}

/// Offset of the maximum on an internal edge, `½ atanh((N₋-N₊)/(N₊N₋-1))`.
pub fn internal_offset(n_minus: usize, n_plus: usize) -> Result<f64> {
    let (a, b) = (n_minus as f64, n_plus as f64);
    let den = a * b - 1.0;
    if den <= 0.0 {
        return Err(Error::domain(format!(
            "offset undefined for N- = {n_minus}, N+ = {n_plus}"
        )));
    }
    let lim = 1.0 - 1e-12;
    Ok(0.5 * ((a - b) / den).clamp(-lim, lim).atanh())
}

/// Internal edge of total length `2 ell_half` between vertices with
/// `n_minus + 1` and `n_plus + 1` edges.
pub fn predict_internal(
    ell_half: f64,
    n_minus: usize,
    n_plus: usize,
    mu: f64,
) -> Result<EdgeStatePrediction> {
    check(ell_half, mu)?;
    if n_minus < 1 || n_plus < 1 || (n_minus == 1 && n_plus == 1) {
        return Err(Error::domain(format!(
            "internal edge needs N+-, >= 1 and not both 1, got ({n_minus}, {n_plus})"
        )));
    }
    let s = |n: usize| ((n as f64 - 1.0) / (n as f64 + 1.0)).sqrt();
    let a = internal_offset(n_minus, n_plus)?;
    let kind = EdgeKind::Internal {
        length: 2.0 * ell_half,
        n_minus,
        n_plus,
    };
    let mut p = assemble(
        kind,
        ell_half,
        mu,
        s(n_minus) * s(n_plus),
        2.0 * mu,
        -2.0 * mu.powi(3) / 3.0,
        a,
    );
    if n_minus == 1 || n_plus == 1 {
        p.warnings.push(
            "an end vertex has degree 2; the expansion is used outside its proven range".into(),
        );
    }
    Ok(p)
}

/// Prediction for a finite edge of `g`, classified in place.
pub fn predict_edge(g: &MetricGraph, e: usize, mu: f64) -> Result<EdgeStatePrediction> {
    let mut p = match g.classify_edge(e) {
        EdgeKind::Pendant { length, n } => predict_pendant(length, n, mu)?,
        EdgeKind::Loop { length, n } => predict_loop(0.5 * length, n, mu)?,
        EdgeKind::Internal {
            length,
            n_minus,
            n_plus,
        } => predict_internal(0.5 * length, n_minus, n_plus, mu)?,
        EdgeKind::HalfLine => {
            return Err(Error::domain(format!(
                "edge '{}' is a half-line; no localized state",
                g.edge(e).id
            )))
        }
    };
    p.edge = Some(g.edge(e).id.clone());
    Ok(p)
}

/// Predictions for every finite edge; edges without a prediction are skipped.
pub fn predict_all(g: &MetricGraph, mu: f64) -> Vec<EdgeStatePrediction> {
    (0..g.edges().len())
        .filter_map(|e| predict_edge(g, e, mu).ok())
        .collect()
}
