use super::discretize::Discretization;
use super::state::StationaryState;
use crate::asymptotics::EdgeStatePrediction;
use crate::elliptic::dnoidal_profile;
use crate::error::{Error, Result};
use crate::graph::{EdgeKind, EdgeShape};
use crate::linear_dtn::solve_linear_bvp;

/// Initial guess built from a prediction: the scaled elliptic profile on the
/// predicted edge and the linear decaying solution on the rest of the graph.
pub fn seed_from_prediction(
    pred: &EdgeStatePrediction,
    d: &Discretization,
) -> Result<StationaryState> {
    let g = d.graph();
    let id = pred
        .edge
        .as_deref()
        .ok_or_else(|| Error::domain("prediction is not attached to an edge"))?;
    let e = g.edge_index(id).ok_or_else(|| {
        Error::domain(format!("edge '{id}' of the prediction is not in the graph"))
    })?;
    let mu = pred.mu;
    let k = if pred.k > 0.0 && pred.k < std::f64::consts::SQRT_2 {
        pred.k
    } else {
        1.0
    };
    let profile = |z: f64| {
        mu * dnoidal_profile(z, k)
            .or_else(|_| dnoidal_profile(z, 1.0))
            .unwrap_or(0.0)
    };

    // distance from the maximum in edge coordinates
    let dist: Box<dyn Fn(f64) -> f64> = match (g.classify_edge(e), &g.edge(e).shape) {
        (EdgeKind::Pendant { .. }, EdgeShape::Segment { to, length, .. }) => {
            let free_at_end = g.pendant_attachment(e) != Some(*to);
            let l = *length;
            if free_at_end {
                Box::new(move |x| l - x)
            } else {
                Box::new(|x| x)
            }
        }
        (EdgeKind::Loop { .. }, _) => Box::new(|x: f64| x.abs()),
        (EdgeKind::Internal { .. }, EdgeShape::Segment { length, .. }) => {
            let centre = 0.5 * length + pred.a / mu;
            Box::new(move |x| (x - centre).abs())
        }
        _ => {
            return Err(Error::domain(format!(
                "edge '{id}' cannot carry a localized state"
            )))
        }
    };

    let mut tails = None;
    if g.edges().len() > 1 {
        let gc = g.remainder(e)?.scale(mu)?;
        let (from, to) = g.edge(e).endpoints();
        let to = to.expect("finite edge");
        let range = g.edge(e).coordinate_range();
        let p: Vec<f64> = gc
            .boundary()
            .iter()
            .map(|&b| {
                let x = if gc.vertex_id(b) == g.vertex_id(from) {
                    range.0
                } else {
                    range.1
                };
                debug_assert!(
                    gc.vertex_id(b) == g.vertex_id(from) || gc.vertex_id(b) == g.vertex_id(to)
                );
                profile(mu * dist(x)) / mu
            })
            .collect();
        let lin = solve_linear_bvp(&gc, &p)?;
        let map: Vec<Option<usize>> = g.edges().iter().map(|ed| gc.edge_index(&ed.id)).collect();
        tails = Some((lin, map));
    }
    let values = d.sample(|edge, x| {
        if edge == e {
            profile(mu * dist(x))
        } else if let Some((lin, map)) = &tails {
            map[edge].map_or(0.0, |ec| mu * lin.value(ec, mu * x))
        } else {
            0.0
        }
    });
    Ok(StationaryState::new(d, -mu * mu, values, 0))
}

/// `Φ ≡ √(-Λ/2)`, an exact solution on a compact graph.
pub fn constant_seed(d: &Discretization, lambda: f64) -> Result<StationaryState> {
    if !(lambda < 0.0) {
        return Err(Error::domain(format!(
            "Lambda must be negative, got {lambda}"
        )));
    }
    if d.graph().has_halflines() {
        return Err(Error::domain(
            "the constant state exists only on compact graphs",
        ));
    }
    let c = (-0.5 * lambda).sqrt();
    Ok(StationaryState::new(d, lambda, vec![c; d.len()], 0))
}
