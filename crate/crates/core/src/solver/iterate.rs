use super::discretize::Discretization;
use super::linalg::Factorization;
use super::state::StationaryState;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PetviashviliOptions {
    pub max_iterations: usize,
    /// Sup-norm of the update at which the iteration stops.
    pub tolerance: f64,
    pub exponent: f64,
}

impl Default for PetviashviliOptions {
    fn default() -> Self {
        PetviashviliOptions {
            max_iterations: 2000,
            tolerance: 1e-10,
            exponent: 1.5,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Petviashvili iteration `Φ ← S^γ L⁻¹(2Φ³)` with `L = -Δ - Λ` and the
/// stabilizing factor `S = ⟨LΦ, Φ⟩ / ⟨2Φ³, Φ⟩`.
pub fn petviashvili(
    d: &Discretization,
    lambda: f64,
    guess: &[f64],
    opts: PetviashviliOptions,
) -> Result<StationaryState> {
    if guess.len() != d.len() {
        return Err(Error::domain(format!(
            "guess has {} values, grid has {}",
            guess.len(),
            d.len()
        )));
    }
    if sup(guess) == 0.0 {
        return Err(Error::domain(
            "Petviashvili iteration needs a nonzero initial guess",
        ));
    }
    let op = d.assemble_operator(lambda)?;
    let factor = Factorization::new(&op, d.topology(), None)?;
    let mut u = guess.to_vec();
    for it in 1..=opts.max_iterations {
        let lu = op.mul_vec(&u);
        let n3: Vec<f64> = d.cubic_term(&u).into_iter().map(|x| 2.0 * x).collect();
        let s = dot(&lu, &u) / dot(&n3, &u);
        if !(s > 0.0 && s < 10.0) {
            return Err(Error::convergence(format!(
                "stabilizing factor {s:.3e} left (0, 10) at iteration {it}"
            )));
        }
        let (w, _) = factor.solve(&n3, 0.0);
        let scale = s.powf(opts.exponent);
        let mut change = 0.0f64;
        for (ui, wi) in u.iter_mut().zip(&w) {
            let next = scale * wi;
            change = change.max((next - *ui).abs());
            *ui = next;
        }
        if !change.is_finite() {
            return Err(Error::numerical("Petviashvili iterate is not finite"));
        }
        if change < opts.tolerance {
            return Ok(StationaryState::new(d, lambda, u, it));
        }
    }
    Err(Error::convergence(format!(
        "Petviashvili iteration did not converge in {} steps",
        opts.max_iterations
    )))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Relative residual at which Newton stops.
    pub tolerance: f64,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iterations: 50,
            tolerance: 1e-12,
            max_halvings: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOutcome {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

pub(crate) fn singular_jacobian(e: Error) -> Error {
    match e {
        Error::Numerical(msg) => Error::Numerical(format!(
            "Jacobian is singular ({msg}); the state is at or near a bifurcation point, use branch continuation"
        )),
        other => other,
    }
}

/// Damped Newton iteration on `F(Φ) = -ΔΦ - ΛΦ - 2Φ³` with Dirichlet data
/// `dirichlet` on the Dirichlet vertices of `d`.
pub fn newton_solve(
    d: &Discretization,
    lambda: f64,
    initial: &[f64],
    dirichlet: &[f64],
    opts: NewtonOptions,
) -> Result<NewtonOutcome> {
    if initial.len() != d.len() {
        return Err(Error::domain(format!(
            "initial guess has {} values, grid has {}",
            initial.len(),
            d.len()
        )));
    }
    let mut u = initial.to_vec();
    let mut res = d.relative_residual(&u, lambda, dirichlet);
    for it in 0..opts.max_iterations {
        if res < opts.tolerance {
            return Ok(NewtonOutcome {
                values: u,
                iterations: it,
                residual: res,
            });
        }
        let jac = d.jacobian(&u, lambda)?;
        let factor = Factorization::new(&jac, d.topology(), None).map_err(singular_jacobian)?;
        let f = d.residual(&u, lambda, dirichlet);
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let (step, _) = factor.solve(&rhs, 0.0);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, b)| a + t * b).collect();
            let r = d.relative_residual(&trial, lambda, dirichlet);
            if r < res {
                u = trial;
                res = r;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            if res < 100.0 * opts.tolerance {
                return Ok(NewtonOutcome {
                    values: u,
                    iterations: it,
                    residual: res,
                });
            }
            return Err(Error::convergence(format!(
                "Newton line search stalled at relative residual {res:.3e}"
            )));
        }
    }
    if res < opts.tolerance {
        return Ok(NewtonOutcome {
            values: u,
            iterations: opts.max_iterations,
            residual: res,
        });
    }
    Err(Error::convergence(format!(
        "Newton did not converge in {} iterations (relative residual {res:.3e})",
        opts.max_iterations
    )))
}

/// Newton refinement of an approximate state; the input residual must be
/// below `1e-2`.
pub fn newton_refine(
    d: &Discretization,
    state: &StationaryState,
    opts: NewtonOptions,
) -> Result<StationaryState> {
    let res = d.relative_residual(&state.values, state.lambda, &[]);
    if !(res < 1e-2) {
        return Err(Error::domain(format!(
            "Newton refinement needs residual below 1e-2, got {res:.3e}"
        )));
    }
    let out = newton_solve(d, state.lambda, &state.values, &[], opts)?;
    Ok(StationaryState::new(
        d,
        state.lambda,
        out.values,
        out.iterations,
    ))
}
