//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use qgnls::asymptotics::{refine_k_matching, Existence, MatchingOptions};
use qgnls::comparison::{
    edge_branch, reproduce_dumbbell, reproduce_periodic, reproduce_tadpole,
    verify_comparison_lemma, CaseStudy, Hypothesis, SweepConfig, Winner,
};
use qgnls::elliptic::{
    cnoidal_profile, complete_k, dk_jacobi_at_one, dnoidal_profile, jacobi, k_log_expansion,
};
use qgnls::linear_dtn::{dtn_matrix, dtn_via_scattering, linear_solution_norm, solve_linear_bvp};
use qgnls::nonlinear_dtn::{single_bump_derivatives, single_bump_values, single_bump_window};
use qgnls::solver::{
    newton_refine, petviashvili, Branch, Discretization, DiscretizationOptions, NewtonOptions,
    PetviashviliOptions,
};
use qgnls::{MetricGraph, Result};

type Outcome = Result<(bool, String)>;

fn star_with_pendant() -> MetricGraph {
    MetricGraph::builder()
        .vertex("c")
        .vertex("p")
        .vertex("x")
        .vertex("y")
        .vertex("z")
        .edge("pend", "c", "p", 1.5)
        .edge("e1", "c", "x", 1.0)
        .edge("e2", "c", "y", 1.5)
        .edge("e3", "c", "z", 2.0)
        .build()
        .unwrap()
}

fn three_star(boundary: &[&str]) -> MetricGraph {
    let mut b = MetricGraph::builder()
        .vertex("c")
        .vertex("x")
        .vertex("y")
        .vertex("z")
        .edge("e1", "c", "x", 1.0)
        .edge("e2", "c", "y", 1.5)
        .edge("e3", "c", "z", 2.0);
    for v in boundary {
        b = b.boundary(*v);
    }
    b.build().unwrap()
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn c1_linear_dtn() -> Outcome {
    let g = MetricGraph::builder()
        .vertex("a")
        .vertex("b")
        .edge("e", "a", "b", 1.0)
        .boundary("a")
        .build()?;
    let (mut dtn_err, mut norm_err) = (0.0f64, 0.0f64);
    for n in 1..=20 {
        let mu = n as f64;
        dtn_err = dtn_err.max((dtn_matrix(&g, mu)?.matrix[(0, 0)] - mu.tanh()).abs());
        let p = 0.7;
        let sol = solve_linear_bvp(&g.scale(mu)?, &[p])?;
        let exact = 0.5 * p * p * (mu.tanh() + mu / mu.cosh().powi(2));
        norm_err = norm_err.max((linear_solution_norm(&sol) - exact).abs());
    }
    Ok((
        dtn_err < 1e-10 && norm_err < 1e-12,
        format!("max |M - tanh| {dtn_err:.1e}, max norm error {norm_err:.1e}"),
    ))
}

fn c2_route_equivalence() -> Outcome {
    let star = three_star(&["c", "x"]);
    let dumbbell = MetricGraph::builder()
        .vertex("a")
        .vertex("b")
        .looped("la", "a", 2.0)
        .looped("lb", "b", 3.0)
        .edge("e0", "a", "b", 1.5)
        .boundary("a")
        .boundary("b")
        .build()?;
    let tadpole = MetricGraph::builder()
        .vertex("v")
        .looped("loop", "v", 2.0)
        .halfline("h0", "v")
        .halfline("h1", "v")
        .boundary("v")
        .build()?;
    let mut worst = 0.0f64;
    for g in [&star, &dumbbell, &tadpole] {
        for mu in [1.0, 2.0, 4.0, 8.0] {
            let diff = &dtn_matrix(g, mu)?.matrix - &dtn_via_scattering(g, mu)?.matrix;
            worst = worst.max(diff.norm());
        }
    }
    Ok((
        worst < 1e-8,
        format!("max Frobenius difference {worst:.1e}"),
    ))
}

fn c3_dtn_decay() -> Outcome {
    let g = three_star(&["c", "x", "y", "z"]);
    let mus: Vec<f64> = (0..=10).map(|i| 3.0 + 0.5 * i as f64).collect();
    let logs = mus
        .iter()
        .map(|&mu| Ok(dtn_matrix(&g, mu)?.distance_to_degrees(&g).ln()))
        .collect::<Result<Vec<_>>>()?;
    let rate = -slope(&mus, &logs);
    Ok((
        (rate - 1.0).abs() < 0.15,
        format!("decay rate {rate:.4} (shortest edge 1)"),
    ))
}

fn c4_elliptic() -> Outcome {
    let mut ident = 0.0f64;
    for &k in &[0.0, 0.3, 0.7, 0.9, 0.999, 1.0, 1.05, 1.2, 1.4] {
        for i in 0..=40 {
            let u = -8.0 + 0.4 * i as f64;
            let j = jacobi(u, k)?;
            ident = ident.max((j.sn * j.sn + j.cn * j.cn - 1.0).abs());
            ident = ident.max((j.dn * j.dn + k * k * j.sn * j.sn - 1.0).abs());
        }
    }
    // five-point centered differences in k straddling k = 1
    let h = 1e-5;
    let mut dk = 0.0f64;
    for i in 0..=40 {
        let xi = -5.0 + 0.25 * i as f64;
        let f = |s: f64| jacobi(xi, 1.0 + s * h).unwrap();
        let (m2, m1, p1, p2) = (f(-2.0), f(-1.0), f(1.0), f(2.0));
        let d = |a: f64, b: f64, c: f64, e: f64| (a - 8.0 * b + 8.0 * c - e) / (12.0 * h);
        let exact = dk_jacobi_at_one(xi);
        dk = dk.max((d(m2.sn, m1.sn, p1.sn, p2.sn) - exact.sn).abs());
        dk = dk.max((d(m2.cn, m1.cn, p1.cn, p2.cn) - exact.cn).abs());
        dk = dk.max((d(m2.dn, m1.dn, p1.dn, p2.dn) - exact.dn).abs());
    }
    let mut cn = 0.0f64;
    for &k in &[1.01, 1.1, 1.3] {
        for i in 0..=30 {
            let z = 0.3 * i as f64;
            cn = cn.max((dnoidal_profile(z, k)? - cnoidal_profile(z, 1.0 / k)?).abs());
        }
    }
    let k = (1.0f64 - 1e-8).sqrt();
    let log_rel = (complete_k(k)? - k_log_expansion(k)).abs() / complete_k(k)?;
    let pass = ident < 1e-12 && dk < 1e-6 && cn < 1e-10 && log_rel < 1e-3;
    Ok((
        pass,
        format!("identities {ident:.1e}, dk {dk:.1e}, cnoidal {cn:.1e}, log term {log_rel:.1e}"),
    ))
}

fn c5_single_bump() -> Outcome {
    let l = 8.0;
    let w = single_bump_window(l)?;
    let s = 8.0 * (-2.0 * l).exp();
    let (rm, rp) = ((w.k_minus - 1.0) / -s, (w.k_plus - 1.0) / s);
    let window_ok = [rm, rp].iter().all(|r| (0.95..=1.05).contains(r));
    let mut worst = 0.0f64;
    for i in 0..=36 {
        let t = -0.9 + 0.05 * i as f64;
        let k = 1.0 + t * s;
        let (p, q) = single_bump_values(l, k)?;
        let pa = 2.0 * (-l).exp() - 0.25 * (k - 1.0) * l.exp();
        let qa = -2.0 * (-l).exp() - 0.25 * (k - 1.0) * l.exp();
        worst = worst.max((p / pa - 1.0).abs()).max((q / qa - 1.0).abs());
    }
    let (dp, dq) = single_bump_derivatives(10.0, 1.0)?;
    let lead = -0.25 * 10.0f64.exp();
    let (rdp, rdq) = (dp / lead, dq / lead);
    let der_ok = (rdp - 1.0).abs() < 0.05 && (rdq - 1.0).abs() < 0.05;
    let pass = window_ok && worst < 0.05 && der_ok;
    Ok((
        pass,
        format!("window ratios ({rm:.4}, {rp:.4}), value ratio error {worst:.1e}, derivative ratios ({rdp:.4}, {rdq:.4})"),
    ))
}

fn c6_matching() -> Outcome {
    let g = star_with_pendant();
    let e = g.edge_by_id("pend")?;
    let mut ratios = Vec::new();
    for mu in [5.0, 6.0, 7.0] {
        let r = refine_k_matching(&g, e, mu, MatchingOptions::default())?;
        ratios.push((r.k - 1.0) / (8.0 * 0.5 * (-2.0 * mu * 1.5).exp()));
    }
    let h = MetricGraph::builder()
        .vertex("u")
        .vertex("v")
        .vertex("a1")
        .vertex("a2")
        .vertex("b1")
        .vertex("b2")
        .edge("mid", "u", "v", 2.0)
        .edge("pa1", "u", "a1", 1.0)
        .edge("pa2", "u", "a2", 1.5)
        .edge("pb1", "v", "b1", 1.0)
        .edge("pb2", "v", "b2", 1.5)
        .build()?;
    let a = refine_k_matching(&h, h.edge_by_id("mid")?, 5.0, MatchingOptions::default())?.a;
    let t = MetricGraph::builder()
        .vertex("v")
        .vertex("w")
        .looped("l", "v", 3.0)
        .edge("t", "v", "w", 2.0)
        .build()?;
    let k_loop = refine_k_matching(&t, t.edge_by_id("l")?, 4.0, MatchingOptions::default())?.k;
    let pass = ratios.iter().all(|r| (0.9..=1.1).contains(r)) && a.abs() < 1e-8 && k_loop < 1.0;
    Ok((
        pass,
        format!(
            "pendant ratios {ratios:.4?}, symmetric offset {a:.1e}, loop k - 1 = {:.2e}",
            k_loop - 1.0
        ),
    ))
}

fn c7_soliton() -> Outcome {
    let g = MetricGraph::builder()
        .vertex("o")
        .halfline("left", "o")
        .halfline("right", "o")
        .build()?;
    let mu = 3.0;
    let d = Discretization::new(&g, DiscretizationOptions::new(mu, 20.0))?;
    let guess = d.sample(|_, x| 4.0 * (-x * x).exp());
    let p = petviashvili(&d, -mu * mu, &guess, PetviashviliOptions::default())?;
    let n = newton_refine(&d, &p, NewtonOptions::default())?;
    let pass = p.iterations < 200
        && (n.mass - 6.0).abs() < 1e-3
        && (n.energy + 18.0).abs() < 5e-3
        && n.residual < 1e-12;
    Ok((
        pass,
        format!(
            "{} iterations, Q = {:.6}, E = {:.5}, Newton residual {:.1e}",
            p.iterations, n.mass, n.energy, n.residual
        ),
    ))
}

struct Studies {
    short: CaseStudy,
    long: CaseStudy,
    single: CaseStudy,
    tadpole1: CaseStudy,
    tadpole3: CaseStudy,
    periodic_long: CaseStudy,
    periodic_short: CaseStudy,
}

impl Studies {
    fn all(&self) -> [&CaseStudy; 7] {
        [
            &self.short,
            &self.long,
            &self.single,
            &self.tadpole1,
            &self.tadpole3,
            &self.periodic_long,
            &self.periodic_short,
        ]
    }
}

fn cfg(mu_min: f64, mu_max: f64, points: usize, ppw: f64) -> SweepConfig {
    SweepConfig {
        mu_max,
        mu_min,
        points,
        points_per_wavelength: ppw,
    }
}

fn studies() -> Result<Studies> {
    let ((short, long), (single, (tadpole1, tadpole3))) = rayon::join(
        || {
            rayon::join(
                || reproduce_dumbbell(3, 2.0 * PI, PI, cfg(2.0, 4.0, 21, 30.0)),
                || reproduce_dumbbell(3, 2.0 * PI, 4.0 * PI, cfg(0.8, 1.8, 21, 30.0)),
            )
        },
        || {
            rayon::join(
                || reproduce_dumbbell(1, 2.0 * PI, PI, cfg(2.0, 4.0, 21, 30.0)),
                || {
                    rayon::join(
                        || reproduce_tadpole(1, 2.0, cfg(3.0, 6.0, 16, 20.0)),
                        || reproduce_tadpole(3, 2.0, cfg(3.0, 6.0, 16, 20.0)),
                    )
                },
            )
        },
    );
    let (periodic_long, periodic_short) = rayon::join(
        || reproduce_periodic(3, 4.0 * PI, PI / 4.0, cfg(4.0, 8.0, 21, 30.0)),
        || reproduce_periodic(3, PI / 8.0, PI / 4.0, cfg(8.0, 14.0, 21, 30.0)),
    );
    Ok(Studies {
        short: short?,
        long: long?,
        single: single?,
        tadpole1: tadpole1?,
        tadpole3: tadpole3?,
        periodic_long: periodic_long?,
        periodic_short: periodic_short?,
    })
}

fn winners(s: &CaseStudy) -> Vec<Winner> {
    s.pairs[0].large_mass.iter().map(|c| c.winner).collect()
}

fn c8_dumbbell_switch(s: &Studies) -> Outcome {
    let (short, long) = (winners(&s.short), winners(&s.long));
    let pass = short.len() == 3
        && long.len() == 3
        && short.iter().all(|w| *w == Winner::First)
        && long.iter().all(|w| *w == Winner::Second);
    Ok((
        pass,
        format!("short internal edges {short:?} (loop first), long {long:?}"),
    ))
}

fn c9_tadpole(s: &Studies) -> Outcome {
    let above = |c: &CaseStudy| {
        c.branches[0]
            .branch
            .points
            .iter()
            .filter(|p| p.mass > 2.0 * p.mu)
            .count()
    };
    let n1 = s.tadpole1.branches[0].branch.points.len();
    let n3 = s.tadpole3.branches[0].branch.points.len();
    let fit = &s.tadpole1.fits[0];
    let verdict = |c: &CaseStudy| c.existence.as_ref().map(|e| e.verdict);
    let pass = n1 == 16
        && n3 == 16
        && above(&s.tadpole1) == n1
        && above(&s.tadpole3) == 0
        && (fit.fitted / (-16.0 / 3.0) - 1.0).abs() < 0.15
        && verdict(&s.tadpole1) == Some(Existence::Exists)
        && verdict(&s.tadpole3) == Some(Existence::NotAmongEdgeStates);
    Ok((
        pass,
        format!(
            "one half-line: {}/{n1} above 2 mu, coefficient {:.3}; three: {}/{n3} above; verdicts {:?} / {:?}",
            above(&s.tadpole1),
            fit.fitted,
            above(&s.tadpole3),
            verdict(&s.tadpole1),
            verdict(&s.tadpole3)
        ),
    ))
}

fn c10_identity(s: &Studies) -> Outcome {
    let branches: Vec<&Branch> = s
        .all()
        .iter()
        .flat_map(|c| c.branches.iter().map(|b| &b.branch))
        .collect();
    let worst = branches
        .iter()
        .flat_map(|b| b.differential_identity())
        .map(|(_, r)| r)
        .fold(0.0f64, f64::max);
    let complete = branches.iter().all(|b| b.points.len() >= 3);
    Ok((
        complete && worst < 1e-2,
        format!(
            "{} branches, max relative error {worst:.1e}",
            branches.len()
        ),
    ))
}

fn c11_localization() -> Outcome {
    let g = star_with_pendant();
    let cfg = cfg(3.0, 6.0, 7, 30.0);
    let d = cfg.discretize(&g)?;
    let b = edge_branch(&d, "pend", &cfg)?;
    let on_edge = b
        .points
        .iter()
        .all(|p| p.loc_edge.as_deref() == Some("pend"));
    let mus: Vec<f64> = b.points.iter().map(|p| p.mu).collect();
    let logs: Vec<f64> = b.points.iter().map(|p| (1.0 - p.loc_ratio).ln()).collect();
    let s = slope(&mus, &logs);
    let pass = on_edge && b.points.len() == 7 && (s / -3.0 - 1.0).abs() < 0.2;
    Ok((pass, format!("slope {s:.4} against -2l = -3")))
}

fn c12_lemma(s: &Studies) -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    let mut masses = 0;
    for study in s.all() {
        for p in &study.pairs {
            if p.lemma.within_hypotheses() {
                checked += 1;
                masses += p.lemma.masses_checked;
                violations += p.lemma.violations.len();
            }
        }
    }
    let synthetic = |q: [f64; 3]| Branch {
        points: [-4.0, -2.0, -1.0]
            .iter()
            .zip(q)
            .map(|(&lambda, mass)| qgnls::solver::BranchPoint {
                lambda,
                mu: (-lambda).sqrt(),
                mass,
                energy: -mass,
                residual: 0.0,
                loc_edge: None,
                loc_ratio: 0.0,
                det_sign: 1.0,
                values: Vec::new(),
            })
            .collect(),
        turning_points: Vec::new(),
        bifurcation_suspects: Vec::new(),
        steps: Vec::new(),
        termination: qgnls::solver::Termination::Completed,
    };
    let crossing =
        verify_comparison_lemma(&synthetic([4.0, 2.0, 1.0]), &synthetic([3.0, 2.5, 1.5]))?;
    let flagged =
        matches!(crossing.hypothesis, Hypothesis::Crossing { .. }) && !crossing.within_hypotheses();
    let pass = checked >= 4 && violations == 0 && masses > 0 && flagged;
    Ok((
        pass,
        format!("{checked} pairs within hypotheses, {masses} masses, {violations} violations; synthetic crossing flagged: {flagged}"),
    ))
}

fn report(id: &str, name: &str, start: Instant, outcome: Outcome) -> bool {
    let secs = start.elapsed().as_secs_f64();
    let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    println!(
        "{id:<4} {:<4} {name}: {detail} [{secs:.1}s]",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn main() -> ExitCode {
    let mut pass = true;
    let t = Instant::now();
    pass &= report("C1", "linear DtN on one edge", t, c1_linear_dtn());
    let t = Instant::now();
    pass &= report("C2", "DtN direct vs scattering", t, c2_route_equivalence());
    let t = Instant::now();
    pass &= report("C3", "DtN decay to degrees", t, c3_dtn_decay());
    let t = Instant::now();
    pass &= report("C4", "elliptic functions", t, c4_elliptic());
    let t = Instant::now();
    pass &= report("C5", "single-bump window", t, c5_single_bump());
    let t = Instant::now();
    pass &= report("C6", "matching refinement", t, c6_matching());
    let t = Instant::now();
    pass &= report("C7", "soliton on the line", t, c7_soliton());
    let t = Instant::now();
    match studies() {
        Ok(s) => {
            let elapsed = t.elapsed().as_secs_f64();
            println!("     case studies computed in {elapsed:.1}s");
            let t = Instant::now();
            pass &= report("C8", "dumbbell energy switch", t, c8_dumbbell_switch(&s));
            pass &= report("C9", "tadpole mass correction", t, c9_tadpole(&s));
            pass &= report("C10", "dE/dLambda = Lambda dQ/dLambda", t, c10_identity(&s));
            let t = Instant::now();
            pass &= report("C11", "pendant localization rate", t, c11_localization());
            let t = Instant::now();
            pass &= report("C12", "comparison lemma harness", t, c12_lemma(&s));
        }
        Err(e) => {
            for id in ["C8", "C9", "C10", "C12"] {
                println!("{id:<4} FAIL case studies: error: {e}");
            }
            report(
                "C11",
                "pendant localization rate",
                Instant::now(),
                c11_localization(),
            );
            pass = false;
        }
    }
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
