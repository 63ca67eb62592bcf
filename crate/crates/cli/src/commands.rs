//! The five subcommands. Each returns the exit status of its verdict.

use std::path::Path;

use orlicz_lab::fields::{dv_field_analytic, gradient, jacobian, v_field, AnyField};
use orlicz_lab::orlicz::{check_closeness, check_ratio, mollify, ClosenessReport};
use orlicz_lab::solver::solve as run_solver;
use orlicz_lab::verify::{
    caccioppoli_suite, gehring_probe, judge, pointwise_probe, source_density, BallPair, GehringLevel, LevelData,
    ProbeInput, VerifyError,
};
use orlicz_lab::{DirichletProblem, Grid2D, MatrixField, Profile, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ConfigError, ExperimentConfig, FieldSource, ProblemSpec, Psi};
use crate::output::{self, num};
use crate::{CliError, Status};

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

fn missing(what: &str) -> CliError {
    CliError::Config(ConfigError {
        line: None,
        msg: format!("this command needs a [{what}] section"),
    })
}

fn closeness_for(cfg: &ExperimentConfig, psi: &Psi) -> Result<Option<ClosenessReport>, CliError> {
    match psi.family() {
        Some(f) => Ok(Some(
            check_closeness(&cfg.phi, f, cfg.dimension, &cfg.theta_grid).map_err(compute)?,
        )),
        None => Ok(None),
    }
}

pub fn check(cfg: &ExperimentConfig, out: &Path) -> Result<Status, CliError> {
    if cfg.psi.is_empty() {
        return Err(missing("[psi]"));
    }
    let mut rows = Vec::new();
    let mut theta_rows = Vec::new();
    let mut status = Status::Ok;
    println!(
        "{:<36} {:<36} {:>12} {:>12} {:>10} {:>12}",
        "phi", "psi", "s_theta", "threshold", "satisfied", "s_rho"
    );
    for psi in &cfg.psi {
        let closeness = closeness_for(cfg, psi)?;
        let ratio = check_ratio(&cfg.phi, psi).map_err(compute)?;
        let (s_theta, threshold, satisfied) = match &closeness {
            Some(r) => (r.s_theta, r.threshold, r.satisfied),
            // ψ'' ≡ 0: θ is unbounded.
            None => (
                f64::INFINITY,
                orlicz_lab::orlicz::cordes_threshold(cfg.dimension),
                false,
            ),
        };
        if !satisfied {
            status = Status::HypothesisFailed;
        }
        let (phi_name, psi_name) = (cfg.phi.label(), psi.label());
        println!(
            "{phi_name:<36} {psi_name:<36} {:>12} {:>12} {:>10} {:>12}",
            format!("{s_theta:.6}"),
            format!("{threshold:.6}"),
            satisfied,
            format!("{:.6e}", ratio.s_rho)
        );
        rows.push(vec![
            phi_name.clone(),
            psi_name.clone(),
            cfg.dimension.to_string(),
            num(s_theta),
            num(threshold),
            satisfied.to_string(),
            num(ratio.s_rho),
            ratio.finite.to_string(),
        ]);
        if let Some(r) = closeness {
            for (t, th) in r.samples {
                theta_rows.push(vec![phi_name.clone(), psi_name.clone(), num(t), num(th)]);
            }
        }
    }
    output::write_csv(out, "check.csv", &output::CHECK_HEADER, &rows)?;
    output::write_csv(out, "theta_samples.csv", &output::THETA_HEADER, &theta_rows)?;
    Ok(status)
}

fn dirichlet(cfg: &ExperimentConfig, p: &ProblemSpec, grid: Grid2D) -> Result<DirichletProblem, CliError> {
    let (f, g) = (p.f.clone(), p.g.clone());
    DirichletProblem::from_fns(
        grid,
        cfg.phi.clone(),
        move |x, y| f.eval(x, y),
        move |x, y| g.eval(x, y),
        p.epsilon,
    )
    .map_err(compute)
}

pub fn solve(cfg: &ExperimentConfig, out: &Path) -> Result<Status, CliError> {
    let p = cfg.problem.as_ref().ok_or_else(|| missing("problem"))?;
    let prob = dirichlet(cfg, p, p.grid())?;
    let res = run_solver(&prob, &cfg.solver).map_err(compute)?;
    output::write_olf1(out, "solution.olf1", &AnyField::Scalar(res.u.clone()))?;
    let rows: Vec<Vec<String>> = (0..res.residual_history.len())
        .map(|k| {
            vec![
                k.to_string(),
                num(res.energy_history[k]),
                num(res.residual_history[k]),
                num(res.step_history[k]),
            ]
        })
        .collect();
    output::write_csv(out, &cfg.diagnostics, &output::DIAGNOSTICS_HEADER, &rows)?;
    println!(
        "converged: {}  newton iterations: {} (per stage {:?})  final residual: {:e}",
        res.converged,
        res.iterations,
        res.stage_iterations,
        res.final_residual()
    );
    Ok(if res.converged {
        Status::Ok
    } else {
        Status::NotConverged
    })
}

/// Ball pairs placed uniformly at random so that they fit the coarsest grid.
fn random_balls(grid: &Grid2D, count: usize, seed: u64) -> Vec<BallPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x0, y0) = grid.origin();
    let (w, hgt) = (grid.h() * (grid.nx() - 1) as f64, grid.h() * (grid.ny() - 1) as f64);
    let r_max = 0.2 * w.min(hgt);
    let mut balls = Vec::with_capacity(count);
    while balls.len() < count {
        let r = rng.random_range(0.25 * r_max..r_max);
        let c = (x0 + rng.random_range(0.0..w), y0 + rng.random_range(0.0..hgt));
        if let Ok(b) = BallPair::new(c, r) {
            if b.check(grid).is_ok() {
                balls.push(b);
            }
        }
    }
    balls
}

fn dv_of(u: &ScalarField, psi: &Psi, epsilon: f64) -> Result<MatrixField, CliError> {
    if epsilon > 0.0 {
        dv_field_analytic(psi, u, epsilon).map_err(compute)
    } else {
        Ok(jacobian(&v_field(psi, u, epsilon).map_err(compute)?))
    }
}

pub fn verify(cfg: &ExperimentConfig, out: &Path, seed: u64) -> Result<Status, CliError> {
    let spec = cfg.verify.as_ref().ok_or_else(|| missing("verify"))?;
    let p = cfg.problem.as_ref().ok_or_else(|| missing("problem"))?;
    let coarse = p.grid_with(spec.levels[0], spec.levels[0]);
    let mut balls = spec.balls.clone();
    balls.extend(random_balls(&coarse, spec.random_balls, seed));

    let mut levels = Vec::with_capacity(spec.levels.len());
    for &n in &spec.levels {
        let grid = p.grid_with(n, n);
        let f = ScalarField::from_fn(grid, |x, y| p.f.eval(x, y)).map_err(compute)?;
        let u = match &spec.source {
            FieldSource::Fixture(fx) => fx.sample(grid),
            FieldSource::Solve => {
                let res = run_solver(&dirichlet(cfg, p, grid)?, &cfg.solver).map_err(compute)?;
                if !res.converged {
                    eprintln!(
                        "solve on {n}x{n} did not converge (residual {:e})",
                        res.final_residual()
                    );
                    return Ok(Status::NotConverged);
                }
                res.u
            }
        };
        levels.push(LevelData { u, f });
    }
    let has_source = levels.iter().any(|l| l.f.values().iter().any(|&v| v != 0.0));

    let mut rows = Vec::new();
    let mut gehring_rows = Vec::new();
    let mut status = Status::Ok;
    for psi in &cfg.psi {
        let table = caccioppoli_suite(&cfg.phi, psi, &levels, &balls, spec.epsilon).map_err(compute)?;
        let closeness_ok = closeness_for(cfg, psi)?.is_some_and(|r| r.satisfied);
        let ratio_ok = !has_source || check_ratio(&cfg.phi, psi).map_err(compute)?.finite;
        let verdict = judge(spec.expectation, &table, closeness_ok && ratio_ok);
        if !verdict.pass {
            status = Status::VerificationFailed;
        }
        let (phi_name, psi_name) = (cfg.phi.label(), psi.label());
        println!(
            "{phi_name} / {psi_name}: {:?} {}{}",
            spec.expectation,
            if verdict.pass { "PASS" } else { "FAIL" },
            if verdict.detail.is_empty() {
                String::new()
            } else {
                format!(" ({})", verdict.detail)
            }
        );
        for level in &table {
            for (b, rep) in level.iter().enumerate() {
                rows.push(vec![
                    phi_name.clone(),
                    psi_name.clone(),
                    num(rep.h),
                    rep.ball.to_string(),
                    num(rep.lhs),
                    num(rep.rhs_osc),
                    num(rep.rhs_src),
                    num(rep.empirical_c),
                    if verdict.per_ball[b] { "PASS" } else { "FAIL" }.to_string(),
                ]);
            }
        }

        let k = levels.len();
        let gl = |l: &LevelData| -> Result<GehringLevel, CliError> {
            let src = source_density(&cfg.phi, psi, &gradient(&l.u), &l.f, spec.epsilon).map_err(compute)?;
            Ok(GehringLevel {
                dv: dv_of(&l.u, psi, spec.epsilon)?,
                src,
            })
        };
        let probe =
            gehring_probe(&gl(&levels[k - 2])?, &gl(&levels[k - 1])?, &balls, &spec.delta_grid).map_err(compute)?;
        println!(
            "  reverse-Hölder exponent delta_star = {} (integrable: {})",
            probe.delta_star, probe.integrable
        );
        for r in &probe.rows {
            gehring_rows.push(vec![
                phi_name.clone(),
                psi_name.clone(),
                balls[r.ball_index].to_string(),
                num(r.delta),
                num(r.coarse_ratio),
                num(r.fine_ratio),
                num(probe.delta_star),
                probe.integrable.to_string(),
            ]);
        }
    }
    output::write_csv(out, "caccioppoli.csv", &output::CACCIOPPOLI_HEADER, &rows)?;
    output::write_csv(out, "gehring.csv", &output::GEHRING_HEADER, &gehring_rows)?;
    Ok(status)
}

pub fn probe(cfg: &ExperimentConfig, out: &Path) -> Result<Status, CliError> {
    let spec = cfg.probe.as_ref().ok_or_else(|| missing("probe"))?;
    let mut rows = Vec::new();
    let mut status = Status::Ok;
    let mut dumped = 0usize;
    for psi in cfg.psi.iter().filter_map(Psi::family) {
        for &eps in &spec.epsilons {
            for kappa in spec.kappa_ladder(eps) {
                let input = ProbeInput {
                    fixture: spec.fixture,
                    phi_k: mollify(&cfg.phi, kappa, spec.quadrature_order).map_err(compute)?,
                    psi_k: mollify(psi, kappa, spec.quadrature_order).map_err(compute)?,
                    epsilon: eps,
                    z: spec.z,
                    grid: spec.grid,
                    dimension: spec.dimension,
                };
                let mut row = vec![cfg.phi.label(), psi.label(), spec.fixture.name(), num(eps), num(kappa)];
                match pointwise_probe(&input) {
                    Ok(pr) => {
                        let positive = pr.is_positive();
                        if !positive {
                            status = status.worst(Status::VerificationFailed);
                        }
                        row.extend([
                            num(pr.s_gamma),
                            num(pr.fitted_c),
                            num(pr.fitted_big_c),
                            positive.to_string(),
                        ]);
                        if spec.dump_fields {
                            for (tag, field) in [("lhs", &pr.lhs_density), ("div", &pr.div_term), ("src", &pr.src_term)]
                            {
                                output::write_olf1(
                                    out,
                                    &format!("probe_{dumped:03}_{tag}.olf1"),
                                    &AnyField::Scalar(field.clone()),
                                )?;
                            }
                            dumped += 1;
                        }
                    }
                    Err(VerifyError::ClosenessViolated { s_gamma, .. }) => {
                        status = status.worst(Status::HypothesisFailed);
                        row.extend([num(s_gamma), String::new(), String::new(), "false".into()]);
                    }
                    Err(e) => return Err(compute(e)),
                }
                println!("{}", row.join("  "));
                rows.push(row);
            }
        }
    }
    output::write_csv(out, "probe.csv", &output::PROBE_HEADER, &rows)?;
    Ok(status)
}

pub fn plotdata(cfg: &ExperimentConfig, out: &Path) -> Result<Status, CliError> {
    if cfg.plot_sources.is_empty() {
        return Err(missing("plotdata"));
    }
    let mut rows = Vec::new();
    for src in &cfg.plot_sources {
        let mut rd = csv::Reader::from_path(src).map_err(|e| {
            CliError::Config(ConfigError {
                line: None,
                msg: format!("cannot read plot source {}: {e}", src.display()),
            })
        })?;
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        let h: Vec<&str> = header.iter().map(String::as_str).collect();
        for rec in rd.records() {
            let r = rec?;
            let f = |i: usize| r.get(i).unwrap_or_default().to_string();
            let row = if h == output::CACCIOPPOLI_HEADER {
                let hh: f64 = f(2).parse().map_err(compute)?;
                vec![num(1.0 / hh), f(4), format!("lhs|{}|{}|{}", f(0), f(1), f(3))]
            } else if h == output::DIAGNOSTICS_HEADER {
                vec![f(0), f(2), "residual".into()]
            } else if h == output::THETA_HEADER {
                vec![f(2), f(3), format!("theta|{}|{}", f(0), f(1))]
            } else if h == output::GEHRING_HEADER {
                vec![f(3), f(5), format!("gehring|{}|{}|{}", f(0), f(1), f(2))]
            } else if h == output::PROBE_HEADER {
                vec![f(4), f(6), format!("fitted_c|{}|{}|{}|eps={}", f(0), f(1), f(2), f(3))]
            } else {
                return Err(CliError::Config(ConfigError {
                    line: None,
                    msg: format!("{}: unrecognized table header {header:?}", src.display()),
                }));
            };
            rows.push(row);
        }
    }
    output::write_csv(out, "plot.csv", &output::PLOT_HEADER, &rows)?;
    Ok(Status::Ok)
}
