use std::io::Write;
use std::path::Path;

use serde_json::json;

use glassydicke::acceptance;
use glassydicke::mc::{
    disorder_average, geometric_ladder, realization_seeds, run_parallel_tempering, MCConfig,
};
use glassydicke::model::{build_effective, sample_disorder, DisorderRealization, ModelParams};
use glassydicke::oracle::{enumerate_classical, mapping_residual, quantum_closed_form};
use glassydicke::phase::{self, classify, Axis, GridSpec};
use glassydicke::rs::{solve_rs, RSParams, SolveOptions};
use glassydicke::{mc, Error};

use crate::config::{key, ConfigError, Key, Resolved};
use crate::output::json_string;
use crate::CliError;

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
    /// Keys holding reals (or comma lists of reals), rewritten canonically
    /// before the echo.
    pub reals: &'static [&'static str],
    pub lists: &'static [&'static str],
    pub run: fn(&Resolved, &mut dyn Write) -> Result<(), CliError>,
}

const SOLVER_KEYS: [Key; 4] = [
    key("tol", "1e-10", "fixed-point tolerance on the update distance"),
    key("max-iter", "100000", "iteration cap per branch"),
    key("damping", "0.5", "damping factor η in (0, 1]"),
    key("order", "20", "Gauss-Legendre points per quadrature panel"),
];

macro_rules! keys {
    ($($k:expr),* $(,)?; solver) => {
        &[$($k,)* SOLVER_KEYS[0], SOLVER_KEYS[1], SOLVER_KEYS[2], SOLVER_KEYS[3]]
    };
    ($($k:expr),* $(,)?) => { &[$($k),*] };
}

pub const COMMANDS: &[Command] = &[
    Command {
        name: "oracle",
        about: "Exact partition functions by enumeration, with the photon-elimination residual",
        keys: keys![
            key("n", "8", "number of qubits (at most 24)"),
            key("lambda", "0.7", "qubit-cavity coupling λ"),
            key("j0", "0.2", "mean coupling J0"),
            key("j", "1", "coupling spread J"),
            key("beta", "2", "inverse temperature"),
            key("seed", "42", "disorder seed"),
            key("couplings", "", "read couplings from this file instead of sampling"),
        ],
        reals: &["lambda", "j0", "j", "beta"],
        lists: &[],
        run: oracle,
    },
    Command {
        name: "rs",
        about: "Solve the replica-symmetric saddle point at one parameter point",
        keys: keys![
            key("t", "0.5", "temperature"),
            key("jtilde0", "1", "shifted mean coupling J0 + 2λ²"),
            key("j", "0", "coupling spread J"),
            key("lambda", "1", "qubit-cavity coupling λ (sets θ = λ²m²)"),
            key("classify-tol", "1e-6", "threshold on |m| and q for the phase label");
            solver
        ],
        reals: &["t", "jtilde0", "j", "lambda", "classify-tol", "tol", "damping"],
        lists: &[],
        run: rs,
    },
    Command {
        name: "scan-matter",
        about: "Matter phase diagram over (J̃₀/J, T/J) as CSV",
        keys: keys![
            key("jt-min", "0", "smallest J̃₀/J"),
            key("jt-max", "2", "largest J̃₀/J"),
            key("jt-steps", "41", "number of J̃₀/J nodes"),
            key("t-min", "0.05", "smallest T/J"),
            key("t-max", "2", "largest T/J"),
            key("t-steps", "40", "number of T/J nodes"),
            key("j", "1", "coupling spread J (sets units)"),
            key("lambda", "0", "coupling λ used only to report θ = λ²m²"),
            key("classify-tol", "1e-6", "threshold on |m| and q for the phase label"),
            key("warm-start", "true", "seed each node from the one above it"),
            ;
            solver
        ],
        reals: &["jt-min", "jt-max", "t-min", "t-max", "j", "lambda", "classify-tol", "tol", "damping"],
        lists: &[],
        run: scan_matter,
    },
    Command {
        name: "scan-optical",
        about: "Optical phase diagram over (λ, T) at fixed J0, J as CSV",
        keys: keys![
            key("lambda-min", "0", "smallest λ"),
            key("lambda-max", "2", "largest λ"),
            key("lambda-steps", "41", "number of λ nodes"),
            key("t-min", "0.05", "smallest T"),
            key("t-max", "2", "largest T"),
            key("t-steps", "40", "number of T nodes"),
            key("j0", "0", "bare mean coupling J0"),
            key("j", "1", "coupling spread J"),
            key("classify-tol", "1e-6", "threshold on |m| and q for the phase label"),
            key("warm-start", "true", "seed each node from the one above it"),
            ;
            solver
        ],
        reals: &["lambda-min", "lambda-max", "t-min", "t-max", "j0", "j", "classify-tol", "tol", "damping"],
        lists: &[],
        run: scan_optical,
    },
    Command {
        name: "mc",
        about: "Parallel-tempering Monte Carlo on one disorder realization as CSV",
        keys: MC_KEYS,
        reals: MC_REALS,
        lists: &["ladder"],
        run: monte_carlo,
    },
    Command {
        name: "avg",
        about: "Disorder-averaged parallel-tempering Monte Carlo as CSV",
        keys: AVG_KEYS,
        reals: MC_REALS,
        lists: &["ladder"],
        run: average,
    },
    Command {
        name: "validate",
        about: "Run the acceptance suite; exit status 3 if any criterion fails",
        keys: keys![
            key("quick", "false", "reduced-size suite"),
            key("criteria", "", "comma-separated subset of criteria (default all)"),
        ],
        reals: &[],
        lists: &[],
        run: validate,
    },
];

const MC_REALS: &[&str] = &["lambda", "j0", "j", "t-min", "t-max"];

macro_rules! mc_keys {
    ($($extra:expr),*) => {
        &[
            key("n", "64", "number of qubits"),
            key("lambda", "0.5", "qubit-cavity coupling λ"),
            key("j0", "0.3", "mean coupling J0"),
            key("j", "1", "coupling spread J"),
            key("seed", "1", "master seed for couplings and Markov chains"),
            key("sweeps", "20000", "sweeps per replica, burn-in included"),
            key("burn-in", "2000", "sweeps discarded before measuring"),
            key("t-min", "0.5", "lowest ladder temperature"),
            key("t-max", "3", "highest ladder temperature"),
            key("rungs", "8", "ladder size (geometric spacing)"),
            key("ladder", "", "explicit comma-separated temperatures, overriding t-min/t-max/rungs"),
            key("exchange-interval", "10", "sweeps between replica exchanges"),
            key("block-count", "32", "blocks for the error analysis"),
            key("summary", "", "also write a JSON summary to this path"),
            $($extra),*
        ]
    };
}

const MC_KEYS: &[Key] = mc_keys![key("couplings", "", "read couplings from this file instead of sampling")];
const AVG_KEYS: &[Key] = mc_keys![key("realizations", "8", "number of disorder realizations")];

fn solver(cfg: &Resolved) -> Result<SolveOptions, CliError> {
    Ok(SolveOptions {
        tol: cfg.real("tol")?,
        max_iter: cfg.get("max-iter")?,
        damping: cfg.real("damping")?,
        order: cfg.get("order")?,
    })
}

fn read_couplings(path: &str) -> Result<DisorderRealization, CliError> {
    let text = std::fs::read_to_string(Path::new(path))
        .map_err(|e| CliError::Usage(format!("cannot read `couplings` file {path}: {e}")))?;
    Ok(DisorderRealization::from_text(&text)?)
}

fn check_size(cfg: &Resolved, d: &DisorderRealization) -> Result<(), CliError> {
    let n: usize = cfg.get("n")?;
    if n != d.n() {
        return Err(CliError::Usage(format!(
            "`n` is {n} but the `couplings` file holds N={}",
            d.n()
        )));
    }
    Ok(())
}

fn write_json(out: &mut dyn Write, value: &serde_json::Value) -> Result<(), CliError> {
    out.write_all(json_string(value)?.as_bytes())?;
    Ok(())
}

fn oracle(cfg: &Resolved, out: &mut dyn Write) -> Result<(), CliError> {
    let (lambda, beta) = (cfg.real("lambda")?, cfg.real("beta")?);
    let disorder = match cfg.optional("couplings") {
        Some(path) => {
            let d = read_couplings(path)?;
            check_size(cfg, &d)?;
            d
        }
        None => sample_disorder(cfg.get("n")?, cfg.real("j0")?, cfg.real("j")?, cfg.get("seed")?)?,
    };
    let model = build_effective(&disorder, lambda)?;
    let classical = enumerate_classical(&model, beta)?;
    let quantum = quantum_closed_form(&disorder, lambda, beta)?;
    let residual = mapping_residual(&disorder, &model, lambda, beta)?;
    write_json(
        out,
        &json!({
            "config": cfg.to_json(),
            "N": disorder.n(),
            "beta": beta,
            "logZcl": classical.log_z,
            "logZq": quantum.log_z,
            "theta": quantum.theta,
            "bose_occupancy": quantum.bose_occupancy,
            "free_energy_per_spin": classical.free_energy_per_spin,
            "mean_abs_m": classical.mean_abs_m,
            "mean_s2": classical.mean_s2,
            "residual": residual,
        }),
    )
}

fn rs(cfg: &Resolved, out: &mut dyn Write) -> Result<(), CliError> {
    let params = RSParams::new(cfg.real("t")?, cfg.real("jtilde0")?, cfg.real("j")?, cfg.real("lambda")?)?;
    let sol = solve_rs(&params, &solver(cfg)?)?;
    let label = classify(&sol, cfg.real("classify-tol")?);
    write_json(
        out,
        &json!({
            "config": cfg.to_json(),
            "m": sol.m,
            "q": sol.q,
            "free_energy": sol.free_energy,
            "theta": sol.theta,
            "converged": sol.converged,
            "iterations": sol.iterations,
            "residual": sol.residual,
            "branch": sol.branch.as_str(),
            "label": label.as_str(),
            "optical": label.optical().map(|o| o.as_str()),
        }),
    )?;
    if !sol.converged {
        return Err(CliError::NotConverged(format!(
            "RS solve at T={} J̃₀={} J={} (residual {:e})",
            params.t, params.jtilde0, params.j, sol.residual
        )));
    }
    Ok(())
}

fn grid(cfg: &Resolved, axis1: (&str, &str, &str), axis2: (&str, &str, &str)) -> Result<(Axis, Axis), CliError> {
    let axis = |(min, max, steps): (&str, &str, &str), name| -> Result<Axis, CliError> {
        Axis::linspace(name, cfg.real(min)?, cfg.real(max)?, cfg.get(steps)?)
            .map_err(|e| CliError::Usage(format!("`{min}`/`{max}`/`{steps}`: {e}")))
    };
    Ok((axis(axis1, axis1.0)?, axis(axis2, axis2.0)?))
}

fn finish_scan(cfg: &Resolved, grid: &GridSpec, points: &[phase::PhasePoint], out: &mut dyn Write) -> Result<(), CliError> {
    out.write_all(cfg.echo_lines().as_bytes())?;
    phase::write_csv(&mut *out, points)?;
    let failed = points.iter().filter(|p| !p.converged).count();
    if failed > 0 {
        return Err(CliError::NotConverged(format!(
            "{failed} of {} grid nodes ({}×{}) did not converge",
            points.len(),
            grid.axis1.len(),
            grid.axis2.len()
        )));
    }
    Ok(())
}

fn scan_settings(cfg: &Resolved, grid: &mut GridSpec) -> Result<(), CliError> {
    grid.tol = cfg.real("classify-tol")?;
    grid.warm_start = cfg.get("warm-start")?;
    grid.solve = solver(cfg)?;
    Ok(())
}

fn scan_matter(cfg: &Resolved, out: &mut dyn Write) -> Result<(), CliError> {
    let (jt, t) = grid(cfg, ("jt-min", "jt-max", "jt-steps"), ("t-min", "t-max", "t-steps"))?;
    let mut g = GridSpec::matter(jt, t, cfg.real("j")?);
    g.lambda = cfg.real("lambda")?;
    scan_settings(cfg, &mut g)?;
    let points = phase::scan_matter(&g)?;
    finish_scan(cfg, &g, &points, out)
}

fn scan_optical(cfg: &Resolved, out: &mut dyn Write) -> Result<(), CliError> {
    let (lambda, t) = grid(cfg, ("lambda-min", "lambda-max", "lambda-steps"), ("t-min", "t-max", "t-steps"))?;
    let mut g = GridSpec::optical(lambda, t, cfg.real("j0")?, cfg.real("j")?);
    scan_settings(cfg, &mut g)?;
    let points = phase::scan_optical(&g)?;
    finish_scan(cfg, &g, &points, out)
}

fn mc_config(cfg: &Resolved, seed: u64) -> Result<MCConfig, CliError> {
    let ladder = match cfg.optional("ladder") {
        Some(_) => cfg.reals("ladder")?,
        None => geometric_ladder(cfg.real("t-min")?, cfg.real("t-max")?, cfg.get("rungs")?)?,
    };
    let config = MCConfig {
        sweeps: cfg.get("sweeps")?,
        burn_in: cfg.get("burn-in")?,
        ladder,
        exchange_interval: cfg.get("exchange-interval")?,
        seed,
        block_count: cfg.get("block-count")?,
    };
    config.validate()?;
    Ok(config)
}

fn write_summary(cfg: &Resolved, body: serde_json::Value) -> Result<(), CliError> {
    if let Some(path) = cfg.optional("summary") {
        let mut doc = json!({ "config": cfg.to_json() });
        doc.as_object_mut()
            .expect("object")
            .extend(body.as_object().expect("object").clone());
        std::fs::write(path, json_string(&doc)?)
            .map_err(|e| CliError::Usage(format!("cannot write `summary` file {path}: {e}")))?;
    }
    Ok(())
}

fn monte_carlo(cfg: &Resolved, out: &mut dyn Write) -> Result<(), CliError> {
    let seeds = realization_seeds(cfg.get("seed")?, 0);
    let disorder = match cfg.optional("couplings") {
        Some(path) => {
            let d = read_couplings(path)?;
            check_size(cfg, &d)?;
            d
        }
        None => sample_disorder(cfg.get("n")?, cfg.real("j0")?, cfg.real("j")?, seeds.disorder)?,
    };
    let model = build_effective(&disorder, cfg.real("lambda")?)?;
    let config = mc_config(cfg, seeds.mc)?;
    let est = run_parallel_tempering(&model, &config)?;
    out.write_all(cfg.echo_lines().as_bytes())?;
    mc::write_csv(&mut *out, &est.rungs)?;
    write_summary(
        cfg,
        json!({
            "seeds": { "disorder": disorder.seed, "mc": seeds.mc },
            "ladder": config.ladder,
            "estimates": est,
        }),
    )
}

fn average(cfg: &Resolved, out: &mut dyn Write) -> Result<(), CliError> {
    let config = mc_config(cfg, cfg.get("seed")?)?;
    let params = ModelParams::new(
        cfg.get("n")?,
        cfg.real("lambda")?,
        cfg.real("j0")?,
        cfg.real("j")?,
        config.ladder[0],
    )?;
    let avg = disorder_average(&params, cfg.get("realizations")?, &config)?;
    out.write_all(cfg.echo_lines().as_bytes())?;
    mc::write_csv(&mut *out, &avg.average.rungs)?;
    write_summary(
        cfg,
        json!({
            "seeds": avg.seeds,
            "ladder": config.ladder,
            "realized_j0": avg.realized_j0,
            "average": avg.average,
        }),
    )
}

fn validate(cfg: &Resolved, out: &mut dyn Write) -> Result<(), CliError> {
    let quick: bool = cfg.get("quick")?;
    let ids: Vec<u8> = match cfg.optional("criteria") {
        None => (1..=8).collect(),
        Some(list) => list
            .split(',')
            .map(|s| match s.trim().parse::<u8>() {
                Ok(id @ 1..=8) => Ok(id),
                _ => Err(ConfigError::Invalid {
                    key: "criteria".into(),
                    value: list.to_owned(),
                    reason: "expected criterion numbers 1 to 8".into(),
                }),
            })
            .collect::<Result<_, _>>()?,
    };
    let mut failed = Vec::new();
    for id in ids {
        let report = acceptance::run_one(id, quick).expect("criterion ids are checked");
        writeln!(out, "{report}")?;
        out.flush()?;
        if !report.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        writeln!(out, "all criteria passed")?;
        Ok(())
    } else {
        Err(CliError::Validation(format!("failed criteria: {failed:?}")))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}
