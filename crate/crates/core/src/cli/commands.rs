use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::output::{
    artifact_path, deliver, format_number, render, Artifact, Cell, Emit, RunManifest, Table,
};
use super::{
    sweep, BoundsArgs, Cli, Command, CompareArgs, DofArgs, ExponentSweepArgs, OracleArgs,
    OracleMode, SimulateArgs, SimulationOptions, SpectrumArgs,
};
use crate::comparison::comparison_table;
use crate::error::{Error, Result};
use crate::geometry::{
    greedy_pack, oracle_cover_interval, oracle_pack_interval, per_unit_time_report,
    rogers_range_valid, BoundReport, Ellipsoid,
};
use crate::params::SignalSpaceParams;
use crate::simulation::{
    empirical_exponent_sweep, run_theorem2_experiment, CodebookSize, ExperimentConfig,
};
use crate::spectrum::{dof_asymptotic, DofQuery, EigenSpectrum, SpectrumRecord};

struct Outcome {
    artifact: Artifact,
    seed: Option<u64>,
    default_emit: Emit,
}

fn params_json<T: Serialize>(args: &T, cli: &Cli, emit: Emit) -> Value {
    let mut v = serde_json::to_value(args).expect("arguments serialise");
    if let Value::Object(m) = &mut v {
        m.insert("emit".into(), json!(emit));
        m.insert("precision".into(), json!(cli.precision));
    }
    v
}

pub(super) fn run(cli: &Cli) -> Result<()> {
    let (name, args, outcome) = match &cli.command {
        Command::Spectrum(a) => ("spectrum", to_value(a), spectrum(a)?),
        Command::Dof(a) => ("dof", to_value(a), dof(a)?),
        Command::Bounds(a) => ("bounds", to_value(a), bounds(a)?),
        Command::Oracle(a) => ("oracle", to_value(a), oracle(a)?),
        Command::Simulate(a) => ("simulate", to_value(a), simulate(a)?),
        Command::ExponentSweep(a) => (
            "exponent-sweep",
            to_value(a),
            exponent_sweep(a, cli.precision as usize)?,
        ),
        Command::Compare(a) => ("compare", to_value(a), compare(a)?),
        Command::Sweep(a) => return sweep::run(a, cli),
    };
    let emit = cli.emit.unwrap_or(outcome.default_emit);
    let path = artifact_path(cli.output.as_deref(), cli.out_dir.as_deref(), name, emit);
    let mut outputs: Vec<String> = path.iter().map(|p| p.display().to_string()).collect();
    outputs.extend(
        outcome
            .artifact
            .extra_outputs
            .iter()
            .map(|p| p.display().to_string()),
    );
    let manifest = RunManifest::new(name, params_json(&args, cli, emit), outcome.seed, outputs);
    let text = render(&outcome.artifact, &manifest, emit, cli.precision as usize)?;
    deliver(&text, path.as_deref())
}

fn to_value<T: Serialize>(a: &T) -> Value {
    serde_json::to_value(a).expect("arguments serialise")
}

/// Load a spectrum file and check it was computed for this band.
pub(super) fn load_spectrum(path: &Path, omega: f64, t_obs: f64) -> Result<SpectrumRecord> {
    let rec = SpectrumRecord::load(path)?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    if !close(rec.omega, omega) || !close(rec.t_obs, t_obs) {
        return Err(Error::config(format!(
            "spectrum {} was computed for omega={}, t_obs={}, not omega={omega}, t_obs={t_obs}",
            path.display(),
            rec.omega,
            rec.t_obs
        )));
    }
    Ok(rec)
}

fn spectrum(a: &SpectrumArgs) -> Result<Outcome> {
    let spec = EigenSpectrum::compute(a.band.omega_rad(), a.band.t_obs, a.order)?;
    let mut extra = Vec::new();
    if let Some(p) = &a.eigvecs {
        spec.write_eigvecs(p, a.eigvec_count)?;
        extra.push(p.clone());
    }
    let rec = spec.record();
    let mut table = Table::new(&["n", "lambda"]);
    for (i, l) in rec.lambdas.iter().enumerate() {
        table.rows.push(vec![Cell::from(i + 1), Cell::from(*l)]);
    }
    let json = json!({
        "spectrum": rec,
        "n0": spec.n0(),
        "clipped": spec.clipped,
        "strictly_decreasing": spec.is_strictly_decreasing(),
        "phase_transition": {
            "log_base": 2,
            "index_base": 1,
            "residual_k0": spec.phase_transition_residual(0.0).ok(),
        },
    });
    Ok(Outcome {
        artifact: Artifact {
            json,
            table: Some(table),
            extra_outputs: extra,
        },
        seed: None,
        default_emit: Emit::Json,
    })
}

fn dof(a: &DofArgs) -> Result<Outcome> {
    let spec = EigenSpectrum::compute(a.band.omega_rad(), a.band.t_obs, a.order)?;
    let n_dof = spec.degrees_of_freedom(DofQuery {
        energy: a.energy,
        mu: a.mu,
    })?;
    let asymptotic = dof_asymptotic(spec.n0(), a.energy, a.mu).ok();
    let mut table = Table::new(&["n_dof", "n0", "asymptotic"]);
    table
        .rows
        .push(vec![n_dof.into(), spec.n0().into(), asymptotic.into()]);
    Ok(Outcome {
        artifact: Artifact {
            json: json!({ "n_dof": n_dof, "n0": spec.n0(), "asymptotic": asymptotic }),
            table: Some(table),
            extra_outputs: Vec::new(),
        },
        seed: None,
        default_emit: Emit::Json,
    })
}

pub(super) const BOUND_COLUMNS: [&str; 30] = [
    "omega",
    "t_obs",
    "energy",
    "eps",
    "delta",
    "snr_k",
    "n0",
    "n",
    "zeta",
    "c2eps_lower_bits",
    "c2eps_upper_bits",
    "c2eps_lower_bps",
    "c2eps_upper_bps",
    "cepsdelta_lower_bits",
    "cepsdelta_upper_bits",
    "cepsdelta_lower_bps",
    "cepsdelta_upper_bps",
    "heps_lower_bits",
    "heps_upper_bits",
    "heps_lower_bps",
    "heps_upper_bps",
    "heps_rogers_valid",
    "exponent_zero_rate_bps",
    "c2eps_gap_bps",
    "cepsdelta_gap_bps",
    "strict_gap_bps",
    "c2eps_ordered",
    "cepsdelta_ordered",
    "heps_ordered",
    "notes",
];

/// One row of bound columns; `reports` in the order of `per_unit_time_report`.
pub(super) fn bound_cells(p: &SignalSpaceParams, reports: &[BoundReport]) -> Vec<Cell> {
    let (c2, cd, h) = (&reports[0], &reports[1], &reports[2]);
    let mut row: Vec<Cell> = vec![
        p.omega.into(),
        p.t_obs.into(),
        p.energy.into(),
        p.eps.into(),
        p.delta.into(),
        p.snr_k().into(),
        p.n0().into(),
        c2.n.into(),
        c2.zeta.into(),
    ];
    for r in [c2, cd, h] {
        row.extend([
            r.lower_bits.into(),
            r.upper_bits.into(),
            r.lower_rate.into(),
            r.upper_rate.into(),
        ]);
    }
    let w = p.omega / std::f64::consts::PI;
    row.extend([
        rogers_range_valid(h.n, p.amplitude_ratio()).into(),
        (w * p.amplitude_ratio().log2()).into(),
        (c2.upper_rate - c2.lower_rate).into(),
        (cd.upper_rate - cd.lower_rate).into(),
        (cd.lower_rate - c2.upper_rate).into(),
        c2.is_ordered().into(),
        cd.is_ordered().into(),
        h.is_ordered().into(),
    ]);
    let mut notes: Vec<String> = Vec::new();
    for r in [c2, cd, h] {
        for n in &r.validity_notes {
            if !notes.contains(n) {
                notes.push(n.clone());
            }
        }
    }
    row.push(Cell::Text(notes.join("; ")));
    row
}

fn bounds(a: &BoundsArgs) -> Result<Outcome> {
    let p = SignalSpaceParams::new(a.band.omega_rad(), a.band.t_obs, a.energy, a.eps, a.delta)?;
    let rec = match &a.use_spectrum {
        Some(path) => Some(load_spectrum(path, p.omega, p.t_obs)?),
        None => None,
    };
    let reports = per_unit_time_report(&p, rec.as_ref().map(|r| r.lambdas.as_slice()))?;
    let mut table = Table::new(&BOUND_COLUMNS);
    table.rows.push(bound_cells(&p, &reports));
    let json = json!({
        "params": p,
        "snr_k": p.snr_k(),
        "n0": p.n0(),
        "reports": reports,
    });
    Ok(Outcome {
        artifact: Artifact {
            json,
            table: Some(table),
            extra_outputs: Vec::new(),
        },
        seed: None,
        default_emit: Emit::Json,
    })
}

fn oracle(a: &OracleArgs) -> Result<Outcome> {
    if a.dim == 0 {
        return Err(Error::config("--dim must be >= 1"));
    }
    let (count, method) = match (a.mode, a.dim) {
        (OracleMode::Pack, 1) => (oracle_pack_interval(a.radius, a.eps)?, "exact"),
        (OracleMode::Cover, 1) => (oracle_cover_interval(a.radius, a.eps)?, "exact"),
        (OracleMode::Pack, d) => {
            let ball = Ellipsoid::ball(d, a.radius)?;
            (
                greedy_pack(&ball, a.eps, a.seed, a.attempts)? as u64,
                "greedy",
            )
        }
        (OracleMode::Cover, _) => {
            return Err(Error::config(
                "covering counts are only available in dimension 1",
            ));
        }
    };
    let volume_bound = match a.mode {
        OracleMode::Pack => Some((a.radius / (2.0 * a.eps)).powi(a.dim as i32)),
        OracleMode::Cover => None,
    };
    let mut table = Table::new(&[
        "dim",
        "eps",
        "radius",
        "mode",
        "method",
        "count",
        "volume_lower_bound",
    ]);
    table.rows.push(vec![
        a.dim.into(),
        a.eps.into(),
        a.radius.into(),
        Cell::Text(format!("{:?}", a.mode).to_lowercase()),
        method.into(),
        count.into(),
        volume_bound.into(),
    ]);
    let json = json!({
        "dim": a.dim,
        "eps": a.eps,
        "radius": a.radius,
        "mode": a.mode,
        "method": method,
        "count": count,
        "volume_lower_bound": volume_bound,
    });
    Ok(Outcome {
        artifact: Artifact {
            json,
            table: Some(table),
            extra_outputs: Vec::new(),
        },
        seed: (method == "greedy").then_some(a.seed),
        default_emit: Emit::Json,
    })
}

fn experiment_config(params: SignalSpaceParams, sim: &SimulationOptions) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(params);
    c.samples = sim.samples;
    c.seed = sim.seed;
    c.dim_override = sim.dim;
    c.geometry = sim.geometry;
    c.max_codewords = sim.max_codewords;
    c.strategy = sim.strategy;
    c.quad_order = sim.order;
    c
}

fn simulate(a: &SimulateArgs) -> Result<Outcome> {
    let p = SignalSpaceParams::new(a.band.omega_rad(), a.band.t_obs, a.energy, a.eps, a.delta)?;
    let mut cfg = experiment_config(p, &a.sim);
    cfg.retries = a.retries;
    cfg.size = match (a.rate, a.messages) {
        (Some(r), _) => CodebookSize::Rate(r),
        (None, Some(m)) => CodebookSize::Messages(m),
        (None, None) => CodebookSize::FromBound,
    };
    let rec = match &a.use_spectrum {
        Some(path) => Some(load_spectrum(path, p.omega, p.t_obs)?),
        None => None,
    };
    let out = run_theorem2_experiment(&cfg, rec.as_ref())?;
    let mut table = Table::new(&[
        "dim",
        "zeta",
        "messages",
        "capped",
        "attempts",
        "rate_too_low",
        "delta_hat",
        "ci_lo",
        "ci_hi",
        "target_delta",
        "verdict",
    ]);
    let r = out.result.as_ref();
    table.rows.push(vec![
        out.dim.into(),
        out.zeta.into(),
        out.messages.into(),
        out.capped.into(),
        out.attempts.into(),
        out.rate_too_low.into(),
        r.map(|r| r.delta_hat).into(),
        r.map(|r| r.ci_lo).into(),
        r.map(|r| r.ci_hi).into(),
        p.delta.into(),
        r.and_then(|r| r.verdict).map_or(Cell::Empty, Cell::Bool),
    ]);
    if let Some(n) = &out.notice {
        table.notes.push(n.clone());
    }
    let json = json!({ "config": cfg, "outcome": out });
    Ok(Outcome {
        artifact: Artifact {
            json,
            table: Some(table),
            extra_outputs: Vec::new(),
        },
        seed: Some(a.sim.seed),
        default_emit: Emit::Json,
    })
}

fn exponent_sweep(a: &ExponentSweepArgs, digits: usize) -> Result<Outcome> {
    let t0 = a.t_list.first().copied().unwrap_or(1.0);
    let p = SignalSpaceParams::new(super::to_rad(a.omega, a.hz), t0, a.energy, a.eps, a.delta)?;
    let cfg = experiment_config(p, &a.sim);
    let sweep = empirical_exponent_sweep(&cfg, a.rate, &a.t_list)?;
    let mut table = Table::new(&["T", "M", "delta_hat", "ci_lo", "ci_hi", "fitted_slope"]);
    for r in &sweep.rows {
        table.rows.push(vec![
            r.t_obs.into(),
            r.messages.into(),
            r.delta_hat.into(),
            r.ci_lo.into(),
            r.ci_hi.into(),
            sweep.fitted_slope.into(),
        ]);
    }
    table.notes.push(format!(
        "predicted exponent {} bits/s",
        format_number(sweep.exponent, digits)
    ));
    let json = serde_json::to_value(&sweep).expect("sweep serialises");
    Ok(Outcome {
        artifact: Artifact {
            json,
            table: Some(table),
            extra_outputs: Vec::new(),
        },
        seed: Some(a.sim.seed),
        default_emit: Emit::Csv,
    })
}

fn compare(a: &CompareArgs) -> Result<Outcome> {
    let t = comparison_table(super::to_rad(a.omega, a.hz), a.snr, a.n0)?;
    let mut table = Table::new(&[
        "quantity",
        "stochastic",
        "stochastic_bps",
        "deterministic",
        "deterministic_lower_bps",
        "deterministic_upper_bps",
    ]);
    for r in &t.rows {
        table.rows.push(vec![
            r.label.as_str().into(),
            r.stochastic_label.as_str().into(),
            r.stochastic_value.into(),
            r.deterministic_label.as_str().into(),
            r.deterministic_lower.into(),
            r.deterministic_upper.into(),
        ]);
    }
    if let Some(j) = &t.jagerman {
        table.rows.push(vec![
            "Lattice capacity lower (Jagerman)".into(),
            Cell::Empty,
            Cell::Empty,
            "C_2eps".into(),
            j.capacity_lower_rate.into(),
            Cell::Empty,
        ]);
        table.rows.push(vec![
            "Lattice entropy upper (Jagerman)".into(),
            Cell::Empty,
            Cell::Empty,
            "H_eps".into(),
            Cell::Empty,
            j.entropy_upper_rate.into(),
        ]);
    }
    table.notes.push(t.snr_pairing.clone());
    let json = serde_json::to_value(&t).expect("table serialises");
    Ok(Outcome {
        artifact: Artifact {
            json,
            table: Some(table),
            extra_outputs: Vec::new(),
        },
        seed: None,
        default_emit: Emit::Table,
    })
}
