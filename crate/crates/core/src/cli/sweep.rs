//! Grid sweeps driven by a flat `key = value` file.
//!
//! Keys `omega`, `t_obs`, `energy`, `snr`, `eps` and `delta` may repeat;
//! each repetition adds a value to that grid axis. `snr` sets
//! `energy = snr * eps^2` and excludes `energy`. Every other key is a
//! single-valued option. `#` starts a comment.
//!
//! ```text
//! omega = 3.14159265
//! t_obs = 20
//! snr = 16
//! snr = 100
//! eps = 1
//! delta = 0.01
//! delta = 0.1
//! simulate = false
//! ```

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Seek, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::commands::{bound_cells, BOUND_COLUMNS};
use super::output::{csv_record, manifest_line, Cell, RunManifest};
use super::{to_rad, Cli, SweepArgs};
use crate::error::{Error, Result};
use crate::geometry::per_unit_time_report;
use crate::params::SignalSpaceParams;
use crate::seed;
use crate::simulation::{
    run_theorem2_experiment, CodebookGeometry, CodebookSize, ExperimentConfig, Strategy,
    DEFAULT_MAX_CODEWORDS, DEFAULT_RETRIES,
};
use crate::spectrum::{EigenSpectrum, SpectrumRecord};

const SIM_COLUMNS: [&str; 9] = [
    "sim_dim",
    "sim_zeta",
    "sim_messages",
    "sim_capped",
    "sim_attempts",
    "sim_delta_hat",
    "sim_ci_lo",
    "sim_ci_hi",
    "sim_verdict",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub omega: Vec<f64>,
    pub hz: bool,
    pub t_obs: Vec<f64>,
    pub energy: Vec<f64>,
    pub snr: Vec<f64>,
    pub eps: Vec<f64>,
    pub delta: Vec<f64>,
    /// Take zeta from a computed spectrum instead of 1.
    pub spectrum: bool,
    pub order: Option<usize>,
    pub simulate: bool,
    pub samples: u64,
    pub seed: u64,
    pub messages: Option<u64>,
    pub rate: Option<f64>,
    pub dim: Option<usize>,
    pub geometry: CodebookGeometry,
    pub max_codewords: u64,
    pub retries: usize,
    pub strategy: Strategy,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            omega: Vec::new(),
            hz: false,
            t_obs: Vec::new(),
            energy: Vec::new(),
            snr: Vec::new(),
            eps: Vec::new(),
            delta: Vec::new(),
            spectrum: false,
            order: None,
            simulate: false,
            samples: 10_000,
            seed: 0,
            messages: None,
            rate: None,
            dim: None,
            geometry: CodebookGeometry::Spectrum,
            max_codewords: DEFAULT_MAX_CODEWORDS,
            retries: DEFAULT_RETRIES,
            strategy: Strategy::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub omega: f64,
    pub t_obs: f64,
    pub energy: f64,
    pub eps: f64,
    pub delta: f64,
}

fn parse_value<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| format!("invalid value `{v}`: {e}"))
}

fn parse_enum<T: ValueEnum>(v: &str) -> std::result::Result<T, String> {
    T::from_str(v, true).map_err(|_| format!("invalid value `{v}`"))
}

impl SweepConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut c = SweepConfig::default();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| Error::config(format!("{origin}:{line_no}: {msg}"));
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(format!("expected `key = value`, got `{line}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(err(format!("missing value for `{key}`")));
            }
            let axis = matches!(key, "omega" | "t_obs" | "energy" | "snr" | "eps" | "delta");
            if let Some(prev) = seen.insert(key.to_string(), line_no) {
                if !axis {
                    return Err(err(format!("`{key}` already set on line {prev}")));
                }
            }
            let r: std::result::Result<(), String> = (|| {
                match key {
                    "omega" => c.omega.push(parse_value(value)?),
                    "t_obs" => c.t_obs.push(parse_value(value)?),
                    "energy" => c.energy.push(parse_value(value)?),
                    "snr" => c.snr.push(parse_value(value)?),
                    "eps" => c.eps.push(parse_value(value)?),
                    "delta" => c.delta.push(parse_value(value)?),
                    "hz" => c.hz = parse_value(value)?,
                    "spectrum" => c.spectrum = parse_value(value)?,
                    "order" => c.order = Some(parse_value(value)?),
                    "simulate" => c.simulate = parse_value(value)?,
                    "samples" => c.samples = parse_value(value)?,
                    "seed" => c.seed = parse_value(value)?,
                    "messages" => c.messages = Some(parse_value(value)?),
                    "rate" => c.rate = Some(parse_value(value)?),
                    "dim" => c.dim = Some(parse_value(value)?),
                    "geometry" => c.geometry = parse_enum(value)?,
                    "max_codewords" => c.max_codewords = parse_value(value)?,
                    "retries" => c.retries = parse_value(value)?,
                    "strategy" => c.strategy = parse_enum(value)?,
                    _ => return Err(format!("unknown key `{key}`")),
                }
                Ok(())
            })();
            r.map_err(err)?;
        }
        let missing = |k: &str| Error::config(format!("{origin}: no value for `{k}`"));
        for (k, v) in [
            ("omega", &c.omega),
            ("t_obs", &c.t_obs),
            ("eps", &c.eps),
            ("delta", &c.delta),
        ] {
            if v.is_empty() {
                return Err(missing(k));
            }
        }
        match (c.energy.is_empty(), c.snr.is_empty()) {
            (true, true) => return Err(missing("energy` or `snr")),
            (false, false) => {
                let (e, s) = (seen["energy"], seen["snr"]);
                return Err(Error::config(format!(
                    "{origin}:{}: `energy` and `snr` are exclusive (other on line {})",
                    e.max(s),
                    e.min(s)
                )));
            }
            _ => {}
        }
        if c.messages.is_some() && c.rate.is_some() {
            return Err(Error::config(format!(
                "{origin}:{}: `messages` and `rate` are exclusive",
                seen["messages"].max(seen["rate"])
            )));
        }
        Ok(c)
    }

    /// Grid points with `delta` varying fastest, then `eps`, energy, `t_obs`, `omega`.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &omega in &self.omega {
            for &t_obs in &self.t_obs {
                let level: Vec<(f64, bool)> = if self.snr.is_empty() {
                    self.energy.iter().map(|&e| (e, false)).collect()
                } else {
                    self.snr.iter().map(|&s| (s, true)).collect()
                };
                for &(lv, is_snr) in &level {
                    for &eps in &self.eps {
                        for &delta in &self.delta {
                            out.push(GridPoint {
                                omega: to_rad(omega, self.hz),
                                t_obs,
                                energy: if is_snr { lv * eps * eps } else { lv },
                                eps,
                                delta,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = BOUND_COLUMNS.iter().map(|s| s.to_string()).collect();
        if self.simulate {
            h.extend(SIM_COLUMNS.iter().map(|s| s.to_string()));
        }
        h
    }
}

type SpectrumCache = HashMap<(u64, u64), SpectrumRecord>;

fn spectra(cfg: &SweepConfig, points: &[GridPoint]) -> Result<SpectrumCache> {
    let mut keys: Vec<(u64, u64)> = points
        .iter()
        .map(|p| (p.omega.to_bits(), p.t_obs.to_bits()))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.into_par_iter()
        .map(|k| {
            let s = EigenSpectrum::compute(f64::from_bits(k.0), f64::from_bits(k.1), cfg.order)?;
            Ok((k, s.record()))
        })
        .collect()
}

fn row(cfg: &SweepConfig, p: &GridPoint, cache: &SpectrumCache) -> Result<Vec<Cell>> {
    let params = SignalSpaceParams::new(p.omega, p.t_obs, p.energy, p.eps, p.delta)?;
    let rec = cache.get(&(p.omega.to_bits(), p.t_obs.to_bits()));
    let lambdas = if cfg.spectrum {
        rec.map(|r| r.lambdas.as_slice())
    } else {
        None
    };
    let reports = per_unit_time_report(&params, lambdas)?;
    let mut cells = bound_cells(&params, &reports);
    if cfg.simulate {
        let mut e = ExperimentConfig::new(params);
        e.samples = cfg.samples;
        e.seed = seed::derive_from_point(cfg.seed, &[p.omega, p.t_obs, p.energy, p.eps, p.delta]);
        e.dim_override = cfg.dim;
        e.geometry = cfg.geometry;
        e.max_codewords = cfg.max_codewords;
        e.retries = cfg.retries;
        e.strategy = cfg.strategy;
        e.quad_order = cfg.order;
        e.size = match (cfg.rate, cfg.messages) {
            (Some(r), _) => CodebookSize::Rate(r),
            (None, Some(m)) => CodebookSize::Messages(m),
            (None, None) => CodebookSize::FromBound,
        };
        let out = run_theorem2_experiment(&e, rec)?;
        let r = out.result.as_ref();
        cells.extend([
            out.dim.into(),
            out.zeta.into(),
            out.messages.into(),
            out.capped.into(),
            out.attempts.into(),
            r.map(|r| r.delta_hat).into(),
            r.map(|r| r.ci_lo).into(),
            r.map(|r| r.ci_hi).into(),
            r.and_then(|r| r.verdict).map_or(Cell::Empty, Cell::Bool),
        ]);
    }
    Ok(cells)
}

/// Number of complete data rows already in `path`, after dropping any
/// partial trailing line. `None` when the file does not belong to this run.
fn resume_state(path: &Path, manifest: &RunManifest, header: &str) -> Result<Option<usize>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    let mut complete_bytes = 0u64;
    let mut lines = 0usize;
    let mut first = None;
    let mut second = None;
    loop {
        line.clear();
        let n = reader
            .read_line(&mut line)
            .map_err(|e| Error::io(path, e))?;
        if n == 0 || !line.ends_with('\n') {
            break;
        }
        complete_bytes += n as u64;
        match lines {
            0 => first = Some(line.clone()),
            1 => second = Some(line.clone()),
            _ => {}
        }
        lines += 1;
    }
    let prior: Option<RunManifest> = first
        .as_deref()
        .and_then(|l| l.strip_prefix("# manifest: "))
        .and_then(|j| serde_json::from_str(j.trim_end()).ok());
    match (prior, second) {
        (Some(m), Some(h)) if m.same_run(manifest) && h == header => {
            let f = OpenOptions::new()
                .write(true)
                .open(path)
                .map_err(|e| Error::io(path, e))?;
            f.set_len(complete_bytes).map_err(|e| Error::io(path, e))?;
            Ok(Some(lines - 2))
        }
        _ => Ok(None),
    }
}

pub(super) fn run(args: &SweepArgs, cli: &Cli) -> Result<()> {
    if args.jobs == 0 {
        return Err(Error::config("--jobs must be >= 1"));
    }
    let origin = args.config.display().to_string();
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::io(&args.config, e))?;
    let cfg = SweepConfig::parse(&text, &origin)?;
    let points = cfg.points();
    let path: PathBuf = match (&cli.output, &cli.out_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(d)) => d.join("sweep.csv"),
        (None, None) => PathBuf::from("sweep.csv"),
    };
    let digits = cli.precision as usize;
    let params = json!({ "config": cfg, "precision": cli.precision });
    let seed = cfg.simulate.then_some(cfg.seed);
    let manifest = RunManifest::new("sweep", params, seed, vec![path.display().to_string()]);
    let header = csv_record(&cfg.header());

    let done = if !args.restart && path.exists() {
        match resume_state(&path, &manifest, &header)? {
            Some(n) => n,
            None => {
                return Err(Error::config(format!(
                    "{} exists and was written by a different sweep; pass --restart to overwrite",
                    path.display()
                )))
            }
        }
    } else {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(&path, manifest_line(&manifest) + &header)
            .map_err(|e| Error::io(&path, e))?;
        0
    };
    if done > points.len() {
        return Err(Error::config(format!(
            "{} holds {done} rows but the grid has {}",
            path.display(),
            points.len()
        )));
    }
    let mut file = OpenOptions::new()
        .append(true)
        .open(&path)
        .map_err(|e| Error::io(&path, e))?;
    file.seek(std::io::SeekFrom::End(0))
        .map_err(|e| Error::io(&path, e))?;
    if done > 0 {
        log::info!(
            "resuming {} after {done} of {} rows",
            path.display(),
            points.len()
        );
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let pending = &points[done..];
    let cache = if cfg.spectrum || (cfg.simulate && needs_spectrum(&cfg)) {
        pool.install(|| spectra(&cfg, pending))?
    } else {
        SpectrumCache::new()
    };
    for (b, batch) in pending.chunks(args.jobs).enumerate() {
        let rows: Vec<Result<Vec<Cell>>> =
            pool.install(|| batch.par_iter().map(|p| row(&cfg, p, &cache)).collect());
        for (k, r) in rows.into_iter().enumerate() {
            let cells = r.inspect_err(|_| {
                eprintln!(
                    "bandcap: grid point {} failed",
                    done + b * args.jobs + k + 1
                );
            })?;
            let line = csv_record(&cells.iter().map(|c| c.render(digits)).collect::<Vec<_>>());
            file.write_all(line.as_bytes())
                .map_err(|e| Error::io(&path, e))?;
        }
        file.flush().map_err(|e| Error::io(&path, e))?;
    }
    eprintln!(
        "bandcap: wrote {} rows to {} ({done} resumed)",
        points.len() - done,
        path.display()
    );
    Ok(())
}

fn needs_spectrum(cfg: &SweepConfig) -> bool {
    cfg.geometry == CodebookGeometry::Spectrum || cfg.dim.is_none()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_grid() {
        let c = SweepConfig::parse(
            "omega = 3.14\nt_obs = 20 # seconds\n\nsnr = 4\nsnr = 16\neps = 0.5\ndelta = 0.1\ndelta = 0.2\n",
            "t",
        )
        .unwrap();
        let pts = c.points();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].energy, 1.0);
        assert_eq!(pts[1].delta, 0.2);
        assert_eq!(pts[2].energy, 4.0);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let cases = [
            ("omega = 1\nt_obs 20\n", "t:2:"),
            ("omega = 1\nseed = 1\nseed = 2\n", "t:3:"),
            ("omega = x\n", "t:1:"),
            ("bogus = 1\n", "t:1:"),
            ("omega = 1\ngeometry = cube\n", "t:2:"),
        ];
        for (text, want) in cases {
            let e = SweepConfig::parse(text, "t").unwrap_err().to_string();
            assert!(e.contains(want), "{e}");
            assert!(matches!(
                SweepConfig::parse(text, "t"),
                Err(Error::Config(_))
            ));
        }
        let e = SweepConfig::parse("omega=1\nt_obs=1\neps=1\ndelta=0.1\n", "t").unwrap_err();
        assert!(e.to_string().contains("energy"));
    }
}
