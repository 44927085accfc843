use serde::{Deserialize, Serialize};

use super::estimate::{estimate_delta_with, SimulationResult, Strategy, MIN_SAMPLES};
use super::{error_exponent, generate_codebook};
use crate::error::{Error, Result};
use crate::geometry::{bound_report, rates, BoundReport, Quantity};
use crate::params::{floor_snapped, SignalSpaceParams};
use crate::seed;
use crate::spectrum::{degrees_of_freedom, zeta, DofQuery, EigenSpectrum, SpectrumRecord};

pub const DEFAULT_MAX_CODEWORDS: u64 = 1 << 18;
pub const DEFAULT_RETRIES: usize = 3;

/// Number of messages in the experiment's codebook.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookSize {
    /// `floor(delta (zeta sqrt(E) / eps)^N)`.
    FromBound,
    /// `floor(2^(T R))` for a rate in bits/s.
    Rate(f64),
    Messages(u64),
}

/// Region the codewords are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CodebookGeometry {
    /// Ellipsoid with semi-axes `sqrt(lambda_n E)`.
    Spectrum,
    /// Ball of radius `sqrt(E)`, i.e. all eigenvalues taken as 1.
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: SignalSpaceParams,
    pub dim_override: Option<usize>,
    pub geometry: CodebookGeometry,
    pub size: CodebookSize,
    pub samples: u64,
    pub seed: u64,
    pub max_codewords: u64,
    pub retries: usize,
    pub strategy: Strategy,
    pub quad_order: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(params: SignalSpaceParams) -> Self {
        ExperimentConfig {
            params,
            dim_override: None,
            geometry: CodebookGeometry::Spectrum,
            size: CodebookSize::FromBound,
            samples: 10_000,
            seed: 0,
            max_codewords: DEFAULT_MAX_CODEWORDS,
            retries: DEFAULT_RETRIES,
            strategy: Strategy::Auto,
            quad_order: None,
        }
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.samples < MIN_SAMPLES {
            return Err(Error::config(format!(
                "samples per codeword must be >= {MIN_SAMPLES}, got {}",
                self.samples
            )));
        }
        if self.max_codewords == 0 || self.max_codewords > u32::MAX as u64 {
            return Err(Error::config("max_codewords must lie in 1..=2^32-1"));
        }
        if self.retries == 0 {
            return Err(Error::config("retries must be >= 1"));
        }
        if self.dim_override == Some(0) {
            return Err(Error::config("dimension override must be >= 1"));
        }
        match self.size {
            CodebookSize::Rate(r) if !(r >= 0.0 && r.is_finite()) => Err(Error::config(format!(
                "rate must be finite and >= 0, got {r}"
            ))),
            CodebookSize::Messages(0) => Err(Error::config("message count must be >= 1")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub dim: usize,
    pub zeta: f64,
    pub geometry: CodebookGeometry,
    /// `log2` of the message count before flooring and capping.
    pub log2_messages_requested: f64,
    pub messages: u64,
    pub capped: bool,
    pub attempts: usize,
    pub attempt_delta_hats: Vec<f64>,
    pub rate_too_low: bool,
    pub notice: Option<String>,
    pub report: BoundReport,
    pub result: Option<SimulationResult>,
}

fn spectrum_for(
    config: &ExperimentConfig,
    given: Option<&SpectrumRecord>,
) -> Result<SpectrumRecord> {
    match given {
        Some(s) => Ok(s.clone()),
        None => Ok(EigenSpectrum::compute(
            config.params.omega,
            config.params.t_obs,
            config.quad_order,
        )?
        .record()),
    }
}

/// Random-coding experiment: draw a codebook, estimate its error measure and
/// compare with `delta`, retrying with fresh codebooks up to `retries` times.
///
/// `N` is `dim_override` or the degrees of freedom at `mu = eps`.
pub fn run_theorem2_experiment(
    config: &ExperimentConfig,
    spectrum: Option<&SpectrumRecord>,
) -> Result<ExperimentOutcome> {
    config.validate()?;
    let p = &config.params;
    let need_spectrum =
        config.dim_override.is_none() || config.geometry == CodebookGeometry::Spectrum;
    let spec = if need_spectrum {
        Some(spectrum_for(config, spectrum)?)
    } else {
        None
    };
    let dim = match (config.dim_override, &spec) {
        (Some(n), _) => n,
        (None, Some(s)) => degrees_of_freedom(
            &s.lambdas,
            DofQuery {
                energy: p.energy,
                mu: p.eps,
            },
            s.resolution(),
        )?,
        (None, None) => unreachable!("spectrum is computed when no dimension is given"),
    };
    if dim == 0 {
        return Err(Error::config(
            "dimension is 0 (eps^2 >= E); nothing to simulate",
        ));
    }
    let (radii, z) = match (config.geometry, &spec) {
        (CodebookGeometry::Ball, _) => (vec![p.energy.sqrt(); dim], 1.0),
        (CodebookGeometry::Spectrum, Some(s)) => {
            if s.lambdas.len() < dim {
                return Err(Error::InsufficientSpectrum(format!(
                    "dimension {dim} exceeds the {} available eigenvalues",
                    s.lambdas.len()
                )));
            }
            let radii = s.lambdas[..dim]
                .iter()
                .map(|l| (l * p.energy).sqrt())
                .collect();
            (radii, zeta(&s.lambdas, dim)?)
        }
        (CodebookGeometry::Spectrum, None) => {
            unreachable!("spectrum geometry always loads a spectrum")
        }
    };

    let log2_m = match config.size {
        CodebookSize::FromBound => p.delta.log2() + dim as f64 * (z * p.amplitude_ratio()).log2(),
        CodebookSize::Rate(r) => p.t_obs * r,
        CodebookSize::Messages(m) => (m as f64).log2(),
    };
    let report = bound_report(Quantity::CapacityEpsDelta, p, dim, z)?;
    let cap = config.max_codewords;
    let (messages, capped) = if log2_m >= (cap as f64).log2() + 1e-12 {
        (cap, true)
    } else if let CodebookSize::Messages(m) = config.size {
        (m.min(cap), m > cap)
    } else {
        let m = floor_snapped(log2_m.exp2()).max(0) as u64;
        (m.min(cap), m > cap)
    };
    if messages == 0 {
        return Ok(ExperimentOutcome {
            dim,
            zeta: z,
            geometry: config.geometry,
            log2_messages_requested: log2_m,
            messages: 0,
            capped: false,
            attempts: 0,
            attempt_delta_hats: Vec::new(),
            rate_too_low: true,
            notice: Some(
                "rate too low: message count floors to 0 (vacuously distinguishable)".into(),
            ),
            report,
            result: None,
        });
    }

    let mut attempt_delta_hats = Vec::new();
    let mut last = None;
    for attempt in 0..config.retries as u64 {
        let book = generate_codebook(
            &radii,
            messages as usize,
            seed::derive(config.seed, &[attempt, 0]),
        )?;
        let result = estimate_delta_with(
            &book,
            p.eps,
            config.samples,
            seed::derive(config.seed, &[attempt, 1]),
            config.strategy,
        )?
        .with_target(p.delta);
        log::info!(
            "attempt {}: M={messages} N={dim} delta_hat={:.6e} upper={:.6e}",
            attempt + 1,
            result.delta_hat,
            result.ci_hi
        );
        attempt_delta_hats.push(result.delta_hat);
        let pass = result.verdict == Some(true);
        last = Some(result);
        if pass {
            break;
        }
    }
    Ok(ExperimentOutcome {
        dim,
        zeta: z,
        geometry: config.geometry,
        log2_messages_requested: log2_m,
        messages,
        capped,
        attempts: attempt_delta_hats.len(),
        attempt_delta_hats,
        rate_too_low: false,
        notice: capped.then(|| format!("message count capped at {cap}")),
        report,
        result: last,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t_obs: f64,
    pub dim: usize,
    pub messages: u64,
    pub capped: bool,
    pub delta_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentSweep {
    pub rate: f64,
    /// Predicted decay exponent in bits per second of observation.
    pub exponent: f64,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log2(delta_hat)` against `T`.
    pub fitted_slope: Option<f64>,
}

/// Least-squares slope over points with positive `y`, on `log2(y)`.
pub fn fitted_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, y)| *y > 0.0)
        .map(|&(x, y)| (x, y.log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Runs one experiment per observation time at a fixed rate below the
/// capacity lower bound, with codebook size `2^(T R)` and a single attempt.
pub fn empirical_exponent_sweep(
    base: &ExperimentConfig,
    rate: f64,
    t_values: &[f64],
) -> Result<ExponentSweep> {
    let p = &base.params;
    let (limit, _) = rates(Quantity::CapacityEpsDelta, p.omega, p.snr_k());
    if !(rate >= 0.0 && rate < limit) {
        return Err(Error::domain(format!(
            "rate {rate} must lie in [0, {limit}) bits/s"
        )));
    }
    if t_values.is_empty() || t_values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain(
            "observation times must be non-empty and strictly ascending",
        ));
    }
    let mut rows = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let mut cfg = base.clone();
        cfg.params = p.with_t_obs(t)?;
        cfg.size = CodebookSize::Rate(rate);
        cfg.retries = 1;
        cfg.seed = seed::derive(base.seed, &[t.to_bits()]);
        let out = run_theorem2_experiment(&cfg, None)?;
        let r = out
            .result
            .as_ref()
            .expect("rate >= 0 gives at least one message");
        rows.push(SweepRow {
            t_obs: t,
            dim: out.dim,
            messages: out.messages,
            capped: out.capped,
            delta_hat: r.delta_hat,
            ci_lo: r.ci_lo,
            ci_hi: r.ci_hi,
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.t_obs, r.delta_hat)).collect();
    Ok(ExponentSweep {
        rate,
        exponent: error_exponent(p.omega, p.energy, p.eps, rate)?,
        fitted_slope: fitted_slope(&pts),
        rows,
    })
}
