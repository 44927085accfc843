use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use super::neighbors::neighbor_lists;
use super::Codebook;
use crate::error::{Error, Result};
use crate::sampling::fill_uniform_ball;
use crate::seed;

pub const MIN_SAMPLES: u64 = 100;
const Z95: f64 = 1.959_963_984_540_054;
const CAP_MAX_TOTAL: f64 = 0.5;
const CAP_MIN_HEIGHT: f64 = 0.05;

/// How the error fraction of one codeword is sampled.
///
/// Both strategies draw the error count from the same binomial law.
/// `CapProposal` only spends samples on the caps of the noise ball that
/// other codewords can claim; it falls back to `Direct` when the cap
/// fractions sum past 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    Auto,
    Direct,
    CapProposal,
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// Fraction of a `dim`-ball lying beyond the hyperplane at normalised height
/// `x` in `[0, 1]` from the centre.
pub fn cap_fraction(dim: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.5;
    }
    if x >= 1.0 {
        return 0.0;
    }
    0.5 * beta_reg((dim as f64 + 1.0) / 2.0, 0.5, 1.0 - x * x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodewordEstimate {
    pub errors: u64,
    pub delta: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub dim: usize,
    pub codewords: usize,
    pub eps: f64,
    pub seed: u64,
    pub samples_per_codeword: u64,
    pub strategy: Strategy,
    /// Unordered codeword pairs closer than `2 eps`.
    pub neighbor_pairs: u64,
    pub total_errors: u64,
    pub delta_hat: f64,
    /// Wilson interval over all `M * samples` draws.
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub target_delta: Option<f64>,
    pub verdict: Option<bool>,
    pub delta_i: Vec<CodewordEstimate>,
}

impl SimulationResult {
    pub fn with_target(mut self, delta: f64) -> Self {
        self.target_delta = Some(delta);
        self.verdict = Some(self.ci_hi <= delta);
        self
    }
}

struct Competitor {
    /// `a_j - a_i`
    diff: Vec<f64>,
    /// `|a_j - a_i|^2 / 2`
    half_norm2: f64,
    unit: Vec<f64>,
    /// Cap height over `eps`.
    height: f64,
    fraction: f64,
}

impl Competitor {
    fn claims(&self, u: &[f64]) -> bool {
        dot(u, &self.diff) >= self.half_norm2
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn competitors(own: &[f64], others: &[&[f64]], eps: f64) -> Option<Vec<Competitor>> {
    let dim = own.len();
    let mut out = Vec::with_capacity(others.len());
    for other in others {
        let diff: Vec<f64> = other.iter().zip(own).map(|(b, a)| b - a).collect();
        let norm2 = dot(&diff, &diff);
        if norm2 == 0.0 {
            return None;
        }
        let norm = norm2.sqrt();
        let height = norm / (2.0 * eps);
        out.push(Competitor {
            unit: diff.iter().map(|v| v / norm).collect(),
            diff,
            half_norm2: 0.5 * norm2,
            height,
            fraction: cap_fraction(dim, height),
        });
    }
    Some(out)
}

fn count_direct(
    dim: usize,
    eps: f64,
    comps: &[Competitor],
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> u64 {
    let mut u = vec![0.0; dim];
    let mut errors = 0;
    for _ in 0..samples {
        fill_uniform_ball(&mut u, eps, rng);
        if comps.iter().any(|c| c.claims(&u)) {
            errors += 1;
        }
    }
    errors
}

/// Uniform point in `{v : |v| <= 1, v.e >= x}`, scaled by `eps`.
fn sample_in_cap(out: &mut [f64], unit: &[f64], x: f64, eps: f64, rng: &mut ChaCha8Rng) {
    let dim = out.len();
    let m = (dim as f64 - 1.0) / 2.0;
    let big_s = 1.0 - x * x;
    let s = loop {
        let u: f64 = rng.random();
        let s = big_s * u.powf(1.0 / (m + 1.0));
        let accept: f64 = rng.random();
        if accept * (1.0 - s).sqrt() <= x {
            break s;
        }
    };
    let t = (1.0 - s).sqrt();
    if dim == 1 {
        out[0] = eps * t * unit[0];
        return;
    }
    let norm = loop {
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let along = dot(out, unit);
        for (v, e) in out.iter_mut().zip(unit) {
            *v -= along * e;
        }
        let n = dot(out, out).sqrt();
        if n > 0.0 {
            break n;
        }
    };
    let w: f64 = rng.random();
    let r = s.sqrt() * w.powf(1.0 / (dim as f64 - 1.0));
    for (v, e) in out.iter_mut().zip(unit) {
        *v = eps * (t * e + r * *v / norm);
    }
}

fn count_caps(
    dim: usize,
    eps: f64,
    comps: &[Competitor],
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> u64 {
    let total: f64 = comps.iter().map(|c| c.fraction).sum();
    if total <= 0.0 {
        return 0;
    }
    let proposals = Binomial::new(samples, total.min(1.0))
        .expect("probability in [0, 1]")
        .sample(rng);
    let mut cumulative = Vec::with_capacity(comps.len());
    let mut acc = 0.0;
    for c in comps {
        acc += c.fraction;
        cumulative.push(acc);
    }
    let mut v = vec![0.0; dim];
    let mut errors = 0;
    for _ in 0..proposals {
        let pick: f64 = rng.random::<f64>() * total;
        let j = cumulative
            .partition_point(|&c| c <= pick)
            .min(comps.len() - 1);
        let own = &comps[j];
        sample_in_cap(&mut v, &own.unit, own.height, eps, rng);
        let covered = comps.iter().filter(|c| c.claims(&v)).count().max(1);
        if covered == 1 || rng.random::<f64>() * (covered as f64) < 1.0 {
            errors += 1;
        }
    }
    errors
}

/// Error count for one codeword against its competitors within `2 eps`.
pub(crate) fn codeword_errors(
    own: &[f64],
    others: &[&[f64]],
    eps: f64,
    samples: u64,
    strategy: Strategy,
    rng: &mut ChaCha8Rng,
) -> u64 {
    if others.is_empty() {
        return 0;
    }
    let Some(comps) = competitors(own, others, eps) else {
        return samples;
    };
    let dim = own.len();
    let total: f64 = comps.iter().map(|c| c.fraction).sum();
    let use_caps = match strategy {
        Strategy::Direct => false,
        Strategy::CapProposal => total <= 1.0,
        Strategy::Auto => {
            let min_height = comps.iter().map(|c| c.height).fold(f64::INFINITY, f64::min);
            total <= CAP_MAX_TOTAL && min_height >= CAP_MIN_HEIGHT
        }
    };
    if use_caps {
        count_caps(dim, eps, &comps, samples, rng)
    } else {
        count_direct(dim, eps, &comps, samples, rng)
    }
}

/// Canonical order for a neighbour list: by distance, then coordinates.
fn canonical_order(own: &[f64], list: &mut [&[f64]]) {
    let d2 = |p: &[f64]| -> f64 { p.iter().zip(own).map(|(a, b)| (a - b) * (a - b)).sum() };
    list.sort_by(|a, b| {
        d2(a).total_cmp(&d2(b)).then_with(|| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
}

pub fn estimate_delta(
    codebook: &Codebook,
    eps: f64,
    samples: u64,
    seed_value: u64,
) -> Result<SimulationResult> {
    estimate_delta_with(codebook, eps, samples, seed_value, Strategy::Auto)
}

/// Monte Carlo estimate of every codeword's error fraction.
///
/// Each codeword draws from a stream keyed by its coordinates and the seed,
/// so results do not depend on codeword order or thread scheduling.
pub fn estimate_delta_with(
    codebook: &Codebook,
    eps: f64,
    samples: u64,
    seed_value: u64,
    strategy: Strategy,
) -> Result<SimulationResult> {
    if samples < MIN_SAMPLES {
        return Err(Error::config(format!(
            "samples per codeword must be >= {MIN_SAMPLES}, got {samples}"
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("eps must be > 0, got {eps}")));
    }
    let dim = codebook.dim();
    let m = codebook.len();
    let lists = neighbor_lists(codebook.flat(), dim, 2.0 * eps);
    let neighbor_pairs = lists.iter().map(|l| l.len() as u64).sum::<u64>() / 2;
    let errors: Vec<u64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let own = codebook.point(i);
            let mut others: Vec<&[f64]> = lists[i]
                .iter()
                .map(|&j| codebook.point(j as usize))
                .collect();
            canonical_order(own, &mut others);
            let mut rng = seed::rng(seed::derive_from_point(seed_value, own), &[]);
            codeword_errors(own, &others, eps, samples, strategy, &mut rng)
        })
        .collect();

    let delta_i: Vec<CodewordEstimate> = errors
        .iter()
        .map(|&e| {
            let (ci_lo, ci_hi) = wilson_interval(e, samples);
            CodewordEstimate {
                errors: e,
                delta: e as f64 / samples as f64,
                ci_lo,
                ci_hi,
            }
        })
        .collect();
    let total_errors: u64 = errors.iter().sum();
    let trials = samples * m as u64;
    let (ci_lo, ci_hi) = wilson_interval(total_errors, trials);
    Ok(SimulationResult {
        dim,
        codewords: m,
        eps,
        seed: seed_value,
        samples_per_codeword: samples,
        strategy,
        neighbor_pairs,
        total_errors,
        delta_hat: total_errors as f64 / trials as f64,
        ci_lo,
        ci_hi,
        target_delta: None,
        verdict: None,
        delta_i,
    })
}
