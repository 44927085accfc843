use serde::{Deserialize, Serialize};

use super::{capacity_2eps_bounds, capacity_eps_delta_bounds, entropy_eps_bounds};
use crate::error::Result;
use crate::params::SignalSpaceParams;
use crate::spectrum::zeta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "C_2eps")]
    Capacity2Eps,
    #[serde(rename = "C_eps_delta")]
    CapacityEpsDelta,
    #[serde(rename = "H_eps")]
    EntropyEps,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Capacity2Eps => "C_2eps",
            Quantity::CapacityEpsDelta => "C_eps_delta",
            Quantity::EntropyEps => "H_eps",
        }
    }
}

/// Finite-`N` bounds in bits together with the per-unit-time limits in bits/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub quantity: Quantity,
    pub n: usize,
    pub zeta: f64,
    pub lower_bits: Option<f64>,
    pub upper_bits: Option<f64>,
    pub lower_rate: f64,
    pub upper_rate: f64,
    pub formula_tags: Vec<String>,
    pub validity_notes: Vec<String>,
}

impl BoundReport {
    pub fn is_ordered(&self) -> bool {
        let bits = match (self.lower_bits, self.upper_bits) {
            (Some(l), Some(u)) => l <= u,
            _ => true,
        };
        bits && self.lower_rate <= self.upper_rate
    }
}

/// Per-unit-time rates `(lower, upper)` in bits/s for each quantity.
pub fn rates(quantity: Quantity, omega: f64, snr_k: f64) -> (f64, f64) {
    let w = omega / std::f64::consts::PI;
    let half_log = 0.5 * snr_k.log2();
    let (lo, hi) = match quantity {
        Quantity::Capacity2Eps => (half_log - 1.0, (1.0 + (snr_k / 2.0).sqrt()).log2()),
        Quantity::CapacityEpsDelta => (half_log, (1.0 + snr_k.sqrt()).log2()),
        Quantity::EntropyEps => (half_log, half_log),
    };
    ((w * lo).max(0.0), (w * hi).max(0.0))
}

/// Report for one quantity at dimension `n` with the given `zeta`.
pub fn bound_report(
    quantity: Quantity,
    params: &SignalSpaceParams,
    n: usize,
    zeta: f64,
) -> Result<BoundReport> {
    params.validate()?;
    let (energy, eps, delta) = (params.energy, params.eps, params.delta);
    let (lower_rate, upper_rate) = rates(quantity, params.omega, params.snr_k());
    let mut notes = Vec::new();
    let (lower_bits, upper_bits, tags) = match quantity {
        Quantity::Capacity2Eps => {
            let b = capacity_2eps_bounds(n, zeta, energy, eps)?;
            (
                Some(b.lower_bits),
                Some(b.upper_bits),
                [
                    "volume-packing-lower",
                    "weighted-packing-upper",
                    "rate-2eps",
                ],
            )
        }
        Quantity::CapacityEpsDelta => {
            let tags = [
                "random-coding-lower",
                "shell-volume-upper",
                "rate-eps-delta",
            ];
            if delta > 0.0 && delta < 1.0 {
                let b = capacity_eps_delta_bounds(n, zeta, energy, eps, delta)?;
                notes.push("finite-N upper bound is asymptotic only".to_string());
                (Some(b.lower_bits), Some(b.upper_bits), tags)
            } else {
                notes.push(format!(
                    "delta = {delta} outside (0, 1); finite-N bounds undefined"
                ));
                (None, None, tags)
            }
        }
        Quantity::EntropyEps => {
            let h = entropy_eps_bounds(n, zeta, energy, eps)?;
            if h.upper_bits.is_none() {
                notes.push(format!("covering term undefined for N={n} <= 7"));
            }
            if !h.valid {
                notes.push(
                    "outside covering-bound range N >= 9, 1 < sqrt(E)/eps < N/ln N".to_string(),
                );
            }
            (
                Some(h.lower_bits),
                h.upper_bits,
                [
                    "volume-covering-lower",
                    "rogers-covering-upper",
                    "rate-entropy",
                ],
            )
        }
    };
    Ok(BoundReport {
        quantity,
        n,
        zeta,
        lower_bits,
        upper_bits,
        lower_rate,
        upper_rate,
        formula_tags: tags.iter().map(|s| s.to_string()).collect(),
        validity_notes: notes,
    })
}

/// Reports for `C_2eps`, `C_eps_delta` and `H_eps`.
///
/// Finite-dimension bounds use `N = ceil(N0)`; `zeta(N)` comes from
/// `lambdas` when they are long enough and defaults to 1 otherwise.
pub fn per_unit_time_report(
    params: &SignalSpaceParams,
    lambdas: Option<&[f64]>,
) -> Result<Vec<BoundReport>> {
    params.validate()?;
    let n = params.finite_dimension();
    let (z, note) = match lambdas {
        Some(l) if l.len() >= n => (zeta(l, n)?, None),
        Some(l) => (
            1.0,
            Some(format!(
                "spectrum has {} eigenvalues, fewer than N={n}; zeta set to 1",
                l.len()
            )),
        ),
        None => (1.0, Some("zeta = 1 (no spectrum supplied)".to_string())),
    };
    [
        Quantity::Capacity2Eps,
        Quantity::CapacityEpsDelta,
        Quantity::EntropyEps,
    ]
    .into_iter()
    .map(|q| {
        let mut r = bound_report(q, params, n, z)?;
        if let Some(note) = &note {
            r.validity_notes.insert(0, note.clone());
        }
        Ok(r)
    })
    .collect()
}
