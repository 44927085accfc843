//! Stochastic-model reference formulas and the side-by-side comparison table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rates, Quantity};

/// How the stochastic SNR is paired with `SNR_K = E / eps^2` for display.
pub const SNR_PAIRING: &str = "SNR_S := SNR_K (display convention; noise models differ)";

fn dims_per_second(omega: f64) -> f64 {
    omega / std::f64::consts::PI
}

/// Shannon capacity `(Omega/pi) log2 sqrt(1 + SNR)` in bits/s.
pub fn shannon_capacity(omega: f64, snr_s: f64) -> Result<f64> {
    if !(snr_s >= 0.0) {
        return Err(Error::domain(format!("SNR must be >= 0, got {snr_s}")));
    }
    Ok(dims_per_second(omega) * 0.5 * (1.0 + snr_s).log2())
}

/// Gaussian rate-distortion `(Omega/pi) log2 sqrt(SNR)`, clamped at 0.
pub fn shannon_rate_distortion(omega: f64, snr_s: f64) -> Result<f64> {
    if !(snr_s > 0.0) {
        return Err(Error::domain(format!("SNR must be > 0, got {snr_s}")));
    }
    Ok((dims_per_second(omega) * 0.5 * snr_s.log2()).max(0.0))
}

/// Lattice-based lower bound on the `2 eps`-capacity, in bits.
pub fn jagerman_capacity_lower(n0: f64, snr_k: f64) -> Result<f64> {
    if !(n0 >= 1.0) {
        return Err(Error::domain(format!("N0 must be >= 1, got {n0}")));
    }
    if !(snr_k >= 0.0) {
        return Err(Error::domain(format!("SNR must be >= 0, got {snr_k}")));
    }
    Ok(n0 * ((2.0 / 10f64.sqrt()) * (snr_k / n0).sqrt() + 1.0).log2())
}

/// Per-unit-time version of [`jagerman_capacity_lower`], in bits/s.
pub fn jagerman_capacity_lower_rate(omega: f64, n0: f64, snr_k: f64) -> Result<f64> {
    Ok(jagerman_capacity_lower(n0, snr_k)? / n0 * dims_per_second(omega))
}

/// Upper bound on the `eps`-entropy rate, in bits/s.
pub fn jagerman_entropy_upper(omega: f64, snr_k: f64) -> Result<f64> {
    if !(snr_k > 0.0) {
        return Err(Error::domain(format!("SNR must be > 0, got {snr_k}")));
    }
    Ok(dims_per_second(omega) * (2.0 * snr_k.sqrt() + 1.0).log2())
}

/// Smallest integer `N0 >= 1` from which `N0 (log2 sqrt(SNR) - 1)` exceeds
/// the lattice lower bound. `None` when `SNR <= 4`.
pub fn packing_crossover_n0(snr_k: f64) -> Option<u64> {
    if !(snr_k > 4.0) {
        return None;
    }
    let beats = |n0: u64| {
        let n = n0 as f64;
        let ours = n * (0.5 * snr_k.log2() - 1.0);
        jagerman_capacity_lower(n, snr_k).is_ok_and(|j| ours > j)
    };
    let mut hi = 1u64;
    while !beats(hi) {
        hi = hi.checked_mul(2)?;
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Some(1);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if beats(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub stochastic_label: String,
    pub stochastic_value: f64,
    pub deterministic_label: String,
    pub deterministic_lower: f64,
    pub deterministic_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub omega: f64,
    pub snr: f64,
    pub snr_pairing: String,
    pub rows: Vec<ComparisonRow>,
    /// Lattice bounds at the requested `N0`, when one was given.
    pub jagerman: Option<JagermanRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JagermanRow {
    pub n0: f64,
    pub capacity_lower_bits: f64,
    pub capacity_lower_rate: f64,
    pub packing_lower_bits: f64,
    pub entropy_upper_rate: f64,
    pub crossover_n0: Option<u64>,
}

pub fn comparison_table(omega: f64, snr: f64, n0: Option<f64>) -> Result<ComparisonTable> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::config(format!("omega must be > 0, got {omega}")));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::config(format!("SNR must be > 0, got {snr}")));
    }
    let (c2_lo, c2_hi) = rates(Quantity::Capacity2Eps, omega, snr);
    let (cd_lo, cd_hi) = rates(Quantity::CapacityEpsDelta, omega, snr);
    let (h_lo, h_hi) = rates(Quantity::EntropyEps, omega, snr);
    let rows = vec![
        ComparisonRow {
            label: "Capacity".into(),
            stochastic_label: "C".into(),
            stochastic_value: shannon_capacity(omega, snr)?,
            deterministic_label: "C_eps^delta".into(),
            deterministic_lower: cd_lo,
            deterministic_upper: cd_hi,
        },
        ComparisonRow {
            label: "Zero-error capacity".into(),
            stochastic_label: "C".into(),
            stochastic_value: shannon_capacity(omega, snr)?,
            deterministic_label: "C_2eps".into(),
            deterministic_lower: c2_lo,
            deterministic_upper: c2_hi,
        },
        ComparisonRow {
            label: "Rate distortion".into(),
            stochastic_label: "R_sigma".into(),
            stochastic_value: shannon_rate_distortion(omega, snr)?,
            deterministic_label: "H_eps".into(),
            deterministic_lower: h_lo,
            deterministic_upper: h_hi,
        },
    ];
    let jagerman = match n0 {
        Some(n0) => Some(JagermanRow {
            n0,
            capacity_lower_bits: jagerman_capacity_lower(n0, snr)?,
            capacity_lower_rate: jagerman_capacity_lower_rate(omega, n0, snr)?,
            packing_lower_bits: (n0 * (0.5 * snr.log2() - 1.0)).max(0.0),
            entropy_upper_rate: jagerman_entropy_upper(omega, snr)?,
            crossover_n0: packing_crossover_n0(snr),
        }),
        None => None,
    };
    Ok(ComparisonTable {
        omega,
        snr,
        snr_pairing: SNR_PAIRING.into(),
        rows,
        jagerman,
    })
}
