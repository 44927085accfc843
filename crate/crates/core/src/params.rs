use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Snap tolerance when rounding dimension counts such as `N0`.
pub const INTEGER_SNAP: f64 = 1e-9;

/// Physical parameters of the signal space.
///
/// `omega` is in rad/s, `t_obs` in seconds, `energy` and `eps` share the
/// signal's L2 units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSpaceParams {
    pub omega: f64,
    pub t_obs: f64,
    pub energy: f64,
    pub eps: f64,
    pub delta: f64,
}

impl SignalSpaceParams {
    pub fn new(omega: f64, t_obs: f64, energy: f64, eps: f64, delta: f64) -> Result<Self> {
        let p = SignalSpaceParams {
            omega,
            t_obs,
            energy,
            eps,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Build from a bandwidth in Hz instead of rad/s.
    pub fn from_hz(hz: f64, t_obs: f64, energy: f64, eps: f64, delta: f64) -> Result<Self> {
        Self::new(2.0 * std::f64::consts::PI * hz, t_obs, energy, eps, delta)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega", self.omega),
            ("t_obs", self.t_obs),
            ("energy", self.energy),
            ("eps", self.eps),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::config(format!(
                "delta must lie in [0, 1], got {}",
                self.delta
            )));
        }
        Ok(())
    }

    pub fn with_t_obs(&self, t_obs: f64) -> Result<Self> {
        Self::new(self.omega, t_obs, self.energy, self.eps, self.delta)
    }

    /// Time-bandwidth product `Omega T / pi`.
    pub fn n0(&self) -> f64 {
        self.omega * self.t_obs / std::f64::consts::PI
    }

    /// Signals per unit time, `Omega / pi`.
    pub fn dims_per_second(&self) -> f64 {
        self.omega / std::f64::consts::PI
    }

    pub fn snr_k(&self) -> f64 {
        self.energy / (self.eps * self.eps)
    }

    /// `sqrt(E) / eps`.
    pub fn amplitude_ratio(&self) -> f64 {
        self.energy.sqrt() / self.eps
    }

    /// Integer dimension used for finite-`N` bounds.
    pub fn finite_dimension(&self) -> usize {
        ceil_snapped(self.n0()).max(1)
    }
}

/// `ceil(x)`, but values within [`INTEGER_SNAP`] of an integer snap to it.
pub fn ceil_snapped(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= INTEGER_SNAP * r.abs().max(1.0) {
        r.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}

/// `floor(x)`, with the same snapping as [`ceil_snapped`].
pub fn floor_snapped(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= INTEGER_SNAP * r.abs().max(1.0) {
        r as i64
    } else {
        x.floor() as i64
    }
}
