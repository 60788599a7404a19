//! Timescale matching for the linear ramp B(t) = δ·t.
//!
//! The instantaneous relaxation time is τ(t) = (δt)^(-1/2); equating it to
//! the elapsed time defines the freeze-out time t̂ = δ^(-1/3). Before t̂ the
//! system cannot follow the ramp (impulse regime); after t̂ it tracks the
//! instantaneous ground state (adiabatic regime). A ramp started at t0 with
//! field B0 = δ·t0 is globally quasi-adiabatic iff δ < B0^(3/2), i.e.
//! t0 > t̂.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative half-width of the band around t̂ classified as `FreezeOut`.
/// Effectively measure-zero; present so classification is total.
pub const FREEZE_OUT_BAND: f64 = 1e-9;

/// A linear ramp specification; stores the mutually consistent triple
/// (δ, t0, B0 = δ·t0).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RampSpec {
    delta: f64,
    t0: f64,
    b0: f64,
}

impl RampSpec {
    /// Build from the ramp rate and the initial time.
    pub fn from_initial_time(delta: f64, t0: f64) -> Result<Self> {
        check_positive("delta", delta)?;
        check_positive("t0", t0)?;
        Ok(Self { delta, t0, b0: delta * t0 })
    }

    /// Build from the ramp rate and the initial field.
    pub fn from_initial_field(delta: f64, b0: f64) -> Result<Self> {
        check_positive("delta", delta)?;
        check_positive("b0", b0)?;
        Ok(Self { delta, t0: b0 / delta, b0 })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    /// Initial oscillator frequency ω0 = sqrt(B0).
    pub fn omega0(&self) -> f64 {
        self.b0.sqrt()
    }

    /// t̂ for this ramp.
    pub fn freeze_out_time(&self) -> f64 {
        freeze_out_time(self.delta).expect("delta validated at construction")
    }
}

/// Which side of the freeze-out crossover a given instant falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeLabel {
    Adiabatic,
    Impulse,
    FreezeOut,
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegimeLabel::Adiabatic => write!(f, "adiabatic"),
            RegimeLabel::Impulse => write!(f, "impulse"),
            RegimeLabel::FreezeOut => write!(f, "freeze-out"),
        }
    }
}

/// τ(t) = (δ·t)^(-1/2).
pub fn relaxation_time(delta: f64, t: f64) -> Result<f64> {
    check_positive("delta", delta)?;
    check_positive("t", t)?;
    Ok(1.0 / (delta * t).sqrt())
}

/// t̂ = δ^(-1/3), the unique positive solution of τ(t) = t.
pub fn freeze_out_time(delta: f64) -> Result<f64> {
    check_positive("delta", delta)?;
    Ok(delta.powf(-1.0 / 3.0))
}

/// Classify an instant t ≥ t0 of the ramp.
pub fn classify_regime(ramp: &RampSpec, t: f64) -> Result<RegimeLabel> {
    if t < ramp.t0 {
        return Err(Error::Domain(format!(
            "t = {t} precedes the ramp start t0 = {}",
            ramp.t0
        )));
    }
    let t_hat = ramp.freeze_out_time();
    Ok(if t < t_hat * (1.0 - FREEZE_OUT_BAND) {
        RegimeLabel::Impulse
    } else if t > t_hat * (1.0 + FREEZE_OUT_BAND) {
        RegimeLabel::Adiabatic
    } else {
        RegimeLabel::FreezeOut
    })
}

/// Largest ramp rate for which a ramp starting at field B0 stays
/// quasi-adiabatic: δ_max = B0^(3/2), equivalent to t0 > t̂.
pub fn adiabaticity_bound(b0: f64) -> Result<f64> {
    check_positive("b0", b0)?;
    Ok(b0.powf(1.5))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}
