//! The hierarchy γ, ΔE/E ≪ Δω_PM ≪ κ that the blockade scheme needs.

use std::fmt;

use serde::Serialize;

use super::SystemConfig;
use crate::{Error, Result};

/// One "lhs ≪ rhs" requirement, checked as lhs ≤ rhs / margin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Inequality {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Inequality {
    fn new(name: &'static str, lhs: f64, rhs: f64, margin: f64) -> Self {
        Self {
            name,
            lhs,
            rhs,
            pass: lhs <= rhs / margin,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// Δω_PM/ω = 1/(ωT).
    pub bandwidth: f64,
    pub margin: f64,
    pub loss: Inequality,
    pub energy_spread: Inequality,
    pub nonlinearity: Inequality,
}

impl FeasibilityReport {
    pub fn pass(&self) -> bool {
        self.loss.pass && self.energy_spread.pass && self.nonlinearity.pass
    }

    pub fn checks(&self) -> [&Inequality; 3] {
        [&self.loss, &self.energy_spread, &self.nonlinearity]
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "phase-matching bandwidth {:.6e}, margin {}", self.bandwidth, self.margin)?;
        for c in self.checks() {
            writeln!(
                f,
                "{} {}: {:.6e} <= {:.6e} / {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.lhs,
                c.rhs,
                self.margin
            )?;
        }
        Ok(())
    }
}

/// Check γ/ω, ΔE/E ≤ Δω_PM/(margin·ω) and Δω_PM ≤ κ/margin from ratios.
pub fn feasibility_from_ratios(bandwidth: f64, kappa: f64, gamma: f64, de_over_e: f64, margin: f64) -> Result<FeasibilityReport> {
    if !(margin.is_finite() && margin >= 1.0) {
        return Err(Error::InvalidParameter(format!("margin {margin} must be ≥ 1")));
    }
    for (name, v) in [("bandwidth", bandwidth), ("kappa", kappa), ("gamma", gamma), ("dE/E", de_over_e)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParameter(format!("{name} = {v} must be finite and ≥ 0")));
        }
    }
    Ok(FeasibilityReport {
        bandwidth,
        margin,
        loss: Inequality::new("loss below bandwidth", gamma, bandwidth, margin),
        energy_spread: Inequality::new("energy spread below bandwidth", de_over_e, bandwidth, margin),
        nonlinearity: Inequality::new("bandwidth below nonlinearity", bandwidth, kappa, margin),
    })
}

pub fn feasibility_check(cfg: &SystemConfig, margin: f64) -> Result<FeasibilityReport> {
    feasibility_from_ratios(1.0 / cfg.t, cfg.model.kappa, cfg.gamma, cfg.de_over_e, margin)
}
