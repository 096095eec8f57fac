//! Time evolution of the joint electron–cavity state.
//!
//! [`evolve_lindblad`] integrates the master equation in the picture where
//! H_nl stays inside the interaction Hamiltonian; [`frame_align`] maps the
//! result into the picture of the closed-form scattering matrices.

mod feasibility;
mod hamiltonian;
mod lindblad;
mod scattering;
pub(crate) mod sparse;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use feasibility::{feasibility_check, feasibility_from_ratios, FeasibilityReport, Inequality};
pub use hamiltonian::{coupling_coefficient, coupling_operator, interaction_hamiltonian, nonlinear_hamiltonian};
pub use lindblad::{evolve_lindblad, initial_state, Diagnostics, Evolution, MasterEquation};
pub use scattering::{
    blockade_omega, frame_align, frame_align_by, scattering_blockade, scattering_blockade_levels, scattering_linear,
};

use crate::cavity::CavityModel;
use crate::ladder::LadderConfig;
use crate::tensor::TensorSpace;
use crate::{Error, Result};

/// ωT = q₀L for L = 40 µm and a 532 nm phase-matching period.
pub const REFERENCE_OMEGA_T: f64 = 2.0 * PI * 40.0e-6 / 532.0e-9;

#[derive(Clone, Debug)]
pub struct SystemConfig {
    pub model: CavityModel,
    pub ladder: LadderConfig,
    /// Dimensionless coupling g_Q = gL/v.
    pub g_q: C64,
    /// Interaction time in units of 1/ω.
    pub t: f64,
    /// Detuning Δ = q₀v − ω.
    pub delta: f64,
    /// Photon loss rate γ/ω.
    pub gamma: f64,
    /// Relative electron energy spread, used by the feasibility check only.
    pub de_over_e: f64,
}

impl SystemConfig {
    pub fn new(model: CavityModel, ladder: LadderConfig, g_q: C64, t: f64, delta: f64, gamma: f64) -> Result<Self> {
        let cfg = Self {
            model,
            ladder,
            g_q,
            t,
            delta,
            gamma,
            de_over_e: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Electron at velocity v = ratio·v₀ (v₀ = ω/q₀): Δ = ratio − 1 and
    /// ωT = q₀L / ratio.
    pub fn at_velocity_ratio(
        model: CavityModel,
        ladder: LadderConfig,
        g_q: C64,
        ratio: f64,
        omega_t_at_v0: f64,
        gamma: f64,
    ) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::InvalidParameter(format!("velocity ratio {ratio} must be positive")));
        }
        Self::new(model, ladder, g_q, omega_t_at_v0 / ratio, ratio - 1.0, gamma)
    }

    pub fn validate(&self) -> Result<()> {
        self.ladder.validate()?;
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(Error::InvalidParameter(format!("interaction time {} must be > 0", self.t)));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("loss rate {} must be ≥ 0", self.gamma)));
        }
        if !(self.delta.is_finite() && self.delta.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("detuning {} must satisfy |Δ| < ω", self.delta)));
        }
        if !(self.g_q.re.is_finite() && self.g_q.im.is_finite()) {
            return Err(Error::InvalidParameter("coupling g_Q must be finite".into()));
        }
        if !(self.de_over_e.is_finite() && self.de_over_e >= 0.0) {
            return Err(Error::InvalidParameter("energy spread must be ≥ 0".into()));
        }
        Ok(())
    }

    /// Joint space: ladder ⊗ cavity model factors.
    pub fn space(&self) -> TensorSpace {
        self.ladder
            .space()
            .concat(self.model.space())
            .expect("ladder and cavity labels are distinct")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StepRule {
    /// A fixed number of RK4 steps.
    Fixed { steps: usize },
    /// Steps chosen so that dt times the fastest rate stays below
    /// `phase_per_step`, with at least `min_steps`.
    Auto { phase_per_step: f64, min_steps: usize },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Auto {
            phase_per_step: 0.05,
            min_steps: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub step_rule: StepRule,
    pub trace_drift_bound: f64,
    /// Bound on the summed population of the two highest photon levels.
    pub cutoff_bound: f64,
    /// Bound on the population within two rungs of the ladder wrap-around.
    pub wrap_bound: f64,
    pub positivity_bound: f64,
    /// Rerun with twice the steps and bound the change of every reported
    /// probability.
    pub check_halving: bool,
    pub halving_bound: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step_rule: StepRule::default(),
            trace_drift_bound: 1e-8,
            cutoff_bound: 1e-6,
            wrap_bound: 1e-8,
            positivity_bound: 1e-8,
            check_halving: true,
            halving_bound: 1e-6,
        }
    }
}

impl IntegratorConfig {
    pub fn fixed(steps: usize) -> Self {
        Self {
            step_rule: StepRule::Fixed { steps },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.step_rule {
            StepRule::Fixed { steps } if steps < 100 => {
                return Err(Error::InvalidParameter(format!("fixed step count {steps} < 100")))
            }
            StepRule::Auto { phase_per_step, .. } if !(phase_per_step > 0.0 && phase_per_step.is_finite()) => {
                return Err(Error::InvalidParameter("phase per step must be positive".into()))
            }
            _ => {}
        }
        for (name, v) in [
            ("trace_drift_bound", self.trace_drift_bound),
            ("cutoff_bound", self.cutoff_bound),
            ("wrap_bound", self.wrap_bound),
            ("positivity_bound", self.positivity_bound),
            ("halving_bound", self.halving_bound),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Step count for a run of duration `t` whose fastest rate is `rate`.
    pub fn steps_for(&self, t: f64, rate: f64) -> usize {
        match self.step_rule {
            StepRule::Fixed { steps } => steps,
            StepRule::Auto {
                phase_per_step,
                min_steps,
            } => {
                let n = (t * rate / phase_per_step).ceil();
                (n as usize).max(min_steps).max(1)
            }
        }
    }
}
