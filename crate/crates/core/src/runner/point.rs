//! One parameter point: build, propagate, measure.

use num_complex::Complex64 as C64;

use crate::cavity::{build, phase_matching_detuning, polariton_eigenbasis, predecessor, CavityKind, PolaritonLevel};
use crate::dynamics::{
    blockade_omega, evolve_lindblad, frame_align, initial_state, scattering_blockade_levels, Diagnostics, IntegratorConfig,
    SystemConfig,
};
use crate::ladder::LadderConfig;
use crate::observables::{eels_spectrum, polariton_statistics, state_fidelity, Distribution};
use crate::tensor::StateVector;
use crate::{Error, Result};

use super::config::{Escalation, Velocity};

/// Everything needed to simulate one point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSpec {
    pub kind: CavityKind,
    pub kappa: f64,
    pub n_cut: usize,
    pub ladder_dim: usize,
    pub g_q: C64,
    pub velocity: Velocity,
    /// ωT at v₀.
    pub omega_t: f64,
    pub gamma: f64,
    pub initial: PolaritonLevel,
    pub target: Option<PolaritonLevel>,
    pub integrator: IntegratorConfig,
    pub escalation: Escalation,
}

#[derive(Clone, Debug)]
pub struct PointData {
    pub eels: Distribution,
    pub stats: Distribution,
    pub diagnostics: Diagnostics,
    /// Cutoffs actually used after escalation.
    pub n_cut: usize,
    pub ladder_dim: usize,
    pub velocity_ratio: f64,
    pub target_probability: Option<f64>,
    /// Fidelity to the blockade scattering target after frame alignment.
    pub fidelity: Option<f64>,
}

impl PointSpec {
    pub fn velocity_ratio(&self, model: &crate::cavity::CavityModel) -> Result<f64> {
        Ok(match self.velocity {
            Velocity::Ratio(r) => r,
            Velocity::Detuning(d) => 1.0 + d,
            Velocity::PhaseMatched => {
                let t = self
                    .target
                    .ok_or_else(|| Error::config("electron.velocity", "phase_matched needs model.target"))?;
                1.0 + phase_matching_detuning(model, t)?
            }
        })
    }

    fn run_once(&self, n_cut: usize, dim: usize) -> Result<PointData> {
        let model = build(self.kind, self.kappa, n_cut)?;
        let ladder = LadderConfig::centered(dim)?;
        let ratio = self.velocity_ratio(&model)?;
        let cfg = SystemConfig::at_velocity_ratio(model, ladder, self.g_q, ratio, self.omega_t, self.gamma)?;
        let basis = polariton_eigenbasis(&cfg.model);
        let cavity = basis.vector(self.initial)?;
        let rho0 = initial_state(&cfg, &cavity)?;
        let ev = evolve_lindblad(&rho0, &cfg, &self.integrator)?;
        let eels = eels_spectrum(&ev.rho, &cfg.ladder)?;
        let stats = polariton_statistics(&ev.rho, &basis)?;
        let (target_probability, fidelity) = match self.target {
            Some(upper) => {
                let lower = predecessor(&cfg.model, upper)?;
                let omega = blockade_omega(self.g_q, &cfg.model, lower, upper)?;
                let s = scattering_blockade_levels(omega, &cfg.model, lower, upper, &cfg.space())?;
                let psi0 = StateVector::basis(&cfg.ladder.space(), cfg.ladder.center)?.kron(&cavity)?;
                let ideal = s.apply(&psi0)?;
                let aligned = frame_align(&ev.rho, &cfg)?;
                (Some(stats.get(&upper.to_string())), Some(state_fidelity(&aligned, &ideal)?))
            }
            None => (None, None),
        };
        Ok(PointData {
            eels,
            stats,
            diagnostics: ev.diagnostics,
            n_cut,
            ladder_dim: dim,
            velocity_ratio: ratio,
            target_probability,
            fidelity,
        })
    }

    /// Run, enlarging the cavity cutoff on cutoff violations and the ladder
    /// on wrap-around while the escalation limits allow.
    pub fn run(&self) -> Result<PointData> {
        let (mut n, mut d) = (self.n_cut, self.ladder_dim);
        loop {
            match self.run_once(n, d) {
                Err(Error::CutoffViolation { .. }) if self.escalation.enabled && n < self.escalation.max_n_cut => {
                    n = (n + 4).min(self.escalation.max_n_cut);
                }
                Err(Error::WrapAround { .. }) if self.escalation.enabled && d < self.escalation.max_ladder_dim => {
                    d = (2 * d - 1).min(self.escalation.max_ladder_dim);
                }
                other => return other,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn kerr_point() -> PointSpec {
        PointSpec {
            kind: CavityKind::Kerr,
            kappa: 0.05,
            n_cut: 4,
            ladder_dim: 13,
            g_q: C64::new(PI / 2.0, 0.0),
            velocity: Velocity::Ratio(1.0),
            omega_t: 200.0,
            gamma: 0.0,
            initial: PolaritonLevel::Fock(0),
            target: Some(PolaritonLevel::Fock(1)),
            integrator: IntegratorConfig {
                check_halving: false,
                ..IntegratorConfig::default()
            },
            escalation: Escalation::default(),
        }
    }

    #[test]
    fn kerr_point_inverts() {
        let data = kerr_point().run().unwrap();
        assert!(data.target_probability.unwrap() > 0.9);
        assert!(data.fidelity.unwrap() > 0.9);
        assert_eq!(data.eels.len(), 13);
    }

    #[test]
    fn escalation_grows_cutoff() {
        let spec = PointSpec {
            kappa: 0.0,
            n_cut: 3,
            g_q: C64::new(1.0, 0.0),
            target: None,
            ..kerr_point()
        };
        let data = spec.run().unwrap();
        assert!(data.n_cut > 3);
        let fixed = PointSpec {
            escalation: Escalation {
                enabled: false,
                ..Escalation::default()
            },
            ..spec
        };
        assert!(matches!(fixed.run(), Err(Error::CutoffViolation { .. })));
    }
}
