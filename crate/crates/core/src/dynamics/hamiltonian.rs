use num_complex::Complex64 as C64;

use super::SystemConfig;
use crate::ladder::build_ladder;
use crate::tensor::{kron, Operator};
use crate::Result;

/// c(t) = i(g_Q/T)e^{iΔt}, the coefficient of b†⊗a in H(t).
pub fn coupling_coefficient(t: f64, cfg: &SystemConfig) -> C64 {
    C64::new(0.0, 1.0) * cfg.g_q / cfg.t * C64::from_polar(1.0, cfg.delta * t)
}

/// B = b†⊗a on the joint space (electron gains a quantum, photon absorbed).
pub fn coupling_operator(cfg: &SystemConfig) -> Result<Operator> {
    let b = build_ladder(&cfg.ladder)?;
    kron(&b.adjoint(), cfg.model.a())
}

/// I_el ⊗ H_nl.
pub fn nonlinear_hamiltonian(cfg: &SystemConfig) -> Result<Operator> {
    kron(&Operator::identity(&cfg.ladder.space()), cfg.model.h_nl())
}

/// H(t) = H_nl + c(t)·b†⊗a + c(t)*·b⊗a†.
pub fn interaction_hamiltonian(t: f64, cfg: &SystemConfig) -> Result<Operator> {
    let c = coupling_coefficient(t, cfg);
    let b = coupling_operator(cfg)?;
    let drive = b.scale(c);
    let h = nonlinear_hamiltonian(cfg)?;
    Ok(&(&h + &drive) + &drive.adjoint())
}
