//! Scenario configuration: versioned JSON, unknown keys rejected.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cavity::{CavityKind, PolaritonLevel};
use crate::dynamics::{IntegratorConfig, REFERENCE_OMEGA_T};
use crate::ladder::{energy_to_velocity, LadderConfig};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Evolve,
    SweepKappa,
    SweepVelocity,
    SweepGq,
    FidelityMap,
    Gates,
    Feasibility,
}

impl ScenarioKind {
    pub fn is_sweep(self) -> bool {
        matches!(self, ScenarioKind::SweepKappa | ScenarioKind::SweepVelocity | ScenarioKind::SweepGq)
    }

    /// Column name of the swept quantity.
    pub fn axis(self) -> &'static str {
        match self {
            ScenarioKind::SweepKappa => "kappa_ratio",
            ScenarioKind::SweepVelocity => "velocity_ratio",
            ScenarioKind::SweepGq => "g_q",
            _ => "value",
        }
    }
}

/// Electron velocity relative to the phase-matched v₀ = ω/q₀.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Velocity {
    /// v/v₀.
    Ratio(f64),
    /// Δ = q₀v − ω, i.e. v/v₀ = 1 + Δ.
    Detuning(f64),
    /// Phase matched to the target transition.
    PhaseMatched,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelBlock {
    #[serde(rename = "type")]
    pub kind: CavityKind,
    pub kappa: f64,
    pub n_cut: usize,
    /// Initial cavity level; the ground level when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    /// Upper level of the target transition, for fidelities and phase
    /// matching.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

impl Default for ModelBlock {
    fn default() -> Self {
        Self {
            kind: CavityKind::Kerr,
            kappa: 0.02,
            n_cut: 6,
            initial: None,
            target: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectronBlock {
    pub ladder_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_kev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub g_q: f64,
    /// Phase of g_Q in radians.
    pub g_q_phase: f64,
    pub velocity: Velocity,
    /// ωT at v₀. Defaults to q₀L for the 40 µm, 532 nm reference.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_t: Option<f64>,
    /// Interaction length in metres; with the period, ωT = 2πL/Λ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_matching_period_m: Option<f64>,
    /// Relative energy spread ΔE/E, used by the feasibility check.
    pub energy_spread: f64,
}

impl Default for ElectronBlock {
    fn default() -> Self {
        Self {
            ladder_dim: 33,
            energy_kev: None,
            beta: None,
            g_q: PI / 2.0,
            g_q_phase: 0.0,
            velocity: Velocity::Ratio(1.0),
            omega_t: None,
            length_m: None,
            phase_matching_period_m: None,
            energy_spread: 0.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossBlock {
    pub gamma: f64,
}

/// Retry a point with larger truncations when a cutoff guard trips.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Escalation {
    pub enabled: bool,
    pub max_n_cut: usize,
    pub max_ladder_dim: usize,
}

impl Default for Escalation {
    fn default() -> Self {
        Self {
            enabled: true,
            max_n_cut: 24,
            max_ladder_dim: 65,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidelityMapBlock {
    pub kappa: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Per-κ cavity cutoffs; empty means model.n_cut everywhere.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_cut: Vec<usize>,
    /// Per-κ ladder sizes; empty means electron.ladder_dim everywhere.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ladder_dim: Vec<usize>,
    /// Models to map; empty means model.type only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<CavityKind>,
    /// Target level per entry of `models`; empty means model.target.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<String>,
    /// Choose |g_Q| per point so the target transition sees |Ω| = π/2.
    #[serde(default)]
    pub pi_pulse: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatesBlock {
    pub ladder_dim: usize,
    pub center: usize,
    /// Negative-control hook: phase added to the calibrated CZ pass.
    pub phase_corruption: f64,
}

impl Default for GatesBlock {
    fn default() -> Self {
        Self {
            ladder_dim: 8,
            center: 4,
            phase_corruption: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeasibilityBlock {
    /// Δω_PM/ω; 1/(ωT) when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    pub margin: f64,
}

impl Default for FeasibilityBlock {
    fn default() -> Self {
        Self {
            bandwidth: None,
            margin: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub model: ModelBlock,
    #[serde(default)]
    pub electron: ElectronBlock,
    #[serde(default)]
    pub loss: LossBlock,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub escalation: Escalation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity_map: Option<FidelityMapBlock>,
    #[serde(default)]
    pub gates: GatesBlock,
    #[serde(default)]
    pub feasibility: FeasibilityBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

fn finite_nonneg(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("{v} must be finite and ≥ 0")))
    }
}

fn parse_level(field: &str, s: &str) -> Result<PolaritonLevel> {
    s.parse().map_err(|e: Error| Error::config(field, e.to_string()))
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario,
            model: ModelBlock::default(),
            electron: ElectronBlock::default(),
            loss: LossBlock::default(),
            integrator: IntegratorConfig::default(),
            escalation: Escalation::default(),
            sweep: None,
            fidelity_map: None,
            gates: GatesBlock::default(),
            feasibility: FeasibilityBlock::default(),
            output_dir: None,
        }
    }

    /// Parse and validate JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("unknown field") || msg.contains("missing field"))
                .unwrap_or("<document>")
                .to_string();
            Error::config(field, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let m = &self.model;
        finite_nonneg("model.kappa", m.kappa)?;
        if m.n_cut < 2 {
            return Err(Error::config("model.n_cut", format!("{} must be ≥ 2", m.n_cut)));
        }
        let initial = self.initial_level()?;
        let target = self.target_level()?;
        if let Some(t) = target {
            crate::cavity::build(m.kind, m.kappa, m.n_cut)
                .and_then(|model| crate::cavity::predecessor(&model, t))
                .map_err(|e| Error::config("model.target", e.to_string()))?;
        }
        let allowed = |l: PolaritonLevel| match m.kind {
            CavityKind::Kerr => matches!(l, PolaritonLevel::Fock(_)),
            CavityKind::JaynesCummings => !matches!(l, PolaritonLevel::Fock(_) | PolaritonLevel::Truncated),
        };
        if !allowed(initial) {
            return Err(Error::config("model.initial", format!("level {initial} does not belong to the {} model", m.kind)));
        }

        let e = &self.electron;
        if e.ladder_dim < 5 {
            return Err(Error::config("electron.ladder_dim", format!("{} must be ≥ 5", e.ladder_dim)));
        }
        if !(e.g_q.is_finite() && e.g_q_phase.is_finite()) {
            return Err(Error::config("electron.g_q", "must be finite"));
        }
        match (e.energy_kev, e.beta) {
            (Some(_), Some(_)) => return Err(Error::config("electron.beta", "give either energy_kev or beta, not both")),
            (Some(k), None) if !(k.is_finite() && k > 0.0) => {
                return Err(Error::config("electron.energy_kev", format!("{k} must be > 0")))
            }
            (None, Some(b)) if !(b.is_finite() && b > 0.0 && b < 1.0) => {
                return Err(Error::config("electron.beta", format!("{b} must lie in (0, 1)")))
            }
            _ => {}
        }
        match e.velocity {
            Velocity::Ratio(r) if !(r.is_finite() && r > 0.0 && (r - 1.0).abs() < 1.0) => {
                return Err(Error::config("electron.velocity", format!("ratio {r} must lie in (0, 2)")))
            }
            Velocity::Detuning(d) if !(d.is_finite() && d.abs() < 1.0) => {
                return Err(Error::config("electron.velocity", format!("detuning {d} must satisfy |Δ| < 1")))
            }
            Velocity::PhaseMatched if target.is_none() && !self.map_has_targets() => {
                return Err(Error::config("electron.velocity", "phase_matched needs model.target"))
            }
            _ => {}
        }
        if e.omega_t.is_some() && (e.length_m.is_some() || e.phase_matching_period_m.is_some()) {
            return Err(Error::config("electron.omega_t", "give either omega_t or length_m with phase_matching_period_m"));
        }
        if e.length_m.is_some() != e.phase_matching_period_m.is_some() {
            return Err(Error::config("electron.length_m", "length_m and phase_matching_period_m go together"));
        }
        for (field, v) in [("electron.omega_t", e.omega_t), ("electron.length_m", e.length_m), ("electron.phase_matching_period_m", e.phase_matching_period_m)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::config(field, format!("{v} must be > 0")));
                }
            }
        }
        finite_nonneg("electron.energy_spread", e.energy_spread)?;
        finite_nonneg("loss.gamma", self.loss.gamma)?;
        self.integrator.validate().map_err(|err| Error::config("integrator", err.to_string()))?;
        let esc = &self.escalation;
        if esc.enabled && (esc.max_n_cut < m.n_cut || esc.max_ladder_dim < e.ladder_dim) {
            return Err(Error::config("escalation", "limits must not be below the starting cutoffs"));
        }

        if self.scenario.is_sweep() {
            let sweep = self.sweep.as_ref().ok_or_else(|| Error::config("sweep", "sweep scenarios need a sweep block"))?;
            if sweep.values.is_empty() {
                return Err(Error::config("sweep.values", "grid is empty"));
            }
            for &v in &sweep.values {
                let ok = match self.scenario {
                    ScenarioKind::SweepKappa => v.is_finite() && v >= 0.0,
                    ScenarioKind::SweepVelocity => v.is_finite() && v > 0.0 && (v - 1.0).abs() < 1.0,
                    _ => v.is_finite(),
                };
                if !ok {
                    return Err(Error::config("sweep.values", format!("invalid grid value {v}")));
                }
            }
        }
        if self.scenario == ScenarioKind::FidelityMap {
            let map = self
                .fidelity_map
                .as_ref()
                .ok_or_else(|| Error::config("fidelity_map", "fidelity_map scenario needs a fidelity_map block"))?;
            if map.kappa.is_empty() {
                return Err(Error::config("fidelity_map.kappa", "grid is empty"));
            }
            if map.gamma.is_empty() {
                return Err(Error::config("fidelity_map.gamma", "grid is empty"));
            }
            for &k in &map.kappa {
                finite_nonneg("fidelity_map.kappa", k)?;
            }
            for &g in &map.gamma {
                finite_nonneg("fidelity_map.gamma", g)?;
            }
            if !map.n_cut.is_empty() && map.n_cut.len() != map.kappa.len() {
                return Err(Error::config("fidelity_map.n_cut", "needs one entry per kappa"));
            }
            if map.n_cut.iter().any(|&n| n < 2) {
                return Err(Error::config("fidelity_map.n_cut", "entries must be ≥ 2"));
            }
            if !map.ladder_dim.is_empty() && map.ladder_dim.len() != map.kappa.len() {
                return Err(Error::config("fidelity_map.ladder_dim", "needs one entry per kappa"));
            }
            if map.ladder_dim.iter().any(|&d| d < 5) {
                return Err(Error::config("fidelity_map.ladder_dim", "entries must be ≥ 5"));
            }
            if !map.models.is_empty() && !map.targets.is_empty() && map.targets.len() != map.models.len() {
                return Err(Error::config("fidelity_map.targets", "needs one entry per model"));
            }
            if !map.targets.is_empty() && map.models.is_empty() {
                return Err(Error::config("fidelity_map.targets", "given without fidelity_map.models"));
            }
            for t in &map.targets {
                parse_level("fidelity_map.targets", t)?;
            }
            if target.is_none() && map.targets.is_empty() {
                return Err(Error::config("model.target", "fidelity_map needs a target transition"));
            }
        }
        if self.scenario == ScenarioKind::Gates {
            LadderConfig::new(self.gates.ladder_dim, self.gates.center).map_err(|err| Error::config("gates.ladder_dim", err.to_string()))?;
            if !self.gates.phase_corruption.is_finite() {
                return Err(Error::config("gates.phase_corruption", "must be finite"));
            }
        }
        if !(self.feasibility.margin.is_finite() && self.feasibility.margin >= 1.0) {
            return Err(Error::config("feasibility.margin", "must be ≥ 1"));
        }
        if let Some(b) = self.feasibility.bandwidth {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::config("feasibility.bandwidth", "must be > 0"));
            }
        }
        Ok(())
    }

    fn map_has_targets(&self) -> bool {
        self.scenario == ScenarioKind::FidelityMap && self.fidelity_map.as_ref().is_some_and(|m| !m.targets.is_empty())
    }

    pub fn initial_level(&self) -> Result<PolaritonLevel> {
        match &self.model.initial {
            Some(s) => parse_level("model.initial", s),
            None => Ok(match self.model.kind {
                CavityKind::Kerr => PolaritonLevel::Fock(0),
                CavityKind::JaynesCummings => PolaritonLevel::Ground,
            }),
        }
    }

    pub fn target_level(&self) -> Result<Option<PolaritonLevel>> {
        self.model.target.as_deref().map(|s| parse_level("model.target", s)).transpose()
    }

    /// ωT at v₀.
    pub fn omega_t(&self) -> f64 {
        let e = &self.electron;
        match (e.omega_t, e.length_m, e.phase_matching_period_m) {
            (Some(w), _, _) => w,
            (None, Some(l), Some(p)) => 2.0 * PI * l / p,
            _ => REFERENCE_OMEGA_T,
        }
    }

    /// Electron v/c when an energy or β was given.
    pub fn beta(&self) -> Option<f64> {
        self.electron.beta.or_else(|| self.electron.energy_kev.and_then(|k| energy_to_velocity(k).ok()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> String {
        r#"{"schema_version": 1, "scenario": "evolve"}"#.into()
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = ScenarioConfig::from_json(&minimal()).unwrap();
        assert_eq!(cfg.model.n_cut, 6);
        assert_eq!(cfg.electron.velocity, Velocity::Ratio(1.0));
        assert!((cfg.omega_t() - REFERENCE_OMEGA_T).abs() < 1e-12);
        let echo = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(echo, cfg);
    }

    #[test]
    fn unknown_keys_name_the_field() {
        let text = r#"{"schema_version": 1, "scenario": "evolve", "model": {"kapa": 0.1}}"#;
        match ScenarioConfig::from_json(text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "kapa"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_values() {
        let field_of = |text: &str| match ScenarioConfig::from_json(text) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field_of(r#"{"schema_version": 1, "scenario": "evolve", "model": {"n_cut": 1}}"#), "model.n_cut");
        assert_eq!(field_of(r#"{"schema_version": 2, "scenario": "evolve"}"#), "schema_version");
        assert_eq!(field_of(r#"{"schema_version": 1, "scenario": "sweep_gq", "sweep": {"values": []}}"#), "sweep.values");
        assert_eq!(field_of(r#"{"schema_version": 1, "scenario": "evolve", "loss": {"gamma": -1}}"#), "loss.gamma");
        assert_eq!(
            field_of(r#"{"schema_version": 1, "scenario": "evolve", "electron": {"velocity": "phase_matched"}}"#),
            "electron.velocity"
        );
        assert_eq!(field_of(r#"{"schema_version": 1, "scenario": "evolve", "model": {"initial": "1+"}}"#), "model.initial");
    }

    #[test]
    fn velocity_forms_parse() {
        let text = r#"{"schema_version": 1, "scenario": "evolve",
            "model": {"type": "jc", "target": "1+"}, "electron": {"velocity": {"ratio": 1.02}}}"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        assert_eq!(cfg.electron.velocity, Velocity::Ratio(1.02));
        assert_eq!(cfg.target_level().unwrap(), Some(PolaritonLevel::Upper(1)));
        assert_eq!(cfg.initial_level().unwrap(), PolaritonLevel::Ground);
    }

    #[test]
    fn length_and_period_set_interaction_time() {
        let text = r#"{"schema_version": 1, "scenario": "evolve",
            "electron": {"length_m": 40e-6, "phase_matching_period_m": 532e-9, "energy_kev": 200}}"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        assert!((cfg.omega_t() - REFERENCE_OMEGA_T).abs() < 1e-9);
        assert!((cfg.beta().unwrap() - 0.6953).abs() < 1e-3);
    }
}
