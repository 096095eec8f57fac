//! Built-in figure configs.

use std::f64::consts::{PI, SQRT_2};

use crate::cavity::CavityKind;
use crate::{Error, Result};

use super::config::{FidelityMapBlock, ScenarioConfig, ScenarioKind, SweepBlock, Velocity};

pub const PRESETS: [&str; 9] = ["fig3ab", "fig3cd", "fig4a", "fig4b", "fig4c", "fig4d", "fig5a", "fig5b", "fig5c"];

const GAMMA_REF: f64 = 1e-5;

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count).map(|k| start + (stop - start) * k as f64 / (count - 1) as f64).collect(),
    }
}

fn base(scenario: ScenarioKind, kind: CavityKind, kappa: f64, n_cut: usize, g_q: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(scenario);
    cfg.model.kind = kind;
    cfg.model.kappa = kappa;
    cfg.model.n_cut = n_cut;
    cfg.electron.g_q = g_q;
    cfg.electron.energy_kev = Some(200.0);
    cfg.loss.gamma = GAMMA_REF;
    cfg
}

fn gq_grid() -> Vec<f64> {
    (0..=64).map(|k| k as f64 * PI / 64.0).collect()
}

fn fidelity_map(kind: CavityKind, target: &str, g_q: f64, n_cut: Vec<usize>, ladder_dim: Vec<usize>) -> ScenarioConfig {
    let mut cfg = base(ScenarioKind::FidelityMap, kind, 0.02, n_cut[2], g_q);
    cfg.model.target = Some(target.into());
    cfg.electron.velocity = Velocity::PhaseMatched;
    cfg.fidelity_map = Some(FidelityMapBlock {
        kappa: vec![0.005, 0.01, 0.02],
        gamma: vec![1e-5, 1e-4, 1e-3],
        n_cut,
        ladder_dim,
        ..FidelityMapBlock::default()
    });
    cfg
}

/// Look up a preset by name.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let cfg = match name {
        // Kerr loss spectrum and statistics versus κ at g_Q = π/2
        "fig3ab" => {
            let mut c = base(ScenarioKind::SweepKappa, CavityKind::Kerr, 0.02, 16, PI / 2.0);
            c.electron.ladder_dim = 41;
            c.model.target = Some("1".into());
            c.sweep = Some(SweepBlock {
                values: linspace(0.0, 0.02, 9),
            });
            c
        }
        // JC velocity selectivity around v = (1 ± κ)v₀
        "fig3cd" => {
            let mut c = base(ScenarioKind::SweepVelocity, CavityKind::JaynesCummings, 0.02, 8, PI / SQRT_2);
            c.model.target = Some("1+".into());
            c.sweep = Some(SweepBlock {
                values: linspace(0.97, 1.03, 13),
            });
            c
        }
        "fig4a" => {
            let mut c = base(ScenarioKind::SweepGq, CavityKind::Kerr, 0.02, 6, PI / 2.0);
            c.model.target = Some("1".into());
            c.electron.velocity = Velocity::PhaseMatched;
            c.sweep = Some(SweepBlock { values: gq_grid() });
            c
        }
        "fig4b" => {
            let mut c = base(ScenarioKind::SweepGq, CavityKind::Kerr, 0.02, 7, PI / 2.0);
            c.model.initial = Some("1".into());
            c.model.target = Some("2".into());
            c.electron.velocity = Velocity::PhaseMatched;
            c.sweep = Some(SweepBlock { values: gq_grid() });
            c
        }
        "fig4c" => {
            let mut c = base(ScenarioKind::SweepGq, CavityKind::JaynesCummings, 0.02, 8, PI / SQRT_2);
            c.model.target = Some("1+".into());
            c.electron.velocity = Velocity::PhaseMatched;
            c.sweep = Some(SweepBlock { values: gq_grid() });
            c
        }
        "fig4d" => {
            let mut c = base(ScenarioKind::SweepGq, CavityKind::JaynesCummings, 0.02, 8, PI / SQRT_2);
            c.model.target = Some("1-".into());
            c.electron.velocity = Velocity::PhaseMatched;
            c.sweep = Some(SweepBlock { values: gq_grid() });
            c
        }
        "fig5a" => fidelity_map(CavityKind::Kerr, "1", PI / 2.0, vec![10, 6, 6], vec![33, 33, 33]),
        "fig5b" => fidelity_map(CavityKind::JaynesCummings, "1+", PI / SQRT_2, vec![20, 12, 8], vec![65, 33, 33]),
        // both models at κ = 0.02 with equal blockade angle
        "fig5c" => {
            let mut c = base(ScenarioKind::FidelityMap, CavityKind::Kerr, 0.02, 8, PI / 2.0);
            c.electron.velocity = Velocity::PhaseMatched;
            c.fidelity_map = Some(FidelityMapBlock {
                kappa: vec![0.02],
                gamma: vec![1e-5, 3e-5, 1e-4, 3e-4, 1e-3],
                models: vec![CavityKind::Kerr, CavityKind::JaynesCummings],
                targets: vec!["1".into(), "1+".into()],
                pi_pulse: true,
                ..FidelityMapBlock::default()
            });
            c
        }
        other => {
            return Err(Error::config(
                "--preset",
                format!("unknown preset `{other}`; known: {}", PRESETS.join(", ")),
            ))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate_and_round_trip() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            let echo = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(echo, cfg, "{name}");
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let g = gq_grid();
        assert_eq!(g.len(), 65);
        assert!((g[32] - PI / 2.0).abs() < 1e-15);
    }
}
