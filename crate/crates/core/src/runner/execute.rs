//! Scenario execution and artifact emission.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::cavity::{build, predecessor, CavityKind, PolaritonLevel};
use crate::dynamics::{blockade_omega, feasibility_check, feasibility_from_ratios, FeasibilityReport, SystemConfig};
use crate::gates::{identity_suite, GateSuite};
use crate::ladder::LadderConfig;
use crate::{Error, Result};

use super::config::{ScenarioConfig, ScenarioKind};
use super::point::{PointData, PointSpec};

/// One grid point; failures are kept with their message.
#[derive(Clone, Debug)]
pub struct PointResult {
    pub index: usize,
    pub value: f64,
    pub result: std::result::Result<PointData, String>,
}

impl PointResult {
    pub fn converged(&self) -> bool {
        self.result.is_ok()
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub axis: &'static str,
    pub points: Vec<PointResult>,
}

#[derive(Clone, Debug)]
pub struct MapEntry {
    pub kappa: f64,
    pub gamma: f64,
    pub result: std::result::Result<PointData, String>,
}

#[derive(Clone, Debug)]
pub struct FidelityMap {
    pub model: CavityKind,
    pub target: PolaritonLevel,
    pub entries: Vec<MapEntry>,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Single(Box<PointData>),
    Sweep(SweepResult),
    FidelityMaps(Vec<FidelityMap>),
    Gates(Box<GateSuite>),
    Feasibility(FeasibilityReport),
}

/// Point spec from the config's base parameters.
pub fn base_point(cfg: &ScenarioConfig) -> Result<PointSpec> {
    Ok(PointSpec {
        kind: cfg.model.kind,
        kappa: cfg.model.kappa,
        n_cut: cfg.model.n_cut,
        ladder_dim: cfg.electron.ladder_dim,
        g_q: C64::from_polar(cfg.electron.g_q, cfg.electron.g_q_phase),
        velocity: cfg.electron.velocity,
        omega_t: cfg.omega_t(),
        gamma: cfg.loss.gamma,
        initial: cfg.initial_level()?,
        target: cfg.target_level()?,
        integrator: cfg.integrator,
        escalation: cfg.escalation,
    })
}

/// Evaluate `f` on every item using `workers` threads; results keep input
/// order.
pub fn parallel_map<T, R, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

fn sweep_spec(base: &PointSpec, kind: ScenarioKind, value: f64, phase: f64) -> PointSpec {
    let mut spec = base.clone();
    match kind {
        ScenarioKind::SweepKappa => spec.kappa = value,
        ScenarioKind::SweepVelocity => spec.velocity = super::config::Velocity::Ratio(value),
        ScenarioKind::SweepGq => spec.g_q = C64::from_polar(value, phase),
        _ => unreachable!("not a sweep"),
    }
    spec
}

/// |g_Q| giving |Ω| = π/2 on the target transition.
fn pi_pulse_coupling(kind: CavityKind, kappa: f64, n_cut: usize, target: PolaritonLevel) -> Result<f64> {
    let model = build(kind, kappa, n_cut)?;
    let lower = predecessor(&model, target)?;
    let unit = blockade_omega(C64::new(1.0, 0.0), &model, lower, target)?.norm();
    if unit < 1e-12 {
        return Err(Error::InvalidPair(format!("{lower} -> {target} is dark")));
    }
    Ok(std::f64::consts::FRAC_PI_2 / unit)
}

fn map_specs(cfg: &ScenarioConfig, base: &PointSpec) -> Result<Vec<(CavityKind, PolaritonLevel, Vec<(f64, f64, PointSpec)>)>> {
    let map = cfg.fidelity_map.as_ref().ok_or_else(|| Error::config("fidelity_map", "missing"))?;
    let models: Vec<CavityKind> = if map.models.is_empty() { vec![cfg.model.kind] } else { map.models.clone() };
    let mut out = Vec::new();
    for (m, &kind) in models.iter().enumerate() {
        let target = match map.targets.get(m) {
            Some(t) => t.parse::<PolaritonLevel>().map_err(|e| Error::config("fidelity_map.targets", e.to_string()))?,
            None => base.target.ok_or_else(|| Error::config("model.target", "missing"))?,
        };
        let initial = if kind == cfg.model.kind && cfg.model.initial.is_some() {
            base.initial
        } else {
            match kind {
                CavityKind::Kerr => PolaritonLevel::Fock(0),
                CavityKind::JaynesCummings => PolaritonLevel::Ground,
            }
        };
        let mut points = Vec::new();
        for (k, &kappa) in map.kappa.iter().enumerate() {
            let n_cut = map.n_cut.get(k).copied().unwrap_or(cfg.model.n_cut);
            let ladder_dim = map.ladder_dim.get(k).copied().unwrap_or(cfg.electron.ladder_dim);
            let g = if map.pi_pulse {
                C64::from_polar(pi_pulse_coupling(kind, kappa, n_cut, target)?, cfg.electron.g_q_phase)
            } else {
                base.g_q
            };
            for &gamma in &map.gamma {
                let spec = PointSpec {
                    kind,
                    kappa,
                    n_cut,
                    ladder_dim,
                    g_q: g,
                    gamma,
                    initial,
                    target: Some(target),
                    ..base.clone()
                };
                points.push((kappa, gamma, spec));
            }
        }
        out.push((kind, target, points));
    }
    Ok(out)
}

/// Run the scenario without touching the file system.
pub fn execute(cfg: &ScenarioConfig, workers: usize) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.scenario {
        ScenarioKind::Evolve => Ok(Outcome::Single(Box::new(base_point(cfg)?.run()?))),
        kind if kind.is_sweep() => {
            let base = base_point(cfg)?;
            let values = &cfg.sweep.as_ref().expect("validated").values;
            let specs: Vec<PointSpec> = values.iter().map(|&v| sweep_spec(&base, kind, v, cfg.electron.g_q_phase)).collect();
            let results = parallel_map(&specs, workers, |s| s.run().map_err(|e| e.to_string()))?;
            let points = results
                .into_iter()
                .enumerate()
                .map(|(index, result)| PointResult {
                    index,
                    value: values[index],
                    result,
                })
                .collect();
            Ok(Outcome::Sweep(SweepResult { axis: kind.axis(), points }))
        }
        ScenarioKind::FidelityMap => {
            let base = base_point(cfg)?;
            let mut maps = Vec::new();
            for (model, target, points) in map_specs(cfg, &base)? {
                let results = parallel_map(&points, workers, |(_, _, s)| s.run().map_err(|e| e.to_string()))?;
                let entries = points
                    .iter()
                    .zip(results)
                    .map(|((kappa, gamma, _), result)| MapEntry {
                        kappa: *kappa,
                        gamma: *gamma,
                        result,
                    })
                    .collect();
                maps.push(FidelityMap { model, target, entries });
            }
            Ok(Outcome::FidelityMaps(maps))
        }
        ScenarioKind::Gates => {
            let ladder = LadderConfig::new(cfg.gates.ladder_dim, cfg.gates.center)?;
            Ok(Outcome::Gates(Box::new(identity_suite(ladder, cfg.gates.phase_corruption)?)))
        }
        ScenarioKind::Feasibility => {
            let report = match cfg.feasibility.bandwidth {
                Some(bw) => feasibility_from_ratios(bw, cfg.model.kappa, cfg.loss.gamma, cfg.electron.energy_spread, cfg.feasibility.margin)?,
                None => {
                    let base = base_point(cfg)?;
                    let model = build(cfg.model.kind, cfg.model.kappa, cfg.model.n_cut)?;
                    let ratio = base.velocity_ratio(&model)?;
                    let ladder = LadderConfig::centered(cfg.electron.ladder_dim)?;
                    let mut sys = SystemConfig::at_velocity_ratio(model, ladder, base.g_q, ratio, base.omega_t, base.gamma)?;
                    sys.de_over_e = cfg.electron.energy_spread;
                    feasibility_check(&sys, cfg.feasibility.margin)?
                }
            };
            Ok(Outcome::Feasibility(report))
        }
        _ => unreachable!("all scenario kinds handled"),
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<fs::File>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(fs::File::create(path)?)))
}

fn write_point(dir: &Path, data: &PointData) -> Result<()> {
    fs::create_dir_all(dir)?;
    data.eels.write_csv(BufWriter::new(fs::File::create(dir.join("eels.csv"))?), "sideband")?;
    data.stats.write_csv(BufWriter::new(fs::File::create(dir.join("stats.csv"))?), "level")?;
    let d = &data.diagnostics;
    let mut w = csv_writer(&dir.join("summary.csv"))?;
    w.write_record(["quantity", "value"])?;
    let rows: [(&str, String); 12] = [
        ("n_cut", data.n_cut.to_string()),
        ("ladder_dim", data.ladder_dim.to_string()),
        ("velocity_ratio", num(data.velocity_ratio)),
        ("target_probability", opt(data.target_probability)),
        ("fidelity", opt(data.fidelity)),
        ("steps", d.steps.to_string()),
        ("support", d.support.to_string()),
        ("trace_drift", num(d.trace_drift)),
        ("cutoff_population", num(d.cutoff_population)),
        ("wrap_population", num(d.wrap_population)),
        ("min_eigenvalue", num(d.min_eigenvalue)),
        ("halving_change", opt(d.halving_change)),
    ];
    for (k, v) in rows {
        w.write_record([k, v.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_sweep(dir: &Path, sweep: &SweepResult) -> Result<()> {
    let mut w = csv_writer(&dir.join("sweep.csv"))?;
    w.write_record([
        "point",
        sweep.axis,
        "converged",
        "n_cut",
        "ladder_dim",
        "target_probability",
        "fidelity",
        "trace_drift",
        "min_eigenvalue",
        "halving_change",
        "error",
    ])?;
    for p in &sweep.points {
        let row = match &p.result {
            Ok(d) => {
                write_point(&dir.join(format!("point_{:03}", p.index)), d)?;
                [
                    p.index.to_string(),
                    num(p.value),
                    "true".into(),
                    d.n_cut.to_string(),
                    d.ladder_dim.to_string(),
                    opt(d.target_probability),
                    opt(d.fidelity),
                    num(d.diagnostics.trace_drift),
                    num(d.diagnostics.min_eigenvalue),
                    opt(d.diagnostics.halving_change),
                    String::new(),
                ]
            }
            Err(msg) => {
                let mut row: [String; 11] = Default::default();
                row[0] = p.index.to_string();
                row[1] = num(p.value);
                row[2] = "false".into();
                row[10] = msg.clone();
                row
            }
        };
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_maps(dir: &Path, maps: &[FidelityMap]) -> Result<()> {
    for map in maps {
        let name = if maps.len() == 1 {
            "fidelity_map.csv".to_string()
        } else {
            format!("fidelity_map_{}.csv", map.model)
        };
        let mut w = csv_writer(&dir.join(name))?;
        w.write_record(["kappa_ratio", "gamma_ratio", "fidelity", "converged"])?;
        for e in &map.entries {
            let fid = e.result.as_ref().ok().and_then(|d| d.fidelity);
            w.write_record([num(e.kappa), num(e.gamma), opt(fid), e.result.is_ok().to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Write every artifact of `outcome` into `dir`, echoing the effective
/// config.
pub fn write_outputs(cfg: &ScenarioConfig, outcome: &Outcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("effective_config.json"), cfg.to_json())?;
    match outcome {
        Outcome::Single(data) => write_point(dir, data),
        Outcome::Sweep(sweep) => write_sweep(dir, sweep),
        Outcome::FidelityMaps(maps) => write_maps(dir, maps),
        Outcome::Gates(suite) => {
            let mut f = BufWriter::new(fs::File::create(dir.join("gates_report.txt"))?);
            write!(f, "{suite}")?;
            f.flush()?;
            Ok(())
        }
        Outcome::Feasibility(report) => {
            let mut f = BufWriter::new(fs::File::create(dir.join("feasibility.txt"))?);
            write!(f, "{report}")?;
            f.flush()?;
            Ok(())
        }
    }
}

/// Execute, write artifacts, and turn whole-run failures into errors: every
/// sweep or map point failing, or a failed gate identity.
pub fn run_scenario(cfg: &ScenarioConfig, dir: &Path, workers: usize) -> Result<Outcome> {
    let outcome = execute(cfg, workers)?;
    write_outputs(cfg, &outcome, dir)?;
    match &outcome {
        Outcome::Sweep(s) if s.points.iter().all(|p| !p.converged()) => {
            log::error!("first failure: {}", s.points[0].result.as_ref().err().map_or("", String::as_str));
            return Err(Error::AllPointsFailed(s.points.len()));
        }
        Outcome::FidelityMaps(maps) => {
            let total: usize = maps.iter().map(|m| m.entries.len()).sum();
            if maps.iter().all(|m| m.entries.iter().all(|e| e.result.is_err())) {
                return Err(Error::AllPointsFailed(total));
            }
        }
        Outcome::Gates(suite) if !suite.pass() => return Err(Error::GateIdentity(suite.failures().join(", "))),
        _ => {}
    }
    Ok(outcome)
}
