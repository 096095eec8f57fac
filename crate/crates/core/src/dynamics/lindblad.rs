//! Fixed-step RK4 integration of
//! dρ/dt = −i[H(t), ρ] + γ(aρa† − ½{a†a, ρ}).
//!
//! The Liouvillian is compiled on the support of ρ: the closure of the
//! initial nonzero entries under the sparsity patterns of H, a†a and the
//! jump map. Entries outside that set have zero derivative for all time, so
//! dropping them is exact. Excitation number (ladder rung + photons, plus
//! the emitter for JC) is conserved by H and lowered by one per jump, which
//! keeps the support a small fraction of the dense D·d × D·d matrix.

use std::collections::VecDeque;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::sparse::Csr;
use super::SystemConfig;
use super::IntegratorConfig;
use crate::cavity::{polariton_eigenbasis, CavityKind};
use crate::ladder::build_ladder;
use crate::linalg::{eigh, hermitian_eigenvalues};
use crate::tensor::{DensityMatrix, Operator, StateVector, TensorSpace};
use crate::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const UNSET: u32 = u32::MAX;

/// Generator with H(t) = H_s + c(t)B + c(t)*B†, c(t) = c₀e^{iΔt}, and one
/// jump operator J at rate γ.
#[derive(Clone, Debug)]
pub struct MasterEquation {
    space: TensorSpace,
    h_static: Csr,
    coupling: Csr,
    jump: Csr,
    gamma: f64,
    amplitude: C64,
    delta: f64,
}

struct Compiled {
    pairs: Vec<(usize, usize)>,
    transpose: Vec<usize>,
    l0: Csr,
    lb: Csr,
    lbd: Csr,
}

impl MasterEquation {
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        let b = Csr::from_dense(build_ladder(&cfg.ladder)?.matrix());
        let a = Csr::from_dense(cfg.model.a().matrix());
        let h = Csr::from_dense(cfg.model.h_nl().matrix());
        let id = Csr::identity(cfg.ladder.dim);
        Ok(Self {
            space: cfg.space(),
            h_static: id.kron(&h),
            coupling: b.adjoint().kron(&a),
            jump: id.kron(&a),
            gamma: cfg.gamma,
            amplitude: C64::new(0.0, 1.0) * cfg.g_q / cfg.t,
            delta: cfg.delta,
        })
    }

    /// Build from explicit operators on a common space.
    pub fn from_operators(
        h_static: &Operator,
        coupling: &Operator,
        jump: &Operator,
        gamma: f64,
        amplitude: C64,
        delta: f64,
    ) -> Result<Self> {
        for op in [coupling, jump] {
            if op.space() != h_static.space() {
                return Err(Error::SpaceMismatch {
                    left: h_static.space().to_string(),
                    right: op.space().to_string(),
                });
            }
        }
        Ok(Self {
            space: h_static.space().clone(),
            h_static: Csr::from_dense(h_static.matrix()),
            coupling: Csr::from_dense(coupling.matrix()),
            jump: Csr::from_dense(jump.matrix()),
            gamma,
            amplitude,
            delta,
        })
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    fn coefficient(&self, t: f64) -> C64 {
        self.amplitude * C64::from_polar(1.0, self.delta * t)
    }

    fn has_drive(&self) -> bool {
        self.amplitude != ZERO && self.coupling.nnz() > 0
    }

    fn has_loss(&self) -> bool {
        self.gamma > 0.0 && self.jump.nnz() > 0
    }

    fn compile(&self, rho0: &Array2<C64>) -> Compiled {
        let n = self.space.dim();
        let b_adj = self.coupling.adjoint();
        let number = self.jump.adjoint().matmul(&self.jump);

        // union pattern of everything acting from the left or right
        let mut pattern = self.h_static.clone();
        if self.has_drive() {
            pattern = pattern.add(&self.coupling).add(&b_adj);
        }
        if self.has_loss() {
            pattern = pattern.add(&number);
        }
        let pattern_t = pattern.transpose();
        let jump_t = self.jump.transpose();

        let mut index = vec![UNSET; n * n];
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut queue = VecDeque::new();
        let visit = |i: usize, j: usize, index: &mut Vec<u32>, pairs: &mut Vec<(usize, usize)>, queue: &mut VecDeque<(usize, usize)>| {
            for (p, q) in [(i, j), (j, i)] {
                if index[p * n + q] == UNSET {
                    index[p * n + q] = pairs.len() as u32;
                    pairs.push((p, q));
                    queue.push_back((p, q));
                }
            }
        };
        for ((i, j), v) in rho0.indexed_iter() {
            if *v != ZERO {
                visit(i, j, &mut index, &mut pairs, &mut queue);
            }
        }
        while let Some((m, l)) = queue.pop_front() {
            for (k, _) in pattern_t.row(m) {
                visit(k, l, &mut index, &mut pairs, &mut queue);
            }
            for (k, _) in pattern.row(l) {
                visit(m, k, &mut index, &mut pairs, &mut queue);
            }
            if self.has_loss() {
                for (k, _) in jump_t.row(m) {
                    for (p, _) in jump_t.row(l) {
                        visit(k, p, &mut index, &mut pairs, &mut queue);
                    }
                }
            }
        }
        let lookup = |i: usize, j: usize| -> Option<usize> {
            let v = index[i * n + j];
            (v != UNSET).then_some(v as usize)
        };

        let minus_i = C64::new(0.0, -1.0);
        let commutator = |op: &Csr, op_t: &Csr, k: usize, l: usize, row: &mut Vec<(usize, C64)>| {
            for (m, x) in op.row(k) {
                if let Some(c) = lookup(m, l) {
                    row.push((c, minus_i * x));
                }
            }
            for (m, x) in op_t.row(l) {
                if let Some(c) = lookup(k, m) {
                    row.push((c, -minus_i * x));
                }
            }
        };

        let h_t = self.h_static.transpose();
        let b_t = self.coupling.transpose();
        let bd_t = b_adj.transpose();
        let number_t = number.transpose();
        let half_gamma = C64::new(-0.5 * self.gamma, 0.0);
        let size = pairs.len();
        let mut rows0 = Vec::with_capacity(size);
        let mut rows_b = Vec::with_capacity(size);
        let mut rows_bd = Vec::with_capacity(size);
        for &(k, l) in &pairs {
            let mut row = Vec::new();
            commutator(&self.h_static, &h_t, k, l, &mut row);
            if self.has_loss() {
                for (m, x) in number.row(k) {
                    if let Some(c) = lookup(m, l) {
                        row.push((c, half_gamma * x));
                    }
                }
                for (m, x) in number_t.row(l) {
                    if let Some(c) = lookup(k, m) {
                        row.push((c, half_gamma * x));
                    }
                }
                for (m, x) in self.jump.row(k) {
                    for (q, y) in self.jump.row(l) {
                        if let Some(c) = lookup(m, q) {
                            row.push((c, x * y.conj() * self.gamma));
                        }
                    }
                }
            }
            rows0.push(row);
            let mut rb = Vec::new();
            let mut rbd = Vec::new();
            if self.has_drive() {
                commutator(&self.coupling, &b_t, k, l, &mut rb);
                commutator(&b_adj, &bd_t, k, l, &mut rbd);
            }
            rows_b.push(rb);
            rows_bd.push(rbd);
        }
        let transpose = pairs.iter().map(|&(i, j)| lookup(j, i).expect("support is transpose-closed")).collect();
        Compiled {
            transpose,
            l0: Csr::from_rows(size, rows0),
            lb: Csr::from_rows(size, rows_b),
            lbd: Csr::from_rows(size, rows_bd),
            pairs,
        }
    }

    /// Number of density-matrix entries the compiled generator acts on.
    pub fn support_size(&self, rho0: &DensityMatrix) -> usize {
        self.compile(rho0.matrix()).pairs.len()
    }

    /// ρ(t_final) after `steps` RK4 steps from ρ(0) = `rho0`. Hermiticity is
    /// restored after every step; no other invariant is enforced.
    pub fn propagate(&self, rho0: &DensityMatrix, t_final: f64, steps: usize) -> Result<DensityMatrix> {
        if rho0.space() != &self.space {
            return Err(Error::SpaceMismatch {
                left: rho0.space().to_string(),
                right: self.space.to_string(),
            });
        }
        if steps == 0 {
            return Err(Error::InvalidParameter("step count must be positive".into()));
        }
        let c = self.compile(rho0.matrix());
        let size = c.pairs.len();
        let mut x: Vec<C64> = c.pairs.iter().map(|&(i, j)| rho0.matrix()[[i, j]]).collect();
        let mut k1 = vec![ZERO; size];
        let mut k2 = vec![ZERO; size];
        let mut k3 = vec![ZERO; size];
        let mut k4 = vec![ZERO; size];
        let mut tmp = vec![ZERO; size];
        let dt = t_final / steps as f64;

        let rhs = |t: f64, x: &[C64], out: &mut [C64]| {
            let cf = self.coefficient(t);
            let cb = cf.conj();
            for (r, o) in out.iter_mut().enumerate() {
                let mut acc = ZERO;
                for k in c.l0.indptr[r]..c.l0.indptr[r + 1] {
                    acc += c.l0.values[k] * x[c.l0.indices[k]];
                }
                let mut ab = ZERO;
                for k in c.lb.indptr[r]..c.lb.indptr[r + 1] {
                    ab += c.lb.values[k] * x[c.lb.indices[k]];
                }
                let mut abd = ZERO;
                for k in c.lbd.indptr[r]..c.lbd.indptr[r + 1] {
                    abd += c.lbd.values[k] * x[c.lbd.indices[k]];
                }
                *o = acc + cf * ab + cb * abd;
            }
        };

        for step in 0..steps {
            let t = step as f64 * dt;
            rhs(t, &x, &mut k1);
            for r in 0..size {
                tmp[r] = x[r] + k1[r] * (0.5 * dt);
            }
            rhs(t + 0.5 * dt, &tmp, &mut k2);
            for r in 0..size {
                tmp[r] = x[r] + k2[r] * (0.5 * dt);
            }
            rhs(t + 0.5 * dt, &tmp, &mut k3);
            for r in 0..size {
                tmp[r] = x[r] + k3[r] * dt;
            }
            rhs(t + dt, &tmp, &mut k4);
            for r in 0..size {
                x[r] += (k1[r] + (k2[r] + k3[r]) * 2.0 + k4[r]) * (dt / 6.0);
            }
            for r in 0..size {
                let s = c.transpose[r];
                if s > r {
                    let avg = (x[r] + x[s].conj()) * 0.5;
                    x[r] = avg;
                    x[s] = avg.conj();
                } else if s == r {
                    x[r].im = 0.0;
                }
            }
        }

        let n = self.space.dim();
        let mut mat = Array2::zeros((n, n));
        for (&(i, j), v) in c.pairs.iter().zip(&x) {
            mat[[i, j]] = *v;
        }
        DensityMatrix::from_matrix_unchecked(self.space.clone(), mat)
    }
}

/// Integrator health numbers for one evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub steps: usize,
    pub support: usize,
    pub trace_drift: f64,
    pub cutoff_population: f64,
    pub wrap_population: f64,
    pub min_eigenvalue: f64,
    /// Largest change of a reported probability between n and 2n steps.
    pub halving_change: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub rho: DensityMatrix,
    pub diagnostics: Diagnostics,
}

/// ρ0 = |l0⟩⟨l0| ⊗ |ψ⟩⟨ψ| for a cavity state ψ.
pub fn initial_state(cfg: &SystemConfig, cavity: &StateVector) -> Result<DensityMatrix> {
    let rung = StateVector::basis(&cfg.ladder.space(), cfg.ladder.center)?;
    Ok(rung.kron(cavity)?.projector())
}

/// Fastest rate in the problem: |Δ|, the spectral radius of H_nl, and the
/// coupling scale |g_Q|√N/T.
fn fastest_rate(cfg: &SystemConfig) -> f64 {
    let (vals, _) = eigh(cfg.model.h_nl().matrix());
    let radius = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let drive = cfg.g_q.norm() * (cfg.model.n_cut as f64).sqrt() / cfg.t;
    cfg.delta.abs().max(radius).max(drive)
}

/// Ladder populations followed by polariton populations.
pub(crate) fn reported_probabilities(rho: &Array2<C64>, cfg: &SystemConfig) -> Vec<f64> {
    let dc = cfg.model.space().dim();
    let d = cfg.ladder.dim;
    let mut out: Vec<f64> = (0..d)
        .map(|l| (0..dc).map(|c| rho[[l * dc + c, l * dc + c]].re).sum())
        .collect();
    let mut cav = Array2::<C64>::zeros((dc, dc));
    for l in 0..d {
        for a in 0..dc {
            for b in 0..dc {
                cav[[a, b]] += rho[[l * dc + a, l * dc + b]];
            }
        }
    }
    let basis = polariton_eigenbasis(&cfg.model);
    let u = basis.unitary().matrix();
    let pol = u.t().mapv(|z| z.conj()).dot(&cav).dot(u);
    out.extend((0..dc).map(|k| pol[[k, k]].re));
    out
}

fn check(rho: &DensityMatrix, cfg: &SystemConfig, icfg: &IntegratorConfig, steps: usize, support: usize) -> Result<Diagnostics> {
    let m = rho.matrix();
    let space = rho.space();
    let dc = cfg.model.space().dim();
    let per_photon = match cfg.model.kind {
        CavityKind::Kerr => 1,
        CavityKind::JaynesCummings => 2,
    };
    let n_cut = cfg.model.n_cut;
    let guard = cfg.ladder.guard_rungs();
    let mut cutoff = 0.0;
    let mut wrap = 0.0;
    for i in 0..space.dim() {
        let (rung, c) = (i / dc, i % dc);
        let p = m[[i, i]].re;
        if c / per_photon + 1 >= n_cut {
            cutoff += p;
        }
        if guard.contains(&rung) {
            wrap += p;
        }
    }
    let drift = (rho.trace() - C64::new(1.0, 0.0)).norm();
    let min_eig = hermitian_eigenvalues(m).first().copied().unwrap_or(0.0);
    let diag = Diagnostics {
        steps,
        support,
        trace_drift: drift,
        cutoff_population: cutoff,
        wrap_population: wrap,
        min_eigenvalue: min_eig,
        halving_change: None,
    };
    if drift > icfg.trace_drift_bound {
        return Err(Error::TraceDrift {
            drift,
            bound: icfg.trace_drift_bound,
        });
    }
    if cutoff > icfg.cutoff_bound {
        return Err(Error::CutoffViolation {
            population: cutoff,
            bound: icfg.cutoff_bound,
        });
    }
    if wrap > icfg.wrap_bound {
        return Err(Error::WrapAround {
            population: wrap,
            bound: icfg.wrap_bound,
        });
    }
    if min_eig < -icfg.positivity_bound {
        return Err(Error::Positivity {
            eigenvalue: min_eig,
            bound: icfg.positivity_bound,
        });
    }
    Ok(diag)
}

/// Propagate ρ0 over [0, T] and enforce the integrator gates: trace drift,
/// cutoff headroom, ladder wrap-around, positivity and (optionally) the
/// step-halving bound. With halving enabled the finer run is returned.
pub fn evolve_lindblad(rho0: &DensityMatrix, cfg: &SystemConfig, icfg: &IntegratorConfig) -> Result<Evolution> {
    cfg.validate()?;
    icfg.validate()?;
    let eq = MasterEquation::from_config(cfg)?;
    let steps = icfg.steps_for(cfg.t, fastest_rate(cfg));
    let coarse = eq.propagate(rho0, cfg.t, steps)?;
    let support = eq.support_size(rho0);
    if !icfg.check_halving {
        let diagnostics = check(&coarse, cfg, icfg, steps, support)?;
        log::debug!("evolved {steps} steps on {support} entries: {diagnostics:?}");
        return Ok(Evolution {
            rho: coarse,
            diagnostics,
        });
    }
    let fine = eq.propagate(rho0, cfg.t, 2 * steps)?;
    let mut diagnostics = check(&fine, cfg, icfg, 2 * steps, support)?;
    let a = reported_probabilities(coarse.matrix(), cfg);
    let b = reported_probabilities(fine.matrix(), cfg);
    let change = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diagnostics.halving_change = Some(change);
    if change > icfg.halving_bound {
        return Err(Error::NotConverged {
            change,
            bound: icfg.halving_bound,
        });
    }
    log::debug!("evolved {} steps on {support} entries: {diagnostics:?}", 2 * steps);
    Ok(Evolution { rho: fine, diagnostics })
}
