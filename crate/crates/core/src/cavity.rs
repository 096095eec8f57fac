//! Kerr and Jaynes-Cummings cavity models, their polariton eigenbases and
//! level frequencies (ω = 1).

use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::tensor::{embed, kron, Operator, StateVector, TensorSpace};
use crate::{Error, Result, CAVITY, EMITTER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CavityKind {
    Kerr,
    #[serde(rename = "jc")]
    JaynesCummings,
}

impl fmt::Display for CavityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CavityKind::Kerr => write!(f, "kerr"),
            CavityKind::JaynesCummings => write!(f, "jc"),
        }
    }
}

/// A nonlinear cavity: bare operators, the nonlinear Hamiltonian H_nl and
/// the non-interacting part H_p + H_matt.
#[derive(Clone, Debug)]
pub struct CavityModel {
    pub kind: CavityKind,
    pub kappa: f64,
    pub n_cut: usize,
    space: TensorSpace,
    a: Operator,
    h_nl: Operator,
    h_bare: Operator,
    sigma_plus: Option<Operator>,
    sigma_z: Option<Operator>,
}

fn lowering(n_cut: usize) -> Result<Operator> {
    let space = TensorSpace::single(CAVITY, n_cut + 1)?;
    Ok(Operator::from_fn(&space, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

fn check_params(kappa: f64, n_cut: usize) -> Result<()> {
    if n_cut < 2 {
        return Err(Error::InvalidParameter(format!(
            "photon cutoff n_cut = {n_cut}; need at least 2"
        )));
    }
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::InvalidParameter(format!("kappa = {kappa} must be finite and ≥ 0")));
    }
    Ok(())
}

/// Kerr cavity: H_nl = κ a†a†aa on a Fock space truncated at `n_cut`.
pub fn build_kerr(kappa: f64, n_cut: usize) -> Result<CavityModel> {
    check_params(kappa, n_cut)?;
    let a = lowering(n_cut)?;
    let space = a.space().clone();
    let h_nl = Operator::from_fn(&space, |i, j| {
        if i == j {
            C64::new(kappa * (i * i.saturating_sub(1)) as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let h_bare = Operator::from_fn(&space, |i, j| {
        if i == j {
            C64::new(i as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(CavityModel {
        kind: CavityKind::Kerr,
        kappa,
        n_cut,
        space,
        a,
        h_nl,
        h_bare,
        sigma_plus: None,
        sigma_z: None,
    })
}

/// Jaynes-Cummings cavity with a resonant two-level emitter:
/// H_nl = κ(σ₊a + σ₋a†), H_p + H_matt = a†a + σ_z/2. Emitter basis is (g, e).
pub fn build_jc(kappa: f64, n_cut: usize) -> Result<CavityModel> {
    check_params(kappa, n_cut)?;
    let space = TensorSpace::new([(CAVITY, n_cut + 1), (EMITTER, 2)])?;
    let emitter = TensorSpace::single(EMITTER, 2)?;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let sp_local = Operator::from_fn(&emitter, |i, j| if i == 1 && j == 0 { one } else { zero });
    let sz_local = Operator::from_fn(&emitter, |i, j| match (i, j) {
        (0, 0) => -one,
        (1, 1) => one,
        _ => zero,
    });
    let a = embed(&lowering(n_cut)?, CAVITY, &space)?;
    let sp = embed(&sp_local, EMITTER, &space)?;
    let sz = embed(&sz_local, EMITTER, &space)?;
    let sm = sp.adjoint();
    let coupling = &(&sp * &a) + &(&sm * &a.adjoint());
    let h_nl = coupling.scale(C64::new(kappa, 0.0));
    let h_bare = &(&a.adjoint() * &a) + &sz.scale(C64::new(0.5, 0.0));
    Ok(CavityModel {
        kind: CavityKind::JaynesCummings,
        kappa,
        n_cut,
        space,
        a,
        h_nl,
        h_bare,
        sigma_plus: Some(sp),
        sigma_z: Some(sz),
    })
}

pub fn build(kind: CavityKind, kappa: f64, n_cut: usize) -> Result<CavityModel> {
    match kind {
        CavityKind::Kerr => build_kerr(kappa, n_cut),
        CavityKind::JaynesCummings => build_jc(kappa, n_cut),
    }
}

impl CavityModel {
    /// The cavity space: `cav` for Kerr, `cav ⊗ emitter` for JC.
    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    /// Photon lowering operator on the cavity space.
    pub fn a(&self) -> &Operator {
        &self.a
    }

    pub fn h_nl(&self) -> &Operator {
        &self.h_nl
    }

    /// H_p + H_matt.
    pub fn h_bare(&self) -> &Operator {
        &self.h_bare
    }

    pub fn sigma_plus(&self) -> Option<&Operator> {
        self.sigma_plus.as_ref()
    }

    pub fn sigma_minus(&self) -> Option<Operator> {
        self.sigma_plus.as_ref().map(Operator::adjoint)
    }

    pub fn sigma_z(&self) -> Option<&Operator> {
        self.sigma_z.as_ref()
    }

    /// Total excitation number a†a (+ σ₊σ₋ for JC).
    pub fn excitation_number(&self) -> Operator {
        let n = &self.a.adjoint() * &self.a;
        match &self.sigma_plus {
            Some(sp) => &n + &(sp * &sp.adjoint()),
            None => n,
        }
    }

    pub fn labels(&self) -> Vec<&str> {
        self.space.labels().collect()
    }
}

/// Polariton level label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolaritonLevel {
    /// Kerr Fock level |n⟩.
    Fock(usize),
    /// JC ground state |0*⟩ = |0, g⟩.
    Ground,
    /// JC upper polariton |n+⟩.
    Upper(usize),
    /// JC lower polariton |n−⟩.
    Lower(usize),
    /// JC |N, e⟩, left uncoupled by the photon cutoff.
    Truncated,
}

impl fmt::Display for PolaritonLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolaritonLevel::Fock(n) => write!(f, "{n}"),
            PolaritonLevel::Ground => write!(f, "0*"),
            PolaritonLevel::Upper(n) => write!(f, "{n}+"),
            PolaritonLevel::Lower(n) => write!(f, "{n}-"),
            PolaritonLevel::Truncated => write!(f, "trunc"),
        }
    }
}

impl FromStr for PolaritonLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::UnknownLevel(s.to_string());
        if s == "0*" {
            return Ok(PolaritonLevel::Ground);
        }
        if s == "trunc" {
            return Ok(PolaritonLevel::Truncated);
        }
        if let Some(n) = s.strip_suffix('+') {
            let n: usize = n.parse().map_err(|_| bad())?;
            return if n == 0 { Err(bad()) } else { Ok(PolaritonLevel::Upper(n)) };
        }
        if let Some(n) = s.strip_suffix('-') {
            let n: usize = n.parse().map_err(|_| bad())?;
            return if n == 0 { Err(bad()) } else { Ok(PolaritonLevel::Lower(n)) };
        }
        s.parse().map(PolaritonLevel::Fock).map_err(|_| bad())
    }
}

impl Serialize for PolaritonLevel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PolaritonLevel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Polariton eigenbasis: `unitary` has the eigenvectors (in the bare basis)
/// as columns, in the order of `levels`.
#[derive(Clone, Debug)]
pub struct PolaritonBasis {
    pub kind: CavityKind,
    unitary: Operator,
    levels: Vec<(PolaritonLevel, f64)>,
}

impl PolaritonBasis {
    pub fn unitary(&self) -> &Operator {
        &self.unitary
    }

    /// (label, frequency relative to the ground level)
    pub fn levels(&self) -> &[(PolaritonLevel, f64)] {
        &self.levels
    }

    pub fn index_of(&self, level: PolaritonLevel) -> Result<usize> {
        self.levels
            .iter()
            .position(|(l, _)| *l == level)
            .ok_or_else(|| Error::UnknownLevel(level.to_string()))
    }

    pub fn frequency(&self, level: PolaritonLevel) -> Result<f64> {
        Ok(self.levels[self.index_of(level)?].1)
    }

    /// Eigenvector of `level` as a state on the cavity space.
    pub fn vector(&self, level: PolaritonLevel) -> Result<StateVector> {
        let k = self.index_of(level)?;
        let col = self.unitary.matrix().column(k).to_owned();
        StateVector::new(self.unitary.space().clone(), col)
    }

    pub fn space(&self) -> &TensorSpace {
        self.unitary.space()
    }
}

/// Change of basis to the polariton eigenstates. Kerr: identity (Fock states
/// are eigenstates). JC: |0*⟩ = |0,g⟩ and |n±⟩ = (|n,g⟩ ± |n−1,e⟩)/√2 with a
/// positive real |n,g⟩ coefficient; the uncoupled |N,e⟩ closes the basis.
pub fn polariton_eigenbasis(model: &CavityModel) -> PolaritonBasis {
    let n_cut = model.n_cut;
    let kappa = model.kappa;
    match model.kind {
        CavityKind::Kerr => PolaritonBasis {
            kind: model.kind,
            unitary: Operator::identity(model.space()),
            levels: (0..=n_cut)
                .map(|n| {
                    let nf = n as f64;
                    (PolaritonLevel::Fock(n), nf + nf * (nf - 1.0) * kappa)
                })
                .collect(),
        },
        CavityKind::JaynesCummings => {
            let space = model.space().clone();
            let d = space.dim();
            let idx = |n: usize, s: usize| n * 2 + s;
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut columns: Vec<(PolaritonLevel, f64, Vec<(usize, f64)>)> = Vec::with_capacity(d);
            columns.push((PolaritonLevel::Ground, 0.0, vec![(idx(0, 0), 1.0)]));
            for n in 1..=n_cut {
                let nf = n as f64;
                let split = nf.sqrt() * kappa;
                columns.push((PolaritonLevel::Lower(n), nf - split, vec![(idx(n, 0), h), (idx(n - 1, 1), -h)]));
                columns.push((PolaritonLevel::Upper(n), nf + split, vec![(idx(n, 0), h), (idx(n - 1, 1), h)]));
            }
            columns.push((PolaritonLevel::Truncated, (n_cut + 1) as f64, vec![(idx(n_cut, 1), 1.0)]));
            let mut mat = ndarray::Array2::<C64>::zeros((d, d));
            let mut levels = Vec::with_capacity(d);
            for (k, (level, freq, entries)) in columns.into_iter().enumerate() {
                for (row, v) in entries {
                    mat[[row, k]] = C64::new(v, 0.0);
                }
                levels.push((level, freq));
            }
            PolaritonBasis {
                kind: model.kind,
                unitary: Operator::new(space, mat).expect("basis shape"),
                levels,
            }
        }
    }
}

/// Same-branch predecessor of a level (|n⟩ → |n−1⟩, |1±⟩ → |0*⟩,
/// |n±⟩ → |(n−1)±⟩).
pub fn predecessor(model: &CavityModel, level: PolaritonLevel) -> Result<PolaritonLevel> {
    let bad = || Error::UnknownLevel(level.to_string());
    match (model.kind, level) {
        (CavityKind::Kerr, PolaritonLevel::Fock(n)) if n >= 1 && n <= model.n_cut => Ok(PolaritonLevel::Fock(n - 1)),
        (CavityKind::JaynesCummings, PolaritonLevel::Upper(1) | PolaritonLevel::Lower(1)) => Ok(PolaritonLevel::Ground),
        (CavityKind::JaynesCummings, PolaritonLevel::Upper(n)) if n <= model.n_cut => Ok(PolaritonLevel::Upper(n - 1)),
        (CavityKind::JaynesCummings, PolaritonLevel::Lower(n)) if n <= model.n_cut => Ok(PolaritonLevel::Lower(n - 1)),
        _ => Err(bad()),
    }
}

/// ω_n − ω_{n−1} for the transition ending in `upper`:
/// Kerr 1 + 2(n−1)κ, JC 1 ± (√n − √(n−1))κ.
pub fn transition_frequency(model: &CavityModel, upper: PolaritonLevel) -> Result<f64> {
    predecessor(model, upper)?;
    let k = model.kappa;
    Ok(match upper {
        PolaritonLevel::Fock(n) => 1.0 + 2.0 * (n as f64 - 1.0) * k,
        PolaritonLevel::Upper(n) => 1.0 + ((n as f64).sqrt() - (n as f64 - 1.0).sqrt()) * k,
        PolaritonLevel::Lower(n) => 1.0 - ((n as f64).sqrt() - (n as f64 - 1.0).sqrt()) * k,
        _ => unreachable!("predecessor() rejects levels without a transition"),
    })
}

/// Detuning Δ = q₀v − ω that phase-matches the electron to the transition
/// ending in `upper`.
pub fn phase_matching_detuning(model: &CavityModel, upper: PolaritonLevel) -> Result<f64> {
    Ok(transition_frequency(model, upper)? - 1.0)
}

/// The JC factors f_{n±} = √(n+1) ± √n.
pub fn jc_transition_factors(n: usize) -> (f64, f64) {
    let a = ((n + 1) as f64).sqrt();
    let b = (n as f64).sqrt();
    (a + b, a - b)
}

/// ⟨lower| a |upper⟩: the photon-lowering matrix element that sets the
/// electron–polariton Rabi angle of a transition (1 for Kerr |0⟩↔|1⟩,
/// 1/√2 for JC |0*⟩↔|1±⟩).
pub fn lowering_element(model: &CavityModel, basis: &PolaritonBasis, lower: PolaritonLevel, upper: PolaritonLevel) -> Result<C64> {
    let lo = basis.vector(lower)?;
    let up = basis.vector(upper)?;
    lo.inner(&model.a().apply(&up)?)
}

/// Bare basis state |n⟩ (Kerr) or |n, g/e⟩ (JC).
pub fn bare_state(model: &CavityModel, photons: usize, excited: bool) -> Result<StateVector> {
    if photons > model.n_cut {
        return Err(Error::InvalidParameter(format!(
            "photon number {photons} above cutoff {}",
            model.n_cut
        )));
    }
    let index = match model.kind {
        CavityKind::Kerr => {
            if excited {
                return Err(Error::InvalidParameter("Kerr model has no emitter".into()));
            }
            photons
        }
        CavityKind::JaynesCummings => photons * 2 + usize::from(excited),
    };
    StateVector::basis(model.space(), index)
}

/// Projector onto photon number `n` on the cavity space.
pub fn photon_number_projector(model: &CavityModel, n: usize) -> Result<Operator> {
    let cav = TensorSpace::single(CAVITY, model.n_cut + 1)?;
    let mut diag = Array1::<C64>::zeros(model.n_cut + 1);
    if n > model.n_cut {
        return Err(Error::InvalidParameter(format!("photon number {n} above cutoff")));
    }
    diag[n] = C64::new(1.0, 0.0);
    let p = Operator::new(cav, ndarray::Array2::from_diag(&diag))?;
    match model.kind {
        CavityKind::Kerr => Ok(p),
        CavityKind::JaynesCummings => kron(&p, &Operator::identity(&TensorSpace::single(EMITTER, 2)?)),
    }
}
