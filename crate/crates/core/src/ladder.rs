//! The free-electron energy ladder.
//!
//! Rungs are energies E + (l − l0)ħω₀, l = 0..D. The ladder is cyclic: the
//! lowering operator b|l⟩ = |l − 1 mod D⟩ is a permutation, so bb† = b†b = 1
//! holds exactly and comb states are exact eigenvectors of b. Dynamical runs
//! guard the wrap-around rungs instead of truncating the ladder.

use std::f64::consts::PI;
use std::path::Path;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::tensor::{Operator, StateVector, TensorSpace};
use crate::{Error, Result, LADDER};

/// Electron rest energy in keV.
pub const ELECTRON_REST_KEV: f64 = 510.999;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    /// Number of rungs D.
    pub dim: usize,
    /// Rung index l0 of the initial electron energy.
    pub center: usize,
    /// Sideband quantum ħω₀ in units of ħω.
    pub omega0: f64,
}

impl LadderConfig {
    pub fn new(dim: usize, center: usize) -> Result<Self> {
        let cfg = Self {
            dim,
            center,
            omega0: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// D rungs centred at ⌊D/2⌋.
    pub fn centered(dim: usize) -> Result<Self> {
        Self::new(dim, dim / 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(Error::InvalidParameter(format!(
                "ladder dimension {} < 3",
                self.dim
            )));
        }
        if self.center >= self.dim {
            return Err(Error::InvalidParameter(format!(
                "ladder centre {} outside 0..{}",
                self.center, self.dim
            )));
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(Error::InvalidParameter("sideband quantum must be positive".into()));
        }
        Ok(())
    }

    pub fn space(&self) -> TensorSpace {
        TensorSpace::single(LADDER, self.dim).expect("valid ladder")
    }

    /// Sideband index l − l0 of rung `l`.
    pub fn sideband(&self, rung: usize) -> i64 {
        rung as i64 - self.center as i64
    }

    /// Rungs within two of the wrap-around point (between D−1 and 0).
    pub fn guard_rungs(&self) -> [usize; 4] {
        [0, 1, self.dim - 2, self.dim - 1]
    }

    /// True when φ lies on the grid 2πm/D, where comb(φ) is an exact
    /// eigenvector of the cyclic b.
    pub fn comb_phase_is_exact(&self, phi: f64) -> bool {
        let m = phi * self.dim as f64 / (2.0 * PI);
        (m - m.round()).abs() < 1e-9
    }
}

/// The cyclic lowering operator b|l⟩ = |l − 1 mod D⟩.
pub fn build_ladder(cfg: &LadderConfig) -> Result<Operator> {
    cfg.validate()?;
    let d = cfg.dim;
    Ok(Operator::from_fn(&cfg.space(), |i, j| {
        if i == (j + d - 1) % d {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// |l⟩ on the ladder.
pub fn rung_state(cfg: &LadderConfig, rung: usize) -> Result<StateVector> {
    StateVector::basis(&cfg.space(), rung)
}

/// comb(φ) = Σ_l e^{i(l − l0)φ}|l⟩ / √D.
pub fn comb_state(phi: f64, cfg: &LadderConfig) -> Result<StateVector> {
    cfg.validate()?;
    let norm = 1.0 / (cfg.dim as f64).sqrt();
    let amps = Array1::from_shape_fn(cfg.dim, |l| C64::from_polar(norm, cfg.sideband(l) as f64 * phi));
    StateVector::normalized(cfg.space(), amps)
}

/// β = v/c of an electron with kinetic energy `kev`.
pub fn energy_to_velocity(kev: f64) -> Result<f64> {
    if !(kev >= 0.0) || !kev.is_finite() {
        return Err(Error::InvalidParameter(format!("kinetic energy {kev} keV must be ≥ 0")));
    }
    let gamma = 1.0 + kev / ELECTRON_REST_KEV;
    Ok((1.0 - 1.0 / (gamma * gamma)).sqrt())
}

/// Sampled longitudinal field envelope E_z(r_T, z) along the cavity.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeSamples {
    positions: Vec<f64>,
    field: Vec<C64>,
    /// The scalar (e v / ħω) in front of the integral.
    pub prefactor: f64,
}

impl EnvelopeSamples {
    pub fn new(positions: Vec<f64>, field: Vec<C64>, prefactor: f64) -> Result<Self> {
        if positions.len() != field.len() {
            return Err(Error::DimensionMismatch {
                expected: positions.len(),
                found: field.len(),
            });
        }
        if positions.len() < 2 {
            return Err(Error::InvalidParameter(
                "envelope needs at least 2 samples".into(),
            ));
        }
        if positions.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "envelope positions must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            positions,
            field,
            prefactor,
        })
    }

    /// Sample `f` at `n` evenly spaced points on [0, length].
    pub fn from_fn(length: f64, n: usize, prefactor: f64, f: impl Fn(f64) -> C64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("envelope needs at least 2 samples".into()));
        }
        let positions: Vec<f64> = (0..n).map(|i| length * i as f64 / (n - 1) as f64).collect();
        let field = positions.iter().map(|&z| f(z)).collect();
        Self::new(positions, field, prefactor)
    }

    /// Read `z, re, im` rows (an optional header row is skipped).
    pub fn from_csv(path: impl AsRef<Path>, prefactor: f64) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut positions = Vec::new();
        let mut field = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(v) if v.len() == 3 => {
                    positions.push(v[0]);
                    field.push(C64::new(v[1], v[2]));
                }
                Err(_) if row == 0 => continue,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "envelope row {} is not `z, re, im`",
                        row + 1
                    )))
                }
            }
        }
        Self::new(positions, field, prefactor)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn field(&self) -> &[C64] {
        &self.field
    }
}

/// g_q = prefactor · ∫ e^{−iqz} E_z(z) dz by the trapezoidal rule.
pub fn coupling_from_envelope(env: &EnvelopeSamples, q: f64) -> C64 {
    let integrand = |k: usize| env.field[k] * C64::from_polar(1.0, -q * env.positions[k]);
    let mut acc = C64::new(0.0, 0.0);
    for k in 1..env.positions.len() {
        let h = env.positions[k] - env.positions[k - 1];
        acc += (integrand(k - 1) + integrand(k)) * (0.5 * h);
    }
    acc * env.prefactor
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::max_abs;
    use std::io::Write;

    fn cfg() -> LadderConfig {
        LadderConfig::new(7, 3).unwrap()
    }

    #[test]
    fn shift_action() {
        let c = cfg();
        let b = build_ladder(&c).unwrap();
        let out = b.apply(&rung_state(&c, 3).unwrap()).unwrap();
        assert_eq!(out, rung_state(&c, 2).unwrap());
        // wraps
        let out = b.apply(&rung_state(&c, 0).unwrap()).unwrap();
        assert_eq!(out, rung_state(&c, 6).unwrap());
    }

    #[test]
    fn exactly_unitary_and_cyclic() {
        let c = cfg();
        let b = build_ladder(&c).unwrap();
        let id = Operator::identity(b.space());
        assert_eq!(&b.adjoint() * &b, id);
        assert_eq!(&b * &b.adjoint(), id);
        let mut p = id.clone();
        for _ in 0..c.dim {
            p = &p * &b;
        }
        assert_eq!(p, id);
    }

    #[test]
    fn comb_eigenvector_and_orthogonality() {
        let c = cfg();
        let b = build_ladder(&c).unwrap();
        for m in 0..c.dim {
            let phi = 2.0 * PI * m as f64 / c.dim as f64;
            assert!(c.comb_phase_is_exact(phi));
            let comb = comb_state(phi, &c).unwrap();
            assert!((comb.norm() - 1.0).abs() < 1e-15);
            let bc = b.apply(&comb).unwrap();
            let phase = C64::from_polar(1.0, phi);
            let diff = bc
                .amplitudes()
                .iter()
                .zip(comb.amplitudes())
                .fold(0.0f64, |acc, (x, y)| acc.max((x - y * phase).norm()));
            assert!(diff < 1e-14);
        }
        let c0 = comb_state(0.0, &c).unwrap();
        let c1 = comb_state(2.0 * PI / c.dim as f64, &c).unwrap();
        assert!(c0.inner(&c1).unwrap().norm() < 1e-15);
        assert!(!c.comb_phase_is_exact(0.3));
    }

    #[test]
    fn comb_basis_is_orthonormal() {
        let c = LadderConfig::new(9, 4).unwrap();
        let combs: Vec<_> = (0..9)
            .map(|m| comb_state(2.0 * PI * m as f64 / 9.0, &c).unwrap())
            .collect();
        for (i, x) in combs.iter().enumerate() {
            for (j, y) in combs.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((x.inner(y).unwrap() - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_config() {
        assert!(LadderConfig::new(2, 0).is_err());
        assert!(LadderConfig::new(5, 5).is_err());
    }

    #[test]
    fn relativistic_velocities() {
        assert!((energy_to_velocity(200.0).unwrap() - 0.6953).abs() < 1e-4);
        assert!((energy_to_velocity(20.0).unwrap() - 0.2719).abs() < 1e-4);
        assert_eq!(energy_to_velocity(0.0).unwrap(), 0.0);
        assert!(energy_to_velocity(-1.0).is_err());
        assert!(energy_to_velocity(1e9).unwrap() < 1.0);
    }

    fn sinc(x: f64) -> f64 {
        if x == 0.0 {
            1.0
        } else {
            x.sin() / x
        }
    }

    #[test]
    fn zero_envelope_gives_zero() {
        let env = EnvelopeSamples::from_fn(10.0, 50, 2.0, |_| C64::new(0.0, 0.0)).unwrap();
        assert_eq!(coupling_from_envelope(&env, 1.3), C64::new(0.0, 0.0));
    }

    #[test]
    fn constant_envelope_matches_sinc() {
        // ∫₀ᴸ e^{−iqz} dz = L e^{−iqL/2} sinc(qL/2)
        let (len, e0, pre) = (5.0, 0.7, 1.5);
        let env = EnvelopeSamples::from_fn(len, 20001, pre, |_| C64::new(e0, 0.0)).unwrap();
        for &q in &[0.0, 0.3, 1.1, 2.0 * PI / len, 2.9] {
            let got = coupling_from_envelope(&env, q).norm();
            let want = pre * e0 * len * sinc(q * len / 2.0).abs();
            assert!((got - want).abs() < 1e-7, "q={q}: {got} vs {want}");
        }
        // first zero at 2π/L
        assert!(coupling_from_envelope(&env, 2.0 * PI / len).norm() < 1e-7);
    }

    #[test]
    fn phase_matched_envelope_peaks_at_q0() {
        let (len, q0) = (40.0, 3.0);
        let env = EnvelopeSamples::from_fn(len, 40001, 1.0, |z| C64::from_polar(1.0, q0 * z)).unwrap();
        let grid: Vec<f64> = (0..=200).map(|k| 2.0 + k as f64 * 0.01).collect();
        let best = grid
            .iter()
            .copied()
            .max_by(|a, b| {
                coupling_from_envelope(&env, *a)
                    .norm()
                    .total_cmp(&coupling_from_envelope(&env, *b).norm())
            })
            .unwrap();
        assert!((best - q0).abs() < 1e-9);
    }

    #[test]
    fn quadrature_converges() {
        let len = 4.0;
        let f = |z: f64| C64::new((-(z - 2.0) * (z - 2.0)).exp(), 0.3 * z.sin());
        let coarse = coupling_from_envelope(&EnvelopeSamples::from_fn(len, 4001, 1.0, f).unwrap(), 1.7);
        let fine = coupling_from_envelope(&EnvelopeSamples::from_fn(len, 8001, 1.0, f).unwrap(), 1.7);
        assert!((coarse - fine).norm() / fine.norm() < 1e-6);
    }

    #[test]
    fn envelope_csv_round_trip() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "z,re,im").unwrap();
        writeln!(file, "0.0, 1.0, 0.0").unwrap();
        writeln!(file, "1.0, 1.0, 0.0").unwrap();
        writeln!(file, "2.0, 1.0, 0.0").unwrap();
        let env = EnvelopeSamples::from_csv(file.path(), 1.0).unwrap();
        assert_eq!(env.positions(), &[0.0, 1.0, 2.0]);
        assert!((coupling_from_envelope(&env, 0.0) - C64::new(2.0, 0.0)).norm() < 1e-15);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "0.0, 1.0, 0.0").unwrap();
        writeln!(bad, "oops").unwrap();
        assert!(EnvelopeSamples::from_csv(bad.path(), 1.0).is_err());
    }

    #[test]
    fn envelope_validation() {
        assert!(EnvelopeSamples::new(vec![0.0], vec![C64::new(1.0, 0.0)], 1.0).is_err());
        assert!(EnvelopeSamples::new(vec![0.0, 0.0], vec![C64::new(1.0, 0.0); 2], 1.0).is_err());
    }

    #[test]
    fn ladder_matrix_is_permutation() {
        let b = build_ladder(&cfg()).unwrap();
        let ones = b.matrix().iter().filter(|z| z.re == 1.0).count();
        assert_eq!(ones, 7);
        assert_eq!(max_abs(b.matrix()), 1.0);
    }
}
