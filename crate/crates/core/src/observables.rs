//! Spectra, level statistics, fidelities and entanglement diagnostics.

use std::io::Write;

use ndarray::Array2;
use serde::Serialize;

use crate::cavity::PolaritonBasis;
use crate::ladder::LadderConfig;
use crate::linalg::{entropy_from_spectrum, hermitian_eigenvalues};
use crate::tensor::{adjoint_matrix, partial_trace, reduced_pure, DensityMatrix, StateVector};
use crate::{Error, Result, LADDER};

const SUM_TOL: f64 = 1e-8;
const CLIP_TOL: f64 = 1e-12;

/// Labelled probabilities summing to one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Distribution {
    labels: Vec<String>,
    probabilities: Vec<f64>,
}

impl Distribution {
    /// Validates the sum (within 1e−8) and clips round-off negatives
    /// (≥ −1e−12) to zero before renormalizing.
    pub fn new(labels: Vec<String>, probabilities: Vec<f64>) -> Result<Self> {
        if labels.len() != probabilities.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: probabilities.len(),
            });
        }
        if probabilities.is_empty() {
            return Err(Error::InvalidState("empty distribution".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if !total.is_finite() || (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidState(format!("probabilities sum to {total}")));
        }
        let mut clipped = 0.0f64;
        let mut probs = probabilities;
        for p in probs.iter_mut() {
            if *p < -CLIP_TOL {
                return Err(Error::InvalidState(format!("negative probability {p:.3e}")));
            }
            if *p < 0.0 {
                clipped = clipped.max(-*p);
                *p = 0.0;
            }
        }
        if clipped > 0.0 {
            log::debug!("clipped round-off negatives up to {clipped:.3e}");
        }
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(Self {
            labels,
            probabilities: probs,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Probability of `label`, zero if absent.
    pub fn get(&self, label: &str) -> f64 {
        self.labels
            .iter()
            .position(|l| l == label)
            .map_or(0.0, |k| self.probabilities[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.labels.iter().map(String::as_str).zip(self.probabilities.iter().copied())
    }

    /// Label of the most probable entry (first on ties).
    pub fn mode(&self) -> &str {
        let mut best = 0;
        for (k, p) in self.probabilities.iter().enumerate() {
            if *p > self.probabilities[best] {
                best = k;
            }
        }
        &self.labels[best]
    }

    /// Two-column CSV with 17 significant digits and LF line endings.
    pub fn write_csv<W: Write>(&self, out: W, label_header: &str) -> Result<()> {
        let total: f64 = self.probabilities.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidState(format!("distribution sums to {total} at write time")));
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record([label_header, "probability"])?;
        for (label, p) in self.iter() {
            w.write_record([label.to_string(), format!("{p:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Diagonal of the electron's reduced state against the sideband index l − l0.
pub fn eels_spectrum(rho: &DensityMatrix, ladder: &LadderConfig) -> Result<Distribution> {
    let dim = rho.space().factor_dim(LADDER)?;
    if dim != ladder.dim {
        return Err(Error::DimensionMismatch {
            expected: ladder.dim,
            found: dim,
        });
    }
    let el = partial_trace(rho, &[LADDER])?;
    let labels = (0..dim).map(|l| ladder.sideband(l).to_string()).collect();
    Distribution::new(labels, el.populations())
}

/// Populations of the polariton levels: trace out everything but the
/// cavity factors and rotate into the eigenbasis (columns of U).
pub fn polariton_statistics(rho: &DensityMatrix, basis: &PolaritonBasis) -> Result<Distribution> {
    let labels: Vec<&str> = basis.space().labels().collect();
    let reduced = partial_trace(rho, &labels)?;
    if reduced.space() != basis.space() {
        return Err(Error::SpaceMismatch {
            left: reduced.space().to_string(),
            right: basis.space().to_string(),
        });
    }
    let u = basis.unitary().matrix();
    let pol: Array2<_> = adjoint_matrix(u).dot(reduced.matrix()).dot(u);
    let names = basis.levels().iter().map(|(l, _)| l.to_string()).collect();
    Distribution::new(names, (0..pol.nrows()).map(|k| pol[[k, k]].re).collect())
}

/// F = ⟨ψ|ρ|ψ⟩.
pub fn state_fidelity(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    if rho.space() != psi.space() {
        return Err(Error::SpaceMismatch {
            left: rho.space().to_string(),
            right: psi.space().to_string(),
        });
    }
    let v = psi.amplitudes();
    let f = v.mapv(|z| z.conj()).dot(&rho.matrix().dot(v));
    if f.im.abs() > 1e-10 {
        return Err(Error::InvalidState(format!("fidelity has imaginary part {:.3e}", f.im)));
    }
    Ok(f.re.clamp(0.0, 1.0))
}

/// Von Neumann entropy (nats) of the reduced state on `partition`; the
/// total state must be pure.
pub fn entanglement_entropy(rho: &DensityMatrix, partition: &[&str]) -> Result<f64> {
    let purity = rho.purity();
    if purity < 1.0 - 1e-8 {
        return Err(Error::MixedState { purity });
    }
    let reduced = partial_trace(rho, partition)?;
    Ok(entropy_from_spectrum(&hermitian_eigenvalues(reduced.matrix())))
}

/// Entropy of entanglement of a pure state between `partition` and the rest.
pub fn entanglement_entropy_pure(psi: &StateVector, partition: &[&str]) -> Result<f64> {
    let reduced = reduced_pure(psi, partition)?;
    Ok(entropy_from_spectrum(&hermitian_eigenvalues(reduced.matrix())))
}

/// Poisson(mean) on 0..=n_max, renormalized.
pub fn poisson_reference(mean: f64, n_max: usize) -> Result<Distribution> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::InvalidParameter(format!("Poisson mean {mean} must be ≥ 0")));
    }
    let mut probs = Vec::with_capacity(n_max + 1);
    let mut p = (-mean).exp();
    for n in 0..=n_max {
        if n > 0 {
            p *= mean / n as f64;
        }
        probs.push(p);
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|x| *x /= total);
    Distribution::new((0..=n_max).map(|n| n.to_string()).collect(), probs)
}

/// ½Σ|p − q| over the union of labels.
pub fn total_variation(p: &Distribution, q: &Distribution) -> f64 {
    let mut tv: f64 = p.iter().map(|(l, x)| (x - q.get(l)).abs()).sum();
    tv += q
        .iter()
        .filter(|(l, _)| !p.labels.iter().any(|m| m == l))
        .map(|(_, x)| x.abs())
        .sum::<f64>();
    0.5 * tv
}

/// −Σ p ln p (nats).
pub fn shannon_entropy(p: &Distribution) -> f64 {
    entropy_from_spectrum(p.probabilities())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{bare_state, build_jc, build_kerr, polariton_eigenbasis, PolaritonLevel};
    use crate::dynamics::scattering_blockade_levels;
    use crate::ladder::rung_state;
    use crate::tensor::TensorSpace;
    use crate::C64;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn clipping_and_validation() {
        let d = Distribution::new(vec!["a".into(), "b".into()], vec![1.0 + 5e-13, -5e-13]).unwrap();
        assert_eq!(d.probabilities()[1], 0.0);
        assert!((d.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(Distribution::new(vec!["a".into(), "b".into()], vec![1.1, -0.1]).is_err());
        assert!(Distribution::new(vec!["a".into()], vec![0.9]).is_err());
    }

    #[test]
    fn poisson_values() {
        let p = poisson_reference(0.0, 5).unwrap();
        assert_eq!(p.get("0"), 1.0);
        let p = poisson_reference(1.0, 30).unwrap();
        assert!((p.get("0") - (-1f64).exp()).abs() < 1e-15);
        assert!((p.get("1") - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn poisson_truncation_error() {
        // exact reference on a long support
        for &mean in &[0.5, 1.0, 2.5] {
            let short = poisson_reference(mean, 20).unwrap();
            let mut exact = Vec::new();
            let mut p = (-mean as f64).exp();
            for n in 0..=80usize {
                if n > 0 {
                    p *= mean / n as f64;
                }
                exact.push(p);
            }
            let tv: f64 = 0.5
                * exact
                    .iter()
                    .enumerate()
                    .map(|(n, x)| (x - short.get(&n.to_string())).abs())
                    .sum::<f64>();
            assert!(tv <= 1e-12, "mean {mean}: {tv}");
        }
    }

    #[test]
    fn fidelity_examples() {
        let space = TensorSpace::single("q", 3).unwrap();
        let psi = StateVector::basis(&space, 1).unwrap();
        assert!((state_fidelity(&psi.projector(), &psi).unwrap() - 1.0).abs() < 1e-15);
        let other = StateVector::basis(&space, 2).unwrap();
        assert_eq!(state_fidelity(&psi.projector(), &other).unwrap(), 0.0);
        let mixed = DensityMatrix::maximally_mixed(&space);
        assert!((state_fidelity(&mixed, &psi).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        let a = TensorSpace::single("a", 2).unwrap();
        let b = TensorSpace::single("b", 2).unwrap();
        let prod = StateVector::basis(&a, 0).unwrap().kron(&StateVector::basis(&b, 1).unwrap()).unwrap();
        assert!(entanglement_entropy(&prod.projector(), &["a"]).unwrap().abs() < 1e-14);
        let ab = a.concat(&b).unwrap();
        let bell = StateVector::normalized(
            ab,
            ndarray::arr1(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
        )
        .unwrap();
        assert!((entanglement_entropy(&bell.projector(), &["a"]).unwrap() - LN_2).abs() < 1e-14);
        assert!((entanglement_entropy_pure(&bell, &["b"]).unwrap() - LN_2).abs() < 1e-14);
        let mixed = DensityMatrix::maximally_mixed(&bell.space().clone());
        assert!(matches!(entanglement_entropy(&mixed, &["a"]), Err(Error::MixedState { .. })));
    }

    #[test]
    fn spectra_after_blockade() {
        let model = build_kerr(0.02, 3).unwrap();
        let ladder = LadderConfig::new(9, 4).unwrap();
        let space = ladder.space().concat(model.space()).unwrap();
        let psi0 = rung_state(&ladder, 4).unwrap().kron(&bare_state(&model, 0, false).unwrap()).unwrap();
        let eels = eels_spectrum(&psi0.projector(), &ladder).unwrap();
        assert_eq!(eels.get("0"), 1.0);

        let full = scattering_blockade_levels(C64::new(PI / 2.0, 0.0), &model, PolaritonLevel::Fock(0), PolaritonLevel::Fock(1), &space).unwrap();
        let out = full.apply(&psi0).unwrap().projector();
        let eels = eels_spectrum(&out, &ladder).unwrap();
        assert!((eels.get("-1") - 1.0).abs() < 1e-14);
        let stats = polariton_statistics(&out, &polariton_eigenbasis(&model)).unwrap();
        assert!((stats.get("1") - 1.0).abs() < 1e-14);

        // Ω = π/4: one-to-one correlation, equal entropies, ln 2 entanglement
        let half = scattering_blockade_levels(C64::new(PI / 4.0, 0.0), &model, PolaritonLevel::Fock(0), PolaritonLevel::Fock(1), &space).unwrap();
        let psi = half.apply(&psi0).unwrap();
        let rho = psi.projector();
        let eels = eels_spectrum(&rho, &ladder).unwrap();
        let stats = polariton_statistics(&rho, &polariton_eigenbasis(&model)).unwrap();
        assert!((shannon_entropy(&eels) - shannon_entropy(&stats)).abs() < 1e-12);
        assert!((entanglement_entropy(&rho, &["el"]).unwrap() - LN_2).abs() < 1e-12);
    }

    #[test]
    fn jc_vacuum_statistics() {
        let model = build_jc(0.02, 3).unwrap();
        let basis = polariton_eigenbasis(&model);
        let rho = bare_state(&model, 0, false).unwrap().projector();
        let stats = polariton_statistics(&rho, &basis).unwrap();
        assert_eq!(stats.get("0*"), 1.0);
        assert_eq!(stats.mode(), "0*");
    }

    #[test]
    fn csv_format() {
        let d = Distribution::new(vec!["-1".into(), "0".into()], vec![0.25, 0.75]).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf, "sideband").unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "sideband,probability\n-1,2.5000000000000000e-1\n0,7.5000000000000000e-1\n");
    }

    #[test]
    fn total_variation_basics() {
        let p = poisson_reference(1.0, 10).unwrap();
        assert_eq!(total_variation(&p, &p), 0.0);
        let a = Distribution::new(vec!["x".into()], vec![1.0]).unwrap();
        let b = Distribution::new(vec!["y".into()], vec![1.0]).unwrap();
        assert!((total_variation(&a, &b) - 1.0).abs() < 1e-15);
    }
}
