//! Closed-form scattering matrices and the frame map between the master
//! equation picture and the picture they are written in.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::SystemConfig;
use crate::cavity::{lowering_element, polariton_eigenbasis, predecessor, CavityModel, PolaritonLevel};
use crate::ladder::{build_ladder, LadderConfig};
use crate::linalg::{expm_anti_hermitian, unitary_from_hamiltonian};
use crate::tensor::{adjoint_matrix, embed_multi, DensityMatrix, Operator, StateVector, TensorSpace};
use crate::{Error, Result, LADDER};

/// S_lin = exp(g_Q b†a − g_Q* b a†) on ladder ⊗ cavity.
///
/// The cyclic b is diagonal in the comb basis, b|comb_m⟩ = e^{iφ_m}|comb_m⟩
/// with φ_m = 2πm/D, so S_lin = Σ_m |comb_m⟩⟨comb_m| ⊗ exp(g e^{−iφ_m} a − h.c.)
/// and only D cavity-sized exponentials are needed.
pub fn scattering_linear(g_q: C64, ladder: &LadderConfig, model: &CavityModel) -> Result<Operator> {
    ladder.validate()?;
    let d = ladder.dim;
    let a = model.a().matrix();
    let ad = adjoint_matrix(a);
    let dc = a.nrows();
    let blocks: Vec<Array2<C64>> = (0..d)
        .map(|m| {
            let phase = C64::from_polar(1.0, 2.0 * PI * m as f64 / d as f64);
            let gen = a.mapv(|z| z * g_q * phase.conj()) - ad.mapv(|z| z * g_q.conj() * phase);
            expm_anti_hermitian(&gen)
        })
        .collect();
    // |comb_m⟩⟨comb_m| has entries e^{i(l−l')φ_m}/D
    let space = ladder.space().concat(model.space())?;
    let n = d * dc;
    let mut mat = Array2::<C64>::zeros((n, n));
    for shift in 0..d {
        // entries with (l − l') ≡ shift (mod D) share the ladder weight
        let mut local = Array2::<C64>::zeros((dc, dc));
        for (m, e) in blocks.iter().enumerate() {
            let w = C64::from_polar(1.0 / d as f64, 2.0 * PI * (m * shift) as f64 / d as f64);
            local.scaled_add(w, e);
        }
        for l in 0..d {
            let lp = (l + d - shift) % d;
            for x in 0..dc {
                for y in 0..dc {
                    mat[[l * dc + x, lp * dc + y]] = local[[x, y]];
                }
            }
        }
    }
    Operator::new(space, mat)
}

fn check_pair(lower: &StateVector, upper: &StateVector) -> Result<()> {
    if lower.space() != upper.space() {
        return Err(Error::InvalidPair(format!(
            "levels live on different spaces ({} vs {})",
            lower.space(),
            upper.space()
        )));
    }
    let overlap = lower.inner(upper)?.norm();
    if overlap > 1e-12 {
        return Err(Error::InvalidPair(format!("levels overlap by {overlap:.3e}")));
    }
    if lower.space().contains(LADDER) {
        return Err(Error::InvalidPair("pair must not include the ladder factor".into()));
    }
    Ok(())
}

/// Two-level blockade scattering matrix
/// S = I + (cos|Ω| − 1)·I_el⊗P − i sin|Ω|(e^{iθ} b⊗|1̄⟩⟨0̄| + e^{−iθ} b†⊗|0̄⟩⟨1̄|),
/// θ = arg Ω, P the projector on the pair. `space` must contain the ladder
/// factor followed (not necessarily adjacently) by the pair's factors.
pub fn scattering_blockade(omega: C64, lower: &StateVector, upper: &StateVector, space: &TensorSpace) -> Result<Operator> {
    check_pair(lower, upper)?;
    let d = space.factor_dim(LADDER)?;
    let b = build_ladder(&LadderConfig::new(d, 0)?)?;
    let pair_space = lower.space().clone();
    let local_space = TensorSpace::single(LADDER, d)?.concat(&pair_space)?;
    let lo = lower.amplitudes();
    let up = upper.amplitudes();
    let dp = pair_space.dim();
    let proj = Array2::from_shape_fn((dp, dp), |(i, j)| lo[i] * lo[j].conj() + up[i] * up[j].conj());
    let raise = Array2::from_shape_fn((dp, dp), |(i, j)| up[i] * lo[j].conj());
    let (mag, theta) = omega.to_polar();
    let cos_m1 = C64::new(mag.cos() - 1.0, 0.0);
    let fwd = C64::new(0.0, -mag.sin()) * C64::from_polar(1.0, theta);
    let back = C64::new(0.0, -mag.sin()) * C64::from_polar(1.0, -theta);
    let bm = b.matrix();
    let n = d * dp;
    let mat = Array2::from_shape_fn((n, n), |(r, c)| {
        let (l, i) = (r / dp, r % dp);
        let (lp, j) = (c / dp, c % dp);
        let mut v = C64::new(0.0, 0.0);
        if l == lp {
            v += cos_m1 * proj[[i, j]];
            if i == j {
                v += 1.0;
            }
        }
        // b⊗|up⟩⟨lo| and b†⊗|lo⟩⟨up|
        v += fwd * bm[[l, lp]] * raise[[i, j]];
        v += back * bm[[lp, l]].conj() * raise[[j, i]].conj();
        v
    });
    embed_multi(&Operator::new(local_space, mat)?, space)
}

/// [`scattering_blockade`] between two polariton levels of `model`;
/// `lower` must be the same-branch predecessor of `upper`.
pub fn scattering_blockade_levels(
    omega: C64,
    model: &CavityModel,
    lower: PolaritonLevel,
    upper: PolaritonLevel,
    space: &TensorSpace,
) -> Result<Operator> {
    let expected = predecessor(model, upper).map_err(|_| Error::InvalidPair(format!("{upper} has no predecessor")))?;
    if expected != lower {
        return Err(Error::InvalidPair(format!(
            "{lower} → {upper} is not a single-step transition (expected {expected} → {upper})"
        )));
    }
    let basis = polariton_eigenbasis(model);
    scattering_blockade(omega, &basis.vector(lower)?, &basis.vector(upper)?, space)
}

/// Rabi angle Ω of the blockade scattering matrix reached by a resonant
/// electron with coupling g_Q on the transition `lower → upper`:
/// Ω = −i·(g_Q·⟨lower|a|upper⟩)*, so |Ω| = |g_Q| (Kerr |0⟩↔|1⟩) or
/// |g_Q|/√2 (JC |0*⟩↔|1±⟩).
pub fn blockade_omega(g_q: C64, model: &CavityModel, lower: PolaritonLevel, upper: PolaritonLevel) -> Result<C64> {
    let basis = polariton_eigenbasis(model);
    let m = lowering_element(model, &basis, lower, upper)?;
    Ok(C64::new(0.0, -1.0) * (g_q * m).conj())
}

/// e^{+iH_nl T} ρ e^{−iH_nl T}.
pub fn frame_align(rho: &DensityMatrix, cfg: &SystemConfig) -> Result<DensityMatrix> {
    frame_align_by(rho, cfg.model.h_nl(), cfg.t)
}

/// e^{+iHt} ρ e^{−iHt} for an `h` acting on the trailing factors of ρ's
/// space. Works block by block over the leading factors, skipping zero
/// blocks.
pub fn frame_align_by(rho: &DensityMatrix, h: &Operator, t: f64) -> Result<DensityMatrix> {
    let space = rho.space();
    let k = h.space().factors().len();
    let nf = space.factors().len();
    if k > nf || space.factors()[nf - k..] != *h.space().factors() {
        return Err(Error::SpaceMismatch {
            left: space.to_string(),
            right: h.space().to_string(),
        });
    }
    let u = unitary_from_hamiltonian(h.matrix(), -t);
    let ud = adjoint_matrix(&u);
    let dc = h.dim();
    let nb = space.dim() / dc;
    let m = rho.matrix();
    let mut out = Array2::<C64>::zeros(m.raw_dim());
    let zero = C64::new(0.0, 0.0);
    for p in 0..nb {
        for q in 0..nb {
            let block = m.slice(ndarray::s![p * dc..(p + 1) * dc, q * dc..(q + 1) * dc]);
            if block.iter().all(|z| *z == zero) {
                continue;
            }
            let rotated = u.dot(&block).dot(&ud);
            out.slice_mut(ndarray::s![p * dc..(p + 1) * dc, q * dc..(q + 1) * dc]).assign(&rotated);
        }
    }
    DensityMatrix::from_matrix_unchecked(space.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{bare_state, build_jc, build_kerr};
    use crate::ladder::rung_state;
    use crate::tensor::kron;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn linear_matches_dense_exponential() {
        let ladder = LadderConfig::new(5, 2).unwrap();
        let model = build_kerr(0.0, 4).unwrap();
        let g = c(0.7, -0.4);
        let s = scattering_linear(g, &ladder, &model).unwrap();
        let b = build_ladder(&ladder).unwrap();
        let gen = kron(&b.adjoint(), model.a()).unwrap();
        let k = gen.scale(g).matrix() - gen.adjoint().scale(g.conj()).matrix();
        let dense = expm_anti_hermitian(&k);
        let diff = (s.matrix() - &dense).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(diff < 1e-12, "{diff}");
        assert!(s.unitarity_error() < 1e-12);
    }

    #[test]
    fn linear_identity_at_zero_coupling() {
        let ladder = LadderConfig::new(5, 2).unwrap();
        let model = build_jc(0.1, 2).unwrap();
        let s = scattering_linear(c(0.0, 0.0), &ladder, &model).unwrap();
        assert!(s.max_abs_diff(&Operator::identity(s.space())).unwrap() < 1e-13);
    }

    #[test]
    fn blockade_full_transfer() {
        let model = build_kerr(0.02, 3).unwrap();
        let ladder = LadderConfig::new(7, 3).unwrap();
        let space = ladder.space().concat(model.space()).unwrap();
        let omega = C64::from_polar(PI / 2.0, 0.3);
        let s = scattering_blockade_levels(omega, &model, PolaritonLevel::Fock(0), PolaritonLevel::Fock(1), &space).unwrap();
        assert!(s.unitarity_error() < 1e-12);
        let psi = rung_state(&ladder, 3).unwrap().kron(&bare_state(&model, 0, false).unwrap()).unwrap();
        let out = s.apply(&psi).unwrap();
        let target = rung_state(&ladder, 2).unwrap().kron(&bare_state(&model, 1, false).unwrap()).unwrap();
        let amp = target.inner(&out).unwrap();
        assert!((amp - c(0.0, -1.0) * C64::from_polar(1.0, 0.3)).norm() < 1e-14);
    }

    #[test]
    fn blockade_identity_and_invalid_pair() {
        let model = build_jc(0.02, 3).unwrap();
        let ladder = LadderConfig::new(7, 3).unwrap();
        let space = ladder.space().concat(model.space()).unwrap();
        let s = scattering_blockade_levels(c(0.0, 0.0), &model, PolaritonLevel::Ground, PolaritonLevel::Upper(1), &space).unwrap();
        assert!(s.max_abs_diff(&Operator::identity(&space)).unwrap() < 1e-15);
        let bad = scattering_blockade_levels(c(1.0, 0.0), &model, PolaritonLevel::Ground, PolaritonLevel::Upper(2), &space);
        assert!(matches!(bad, Err(Error::InvalidPair(_))));
        let bad = scattering_blockade_levels(c(1.0, 0.0), &model, PolaritonLevel::Lower(1), PolaritonLevel::Upper(2), &space);
        assert!(matches!(bad, Err(Error::InvalidPair(_))));
    }

    #[test]
    fn blockade_matches_resonant_generator() {
        // exp(G b†|lo⟩⟨up| − G* b|up⟩⟨lo|) with Ω = −i G*
        let model = build_kerr(0.02, 2).unwrap();
        let ladder = LadderConfig::new(5, 2).unwrap();
        let space = ladder.space().concat(model.space()).unwrap();
        let g = c(0.9, 0.5);
        let omega = blockade_omega(g, &model, PolaritonLevel::Fock(0), PolaritonLevel::Fock(1)).unwrap();
        let s = scattering_blockade_levels(omega, &model, PolaritonLevel::Fock(0), PolaritonLevel::Fock(1), &space).unwrap();
        let b = build_ladder(&ladder).unwrap();
        let lo_up = Operator::outer(&bare_state(&model, 0, false).unwrap(), &bare_state(&model, 1, false).unwrap()).unwrap();
        let k = kron(&b.adjoint(), &lo_up).unwrap();
        let gen = k.scale(g).matrix() - k.adjoint().scale(g.conj()).matrix();
        let dense = expm_anti_hermitian(&gen);
        let diff = (s.matrix() - &dense).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn jc_rabi_angle() {
        let model = build_jc(0.02, 3).unwrap();
        let g = c(PI / 2f64.sqrt(), 0.0);
        let omega = blockade_omega(g, &model, PolaritonLevel::Ground, PolaritonLevel::Upper(1)).unwrap();
        assert!((omega.norm() - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn frame_alignment() {
        let kappa = 0.03;
        let t = 17.0;
        let model = build_jc(kappa, 2).unwrap();
        let ladder = LadderConfig::new(5, 2).unwrap();
        let cfg = SystemConfig::new(model.clone(), ladder, c(1.0, 0.0), t, 0.0, 0.0).unwrap();
        let basis = polariton_eigenbasis(&model);
        let g = basis.vector(PolaritonLevel::Ground).unwrap();
        let up = basis.vector(PolaritonLevel::Upper(1)).unwrap();
        let amps = (g.amplitudes() + up.amplitudes()).mapv(|z| z / 2f64.sqrt());
        let cav = StateVector::new(model.space().clone(), amps).unwrap();
        let psi = rung_state(&ladder, 2).unwrap().kron(&cav).unwrap();
        let rho = psi.projector();
        let out = frame_align(&rho, &cfg).unwrap();
        let space = cfg.space();
        let gi = space.basis_index(&[("el", 2), ("cav", 0), ("emitter", 0)]).unwrap();
        // ⟨1+|ρ'|0*⟩ = e^{iκT}⟨1+|ρ|0*⟩
        let proj = |m: &Array2<C64>| {
            let mut acc = c(0.0, 0.0);
            for i in 0..space.dim() {
                let d = space.digits(i);
                if d[0] != 2 {
                    continue;
                }
                acc += up.amplitudes()[i % 4].conj() * m[[i, gi]];
            }
            acc
        };
        let before = proj(rho.matrix());
        let after = proj(out.matrix());
        assert!((after - before * C64::from_polar(1.0, kappa * t)).norm() < 1e-12);
        let back = frame_align_by(&out, model.h_nl(), -t).unwrap();
        assert!(back.max_abs_diff(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn kerr_pair_frame_is_identity() {
        let model = build_kerr(0.02, 3).unwrap();
        let ladder = LadderConfig::new(5, 2).unwrap();
        let cfg = SystemConfig::new(model.clone(), ladder, c(1.0, 0.0), 40.0, 0.0, 0.0).unwrap();
        let cav = StateVector::normalized(
            model.space().clone(),
            ndarray::arr1(&[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        let rho = rung_state(&ladder, 2).unwrap().kron(&cav).unwrap().projector();
        let out = frame_align(&rho, &cfg).unwrap();
        assert!(out.max_abs_diff(&rho).unwrap() < 1e-14);
    }
}
