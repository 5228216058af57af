//! Closed-form weak-excitation estimates, the dressed pair doublet of the
//! undriven Hamiltonian, and peak location on sampled sweeps.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{HilbertSpace, EXCITED, GROUND};
use crate::model::{build_hamiltonian, SystemParams};
use crate::observables::{NamedElements, ObservableRecord};

/// Largest occupation for which the five-state truncation is trusted.
pub const WEAK_EXCITATION_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakExcitationEstimate {
    /// `ρ₅₅ + ρ₄₄`
    pub est_mean_n: f64,
    /// `ρ₅₅ + ρ₃₃`
    pub est_mean_m: f64,
    /// `ρ₅₅ / ((ρ₅₅ + ρ₃₃)(ρ₅₅ + ρ₄₄))`
    pub est_g2_nm: f64,
    /// `ρ₃₃·γ_m / (ρ₅₅·γ_c)`, one when single phonons follow the damping ratio.
    pub phonon_ratio: f64,
    /// `ρ₄₄·γ_c / (ρ₅₅·γ_m)`, the photon counterpart.
    pub photon_ratio: f64,
    pub validity: bool,
}

pub fn weak_excitation_estimate(
    elements: &NamedElements,
    gamma_c: f64,
    gamma_m: f64,
    threshold: f64,
) -> Result<WeakExcitationEstimate> {
    let (r33, r44, r55) = (elements.rho33, elements.rho44, elements.rho55);
    let est_mean_n = r55 + r44;
    let est_mean_m = r55 + r33;
    if est_mean_n <= 0.0 || est_mean_m <= 0.0 {
        return Err(Error::UndefinedEstimate("single-excitation populations vanish"));
    }
    if r55 <= 0.0 || gamma_c <= 0.0 || gamma_m <= 0.0 {
        return Err(Error::UndefinedEstimate("pair population or a damping rate vanishes"));
    }
    Ok(WeakExcitationEstimate {
        est_mean_n,
        est_mean_m,
        est_g2_nm: r55 / (est_mean_n * est_mean_m),
        phonon_ratio: r33 * gamma_m / (r55 * gamma_c),
        photon_ratio: r44 * gamma_c / (r55 * gamma_m),
        validity: est_mean_n.max(est_mean_m) < threshold,
    })
}

/// Cross-correlation predicted for equal mode damping, `1/(2⟨n⟩)`.
pub fn equal_damping_cross_correlation(mean_n: f64) -> f64 {
    1.0 / (2.0 * mean_n)
}

/// Eigen-decomposition of the undriven Hamiltonian on `{|g,1,1⟩, |e,0,0⟩}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Ascending eigenvalues of the pair block.
    pub pair_doublet: (f64, f64),
    /// Eigenvectors as `(⟨g,1,1|v⟩, ⟨e,0,0|v⟩)`, matching `pair_doublet`.
    pub dressed_vectors: [(f64, f64); 2],
    /// Energy of `|g,1,0⟩`.
    pub single_photon_level: f64,
    /// Energy of `|g,0,1⟩`.
    pub single_phonon_level: f64,
}

pub fn pair_subspace_spectrum(params: &SystemParams, space: &HilbertSpace) -> Result<SpectrumReport> {
    if params.omega_drive != 0.0 {
        return Err(Error::Precondition(format!(
            "pair spectrum needs an undriven Hamiltonian, got omega_drive = {}",
            params.omega_drive
        )));
    }
    let h = build_hamiltonian(params, space)?;
    let g11 = space.index(GROUND, 1, 1);
    let e00 = space.index(EXCITED, 0, 0);
    let a = h.get(g11, g11).re;
    let d = h.get(e00, e00).re;
    let b: Complex64 = h.get(g11, e00);
    // b is real for this model; the Hermitian block is [[a, b], [b, d]]
    let b = b.re;

    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (lo, hi) = (mean - half_gap, mean + half_gap);

    let dressed_vectors = if b == 0.0 {
        if a <= d {
            [(1.0, 0.0), (0.0, 1.0)]
        } else {
            [(0.0, 1.0), (1.0, 0.0)]
        }
    } else {
        // (H − λ)v = 0 ⇒ v ∝ (b, λ − a)
        let vec_for = |lambda: f64| {
            let (x, y) = (b, lambda - a);
            let norm = x.hypot(y);
            (x / norm, y / norm)
        };
        [vec_for(lo), vec_for(hi)]
    };

    Ok(SpectrumReport {
        pair_doublet: (lo, hi),
        dressed_vectors,
        single_photon_level: h.get(space.index(GROUND, 1, 0), space.index(GROUND, 1, 0)).re,
        single_phonon_level: h.get(space.index(GROUND, 0, 1), space.index(GROUND, 0, 1)).re,
    })
}

/// Vertex of the parabola through three samples around the grid maximum.
/// The maximum must be interior.
pub fn refine_peak(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::InvalidSweep(format!(
            "need at least three samples with matching lengths, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let i = ys
        .iter()
        .enumerate()
        .fold(0, |best, (k, &y)| if y > ys[best] { k } else { best });
    if i == 0 || i == xs.len() - 1 {
        return Err(Error::InvalidSweep(format!(
            "maximum at grid edge x = {}; extend or refine the grid",
            xs[i]
        )));
    }
    let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
    let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return Ok(x1);
    }
    Ok(x1 - 0.5 * num / den)
}

/// [`refine_peak`] on a logarithmic axis; `xs` must be positive.
pub fn refine_peak_log(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidSweep("logarithmic axis needs positive values".into()));
    }
    let logs: Vec<f64> = xs.iter().map(|x| x.log10()).collect();
    Ok(10f64.powf(refine_peak(&logs, ys)?))
}

/// Locations `(Δ₋, Δ₊)` of the entanglement maxima on each side of `Δ = 0`.
///
/// For weak coupling these flank the central dip; for strong coupling they sit
/// near `±J`. The negative side is evaluated on the mirrored samples so a
/// symmetric sweep yields an exactly symmetric pair.
pub fn resonance_locator(sweep: &[(f64, ObservableRecord)]) -> Result<(f64, f64)> {
    let xs: Vec<f64> = sweep.iter().map(|(d, _)| *d).collect();
    let ys: Vec<f64> = sweep.iter().map(|(_, r)| r.log_neg).collect();
    locate_symmetric_peaks(&xs, &ys)
}

pub fn locate_symmetric_peaks(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidSweep("sample and value counts differ".into()));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSweep("detuning grid must be strictly increasing".into()));
    }
    let span = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let n = xs.len();
    for i in 0..n / 2 {
        if (xs[i] + xs[n - 1 - i]).abs() > 1e-9 * span.max(1.0) {
            return Err(Error::InvalidSweep(format!(
                "detuning grid is not symmetric about zero ({} vs {})",
                xs[i],
                xs[n - 1 - i]
            )));
        }
    }
    let upper: Vec<usize> = (0..n).filter(|&i| xs[i] >= 0.0).collect();
    if upper.len() < 3 {
        return Err(Error::InvalidSweep(format!(
            "grid too coarse: {} samples on each side of zero",
            upper.len()
        )));
    }
    let pos_x: Vec<f64> = upper.iter().map(|&i| xs[i]).collect();
    let pos_y: Vec<f64> = upper.iter().map(|&i| ys[i]).collect();
    let neg_x: Vec<f64> = upper.iter().map(|&i| -xs[n - 1 - i]).collect();
    let neg_y: Vec<f64> = upper.iter().map(|&i| ys[n - 1 - i]).collect();
    let hi = refine_peak(&pos_x, &pos_y)?;
    let lo = -refine_peak(&neg_x, &neg_y)?;
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn undriven(delta: f64, j: f64) -> SystemParams {
        SystemParams {
            delta,
            j_coupling: j,
            omega_drive: 0.0,
            ..SystemParams::default()
        }
    }

    #[test]
    fn equal_populations_give_inverse_four_p() {
        let p = 0.002;
        let el = NamedElements {
            rho33: p,
            rho44: p,
            rho55: p,
            ..Default::default()
        };
        let est = weak_excitation_estimate(&el, 10.0, 10.0, WEAK_EXCITATION_THRESHOLD).unwrap();
        assert!((est.est_g2_nm - 1.0 / (4.0 * p)).abs() < 1e-9);
        assert!(est.validity);
        // with ρ₃₃ = ρ₄₄ = ρ₅₅ the estimate coincides with 1/(2⟨n⟩)
        assert!((est.est_g2_nm - equal_damping_cross_correlation(est.est_mean_n)).abs() < 1e-9);
        assert!((est.phonon_ratio - 1.0).abs() < 1e-15 && (est.photon_ratio - 1.0).abs() < 1e-15);
    }

    #[test]
    fn estimate_undefined_for_empty_manifold() {
        let el = NamedElements::default();
        assert!(matches!(
            weak_excitation_estimate(&el, 10.0, 10.0, 0.01),
            Err(Error::UndefinedEstimate(_))
        ));
    }

    #[test]
    fn validity_follows_threshold() {
        let el = NamedElements {
            rho33: 0.02,
            rho44: 0.001,
            rho55: 0.001,
            ..Default::default()
        };
        let est = weak_excitation_estimate(&el, 10.0, 1.0, 0.01).unwrap();
        assert!(!est.validity);
    }

    #[test]
    fn doublet_cases() {
        let space = HilbertSpace::new(2, 2).unwrap();
        let s = pair_subspace_spectrum(&undriven(0.4, 0.0), &space).unwrap();
        assert_eq!(s.pair_doublet, (0.4, 0.4));

        let s = pair_subspace_spectrum(&undriven(0.0, 100.0), &space).unwrap();
        assert_eq!(s.pair_doublet, (-100.0, 100.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (lo, hi) = (s.dressed_vectors[0], s.dressed_vectors[1]);
        assert!((hi.0 - h).abs() < 1e-12 && (hi.1 - h).abs() < 1e-12);
        assert!((lo.0 - h).abs() < 1e-12 && (lo.1 + h).abs() < 1e-12);
        assert_eq!(s.single_phonon_level, 0.0);
        assert_eq!(s.single_photon_level, 0.0);
    }

    #[test]
    fn splitting_independent_of_detuning_and_truncation() {
        for (delta, j, levels) in [(5.0, 2.0, 1), (-3.0, 0.7, 4), (0.25, 12.0, 6)] {
            let space = HilbertSpace::new(levels, levels).unwrap();
            let s = pair_subspace_spectrum(&undriven(delta, j), &space).unwrap();
            assert!((s.pair_doublet.1 - s.pair_doublet.0 - 2.0 * j).abs() < 1e-12);
            assert!((s.single_photon_level - delta).abs() < 1e-15);
        }
    }

    #[test]
    fn driven_hamiltonian_rejected() {
        let space = HilbertSpace::new(2, 2).unwrap();
        assert!(matches!(
            pair_subspace_spectrum(&SystemParams::default(), &space),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn parabola_recovers_exact_vertex() {
        let xs = [0.0, 0.5, 1.3, 2.0, 2.2];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - (x - 1.1) * (x - 1.1)).collect();
        assert!((refine_peak(&xs, &ys).unwrap() - 1.1).abs() < 1e-12);
        let logs = [0.1, 1.0, 10.0, 100.0];
        let ys: Vec<f64> = logs.iter().map(|x: &f64| -(x.log10() - 0.3).powi(2)).collect();
        assert!((refine_peak_log(&logs, &ys).unwrap() - 10f64.powf(0.3)).abs() < 1e-9);
    }

    #[test]
    fn edge_maximum_is_rejected() {
        assert!(refine_peak(&[0.0, 1.0, 2.0], &[3.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn symmetric_input_gives_symmetric_peaks() {
        let xs: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.137).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| (-(x.abs() - 2.9_f64).powi(2)).exp() + 0.01 * x * x * 0.0)
            .collect();
        let (lo, hi) = locate_symmetric_peaks(&xs, &ys).unwrap();
        assert_eq!(lo, -hi);
        assert!((hi - 2.9).abs() < 0.137);
    }

    #[test]
    fn malformed_grids_rejected() {
        let ys = [0.0; 5];
        assert!(locate_symmetric_peaks(&[-2.0, -1.0, 0.0, 1.0, 3.0], &ys).is_err());
        assert!(locate_symmetric_peaks(&[-1.0, 0.0, 1.0], &ys[..3]).is_err());
        assert!(locate_symmetric_peaks(&[1.0, 0.0, -1.0], &ys[..3]).is_err());
    }
}
