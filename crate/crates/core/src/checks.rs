//! Fast self-checks of the model, solver and observables, run by the CLI
//! `check` command.

use serde::Serialize;

use crate::analytics::pair_subspace_spectrum;
use crate::error::Result;
use crate::fock::HilbertSpace;
use crate::model::{build_liouvillian, SystemParams};
use crate::observables::{ObservableRecord, DEFAULT_FLOOR};
use crate::steady::{
    check_truncation_detailed, default_step, evaluate_point, evolve_to_steady, solve_steady, DensityMatrix,
    DEFAULT_TRUNCATION_TOL,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Reference parameter sets spanning weak and strong coupling, the damping
/// optima and a warm mechanical bath.
pub fn canonical_points() -> Vec<(&'static str, SystemParams)> {
    let base = SystemParams::default();
    vec![
        ("weak_resonant", base),
        (
            "strong_pair_resonance",
            SystemParams {
                delta: 100.0,
                j_coupling: 100.0,
                ..base
            },
        ),
        (
            "intermediate",
            SystemParams {
                delta: 1.0,
                j_coupling: 1.0,
                ..base
            },
        ),
        (
            "weak_damping_optimum",
            SystemParams {
                delta: 0.1,
                gamma_m: 1.32,
                ..base
            },
        ),
        (
            "strong_damping_optimum",
            SystemParams {
                delta: 100.0,
                j_coupling: 100.0,
                gamma_m: 3.47,
                ..base
            },
        ),
        (
            "weak_thermal",
            SystemParams {
                delta: 0.1,
                m_th: 0.01,
                ..base
            },
        ),
    ]
}

/// Largest relative difference over the scalar observables; `None` on one
/// side only counts as infinite.
pub fn record_distance(a: &ObservableRecord, b: &ObservableRecord) -> f64 {
    let rel = |x: f64, y: f64| {
        let d = (x - y).abs();
        if d <= 1e-14 {
            0.0
        } else {
            d / x.abs().max(y.abs())
        }
    };
    let opt = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => rel(x, y),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    };
    [
        rel(a.mean_n, b.mean_n),
        rel(a.mean_m, b.mean_m),
        opt(a.g2_n, b.g2_n),
        opt(a.g2_m, b.g2_m),
        opt(a.g2_nm, b.g2_nm),
        rel(a.log_neg, b.log_neg),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn outcome(name: &'static str, result: Result<(bool, String)>) -> CheckOutcome {
    match result {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn spectral() -> Result<(bool, String)> {
    let space = HilbertSpace::new(2, 2)?;
    let mut worst: f64 = 0.0;
    for (delta, j) in [(0.0, 0.1), (0.0, 100.0), (5.0, 2.0)] {
        let p = SystemParams {
            delta,
            j_coupling: j,
            omega_drive: 0.0,
            ..SystemParams::default()
        };
        let s = pair_subspace_spectrum(&p, &space)?;
        worst = worst
            .max((s.pair_doublet.0 - (delta - j)).abs())
            .max((s.pair_doublet.1 - (delta + j)).abs());
    }
    Ok((worst < 1e-10, format!("max eigenvalue error {worst:.2e}")))
}

fn exact_limits() -> Result<(bool, String)> {
    let vacuum = evaluate_point(
        &SystemParams {
            omega_drive: 0.0,
            ..SystemParams::default()
        },
        &HilbertSpace::new(3, 3)?,
        DEFAULT_FLOOR,
    )?;
    let r = &vacuum.record;
    let vacuum_ok = r.mean_n == 0.0 && r.mean_m == 0.0 && r.g2_nm.is_none() && r.log_neg == 0.0;

    let atom = evaluate_point(
        &SystemParams {
            j_coupling: 0.0,
            ..SystemParams::default()
        },
        &HilbertSpace::new(2, 2)?,
        DEFAULT_FLOOR,
    )?;
    let excited = atom.record.elements.rho22;
    let atom_err = (excited - 4.0 / 9.0).abs();
    Ok((
        vacuum_ok && atom_err < 1e-8,
        format!(
            "vacuum {}, excited population error {atom_err:.2e}",
            if vacuum_ok { "ok" } else { "wrong" }
        ),
    ))
}

fn trace_preservation() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (_, p) in canonical_points() {
        let l = build_liouvillian(&p, &HilbertSpace::new(5, 5)?)?;
        worst = worst.max(l.trace_defect());
    }
    Ok((worst < 1e-12, format!("max |1ᵀL| entry {worst:.2e}")))
}

fn state_invariants() -> Result<(bool, String)> {
    let mut min_eig = f64::INFINITY;
    let mut residual: f64 = 0.0;
    for (_, p) in canonical_points() {
        let space = HilbertSpace::new(5, 5)?;
        let (rho, report) = solve_steady(&build_liouvillian(&p, &space)?, &space)?;
        // construction already enforces the trace and Hermiticity tolerances
        DensityMatrix::new(rho.matrix().clone())?;
        min_eig = min_eig.min(rho.min_eigenvalue());
        residual = residual.max(report.residual_norm);
    }
    Ok((
        min_eig >= -1e-8,
        format!("min eigenvalue {min_eig:.2e}, max residual {residual:.2e}"),
    ))
}

fn detuning_parity() -> Result<(bool, String)> {
    let space = HilbertSpace::new(4, 4)?;
    let mut worst: f64 = 0.0;
    for delta in [0.3, 2.0] {
        let p = SystemParams {
            delta,
            j_coupling: 1.0,
            ..SystemParams::default()
        };
        let plus = evaluate_point(&p, &space, DEFAULT_FLOOR)?;
        let minus = evaluate_point(&SystemParams { delta: -delta, ..p }, &space, DEFAULT_FLOOR)?;
        worst = worst.max(record_distance(&plus.record, &minus.record));
    }
    Ok((worst < 1e-8, format!("max relative difference {worst:.2e}")))
}

fn exchange_symmetry() -> Result<(bool, String)> {
    let space = HilbertSpace::new(4, 4)?;
    let p = SystemParams {
        delta: 0.5,
        j_coupling: 0.5,
        ..SystemParams::default()
    };
    let r = evaluate_point(&p, &space, DEFAULT_FLOOR)?.record;
    let d_mean = (r.mean_n - r.mean_m).abs() / r.mean_n;
    let d_g2 = match (r.g2_n, r.g2_m) {
        (Some(a), Some(b)) => (a - b).abs() / a,
        _ => f64::INFINITY,
    };
    let worst = d_mean.max(d_g2);
    Ok((worst < 1e-8, format!("photon/phonon relative difference {worst:.2e}")))
}

fn scale_covariance() -> Result<(bool, String)> {
    let space = HilbertSpace::new(3, 3)?;
    let p = SystemParams {
        delta: 0.7,
        j_coupling: 2.0,
        ..SystemParams::default()
    };
    let a = evaluate_point(&p, &space, DEFAULT_FLOOR)?.record;
    let b = evaluate_point(&p.scaled(3.5), &space, DEFAULT_FLOOR)?.record;
    let worst = record_distance(&a, &b);
    Ok((worst < 1e-8, format!("max relative difference {worst:.2e}")))
}

fn oracle_agreement() -> Result<(bool, String)> {
    let space = HilbertSpace::new(3, 3)?;
    let l = build_liouvillian(&SystemParams::default(), &space)?;
    let (direct, _) = solve_steady(&l, &space)?;
    let vacuum = DensityMatrix::basis_state(space.total_dim(), 0);
    let evolved = evolve_to_steady(&l, &vacuum, 500.0, default_step(&l))?;
    let diff = (direct.matrix() - evolved.state.matrix()).camax();
    Ok((
        diff < 1e-6,
        format!("max elementwise difference {diff:.2e} after t = {:.1}", evolved.time),
    ))
}

fn truncation() -> Result<(bool, String)> {
    let c = check_truncation_detailed(&SystemParams::default(), (5, 5), DEFAULT_TRUNCATION_TOL, DEFAULT_FLOOR)?;
    Ok((
        c.converged,
        format!(
            "(5,5) vs (10,10): max change {:.2e} in {}",
            c.max_change, c.worst_observable
        ),
    ))
}

fn strong_coupling_population() -> Result<(bool, String)> {
    let p = SystemParams {
        delta: 100.0,
        j_coupling: 100.0,
        gamma_m: 0.01,
        ..SystemParams::default()
    };
    let rho33 = evaluate_point(&p, &HilbertSpace::new(5, 5)?, DEFAULT_FLOOR)?
        .record
        .elements
        .rho33;
    Ok((
        (rho33 - 0.875).abs() <= 0.03,
        format!("single-phonon population {rho33:.4}"),
    ))
}

/// Runs all quick checks. Each takes at most a few seconds.
pub fn run_quick_checks() -> Vec<CheckOutcome> {
    vec![
        outcome("spectrum", spectral()),
        outcome("exact_limits", exact_limits()),
        outcome("trace_preservation", trace_preservation()),
        outcome("state_invariants", state_invariants()),
        outcome("detuning_parity", detuning_parity()),
        outcome("exchange_symmetry", exchange_symmetry()),
        outcome("scale_covariance", scale_covariance()),
        outcome("oracle_agreement", oracle_agreement()),
        outcome("truncation", truncation()),
        outcome("strong_coupling_population", strong_coupling_population()),
    ]
}
