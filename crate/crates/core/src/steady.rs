//! Steady states of the Lindblad generator.
//!
//! [`solve_steady`] replaces one population row of `L` with the trace
//! functional and solves the resulting linear system directly.
//! [`evolve_to_steady`] integrates the master equation with fixed-step RK4 and
//! serves as an independent check on the direct solve.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::HilbertSpace;
use crate::linalg::{reverse_cuthill_mckee, BandedLu, DisjointSets};
use crate::model::{build_liouvillian, unvectorize, Liouvillian, SystemParams};
use crate::observables::{ObservableRecord, DEFAULT_FLOOR};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Derivative norm at which time evolution counts as stationary.
pub const STATIONARY_TOL: f64 = 1e-10;
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-6;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates `matrix` against the density-matrix invariants. A Hermiticity
    /// defect within [`HERMITIAN_TOL`] is symmetrized away; anything larger is
    /// an error.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidDimension {
                context: "density matrix",
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let defect = (&matrix - matrix.adjoint()).camax();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("hermiticity defect {defect:.3e}")));
        }
        let matrix = (&matrix + matrix.adjoint()).unscale(2.0);
        let trace = matrix.trace();
        if (trace - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {trace} differs from 1")));
        }
        let state = Self { matrix };
        let min_eig = state.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(state)
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        Self::new(&v * v.adjoint())
    }

    pub fn from_populations(populations: &[f64]) -> Result<Self> {
        let diag =
            nalgebra::DVector::from_iterator(populations.len(), populations.iter().map(|&p| Complex64::new(p, 0.0)));
        Self::new(DMatrix::from_diagonal(&diag))
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut matrix = DMatrix::from_element(dim, dim, ZERO);
        matrix[(index, index)] = ONE;
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim).unscale(dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Diagnostics attached to every steady-state solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// `‖L·vec(ρ)‖₂` of the returned state.
    pub residual_norm: f64,
    /// `None` until a truncation check has been run.
    pub truncation_converged: Option<bool>,
    /// `(N_c, N_m)` of the space the state lives in.
    pub levels_used: (usize, usize),
}

/// Solves `L·vec(ρ) = 0` with `Tr ρ = 1`.
///
/// `L` is block diagonal whenever the model has a conserved charge (here the
/// photon-minus-phonon number). Only the block coupled to the populations
/// through the trace row is factored; the remaining blocks hold coherences
/// that vanish when the steady state is unique.
pub fn solve_steady(liouvillian: &Liouvillian, space: &HilbertSpace) -> Result<(DensityMatrix, SolveReport)> {
    let n = space.total_dim();
    if liouvillian.state_dim() != n {
        return Err(Error::InvalidDimension {
            context: "solve_steady",
            expected: n,
            found: liouvillian.state_dim(),
        });
    }
    let lmat = liouvillian.matrix();
    let big = lmat.dim();
    let populations: Vec<usize> = (0..n).map(|k| k * n + k).collect();

    let mut sets = DisjointSets::new(big);
    for (r, c, _) in lmat.triplets() {
        sets.union(r, c);
    }
    for &p in &populations[1..] {
        sets.union(populations[0], p);
    }
    let root = sets.find(populations[0]);
    let block: Vec<usize> = (0..big).filter(|&i| sets.find(i) == root).collect();

    let mut x = None;
    let mut last_err = String::new();
    // border on the vacuum population first; it is nonzero for any damped model
    for &border in populations.iter().take(3) {
        match BorderedSystem::factor(liouvillian, &block, border) {
            Ok(system) => {
                x = Some(system.solve_refined(liouvillian, &block)?);
                break;
            }
            Err(e) => last_err = e,
        }
    }
    let Some(block_x) = x else {
        return Err(Error::NonUniqueSteadyState(last_err));
    };

    let mut full = vec![ZERO; big];
    for (&g, &v) in block.iter().zip(&block_x) {
        full[g] = v;
    }
    let state = DensityMatrix::new(unvectorize(&full, n))?;
    let residual_norm = norm2(&liouvillian.apply_vec(state.matrix.as_slice()));
    if !(residual_norm <= RESIDUAL_TOL) {
        return Err(Error::Convergence(format!(
            "steady-state residual {residual_norm:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )));
    }
    let report = SolveReport {
        residual_norm,
        truncation_converged: None,
        levels_used: (space.cavity_levels(), space.mech_levels()),
    };
    Ok((state, report))
}

/// Trace-replaced system `A x = e_border` restricted to one block of `L`,
/// solved by eliminating the border row and column:
///
/// ```text
/// [ B   c ] [y  ]   [0]
/// [ dᵀ  1 ] [x_b] = [1]
/// ```
///
/// `B` is `L` without the border row and column, `c` the border column of `L`,
/// `d` the trace weights. `B` is banded after RCM reordering.
struct BorderedSystem {
    border_local: usize,
    /// block-local index → position in the reduced (banded) ordering
    position: Vec<Option<usize>>,
    lu: BandedLu,
    /// `B⁻¹c`, in reduced ordering
    z: Vec<Complex64>,
    /// trace weights in reduced ordering
    is_population: Vec<bool>,
    schur: Complex64,
}

impl BorderedSystem {
    fn factor(liouvillian: &Liouvillian, block: &[usize], border: usize) -> Result<Self, String> {
        let lmat = liouvillian.matrix();
        let n = liouvillian.state_dim();
        let mut local = vec![usize::MAX; lmat.dim()];
        for (k, &g) in block.iter().enumerate() {
            local[g] = k;
        }
        let border_local = local[border];
        let nb = block.len() - 1;
        let reduced = |k: usize| if k < border_local { k } else { k - 1 };

        let mut adj = vec![Vec::new(); nb];
        let mut entries = Vec::new();
        let mut column = vec![ZERO; nb];
        for (k, &g) in block.iter().enumerate() {
            if k == border_local {
                continue;
            }
            let r = reduced(k);
            for (gc, v) in lmat.row(g) {
                let kc = local[gc];
                if kc == border_local {
                    column[r] += v;
                } else {
                    let c = reduced(kc);
                    entries.push((r, c, v));
                    if r != c {
                        adj[r].push(c);
                        adj[c].push(r);
                    }
                }
            }
        }
        adj.iter_mut().for_each(|a| {
            a.sort_unstable();
            a.dedup();
        });
        let perm = reverse_cuthill_mckee(&adj);
        let mut pos = vec![0; nb];
        for (new, &old) in perm.iter().enumerate() {
            pos[old] = new;
        }

        let scale = entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max).max(1.0);
        let lu = BandedLu::factor(
            nb,
            entries.into_iter().map(|(r, c, v)| (pos[r], pos[c], v)),
            1e-12 * scale,
        )
        .map_err(|p| {
            format!(
                "trace-replaced generator is rank deficient (pivot {:.3e} at column {})",
                p.magnitude, p.column
            )
        })?;

        let mut z = vec![ZERO; nb];
        for (r, v) in column.into_iter().enumerate() {
            z[pos[r]] = v;
        }
        lu.solve_in_place(&mut z);

        let mut position = vec![None; block.len()];
        let mut is_population = vec![false; nb];
        for (k, &g) in block.iter().enumerate() {
            if k == border_local {
                continue;
            }
            let p = pos[reduced(k)];
            position[k] = Some(p);
            is_population[p] = g % (n + 1) == 0;
        }
        let schur = ONE
            - z.iter()
                .zip(&is_population)
                .filter(|(_, &pop)| pop)
                .map(|(v, _)| *v)
                .sum::<Complex64>();
        if !(schur.norm() > 1e-12) {
            return Err(format!(
                "trace row is dependent (Schur complement {:.3e})",
                schur.norm()
            ));
        }
        Ok(Self {
            border_local,
            position,
            lu,
            z,
            is_population,
            schur,
        })
    }

    /// Solves `A x = rhs` where `rhs_trace` is the right-hand side of the trace row.
    fn solve(&self, rhs_rows: &[Complex64], rhs_trace: Complex64) -> Vec<Complex64> {
        let mut w = vec![ZERO; self.z.len()];
        for (k, p) in self.position.iter().enumerate() {
            if let Some(p) = *p {
                w[p] = rhs_rows[k];
            }
        }
        self.lu.solve_in_place(&mut w);
        let dw: Complex64 = w
            .iter()
            .zip(&self.is_population)
            .filter(|(_, &pop)| pop)
            .map(|(v, _)| *v)
            .sum();
        let xb = (rhs_trace - dw) / self.schur;
        let mut x = vec![ZERO; self.position.len()];
        for (k, p) in self.position.iter().enumerate() {
            x[k] = match *p {
                Some(p) => w[p] - xb * self.z[p],
                None => xb,
            };
        }
        x
    }

    fn solve_refined(&self, liouvillian: &Liouvillian, block: &[usize]) -> Result<Vec<Complex64>> {
        let lmat = liouvillian.matrix();
        let n = liouvillian.state_dim();
        let zeros = vec![ZERO; block.len()];
        let mut x = self.solve(&zeros, ONE);
        let mut local = vec![usize::MAX; lmat.dim()];
        for (k, &g) in block.iter().enumerate() {
            local[g] = k;
        }
        for _ in 0..2 {
            let mut res = vec![ZERO; block.len()];
            for (k, &g) in block.iter().enumerate() {
                res[k] = lmat.row(g).map(|(gc, v)| v * x[local[gc]]).sum();
            }
            let trace: Complex64 = block
                .iter()
                .zip(&x)
                .filter(|(&g, _)| g % (n + 1) == 0)
                .map(|(_, v)| *v)
                .sum();
            res[self.border_local] = ZERO;
            let res_trace = trace - ONE;
            if norm2(&res) < 1e-14 && res_trace.norm() < 1e-15 {
                break;
            }
            let dx = self.solve(&res, res_trace);
            x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi -= di);
        }
        Ok(x)
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Outcome of a time integration run.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: DensityMatrix,
    pub time: f64,
    pub steps: usize,
    /// `‖dρ/dt‖` at the returned state.
    pub derivative_norm: f64,
    /// Largest `|Tr ρ(t) − Tr ρ(0)|` seen along the trajectory.
    pub max_trace_drift: f64,
}

/// RK4 step that keeps the spectral radius times the step at or below one,
/// using the largest absolute row sum as the bound.
pub fn default_step(liouvillian: &Liouvillian) -> f64 {
    1.0 / liouvillian.matrix().max_row_sum().max(1.0)
}

/// Integrates `dρ/dt = L(ρ)` with fixed-step RK4 until `‖dρ/dt‖ <`
/// [`STATIONARY_TOL`] or `t_max` is reached.
pub fn evolve_to_steady(
    liouvillian: &Liouvillian,
    initial: &DensityMatrix,
    t_max: f64,
    step: f64,
) -> Result<Evolution> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::param("step", format!("must be positive, got {step}")));
    }
    if !(t_max > 0.0) {
        return Err(Error::param("t_max", format!("must be positive, got {t_max}")));
    }
    let n = liouvillian.state_dim();
    if initial.dim() != n {
        return Err(Error::InvalidDimension {
            context: "evolve_to_steady",
            expected: n,
            found: initial.dim(),
        });
    }
    let lmat = liouvillian.matrix();
    let big = lmat.dim();
    let trace_of = |v: &[Complex64]| (0..n).map(|k| v[k * n + k]).sum::<Complex64>();

    let mut x = initial.matrix().as_slice().to_vec();
    let trace0 = trace_of(&x);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![ZERO; big], vec![ZERO; big], vec![ZERO; big], vec![ZERO; big]);
    let mut tmp = vec![ZERO; big];
    let mut time = 0.0;
    let mut steps = 0;
    let mut drift: f64 = 0.0;
    let h = Complex64::new(step, 0.0);

    loop {
        lmat.matvec_into(&x, &mut k1);
        let derivative_norm = norm2(&k1);
        if derivative_norm < STATIONARY_TOL {
            let state = DensityMatrix::new(unvectorize(&x, n))?;
            return Ok(Evolution {
                state,
                time,
                steps,
                derivative_norm,
                max_trace_drift: drift,
            });
        }
        if time >= t_max {
            return Err(Error::Convergence(format!(
                "time evolution not stationary by t = {t_max}: ‖dρ/dt‖ = {derivative_norm:.3e}"
            )));
        }
        for i in 0..big {
            tmp[i] = x[i] + h * 0.5 * k1[i];
        }
        lmat.matvec_into(&tmp, &mut k2);
        for i in 0..big {
            tmp[i] = x[i] + h * 0.5 * k2[i];
        }
        lmat.matvec_into(&tmp, &mut k3);
        for i in 0..big {
            tmp[i] = x[i] + h * k3[i];
        }
        lmat.matvec_into(&tmp, &mut k4);
        for i in 0..big {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        time += step;
        steps += 1;
        drift = drift.max((trace_of(&x) - trace0).norm());
    }
}

/// Steady state and observables at one parameter point.
#[derive(Debug, Clone)]
pub struct PointEvaluation {
    pub state: DensityMatrix,
    pub record: ObservableRecord,
    pub report: SolveReport,
}

pub fn evaluate_point(params: &SystemParams, space: &HilbertSpace, floor: f64) -> Result<PointEvaluation> {
    let l = build_liouvillian(params, space)?;
    let (state, report) = solve_steady(&l, space)?;
    let record = ObservableRecord::from_state(&state, space, floor)?;
    Ok(PointEvaluation { state, record, report })
}

/// Result of comparing observables at two truncations.
#[derive(Debug, Clone)]
pub struct TruncationCheck {
    pub base: PointEvaluation,
    pub doubled: PointEvaluation,
    /// Largest relative change over the compared observables.
    pub max_change: f64,
    pub worst_observable: &'static str,
    pub converged: bool,
}

impl TruncationCheck {
    /// The base-level report with the convergence verdict filled in.
    pub fn report(&self) -> SolveReport {
        SolveReport {
            truncation_converged: Some(self.converged),
            ..self.base.report
        }
    }
}

fn relative_change(a: f64, b: f64) -> f64 {
    let diff = (a - b).abs();
    // values this close are equal to within rounding of the solve
    if diff <= 1e-14 {
        return 0.0;
    }
    diff / a.abs().max(b.abs())
}

/// Solves at `base_levels` and at twice those levels and compares
/// `⟨n⟩, ⟨m⟩, g²ₙ, g²ₘ, g²ₙₘ, E_N`.
pub fn check_truncation_detailed(
    params: &SystemParams,
    base_levels: (usize, usize),
    tolerance: f64,
    floor: f64,
) -> Result<TruncationCheck> {
    if base_levels.0 < 2 || base_levels.1 < 2 {
        return Err(Error::param(
            "base_levels",
            format!("must be at least (2, 2), got {base_levels:?}"),
        ));
    }
    let space = HilbertSpace::new(base_levels.0, base_levels.1)?;
    let base = evaluate_point(params, &space, floor)?;
    let doubled = evaluate_point(params, &space.doubled(), floor)?;

    let (a, b) = (&base.record, &doubled.record);
    let pairs: [(&'static str, Option<f64>, Option<f64>); 6] = [
        ("mean_n", Some(a.mean_n), Some(b.mean_n)),
        ("mean_m", Some(a.mean_m), Some(b.mean_m)),
        ("g2_n", a.g2_n, b.g2_n),
        ("g2_m", a.g2_m, b.g2_m),
        ("g2_nm", a.g2_nm, b.g2_nm),
        ("log_neg", Some(a.log_neg), Some(b.log_neg)),
    ];
    let mut max_change = 0.0;
    let mut worst = "none";
    for (name, x, y) in pairs {
        let change = match (x, y) {
            (Some(x), Some(y)) => relative_change(x, y),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        if change > max_change {
            max_change = change;
            worst = name;
        }
    }
    Ok(TruncationCheck {
        base,
        doubled,
        max_change,
        worst_observable: worst,
        converged: max_change < tolerance,
    })
}

pub fn check_truncation(params: &SystemParams, base_levels: (usize, usize), tolerance: f64) -> Result<SolveReport> {
    Ok(check_truncation_detailed(params, base_levels, tolerance, DEFAULT_FLOOR)?.report())
}
