//! Occupations, equal-time correlations, named density-matrix elements and
//! photon-phonon logarithmic negativity of a steady state.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{dagger, HilbertSpace, ModeOperators, OperatorMatrix, EXCITED, GROUND};
use crate::steady::{DensityMatrix, PSD_TOL};

/// Occupation below which correlation functions are reported as undefined.
pub const DEFAULT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Cavity,
    Mech,
}

/// Which factor of the photon ⊗ phonon state gets transposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransposedFactor {
    Photon,
    Phonon,
}

/// `Tr(ρ·op)`.
pub fn expectation(state: &DensityMatrix, op: &OperatorMatrix) -> Complex64 {
    let rho = state.matrix();
    op.triplets().map(|(r, c, v)| v * rho[(c, r)]).sum()
}

fn real_expectation(state: &DensityMatrix, op: &OperatorMatrix) -> f64 {
    // Hermitian observables; drop the rounding-level imaginary residue
    expectation(state, op).re
}

fn check_dim(state: &DensityMatrix, space: &HilbertSpace, context: &'static str) -> Result<()> {
    if state.dim() != space.total_dim() {
        return Err(Error::InvalidDimension {
            context,
            expected: space.total_dim(),
            found: state.dim(),
        });
    }
    Ok(())
}

fn lowering(ops: &ModeOperators, mode: Mode) -> &OperatorMatrix {
    match mode {
        Mode::Cavity => &ops.a,
        Mode::Mech => &ops.b,
    }
}

pub fn mean_number(state: &DensityMatrix, space: &HilbertSpace, mode: Mode) -> Result<f64> {
    check_dim(state, space, "mean_number")?;
    let ops = ModeOperators::new(space)?;
    let o = lowering(&ops, mode);
    Ok(real_expectation(state, &dagger(o).matmul(o)).max(0.0))
}

/// `⟨o†o†oo⟩/⟨o†o⟩²`; `None` when `⟨o†o⟩ < floor`.
pub fn g2_auto(state: &DensityMatrix, space: &HilbertSpace, mode: Mode, floor: f64) -> Result<Option<f64>> {
    check_dim(state, space, "g2_auto")?;
    let ops = ModeOperators::new(space)?;
    Ok(g2_auto_with(state, &ops, mode, floor))
}

fn g2_auto_with(state: &DensityMatrix, ops: &ModeOperators, mode: Mode, floor: f64) -> Option<f64> {
    let o = lowering(ops, mode);
    let od = dagger(o);
    let mean = real_expectation(state, &od.matmul(o));
    if mean < floor {
        return None;
    }
    let pair = real_expectation(state, &od.matmul(&od).matmul(o).matmul(o));
    Some(pair.max(0.0) / (mean * mean))
}

/// `⟨a†b†ba⟩/(⟨n⟩⟨m⟩)`; `None` when either occupation is below `floor`.
pub fn g2_cross(state: &DensityMatrix, space: &HilbertSpace, floor: f64) -> Result<Option<f64>> {
    check_dim(state, space, "g2_cross")?;
    let ops = ModeOperators::new(space)?;
    Ok(g2_cross_with(state, &ops, floor))
}

fn g2_cross_with(state: &DensityMatrix, ops: &ModeOperators, floor: f64) -> Option<f64> {
    let (ad, bd) = (dagger(&ops.a), dagger(&ops.b));
    let n = real_expectation(state, &ad.matmul(&ops.a));
    let m = real_expectation(state, &bd.matmul(&ops.b));
    if n < floor || m < floor {
        return None;
    }
    let joint = real_expectation(state, &ad.matmul(&bd).matmul(&ops.b).matmul(&ops.a));
    Some(joint.max(0.0) / (n * m))
}

/// Photon ⊗ phonon state, index `n·(N_m+1) + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    cavity_dim: usize,
    mech_dim: usize,
    matrix: DMatrix<Complex64>,
}

impl ReducedState {
    pub fn new(matrix: DMatrix<Complex64>, space: &HilbertSpace) -> Result<Self> {
        let dim = space.modes_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidDimension {
                context: "reduced state",
                expected: dim,
                found: matrix.nrows(),
            });
        }
        // reuse the full density-matrix checks
        let valid = DensityMatrix::new(matrix)?;
        Ok(Self {
            cavity_dim: space.cavity_dim(),
            mech_dim: space.mech_dim(),
            matrix: valid.into_matrix(),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn partial_transpose(&self, factor: TransposedFactor) -> DMatrix<Complex64> {
        let (dc, dm) = (self.cavity_dim, self.mech_dim);
        let dim = self.dim();
        DMatrix::from_fn(dim, dim, |row, col| {
            let (n, m) = (row / dm, row % dm);
            let (n2, m2) = (col / dm, col % dm);
            let (src_row, src_col) = match factor {
                TransposedFactor::Photon => (n2 * dm + m, n * dm + m2),
                TransposedFactor::Phonon => (n * dm + m2, n2 * dm + m),
            };
            debug_assert!(src_row < dc * dm && src_col < dc * dm);
            self.matrix[(src_row, src_col)]
        })
    }
}

/// Traces out the atom by summing the two contiguous atomic diagonal blocks.
pub fn partial_trace_atom(state: &DensityMatrix, space: &HilbertSpace) -> Result<ReducedState> {
    check_dim(state, space, "partial_trace_atom")?;
    let d = space.modes_dim();
    let rho = state.matrix();
    let reduced = rho.view((0, 0), (d, d)) + rho.view((d, d), (d, d));
    Ok(ReducedState {
        cavity_dim: space.cavity_dim(),
        mech_dim: space.mech_dim(),
        matrix: reduced,
    })
}

/// `E_N = log₂‖ρ^{T_A}‖₁`, transposing the photon factor.
pub fn log_negativity(reduced: &ReducedState, space: &HilbertSpace) -> Result<f64> {
    log_negativity_wrt(reduced, space, TransposedFactor::Photon)
}

pub fn log_negativity_wrt(reduced: &ReducedState, space: &HilbertSpace, factor: TransposedFactor) -> Result<f64> {
    if reduced.dim() != space.modes_dim() {
        return Err(Error::InvalidDimension {
            context: "log_negativity",
            expected: space.modes_dim(),
            found: reduced.dim(),
        });
    }
    let pt = reduced.partial_transpose(factor);
    let defect = (&pt - pt.adjoint()).camax();
    if defect > PSD_TOL {
        return Err(Error::Consistency(format!(
            "partial transpose not Hermitian (defect {defect:.3e})"
        )));
    }
    let pt = (&pt + pt.adjoint()).unscale(2.0);
    let trace_norm: f64 = SymmetricEigen::new(pt).eigenvalues.iter().map(|l| l.abs()).sum();
    let e_n = trace_norm.log2();
    if e_n < -1e-10 {
        return Err(Error::Consistency(format!("trace norm {trace_norm} below one")));
    }
    Ok(e_n.max(0.0))
}

/// Selected steady-state elements in the bare basis.
///
/// Labels: 1 = |g,0,0⟩, 2 = |e,0,0⟩, 3 = |g,0,1⟩, 4 = |g,1,0⟩, 5 = |g,1,1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NamedElements {
    pub rho11: f64,
    pub rho22: f64,
    pub rho33: f64,
    pub rho44: f64,
    pub rho55: f64,
    pub abs_rho14: f64,
    pub abs_rho15: f64,
    pub abs_rho25: f64,
}

impl NamedElements {
    pub const LABELS: [&'static str; 8] = [
        "rho11",
        "rho22",
        "rho33",
        "rho44",
        "rho55",
        "abs_rho14",
        "abs_rho15",
        "abs_rho25",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.rho11,
            self.rho22,
            self.rho33,
            self.rho44,
            self.rho55,
            self.abs_rho14,
            self.abs_rho15,
            self.abs_rho25,
        ]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> {
        Self::LABELS.into_iter().zip(self.values())
    }

    pub fn population_sum(&self) -> f64 {
        self.rho11 + self.rho22 + self.rho33 + self.rho44 + self.rho55
    }
}

pub fn named_elements(state: &DensityMatrix, space: &HilbertSpace) -> Result<NamedElements> {
    check_dim(state, space, "named_elements")?;
    let labels = [
        space.index(GROUND, 0, 0),
        space.index(EXCITED, 0, 0),
        space.index(GROUND, 0, 1),
        space.index(GROUND, 1, 0),
        space.index(GROUND, 1, 1),
    ];
    let at = |i: usize, j: usize| state.element(labels[i - 1], labels[j - 1]);
    Ok(NamedElements {
        rho11: at(1, 1).re,
        rho22: at(2, 2).re,
        rho33: at(3, 3).re,
        rho44: at(4, 4).re,
        rho55: at(5, 5).re,
        abs_rho14: at(1, 4).norm(),
        abs_rho15: at(1, 5).norm(),
        abs_rho25: at(2, 5).norm(),
    })
}

/// All outputs for one steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub mean_n: f64,
    pub mean_m: f64,
    pub g2_n: Option<f64>,
    pub g2_m: Option<f64>,
    pub g2_nm: Option<f64>,
    pub log_neg: f64,
    pub elements: NamedElements,
}

impl ObservableRecord {
    pub fn from_state(state: &DensityMatrix, space: &HilbertSpace, floor: f64) -> Result<Self> {
        check_dim(state, space, "observables")?;
        let ops = ModeOperators::new(space)?;
        let mean_n = real_expectation(state, &ops.photon_number()).max(0.0);
        let mean_m = real_expectation(state, &ops.phonon_number()).max(0.0);
        let reduced = partial_trace_atom(state, space)?;
        Ok(Self {
            mean_n,
            mean_m,
            g2_n: g2_auto_with(state, &ops, Mode::Cavity, floor),
            g2_m: g2_auto_with(state, &ops, Mode::Mech, floor),
            g2_nm: g2_cross_with(state, &ops, floor),
            log_neg: log_negativity(&reduced, space)?,
            elements: named_elements(state, space)?,
        })
    }
}
