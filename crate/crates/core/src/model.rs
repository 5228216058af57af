//! Rotating-frame Hamiltonian and Lindblad generator.
//!
//! Density matrices are vectorized by stacking columns: the entry `ρ[r, c]`
//! sits at `c·dim + r`. Under this convention
//! `vec(AρB) = (Bᵀ ⊗ A)·vec(ρ)`, with the left Kronecker factor carrying the
//! slow index. Row stacking would flip the factor order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{dagger, HilbertSpace, ModeOperators, OperatorMatrix};
use crate::sparse::CsrMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Physical parameters, all rates in units of the atomic damping `kappa`.
///
/// The defaults are the weak-coupling reference point: `J = 0.1`, `Ω = 1`,
/// `γ_c = γ_m = 10`, `m_th = 0`, resonant drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Detuning Δ of the drive from the atomic transition.
    pub delta: f64,
    /// Tripartite atom-photon-phonon coupling J.
    pub j_coupling: f64,
    /// Atomic drive strength Ω.
    pub omega_drive: f64,
    /// Atomic damping rate.
    pub kappa: f64,
    /// Cavity damping rate.
    pub gamma_c: f64,
    /// Mechanical damping rate.
    pub gamma_m: f64,
    /// Mean thermal phonon number of the mechanical bath.
    pub m_th: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            delta: 0.0,
            j_coupling: 0.1,
            omega_drive: 1.0,
            kappa: 1.0,
            gamma_c: 10.0,
            gamma_m: 10.0,
            m_th: 0.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("delta", self.delta),
            ("j_coupling", self.j_coupling),
            ("omega_drive", self.omega_drive),
            ("kappa", self.kappa),
            ("gamma_c", self.gamma_c),
            ("gamma_m", self.gamma_m),
            ("m_th", self.m_th),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::param(name, format!("must be finite, got {value}")));
            }
            if name != "delta" && value < 0.0 {
                return Err(Error::param(name, format!("must be non-negative, got {value}")));
            }
        }
        if self.kappa <= 0.0 {
            return Err(Error::param("kappa", format!("must be positive, got {}", self.kappa)));
        }
        Ok(())
    }

    /// Multiplies every frequency and rate by `s`; `m_th` is dimensionless and kept.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            delta: s * self.delta,
            j_coupling: s * self.j_coupling,
            omega_drive: s * self.omega_drive,
            kappa: s * self.kappa,
            gamma_c: s * self.gamma_c,
            gamma_m: s * self.gamma_m,
            m_th: self.m_th,
        }
    }

    /// Largest damping rate appearing in the generator.
    pub fn max_rate(&self) -> f64 {
        [self.kappa, self.gamma_c, self.gamma_m * (self.m_th + 1.0)]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// `H = Δσ₊σ₋ + Δa†a + J(σ₊ab + σ₋a†b†) + Ω(σ₊ + σ₋)`.
///
/// The mechanical mode carries no frame term.
pub fn build_hamiltonian(params: &SystemParams, space: &HilbertSpace) -> Result<OperatorMatrix> {
    params.validate()?;
    let ops = ModeOperators::new(space)?;
    Ok(hamiltonian_from(params, &ops))
}

fn hamiltonian_from(params: &SystemParams, ops: &ModeOperators) -> OperatorMatrix {
    let sp = dagger(&ops.sigma_minus);
    let ad = dagger(&ops.a);
    let bd = dagger(&ops.b);
    let atom = sp.matmul(&ops.sigma_minus);
    let photon = ad.matmul(&ops.a);
    let pair_up = ops.sigma_minus.matmul(&ad).matmul(&bd);
    let pair_down = sp.matmul(&ops.a).matmul(&ops.b);
    let drive = sp.add(&ops.sigma_minus);

    atom.add(&photon)
        .scale(re(params.delta))
        .add(&pair_down.add(&pair_up).scale(re(params.j_coupling)))
        .add(&drive.scale(re(params.omega_drive)))
}

/// Superoperator acting on column-stacked density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    state_dim: usize,
    matrix: CsrMatrix,
}

impl Liouvillian {
    pub fn from_matrix(state_dim: usize, matrix: CsrMatrix) -> Result<Self> {
        if matrix.dim() != state_dim * state_dim {
            return Err(Error::InvalidDimension {
                context: "liouvillian",
                expected: state_dim * state_dim,
                found: matrix.dim(),
            });
        }
        Ok(Self { state_dim, matrix })
    }

    pub fn zeros(state_dim: usize) -> Self {
        Self {
            state_dim,
            matrix: CsrMatrix::zeros(state_dim * state_dim),
        }
    }

    /// `−i[H, ·]` as a superoperator.
    pub fn hamiltonian_part(h: &OperatorMatrix) -> Self {
        let n = h.dim();
        let id = CsrMatrix::identity(n);
        let comm = id.kron(h).sub(&h.transpose().kron(&id));
        Self {
            state_dim: n,
            matrix: comm.scale(-I),
        }
    }

    /// Dimension of the density matrices it acts on.
    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    /// Dimension of the superoperator, `state_dim²`.
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.state_dim != other.state_dim {
            return Err(Error::InvalidDimension {
                context: "liouvillian sum",
                expected: self.state_dim,
                found: other.state_dim,
            });
        }
        Ok(Self {
            state_dim: self.state_dim,
            matrix: self.matrix.add(&other.matrix),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            state_dim: self.state_dim,
            matrix: self.matrix.scale(re(s)),
        }
    }

    pub fn apply_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.matrix.matvec(v)
    }

    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        unvectorize(&self.apply_vec(&vectorize(rho)), self.state_dim)
    }

    /// Largest entry of `vec(I)†·L`; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let n = self.state_dim;
        let mut tr = vec![Complex64::new(0.0, 0.0); n * n];
        for k in 0..n {
            tr[k * n + k] = re(1.0);
        }
        self.matrix.vecmat(&tr).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Column-stacking vectorization.
pub fn vectorize(rho: &DMatrix<Complex64>) -> Vec<Complex64> {
    // nalgebra storage is column-major already
    rho.as_slice().to_vec()
}

pub fn unvectorize(v: &[Complex64], dim: usize) -> DMatrix<Complex64> {
    assert_eq!(v.len(), dim * dim, "vector length must be dim²");
    DMatrix::from_column_slice(dim, dim, v)
}

/// `rate·(oρo† − (o†oρ + ρo†o)/2)` as a superoperator.
pub fn lindblad_dissipator(op: &OperatorMatrix, rate: f64) -> Result<Liouvillian> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::param(
            "rate",
            format!("must be finite and non-negative, got {rate}"),
        ));
    }
    let n = op.dim();
    if rate == 0.0 {
        return Ok(Liouvillian::zeros(n));
    }
    let id = CsrMatrix::identity(n);
    let od_o = dagger(op).matmul(op);
    let jump = op.conj().kron(op);
    let anti = id.kron(&od_o).add(&od_o.transpose().kron(&id));
    let matrix = jump.sub(&anti.scale(re(0.5))).scale(re(rate));
    Ok(Liouvillian { state_dim: n, matrix })
}

/// Full generator: coherent part plus atomic, cavity and thermal mechanical dissipators.
pub fn build_liouvillian(params: &SystemParams, space: &HilbertSpace) -> Result<Liouvillian> {
    params.validate()?;
    let ops = ModeOperators::new(space)?;
    let h = hamiltonian_from(params, &ops);
    let bd = dagger(&ops.b);
    let terms = [
        lindblad_dissipator(&ops.sigma_minus, params.kappa)?,
        lindblad_dissipator(&ops.a, params.gamma_c)?,
        lindblad_dissipator(&ops.b, params.gamma_m * (params.m_th + 1.0))?,
        lindblad_dissipator(&bd, params.gamma_m * params.m_th)?,
    ];
    terms
        .iter()
        .try_fold(Liouvillian::hamiltonian_part(&h), |acc, d| acc.add(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{sigma_minus, EXCITED, GROUND};
    use proptest::prelude::*;

    fn canonical() -> SystemParams {
        SystemParams {
            delta: 0.1,
            j_coupling: 0.1,
            omega_drive: 1.0,
            kappa: 1.0,
            gamma_c: 10.0,
            gamma_m: 10.0,
            m_th: 0.0,
        }
    }

    fn random_matrix(dim: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim)
            .prop_map(move |v| DMatrix::from_iterator(dim, dim, v.into_iter().map(|(r, i)| Complex64::new(r, i))))
    }

    #[test]
    fn undriven_hamiltonian_is_diagonal_with_frame_terms() {
        let space = HilbertSpace::new(3, 3).unwrap();
        let params = SystemParams {
            delta: 0.7,
            j_coupling: 0.0,
            omega_drive: 0.0,
            ..canonical()
        };
        let h = build_hamiltonian(&params, &space).unwrap();
        assert!(h.is_diagonal());
        let at = |s, n, m| h.get(space.index(s, n, m), space.index(s, n, m)).re;
        assert_eq!(at(EXCITED, 0, 0), 0.7);
        assert_eq!(at(GROUND, 1, 1), 0.7);
        assert_eq!(at(GROUND, 0, 1), 0.0);
    }

    #[test]
    fn pair_block_and_matrix_element() {
        for (nc, nm) in [(1, 1), (2, 3), (5, 5)] {
            let space = HilbertSpace::new(nc, nm).unwrap();
            let params = SystemParams {
                delta: 0.3,
                j_coupling: 2.5,
                omega_drive: 0.0,
                ..canonical()
            };
            let h = build_hamiltonian(&params, &space).unwrap();
            let e00 = space.index(EXCITED, 0, 0);
            let g11 = space.index(GROUND, 1, 1);
            assert_eq!(h.get(g11, e00), re(2.5));
            assert_eq!(h.get(e00, g11), re(2.5));
            assert_eq!(h.get(e00, e00), re(0.3));
            assert_eq!(h.get(g11, g11), re(0.3));
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let space = HilbertSpace::new(4, 3).unwrap();
        let h = build_hamiltonian(&canonical(), &space).unwrap();
        assert!(h.hermiticity_defect() <= 1e-14);
        assert_eq!(dagger(&h), h);
    }

    #[test]
    fn dissipator_zero_rate_and_negative_rate() {
        let d = lindblad_dissipator(&sigma_minus(), 0.0).unwrap();
        assert_eq!(d.matrix().nnz(), 0);
        assert!(matches!(
            lindblad_dissipator(&sigma_minus(), -1.0),
            Err(Error::InvalidParameter { name: "rate", .. })
        ));
    }

    #[test]
    fn atomic_decay_of_excited_population() {
        let d = lindblad_dissipator(&sigma_minus(), 0.8).unwrap();
        let mut ee = DMatrix::from_element(2, 2, re(0.0));
        ee[(EXCITED, EXCITED)] = re(1.0);
        let out = d.apply(&ee);
        let mut expected = DMatrix::from_element(2, 2, re(0.0));
        expected[(GROUND, GROUND)] = re(0.8);
        expected[(EXCITED, EXCITED)] = re(-0.8);
        assert!((out - expected).camax() < 1e-15);
    }

    #[test]
    fn vectorization_contract() {
        // vec(AρB) = (Bᵀ ⊗ A) vec(ρ)
        let a = DMatrix::from_fn(3, 3, |r, c| Complex64::new(r as f64 + 1.0, c as f64 - 0.5));
        let b = DMatrix::from_fn(3, 3, |r, c| Complex64::new((r * c) as f64, 1.0));
        let rho = DMatrix::from_fn(3, 3, |r, c| Complex64::new(r as f64, -(c as f64)));
        let lhs = vectorize(&(&a * &rho * &b));
        let sup = CsrMatrix::from_dense(&b.transpose()).kron(&CsrMatrix::from_dense(&a));
        let rhs = sup.matvec(&vectorize(&rho));
        for (x, y) in lhs.iter().zip(&rhs) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn canonical_liouvillian_is_trace_preserving() {
        let space = HilbertSpace::new(5, 5).unwrap();
        let l = build_liouvillian(&canonical(), &space).unwrap();
        assert_eq!(l.dim(), space.total_dim().pow(2));
        assert!(l.trace_defect() <= 1e-12, "defect {}", l.trace_defect());
    }

    #[test]
    fn coherent_generator_annihilates_eigenprojectors() {
        let space = HilbertSpace::new(1, 1).unwrap();
        let params = SystemParams {
            kappa: 1.0,
            gamma_c: 0.0,
            gamma_m: 0.0,
            omega_drive: 0.0,
            ..canonical()
        };
        let h = build_hamiltonian(&params, &space).unwrap();
        let l = Liouvillian::hamiltonian_part(&h);
        let eig = nalgebra::SymmetricEigen::new(h.to_dense());
        for k in 0..space.total_dim() {
            let v = eig.eigenvectors.column(k);
            let proj = v * v.adjoint();
            assert!(l.apply(&proj).camax() < 1e-12);
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        let space = HilbertSpace::new(2, 2).unwrap();
        let bad = [
            SystemParams {
                kappa: 0.0,
                ..canonical()
            },
            SystemParams {
                gamma_m: -0.1,
                ..canonical()
            },
            SystemParams {
                m_th: -1.0,
                ..canonical()
            },
            SystemParams {
                delta: f64::NAN,
                ..canonical()
            },
        ];
        for p in bad {
            assert!(build_liouvillian(&p, &space).is_err(), "{p:?}");
        }
        let neg_delta = SystemParams {
            delta: -3.0,
            ..canonical()
        };
        assert!(build_liouvillian(&neg_delta, &space).is_ok());
    }

    #[test]
    fn scale_covariance_of_generator() {
        let space = HilbertSpace::new(2, 2).unwrap();
        let base = SystemParams {
            m_th: 0.3,
            ..canonical()
        };
        let l1 = build_liouvillian(&base, &space).unwrap();
        let l3 = build_liouvillian(&base.scaled(3.0), &space).unwrap();
        let diff = l3.matrix().sub(&l1.scale(3.0).matrix().clone()).max_abs();
        assert!(diff < 1e-12, "diff {diff}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn dissipator_preserves_trace(op in random_matrix(3), rate in 0.0f64..5.0) {
            let d = lindblad_dissipator(&CsrMatrix::from_dense(&op), rate).unwrap();
            prop_assert!(d.trace_defect() < 1e-12);
        }

        #[test]
        fn generator_preserves_hermiticity(x in random_matrix(8), delta in -2.0f64..2.0, mth in 0.0f64..1.0) {
            let space = HilbertSpace::new(1, 1).unwrap();
            let params = SystemParams { delta, m_th: mth, ..canonical() };
            let l = build_liouvillian(&params, &space).unwrap();
            let rho = &x + x.adjoint();
            let out = l.apply(&rho);
            prop_assert!((&out - out.adjoint()).camax() < 1e-12);
        }
    }
}
