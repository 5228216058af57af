//! Truncated Fock-space operators for the atom ⊗ cavity ⊗ mechanics system.
//!
//! Composite basis index for atom level `s` (0 = g, 1 = e), photon number `n`
//! and phonon number `m`:
//!
//! ```text
//! i = s·(N_c+1)·(N_m+1) + n·(N_m+1) + m
//! ```
//!
//! The atom is the slowest-varying index, so the two atomic blocks of any
//! composite matrix are contiguous.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Operators are stored sparse; H and the jump operators have O(dim) entries.
pub type OperatorMatrix = CsrMatrix;

/// Atomic level labels under the basis contract.
pub const GROUND: usize = 0;
pub const EXCITED: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Atom,
    Cavity,
    Mech,
}

/// Truncated composite space: two-level atom, cavity with Fock states
/// `0..=cavity_levels`, mechanics with Fock states `0..=mech_levels`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    cavity_levels: usize,
    mech_levels: usize,
}

impl HilbertSpace {
    pub const ATOM_DIM: usize = 2;

    pub fn new(cavity_levels: usize, mech_levels: usize) -> Result<Self> {
        for (name, levels) in [("cavity_levels", cavity_levels), ("mech_levels", mech_levels)] {
            if levels < 1 {
                return Err(Error::param(name, format!("must be >= 1, got {levels}")));
            }
        }
        Ok(Self {
            cavity_levels,
            mech_levels,
        })
    }

    pub fn cavity_levels(&self) -> usize {
        self.cavity_levels
    }

    pub fn mech_levels(&self) -> usize {
        self.mech_levels
    }

    pub fn cavity_dim(&self) -> usize {
        self.cavity_levels + 1
    }

    pub fn mech_dim(&self) -> usize {
        self.mech_levels + 1
    }

    /// Dimension of the photon ⊗ phonon factor.
    pub fn modes_dim(&self) -> usize {
        self.cavity_dim() * self.mech_dim()
    }

    pub fn total_dim(&self) -> usize {
        Self::ATOM_DIM * self.modes_dim()
    }

    pub fn slot_dim(&self, slot: Slot) -> usize {
        match slot {
            Slot::Atom => Self::ATOM_DIM,
            Slot::Cavity => self.cavity_dim(),
            Slot::Mech => self.mech_dim(),
        }
    }

    /// Composite index of basis state `|s⟩|n, m⟩`.
    pub fn index(&self, s: usize, n: usize, m: usize) -> usize {
        debug_assert!(s < 2 && n <= self.cavity_levels && m <= self.mech_levels);
        s * self.modes_dim() + n * self.mech_dim() + m
    }

    /// Inverse of [`HilbertSpace::index`].
    pub fn labels(&self, i: usize) -> (usize, usize, usize) {
        let s = i / self.modes_dim();
        let rem = i % self.modes_dim();
        (s, rem / self.mech_dim(), rem % self.mech_dim())
    }

    /// The same space with both truncations doubled.
    pub fn doubled(&self) -> Self {
        Self {
            cavity_levels: 2 * self.cavity_levels,
            mech_levels: 2 * self.mech_levels,
        }
    }
}

/// Ladder operator on Fock states `0..=levels`: entry √k at `(k−1, k)`.
pub fn annihilation(levels: usize) -> Result<OperatorMatrix> {
    if levels < 1 {
        return Err(Error::InvalidDimension {
            context: "annihilation",
            expected: 1,
            found: levels,
        });
    }
    let trip = (1..=levels)
        .map(|k| (k - 1, k, Complex64::new((k as f64).sqrt(), 0.0)))
        .collect();
    Ok(CsrMatrix::from_triplets(levels + 1, trip))
}

/// Atomic lowering operator `|g⟩⟨e|`.
pub fn sigma_minus() -> OperatorMatrix {
    CsrMatrix::from_triplets(2, vec![(GROUND, EXCITED, Complex64::new(1.0, 0.0))])
}

pub fn dagger(op: &OperatorMatrix) -> OperatorMatrix {
    op.adjoint()
}

/// Embeds a single-subsystem operator as `I ⊗ op ⊗ I` in the composite space.
pub fn embed(op: &OperatorMatrix, slot: Slot, space: &HilbertSpace) -> Result<OperatorMatrix> {
    let expected = space.slot_dim(slot);
    if op.dim() != expected {
        return Err(Error::InvalidDimension {
            context: "embed",
            expected,
            found: op.dim(),
        });
    }
    let id = CsrMatrix::identity;
    let full = match slot {
        Slot::Atom => op.kron(&id(space.modes_dim())),
        Slot::Cavity => id(HilbertSpace::ATOM_DIM).kron(op).kron(&id(space.mech_dim())),
        Slot::Mech => id(HilbertSpace::ATOM_DIM * space.cavity_dim()).kron(op),
    };
    Ok(full)
}

/// The embedded operator set the model is built from.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub sigma_minus: OperatorMatrix,
    pub a: OperatorMatrix,
    pub b: OperatorMatrix,
}

impl ModeOperators {
    pub fn new(space: &HilbertSpace) -> Result<Self> {
        Ok(Self {
            sigma_minus: embed(&sigma_minus(), Slot::Atom, space)?,
            a: embed(&annihilation(space.cavity_levels())?, Slot::Cavity, space)?,
            b: embed(&annihilation(space.mech_levels())?, Slot::Mech, space)?,
        })
    }

    pub fn photon_number(&self) -> OperatorMatrix {
        dagger(&self.a).matmul(&self.a)
    }

    pub fn phonon_number(&self) -> OperatorMatrix {
        dagger(&self.b).matmul(&self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn annihilation_small_cases() {
        let a1 = annihilation(1).unwrap().to_dense();
        assert_eq!(a1, DMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(0.0), re(0.0)]));

        let a2 = annihilation(2).unwrap();
        assert_eq!(a2.nnz(), 2);
        assert_eq!(a2.get(0, 1), re(1.0));
        assert_eq!(a2.get(1, 2), re(2f64.sqrt()));

        assert!(matches!(annihilation(0), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn truncated_commutator() {
        let levels = 5;
        let a = annihilation(levels).unwrap();
        let ad = dagger(&a);
        let comm = a.matmul(&ad).sub(&ad.matmul(&a)).to_dense();
        for i in 0..=levels {
            for j in 0..=levels {
                let expected = match (i == j, i == levels) {
                    (true, false) => 1.0,
                    (true, true) => -(levels as f64),
                    _ => 0.0,
                };
                assert!((comm[(i, j)] - re(expected)).norm() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn sigma_minus_action() {
        let sm = sigma_minus();
        let e = vec![re(0.0), re(1.0)];
        let g = vec![re(1.0), re(0.0)];
        assert_eq!(sm.matvec(&e), g);
        assert_eq!(sm.matvec(&g), vec![re(0.0), re(0.0)]);
        let proj = dagger(&sm).matmul(&sm);
        assert_eq!(
            proj.to_dense(),
            DMatrix::from_diagonal(&nalgebra::dvector![re(0.0), re(1.0)])
        );
    }

    #[test]
    fn dagger_of_annihilation() {
        let ad = dagger(&annihilation(2).unwrap());
        assert_eq!(ad.get(1, 0), re(1.0));
        assert_eq!(ad.get(2, 1), re(2f64.sqrt()));
        assert_eq!(ad.nnz(), 2);
    }

    #[test]
    fn embed_identity_and_lowering() {
        let space = HilbertSpace::new(3, 2).unwrap();
        let id = embed(&CsrMatrix::identity(2), Slot::Atom, &space).unwrap();
        assert_eq!(id, CsrMatrix::identity(space.total_dim()));

        let a = embed(&annihilation(3).unwrap(), Slot::Cavity, &space).unwrap();
        let mut v = vec![re(0.0); space.total_dim()];
        v[space.index(GROUND, 1, 0)] = re(1.0);
        let out = a.matvec(&v);
        for (i, x) in out.iter().enumerate() {
            let expected = if i == space.index(GROUND, 0, 0) { 1.0 } else { 0.0 };
            assert_eq!(*x, re(expected));
        }

        let err = embed(&annihilation(2).unwrap(), Slot::Cavity, &space).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidDimension {
                expected: 4,
                found: 3,
                ..
            }
        ));
    }

    #[test]
    fn distinct_slots_commute_exactly() {
        let space = HilbertSpace::new(3, 3).unwrap();
        let ops = ModeOperators::new(&space).unwrap();
        let pairs = [(&ops.a, &ops.b), (&ops.a, &ops.sigma_minus), (&ops.b, &ops.sigma_minus)];
        for (x, y) in pairs {
            let comm = x.matmul(y).sub(&y.matmul(x));
            assert_eq!(comm.nnz(), 0);
        }
        let bd = dagger(&ops.b);
        assert_eq!(ops.a.matmul(&bd).sub(&bd.matmul(&ops.a)).nnz(), 0);
    }

    #[test]
    fn number_operators_are_diagonal() {
        let space = HilbertSpace::new(4, 3).unwrap();
        let ops = ModeOperators::new(&space).unwrap();
        let (nop, mop) = (ops.photon_number(), ops.phonon_number());
        assert!(nop.is_diagonal() && mop.is_diagonal());
        for i in 0..space.total_dim() {
            let (_, n, m) = space.labels(i);
            assert!((nop.get(i, i) - re(n as f64)).norm() < 1e-14);
            assert!((mop.get(i, i) - re(m as f64)).norm() < 1e-14);
        }
    }

    #[test]
    fn index_labels_roundtrip() {
        let space = HilbertSpace::new(2, 4).unwrap();
        for i in 0..space.total_dim() {
            let (s, n, m) = space.labels(i);
            assert_eq!(space.index(s, n, m), i);
        }
        assert_eq!(space.total_dim(), 2 * 3 * 5);
    }

    fn small_matrix(dim: usize) -> impl Strategy<Value = CsrMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
            let trip = v
                .into_iter()
                .enumerate()
                .map(|(k, (r, i))| (k / dim, k % dim, Complex64::new(r, i)))
                .collect();
            CsrMatrix::from_triplets(dim, trip)
        })
    }

    proptest! {
        #[test]
        fn embed_preserves_products(x in small_matrix(3), y in small_matrix(3)) {
            let space = HilbertSpace::new(2, 2).unwrap();
            for slot in [Slot::Cavity, Slot::Mech] {
                let lhs = embed(&x.matmul(&y), slot, &space).unwrap().to_dense();
                let rhs = embed(&x, slot, &space).unwrap()
                    .matmul(&embed(&y, slot, &space).unwrap()).to_dense();
                prop_assert!((lhs - rhs).camax() < 1e-12);
            }
        }

        #[test]
        fn dagger_is_involution(x in small_matrix(4)) {
            prop_assert_eq!(dagger(&dagger(&x)), x);
        }
    }
}
