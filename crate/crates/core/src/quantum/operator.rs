use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{hermiticity_defect, CsrMatrix, HilbertSpace, Level, StateVector, C64, MAX_DIM, ONE};
use crate::error::{Error, Result};

/// A dense complex matrix acting on a [`HilbertSpace`].
///
/// All model operators live on spaces of dimension at most 36, so dense
/// storage is used throughout; sparse storage is reserved for superoperators
/// and the propagation kernels (see [`CsrMatrix`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: Arc<HilbertSpace>,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(space: Arc<HilbertSpace>, matrix: DMatrix<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::SpaceMismatch(format!(
                "matrix is {}x{}, space {} has dimension {d}",
                matrix.nrows(),
                matrix.ncols(),
                space
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: &Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        Self { space: space.clone(), matrix: DMatrix::zeros(d, d) }
    }

    pub fn identity(space: &Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        Self { space: space.clone(), matrix: DMatrix::identity(d, d) }
    }

    /// `|ket><bra|`
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Result<Self> {
        ensure_same(ket.space(), bra.space())?;
        let m = ket.data() * bra.data().adjoint();
        Ok(Self { space: ket.space().clone(), matrix: m })
    }

    pub fn projector(state: &StateVector) -> Self {
        let m = state.data() * state.data().adjoint();
        Self { space: state.space().clone(), matrix: m }
    }

    /// `|a><b|` between two product basis states.
    pub fn basis_transition(space: &Arc<HilbertSpace>, to: &[Level], from: &[Level]) -> Result<Self> {
        let (i, j) = (space.index_of(to)?, space.index_of(from)?);
        let mut op = Self::zeros(space);
        op.matrix[(i, j)] = ONE;
        Ok(op)
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// Matrix element between product basis states, `<to|O|from>`.
    pub fn element(&self, to: &[Level], from: &[Level]) -> Result<C64> {
        Ok(self.matrix[(self.space.index_of(to)?, self.space.index_of(from)?)])
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * c }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn nnz(&self) -> usize {
        self.matrix.iter().filter(|z| **z != C64::new(0.0, 0.0)).count()
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    pub fn apply(&self, psi: &StateVector) -> Result<DVector<C64>> {
        ensure_same(&self.space, psi.space())?;
        Ok(&self.matrix * psi.data())
    }

    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::from_dense(&self.matrix)
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        ensure_same(&self.space, &other.space)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        ensure_same(&self.space, &other.space)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix * &other.matrix })
    }
}

pub(crate) fn ensure_same(a: &Arc<HilbertSpace>, b: &Arc<HilbertSpace>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!("{a} vs {b}")))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&Operator> for &Operator {
            type Output = Operator;

            /// Panics if the operands live on different spaces.
            fn $method(self, rhs: &Operator) -> Operator {
                ensure_same(&self.space, &rhs.space).expect("operator space mismatch");
                Operator { space: self.space.clone(), matrix: &self.matrix $op &rhs.matrix }
            }
        }

        impl $tr<Operator> for Operator {
            type Output = Operator;

            fn $method(self, rhs: Operator) -> Operator {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Mul<C64> for &Operator {
    type Output = Operator;

    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;

    fn mul(self, rhs: f64) -> Operator {
        self.scale_re(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;

    fn neg(self) -> Operator {
        self.scale_re(-1.0)
    }
}

/// Kronecker product of raw matrices with the dimension limit enforced.
pub(crate) fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let rows = a.nrows().checked_mul(b.nrows()).ok_or(Error::DimensionOverflow(usize::MAX))?;
    let cols = a.ncols().checked_mul(b.ncols()).ok_or(Error::DimensionOverflow(usize::MAX))?;
    if rows > MAX_DIM || cols > MAX_DIM {
        return Err(Error::DimensionOverflow(rows.max(cols)));
    }
    Ok(a.kronecker(b))
}

/// `A ⊗ B` on the product of the operands' spaces, site-1-major.
pub fn tensor_product(a: &Operator, b: &Operator) -> Result<Operator> {
    let matrix = kron(&a.matrix, &b.matrix)?;
    let space = HilbertSpace::product(&a.space, &b.space)?;
    Operator::new(space, matrix)
}

/// `|to><from|` acting on `site`, identity on the other site.
pub fn transition_operator(
    space: &Arc<HilbertSpace>,
    site: usize,
    from: Level,
    to: Level,
) -> Result<Operator> {
    if site >= space.num_sites() {
        return Err(Error::InvalidState(format!(
            "site {site} out of range for a {}-site space",
            space.num_sites()
        )));
    }
    space.level_index(site, from)?;
    space.level_index(site, to)?;
    let mut op = Operator::zeros(space);
    let d = space.dim();
    for idx in 0..d {
        let levels = space.levels_of(idx);
        if levels[site] != from {
            continue;
        }
        let mut target = levels.clone();
        target[site] = to;
        let row = space.index_of(&target)?;
        op.matrix[(row, idx)] = ONE;
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::Level::*;

    fn qutrit_pair() -> Arc<HilbertSpace> {
        HilbertSpace::pair(&[G0, G1, R]).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let s = HilbertSpace::single(&[G0, G1]).unwrap();
        let i2 = Operator::identity(&s);
        let i4 = tensor_product(&i2, &i2).unwrap();
        assert_eq!(i4.matrix(), &DMatrix::<C64>::identity(4, 4));
        assert_eq!(i4.space().num_sites(), 2);
    }

    #[test]
    fn five_by_five_dimension() {
        let s = HilbertSpace::single(&[G0, G1, R, P1, P2]).unwrap();
        let op = tensor_product(&Operator::identity(&s), &Operator::identity(&s)).unwrap();
        assert_eq!(op.dim(), 25);
    }

    #[test]
    fn kron_rejects_huge_dimension() {
        let a = DMatrix::<C64>::identity(101, 101);
        assert!(matches!(kron(&a, &a), Err(Error::DimensionOverflow(10201))));
    }

    #[test]
    fn flip_first_site_basis_action() {
        let single = HilbertSpace::single(&[G0, G1, R]).unwrap();
        let flip = Operator::basis_transition(&single, &[G1], &[G0]).unwrap();
        let op = tensor_product(&flip, &Operator::identity(&single)).unwrap();
        let space = op.space().clone();
        let psi = StateVector::basis(&space, &[G0, R]).unwrap();
        let out = op.apply(&psi).unwrap();
        let expected = StateVector::basis(&space, &[G1, R]).unwrap();
        assert_eq!(out, expected.data().clone());
    }

    #[test]
    fn transition_matrix_units() {
        let s = qutrit_pair();
        let op = transition_operator(&s, 0, R, G1).unwrap();
        for x in [G0, G1, R] {
            assert_eq!(op.element(&[G1, x], &[R, x]).unwrap(), ONE);
        }
        assert_eq!(op.nnz(), 3);
        assert!(op.matrix().iter().all(|z| *z == C64::new(0.0, 0.0) || *z == ONE));
    }

    #[test]
    fn transition_adjoint_and_projector() {
        let s = qutrit_pair();
        for site in 0..2 {
            for a in [G0, G1, R] {
                for b in [G0, G1, R] {
                    let t = transition_operator(&s, site, a, b).unwrap();
                    assert_eq!(t.adjoint(), transition_operator(&s, site, b, a).unwrap());
                    let prod = &t * &transition_operator(&s, site, b, a).unwrap();
                    assert_eq!(prod, transition_operator(&s, site, b, b).unwrap());
                }
                let p = transition_operator(&s, site, a, a).unwrap();
                assert_eq!(p.trace(), C64::new(3.0, 0.0));
            }
        }
    }

    #[test]
    fn transition_unknown_label() {
        let s = qutrit_pair();
        let err = transition_operator(&s, 1, P1, G0).unwrap_err();
        assert!(matches!(err, Error::UnknownLevel { site: 1, .. }));
    }

    #[test]
    fn a_short_rejected_in_pair() {
        assert!(HilbertSpace::pair(&[G0, G1, R, AShort]).is_err());
        assert!(HilbertSpace::single(&[G0, G1, R, AShort]).is_ok());
    }
}
