use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::operator::ensure_same;
use super::{hermiticity_defect, HilbertSpace, Level, Operator, C64, ONE, ZERO};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-12;

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: Arc<HilbertSpace>,
    data: DVector<C64>,
}

impl StateVector {
    /// Validates `‖ψ‖ = 1 ± 1e-9`.
    pub fn new(space: Arc<HilbertSpace>, data: DVector<C64>) -> Result<Self> {
        if data.len() != space.dim() {
            return Err(Error::SpaceMismatch(format!(
                "vector of length {} on space of dimension {}",
                data.len(),
                space.dim()
            )));
        }
        let norm = data.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { space, data })
    }

    /// Normalizes `data` first; rejects the zero vector.
    pub fn normalized(space: Arc<HilbertSpace>, data: DVector<C64>) -> Result<Self> {
        let norm = data.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(space, data / C64::new(norm, 0.0))
    }

    pub fn basis(space: &Arc<HilbertSpace>, levels: &[Level]) -> Result<Self> {
        let mut data = DVector::zeros(space.dim());
        data[space.index_of(levels)?] = ONE;
        Ok(Self { space: space.clone(), data })
    }

    /// Normalized superposition `Σ c_k |levels_k>`.
    pub fn superposition(space: &Arc<HilbertSpace>, terms: &[(C64, &[Level])]) -> Result<Self> {
        let mut data = DVector::zeros(space.dim());
        for (amp, levels) in terms {
            data[space.index_of(levels)?] += *amp;
        }
        Self::normalized(space.clone(), data)
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn data(&self) -> &DVector<C64> {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        ensure_same(&self.space, &other.space)?;
        Ok(self.data.dotc(&other.data))
    }
}

/// Density matrix, validated Hermitian (1e-12) with unit trace (1e-9) on
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: Arc<HilbertSpace>,
    data: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(space: Arc<HilbertSpace>, data: DMatrix<C64>) -> Result<Self> {
        let rho = Self::new_unchecked(space, data)?;
        let defect = hermiticity_defect(&rho.data);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = rho.data.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        Ok(rho)
    }

    /// Shape check only. Used for propagated operators such as the
    /// (trace-decreasing) Choi probes `|i><j|`.
    pub fn new_unchecked(space: Arc<HilbertSpace>, data: DMatrix<C64>) -> Result<Self> {
        let d = space.dim();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::SpaceMismatch(format!(
                "matrix is {}x{}, space has dimension {d}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { space, data })
    }

    pub fn pure(psi: &StateVector) -> Self {
        Self { space: psi.space.clone(), data: &psi.data * psi.data.adjoint() }
    }

    pub fn maximally_mixed(space: &Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        Self { space: space.clone(), data: DMatrix::identity(d, d) / C64::new(d as f64, 0.0) }
    }

    /// Uniform mixture of the given product basis states.
    pub fn uniform_mixture(space: &Arc<HilbertSpace>, states: &[&[Level]]) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidState("empty mixture".into()));
        }
        let mut data = DMatrix::zeros(space.dim(), space.dim());
        let w = C64::new(1.0 / states.len() as f64, 0.0);
        for levels in states {
            let i = space.index_of(levels)?;
            data[(i, i)] += w;
        }
        Self::new(space.clone(), data)
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<C64> {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn population(&self, levels: &[Level]) -> Result<f64> {
        let i = self.space.index_of(levels)?;
        Ok(self.data[(i, i)].re)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Row-major vectorization, `vec(ρ)[i*d + j] = ρ_ij`.
    pub fn to_vec_row_major(&self) -> Vec<C64> {
        let d = self.dim();
        let mut v = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                v[i * d + j] = self.data[(i, j)];
            }
        }
        v
    }

    pub fn from_vec_row_major(space: &Arc<HilbertSpace>, v: &[C64]) -> Result<Self> {
        let d = space.dim();
        if v.len() != d * d {
            return Err(Error::SpaceMismatch(format!("vector of length {} for dimension {d}", v.len())));
        }
        Ok(Self { space: space.clone(), data: DMatrix::from_row_slice(d, d, v) })
    }
}

/// `Tr(ρ O)`
pub fn expectation(rho: &DensityMatrix, op: &Operator) -> Result<C64> {
    ensure_same(&rho.space, op.space())?;
    let (a, b) = (&rho.data, op.matrix());
    let d = a.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(acc)
}
