//! Scalar read-outs: populations, fidelities, excitation probability and
//! exponential rate fits.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dynamics::{unitary_choi, Probe};
use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, HilbertSpace, Level, Operator, StateVector, C64};

/// `diag(1, 1, 1, -1)`
pub fn cz() -> DMatrix<C64> {
    DMatrix::from_diagonal(&DVector::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
    ]))
}

fn same_shape(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<()> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::SpaceMismatch(format!("gate shapes {:?} and {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

/// `|Tr(U† U_t)|² / d²`
pub fn gate_fidelity_unitary(u: &DMatrix<C64>, target: &DMatrix<C64>) -> Result<f64> {
    same_shape(u, target)?;
    let d = u.nrows() as f64;
    Ok((u.adjoint() * target).trace().norm_sqr() / (d * d))
}

/// `Tr[χ_t χ] / (Tr χ_t)²` with `χ_t` the Choi matrix of the target gate;
/// equals [`gate_fidelity_unitary`] when `χ` comes from a unitary.
pub fn gate_fidelity_process(choi: &DMatrix<C64>, target: &DMatrix<C64>) -> Result<f64> {
    let d = target.nrows();
    if choi.nrows() != d * d || choi.ncols() != d * d {
        return Err(Error::SpaceMismatch(format!("Choi matrix is {:?}, expected {}x{}", choi.shape(), d * d, d * d)));
    }
    let defect = (choi - choi.adjoint()).norm();
    if defect > 1e-9 * choi.norm().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let ideal = unitary_choi(target);
    let norm = ideal.trace().re;
    Ok((&ideal * choi).trace().re / (norm * norm))
}

/// `<t| E(|ψ><ψ|) |t>` for the channel `E` behind a Choi matrix
/// `χ = Σ_ij |i><j| ⊗ E(|i><j|)`.
pub fn choi_state_fidelity(choi: &DMatrix<C64>, input: &DVector<C64>, target: &DVector<C64>) -> Result<f64> {
    let d = input.len();
    if target.len() != d || choi.nrows() != d * d || choi.ncols() != d * d {
        return Err(Error::SpaceMismatch("Choi matrix and state sizes disagree".into()));
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            let w = input[i] * input[j].conj();
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            for a in 0..d {
                for b in 0..d {
                    acc += w * target[a].conj() * choi[(d * i + a, d * j + b)] * target[b];
                }
            }
        }
    }
    Ok(acc.re)
}

/// Pure or mixed state argument of [`population`].
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a StateVector> for StateRef<'a> {
    fn from(s: &'a StateVector) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(s: &'a DensityMatrix) -> Self {
        StateRef::Mixed(s)
    }
}

/// `<φ|ρ|φ>` or `|<φ|ψ>|²`.
pub fn population<'a>(state: impl Into<StateRef<'a>>, target: &StateVector) -> Result<f64> {
    match state.into() {
        StateRef::Pure(psi) => Ok(psi.inner(target)?.norm_sqr()),
        StateRef::Mixed(rho) => {
            if rho.space() != target.space() {
                return Err(Error::SpaceMismatch("state and target spaces differ".into()));
            }
            let phi = target.data();
            Ok((phi.adjoint() * rho.data() * phi)[(0, 0)].re)
        }
    }
}

/// Basis indices of two-atom states with no atom in a Rydberg level.
fn ground_block(space: &HilbertSpace) -> Result<Vec<usize>> {
    if space.num_sites() != 2 {
        return Err(Error::SpaceMismatch("excitation probability needs a two-atom space".into()));
    }
    for level in [Level::G0, Level::G1, Level::Alpha] {
        if !space.has_level(level) {
            return Err(Error::UnknownLevel { site: 0, level: level.name().into() });
        }
    }
    Ok((0..space.dim())
        .filter(|&i| space.levels_of(i).iter().all(|l| !l.is_rydberg()))
        .collect())
}

/// `1 - Σ_{i,j ∈ {0,1,α}} <ij|ρ|ij>`
pub fn excitation_probability(rho: &DensityMatrix) -> Result<f64> {
    let block = ground_block(rho.space())?;
    Ok(1.0 - block.iter().map(|&i| rho.data()[(i, i)].re).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFit {
    /// Decay rate, 1/µs.
    pub rate: f64,
    /// Fitted `ln y` at t = 0.
    pub intercept: f64,
    /// RMS residual of `ln y`.
    pub residual: f64,
}

/// Least-squares slope of `ln y` against `t`.
pub fn fit_exponential_rate(series: &[(f64, f64)]) -> Result<ExpFit> {
    if series.len() < 8 {
        return Err(Error::Fit(format!("need at least 8 points, got {}", series.len())));
    }
    if let Some(&(t, y)) = series.iter().find(|(_, y)| !(*y > 0.0)) {
        return Err(Error::Fit(format!("non-positive sample {y} at t = {t}")));
    }
    let n = series.len() as f64;
    let mt = series.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = series.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, y) in series {
        sxy += (t - mt) * (y.ln() - ml);
        sxx += (t - mt) * (t - mt);
    }
    if sxx == 0.0 {
        return Err(Error::Fit("all samples at the same time".into()));
    }
    let slope = sxy / sxx;
    let intercept = ml - slope * mt;
    let residual =
        (series.iter().map(|&(t, y)| (y.ln() - intercept - slope * t).powi(2)).sum::<f64>() / n).sqrt();
    Ok(ExpFit { rate: -slope, intercept, residual })
}

/// What an observable reads from a state.
#[derive(Debug, Clone)]
pub enum ObservableKind {
    /// `<φ|ρ|φ>` of a basis or superposition state.
    Population(StateVector),
    /// Overlap with a pure target state (same arithmetic as `Population`).
    Fidelity(StateVector),
    /// Expectation of a projector.
    Projector(Operator),
    ExcitationProbability,
    /// Real part of the expectation of any operator.
    Expectation(Operator),
}

#[derive(Debug, Clone)]
pub struct ObservableSpec {
    pub name: String,
    pub kind: ObservableKind,
}

/// Layout of the raw state handed to probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// State vector ψ.
    Pure,
    /// Row-major vec(ρ).
    Density,
}

fn sparse_entries(m: &DMatrix<C64>) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v != C64::new(0.0, 0.0) {
                out.push((i, j, v));
            }
        }
    }
    out
}

impl ObservableSpec {
    pub fn new(name: impl Into<String>, kind: ObservableKind) -> Self {
        Self { name: name.into(), kind }
    }

    pub fn population(name: impl Into<String>, state: StateVector) -> Self {
        Self::new(name, ObservableKind::Population(state))
    }

    fn space(&self) -> Option<&Arc<HilbertSpace>> {
        match &self.kind {
            ObservableKind::Population(s) | ObservableKind::Fidelity(s) => Some(s.space()),
            ObservableKind::Projector(o) | ObservableKind::Expectation(o) => Some(o.space()),
            ObservableKind::ExcitationProbability => None,
        }
    }

    /// Operator `O` with value `Re Tr(ρ O)`.
    fn operator(&self, space: &Arc<HilbertSpace>) -> Result<DMatrix<C64>> {
        Ok(match &self.kind {
            ObservableKind::Population(s) | ObservableKind::Fidelity(s) => s.data() * s.data().adjoint(),
            ObservableKind::Projector(o) | ObservableKind::Expectation(o) => o.matrix().clone(),
            ObservableKind::ExcitationProbability => {
                let block = ground_block(space)?;
                let mut m = DMatrix::<C64>::identity(space.dim(), space.dim());
                for i in block {
                    m[(i, i)] = C64::new(0.0, 0.0);
                }
                m
            }
        })
    }

    fn function(&self, space: &Arc<HilbertSpace>, repr: Representation) -> Result<impl Fn(&[C64]) -> f64 + Send + Sync + 'static> {
        if let Some(s) = self.space() {
            if s != space {
                return Err(Error::SpaceMismatch(format!("observable '{}' lives on another space", self.name)));
            }
        }
        let d = space.dim();
        let entries = sparse_entries(&self.operator(space)?);
        Ok(move |x: &[C64]| -> f64 {
            let mut acc = C64::new(0.0, 0.0);
            match repr {
                Representation::Pure => {
                    for &(i, j, v) in &entries {
                        acc += x[i].conj() * v * x[j];
                    }
                }
                Representation::Density => {
                    for &(i, j, v) in &entries {
                        acc += x[j * d + i] * v;
                    }
                }
            }
            acc.re
        })
    }

    /// Probe sampling this observable on the grid.
    pub fn probe(&self, space: &Arc<HilbertSpace>, repr: Representation) -> Result<Probe> {
        Ok(Probe::sampled(self.name.clone(), self.function(space, repr)?))
    }

    /// Probe tracking the running maximum over every integration step.
    pub fn max_probe(&self, name: impl Into<String>, space: &Arc<HilbertSpace>, repr: Representation) -> Result<Probe> {
        Ok(Probe::running_max(name, self.function(space, repr)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{dressed_basis, DressedState};
    use crate::quantum::Level::*;
    use proptest::prelude::*;

    fn pair() -> Arc<HilbertSpace> {
        HilbertSpace::pair(&[G0, G1, R, P1, P2, Alpha]).unwrap()
    }

    #[test]
    fn unitary_fidelity_cases() {
        let id = DMatrix::<C64>::identity(4, 4);
        assert!((gate_fidelity_unitary(&cz(), &cz()).unwrap() - 1.0).abs() < 1e-15);
        assert!((gate_fidelity_unitary(&id, &cz()).unwrap() - 0.25).abs() < 1e-15);
        assert!(gate_fidelity_unitary(&DMatrix::identity(2, 2), &cz()).is_err());
    }

    #[test]
    fn process_fidelity_cases() {
        let id = DMatrix::<C64>::identity(4, 4);
        assert!((gate_fidelity_process(&unitary_choi(&id), &id).unwrap() - 1.0).abs() < 1e-15);
        let f = gate_fidelity_process(&unitary_choi(&id), &cz()).unwrap();
        assert!((f - 0.25).abs() < 1e-15);
        // everything leaks out of the block: zero map
        let zero = DMatrix::<C64>::zeros(16, 16);
        assert_eq!(gate_fidelity_process(&zero, &cz()).unwrap(), 0.0);
        let mut bad = zero.clone();
        bad[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(gate_fidelity_process(&bad, &cz()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn choi_state_fidelity_of_unitary() {
        let plus = DVector::from_element(4, C64::new(0.5, 0.0));
        let chi = unitary_choi(&cz());
        let target = cz() * &plus;
        assert!((choi_state_fidelity(&chi, &plus, &target).unwrap() - 1.0).abs() < 1e-14);
        assert!((choi_state_fidelity(&chi, &plus, &plus).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn bell_populations() {
        let space = pair();
        let basis = dressed_basis(&space).unwrap();
        let plus = basis.get(DressedState::PsiPlus).clone();
        let minus = basis.get(DressedState::PsiMinus).clone();
        let rho = DensityMatrix::pure(&plus);
        assert!((population(&rho, &plus).unwrap() - 1.0).abs() < 1e-14);
        assert!(population(&rho, &minus).unwrap().abs() < 1e-14);
        assert!(population(&plus, &minus).unwrap().abs() < 1e-14);
        let other = HilbertSpace::pair(&[G0, G1]).unwrap();
        let s = StateVector::basis(&other, &[G0, G0]).unwrap();
        assert!(population(&rho, &s).is_err());
    }

    #[test]
    fn excitation_cases() {
        let space = pair();
        let g = DensityMatrix::pure(&StateVector::basis(&space, &[G0, G0]).unwrap());
        assert_eq!(excitation_probability(&g).unwrap(), 0.0);
        let e = DensityMatrix::pure(&StateVector::basis(&space, &[R, G1]).unwrap());
        assert!((excitation_probability(&e).unwrap() - 1.0).abs() < 1e-15);
        let a = DensityMatrix::pure(&StateVector::basis(&space, &[Alpha, G1]).unwrap());
        assert_eq!(excitation_probability(&a).unwrap(), 0.0);
        let small = HilbertSpace::pair(&[G0, G1, R]).unwrap();
        let s = DensityMatrix::maximally_mixed(&small);
        assert!(excitation_probability(&s).is_err());
    }

    #[test]
    fn fit_synthetic() {
        let series: Vec<(f64, f64)> = (0..=40).map(|i| (i as f64 * 0.5, (-0.2 * i as f64 * 0.5).exp())).collect();
        let f = fit_exponential_rate(&series).unwrap();
        assert!((f.rate - 0.2).abs() < 1e-12 && f.residual < 1e-12);
        assert!(fit_exponential_rate(&series[..7]).is_err());
        let mut bad = series.clone();
        bad[3].1 = 0.0;
        assert!(fit_exponential_rate(&bad).is_err());
    }

    #[test]
    fn fit_across_decades() {
        for rate in [1e-3, 1e-2, 1e-1, 1.0] {
            let series: Vec<(f64, f64)> =
                (0..50).map(|i| (i as f64 * 0.1 / rate, 3.0 * (-i as f64 * 0.1).exp())).collect();
            let f = fit_exponential_rate(&series).unwrap();
            assert!((f.rate / rate - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn probes_agree_across_representations() {
        let space = pair();
        let psi = StateVector::normalized(
            space.clone(),
            DVector::from_fn(space.dim(), |i, _| C64::new((i as f64).cos(), 0.1 * i as f64)),
        )
        .unwrap();
        let rho = DensityMatrix::pure(&psi);
        let vec_rho = rho.to_vec_row_major();
        let raw: Vec<C64> = psi.data().iter().copied().collect();
        let basis = dressed_basis(&space).unwrap();
        let specs = [
            ObservableSpec::population("p01", StateVector::basis(&space, &[G0, G1]).unwrap()),
            ObservableSpec::new("f", ObservableKind::Fidelity(basis.get(DressedState::PsiMinus).clone())),
            ObservableSpec::new("pe", ObservableKind::ExcitationProbability),
        ];
        for s in &specs {
            let a = s.probe(&space, Representation::Pure).unwrap().eval(&raw);
            let b = s.probe(&space, Representation::Density).unwrap().eval(&vec_rho);
            assert!((a - b).abs() < 1e-12, "{}", s.name);
        }
        assert!(
            (specs[2].probe(&space, Representation::Density).unwrap().eval(&vec_rho)
                - excitation_probability(&rho).unwrap())
            .abs()
                < 1e-12
        );
    }

    proptest! {
        #[test]
        fn global_phase_invariance(theta in 0.0..std::f64::consts::TAU, seed in 0u64..1000) {
            let u = DMatrix::<C64>::from_fn(4, 4, |i, j| {
                let x = ((i * 7 + j * 3) as f64 + seed as f64 * 0.37).sin();
                C64::new(x, (x * 3.1).cos())
            });
            let a = gate_fidelity_unitary(&u, &cz()).unwrap();
            let b = gate_fidelity_unitary(&(&u * C64::from_polar(1.0, theta)), &cz()).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
        }

        #[test]
        fn excitation_complements_ground_block(seed in 0u64..500) {
            let space = HilbertSpace::pair(&[G0, G1, R, Alpha]).unwrap();
            let d = space.dim();
            let a = DMatrix::<C64>::from_fn(d, d, |i, j| {
                let x = ((i * 13 + j * 5) as f64 * 0.11 + seed as f64).sin();
                C64::new(x, (x * 1.7 + j as f64).cos())
            });
            let m = &a * a.adjoint();
            let m = &m / m.trace();
            let rho = DensityMatrix::new(space.clone(), m).unwrap();
            let block: f64 = ground_block(&space).unwrap().iter().map(|&i| rho.data()[(i, i)].re).sum();
            prop_assert!((excitation_probability(&rho).unwrap() + block - 1.0).abs() < 1e-10);
        }
    }
}
