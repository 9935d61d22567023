use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{DecayChannel, DriveCoefficient, HamiltonianSpec};
use crate::quantum::{CsrMatrix, DensityMatrix, HilbertSpace, C64};

const MINUS_I: C64 = C64::new(0.0, -1.0);

/// Linear generator `L(t) = Σ_s e^{iω_s t} L_s` stored as one CSR
/// pattern whose entries each carry the index `s` of their phase factor.
/// Slot 0 is the static part. States are row-major `n × k` blocks so several
/// right-hand sides share one pass over the pattern.
#[derive(Debug, Clone)]
pub struct GeneratorKernel {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<C64>,
    slots: Vec<u16>,
    drives: Vec<f64>,
}

impl GeneratorKernel {
    /// Merge `(matrix, coefficient)` pairs; terms sharing a frequency share a
    /// slot, static terms fold into slot 0.
    pub fn from_terms(dim: usize, terms: &[(CsrMatrix, DriveCoefficient)]) -> Result<Self> {
        let mut drives: Vec<f64> = vec![0.0];
        let mut triplets: Vec<(usize, usize, u16, C64)> = Vec::new();
        for (m, c) in terms {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::SpaceMismatch(format!(
                    "generator term is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            // the constant phase folds into the values, so slots differ only
            // in frequency
            let scale = c.eval(0.0);
            let slot = if c.is_static() {
                0
            } else {
                let w = c.angular_frequency;
                let pos = drives.iter().skip(1).position(|&d| (d - w).abs() <= 1e-12 * w.abs());
                match pos {
                    Some(p) => p + 1,
                    None => {
                        drives.push(w);
                        drives.len() - 1
                    }
                }
            };
            if slot > u16::MAX as usize {
                return Err(Error::InvalidParameter { param: "drive".into(), reason: "too many distinct drive frequencies".into() });
            }
            for (i, j, v) in m.iter() {
                triplets.push((i, j, slot as u16, v * scale));
            }
        }
        triplets.sort_by_key(|a| (a.0, a.1, a.2));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut slots = Vec::new();
        let mut it = triplets.into_iter().peekable();
        while let Some((i, j, s, mut v)) = it.next() {
            while let Some(&(i2, j2, s2, v2)) = it.peek() {
                if (i2, j2, s2) != (i, j, s) {
                    break;
                }
                v += v2;
                it.next();
            }
            if v != C64::new(0.0, 0.0) {
                indptr[i + 1] += 1;
                indices.push(j as u32);
                values.push(v);
                slots.push(s);
            }
        }
        for i in 0..dim {
            indptr[i + 1] += indptr[i];
        }
        Ok(Self { dim, indptr, indices, values, slots, drives })
    }

    /// `-i H(t)` for Schrödinger evolution.
    pub fn schrodinger(h: &HamiltonianSpec) -> Result<Self> {
        let mut terms = Vec::new();
        for t in h.terms() {
            let m = t.operator.to_csr();
            terms.push((m.scale(MINUS_I), t.coefficient));
            if t.hermitian_closure {
                terms.push((m.adjoint().scale(MINUS_I), t.coefficient.conj()));
            }
        }
        Self::from_terms(h.space().dim(), &terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Number of distinct drive frequencies including the static slot.
    pub fn num_slots(&self) -> usize {
        self.drives.len()
    }

    /// Angular frequencies of the time-dependent slots.
    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        self.drives.iter().skip(1).copied()
    }

    pub fn is_static(&self) -> bool {
        self.drives.len() == 1
    }

    /// Phase factors at time `t`, indexed by slot.
    pub fn coefficients(&self, t: f64, out: &mut Vec<C64>) {
        out.clear();
        out.extend(self.drives.iter().map(|&w| C64::from_polar(1.0, w * t)));
        out[0] = C64::new(1.0, 0.0);
    }

    /// `y = L x` for a row-major `dim × k` block.
    pub fn apply(&self, coef: &[C64], x: &[C64], y: &mut [C64], k: usize) {
        debug_assert_eq!(x.len(), self.dim * k);
        debug_assert_eq!(y.len(), self.dim * k);
        if k == 1 {
            for (i, yi) in y.iter_mut().enumerate() {
                let r = self.indptr[i]..self.indptr[i + 1];
                let mut acc = C64::new(0.0, 0.0);
                for ((v, &s), &j) in self.values[r.clone()].iter().zip(&self.slots[r.clone()]).zip(&self.indices[r]) {
                    acc += v * coef[s as usize] * x[j as usize];
                }
                *yi = acc;
            }
            return;
        }
        for i in 0..self.dim {
            let yi = &mut y[i * k..(i + 1) * k];
            yi.fill(C64::new(0.0, 0.0));
            for p in self.indptr[i]..self.indptr[i + 1] {
                let a = self.values[p] * coef[self.slots[p] as usize];
                let j = self.indices[p] as usize;
                let xj = &x[j * k..(j + 1) * k];
                for (yc, xc) in yi.iter_mut().zip(xj) {
                    *yc += a * xc;
                }
            }
        }
    }

    /// Assembled `L(t)` as a plain CSR matrix.
    pub fn assemble(&self, t: f64) -> CsrMatrix {
        let mut coef = Vec::new();
        self.coefficients(t, &mut coef);
        let mut trip = Vec::with_capacity(self.nnz());
        for i in 0..self.dim {
            for p in self.indptr[i]..self.indptr[i + 1] {
                trip.push((i, self.indices[p] as usize, self.values[p] * coef[self.slots[p] as usize]));
            }
        }
        CsrMatrix::from_triplets(self.dim, self.dim, trip)
    }
}

/// Vectorized (row-major) Lindblad generator as a static dissipative part plus
/// one sparse commutator per Hamiltonian drive term.
#[derive(Debug, Clone)]
pub struct Superoperator {
    space: Arc<HilbertSpace>,
    terms: Vec<(CsrMatrix, DriveCoefficient)>,
}

/// `-i (O ⊗ I - I ⊗ Oᵀ)`
fn commutator(o: &CsrMatrix) -> CsrMatrix {
    let id = CsrMatrix::identity(o.nrows());
    o.kron(&id).add(&id.kron(&o.transpose()).scale(C64::new(-1.0, 0.0))).scale(MINUS_I)
}

/// `γ (c ⊗ c̄ - ½ c†c ⊗ I - ½ I ⊗ (c†c)ᵀ)`
fn dissipator(c: &CsrMatrix, rate: f64) -> CsrMatrix {
    let n = c.nrows();
    let id = CsrMatrix::identity(n);
    let cdc = CsrMatrix::from_dense(&(c.adjoint().to_dense() * c.to_dense()));
    let conj = CsrMatrix::from_triplets(n, n, c.iter().map(|(i, j, v)| (i, j, v.conj())));
    let half = C64::new(-0.5, 0.0);
    c.kron(&conj)
        .add(&cdc.kron(&id).scale(half))
        .add(&id.kron(&cdc.transpose()).scale(half))
        .scale(C64::new(rate, 0.0))
}

impl Superoperator {
    pub fn new(h: &HamiltonianSpec, channels: &[DecayChannel]) -> Result<Self> {
        let space = h.space().clone();
        let d = space.dim();
        let mut stat = CsrMatrix::zeros(d * d, d * d);
        for ch in channels {
            if ch.jump.space() != &space {
                return Err(Error::SpaceMismatch(format!("decay channel '{}' lives on another space", ch.label)));
            }
            if ch.rate > 0.0 {
                stat = stat.add(&dissipator(&ch.jump.to_csr(), ch.rate));
            }
        }
        let mut terms = vec![(stat, DriveCoefficient::constant(1.0))];
        for t in h.terms() {
            let o = t.operator.to_csr();
            terms.push((commutator(&o), t.coefficient));
            if t.hermitian_closure {
                terms.push((commutator(&o.adjoint()), t.coefficient.conj()));
            }
        }
        Ok(Self { space, terms })
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn terms(&self) -> &[(CsrMatrix, DriveCoefficient)] {
        &self.terms
    }

    pub fn assemble(&self, t: f64) -> CsrMatrix {
        let n = self.space.dim().pow(2);
        self.terms
            .iter()
            .fold(CsrMatrix::zeros(n, n), |acc, (m, c)| acc.add(&m.scale(c.eval(t))))
    }

    /// `L(t) ρ` through the assembled matrix.
    pub fn apply(&self, t: f64, rho: &DensityMatrix) -> Result<DMatrix<C64>> {
        if rho.space() != &self.space {
            return Err(Error::SpaceMismatch("density matrix and generator spaces differ".into()));
        }
        let d = self.space.dim();
        let y = self.assemble(t).mul_vec(&rho.to_vec_row_major());
        Ok(DMatrix::from_row_slice(d, d, &y))
    }

    pub fn kernel(&self) -> Result<GeneratorKernel> {
        GeneratorKernel::from_terms(self.space.dim().pow(2), &self.terms)
    }
}

/// `-i[H(t), ρ] + Σ γ D[c]ρ` evaluated with dense products.
pub fn lindblad_rhs(h: &HamiltonianSpec, channels: &[DecayChannel], t: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let ht = h.evaluate(t);
    let hm = ht.matrix();
    let mut out = (hm * rho - rho * hm) * MINUS_I;
    for ch in channels {
        let c = ch.jump.matrix();
        let cd = c.adjoint();
        let cdc = &cd * c;
        out += (c * rho * &cd - (&cdc * rho + rho * &cdc) * C64::new(0.5, 0.0)) * C64::new(ch.rate, 0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_decay_channels, build_hamiltonian, mhz, ModelVariant, PhysicalParams};
    use crate::quantum::{transition_operator, Level::*, Operator};

    fn random_hermitian(d: usize, seed: u64) -> DMatrix<C64> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = DMatrix::<C64>::from_fn(d, d, |_, _| C64::new(next(), next()));
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    fn table_params(lambda: f64) -> PhysicalParams {
        let j = mhz(50.0);
        PhysicalParams::new()
            .with("Omega", mhz(0.06))
            .with("Omega_s", mhz(1.0))
            .with("J", j)
            .with("Delta", std::f64::consts::SQRT_2 * j)
            .with("lambda", lambda)
            .with("gamma_split", 0.5)
    }

    #[test]
    fn kernel_matches_dense_hamiltonian() {
        let h = build_hamiltonian(ModelVariant::FullSrp, &table_params(1.0)).unwrap();
        let k = GeneratorKernel::schrodinger(&h).unwrap();
        assert_eq!(k.num_slots(), 3);
        for t in [0.0, 0.0031, 1.7] {
            let dense = k.assemble(t).to_dense();
            let want = h.evaluate(t).matrix() * MINUS_I;
            assert!((dense - want).norm() < 1e-10);
        }
    }

    #[test]
    fn block_apply_matches_columns() {
        let h = build_hamiltonian(ModelVariant::FullSrp, &table_params(1.0)).unwrap();
        let k = GeneratorKernel::schrodinger(&h).unwrap();
        let n = k.dim();
        let mut coef = Vec::new();
        k.coefficients(0.42, &mut coef);
        let x: Vec<C64> = (0..n * 3).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut y = vec![C64::new(0.0, 0.0); n * 3];
        k.apply(&coef, &x, &mut y, 3);
        for c in 0..3 {
            let xc: Vec<C64> = (0..n).map(|i| x[i * 3 + c]).collect();
            let mut yc = vec![C64::new(0.0, 0.0); n];
            k.apply(&coef, &xc, &mut yc, 1);
            for i in 0..n {
                assert!((yc[i] - y[i * 3 + c]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn superoperator_matches_direct_formula() {
        let p = table_params(0.5);
        let h = build_hamiltonian(ModelVariant::FullSrp, &p).unwrap();
        let ch = build_decay_channels(ModelVariant::FullSrp, &p).unwrap();
        let s = Superoperator::new(&h, &ch).unwrap();
        let kern = s.kernel().unwrap();
        let d = h.space().dim();
        for (n, t) in [0.0, 0.013, 2.5].into_iter().enumerate() {
            let rho = random_hermitian(d, n as u64);
            let want = lindblad_rhs(&h, &ch, t, &rho);
            let dm = DensityMatrix::new_unchecked(h.space().clone(), rho.clone()).unwrap();
            let got = s.apply(t, &dm).unwrap();
            assert!((&got - &want).norm() < 1e-12 * want.norm().max(1.0), "{}", (&got - &want).norm());
            let v = dm.to_vec_row_major();
            let mut y = vec![C64::new(0.0, 0.0); d * d];
            let mut coef = Vec::new();
            kern.coefficients(t, &mut coef);
            kern.apply(&coef, &v, &mut y, 1);
            let got = DMatrix::from_row_slice(d, d, &y);
            assert!((&got - &want).norm() < 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn single_decay_superoperator() {
        let space = HilbertSpace::single(&[G0, R]).unwrap();
        let jump = transition_operator(&space, 0, R, G0).unwrap();
        let ch = DecayChannel::new("r->g0", jump, 0.3).unwrap();
        let h = HamiltonianSpec::new(space.clone());
        let s = Superoperator::new(&h, &[ch]).unwrap();
        let rr = DensityMatrix::pure(&crate::quantum::StateVector::basis(&space, &[R]).unwrap());
        let out = s.apply(0.0, &rr).unwrap();
        assert!((out[(1, 1)] - C64::new(-0.3, 0.0)).norm() < 1e-15);
        assert!((out[(0, 0)] - C64::new(0.3, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mismatched_channel_space_rejected() {
        let a = HilbertSpace::single(&[G0, R]).unwrap();
        let b = HilbertSpace::single(&[G0, G1, R]).unwrap();
        let ch = DecayChannel::new("x", transition_operator(&b, 0, R, G0).unwrap(), 1.0).unwrap();
        let h = HamiltonianSpec::new(a);
        assert!(matches!(Superoperator::new(&h, &[ch]), Err(Error::SpaceMismatch(_))));
        let _ = Operator::zeros(&b);
    }

    #[test]
    fn generator_is_trace_free_and_hermiticity_preserving() {
        for variant in ModelVariant::ALL.iter().copied().filter(|v| v.is_dissipative()) {
            let p = crate::model::test_params(variant);
            let h = build_hamiltonian(variant, &p).unwrap();
            let ch = build_decay_channels(variant, &p).unwrap();
            let s = Superoperator::new(&h, &ch).unwrap();
            let d = h.space().dim();
            for n in 0..10 {
                let rho = random_hermitian(d, 100 + n);
                let dm = DensityMatrix::new_unchecked(h.space().clone(), rho).unwrap();
                for t in [0.0, 0.11, 0.5, 3.3, 17.0] {
                    let out = s.apply(t, &dm).unwrap();
                    assert!(out.trace().norm() < 1e-12 * out.norm().max(1.0), "{variant}");
                    assert!((&out - out.adjoint()).norm() < 1e-12 * out.norm().max(1.0), "{variant}");
                }
            }
        }
    }
}
