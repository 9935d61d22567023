use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quantum::{HilbertSpace, Operator, C64};

/// Scalar time dependence `amplitude · exp(i(ω t + φ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveCoefficient {
    pub amplitude: C64,
    pub angular_frequency: f64,
    pub phase: f64,
}

impl DriveCoefficient {
    pub fn constant(value: f64) -> Self {
        Self { amplitude: C64::new(value, 0.0), angular_frequency: 0.0, phase: 0.0 }
    }

    pub fn oscillating(amplitude: f64, angular_frequency: f64, phase: f64) -> Self {
        Self { amplitude: C64::new(amplitude, 0.0), angular_frequency, phase }
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.amplitude * C64::from_polar(1.0, self.angular_frequency * t + self.phase)
    }

    pub fn conj(&self) -> Self {
        Self {
            amplitude: self.amplitude.conj(),
            angular_frequency: -self.angular_frequency,
            phase: -self.phase,
        }
    }

    pub fn is_static(&self) -> bool {
        self.angular_frequency == 0.0
    }
}

/// One term of a Hamiltonian. With `hermitian_closure` the term contributes
/// `c(t) O + conj(c(t)) O†`; otherwise `c(t) O`, which requires a Hermitian
/// `O` and a real, static `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveTerm {
    pub label: String,
    pub operator: Operator,
    pub coefficient: DriveCoefficient,
    pub hermitian_closure: bool,
}

/// Sum of drive terms on a fixed space.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    space: Arc<HilbertSpace>,
    terms: Vec<DriveTerm>,
}

impl HamiltonianSpec {
    pub fn new(space: Arc<HilbertSpace>) -> Self {
        Self { space, terms: Vec::new() }
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn terms(&self) -> &[DriveTerm] {
        &self.terms
    }

    pub fn push(&mut self, term: DriveTerm) -> Result<()> {
        if term.operator.space() != &self.space {
            return Err(Error::SpaceMismatch(format!(
                "term `{}` is on {}, Hamiltonian on {}",
                term.label,
                term.operator.space(),
                self.space
            )));
        }
        if !term.hermitian_closure {
            let c = term.coefficient;
            let real = c.eval(0.0).im.abs() <= 1e-15 * c.amplitude.norm().max(1.0);
            if !c.is_static() || !real || !term.operator.is_hermitian(1e-14) {
                return Err(Error::NotHermitian(term.operator.hermiticity_defect()));
            }
        }
        if term.operator.is_zero() || term.coefficient.amplitude == C64::new(0.0, 0.0) {
            return Ok(());
        }
        self.terms.push(term);
        Ok(())
    }

    /// Add `c(t) O + h.c.`
    pub fn add_closed(&mut self, label: &str, operator: Operator, coefficient: DriveCoefficient) -> Result<()> {
        self.push(DriveTerm { label: label.to_string(), operator, coefficient, hermitian_closure: true })
    }

    /// Add a static Hermitian term `value · O`.
    pub fn add_hermitian(&mut self, label: &str, operator: Operator, value: f64) -> Result<()> {
        self.push(DriveTerm {
            label: label.to_string(),
            operator,
            coefficient: DriveCoefficient::constant(value),
            hermitian_closure: false,
        })
    }

    pub fn extend(&mut self, other: HamiltonianSpec) -> Result<()> {
        for t in other.terms {
            self.push(t)?;
        }
        Ok(())
    }

    /// `H(t)` as a dense operator.
    pub fn evaluate(&self, t: f64) -> Operator {
        let d = self.space.dim();
        let mut m = DMatrix::<C64>::zeros(d, d);
        for term in &self.terms {
            let c = term.coefficient.eval(t);
            let o = term.operator.matrix();
            m += o * c;
            if term.hermitian_closure {
                m += o.adjoint() * c.conj();
            }
        }
        Operator::new(self.space.clone(), m).expect("shape fixed by construction")
    }

    /// Static exchange-type terms only (all time-independent terms).
    pub fn static_part(&self) -> Operator {
        let mut h = HamiltonianSpec::new(self.space.clone());
        h.terms = self.terms.iter().filter(|t| t.coefficient.is_static()).cloned().collect();
        h.evaluate(0.0)
    }

    pub fn term(&self, label: &str) -> Option<&DriveTerm> {
        self.terms.iter().find(|t| t.label == label)
    }

    /// Largest |ω| over the drive terms.
    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.angular_frequency.abs()).fold(0.0, f64::max)
    }

    /// Upper bound on the spectral radius of `H(t)` over all `t`: the sum of
    /// the spectral norms of the individual terms (Frobenius as bound).
    pub fn norm_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let n = t.operator.matrix().norm() * t.coefficient.amplitude.norm();
                if t.hermitian_closure { 2.0 * n } else { n }
            })
            .sum()
    }

    /// Common fundamental angular frequency `ω0` when every drive frequency is
    /// an integer multiple of it, making `H(t)` periodic with period 2π/ω0.
    /// Returns `None` for static Hamiltonians or incommensurate drives.
    pub fn fundamental_frequency(&self) -> Option<f64> {
        let freqs: Vec<f64> = self
            .terms
            .iter()
            .map(|t| t.coefficient.angular_frequency.abs())
            .filter(|w| *w > 0.0)
            .collect();
        let base = freqs.iter().copied().fold(f64::INFINITY, f64::min);
        if !base.is_finite() {
            return None;
        }
        for &w in &freqs {
            let ratio = w / base;
            if (ratio - ratio.round()).abs() > 1e-9 * ratio {
                return None;
            }
        }
        Some(base)
    }
}
