//! Named superpositions used by the dressed-state picture of the pumping
//! mechanism and by the entanglement targets.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::quantum::{HilbertSpace, Level, Level::*, StateVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DressedState {
    /// `(|r0> + |0r>)/√2`
    T0,
    /// `(|r0> - |0r>)/√2`
    S0,
    /// `[√2|rr> + (|p'p''> + |p''p'>)]/2`
    EPlus,
    /// `[√2|rr> - (|p'p''> + |p''p'>)]/2`
    EMinus,
    AlphaPlus,
    AlphaMinus,
    BetaPlus,
    BetaMinus,
    /// `(|01> + |10>)/√2`
    PsiPlus,
    /// `(|01> - |10>)/√2`
    PsiMinus,
    /// `(|r1> + |1r>)/√2`, the state |11> is pumped into.
    Bright,
}

impl DressedState {
    pub const ALL: [DressedState; 11] = [
        DressedState::T0,
        DressedState::S0,
        DressedState::EPlus,
        DressedState::EMinus,
        DressedState::AlphaPlus,
        DressedState::AlphaMinus,
        DressedState::BetaPlus,
        DressedState::BetaMinus,
        DressedState::PsiPlus,
        DressedState::PsiMinus,
        DressedState::Bright,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DressedState::T0 => "T0",
            DressedState::S0 => "S0",
            DressedState::EPlus => "E+",
            DressedState::EMinus => "E-",
            DressedState::AlphaPlus => "alpha+",
            DressedState::AlphaMinus => "alpha-",
            DressedState::BetaPlus => "beta+",
            DressedState::BetaMinus => "beta-",
            DressedState::PsiPlus => "Psi+",
            DressedState::PsiMinus => "Psi-",
            DressedState::Bright => "bright",
        }
    }

    fn components(self) -> Vec<(f64, [Level; 2])> {
        let h = FRAC_1_SQRT_2;
        let half = 0.5;
        let combine = |a: Vec<(f64, [Level; 2])>, sa: f64, b: Vec<(f64, [Level; 2])>, sb: f64| {
            let mut out: Vec<(f64, [Level; 2])> = a.into_iter().map(|(c, l)| (sa * c, l)).collect();
            out.extend(b.into_iter().map(|(c, l)| (sb * c, l)));
            out
        };
        match self {
            DressedState::T0 => vec![(h, [R, G0]), (h, [G0, R])],
            DressedState::S0 => vec![(h, [R, G0]), (-h, [G0, R])],
            DressedState::EPlus => vec![(h, [R, R]), (half, [P1, P2]), (half, [P2, P1])],
            DressedState::EMinus => vec![(h, [R, R]), (-half, [P1, P2]), (-half, [P2, P1])],
            // ½[(T0 - S0) ± (E+ + E-)]
            DressedState::AlphaPlus | DressedState::AlphaMinus => {
                let s = if self == DressedState::AlphaPlus { 1.0 } else { -1.0 };
                let ts = combine(DressedState::T0.components(), half, DressedState::S0.components(), -half);
                let ee = combine(DressedState::EPlus.components(), half, DressedState::EMinus.components(), half);
                combine(ts, 1.0, ee, s)
            }
            // ½[(T0 + S0) ∓ (E+ - E-)]
            DressedState::BetaPlus | DressedState::BetaMinus => {
                let s = if self == DressedState::BetaPlus { -1.0 } else { 1.0 };
                let ts = combine(DressedState::T0.components(), half, DressedState::S0.components(), half);
                let ee = combine(DressedState::EPlus.components(), half, DressedState::EMinus.components(), -half);
                combine(ts, 1.0, ee, s)
            }
            DressedState::PsiPlus => vec![(h, [G0, G1]), (h, [G1, G0])],
            DressedState::PsiMinus => vec![(h, [G0, G1]), (-h, [G1, G0])],
            DressedState::Bright => vec![(h, [R, G1]), (h, [G1, R])],
        }
    }

    /// The state as a normalized vector on `space`.
    pub fn on(self, space: &Arc<HilbertSpace>) -> Result<StateVector> {
        let comps = self.components();
        let terms: Vec<(C64, &[Level])> =
            comps.iter().map(|(c, l)| (C64::new(*c, 0.0), &l[..])).collect();
        StateVector::superposition(space, &terms)
    }
}

impl fmt::Display for DressedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// All dressed states on a space containing {g0, g1, r, p1, p2}.
#[derive(Debug, Clone)]
pub struct DressedBasis {
    states: Vec<(DressedState, StateVector)>,
}

impl DressedBasis {
    pub fn get(&self, which: DressedState) -> &StateVector {
        &self.states.iter().find(|(k, _)| *k == which).expect("complete basis").1
    }

    pub fn iter(&self) -> impl Iterator<Item = &(DressedState, StateVector)> {
        self.states.iter()
    }
}

pub fn dressed_basis(space: &Arc<HilbertSpace>) -> Result<DressedBasis> {
    let states = DressedState::ALL
        .iter()
        .map(|&k| k.on(space).map(|v| (k, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DressedBasis { states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn orthonormal_where_expected() {
        let s = HilbertSpace::pair(&[G0, G1, R, P1, P2]).unwrap();
        let b = dressed_basis(&s).unwrap();
        for (_, v) in b.iter() {
            assert!((v.data().norm() - 1.0).abs() < 1e-12);
        }
        let ip = b.get(DressedState::T0).inner(b.get(DressedState::S0)).unwrap();
        assert!(ip.norm() < 1e-15);
        let group = [
            DressedState::AlphaPlus,
            DressedState::AlphaMinus,
            DressedState::BetaPlus,
            DressedState::BetaMinus,
        ];
        for (i, a) in group.iter().enumerate() {
            for bb in &group[i + 1..] {
                assert!(b.get(*a).inner(b.get(*bb)).unwrap().norm() < 1e-15);
            }
        }
    }

    #[test]
    fn alpha_is_rydberg_dressed_0r() {
        let s = HilbertSpace::pair(&[G0, G1, R, P1, P2]).unwrap();
        let a = DressedState::AlphaPlus.on(&s).unwrap();
        let i0r = s.index_of(&[G0, R]).unwrap();
        let irr = s.index_of(&[R, R]).unwrap();
        assert!((a.data()[i0r].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((a.data()[irr].re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn missing_level_reported() {
        let s = HilbertSpace::pair(&[G0, G1, R]).unwrap();
        assert!(matches!(dressed_basis(&s), Err(Error::UnknownLevel { .. })));
        assert!(DressedState::PsiMinus.on(&HilbertSpace::pair(&[G0, G1]).unwrap()).is_ok());
    }
}
