use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{HilbertSpace, Level, Level::*};

/// The model families the builders know how to construct. Each fixes its
/// level set so basis indices stay stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    /// Two atoms, resonant |1>-|r> drive, two detuned |0>-|r> drives with an
    /// opposite blue phase on atom 2, and Förster exchange |rr> <-> |p'p''>.
    FullSrp,
    /// [`FullSrp`](Self::FullSrp) plus a Förster defect on the pair states.
    FullWithDefect,
    /// Secular (fast terms dropped) Hamiltonian in the dressed basis.
    IntermediateEffective,
    /// `Ω |11>(<r1| + <1r|) + h.c.` only.
    EffectiveSrp,
    /// Same drives with a van der Waals shift instead of Förster exchange.
    VdwComparison,
    /// Two-photon antiblockade gate with the same exchange term.
    Antiblockade,
    /// Weak ground-state drive on top of the effective pumping Hamiltonian.
    GroundBlockadeEffective,
    /// Weak drive confined to {|00>, |01>, |10>}.
    GroundBlockadeSubspace,
    /// Ground-blockade Hamiltonian with symmetric |r> decay.
    EffectiveDissipative,
    /// Full two-atom drive plus weak ground drive, engineered and natural
    /// Rydberg decay.
    FullDissipative,
    /// [`FullDissipative`](Self::FullDissipative) plus optical pumping out of
    /// the leakage level.
    RecyclingFull,
    /// One atom: |r> coupled to a short-lived state decaying to |0>, |1>.
    EngineeredDecaySingleAtom,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 12] = [
        ModelVariant::FullSrp,
        ModelVariant::FullWithDefect,
        ModelVariant::IntermediateEffective,
        ModelVariant::EffectiveSrp,
        ModelVariant::VdwComparison,
        ModelVariant::Antiblockade,
        ModelVariant::GroundBlockadeEffective,
        ModelVariant::GroundBlockadeSubspace,
        ModelVariant::EffectiveDissipative,
        ModelVariant::FullDissipative,
        ModelVariant::RecyclingFull,
        ModelVariant::EngineeredDecaySingleAtom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::FullSrp => "full_srp",
            ModelVariant::FullWithDefect => "full_with_defect",
            ModelVariant::IntermediateEffective => "intermediate_effective",
            ModelVariant::EffectiveSrp => "effective_srp",
            ModelVariant::VdwComparison => "vdw_comparison",
            ModelVariant::Antiblockade => "antiblockade",
            ModelVariant::GroundBlockadeEffective => "ground_blockade_effective",
            ModelVariant::GroundBlockadeSubspace => "ground_blockade_subspace",
            ModelVariant::EffectiveDissipative => "effective_dissipative",
            ModelVariant::FullDissipative => "full_dissipative",
            ModelVariant::RecyclingFull => "recycling_full",
            ModelVariant::EngineeredDecaySingleAtom => "engineered_decay_single_atom",
        }
    }

    /// Per-site level list.
    pub fn levels(self) -> &'static [Level] {
        match self {
            ModelVariant::FullSrp
            | ModelVariant::FullWithDefect
            | ModelVariant::FullDissipative
            | ModelVariant::RecyclingFull => &[G0, G1, R, P1, P2, Alpha],
            ModelVariant::IntermediateEffective | ModelVariant::Antiblockade => &[G0, G1, R, P1, P2],
            ModelVariant::EffectiveSrp
            | ModelVariant::VdwComparison
            | ModelVariant::GroundBlockadeEffective
            | ModelVariant::EffectiveDissipative => &[G0, G1, R],
            ModelVariant::GroundBlockadeSubspace => &[G0, G1],
            ModelVariant::EngineeredDecaySingleAtom => &[G0, G1, R, AShort],
        }
    }

    pub fn num_sites(self) -> usize {
        if self == ModelVariant::EngineeredDecaySingleAtom { 1 } else { 2 }
    }

    pub fn space(self) -> Result<Arc<HilbertSpace>> {
        if self.num_sites() == 1 {
            HilbertSpace::single(self.levels())
        } else {
            HilbertSpace::pair(self.levels())
        }
    }

    /// Whether [`build_decay_channels`](super::build_decay_channels) supports
    /// the variant.
    pub fn is_dissipative(self) -> bool {
        matches!(
            self,
            ModelVariant::FullSrp
                | ModelVariant::FullWithDefect
                | ModelVariant::EffectiveDissipative
                | ModelVariant::FullDissipative
                | ModelVariant::RecyclingFull
                | ModelVariant::EngineeredDecaySingleAtom
        )
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelVariant::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model variant `{s}`")))
    }
}
