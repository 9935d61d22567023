use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Atomic levels used by the two-atom models.
///
/// `G0`/`G1` are the hyperfine qubit states, `R`, `P1`, `P2` the Rydberg
/// states of the Förster pair `|rr> <-> |p'p''>`, `Alpha` the lumped leakage
/// level and `AShort` the short-lived intermediate state used for engineered
/// decay (single-atom spaces only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    G0,
    G1,
    R,
    P1,
    P2,
    Alpha,
    AShort,
}

impl Level {
    pub const ALL: [Level; 7] =
        [Level::G0, Level::G1, Level::R, Level::P1, Level::P2, Level::Alpha, Level::AShort];

    pub fn name(self) -> &'static str {
        match self {
            Level::G0 => "g0",
            Level::G1 => "g1",
            Level::R => "r",
            Level::P1 => "p1",
            Level::P2 => "p2",
            Level::Alpha => "alpha",
            Level::AShort => "a_short",
        }
    }

    /// Short label used in basis-state names (`|0r>`, `|p'p''>`, ...).
    pub fn ket_label(self) -> &'static str {
        match self {
            Level::G0 => "0",
            Level::G1 => "1",
            Level::R => "r",
            Level::P1 => "p'",
            Level::P2 => "p''",
            Level::Alpha => "α",
            Level::AShort => "a",
        }
    }

    pub fn is_rydberg(self) -> bool {
        matches!(self, Level::R | Level::P1 | Level::P2)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Level::ALL
            .iter()
            .copied()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::UnknownLevel { site: 0, level: s.to_string() })
    }
}
