use std::fmt;
use std::sync::Arc;

use super::{Level, MAX_DIM};
use crate::error::{Error, Result};

/// Ordered per-site level lists of a one- or two-atom system.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    sites: Vec<Vec<Level>>,
}

impl HilbertSpace {
    pub fn new(sites: Vec<Vec<Level>>) -> Result<Arc<Self>> {
        if sites.is_empty() || sites.len() > 2 {
            return Err(Error::InvalidState(format!(
                "spaces have one or two sites, got {}",
                sites.len()
            )));
        }
        for (s, levels) in sites.iter().enumerate() {
            if levels.is_empty() {
                return Err(Error::InvalidState(format!("site {s} has no levels")));
            }
            for (k, l) in levels.iter().enumerate() {
                if levels[..k].contains(l) {
                    return Err(Error::InvalidState(format!("level {l} repeated at site {s}")));
                }
            }
            if sites.len() > 1 && levels.contains(&Level::AShort) {
                return Err(Error::InvalidState(
                    "a_short is only available in single-atom spaces".into(),
                ));
            }
        }
        let dim = sites.iter().map(Vec::len).try_fold(1usize, |acc, d| acc.checked_mul(d));
        match dim {
            Some(d) if d > MAX_DIM => return Err(Error::DimensionOverflow(d)),
            None => return Err(Error::DimensionOverflow(usize::MAX)),
            Some(d) if d < 2 => {
                return Err(Error::InvalidState("Hilbert space dimension must be >= 2".into()))
            }
            _ => {}
        }
        Ok(Arc::new(Self { sites }))
    }

    pub fn single(levels: &[Level]) -> Result<Arc<Self>> {
        Self::new(vec![levels.to_vec()])
    }

    /// Two identical atoms.
    pub fn pair(levels: &[Level]) -> Result<Arc<Self>> {
        Self::new(vec![levels.to_vec(), levels.to_vec()])
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn levels(&self, site: usize) -> &[Level] {
        &self.sites[site]
    }

    pub fn site_dim(&self, site: usize) -> usize {
        self.sites[site].len()
    }

    pub fn dim(&self) -> usize {
        self.sites.iter().map(Vec::len).product()
    }

    pub fn level_index(&self, site: usize, level: Level) -> Result<usize> {
        self.sites
            .get(site)
            .and_then(|ls| ls.iter().position(|&l| l == level))
            .ok_or_else(|| Error::UnknownLevel { site, level: level.name().to_string() })
    }

    pub fn has_level(&self, level: Level) -> bool {
        self.sites.iter().all(|ls| ls.contains(&level))
    }

    /// Basis index of a product state given one level per site.
    pub fn index_of(&self, levels: &[Level]) -> Result<usize> {
        if levels.len() != self.sites.len() {
            return Err(Error::InvalidState(format!(
                "expected {} site labels, got {}",
                self.sites.len(),
                levels.len()
            )));
        }
        let mut idx = 0;
        for (site, &l) in levels.iter().enumerate() {
            idx = idx * self.site_dim(site) + self.level_index(site, l)?;
        }
        Ok(idx)
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn levels_of(&self, mut index: usize) -> Vec<Level> {
        let mut out = vec![Level::G0; self.sites.len()];
        for site in (0..self.sites.len()).rev() {
            let d = self.site_dim(site);
            out[site] = self.sites[site][index % d];
            index /= d;
        }
        out
    }

    pub fn basis_label(&self, index: usize) -> String {
        self.levels_of(index).iter().map(|l| l.ket_label()).collect()
    }

    /// Product of two single-site spaces (site-1-major).
    pub fn product(a: &HilbertSpace, b: &HilbertSpace) -> Result<Arc<Self>> {
        let mut sites = a.sites.clone();
        sites.extend(b.sites.iter().cloned());
        Self::new(sites)
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .sites
            .iter()
            .map(|ls| {
                let names: Vec<&str> = ls.iter().map(|l| l.name()).collect();
                format!("{{{}}}", names.join(","))
            })
            .collect();
        write!(f, "{}", parts.join("⊗"))
    }
}
