use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cone::ConeId;
use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// Proportion of extremal mass per cone. Entries are non-negative and sum
/// to one; cones with zero mass are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MassDistribution {
    d: usize,
    entries: BTreeMap<ConeId, f64>,
}

impl MassDistribution {
    pub fn new(d: usize, entries: impl IntoIterator<Item = (ConeId, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (cone, mass) in entries {
            if cone.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: cone.dim(),
                });
            }
            if !(0.0..=1.0 + SUM_TOLERANCE).contains(&mass) {
                return Err(Error::InvalidMass(format!("mass {mass} on cone {cone}")));
            }
            if mass > 0.0 {
                *map.entry(cone).or_insert(0.0) += mass;
            }
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidMass(format!("masses sum to {total}")));
        }
        Ok(Self { d, entries: map })
    }

    /// Normalizes non-negative scores into a distribution.
    pub fn from_scores(d: usize, scores: impl IntoIterator<Item = (ConeId, f64)>) -> Result<Self> {
        let scores: Vec<_> = scores.into_iter().collect();
        let total: f64 = scores.iter().map(|(_, s)| *s).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidMass(format!("scores sum to {total}")));
        }
        Self::new(d, scores.into_iter().map(|(c, s)| (c, s / total)))
    }

    /// All mass on one cone.
    pub fn point(cone: ConeId) -> Self {
        Self {
            d: cone.dim(),
            entries: BTreeMap::from([(cone, 1.0)]),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, cone: ConeId) -> f64 {
        self.entries.get(&cone).copied().unwrap_or(0.0)
    }

    /// Cones with positive mass, in cone order.
    pub fn iter(&self) -> impl Iterator<Item = (ConeId, f64)> + '_ {
        self.entries.iter().map(|(c, m)| (*c, *m))
    }

    pub fn charged(&self) -> impl Iterator<Item = ConeId> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (c, m) in self.iter() {
            entries.insert(c.permuted(perm)?, m);
        }
        Ok(Self { d: self.d, entries })
    }
}

#[derive(Serialize, Deserialize)]
struct MassWire {
    d: usize,
    masses: BTreeMap<String, f64>,
}

impl Serialize for MassDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MassWire {
            d: self.d,
            masses: self.iter().map(|(c, m)| (c.to_string(), m)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MassDistribution {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = MassWire::deserialize(de)?;
        let mut entries = Vec::with_capacity(wire.masses.len());
        for (label, m) in wire.masses {
            let cone = ConeId::parse(&label, wire.d).map_err(serde::de::Error::custom)?;
            entries.push((cone, m));
        }
        MassDistribution::new(wire.d, entries).map_err(serde::de::Error::custom)
    }
}
