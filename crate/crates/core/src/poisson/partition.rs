use std::fmt;
use std::io::Read;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(deserialize_with = "id_from_number_or_string")]
    pub id: String,
    pub mass: f64,
}

fn id_from_number_or_string<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Float(f64),
        Str(String),
    }
    Ok(match Raw::deserialize(d)? {
        Raw::Int(i) => i.to_string(),
        Raw::Float(f) => f.to_string(),
        Raw::Str(s) => s,
    })
}

/// Finite measure space: atoms with masses `μ_j ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPartition")]
pub struct Partition {
    atoms: Vec<Atom>,
}

#[derive(Deserialize)]
struct RawPartition {
    atoms: Vec<Atom>,
}

impl TryFrom<RawPartition> for Partition {
    type Error = Error;

    fn try_from(raw: RawPartition) -> Result<Self> {
        Partition::new(raw.atoms)
    }
}

impl Partition {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("partition", "no atoms"));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(a.mass >= 0.0) || !a.mass.is_finite() {
                return Err(Error::invalid(
                    "partition",
                    format!("atom `{}` has mass {}", a.id, a.mass),
                ));
            }
            if a.id.is_empty() || a.id.contains([',', ';']) {
                return Err(Error::invalid("partition", format!("bad atom id `{}`", a.id)));
            }
            if atoms[..i].iter().any(|b| b.id == a.id) {
                return Err(Error::invalid("partition", format!("duplicate atom id `{}`", a.id)));
            }
        }
        Ok(Partition { atoms })
    }

    /// Atoms with ids `"1"`, `"2"`, … and the given masses.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        Self::new(
            masses
                .iter()
                .enumerate()
                .map(|(i, &mass)| Atom {
                    id: (i + 1).to_string(),
                    mass,
                })
                .collect(),
        )
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// `μ(ω)`.
    pub fn mass(&self, subset: &SubsetId) -> f64 {
        subset.atoms.iter().map(|&i| self.atoms[i].mass).sum()
    }

    /// Parses comma-separated atom ids.
    pub fn subset(&self, spec: &str) -> Result<SubsetId> {
        let mut atoms = Vec::new();
        for id in spec.split(',').map(str::trim) {
            let i = self
                .atoms
                .iter()
                .position(|a| a.id == id)
                .ok_or_else(|| Error::invalid("subset", format!("unknown atom id `{id}`")))?;
            atoms.push(i);
        }
        Ok(SubsetId::from_indices(atoms))
    }

    /// Parses `;`-separated subsets, e.g. `"1;2;1,2"`.
    pub fn subsets(&self, spec: &str) -> Result<Vec<SubsetId>> {
        spec.split(';').map(|s| self.subset(s)).collect()
    }

    pub fn label(&self, subset: &SubsetId) -> String {
        subset
            .atoms
            .iter()
            .map(|&i| self.atoms[i].id.as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Every nonempty subset, in binary-counting order.
    pub fn power_set(&self) -> Vec<SubsetId> {
        let k = self.atoms.len();
        (1u64..(1 << k))
            .map(|bits| SubsetId::from_indices((0..k).filter(|i| bits >> i & 1 == 1).collect()))
            .collect()
    }

    /// Column allotment for dimension `n`: atom `j` receives the
    /// `round(μ_j·n)` consecutive columns after those of atoms `< j`.
    pub fn allot(&self, n: usize) -> Allotment {
        let mut ranges = Vec::with_capacity(self.atoms.len());
        let mut warnings = Vec::new();
        let mut next = 0;
        for a in &self.atoms {
            let k = (a.mass * n as f64).round() as usize;
            if k == 0 && a.mass > 0.0 {
                warnings.push(format!(
                    "atom `{}` with mass {} receives no column at N = {n}",
                    a.id, a.mass
                ));
            }
            ranges.push(next..next + k);
            next += k;
        }
        let columns = next.max((self.total_mass() * n as f64).ceil() as usize);
        Allotment {
            n,
            columns,
            ranges,
            warnings,
        }
    }
}

/// Set of atoms, stored as sorted indices into the partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetId {
    atoms: Vec<usize>,
}

impl SubsetId {
    pub fn from_indices(mut atoms: Vec<usize>) -> Self {
        atoms.sort_unstable();
        atoms.dedup();
        SubsetId { atoms }
    }

    pub fn indices(&self) -> &[usize] {
        &self.atoms
    }

    pub fn is_disjoint(&self, other: &SubsetId) -> bool {
        self.atoms.iter().all(|a| !other.atoms.contains(a))
    }

    pub fn union(&self, other: &SubsetId) -> SubsetId {
        SubsetId::from_indices(self.atoms.iter().chain(&other.atoms).copied().collect())
    }

    /// `(first atom, remaining atoms)` for subsets of two or more atoms.
    pub fn split_first(&self) -> Option<(SubsetId, SubsetId)> {
        match self.atoms.as_slice() {
            [first, rest @ ..] if !rest.is_empty() => Some((
                SubsetId { atoms: vec![*first] },
                SubsetId { atoms: rest.to_vec() },
            )),
            _ => None,
        }
    }
}

impl fmt::Display for SubsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.atoms.iter().map(|i| format!("#{i}")).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Disjoint Gaussian column blocks per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Allotment {
    pub n: usize,
    /// Total columns `M = max(ceil(μ(X)·n), Σ_j round(μ_j·n))`.
    pub columns: usize,
    pub ranges: Vec<Range<usize>>,
    pub warnings: Vec<String>,
}

impl Allotment {
    pub fn columns_of(&self, subset: &SubsetId) -> Vec<usize> {
        subset
            .indices()
            .iter()
            .flat_map(|&i| self.ranges[i].clone())
            .collect()
    }

    /// `μ_N(ω)` = allotted columns / N.
    pub fn mass(&self, subset: &SubsetId) -> f64 {
        let k: usize = subset.indices().iter().map(|&i| self.ranges[i].len()).sum();
        k as f64 / self.n as f64
    }
}
