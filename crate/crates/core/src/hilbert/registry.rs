use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of a finite-dimensional subsystem. Compared by exact string equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SystemLabel(String);

impl SystemLabel {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidSystem {
                label: name,
                reason: "label is empty".into(),
            });
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SystemLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SystemLabel {
    /// Panics on the empty string. Use [`SystemLabel::new`] for untrusted input.
    fn from(s: &str) -> Self {
        Self::new(s).expect("system label must be nonempty")
    }
}

/// One tensor factor of a [`Space`].
///
/// `rank` is the factor's position in the registry that produced it and
/// fixes the canonical ordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub label: SystemLabel,
    pub dim: usize,
    rank: usize,
}

/// An ordered set of subsystems, always kept in registry order.
/// The first factor is the most significant tensor index.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Space {
    factors: Vec<Factor>,
}

impl Space {
    /// The one-dimensional space with no factors.
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &SystemLabel> {
        self.factors.iter().map(|f| &f.label)
    }

    pub fn label_names(&self) -> Vec<String> {
        self.labels().map(|l| l.to_string()).collect()
    }

    pub fn contains(&self, label: &SystemLabel) -> bool {
        self.factors.iter().any(|f| &f.label == label)
    }

    pub fn is_subset_of(&self, other: &Space) -> bool {
        self.labels().all(|l| other.contains(l))
    }

    pub fn is_disjoint_from(&self, other: &Space) -> bool {
        self.labels().all(|l| !other.contains(l))
    }

    pub fn union(&self, other: &Space) -> Space {
        let mut factors = self.factors.clone();
        for f in &other.factors {
            if !self.contains(&f.label) {
                factors.push(f.clone());
            }
        }
        factors.sort_by_key(|f| f.rank);
        Space { factors }
    }

    pub fn difference(&self, other: &Space) -> Space {
        Space {
            factors: self
                .factors
                .iter()
                .filter(|f| !other.contains(&f.label))
                .cloned()
                .collect(),
        }
    }

    /// Mixed-radix digits of `index`, one per factor.
    pub(crate) fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.factors.len()];
        for (slot, f) in digits.iter_mut().zip(&self.factors).rev() {
            *slot = index % f.dim;
            index /= f.dim;
        }
        digits
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.labels().map(|l| l.as_str()).collect();
        write!(f, "({})", names.join(","))
    }
}

/// Named subsystems with their dimensions.
///
/// Entry order is the canonical tensor-factor order used everywhere.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SystemRegistry {
    entries: Vec<(SystemLabel, usize)>,
}

impl SystemRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I, L>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (L, usize)>,
        L: Into<String>,
    {
        let mut reg = Self::new();
        for (label, dim) in entries {
            reg.push(SystemLabel::new(label)?, dim)?;
        }
        Ok(reg)
    }

    pub fn push(&mut self, label: SystemLabel, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::InvalidSystem {
                label: label.to_string(),
                reason: "dimension must be at least 1".into(),
            });
        }
        if self.index_of(&label).is_some() {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        self.entries.push((label, dim));
        Ok(())
    }

    /// Returns a copy with one more system appended as the rightmost factor.
    pub fn with_system(&self, label: impl Into<String>, dim: usize) -> Result<Self> {
        let mut reg = self.clone();
        reg.push(SystemLabel::new(label)?, dim)?;
        Ok(reg)
    }

    pub fn entries(&self) -> &[(SystemLabel, usize)] {
        &self.entries
    }

    pub fn index_of(&self, label: &SystemLabel) -> Option<usize> {
        self.entries.iter().position(|(l, _)| l == label)
    }

    pub fn dim_of(&self, label: &SystemLabel) -> Result<usize> {
        self.index_of(label)
            .map(|i| self.entries[i].1)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Canonically ordered space over `labels`. Duplicates are rejected.
    pub fn space<'a, I>(&self, labels: I) -> Result<Space>
    where
        I: IntoIterator<Item = &'a SystemLabel>,
    {
        let mut factors = Vec::new();
        for label in labels {
            let rank = self
                .index_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            if factors.iter().any(|f: &Factor| f.rank == rank) {
                return Err(Error::DuplicateLabel(label.to_string()));
            }
            factors.push(Factor {
                label: label.clone(),
                dim: self.entries[rank].1,
                rank,
            });
        }
        factors.sort_by_key(|f| f.rank);
        Ok(Space { factors })
    }

    /// Like [`space`](Self::space) but takes plain names.
    pub fn space_of(&self, names: &[&str]) -> Result<Space> {
        let labels = names.iter().map(|n| SystemLabel::new(*n)).collect::<Result<Vec<_>>>()?;
        self.space(&labels)
    }

    pub fn full_space(&self) -> Space {
        Space {
            factors: self
                .entries
                .iter()
                .enumerate()
                .map(|(rank, (label, dim))| Factor {
                    label: label.clone(),
                    dim: *dim,
                    rank,
                })
                .collect(),
        }
    }
}
