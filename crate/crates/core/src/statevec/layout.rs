use std::fmt;

use crate::error::{Error, Result};

/// Opaque name of a register.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteId(String);

impl SiteId {
    pub fn new(name: impl Into<String>) -> Self {
        SiteId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SiteId {
    fn from(s: &str) -> Self {
        SiteId(s.to_owned())
    }
}

impl From<String> for SiteId {
    fn from(s: String) -> Self {
        SiteId(s)
    }
}

impl From<&SiteId> for SiteId {
    fn from(s: &SiteId) -> Self {
        s.clone()
    }
}

/// Ordered list of registers with their dimensions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegisterLayout {
    sites: Vec<(SiteId, usize)>,
}

impl RegisterLayout {
    pub fn new<S: Into<SiteId>>(sites: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut layout = RegisterLayout::default();
        for (id, dim) in sites {
            layout.push(id.into(), dim)?;
        }
        Ok(layout)
    }

    pub fn empty() -> Self {
        RegisterLayout::default()
    }

    fn push(&mut self, id: SiteId, dim: usize) -> Result<()> {
        if dim < 2 {
            return Err(Error::BadDimension(id.0));
        }
        if self.position(&id).is_some() {
            return Err(Error::SiteClash(id.0));
        }
        self.sites.push((id, dim));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> impl Iterator<Item = (&SiteId, usize)> {
        self.sites.iter().map(|(s, d)| (s, *d))
    }

    pub fn site_ids(&self) -> impl Iterator<Item = &SiteId> {
        self.sites.iter().map(|(s, _)| s)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sites.iter().map(|(_, d)| *d).collect()
    }

    pub fn position(&self, id: &SiteId) -> Option<usize> {
        self.sites.iter().position(|(s, _)| s == id)
    }

    pub fn contains(&self, id: &SiteId) -> bool {
        self.position(id).is_some()
    }

    pub fn dim(&self, id: &SiteId) -> Option<usize> {
        self.position(id).map(|p| self.sites[p].1)
    }

    pub(crate) fn dim_at(&self, pos: usize) -> usize {
        self.sites[pos].1
    }

    pub(crate) fn id_at(&self, pos: usize) -> &SiteId {
        &self.sites[pos].0
    }

    /// Position of `id`, or `UnknownSite`.
    pub fn index_of(&self, id: &SiteId) -> Result<usize> {
        self.position(id)
            .ok_or_else(|| Error::UnknownSite(id.0.clone()))
    }

    /// Hilbert-space dimension, `None` on overflow.
    pub fn total_dim(&self) -> Option<u128> {
        self.sites
            .iter()
            .try_fold(1u128, |acc, (_, d)| acc.checked_mul(*d as u128))
    }

    /// Layout of `self` followed by `other`.
    pub fn concat(&self, other: &RegisterLayout) -> Result<Self> {
        let mut out = self.clone();
        for (id, dim) in &other.sites {
            out.push(id.clone(), *dim)?;
        }
        Ok(out)
    }

    /// Layout with the given positions removed.
    pub(crate) fn without(&self, positions: &[usize]) -> Self {
        RegisterLayout {
            sites: self
                .sites
                .iter()
                .enumerate()
                .filter(|(i, _)| !positions.contains(i))
                .map(|(_, s)| s.clone())
                .collect(),
        }
    }

    /// Checks that `labels` is a valid basis label tuple.
    pub fn check_labels(&self, labels: &[u32]) -> Result<()> {
        if labels.len() != self.sites.len() {
            return Err(Error::LabelCount {
                expected: self.sites.len(),
                got: labels.len(),
            });
        }
        for ((id, dim), &label) in self.sites.iter().zip(labels) {
            if label as usize >= *dim {
                return Err(Error::InvalidLabel {
                    site: id.0.clone(),
                    label,
                    dim: *dim,
                });
            }
        }
        Ok(())
    }
}

/// Mixed-radix index of `labels` (first entry most significant).
pub(crate) fn mixed_index(labels: impl IntoIterator<Item = u32>, dims: &[usize]) -> usize {
    labels
        .into_iter()
        .zip(dims)
        .fold(0usize, |acc, (l, d)| acc * d + l as usize)
}

/// Inverse of [`mixed_index`].
pub(crate) fn mixed_labels(mut index: usize, dims: &[usize]) -> Vec<u32> {
    let mut out = vec![0u32; dims.len()];
    for (slot, d) in out.iter_mut().zip(dims).rev() {
        *slot = (index % d) as u32;
        index /= d;
    }
    out
}
