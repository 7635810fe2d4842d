//! Sparse pure states over registers of mixed dimension.
//!
//! A [`SparseState`] stores only the nonzero amplitudes, keyed by the tuple of
//! basis labels (one per register of its [`RegisterLayout`]). Every protocol
//! in this crate uses basis permutations and a few low-arity unitaries, so the
//! number of stored terms stays small even when the dense dimension is huge.
//!
//! States are values: every operation returns a new state.

mod gate;
mod layout;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use gate::{GateKind, GateSpec};
pub use layout::{RegisterLayout, SiteId};

use crate::error::{Error, Result};
use crate::scalar::Real;
use layout::{mixed_index, mixed_labels};

/// Basis label tuple, one value per site of the layout.
pub type Labels = Vec<u32>;

/// Deterministic generator used for every measurement.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseState<T: Real> {
    layout: RegisterLayout,
    terms: BTreeMap<Labels, Complex<T>>,
}

/// Result of measuring some sites of a state.
#[derive(Clone, Debug)]
pub struct Measurement<T: Real> {
    pub outcome: Labels,
    /// Renormalized post-measurement state with the measured sites removed.
    pub state: SparseState<T>,
    pub probability: f64,
}

fn prune<T: Real>(terms: &mut BTreeMap<Labels, Complex<T>>) {
    let eps = T::lit(T::PRUNE);
    terms.retain(|_, a| a.norm() >= eps);
}

impl<T: Real> SparseState<T> {
    /// The state with no registers (the scalar 1).
    pub fn vacuum() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), Complex::new(T::one(), T::zero()));
        SparseState {
            layout: RegisterLayout::empty(),
            terms,
        }
    }

    /// Computational basis state `|labels⟩`.
    pub fn basis(layout: RegisterLayout, labels: &[u32]) -> Result<Self> {
        layout.check_labels(labels)?;
        let mut terms = BTreeMap::new();
        terms.insert(labels.to_vec(), Complex::new(T::one(), T::zero()));
        Ok(SparseState { layout, terms })
    }

    /// Normalized superposition of weighted basis states. Coincident labels
    /// have their weights summed before normalization.
    pub fn superpose<L: AsRef<[u32]>>(
        layout: RegisterLayout,
        terms: impl IntoIterator<Item = (Complex<T>, L)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Labels, Complex<T>> = BTreeMap::new();
        for (w, labels) in terms {
            let labels = labels.as_ref();
            layout.check_labels(labels)?;
            *map.entry(labels.to_vec()).or_insert_with(Complex::zero) += w;
        }
        prune(&mut map);
        let norm: T = map
            .values()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |x, y| x + y);
        if map.is_empty() || norm.as_f64() < T::PRUNE * T::PRUNE {
            return Err(Error::ZeroState);
        }
        let scale = T::one() / norm.sqrt();
        for a in map.values_mut() {
            *a *= scale;
        }
        Ok(SparseState { layout, terms: map })
    }

    /// State with the given amplitudes, which must already be normalized.
    pub fn from_amplitudes<L: AsRef<[u32]>>(
        layout: RegisterLayout,
        terms: impl IntoIterator<Item = (L, Complex<T>)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Labels, Complex<T>> = BTreeMap::new();
        for (labels, a) in terms {
            let labels = labels.as_ref();
            layout.check_labels(labels)?;
            *map.entry(labels.to_vec()).or_insert_with(Complex::zero) += a;
        }
        prune(&mut map);
        let state = SparseState { layout, terms: map };
        let n = state.norm_sqr();
        if (n - 1.0).abs() > T::NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(state)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    /// Stored terms in ascending label order.
    pub fn terms(&self) -> impl Iterator<Item = (&Labels, &Complex<T>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, labels: &[u32]) -> Complex<T> {
        self.terms
            .get(labels)
            .copied()
            .unwrap_or_else(Complex::zero)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr().as_f64()).sum()
    }

    fn positions(&self, sites: &[SiteId]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(sites.len());
        for s in sites {
            let p = self.layout.index_of(s)?;
            if out.contains(&p) {
                return Err(Error::SiteClash(s.to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    fn act(&self, gate: &GateSpec<T>, controls: &[(usize, u32)]) -> Result<Self> {
        let targets = self.positions(gate.targets())?;
        for (&p, &d) in targets.iter().zip(gate.dims()) {
            if self.layout.dim_at(p) != d {
                return Err(Error::DimMismatch(format!(
                    "gate expects dimension {d} on `{}`, layout has {}",
                    self.layout.id_at(p),
                    self.layout.dim_at(p)
                )));
            }
        }
        let dims = gate.dims();
        let mut out: BTreeMap<Labels, Complex<T>> = BTreeMap::new();
        for (key, &amp) in &self.terms {
            if !controls.iter().all(|&(p, v)| key[p] == v) {
                *out.entry(key.clone()).or_insert_with(Complex::zero) += amp;
                continue;
            }
            let col = mixed_index(targets.iter().map(|&p| key[p]), dims);
            gate.for_each_image(col, |row, m| {
                let mut k = key.clone();
                for (&p, l) in targets.iter().zip(mixed_labels(row, dims)) {
                    k[p] = l;
                }
                *out.entry(k).or_insert_with(Complex::zero) += m * amp;
            });
        }
        prune(&mut out);
        let state = SparseState {
            layout: self.layout.clone(),
            terms: out,
        };
        debug_assert!((state.norm_sqr() - 1.0).abs() <= T::NORM_TOL.max(1e-6));
        Ok(state)
    }

    pub fn apply_gate(&self, gate: &GateSpec<T>) -> Result<Self> {
        self.act(gate, &[])
    }

    /// Applies `gate` exactly on the terms whose control sites carry the
    /// given labels; every other term is left untouched.
    pub fn apply_controlled(&self, controls: &[(SiteId, u32)], gate: &GateSpec<T>) -> Result<Self> {
        let mut resolved = Vec::with_capacity(controls.len());
        for (site, label) in controls {
            if gate.targets().contains(site) {
                return Err(Error::SiteClash(site.to_string()));
            }
            let p = self.layout.index_of(site)?;
            if resolved.iter().any(|&(q, _)| q == p) {
                return Err(Error::SiteClash(site.to_string()));
            }
            let dim = self.layout.dim_at(p);
            if *label as usize >= dim {
                return Err(Error::InvalidLabel {
                    site: site.to_string(),
                    label: *label,
                    dim,
                });
            }
            resolved.push((p, *label));
        }
        self.act(gate, &resolved)
    }

    /// `dst <- dst XOR src`; both sites need the same power-of-two dimension.
    pub fn xor_add(&self, src: &SiteId, dst: &SiteId) -> Result<Self> {
        let ds = self
            .layout
            .dim(src)
            .ok_or_else(|| Error::UnknownSite(src.to_string()))?;
        let dd = self
            .layout
            .dim(dst)
            .ok_or_else(|| Error::UnknownSite(dst.to_string()))?;
        if src == dst {
            return Err(Error::SiteClash(src.to_string()));
        }
        if ds != dd {
            return Err(Error::DimMismatch(format!(
                "`{src}` has {ds}, `{dst}` has {dd}"
            )));
        }
        self.apply_gate(&GateSpec::xor_add(src, dst, ds)?)
    }

    /// Outcome probabilities of measuring `sites`, in ascending label order.
    pub fn marginal(&self, sites: &[SiteId]) -> Result<BTreeMap<Labels, f64>> {
        let pos = self.positions(sites)?;
        let mut out = BTreeMap::new();
        for (key, a) in &self.terms {
            let k: Labels = pos.iter().map(|&p| key[p]).collect();
            *out.entry(k).or_insert(0.0) += a.norm_sqr().as_f64();
        }
        Ok(out)
    }

    /// The value of `site` if it is the same in every term.
    pub fn definite_value(&self, site: &SiteId) -> Result<Option<u32>> {
        let m = self.marginal(std::slice::from_ref(site))?;
        Ok(if m.len() == 1 {
            m.keys().next().map(|k| k[0])
        } else {
            None
        })
    }

    /// Projects `sites` onto `outcome`, removes them and renormalizes.
    /// Returns the post state and the probability of the outcome.
    pub fn project(&self, sites: &[SiteId], outcome: &[u32]) -> Result<(Self, f64)> {
        let pos = self.positions(sites)?;
        if outcome.len() != pos.len() {
            return Err(Error::LabelCount {
                expected: pos.len(),
                got: outcome.len(),
            });
        }
        let layout = self.layout.without(&pos);
        let mut kept: BTreeMap<Labels, Complex<T>> = BTreeMap::new();
        let mut prob = 0.0;
        for (key, &a) in &self.terms {
            if pos.iter().zip(outcome).all(|(&p, &v)| key[p] == v) {
                prob += a.norm_sqr().as_f64();
                let rest: Labels = key
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !pos.contains(i))
                    .map(|(_, &l)| l)
                    .collect();
                kept.insert(rest, a);
            }
        }
        if kept.is_empty() || prob <= 0.0 {
            return Err(Error::ZeroState);
        }
        let scale = T::lit(1.0 / prob.sqrt());
        for a in kept.values_mut() {
            *a *= scale;
        }
        prune(&mut kept);
        Ok((
            SparseState {
                layout,
                terms: kept,
            },
            prob,
        ))
    }

    /// Samples a measurement of `sites` with `rng`.
    pub fn measure_with<R: Rng + ?Sized>(
        &self,
        sites: &[SiteId],
        rng: &mut R,
    ) -> Result<Measurement<T>> {
        if sites.is_empty() {
            return Err(Error::DimMismatch(
                "measurement needs at least one site".into(),
            ));
        }
        let marginal = self.marginal(sites)?;
        let total: f64 = marginal.values().sum();
        let draw = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (k, &p) in &marginal {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            chosen = Some(k);
            if draw < acc {
                break;
            }
        }
        let outcome = chosen.ok_or(Error::ZeroState)?.clone();
        let (state, probability) = self.project(sites, &outcome)?;
        Ok(Measurement {
            outcome,
            state,
            probability,
        })
    }

    /// Measures `sites` with a generator seeded from `seed`.
    pub fn measure_sites(&self, sites: &[SiteId], seed: u64) -> Result<Measurement<T>> {
        self.measure_with(sites, &mut seeded_rng(seed))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        let (small, large, flip) = if self.terms.len() <= other.terms.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex::zero();
        for (k, a) in &small.terms {
            if let Some(b) = large.terms.get(k) {
                acc += a.conj() * b;
            }
        }
        Ok(if flip { acc.conj() } else { acc })
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().as_f64().min(1.0))
    }

    /// `⟨ψ|ρ|ψ⟩` where `ρ` is the reduced state of `sites` and `ψ` is a pure
    /// state whose layout lists exactly those sites with the same dimensions.
    pub fn overlap_on(&self, sites: &[SiteId], pure: &Self) -> Result<f64> {
        let pos = self.positions(sites)?;
        let dims: Vec<usize> = pos.iter().map(|&p| self.layout.dim_at(p)).collect();
        if pure.layout.dims() != dims || pure.layout.site_ids().ne(sites.iter()) {
            return Err(Error::LayoutMismatch);
        }
        let mut by_rest: BTreeMap<Labels, Complex<T>> = BTreeMap::new();
        for (key, &a) in &self.terms {
            let sub: Labels = pos.iter().map(|&p| key[p]).collect();
            let coeff = pure.amplitude(&sub);
            if coeff.is_zero() {
                continue;
            }
            let rest: Labels = key
                .iter()
                .enumerate()
                .filter(|(i, _)| !pos.contains(i))
                .map(|(_, &l)| l)
                .collect();
            *by_rest.entry(rest).or_insert_with(Complex::zero) += coeff.conj() * a;
        }
        Ok(by_rest
            .values()
            .map(|v| v.norm_sqr().as_f64())
            .sum::<f64>()
            .min(1.0))
    }

    /// Tensor product `self ⊗ other`; layouts must be disjoint.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let mut terms = BTreeMap::new();
        for (ka, a) in &self.terms {
            for (kb, b) in &other.terms {
                let mut k = ka.clone();
                k.extend_from_slice(kb);
                terms.insert(k, *a * *b);
            }
        }
        prune(&mut terms);
        Ok(SparseState { layout, terms })
    }
}

impl<T: Real> fmt::Display for SparseState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.layout.site_ids().map(SiteId::as_str).collect();
        writeln!(f, "[{}]", names.join(", "))?;
        for (k, a) in &self.terms {
            let labels: Vec<String> = k.iter().map(u32::to_string).collect();
            writeln!(f, "  ({:+.6}{:+.6}i) |{}⟩", a.re, a.im, labels.join(","))?;
        }
        Ok(())
    }
}
