//! Sparse pure bosonic states over a fixed set of labeled optical rails.
//!
//! A state is a sparse map from occupation vectors to complex amplitudes.
//! Rails are fixed when the rail set is built and never grow during
//! evolution; every operation here is a pure function of its inputs.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex amplitude attached to one Fock basis term.
pub type Amplitude = Complex64;

/// Amplitudes below this magnitude are dropped after every operation.
/// This removes exact-cancellation residue (two-photon interference
/// cross terms) while genuine amplitudes stay orders of magnitude above.
pub const PRUNING_THRESHOLD: f64 = 1e-12;

/// Tolerance within which a state counts as unit-norm.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// A labeled optical path (mode).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RailId(String);

impl RailId {
    pub fn new(label: impl Into<String>) -> Self {
        RailId(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RailId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RailId {
    fn from(s: &str) -> Self {
        RailId::new(s)
    }
}

/// The ordered, fixed set of rails a network is defined over.
#[derive(Debug, Eq)]
pub struct RailSet {
    labels: Vec<RailId>,
}

impl RailSet {
    /// Build a rail set; labels must be unique.
    pub fn new<I, R>(labels: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = R>,
        R: Into<RailId>,
    {
        let labels: Vec<RailId> = labels.into_iter().map(Into::into).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateRail(l.to_string()));
            }
        }
        Ok(Arc::new(RailSet { labels }))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[RailId] {
        &self.labels
    }

    pub fn contains(&self, rail: &RailId) -> bool {
        self.labels.contains(rail)
    }

    /// Position of a rail within the ordered set.
    pub fn index_of(&self, rail: &RailId) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == rail)
            .ok_or_else(|| Error::UnknownRail(rail.to_string()))
    }
}

impl PartialEq for RailSet {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

/// One term of a superposition: the photon count on each rail.
///
/// Ordering is lexicographic on the occupation vector, which fixes the
/// term order used in every listing and report.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockBasisState(Vec<u8>);

impl FockBasisState {
    pub fn new(occupations: Vec<u8>) -> Self {
        FockBasisState(occupations)
    }

    pub fn vacuum(rail_count: usize) -> Self {
        FockBasisState(vec![0; rail_count])
    }

    pub fn occupations(&self) -> &[u8] {
        &self.0
    }

    pub fn rail_count(&self) -> usize {
        self.0.len()
    }

    pub fn occupation(&self, rail_index: usize) -> u8 {
        self.0[rail_index]
    }

    /// Total photon number of the term.
    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| u32::from(n)).sum()
    }

    /// Copy with one occupation replaced.
    pub fn with(&self, rail_index: usize, occupation: u8) -> Self {
        let mut occ = self.0.clone();
        occ[rail_index] = occupation;
        FockBasisState(occ)
    }

    /// Copy with the given rails set to zero.
    pub(crate) fn with_zeroed(&self, rail_indices: &[usize]) -> Self {
        let mut occ = self.0.clone();
        for &i in rail_indices {
            occ[i] = 0;
        }
        FockBasisState(occ)
    }

    /// Copy with the given rails overwritten from `sub` (parallel slices).
    pub(crate) fn with_sub(&self, rail_indices: &[usize], sub: &FockBasisState) -> Self {
        let mut occ = self.0.clone();
        for (&i, &n) in rail_indices.iter().zip(sub.occupations()) {
            occ[i] = n;
        }
        FockBasisState(occ)
    }

    /// Human-readable label such as `A1,B2,B3` or `2A1,A3`; `vac` when empty.
    pub fn label(&self, rails: &RailSet) -> String {
        let mut parts = Vec::new();
        for (i, &n) in self.0.iter().enumerate() {
            match n {
                0 => {}
                1 => parts.push(rails.labels()[i].to_string()),
                k => parts.push(format!("{k}{}", rails.labels()[i])),
            }
        }
        if parts.is_empty() {
            "vac".to_string()
        } else {
            parts.join(",")
        }
    }
}

/// A pure state of light: sparse map from Fock basis terms to amplitudes.
///
/// Immutable after construction; every operation returns a new state.
#[derive(Clone, Debug)]
pub struct PureState {
    rails: Arc<RailSet>,
    terms: BTreeMap<FockBasisState, Amplitude>,
    normalized: bool,
}

impl PureState {
    /// The vacuum over a rail set (a normalized state).
    pub fn vacuum(rails: Arc<RailSet>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(FockBasisState::vacuum(rails.len()), Amplitude::new(1.0, 0.0));
        PureState {
            rails,
            terms,
            normalized: true,
        }
    }

    /// A single Fock basis state with amplitude 1.
    pub fn basis(rails: Arc<RailSet>, occupations: &[u8]) -> Result<Self> {
        if occupations.len() != rails.len() {
            return Err(Error::Contract(format!(
                "occupation vector has {} entries for {} rails",
                occupations.len(),
                rails.len()
            )));
        }
        let mut terms = BTreeMap::new();
        terms.insert(
            FockBasisState::new(occupations.to_vec()),
            Amplitude::new(1.0, 0.0),
        );
        Ok(PureState {
            rails,
            terms,
            normalized: true,
        })
    }

    /// Build a state from basis terms. Duplicate terms accumulate; amplitudes
    /// must be finite; terms below the pruning threshold are dropped.
    pub fn from_terms<I>(rails: Arc<RailSet>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FockBasisState, Amplitude)>,
    {
        let mut map: BTreeMap<FockBasisState, Amplitude> = BTreeMap::new();
        for (basis, amp) in terms {
            if basis.rail_count() != rails.len() {
                return Err(Error::Contract(format!(
                    "term has {} occupations for {} rails",
                    basis.rail_count(),
                    rails.len()
                )));
            }
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(Error::NonFiniteAmplitude(basis.label(&rails)));
            }
            *map.entry(basis).or_insert(Amplitude::new(0.0, 0.0)) += amp;
        }
        map.retain(|_, a| a.norm() >= PRUNING_THRESHOLD);
        let mut state = PureState {
            rails,
            terms: map,
            normalized: false,
        };
        state.normalized = (state.norm() - 1.0).abs() <= NORM_TOLERANCE;
        Ok(state)
    }

    /// Convenience constructor from `(occupations, amplitude)` pairs.
    pub fn from_amplitudes(rails: Arc<RailSet>, items: &[(&[u8], Amplitude)]) -> Result<Self> {
        Self::from_terms(
            rails,
            items
                .iter()
                .map(|(occ, amp)| (FockBasisState::new(occ.to_vec()), *amp)),
        )
    }

    /// Internal constructor for maps already validated and pruned.
    pub(crate) fn raw(
        rails: Arc<RailSet>,
        terms: BTreeMap<FockBasisState, Amplitude>,
        normalized: bool,
    ) -> Self {
        PureState {
            rails,
            terms,
            normalized,
        }
    }

    pub fn rails(&self) -> &Arc<RailSet> {
        &self.rails
    }

    /// Terms in lexicographic occupation order.
    pub fn terms(&self) -> impl Iterator<Item = (&FockBasisState, &Amplitude)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// True when every term has been projected away.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Amplitude of one basis term (zero if absent).
    pub fn amplitude(&self, basis: &FockBasisState) -> Amplitude {
        self.terms
            .get(basis)
            .copied()
            .unwrap_or_else(|| Amplitude::new(0.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Whether the state was unit-norm at construction / last normalization.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    fn check_same_rails(&self, other: &PureState) -> Result<()> {
        if Arc::ptr_eq(&self.rails, &other.rails) || self.rails == other.rails {
            Ok(())
        } else {
            Err(Error::RailSetMismatch(format!(
                "[{}] vs [{}]",
                self.rails
                    .labels()
                    .iter()
                    .map(|l| l.as_str())
                    .collect::<Vec<_>>()
                    .join(","),
                other
                    .rails
                    .labels()
                    .iter()
                    .map(|l| l.as_str())
                    .collect::<Vec<_>>()
                    .join(","),
            )))
        }
    }

    /// Inner product `⟨self|ket⟩`; conjugate-symmetric.
    pub fn inner(&self, ket: &PureState) -> Result<Amplitude> {
        self.check_same_rails(ket)?;
        let mut acc = Amplitude::new(0.0, 0.0);
        for (basis, amp) in &self.terms {
            if let Some(k) = ket.terms.get(basis) {
                acc += amp.conj() * k;
            }
        }
        Ok(acc)
    }

    /// `|⟨self|other⟩|` — the phase-insensitive overlap used to compare
    /// states that are equal up to a global phase.
    pub fn overlap_magnitude(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Tensor product over disjoint rail sets; rails concatenate.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        for l in other.rails.labels() {
            if self.rails.contains(l) {
                return Err(Error::DuplicateRail(l.to_string()));
            }
        }
        let rails = RailSet::new(
            self.rails
                .labels()
                .iter()
                .chain(other.rails.labels())
                .cloned(),
        )?;
        let mut terms = BTreeMap::new();
        for (ba, aa) in &self.terms {
            for (bb, ab) in &other.terms {
                let mut occ = ba.occupations().to_vec();
                occ.extend_from_slice(bb.occupations());
                let amp = aa * ab;
                if amp.norm() >= PRUNING_THRESHOLD {
                    terms.insert(FockBasisState::new(occ), amp);
                }
            }
        }
        Ok(PureState {
            rails,
            terms,
            normalized: self.normalized && other.normalized,
        })
    }

    /// Scale to unit norm. Returns the scaled state and the original norm.
    /// The zero state is a degenerate input: it means a conditioning event
    /// has probability zero, and callers must branch on that.
    pub fn normalize(&self) -> Result<(PureState, f64)> {
        let norm = self.norm();
        if self.terms.is_empty() || norm < PRUNING_THRESHOLD {
            return Err(Error::ZeroState(
                "state has no terms above the pruning threshold".to_string(),
            ));
        }
        let inv = 1.0 / norm;
        let terms = self
            .terms
            .iter()
            .map(|(b, a)| (b.clone(), a * inv))
            .collect();
        Ok((
            PureState {
                rails: self.rails.clone(),
                terms,
                normalized: true,
            },
            norm,
        ))
    }

    /// Multiply every amplitude by a constant.
    pub fn scaled(&self, factor: Amplitude) -> PureState {
        let mut terms: BTreeMap<FockBasisState, Amplitude> = self
            .terms
            .iter()
            .map(|(b, a)| (b.clone(), a * factor))
            .collect();
        terms.retain(|_, a| a.norm() >= PRUNING_THRESHOLD);
        PureState {
            rails: self.rails.clone(),
            terms,
            normalized: self.normalized && (factor.norm() - 1.0).abs() <= NORM_TOLERANCE,
        }
    }

    /// Keep only the terms satisfying a predicate (unnormalized projection).
    pub(crate) fn filter_terms<F>(&self, keep: F) -> PureState
    where
        F: Fn(&FockBasisState) -> bool,
    {
        let terms = self
            .terms
            .iter()
            .filter(|(b, _)| keep(b))
            .map(|(b, a)| (b.clone(), *a))
            .collect();
        PureState {
            rails: self.rails.clone(),
            terms,
            normalized: false,
        }
    }

    /// Largest per-amplitude deviation from `other` over the union of terms.
    pub fn max_deviation(&self, other: &PureState) -> Result<f64> {
        self.check_same_rails(other)?;
        let mut max = 0.0f64;
        for (basis, amp) in &self.terms {
            max = max.max((amp - other.amplitude(basis)).norm());
        }
        for (basis, amp) in &other.terms {
            if !self.terms.contains_key(basis) {
                max = max.max(amp.norm());
            }
        }
        Ok(max)
    }

    /// Largest per-amplitude deviation from `reference` after aligning one
    /// global phase, chosen at the reference term of largest magnitude.
    /// Returns the deviation and the phase applied to `reference`.
    pub fn max_deviation_up_to_phase(&self, reference: &PureState) -> Result<(f64, Amplitude)> {
        self.check_same_rails(reference)?;
        let Some((anchor, anchor_amp)) = reference
            .terms
            .iter()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        else {
            return Ok((self.norm(), Amplitude::new(1.0, 0.0)));
        };
        let got = self.amplitude(anchor);
        if got.norm() < PRUNING_THRESHOLD {
            // No overlap at the anchor: report without phase alignment.
            return Ok((self.max_deviation(reference)?, Amplitude::new(1.0, 0.0)));
        }
        let phase = (got / anchor_amp) / (got / anchor_amp).norm();
        let dev = self.max_deviation(&reference.scaled(phase))?;
        Ok((dev, phase))
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (basis, amp)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(
                f,
                "({:+.6}{:+.6}i)|{}⟩",
                amp.re,
                amp.im,
                basis.label(&self.rails)
            )?;
        }
        Ok(())
    }
}
