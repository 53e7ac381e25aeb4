//! Post-selection: occupancy and apparatus-count filters, detector-state
//! projectors, the path-word register picture, detector measurement of the
//! middle photon, and the two-photon baseline run.
//!
//! "Photon k" means the photon found in apparatus k's rails; the notion is
//! well defined only inside the one-photon-per-apparatus subspace, and the
//! register mapping makes it executable.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::elements::apply_element;
use crate::error::{Error, Result};
use crate::fock::{
    Amplitude, FockBasisState, PureState, RailId, RailSet, NORM_TOLERANCE, PRUNING_THRESHOLD,
};
use crate::network::{ApparatusPartition, NetworkDescription};

/// A projector specification.
#[derive(Clone, Debug)]
pub enum SelectionEvent {
    /// Exact occupations on a subset of rails (diagonal in the Fock basis).
    Occupancy {
        rails: Vec<RailId>,
        occupations: Vec<u8>,
    },
    /// Exact photon count per partition group (diagonal in the Fock basis).
    ApparatusCounts {
        partition: ApparatusPartition,
        counts: Vec<u32>,
    },
    /// Rank-one projector onto a normalized state living on a rail subset.
    Detector { state: PureState },
}

impl SelectionEvent {
    pub fn occupancy(rails: Vec<RailId>, occupations: Vec<u8>) -> Result<Self> {
        if rails.len() != occupations.len() {
            return Err(Error::Contract(format!(
                "{} rails with {} occupations",
                rails.len(),
                occupations.len()
            )));
        }
        Ok(SelectionEvent::Occupancy { rails, occupations })
    }

    pub fn apparatus_counts(partition: ApparatusPartition, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != partition.groups().len() {
            return Err(Error::Contract(format!(
                "{} counts for {} partition groups",
                counts.len(),
                partition.groups().len()
            )));
        }
        Ok(SelectionEvent::ApparatusCounts { partition, counts })
    }

    /// Detector-state events must carry a normalized state.
    pub fn detector(state: PureState) -> Result<Self> {
        if (state.norm() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Contract(format!(
                "detector state has norm {}, expected 1",
                state.norm()
            )));
        }
        Ok(SelectionEvent::Detector { state })
    }
}

/// Apply a projector; the result is left unnormalized. Idempotent.
pub fn apply_projector(event: &SelectionEvent, s: &PureState) -> Result<PureState> {
    match event {
        SelectionEvent::Occupancy { rails, occupations } => {
            let idxs: Vec<usize> = rails
                .iter()
                .map(|r| s.rails().index_of(r))
                .collect::<Result<_>>()?;
            Ok(s.filter_terms(|basis| {
                idxs.iter()
                    .zip(occupations)
                    .all(|(&i, &n)| basis.occupation(i) == n)
            }))
        }
        SelectionEvent::ApparatusCounts { partition, counts } => {
            let groups = partition.resolve(s.rails())?;
            Ok(s.filter_terms(|basis| {
                groups.iter().zip(counts).all(|(idxs, &want)| {
                    idxs.iter()
                        .map(|&i| u32::from(basis.occupation(i)))
                        .sum::<u32>()
                        == want
                })
            }))
        }
        SelectionEvent::Detector { state } => project_onto_substate(state, s),
    }
}

/// `(|d⟩⟨d| ⊗ 1)|s⟩` for a detector state `d` on a subset of the rails.
fn project_onto_substate(detector: &PureState, s: &PureState) -> Result<PureState> {
    let idxs: Vec<usize> = detector
        .rails()
        .labels()
        .iter()
        .map(|l| s.rails().index_of(l))
        .collect::<Result<_>>()?;

    // Group the host terms by their configuration outside the detector
    // rails; within each group the detector overlap is an ordinary
    // orthonormal-basis inner product.
    let mut rest_coeff: BTreeMap<FockBasisState, Amplitude> = BTreeMap::new();
    for (basis, &amp) in s.terms() {
        let sub = FockBasisState::new(idxs.iter().map(|&i| basis.occupation(i)).collect());
        let d_amp = detector.amplitude(&sub);
        if d_amp.norm() < PRUNING_THRESHOLD {
            continue;
        }
        *rest_coeff
            .entry(basis.with_zeroed(&idxs))
            .or_insert(Amplitude::new(0.0, 0.0)) += d_amp.conj() * amp;
    }

    let mut out: BTreeMap<FockBasisState, Amplitude> = BTreeMap::new();
    for (rest, coeff) in rest_coeff {
        for (sub, &d_amp) in detector.terms() {
            let amp = coeff * d_amp;
            if amp.norm() >= PRUNING_THRESHOLD {
                *out.entry(rest.with_sub(&idxs, sub))
                    .or_insert(Amplitude::new(0.0, 0.0)) += amp;
            }
        }
    }
    out.retain(|_, a| a.norm() >= PRUNING_THRESHOLD);
    Ok(PureState::raw(s.rails().clone(), out, false))
}

/// Project a normalized state onto exactly one photon per apparatus group,
/// normalize, and return the event probability.
pub fn no_crossing_filter(
    s: &PureState,
    partition: &ApparatusPartition,
) -> Result<(PureState, f64)> {
    if (s.norm() - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Contract(format!(
            "no-crossing filter expects a normalized state, got norm {}",
            s.norm()
        )));
    }
    let event = SelectionEvent::apparatus_counts(
        partition.clone(),
        vec![1; partition.groups().len()],
    )?;
    let projected = apply_projector(&event, s)?;
    let probability = projected.norm_sqr();
    let (filtered, _) = projected.normalize().map_err(|_| {
        Error::ImpossibleEvent(
            "no term places exactly one photon in every apparatus".to_string(),
        )
    })?;
    Ok((filtered, probability))
}

// ---------------------------------------------------------------------------
// Path-word registers
// ---------------------------------------------------------------------------

/// Which arm of its apparatus a photon occupies. `A` is the first rail
/// listed in the apparatus group, `B` the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    A,
    B,
}

impl Letter {
    pub const BOTH: [Letter; 2] = [Letter::A, Letter::B];
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::A => "A",
            Letter::B => "B",
        })
    }
}

/// One path assignment per photon, e.g. `ABB`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathWord(Vec<Letter>);

impl PathWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        PathWord(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letter(&self, photon: usize) -> Letter {
        self.0[photon]
    }

    /// Word with one photon's letter removed.
    pub fn without(&self, photon: usize) -> PathWord {
        let mut letters = self.0.clone();
        letters.remove(photon);
        PathWord(letters)
    }

    /// All `2^n` words of the given length, in lexicographic order.
    pub fn all(photons: usize) -> Vec<PathWord> {
        let mut words = vec![PathWord(Vec::new())];
        for _ in 0..photons {
            words = words
                .into_iter()
                .flat_map(|w| {
                    Letter::BOTH.iter().map(move |&l| {
                        let mut letters = w.0.clone();
                        letters.push(l);
                        PathWord(letters)
                    })
                })
                .collect();
        }
        words
    }
}

impl fmt::Display for PathWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for PathWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'A' => Ok(Letter::A),
                'B' => Ok(Letter::B),
                other => Err(Error::Contract(format!(
                    "invalid path letter `{other}` in `{s}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PathWord)
    }
}

/// A normalized state written in the path-word basis of the one-photon-
/// per-apparatus subspace. Photon order follows the partition group order.
#[derive(Clone, Debug)]
pub struct RegisterState {
    photons: usize,
    amplitudes: BTreeMap<PathWord, Amplitude>,
}

impl RegisterState {
    /// Build a register; the amplitudes must be unit-norm within 1e-9.
    pub fn new<I>(photons: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PathWord, Amplitude)>,
    {
        let mut amplitudes: BTreeMap<PathWord, Amplitude> = BTreeMap::new();
        for (word, amp) in terms {
            if word.len() != photons {
                return Err(Error::Contract(format!(
                    "word `{word}` has {} letters, register holds {photons} photons",
                    word.len()
                )));
            }
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(Error::NonFiniteAmplitude(word.to_string()));
            }
            *amplitudes.entry(word).or_insert(Amplitude::new(0.0, 0.0)) += amp;
        }
        amplitudes.retain(|_, a| a.norm() >= PRUNING_THRESHOLD);
        let norm_sqr: f64 = amplitudes.values().map(|a| a.norm_sqr()).sum();
        if (norm_sqr.sqrt() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Contract(format!(
                "register norm is {}, expected 1",
                norm_sqr.sqrt()
            )));
        }
        Ok(RegisterState {
            photons,
            amplitudes,
        })
    }

    /// Convenience constructor from `(word, amplitude)` string pairs.
    pub fn from_words(photons: usize, items: &[(&str, Amplitude)]) -> Result<Self> {
        let terms: Vec<(PathWord, Amplitude)> = items
            .iter()
            .map(|(w, a)| Ok((PathWord::from_str(w)?, *a)))
            .collect::<Result<_>>()?;
        Self::new(photons, terms)
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PathWord, &Amplitude)> {
        self.amplitudes.iter()
    }

    pub fn amplitude(&self, word: &PathWord) -> Amplitude {
        self.amplitudes
            .get(word)
            .copied()
            .unwrap_or_else(|| Amplitude::new(0.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// Inner product `⟨self|ket⟩`.
    pub fn inner(&self, ket: &RegisterState) -> Result<Amplitude> {
        if self.photons != ket.photons {
            return Err(Error::Contract(format!(
                "register photon counts differ: {} vs {}",
                self.photons, ket.photons
            )));
        }
        let mut acc = Amplitude::new(0.0, 0.0);
        for (word, amp) in &self.amplitudes {
            if let Some(k) = ket.amplitudes.get(word) {
                acc += amp.conj() * k;
            }
        }
        Ok(acc)
    }

    /// `|⟨self|other⟩|`, for comparisons up to a global phase.
    pub fn overlap_magnitude(&self, other: &RegisterState) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Probability of finding the photon on its `A` rail and on its `B` rail.
    pub fn marginal(&self, photon: usize) -> Result<(f64, f64)> {
        self.check_photon(photon)?;
        let mut p_a = 0.0;
        let mut p_b = 0.0;
        for (word, amp) in &self.amplitudes {
            match word.letter(photon) {
                Letter::A => p_a += amp.norm_sqr(),
                Letter::B => p_b += amp.norm_sqr(),
            }
        }
        Ok((p_a, p_b))
    }

    /// Multiply by a unit-modulus global phase.
    pub fn with_global_phase(&self, phase: Amplitude) -> Result<RegisterState> {
        if (phase.norm() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Contract(format!(
                "global phase must be unit modulus, got |{phase}| = {}",
                phase.norm()
            )));
        }
        RegisterState::new(
            self.photons,
            self.amplitudes.iter().map(|(w, a)| (w.clone(), a * phase)),
        )
    }

    /// Project one photon onto a letter state and renormalize, keeping the
    /// photon in place. Returns the post-selected register and the event
    /// probability.
    pub fn project_photon(
        &self,
        photon: usize,
        state: &LetterState,
    ) -> Result<(RegisterState, f64)> {
        self.check_photon(photon)?;
        // Coefficients of the remaining photons, grouped by reduced word.
        let mut reduced: BTreeMap<PathWord, Amplitude> = BTreeMap::new();
        for (word, amp) in &self.amplitudes {
            let overlap = state.amplitude(word.letter(photon)).conj();
            *reduced
                .entry(word.without(photon))
                .or_insert(Amplitude::new(0.0, 0.0)) += overlap * amp;
        }
        reduced.retain(|_, a| a.norm() >= PRUNING_THRESHOLD);
        let probability: f64 = reduced.values().map(|a| a.norm_sqr()).sum();
        if probability < PRUNING_THRESHOLD {
            return Err(Error::ImpossibleEvent(format!(
                "projection of photon {} onto `{}` has zero probability",
                photon + 1,
                state.label()
            )));
        }
        let scale = 1.0 / probability.sqrt();
        let mut amplitudes: BTreeMap<PathWord, Amplitude> = BTreeMap::new();
        for (rest, coeff) in reduced {
            for letter in Letter::BOTH {
                let amp = coeff * state.amplitude(letter) * scale;
                if amp.norm() >= PRUNING_THRESHOLD {
                    let mut letters = rest.letters().to_vec();
                    letters.insert(photon, letter);
                    *amplitudes
                        .entry(PathWord::new(letters))
                        .or_insert(Amplitude::new(0.0, 0.0)) += amp;
                }
            }
        }
        Ok((
            RegisterState {
                photons: self.photons,
                amplitudes,
            },
            probability,
        ))
    }

    fn check_photon(&self, photon: usize) -> Result<()> {
        if photon >= self.photons {
            return Err(Error::Contract(format!(
                "photon index {photon} out of range for a {}-photon register",
                self.photons
            )));
        }
        Ok(())
    }
}

/// Map a filtered state onto the path-word register. Every term must place
/// exactly one photon in each apparatus group, and every group must have
/// exactly two rails. Bijective: norms and relative phases carry over.
pub fn to_register(s: &PureState, partition: &ApparatusPartition) -> Result<RegisterState> {
    if (s.norm() - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Contract(format!(
            "register conversion expects a normalized state, got norm {}",
            s.norm()
        )));
    }
    let groups = partition.resolve(s.rails())?;
    for (group, idxs) in partition.groups().iter().zip(&groups) {
        if idxs.len() != 2 {
            return Err(Error::Representation(format!(
                "apparatus `{}` has {} rails; the register picture needs exactly two",
                group.name,
                idxs.len()
            )));
        }
    }
    let mut terms = Vec::new();
    for (basis, &amp) in s.terms() {
        let mut letters = Vec::with_capacity(groups.len());
        for (group, idxs) in partition.groups().iter().zip(&groups) {
            let occ_a = basis.occupation(idxs[0]);
            let occ_b = basis.occupation(idxs[1]);
            let letter = match (occ_a, occ_b) {
                (1, 0) => Letter::A,
                (0, 1) => Letter::B,
                _ => {
                    return Err(Error::Representation(format!(
                        "term `{}` does not place exactly one photon in apparatus `{}`",
                        basis.label(s.rails()),
                        group.name
                    )))
                }
            };
            letters.push(letter);
        }
        terms.push((PathWord::new(letters), amp));
    }
    RegisterState::new(groups.len(), terms)
}

/// Inverse of [`to_register`]: re-embed a register on the network's rails.
pub fn from_register(
    r: &RegisterState,
    rails: Arc<RailSet>,
    partition: &ApparatusPartition,
) -> Result<PureState> {
    let groups = partition.resolve(&rails)?;
    if groups.len() != r.photons() {
        return Err(Error::Contract(format!(
            "{}-photon register onto a partition with {} groups",
            r.photons(),
            groups.len()
        )));
    }
    let mut terms = Vec::new();
    for (word, &amp) in r.terms() {
        let mut occ = vec![0u8; rails.len()];
        for (idxs, letter) in groups.iter().zip(word.letters()) {
            let rail = match letter {
                Letter::A => idxs[0],
                Letter::B => idxs[1],
            };
            occ[rail] = 1;
        }
        terms.push((FockBasisState::new(occ), amp));
    }
    PureState::from_terms(rails, terms)
}

// ---------------------------------------------------------------------------
// Detector measurement
// ---------------------------------------------------------------------------

/// A normalized single-photon state over one apparatus' two arms.
#[derive(Clone, Debug)]
pub struct LetterState {
    label: String,
    amp_a: Amplitude,
    amp_b: Amplitude,
}

impl LetterState {
    pub fn new(label: impl Into<String>, amp_a: Amplitude, amp_b: Amplitude) -> Result<Self> {
        let norm = (amp_a.norm_sqr() + amp_b.norm_sqr()).sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Contract(format!(
                "letter state has norm {norm}, expected 1"
            )));
        }
        Ok(LetterState {
            label: label.into(),
            amp_a,
            amp_b,
        })
    }

    /// The state `(i|A⟩ − |B⟩)/√2` that makes detector D1 click with certainty.
    pub fn detector_d1() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        LetterState {
            label: "D1".to_string(),
            amp_a: Amplitude::new(0.0, s),
            amp_b: Amplitude::new(-s, 0.0),
        }
    }

    /// The state `(i|A⟩ + |B⟩)/√2` that makes detector D2 click with certainty.
    pub fn detector_d2() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        LetterState {
            label: "D2".to_string(),
            amp_a: Amplitude::new(0.0, s),
            amp_b: Amplitude::new(s, 0.0),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn amplitude(&self, letter: Letter) -> Amplitude {
        match letter {
            Letter::A => self.amp_a,
            Letter::B => self.amp_b,
        }
    }

    /// Embed as a one-photon state on an explicit rail pair.
    pub fn to_pure_state(&self, rail_a: impl Into<RailId>, rail_b: impl Into<RailId>) -> PureState {
        let rails = RailSet::new([rail_a.into(), rail_b.into()])
            .expect("detector rails are distinct");
        PureState::from_amplitudes(rails, &[(&[1, 0], self.amp_a), (&[0, 1], self.amp_b)])
            .expect("letter states are finite")
    }
}

/// One measurement outcome: its probability and the post-measurement state
/// of the remaining photons (absent when the outcome has zero probability).
#[derive(Clone, Debug)]
pub struct OutcomeRow {
    pub label: String,
    pub probability: f64,
    pub conditional: Option<RegisterState>,
}

/// Exhaustive measurement outcomes for one photon of a register.
#[derive(Clone, Debug)]
pub struct OutcomeTable {
    pub measured_photon: usize,
    pub remaining: Vec<usize>,
    pub rows: Vec<OutcomeRow>,
}

impl OutcomeTable {
    pub fn row(&self, label: &str) -> Option<&OutcomeRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn probability(&self, label: &str) -> Option<f64> {
        self.row(label).map(|r| r.probability)
    }
}

/// Measure one photon in a two-outcome orthonormal basis; the conditionals
/// are normalized registers over the remaining photons.
pub fn measure_in_basis(
    r: &RegisterState,
    photon: usize,
    basis: &[LetterState; 2],
) -> Result<OutcomeTable> {
    if photon >= r.photons() {
        return Err(Error::Contract(format!(
            "photon index {photon} out of range for a {}-photon register",
            r.photons()
        )));
    }
    let cross = basis[0].amp_a.conj() * basis[1].amp_a + basis[0].amp_b.conj() * basis[1].amp_b;
    if cross.norm() > NORM_TOLERANCE {
        return Err(Error::Contract(format!(
            "measurement basis `{}`/`{}` is not orthogonal",
            basis[0].label(),
            basis[1].label()
        )));
    }
    let mut rows = Vec::new();
    let mut total = 0.0;
    for outcome in basis {
        let mut reduced: BTreeMap<PathWord, Amplitude> = BTreeMap::new();
        for (word, amp) in r.terms() {
            let overlap = outcome.amplitude(word.letter(photon)).conj();
            *reduced
                .entry(word.without(photon))
                .or_insert(Amplitude::new(0.0, 0.0)) += overlap * amp;
        }
        reduced.retain(|_, a| a.norm() >= PRUNING_THRESHOLD);
        let probability: f64 = reduced.values().map(|a| a.norm_sqr()).sum();
        total += probability;
        let conditional = if probability >= PRUNING_THRESHOLD {
            let scale = 1.0 / probability.sqrt();
            Some(RegisterState {
                photons: r.photons() - 1,
                amplitudes: reduced
                    .into_iter()
                    .map(|(w, a)| (w, a * scale))
                    .collect(),
            })
        } else {
            None
        };
        rows.push(OutcomeRow {
            label: outcome.label().to_string(),
            probability,
            conditional,
        });
    }
    if (total - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Contract(format!(
            "outcome probabilities sum to {total}, expected 1"
        )));
    }
    Ok(OutcomeTable {
        measured_photon: photon,
        remaining: (0..r.photons()).filter(|&i| i != photon).collect(),
        rows,
    })
}

/// Measure the middle photon of a three-photon register in the D1/D2
/// detector basis.
pub fn measure_photon2(r: &RegisterState) -> Result<OutcomeTable> {
    if r.photons() != 3 {
        return Err(Error::Contract(format!(
            "detector measurement of the middle photon needs a 3-photon register, got {}",
            r.photons()
        )));
    }
    measure_in_basis(
        r,
        1,
        &[LetterState::detector_d1(), LetterState::detector_d2()],
    )
}

/// Marginal `(P(A), P(B))` of one photon, straight from the register.
pub fn path_probabilities(r: &RegisterState, photon: usize) -> Result<(f64, f64)> {
    r.marginal(photon)
}

/// The same marginal computed as the outcome-probability-weighted average
/// over the table's conditionals. `photon` is the index in the original
/// register; it must not be the measured photon.
pub fn path_probabilities_from_table(
    table: &OutcomeTable,
    photon: usize,
) -> Result<(f64, f64)> {
    let pos = table
        .remaining
        .iter()
        .position(|&i| i == photon)
        .ok_or_else(|| {
            Error::Contract(format!(
                "photon {photon} is not among the table's remaining photons"
            ))
        })?;
    let mut p_a = 0.0;
    let mut p_b = 0.0;
    for row in &table.rows {
        if let Some(conditional) = &row.conditional {
            let (a, b) = conditional.marginal(pos)?;
            p_a += row.probability * a;
            p_b += row.probability * b;
        }
    }
    Ok((p_a, p_b))
}

// ---------------------------------------------------------------------------
// Two-photon baseline
// ---------------------------------------------------------------------------

/// The behavior of the outer photons when the middle apparatus is empty:
/// each remaining photon is evolved through the full network and
/// conditioned on staying inside its own apparatus.
#[derive(Clone, Debug)]
pub struct BaselineReport {
    /// Per-apparatus conditional state and stay probability, for every
    /// apparatus that still receives a photon.
    pub singles: Vec<(String, PureState, f64)>,
    /// Joint conditional state of all remaining photons.
    pub joint: PureState,
    /// Probability that every remaining photon stays home.
    pub joint_probability: f64,
    /// Rail-occupation probabilities read off the joint conditional,
    /// for each rail of the remaining apparatuses.
    pub marginals: Vec<(String, f64)>,
}

impl BaselineReport {
    pub fn marginal(&self, rail: &str) -> Option<f64> {
        self.marginals
            .iter()
            .find(|(label, _)| label == rail)
            .map(|(_, p)| *p)
    }
}

/// Baseline run on the built-in triple Mach-Zehnder network with the
/// middle apparatus emptied.
pub fn two_photon_baseline() -> Result<BaselineReport> {
    two_photon_baseline_on(&crate::network::build_triple_mz(), "MZ2")
}

/// Baseline run on an arbitrary network: remove the source photons of
/// `absent_group`, evolve, and condition each remaining photon on staying
/// in its own apparatus.
pub fn two_photon_baseline_on(
    net: &NetworkDescription,
    absent_group: &str,
) -> Result<BaselineReport> {
    let partition = net.partition();
    if partition.group(absent_group).is_none() {
        return Err(Error::Contract(format!(
            "network has no apparatus group named `{absent_group}`"
        )));
    }
    let rails = net.rails();
    let groups = partition.resolve(rails)?;

    // Source photon count per group; the baseline removes one group's.
    let per_group: Vec<u32> = groups
        .iter()
        .map(|idxs| {
            idxs.iter()
                .map(|&i| u32::from(net.source().occupation(i)))
                .sum()
        })
        .collect();

    let evolve_from = |occupations: Vec<u8>| -> Result<PureState> {
        let mut state = PureState::basis(rails.clone(), &occupations)?;
        for stage in &net.sequence().stages {
            for element in &stage.elements {
                state = apply_element(element, &state).map_err(|e| e.in_stage(&stage.name))?;
            }
        }
        Ok(state)
    };

    let condition = |state: &PureState, counts: Vec<u32>| -> Result<(PureState, f64)> {
        let event = SelectionEvent::apparatus_counts(partition.clone(), counts)?;
        let projected = apply_projector(&event, state)?;
        let probability = projected.norm_sqr();
        let (conditioned, _) = projected.normalize().map_err(|_| {
            Error::ImpossibleEvent("no term keeps every photon in its own apparatus".to_string())
        })?;
        Ok((conditioned, probability))
    };

    let mut singles = Vec::new();
    for (gi, group) in partition.groups().iter().enumerate() {
        if group.name == absent_group || per_group[gi] == 0 {
            continue;
        }
        let mut occupations = vec![0u8; rails.len()];
        for &idx in &groups[gi] {
            occupations[idx] = net.source().occupation(idx);
        }
        let evolved = evolve_from(occupations)?;
        let mut counts = vec![0u32; groups.len()];
        counts[gi] = per_group[gi];
        let (conditional, probability) = condition(&evolved, counts)?;
        singles.push((group.name.clone(), conditional, probability));
    }

    let mut joint_occupations = vec![0u8; rails.len()];
    for (gi, group) in partition.groups().iter().enumerate() {
        if group.name == absent_group {
            continue;
        }
        for &idx in &groups[gi] {
            joint_occupations[idx] = net.source().occupation(idx);
        }
    }
    let evolved = evolve_from(joint_occupations)?;
    let joint_counts: Vec<u32> = partition
        .groups()
        .iter()
        .enumerate()
        .map(|(gi, group)| {
            if group.name == absent_group {
                0
            } else {
                per_group[gi]
            }
        })
        .collect();
    let (joint, joint_probability) = condition(&evolved, joint_counts)?;

    let mut marginals = Vec::new();
    for (gi, group) in partition.groups().iter().enumerate() {
        if group.name == absent_group || per_group[gi] == 0 {
            continue;
        }
        for rail in &group.rails {
            let idx = rails.index_of(rail)?;
            let p: f64 = joint
                .terms()
                .filter(|(basis, _)| basis.occupation(idx) >= 1)
                .map(|(_, amp)| amp.norm_sqr())
                .sum();
            marginals.push((rail.to_string(), p));
        }
    }

    Ok(BaselineReport {
        singles,
        joint,
        joint_probability,
        marginals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::network::{build_triple_mz, staged_evolution, ApparatusGroup, ApparatusPartition};
    use std::collections::BTreeMap as Map;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    /// The filtered three-photon state in its closed form.
    fn filtered_register() -> RegisterState {
        let s6 = 1.0 / 6.0f64.sqrt();
        let s3 = 1.0 / 3.0f64.sqrt();
        RegisterState::from_words(
            3,
            &[
                ("ABB", c(0.0, s6)),
                ("BAA", c(s6, 0.0)),
                ("BAB", c(0.0, s3)),
                ("BBB", c(-s3, 0.0)),
            ],
        )
        .unwrap()
    }

    /// Independent oracle: expand the eight post-primary path words with
    /// amplitudes i^(#B)/(2√2), zero out the two bunching pairs, apply the
    /// per-word survival factors (−i/2 for the words facing both shared
    /// splitters, −i/√2 for those facing one), and sum squared magnitudes.
    fn survival_oracle() -> (Map<String, Amplitude>, f64) {
        let unit = 1.0 / (2.0 * SQRT_2);
        let i = c(0.0, 1.0);
        let mut filtered: Map<String, Amplitude> = Map::new();
        let mut norm_sqr = 0.0;
        for word in ["AAA", "AAB", "ABA", "ABB", "BAA", "BAB", "BBA", "BBB"] {
            let b_count = word.chars().filter(|&ch| ch == 'B').count() as u32;
            let input_amp = i.powu(b_count) * unit;
            // Words with photons 1,2 on A1,A2 or photons 2,3 on B2,A3 bunch
            // at a shared splitter and leave the one-per-apparatus subspace.
            let bunches = word.starts_with("AA") || word.ends_with("BA");
            if bunches {
                continue;
            }
            let factor = match word {
                "ABB" | "BAA" => c(0.0, -0.5),
                "BAB" | "BBB" => c(0.0, -FRAC_1_SQRT_2),
                _ => unreachable!("remaining words face both shared splitters"),
            };
            let amp = input_amp * factor;
            norm_sqr += amp.norm_sqr();
            filtered.insert(word.to_string(), amp);
        }
        (filtered, norm_sqr)
    }

    #[test]
    fn oracle_event_probability_is_three_sixteenths() {
        let (_, norm_sqr) = survival_oracle();
        assert!((norm_sqr - 3.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn no_crossing_filter_matches_the_oracle() {
        let net = build_triple_mz();
        let staged = staged_evolution(&net).unwrap();
        let secondary = staged.after("secondary").unwrap();
        let (filtered, probability) = no_crossing_filter(secondary, net.partition()).unwrap();
        let (oracle_amps, oracle_norm_sqr) = survival_oracle();
        assert!((probability - oracle_norm_sqr).abs() < 1e-12);
        let register = to_register(&filtered, net.partition()).unwrap();
        let scale = 1.0 / oracle_norm_sqr.sqrt();
        for (word, amp) in &oracle_amps {
            let got = register.amplitude(&word.parse().unwrap());
            assert!(
                (got - amp * scale).norm() < 1e-12,
                "word {word}: got {got}, oracle {}",
                amp * scale
            );
        }
    }

    #[test]
    fn filtered_evolution_reproduces_the_survival_factors() {
        // Ratio of each filtered amplitude to its post-primary amplitude.
        let net = build_triple_mz();
        let staged = staged_evolution(&net).unwrap();
        let primary = staged.after("primary").unwrap();
        let secondary = staged.after("secondary").unwrap();
        let event = SelectionEvent::apparatus_counts(net.partition().clone(), vec![1, 1, 1]).unwrap();
        let unnormalized = apply_projector(&event, secondary).unwrap();
        let expectations = [
            (vec![1u8, 0, 0, 1, 0, 1], c(0.0, -0.5)),
            (vec![0, 1, 1, 0, 1, 0], c(0.0, -0.5)),
            (vec![0, 1, 1, 0, 0, 1], c(0.0, -FRAC_1_SQRT_2)),
            (vec![0, 1, 0, 1, 0, 1], c(0.0, -FRAC_1_SQRT_2)),
        ];
        for (occ, factor) in expectations {
            let basis = FockBasisState::new(occ);
            let ratio = unnormalized.amplitude(&basis) / primary.amplitude(&basis);
            assert!((ratio - factor).norm() < 1e-9, "ratio {ratio}, want {factor}");
        }
    }

    #[test]
    fn no_crossing_filter_yields_the_closed_form_state() {
        let net = build_triple_mz();
        let staged = staged_evolution(&net).unwrap();
        let secondary = staged.after("secondary").unwrap();
        let (filtered, probability) = no_crossing_filter(secondary, net.partition()).unwrap();
        assert!((probability - 3.0 / 16.0).abs() < 1e-9);
        let reference =
            from_register(&filtered_register(), net.rails().clone(), net.partition()).unwrap();
        assert!((filtered.overlap_magnitude(&reference).unwrap() - 1.0).abs() < 1e-9);
        // Our conventions introduce no extra global phase.
        assert!(filtered.max_deviation(&reference).unwrap() < 1e-9);
    }

    #[test]
    fn filter_keeps_states_already_inside_the_subspace() {
        // Singlet of two photons across two apparatuses.
        let rails = RailSet::new(["A1", "B1", "A3", "B3"]).unwrap();
        let partition = ApparatusPartition::new(
            &rails,
            vec![
                ApparatusGroup {
                    name: "MZ1".to_string(),
                    rails: vec!["A1".into(), "B1".into()],
                },
                ApparatusGroup {
                    name: "MZ3".to_string(),
                    rails: vec!["A3".into(), "B3".into()],
                },
            ],
        )
        .unwrap();
        let singlet = PureState::from_amplitudes(
            rails,
            &[
                (&[1, 0, 0, 1], c(FRAC_1_SQRT_2, 0.0)),
                (&[0, 1, 1, 0], c(-FRAC_1_SQRT_2, 0.0)),
            ],
        )
        .unwrap();
        let (filtered, probability) = no_crossing_filter(&singlet, &partition).unwrap();
        assert!((probability - 1.0).abs() < 1e-12);
        assert!(filtered.max_deviation(&singlet).unwrap() < 1e-12);
    }

    #[test]
    fn filter_rejects_fully_bunched_states() {
        // (i/√2)(|2A1⟩ + |2A2⟩) has no one-per-apparatus term.
        let rails = RailSet::new(["A1", "B1", "A2", "B2"]).unwrap();
        let partition = ApparatusPartition::new(
            &rails,
            vec![
                ApparatusGroup {
                    name: "MZ1".to_string(),
                    rails: vec!["A1".into(), "B1".into()],
                },
                ApparatusGroup {
                    name: "MZ2".to_string(),
                    rails: vec!["A2".into(), "B2".into()],
                },
            ],
        )
        .unwrap();
        let bunched = PureState::from_amplitudes(
            rails,
            &[
                (&[2, 0, 0, 0], c(0.0, FRAC_1_SQRT_2)),
                (&[0, 0, 2, 0], c(0.0, FRAC_1_SQRT_2)),
            ],
        )
        .unwrap();
        let result = no_crossing_filter(&bunched, &partition);
        assert!(matches!(result, Err(Error::ImpossibleEvent(_))));
    }

    #[test]
    fn occupancy_projection_keeps_matching_terms_unchanged() {
        // Projecting the filtered state onto one photon in A2 retains the
        // two words with photon 2 on its A rail, amplitudes untouched.
        let net = build_triple_mz();
        let state =
            from_register(&filtered_register(), net.rails().clone(), net.partition()).unwrap();
        let event = SelectionEvent::occupancy(vec!["A2".into()], vec![1]).unwrap();
        let projected = apply_projector(&event, &state).unwrap();
        assert_eq!(projected.term_count(), 2);
        let s6 = 1.0 / 6.0f64.sqrt();
        let s3 = 1.0 / 3.0f64.sqrt();
        let baa = FockBasisState::new(vec![0, 1, 1, 0, 1, 0]);
        let bab = FockBasisState::new(vec![0, 1, 1, 0, 0, 1]);
        assert!((projected.amplitude(&baa) - c(s6, 0.0)).norm() < 1e-12);
        assert!((projected.amplitude(&bab) - c(0.0, s3)).norm() < 1e-12);
    }

    #[test]
    fn projecting_vacuum_onto_occupied_patterns_gives_zero() {
        let rails = RailSet::new(["X", "Y"]).unwrap();
        let vacuum = PureState::vacuum(rails);
        let event = SelectionEvent::occupancy(vec!["X".into()], vec![1]).unwrap();
        let projected = apply_projector(&event, &vacuum).unwrap();
        assert!(projected.is_zero());
    }

    #[test]
    fn detector_projection_probability_is_one_sixth() {
        // Π = |D2⟩⟨D2| on the filtered state: squared norm 1/6.
        let net = build_triple_mz();
        let state =
            from_register(&filtered_register(), net.rails().clone(), net.partition()).unwrap();
        let detector = LetterState::detector_d2().to_pure_state("A2", "B2");
        let event = SelectionEvent::detector(detector).unwrap();
        let projected = apply_projector(&event, &state).unwrap();
        assert!((projected.norm_sqr() - 1.0 / 6.0).abs() < 1e-12);
        // Idempotent within 1e-12.
        let twice = apply_projector(&event, &projected).unwrap();
        assert!(twice.max_deviation(&projected).unwrap() < 1e-12);
    }

    #[test]
    fn detector_projection_is_hermitian() {
        let net = build_triple_mz();
        let rails = net.rails().clone();
        let a = from_register(&filtered_register(), rails.clone(), net.partition()).unwrap();
        let staged = staged_evolution(&net).unwrap();
        let b = staged.after("primary").unwrap();
        let event =
            SelectionEvent::detector(LetterState::detector_d1().to_pure_state("A2", "B2")).unwrap();
        let pa = apply_projector(&event, &a).unwrap();
        let pb = apply_projector(&event, b).unwrap();
        let left = a.inner(&pb).unwrap();
        let right = pa.inner(b).unwrap();
        assert!((left - right).norm() < 1e-9);
    }

    #[test]
    fn register_mapping_is_bijective() {
        let net = build_triple_mz();
        let state =
            from_register(&filtered_register(), net.rails().clone(), net.partition()).unwrap();
        let register = to_register(&state, net.partition()).unwrap();
        for (word, amp) in filtered_register().terms() {
            assert!((register.amplitude(word) - amp).norm() < 1e-12);
        }
        let back = from_register(&register, net.rails().clone(), net.partition()).unwrap();
        assert!(back.max_deviation(&state).unwrap() < 1e-12);
    }

    #[test]
    fn register_mapping_rejects_bunched_terms() {
        let net = build_triple_mz();
        let bunched = PureState::from_amplitudes(
            net.rails().clone(),
            &[(&[2, 0, 0, 0, 1, 0], c(1.0, 0.0))],
        )
        .unwrap();
        let err = to_register(&bunched, net.partition()).unwrap_err();
        assert!(matches!(err, Error::Representation(_)));
    }

    #[test]
    fn single_term_state_maps_to_a_single_word() {
        let net = build_triple_mz();
        let state = PureState::basis(net.rails().clone(), &[1, 0, 0, 1, 1, 0]).unwrap();
        let register = to_register(&state, net.partition()).unwrap();
        assert_eq!(register.terms().count(), 1);
        let (word, amp) = register.terms().next().unwrap();
        assert_eq!(word.to_string(), "ABA");
        assert!((amp - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn detector_measurement_heralds_the_singlet_and_the_phi_state() {
        let register = filtered_register();
        let table = measure_photon2(&register).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!((table.probability("D1").unwrap() - 5.0 / 6.0).abs() < 1e-9);
        assert!((table.probability("D2").unwrap() - 1.0 / 6.0).abs() < 1e-9);

        let d2 = table.row("D2").unwrap().conditional.as_ref().unwrap();
        let singlet = RegisterState::from_words(
            2,
            &[("AB", c(FRAC_1_SQRT_2, 0.0)), ("BA", c(-FRAC_1_SQRT_2, 0.0))],
        )
        .unwrap();
        assert!((d2.overlap_magnitude(&singlet).unwrap() - 1.0).abs() < 1e-9);

        let d1 = table.row("D1").unwrap().conditional.as_ref().unwrap();
        let s10 = 1.0 / 10.0f64.sqrt();
        let phi = RegisterState::from_words(
            2,
            &[
                ("AB", c(0.0, -s10)),
                ("BA", c(0.0, -s10)),
                ("BB", c(2.0 * SQRT_2 * s10, 0.0)),
            ],
        )
        .unwrap();
        assert!((d1.overlap_magnitude(&phi).unwrap() - 1.0).abs() < 1e-9);
        // Outcome completeness.
        let total: f64 = table.rows.iter().map(|r| r.probability).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn photon2_fixed_to_one_arm_splits_the_detectors_evenly() {
        let register = RegisterState::from_words(
            3,
            &[("AAB", c(FRAC_1_SQRT_2, 0.0)), ("BAA", c(0.0, FRAC_1_SQRT_2))],
        )
        .unwrap();
        let table = measure_photon2(&register).unwrap();
        assert!((table.probability("D1").unwrap() - 0.5).abs() < 1e-12);
        assert!((table.probability("D2").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn path_probabilities_agree_between_both_routes() {
        let register = filtered_register();
        let table = measure_photon2(&register).unwrap();
        for photon in [0usize, 2] {
            let direct = path_probabilities(&register, photon).unwrap();
            let weighted = path_probabilities_from_table(&table, photon).unwrap();
            assert!((direct.0 - weighted.0).abs() < 1e-9);
            assert!((direct.1 - weighted.1).abs() < 1e-9);
        }
        let (p_a1, p_b1) = path_probabilities(&register, 0).unwrap();
        assert!((p_a1 - 1.0 / 6.0).abs() < 1e-9);
        assert!((p_b1 - 5.0 / 6.0).abs() < 1e-9);
        let (p_a3, p_b3) = path_probabilities(&register, 2).unwrap();
        assert!((p_a3 - 1.0 / 6.0).abs() < 1e-9);
        assert!((p_b3 - 5.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_two_word_register_has_even_marginals() {
        let register = RegisterState::from_words(
            2,
            &[("AA", c(FRAC_1_SQRT_2, 0.0)), ("BA", c(FRAC_1_SQRT_2, 0.0))],
        )
        .unwrap();
        let (p_a, p_b) = path_probabilities(&register, 0).unwrap();
        assert!((p_a - 0.5).abs() < 1e-12);
        assert!((p_b - 0.5).abs() < 1e-12);
    }

    #[test]
    fn baseline_conditionals_and_marginals() {
        let report = two_photon_baseline().unwrap();
        // Each remaining photon stays home with probability 3/4.
        assert_eq!(report.singles.len(), 2);
        for (_, _, probability) in &report.singles {
            assert!((probability - 0.75).abs() < 1e-9);
        }
        assert!((report.joint_probability - 9.0 / 16.0).abs() < 1e-9);
        // Conditional of the first photon: (i|A1⟩ − √2|B1⟩)/√3.
        let s3 = 1.0 / 3.0f64.sqrt();
        let (name, conditional, _) = &report.singles[0];
        assert_eq!(name, "MZ1");
        let a1 = FockBasisState::new(vec![1, 0, 0, 0, 0, 0]);
        let b1 = FockBasisState::new(vec![0, 1, 0, 0, 0, 0]);
        assert!((conditional.amplitude(&a1) - c(0.0, s3)).norm() < 1e-9);
        assert!((conditional.amplitude(&b1) - c(-SQRT_2 * s3, 0.0)).norm() < 1e-9);
        // Marginals p(A)=1/3, p(B)=2/3 for both photons.
        for (rail, want) in [("A1", 1.0 / 3.0), ("B1", 2.0 / 3.0), ("A3", 1.0 / 3.0), ("B3", 2.0 / 3.0)] {
            assert!((report.marginal(rail).unwrap() - want).abs() < 1e-9, "{rail}");
        }
    }

    #[test]
    fn baseline_joint_equals_the_product_of_singles() {
        // With the middle apparatus empty the two photons evolve on
        // disjoint rails, so the joint condition factorizes.
        let report = two_photon_baseline().unwrap();
        let (_, s1, _) = &report.singles[0];
        let (_, s3, _) = &report.singles[1];
        let mut product_terms = Vec::new();
        for (b1, a1) in s1.terms() {
            for (b3, a3) in s3.terms() {
                let occ: Vec<u8> = b1
                    .occupations()
                    .iter()
                    .zip(b3.occupations())
                    .map(|(x, y)| x + y)
                    .collect();
                product_terms.push((FockBasisState::new(occ), a1 * a3));
            }
        }
        let product = PureState::from_terms(report.joint.rails().clone(), product_terms).unwrap();
        assert!(product.max_deviation(&report.joint).unwrap() < 1e-9);
    }

    #[test]
    fn disturbed_probabilities_differ_from_the_baseline_by_one_sixth() {
        let baseline = two_photon_baseline().unwrap();
        let register = filtered_register();
        let (p_a1, p_b1) = path_probabilities(&register, 0).unwrap();
        let (p_a3, p_b3) = path_probabilities(&register, 2).unwrap();
        for (rail, disturbed) in [("A1", p_a1), ("B1", p_b1), ("A3", p_a3), ("B3", p_b3)] {
            let base = baseline.marginal(rail).unwrap();
            assert!(
                ((base - disturbed).abs() - 1.0 / 6.0).abs() < 1e-9,
                "{rail}: baseline {base} vs disturbed {disturbed}"
            );
        }
    }

    #[test]
    fn projecting_a_register_photon_keeps_it_in_the_detector_state() {
        let register = filtered_register();
        let (post, probability) = register
            .project_photon(1, &LetterState::detector_d2())
            .unwrap();
        assert!((probability - 1.0 / 6.0).abs() < 1e-9);
        assert!((post.norm_sqr() - 1.0).abs() < 1e-9);
        // The projected register is i|D2⟩₂ ⊗ singlet: expanding the words,
        // AAB = i·(i/√2)/√2·... spot-check two amplitudes.
        assert!((post.amplitude(&"ABB".parse().unwrap()) - c(0.0, 0.5)).norm() < 1e-9);
        assert!((post.amplitude(&"BAA".parse().unwrap()) - c(0.5, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn word_parsing_rejects_foreign_letters() {
        let err = "AXB".parse::<PathWord>().unwrap_err();
        assert!(err.to_string().contains('X'));
    }
}
