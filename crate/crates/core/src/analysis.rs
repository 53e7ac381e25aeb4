//! Weak values for pre/post-selected ensembles, the weak-value
//! decomposition of expectation values, and two-qubit entanglement
//! measures on path registers.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::fock::Amplitude;
use crate::postselect::{Letter, PathWord, RegisterState};

/// Overlaps smaller than this make a weak value undefined.
const ORTHOGONALITY_THRESHOLD: f64 = 1e-12;

/// A preselection/postselection pair over the same register.
#[derive(Clone, Debug)]
pub struct PrePostEnsemble {
    pub label: String,
    pub pre: RegisterState,
    pub post: RegisterState,
}

impl PrePostEnsemble {
    pub fn new(label: impl Into<String>, pre: RegisterState, post: RegisterState) -> Result<Self> {
        if pre.photons() != post.photons() {
            return Err(Error::Contract(format!(
                "pre has {} photons, post has {}",
                pre.photons(),
                post.photons()
            )));
        }
        Ok(PrePostEnsemble {
            label: label.into(),
            pre,
            post,
        })
    }

    /// `|⟨post|pre⟩|²`: the probability of the postselection.
    pub fn postselection_probability(&self) -> Result<f64> {
        Ok(self.post.inner(&self.pre)?.norm_sqr())
    }
}

/// A product of per-photon path projectors: one letter assignment per
/// chosen photon (one entry for the single-path case, up to all photons
/// for joint occupation).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PathProjector {
    assignments: BTreeMap<usize, Letter>,
}

impl PathProjector {
    /// Projector onto one photon's path (0-based photon index).
    pub fn single(photon: usize, letter: Letter) -> Self {
        let mut assignments = BTreeMap::new();
        assignments.insert(photon, letter);
        PathProjector { assignments }
    }

    /// Joint occupation projector assigning every photon of a word.
    pub fn joint(word: &PathWord) -> Self {
        PathProjector {
            assignments: word.letters().iter().copied().enumerate().collect(),
        }
    }

    pub fn assignments(&self) -> impl Iterator<Item = (usize, Letter)> + '_ {
        self.assignments.iter().map(|(&p, &l)| (p, l))
    }

    pub fn matches(&self, word: &PathWord) -> bool {
        self.assignments
            .iter()
            .all(|(&photon, &letter)| word.letter(photon) == letter)
    }

    /// `A1`, `B3`, ...; joint projectors over photons 0..n print as the
    /// bare word, e.g. `ABB`.
    pub fn label(&self) -> String {
        let contiguous = self
            .assignments
            .keys()
            .copied()
            .eq(0..self.assignments.len());
        if self.assignments.len() > 1 && contiguous {
            self.assignments.values().map(Letter::to_string).collect()
        } else {
            self.assignments
                .iter()
                .map(|(&p, &l)| format!("{l}{}", p + 1))
                .collect::<Vec<_>>()
                .join("·")
        }
    }

    /// The six single-path projectors of an n-photon register, ordered
    /// `A1, B1, A2, B2, ...`.
    pub fn all_singles(photons: usize) -> Vec<PathProjector> {
        (0..photons)
            .flat_map(|p| Letter::BOTH.iter().map(move |&l| PathProjector::single(p, l)))
            .collect()
    }

    /// All `2^n` joint occupation projectors, in word order.
    pub fn all_joint(photons: usize) -> Vec<PathProjector> {
        PathWord::all(photons)
            .iter()
            .map(PathProjector::joint)
            .collect()
    }
}

impl fmt::Display for PathProjector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Expectation `⟨r|Π|r⟩` of a path projector in a register state.
pub fn expectation(r: &RegisterState, projector: &PathProjector) -> f64 {
    r.terms()
        .filter(|(word, _)| projector.matches(word))
        .map(|(_, amp)| amp.norm_sqr())
        .sum()
}

/// The two-sided weak value `⟨post|Π|pre⟩ / ⟨post|pre⟩`.
///
/// Invariant under global phases of either state. Orthogonal selections
/// are a typed error, not an infinity.
pub fn weak_value(ensemble: &PrePostEnsemble, projector: &PathProjector) -> Result<Amplitude> {
    let denominator = ensemble.post.inner(&ensemble.pre)?;
    if denominator.norm() < ORTHOGONALITY_THRESHOLD {
        return Err(Error::OrthogonalSelections(ensemble.label.clone()));
    }
    let mut numerator = Amplitude::new(0.0, 0.0);
    for (word, amp) in ensemble.pre.terms() {
        if projector.matches(word) {
            numerator += ensemble.post.amplitude(word).conj() * amp;
        }
    }
    Ok(numerator / denominator)
}

/// One projector's weak value.
#[derive(Clone, Debug)]
pub struct WeakValueEntry {
    pub projector: PathProjector,
    pub value: Amplitude,
}

/// A table of weak values for one pre/post-selected ensemble.
#[derive(Clone, Debug)]
pub struct WeakValueReport {
    pub ensemble: String,
    pub postselection_probability: f64,
    pub entries: Vec<WeakValueEntry>,
}

impl WeakValueReport {
    pub fn value(&self, label: &str) -> Option<Amplitude> {
        self.entries
            .iter()
            .find(|e| e.projector.label() == label)
            .map(|e| e.value)
    }
}

fn table_for(
    ensemble: &PrePostEnsemble,
    projectors: Vec<PathProjector>,
) -> Result<WeakValueReport> {
    let entries = projectors
        .into_iter()
        .map(|projector| {
            let value = weak_value(ensemble, &projector)?;
            Ok(WeakValueEntry { projector, value })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeakValueReport {
        ensemble: ensemble.label.clone(),
        postselection_probability: ensemble.postselection_probability()?,
        entries,
    })
}

/// Weak values of all single-path projectors.
pub fn weak_value_table(ensemble: &PrePostEnsemble) -> Result<WeakValueReport> {
    table_for(ensemble, PathProjector::all_singles(ensemble.pre.photons()))
}

/// Weak values of all joint occupation projectors.
pub fn joint_weak_values(ensemble: &PrePostEnsemble) -> Result<WeakValueReport> {
    table_for(ensemble, PathProjector::all_joint(ensemble.pre.photons()))
}

/// Check the weak-value decomposition of an expectation value over a
/// complete outcome set: returns `(⟨Π⟩, Σ P(n)·Re w(n))`. The two sides
/// agree for any Hermitian projector and exhaustive outcome set.
pub fn expectation_decomposition(
    pre: &RegisterState,
    posts: &[(f64, RegisterState)],
    projector: &PathProjector,
) -> Result<(f64, f64)> {
    let total: f64 = posts.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Contract(format!(
            "outcome probabilities sum to {total}, expected a complete set"
        )));
    }
    let lhs = expectation(pre, projector);
    let mut rhs = Amplitude::new(0.0, 0.0);
    for (probability, post) in posts {
        let ensemble = PrePostEnsemble::new("decomposition", pre.clone(), post.clone())?;
        rhs += probability * weak_value(&ensemble, projector)?;
    }
    if rhs.im.abs() > 1e-9 {
        return Err(Error::Contract(format!(
            "weighted weak values carry an imaginary residue of {}",
            rhs.im
        )));
    }
    Ok((lhs, rhs.re))
}

/// The singlet `(|AB⟩ − |BA⟩)/√2` as a two-photon register.
pub fn bell_singlet() -> RegisterState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    RegisterState::from_words(
        2,
        &[
            ("AB", Amplitude::new(s, 0.0)),
            ("BA", Amplitude::new(-s, 0.0)),
        ],
    )
    .expect("singlet is normalized")
}

/// Concurrence of a normalized two-photon register:
/// `2 |a_AA·a_BB − a_AB·a_BA|`. Zero on product states, one on Bell states,
/// invariant under global phases.
pub fn concurrence(r: &RegisterState) -> Result<f64> {
    if r.photons() != 2 {
        return Err(Error::Contract(format!(
            "concurrence is defined for two-photon registers, got {}",
            r.photons()
        )));
    }
    let amp = |w: &str| r.amplitude(&w.parse().expect("valid word"));
    let det = amp("AA") * amp("BB") - amp("AB") * amp("BA");
    Ok(2.0 * det.norm())
}

/// Entanglement of formation of a pure two-qubit state with the given
/// concurrence: the binary entropy of `(1 + √(1 − C²))/2`.
pub fn entanglement_of_formation(concurrence: f64) -> Result<f64> {
    if !(0.0..=1.0 + 1e-12).contains(&concurrence) {
        return Err(Error::Contract(format!(
            "concurrence {concurrence} outside [0, 1]"
        )));
    }
    let c = concurrence.min(1.0);
    let x = 0.5 * (1.0 + (1.0 - c * c).sqrt());
    Ok(binary_entropy(x))
}

fn binary_entropy(x: f64) -> f64 {
    let mut h = 0.0;
    for p in [x, 1.0 - x] {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::postselect::LetterState;
    use std::f64::consts::SQRT_2;

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

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

    fn ensembles() -> (PrePostEnsemble, PrePostEnsemble) {
        let pre = filtered_register();
        let (post_d1, _) = pre.project_photon(1, &LetterState::detector_d1()).unwrap();
        let (post_d2, _) = pre.project_photon(1, &LetterState::detector_d2()).unwrap();
        (
            PrePostEnsemble::new("D1", pre.clone(), post_d1).unwrap(),
            PrePostEnsemble::new("D2", pre, post_d2).unwrap(),
        )
    }

    #[test]
    fn postselection_probabilities_match_the_detector_rates() {
        let (d1, d2) = ensembles();
        assert!((d1.postselection_probability().unwrap() - 5.0 / 6.0).abs() < 1e-9);
        assert!((d2.postselection_probability().unwrap() - 1.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn single_path_weak_values_for_the_d2_postselection_are_all_half() {
        let (_, d2) = ensembles();
        let table = weak_value_table(&d2).unwrap();
        assert_eq!(table.entries.len(), 6);
        for entry in &table.entries {
            assert!(
                (entry.value - c(0.5, 0.0)).norm() < 1e-9,
                "{}: {}",
                entry.projector,
                entry.value
            );
        }
    }

    #[test]
    fn single_path_weak_values_for_the_d1_postselection() {
        let (d1, _) = ensembles();
        let value = |p: &PathProjector| weak_value(&d1, p).unwrap();
        assert!((value(&PathProjector::single(0, Letter::A)) - c(0.1, 0.0)).norm() < 1e-9);
        assert!((value(&PathProjector::single(0, Letter::B)) - c(0.9, 0.0)).norm() < 1e-9);
        assert!((value(&PathProjector::single(1, Letter::A)) - c(0.5, 0.0)).norm() < 1e-9);
        assert!((value(&PathProjector::single(1, Letter::B)) - c(0.5, 0.0)).norm() < 1e-9);
        assert!((value(&PathProjector::single(2, Letter::A)) - c(0.1, 0.0)).norm() < 1e-9);
        assert!((value(&PathProjector::single(2, Letter::B)) - c(0.9, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn per_photon_weak_values_sum_to_one() {
        let (d1, d2) = ensembles();
        for ensemble in [&d1, &d2] {
            let table = weak_value_table(ensemble).unwrap();
            for photon in 0..3 {
                let sum: Amplitude = table
                    .entries
                    .iter()
                    .filter(|e| e.projector.assignments().next().unwrap().0 == photon)
                    .map(|e| e.value)
                    .sum();
                assert!((sum - c(1.0, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn joint_weak_values_for_both_postselections() {
        let (d1, d2) = ensembles();

        let table = joint_weak_values(&d2).unwrap();
        assert_eq!(table.entries.len(), 8);
        for entry in &table.entries {
            let want = match entry.projector.label().as_str() {
                "ABB" | "BAA" => 0.5,
                _ => 0.0,
            };
            assert!(
                (entry.value - c(want, 0.0)).norm() < 1e-9,
                "{}: {}",
                entry.projector,
                entry.value
            );
        }

        let table = joint_weak_values(&d1).unwrap();
        for entry in &table.entries {
            let want = match entry.projector.label().as_str() {
                "ABB" | "BAA" => 0.1,
                "BAB" | "BBB" => 0.4,
                _ => 0.0,
            };
            assert!(
                (entry.value - c(want, 0.0)).norm() < 1e-9,
                "{}: {}",
                entry.projector,
                entry.value
            );
        }
    }

    #[test]
    fn words_blocked_by_bunching_have_zero_joint_weak_values() {
        // Words that put two photons on opposite sides of a shared
        // splitter never appear: AAA, AAB, ABA, BBA.
        let (d1, d2) = ensembles();
        for ensemble in [&d1, &d2] {
            let table = joint_weak_values(ensemble).unwrap();
            for word in ["AAA", "AAB", "ABA", "BBA"] {
                let value = table.value(word).unwrap();
                assert!(value.norm() < 1e-9, "{word}: {value}");
            }
        }
    }

    #[test]
    fn joint_weak_values_sum_to_one() {
        let (d1, d2) = ensembles();
        for ensemble in [&d1, &d2] {
            let table = joint_weak_values(ensemble).unwrap();
            let sum: Amplitude = table.entries.iter().map(|e| e.value).sum();
            assert!((sum - c(1.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn weak_values_are_phase_gauge_invariant() {
        let (d1, _) = ensembles();
        let shifted = PrePostEnsemble::new(
            "D1",
            d1.pre.with_global_phase(Amplitude::from_polar(1.0, 0.7)).unwrap(),
            d1.post.with_global_phase(Amplitude::from_polar(1.0, -2.1)).unwrap(),
        )
        .unwrap();
        for projector in PathProjector::all_singles(3) {
            let a = weak_value(&d1, &projector).unwrap();
            let b = weak_value(&shifted, &projector).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_selections_are_a_typed_error() {
        let pre = RegisterState::from_words(2, &[("AB", c(1.0, 0.0))]).unwrap();
        let post = RegisterState::from_words(2, &[("BA", c(1.0, 0.0))]).unwrap();
        let ensemble = PrePostEnsemble::new("orthogonal", pre, post).unwrap();
        let result = weak_value(&ensemble, &PathProjector::single(0, Letter::A));
        assert!(matches!(result, Err(Error::OrthogonalSelections(_))));
    }

    #[test]
    fn joint_weak_value_is_not_the_product_of_singles() {
        // w(ABB) = 1/10 under D1, while w(A1)·w(B2)·w(B3) = 9/200.
        let (d1, _) = ensembles();
        let joint = weak_value(&d1, &PathProjector::joint(&"ABB".parse().unwrap())).unwrap();
        let product = weak_value(&d1, &PathProjector::single(0, Letter::A)).unwrap()
            * weak_value(&d1, &PathProjector::single(1, Letter::B)).unwrap()
            * weak_value(&d1, &PathProjector::single(2, Letter::B)).unwrap();
        assert!((joint - c(0.1, 0.0)).norm() < 1e-9);
        assert!((product - c(9.0 / 200.0, 0.0)).norm() < 1e-9);
        assert!((joint - product).norm() > 1e-3);
    }

    #[test]
    fn expectation_decomposition_recovers_the_path_probabilities() {
        let pre = filtered_register();
        let (d1, d2) = ensembles();
        let posts = vec![
            (d1.postselection_probability().unwrap(), d1.post.clone()),
            (d2.postselection_probability().unwrap(), d2.post.clone()),
        ];
        let (lhs, rhs) =
            expectation_decomposition(&pre, &posts, &PathProjector::single(0, Letter::A)).unwrap();
        assert!((lhs - 1.0 / 6.0).abs() < 1e-9);
        assert!((lhs - rhs).abs() < 1e-9);
        let (lhs, rhs) =
            expectation_decomposition(&pre, &posts, &PathProjector::single(0, Letter::B)).unwrap();
        assert!((lhs - 5.0 / 6.0).abs() < 1e-9);
        assert!((lhs - rhs).abs() < 1e-9);
        let (lhs, rhs) =
            expectation_decomposition(&pre, &posts, &PathProjector::single(2, Letter::A)).unwrap();
        assert!((lhs - 1.0 / 6.0).abs() < 1e-9);
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn incomplete_outcome_sets_are_rejected() {
        let pre = filtered_register();
        let (d1, _) = ensembles();
        let posts = vec![(0.5, d1.post.clone())];
        let result =
            expectation_decomposition(&pre, &posts, &PathProjector::single(0, Letter::A));
        assert!(matches!(result, Err(Error::Contract(_))));
    }

    #[test]
    fn concurrence_of_the_singlet_is_one() {
        assert!((concurrence(&bell_singlet()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concurrence_of_the_d1_conditional_is_one_fifth() {
        // Direct formula by hand: 2|0·(2√2/√10) − (−i/√10)(−i/√10)| = 0.2.
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
        assert!((concurrence(&phi).unwrap() - 0.2).abs() < 1e-9);
        // Phase invariance.
        let rotated = phi.with_global_phase(Amplitude::from_polar(1.0, 1.1)).unwrap();
        assert!((concurrence(&rotated).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn concurrence_of_a_product_state_is_zero() {
        let product = RegisterState::from_words(2, &[("AB", c(1.0, 0.0))]).unwrap();
        assert!(concurrence(&product).unwrap() < 1e-12);
    }

    #[test]
    fn entanglement_of_formation_endpoints_and_reference_value() {
        assert!(entanglement_of_formation(0.0).unwrap().abs() < 1e-12);
        assert!((entanglement_of_formation(1.0).unwrap() - 1.0).abs() < 1e-12);
        let e = entanglement_of_formation(0.2).unwrap();
        assert!((e - 0.081).abs() < 0.005, "E(0.2) = {e}");
    }

    #[test]
    fn entanglement_of_formation_is_monotone() {
        let mut last = -1.0;
        for k in 0..=100 {
            let e = entanglement_of_formation(f64::from(k) / 100.0).unwrap();
            assert!(e >= last);
            last = e;
        }
        assert!(entanglement_of_formation(1.5).is_err());
    }

    #[test]
    fn projector_labels_read_like_paths() {
        assert_eq!(PathProjector::single(0, Letter::A).label(), "A1");
        assert_eq!(PathProjector::single(2, Letter::B).label(), "B3");
        assert_eq!(
            PathProjector::joint(&"ABB".parse().unwrap()).label(),
            "ABB"
        );
    }
}
