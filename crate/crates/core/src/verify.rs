//! The acceptance suite: every pinned quantity checked at its stated
//! tolerance, runnable against the built-in network or a loaded one.
//!
//! Each criterion returns a pass/fail result with the first mismatch
//! spelled out, so a mis-routed splitter is reported by the amplitude it
//! breaks.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::analysis::{
    bell_singlet, concurrence, entanglement_of_formation, joint_weak_values, weak_value_table,
    PrePostEnsemble,
};
use crate::elements::{
    apply_beam_splitter, apply_element, BeamSplitter, Element, Mirror,
};
use crate::error::Result;
use crate::fock::{Amplitude, FockBasisState, PureState, RailSet};
use crate::network::NetworkDescription;
use crate::postselect::{
    apply_projector, from_register, Letter, PathWord, RegisterState, SelectionEvent,
};
use crate::report::{
    compute_baseline_comparison, compute_decomposition, compute_mirrors_variant,
    compute_protocol, compute_weak_values, TOL_CANCELLATION, TOL_ROUNDED_REFERENCE, TOL_VALUE,
};

/// Margin by which the product-of-weak-values counterexample must differ.
pub const TOL_COUNTEREXAMPLE_GAP: f64 = 1e-3;

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: &'static str,
    pub summary: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    /// One `PASS`/`FAIL` line, with the first mismatch on failures.
    pub fn line(&self) -> String {
        if self.passed {
            format!("PASS {} — {}", self.id, self.summary)
        } else {
            format!("FAIL {} — {}: {}", self.id, self.summary, self.detail)
        }
    }
}

/// Accumulates named comparisons; the first failure becomes the detail.
struct Check {
    failures: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check {
            failures: Vec::new(),
        }
    }

    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let deviation = (got - want).abs();
        if deviation > tol || deviation.is_nan() {
            self.failures
                .push(format!("{what}: got {got}, want {want} (tol {tol})"));
        }
    }

    fn close_complex(&mut self, what: &str, got: Amplitude, want: Amplitude, tol: f64) {
        let deviation = (got - want).norm();
        if deviation > tol || deviation.is_nan() {
            self.failures
                .push(format!("{what}: got {got}, want {want} (tol {tol})"));
        }
    }

    fn is_true(&mut self, what: &str, condition: bool) {
        if !condition {
            self.failures.push(what.to_string());
        }
    }

    fn error(&mut self, e: impl fmt::Display) {
        self.failures.push(format!("error: {e}"));
    }

    fn finish(self, id: &'static str, summary: &'static str) -> CriterionResult {
        CriterionResult {
            id,
            summary,
            passed: self.failures.is_empty(),
            detail: self.failures.into_iter().next().unwrap_or_default(),
        }
    }
}

fn guarded<F>(id: &'static str, summary: &'static str, body: F) -> CriterionResult
where
    F: FnOnce(&mut Check) -> Result<()>,
{
    let mut check = Check::new();
    if let Err(e) = body(&mut check) {
        check.error(e);
    }
    check.finish(id, summary)
}

// ---------------------------------------------------------------------------
// Reference values
// ---------------------------------------------------------------------------

fn c(re: f64, im: f64) -> Amplitude {
    Amplitude::new(re, im)
}

/// Path-word amplitudes of the post-primary product superposition:
/// `i^(#B) / (2√2)` on each of the eight words.
fn post_primary_words() -> Vec<(PathWord, Amplitude)> {
    let unit = 1.0 / (2.0 * SQRT_2);
    PathWord::all(3)
        .into_iter()
        .map(|word| {
            let b_count = word
                .letters()
                .iter()
                .filter(|&&l| l == Letter::B)
                .count();
            let phase = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][b_count % 4];
            (word, phase * unit)
        })
        .collect()
}

fn post_primary_reference(net: &NetworkDescription) -> Result<PureState> {
    let register = RegisterState::new(3, post_primary_words())?;
    from_register(&register, net.rails().clone(), net.partition())
}

/// Word amplitudes of the no-crossing-filtered state:
/// `{ABB: i/√6, BAA: 1/√6, BAB: i/√3, BBB: −1/√3}`.
fn filtered_words() -> Vec<(&'static str, Amplitude)> {
    let s6 = 1.0 / 6.0f64.sqrt();
    let s3 = 1.0 / 3.0f64.sqrt();
    vec![
        ("ABB", c(0.0, s6)),
        ("BAA", c(s6, 0.0)),
        ("BAB", c(0.0, s3)),
        ("BBB", c(-s3, 0.0)),
    ]
}

fn filtered_reference(net: &NetworkDescription) -> Result<PureState> {
    let register = RegisterState::from_words(3, &filtered_words())?;
    from_register(&register, net.rails().clone(), net.partition())
}

/// Per-word survival factors of the secondary stage inside the no-crossing
/// subspace: `−i/2` where both outer arms face a shared splitter, `−i/√2`
/// where one side only sees a mirror.
fn survival_factors() -> Vec<(&'static str, Amplitude)> {
    vec![
        ("ABB", c(0.0, -0.5)),
        ("BAA", c(0.0, -0.5)),
        ("BAB", c(0.0, -FRAC_1_SQRT_2)),
        ("BBB", c(0.0, -FRAC_1_SQRT_2)),
    ]
}

/// Conditional of photons 1 and 3 after a D1 click:
/// `(−i|AB⟩ − i|BA⟩ + 2√2|BB⟩)/√10`.
fn d1_conditional_reference() -> RegisterState {
    let s10 = 1.0 / 10.0f64.sqrt();
    RegisterState::from_words(
        2,
        &[
            ("AB", c(0.0, -s10)),
            ("BA", c(0.0, -s10)),
            ("BB", c(2.0 * SQRT_2 * s10, 0.0)),
        ],
    )
    .expect("reference register is normalized")
}

/// Expected single-path weak values per ensemble, in `A1,B1,A2,B2,A3,B3`
/// order.
fn expected_singles(outcome: &str) -> Vec<f64> {
    match outcome {
        "D2" => vec![0.5; 6],
        "D1" => vec![0.1, 0.9, 0.5, 0.5, 0.1, 0.9],
        other => panic!("no expected singles for `{other}`"),
    }
}

/// Expected joint weak values per ensemble, keyed by word.
fn expected_joints(outcome: &str) -> Vec<(&'static str, f64)> {
    let mut all: Vec<(&'static str, f64)> = vec![
        ("AAA", 0.0),
        ("AAB", 0.0),
        ("ABA", 0.0),
        ("ABB", 0.0),
        ("BAA", 0.0),
        ("BAB", 0.0),
        ("BBA", 0.0),
        ("BBB", 0.0),
    ];
    let nonzero: &[(&str, f64)] = match outcome {
        "D2" => &[("ABB", 0.5), ("BAA", 0.5)],
        "D1" => &[("ABB", 0.1), ("BAA", 0.1), ("BAB", 0.4), ("BBB", 0.4)],
        other => panic!("no expected joints for `{other}`"),
    };
    for (word, value) in nonzero {
        all.iter_mut().find(|(w, _)| w == word).unwrap().1 = *value;
    }
    all
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

/// `(id, summary)` of every criterion, in run order.
pub const CRITERIA: [(&str, &str); 10] = [
    (
        "c01-primary-superposition",
        "primary stage emits the 8-term equal-weight superposition with the reflection phases",
    ),
    (
        "c02-filtered-state",
        "no-crossing filter reproduces the closed-form state and per-word survival factors",
    ),
    (
        "c03-success-probability",
        "filtered/post-primary overlap ≈ 0.4861 and no-crossing event probability = 3/16",
    ),
    (
        "c04-detection-outcomes",
        "D2 heralds the singlet at p = 1/6; D1 heralds the non-maximal state at p = 5/6",
    ),
    (
        "c05-entanglement-measures",
        "concurrences 0.2 and 1, entanglement of formation ≈ 0.081",
    ),
    (
        "c06-baseline-vs-disturbed",
        "outer-photon path probabilities shift from {1/3, 2/3} to {1/6, 5/6}",
    ),
    (
        "c07-weak-value-tables",
        "single and joint weak-value tables match their closed forms",
    ),
    (
        "c08-expectation-decomposition",
        "expectations equal the outcome-weighted weak values for all projectors",
    ),
    (
        "c09-property-suite",
        "unitarity, bunching null, photon conservation, idempotence, gauge invariance, marginalization, product counterexample",
    ),
    (
        "c10-mirrors-variant",
        "mirrors in place of the shared splitters give −i × the post-primary state",
    ),
];

/// Run every criterion against a network.
pub fn run_all(net: &NetworkDescription) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|(id, _)| run_criterion(id, net).expect("listed criteria all exist"))
        .collect()
}

/// Run one criterion by id.
pub fn run_criterion(id: &str, net: &NetworkDescription) -> Option<CriterionResult> {
    let result = match id {
        "c01-primary-superposition" => c01(net),
        "c02-filtered-state" => c02(net),
        "c03-success-probability" => c03(net),
        "c04-detection-outcomes" => c04(net),
        "c05-entanglement-measures" => c05(net),
        "c06-baseline-vs-disturbed" => c06(net),
        "c07-weak-value-tables" => c07(net),
        "c08-expectation-decomposition" => c08(net),
        "c09-property-suite" => c09(net),
        "c10-mirrors-variant" => c10(net),
        _ => return None,
    };
    Some(result)
}

fn c01(net: &NetworkDescription) -> CriterionResult {
    guarded(CRITERIA[0].0, CRITERIA[0].1, |check| {
        let protocol = compute_protocol(net)?;
        let primary = protocol
            .staged
            .after("primary")
            .expect("protocol requires a primary stage");
        check.is_true(
            &format!("primary term count is {}, want 8", primary.term_count()),
            primary.term_count() == 8,
        );
        let reference = post_primary_reference(net)?;
        let magnitude = 1.0 / (2.0 * SQRT_2);
        for (basis, amp) in primary.terms() {
            check.close(
                &format!("|amplitude| of `{}`", basis.label(primary.rails())),
                amp.norm(),
                magnitude,
                TOL_VALUE,
            );
        }
        // Phase-sensitive: the source fixes the global phase.
        for (basis, want) in reference.terms() {
            check.close_complex(
                &format!("amplitude of `{}`", basis.label(primary.rails())),
                primary.amplitude(basis),
                *want,
                TOL_VALUE,
            );
        }
        Ok(())
    })
}

fn c02(net: &NetworkDescription) -> CriterionResult {
    guarded(CRITERIA[1].0, CRITERIA[1].1, |check| {
        let protocol = compute_protocol(net)?;
        let reference = filtered_reference(net)?;
        let (deviation, phase) = protocol.filtered.max_deviation_up_to_phase(&reference)?;
        if deviation > TOL_VALUE {
            // Name the first amplitude that disagrees after phase alignment.
            let aligned = reference.scaled(phase);
            for (basis, want) in aligned.terms() {
                let got = protocol.filtered.amplitude(basis);
                if (got - want).norm() > TOL_VALUE {
                    check.is_true(
                        &format!(
                            "filtered amplitude of `{}`: got {got}, want {want}",
                            basis.label(aligned.rails())
                        ),
                        false,
                    );
                    break;
                }
            }
            check.close("filtered-state deviation up to a global phase", deviation, 0.0, TOL_VALUE);
        }
        // Per-word survival factors, phase-sensitive: unnormalized filtered
        // amplitude over post-primary amplitude.
        let primary = protocol.staged.after("primary").expect("primary exists");
        let secondary = protocol.staged.after("secondary").expect("secondary exists");
        let event = SelectionEvent::apparatus_counts(
            net.partition().clone(),
            vec![1; net.partition().groups().len()],
        )?;
        let unnormalized = apply_projector(&event, secondary)?;
        for (word, factor) in survival_factors() {
            let word: PathWord = word.parse()?;
            let single = RegisterState::new(3, [(word.clone(), c(1.0, 0.0))])?;
            let basis_state = from_register(&single, net.rails().clone(), net.partition())?;
            let basis = basis_state.terms().next().expect("one term").0;
            let before = primary.amplitude(basis);
            let after = unnormalized.amplitude(basis);
            check.close_complex(
                &format!("survival factor of `{word}`"),
                after / before,
                factor,
                TOL_VALUE,
            );
        }
        Ok(())
    })
}

fn c03(net: &NetworkDescription) -> CriterionResult {
    guarded(CRITERIA[2].0, CRITERIA[2].1, |check| {
        let protocol = compute_protocol(net)?;
        check.close(
            "squared overlap of filtered state with post-primary state",
            protocol.overlap_probability,
            0.4861,
            TOL_ROUNDED_REFERENCE,
        );
        check.close(
            "no-crossing event probability",
            protocol.event_probability,
            3.0 / 16.0,
            TOL_VALUE,
        );
        Ok(())
    })
}

fn c04(net: &NetworkDescription) -> CriterionResult {
    guarded(CRITERIA[3].0, CRITERIA[3].1, |check| {
        let protocol = compute_protocol(net)?;
        let d2 = protocol.outcomes.row("D2").expect("D2 row exists");
        check.close("p(D2)", d2.probability, 1.0 / 6.0, TOL_VALUE);
        let d2_conditional = d2.conditional.as_ref().expect("D2 has a conditional");
        check.close(
            "overlap of the D2 conditional with the singlet",
            d2_conditional.overlap_magnitude(&bell_singlet())?,
            1.0,
            TOL_VALUE,
        );
        let d1 = protocol.outcomes.row("D1").expect("D1 row exists");
        check.close("p(D1)", d1.probability, 5.0 / 6.0, TOL_VALUE);
        let d1_conditional = d1.conditional.as_ref().expect("D1 has a conditional");
        check.close(
            "overlap of the D1 conditional with its closed form",
            d1_conditional.overlap_magnitude(&d1_conditional_reference())?,
            1.0,
            TOL_VALUE,
        );
        Ok(())
    })
}

fn c05(net: &NetworkDescription) -> CriterionResult {
    guarded(CRITERIA[4].0, CRITERIA[4].1, |check| {
        let protocol = compute_protocol(net)?;
        let d1 = protocol.outcomes.row("D1").expect("D1 row exists");
        let d1_conditional = d1.conditional.as_ref().expect("D1 has a conditional");
        let c_d1 = concurrence(d1_conditional)?;
        check.close("concurrence of the D1 conditional", c_d1, 0.2, TOL_VALUE);
        check.close(
            "entanglement of formation of the D1 conditional",
            entanglement_of_formation(c_d1)?,
            0.081,
            TOL_ROUNDED_REFERENCE,
        );
        let d2 = protocol.outcomes.row("D2").expect("D2 row exists");
        let d2_conditional = d2.conditional.as_ref().expect("D2 has a conditional");
        check.close(
            "concurrence of the D2 conditional (singlet)",
            concurrence(d2_conditional)?,
            1.0,
            TOL_VALUE,
        );
        Ok(())
    })
}

fn c06(net: &NetworkDescription) -> CriterionResult {
    guarded(CRITERIA[5].0, CRITERIA[5].1, |check| {
        let comparison = compute_baseline_comparison(net)?;
        let expected = [
            ("A1", 1.0 / 3.0, 1.0 / 6.0),
            ("B1", 2.0 / 3.0, 5.0 / 6.0),
            ("A3", 1.0 / 3.0, 1.0 / 6.0),
            ("B3", 2.0 / 3.0, 5.0 / 6.0),
        ];
        for (rail, baseline, disturbed) in expected {
            let Some((_, without, with)) =
                comparison.pairs.iter().find(|(r, _, _)| r == rail)
            else {
                check.is_true(&format!("comparison has a row for rail `{rail}`"), false);
                continue;
            };
            check.close(
                &format!("baseline probability of `{rail}`"),
                *without,
                baseline,
                TOL_VALUE,
            );
            check.close(
                &format!("disturbed probability of `{rail}`"),
                *with,
                disturbed,
                TOL_VALUE,
            );
            check.close(
                &format!("baseline/disturbed gap on `{rail}`"),
                (without - with).abs(),
                1.0 / 6.0,
                TOL_VALUE,
            );
        }
        Ok(())
    })
}

fn c07(net: &NetworkDescription) -> CriterionResult {
    guarded(CRITERIA[6].0, CRITERIA[6].1, |check| {
        let data = compute_weak_values(net)?;
        for table in &data.singles {
            let expected = expected_singles(&table.ensemble);
            for (entry, want) in table.entries.iter().zip(expected) {
                check.close_complex(
                    &format!("single weak value {} ({})", entry.projector, table.ensemble),
                    entry.value,
                    c(want, 0.0),
                    TOL_VALUE,
                );
                check.is_true(
                    &format!(
                        "imaginary part of {} ({}) below 1e-9",
                        entry.projector, table.ensemble
                    ),
                    entry.value.im.abs() < TOL_VALUE,
                );
            }
        }
        for table in &data.joints {
            let expected = expected_joints(&table.ensemble);
            for (entry, (word, want)) in table.entries.iter().zip(expected) {
                check.is_true(
                    &format!("joint table rows ordered: {} vs {word}", entry.projector),
                    entry.projector.label() == word,
                );
                check.close_complex(
                    &format!("joint weak value {word} ({})", table.ensemble),
                    entry.value,
                    c(want, 0.0),
                    TOL_VALUE,
                );
            }
        }
        Ok(())
    })
}

fn c08(net: &NetworkDescription) -> CriterionResult {
    guarded(CRITERIA[7].0, CRITERIA[7].1, |check| {
        let data = compute_decomposition(net)?;
        check.is_true(
            &format!("14 projector rows, got {}", data.rows.len()),
            data.rows.len() == 14,
        );
        for (projector, lhs, rhs) in &data.rows {
            check.close(
                &format!("decomposition identity for {projector}"),
                *lhs,
                *rhs,
                TOL_VALUE,
            );
        }
        let find = |label: &str| {
            data.rows
                .iter()
                .find(|(p, _, _)| p.label() == label)
                .map(|(_, _, rhs)| *rhs)
        };
        check.close(
            "P(A1) from weighted weak values",
            find("A1").unwrap_or(f64::NAN),
            1.0 / 6.0,
            TOL_VALUE,
        );
        check.close(
            "P(B1) from weighted weak values",
            find("B1").unwrap_or(f64::NAN),
            5.0 / 6.0,
            TOL_VALUE,
        );
        Ok(())
    })
}

fn c09(net: &NetworkDescription) -> CriterionResult {
    guarded(CRITERIA[8].0, CRITERIA[8].1, |check| {
        let mut rng = StdRng::seed_from_u64(0x0f0c_5eed);

        // Unitarity: random element sequences preserve inner products.
        let rails = RailSet::new(["P", "Q", "R", "S"])?;
        for trial in 0..25 {
            let a = random_state(&mut rng, &rails);
            let b = random_state(&mut rng, &rails);
            let before = a.inner(&b)?;
            let sequence = random_sequence(&mut rng, &rails, 5);
            let mut ua = a.clone();
            let mut ub = b.clone();
            for element in &sequence {
                ua = apply_element(element, &ua)?;
                ub = apply_element(element, &ub)?;
            }
            check.close_complex(
                &format!("inner product preserved (trial {trial})"),
                ua.inner(&ub)?,
                before,
                TOL_VALUE,
            );
        }

        // Bunching null: one photon per input port leaves no coincidence term.
        let pair = RailSet::new(["X", "Y"])?;
        let both = PureState::basis(pair.clone(), &[1, 1])?;
        let split = apply_beam_splitter(&BeamSplitter::straight("X", "Y"), &both)?;
        check.is_true(
            "coincidence amplitude after a 50:50 splitter cancels below 1e-12",
            split.amplitude(&FockBasisState::new(vec![1, 1])).norm() < TOL_CANCELLATION,
        );

        // Photon-number conservation, exact.
        for _ in 0..10 {
            let total = rng.gen_range(1..=3u32);
            let state = random_fixed_total_state(&mut rng, &rails, total);
            let sequence = random_sequence(&mut rng, &rails, 6);
            let mut evolved = state.clone();
            for element in &sequence {
                evolved = apply_element(element, &evolved)?;
            }
            check.is_true(
                "every evolved term keeps the input photon number",
                evolved.terms().all(|(basis, _)| basis.total() == total),
            );
        }

        // Projector idempotence within 1e-12.
        for _ in 0..10 {
            let state = random_state(&mut rng, &rails);
            let event = random_event(&mut rng, &rails);
            let once = apply_projector(&event, &state)?;
            let twice = apply_projector(&event, &once)?;
            check.is_true(
                "projector is idempotent within 1e-12",
                twice.max_deviation(&once)? <= TOL_CANCELLATION,
            );
        }

        // Weak-value phase-gauge invariance within 1e-12.
        let protocol = compute_protocol(net)?;
        let ensemble = &protocol.ensembles[0];
        let baseline_table = weak_value_table(ensemble)?;
        for _ in 0..5 {
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let shifted = PrePostEnsemble::new(
                ensemble.label.clone(),
                ensemble.pre.with_global_phase(Amplitude::from_polar(1.0, theta))?,
                ensemble.post.with_global_phase(Amplitude::from_polar(1.0, phi))?,
            )?;
            let shifted_table = weak_value_table(&shifted)?;
            for (a, b) in baseline_table.entries.iter().zip(&shifted_table.entries) {
                check.close_complex(
                    &format!("gauge invariance of {}", a.projector),
                    b.value,
                    a.value,
                    TOL_CANCELLATION,
                );
            }
        }

        // Joint-to-single marginalization within 1e-9.
        for ensemble in &protocol.ensembles {
            let singles = weak_value_table(ensemble)?;
            let joints = joint_weak_values(ensemble)?;
            for single in &singles.entries {
                let (photon, letter) = single.projector.assignments().next().expect("one entry");
                let mut sum = c(0.0, 0.0);
                for joint in &joints.entries {
                    let assigned: Vec<(usize, Letter)> = joint.projector.assignments().collect();
                    if assigned[photon].1 == letter {
                        sum += joint.value;
                    }
                }
                check.close_complex(
                    &format!(
                        "joint weak values marginalize to {} ({})",
                        single.projector, ensemble.label
                    ),
                    sum,
                    single.value,
                    TOL_VALUE,
                );
            }
        }

        // Product caveat: the joint weak value is not the product of singles.
        let d1 = protocol
            .ensembles
            .iter()
            .find(|e| e.label == "D1")
            .expect("D1 ensemble exists");
        let singles = weak_value_table(d1)?;
        let joints = joint_weak_values(d1)?;
        let product = singles.value("A1").unwrap()
            * singles.value("B2").unwrap()
            * singles.value("B3").unwrap();
        let joint = joints.value("ABB").unwrap();
        check.is_true(
            &format!(
                "joint weak value {} differs from the single-path product {} by more than 1e-3",
                joint.re, product.re
            ),
            (joint - product).norm() > TOL_COUNTEREXAMPLE_GAP,
        );
        Ok(())
    })
}

fn c10(net: &NetworkDescription) -> CriterionResult {
    guarded(CRITERIA[9].0, CRITERIA[9].1, |check| {
        let data = compute_mirrors_variant(net)?;
        check.close(
            "deviation of the all-mirrors secondary stage from −i × post-primary",
            data.max_deviation,
            0.0,
            TOL_VALUE,
        );
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Random generators for the property suite (fixed seed, deterministic)
// ---------------------------------------------------------------------------

fn random_amplitude(rng: &mut StdRng) -> Amplitude {
    Amplitude::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_state(rng: &mut StdRng, rails: &std::sync::Arc<RailSet>) -> PureState {
    loop {
        let terms: Vec<(FockBasisState, Amplitude)> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let occ: Vec<u8> = (0..rails.len()).map(|_| rng.gen_range(0..=2u8)).collect();
                (FockBasisState::new(occ), random_amplitude(rng))
            })
            .collect();
        let state = PureState::from_terms(rails.clone(), terms).expect("finite amplitudes");
        if let Ok((normalized, _)) = state.normalize() {
            return normalized;
        }
    }
}

fn random_fixed_total_state(
    rng: &mut StdRng,
    rails: &std::sync::Arc<RailSet>,
    total: u32,
) -> PureState {
    loop {
        let terms: Vec<(FockBasisState, Amplitude)> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let mut occ = vec![0u8; rails.len()];
                for _ in 0..total {
                    occ[rng.gen_range(0..rails.len())] += 1;
                }
                (FockBasisState::new(occ), random_amplitude(rng))
            })
            .collect();
        let state = PureState::from_terms(rails.clone(), terms).expect("finite amplitudes");
        if let Ok((normalized, _)) = state.normalize() {
            return normalized;
        }
    }
}

fn random_sequence(
    rng: &mut StdRng,
    rails: &std::sync::Arc<RailSet>,
    max_len: usize,
) -> Vec<Element> {
    (0..rng.gen_range(1..=max_len))
        .map(|_| {
            let i = rng.gen_range(0..rails.len());
            if rng.gen_bool(0.3) {
                Element::Mirror(Mirror::new(rails.labels()[i].clone()))
            } else {
                let mut j = rng.gen_range(0..rails.len());
                while j == i {
                    j = rng.gen_range(0..rails.len());
                }
                let a = rails.labels()[i].clone();
                let b = rails.labels()[j].clone();
                if rng.gen_bool(0.5) {
                    Element::BeamSplitter(BeamSplitter::straight(a, b))
                } else {
                    Element::BeamSplitter(BeamSplitter::cross(a, b))
                }
            }
        })
        .collect()
}

fn random_event(rng: &mut StdRng, rails: &std::sync::Arc<RailSet>) -> SelectionEvent {
    if rng.gen_bool(0.5) {
        let count = rng.gen_range(1..=rails.len());
        let rail_ids: Vec<_> = rails.labels()[..count].to_vec();
        let occupations: Vec<u8> = (0..count).map(|_| rng.gen_range(0..=1u8)).collect();
        SelectionEvent::occupancy(rail_ids, occupations).expect("lengths match")
    } else {
        // Rank-one projector onto a random single-photon state on two rails.
        let theta = rng.gen_range(0.2..std::f64::consts::FRAC_PI_2 - 0.2);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let sub_rails = RailSet::new([
            rails.labels()[0].clone(),
            rails.labels()[1].clone(),
        ])
        .expect("distinct rails");
        let state = PureState::from_amplitudes(
            sub_rails,
            &[
                (&[1, 0], Amplitude::from_polar(theta.cos(), phi)),
                (&[0, 1], c(theta.sin(), 0.0)),
            ],
        )
        .expect("finite amplitudes");
        SelectionEvent::detector(state).expect("cos/sin states are normalized")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::build_triple_mz;

    #[test]
    fn every_criterion_passes_on_the_builtin_network() {
        let net = build_triple_mz();
        let results = run_all(&net);
        assert_eq!(results.len(), CRITERIA.len());
        for result in &results {
            assert!(result.passed, "{}", result.line());
        }
    }

    #[test]
    fn unknown_criterion_ids_return_none() {
        let net = build_triple_mz();
        assert!(run_criterion("c99-bogus", &net).is_none());
    }

    #[test]
    fn flipped_central_splitter_fails_the_filtered_state_regression() {
        // Re-orient the first shared splitter so that transmission keeps
        // the photon in its own apparatus: the primary stage is untouched
        // but the filtered state changes.
        use crate::elements::{BeamSplitter, Element, ElementSequence, Stage};
        use crate::network::NetworkDescription;

        let net = build_triple_mz();
        let stages: Vec<Stage> = net
            .sequence()
            .stages
            .iter()
            .map(|stage| Stage {
                name: stage.name.clone(),
                elements: stage
                    .elements
                    .iter()
                    .map(|element| match element {
                        Element::BeamSplitter(bs)
                            if stage.name == "secondary" && bs.in_a().as_str() == "A1" =>
                        {
                            Element::BeamSplitter(BeamSplitter::straight("A1", "A2"))
                        }
                        other => other.clone(),
                    })
                    .collect(),
            })
            .collect();
        let candidate = NetworkDescription::new(
            net.rails().clone(),
            net.source().clone(),
            ElementSequence::new(stages),
            net.partition().clone(),
        )
        .unwrap();
        let c01 = run_criterion("c01-primary-superposition", &candidate).unwrap();
        assert!(c01.passed, "{}", c01.line());
        let c02 = run_criterion("c02-filtered-state", &candidate).unwrap();
        assert!(!c02.passed);
        assert!(
            c02.detail.contains("amplitude") || c02.detail.contains("factor"),
            "{}",
            c02.detail
        );
    }
}
