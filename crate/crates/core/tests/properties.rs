//! Property tests over random states, element sequences, and projectors.

use std::sync::Arc;

use proptest::prelude::*;

use focknet::elements::{
    apply_beam_splitter, apply_beam_splitter_inverse, apply_element, apply_mirror, BeamSplitter,
    Element, Mirror,
};
use focknet::fock::{Amplitude, FockBasisState, PureState, RailSet, PRUNING_THRESHOLD};
use focknet::network::{ApparatusGroup, ApparatusPartition};
use focknet::postselect::{
    apply_projector, from_register, to_register, PathWord, RegisterState, SelectionEvent,
};

const RAILS: [&str; 4] = ["P", "Q", "R", "S"];

fn rails() -> Arc<RailSet> {
    RailSet::new(RAILS).unwrap()
}

fn arb_amplitude() -> impl Strategy<Value = Amplitude> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Amplitude::new(re, im))
}

fn arb_occupation() -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0..=2u8, RAILS.len())
}

prop_compose! {
    fn arb_state()(
        terms in proptest::collection::vec((arb_occupation(), arb_amplitude()), 1..5)
    ) -> Option<PureState> {
        let state = PureState::from_terms(
            rails(),
            terms
                .into_iter()
                .map(|(occ, amp)| (FockBasisState::new(occ), amp)),
        )
        .unwrap();
        state.normalize().ok().map(|(s, _)| s)
    }
}

fn arb_element() -> impl Strategy<Value = Element> {
    let mirror = (0..RAILS.len()).prop_map(|i| Element::Mirror(Mirror::new(RAILS[i])));
    let splitter = (0..RAILS.len(), 0..RAILS.len() - 1, any::<bool>()).prop_map(|(i, j, cross)| {
        let j = if j >= i { j + 1 } else { j };
        let (a, b) = (RAILS[i], RAILS[j]);
        Element::BeamSplitter(if cross {
            BeamSplitter::cross(a, b)
        } else {
            BeamSplitter::straight(a, b)
        })
    });
    prop_oneof![mirror, splitter]
}

fn arb_sequence() -> impl Strategy<Value = Vec<Element>> {
    proptest::collection::vec(arb_element(), 0..6)
}

fn arb_occupancy_event() -> impl Strategy<Value = SelectionEvent> {
    (1..=RAILS.len(), proptest::collection::vec(0..=1u8, RAILS.len())).prop_map(
        |(count, occupations)| {
            SelectionEvent::occupancy(
                RAILS[..count].iter().map(|&r| r.into()).collect(),
                occupations[..count].to_vec(),
            )
            .unwrap()
        },
    )
}

fn evolve_all(elements: &[Element], state: &PureState) -> PureState {
    let mut out = state.clone();
    for element in elements {
        out = apply_element(element, &out).unwrap();
    }
    out
}

proptest! {
    #[test]
    fn evolution_preserves_inner_products(
        a in arb_state(),
        b in arb_state(),
        sequence in arb_sequence(),
    ) {
        let (Some(a), Some(b)) = (a, b) else { return Ok(()) };
        let before = a.inner(&b).unwrap();
        let after = evolve_all(&sequence, &a)
            .inner(&evolve_all(&sequence, &b))
            .unwrap();
        prop_assert!((after - before).norm() < 1e-9);
    }

    #[test]
    fn evolution_preserves_term_photon_numbers(
        occ in arb_occupation(),
        sequence in arb_sequence(),
    ) {
        let state = PureState::basis(rails(), &occ).unwrap();
        let total = FockBasisState::new(occ).total();
        let evolved = evolve_all(&sequence, &state);
        for (basis, _) in evolved.terms() {
            prop_assert_eq!(basis.total(), total);
        }
    }

    #[test]
    fn stored_amplitudes_stay_above_the_pruning_threshold(
        a in arb_state(),
        sequence in arb_sequence(),
    ) {
        let Some(a) = a else { return Ok(()) };
        let evolved = evolve_all(&sequence, &a);
        for (_, amp) in evolved.terms() {
            prop_assert!(amp.norm() >= PRUNING_THRESHOLD);
        }
    }

    #[test]
    fn splitters_invert_cleanly(a in arb_state(), cross in any::<bool>()) {
        let Some(a) = a else { return Ok(()) };
        let bs = if cross {
            BeamSplitter::cross("P", "Q")
        } else {
            BeamSplitter::straight("P", "Q")
        };
        let round_trip =
            apply_beam_splitter_inverse(&bs, &apply_beam_splitter(&bs, &a).unwrap()).unwrap();
        prop_assert!(round_trip.max_deviation(&a).unwrap() < 1e-12);
    }

    #[test]
    fn mirrors_have_period_four(a in arb_state()) {
        let Some(a) = a else { return Ok(()) };
        let mirror = Mirror::new("R");
        let mut state = a.clone();
        for _ in 0..4 {
            state = apply_mirror(&mirror, &state).unwrap();
        }
        prop_assert!(state.max_deviation(&a).unwrap() < 1e-12);
    }

    #[test]
    fn inner_products_are_conjugate_symmetric(a in arb_state(), b in arb_state()) {
        let (Some(a), Some(b)) = (a, b) else { return Ok(()) };
        let ab = a.inner(&b).unwrap();
        let ba = b.inner(&a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-12);
    }

    #[test]
    fn normalization_preserves_direction(
        terms in proptest::collection::vec((arb_occupation(), arb_amplitude()), 1..5)
    ) {
        let state = PureState::from_terms(
            rails(),
            terms
                .into_iter()
                .map(|(occ, amp)| (FockBasisState::new(occ), amp)),
        )
        .unwrap();
        let Ok((normalized, norm)) = state.normalize() else { return Ok(()) };
        prop_assert!((normalized.norm() - 1.0).abs() < 1e-9);
        let rescaled = normalized.scaled(Amplitude::new(norm, 0.0));
        prop_assert!(rescaled.max_deviation(&state).unwrap() < 1e-9);
    }

    #[test]
    fn occupancy_projectors_are_idempotent(
        a in arb_state(),
        event in arb_occupancy_event(),
    ) {
        let Some(a) = a else { return Ok(()) };
        let once = apply_projector(&event, &a).unwrap();
        let twice = apply_projector(&event, &once).unwrap();
        prop_assert!(twice.max_deviation(&once).unwrap() < 1e-12);
    }

    #[test]
    fn tensor_norms_multiply(
        left in proptest::collection::vec((arb_occupation(), arb_amplitude()), 1..4),
        right in proptest::collection::vec((arb_occupation(), arb_amplitude()), 1..4),
    ) {
        let a = PureState::from_terms(
            RailSet::new(["W1", "W2", "W3", "W4"]).unwrap(),
            left.into_iter().map(|(occ, amp)| (FockBasisState::new(occ), amp)),
        )
        .unwrap();
        let b = PureState::from_terms(
            RailSet::new(["V1", "V2", "V3", "V4"]).unwrap(),
            right.into_iter().map(|(occ, amp)| (FockBasisState::new(occ), amp)),
        )
        .unwrap();
        let t = a.tensor(&b).unwrap();
        prop_assert!((t.norm() - a.norm() * b.norm()).abs() < 1e-9);
    }

    #[test]
    fn registers_round_trip_through_the_rail_picture(
        amps in proptest::collection::vec(arb_amplitude(), 4),
    ) {
        let words = PathWord::all(2);
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        prop_assume!(norm_sqr > 1e-3);
        let scale = 1.0 / norm_sqr.sqrt();
        let register = RegisterState::new(
            2,
            words
                .into_iter()
                .zip(amps)
                .map(|(w, a)| (w, a * scale)),
        )
        .unwrap();
        let rails = RailSet::new(["P", "Q", "R", "S"]).unwrap();
        let partition = ApparatusPartition::new(
            &rails,
            vec![
                ApparatusGroup { name: "G1".to_string(), rails: vec!["P".into(), "Q".into()] },
                ApparatusGroup { name: "G2".to_string(), rails: vec!["R".into(), "S".into()] },
            ],
        )
        .unwrap();
        let embedded = from_register(&register, rails, &partition).unwrap();
        let back = to_register(&embedded, &partition).unwrap();
        for (word, amp) in register.terms() {
            prop_assert!((back.amplitude(word) - amp).norm() < 1e-12);
        }
    }
}
