//! Randomized invariants of the attack transformations.

use copresence::attack::{
    apply_attack, default_mode_table, manipulate_physical, manipulate_radio, AttackSpec,
    FeasibilityCatalog, PhysicalMode, RadioDirection,
};
use copresence::context::{
    AudioTrace, BeaconSet, ContextPair, ContextSample, Label, Modality, PhysicalReadings,
    RadioKind, SENSING_WINDOW_DEFAULT_S,
};
use copresence::seed::{rng_for, stream};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_beacons(rng: &mut ChaCha8Rng, kind: RadioKind, tag: &str) -> BeaconSet {
    let n = rng.gen_range(0..8usize);
    let mut set = BeaconSet::new(kind);
    for i in 0..n {
        // Overlapping id space across sides: some beacons shared, some not.
        let id = format!("{tag}{}", rng.gen_range(0..10u32));
        let _ = set.insert(format!("{id}:{i}"), rng.gen_range(-95..=-20));
    }
    set
}

fn random_sample(rng: &mut ChaCha8Rng) -> ContextSample {
    let n = rng.gen_range(16..64usize);
    ContextSample {
        audio: AudioTrace::new((0..n).map(|_| rng.gen_range(-0.9..0.9)).collect(), 8_000.0)
            .unwrap(),
        wifi: random_beacons(rng, RadioKind::W, "w"),
        bluetooth: random_beacons(rng, RadioKind::B, "b"),
        physical: PhysicalReadings {
            temperature: rng.gen_range(-5.0..40.0),
            humidity: rng.gen_range(5.0..95.0),
            gas_co: rng.gen_range(0.0..20.0),
            altitude: rng.gen_range(0.0..500.0),
        },
        sensed_at: 0.0,
        sensing_window: SENSING_WINDOW_DEFAULT_S,
    }
}

fn random_non_co_pair(rng: &mut ChaCha8Rng, id: usize) -> ContextPair {
    ContextPair {
        prover: random_sample(rng),
        verifier: random_sample(rng),
        label: Label::NonCoPresent,
        pair_id: format!("non-{id}"),
    }
}

#[test]
fn radio_union_is_idempotent_on_random_pairs() {
    let mut rng = rng_for(100, stream::DATAGEN_PAIR, 0);
    for i in 0..1_000 {
        let mut pair = random_non_co_pair(&mut rng, i);
        let direction = if i % 2 == 0 {
            RadioDirection::Bidirectional
        } else {
            RadioDirection::Unidirectional
        };
        manipulate_radio(&mut pair, Modality::W, direction);
        manipulate_radio(&mut pair, Modality::B, direction);
        let once = pair.clone();
        manipulate_radio(&mut pair, Modality::W, direction);
        manipulate_radio(&mut pair, Modality::B, direction);
        assert_eq!(pair, once, "pair {i} ({direction:?})");
    }
}

#[test]
fn bidirectional_union_equalizes_identifier_sets() {
    let mut rng = rng_for(101, stream::DATAGEN_PAIR, 0);
    for i in 0..200 {
        let mut pair = random_non_co_pair(&mut rng, i);
        manipulate_radio(&mut pair, Modality::W, RadioDirection::Bidirectional);
        let ids_p: Vec<&str> = pair.prover.wifi.identifiers().collect();
        let ids_v: Vec<&str> = pair.verifier.wifi.identifiers().collect();
        assert_eq!(ids_p, ids_v, "pair {i}");
    }
}

#[test]
fn disjoint_transformations_commute() {
    let catalog = FeasibilityCatalog::default();
    let mut rng = rng_for(102, stream::DATAGEN_PAIR, 0);
    let radio_then_phys = |pair: &ContextPair| {
        let mut p = pair.clone();
        manipulate_radio(&mut p, Modality::W, RadioDirection::Bidirectional);
        manipulate_physical(
            &mut p,
            &[Modality::G, Modality::T].into_iter().collect(),
            PhysicalMode::ZeroDistance,
            &default_mode_table(),
        )
        .unwrap();
        p
    };
    let phys_then_radio = |pair: &ContextPair| {
        let mut p = pair.clone();
        manipulate_physical(
            &mut p,
            &[Modality::G, Modality::T].into_iter().collect(),
            PhysicalMode::ZeroDistance,
            &default_mode_table(),
        )
        .unwrap();
        manipulate_radio(&mut p, Modality::W, RadioDirection::Bidirectional);
        p
    };
    for i in 0..300 {
        let pair = random_non_co_pair(&mut rng, i);
        assert_eq!(radio_then_phys(&pair), phys_then_radio(&pair), "pair {i}");
    }
    let _ = catalog;
}

#[test]
fn apply_attack_leaves_co_pairs_and_labels_alone() {
    let catalog = FeasibilityCatalog::default();
    let mut rng = rng_for(103, stream::DATAGEN_PAIR, 0);
    let mut fold = Vec::new();
    for i in 0..60 {
        let mut pair = random_non_co_pair(&mut rng, i);
        if i % 3 == 0 {
            pair.label = Label::CoPresent;
        }
        fold.push(pair);
    }
    let spec: AttackSpec = "Au,B,G,W".parse().unwrap();
    let out = apply_attack(&fold, &spec, &catalog, false).unwrap();
    assert_eq!(out.len(), fold.len());
    for (after, before) in out.iter().zip(&fold) {
        assert_eq!(after.label, before.label);
        assert_eq!(after.pair_id, before.pair_id);
        if before.label.is_co_present() {
            assert_eq!(after, before, "co-present pair must be untouched");
        } else {
            // Gas equalized, audio mixed.
            assert_eq!(
                after.verifier.physical.gas_co,
                before.prover.physical.gas_co
            );
            assert_eq!(after.prover.physical, before.prover.physical);
        }
    }
}

#[test]
fn composed_attack_equals_composition_of_single_transforms() {
    let catalog = FeasibilityCatalog::default();
    let mut rng = rng_for(104, stream::DATAGEN_PAIR, 0);
    let spec: AttackSpec = "Au,B,G,W".parse().unwrap();
    for i in 0..100 {
        let pair = random_non_co_pair(&mut rng, i);
        let composed = apply_attack(std::slice::from_ref(&pair), &spec, &catalog, false)
            .unwrap()
            .remove(0);

        let mut manual = pair.clone();
        copresence::attack::manipulate_audio(&mut manual).unwrap();
        manipulate_radio(&mut manual, Modality::B, RadioDirection::Bidirectional);
        manipulate_radio(&mut manual, Modality::W, RadioDirection::Bidirectional);
        manipulate_physical(
            &mut manual,
            &[Modality::G].into_iter().collect(),
            PhysicalMode::ZeroDistance,
            &default_mode_table(),
        )
        .unwrap();
        assert_eq!(composed, manual, "pair {i}");
    }
}
