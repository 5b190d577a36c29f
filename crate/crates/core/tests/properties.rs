//! Randomized invariant checks over the evaluation core, the percept
//! memory, the action selector, and the world step.

use std::collections::BTreeMap;

use proptest::collection::vec;
use proptest::prelude::*;

use ibenet::cognitive::{
    attend_to_preferences, persist_percepts, select_external_behaviour, ActionKind, ActionSource,
    Percept, PotentialAction,
};
use ibenet::harness::run_scenario;
use ibenet::motivational::{evaluate_congruence, update_drive, CongruenceBehaviour, DriveState};
use ibenet::scenario::Scenario;
use ibenet::{AnimatState, Certainty, ObjectKind, WorldConfig, WorldObject, WorldState};

fn hunger_behaviour(alpha: f64, fas: Vec<f64>) -> CongruenceBehaviour {
    let kinds = ["food", "grass", "water", "spot"];
    let couplings: BTreeMap<String, f64> = fas
        .iter()
        .enumerate()
        .map(|(i, fa)| (kinds[i].to_string(), *fa))
        .collect();
    CongruenceBehaviour::new("hunger", alpha, couplings, ActionKind::Eat).unwrap()
}

fn stimuli(values: &[f64]) -> BTreeMap<String, Certainty> {
    let kinds = ["food", "grass", "water", "spot"];
    values
        .iter()
        .enumerate()
        .map(|(i, v)| (kinds[i].to_string(), Certainty::clamped(*v)))
        .collect()
}

prop_compose! {
    fn eval_inputs()(
        alpha in 0.0..=1.0f64,
        fas in vec(0.0..=2.0f64, 1..=4),
        o_e in 0.0..=1.0f64,
        o_d in 0.0..=1.0f64,
        raw_s in vec(0.0..=1.0f64, 4),
    ) -> (CongruenceBehaviour, Certainty, BTreeMap<String, Certainty>, Certainty) {
        let n = fas.len();
        (
            hunger_behaviour(alpha, fas),
            Certainty::clamped(o_e),
            stimuli(&raw_s[..n]),
            Certainty::clamped(o_d),
        )
    }
}

proptest! {
    // The engine's raw value is exactly the closed-form fold.
    #[test]
    fn raw_activity_matches_fold((beh, o_e, o_s, o_d) in eval_inputs()) {
        let raw = evaluate_congruence(&beh, o_e, &o_s, o_d);
        let weighted: f64 = beh
            .couplings
            .iter()
            .map(|(k, fa)| fa * o_s.get(k).map(|c| c.value()).unwrap_or(0.0))
            .sum();
        let expected = o_e.value() * (beh.alpha + weighted) + o_d.value();
        prop_assert_eq!(raw, expected);
    }

    // Strengthening any coupled stimulus never lowers the activity.
    #[test]
    fn activity_monotone_in_stimuli(
        (beh, o_e, o_s, o_d) in eval_inputs(),
        bump in 0.0..=1.0f64,
    ) {
        let base = evaluate_congruence(&beh, o_e, &o_s, o_d);
        for kind in beh.couplings.keys() {
            let mut raised = o_s.clone();
            let old = raised.get(kind).map(|c| c.value()).unwrap_or(0.0);
            raised.insert(kind.clone(), Certainty::clamped((old + bump).min(1.0)));
            let after = evaluate_congruence(&beh, o_e, &raised, o_d);
            prop_assert!(after >= base);
        }
    }

    // With no internal weight and no feedback, positive activity requires
    // both the need and a coupled stimulus.
    #[test]
    fn gating_needs_both_factors((beh, o_e, o_s, _) in eval_inputs()) {
        let beh = CongruenceBehaviour::new(
            "hunger", 0.0, beh.couplings, ActionKind::Eat,
        ).unwrap();
        let weighted: f64 = beh
            .couplings
            .iter()
            .map(|(k, fa)| fa * o_s.get(k).map(|c| c.value()).unwrap_or(0.0))
            .sum();
        let clamped = Certainty::clamped(
            evaluate_congruence(&beh, o_e, &o_s, Certainty::ZERO),
        );
        prop_assert_eq!(
            clamped.value() > 0.0,
            o_e.value() > 0.0 && weighted > 0.0
        );
    }

    // Stimulus-free activity is the internal weight times the need.
    #[test]
    fn alpha_scales_bare_need(alpha in 0.0..=1.0f64, o_e in 0.0..=1.0f64) {
        let beh = hunger_behaviour(alpha, vec![1.0]);
        let raw = evaluate_congruence(
            &beh,
            Certainty::clamped(o_e),
            &BTreeMap::new(),
            Certainty::ZERO,
        );
        prop_assert_eq!(raw, alpha * o_e);
    }

    // Feedback echoes a fraction of the previous activity while the need
    // lasts and is exactly zero the moment it does not.
    #[test]
    fn feedback_gated_by_need(
        lambda in 0.0..0.999f64,
        prev in 0.0..=1.0f64,
        o_e in 0.0..=1.0f64,
    ) {
        let d = DriveState::new("hunger", lambda).unwrap();
        let next = update_drive(&d, Certainty::clamped(prev), Certainty::clamped(o_e));
        if o_e > 0.0 {
            prop_assert_eq!(next.value.value(), lambda * prev);
        } else {
            prop_assert_eq!(next.value.value(), 0.0);
        }
    }

    // Unrefreshed memories decay geometrically and vanish below the floor.
    #[test]
    fn percept_memory_decays_geometrically(
        c0 in 0.02..=1.0f64,
        rho in 0.5..0.99f64,
        steps in 1usize..60,
    ) {
        let mut memory = persist_percepts(
            &[Percept {
                kind: "food".into(),
                certainty: Certainty::clamped(c0),
                bearing: 0.3,
                distance: 4.0,
            }],
            &[],
            rho,
        );
        for k in 1..=steps {
            memory = persist_percepts(&[], &memory, rho);
            let expected = c0 * rho.powi(k as i32);
            match memory.first() {
                Some(p) => {
                    prop_assert!(expected >= 0.01);
                    prop_assert!((p.percept.certainty.value() - expected).abs() <= 1e-12);
                    prop_assert_eq!(p.age, k as u32);
                }
                None => prop_assert!(expected < 0.01),
            }
        }
    }

    // Selection picks a maximal-priority candidate and does not depend on
    // the order candidates were posted.
    #[test]
    fn selection_order_independent(
        priorities in vec(0.0..=1.0f64, 1..12),
        rotate in 0usize..12,
    ) {
        let candidates: Vec<PotentialAction> = priorities
            .iter()
            .enumerate()
            .map(|(i, p)| PotentialAction::new(
                ActionKind::ExploreFor(format!("kind{i}")),
                Certainty::clamped(*p),
                ActionSource::Motivated,
            ))
            .collect();
        let winner = select_external_behaviour(&candidates).unwrap();
        let max = priorities.iter().cloned().fold(0.0f64, f64::max);
        prop_assert_eq!(winner.priority.value(), max);

        let mut rotated = candidates.clone();
        rotated.rotate_left(rotate % candidates.len());
        rotated.reverse();
        let same = select_external_behaviour(&rotated).unwrap();
        prop_assert_eq!(winner.kind, same.kind);
    }

    // Certainty construction: clamping lands in range for any finite input
    // and checked construction accepts exactly the in-range values.
    #[test]
    fn certainty_construction(v in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
        let c = Certainty::clamped(v);
        prop_assert!((0.0..=1.0).contains(&c.value()));
        prop_assert_eq!(Certainty::checked(v).is_ok(), (0.0..=1.0).contains(&v));
    }

    // Attention with no winning preference wanders; with a preference but
    // no matching percepts it explores for the strongest-coupled stimulus.
    #[test]
    fn attention_without_input_explores(alpha in 0.01..=1.0f64, c in 0.01..=1.0f64) {
        let wander = attend_to_preferences(None, &[], 1.0);
        prop_assert_eq!(wander.kind, ActionKind::Wander);

        let beh = hunger_behaviour(alpha, vec![1.0, 0.5]);
        let act = attend_to_preferences(
            Some((&beh, Certainty::clamped(c))),
            &[],
            1.0,
        );
        prop_assert_eq!(act.kind, ActionKind::ExploreFor("food".into()));
        prop_assert_eq!(act.priority.value(), c);
    }
}

fn walled_world(objects: Vec<WorldObject>) -> WorldConfig {
    WorldConfig {
        bounds: [24.0, 24.0],
        perception_radius: 12.0,
        contact_range: 1.0,
        animat: AnimatState {
            position: [12.0, 12.0],
            heading: 0.7,
            v_max: 1.0,
            hunger: 0.5,
            thirst: 0.5,
            fatigue: 0.1,
            strength: 0.9,
            lucidity: 0.9,
        },
        rates: Default::default(),
        objects,
        events: Vec::new(),
    }
}

fn action_palette(idx: u8) -> ActionKind {
    match idx % 7 {
        0 => ActionKind::Wander,
        1 => ActionKind::ExploreFor("food".into()),
        2 => ActionKind::Approach("water".into()),
        3 => ActionKind::AvoidObstacles,
        4 => ActionKind::Rest,
        5 => ActionKind::Eat,
        _ => ActionKind::Runaway,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // No action sequence drives the animat out of bounds or any internal
    // variable out of the unit interval.
    #[test]
    fn world_state_stays_bounded(
        seed in 0u64..1_000,
        actions in vec(0u8..14, 1..80),
    ) {
        let config = walled_world(vec![
            WorldObject {
                id: "wall".into(),
                kind: ObjectKind::Obstacle,
                position: [16.0, 12.0],
                radius: 2.0,
                quality: 1.0,
                stock: None,
            },
            WorldObject {
                id: "pond".into(),
                kind: ObjectKind::Water,
                position: [8.0, 8.0],
                radius: 0.5,
                quality: 0.8,
                stock: None,
            },
        ]);
        let mut world = WorldState::new(config, seed).unwrap();
        for idx in actions {
            world.world_step(&action_palette(idx)).unwrap();
            let a = &world.animat;
            prop_assert!((0.0..=24.0).contains(&a.position[0]));
            prop_assert!((0.0..=24.0).contains(&a.position[1]));
            for v in [a.hunger, a.thirst, a.fatigue, a.strength, a.lucidity] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(a.heading.is_finite());
        }
    }

    // A stocked resource survives exactly ceil(stock / consumption) meals.
    #[test]
    fn consumption_depletes_stock_exactly(stock in 0.011..=0.5f64) {
        let consumption = 0.05f64;
        let mut config = walled_world(vec![WorldObject {
            id: "patch".into(),
            kind: ObjectKind::Food,
            position: [12.5, 12.0],
            radius: 0.5,
            quality: 1.0,
            stock: Some(stock),
        }]);
        config.rates.relief = 0.0;
        config.rates.need_growth = 0.01;
        let mut world = WorldState::new(config, 3).unwrap();

        let mut meals = 0u32;
        while world.object("patch").is_some() {
            let outcome = world.world_step(&ActionKind::Eat).unwrap();
            prop_assert!(outcome.consumed.is_some());
            meals += 1;
            prop_assert!(meals < 1_000);
        }
        prop_assert_eq!(meals, (stock / consumption).ceil() as u32);
    }

    // Identical seeds replay identical traces; the serialized form is
    // byte-stable.
    #[test]
    fn seeded_runs_replay_exactly(seed in 0u64..10_000) {
        let text = r#"
name = "replay"

[network]
alpha = 0.6

[[network.drives]]
id = "hunger"
consummatory = "eat"
couplings = { food = 1.0 }

[world]
bounds = [30.0, 30.0]

[world.animat]
position = [15.0, 15.0]
hunger = 0.8

[[world.objects]]
id = "patch"
kind = "food"
position = [27.0, 24.0]
quality = 0.9

[run]
max_ticks = 50
seeds = [0]
"#;
        let scenario = Scenario::from_toml(text).unwrap();
        let a = run_scenario(&scenario, seed).unwrap();
        let b = run_scenario(&scenario, seed).unwrap();
        prop_assert_eq!(
            a.to_json_lines().unwrap(),
            b.to_json_lines().unwrap()
        );
    }
}
