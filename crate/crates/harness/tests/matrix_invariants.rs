//! Report-level invariants of the matrix runner on a small dataset.

use copresence::attack::AttackSpec;
use copresence::context::Modality;
use copresence::datagen::{GenConfig, Generator};
use copresence::learn::ClassifierKind;

use copresence_harness::matrix::{monotonicity_violations, run_matrix};
use copresence_harness::plan::{ExperimentPlan, FusionKind, SystemKind};
use copresence_harness::render::render_matrix;

fn small_pairs() -> Vec<copresence::context::ContextPair> {
    let mut cfg = GenConfig::benchmark();
    cfg.co_count = 60;
    cfg.non_co_count = 48;
    Generator::new(cfg).unwrap().generate().unwrap()
}

#[test]
fn every_attack_appears_once_per_fusion_and_classifier() {
    let pairs = small_pairs();
    let mut plan = ExperimentPlan::new(SystemKind::AudioRadio);
    plan.seed = 7;
    let attacks = plan.resolved_attacks(&copresence::attack::FeasibilityCatalog::default());
    let report = run_matrix(&plan, &pairs).unwrap();
    for fusion in &plan.fusions {
        for classifier in &plan.classifiers {
            for attack in &attacks {
                let hits = report
                    .rows
                    .iter()
                    .filter(|r| {
                        r.fusion == fusion.name()
                            && r.classifier == classifier.to_string()
                            && r.attack == attack.label()
                    })
                    .count();
                assert_eq!(
                    hits,
                    1,
                    "{}/{}/{}",
                    fusion.name(),
                    classifier,
                    attack.label()
                );
            }
        }
    }
    assert_eq!(
        report.rows.len(),
        plan.fusions.len() * plan.classifiers.len() * attacks.len()
    );
    // The zero-modality row is always present.
    assert!(report.rows.iter().any(|r| r.attack == "none"));
}

#[test]
fn monotonicity_holds_on_the_shipped_benchmark_seed() {
    // Full benchmark, features fusion, the attack ladder around the
    // dominant modality.
    let cfg = GenConfig::benchmark();
    let pairs = Generator::new(cfg).unwrap().generate().unwrap();
    let mut plan = ExperimentPlan::new(SystemKind::AudioRadio);
    plan.fusions = vec![FusionKind::Features];
    plan.classifiers = vec![ClassifierKind::Tree];
    plan.attacks = vec![
        AttackSpec::new([Modality::Au]),
        AttackSpec::new([Modality::B]),
        AttackSpec::new([Modality::W]),
        AttackSpec::new([Modality::Au, Modality::W]),
        AttackSpec::new([Modality::B, Modality::W]),
        AttackSpec::new([Modality::Au, Modality::B]),
        AttackSpec::new([Modality::Au, Modality::B, Modality::W]),
    ];
    let report = run_matrix(&plan, &pairs).unwrap();
    let dominant = ["Au", "B", "W"]
        .iter()
        .max_by(|a, b| {
            let f = |m: &str| {
                report
                    .find("features", "tree", &format!("{{{m}}}"))
                    .and_then(|r| r.metrics.fpr)
                    .unwrap_or(0.0)
            };
            f(a).total_cmp(&f(b))
        })
        .unwrap();
    let violations = monotonicity_violations(&report, dominant);
    assert!(violations.is_empty(), "{violations:?}");
}

#[test]
fn infeasible_attacks_are_refused_without_force() {
    let pairs = small_pairs();
    let mut plan = ExperimentPlan::new(SystemKind::AudioRadioPhysical);
    plan.attacks = vec![AttackSpec::new([Modality::Al, Modality::T])];
    let err = run_matrix(&plan, &pairs).unwrap_err();
    assert!(matches!(
        err,
        copresence_harness::HarnessError::Infeasible(_)
    ));
    plan.force = true;
    assert!(run_matrix(&plan, &pairs).is_ok());
}

#[test]
fn rendered_table_groups_rows() {
    let pairs = small_pairs();
    let mut plan = ExperimentPlan::new(SystemKind::AudioRadio);
    plan.classifiers = vec![ClassifierKind::Tree];
    let report = run_matrix(&plan, &pairs).unwrap();
    let text = render_matrix(&report);
    assert!(text.contains("[zero-modality]"));
    assert!(text.contains("[single-modality]"));
    assert!(text.contains("[multi-modality]"));
}

#[test]
fn undersampled_matrix_runs_and_counts_rotations() {
    // Each non-co pair is scored in 10 of 19 rounds, so each cell's total
    // is 19 x |co| + 10 x |non-co|.
    let mut cfg = GenConfig::physical_imbalance();
    cfg.co_count = 20;
    cfg.non_co_count = 76;
    let pairs = Generator::new(cfg).unwrap().generate().unwrap();
    let mut plan = ExperimentPlan::new(SystemKind::Physical);
    plan.undersample = true;
    plan.folds = 5;
    plan.fusions = vec![FusionKind::Features];
    plan.classifiers = vec![ClassifierKind::Tree];
    plan.attacks = vec![AttackSpec::new([Modality::T])];
    let report = run_matrix(&plan, &pairs).unwrap();
    for row in &report.rows {
        assert_eq!(row.metrics.total(), 19 * 20 + 10 * 76, "{row:?}");
    }
}
