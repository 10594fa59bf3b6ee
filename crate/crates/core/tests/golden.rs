mod common;

use aic_core::machine::{classify_stuck, explore, run, MachineState, Outcome, Scheduler};
use aic_core::surface::{parse, print};
use aic_core::syntax::{struct_equiv, Region};
use aic_core::translation::{check_simulation, forget_file, i_typecheck_in};
use aic_core::typing::{typecheck, Mode, TypeErrorKind};
use common::load;

const FILES: [&str; 10] = [
    "example1.aic",
    "example1_app.aic",
    "example2_functional.aic",
    "example2_reader.aic",
    "example2_writer.aic",
    "example2_app.aic",
    "divergent.aic",
    "race2.aic",
    "race3.aic",
    "race4.aic",
];

fn state(name: &str) -> MachineState {
    MachineState::new(&load(name).program).unwrap()
}

#[test]
fn example1_report() {
    let r = typecheck(&load("example1.aic"), Mode::base()).unwrap();
    assert_eq!(r.render(), "type: !Reg r 1 -o B\neffect: {}\nusage r = <1,1> aff\n");
}

#[test]
fn example2_reports() {
    let render = |f: &str| typecheck(&load(f), Mode::base()).unwrap().render();
    assert_eq!(
        render("example2_functional.aic"),
        "type: (Reg r 1 -o 1) -o (Reg r 1 -o 1) -o B\neffect: {}\nusage r = <0,0> aff\n"
    );
    assert_eq!(render("example2_reader.aic"), "type: Reg r 1 -o 1\neffect: {}\nusage r = <0,1> aff\n");
    assert_eq!(render("example2_writer.aic"), "type: Reg r 1 -o 1\neffect: {}\nusage r = <1,0> aff\n");
    assert_eq!(render("example2_app.aic"), "type: B\neffect: {}\nusage r = <1,1> aff\n");
}

#[test]
fn example2_app_needs_latent_effects_in_the_functional() {
    // The functional expects effect-free arguments.
    assert!(typecheck(&load("example2_app.aic"), Mode::effects()).is_err());
}

#[test]
fn example1_application_runs_in_four_steps() {
    let t = run(&state("example1_app.aic"), Scheduler::Leftmost, 100).unwrap();
    assert_eq!(t.outcome, Outcome::NormalForm);
    assert_eq!(t.steps.len(), 4);
    let star = parse("program * | *").unwrap().program;
    assert!(struct_equiv(&t.last.to_term(), &star).unwrap());
}

#[test]
fn divergent_typing_and_run() {
    let f = load("divergent.aic");
    let r = typecheck(&f, Mode::effects()).unwrap();
    assert_eq!(r.effect.iter().cloned().collect::<Vec<_>>(), vec![Region::new("r")]);
    let e = typecheck(&f, Mode::stratified()).unwrap_err();
    assert!(e.is_formation());
    assert!(e.to_string().contains("refers to itself"), "{e}");
    let t = run(&state("divergent.aic"), Scheduler::Leftmost, 2000).unwrap();
    assert_eq!(t.outcome, Outcome::StepLimit);
}

#[test]
fn races() {
    for name in ["race2.aic", "race3.aic"] {
        let e = typecheck(&load(name), Mode::base().with_confluent()).unwrap_err();
        assert!(
            e.0.iter().any(|d| matches!(&d.kind, TypeErrorKind::UsageClash(c) if c.to_string().contains("`r`"))),
            "{name}: {e}"
        );
        let x = explore(&state(name), 1000).unwrap();
        assert_eq!(x.normal_forms.len(), 2, "{name}");
        assert!(!x.violations.is_empty(), "{name}");
    }
    typecheck(&load("race4.aic"), Mode::base().with_confluent()).unwrap();
    let x = explore(&state("race4.aic"), 1000).unwrap();
    assert_eq!((x.normal_forms.len(), x.violations.len()), (1, 0));
}

#[test]
fn every_golden_file_roundtrips() {
    for name in FILES {
        let f = load(name);
        let printed = print(&f);
        let back = parse(&printed).unwrap();
        assert!(struct_equiv(&f.program, &back.program).unwrap(), "{name}");
        assert_eq!(print(&back), printed, "{name}");
    }
}

#[test]
fn stratified_golden_files_translate_and_simulate() {
    for name in FILES {
        let f = load(name);
        let Ok(r) = typecheck(&f, Mode::stratified()) else { continue };
        let t = forget_file(&f, &r.decorated).unwrap();
        let (_, eff) = i_typecheck_in(&t.regions, &t.vars, &t.program).unwrap();
        assert_eq!(eff, r.effect, "{name}");
        let v = check_simulation(&f, Scheduler::Leftmost, 1000).unwrap();
        assert!(v.is_simulated(), "{name}: {v}");
    }
}

#[test]
fn quiescent_golden_runs_classify() {
    for name in ["example1_app.aic", "race2.aic", "race3.aic", "race4.aic"] {
        let t = run(&state(name), Scheduler::Seeded(5), 1000).unwrap();
        classify_stuck(&t.last).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn example1_application_preserves_typing_at_every_step() {
    let f = load("example1_app.aic");
    for mode in [Mode::base(), Mode::effects()] {
        for seed in 0..5 {
            aic_core::harness::check_subject_reduction(&f, mode, seed).unwrap();
        }
    }
}
