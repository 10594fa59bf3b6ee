//! Property suites over generated programs.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::machine::{classify_stuck, explore, run, step, MachineState, Outcome, Scheduler};
use crate::surface::{parse, print, SourceFile};
use crate::syntax::{alpha_eq, Effect};
use crate::translation::{
    check_simulation, forget_file, forget_type, i_run, i_subtype, i_typecheck_in, IState,
};
use crate::typing::{subtype_pair, typecheck, typecheck_program, Mode, System};

use super::gen::{gen_typed, GenConfig};
use super::minimize::minimize;

/// Step budget for subject reduction runs.
pub const SUBJECT_REDUCTION_STEPS: usize = 50;
/// Step budget for runs that are expected to terminate.
pub const STEP_BUDGET: usize = 10_000;
/// State budget for exhaustive exploration.
pub const STATE_BUDGET: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    SubjectReduction,
    Confluence,
    Termination,
    Simulation,
    Progress,
    Roundtrip,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::SubjectReduction,
        Property::Confluence,
        Property::Termination,
        Property::Simulation,
        Property::Progress,
        Property::Roundtrip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::SubjectReduction => "subject-reduction",
            Property::Confluence => "confluence",
            Property::Termination => "termination",
            Property::Simulation => "simulation",
            Property::Progress => "progress",
            Property::Roundtrip => "roundtrip",
        }
    }

    pub fn from_name(s: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.name() == s)
    }

    /// The typing discipline programs are generated in.
    pub fn default_mode(self) -> Mode {
        match self {
            Property::SubjectReduction | Property::Roundtrip => Mode::effects(),
            Property::Confluence => Mode::stratified().with_confluent(),
            Property::Termination | Property::Simulation | Property::Progress => Mode::stratified(),
        }
    }

    /// Checks one generated file; `seed` drives any scheduling choice.
    pub fn check(self, file: &SourceFile, mode: Mode, seed: u64) -> Result<(), String> {
        match self {
            Property::SubjectReduction => check_subject_reduction(file, mode, seed),
            Property::Confluence => check_confluence(file),
            Property::Termination => check_termination(file, seed),
            Property::Simulation => check_simulation_property(file, seed),
            Property::Progress => check_progress(file, seed),
            Property::Roundtrip => check_roundtrip(file),
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub case: usize,
    pub seed: u64,
    /// The minimised file, printed in concrete syntax.
    pub file: String,
    pub explanation: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyResult {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<Failure>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(f, "{verdict} {}: {} cases, {} failures", self.name, self.cases, self.failures.len())?;
        for x in &self.failures {
            writeln!(f, "case {} (seed {}): {}", x.case, x.seed, x.explanation)?;
            for line in x.file.lines() {
                writeln!(f, "  {line}")?;
            }
        }
        Ok(())
    }
}

/// The seed of case `i`: word `i` of a generator seeded with `base`, read
/// from its own stream so that cases are independent of each other.
pub fn case_seed(base: u64, i: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(i as u64);
    rng.next_u64()
}

/// Runs `prop` on `n` files generated from `config`. Cases run in
/// parallel; failures are minimised and reported in case order.
pub fn run_property(prop: Property, n: usize, config: &GenConfig) -> PropertyResult {
    let mode = config.mode;
    let failures: Vec<Option<Failure>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let seed = case_seed(config.seed, i);
            let file = gen_typed(&config.with_seed(seed));
            let why = prop.check(&file, mode, seed).err()?;
            let fails = |f: &SourceFile| prop.check(f, mode, seed).err();
            let (small, why) = minimize(&file, mode, why, &fails);
            Some(Failure { case: i, seed, file: print(&small), explanation: why })
        })
        .collect();
    let name = match (prop, mode.system) {
        (Property::SubjectReduction, System::Base) => format!("{prop} (base)"),
        (Property::SubjectReduction, System::Effects) => format!("{prop} (effects)"),
        _ => prop.name().to_string(),
    };
    PropertyResult { name, cases: n, failures: failures.into_iter().flatten().collect() }
}

pub fn prop_subject_reduction(n: usize, config: &GenConfig) -> PropertyResult {
    run_property(Property::SubjectReduction, n, config)
}

pub fn prop_confluence(n: usize, config: &GenConfig) -> PropertyResult {
    run_property(Property::Confluence, n, config)
}

pub fn prop_termination(n: usize, config: &GenConfig) -> PropertyResult {
    run_property(Property::Termination, n, config)
}

pub fn prop_simulation(n: usize, config: &GenConfig) -> PropertyResult {
    run_property(Property::Simulation, n, config)
}

pub fn prop_progress(n: usize, config: &GenConfig) -> PropertyResult {
    run_property(Property::Progress, n, config)
}

pub fn prop_roundtrip(n: usize, config: &GenConfig) -> PropertyResult {
    run_property(Property::Roundtrip, n, config)
}

fn err(e: impl fmt::Display) -> String {
    e.to_string()
}

/// Every state of a seeded run stays typable; in the base system with the
/// same type, with effects at a smaller type and effect.
pub fn check_subject_reduction(file: &SourceFile, mode: Mode, seed: u64) -> Result<(), String> {
    let before = typecheck(file, mode).map_err(|e| format!("initial program is ill-typed: {e}"))?;
    let dom: Effect = file.regions.iter().map(|d| d.name.clone()).collect();
    let mut s = MachineState::new(&file.program).map_err(err)?;
    let trace = run(&s, Scheduler::Seeded(seed), SUBJECT_REDUCTION_STEPS).map_err(err)?;
    for (k, (site, _)) in trace.steps.iter().enumerate() {
        s = step(&s, *site).map_err(err)?;
        let after = typecheck_program(file, &s.to_term(), mode)
            .map_err(|e| format!("after step {} ({site}) the state `{}` is ill-typed: {e}", k + 1, s.print()))?;
        let ok = if mode.has_effects() {
            subtype_pair(&dom, (&after.ty, &after.effect), (&before.ty, &before.effect))
        } else {
            after.ty == before.ty
        };
        if !ok {
            return Err(format!(
                "after step {} ({site}) the type changed from ({}, {}) to ({}, {})",
                k + 1,
                before.ty,
                before.effect,
                after.ty,
                after.effect
            ));
        }
    }
    Ok(())
}

/// Exhaustive exploration finds at most one normal form and no diamond
/// violation, within the state budget.
pub fn check_confluence(file: &SourceFile) -> Result<(), String> {
    let s = MachineState::new(&file.program).map_err(err)?;
    let r = explore(&s, STATE_BUDGET).map_err(err)?;
    if r.budget_exceeded {
        return Err(format!("state budget of {STATE_BUDGET} exceeded"));
    }
    if r.normal_forms.len() > 1 {
        return Err(format!("{} normal forms: {}", r.normal_forms.len(), r.normal_form_prints.join(" ; ")));
    }
    if let Some(v) = r.violations.first() {
        return Err(format!(
            "{} diamond violations, first at `{}` between {} and {}",
            r.violations.len(),
            v.state,
            v.left,
            v.right
        ));
    }
    Ok(())
}

/// A seeded run and the leftmost run of the translation both reach a
/// normal form within the step budget.
pub fn check_termination(file: &SourceFile, seed: u64) -> Result<(), String> {
    let s = MachineState::new(&file.program).map_err(err)?;
    let t = run(&s, Scheduler::Seeded(seed), STEP_BUDGET).map_err(err)?;
    if t.outcome != Outcome::NormalForm {
        return Err(format!("no normal form within {STEP_BUDGET} steps"));
    }
    let report = typecheck(file, Mode::stratified()).map_err(err)?;
    let target = forget_file(file, &report.decorated).map_err(err)?;
    let (_, _, normal) = i_run(&IState::new(&target.program), STEP_BUDGET).map_err(err)?;
    if !normal {
        return Err(format!("translation has no normal form within {STEP_BUDGET} steps"));
    }
    Ok(())
}

/// The translation is typable at the translated type with the same effect,
/// and every source step of a full seeded run is matched by one target
/// step.
pub fn check_simulation_property(file: &SourceFile, seed: u64) -> Result<(), String> {
    let report = typecheck(file, Mode::stratified()).map_err(err)?;
    let target = forget_file(file, &report.decorated).map_err(err)?;
    let (ty, eff) = i_typecheck_in(&target.regions, &target.vars, &target.program)
        .map_err(|e| format!("translation `{}` is ill-typed: {e}", target.program))?;
    let want = forget_type(&report.ty);
    let dom: Effect = file.regions.iter().map(|d| d.name.clone()).collect();
    if !i_subtype(&dom, &ty, &want) || eff != report.effect {
        return Err(format!("translation has ({ty}, {eff}), expected ({want}, {})", report.effect));
    }
    let v = check_simulation(file, Scheduler::Seeded(seed), STEP_BUDGET).map_err(err)?;
    if !v.is_simulated() {
        return Err(format!("simulation failed:\n{v}"));
    }
    if v.source_outcome != Outcome::NormalForm {
        return Err(format!("source run did not finish within {STEP_BUDGET} steps"));
    }
    Ok(())
}

/// A seeded run reaches quiescence and the final state classifies as
/// values and blocked reads.
pub fn check_progress(file: &SourceFile, seed: u64) -> Result<(), String> {
    let s = MachineState::new(&file.program).map_err(err)?;
    let t = run(&s, Scheduler::Seeded(seed), STEP_BUDGET).map_err(err)?;
    if t.outcome != Outcome::NormalForm {
        return Err(format!("no normal form within {STEP_BUDGET} steps"));
    }
    classify_stuck(&t.last).map(|_| ()).map_err(err)
}

/// Printing then parsing gives back the file up to renaming of bound
/// variables, and printing is stable.
pub fn check_roundtrip(file: &SourceFile) -> Result<(), String> {
    let printed = print(file);
    let back = parse(&printed).map_err(|e| format!("printed file does not parse: {e}"))?;
    if back.regions != file.regions || back.vars != file.vars {
        return Err("preamble changed after printing and parsing".into());
    }
    if !alpha_eq(&back.program, &file.program) {
        return Err(format!("program changed: `{}` became `{}`", file.program, back.program));
    }
    let again = print(&back);
    if again != printed {
        return Err(format!("printing is not stable: `{printed}` then `{again}`"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for p in Property::ALL {
            assert_eq!(Property::from_name(p.name()), Some(p));
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let cfg = GenConfig::new(Mode::stratified(), 11);
        assert_eq!(prop_termination(20, &cfg), prop_termination(20, &cfg));
    }

    #[test]
    fn unit_passes_everything() {
        let f = SourceFile::new(crate::syntax::Term::Unit);
        for p in Property::ALL {
            assert_eq!(p.check(&f, p.default_mode(), 0), Ok(()), "{p}");
        }
    }
}
