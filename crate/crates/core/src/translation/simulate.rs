//! Lockstep execution of a program and its translation.

use std::collections::BTreeMap;
use std::fmt;

use crate::machine::{run, step, MachineState, Outcome, RedexSite, Scheduler};
use crate::surface::SourceFile;
use crate::syntax::Region;
use crate::typing::{typecheck, Mode};

use super::{forget_term, i_enabled, i_step, ISite, IState, ITerm, TranslationError};

/// One matched step. `residual` holds the target stores that have no
/// counterpart in the image of the source state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationStep {
    pub source: RedexSite,
    pub target: ISite,
    pub residual: Vec<(Region, ITerm)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimulationOutcome {
    /// Every one of the `n` source steps was matched.
    Simulated(usize),
    /// No target step matches source step `step` (counted from 1).
    Mismatch { step: usize, source: String, target: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationVerdict {
    pub steps: Vec<SimulationStep>,
    pub outcome: SimulationOutcome,
    /// Whether the source run stopped at a normal form or at the budget.
    pub source_outcome: Outcome,
}

impl SimulationVerdict {
    pub fn is_simulated(&self) -> bool {
        matches!(self.outcome, SimulationOutcome::Simulated(_))
    }
}

impl fmt::Display for SimulationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, s) in self.steps.iter().enumerate() {
            write!(f, "step {}: {} ~ {}", n + 1, s.source, s.target)?;
            if !s.residual.is_empty() {
                let rs: Vec<String> = s.residual.iter().map(|(r, v)| format!("[{r} <= {v}]")).collect();
                write!(f, "; residual {}", rs.join(" | "))?;
            }
            writeln!(f)?;
        }
        match &self.outcome {
            SimulationOutcome::Simulated(n) => writeln!(f, "simulated {n} steps ({})", self.source_outcome),
            SimulationOutcome::Mismatch { step, source, target } => {
                writeln!(f, "mismatch at step {step}\n  source image: {source}\n  target: {target}")
            }
        }
    }
}

fn counts(keys: Vec<String>) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for k in keys {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

/// The stores of `target` left over once those of `image` are taken out,
/// or `None` when the threads differ or some image store is missing.
fn related(image: &IState, target: &IState) -> Option<Vec<(Region, ITerm)>> {
    if image.thread_keys() != target.thread_keys() {
        return None;
    }
    let mut need = counts(image.store_keys());
    let mut residual = Vec::new();
    for (r, v) in &target.stores {
        let k = format!("{r}<={}", v.alpha_key());
        match need.get_mut(&k) {
            Some(c) if *c > 0 => *c -= 1,
            _ => residual.push((r.clone(), v.clone())),
        }
    }
    need.values().all(|c| *c == 0).then_some(residual)
}

fn image(s: &MachineState) -> Result<IState, TranslationError> {
    Ok(IState::new(&forget_term(&s.to_term())?))
}

/// Runs the decorated program of `file` under `scheduler` and matches every
/// source step with exactly one step of the translated program.
pub fn check_simulation(
    file: &SourceFile,
    scheduler: Scheduler,
    max_steps: usize,
) -> Result<SimulationVerdict, TranslationError> {
    let report = typecheck(file, Mode::stratified()).map_err(|e| TranslationError::Source(e.to_string()))?;
    let mut src = MachineState::new(&report.decorated)?;
    let trace = run(&src, scheduler, max_steps)?;
    let mut tgt = image(&src)?;
    let mut steps = Vec::new();
    for (k, (site, _)) in trace.steps.iter().enumerate() {
        src = step(&src, *site)?;
        let want = image(&src)?;
        let mut candidates = i_enabled(&tgt);
        candidates.sort_by_key(|c| c.thread != site.thread);
        let mut matched = None;
        for c in candidates {
            let next = i_step(&tgt, c)?;
            if let Some(residual) = related(&want, &next) {
                matched = Some((c, next, residual));
                break;
            }
        }
        let Some((c, next, residual)) = matched else {
            return Ok(SimulationVerdict {
                steps,
                outcome: SimulationOutcome::Mismatch { step: k + 1, source: want.to_string(), target: tgt.to_string() },
                source_outcome: trace.outcome,
            });
        };
        steps.push(SimulationStep { source: *site, target: c, residual });
        tgt = next;
    }
    let n = steps.len();
    Ok(SimulationVerdict { steps, outcome: SimulationOutcome::Simulated(n), source_outcome: trace.outcome })
}
