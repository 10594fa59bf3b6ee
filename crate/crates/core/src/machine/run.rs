//! Schedulers and traces.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{enabled, step, MachineError, MachineState, RedexSite};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheduler {
    /// Always fires the first enabled site.
    Leftmost,
    /// Picks uniformly among enabled sites with a seeded generator.
    Seeded(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    NormalForm,
    StepLimit,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::NormalForm => "normal form",
            Outcome::StepLimit => "step limit",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub initial: MachineState,
    /// Fired site and the fingerprint of the state it produced.
    pub steps: Vec<(RedexSite, String)>,
    /// Readable prints of the states after each step, kept for rendering.
    pub prints: Vec<String>,
    pub outcome: Outcome,
    pub last: MachineState,
}

impl Trace {
    /// One line per step: `step <n>: <kind>@thread <i> -> <program>`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (n, ((site, _), print)) in self.steps.iter().zip(&self.prints).enumerate() {
            out.push_str(&format!("step {}: {}@thread {} -> {}\n", n + 1, site.kind, site.thread, print));
        }
        out
    }
}

/// Runs until no site is enabled or `max_steps` steps were taken.
pub fn run(s: &MachineState, scheduler: Scheduler, max_steps: usize) -> Result<Trace, MachineError> {
    let mut rng = match scheduler {
        Scheduler::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Scheduler::Leftmost => None,
    };
    let mut cur = s.clone();
    let mut steps = Vec::new();
    let mut prints = Vec::new();
    loop {
        let sites = enabled(&cur);
        if sites.is_empty() {
            return Ok(Trace { initial: s.clone(), steps, prints, outcome: Outcome::NormalForm, last: cur });
        }
        if steps.len() >= max_steps {
            return Ok(Trace { initial: s.clone(), steps, prints, outcome: Outcome::StepLimit, last: cur });
        }
        let site = match rng.as_mut() {
            Some(rng) => sites[rng.gen_range(0..sites.len())],
            None => sites[0],
        };
        cur = step(&cur, site)?;
        steps.push((site, cur.fingerprint()));
        prints.push(cur.print());
    }
}
