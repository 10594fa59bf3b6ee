//! Exhaustive breadth-first exploration with a one-step diamond check.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::{enabled, step, MachineError, MachineState, RedexSite};

/// Two sites of a state whose reducts cannot be joined in at most one
/// step each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub state: String,
    pub left: RedexSite,
    pub right: RedexSite,
}

#[derive(Clone, Debug, Default)]
pub struct ExploreResult {
    pub states: usize,
    /// Fingerprints of the reachable states without enabled sites.
    pub normal_forms: BTreeSet<String>,
    /// Readable prints of the same normal forms.
    pub normal_form_prints: Vec<String>,
    pub violations: Vec<Violation>,
    pub budget_exceeded: bool,
}

struct Graph {
    /// Successor fingerprints per state, with the site that produced them.
    succ: HashMap<String, Vec<(RedexSite, String)>>,
    states: HashMap<String, MachineState>,
}

impl Graph {
    fn successors(&mut self, fp: &str) -> Result<&Vec<(RedexSite, String)>, MachineError> {
        if !self.succ.contains_key(fp) {
            let s = self.states[fp].clone();
            let mut out = Vec::new();
            for site in enabled(&s) {
                let t = step(&s, site)?;
                let tfp = t.fingerprint();
                self.states.entry(tfp.clone()).or_insert(t);
                out.push((site, tfp));
            }
            self.succ.insert(fp.to_string(), out);
        }
        Ok(&self.succ[fp])
    }
}

/// Explores every interleaving from `s`, visiting at most `max_states`
/// distinct states up to structural equivalence.
pub fn explore(s: &MachineState, max_states: usize) -> Result<ExploreResult, MachineError> {
    let mut g = Graph { succ: HashMap::new(), states: HashMap::new() };
    let root = s.fingerprint();
    g.states.insert(root.clone(), s.clone());
    let mut seen: HashSet<String> = HashSet::from([root.clone()]);
    let mut queue = VecDeque::from([root]);
    let mut res = ExploreResult::default();
    while let Some(fp) = queue.pop_front() {
        res.states += 1;
        let succ = g.successors(&fp)?.clone();
        if succ.is_empty() {
            res.normal_form_prints.push(g.states[&fp].print());
            res.normal_forms.insert(fp.clone());
            continue;
        }
        for i in 0..succ.len() {
            for j in i + 1..succ.len() {
                let (a, b) = (&succ[i].1, &succ[j].1);
                if a == b {
                    continue;
                }
                let mut left: HashSet<String> = g.successors(a)?.iter().map(|(_, f)| f.clone()).collect();
                left.insert(a.clone());
                let right = g.successors(b)?;
                let joins = left.contains(b) || right.iter().any(|(_, f)| left.contains(f));
                if !joins {
                    res.violations.push(Violation {
                        state: g.states[&fp].print(),
                        left: succ[i].0,
                        right: succ[j].0,
                    });
                }
            }
        }
        for (_, t) in succ {
            if seen.contains(&t) {
                continue;
            }
            if seen.len() >= max_states {
                res.budget_exceeded = true;
                continue;
            }
            seen.insert(t.clone());
            queue.push_back(t);
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse;

    fn state(src: &str) -> MachineState {
        MachineState::new(&parse(src).unwrap().program).unwrap()
    }

    #[test]
    fn unit() {
        let r = explore(&state("program *"), 10).unwrap();
        assert_eq!(r.states, 1);
        assert_eq!(r.normal_forms.len(), 1);
    }

    #[test]
    fn persistent_race_commutes() {
        let src = "region r persistent : !(1 -o 1) family wo\n\
                   program nu x : Reg r !(1 -o 1). ((let !f = get(x) in f *) | (let !g = get(x) in g *) | [x <= !(\\y:1. y)])";
        let r = explore(&state(src), 10_000).unwrap();
        assert_eq!(r.normal_forms.len(), 1);
        assert!(r.violations.is_empty());
        assert!(!r.budget_exceeded);
    }

    #[test]
    fn volatile_race_has_two_outcomes() {
        let src = "region r volatile : 1 family aff\nvar x : (inf, Reg r 1)\n\
                   program (\\a:1. a) get(x) | get(x) | [x <- *]";
        let r = explore(&state(src), 10_000).unwrap();
        assert_eq!(r.normal_forms.len(), 2, "{:?}", r.normal_form_prints);
    }

    #[test]
    fn budget_is_flagged() {
        let src = "region r persistent : !(1 -{r}> 1) family wo\n\
                   program nu x : Reg r !(1 -{r}> 1). pset(x, !(\\y:1. let !f = get(x) in f y)) ; let !f = get(x) in f *";
        let r = explore(&state(src), 2).unwrap();
        assert!(r.budget_exceeded);
    }
}
