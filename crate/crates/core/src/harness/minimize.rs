//! Greedy shrinking of failing files.

use crate::surface::SourceFile;
use crate::syntax::Term;
use crate::typing::{typecheck, Mode};

/// Upper bound on the candidates tried while shrinking one file.
const MAX_CANDIDATES: usize = 2000;

fn children(t: &Term) -> Vec<&Term> {
    match t {
        Term::Unit | Term::Var(_) | Term::Get(_) => vec![],
        Term::Lam { body, .. } | Term::Bang(body) | Term::Nu { body, .. } => vec![body],
        Term::App(a, b) | Term::Par(a, b) => vec![a, b],
        Term::LetBang { bound, body, .. } => vec![bound, body],
        Term::Set { value, .. } | Term::Store { value, .. } => vec![value],
    }
}

fn subterm(t: &Term, idx: usize) -> Option<&Term> {
    nth(t, idx, &mut 0)
}

fn nth<'a>(t: &'a Term, idx: usize, k: &mut usize) -> Option<&'a Term> {
    if *k == idx {
        return Some(t);
    }
    *k += 1;
    children(t).into_iter().find_map(|c| nth(c, idx, k))
}

/// Copy of `t` with its `idx`-th subterm in pre-order replaced.
fn replace(t: &Term, idx: usize, new: &Term, k: &mut usize) -> Term {
    if *k == idx {
        *k += t.size();
        return new.clone();
    }
    *k += 1;
    let mut go = |s: &Term| Box::new(replace(s, idx, new, k));
    match t {
        Term::Unit | Term::Var(_) | Term::Get(_) => t.clone(),
        Term::Lam { param, ty, body } => Term::Lam { param: param.clone(), ty: ty.clone(), body: go(body) },
        Term::Bang(m) => Term::Bang(go(m)),
        Term::Nu { name, region, content, body } => {
            Term::Nu { name: name.clone(), region: region.clone(), content: content.clone(), body: go(body) }
        }
        Term::App(a, b) => {
            let a = go(a);
            Term::App(a, go(b))
        }
        Term::Par(a, b) => {
            let a = go(a);
            Term::Par(a, go(b))
        }
        Term::LetBang { name, bound, body } => {
            let bound = go(bound);
            Term::LetBang { name: name.clone(), bound, body: go(body) }
        }
        Term::Set { addr, mode, value } => Term::Set { addr: addr.clone(), mode: *mode, value: go(value) },
        Term::Store { addr, mode, value } => Term::Store { addr: addr.clone(), mode: *mode, value: go(value) },
    }
}

/// Shrinks `file` while it keeps typechecking under `mode` and `fails`
/// keeps reporting a failure. Returns the smallest file found and its
/// failure explanation.
pub fn minimize(
    file: &SourceFile,
    mode: Mode,
    explanation: String,
    fails: &dyn Fn(&SourceFile) -> Option<String>,
) -> (SourceFile, String) {
    let mut best = file.clone();
    let mut why = explanation;
    let mut budget = MAX_CANDIDATES;
    let accept = |cand: SourceFile, best: &mut SourceFile, why: &mut String, budget: &mut usize| -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if cand.program.check_static_stores().is_err() || typecheck(&cand, mode).is_err() {
            return false;
        }
        match fails(&cand) {
            Some(w) => {
                *best = cand;
                *why = w;
                true
            }
            None => false,
        }
    };
    'outer: loop {
        let size = best.program.size();
        for idx in 0..size {
            let Some(sub) = subterm(&best.program, idx) else { break };
            let mut cands: Vec<Term> = children(sub).into_iter().cloned().collect();
            if *sub != Term::Unit {
                cands.push(Term::Unit);
            }
            for c in cands {
                let program = replace(&best.program, idx, &c, &mut 0);
                if program.size() >= size {
                    continue;
                }
                if accept(best.with_program(program), &mut best, &mut why, &mut budget) {
                    continue 'outer;
                }
            }
        }
        for i in 0..best.vars.len() {
            let mut cand = best.clone();
            cand.vars.remove(i);
            if accept(cand, &mut best, &mut why, &mut budget) {
                continue 'outer;
            }
        }
        for i in 0..best.regions.len() {
            let mut cand = best.clone();
            let r = cand.regions.remove(i).name;
            cand.vars.retain(|v| !v.ty.regions().contains(&r));
            if accept(cand, &mut best, &mut why, &mut budget) {
                continue 'outer;
            }
        }
        break;
    }
    (best, why)
}
