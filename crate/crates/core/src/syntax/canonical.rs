//! Canonical forms for structural equivalence.
//!
//! Every program is equivalent to `nu x1..xn. (T1 | .. | Tk | S1 | .. | Sm)`
//! where the `Ti` are threads with no restriction in evaluation position
//! and the `Sj` are stores. The restriction prefix is treated as a set and
//! the components as a multiset; [`CanonicalProgram::fingerprint`] picks a
//! representative string for the whole equivalence class.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::print::TermPrinter;
use super::{fresh_name, hole_mut, rename, Name, Region, SyntaxError, Term, Type, Var, Volatility};

/// One extruded `nu x : Reg region content`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Binder {
    pub name: Name,
    pub region: Region,
    pub content: Type,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StoreEntry {
    pub addr: Var,
    pub mode: Volatility,
    pub value: Term,
}

impl StoreEntry {
    pub fn to_term(&self) -> Term {
        Term::Store { addr: self.addr.clone(), mode: self.mode, value: Box::new(self.value.clone()) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalProgram {
    pub binders: Vec<Binder>,
    pub threads: Vec<Term>,
    pub stores: Vec<StoreEntry>,
}

/// Largest number of binder orderings tried when looking for the minimal
/// fingerprint among indistinguishable binders.
const PERMUTATION_CAP: usize = 720;

struct Flattener {
    binders: Vec<Binder>,
    /// Names free in the whole program.
    free: BTreeSet<Name>,
    /// Every name that fresh binders must avoid.
    avoid: HashSet<Name>,
}

impl Flattener {
    fn new(program: &Term, binders: Vec<Binder>) -> Self {
        let mut avoid = HashSet::new();
        program.collect_names(&mut avoid);
        avoid.extend(binders.iter().map(|b| b.name.clone()));
        Flattener { binders, free: program.free_vars(), avoid }
    }

    fn extrude(&mut self, name: &Name, region: &Region, content: &Type, body: &Term) -> Term {
        let clash = self.free.contains(name) || self.binders.iter().any(|b| &b.name == name);
        let (name, body) = if clash {
            let fresh = fresh_name(name, |n| self.avoid.contains(n));
            let body = rename(body, name, &fresh);
            (fresh, body)
        } else {
            (name.clone(), body.clone())
        };
        self.avoid.insert(name.clone());
        self.binders.push(Binder { name, region: region.clone(), content: content.clone() });
        body
    }

    fn flatten(&mut self, t: &Term, threads: &mut Vec<Term>, stores: &mut Vec<StoreEntry>) -> Result<(), SyntaxError> {
        match t {
            Term::Par(a, b) => {
                self.flatten(a, threads, stores)?;
                self.flatten(b, threads, stores)
            }
            Term::Nu { name, region, content, body } => {
                let body = self.extrude(name, region, content, body);
                self.flatten(&body, threads, stores)
            }
            Term::Store { addr, mode, value } => {
                if value.contains_store() {
                    return Err(SyntaxError::Malformed("store nested inside a stored value".into()));
                }
                stores.push(StoreEntry { addr: addr.clone(), mode: *mode, value: (**value).clone() });
                Ok(())
            }
            other => {
                let mut thread = other.clone();
                loop {
                    let hole = hole_mut(&mut thread);
                    let Term::Nu { name, region, content, body } = hole else { break };
                    let (name, region, content, body) =
                        (name.clone(), region.clone(), content.clone(), (**body).clone());
                    *hole = self.extrude(&name, &region, &content, &body);
                    // extrusion at the top may expose a parallel program
                    if matches!(thread, Term::Par(..) | Term::Store { .. } | Term::Nu { .. }) {
                        return self.flatten(&thread, threads, stores);
                    }
                }
                if thread.contains_store() {
                    return Err(SyntaxError::Malformed(format!(
                        "store in non-static position inside `{thread}`"
                    )));
                }
                threads.push(thread);
                Ok(())
            }
        }
    }
}

/// Flattens a program into its canonical shape.
pub fn canonicalize(t: &Term) -> Result<CanonicalProgram, SyntaxError> {
    let mut f = Flattener::new(t, Vec::new());
    let mut threads = Vec::new();
    let mut stores = Vec::new();
    f.flatten(t, &mut threads, &mut stores)?;
    Ok(CanonicalProgram { binders: f.binders, threads, stores })
}

/// Structural equivalence, decided by comparing fingerprints.
pub fn struct_equiv(a: &Term, b: &Term) -> Result<bool, SyntaxError> {
    Ok(canonicalize(a)?.fingerprint() == canonicalize(b)?.fingerprint())
}

impl CanonicalProgram {
    /// `nu x1..xn. (T1 | .. | Tk | S1 | .. | Sm)`, right-nested.
    pub fn to_term(&self) -> Term {
        let mut parts: Vec<Term> = self.threads.clone();
        parts.extend(self.stores.iter().map(StoreEntry::to_term));
        let mut body = match parts.pop() {
            None => Term::Unit,
            Some(last) => parts.into_iter().rev().fold(last, |acc, p| Term::par(p, acc)),
        };
        for b in self.binders.iter().rev() {
            body = Term::Nu {
                name: b.name.clone(),
                region: b.region.clone(),
                content: b.content.clone(),
                body: Box::new(body),
            };
        }
        body
    }

    /// Replaces thread `index` by `replacement` and restores the canonical
    /// shape. New threads take the place of the old one, new stores are
    /// appended, and fresh binders are appended to the prefix.
    pub fn absorb(&mut self, index: usize, replacement: Term) -> Result<(), SyntaxError> {
        let whole = Term::par(self.to_term(), replacement.clone());
        let mut f = Flattener::new(&whole, self.binders.clone());
        for b in &self.binders {
            f.free.remove(&b.name);
        }
        let mut threads = Vec::new();
        let mut stores = Vec::new();
        f.flatten(&replacement, &mut threads, &mut stores)?;
        self.binders = f.binders;
        self.threads.splice(index..index + 1, threads);
        self.stores.extend(stores);
        Ok(())
    }

    pub fn binder(&self, name: &Name) -> Option<&Binder> {
        self.binders.iter().find(|b| &b.name == name)
    }

    /// Representative string of the structural equivalence class. Bound
    /// names are replaced by positions and decorations are ignored.
    pub fn fingerprint(&self) -> String {
        let comps = self.components();
        let used: Vec<usize> = (0..self.binders.len())
            .filter(|&i| comps.iter().any(|c| c.has_free(&self.binders[i].name)))
            .collect();
        let mut unused: Vec<String> = (0..self.binders.len())
            .filter(|i| !used.contains(i))
            .map(|i| binder_sig(&self.binders[i]))
            .collect();
        unused.sort();

        let groups = self.refine(&comps, &used);
        let mut best: Option<String> = None;
        let mut tried = 0usize;
        let mut order: Vec<Vec<usize>> = groups.clone();
        loop {
            let flat: Vec<usize> = order.iter().flatten().copied().collect();
            let s = self.render(&comps, &flat, &unused);
            if best.as_ref().is_none_or(|b| s < *b) {
                best = Some(s);
            }
            tried += 1;
            if tried >= PERMUTATION_CAP || !next_group_permutation(&mut order) {
                break;
            }
        }
        best.unwrap_or_default()
    }

    fn components(&self) -> Vec<Term> {
        let mut comps = self.threads.clone();
        comps.extend(self.stores.iter().map(StoreEntry::to_term));
        comps
    }

    fn render(&self, comps: &[Term], order: &[usize], unused: &[String]) -> String {
        let labels: BTreeMap<Name, String> = order
            .iter()
            .enumerate()
            .map(|(k, &i)| (self.binders[i].name.clone(), format!("${k}")))
            .collect();
        let lookup = |n: &Name| labels.get(n).cloned();
        let printer = TermPrinter { canonical: true, decorations: false, free: Some(&lookup) };
        let mut parts: Vec<String> = comps.iter().map(|c| printer.print(c)).collect();
        parts.sort();
        let mut out = String::new();
        for (k, &i) in order.iter().enumerate() {
            out.push_str(&format!("${k}:{};", binder_sig(&self.binders[i])));
        }
        for u in unused {
            out.push_str(&format!("_:{u};"));
        }
        out.push_str(" || ");
        out.push_str(&parts.join(" | "));
        out
    }

    /// Partitions the used binders into ordered groups of binders that no
    /// cheap invariant distinguishes.
    fn refine(&self, comps: &[Term], used: &[usize]) -> Vec<Vec<usize>> {
        let mut class: BTreeMap<usize, String> =
            used.iter().map(|&i| (i, binder_sig(&self.binders[i]))).collect();
        for _ in 0..3 {
            let mut next = BTreeMap::new();
            for &i in used {
                let labels: BTreeMap<Name, String> = used
                    .iter()
                    .map(|&j| {
                        let l = if j == i { "@".to_string() } else { format!("?{}", class[&j]) };
                        (self.binders[j].name.clone(), l)
                    })
                    .collect();
                let lookup = |n: &Name| labels.get(n).cloned();
                let printer = TermPrinter { canonical: true, decorations: false, free: Some(&lookup) };
                let mut parts: Vec<String> = comps
                    .iter()
                    .filter(|c| c.has_free(&self.binders[i].name))
                    .map(|c| printer.print(c))
                    .collect();
                parts.sort();
                next.insert(i, format!("{}<{}>", class[&i], parts.join("|")));
            }
            // compress long keys into ranks so nesting stays small
            let distinct: BTreeSet<&String> = next.values().collect();
            let rank: BTreeMap<&String, usize> = distinct.into_iter().enumerate().map(|(k, s)| (s, k)).collect();
            let compressed: BTreeMap<usize, String> =
                next.iter().map(|(&i, s)| (i, format!("c{}", rank[s]))).collect();
            let stable = count_classes(&compressed) == count_classes(&class);
            // ranks are ordered by the full key, keep that order for sorting
            class = next.iter().map(|(&i, s)| (i, format!("{:06}{}", rank[s], binder_sig(&self.binders[i])))).collect();
            if stable {
                break;
            }
        }
        let mut grouped: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, c) in class {
            grouped.entry(c).or_default().push(i);
        }
        grouped.into_values().collect()
    }
}

fn binder_sig(b: &Binder) -> String {
    format!("Reg {} {}", b.region, b.content)
}

fn count_classes(m: &BTreeMap<usize, String>) -> usize {
    m.values().collect::<BTreeSet<_>>().len()
}

/// Advances to the next combination of per-group permutations, in the
/// manner of an odometer. Returns false once every combination was seen.
fn next_group_permutation(groups: &mut [Vec<usize>]) -> bool {
    for g in groups.iter_mut().rev() {
        if next_permutation(g) {
            return true;
        }
        // next_permutation wrapped this group back to ascending order
    }
    false
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Volatility::*;

    fn reg1(name: &str, body: Term) -> Term {
        Term::nu(name, "r", Type::One, body)
    }

    #[test]
    fn flattens_parallel_and_restriction() {
        let t = reg1("x", Term::par(Term::get("x"), Term::store("x", Volatile, Term::Unit)));
        let c = canonicalize(&t).unwrap();
        assert_eq!(c.binders.len(), 1);
        assert_eq!(c.threads, vec![Term::get("x")]);
        assert_eq!(c.stores.len(), 1);
    }

    #[test]
    fn extrudes_from_evaluation_context() {
        // (\z:1. *) (nu x. get(x))  ==  nu x. (\z:1. *) get(x)
        let t = Term::app(Term::lam("z", Type::One, Term::Unit), reg1("x", Term::get("x")));
        let c = canonicalize(&t).unwrap();
        assert_eq!(c.binders.len(), 1);
        assert_eq!(c.threads, vec![Term::app(Term::lam("z", Type::One, Term::Unit), Term::get("x"))]);
    }

    #[test]
    fn renames_clashing_binders() {
        let t = Term::par(reg1("x", Term::get("x")), reg1("x", Term::get("x")));
        let c = canonicalize(&t).unwrap();
        assert_eq!(c.binders.len(), 2);
        assert_ne!(c.binders[0].name, c.binders[1].name);
        let t = Term::par(reg1("x", Term::get("x")), Term::var("x"));
        let c = canonicalize(&t).unwrap();
        assert_ne!(c.binders[0].name.as_str(), "x");
        assert_eq!(c.threads[1], Term::var("x"));
    }

    #[test]
    fn equivalence_up_to_commutation_and_renaming() {
        let a = reg1("x", Term::par(Term::get("x"), Term::store("x", Persistent, Term::Unit)));
        let b = Term::nu(
            "y",
            "r",
            Type::One,
            Term::par(Term::store("y", Persistent, Term::Unit), Term::get("y")),
        );
        assert!(struct_equiv(&a, &b).unwrap());
        let c = reg1("x", Term::par(Term::get("x"), Term::store("x", Volatile, Term::Unit)));
        assert!(!struct_equiv(&a, &c).unwrap());
    }

    #[test]
    fn equivalence_ignores_binder_order() {
        let body = |p: &str, q: &str| {
            Term::par(Term::get(p), Term::par(Term::store(p, Volatile, Term::Unit), Term::store(q, Volatile, Term::Unit)))
        };
        let a = reg1("x", reg1("y", body("x", "y")));
        let b = reg1("y", reg1("x", body("x", "y")));
        let c = reg1("x", reg1("y", body("y", "x")));
        assert!(struct_equiv(&a, &b).unwrap());
        assert!(struct_equiv(&a, &c).unwrap());
    }

    #[test]
    fn stores_in_threads_are_rejected() {
        let t = Term::app(Term::var("f"), Term::store("x", Volatile, Term::Unit));
        assert!(canonicalize(&t).is_err());
    }

    #[test]
    fn absorb_keeps_thread_positions() {
        let t = Term::par(Term::var("a"), Term::par(Term::var("b"), Term::var("c")));
        let mut c = canonicalize(&t).unwrap();
        c.absorb(1, Term::par(Term::var("b1"), Term::par(reg1("x", Term::get("x")), Term::store("q", Volatile, Term::Unit))))
            .unwrap();
        assert_eq!(c.threads, vec![Term::var("a"), Term::var("b1"), Term::get("x"), Term::var("c")]);
        assert_eq!(c.stores.len(), 1);
        assert_eq!(c.binders.len(), 1);
    }

    #[test]
    fn absorb_renames_against_existing_binders() {
        let mut c = canonicalize(&reg1("x", Term::get("x"))).unwrap();
        c.absorb(0, reg1("x", Term::par(Term::get("x"), Term::var("x")))).unwrap();
        assert_eq!(c.binders.len(), 2);
        assert_ne!(c.binders[0].name, c.binders[1].name);
    }

    #[test]
    fn to_term_round_trips() {
        let t = reg1("x", Term::par(Term::get("x"), Term::par(Term::Unit, Term::store("x", Volatile, Term::Unit))));
        let c = canonicalize(&t).unwrap();
        assert_eq!(canonicalize(&c.to_term()).unwrap(), c);
        assert!(struct_equiv(&t, &c.to_term()).unwrap());
    }

    #[test]
    fn permutations_enumerate_all_orders() {
        let mut groups = vec![vec![0, 1, 2], vec![3, 4]];
        let mut n = 1;
        while next_group_permutation(&mut groups) {
            n += 1;
        }
        assert_eq!(n, 12);
        assert_eq!(groups, vec![vec![0, 1, 2], vec![3, 4]]);
    }
}
