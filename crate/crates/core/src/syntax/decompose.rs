//! Unique decomposition of a thread as `E[Δ]` under the call-by-value
//! evaluation contexts `E ::= [] | E M | V E | !E | let !x = E in M`.

use super::{Name, SyntaxError, Term, Var, Volatility};

/// Thread-local redexes. Reads are paired with stores by the machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocalRedex {
    Beta,
    LetBang,
    SetV,
    SetP,
}

/// Irreducible shapes that are neither values nor reads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Opaque {
    /// The hole holds an application or `let !` headed by a variable.
    HeadVariable(Name),
    /// The hole holds a parallel composition.
    ParallelInHole,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    Redex(LocalRedex),
    Value,
    BlockedRead(Var),
    Opaque(Opaque),
}

/// Mutable reference to the hole of the evaluation context. For a value
/// the whole term is returned.
pub fn hole_mut(t: &mut Term) -> &mut Term {
    let descend = match t {
        Term::App(f, a) => !f.is_value() || !a.is_value(),
        Term::Bang(m) => !m.is_value(),
        Term::LetBang { bound, .. } => !bound.is_value(),
        _ => false,
    };
    if !descend {
        return t;
    }
    match t {
        Term::App(f, a) => {
            if !f.is_value() {
                hole_mut(f)
            } else {
                hole_mut(a)
            }
        }
        Term::Bang(m) => hole_mut(m),
        Term::LetBang { bound, .. } => hole_mut(bound),
        _ => unreachable!(),
    }
}

fn hole(t: &Term) -> &Term {
    match t {
        Term::App(f, _) if !f.is_value() => hole(f),
        Term::App(_, a) if !a.is_value() => hole(a),
        Term::Bang(m) if !m.is_value() => hole(m),
        Term::LetBang { bound, .. } if !bound.is_value() => hole(bound),
        _ => t,
    }
}

/// Classifies a store-free, parallel-free thread.
pub fn decompose(thread: &Term) -> Result<Decomposition, SyntaxError> {
    if thread.is_value() {
        return Ok(Decomposition::Value);
    }
    Ok(match hole(thread) {
        Term::App(f, _) => match &**f {
            Term::Var(v) => Decomposition::Opaque(Opaque::HeadVariable(v.name.clone())),
            _ => Decomposition::Redex(LocalRedex::Beta),
        },
        Term::LetBang { bound, .. } => match &**bound {
            Term::Var(v) => Decomposition::Opaque(Opaque::HeadVariable(v.name.clone())),
            _ => Decomposition::Redex(LocalRedex::LetBang),
        },
        Term::Get(a) => Decomposition::BlockedRead(a.clone()),
        Term::Set { mode: Volatility::Volatile, .. } => Decomposition::Redex(LocalRedex::SetV),
        Term::Set { mode: Volatility::Persistent, .. } => Decomposition::Redex(LocalRedex::SetP),
        Term::Par(..) => Decomposition::Opaque(Opaque::ParallelInHole),
        Term::Nu { .. } => {
            return Err(SyntaxError::Malformed(
                "restriction in evaluation position (canonicalize first)".into(),
            ))
        }
        Term::Store { .. } => {
            return Err(SyntaxError::Malformed("store inside a thread".into()));
        }
        Term::Unit | Term::Var(_) | Term::Lam { .. } | Term::Bang(_) => {
            unreachable!("values are handled above")
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Type;

    fn id() -> Term {
        Term::lam("x", Type::One, Term::var("x"))
    }

    #[test]
    fn beta_redex() {
        assert_eq!(decompose(&Term::app(id(), Term::Unit)), Ok(Decomposition::Redex(LocalRedex::Beta)));
    }

    #[test]
    fn unit_is_a_value() {
        assert_eq!(decompose(&Term::Unit), Ok(Decomposition::Value));
        assert_eq!(decompose(&Term::bang(Term::bang(Term::Unit))), Ok(Decomposition::Value));
    }

    #[test]
    fn read_in_argument_position_blocks() {
        let t = Term::app(Term::lam("z", Type::One, Term::var("n")), Term::get("y"));
        assert_eq!(decompose(&t), Ok(Decomposition::BlockedRead(Var::new("y"))));
    }

    #[test]
    fn function_position_is_evaluated_first() {
        let t = Term::app(Term::app(id(), id()), Term::get("y"));
        assert_eq!(decompose(&t), Ok(Decomposition::Redex(LocalRedex::Beta)));
    }

    #[test]
    fn let_bang_and_writes() {
        let t = Term::let_bang("x", Term::bang(Term::Unit), Term::var("x"));
        assert_eq!(decompose(&t), Ok(Decomposition::Redex(LocalRedex::LetBang)));
        let t = Term::bang(Term::set("x", Volatility::Persistent, Term::Unit));
        assert_eq!(decompose(&t), Ok(Decomposition::Redex(LocalRedex::SetP)));
        let t = Term::let_bang("f", Term::var("g"), Term::Unit);
        assert_eq!(decompose(&t), Ok(Decomposition::Opaque(Opaque::HeadVariable(Name::new("g")))));
    }

    #[test]
    fn embedded_store_is_malformed() {
        let t = Term::app(id(), Term::store("x", Volatility::Volatile, Term::Unit));
        assert!(decompose(&t).is_err());
    }

    #[test]
    fn hole_mut_reaches_the_redex() {
        let mut t = Term::app(Term::lam("z", Type::One, Term::Unit), Term::get("y"));
        *hole_mut(&mut t) = Term::Unit;
        assert_eq!(t, Term::app(Term::lam("z", Type::One, Term::Unit), Term::Unit));
    }
}
