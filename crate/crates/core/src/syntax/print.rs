//! Concrete rendering of terms.
//!
//! Precedence, loosest first: `|`, `;`, application, prefix `!` and atoms.
//! Binder forms (`\`, `let`, `nu`) extend as far right as possible, so they
//! are parenthesised unless they sit in tail position.

use super::{Name, Term, Type, Var, Volatility};

const PAR: u8 = 0;
const SEQ: u8 = 1;
const APP: u8 = 2;
const ARG: u8 = 3;

/// Renames free variables while printing; `None` keeps the name.
pub type FreeNames<'a> = &'a dyn Fn(&Name) -> Option<String>;

/// Configurable term printer.
///
/// In canonical mode every bound variable is printed as `%<depth>`, which
/// makes the output identical for α-equivalent terms.
#[derive(Default)]
pub struct TermPrinter<'a> {
    pub decorations: bool,
    pub canonical: bool,
    pub free: Option<FreeNames<'a>>,
}

impl TermPrinter<'_> {
    pub fn print(&self, t: &Term) -> String {
        let mut env = Vec::new();
        let mut out = String::new();
        self.go(t, PAR, true, &mut env, &mut out);
        out
    }

    fn name_of(&self, x: &Name, env: &[(Name, String)]) -> String {
        if let Some((_, p)) = env.iter().rev().find(|(n, _)| n == x) {
            return p.clone();
        }
        if let Some(f) = self.free {
            if let Some(s) = f(x) {
                return s;
            }
        }
        x.to_string()
    }

    fn var(&self, v: &Var, env: &[(Name, String)], out: &mut String) {
        out.push_str(&self.name_of(&v.name, env));
        if self.decorations {
            if let Some(r) = &v.region {
                out.push('^');
                out.push_str(r.as_str());
            }
        }
    }

    fn bind(&self, x: &Name, env: &mut Vec<(Name, String)>) -> String {
        let printed = if self.canonical { format!("%{}", env.len()) } else { x.to_string() };
        env.push((x.clone(), printed.clone()));
        printed
    }

    fn go(&self, t: &Term, prec: u8, tail: bool, env: &mut Vec<(Name, String)>, out: &mut String) {
        let is_binder = matches!(t, Term::Lam { .. } | Term::LetBang { .. } | Term::Nu { .. });
        let needs = match t {
            Term::Par(..) => prec > PAR,
            _ if seq_parts(t).is_some() => prec > SEQ,
            Term::App(..) => prec > APP,
            _ => is_binder && !tail,
        };
        if needs {
            out.push('(');
            self.go(t, PAR, true, env, out);
            out.push(')');
            return;
        }
        match t {
            Term::Unit => out.push('*'),
            Term::Var(v) => self.var(v, env, out),
            Term::Par(a, b) => {
                self.go(a, SEQ, false, env, out);
                out.push_str(" | ");
                self.go(b, PAR, tail, env, out);
            }
            Term::App(f, a) => {
                if let Some((first, then)) = seq_parts(t) {
                    self.go(first, APP, false, env, out);
                    out.push_str(" ; ");
                    // the sugared binder is not free in `then`, so it never
                    // needs a printed name
                    self.go(then, SEQ, tail, env, out);
                } else {
                    self.go(f, APP, false, env, out);
                    out.push(' ');
                    self.go(a, ARG, tail, env, out);
                }
            }
            Term::Bang(m) => {
                out.push('!');
                self.go(m, ARG, tail, env, out);
            }
            Term::Lam { param, ty, body } => {
                let p = self.bind(param, env);
                out.push_str(&format!("\\{p}:{ty}. "));
                self.go(body, PAR, true, env, out);
                env.pop();
            }
            Term::LetBang { name, bound, body } => {
                out.push_str("let !");
                let mut head = String::new();
                self.go(bound, PAR, true, env, &mut head);
                let p = self.bind(name, env);
                out.push_str(&format!("{p} = {head} in "));
                self.go(body, PAR, true, env, out);
                env.pop();
            }
            Term::Nu { name, region, content, body } => {
                let p = self.bind(name, env);
                out.push_str(&format!("nu {p} : {}. ", Type::reg(region.clone(), content.clone())));
                self.go(body, PAR, true, env, out);
                env.pop();
            }
            Term::Get(a) => {
                out.push_str("get(");
                self.var(a, env, out);
                out.push(')');
            }
            Term::Set { addr, mode, value } => {
                out.push_str(match mode {
                    Volatility::Volatile => "set(",
                    Volatility::Persistent => "pset(",
                });
                self.var(addr, env, out);
                out.push_str(", ");
                self.go(value, PAR, true, env, out);
                out.push(')');
            }
            Term::Store { addr, mode, value } => {
                out.push('[');
                self.var(addr, env, out);
                out.push_str(match mode {
                    Volatility::Volatile => " <- ",
                    Volatility::Persistent => " <= ",
                });
                self.go(value, PAR, true, env, out);
                out.push(']');
            }
        }
    }
}

/// Recognises `(\z:1. N) M` with `z` not free in `N`, printed as `M ; N`.
fn seq_parts(t: &Term) -> Option<(&Term, &Term)> {
    match t {
        Term::App(f, m) => match &**f {
            Term::Lam { param, ty: Type::One, body } if !body.has_free(param) => Some((m, body)),
            _ => None,
        },
        _ => None,
    }
}

pub fn term_to_string(t: &Term) -> String {
    TermPrinter::default().print(t)
}

/// Printer that shows region decorations as `x^r`.
pub fn decorated_to_string(t: &Term) -> String {
    TermPrinter { decorations: true, ..Default::default() }.print(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_prints_as_star() {
        assert_eq!(term_to_string(&Term::Unit), "*");
    }

    #[test]
    fn par_is_right_nested() {
        let right = Term::par(Term::Unit, Term::par(Term::Unit, Term::var("x")));
        assert_eq!(term_to_string(&right), "* | * | x");
        let left = Term::par(Term::par(Term::Unit, Term::Unit), Term::var("x"));
        assert_eq!(term_to_string(&left), "(* | *) | x");
    }

    #[test]
    fn binders_are_parenthesised_outside_tail_position() {
        let id = Term::lam("x", Type::One, Term::var("x"));
        assert_eq!(term_to_string(&Term::app(id.clone(), Term::Unit)), "(\\x:1. x) *");
        assert_eq!(term_to_string(&Term::app(Term::var("f"), id.clone())), "f \\x:1. x");
        assert_eq!(term_to_string(&Term::par(id.clone(), Term::Unit)), "(\\x:1. x) | *");
    }

    #[test]
    fn sequence_sugar() {
        let t = Term::seq(Term::set("x", Volatility::Volatile, Term::Unit), Term::get("x"));
        assert_eq!(term_to_string(&t), "set(x, *) ; get(x)");
    }

    #[test]
    fn canonical_names_ignore_binder_choice() {
        let p = TermPrinter { canonical: true, ..Default::default() };
        let a = Term::lam("x", Type::One, Term::app(Term::var("x"), Term::var("y")));
        let b = Term::lam("z", Type::One, Term::app(Term::var("z"), Term::var("y")));
        assert_eq!(p.print(&a), p.print(&b));
        assert_eq!(p.print(&a), "\\%0:1. %0 y");
    }
}
