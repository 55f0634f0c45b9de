//! The residuated first-order language of set theory.
//!
//! Formulas have two conjunctions: `&` (strong, interpreted by the monoid
//! product) and `/\` (weak, interpreted by meet). Terms are variables or
//! constants naming interned elements of a universe.

pub(crate) mod enumerate;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

pub use enumerate::{
    enumerate_templates, scope_vars, BinaryOp, Connectives, QuantifierKind, TemplateEnumerator,
    PARAM_PREFIX, POOL, SUBJECT,
};
pub use parse::{parse, ParseError};

use crate::model::ElemId;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(ElemId),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    fn is_var(&self, name: &str) -> bool {
        matches!(self, Term::Var(v) if v == name)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(id) => write!(f, "#{}", id.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    Mem,
    Eq,
    Sub,
}

impl AtomKind {
    fn symbol(self) -> &'static str {
        match self {
            AtomKind::Mem => "in",
            AtomKind::Eq => "=",
            AtomKind::Sub => "sub",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Bot,
    Top,
    Atom(AtomKind, Term, Term),
    Strong(Box<Formula>, Box<Formula>),
    Weak(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Neg(Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

// Small constructors; they keep test and template code readable.
impl Formula {
    pub fn atom(kind: AtomKind, lhs: Term, rhs: Term) -> Self {
        Formula::Atom(kind, lhs, rhs)
    }

    pub fn mem(lhs: Term, rhs: Term) -> Self {
        Formula::Atom(AtomKind::Mem, lhs, rhs)
    }

    pub fn eq(lhs: Term, rhs: Term) -> Self {
        Formula::Atom(AtomKind::Eq, lhs, rhs)
    }

    pub fn sub(lhs: Term, rhs: Term) -> Self {
        Formula::Atom(AtomKind::Sub, lhs, rhs)
    }

    pub fn strong(a: Formula, b: Formula) -> Self {
        Formula::Strong(Box::new(a), Box::new(b))
    }

    pub fn weak(a: Formula, b: Formula) -> Self {
        Formula::Weak(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Formula) -> Self {
        Formula::Neg(Box::new(a))
    }

    pub fn equiv(a: Formula, b: Formula) -> Self {
        Formula::Equiv(Box::new(a), Box::new(b))
    }

    pub fn forall(v: &str, body: Formula) -> Self {
        Formula::Forall(v.to_string(), Box::new(body))
    }

    pub fn exists(v: &str, body: Formula) -> Self {
        Formula::Exists(v.to_string(), Box::new(body))
    }

    /// `A v. (v in bound -> body)`
    pub fn forall_in(v: &str, bound: Term, body: Formula) -> Self {
        Formula::forall(v, Formula::imp(Formula::mem(Term::var(v), bound), body))
    }

    /// `E v. (v in bound & body)`
    pub fn exists_in(v: &str, bound: Term, body: Formula) -> Self {
        Formula::exists(v, Formula::strong(Formula::mem(Term::var(v), bound), body))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Bot | Formula::Top => {}
            Formula::Atom(_, a, b) => {
                for t in [a, b] {
                    if let Term::Var(v) = t {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
            }
            Formula::Neg(a) => a.collect_free(bound, out),
            Formula::Strong(a, b)
            | Formula::Weak(a, b)
            | Formula::Or(a, b)
            | Formula::Imp(a, b)
            | Formula::Equiv(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable name occurring anywhere, bound or free.
    fn all_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Bot | Formula::Top => {}
            Formula::Atom(_, a, b) => {
                for t in [a, b] {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Neg(a) => a.all_vars(out),
            Formula::Strong(a, b)
            | Formula::Weak(a, b)
            | Formula::Or(a, b)
            | Formula::Imp(a, b)
            | Formula::Equiv(a, b) => {
                a.all_vars(out);
                b.all_vars(out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                out.insert(v.clone());
                body.all_vars(out);
            }
        }
    }

    /// Number of free occurrences of `var`.
    pub fn count_free_occurrences(&self, var: &str) -> usize {
        match self {
            Formula::Bot | Formula::Top => 0,
            Formula::Atom(_, a, b) => a.is_var(var) as usize + b.is_var(var) as usize,
            Formula::Neg(a) => a.count_free_occurrences(var),
            Formula::Strong(a, b)
            | Formula::Weak(a, b)
            | Formula::Or(a, b)
            | Formula::Imp(a, b)
            | Formula::Equiv(a, b) => a.count_free_occurrences(var) + b.count_free_occurrences(var),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                if v == var {
                    0
                } else {
                    body.count_free_occurrences(var)
                }
            }
        }
    }

    /// Capture-avoiding substitution of `term` for the free occurrences of `var`.
    pub fn substitute(&self, var: &str, term: &Term) -> Formula {
        let map = |t: &Term| if t.is_var(var) { term.clone() } else { t.clone() };
        let sub = |f: &Formula| Box::new(f.substitute(var, term));
        match self {
            Formula::Bot => Formula::Bot,
            Formula::Top => Formula::Top,
            Formula::Atom(k, a, b) => Formula::Atom(*k, map(a), map(b)),
            Formula::Neg(a) => Formula::Neg(sub(a)),
            Formula::Strong(a, b) => Formula::Strong(sub(a), sub(b)),
            Formula::Weak(a, b) => Formula::Weak(sub(a), sub(b)),
            Formula::Or(a, b) => Formula::Or(sub(a), sub(b)),
            Formula::Imp(a, b) => Formula::Imp(sub(a), sub(b)),
            Formula::Equiv(a, b) => Formula::Equiv(sub(a), sub(b)),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let rebuild = |v: String, body: Box<Formula>| match self {
                    Formula::Forall(..) => Formula::Forall(v, body),
                    _ => Formula::Exists(v, body),
                };
                if v == var || body.count_free_occurrences(var) == 0 {
                    return self.clone();
                }
                match term {
                    Term::Var(w) if w == v => {
                        let mut used = BTreeSet::new();
                        body.all_vars(&mut used);
                        used.insert(w.clone());
                        let fresh = (0..)
                            .map(|i| format!("{v}_{i}"))
                            .find(|c| !used.contains(c))
                            .expect("unbounded supply of names");
                        let renamed = body.substitute(v, &Term::Var(fresh.clone()));
                        rebuild(fresh, Box::new(renamed.substitute(var, term)))
                    }
                    _ => rebuild(v.clone(), sub(body)),
                }
            }
        }
    }

    /// Rewrites every constant through `f`, failing on the first one it rejects.
    pub fn try_map_consts<E>(&self, f: &mut impl FnMut(ElemId) -> Result<ElemId, E>) -> Result<Formula, E> {
        let mut term = |t: &Term| match t {
            Term::Const(id) => f(*id).map(Term::Const),
            Term::Var(_) => Ok(t.clone()),
        };
        Ok(match self {
            Formula::Bot => Formula::Bot,
            Formula::Top => Formula::Top,
            Formula::Atom(k, a, b) => {
                let a = term(a)?;
                Formula::Atom(*k, a, term(b)?)
            }
            Formula::Neg(a) => Formula::Neg(Box::new(a.try_map_consts(f)?)),
            Formula::Strong(a, b) => Formula::Strong(Box::new(a.try_map_consts(f)?), Box::new(b.try_map_consts(f)?)),
            Formula::Weak(a, b) => Formula::Weak(Box::new(a.try_map_consts(f)?), Box::new(b.try_map_consts(f)?)),
            Formula::Or(a, b) => Formula::Or(Box::new(a.try_map_consts(f)?), Box::new(b.try_map_consts(f)?)),
            Formula::Imp(a, b) => Formula::Imp(Box::new(a.try_map_consts(f)?), Box::new(b.try_map_consts(f)?)),
            Formula::Equiv(a, b) => Formula::Equiv(Box::new(a.try_map_consts(f)?), Box::new(b.try_map_consts(f)?)),
            Formula::Forall(v, a) => Formula::Forall(v.clone(), Box::new(a.try_map_consts(f)?)),
            Formula::Exists(v, a) => Formula::Exists(v.clone(), Box::new(a.try_map_consts(f)?)),
        })
    }

    /// Connective nesting depth; atoms and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Bot | Formula::Top | Formula::Atom(..) => 0,
            Formula::Neg(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => 1 + a.depth(),
            Formula::Strong(a, b)
            | Formula::Weak(a, b)
            | Formula::Or(a, b)
            | Formula::Imp(a, b)
            | Formula::Equiv(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

/// Binding strength used by the printer; larger binds tighter.
fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Equiv(..) => 1,
        Formula::Imp(..) => 2,
        Formula::Or(..) => 3,
        Formula::Weak(..) => 4,
        Formula::Strong(..) => 5,
        Formula::Forall(..) | Formula::Exists(..) => 0,
        _ => 7,
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrapped(inner: &Formula, parens: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if parens {
                write!(f, "({inner})")
            } else {
                write!(f, "{inner}")
            }
        }
        let binary = |f: &mut fmt::Formatter<'_>, a: &Formula, op: &str, b: &Formula, right_assoc: bool| {
            let p = precedence(self);
            let (pa, pb) = (precedence(a), precedence(b));
            let left_parens = pa == 0 || pa < p || (pa == p && right_assoc);
            let right_parens = pb == 0 || pb < p || (pb == p && !right_assoc);
            wrapped(a, left_parens, f)?;
            write!(f, " {op} ")?;
            wrapped(b, right_parens, f)
        };
        match self {
            Formula::Bot => f.write_str("bot"),
            Formula::Top => f.write_str("top"),
            Formula::Atom(k, a, b) => write!(f, "{a} {} {b}", k.symbol()),
            Formula::Neg(a) => {
                f.write_str("~")?;
                wrapped(a, !matches!(**a, Formula::Bot | Formula::Top | Formula::Neg(_)), f)
            }
            Formula::Strong(a, b) => binary(f, a, "&", b, false),
            Formula::Weak(a, b) => binary(f, a, "/\\", b, false),
            Formula::Or(a, b) => binary(f, a, "\\/", b, false),
            Formula::Imp(a, b) => binary(f, a, "->", b, true),
            Formula::Equiv(a, b) => binary(f, a, "==", b, false),
            Formula::Forall(v, body) => write!(f, "A {v}. {body}"),
            Formula::Exists(v, body) => write!(f, "E {v}. {body}"),
        }
    }
}

/// A formula `φ(x, ȳ)` with a distinguished subject variable and ordered parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormulaTemplate {
    pub body: Formula,
    pub subject: String,
    pub params: Vec<String>,
}

impl FormulaTemplate {
    /// Free variables must be among the subject and parameters.
    pub fn is_well_scoped(&self) -> bool {
        self.body
            .free_vars()
            .iter()
            .all(|v| *v == self.subject || self.params.contains(v))
    }
}

impl fmt::Display for FormulaTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.subject)?;
        for p in &self.params {
            write!(f, ",{p}")?;
        }
        write!(f, "] {}", self.body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    fn c(i: u32) -> Term {
        Term::Const(ElemId(i))
    }

    #[test]
    fn substitute_both_free_occurrences() {
        let f = Formula::eq(v("x"), v("x"));
        assert_eq!(f.count_free_occurrences("x"), 2);
        assert_eq!(f.substitute("x", &c(7)), Formula::eq(c(7), c(7)));
    }

    #[test]
    fn bound_occurrences_are_untouched() {
        let f = Formula::forall("x", Formula::mem(v("x"), v("y")));
        assert_eq!(f.count_free_occurrences("x"), 0);
        assert_eq!(f.substitute("x", &c(1)), f);
    }

    #[test]
    fn substitute_through_connective() {
        let f = Formula::strong(Formula::mem(v("x"), v("y")), Formula::eq(v("x"), v("z")));
        assert_eq!(f.count_free_occurrences("x"), 2);
        assert_eq!(
            f.substitute("x", &c(3)),
            Formula::strong(Formula::mem(c(3), v("y")), Formula::eq(c(3), v("z")))
        );
    }

    #[test]
    fn substitution_avoids_capture() {
        // A y. x in y   with x := y  must not capture.
        let f = Formula::forall("y", Formula::mem(v("x"), v("y")));
        let g = f.substitute("x", &v("y"));
        assert_eq!(g.free_vars(), BTreeSet::from(["y".to_string()]));
        assert_eq!(g.count_free_occurrences("y"), 1);
    }

    #[test]
    fn free_vars_and_sentences() {
        let f = Formula::exists("y", Formula::strong(Formula::mem(v("y"), c(3)), Formula::eq(v("y"), v("x"))));
        assert_eq!(f.free_vars(), BTreeSet::from(["x".to_string()]));
        assert!(!f.is_sentence());
        assert!(f.substitute("x", &c(0)).is_sentence());
    }

    #[test]
    fn printer_parenthesizes_by_precedence() {
        let f = Formula::imp(
            Formula::neg(Formula::mem(v("p"), v("q"))),
            Formula::Bot,
        );
        assert_eq!(f.to_string(), "~(p in q) -> bot");
        let g = Formula::strong(Formula::forall("x", Formula::Top), Formula::Bot);
        assert_eq!(g.to_string(), "(A x. top) & bot");
        let h = Formula::imp(Formula::imp(Formula::Bot, Formula::Top), Formula::Bot);
        assert_eq!(h.to_string(), "(bot -> top) -> bot");
    }

    #[test]
    fn depth_counts_connective_nesting() {
        let f = Formula::forall("z", Formula::neg(Formula::mem(v("z"), v("x"))));
        assert_eq!(f.depth(), 2);
        assert_eq!(Formula::Top.depth(), 0);
    }
}
