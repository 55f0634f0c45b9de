use std::collections::BTreeMap;

use thiserror::Error;

use super::{ElemId, Relation, Universe};
use crate::formula::{AtomKind, Formula, Term};
use crate::quantale::QElem;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("constant #{0} is not an element of the universe")]
    ForeignConstant(u32),
}

/// Value of `f` in `u` with quantifiers ranging over `carrier`.
///
/// Free variables of `f` must be bound by `env`.
pub fn eval_sentence(
    u: &Universe,
    carrier: &[ElemId],
    f: &Formula,
    env: &BTreeMap<String, ElemId>,
) -> Result<QElem, EvalError> {
    if let Some(v) = f.free_vars().into_iter().find(|v| !env.contains_key(v)) {
        return Err(EvalError::UnboundVariable(v));
    }
    if let Some(&bad) = env.values().find(|&&id| !u.contains(id)) {
        return Err(EvalError::ForeignConstant(bad.0));
    }
    if let Some(&bad) = carrier.iter().find(|&&c| !u.contains(c)) {
        return Err(EvalError::ForeignConstant(bad.0));
    }
    let mut stack: Vec<(&str, ElemId)> = env.iter().map(|(k, &v)| (k.as_str(), v)).collect();
    Evaluator { u, carrier }.eval(f, &mut stack)
}

struct Evaluator<'a> {
    u: &'a Universe,
    carrier: &'a [ElemId],
}

impl<'a> Evaluator<'a> {
    fn term(&self, t: &Term, env: &[(&str, ElemId)]) -> Result<ElemId, EvalError> {
        match t {
            Term::Const(id) if self.u.contains(*id) => Ok(*id),
            Term::Const(id) => Err(EvalError::ForeignConstant(id.0)),
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|&(_, id)| id)
                .ok_or_else(|| EvalError::UnboundVariable(v.clone())),
        }
    }

    fn eval<'f>(&self, f: &'f Formula, env: &mut Vec<(&'f str, ElemId)>) -> Result<QElem, EvalError> {
        let q = self.u.quantale();
        Ok(match f {
            Formula::Bot => q.bottom(),
            Formula::Top => q.neg(q.bottom()),
            Formula::Atom(kind, a, b) => {
                let (a, b) = (self.term(a, env)?, self.term(b, env)?);
                let rel = match kind {
                    AtomKind::Mem => Relation::Mem,
                    AtomKind::Eq => Relation::Eq,
                    AtomKind::Sub => Relation::Sub,
                };
                self.u.val(rel, a, b)
            }
            Formula::Strong(a, b) => q.product(self.eval(a, env)?, self.eval(b, env)?),
            Formula::Weak(a, b) => q.meet(self.eval(a, env)?, self.eval(b, env)?),
            Formula::Or(a, b) => q.join(self.eval(a, env)?, self.eval(b, env)?),
            Formula::Imp(a, b) => q.residuum(self.eval(a, env)?, self.eval(b, env)?),
            Formula::Neg(a) => q.residuum(self.eval(a, env)?, q.bottom()),
            Formula::Equiv(a, b) => {
                let (x, y) = (self.eval(a, env)?, self.eval(b, env)?);
                q.product(q.residuum(x, y), q.residuum(y, x))
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let universal = matches!(f, Formula::Forall(..));
                let mut acc = if universal { q.top() } else { q.bottom() };
                for &c in self.carrier {
                    env.push((v.as_str(), c));
                    let r = self.eval(body, env);
                    env.pop();
                    let r = r?;
                    acc = if universal { q.meet(acc, r) } else { q.join(acc, r) };
                }
                acc
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::quantale::{boolean_algebra, lukasiewicz_chain};

    fn run(u: &Universe, carrier: &[ElemId], text: &str) -> Result<QElem, EvalError> {
        eval_sentence(u, carrier, &parse(text).unwrap(), &BTreeMap::new())
    }

    #[test]
    fn reflexivity_and_empty_membership() {
        let u = Universe::new(lukasiewicz_chain(3).unwrap());
        let e = u.empty();
        let f = u.intern(vec![(e, u.quantale().by_label("1/2").unwrap())]).unwrap();
        let q = u.quantale();
        assert_eq!(run(&u, &[e, f], "A x. x = x").unwrap(), q.top());
        assert_eq!(run(&u, &[e, f], "E x. x in #0").unwrap(), q.bottom());
        assert_eq!(run(&u, &[], "A x. x = x").unwrap(), q.top());
    }

    #[test]
    fn exists_over_restricted_carrier() {
        let u = Universe::new(lukasiewicz_chain(3).unwrap());
        let e = u.empty();
        let half = u.quantale().by_label("1/2").unwrap();
        let f = u.intern(vec![(e, half)]).unwrap();
        // x = empty gives 1/2 * [[empty = empty]]; x = f gives 1/2 * [[empty = f]] = 0
        assert_eq!(run(&u, &[e, f], &format!("E x. x in #{}", f.0)).unwrap(), half);
        assert_eq!(run(&u, &[f], &format!("E x. x in #{}", f.0)).unwrap(), u.quantale().bottom());
    }

    #[test]
    fn derived_connectives_match_definitions() {
        let u = Universe::new(lukasiewicz_chain(5).unwrap());
        let e = u.empty();
        let ids: Vec<ElemId> = u
            .quantale()
            .elements()
            .map(|v| u.intern(vec![(e, v)]).unwrap())
            .collect();
        let mut carrier = vec![e];
        carrier.extend(&ids);
        for &a in &carrier {
            for &b in &carrier {
                let p = format!("#{} in #{}", a.0, b.0);
                let r = format!("#{} = #{}", b.0, a.0);
                let pairs = [
                    (format!("~({p})"), format!("({p}) -> bot")),
                    ("top".to_string(), "~bot".to_string()),
                    (format!("({p}) == ({r})"), format!("(({p}) -> ({r})) & (({r}) -> ({p}))")),
                ];
                for (lhs, rhs) in pairs {
                    assert_eq!(run(&u, &carrier, &lhs), run(&u, &carrier, &rhs), "{lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn errors_for_unbound_and_foreign() {
        let u = Universe::new(boolean_algebra(1).unwrap());
        let e = u.empty();
        assert_eq!(run(&u, &[e], "x in x"), Err(EvalError::UnboundVariable("x".into())));
        assert_eq!(run(&u, &[e], "#5 in #0"), Err(EvalError::ForeignConstant(5)));
        assert_eq!(run(&u, &[], "A x. x in y"), Err(EvalError::UnboundVariable("y".into())));
    }
}
