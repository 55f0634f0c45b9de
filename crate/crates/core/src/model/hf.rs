use std::collections::BTreeMap;
use std::fmt;

use super::{ElemId, Universe};
use crate::formula::{AtomKind, Formula, Term};

/// A hereditarily finite set in canonical form: children sorted and distinct.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HfSet(Vec<HfSet>);

impl HfSet {
    pub fn empty() -> Self {
        HfSet(Vec::new())
    }

    pub fn new(children: impl IntoIterator<Item = HfSet>) -> Self {
        let mut v: Vec<HfSet> = children.into_iter().collect();
        v.sort();
        v.dedup();
        HfSet(v)
    }

    pub fn singleton(x: HfSet) -> Self {
        HfSet(vec![x])
    }

    pub fn children(&self) -> &[HfSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &HfSet) -> bool {
        self.0.binary_search(x).is_ok()
    }

    /// von Neumann rank: the empty set has rank 0.
    pub fn rank(&self) -> usize {
        self.0.iter().map(|c| c.rank() + 1).max().unwrap_or(0)
    }

    /// von Neumann ordinal `n`.
    pub fn ordinal(n: usize) -> Self {
        (0..n).fold(HfSet::empty(), |acc, _| {
            let mut kids = acc.0.clone();
            kids.push(acc);
            HfSet::new(kids)
        })
    }

    /// All subsets of `items`, as canonical sets, in a fixed order.
    pub fn powerset(items: &[HfSet]) -> Vec<HfSet> {
        assert!(items.len() < 32, "powerset of {} items", items.len());
        let mut out: Vec<HfSet> = (0u32..1 << items.len())
            .map(|mask| {
                HfSet::new((0..items.len()).filter(|i| mask >> i & 1 == 1).map(|i| items[i].clone()))
            })
            .collect();
        out.sort();
        out
    }

    /// Every set of rank at most `r`, sorted.
    pub fn all_up_to_rank(r: usize) -> Vec<HfSet> {
        let mut level = vec![HfSet::empty()];
        for _ in 0..r {
            level = HfSet::powerset(&level);
        }
        level
    }
}

impl fmt::Display for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

/// `x^ = {(y^, top) : y in x}`
pub fn hat(u: &Universe, x: &HfSet) -> ElemId {
    let top = u.quantale().top();
    let entries = x.children().iter().map(|c| (hat(u, c), top)).collect();
    u.intern(entries).expect("hat images are well formed")
}

/// Whether every quantifier has the bounded shape `A v. (v in t -> ..)`
/// or `E v. (v in t & ..)` / `E v. (v in t /\ ..)` with `t` not `v`.
pub fn is_bounded(f: &Formula) -> bool {
    match f {
        Formula::Bot | Formula::Top | Formula::Atom(..) => true,
        Formula::Neg(a) => is_bounded(a),
        Formula::Strong(a, b)
        | Formula::Weak(a, b)
        | Formula::Or(a, b)
        | Formula::Imp(a, b)
        | Formula::Equiv(a, b) => is_bounded(a) && is_bounded(b),
        Formula::Forall(v, body) => match &**body {
            Formula::Imp(guard, rest) => is_guard(v, guard) && is_bounded(rest),
            _ => false,
        },
        Formula::Exists(v, body) => match &**body {
            Formula::Strong(guard, rest) | Formula::Weak(guard, rest) => {
                is_guard(v, guard) && is_bounded(rest)
            }
            _ => false,
        },
    }
}

fn is_guard(v: &str, guard: &Formula) -> bool {
    matches!(guard, Formula::Atom(AtomKind::Mem, Term::Var(a), t) if a == v && !matches!(t, Term::Var(b) if b == v))
}

/// Two-valued truth of `f` over hereditarily finite sets, with quantifiers
/// ranging over `carrier`. Serves as an independent oracle.
pub(crate) fn classical_truth(f: &Formula, carrier: &[HfSet], env: &BTreeMap<String, HfSet>) -> bool {
    fn term<'a>(t: &Term, env: &'a [(String, HfSet)]) -> &'a HfSet {
        match t {
            Term::Var(v) => &env.iter().rev().find(|(n, _)| n == v).expect("bound variable").1,
            Term::Const(_) => panic!("constants have no classical reading"),
        }
    }
    fn go(f: &Formula, carrier: &[HfSet], env: &mut Vec<(String, HfSet)>) -> bool {
        match f {
            Formula::Bot => false,
            Formula::Top => true,
            Formula::Atom(kind, a, b) => {
                let (a, b) = (term(a, env), term(b, env));
                match kind {
                    AtomKind::Mem => b.contains(a),
                    AtomKind::Eq => a == b,
                    AtomKind::Sub => a.children().iter().all(|c| b.contains(c)),
                }
            }
            Formula::Strong(a, b) | Formula::Weak(a, b) => go(a, carrier, env) && go(b, carrier, env),
            Formula::Or(a, b) => go(a, carrier, env) || go(b, carrier, env),
            Formula::Imp(a, b) => !go(a, carrier, env) || go(b, carrier, env),
            Formula::Neg(a) => !go(a, carrier, env),
            Formula::Equiv(a, b) => go(a, carrier, env) == go(b, carrier, env),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let universal = matches!(f, Formula::Forall(..));
                let mut hit = |c: &HfSet| {
                    env.push((v.clone(), c.clone()));
                    let r = go(body, carrier, env);
                    env.pop();
                    r
                };
                if universal {
                    carrier.iter().all(&mut hit)
                } else {
                    carrier.iter().any(&mut hit)
                }
            }
        }
    }
    let mut stack: Vec<(String, HfSet)> = env.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    go(f, carrier, &mut stack)
}
