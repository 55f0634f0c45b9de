//! The quantale-valued universe: interned elements, memoized atomic
//! valuations, sentence evaluation over explicit carriers, hereditarily
//! finite sets and their hat images.

mod checks;
mod eval;
mod hf;
mod stage;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantale::{QElem, Quantale};

pub use checks::{
    check_hat_transfer, check_memo_soundness, check_n_fold_substitution, check_reflexivity,
    check_soundness_spot_suite, standard_bounded_formulas,
};
pub use eval::{eval_sentence, EvalError};
pub use hf::{hat, is_bounded, HfSet};
pub use stage::{
    build_v_stage, read_stage_dump, write_stage_dump, BudgetExceeded, DumpError, HierarchyTag, Stage,
    StageDump,
};

/// Identifier of an interned element of a [`Universe`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ElemId(pub u32);

impl ElemId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ElemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A finite function from earlier elements to truth values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VElem {
    pub id: ElemId,
    /// Sorted by key; keys are distinct.
    pub entries: Vec<(ElemId, QElem)>,
    /// Index of the first stage containing the element; the empty function has rank 1.
    pub rank: u32,
}

impl VElem {
    pub fn value_at(&self, key: ElemId) -> Option<QElem> {
        self.entries
            .binary_search_by_key(&key, |&(k, _)| k)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn domain(&self) -> impl Iterator<Item = ElemId> + '_ {
        self.entries.iter().map(|&(k, _)| k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown element #{0}")]
    UnknownElement(u32),
    #[error("key #{0} occurs twice")]
    DuplicateKey(u32),
    #[error("value index {0} is not in the quantale")]
    ForeignValue(usize),
}

/// How `[[f = g]]` combines the two inclusions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EqMode {
    /// `[[f sub g]] * [[g sub f]]`
    #[default]
    Product,
    /// `[[f sub g]] /\ [[g sub f]]`, diagnostics only.
    Meet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Sub,
    Eq,
    Mem,
}

#[derive(Default)]
struct Interner {
    elems: Vec<Arc<VElem>>,
    index: HashMap<Vec<(ElemId, QElem)>, ElemId>,
}

/// The universe `V^Q` restricted to the elements interned so far.
pub struct Universe {
    quantale: Quantale,
    mode: EqMode,
    interner: RwLock<Interner>,
    cache: RwLock<HashMap<(Relation, ElemId, ElemId), QElem>>,
}

impl fmt::Debug for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Universe")
            .field("quantale", &self.quantale.name())
            .field("mode", &self.mode)
            .field("elements", &self.len())
            .finish()
    }
}

impl Universe {
    pub fn new(quantale: Quantale) -> Self {
        Self::with_mode(quantale, EqMode::Product)
    }

    pub fn with_mode(quantale: Quantale, mode: EqMode) -> Self {
        Universe {
            quantale,
            mode,
            interner: RwLock::new(Interner::default()),
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// Same elements and ids, fresh cache, possibly another equality mode.
    pub fn fork_with_mode(&self, mode: EqMode) -> Universe {
        let inner = self.interner.read().unwrap();
        Universe {
            quantale: self.quantale.clone(),
            mode,
            interner: RwLock::new(Interner { elems: inner.elems.clone(), index: inner.index.clone() }),
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn quantale(&self) -> &Quantale {
        &self.quantale
    }

    pub fn mode(&self) -> EqMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.interner.read().unwrap().elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, id: ElemId) -> bool {
        id.index() < self.len()
    }

    pub fn elem(&self, id: ElemId) -> Arc<VElem> {
        Arc::clone(&self.interner.read().unwrap().elems[id.index()])
    }

    pub fn try_elem(&self, id: ElemId) -> Result<Arc<VElem>, ModelError> {
        self.interner
            .read()
            .unwrap()
            .elems
            .get(id.index())
            .cloned()
            .ok_or(ModelError::UnknownElement(id.0))
    }

    pub fn rank(&self, id: ElemId) -> u32 {
        self.elem(id).rank
    }

    /// Interns the function with the given graph; structurally equal graphs share one id.
    pub fn intern(&self, mut entries: Vec<(ElemId, QElem)>) -> Result<ElemId, ModelError> {
        entries.sort_by_key(|&(k, _)| k);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ModelError::DuplicateKey(w[0].0 .0));
            }
        }
        for &(_, v) in &entries {
            if !self.quantale.contains(v) {
                return Err(ModelError::ForeignValue(v.index()));
            }
        }
        if let Some(&id) = self.interner.read().unwrap().index.get(&entries) {
            return Ok(id);
        }
        let mut inner = self.interner.write().unwrap();
        if let Some(&id) = inner.index.get(&entries) {
            return Ok(id);
        }
        let mut rank = 1;
        for &(k, _) in &entries {
            let child = inner.elems.get(k.index()).ok_or(ModelError::UnknownElement(k.0))?;
            rank = rank.max(child.rank + 1);
        }
        let id = ElemId(inner.elems.len() as u32);
        inner.elems.push(Arc::new(VElem { id, entries: entries.clone(), rank }));
        inner.index.insert(entries, id);
        Ok(id)
    }

    pub fn empty(&self) -> ElemId {
        self.intern(Vec::new()).expect("empty function is always valid")
    }

    /// Looks up an already interned graph without creating it.
    pub fn find(&self, entries: &[(ElemId, QElem)]) -> Option<ElemId> {
        let mut sorted = entries.to_vec();
        sorted.sort_by_key(|&(k, _)| k);
        self.interner.read().unwrap().index.get(&sorted).copied()
    }

    pub fn clear_cache(&self) {
        self.cache.write().unwrap().clear();
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    fn cached(&self, key: (Relation, ElemId, ElemId), compute: impl FnOnce() -> QElem) -> QElem {
        if let Some(&v) = self.cache.read().unwrap().get(&key) {
            return v;
        }
        let v = compute();
        let prev = *self.cache.write().unwrap().entry(key).or_insert(v);
        debug_assert_eq!(prev, v, "divergent cached valuation for {key:?}");
        prev
    }

    /// `[[f sub g]] = inf over x in dom f of (f(x) -> [[x in g]])`
    pub fn val_sub(&self, f: ElemId, g: ElemId) -> QElem {
        self.cached((Relation::Sub, f, g), || {
            let q = &self.quantale;
            let fe = self.elem(f);
            q.inf(fe.entries.iter().map(|&(x, v)| q.residuum(v, self.val_mem(x, g))))
        })
    }

    /// `[[f = g]] = [[f sub g]] * [[g sub f]]` (meet in diagnostics mode).
    pub fn val_eq(&self, f: ElemId, g: ElemId) -> QElem {
        self.cached((Relation::Eq, f, g), || {
            let (a, b) = (self.val_sub(f, g), self.val_sub(g, f));
            match self.mode {
                EqMode::Product => self.quantale.product(a, b),
                EqMode::Meet => self.quantale.meet(a, b),
            }
        })
    }

    /// `[[f in g]] = sup over x in dom g of (g(x) * [[x = f]])`
    pub fn val_mem(&self, f: ElemId, g: ElemId) -> QElem {
        self.cached((Relation::Mem, f, g), || {
            let q = &self.quantale;
            let ge = self.elem(g);
            q.sup(ge.entries.iter().map(|&(x, v)| q.product(v, self.val_eq(x, f))))
        })
    }

    pub fn val(&self, rel: Relation, f: ElemId, g: ElemId) -> QElem {
        match rel {
            Relation::Sub => self.val_sub(f, g),
            Relation::Eq => self.val_eq(f, g),
            Relation::Mem => self.val_mem(f, g),
        }
    }

    /// `id rank {child:label,...}`
    pub fn dump_line(&self, id: ElemId) -> String {
        let e = self.elem(id);
        let body: Vec<String> = e
            .entries
            .iter()
            .map(|&(k, v)| format!("{}:{}", k.0, self.quantale.label(v)))
            .collect();
        format!("{} {} {{{}}}", id.0, e.rank, body.join(","))
    }

    /// Human-readable nested form, e.g. `{{}:1/2}`.
    pub fn describe(&self, id: ElemId) -> String {
        let e = self.elem(id);
        let body: Vec<String> = e
            .entries
            .iter()
            .map(|&(k, v)| format!("{}:{}", self.describe(k), self.quantale.label(v)))
            .collect();
        format!("{{{}}}", body.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::{builtin, lukasiewicz_chain};

    fn l3() -> Universe {
        Universe::new(lukasiewicz_chain(3).unwrap())
    }

    fn lab(u: &Universe, s: &str) -> QElem {
        u.quantale().by_label(s).unwrap()
    }

    #[test]
    fn interning_is_structural() {
        let u = l3();
        let e = u.empty();
        let half = lab(&u, "1/2");
        let a = u.intern(vec![(e, half)]).unwrap();
        let b = u.intern(vec![(e, half)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(u.len(), 2);
        assert_eq!(u.rank(e), 1);
        assert_eq!(u.rank(a), 2);
        assert_eq!(u.intern(vec![(e, half), (e, half)]), Err(ModelError::DuplicateKey(0)));
        assert_eq!(u.intern(vec![(ElemId(9), half)]), Err(ModelError::UnknownElement(9)));
    }

    #[test]
    fn empty_infimum_and_supremum() {
        let u = l3();
        let e = u.empty();
        let f = u.intern(vec![(e, lab(&u, "1/2"))]).unwrap();
        let q = u.quantale();
        assert_eq!(u.val_sub(e, f), q.top());
        assert_eq!(u.val_mem(f, e), q.bottom());
    }

    #[test]
    fn hand_unfolded_lukasiewicz_values() {
        // f = {(empty -> 1/2)}
        let u = l3();
        let e = u.empty();
        let half = lab(&u, "1/2");
        let f = u.intern(vec![(e, half)]).unwrap();
        let q = u.quantale();
        // [[empty in f]] = 1/2 * [[empty = empty]] = 1/2
        assert_eq!(u.val_mem(e, f), half);
        // [[f sub f]] = 1/2 -> [[empty in f]] = 1/2 -> 1/2 = 1
        assert_eq!(u.val_eq(f, f), q.top());
        // [[f sub empty]] = 1/2 -> 0 = 1/2, so [[empty = f]] = 1 * 1/2
        assert_eq!(u.val_eq(e, f), half);
        // [[f in f]] = 1/2 * [[empty = f]] = 1/2 * 1/2 = 0
        assert_eq!(u.val_mem(f, f), q.bottom());
    }

    #[test]
    fn extension_by_zero_is_equal() {
        let u = l3();
        let e = u.empty();
        let f = u.intern(vec![(e, lab(&u, "0"))]).unwrap();
        assert_eq!(u.val_eq(f, e), u.quantale().top());
        assert_eq!(u.val_eq(e, f), u.quantale().top());
    }

    #[test]
    fn fork_keeps_ids_and_drops_cache() {
        let u = Universe::new(builtin("lukasiewicz:5").unwrap());
        let e = u.empty();
        let f = u.intern(vec![(e, u.quantale().by_label("3/4").unwrap())]).unwrap();
        let v = u.val_eq(e, f);
        assert!(u.cache_len() > 0);
        let w = u.fork_with_mode(EqMode::Meet);
        assert_eq!(w.cache_len(), 0);
        assert_eq!(w.elem(f).entries, u.elem(f).entries);
        // one inclusion is top, so product and meet agree
        assert_eq!(w.val_eq(e, f), v);
    }

    #[test]
    fn dump_line_format() {
        let u = l3();
        let e = u.empty();
        let f = u.intern(vec![(e, lab(&u, "1/2"))]).unwrap();
        assert_eq!(u.dump_line(e), "0 1 {}");
        assert_eq!(u.dump_line(f), "1 2 {0:1/2}");
        assert_eq!(u.describe(f), "{{}:1/2}");
    }
}
