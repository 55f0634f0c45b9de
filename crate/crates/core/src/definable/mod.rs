//! Semantic closure of the template grammar over finite structures.
//!
//! A template over the scope variables `x, y1..yp, z1..zk` is represented by
//! its table: the vector of its values under every assignment of carrier
//! elements to those variables. Tables are built in the same layers as the
//! template stream (atoms, then negation, binary connectives and quantifiers
//! over the previous layer) but deduplicated by value, so every template of
//! depth at most `d` has its table among the first `d + 1` layers while the
//! number of tables stays bounded by the finite function space.
//!
//! Several structures can be closed jointly. A joint table is the
//! concatenation of one segment per structure and each segment is combined
//! with the operations of its own quantale, so two formulas share a joint
//! table only if they agree on every structure.
//!
//! Assignment index layout: variable `i` of the scope is digit `i` in base
//! `n` (the carrier size of the segment), so the subject is the least
//! significant digit and the innermost pool variable the most significant.

use std::collections::HashSet;

use indexmap::IndexSet;
use thiserror::Error;

use crate::formula::enumerate::{atom_at, atom_count, scope_vars};
use crate::formula::{AtomKind, BinaryOp, Connectives, Formula, QuantifierKind, POOL};
use crate::model::{ElemId, Universe};
use crate::quantale::{QElem, Quantale};

/// Operation tables of one quantale, owned.
#[derive(Clone, Debug)]
struct Ops {
    size: usize,
    product: Vec<u8>,
    meet: Vec<u8>,
    join: Vec<u8>,
    residuum: Vec<u8>,
    neg: Vec<u8>,
    bottom: u8,
    top: u8,
}

impl Ops {
    fn of(q: &Quantale) -> Self {
        let t = q.tables();
        Ops {
            size: t.n,
            product: t.product.to_vec(),
            meet: t.meet.to_vec(),
            join: t.join.to_vec(),
            residuum: t.residuum.to_vec(),
            neg: t.neg.to_vec(),
            bottom: t.bottom,
            top: t.top,
        }
    }

    fn binary(&self, op: BinaryOp) -> &[u8] {
        match op {
            BinaryOp::Strong => &self.product,
            BinaryOp::Weak => &self.meet,
            BinaryOp::Or => &self.join,
            BinaryOp::Imp => &self.residuum,
        }
    }
}

/// A finite structure for the language `{in, =}` with quantale-valued relations.
#[derive(Clone, Debug)]
pub struct Structure {
    quantale: Quantale,
    ops: Ops,
    carrier: Vec<ElemId>,
    mem: Vec<u8>,
    eq: Vec<u8>,
}

impl Structure {
    /// The restriction of `u` to `carrier`, with relations from the atomic valuations.
    pub fn from_universe(u: &Universe, carrier: &[ElemId]) -> Self {
        let n = carrier.len();
        let mut mem = Vec::with_capacity(n * n);
        let mut eq = Vec::with_capacity(n * n);
        for &a in carrier {
            for &b in carrier {
                mem.push(u.val_mem(a, b).raw());
                eq.push(u.val_eq(a, b).raw());
            }
        }
        let q = u.quantale().clone();
        Structure { ops: Ops::of(&q), quantale: q, carrier: carrier.to_vec(), mem, eq }
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn carrier(&self) -> &[ElemId] {
        &self.carrier
    }

    pub fn quantale(&self) -> &Quantale {
        &self.quantale
    }

    pub fn mem(&self, a: usize, b: usize) -> QElem {
        QElem::from_index(self.mem[a * self.len() + b] as usize)
    }

    pub fn eq(&self, a: usize, b: usize) -> QElem {
        QElem::from_index(self.eq[a * self.len() + b] as usize)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ClosureConfig {
    pub params: usize,
    pub connectives: Connectives,
    /// Keep formulas apart when they differ in the number of free subject occurrences.
    pub track_occurrences: bool,
    /// Upper bound on table entries computed.
    pub max_work: u64,
    /// Upper bound on table bytes stored.
    pub max_bytes: usize,
}

impl ClosureConfig {
    pub fn new(params: usize, connectives: Connectives) -> Self {
        ClosureConfig {
            params,
            connectives,
            track_occurrences: false,
            max_work: 4_000_000_000,
            max_bytes: 1 << 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("closure budget exceeded at depth {depth}, scope {scope} ({work} entries computed, {bytes} bytes stored)")]
pub struct ClosureBudget {
    pub depth: usize,
    pub scope: usize,
    pub work: u64,
    pub bytes: usize,
}

#[derive(Clone, Copy, Debug)]
enum Origin {
    Atom(u32),
    Neg(u32),
    Bin(BinaryOp, u32, u32),
    /// Quantified over the next pool variable; the child lives one scope deeper.
    Quant(QuantifierKind, u32),
}

#[derive(Clone, Copy, Debug)]
struct Item {
    table: u32,
    occurrences: u8,
    origin: Origin,
}

struct Scope {
    vars: Vec<String>,
    seg_off: Vec<usize>,
    seg_len: Vec<usize>,
    tables: IndexSet<Box<[u8]>>,
    seen: HashSet<(u32, u8)>,
    items: Vec<Item>,
    /// Items `layer_ends[d-1]..layer_ends[d]` are new at depth `d`.
    layer_ends: Vec<usize>,
}

impl Scope {
    fn layer(&self, d: usize) -> (usize, usize) {
        let start = if d == 0 { 0 } else { self.layer_ends[d - 1] };
        (start, self.layer_ends[d])
    }
}

/// One item of the closure at the outer scope.
#[derive(Clone, Copy, Debug)]
pub struct ClosureItem<'c> {
    pub index: usize,
    pub table: &'c [u8],
    pub occurrences: u8,
}

pub struct Closure<'s> {
    segs: Vec<&'s Structure>,
    cfg: ClosureConfig,
    scopes: Vec<Scope>,
    work: u64,
    bytes: usize,
    scratch: Vec<u8>,
}

impl<'s> Closure<'s> {
    pub fn new(structures: Vec<&'s Structure>, cfg: ClosureConfig) -> Self {
        let scopes = (0..=POOL.len())
            .map(|k| {
                let vars = scope_vars(cfg.params, k);
                let mut off = 0usize;
                let mut seg_off = Vec::new();
                let mut seg_len = Vec::new();
                for s in &structures {
                    let len = s.len().checked_pow(vars.len() as u32).unwrap_or(usize::MAX);
                    seg_off.push(off);
                    seg_len.push(len);
                    off = off.saturating_add(len);
                }
                Scope {
                    vars,
                    seg_off,
                    seg_len,
                    tables: IndexSet::new(),
                    seen: HashSet::new(),
                    items: Vec::new(),
                    layer_ends: Vec::new(),
                }
            })
            .collect();
        Closure { segs: structures, cfg, scopes, work: 0, bytes: 0, scratch: Vec::new() }
    }

    pub fn config(&self) -> &ClosureConfig {
        &self.cfg
    }

    pub fn structures(&self) -> &[&'s Structure] {
        &self.segs
    }

    /// Builds the outer scope up to `depth`.
    pub fn ensure(&mut self, depth: usize) -> Result<(), ClosureBudget> {
        self.ensure_at(0, depth)
    }

    /// Largest depth built at the outer scope, if any.
    pub fn depth(&self) -> Option<usize> {
        self.scopes[0].layer_ends.len().checked_sub(1)
    }

    /// Items of depth at most `depth` at the outer scope, in construction order.
    pub fn items(&self, depth: usize) -> impl Iterator<Item = ClosureItem<'_>> + '_ {
        let s = &self.scopes[0];
        let end = s.layer_ends[depth.min(s.layer_ends.len() - 1)];
        s.items[..end].iter().enumerate().map(move |(index, it)| ClosureItem {
            index,
            table: &s.tables[it.table as usize],
            occurrences: it.occurrences,
        })
    }

    /// Number of items new at `depth` at the outer scope.
    pub fn new_at(&self, depth: usize) -> usize {
        let (a, b) = self.scopes[0].layer(depth);
        b - a
    }

    /// Number of distinct tables at the outer scope.
    pub fn table_count(&self) -> usize {
        self.scopes[0].tables.len()
    }

    /// Segment `seg` of an outer-scope table.
    pub fn segment<'t>(&self, table: &'t [u8], seg: usize) -> &'t [u8] {
        let s = &self.scopes[0];
        &table[s.seg_off[seg]..s.seg_off[seg] + s.seg_len[seg]]
    }

    /// A representative formula for an outer-scope item.
    pub fn formula(&self, index: usize) -> Formula {
        self.rebuild(0, index)
    }

    fn rebuild(&self, k: usize, index: usize) -> Formula {
        let s = &self.scopes[k];
        match s.items[index].origin {
            Origin::Atom(j) => atom_at(&s.vars, j as usize),
            Origin::Neg(a) => Formula::neg(self.rebuild(k, a as usize)),
            Origin::Bin(op, a, b) => op.apply(self.rebuild(k, a as usize), self.rebuild(k, b as usize)),
            Origin::Quant(kind, c) => kind.apply(POOL[k], self.rebuild(k + 1, c as usize)),
        }
    }

    fn ensure_at(&mut self, k: usize, d: usize) -> Result<(), ClosureBudget> {
        if self.scopes[k].layer_ends.len() > d {
            return Ok(());
        }
        if d > 0 {
            self.ensure_at(k, d - 1)?;
            if k + 1 < self.scopes.len() {
                self.ensure_at(k + 1, d - 1)?;
            }
        }
        if d == 0 {
            self.atoms(k)?;
        } else {
            self.layer(k, d)?;
        }
        let len = self.scopes[k].items.len();
        self.scopes[k].layer_ends.push(len);
        Ok(())
    }

    fn charge(&mut self, k: usize, d: usize, entries: usize) -> Result<(), ClosureBudget> {
        self.work += entries as u64;
        if self.work > self.cfg.max_work || self.bytes > self.cfg.max_bytes {
            return Err(ClosureBudget { depth: d, scope: k, work: self.work, bytes: self.bytes });
        }
        Ok(())
    }

    fn insert(&mut self, k: usize, occurrences: u8, origin: Origin) {
        let occurrences = if self.cfg.track_occurrences { occurrences } else { 0 };
        let scope = &mut self.scopes[k];
        let table = match scope.tables.get_index_of(&self.scratch[..]) {
            Some(i) => i,
            None => {
                self.bytes += self.scratch.len();
                scope.tables.insert_full(self.scratch.clone().into_boxed_slice()).0
            }
        } as u32;
        if scope.seen.insert((table, occurrences)) {
            scope.items.push(Item { table, occurrences, origin });
        }
    }

    fn atoms(&mut self, k: usize) -> Result<(), ClosureBudget> {
        let width = self.scopes[k].seg_len.iter().fold(0usize, |a, &b| a.saturating_add(b));
        if width > self.cfg.max_bytes {
            return Err(ClosureBudget { depth: 0, scope: k, work: self.work, bytes: width });
        }
        let m = self.scopes[k].vars.len();
        for j in 0..atom_count(m) {
            let f = atom_at(&self.scopes[k].vars, j);
            let mut occ = 0u8;
            self.scratch.clear();
            for (si, seg) in self.segs.iter().enumerate() {
                let n = seg.len();
                let len = self.scopes[k].seg_len[si];
                match &f {
                    Formula::Bot => self.scratch.extend(std::iter::repeat_n(seg.ops.bottom, len)),
                    Formula::Top => self.scratch.extend(std::iter::repeat_n(seg.ops.top, len)),
                    Formula::Atom(kind, a, b) => {
                        let pos = |t: &crate::formula::Term| {
                            let crate::formula::Term::Var(v) = t else { unreachable!("templates have no constants") };
                            self.scopes[k].vars.iter().position(|w| w == v).expect("scope variable")
                        };
                        let (pa, pb) = (pos(a), pos(b));
                        occ = (pa == 0) as u8 + (pb == 0) as u8;
                        let rel = if *kind == AtomKind::Mem { &seg.mem } else { &seg.eq };
                        let (sa, sb) = (n.pow(pa as u32), n.pow(pb as u32));
                        for idx in 0..len {
                            let (va, vb) = ((idx / sa) % n, (idx / sb) % n);
                            self.scratch.push(rel[va * n + vb]);
                        }
                    }
                    _ => unreachable!("depth-0 layer holds atoms only"),
                }
            }
            let total = self.scratch.len();
            self.charge(k, 0, total)?;
            self.insert(k, occ, Origin::Atom(j as u32));
        }
        Ok(())
    }

    fn layer(&mut self, k: usize, d: usize) -> Result<(), ClosureBudget> {
        let (start, end) = self.scopes[k].layer(d - 1);
        for i in start..end {
            self.unary(k, i);
            let total = self.scratch.len();
            self.charge(k, d, total)?;
            let occ = self.scopes[k].items[i].occurrences;
            self.insert(k, occ, Origin::Neg(i as u32));
        }
        for &op in self.cfg.connectives.binary_ops() {
            let pairs = (0..start)
                .flat_map(|a| (start..end).map(move |b| (a, b)))
                .chain((start..end).flat_map(|a| (0..end).map(move |b| (a, b))));
            for (a, b) in pairs {
                self.binary(k, op, a, b);
                let total = self.scratch.len();
                self.charge(k, d, total)?;
                let s = &self.scopes[k];
                let occ = s.items[a].occurrences.saturating_add(s.items[b].occurrences);
                self.insert(k, occ, Origin::Bin(op, a as u32, b as u32));
            }
        }
        if k + 1 < self.scopes.len() {
            let (cs, ce) = self.scopes[k + 1].layer(d - 1);
            for kind in [QuantifierKind::Forall, QuantifierKind::Exists] {
                for c in cs..ce {
                    self.quantify(k, kind, c);
                    let total = self.scratch.len();
                    self.charge(k, d, total)?;
                    let occ = self.scopes[k + 1].items[c].occurrences;
                    self.insert(k, occ, Origin::Quant(kind, c as u32));
                }
            }
        }
        Ok(())
    }

    fn unary(&mut self, k: usize, i: usize) {
        let s = &self.scopes[k];
        let t = &s.tables[s.items[i].table as usize];
        self.scratch.clear();
        for (si, seg) in self.segs.iter().enumerate() {
            let part = &t[s.seg_off[si]..s.seg_off[si] + s.seg_len[si]];
            self.scratch.extend(part.iter().map(|&x| seg.ops.neg[x as usize]));
        }
    }

    fn binary(&mut self, k: usize, op: BinaryOp, a: usize, b: usize) {
        let s = &self.scopes[k];
        let ta = &s.tables[s.items[a].table as usize];
        let tb = &s.tables[s.items[b].table as usize];
        self.scratch.clear();
        for (si, seg) in self.segs.iter().enumerate() {
            let range = s.seg_off[si]..s.seg_off[si] + s.seg_len[si];
            let table = seg.ops.binary(op);
            let size = seg.ops.size;
            self.scratch.extend(
                ta[range.clone()]
                    .iter()
                    .zip(&tb[range])
                    .map(|(&x, &y)| table[x as usize * size + y as usize]),
            );
        }
    }

    fn quantify(&mut self, k: usize, kind: QuantifierKind, c: usize) {
        let (outer, inner) = (&self.scopes[k], &self.scopes[k + 1]);
        let t = &inner.tables[inner.items[c].table as usize];
        self.scratch.clear();
        for (si, seg) in self.segs.iter().enumerate() {
            let n = seg.len();
            let len = outer.seg_len[si];
            let base = inner.seg_off[si];
            let (table, init) = match kind {
                QuantifierKind::Forall => (&seg.ops.meet, seg.ops.top),
                QuantifierKind::Exists => (&seg.ops.join, seg.ops.bottom),
            };
            let size = seg.ops.size;
            for idx in 0..len {
                let mut acc = init;
                for v in 0..n {
                    acc = table[acc as usize * size + t[base + idx + v * len] as usize];
                }
                self.scratch.push(acc);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, BTreeSet};

    use super::*;
    use crate::formula::{enumerate_templates, TemplateEnumerator};
    use crate::model::eval_sentence;
    use crate::quantale::{builtin, lukasiewicz_chain};

    fn carrier_l3(u: &Universe) -> Vec<ElemId> {
        let e = u.empty();
        let q = u.quantale();
        let half = q.by_label("1/2").unwrap();
        let f = u.intern(vec![(e, half)]).unwrap();
        let g = u.intern(vec![(e, q.top())]).unwrap();
        vec![e, f, g]
    }

    /// Table of a template computed by the evaluator over every assignment.
    fn ast_table(u: &Universe, s: &Structure, f: &Formula, vars: &[String]) -> Vec<u8> {
        let n = s.len();
        let len = n.pow(vars.len() as u32);
        (0..len)
            .map(|idx| {
                let env: BTreeMap<String, ElemId> = vars
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v.clone(), s.carrier()[(idx / n.pow(i as u32)) % n]))
                    .collect();
                eval_sentence(u, s.carrier(), f, &env).unwrap().raw()
            })
            .collect()
    }

    fn dual_route(u: &Universe, carrier: &[ElemId], depth: usize, params: usize) {
        let s = Structure::from_universe(u, carrier);
        let mut c = Closure::new(vec![&s], ClosureConfig::new(params, Connectives::Residuated));
        c.ensure(depth).unwrap();
        let closure_tables: BTreeSet<Vec<u8>> = c.items(depth).map(|it| it.table.to_vec()).collect();
        let vars = scope_vars(params, 0);
        let stream: BTreeSet<Vec<u8>> = enumerate_templates(depth, params)
            .iter()
            .map(|t| ast_table(u, &s, &t.body, &vars))
            .collect();
        assert_eq!(closure_tables, stream);
        for it in c.items(depth) {
            let f = c.formula(it.index);
            assert!(f.depth() <= depth);
            assert_eq!(ast_table(u, &s, &f, &vars), it.table, "{f}");
        }
    }

    #[test]
    fn closure_matches_template_stream_depth_one() {
        let u = Universe::new(lukasiewicz_chain(3).unwrap());
        let carrier = carrier_l3(&u);
        dual_route(&u, &carrier, 1, 1);
    }

    #[test]
    fn closure_matches_template_stream_depth_two_small() {
        let u = Universe::new(lukasiewicz_chain(3).unwrap());
        let carrier = carrier_l3(&u);
        dual_route(&u, &carrier[..2], 2, 0);
    }

    #[test]
    fn occurrence_tracking_separates_counts() {
        let u = Universe::new(lukasiewicz_chain(3).unwrap());
        let carrier = carrier_l3(&u);
        let s = Structure::from_universe(&u, &carrier);
        let mut cfg = ClosureConfig::new(0, Connectives::Residuated);
        cfg.track_occurrences = true;
        let mut c = Closure::new(vec![&s], cfg);
        c.ensure(1).unwrap();
        for it in c.items(1) {
            let f = c.formula(it.index);
            assert_eq!(f.count_free_occurrences("x"), it.occurrences as usize, "{f}");
        }
        // x = x (two occurrences) and top (none) share a table but stay apart
        let top_like: Vec<u8> = c.items(0).filter(|it| it.table.iter().all(|&v| v == 2)).map(|it| it.occurrences).collect();
        assert_eq!(top_like, [0, 2]);
    }

    #[test]
    fn joint_segments_use_their_own_quantale() {
        let u = Universe::new(lukasiewicz_chain(3).unwrap());
        let b = Universe::new(builtin("boolean:1").unwrap());
        let s1 = Structure::from_universe(&u, &carrier_l3(&u));
        let be = b.empty();
        let s2 = Structure::from_universe(&b, &[be]);
        let mut c = Closure::new(vec![&s1, &s2], ClosureConfig::new(0, Connectives::Residuated));
        c.ensure(1).unwrap();
        for it in c.items(1) {
            assert_eq!(c.segment(it.table, 0).len(), 3);
            assert_eq!(c.segment(it.table, 1).len(), 1);
            let f = c.formula(it.index);
            let v1 = ast_table(&u, &s1, &f, &scope_vars(0, 0));
            let v2 = ast_table(&b, &s2, &f, &scope_vars(0, 0));
            assert_eq!(c.segment(it.table, 0), &v1[..]);
            assert_eq!(c.segment(it.table, 1), &v2[..]);
        }
    }

    #[test]
    fn closure_is_much_smaller_than_stream() {
        let u = Universe::new(lukasiewicz_chain(3).unwrap());
        let carrier = carrier_l3(&u);
        let s = Structure::from_universe(&u, &carrier);
        let mut c = Closure::new(vec![&s], ClosureConfig::new(1, Connectives::Residuated));
        c.ensure(2).unwrap();
        let e: TemplateEnumerator = enumerate_templates(2, 1);
        assert!((c.items(2).count() as u128) < e.len() / 100);
    }

    #[test]
    fn budget_is_enforced() {
        let u = Universe::new(lukasiewicz_chain(3).unwrap());
        let carrier = carrier_l3(&u);
        let s = Structure::from_universe(&u, &carrier);
        let mut cfg = ClosureConfig::new(1, Connectives::Residuated);
        cfg.max_work = 1_000;
        let mut c = Closure::new(vec![&s], cfg);
        assert!(c.ensure(2).is_err());
    }
}
