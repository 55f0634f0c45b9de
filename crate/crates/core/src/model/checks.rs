use std::collections::BTreeMap;

use super::hf::classical_truth;
use super::{hat, is_bounded, ElemId, HfSet, Relation, Stage, Universe};
use crate::definable::{Closure, ClosureConfig, Structure};
use crate::formula::{parse, scope_vars, Connectives, Formula, Term};
use crate::quantale::QElem;
use crate::report::{Check, CheckRecord, Report};
use crate::witness;

/// Bounded-quantifier formulas in the free variables `a` and `b`.
pub fn standard_bounded_formulas() -> Vec<(String, Formula)> {
    [
        ("transitive", "A x. x in a -> (A y. y in x -> y in a)"),
        ("empty", "A x. x in a -> bot"),
        ("subset", "A x. x in a -> x in b"),
        ("extensional", "((A x. x in a -> x in b) /\\ (A x. x in b -> x in a)) == a = b"),
        ("two_distinct_members", "E x. x in a & (E y. y in a & ~(x = y))"),
        ("singleton", "E x. x in a & (A y. y in a -> y = x)"),
        ("meets", "E x. x in a /\\ x in b"),
        ("linear", "A x. x in a -> (A y. y in a -> x in y \\/ x = y \\/ y in x)"),
        ("member_of_member", "E x. x in b & a in x"),
    ]
    .into_iter()
    .map(|(name, text)| (name.to_string(), parse(text).expect("built-in formula parses")))
    .collect()
}

/// Hat images of hereditarily finite sets are two-valued and classical.
///
/// Quantifiers range over the hats of all sets of rank at most `rank_bound`;
/// the classical side is evaluated directly on the sets.
pub fn check_hat_transfer(u: &Universe, formulas: &[(String, Formula)], rank_bound: usize) -> Report {
    let q = u.quantale();
    let sets = HfSet::all_up_to_rank(rank_bound);
    let hats: Vec<ElemId> = sets.iter().map(|x| hat(u, x)).collect();
    let stage = format!("rank<={rank_bound}");
    let mut report = Report::new();

    let mut injective = Check::new("hat.injective").stage(&stage);
    let mut distinct = hats.clone();
    distinct.sort();
    distinct.dedup();
    injective.require(distinct.len() == hats.len(), || witness! {"sets" => sets.len(), "images" => distinct.len()});
    report.push(injective.finish());

    let mut two_valued = Check::new("hat.atomic_two_valued").stage(&stage);
    let mut classical = Check::new("hat.atomic_classical").stage(&stage);
    for (x, &hx) in sets.iter().zip(&hats) {
        for (y, &hy) in sets.iter().zip(&hats) {
            let mem = u.val_mem(hx, hy);
            let eq = u.val_eq(hx, hy);
            for (rel, v) in [("in", mem), ("=", eq)] {
                two_valued.require(q.is_two_valued(v), || {
                    witness! {"x" => x, "y" => y, "relation" => rel, "value" => q.label(v)}
                });
            }
            classical.require((mem == q.top()) == y.contains(x), || {
                witness! {"x" => x, "y" => y, "relation" => "in", "value" => q.label(mem)}
            });
            classical.require((eq == q.top()) == (x == y), || {
                witness! {"x" => x, "y" => y, "relation" => "=", "value" => q.label(eq)}
            });
        }
    }
    two_valued.detail(format!("{} pairs", sets.len() * sets.len()));
    report.push(two_valued.finish());
    report.push(classical.finish());

    let mut shape = Check::new("hat.bounded_form");
    let mut agree = Check::new("hat.bounded_formulas").stage(&stage);
    let mut instances = 0usize;
    for (name, f) in formulas {
        shape.require(is_bounded(f), || witness! {"formula" => name, "text" => f});
        let vars: Vec<String> = f.free_vars().into_iter().collect();
        let count = sets.len().pow(vars.len() as u32);
        for idx in 0..count {
            let pick = |i: usize| (idx / sets.len().pow(i as u32)) % sets.len();
            let env_v: BTreeMap<String, ElemId> =
                vars.iter().enumerate().map(|(i, v)| (v.clone(), hats[pick(i)])).collect();
            let env_c: BTreeMap<String, HfSet> =
                vars.iter().enumerate().map(|(i, v)| (v.clone(), sets[pick(i)].clone())).collect();
            let value = super::eval_sentence(u, &hats, f, &env_v).expect("formula closed by the assignment");
            let truth = classical_truth(f, &sets, &env_c);
            instances += 1;
            agree.require(q.is_two_valued(value) && (value == q.top()) == truth, || {
                let mut w = witness! {"formula" => name, "classical" => truth, "value" => q.label(value)};
                for (k, v) in &env_c {
                    w = w.with(k, v);
                }
                w
            });
        }
    }
    shape.detail(format!("{} formulas", formulas.len()));
    agree.detail(format!("{} formulas, {instances} instances", formulas.len()));
    report.push(shape.finish());
    report.push(agree.finish());
    report
}

/// `[[f = f]] = top` for every member of every stage.
pub fn check_reflexivity(u: &Universe, stages: &[Stage]) -> CheckRecord {
    let q = u.quantale();
    let tag = stages.first().map(|s| s.tag.to_string()).unwrap_or_default();
    let mut c = Check::new("model.reflexivity").stage(format!("{tag}0..{}", stages.len().saturating_sub(1)));
    let mut n = 0;
    for s in stages {
        for &m in &s.members {
            n += 1;
            let v = u.val_eq(m, m);
            c.require(v == q.top(), || witness! {"stage" => s.label, "f" => u.describe(m), "value" => q.label(v)});
        }
    }
    c.detail(format!("{n} members"));
    c.finish()
}

/// Recomputing every atomic value of `carrier` from an empty cache gives the same results.
pub fn check_memo_soundness(u: &Universe, carrier: &[ElemId], stage: &str) -> CheckRecord {
    let rels = [Relation::Sub, Relation::Eq, Relation::Mem];
    let mut before = Vec::with_capacity(carrier.len() * carrier.len() * 3);
    for &a in carrier {
        for &b in carrier {
            for r in rels {
                before.push(u.val(r, a, b));
            }
        }
    }
    u.clear_cache();
    let mut c = Check::new("model.memo_soundness").stage(stage);
    let mut i = 0;
    for &a in carrier {
        for &b in carrier {
            for r in rels {
                let v = u.val(r, a, b);
                let old = before[i];
                c.require(v == old, || {
                    witness! {"f" => u.describe(a), "g" => u.describe(b), "relation" => format!("{r:?}"),
                    "cached" => u.quantale().label(old), "recomputed" => u.quantale().label(v)}
                });
                i += 1;
            }
        }
    }
    c.detail(format!("{} values", before.len()));
    c.finish()
}

/// Residuated validities instantiated with atomic facts about `carrier`.
pub fn check_soundness_spot_suite(u: &Universe, carrier: &[ElemId], stage: &str) -> Vec<CheckRecord> {
    let q = u.quantale();
    let sample = &carrier[..carrier.len().min(4)];
    let mut atoms = Vec::new();
    for &a in sample {
        for &b in sample {
            let (ta, tb) = (Term::Const(a), Term::Const(b));
            atoms.push(Formula::mem(ta.clone(), tb.clone()));
            atoms.push(Formula::eq(ta, tb));
        }
    }
    let eval = |f: &Formula| super::eval_sentence(u, carrier, f, &BTreeMap::new()).expect("closed sentence");
    let mut mp = Check::new("soundness.modus_ponens").stage(stage);
    let mut weak = Check::new("soundness.weakening").stage(stage);
    let mut curry = Check::new("soundness.residuation").stage(stage);
    let mut de_morgan = Check::new("soundness.de_morgan_join").stage(stage);
    let mut de_morgan_product = Check::new("soundness.de_morgan_join_product_form").stage(stage);
    let w = |fs: &[&Formula], v: QElem| {
        let mut w = witness! {"value" => q.label(v)};
        for (name, f) in ["phi", "psi", "chi"].iter().zip(fs) {
            w = w.with(name, f);
        }
        w
    };
    for phi in &atoms {
        for psi in &atoms {
            let (p, s) = (phi.clone(), psi.clone());
            let f = Formula::imp(Formula::strong(p.clone(), Formula::imp(p.clone(), s.clone())), s.clone());
            let v = eval(&f);
            mp.require(v == q.top(), || w(&[phi, psi], v));
            let f = Formula::imp(p.clone(), Formula::imp(s.clone(), p.clone()));
            let v = eval(&f);
            weak.require(v == q.top(), || w(&[phi, psi], v));
            let lhs = Formula::neg(Formula::or(p.clone(), s.clone()));
            let f = Formula::equiv(lhs.clone(), Formula::weak(Formula::neg(p.clone()), Formula::neg(s.clone())));
            let v = eval(&f);
            de_morgan.require(v == q.top(), || w(&[phi, psi], v));
            let f = Formula::equiv(lhs, Formula::strong(Formula::neg(p.clone()), Formula::neg(s.clone())));
            let v = eval(&f);
            de_morgan_product.require(v == q.top(), || w(&[phi, psi], v));
            for chi in &atoms {
                let c = chi.clone();
                let curried = Formula::imp(p.clone(), Formula::imp(s.clone(), c.clone()));
                let uncurried = Formula::imp(Formula::strong(p.clone(), s.clone()), c);
                for f in [
                    Formula::imp(uncurried.clone(), curried.clone()),
                    Formula::imp(curried, uncurried),
                ] {
                    let v = eval(&f);
                    curry.require(v == q.top(), || w(&[phi, psi, chi], v));
                }
            }
        }
    }
    let detail = format!("{} atomic instances", atoms.len());
    let mut out = Vec::new();
    for mut c in [mp, weak, curry, de_morgan] {
        c.detail(detail.clone());
        out.push(c.finish());
    }
    de_morgan_product.detail("~(phi \\/ psi) == ~phi & ~psi; holds only where the product of negations equals their meet");
    out.push(de_morgan_product.finish_as_info());
    out
}

/// `[[f = g]]^n * [[theta(f)]] <= [[theta(g)]]` where `n` counts the free
/// occurrences of the subject in `theta`, over every template of depth at
/// most `depth` and every parameter tuple from `carrier`.
pub fn check_n_fold_substitution(
    u: &Universe,
    carrier: &[ElemId],
    depth: usize,
    params: usize,
    connectives: Connectives,
    stage: &str,
) -> CheckRecord {
    let q = u.quantale();
    let s = Structure::from_universe(u, carrier);
    let mut cfg = ClosureConfig::new(params, connectives);
    cfg.track_occurrences = true;
    let mut closure = Closure::new(vec![&s], cfg);
    let mut c = Check::new("model.n_fold_substitution").stage(stage);
    if let Err(e) = closure.ensure(depth) {
        let mut r = CheckRecord::info("model.n_fold_substitution", format!("not run: {e}"));
        r.stage = Some(stage.to_string());
        return r;
    }
    let n = carrier.len();
    let tuples = n.pow(params as u32);
    let vars = scope_vars(params, 0);
    let mut checked = 0u64;
    for it in closure.items(depth) {
        for i in 0..n {
            for j in 0..n {
                let e = s.eq(i, j);
                let weight = q.power(e, it.occurrences as u32);
                for b in 0..tuples {
                    let lhs = q.product(weight, QElem::from_index(it.table[i + n * b] as usize));
                    let rhs = QElem::from_index(it.table[j + n * b] as usize);
                    checked += 1;
                    c.require(q.leq(lhs, rhs), || {
                        let mut w = witness! {"theta" => closure.formula(it.index), "n" => it.occurrences,
                            "f" => u.describe(carrier[i]), "g" => u.describe(carrier[j]),
                            "f=g" => q.label(e), "theta(f)" => q.label(QElem::from_index(it.table[i + n * b] as usize)),
                            "theta(g)" => q.label(rhs)};
                        for (p, v) in vars[1..].iter().enumerate() {
                            w = w.with(v, u.describe(carrier[(b / n.pow(p as u32)) % n]));
                        }
                        w
                    });
                }
            }
        }
    }
    c.detail(format!("{} (template, occurrence) classes, {checked} instances", closure.items(depth).count()));
    c.finish()
}
