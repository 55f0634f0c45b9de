use std::collections::BTreeSet;

use super::{def_strong, def_weak, DefConfig};
use crate::definable::{Closure, Structure};
use crate::model::{hat, ElemId, EqMode, HfSet, Stage, Universe};
use crate::quantale::QElem;
use crate::report::{Check, CheckRecord};
use crate::witness;

fn span(stages: &[Stage]) -> String {
    match (stages.first(), stages.last()) {
        (Some(a), Some(b)) => format!("{}{}..{}", a.tag, a.label, b.label),
        _ => String::new(),
    }
}

/// Every value of every member lies in `{bottom, top}`.
pub fn check_two_valued(u: &Universe, stages: &[Stage]) -> CheckRecord {
    let q = u.quantale();
    let mut c = Check::new("constructible.two_valued").stage(span(stages));
    let mut values = 0usize;
    for s in stages {
        for &m in &s.members {
            for &(key, v) in &u.elem(m).entries {
                values += 1;
                c.require(q.is_two_valued(v), || {
                    witness! {"stage" => s.label, "element" => u.describe(m), "key" => u.describe(key), "value" => q.label(v)}
                });
            }
        }
    }
    c.detail(format!("{values} values in {} stages", stages.len()));
    c.finish()
}

/// `stages[k] ⊆ bound[k]` as interned elements, stage by stage.
pub fn check_inclusion(name: &str, stages: &[Stage], bound: &[Stage]) -> CheckRecord {
    let mut c = Check::new(name).stage(span(stages));
    for (s, b) in stages.iter().zip(bound) {
        let set = b.member_set();
        for &m in &s.members {
            c.require(set.contains(&m), || witness! {"stage" => s.label, "element" => m});
        }
    }
    c.finish()
}

/// `stages[k] ⊆ stages[k+1]`. Violations are info unless every stage is saturated
/// and was built from all subsets of its predecessor.
pub fn check_monotone(u: &Universe, stages: &[Stage]) -> CheckRecord {
    let mut c = Check::new("constructible.monotone").stage(span(stages));
    for w in stages.windows(2) {
        let next = w[1].member_set();
        for &m in &w[0].members {
            c.require(next.contains(&m), || witness! {"stage" => w[0].label, "element" => u.describe(m)});
        }
    }
    let exact = stages[1..]
        .iter()
        .all(|s| s.saturated == Some(true) && !s.config.contains("co-singletons"));
    if exact {
        c.finish()
    } else {
        c.detail("stages not saturated or domains reduced");
        c.finish_as_info()
    }
}

fn extends_by_bottom(u: &Universe, f: ElemId, g: ElemId) -> bool {
    let (fe, ge) = (u.elem(f), u.elem(g));
    let bottom = u.quantale().bottom();
    ge.entries.iter().all(|&(k, v)| fe.value_at(k) == Some(v))
        && fe.entries.iter().all(|&(k, v)| ge.value_at(k).is_some() || v == bottom)
}

/// `[[f = g]] = top` whenever `f` extends `g` by bottom-valued entries.
pub fn check_extension_lemma(u: &Universe, members: &[ElemId], stage: &str) -> CheckRecord {
    let q = u.quantale();
    let mut c = Check::new("constructible.extension_lemma").stage(stage);
    let mut pairs = 0usize;
    for &f in members {
        for &g in members {
            if f == g || !extends_by_bottom(u, f, g) {
                continue;
            }
            pairs += 1;
            let v = u.val_eq(f, g);
            c.require(v == q.top(), || witness! {"f" => u.describe(f), "g" => u.describe(g), "value" => q.label(v)});
        }
    }
    c.detail(format!("{pairs} extension pairs"));
    c.finish()
}

/// `[[f = g]] = top` implies `[[phi(f, a)]] = [[phi(g, a)]]` for every template
/// within `cfg` and every parameter tuple from `carrier`.
pub fn check_lemma_equality(u: &Universe, carrier: &[ElemId], cfg: &DefConfig, stage: &str) -> CheckRecord {
    let q = u.quantale();
    let n = carrier.len();
    let s = Structure::from_universe(u, carrier);
    let equal: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && s.eq(i, j) == q.top())
        .collect();
    let mut c = Check::new("constructible.equality_lemma").stage(stage);
    let mut closure = Closure::new(vec![&s], cfg.closure(cfg.max_params));
    if let Err(e) = closure.ensure(cfg.max_depth) {
        return CheckRecord::info("constructible.equality_lemma", format!("not run: {e}")).at_stage(stage);
    }
    let tuples = n.pow(cfg.max_params as u32);
    let mut checked = 0u64;
    for it in closure.items(cfg.max_depth) {
        for &(i, j) in &equal {
            for b in 0..tuples {
                let (vi, vj) = (it.table[i + n * b], it.table[j + n * b]);
                checked += 1;
                c.require(vi == vj, || {
                    let label = |v: u8| q.label(QElem::from_index(v as usize)).to_string();
                    witness! {"phi" => closure.formula(it.index), "f" => u.describe(carrier[i]),
                        "g" => u.describe(carrier[j]), "phi(f)" => label(vi), "phi(g)" => label(vj), "params" => b}
                });
            }
        }
    }
    c.detail(format!("{} equal pairs, {checked} instances", equal.len()));
    c.finish()
}

/// Every hereditarily finite set of rank at most `rank` is `[[=]]`-equal to some member of `stage`.
pub fn check_hat_into_frak_l(u: &Universe, stage: &Stage, rank: usize) -> CheckRecord {
    let q = u.quantale();
    let sets = HfSet::all_up_to_rank(rank);
    let mut c = Check::new("constructible.hat_into_frakL").stage(format!("{}{}", stage.tag, stage.label));
    for x in &sets {
        let hx = hat(u, x);
        let hit = stage.members.iter().any(|&m| u.val_eq(hx, m) == q.top());
        c.require(hit, || witness! {"set" => x, "hat" => u.describe(hx)});
    }
    c.detail(format!("{} sets of rank <= {rank}", sets.len()));
    c.finish()
}

/// Strongly definable subsets of `m` are among the weakly definable ones.
pub fn check_def_strong_in_weak(u: &Universe, m: &[ElemId], cfg: &DefConfig, stage: &str) -> CheckRecord {
    let (strong, weak) = match (def_strong(u, m, cfg), def_weak(u, m, cfg)) {
        (Ok(s), Ok(w)) => (s, w),
        (Err(e), _) | (_, Err(e)) => {
            return CheckRecord::info("constructible.strong_in_weak", format!("not run: {e}")).at_stage(stage)
        }
    };
    let weak: BTreeSet<ElemId> = weak.members.into_iter().collect();
    let mut c = Check::new("constructible.strong_in_weak").stage(stage);
    for s in &strong.members {
        c.require(weak.contains(s), || witness! {"element" => u.describe(*s)});
    }
    c.detail(format!("{} strong, {} weak", strong.members.len(), weak.len()));
    c.finish()
}

/// Where `[[=]]` built from products differs from the one built from meets. Always info.
pub fn check_eq_mode_divergence(u: &Universe, carrier: &[ElemId], stage: &str) -> CheckRecord {
    let q = u.quantale();
    let other = u.fork_with_mode(match u.mode() {
        EqMode::Product => EqMode::Meet,
        EqMode::Meet => EqMode::Product,
    });
    let mut c = Check::new("model.eq_mode_divergence").stage(stage);
    let mut differ = 0usize;
    for &f in carrier {
        for &g in carrier {
            let (a, b) = (u.val_eq(f, g), other.val_eq(f, g));
            if a != b {
                differ += 1;
                if differ <= 5 {
                    c.violation(witness! {"f" => u.describe(f), "g" => u.describe(g),
                        format!("{:?}", u.mode()).as_str() => q.label(a), format!("{:?}", other.mode()).as_str() => q.label(b)});
                }
            }
        }
    }
    c.detail(format!("{differ} of {} pairs differ", carrier.len() * carrier.len()));
    let mut r = c.finish_as_info();
    r.status = crate::report::Status::Info;
    r.violations = differ;
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructible::{build_bb_l, build_frak_l};
    use crate::model::build_v_stage;
    use crate::quantale::lukasiewicz_chain;
    use crate::report::Status;

    fn l3() -> Universe {
        Universe::new(lukasiewicz_chain(3).unwrap())
    }

    #[test]
    fn two_valuedness_and_its_negative_control() {
        let u = l3();
        let cfg = DefConfig::new(2, 1);
        let frak = build_frak_l(&u, 3, &cfg).unwrap();
        assert_eq!(check_two_valued(&u, &frak).status, Status::Pass);
        let bb = build_bb_l(&u, 3, &cfg).unwrap();
        assert_eq!(check_two_valued(&u, &bb).status, Status::Pass);
        let all: Vec<QElem> = u.quantale().elements().collect();
        let v = build_v_stage(&u, 2, &all, 100).unwrap();
        let r = check_two_valued(&u, &v);
        assert_eq!(r.status, Status::Fail);
        assert!(r.witnesses.iter().any(|w| w.get("value") == Some("1/2")));
    }

    #[test]
    fn frak_l_sits_inside_two_valued_v() {
        let u = l3();
        let q = u.quantale();
        let frak = build_frak_l(&u, 3, &DefConfig::new(2, 1)).unwrap();
        let v = build_v_stage(&u, 3, &[q.bottom(), q.top()], 1000).unwrap();
        assert_eq!(check_inclusion("constructible.inclusion", &frak, &v).status, Status::Pass);
        assert_eq!(check_inclusion("x", &v, &frak).status, Status::Fail);
    }

    #[test]
    fn extension_and_equality_lemmas() {
        let u = l3();
        let q = u.quantale();
        let e = u.empty();
        let f = u.intern(vec![(e, q.bottom())]).unwrap();
        let r = check_extension_lemma(&u, &[e, f], "pair");
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.detail.as_deref(), Some("1 extension pairs"));
        let one = u.intern(vec![(e, q.top())]).unwrap();
        let r = check_lemma_equality(&u, &[e, f, one], &DefConfig::new(2, 1), "pair");
        assert_eq!(r.status, Status::Pass, "{r:?}");
        assert!(r.detail.unwrap().starts_with("2 equal pairs"));
    }

    #[test]
    fn equality_lemma_skips_unequal_pairs() {
        let u = l3();
        let q = u.quantale();
        let e = u.empty();
        let half = u.intern(vec![(e, q.by_label("1/2").unwrap())]).unwrap();
        let r = check_lemma_equality(&u, &[e, half], &DefConfig::new(1, 0), "V2");
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.detail.as_deref(), Some("0 equal pairs, 0 instances"));
    }

    #[test]
    fn hat_images_reach_frak_l() {
        let u = l3();
        let frak = build_frak_l(&u, 3, &DefConfig::new(2, 1)).unwrap();
        assert_eq!(check_hat_into_frak_l(&u, &frak[3], 2).status, Status::Pass);
        assert_eq!(check_hat_into_frak_l(&u, &frak[1], 1).status, Status::Fail);
    }

    #[test]
    fn eq_modes_agree_on_two_valued_elements() {
        let u = l3();
        let frak = build_frak_l(&u, 3, &DefConfig::new(2, 1)).unwrap();
        let r = check_eq_mode_divergence(&u, &frak[3].members, "frakL3");
        assert_eq!(r.status, Status::Info);
        assert_eq!(r.violations, 0);
    }
}
