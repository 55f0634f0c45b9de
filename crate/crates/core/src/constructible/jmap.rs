use std::collections::BTreeMap;

use super::{ClassicalHierarchy, ClassicalStage, DefConfig};
use crate::definable::{Closure, Structure};
use crate::model::{ElemId, HfSet, Stage, Universe};
use crate::quantale::QElem;
use crate::report::{Check, CheckRecord, Report};
use crate::witness;

/// The map from classical `L` into the strong hierarchy.
#[derive(Clone, Debug, Default)]
pub struct JMap {
    pub map: BTreeMap<HfSet, ElemId>,
    /// Least classical stage containing the set.
    pub rank: BTreeMap<HfSet, usize>,
    /// First defining pair found for each set, rendered as text.
    pub defined_by: BTreeMap<HfSet, String>,
}

impl JMap {
    pub fn get(&self, x: &HfSet) -> Option<ElemId> {
        self.map.get(x).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn tuple_index(digits: Vec<usize>, n: usize) -> usize {
    digits.into_iter().rev().fold(0, |acc, d| acc * n + d)
}

fn digits(mut idx: usize, n: usize, len: usize) -> Vec<usize> {
    (0..len)
        .map(|_| {
            let d = idx % n;
            idx /= n;
            d
        })
        .collect()
}

fn saturated(stages: &[Option<bool>]) -> bool {
    stages.iter().all(|s| *s == Some(true))
}

fn stage_saturation(classical: &ClassicalHierarchy, bb: &[Stage], upto: usize) -> Vec<Option<bool>> {
    let mut out = Vec::new();
    for k in 1..=upto {
        out.push(classical.stages.get(k).and_then(|s| s.saturated));
        out.push(bb.get(k).and_then(|s| s.saturated));
    }
    out
}

fn finish_gated(c: Check, gate: bool) -> CheckRecord {
    if gate || c.violations() == 0 {
        return c.finish();
    }
    let mut r = c.finish_as_info();
    let d = r.detail.take().unwrap_or_default();
    r.detail = Some(format!("{d} (stages not saturated, depth-bounded)").trim().to_string());
    r
}

fn closure_depth(classical: &ClassicalHierarchy, bb: &[Stage], k: usize, cfg: &DefConfig) -> usize {
    let c = classical.stages.get(k).and_then(|s| s.depth).unwrap_or(0);
    let b = bb.get(k).and_then(|s| s.depth).unwrap_or(0);
    cfg.max_depth.max(c).max(b)
}

/// `j(X)(c) = [[phi(c, j(b))]]` on the members of `bbL_a`, for every `X` new in `L_{a+1}`
/// defined over `L_a` by `(phi, b)`.
///
/// Every defining pair found within the configuration is compared against the first one.
pub fn build_j(u: &Universe, classical: &ClassicalHierarchy, bb: &[Stage], cfg: &DefConfig) -> (JMap, Report) {
    let mut j = JMap::default();
    let mut report = Report::new();
    let cu = &classical.universe;
    let top_a = cu.quantale().top().raw();
    let alpha = classical.stages.len().min(bb.len()).saturating_sub(1);
    if alpha >= 1 {
        let e = HfSet::empty();
        j.map.insert(e.clone(), u.empty());
        j.rank.insert(e.clone(), 1);
        j.defined_by.insert(e, "x = x".into());
    }
    for k in 1..alpha {
        let la = &classical.stages[k];
        let lb = &bb[k];
        let gate = saturated(&stage_saturation(classical, bb, k + 1));
        let mut wd = Check::new("j.well_defined").stage(format!("L{}", k + 1));
        let positions: Option<Vec<usize>> = la
            .members
            .iter()
            .map(|x| j.get(x).and_then(|id| lb.members.iter().position(|&m| m == id)))
            .collect();
        let Some(positions) = positions else {
            report.push(
                CheckRecord::info("j.well_defined", "parameters have no image in the previous stage")
                    .at_stage(format!("L{}", k + 1)),
            );
            continue;
        };
        let sa = Structure::from_universe(cu, &la.hats);
        let sb = Structure::from_universe(u, &lb.members);
        let mut closure = Closure::new(vec![&sa, &sb], cfg.closure(cfg.max_params));
        let depth = closure_depth(classical, bb, k + 1, cfg);
        if let Err(e) = closure.ensure(depth) {
            report.push(CheckRecord::info("j.well_defined", format!("not run: {e}")).at_stage(format!("L{}", k + 1)));
            continue;
        }
        let (na, nb) = (sa.len(), sb.len());
        let tuples = na.pow(cfg.max_params as u32);
        let mut images: BTreeMap<HfSet, (Vec<u8>, String)> = BTreeMap::new();
        let mut pairs = 0usize;
        for it in closure.items(depth) {
            let ta = closure.segment(it.table, 0);
            let tb = closure.segment(it.table, 1);
            for bi in 0..tuples {
                let params = digits(bi, na, cfg.max_params);
                let x = HfSet::new(
                    (0..na).filter(|&i| ta[i + na * bi] == top_a).map(|i| la.members[i].clone()),
                );
                if la.position(&x).is_some() {
                    continue;
                }
                let bj = tuple_index(params.iter().map(|&p| positions[p]).collect(), nb);
                let f = tb[nb * bj..nb * (bj + 1)].to_vec();
                pairs += 1;
                let describe = || {
                    let mut s = closure.formula(it.index).to_string();
                    for (p, &d) in params.iter().enumerate() {
                        s.push_str(&format!(", y{}={}", p + 1, la.members[d]));
                    }
                    s
                };
                match images.get(&x) {
                    None => {
                        images.insert(x, (f, describe()));
                    }
                    Some((g, first)) => {
                        if *g != f {
                            let label = |v: &[u8]| {
                                v.iter().map(|&c| u.quantale().label(QElem::from_index(c as usize)).to_string()).collect::<Vec<_>>().join(",")
                            };
                            wd.violation(witness! {"X" => &x, "first" => first, "second" => describe(),
                                "first_values" => label(g), "second_values" => label(&f)});
                        }
                    }
                }
            }
        }
        for (x, (values, text)) in images {
            let entries = lb.members.iter().zip(&values).map(|(&m, &v)| (m, QElem::from_index(v as usize))).collect();
            let id = u.intern(entries).expect("values come from the quantale");
            j.map.insert(x.clone(), id);
            j.rank.insert(x.clone(), k + 1);
            j.defined_by.insert(x, text);
        }
        wd.detail(format!("{pairs} defining pairs, depth {depth}"));
        report.push(finish_gated(wd, gate));
    }
    let mut total = Check::new("j.total").stage(format!("L{alpha}"));
    if let Some(top) = classical.stages.get(alpha) {
        for x in &top.members {
            total.require(j.get(x).is_some(), || witness! {"X" => x});
        }
    }
    let gate = saturated(&stage_saturation(classical, bb, alpha));
    report.push(finish_gated(total, gate));
    (j, report)
}

/// Range, injectivity, surjectivity modulo `[[=]]`, elementarity and rank preservation at each stage.
///
/// A violation counts as a failure only when every stage involved is saturated.
pub fn verify_j(u: &Universe, j: &JMap, classical: &ClassicalHierarchy, bb: &[Stage], cfg: &DefConfig) -> Report {
    let q = u.quantale();
    let cu = &classical.universe;
    let mut report = Report::new();
    let alpha = classical.stages.len().min(bb.len()).saturating_sub(1);
    for k in 1..=alpha {
        let la = &classical.stages[k];
        let lb = &bb[k];
        let gate = saturated(&stage_saturation(classical, bb, k));
        let stage = format!("{k}");

        let mut range = Check::new("j.range").stage(&stage);
        let mut positions = Vec::with_capacity(la.members.len());
        for x in &la.members {
            let pos = j.get(x).and_then(|id| lb.members.iter().position(|&m| m == id));
            range.require(pos.is_some(), || witness! {"X" => x, "j(X)" => j.get(x).map(|id| u.describe(id)).unwrap_or("undefined".into())});
            positions.push(pos);
        }
        range.detail(format!("{} sets into {} members", la.members.len(), lb.len()));
        report.push(finish_gated(range, gate));

        let mut inj = Check::new("j.injective").stage(&stage);
        let mut seen: BTreeMap<ElemId, &HfSet> = BTreeMap::new();
        for x in &la.members {
            if let Some(id) = j.get(x) {
                if let Some(prev) = seen.insert(id, x) {
                    inj.violation(witness! {"X" => prev, "Y" => x, "j" => u.describe(id)});
                }
            }
        }
        report.push(finish_gated(inj, gate));

        let mut surj = Check::new("j.surjective_mod_eq").stage(&stage);
        for &y in &lb.members {
            let hit = la.members.iter().filter_map(|x| j.get(x)).any(|jx| u.val_eq(jx, y) == q.top());
            surj.require(hit, || witness! {"Y" => u.describe(y)});
        }
        report.push(finish_gated(surj, gate));

        let mut rank = Check::new("j.rank_preserving").stage(&stage);
        for x in &la.members {
            let Some(id) = j.get(x) else { continue };
            let rl = classical.rank_of(x);
            let rb = bb.iter().position(|s| s.contains(id));
            rank.require(rl == rb, || {
                witness! {"X" => x, "rank_L" => format!("{rl:?}"), "rank_bbL" => format!("{rb:?}")}
            });
        }
        report.push(finish_gated(rank, gate));

        report.push(elementarity(u, cu, la, &positions, lb, cfg, &stage, gate));
    }
    report
}

#[allow(clippy::too_many_arguments)]
fn elementarity(
    u: &Universe,
    cu: &Universe,
    la: &ClassicalStage,
    positions: &[Option<usize>],
    lb: &Stage,
    cfg: &DefConfig,
    stage: &str,
    gate: bool,
) -> CheckRecord {
    let mut c = Check::new("j.elementary").stage(stage);
    let sa = Structure::from_universe(cu, &la.hats);
    let sb = Structure::from_universe(u, &lb.members);
    let mut closure = Closure::new(vec![&sa, &sb], cfg.closure(cfg.max_params));
    if let Err(e) = closure.ensure(cfg.max_depth) {
        return CheckRecord::info("j.elementary", format!("not run: {e}")).at_stage(stage);
    }
    let (na, nb) = (sa.len(), sb.len());
    let arity = 1 + cfg.max_params;
    let tuples = na.pow(arity as u32);
    let (top_a, top_b) = (cu.quantale().top().raw(), u.quantale().top().raw());
    let mut checked = 0u64;
    for it in closure.items(cfg.max_depth) {
        let ta = closure.segment(it.table, 0);
        let tb = closure.segment(it.table, 1);
        for (ai, &va) in ta.iter().enumerate().take(tuples) {
            let ds = digits(ai, na, arity);
            let Some(img) = ds.iter().map(|&d| positions[d]).collect::<Option<Vec<usize>>>() else { continue };
            let bi = tuple_index(img, nb);
            checked += 1;
            let truth = va == top_a;
            c.require(truth == (tb[bi] == top_b), || {
                let mut w = witness! {"phi" => closure.formula(it.index), "classical" => truth,
                    "value" => u.quantale().label(QElem::from_index(tb[bi] as usize))};
                let names = crate::formula::scope_vars(cfg.max_params, 0);
                for (name, &d) in names.iter().zip(&ds) {
                    w = w.with(name, &la.members[d]);
                }
                w
            });
        }
    }
    c.detail(format!("{} templates, {checked} instances", closure.items(cfg.max_depth).count()));
    finish_gated(c, gate)
}
