//! Weak and strong definability, the hierarchies built from them, classical
//! `L` at finite stages and the map from `L` into the strong hierarchy.

mod checks;
mod classical;
mod jmap;
mod suite;

use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::definable::{Closure, ClosureBudget, ClosureConfig, Structure};
use crate::formula::Connectives;
use crate::model::{BudgetExceeded, ElemId, HierarchyTag, Stage, Universe};
use crate::quantale::QElem;

pub use checks::{
    check_def_strong_in_weak, check_eq_mode_divergence, check_extension_lemma, check_hat_into_frak_l,
    check_inclusion, check_lemma_equality, check_monotone, check_two_valued,
};
pub use classical::{build_classical_l, ClassicalHierarchy, ClassicalStage};
pub use jmap::{build_j, verify_j, JMap};
pub use suite::{run_paper_suite, SuiteOptions};

/// Bounds on the formulas used by the definability operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefConfig {
    pub max_depth: usize,
    pub max_params: usize,
    /// Raise the depth until one more level adds no new function.
    pub saturate: bool,
    pub connectives: Connectives,
    /// Saturation gives up above this depth.
    pub max_saturation_depth: usize,
    /// Largest number of candidate elements one stage may produce.
    pub budget: usize,
    pub max_work: u64,
    pub max_bytes: usize,
}

impl Default for DefConfig {
    fn default() -> Self {
        DefConfig {
            max_depth: 2,
            max_params: 1,
            saturate: false,
            connectives: Connectives::Residuated,
            max_saturation_depth: 6,
            budget: 1_000_000,
            max_work: 4_000_000_000,
            max_bytes: 1 << 30,
        }
    }
}

impl DefConfig {
    pub fn new(max_depth: usize, max_params: usize) -> Self {
        DefConfig { max_depth, max_params, ..Default::default() }
    }

    pub fn saturating(mut self) -> Self {
        self.saturate = true;
        self
    }

    fn closure(&self, params: usize) -> ClosureConfig {
        let mut c = ClosureConfig::new(params, self.connectives);
        c.max_work = self.max_work;
        c.max_bytes = self.max_bytes;
        c
    }
}

impl fmt::Display for DefConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let conn = match self.connectives {
            Connectives::Residuated => "residuated",
            Connectives::Classical => "classical",
        };
        write!(
            f,
            "depth={} params={} saturate={} connectives={conn}",
            self.max_depth, self.max_params, self.saturate
        )
    }
}

/// Which subsets of `M` serve as domains for weakly definable functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainPolicy {
    AllSubsets,
    /// `M`, the empty set and `M` minus one element.
    Reduced,
}

/// Largest `|M|` for which every subset is used as a domain.
pub const ALL_SUBSETS_MAX: usize = 4;

impl DomainPolicy {
    pub fn for_size(n: usize) -> Self {
        if n <= ALL_SUBSETS_MAX {
            DomainPolicy::AllSubsets
        } else {
            DomainPolicy::Reduced
        }
    }

    /// Domains as sorted index lists into `M`, full domain first.
    pub fn domains(self, n: usize) -> Vec<Vec<usize>> {
        let full: Vec<usize> = (0..n).collect();
        let mut out = vec![full.clone()];
        match self {
            DomainPolicy::AllSubsets => {
                for mask in (0u32..(1 << n) - 1).rev() {
                    out.push((0..n).filter(|i| mask >> i & 1 == 1).collect());
                }
            }
            DomainPolicy::Reduced => {
                for skip in 0..n {
                    out.push(full.iter().copied().filter(|&i| i != skip).collect());
                }
                out.push(Vec::new());
            }
        }
        out
    }
}

impl fmt::Display for DomainPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainPolicy::AllSubsets => "all-subsets",
            DomainPolicy::Reduced => "full+empty+co-singletons",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DefError {
    #[error(transparent)]
    Closure(#[from] ClosureBudget),
    #[error("{required} candidate elements exceed the budget of {budget}")]
    Budget { required: u128, budget: usize },
}

/// Value vectors over `M` of every definable function with full domain.
#[derive(Clone, Debug)]
pub struct DefinableFunctions {
    /// One entry per function, values indexed like `M`.
    pub functions: IndexSet<Vec<u8>>,
    pub depth: usize,
    /// `None` when saturation was not requested.
    pub saturated: Option<bool>,
}

/// The functions `a -> [[phi(a, b)]]_M` for all templates within `cfg` and all `b` in `M`.
pub fn definable_functions(u: &Universe, m: &[ElemId], cfg: &DefConfig) -> Result<DefinableFunctions, DefError> {
    if m.is_empty() {
        // no parameter tuples exist, but parameter-free templates still define the empty function
        let mut functions = IndexSet::new();
        functions.insert(Vec::new());
        return Ok(DefinableFunctions {
            functions,
            depth: cfg.max_depth,
            saturated: cfg.saturate.then_some(true),
        });
    }
    let s = Structure::from_universe(u, m);
    let mut closure = Closure::new(vec![&s], cfg.closure(cfg.max_params));
    closure.ensure(cfg.max_depth)?;
    let collect = |closure: &Closure, depth: usize| {
        let n = m.len();
        let mut out: IndexSet<Vec<u8>> = IndexSet::new();
        for it in closure.items(depth) {
            for chunk in it.table.chunks(n) {
                if !out.contains(chunk) {
                    out.insert(chunk.to_vec());
                }
            }
        }
        out
    };
    let mut depth = cfg.max_depth;
    let mut functions = collect(&closure, depth);
    let mut saturated = None;
    if cfg.saturate {
        saturated = Some(false);
        while depth < cfg.max_saturation_depth {
            if closure.ensure(depth + 1).is_err() {
                break;
            }
            let next = collect(&closure, depth + 1);
            let grew = next.len() > functions.len();
            functions = next;
            depth += 1;
            if !grew {
                saturated = Some(true);
                break;
            }
        }
    }
    Ok(DefinableFunctions { functions, depth, saturated })
}

/// Result of one application of a definability operator.
#[derive(Clone, Debug)]
pub struct DefOutput {
    pub members: Vec<ElemId>,
    pub depth: usize,
    pub saturated: Option<bool>,
    pub policy: Option<DomainPolicy>,
}

fn restrict(u: &Universe, m: &[ElemId], values: &[u8], domain: &[usize]) -> ElemId {
    let entries = domain.iter().map(|&i| (m[i], QElem::from_index(values[i] as usize))).collect();
    u.intern(entries).expect("restriction of a definable function is well formed")
}

/// Weakly definable subsets of `M`: definable functions restricted to the domains of the policy.
pub fn def_weak(u: &Universe, m: &[ElemId], cfg: &DefConfig) -> Result<DefOutput, DefError> {
    let defs = definable_functions(u, m, cfg)?;
    let policy = DomainPolicy::for_size(m.len());
    let domains = policy.domains(m.len());
    let required = defs.functions.len() as u128 * domains.len() as u128;
    if required > cfg.budget as u128 {
        return Err(DefError::Budget { required, budget: cfg.budget });
    }
    let mut members: IndexSet<ElemId> = IndexSet::new();
    for values in &defs.functions {
        for d in &domains {
            members.insert(restrict(u, m, values, d));
        }
    }
    Ok(DefOutput {
        members: members.into_iter().collect(),
        depth: defs.depth,
        saturated: defs.saturated,
        policy: Some(policy),
    })
}

/// Strongly definable subsets of `M`: definable functions with domain exactly `M`.
pub fn def_strong(u: &Universe, m: &[ElemId], cfg: &DefConfig) -> Result<DefOutput, DefError> {
    let defs = definable_functions(u, m, cfg)?;
    if defs.functions.len() > cfg.budget {
        return Err(DefError::Budget { required: defs.functions.len() as u128, budget: cfg.budget });
    }
    let full: Vec<usize> = (0..m.len()).collect();
    let mut members: IndexSet<ElemId> = IndexSet::new();
    for values in &defs.functions {
        members.insert(restrict(u, m, values, &full));
    }
    Ok(DefOutput { members: members.into_iter().collect(), depth: defs.depth, saturated: defs.saturated, policy: None })
}

pub(crate) fn budget_error(stage: usize, e: DefError, cfg: &DefConfig, partial: Vec<Stage>) -> BudgetExceeded {
    match e {
        DefError::Closure(c) => BudgetExceeded {
            stage,
            what: "table entries",
            required: c.work as u128,
            budget: cfg.max_work as u128,
            partial,
        },
        DefError::Budget { required, budget } => BudgetExceeded {
            stage,
            what: "candidate elements",
            required,
            budget: budget as u128,
            partial,
        },
    }
}

fn stamp(stage: &mut Stage, out: &DefOutput) {
    stage.depth = Some(out.depth);
    stage.saturated = out.saturated;
    if let Some(p) = out.policy {
        stage.config.push_str(&format!(" domains={p}"));
    }
}

/// `frakL_0 = {}`, `frakL_{a+1} = Def*(frakL_a)` (no union with the previous stage).
pub fn build_frak_l(u: &Universe, alpha: usize, cfg: &DefConfig) -> Result<Vec<Stage>, BudgetExceeded> {
    let mut stages = vec![Stage::new(0, HierarchyTag::FrakL, Vec::new(), cfg.to_string())];
    for k in 0..alpha {
        let out = match def_weak(u, &stages[k].members, cfg) {
            Ok(o) => o,
            Err(e) => return Err(budget_error(k + 1, e, cfg, stages)),
        };
        let mut s = Stage::new(k + 1, HierarchyTag::FrakL, out.members.clone(), cfg.to_string());
        stamp(&mut s, &out);
        stages.push(s);
    }
    Ok(stages)
}

/// `bbL_0 = {}`, `bbL_{a+1} = Def(bbL_a) ∪ bbL_a`.
pub fn build_bb_l(u: &Universe, alpha: usize, cfg: &DefConfig) -> Result<Vec<Stage>, BudgetExceeded> {
    let mut stages = vec![Stage::new(0, HierarchyTag::BbL, Vec::new(), cfg.to_string())];
    for k in 0..alpha {
        let out = match def_strong(u, &stages[k].members, cfg) {
            Ok(o) => o,
            Err(e) => return Err(budget_error(k + 1, e, cfg, stages)),
        };
        let mut members: IndexSet<ElemId> = stages[k].members.iter().copied().collect();
        members.extend(out.members.iter().copied());
        let mut s = Stage::new(k + 1, HierarchyTag::BbL, members.into_iter().collect(), cfg.to_string());
        stamp(&mut s, &out);
        stages.push(s);
    }
    Ok(stages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::{builtin, lukasiewicz_chain};

    fn l3() -> Universe {
        Universe::new(lukasiewicz_chain(3).unwrap())
    }

    #[test]
    fn domain_policies() {
        assert_eq!(DomainPolicy::for_size(3).domains(3).len(), 8);
        assert_eq!(DomainPolicy::AllSubsets.domains(0), vec![Vec::<usize>::new()]);
        let reduced = DomainPolicy::for_size(5).domains(5);
        assert_eq!(reduced.len(), 7);
        assert_eq!(reduced[0], vec![0, 1, 2, 3, 4]);
        assert!(reduced.contains(&vec![]));
    }

    #[test]
    fn def_over_empty_structure() {
        let u = l3();
        let cfg = DefConfig::new(1, 1);
        let weak = def_weak(&u, &[], &cfg).unwrap();
        assert_eq!(weak.members, vec![u.empty()]);
        let strong = def_strong(&u, &[], &cfg).unwrap();
        assert_eq!(strong.members, vec![u.empty()]);
    }

    #[test]
    fn def_weak_over_singleton() {
        let u = l3();
        let e = u.empty();
        let q = u.quantale();
        let out = def_weak(&u, &[e], &DefConfig::new(1, 0)).unwrap();
        let top = u.find(&[(e, q.top())]).unwrap();
        let bottom = u.find(&[(e, q.bottom())]).unwrap();
        let mut got = out.members.clone();
        got.sort();
        let mut want = vec![e, top, bottom];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn strong_is_full_domain_part_of_weak() {
        let u = l3();
        let cfg = DefConfig::new(2, 1);
        let frak = build_frak_l(&u, 2, &cfg).unwrap();
        let m = &frak[2].members;
        let weak = def_weak(&u, m, &cfg).unwrap();
        let strong = def_strong(&u, m, &cfg).unwrap();
        for s in &strong.members {
            assert!(weak.members.contains(s));
            assert_eq!(u.elem(*s).entries.len(), m.len());
        }
        let full: Vec<ElemId> =
            weak.members.iter().copied().filter(|&w| u.elem(w).entries.len() == m.len()).collect();
        assert_eq!(full.len(), strong.members.len());
    }

    #[test]
    fn hierarchy_sizes_over_lukasiewicz() {
        let u = l3();
        let cfg = DefConfig::new(2, 1);
        let frak = build_frak_l(&u, 3, &cfg).unwrap();
        let sizes: Vec<usize> = frak.iter().map(Stage::len).collect();
        assert_eq!(sizes, [0, 1, 3, 21]);
        let bb = build_bb_l(&u, 3, &cfg).unwrap();
        let sizes: Vec<usize> = bb.iter().map(Stage::len).collect();
        assert_eq!(sizes, [0, 1, 3, 7]);
        assert!(frak[3].config.contains("domains=all-subsets"));
    }

    #[test]
    fn saturation_reaches_a_fixed_point_on_small_stages() {
        let u = Universe::new(builtin("boolean:1").unwrap());
        let frak = build_frak_l(&u, 3, &DefConfig::new(1, 1).saturating()).unwrap();
        for s in &frak[1..] {
            assert_eq!(s.saturated, Some(true), "stage {}", s.label);
        }
    }
}
