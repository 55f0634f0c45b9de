use indexmap::IndexSet;

use super::{budget_error, definable_functions, DefConfig};
use crate::model::{hat, BudgetExceeded, ElemId, HfSet, HierarchyTag, Stage, Universe};
use crate::quantale::boolean_algebra;

/// A stage of classical `L`, with the hat images its definability runs on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalStage {
    pub label: usize,
    pub members: Vec<HfSet>,
    pub hats: Vec<ElemId>,
    pub depth: Option<usize>,
    pub saturated: Option<bool>,
}

impl ClassicalStage {
    pub fn as_stage(&self, config: &str) -> Stage {
        let mut s = Stage::new(self.label, HierarchyTag::ClassicalL, self.hats.clone(), config);
        s.depth = self.depth;
        s.saturated = self.saturated;
        s
    }

    pub fn position(&self, x: &HfSet) -> Option<usize> {
        self.members.iter().position(|m| m == x)
    }
}

/// Classical `L_0 .. L_alpha`, evaluated in the two-element Boolean universe.
#[derive(Debug)]
pub struct ClassicalHierarchy {
    pub universe: Universe,
    pub stages: Vec<ClassicalStage>,
    pub config: DefConfig,
}

impl ClassicalHierarchy {
    /// Least stage containing `x`.
    pub fn rank_of(&self, x: &HfSet) -> Option<usize> {
        self.stages.iter().position(|s| s.position(x).is_some())
    }
}

/// `L_{a+1}` = subsets of `L_a` definable over `(L_a, in)` with parameters, union `L_a`.
pub fn build_classical_l(alpha: usize, cfg: &DefConfig) -> Result<ClassicalHierarchy, BudgetExceeded> {
    let universe = Universe::new(boolean_algebra(1).expect("two-element Boolean algebra"));
    let top = universe.quantale().top().raw();
    let mut stages = vec![ClassicalStage { label: 0, members: Vec::new(), hats: Vec::new(), depth: None, saturated: None }];
    for k in 0..alpha {
        let prev = &stages[k];
        let defs = match definable_functions(&universe, &prev.hats, cfg) {
            Ok(d) => d,
            Err(e) => {
                let partial = stages.iter().map(|s| s.as_stage(&cfg.to_string())).collect();
                return Err(budget_error(k + 1, e, cfg, partial));
            }
        };
        let mut members: IndexSet<HfSet> = prev.members.iter().cloned().collect();
        for values in &defs.functions {
            let x = HfSet::new(
                values.iter().zip(&prev.members).filter(|(&v, _)| v == top).map(|(_, m)| m.clone()),
            );
            members.insert(x);
        }
        let members: Vec<HfSet> = members.into_iter().collect();
        let hats = members.iter().map(|x| hat(&universe, x)).collect();
        stages.push(ClassicalStage {
            label: k + 1,
            members,
            hats,
            depth: Some(defs.depth),
            saturated: defs.saturated,
        });
    }
    Ok(ClassicalHierarchy { universe, stages, config: *cfg })
}
