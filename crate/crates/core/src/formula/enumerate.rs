//! Deterministic, duplicate-free enumeration of definability templates.
//!
//! Templates are formulas over the subject `x`, parameters `y1..yp` and a
//! pool of three quantified variables `z1..z3`. Formulas are produced layer
//! by layer in order of nesting depth; every formula has exactly one
//! decomposition, so the stream is structurally duplicate-free. The stream is
//! indexable, which lets callers split it into ranges.
//!
//! Layer structure for a scope with `k` quantified variables in context:
//!
//! * depth 0: `bot`, `top`, then `a in b` and `a = b` for every ordered pair of scope variables;
//! * depth d: `~φ` for φ new at depth d-1, then for every binary connective the pairs
//!   `(φ, ψ)` of depth ≤ d-1 with at least one side new at depth d-1, then `A z. φ`
//!   and `E z. φ` for φ new at depth d-1 in the scope extended by the next pool variable.

use serde::{Deserialize, Serialize};

use super::{AtomKind, Formula, FormulaTemplate, Term};

pub const SUBJECT: &str = "x";
pub const PARAM_PREFIX: &str = "y";
pub const POOL: [&str; 3] = ["z1", "z2", "z3"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Strong,
    Weak,
    Or,
    Imp,
}

impl BinaryOp {
    pub fn apply(self, a: Formula, b: Formula) -> Formula {
        match self {
            BinaryOp::Strong => Formula::strong(a, b),
            BinaryOp::Weak => Formula::weak(a, b),
            BinaryOp::Or => Formula::or(a, b),
            BinaryOp::Imp => Formula::imp(a, b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuantifierKind {
    Forall,
    Exists,
}

impl QuantifierKind {
    pub fn apply(self, var: &str, body: Formula) -> Formula {
        match self {
            QuantifierKind::Forall => Formula::forall(var, body),
            QuantifierKind::Exists => Formula::exists(var, body),
        }
    }
}

/// Which connectives the enumerator may use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectives {
    /// `&`, `/\`, `\/`, `->`, `~`, quantifiers.
    #[default]
    Residuated,
    /// `/\`, `\/`, `->`, `~`, quantifiers (no strong conjunction).
    Classical,
}

impl Connectives {
    pub fn binary_ops(self) -> &'static [BinaryOp] {
        match self {
            Connectives::Residuated => &[BinaryOp::Strong, BinaryOp::Weak, BinaryOp::Or, BinaryOp::Imp],
            Connectives::Classical => &[BinaryOp::Weak, BinaryOp::Or, BinaryOp::Imp],
        }
    }
}

/// Names of the scope variables for `params` parameters and `bound` pool variables.
pub fn scope_vars(params: usize, bound: usize) -> Vec<String> {
    let mut vars = vec![SUBJECT.to_string()];
    vars.extend((1..=params).map(|i| format!("{PARAM_PREFIX}{i}")));
    vars.extend(POOL[..bound].iter().map(|s| s.to_string()));
    vars
}

/// Atom at position `j` of the depth-0 layer over `vars`.
pub(crate) fn atom_at(vars: &[String], j: usize) -> Formula {
    let m = vars.len();
    match j {
        0 => Formula::Bot,
        1 => Formula::Top,
        _ => {
            let j = j - 2;
            let kind = if j < m * m { AtomKind::Mem } else { AtomKind::Eq };
            let j = j % (m * m);
            Formula::atom(kind, Term::Var(vars[j / m].clone()), Term::Var(vars[j % m].clone()))
        }
    }
}

pub(crate) fn atom_count(scope_len: usize) -> usize {
    2 + 2 * scope_len * scope_len
}

/// Indexable stream of all templates within the bounds.
#[derive(Clone, Debug)]
pub struct TemplateEnumerator {
    max_depth: usize,
    params: usize,
    connectives: Connectives,
    /// `new[k][d]`: number of formulas of depth exactly `d` over the scope with `k` pool vars.
    new: Vec<Vec<u128>>,
    /// `total[k][d]`: number of formulas of depth at most `d`.
    total: Vec<Vec<u128>>,
}

impl TemplateEnumerator {
    pub fn new(max_depth: usize, max_params: usize, connectives: Connectives) -> Self {
        let levels = POOL.len() + 1;
        let mut new = vec![vec![0u128; max_depth + 1]; levels];
        let mut total = vec![vec![0u128; max_depth + 1]; levels];
        for d in 0..=max_depth {
            for k in (0..levels).rev() {
                let count = if d == 0 {
                    atom_count(1 + max_params + k) as u128
                } else {
                    let n = new[k][d - 1];
                    let f = total[k][d - 1];
                    let old = f - n;
                    let per_op = old.saturating_mul(n).saturating_add(n.saturating_mul(f));
                    let mut c = n.saturating_add(per_op.saturating_mul(connectives.binary_ops().len() as u128));
                    if k + 1 < levels {
                        c = c.saturating_add(2u128.saturating_mul(new[k + 1][d - 1]));
                    }
                    c
                };
                new[k][d] = count;
                total[k][d] = if d == 0 { count } else { total[k][d - 1].saturating_add(count) };
            }
        }
        TemplateEnumerator { max_depth, params: max_params, connectives, new, total }
    }

    /// Number of templates in the stream (saturating at `u128::MAX`).
    pub fn len(&self) -> u128 {
        self.total[0][self.max_depth]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn params(&self) -> Vec<String> {
        (1..=self.params).map(|i| format!("{PARAM_PREFIX}{i}")).collect()
    }

    /// The template at position `index` of the stream.
    pub fn get(&self, index: u128) -> Option<FormulaTemplate> {
        if index >= self.len() {
            return None;
        }
        Some(FormulaTemplate {
            body: self.decode_total(0, self.max_depth, index),
            subject: SUBJECT.to_string(),
            params: self.params(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = FormulaTemplate> + '_ {
        self.range(0, self.len())
    }

    /// Templates with positions in `start..end`.
    pub fn range(&self, start: u128, end: u128) -> impl Iterator<Item = FormulaTemplate> + '_ {
        let end = end.min(self.len());
        (start..end).map(move |i| self.get(i).expect("index in range"))
    }

    fn decode_total(&self, k: usize, d: usize, mut index: u128) -> Formula {
        for e in 0..=d {
            let n = self.new[k][e];
            if index < n {
                return self.decode_new(k, e, index);
            }
            index -= n;
        }
        unreachable!("index beyond layer total")
    }

    fn decode_new(&self, k: usize, d: usize, mut j: u128) -> Formula {
        if d == 0 {
            let vars = scope_vars(self.params, k);
            return atom_at(&vars, j as usize);
        }
        let n = self.new[k][d - 1];
        let f = self.total[k][d - 1];
        let old = f - n;
        if j < n {
            return Formula::neg(self.decode_new(k, d - 1, j));
        }
        j -= n;
        let per_op = old * n + n * f;
        for &op in self.connectives.binary_ops() {
            if j < per_op {
                let (a, b) = if j < old * n {
                    (j / n, old + j % n)
                } else {
                    let r = j - old * n;
                    (old + r / f, r % f)
                };
                return op.apply(self.decode_total(k, d - 1, a), self.decode_total(k, d - 1, b));
            }
            j -= per_op;
        }
        let inner = self.new[k + 1][d - 1];
        let var = POOL[k];
        if j < inner {
            return Formula::forall(var, self.decode_new(k + 1, d - 1, j));
        }
        j -= inner;
        debug_assert!(j < inner);
        Formula::exists(var, self.decode_new(k + 1, d - 1, j))
    }
}

/// The stream of templates with connective depth at most `max_depth` and
/// parameters `y1..y{max_params}`.
pub fn enumerate_templates(max_depth: usize, max_params: usize) -> TemplateEnumerator {
    TemplateEnumerator::new(max_depth, max_params, Connectives::Residuated)
}
