use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ElemId, Universe};
use crate::quantale::QElem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HierarchyTag {
    V,
    #[serde(rename = "frakL")]
    FrakL,
    #[serde(rename = "bbL")]
    BbL,
    #[serde(rename = "L")]
    ClassicalL,
}

impl fmt::Display for HierarchyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HierarchyTag::V => "V",
            HierarchyTag::FrakL => "frakL",
            HierarchyTag::BbL => "bbL",
            HierarchyTag::ClassicalL => "L",
        })
    }
}

impl FromStr for HierarchyTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "V" => Ok(HierarchyTag::V),
            "frakL" => Ok(HierarchyTag::FrakL),
            "bbL" => Ok(HierarchyTag::BbL),
            "L" => Ok(HierarchyTag::ClassicalL),
            _ => Err(format!("unknown hierarchy `{s}` (expected V, frakL, bbL or L)")),
        }
    }
}

/// One level of a hierarchy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub label: usize,
    pub tag: HierarchyTag,
    pub members: Vec<ElemId>,
    /// Construction parameters stamped for reproducibility.
    pub config: String,
    /// `Some(true)` when a saturation loop reached its fixed point for this stage.
    pub saturated: Option<bool>,
    /// Template depth that produced the stage, for definability hierarchies.
    pub depth: Option<usize>,
}

impl Stage {
    pub fn new(label: usize, tag: HierarchyTag, members: Vec<ElemId>, config: impl Into<String>) -> Self {
        Stage { label, tag, members, config: config.into(), saturated: None, depth: None }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: ElemId) -> bool {
        self.members.contains(&id)
    }

    pub fn member_set(&self) -> BTreeSet<ElemId> {
        self.members.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("budget exceeded at stage {stage}: {required} {what} requested, budget is {budget}")]
pub struct BudgetExceeded {
    pub stage: usize,
    pub what: &'static str,
    pub required: u128,
    pub budget: u128,
    /// Stages completed before the overflow.
    pub partial: Vec<Stage>,
}

/// `V_0 .. V_alpha` with ranges restricted to `values`.
///
/// Stage `k+1` holds every function from a subset of stage `k` into `values`.
pub fn build_v_stage(
    u: &Universe,
    alpha: usize,
    values: &[QElem],
    budget: usize,
) -> Result<Vec<Stage>, BudgetExceeded> {
    let q = u.quantale();
    let mut vals: Vec<QElem> = values.to_vec();
    vals.sort();
    vals.dedup();
    let labels: Vec<&str> = vals.iter().map(|&v| q.label(v)).collect();
    let config = format!("values={}", labels.join(","));
    let mut stages = vec![Stage::new(0, HierarchyTag::V, Vec::new(), config.clone())];
    for k in 0..alpha {
        let prev = stages[k].members.clone();
        let radix = vals.len() as u128 + 1;
        let required = u32::try_from(prev.len())
            .ok()
            .and_then(|n| radix.checked_pow(n))
            .unwrap_or(u128::MAX);
        if required > budget as u128 {
            return Err(BudgetExceeded { stage: k + 1, what: "elements", required, budget: budget as u128, partial: stages });
        }
        let mut members = Vec::with_capacity(required as usize);
        let mut digits = vec![0usize; prev.len()];
        loop {
            let entries = prev
                .iter()
                .zip(&digits)
                .filter(|(_, &d)| d > 0)
                .map(|(&x, &d)| (x, vals[d - 1]))
                .collect();
            members.push(u.intern(entries).expect("stage elements are well formed"));
            // increment the mixed-radix counter, first member least significant
            let mut i = 0;
            while i < digits.len() {
                digits[i] += 1;
                if digits[i] < radix as usize {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == digits.len() {
                break;
            }
        }
        stages.push(Stage::new(k + 1, HierarchyTag::V, members, config.clone()));
    }
    Ok(stages)
}

/// A parsed stage dump with ids remapped into the loading universe.
#[derive(Clone, Debug)]
pub struct StageDump {
    pub tag: HierarchyTag,
    pub quantale: String,
    pub alpha: usize,
    pub config: String,
    pub stages: Vec<Stage>,
    /// Dump id to id in the loading universe.
    pub ids: BTreeMap<u32, ElemId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct DumpError {
    pub line: usize,
    pub message: String,
}

/// Header `hierarchy=.. quantale=.. alpha=.. cfg=..`, then per stage a
/// `stage <label>` line followed by its members as element lines.
pub fn write_stage_dump(u: &Universe, tag: HierarchyTag, alpha: usize, config: &str, stages: &[Stage]) -> String {
    let mut out = format!("hierarchy={tag} quantale={} alpha={alpha} cfg={config}\n", u.quantale().name());
    for s in stages {
        out.push_str(&format!("stage {}\n", s.label));
        for &m in &s.members {
            out.push_str(&u.dump_line(m));
            out.push('\n');
        }
    }
    out
}

pub fn read_stage_dump(text: &str, u: &Universe) -> Result<StageDump, DumpError> {
    let err = |line: usize, message: String| DumpError { line, message };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty dump".into()))?;
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    let (head, cfg) = match header.find(" cfg=") {
        Some(i) => (&header[..i], &header[i + 5..]),
        None => (header, ""),
    };
    for part in head.split_whitespace() {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| err(1, format!("malformed header field `{part}`")))?;
        fields.insert(k, v);
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| err(1, format!("header lacks `{k}`")));
    let tag: HierarchyTag = get("hierarchy")?.parse().map_err(|e| err(1, e))?;
    let quantale = get("quantale")?.to_string();
    let alpha: usize = get("alpha")?.parse().map_err(|_| err(1, "alpha is not a number".into()))?;

    let q = u.quantale();
    let mut ids: BTreeMap<u32, ElemId> = BTreeMap::new();
    let mut stages: Vec<Stage> = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("stage ") {
            let label = rest.trim().parse().map_err(|_| err(n, format!("bad stage label `{rest}`")))?;
            stages.push(Stage::new(label, tag, Vec::new(), cfg));
            continue;
        }
        let stage = stages.last_mut().ok_or_else(|| err(n, "element before any stage line".into()))?;
        let (id_text, rest) = line.split_once(' ').ok_or_else(|| err(n, "expected `id rank {...}`".into()))?;
        let (rank_text, body) = rest.trim().split_once(' ').ok_or_else(|| err(n, "expected `id rank {...}`".into()))?;
        let dump_id: u32 = id_text.parse().map_err(|_| err(n, format!("bad id `{id_text}`")))?;
        let rank: u32 = rank_text.parse().map_err(|_| err(n, format!("bad rank `{rank_text}`")))?;
        let body = body
            .trim()
            .strip_prefix('{')
            .and_then(|b| b.strip_suffix('}'))
            .ok_or_else(|| err(n, "entries must be enclosed in braces".into()))?;
        let mut entries = Vec::new();
        for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (child, label) = item.split_once(':').ok_or_else(|| err(n, format!("bad entry `{item}`")))?;
            let child: u32 = child.parse().map_err(|_| err(n, format!("bad child id `{child}`")))?;
            let child = *ids.get(&child).ok_or_else(|| err(n, format!("child {child} is not defined earlier")))?;
            let value = q.by_label(label).ok_or_else(|| err(n, format!("unknown truth value `{label}`")))?;
            entries.push((child, value));
        }
        let id = u.intern(entries).map_err(|e| err(n, e.to_string()))?;
        if u.rank(id) != rank {
            return Err(err(n, format!("rank {rank} does not match computed rank {}", u.rank(id))));
        }
        if let Some(&prev) = ids.get(&dump_id) {
            if prev != id {
                return Err(err(n, format!("id {dump_id} is redefined")));
            }
        }
        ids.insert(dump_id, id);
        stage.members.push(id);
    }
    Ok(StageDump { tag, quantale, alpha, config: cfg.to_string(), stages, ids })
}
