use super::{
    build_bb_l, build_classical_l, build_frak_l, build_j, check_def_strong_in_weak, check_eq_mode_divergence,
    check_extension_lemma, check_hat_into_frak_l, check_inclusion, check_lemma_equality, check_monotone,
    check_two_valued, verify_j, DefConfig,
};
use crate::model::{
    build_v_stage, check_hat_transfer, check_memo_soundness, check_n_fold_substitution, check_reflexivity,
    check_soundness_spot_suite, standard_bounded_formulas, write_stage_dump, BudgetExceeded, ElemId, HierarchyTag,
    Stage, Universe,
};
use crate::quantale::{QElem, Quantale};
use crate::report::{CheckRecord, Report, Status};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteOptions {
    pub alpha: usize,
    pub cfg: DefConfig,
    /// Element cap for the `V` stages.
    pub budget: usize,
    pub hat_rank: usize,
    pub j_suite: bool,
    pub determinism: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { alpha: 3, cfg: DefConfig::default(), budget: 100_000, hat_rank: 3, j_suite: true, determinism: true }
    }
}

fn truncated(name: &str, e: &BudgetExceeded) -> CheckRecord {
    CheckRecord {
        check: format!("build.{name}"),
        stage: Some(e.stage.to_string()),
        status: Status::Fail,
        detail: Some(format!("truncated: {e}")),
        violations: 1,
        witnesses: Vec::new(),
    }
}

fn built(name: &str, stages: &[Stage]) -> CheckRecord {
    let sizes: Vec<String> = stages.iter().map(|s| s.len().to_string()).collect();
    let mut r = CheckRecord::info(format!("build.{name}"), format!("sizes {}", sizes.join(",")));
    if let Some(last) = stages.last() {
        r.stage = Some(format!("{}{}", last.tag, last.label));
        if let Some(d) = last.depth {
            r.detail = Some(format!("{} depth {d} saturated {:?}", r.detail.unwrap_or_default(), last.saturated));
        }
    }
    r
}

fn union(stages: &[&[Stage]]) -> Vec<ElemId> {
    let mut ids: Vec<ElemId> = stages.iter().flat_map(|s| s.iter()).flat_map(|s| s.members.iter().copied()).collect();
    ids.sort();
    ids.dedup();
    ids
}

/// Every construction and property check of the verification suite for one quantale.
pub fn run_paper_suite(q: &Quantale, opts: &SuiteOptions) -> Report {
    let u = Universe::new(q.clone());
    let cfg = &opts.cfg;
    let mut report = Report::new();
    let full: Vec<QElem> = q.elements().collect();
    let two = [q.bottom(), q.top()];

    let v_full = match build_v_stage(&u, 2.min(opts.alpha), &full, opts.budget) {
        Ok(s) => s,
        Err(e) => {
            report.push(truncated("V", &e));
            e.partial
        }
    };
    let v_two = match build_v_stage(&u, opts.alpha, &two, opts.budget) {
        Ok(s) => Some(s),
        Err(e) => {
            report.push(CheckRecord::info("build.V2valued", format!("skipped: {e}")));
            None
        }
    };
    let frak = match build_frak_l(&u, opts.alpha, cfg) {
        Ok(s) => s,
        Err(e) => {
            report.push(truncated("frakL", &e));
            e.partial
        }
    };
    let bb = match build_bb_l(&u, opts.alpha, cfg) {
        Ok(s) => s,
        Err(e) => {
            report.push(truncated("bbL", &e));
            e.partial
        }
    };
    report.push(built("V", &v_full));
    report.push(built("frakL", &frak));
    report.push(built("bbL", &bb));

    report.push(check_two_valued(&u, &frak));
    report.push(check_two_valued(&u, &bb));
    let mut control = check_two_valued(&u, &v_full);
    control.check = "model.two_valued_negative_control".into();
    control.status = if q.size() <= 2 || v_full.len() <= 2 {
        Status::Info
    } else if control.violations > 0 {
        Status::Pass
    } else {
        Status::Fail
    };
    control.witnesses.truncate(3);
    report.push(control);
    if let Some(v_two) = &v_two {
        report.push(check_inclusion("constructible.inclusion_in_V", &frak, v_two));
    }

    report.push(check_reflexivity(&u, &v_full));
    report.push(check_reflexivity(&u, &frak));
    report.push(check_reflexivity(&u, &bb));
    let vtop = v_full.last().map(|s| s.members.clone()).unwrap_or_default();
    let vlabel = format!("V{}", v_full.len().saturating_sub(1));
    report.push(check_memo_soundness(&u, &vtop, &vlabel));
    for r in check_soundness_spot_suite(&u, &vtop, &vlabel) {
        report.push(r);
    }

    let frak_top = frak.last().map(|s| s.members.clone()).unwrap_or_default();
    let bb_top = bb.last().map(|s| s.members.clone()).unwrap_or_default();
    let frak_label = format!("frakL{}", frak.len().saturating_sub(1));
    let bb_label = format!("bbL{}", bb.len().saturating_sub(1));
    report.push(check_extension_lemma(&u, &union(&[&v_full, &frak, &bb]), "V,frakL,bbL"));
    for (carrier, label) in [(&vtop, &vlabel), (&frak_top, &frak_label), (&bb_top, &bb_label)] {
        report.push(check_lemma_equality(&u, carrier, cfg, label));
        report.push(check_n_fold_substitution(&u, carrier, cfg.max_depth, cfg.max_params, cfg.connectives, label));
    }

    report.extend(check_hat_transfer(&u, &standard_bounded_formulas(), opts.hat_rank));
    if frak.len() > 3 {
        report.push(check_hat_into_frak_l(&u, frak.last().unwrap(), 2));
    }
    if frak.len() > 1 {
        report.push(check_monotone(&u, &frak));
        let prev = &frak[frak.len() - 2];
        report.push(check_def_strong_in_weak(&u, &prev.members, cfg, &format!("frakL{}", prev.label)));
    }

    if opts.j_suite {
        match build_classical_l(opts.alpha, cfg) {
            Ok(l) => {
                let sizes: Vec<String> = l.stages.iter().map(|s| s.members.len().to_string()).collect();
                report.push(CheckRecord::info("build.L", format!("sizes {}", sizes.join(","))));
                let (j, r) = build_j(&u, &l, &bb, cfg);
                report.extend(r);
                report.extend(verify_j(&u, &j, &l, &bb, cfg));
            }
            Err(e) => report.push(truncated("L", &e)),
        }
    }

    report.push(check_eq_mode_divergence(&u, &vtop, &vlabel));

    if opts.determinism {
        report.push(determinism(q, opts));
    }
    report
}

fn determinism(q: &Quantale, opts: &SuiteOptions) -> CheckRecord {
    let cfg = &opts.cfg;
    let run = || {
        let u = Universe::new(q.clone());
        let frak = build_frak_l(&u, opts.alpha, cfg).unwrap_or_else(|e| e.partial);
        let bb = build_bb_l(&u, opts.alpha, cfg).unwrap_or_else(|e| e.partial);
        let c = cfg.to_string();
        (
            write_stage_dump(&u, HierarchyTag::FrakL, opts.alpha, &c, &frak),
            write_stage_dump(&u, HierarchyTag::BbL, opts.alpha, &c, &bb),
        )
    };
    let (a, b) = (run(), run());
    let mut r = CheckRecord::info("constructible.determinism", "two rebuilds in fresh universes give identical dumps");
    r.status = if a == b { Status::Pass } else { Status::Fail };
    if a != b {
        r.violations = 1;
        r.witnesses.push(crate::witness! {"frakL" => a.0 == b.0, "bbL" => a.1 == b.1});
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::builtin;

    #[test]
    fn suite_passes_on_small_quantales() {
        for name in ["boolean:1", "lukasiewicz:3"] {
            let r = run_paper_suite(&builtin(name).unwrap(), &SuiteOptions::default());
            assert!(r.passed(), "{name}\n{r}");
            assert!(r.find("j.elementary").is_some());
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let q = builtin("lukasiewicz:3").unwrap();
        let opts = SuiteOptions { alpha: 2, ..Default::default() };
        assert_eq!(run_paper_suite(&q, &opts), run_paper_suite(&q, &opts));
    }
}
