//! One PASS/FAIL line per acceptance criterion.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qlab_cli::RunReport;
use qlab_core::constructible::{
    build_bb_l, build_classical_l, build_frak_l, build_j, check_extension_lemma, check_hat_into_frak_l,
    check_lemma_equality, check_two_valued, verify_j, DefConfig,
};
use qlab_core::formula::Connectives;
use qlab_core::model::{
    build_v_stage, check_hat_transfer, check_n_fold_substitution, check_reflexivity, standard_bounded_formulas,
    HfSet, Stage, Universe,
};
use qlab_core::quantale::{builtin, check_heyting_collapse, residuum_oracle_check, validate_theorem_suite, Quantale};
use qlab_core::report::{CheckRecord, Report, Status};

const BUILTINS: [&str; 7] =
    ["boolean:1", "boolean:2", "godel:3", "godel:5", "heyting:chain:4", "lukasiewicz:3", "lukasiewicz:5"];

/// Criteria that cannot hold as written; see the README.
const EXPECTED_RED: [u32; 1] = [1];

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn q(name: &str) -> Quantale {
    builtin(name).unwrap()
}

fn failing(records: &[CheckRecord]) -> Vec<String> {
    records.iter().filter(|r| r.status == Status::Fail).map(|r| r.check.clone()).collect()
}

fn all_pass(records: &[CheckRecord]) -> bool {
    records.iter().all(|r| r.status == Status::Pass)
}

fn algebra_suite() -> Outcome {
    let start = Instant::now();
    let mut broken = Vec::new();
    let mut product_form = Vec::new();
    for name in BUILTINS {
        let q = q(name);
        let r = validate_theorem_suite(&q);
        let bad = failing(&r.checks);
        if !bad.is_empty() {
            broken.push(format!("{name}: {}", bad.join(",")));
        }
        // item as stated: ~(x \/ y) = ~x * ~y
        let els: Vec<_> = q.elements().collect();
        let hit = els.iter().flat_map(|&x| els.iter().map(move |&y| (x, y))).find(|&(x, y)| {
            q.neg(q.join(x, y)) != q.product(q.neg(x), q.neg(y))
        });
        if let Some((x, y)) = hit {
            product_form.push(format!("{name} at x={} y={}", q.label(x), q.label(y)));
        }
    }
    let elapsed = start.elapsed();
    let pass = broken.is_empty() && product_form.is_empty() && elapsed < Duration::from_secs(10);
    let mut detail = format!("{} quantales in {:.2?}", BUILTINS.len(), elapsed);
    if !broken.is_empty() {
        detail += &format!("; failing checks: {}", broken.join("; "));
    }
    if !product_form.is_empty() {
        detail += &format!(
            "; product-form De Morgan ~(x|y) = ~x*~y fails: {} (meet form holds everywhere)",
            product_form.join(", ")
        );
    }
    outcome(pass, detail)
}

fn witnesses() -> Outcome {
    let l3 = validate_theorem_suite(&q("lukasiewicz:3"));
    let w = |r: &Report, name: &str| r.find(name).and_then(|c| c.witnesses.first().cloned());
    let em = w(&l3, "not_in_general.excluded_middle");
    let idem = w(&l3, "not_in_general.idempotency");
    let h4 = validate_theorem_suite(&q("heyting:chain:4"));
    let dn = w(&h4, "not_in_general.double_negation_elimination");
    let em_ok = em.as_ref().is_some_and(|w| w.get("x") == Some("1/2") && w.get("x|~x") == Some("1/2"));
    let idem_ok = idem.as_ref().is_some_and(|w| w.get("x") == Some("1/2") && w.get("x*x") == Some("0"));
    let h4q = q("heyting:chain:4");
    let dn_ok = dn.as_ref().is_some_and(|w| {
        let (x, nn) = (h4q.by_label(w.get("x").unwrap()).unwrap(), h4q.by_label(w.get("~~x").unwrap()).unwrap());
        h4q.leq(x, nn) && x != nn
    });
    outcome(em_ok && idem_ok && dn_ok, format!("L3 excluded middle {em:?}; L3 idempotency {idem:?}; H4 ~~x>x {dn:?}"))
}

fn idempotent_collapse() -> Outcome {
    let mut seen = Vec::new();
    let mut ok = true;
    for name in BUILTINS {
        let q = q(name);
        if !q.is_idempotent() {
            continue;
        }
        seen.push(name);
        let r = check_heyting_collapse(&q);
        ok &= r.find("idempotent.heyting_collapse").is_some_and(|c| c.status == Status::Pass);
    }
    outcome(ok && !seen.is_empty(), format!("product = meet on all pairs of {}", seen.join(", ")))
}

fn residuum_oracle() -> Outcome {
    let bad: Vec<&str> = BUILTINS.into_iter().filter(|n| residuum_oracle_check(&q(n)).status != Status::Pass).collect();
    outcome(bad.is_empty(), format!("{} builtins, mismatches: {bad:?}", BUILTINS.len()))
}

fn two_valuedness() -> Outcome {
    let start = Instant::now();
    let cfg = DefConfig::new(2, 1);
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["lukasiewicz:3", "lukasiewicz:5"] {
        let u = Universe::new(q(name));
        let frak = build_frak_l(&u, 3, &cfg).unwrap();
        let bb = build_bb_l(&u, 3, &cfg).unwrap();
        let (a, b) = (check_two_valued(&u, &frak), check_two_valued(&u, &bb));
        ok &= a.status == Status::Pass && b.status == Status::Pass;
        parts.push(format!("{name}: frakL {} ({}), bbL {} ({})", a.status, sizes(&frak), b.status, sizes(&bb)));
    }
    let u = Universe::new(q("lukasiewicz:3"));
    let full: Vec<_> = u.quantale().elements().collect();
    let v = build_v_stage(&u, 2, &full, 1000).unwrap();
    let control = check_two_valued(&u, &v);
    let off = control.witnesses.first().and_then(|w| w.get("value").map(str::to_string));
    ok &= control.status == Status::Fail && off.is_some();
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(300);
    parts.push(format!("control V2 over L3 has value {off:?} off {{0,1}}; {elapsed:.2?}"));
    outcome(ok, parts.join("; "))
}

fn sizes(stages: &[Stage]) -> String {
    stages.iter().map(|s| s.len().to_string()).collect::<Vec<_>>().join(",")
}

struct Built {
    u: Universe,
    v: Vec<Stage>,
    frak: Vec<Stage>,
    bb: Vec<Stage>,
}

fn built(name: &str) -> Built {
    let u = Universe::new(q(name));
    let cfg = DefConfig::new(2, 1);
    let full: Vec<_> = u.quantale().elements().collect();
    let v = build_v_stage(&u, 2, &full, 1000).unwrap();
    let frak = build_frak_l(&u, 3, &cfg).unwrap();
    let bb = build_bb_l(&u, 3, &cfg).unwrap();
    Built { u, v, frak, bb }
}

const LEMMA_QUANTALES: [&str; 3] = ["lukasiewicz:3", "lukasiewicz:5", "boolean:1"];

fn reflexivity_and_lemmas() -> Outcome {
    let cfg = DefConfig::new(2, 1);
    let mut records = Vec::new();
    for name in LEMMA_QUANTALES {
        let b = built(name);
        let mut all = Vec::new();
        for stages in [&b.v, &b.frak, &b.bb] {
            records.push(check_reflexivity(&b.u, stages));
            for s in stages.iter() {
                all.extend(s.members.iter().copied());
                records.push(check_lemma_equality(&b.u, &s.members, &cfg, &format!("{}{}", s.tag, s.label)));
            }
        }
        all.sort();
        all.dedup();
        records.push(check_extension_lemma(&b.u, &all, "all"));
    }
    let pairs: usize = records
        .iter()
        .filter(|r| r.check == "constructible.extension_lemma")
        .filter_map(|r| r.detail.as_deref()?.split(' ').next()?.parse::<usize>().ok())
        .sum();
    outcome(
        all_pass(&records),
        format!("{} records over {LEMMA_QUANTALES:?}, {pairs} extension pairs, failing {:?}", records.len(), failing(&records)),
    )
}

fn n_fold() -> Outcome {
    let mut records = Vec::new();
    for name in LEMMA_QUANTALES {
        let b = built(name);
        for stages in [&b.v, &b.frak, &b.bb] {
            for s in stages.iter() {
                let label = format!("{}{}", s.tag, s.label);
                records.push(check_n_fold_substitution(&b.u, &s.members, 2, 1, Connectives::Residuated, &label));
            }
        }
    }
    outcome(all_pass(&records), format!("{} stages at depth 2, failing {:?}", records.len(), failing(&records)))
}

fn hat_transfer() -> Outcome {
    let formulas = standard_bounded_formulas();
    let sets = HfSet::all_up_to_rank(3).len();
    let mut ok = formulas.len() >= 5 && sets == 16;
    let mut parts = Vec::new();
    for name in ["lukasiewicz:3", "boolean:1"] {
        let u = Universe::new(q(name));
        let r = check_hat_transfer(&u, &formulas, 3);
        ok &= all_pass(&r.checks);
        parts.push(format!("{name}: {}", if r.passed() { "ok".into() } else { failing(&r.checks).join(",") }));
    }
    outcome(ok, format!("{sets} sets of rank <= 3, {} bounded sentences; {}", formulas.len(), parts.join("; ")))
}

fn hat_into_frak_l() -> Outcome {
    let cfg = DefConfig::new(2, 1).saturating();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["lukasiewicz:3", "boolean:1"] {
        let u = Universe::new(q(name));
        let frak = build_frak_l(&u, 3, &cfg).unwrap();
        let top = frak.last().unwrap();
        let r = check_hat_into_frak_l(&u, top, 2);
        ok &= r.status == Status::Pass && top.saturated == Some(true);
        parts.push(format!("{name}: frakL3 saturated={:?} at depth {:?}, {}", top.saturated, top.depth, r.status));
    }
    outcome(ok, parts.join("; "))
}

fn j_suite() -> Outcome {
    let cfg = DefConfig::new(2, 1).saturating();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["boolean:1", "lukasiewicz:3"] {
        let u = Universe::new(q(name));
        let l = build_classical_l(3, &cfg).unwrap();
        let bb = build_bb_l(&u, 3, &cfg).unwrap();
        let (j, built) = build_j(&u, &l, &bb, &cfg);
        let verified = verify_j(&u, &j, &l, &bb, &cfg);
        let mut records = built.checks.clone();
        records.extend(verified.checks.iter().cloned());
        let saturated = l.stages[1..].iter().all(|s| s.saturated == Some(true))
            && bb[1..].iter().all(|s| s.saturated == Some(true));
        for item in ["j.range", "j.injective", "j.surjective_mod_eq", "j.elementary"] {
            ok &= verified.find_all(item).count() == 3;
        }
        let info: Vec<&CheckRecord> = records.iter().filter(|r| r.status == Status::Info).collect();
        ok &= records.iter().all(|r| r.status != Status::Fail);
        parts.push(format!(
            "{name}: saturated={saturated}, {} records, {} failing, {} depth-bounded info",
            records.len(),
            failing(&records).len(),
            info.len()
        ));
    }
    outcome(ok, parts.join("; "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |i: usize| {
        let path = dir.path().join(format!("r{i}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_qlab"))
            .args(["verify", "--suite", "paper", "--quantale", "lukasiewicz:3", "--alpha", "3", "--depth", "2"])
            .arg("--report")
            .arg(&path)
            .output()
            .unwrap()
            .status;
        let report: RunReport = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        (status.code(), report)
    };
    let (c1, a) = run(1);
    let (c2, b) = run(2);
    let same = a.without_timestamps() == b.without_timestamps();
    let json_same = a.without_timestamps().to_json() == b.without_timestamps().to_json();
    outcome(same && json_same && c1 == c2, format!("exit codes {c1:?}/{c2:?}, {} records, identical={same}", a.checks.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "algebra suite", algebra_suite),
        (2, "counterexample witnesses", witnesses),
        (3, "idempotent collapse", idempotent_collapse),
        (4, "residuum oracle", residuum_oracle),
        (5, "two-valuedness", two_valuedness),
        (6, "reflexivity and lemmas", reflexivity_and_lemmas),
        (7, "n-fold substitution", n_fold),
        (8, "hat transfer", hat_transfer),
        (9, "hat into frakL", hat_into_frak_l),
        (10, "j-suite", j_suite),
        (11, "determinism", determinism),
    ];
    let mut unexpected = Vec::new();
    for (n, name, f) in criteria {
        let o = f();
        println!("{} criterion {n} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass && !EXPECTED_RED.contains(&n) {
            unexpected.push(n);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: no unexpected failures (known red: {EXPECTED_RED:?})");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {unexpected:?}");
        ExitCode::FAILURE
    }
}
