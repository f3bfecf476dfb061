//! Runs every acceptance criterion through the experiment runner and prints one
//! line per criterion. Exits nonzero on any failure not listed in `SHORTFALLS`.

use std::collections::BTreeMap;
use std::process::ExitCode;

use pme_lab::experiments::{run, ExperimentConfig, ExperimentKind, Status, Verdict};

/// Runs expected to fail at desk scale, keyed by (criterion, alpha).
const SHORTFALLS: &[(u8, f64, &str)] = &[(8, 0.4, "the separable boundary datum caps the exponent at 1.5, so the slope contrast is too weak for 3h at h = 0.01")];

struct Run {
    alpha: Option<f64>,
    verdict: Verdict,
}

fn execute(kind: ExperimentKind, alpha: Option<f64>, dir: &std::path::Path) -> Vec<Run> {
    let mut cfg = ExperimentConfig::new(kind);
    cfg.seed = 20;
    if let Some(a) = alpha {
        cfg.params.alpha = a;
    }
    cfg.out_dir = dir.join(format!("{kind}-{}", alpha.unwrap_or(-1.0)));
    match run(&cfg) {
        Ok(report) => report.verdicts.into_iter().map(|verdict| Run { alpha, verdict }).collect(),
        Err(e) => kind
            .criteria()
            .iter()
            .map(|&c| {
                let mut v = Verdict::new(c, kind.name());
                v.note(format!("run aborted: {e}"));
                v.require("run completes", false);
                Run { alpha, verdict: v }
            })
            .collect(),
    }
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let plan: Vec<(ExperimentKind, Option<f64>)> = [
        (ExperimentKind::ValidateBarenblatt, None),
        (ExperimentKind::SolveGraveleau, None),
        (ExperimentKind::InteriorBreaking, Some(0.0)),
        (ExperimentKind::InteriorBreaking, Some(0.25)),
        (ExperimentKind::InteriorBreaking, Some(0.75)),
        (ExperimentKind::InteriorBreaking, Some(1.0)),
        (ExperimentKind::InteriorBreaking, Some(0.5)),
        (ExperimentKind::BoundaryVelocity, None),
        (ExperimentKind::BoundaryBreaking, Some(0.0)),
        (ExperimentKind::BoundaryBreaking, Some(0.25)),
        (ExperimentKind::BoundaryBreaking, Some(0.4)),
        (ExperimentKind::ComparisonTest, None),
    ]
    .into();

    let mut by_criterion: BTreeMap<u8, Vec<Run>> = BTreeMap::new();
    for (kind, alpha) in plan {
        for r in execute(kind, alpha, dir.path()) {
            by_criterion.entry(r.verdict.criterion).or_default().push(r);
        }
    }

    let mut unexpected = 0;
    for (criterion, runs) in &by_criterion {
        let mut bad = Vec::new();
        for r in runs {
            for m in r.verdict.measurements.iter().filter(|m| !m.ok) {
                eprintln!("  criterion {criterion}, {}: {} = {:e}", r.verdict.label, m.name, m.value);
            }
            if r.verdict.status != Status::Pass {
                let known = r.alpha.and_then(|a| SHORTFALLS.iter().find(|s| s.0 == *criterion && s.1 == a));
                match known {
                    Some(s) => bad.push(format!("{} [recorded shortfall: {}]", r.verdict.label, s.2)),
                    None => {
                        unexpected += 1;
                        bad.push(r.verdict.summary());
                    }
                }
            }
        }
        if bad.is_empty() {
            println!("criterion {criterion:>2}: PASS ({} run{})", runs.len(), if runs.len() == 1 { "" } else { "s" });
        } else {
            println!("criterion {criterion:>2}: FAIL ({})", bad.join("; "));
        }
    }
    if by_criterion.len() != 10 {
        println!("expected 10 criteria, saw {}", by_criterion.len());
        unexpected += 1;
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
