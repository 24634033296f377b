//! Acceptance criteria 1–10, one PASS/FAIL line each.
//!
//! Runs as a plain binary so the verdict lines are never swallowed by
//! output capture. Pass criterion numbers as arguments to run a subset.

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use semiclassical::wigner::WignerPropagator;
use semiclassical::{FourierPotential, GridSpec, SemiclassicalParams};
use semiclassical_harness::config::RunConfig;
use semiclassical_harness::report::{Check, ConvergenceTable, SLOPE_BAND};
use semiclassical_harness::suites::{
    delta_convergence_checks, gamma_checks, husimi_positivity_checks, pure_state_checks,
    regularity_checks, regularity_self_test, regularity_trace, unsmoothing_checks, young_checks,
};
use semiclassical_harness::{run_l2_convergence, run_negative_sobolev};

const SWEEP: [f64; 4] = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
const SEED: u64 = 20240601;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn config(text: &str) -> RunConfig {
    RunConfig::from_toml(text).expect("acceptance config parses")
}

fn checks_verdict(checks: &[Check]) -> Verdict {
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({:.4e} vs {:.4e})", c.name, c.lhs, c.slack * c.rhs))
        .collect();
    let samples: usize = checks.iter().map(|c| c.samples).sum();
    if failed.is_empty() {
        verdict(
            true,
            format!(
                "{} checks, {samples} evaluations, 0 violations",
                checks.len()
            ),
        )
    } else {
        verdict(false, format!("violated: {}", failed.join("; ")))
    }
}

fn slope_of(table: &ConvergenceTable, quantity: &str, norm: &str) -> Option<f64> {
    table
        .fit_for(&format!("{}/{quantity}", table.experiment), norm)
        .and_then(|f| f.slope)
}

fn excluded_rows(table: &ConvergenceTable, quantity: &str) -> usize {
    let name = format!("{}/{quantity}", table.experiment);
    table
        .rows
        .iter()
        .filter(|r| r.experiment == name && r.excluded)
        .count()
}

fn in_band(s: Option<f64>) -> bool {
    s.is_some_and(|s| (SLOPE_BAND[0]..=SLOPE_BAND[1]).contains(&s))
}

fn fmt_slope(s: Option<f64>) -> String {
    s.map_or("none".into(), |s| format!("{s:.3}"))
}

fn exactness_config(potential: &str) -> RunConfig {
    config(&format!(
        r#"
experiment = "exactness"
epsilons = {SWEEP:?}
t = 0.5
floor = false

[potential]
{potential}

[initial]
kind = "mixed_gaussian"
center = [0.5, 0.0]
spread = [0.5, 0.5]
"#
    ))
}

fn criterion_1() -> Verdict {
    let mut worst: Vec<String> = Vec::new();
    let mut passed = true;
    for (name, spec) in [
        ("V=0", "kind = \"zero\""),
        ("harmonic", "kind = \"harmonic\""),
    ] {
        let table = match run_l2_convergence(&exactness_config(spec)) {
            Ok(t) => t,
            Err(e) => return verdict(false, format!("{name}: {e}")),
        };
        let rel = table
            .rows
            .iter()
            .filter(|r| r.experiment.ends_with("/rho-W/rel"))
            .map(|r| r.error)
            .fold(0.0, f64::max);
        passed &= rel < 1e-5;
        worst.push(format!("{name} max ‖ρ−W‖/‖W0‖ = {rel:.2e}"));
    }
    verdict(passed, format!("{} (threshold 1e-5)", worst.join(", ")))
}

fn criterion_2() -> Verdict {
    let run = || -> semiclassical::Result<f64> {
        let grid = GridSpec::new(1, (-4.0, 4.0), 256, (-4.0, 4.0), 256)?;
        let eps = 1.0 / 64.0;
        let params = SemiclassicalParams::husimi(1, eps)?;
        let w0 =
            semiclassical::schrodinger::gaussian_mixed_state(&[0.3, 0.2], &[0.4, 0.4], eps, &grid)?;
        let pot = FourierPotential::cosine(1.0, 1.0);
        let prop = WignerPropagator::new(&grid, &pot, &params, 1e-3)?;
        let n0 = w0.l2_norm();
        let mut drift = 0.0f64;
        let last = prop.run(&w0, 1000, 1, |_, f| {
            drift = drift.max((f.l2_norm() - n0).abs() / n0);
        })?;
        Ok(drift.max((last.l2_norm() - n0).abs() / n0))
    };
    match run() {
        Ok(d) => verdict(
            d < 1e-10,
            format!("max relative L² drift over 1000 steps = {d:.2e} (threshold 1e-10)"),
        ),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn criterion_3() -> Verdict {
    let cfg = config(&format!(
        r#"
experiment = "l2-cos"
epsilons = {SWEEP:?}
t = 0.5

[potential]
kind = "cosine"
amplitude = 1.0

[initial]
kind = "mixed_gaussian"
center = [0.0, 0.0]
spread = [1.0, 1.0]
"#
    ));
    match run_l2_convergence(&cfg) {
        Ok(t) => {
            let a = slope_of(&t, "rho-W", "l2");
            let b = slope_of(&t, "rho1-Wt", "l2");
            verdict(
                in_band(a) && in_band(b),
                format!(
                    "slope ‖ρ−W‖ = {} ({} rows within 10× of the grid floor), slope ‖ρ₁−W̃‖ = {} (band [{}, {}])",
                    fmt_slope(a),
                    excluded_rows(&t, "rho-W"),
                    fmt_slope(b),
                    SLOPE_BAND[0],
                    SLOPE_BAND[1]
                ),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn criterion_4() -> Verdict {
    let cfg = config(&format!(
        r#"
experiment = "hneg-coherent"
epsilons = {SWEEP:?}
t = 0.5

[potential]
kind = "cosine"
amplitude = 1.0

[initial]
kind = "coherent"
x0 = [0.25]
k0 = [0.0]

[grid]
x = [-0.5, 1.5]
k = [-1.0, 1.0]
"#
    ));
    match run_negative_sobolev(&cfg) {
        Ok(t) => {
            let s = slope_of(&t, "rho-W", "h-3");
            verdict(
                in_band(s),
                format!(
                    "slope ‖ρ−W‖_H⁻³ = {} (band [{}, {}])",
                    fmt_slope(s),
                    SLOPE_BAND[0],
                    SLOPE_BAND[1]
                ),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn criterion_5() -> Verdict {
    let cfg = config(
        r#"
experiment = "regularity"
epsilons = [0.05]
t = 1.0

[potential]
kind = "cosine"
amplitude = 1.0

[initial]
kind = "coherent"
x0 = [0.1]
k0 = [0.2]

[grid]
x = [-2.0, 2.0]
k = [-2.0, 2.0]
"#,
    );
    let trace = match regularity_trace(&cfg) {
        Ok(t) => t,
        Err(e) => return verdict(false, e.to_string()),
    };
    let mut checks: Vec<Check> = regularity_checks(&trace, trace.d)
        .into_iter()
        .filter(|c| c.name != "h-1 growth" && c.name != "l2 conservation")
        .collect();
    let self_test = regularity_self_test(&trace);
    let exercised = self_test.len() == 2;
    checks.extend(self_test);
    let mut v = checks_verdict(&checks);
    v.passed &= exercised;
    v.detail = format!(
        "{}; D(1,1) = {:.4}{}",
        v.detail,
        trace.d,
        if exercised {
            ""
        } else {
            "; halved-rate self-test not exercisable"
        }
    );
    v
}

fn criterion_6() -> Verdict {
    match unsmoothing_checks(SEED, 200, &[1e-1, 1e-2, 1e-3], &[(1.0, 1.0), (2.0, 0.5)]) {
        Ok(c) => checks_verdict(&c),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn criterion_7() -> Verdict {
    match husimi_positivity_checks(0.05) {
        Ok(c) => {
            let mins: Vec<String> = c
                .iter()
                .filter(|c| c.name.starts_with("cat husimi"))
                .map(|c| format!("{:.2e}", c.rhs))
                .collect();
            let mut v = checks_verdict(&c);
            v.detail = format!("{}; cat Husimi minima {}", v.detail, mins.join(", "));
            v
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn criterion_8() -> Verdict {
    let sweep = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    match pure_state_checks(&sweep, 0.1, 0.2) {
        Ok(c) => checks_verdict(&c),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn criterion_9() -> Verdict {
    let sweep = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    match delta_convergence_checks(&sweep, 0.1, 0.2, 1) {
        Ok(c) => {
            let slopes: Vec<String> = c.iter().map(|c| format!("{:.3}", c.rhs)).collect();
            let mut v = checks_verdict(&c);
            v.detail = format!("{}; slopes {} (floor 0.225)", v.detail, slopes.join(", "));
            v
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn criterion_10() -> Verdict {
    let run = || -> semiclassical_harness::Result<Vec<Check>> {
        let mut c = young_checks(SEED, 100)?;
        c.extend(gamma_checks(10..=50, &[1.5, 2.5])?);
        Ok(c)
    };
    match run() {
        Ok(c) => checks_verdict(&c),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Verdict); 10] = [
        (1, "exactness for V=0 and harmonic V", criterion_1),
        (2, "L² conservation over 1000 steps", criterion_2),
        (3, "L² sweep slopes", criterion_3),
        (4, "H⁻³ sweep slope for coherent data", criterion_4),
        (5, "H¹ and H¹_ε regularity bounds", criterion_5),
        (6, "unsmoothing estimates", criterion_6),
        (7, "Husimi positivity of a cat state", criterion_7),
        (8, "pure-state scaling and gradient bounds", criterion_8),
        (9, "coherent-state delta convergence", criterion_9),
        (10, "Young and Gamma inequalities", criterion_10),
    ];
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut err = std::io::stderr().lock();
    let mut failures = 0;
    for (id, title, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        failures += usize::from(!v.passed);
        let _ = writeln!(
            err,
            "criterion {id:>2} {}: {title}: {} [{:.1}s]",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    let _ = writeln!(err, "acceptance: {failures} criteria failed");
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
