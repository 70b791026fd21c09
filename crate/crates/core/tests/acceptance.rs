//! Acceptance criteria: one PASS/FAIL line each.

use std::time::{Duration, Instant};

use ginibre_gap::cli::verify::{self, Profile, SuiteReport};
use ginibre_gap::EnsembleSpec;

struct Outcome {
    pass: bool,
    summary: String,
}

fn timed(limit_secs: u64, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let el = t.elapsed();
    o.pass &= el < Duration::from_secs(limit_secs);
    o.summary = format!("{}; {:.1} s (limit {limit_secs} s)", o.summary, el.as_secs_f64());
    o
}

fn from_report(r: SuiteReport) -> Outcome {
    let summary = match r.details.get("error") {
        Some(e) => format!("error: {e}"),
        None => format!("max residual {:.3e}", r.max_residual),
    };
    Outcome { pass: r.pass, summary }
}

fn bounded(label: &str, value: ginibre_gap::Result<f64>, limit: f64) -> Outcome {
    match value {
        Ok(v) => Outcome { pass: v <= limit, summary: format!("{label} {v:.3e} (limit {limit:e})") },
        Err(e) => Outcome { pass: false, summary: format!("error: {e}") },
    }
}

fn closed_form_gap(profile: &Profile) -> Outcome {
    let r = verify::closed_form(profile);
    let dynm = r.details.get("dynamics").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
    let fred = verify::exponential_law_fredholm();
    let z = verify::mc_exponential(profile.samples, profile.seed ^ 1);
    match (fred, z) {
        (Ok(f), Ok(z)) => Outcome {
            pass: f <= 1e-10 && dynm <= 1e-6 && z <= 3.0,
            summary: format!("fredholm {f:.3e}, dynamics {dynm:.3e}, mc {z:.2}σ"),
        },
        (Err(e), _) | (_, Err(e)) => Outcome { pass: false, summary: format!("error: {e}") },
    }
}

fn incomplete_gamma(profile: &Profile) -> Outcome {
    let r = verify::closed_form(profile);
    match r.details.get("incomplete_gamma").and_then(|v| v.as_f64()) {
        Some(v) => bounded("max |E − Γ(ν+1,1)/Γ(ν+1)|", Ok(v), 1e-8),
        None => from_report(r),
    }
}

fn mc_integer_nu(profile: &Profile) -> Outcome {
    let z = EnsembleSpec::new(2, 5, &[1.0, 2.0], 1.0).and_then(|sp| verify::mc_against_fredholm(&sp, profile.samples, profile.seed ^ 37)).map(|(z, _)| z);
    bounded("max |z|", z, 3.0)
}

fn series_ratio(profile: &Profile) -> Outcome {
    let r = verify::series(profile);
    let get = |k: &str| r.details.get(k).and_then(|v| v.as_f64());
    match (get("measured_ratio"), get("predicted_ratio"), get("exponent")) {
        (Some(m), Some(p), Some(e)) => Outcome { pass: r.pass, summary: format!("error ratio {m:.2} against {p:.2} for exponent {e}") },
        _ => from_report(r),
    }
}

fn main() {
    let profile = Profile::default();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("closed-form exponential gap", Box::new(|| timed(30, || closed_form_gap(&profile)))),
        ("incomplete-gamma gap", Box::new(|| incomplete_gamma(&profile))),
        ("kernel form equivalence", Box::new(|| timed(60, || from_report(verify::forms(&profile))))),
        ("exact rational identities", Box::new(|| from_report(verify::identities(&profile)))),
        ("recurrence suite", Box::new(|| from_report(verify::recurrences(&profile)))),
        ("route equivalence", Box::new(|| timed(120, || bounded("max |τ − det|", verify::route_equivalence().map(|r| r.0), 1e-6)))),
        ("Hamiltonian log-derivative", Box::new(|| bounded("max relative diff", verify::hamiltonian_log_derivative().map(|r| r.0), 1e-5))),
        ("conserved quantities", Box::new(|| from_report(verify::conserved(&profile)))),
        ("Painlevé residuals", Box::new(|| from_report(verify::painleve(&profile)))),
        ("small-s gap series", Box::new(|| series_ratio(&profile))),
        ("Schlesinger compatibility", Box::new(|| from_report(verify::schlesinger(&profile)))),
        ("hard-edge convergence", Box::new(|| from_report(verify::hard_edge(&profile)))),
        ("Monte Carlo, integer ν", Box::new(|| timed(180, || mc_integer_nu(&profile)))),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.summary);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
