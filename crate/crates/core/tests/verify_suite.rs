use abflow::field::{self, CurrentField};
use abflow::verify::{self, Verdict};
use abflow::{FlowParams, Result, Vec2};

/// The analytic current with `u` perturbed by `eps * x`.
struct Tampered {
    params: FlowParams,
    eps: f64,
}

impl CurrentField for Tampered {
    fn current_at(&self, p: Vec2) -> Result<Vec2> {
        let j = field::current(&self.params, p)?;
        Ok(Vec2::new(j.x + self.eps * p.x, j.y))
    }
}

fn verdict_of(reports: &[verify::CheckReport], name: &str) -> Verdict {
    reports.iter().find(|r| r.name == name).unwrap().verdict
}

#[test]
fn default_parameters_pass_every_check() {
    let params = FlowParams::natural(1.0, 0.5).unwrap();
    let reports = verify::run_suite(&params, 42);
    for r in &reports {
        println!(
            "{:34} residual {:>10.3e} tol {:>8.1e} order {:?} {:?}",
            r.name,
            r.residual.unwrap_or(f64::NAN),
            r.tolerance,
            r.order,
            r.verdict
        );
    }
    assert!(verify::all_passed(&reports));
    assert!(reports.iter().all(|r| r.verdict == Verdict::Pass));
}

#[test]
fn tampered_current_is_caught() {
    let params = FlowParams::natural(1.0, 0.5).unwrap();
    let tampered = Tampered { params, eps: 1e-6 };
    let reports = verify::run_suite_with_field(&params, 42, &tampered);
    assert_eq!(verdict_of(&reports, "divergence_free"), Verdict::Fail);
    assert_eq!(verdict_of(&reports, "cauchy_riemann"), Verdict::Fail);
    assert!(!verify::all_passed(&reports));
    // the perturbation is irrotational, so the curl check still passes
    assert_eq!(verdict_of(&reports, "curl_free"), Verdict::Pass);
}

#[test]
fn suite_is_deterministic() {
    let params = FlowParams::new(1.3, 0.7, 2.0, 0.35).unwrap();
    assert_eq!(verify::run_suite(&params, 9), verify::run_suite(&params, 9));
}

#[test]
fn other_parameter_sets_pass() {
    for (hbar, mass, k, delta) in [
        (1.0, 1.0, 1.0, 0.1),
        (2.0, 0.5, 3.0, 0.25),
        (1.0, 1.0, 0.0, 0.5),
        (1.0, 2.0, 1.0, 0.0),
    ] {
        let params = FlowParams::new(hbar, mass, k, delta).unwrap();
        let reports = verify::run_suite(&params, 1);
        for r in &reports {
            assert!(r.passed(), "{hbar} {mass} {k} {delta}: {r:#?}");
        }
    }
}

#[test]
fn no_flux_skips_saddle_checks() {
    let params = FlowParams::natural(1.0, 0.0).unwrap();
    let reports = verify::run_suite(&params, 42);
    assert_eq!(
        verdict_of(&reports, "saddle_eigenstructure"),
        Verdict::NotApplicable
    );
    assert_eq!(
        verdict_of(&reports, "separatrix_level_consistency"),
        Verdict::NotApplicable
    );
    assert!(verify::all_passed(&reports));
}
