use std::collections::BTreeMap;
use std::sync::Arc;

use epsurr::phi::{Generator, PhiKind, PhiSpec, Scad};
use epsurr::verify::{check_conjugacy, default_families, verify_suite, Level};

/// SCAD with its conjugate perturbed on the middle branch only.
#[derive(Debug)]
struct BrokenConjugate(Scad);

impl Generator for BrokenConjugate {
    fn kind(&self) -> PhiKind {
        self.0.kind()
    }
    fn params(&self) -> BTreeMap<String, f64> {
        self.0.params()
    }
    fn in_domain(&self, t: f64) -> bool {
        self.0.in_domain(t)
    }
    fn value(&self, t: f64) -> f64 {
        self.0.value(t)
    }
    fn derivative_left(&self, t: f64) -> f64 {
        self.0.derivative_left(t)
    }
    fn derivative_right(&self, t: f64) -> f64 {
        self.0.derivative_right(t)
    }
    fn minimizer(&self) -> f64 {
        self.0.minimizer()
    }
    fn conjugate(&self, s: f64) -> f64 {
        let exact = self.0.conjugate(s);
        if s > 1.0 && s < 1.5 {
            exact * 1.001
        } else {
            exact
        }
    }
    fn conjugate_subgradient(&self, s: f64) -> f64 {
        self.0.conjugate_subgradient(s)
    }
}

#[test]
fn conjugacy_check_catches_a_corrupted_branch() {
    let broken =
        PhiSpec::from_generator(Arc::new(BrokenConjugate(Scad::new(3.7).unwrap()))).unwrap();
    let result = check_conjugacy(&[broken], 500, 1e-6);
    assert!(!result.passed, "{result}");
    assert!(result.observed > 1e-6);
}

#[test]
fn conjugacy_check_accepts_the_shipped_families() {
    let result = check_conjugacy(&default_families(), 500, 1e-8);
    assert!(result.passed, "{result}");
}

#[test]
fn fast_suite_passes() {
    let report = verify_suite(Level::Fast);
    for c in &report.checks {
        assert!(c.passed, "{c}");
    }
    assert!(report.all_passed());
    let json = serde_json::to_string(&report).unwrap();
    assert!(json.contains("\"level\":\"fast\""));
}

#[test]
fn level_parses_case_insensitively() {
    assert_eq!("FULL".parse::<Level>().unwrap(), Level::Full);
    assert_eq!("fast".parse::<Level>().unwrap(), Level::Fast);
    assert!("medium".parse::<Level>().is_err());
}
