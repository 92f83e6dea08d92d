//! The `verify` property suite.

use derham::{rr_space, second_kind_space, Curve64, Divisor64, Error};
use serde::Serialize;

use crate::checks;
use crate::instances;

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl PropertyResult {
    fn measured(name: &str, value: f64, bound: f64) -> Self {
        PropertyResult {
            name: name.into(),
            passed: value < bound,
            detail: format!("max {value:e} (bound {bound:e})"),
        }
    }

    fn failed(name: &str, e: &Error) -> Self {
        PropertyResult {
            name: name.into(),
            passed: false,
            detail: format!("{e}"),
        }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn measure(name: &str, bound: f64, f: impl FnOnce() -> Result<f64, Error>) -> PropertyResult {
    match f() {
        Ok(v) => PropertyResult::measured(name, v, bound),
        Err(e) => PropertyResult::failed(name, &e),
    }
}

/// Runs every property with the given seed. `fixture`, when present, adds
/// the Gram-matrix check for that curve and divisor.
pub fn run(seed: u64, tol: f64, fixture: Option<(&Curve64, &Divisor64)>) -> Vec<PropertyResult> {
    let mut out = Vec::new();
    if let Some((cv, d)) = fixture {
        out.push(measure("fixture_gram_is_standard", tol, || checks::gram_error(cv, d)));
    }
    let mut rng = instances::rng(seed);
    let per_genus = 3;
    let mut insts = Vec::new();
    for g in 1..=3 {
        for _ in 0..per_genus {
            insts.push(instances::instance(&mut rng, g));
        }
    }

    let mut dim_ok = true;
    let mut dim_detail = String::from("all instances");
    for inst in &insts {
        let g = inst.curve.genus();
        let sum = inst.d.plus(&inst.d0, 1e-8);
        let dims = second_kind_space(&inst.curve, &inst.d).map(|s| s.len()).and_then(|a| Ok((a, rr_space(&inst.curve, &sum)?.len())));
        match dims {
            Ok((a, b)) if a == 2 * g && b == g + 1 => {}
            Ok((a, b)) => {
                dim_ok = false;
                dim_detail = format!("genus {g}: second-kind {a}, L(D+D0) {b}");
            }
            Err(e) => {
                dim_ok = false;
                dim_detail = format!("{e}");
            }
        }
    }
    out.push(PropertyResult {
        name: "dimensions".into(),
        passed: dim_ok,
        detail: dim_detail,
    });

    out.push(measure("symplectic_gram", tol, || {
        insts.iter().try_fold(0.0f64, |m, i| Ok(m.max(checks::gram_error(&i.curve, &i.d)?)))
    }));
    out.push(measure("lagrangian_spans", tol, || {
        insts.iter().try_fold(0.0f64, |m, i| Ok(m.max(checks::lagrangian_error(&i.curve, &i.d)?)))
    }));
    out.push(measure("skew_symmetry", tol, || {
        let mut worst = 0.0f64;
        for i in &insts {
            let a = checks::random_second_kind(&mut rng, &i.curve, &i.d)?;
            let b = checks::random_second_kind(&mut rng, &i.curve, &i.d)?;
            worst = worst.max(checks::skew_error(&i.curve, &a, &b)?);
        }
        Ok(worst)
    }));
    out.push(measure("exact_forms_pair_to_zero", tol, || {
        let mut worst = 0.0f64;
        for i in &insts {
            let theta = checks::random_second_kind(&mut rng, &i.curve, &i.d)?;
            let avoid: Vec<_> = i.d.points.iter().map(|(p, _)| p.x).collect();
            let f = instances::function(&mut rng, &i.curve, &avoid, 2, 2);
            worst = worst.max(checks::exact_pairing(&i.curve, &f, &theta)?);
        }
        Ok(worst)
    }));
    out.push(measure("reduction_preserves_pairing", tol, || {
        let mut worst = 0.0f64;
        for i in &insts {
            let theta = checks::reduction_workload(&mut rng, &i.curve, &i.d)?;
            let r = checks::reduction(&i.curve, &i.d, &theta)?;
            if r.excess_order > 0 {
                return Ok(f64::INFINITY);
            }
            worst = worst.max(r.pairing_change);
        }
        Ok(worst)
    }));

    let fx = checks::flow_fixture();
    out.push(measure("flow_abel_linearity", 1e-6, || {
        let r = checks::flow_linearity(&fx, 0.2, 100)?;
        Ok(r.deviation.max(r.slope_error))
    }));
    out.push(measure("flow_on_curve", 1e-8, || Ok(checks::flow_linearity(&fx, 0.2, 100)?.defect)));
    out
}
