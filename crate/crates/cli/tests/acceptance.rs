//! Acceptance suite: one PASS/FAIL line per criterion.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use derham::{rr_space, second_kind_space, Denom64, Differential64, Place, C64};
use derham_cli::checks::{self, FlowFixture};
use derham_cli::instances::{self, Instance};
use rand::Rng;

const SEED: u64 = 2024;
const PER_GENUS: usize = 20;

const DIM_SECONDS: f64 = 10.0;
const GRAM_TOL: f64 = 1e-8;
const RESIDUE_IDENTITY_TOL: f64 = 1e-10;
const RESIDUE_SUM_TOL: f64 = 1e-9;
const REDUCTION_TOL: f64 = 1e-8;
const FLOW_T: f64 = 1.0;
const FLOW_STEPS: usize = 1000;
const FLOW_SECONDS: f64 = 5.0;
const LINEARITY_TOL: f64 = 1e-6;
const DEFECT_TOL: f64 = 1e-8;
const PSI_RATIO_FACTOR: f64 = 1.5;
const RESTART_TOL: f64 = 1e-6;
const PSI_STEPS: usize = 1000;
const CONVERGENCE_STEPS: usize = 25;
const CONVERGENCE_RANGE: (f64, f64) = (12.0, 20.0);

struct Line {
    id: usize,
    name: &'static str,
    passed: bool,
}

fn report(lines: &mut Vec<Line>, id: usize, name: &'static str, outcome: Result<(bool, String), String>) {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, e));
    println!("{} {id} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    lines.push(Line { id, name, passed });
}

fn instance_set() -> Vec<Instance> {
    let mut rng = instances::rng(SEED);
    let mut out = Vec::new();
    for g in 1..=3 {
        for _ in 0..PER_GENUS {
            out.push(instances::instance(&mut rng, g));
        }
    }
    out
}

fn dimensions(insts: &[Instance], gen_seconds: f64) -> Result<(bool, String), String> {
    let start = Instant::now();
    let mut bad = Vec::new();
    for inst in insts {
        let g = inst.curve.genus();
        let a = second_kind_space(&inst.curve, &inst.d).map_err(|e| e.to_string())?.len();
        let sum = inst.d.plus(&inst.d0, 1e-8);
        let b = rr_space(&inst.curve, &sum).map_err(|e| e.to_string())?.len();
        if a != 2 * g || b != g + 1 {
            bad.push(format!("g={g}: {a}, {b}"));
        }
    }
    let secs = start.elapsed().as_secs_f64() + gen_seconds;
    Ok((
        bad.is_empty() && secs < DIM_SECONDS,
        format!(
            "{} instances, {} mismatches{}, {secs:.2} s (limit {DIM_SECONDS} s)",
            insts.len(),
            bad.len(),
            if bad.is_empty() { String::new() } else { format!(" [{}]", bad.join("; ")) }
        ),
    ))
}

fn symplecticity(insts: &[Instance]) -> Result<(bool, String), String> {
    let mut worst = 0.0f64;
    for inst in insts {
        worst = worst.max(checks::gram_error(&inst.curve, &inst.d).map_err(|e| e.to_string())?);
    }
    Ok((worst < GRAM_TOL, format!("max |G - J| {worst:e} (limit {GRAM_TOL:e})")))
}

fn random_differential(rng: &mut rand_chacha::ChaCha8Rng, inst: &Instance) -> Differential64 {
    let cv = &inst.curve;
    let mut roots = Vec::new();
    let mut xs: Vec<C64> = Vec::new();
    let n = rng.gen_range(1..=3);
    for _ in 0..n {
        let p = instances::point(rng, cv, &xs, 0.3);
        xs.push(p.x);
        let m = rng.gen_range(1..=3);
        roots.push((p.x, m));
    }
    let den = Denom64::from_factors(C64::new(1., 0.), &roots, 1e-8);
    let (da, db) = (rng.gen_range(0..=3), rng.gen_range(0..=2));
    let a = instances::random_poly(rng, da);
    let b = instances::random_poly(rng, db);
    Differential64::new(a, b, den)
}

fn residue_identities(insts: &[Instance]) -> Result<(bool, String), String> {
    let mut rng = instances::rng(SEED + 1);
    let e = |e: derham::Error| e.to_string();
    let pairs = 100;
    let (mut skew, mut anti, mut sums) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..pairs {
        let inst = &insts[k % insts.len()];
        let cv = &inst.curve;
        let a = checks::random_second_kind(&mut rng, cv, &inst.d).map_err(e)?;
        let b = checks::random_second_kind(&mut rng, cv, &inst.d).map_err(e)?;
        skew = skew.max(checks::skew_error(cv, &a, &b).map_err(e)?);

        let f1 = instances::function(&mut rng, cv, &[], 2, 2);
        let avoid: Vec<C64> = f1.r.roots.iter().map(|(r, _)| *r).collect();
        let f2 = instances::function(&mut rng, cv, &avoid, 2, 2);
        let places = f1.candidate_poles(cv).into_iter().chain(f2.candidate_poles(cv));
        for pl in places {
            anti = anti.max(checks::residue_antisymmetry(cv, &f1, &f2, &pl).map_err(e)?);
        }
        let generic = cv.lift(instances::disk(&mut rng, 2.0), C64::new(1., 0.));
        anti = anti.max(checks::residue_antisymmetry(cv, &f1, &f2, &Place::Point(generic)).map_err(e)?);

        let w = random_differential(&mut rng, inst);
        sums = sums.max(checks::residue_sum(cv, &w).map_err(e)?);
    }
    let passed = skew < RESIDUE_IDENTITY_TOL && anti < RESIDUE_IDENTITY_TOL && sums < RESIDUE_SUM_TOL;
    Ok((
        passed,
        format!(
            "{pairs} pairs: skew {skew:e}, Res(f1 df2) + Res(f2 df1) {anti:e} (limit {RESIDUE_IDENTITY_TOL:e}); \
             residue sums {sums:e} (limit {RESIDUE_SUM_TOL:e})"
        ),
    ))
}

fn reduction(insts: &[Instance]) -> Result<(bool, String), String> {
    let mut rng = instances::rng(SEED + 2);
    let e = |e: derham::Error| e.to_string();
    let (mut excess, mut change) = (0u32, 0.0f64);
    for inst in insts {
        let theta = checks::reduction_workload(&mut rng, &inst.curve, &inst.d).map_err(e)?;
        let r = checks::reduction(&inst.curve, &inst.d, &theta).map_err(e)?;
        excess = excess.max(r.excess_order);
        change = change.max(r.pairing_change);
    }
    Ok((
        excess == 0 && change < REDUCTION_TOL,
        format!(
            "{} reductions: max pole order beyond 2D {excess}, pairing change {change:e} (limit {REDUCTION_TOL:e})",
            insts.len()
        ),
    ))
}

fn flow(fx: &FlowFixture) -> Result<(bool, String), String> {
    let start = Instant::now();
    let r = checks::flow_linearity(fx, FLOW_T, FLOW_STEPS).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let passed = r.deviation < LINEARITY_TOL && r.slope_error < LINEARITY_TOL && r.defect < DEFECT_TOL && secs < FLOW_SECONDS;
    Ok((
        passed,
        format!(
            "T = {FLOW_T}, {FLOW_STEPS} steps in {secs:.2} s: deviation {:e}, slope vs +sum Res(f theta) {:e} \
             (vs -sum Res(f theta) {:e}), defect {:e}",
            r.deviation, r.slope_error, r.flipped_slope_error, r.defect
        ),
    ))
}

fn within_factor(r: f64) -> bool {
    (1.0 / PSI_RATIO_FACTOR..=PSI_RATIO_FACTOR).contains(&r)
}

fn baker_akhiezer(fx: &FlowFixture) -> Result<(bool, String), String> {
    let r = checks::psi_checks(fx, FLOW_T, PSI_STEPS).map_err(|e| e.to_string())?;
    let poles = r.pole_ratios.iter().all(|&x| within_factor(x));
    let zeros = r.zero_ratios.iter().all(|&x| within_factor(x));
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    Ok((
        r.t0_error == 0.0 && poles && zeros && r.restart_error < RESTART_TOL,
        format!(
            "Psi(T=0) - 1 = {:e}; pole ratios [{}], zero ratios [{}] (factor {PSI_RATIO_FACTOR}); restart {:e} (limit {RESTART_TOL:e})",
            r.t0_error,
            fmt(&r.pole_ratios),
            fmt(&r.zero_ratios),
            r.restart_error
        ),
    ))
}

fn convergence(fx: &FlowFixture) -> Result<(bool, String), String> {
    let (ratio, coarse, fine) = checks::convergence_ratio(fx, FLOW_T, CONVERGENCE_STEPS).map_err(|e| e.to_string())?;
    let (lo, hi) = CONVERGENCE_RANGE;
    Ok((
        (lo..=hi).contains(&ratio),
        format!(
            "defect {coarse:e} at {CONVERGENCE_STEPS} steps, {fine:e} at {} steps, ratio {ratio:.3} (range [{lo}, {hi}])",
            2 * CONVERGENCE_STEPS
        ),
    ))
}

fn golden() -> Result<(bool, String), String> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let input = root.join("genus1.json");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let jobs: [(&str, &[&str]); 6] = [
        ("basis", &[]),
        ("pairing", &[]),
        ("reduce", &[]),
        ("flow", &["--steps", "100", "--t-end", "0.5"]),
        ("ba", &["--steps", "100", "--t-end", "0.5"]),
        ("verify", &["--seed", "11"]),
    ];
    let mut mismatched = Vec::new();
    for (cmd, extra) in jobs {
        let mut outs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{cmd}{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_derham"))
                .arg(cmd)
                .arg("--input")
                .arg(&input)
                .arg("--output")
                .arg(&out)
                .args(extra)
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(format!("{cmd} exited with {:?}", status.status.code()));
            }
            outs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        let stored = std::fs::read(root.join("golden").join(format!("{cmd}.out"))).map_err(|e| e.to_string())?;
        if outs[0] != outs[1] || outs[0] != stored {
            mismatched.push(cmd);
        }
    }
    Ok((
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!("{} reports byte-identical across two runs and to the stored golden files", jobs.len())
        } else {
            format!("differs: {}", mismatched.join(", "))
        },
    ))
}

fn main() {
    let mut lines = Vec::new();
    let start = Instant::now();
    let insts = instance_set();
    let gen_seconds = start.elapsed().as_secs_f64();
    report(&mut lines, 1, "dimension theorem", dimensions(&insts, gen_seconds));
    report(&mut lines, 2, "symplecticity", symplecticity(&insts));
    report(&mut lines, 3, "residue identities", residue_identities(&insts));
    report(&mut lines, 4, "reduction correctness", reduction(&insts));
    let fx = checks::flow_fixture();
    report(&mut lines, 5, "flow linearity", flow(&fx));
    report(&mut lines, 6, "Baker-Akhiezer", baker_akhiezer(&fx));
    report(&mut lines, 7, "convergence order", convergence(&fx));
    report(&mut lines, 8, "CLI golden files", golden());
    let failed: Vec<String> = lines.iter().filter(|l| !l.passed).map(|l| format!("{} {}", l.id, l.name)).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}
