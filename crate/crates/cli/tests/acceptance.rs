//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Lines starting with `info` are context only.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{random_instance, robust_instance, Mix};
use flexsky::oracle::{nd_brute, po_grid, poisson_cdf_reference, sky_naive, GridSpec};
use flexsky::poisson::{cdf, clamped_survival, survival};
use flexsky::{
    nd, po, run_query, sky, EngineConfig64, NumericsConfig64, Outputs, PoissonParams64,
    QueryResult64,
};
use flexsky_cli::{bench, load_relation, parse_query, BenchConfig};
use serde_json::Value;

const LAMBDAS: [f64; 8] = [0.0, 0.5, 1.0, 5.0, 10.0, 25.0, 50.0, 100.0];

struct Report {
    failed: usize,
}

impl Report {
    fn check(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} {id:>2} {name}: {detail}");
        if !ok {
            self.failed += 1;
        }
    }
}

fn info(text: String) {
    println!("info   {text}");
}

fn k_top(lambda: f64) -> u64 {
    (lambda + 10.0 * lambda.sqrt()).ceil() as u64 + 5
}

fn params(lambda: f64) -> PoissonParams64 {
    PoissonParams64::new(lambda).unwrap()
}

fn ids(v: &[String]) -> BTreeSet<String> {
    v.iter().cloned().collect()
}

fn numerics_reference(r: &mut Report) {
    let start = Instant::now();
    let mut worst_ref: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    let mut points = 0;
    for &lambda in &LAMBDAS {
        for k in 0..=k_top(lambda) {
            let c = cdf(params(lambda), k as f64).unwrap();
            let s = survival(params(lambda), k as f64).unwrap();
            worst_ref = worst_ref.max((c - poisson_cdf_reference(lambda, k)).abs());
            worst_sum = worst_sum.max((c + s - 1.0).abs());
            points += 1;
        }
    }
    let elapsed = start.elapsed();
    r.check(
        1,
        "cdf vs summation oracle",
        worst_ref <= 1e-12 && worst_sum <= 1e-12 && elapsed < Duration::from_secs(1),
        format!(
            "{points} points, max |cdf - ref| = {worst_ref:.2e}, max |cdf + sf - 1| = {worst_sum:.2e}, {:.1} ms",
            elapsed.as_secs_f64() * 1e3
        ),
    );
}

fn monotonicity(r: &mut Report) {
    let mut violations = 0;
    let mut checked = 0;
    for &lambda in &LAMBDAS {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=k_top(lambda) {
            let c = cdf(params(lambda), k as f64).unwrap();
            violations += usize::from(c < prev);
            prev = c;
            checked += 1;
        }
    }
    let top = k_top(*LAMBDAS.last().unwrap());
    for k in 0..=top {
        let mut prev = f64::NEG_INFINITY;
        for &lambda in &LAMBDAS {
            let s = survival(params(lambda), k as f64).unwrap();
            violations += usize::from(s < prev);
            prev = s;
            checked += 1;
        }
    }
    r.check(
        2,
        "monotonicity",
        violations == 0,
        format!("{checked} comparisons, {violations} violations"),
    );
}

fn clamp_error(r: &mut Report) {
    let clamp = NumericsConfig64::default().with_clamp(true);
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda in [25.0f64, 50.0, 100.0] {
        let mut worst: f64 = 0.0;
        for k in 0..=k_top(lambda) {
            let k = k as f64;
            let e = (clamped_survival(params(lambda), k, &clamp).unwrap()
                - survival(params(lambda), k).unwrap())
            .abs();
            worst = worst.max(e);
        }
        // Largest out-of-band tail: the mass at or below the last integer
        // under the band, or above the first integer over it.
        let (lo, hi) = (lambda - 2.0 * lambda.sqrt(), lambda + 2.0 * lambda.sqrt());
        let below = if lo > 0.0 {
            let k = lo.ceil() as u64;
            if k == 0 {
                0.0
            } else {
                poisson_cdf_reference(lambda, k - 1)
            }
        } else {
            0.0
        };
        let above = 1.0 - poisson_cdf_reference(lambda, hi.floor() as u64 + 1);
        let tail = below.max(above);
        let this_ok = (worst - tail).abs() <= 1e-12 && worst <= 0.05;
        ok &= this_ok;
        parts.push(format!("λ={lambda}: max {worst:.6} tail {tail:.6}"));
    }
    r.check(3, "clamp error equals out-of-band tail, <= 0.05", ok, parts.join("; "));
}

fn containment_chain(r: &mut Report) {
    let start = Instant::now();
    let cfg = EngineConfig64::default();
    let instances = 100;
    let mut violations = 0;
    let mut loose = 0;
    for seed in 0..instances {
        let inst = robust_instance::<f64>(seed, 50, 3, Mix::Monotone, true, 1e-6);
        let res = run_query(&inst.relation, &inst.family, &cfg, Outputs::all()).unwrap();
        violations += usize::from(!res.containment_holds());
        let raw = random_instance::<f64>(seed, 50, 3, Mix::Monotone, true);
        let res = run_query(&raw.relation, &raw.family, &cfg, Outputs::all()).unwrap();
        loose += usize::from(!res.containment_holds());
    }
    let elapsed = start.elapsed();
    r.check(
        4,
        "PO ⊆ ND ⊆ SKY",
        violations == 0 && elapsed < Duration::from_secs(30),
        format!(
            "{instances} instances with margins > 1e-6, {violations} violations, {:.2} s",
            elapsed.as_secs_f64()
        ),
    );
    info(format!(
        "same seeds without the margin filter: {loose} of {instances} instances break the chain through sub-tolerance ties"
    ));
}

fn nd_oracle(r: &mut Report) {
    let cfg = EngineConfig64::default();
    let mut mismatches = 0;
    let mut with_survival = 0;
    let instances = 120u64;
    for seed in 0..instances {
        let n = 10 + (seed as usize * 7) % 91;
        let d = 1 + (seed as usize % 4);
        let inst = random_instance::<f64>(1000 + seed, n, d, Mix::WithPeak, seed % 3 != 0);
        with_survival += usize::from(
            inst.family
                .transforms()
                .iter()
                .any(|t| matches!(t, flexsky::Transform::PoissonSurvival(_))),
        );
        let got = nd(&inst.relation, &inst.family, &cfg).unwrap();
        let want = nd_brute(&inst.relation, &inst.family, &cfg.numerics(), cfg.tolerance).unwrap();
        mismatches += usize::from(ids(&got.ids) != want);
    }
    r.check(
        5,
        "nd == nd_brute",
        mismatches == 0 && with_survival > 0,
        format!("{instances} instances ({with_survival} with poisson_survival), {mismatches} mismatches"),
    );
}

fn simplex_reduction(r: &mut Report) {
    let cfg = EngineConfig64::default();
    let instances = 60u64;
    let mut mismatches = 0;
    for seed in 0..instances {
        let n = 5 + (seed as usize * 13) % 96;
        let d = 1 + (seed as usize % 4);
        let inst = random_instance::<f64>(2000 + seed, n, d, Mix::Identity, false);
        let a = nd(&inst.relation, &inst.family, &cfg).unwrap();
        let b = sky(&inst.relation, &inst.family, &cfg).unwrap();
        mismatches += usize::from(a.ids != b.ids);
    }
    r.check(
        6,
        "nd == sky on the full simplex",
        mismatches == 0,
        format!("{instances} instances, {mismatches} mismatches"),
    );
}

fn po_soundness(r: &mut Report) {
    let cfg = EngineConfig64::default();
    let grid = GridSpec::default();
    let (mut used, mut violations, mut certified, mut undecided) = (0, 0, 0, 0);
    let mut seed = 3000;
    while used < 60 {
        seed += 1;
        let d = 2 + (seed as usize % 2);
        let inst = robust_instance::<f64>(seed, 20, d, Mix::Monotone, true, 1e-6);
        let nd_size = nd(&inst.relation, &inst.family, &cfg).unwrap().ids.len();
        if nd_size > 20 {
            continue;
        }
        used += 1;
        let got = ids(&po(&inst.relation, &inst.family, &cfg).unwrap().ids);
        let cert = po_grid(&inst.relation, &inst.family, &cfg.numerics(), cfg.tolerance, &grid).unwrap();
        let sound = cert.certified_po.is_subset(&got) && cert.certified_not_po.is_disjoint(&got);
        violations += usize::from(!sound);
        certified += cert.certified_po.len() + cert.certified_not_po.len();
        undecided += cert.undecided.len();
    }
    r.check(
        7,
        "PO soundness against grid certificates",
        violations == 0,
        format!("{used} instances, {certified} certified verdicts, {undecided} undecided, {violations} violations"),
    );
}

fn hospitals(r: &mut Report) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let (csv, toml) = (dir.join("hospitals.csv"), dir.join("hospitals.toml"));
    let query = parse_query(&toml).unwrap();
    let relation = load_relation(&csv, query.schema()).unwrap();
    let cfg = query.engine.engine_config();
    let res: QueryResult64 = run_query(&relation, &query.family, &cfg, Outputs::all()).unwrap();
    let (sky_set, nd_set, po_set) = (
        res.sky.as_ref().unwrap(),
        res.nd.as_ref().unwrap(),
        res.po.as_ref().unwrap(),
    );
    let numerics = cfg.numerics();
    let sky_ok = ids(&sky_set.ids) == sky_naive(&relation, &query.family, &numerics).unwrap();
    let nd_ok = ids(&nd_set.ids) == nd_brute(&relation, &query.family, &numerics, cfg.tolerance).unwrap();
    let cert = po_grid(&relation, &query.family, &numerics, cfg.tolerance, &GridSpec::default()).unwrap();
    let po_ids = ids(&po_set.ids);
    let po_ok = cert.certified_po.is_subset(&po_ids) && cert.certified_not_po.is_disjoint(&po_ids);
    let chain = po_set.is_subset_of(nd_set) && nd_set.ids.len() >= po_set.ids.len();
    let cli = Command::new(env!("CARGO_BIN_EXE_flexsky"))
        .args(["po", "--oracle", "--relation"])
        .arg(&csv)
        .arg("--query")
        .arg(&toml)
        .output()
        .unwrap();
    r.check(
        8,
        "five-hospital scenario",
        sky_ok && nd_ok && po_ok && chain && cli.status.code() == Some(0),
        format!(
            "ND {:?}, PO {:?}, oracles sky={sky_ok} nd={nd_ok} po={po_ok}, cli exit {:?}",
            nd_set.ids,
            po_set.ids,
            cli.status.code()
        ),
    );
}

fn exact_vs_clamp(r: &mut Report) {
    let start = Instant::now();
    let report = bench(&BenchConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let diff = report.nd_difference.as_ref().unwrap();
    let filtered = report.filtered.as_ref().unwrap();
    let stats = report.clamp_error.as_ref().unwrap();
    r.check(
        9,
        "bench n=10000 d=3, exact vs clamp",
        elapsed < Duration::from_secs(60) && filtered.nd_difference.count == 0,
        format!(
            "{:.2} s, ND sizes {}/{}, symmetric difference {}, filtered ({} tuples, gap > {:.3e}) difference {}",
            elapsed.as_secs_f64(),
            report.exact.nd_size,
            report.clamp.as_ref().unwrap().nd_size,
            diff.count,
            filtered.tuples,
            filtered.threshold,
            filtered.nd_difference.count
        ),
    );
    info(format!(
        "clamp error over {} Poisson terms: {} clamped, max {:.3e}, mean {:.3e}",
        stats.evaluations, stats.clamped, stats.max, stats.mean
    ));
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("timing_ms");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn determinism(r: &mut Report) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let csv = dir.join("hospitals.csv").display().to_string();
    let toml = dir.join("hospitals.toml").display().to_string();
    let commands: Vec<Vec<&str>> = vec![
        vec!["sky", "--relation", &csv, "--query", &toml],
        vec!["nd", "--relation", &csv, "--query", &toml, "--oracle"],
        vec!["po", "--relation", &csv, "--query", &toml, "--clamp", "--threads", "4"],
        vec!["cdf", "--lambda", "10", "--k", "8", "--mode", "survival"],
        vec!["gen", "--n", "200", "--seed", "42", "--query", &toml],
        vec!["bench", "--n", "2000", "--seed", "5", "--clamp"],
    ];
    let mut differing = Vec::new();
    for args in &commands {
        let run = || {
            let out = Command::new(env!("CARGO_BIN_EXE_flexsky")).args(args).output().unwrap();
            assert_eq!(out.status.code(), Some(0), "{args:?}");
            out.stdout
        };
        let (a, b) = (run(), run());
        let same = if args[0] == "bench" {
            let parse = |bytes: &[u8]| {
                let mut v: Value = serde_json::from_slice(bytes).unwrap();
                strip_timing(&mut v);
                serde_json::to_vec(&v).unwrap()
            };
            parse(&a) == parse(&b)
        } else {
            a == b
        };
        if !same {
            differing.push(args[0]);
        }
    }
    r.check(
        10,
        "repeated runs are byte-identical",
        differing.is_empty(),
        format!(
            "{} commands run twice, differing: {differing:?} (bench compared without timings)",
            commands.len()
        ),
    );
}

fn main() {
    let mut r = Report { failed: 0 };
    numerics_reference(&mut r);
    monotonicity(&mut r);
    clamp_error(&mut r);
    containment_chain(&mut r);
    nd_oracle(&mut r);
    simplex_reduction(&mut r);
    po_soundness(&mut r);
    hospitals(&mut r);
    exact_vs_clamp(&mut r);
    determinism(&mut r);
    if r.failed > 0 {
        println!("{} criteria failed", r.failed);
        std::process::exit(1);
    }
}
