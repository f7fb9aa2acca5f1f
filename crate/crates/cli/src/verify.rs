//! The verification suite: one pass/fail criterion per acceptance check.

use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use hctps_core::benchmarks::bent_cigar;
use hctps_core::{
    evaluate, exhaustive_iteration_estimate, hctps_best, make_budget_with, octant_sequence, persist, run_ga_with,
    search_cube, ExperimentRecord, FunctionId, GaConfig, Objective, RunStats, SearchBox, SubcubeTable, EVALS_PER_DIM,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::manifest::{FunctionSelection, Mode, RunManifest};
use crate::run::{run_experiment, without_wall_time};

const BUILTIN_FUNCTIONS: &str = include_str!("../../core/fixtures/functions.json");
const BUILTIN_SUBCUBES: &str = include_str!("../../core/fixtures/subcubes.json");

pub const CRITERIA: [&str; 9] = [
    "function-spot-checks",
    "protocol-budget",
    "geometry-fixtures",
    "coverage-estimate",
    "superset-dominance",
    "qualitative-gap",
    "exact-zero-f11-f12",
    "f1-geometric-bound",
    "determinism-and-stats",
];

/// Largest Bent Cigar value anywhere in the scaled F1 subcube.
pub const F1_BOUND: f64 = 2.2e-37;
/// `100 * 2^-80`, the half-width of the scaled F1 subcube.
const F1_SCALED_EDGE: f64 = 8.271806125530277e-23;
const REQUIRED_GAP: [FunctionId; 8] = [
    FunctionId::F1,
    FunctionId::F2,
    FunctionId::F4,
    FunctionId::F7,
    FunctionId::F11,
    FunctionId::F12,
    FunctionId::F13,
    FunctionId::F14,
];
const PARITY: [FunctionId; 2] = [FunctionId::F3, FunctionId::F5];

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Directory holding `functions.json` and/or `subcubes.json`; bundled copies fill any gap.
    pub fixtures_dir: Option<PathBuf>,
    pub budget_per_dim: usize,
    pub seed: u64,
    pub runs: usize,
    pub dim: usize,
    /// Restrict to these criterion names; empty means all.
    pub only: Vec<String>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { fixtures_dir: None, budget_per_dim: EVALS_PER_DIM, seed: 42, runs: 20, dim: 30, only: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<22} {:>7.2}s  {}", self.name, self.seconds, self.detail)
    }
}

type Check = Result<String, String>;

#[derive(Deserialize)]
struct FunctionCase {
    id: FunctionId,
    dim: usize,
    probe_points: Vec<Probe>,
}

#[derive(Deserialize)]
struct Probe {
    x: Vec<f64>,
    expected_f: f64,
    optimum: bool,
}

fn fixture_text(opts: &VerifyOptions, file: &str, builtin: &str) -> Result<String, String> {
    match &opts.fixtures_dir {
        Some(dir) if dir.join(file).exists() => {
            std::fs::read_to_string(dir.join(file)).map_err(|e| format!("{}: {e}", dir.join(file).display()))
        }
        _ => Ok(builtin.to_string()),
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Counts every objective call; the audit that the GA's own bookkeeping is honest.
struct Counting {
    fid: FunctionId,
    calls: AtomicUsize,
}

impl Objective<f64> for Counting {
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        <FunctionId as Objective<f64>>::evaluate(&self.fid, x)
    }
}

fn spot_checks(opts: &VerifyOptions) -> Check {
    let text = fixture_text(opts, "functions.json", BUILTIN_FUNCTIONS)?;
    let cases: Vec<FunctionCase> = serde_json::from_str(&text).map_err(|e| format!("functions.json: {e}"))?;
    let mut probes = 0;
    for case in &cases {
        for p in &case.probe_points {
            if p.x.len() != case.dim {
                return Err(format!("{} probe has {} coordinates, expected {}", case.id, p.x.len(), case.dim));
            }
            let v = evaluate(case.id, &p.x).map_err(|e| e.to_string())?;
            let ok = if p.optimum { (v - p.expected_f).abs() <= 1e-9 } else { close(v, p.expected_f, 1e-9) };
            if !ok {
                return Err(format!("{} d={} at {:?}: got {v:e}, expected {:e}", case.id, case.dim, &p.x[..2], p.expected_f));
            }
            probes += 1;
        }
    }
    let covered = FunctionId::ALL.iter().all(|f| cases.iter().any(|c| c.id == *f && c.probe_points.iter().any(|p| p.optimum)));
    if !covered {
        return Err("some function has no optimum probe".into());
    }
    for dim in [2, 3, 30] {
        let exact = [
            (FunctionId::F10, vec![1.0f64; dim]),
            (FunctionId::F11, vec![0.0; dim]),
            (FunctionId::F12, vec![0.0; dim]),
            (FunctionId::F14, vec![0.0; dim]),
        ];
        for (fid, x) in exact {
            let v = evaluate(fid, &x).map_err(|e| e.to_string())?;
            if v.abs() > 1e-12 {
                return Err(format!("{fid} at its optimum in {dim}-D gives {v:e}"));
            }
        }
    }
    Ok(format!("{probes} probes over {} fixture cases; F10/F11/F12/F14 optima within 1e-12", cases.len()))
}

fn protocol_budget(opts: &VerifyOptions, schedule: &Result<Vec<ExperimentRecord>, String>) -> Check {
    let cap = EVALS_PER_DIM * opts.dim;
    let cube = search_cube::<f64>(opts.dim).map_err(|e| e.to_string())?;
    let mut max_seen = 0;
    for fid in FunctionId::ALL {
        for i in 0..opts.runs {
            let counter = Counting { fid, calls: AtomicUsize::new(0) };
            let config = GaConfig::default().with_seed(opts.seed.wrapping_add(i as u64));
            let mut budget = make_budget_with(opts.dim, opts.budget_per_dim);
            let r = run_ga_with(&counter, &cube, &config, &mut budget).map_err(|e| format!("{fid}: {e}"))?;
            let calls = counter.calls.load(Ordering::Relaxed);
            if calls != r.evaluations_used {
                return Err(format!("{fid} run {i}: {calls} calls but {} recorded", r.evaluations_used));
            }
            if calls > cap {
                return Err(format!("{fid} run {i}: {calls} evaluations exceed the cap of {cap}"));
            }
            max_seen = max_seen.max(calls);
        }
    }
    let records = schedule.as_ref().map_err(|e| format!("schedule unavailable: {e}"))?;
    for rec in records {
        for (p, phase) in rec.phases.iter().enumerate() {
            if let Some(r) = phase.runs.iter().find(|r| r.evaluations_used > cap) {
                return Err(format!("{} phase {p}: {} evaluations exceed {cap}", rec.fid, r.evaluations_used));
            }
        }
    }
    Ok(format!("{} audited runs, max {max_seen} <= {cap} evaluations", 14 * opts.runs))
}

fn expected_octants() -> Vec<SearchBox<f64>> {
    let neg = (-100.0, 0.0);
    let pos = (0.0, 100.0);
    [
        [neg, neg, neg],
        [neg, neg, pos],
        [neg, pos, neg],
        [neg, pos, pos],
        [pos, neg, neg],
        [pos, neg, pos],
        [pos, pos, neg],
        [pos, pos, pos],
    ]
    .iter()
    .map(|iv| SearchBox::from_intervals(iv).expect("literal boxes are valid"))
    .collect()
}

fn geometry(table: &Result<SubcubeTable, String>, dim: usize) -> Check {
    let octants = octant_sequence(&search_cube::<f64>(3).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if octants != expected_octants() {
        return Err("octant sequence differs from the listed order".into());
    }
    let table = table.as_ref().map_err(|e| format!("subcube fixtures: {e}"))?;
    for fid in FunctionId::ALL {
        let row = table.get(fid).map_err(|e| e.to_string())?;
        if table.rows().iter().filter(|r| r.id == fid).count() != 1 {
            return Err(format!("{fid} appears more than once"));
        }
        let effective = row.effective_box::<f64>().map_err(|e| e.to_string())?;
        if !octants.contains(&effective) {
            return Err(format!("{fid} subcube is not one of the eight octants"));
        }
        row.region::<f64>(dim).map_err(|e| e.to_string())?;
    }
    let f1 = table.get(FunctionId::F1).map_err(|e| e.to_string())?.region::<f64>(30).map_err(|e| e.to_string())?;
    for i in 0..30 {
        let (lo, hi) = f1.interval(i);
        let (want_lo, want_hi) = if i % 3 == 1 { (-F1_SCALED_EDGE, 0.0) } else { (0.0, F1_SCALED_EDGE) };
        if lo.to_bits() != want_lo.to_bits() || hi.to_bits() != want_hi.to_bits() {
            return Err(format!("F1 scaled box dimension {}: [{lo:e}, {hi:e}], expected [{want_lo:e}, {want_hi:e}]", i + 1));
        }
    }
    Ok(format!("8 octants in order, {} fixtures, F1 (1/2)^80 box bit-exact", table.rows().len()))
}

fn coverage() -> Check {
    let got = exhaustive_iteration_estimate(2, 20, 100);
    if got.to_string() == "10486" {
        Ok("2^20 strings / 100 per iteration -> 10486".into())
    } else {
        Err(format!("estimate is {got}, expected 10486"))
    }
}

fn dominance(opts: &VerifyOptions, table: &SubcubeTable, records: &[ExperimentRecord]) -> Check {
    let mut checked = records.to_vec();
    for seed in [opts.seed.wrapping_add(1), 7, 2024] {
        let m = manifest(opts, seed, 3);
        for fid in FunctionId::ALL {
            checked.push(run_experiment(&m, table, fid).map_err(|e| e.to_string())?);
        }
    }
    for rec in &checked {
        let best = hctps_best(rec).map_err(|e| e.to_string())?;
        if best.value > rec.phases[0].stats.best {
            return Err(format!("{} seed {}: overall {:e} above global {:e}", rec.fid, rec.ga_config.seed, best.value, rec.phases[0].stats.best));
        }
    }
    Ok(format!("{} experiments, overall best <= global best in each", checked.len()))
}

fn orders(ga: f64, hctps: f64) -> f64 {
    if hctps == 0.0 {
        f64::INFINITY
    } else {
        (ga / hctps).log10()
    }
}

fn qualitative(records: &[ExperimentRecord]) -> Check {
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for rec in records {
        let row = rec.report().map_err(|e| e.to_string())?.comparison;
        let (ga, hctps) = (row.ga.best, row.hctps.best);
        if REQUIRED_GAP.contains(&rec.fid) {
            let gap = orders(ga, hctps);
            notes.push(if gap.is_infinite() { format!("{}:exact", rec.fid) } else { format!("{}:{gap:.1}", rec.fid) });
            if gap.is_nan() || gap < 3.0 {
                failures.push(format!("{} gap {gap:.2} orders (GA {ga:e}, HCTPS {hctps:e})", rec.fid));
            }
        } else if PARITY.contains(&rec.fid) && hctps > 10.0 * ga {
            failures.push(format!("{} HCTPS {hctps:e} more than 10x GA {ga:e}", rec.fid));
        }
    }
    let covered = REQUIRED_GAP.iter().chain(&PARITY).all(|f| records.iter().any(|r| r.fid == *f));
    if !covered {
        failures.push("schedule does not cover every required function".into());
    }
    if failures.is_empty() {
        Ok(format!("orders of magnitude {}", notes.join(" ")))
    } else {
        Err(failures.join("; "))
    }
}

fn random_points(b: &SearchBox<f64>, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..b.dim()).map(|i| {
            let (lo, hi) = b.interval(i);
            (lo + rng.gen::<f64>() * (hi - lo)).clamp(lo, hi)
        }).collect())
        .collect()
}

fn random_corners(b: &SearchBox<f64>, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..b.dim()).map(|i| if rng.gen::<bool>() { b.hi()[i] } else { b.lo()[i] }).collect())
        .collect()
}

fn exact_zero(opts: &VerifyOptions, table: &SubcubeTable, records: &[ExperimentRecord]) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut points = 0;
    for fid in [FunctionId::F11, FunctionId::F12] {
        let row = table.get(fid).map_err(|e| e.to_string())?;
        let mut probes: Vec<Vec<f64>> = row.region::<f64>(3).map_err(|e| e.to_string())?.corners().collect();
        let full = row.region::<f64>(opts.dim).map_err(|e| e.to_string())?;
        probes.push(full.lo().to_vec());
        probes.push(full.hi().to_vec());
        probes.extend(random_corners(&full, 1000, &mut rng));
        probes.extend(random_points(&full, 10_000, &mut rng));
        for x in &probes {
            let v = evaluate(fid, x).map_err(|e| e.to_string())?;
            if v != 0.0 {
                return Err(format!("{fid} gives {v:e} inside its scaled subcube"));
            }
        }
        points += probes.len();
        let rec = records.iter().find(|r| r.fid == fid).ok_or_else(|| format!("{fid} missing from schedule"))?;
        let s = rec.report().map_err(|e| e.to_string())?.comparison.hctps;
        if s.mean != 0.0 || s.st_dev != 0.0 || s.best != 0.0 || s.worst != 0.0 {
            return Err(format!("{fid} HCTPS stats mean {:e} st_dev {:e}", s.mean, s.st_dev));
        }
    }
    Ok(format!("{points} points evaluate to exactly 0; HCTPS mean = st_dev = 0 for F11 and F12"))
}

fn f1_bound(opts: &VerifyOptions, table: &SubcubeTable, records: &[ExperimentRecord]) -> Check {
    let region = table.get(FunctionId::F1).map_err(|e| e.to_string())?.region::<f64>(opts.dim).map_err(|e| e.to_string())?;
    // Bent Cigar grows with every |x_i|, so the corner farthest from the origin is the maximum.
    let worst: Vec<f64> = (0..region.dim())
        .map(|i| {
            let (lo, hi) = region.interval(i);
            if lo.abs() > hi.abs() { lo } else { hi }
        })
        .collect();
    let peak = bent_cigar(&worst);
    if peak > F1_BOUND {
        return Err(format!("worst corner gives {peak:e} > {F1_BOUND:e}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xf1);
    if let Some(x) = random_points(&region, 10_000, &mut rng).iter().find(|x| bent_cigar(x) > peak) {
        return Err(format!("interior point exceeds the corner value: {:e}", bent_cigar(x)));
    }
    let rec = records.iter().find(|r| r.fid == FunctionId::F1).ok_or("F1 missing from schedule")?;
    let best = hctps_best(rec).map_err(|e| e.to_string())?.value;
    if best > F1_BOUND {
        return Err(format!("HCTPS best {best:e} > {F1_BOUND:e}"));
    }
    Ok(format!("worst corner {peak:.4e}, HCTPS best {best:.4e}"))
}

/// Welford mean/variance and a sorted median, written independently of the library.
fn oracle_stats(values: &[f64]) -> [f64; 5] {
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (v - mean);
    }
    let n = values.len();
    let sd = if n > 1 { (m2 / (n - 1) as f64).sqrt() } else { 0.0 };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    [mean, sorted[0], sorted[n - 1], median, sd]
}

fn stats_match(s: &RunStats<f64>, values: &[f64]) -> bool {
    let want = oracle_stats(values);
    let got = [s.mean, s.best, s.worst, s.median, s.st_dev];
    s.n_runs == values.len() && got.iter().zip(want).all(|(&g, w)| close(g, w, 1e-12))
}

fn determinism(opts: &VerifyOptions, table: &SubcubeTable, records: &[ExperimentRecord]) -> Check {
    let m = manifest(opts, opts.seed, opts.runs);
    let mut replayed = 0;
    for rec in records.iter().filter(|r| matches!(r.fid, FunctionId::F1 | FunctionId::F4 | FunctionId::F12)) {
        let again = run_experiment(&m, table, rec.fid).map_err(|e| e.to_string())?;
        if persist::persist(&without_wall_time(rec)) != persist::persist(&without_wall_time(&again)) {
            return Err(format!("{} replay differs", rec.fid));
        }
        let reloaded = persist::load(&persist::persist(rec)).map_err(|e| e.to_string())?;
        if &reloaded != rec {
            return Err(format!("{} does not survive a save/load round trip", rec.fid));
        }
        replayed += 1;
    }
    let mut phases = 0;
    for rec in records {
        for (p, phase) in rec.phases.iter().enumerate() {
            if !stats_match(&phase.stats, &phase.best_values()) {
                return Err(format!("{} phase {p}: stored stats disagree with recomputation", rec.fid));
            }
            phases += 1;
        }
    }
    Ok(format!("{replayed} replays identical, {phases} stored phases match recomputed stats"))
}

fn manifest(opts: &VerifyOptions, seed: u64, runs: usize) -> RunManifest {
    RunManifest {
        function: FunctionSelection::All,
        dim: opts.dim,
        n_runs: runs,
        seed,
        budget_per_dim: opts.budget_per_dim,
        mode: Mode::HctpsFixture,
        octant: None,
        scale_exponent: None,
        out: PathBuf::new(),
    }
}

fn schedule(opts: &VerifyOptions, table: &SubcubeTable) -> Result<Vec<ExperimentRecord>, String> {
    let m = manifest(opts, opts.seed, opts.runs);
    FunctionId::ALL.iter().map(|&fid| run_experiment(&m, table, fid).map_err(|e| format!("{fid}: {e}"))).collect()
}

/// Runs the selected criteria in order.
pub fn verify(opts: &VerifyOptions) -> Vec<Criterion> {
    let wanted = |name: &str| opts.only.is_empty() || opts.only.iter().any(|o| o == name);
    let table = fixture_text(opts, "subcubes.json", BUILTIN_SUBCUBES)
        .and_then(|t| SubcubeTable::from_json(&t).map_err(|e| e.to_string()));
    let needs_schedule = CRITERIA[1..].iter().any(|c| wanted(c) && *c != "geometry-fixtures" && *c != "coverage-estimate");
    let schedule = match (&table, needs_schedule) {
        (Ok(t), true) => schedule(opts, t),
        (Err(e), true) => Err(format!("subcube fixtures: {e}")),
        (_, false) => Ok(Vec::new()),
    };
    let with = |f: &dyn Fn(&SubcubeTable, &[ExperimentRecord]) -> Check| -> Check {
        let t = table.as_ref().map_err(|e| format!("subcube fixtures: {e}"))?;
        let s = schedule.as_ref().map_err(|e| format!("schedule unavailable: {e}"))?;
        f(t, s)
    };

    let mut out = Vec::new();
    for name in CRITERIA.iter().copied().filter(|n| wanted(n)) {
        let started = Instant::now();
        let result = match name {
            "function-spot-checks" => spot_checks(opts),
            "protocol-budget" => protocol_budget(opts, &schedule),
            "geometry-fixtures" => geometry(&table, opts.dim),
            "coverage-estimate" => coverage(),
            "superset-dominance" => with(&|t, s| dominance(opts, t, s)),
            "qualitative-gap" => with(&|_, s| qualitative(s)),
            "exact-zero-f11-f12" => with(&|t, s| exact_zero(opts, t, s)),
            "f1-geometric-bound" => with(&|t, s| f1_bound(opts, t, s)),
            "determinism-and-stats" => with(&|t, s| determinism(opts, t, s)),
            _ => unreachable!(),
        };
        let (passed, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        out.push(Criterion { name, passed, detail, seconds: started.elapsed().as_secs_f64() });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_stats_small_samples() {
        assert_eq!(oracle_stats(&[3.0]), [3.0, 3.0, 3.0, 3.0, 0.0]);
        let s = oracle_stats(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(&s[..4], &[2.5, 1.0, 4.0, 2.5]);
        assert!((s[4] - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn edge_literal_is_exact() {
        assert_eq!(F1_SCALED_EDGE * 2f64.powi(80), 100.0);
    }

    #[test]
    fn gap_orders() {
        assert_eq!(orders(1e6, 1e2), 4.0);
        assert!(orders(1.0, 0.0).is_infinite());
    }
}
