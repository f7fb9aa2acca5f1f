//! Runs the global phase plus the tabled fixture subcube for every function and
//! prints the best value of each.

use hctps_core::{ExperimentRecord, FunctionId, GaConfig, LocalTarget, SubcubeTable};

fn main() {
    let runs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let table = SubcubeTable::builtin();
    for fid in FunctionId::ALL {
        let row = table.get(fid).unwrap();
        let spec = row.spec(30).unwrap().expect("fixture is an octant");
        let mut rec = ExperimentRecord::new(fid.to_string(), fid, 30, GaConfig::default().with_seed(42), 50).unwrap();
        rec.run_global(runs).unwrap();
        rec.run_local(
            &LocalTarget::Octant { octant_index: spec.octant_index, scale_exponent: spec.scale_exponent },
            runs,
        )
        .unwrap();
        let report = rec.report().unwrap();
        println!(
            "{fid:>4} {:<34} GA best {:>12.5e}  HCTPS best {:>12.5e}  mean {:>12.5e}",
            fid.name(),
            report.comparison.ga.best,
            report.comparison.hctps.best,
            report.comparison.hctps.mean
        );
    }
}
