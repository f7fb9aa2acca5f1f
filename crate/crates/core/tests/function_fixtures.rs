//! Probe values produced by the independent reference oracle in
//! `fixtures/oracle_functions.py`.

use hctps_core::{evaluate, FunctionId};
use serde::Deserialize;

#[derive(Deserialize)]
struct Probe {
    x: Vec<f64>,
    expected_f: f64,
    optimum: bool,
}

#[derive(Deserialize)]
struct Entry {
    id: FunctionId,
    name: String,
    dim: usize,
    probe_points: Vec<Probe>,
}

fn entries() -> Vec<Entry> {
    serde_json::from_str(include_str!("../fixtures/functions.json")).unwrap()
}

#[test]
fn every_function_at_every_probe_dimension() {
    let entries = entries();
    for fid in FunctionId::ALL {
        let dims: Vec<usize> = entries.iter().filter(|e| e.id == fid).map(|e| e.dim).collect();
        assert_eq!(dims, vec![2, 3, 30], "{fid}");
    }
}

#[test]
fn names_match_catalog() {
    for e in entries() {
        assert_eq!(e.name, e.id.name());
    }
}

#[test]
fn optimum_values_within_1e9() {
    for e in entries() {
        for p in e.probe_points.iter().filter(|p| p.optimum) {
            assert_eq!(p.x, e.id.optimum_point::<f64>(e.dim));
            let got = evaluate(e.id, &p.x).unwrap();
            assert!((got - p.expected_f).abs() <= 1e-9, "{} dim {}: {got} vs {}", e.id, e.dim, p.expected_f);
        }
    }
}

#[test]
fn random_probes_match_relative_1e9() {
    for e in entries() {
        for p in e.probe_points.iter().filter(|p| !p.optimum) {
            let got = evaluate(e.id, &p.x).unwrap();
            let scale = p.expected_f.abs().max(1.0);
            assert!(
                (got - p.expected_f).abs() <= 1e-9 * scale,
                "{} dim {}: {got} vs {}",
                e.id,
                e.dim,
                p.expected_f
            );
        }
    }
}

#[test]
fn happy_cat_minimum_at_minus_ones() {
    // |30 - 30|^(1/4) + (15 - 30)/30 + 1/2 = 0
    assert_eq!(evaluate(FunctionId::F6, &[-1.0; 30]).unwrap(), 0.0);
}

#[test]
fn evaluation_is_pure() {
    for e in entries() {
        for p in &e.probe_points {
            let a = evaluate(e.id, &p.x).unwrap();
            let b = evaluate(e.id, &p.x).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
