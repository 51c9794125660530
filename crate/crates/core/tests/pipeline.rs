use std::f64::consts::PI;

use peres_core::analysis::analyze_log;
use peres_core::budget::{full_budget, BudgetInputs, BudgetModel};
use peres_core::forward::{
    simulate_measurement, CrosstalkConvention, CrosstalkSpec, ImperfectionSpec, MeasurementLog,
    MeasurementRecord, Protocol, ShutterConfig, SourceSpec,
};
use peres_core::mc::{standard_normal, substream};
use peres_core::reconstruct::correct_phase_point;
use peres_core::reference::{HOUSING_23C, POWER_STABILITY_REL, TRANSMISSIONS};
use peres_core::stats::decompose_fluctuations;
use peres_core::PhasePoint;

fn p23() -> PhasePoint {
    correct_phase_point(HOUSING_23C.reconstructed_terms).unwrap().point
}

fn source() -> SourceSpec {
    SourceSpec::new(1e-6, TRANSMISSIONS)
}

/// Log in which every path carries its own input-power scale in every
/// setting, so two-path scatter is fully explained by single-path scatter.
fn independent_path_log(phases: &PhasePoint, sigma: f64, n: usize) -> MeasurementLog {
    let src = source();
    let t = src.transmissions();
    let cos = phases.cosines();
    // cosine of the phase between paths (i, j)
    let pair_cos = |i: usize, j: usize| match (i.min(j), i.max(j)) {
        (1, 2) => cos.alpha,
        (0, 2) => cos.beta,
        _ => cos.gamma,
    };
    let mut records = Vec::new();
    for cycle in 0..n {
        let mut rng = substream(5, cycle as u64);
        for config in ShutterConfig::ALL {
            let p: Vec<f64> = (0..3)
                .map(|i| src.p_in * t[i] * (1.0 + sigma * standard_normal(&mut rng)))
                .collect();
            let open: Vec<usize> = (0..3).filter(|&i| config.open()[i]).collect();
            let mut power: f64 = open.iter().map(|&i| p[i]).sum();
            for (a, &i) in open.iter().enumerate() {
                for &j in &open[a + 1..] {
                    power += 2.0 * (p[i] * p[j]).sqrt() * pair_cos(i, j);
                }
            }
            records.push(MeasurementRecord {
                cycle_index: cycle,
                config,
                mean_power: power,
                std_power: 0.0,
                n_samples: 1,
                housing_temp: 23.0,
                input_power: src.p_in,
                timestamp: cycle as f64,
            });
        }
    }
    MeasurementLog::new(records)
}

#[test]
fn power_only_scatter_leaves_no_phase_noise() {
    let p = p23();
    let est = decompose_fluctuations(&independent_path_log(&p, 0.01, 4000), &p).unwrap();
    for q in 0..3 {
        let rel = est.sigma_pair_power[q] / est.sigma_pair_measured[q];
        assert!((rel - 1.0).abs() < 0.05, "pair {q}: {rel}");
        // what remains is the sampling scatter of a variance difference
        let rest = est.sigma_pair_phase[q] / est.sigma_pair_measured[q];
        assert!(rest < 0.3, "pair {q}: {rest}");
    }
}

#[test]
fn simulated_point_is_reconstructed() {
    let spec = ImperfectionSpec {
        crosstalk: CrosstalkSpec::new(1e-3, CrosstalkConvention::ComovingPlus),
        ..Default::default()
    };
    let log = simulate_measurement(&source(), &p23(), &spec, &Protocol::new(30, 5), 4).unwrap();
    let analysis = analyze_log(&log).unwrap();
    assert!((analysis.mean_f - 1.0).abs() > 1e-6);
    let c = correct_phase_point(analysis.mean_terms).unwrap();
    assert_eq!(c.plane_index, 0);
    assert!(c.point.distance(&p23()) < 5e-3, "{:?}", c.point);
}

#[test]
fn residual_light_dominates_budget_at_23c() {
    let mut spec = ImperfectionSpec::residual_only(HOUSING_23C.tau.value, PI);
    spec.crosstalk = CrosstalkSpec::new(HOUSING_23C.crosstalk_dphi_dh, CrosstalkConvention::ComovingPlus);
    spec.fluctuations.sigma_pin_rel = POWER_STABILITY_REL;
    spec.fluctuations.sigma_phase = 0.01;
    spec.fluctuations.sigma_phase_fast = 0.002;
    let log = simulate_measurement(&source(), &p23(), &spec, &Protocol::new(40, 5), 6).unwrap();
    let corrected = correct_phase_point(HOUSING_23C.reconstructed_terms).unwrap();
    let mut inputs = BudgetInputs::new(source(), spec, 6);
    inputs.mc_samples = 20_000;
    inputs.reference = Some(HOUSING_23C);
    let report = full_budget(&log, &inputs, &corrected).unwrap();

    let residual = report.entry(BudgetModel::ResidualLight).unwrap();
    let width = residual.upper.abs().min(residual.lower.abs());
    for e in &report.entries {
        if e.model == BudgetModel::ResidualLight {
            continue;
        }
        let size = e.lower.abs().max(e.upper.abs());
        // crosstalk reaches a quarter of the residual-light bounds
        let factor = if e.model == BudgetModel::Crosstalk { 3.0 } else { 10.0 };
        assert!(factor * size < width, "{:?}: {size:e} vs {width:e}", e.model);
    }
    let sum_lo: f64 = report.entries.iter().map(|e| e.lower).sum();
    assert_eq!(sum_lo, report.total_lower);
    assert!(report.measured.sem > 0.0 && report.measured.n_cycles == 40);
    assert_eq!(report.reference.unwrap().measured_delta_f.value, -4.47e-2);
}

#[test]
fn simulation_is_seed_deterministic() {
    let mut spec = ImperfectionSpec::residual_only(2.2e-4, 1.0);
    spec.fluctuations.sigma_pin_rel = 0.003;
    spec.fluctuations.sigma_sample_rel = 0.001;
    let run = |seed| simulate_measurement(&source(), &p23(), &spec, &Protocol::new(5, 4), seed).unwrap();
    assert_eq!(run(3), run(3));
    assert_ne!(run(3), run(4));
}
