use peres_bench::parallel::{phase_fluctuations, power_fluctuations, run_parallel};
use peres_core::budget::{mc_phase_fluctuations, mc_power_fluctuations, PowerFluctuationModel};
use peres_core::forward::SourceSpec;
use peres_core::mc;
use peres_core::PhasePoint;

fn setup() -> (PhasePoint, SourceSpec) {
    (
        PhasePoint::new(2.50861677, -0.27844392, -2.23017285),
        SourceSpec::new(1e-6, [0.26, 0.52, 0.22]),
    )
}

#[test]
fn parallel_equals_serial_for_any_thread_count() {
    let (p, s) = setup();
    // not a multiple of the chunk size
    let n = 5 * 1024 + 17;
    let power = mc_power_fluctuations(&p, &s, 3.2e-3, n, 9).unwrap();
    let phase = mc_phase_fluctuations(&p, &s, 1e-2, n, 10).unwrap();
    let model = PowerFluctuationModel::new(&p, &s, 3.2e-3, 9).unwrap();
    let summary = mc::run(&model, n);
    for threads in [1, 2, 4] {
        assert_eq!(power_fluctuations(&p, &s, 3.2e-3, n, 9, threads).unwrap(), power);
        assert_eq!(phase_fluctuations(&p, &s, 1e-2, n, 10, threads).unwrap(), phase);
        assert_eq!(run_parallel(&model, n, threads).unwrap(), summary);
    }
}

#[test]
fn too_few_samples_is_an_error() {
    let (p, s) = setup();
    assert!(power_fluctuations(&p, &s, 1e-3, 1, 0, 2).is_err());
}
