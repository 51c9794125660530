use peres_bench::log_csv::{read_log_from, write_log_to};
use peres_bench::{BenchError, RunConfig};
use peres_core::forward::{simulate_measurement, LogMetadata, SourceSpec};
use peres_core::PhasePoint;

fn config() -> RunConfig {
    let mut cfg = RunConfig::new(
        SourceSpec::new(1e-6, [0.26, 0.52, 0.22]),
        PhasePoint::new(2.50861677, -0.27844392, -2.23017285),
    );
    cfg.residual.tau = 2.2e-4;
    cfg.residual.phi_sh = 1.3;
    cfg.fluctuations.sigma_pin_rel = 3e-3;
    cfg.fluctuations.sigma_sample_rel = 1e-3;
    cfg.protocol.n_cycles = 6;
    cfg.protocol.samples_per_setting = 4;
    cfg.seed = 11;
    cfg
}

fn text(cfg: &RunConfig) -> String {
    let mut log =
        simulate_measurement(&cfg.source_spec(), &cfg.phases, &cfg.imperfections(), &cfg.protocol, cfg.seed).unwrap();
    log.metadata = LogMetadata {
        seed: Some(cfg.seed),
        snapshot: Some(cfg.snapshot()),
    };
    let mut buf = Vec::new();
    write_log_to(&log, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn round_trip_is_lossless() {
    let cfg = config();
    let log =
        simulate_measurement(&cfg.source_spec(), &cfg.phases, &cfg.imperfections(), &cfg.protocol, cfg.seed).unwrap();
    let back = read_log_from(&text(&cfg)).unwrap();
    assert_eq!(back.records, log.records);
    assert_eq!(back.metadata.seed, Some(11));
    assert_eq!(back.metadata.snapshot, Some(cfg.snapshot()));
    let mut again = Vec::new();
    write_log_to(&back, &mut again).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), text(&cfg));
}

#[test]
fn duplicate_record_names_both_lines() {
    let t = text(&config());
    let lines: Vec<&str> = t.lines().collect();
    let (idx, dup) = lines.iter().enumerate().find(|(_, l)| l.starts_with("3,AB,")).unwrap();
    let mut out = t.clone();
    out.push_str(dup);
    out.push('\n');
    let err = read_log_from(&out).unwrap_err();
    let line = lines.len() as u64 + 1;
    match &err {
        BenchError::Log { line: l, message } => {
            assert_eq!(*l, line);
            assert!(message.contains("cycle 3"), "{message}");
            assert!(message.contains(&format!("line {}", idx + 1)), "{message}");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn empty_input_is_rejected() {
    assert!(matches!(read_log_from(""), Err(BenchError::EmptyLog)));
    let header_only = "cycle,config,mean_power_w,std_power_w,n_samples,housing_temp_c,input_power_w,timestamp_s\n";
    assert!(matches!(read_log_from(header_only), Err(BenchError::EmptyLog)));
}

#[test]
fn missing_column_is_named() {
    let t = "cycle,config,mean_power_w,std_power_w,n_samples,housing_temp_c,timestamp_s\n0,A,1,0,1,23,0\n";
    let err = read_log_from(t).unwrap_err().to_string();
    assert!(err.starts_with("line 1:"), "{err}");
    assert!(err.contains("input_power_w"), "{err}");
}

#[test]
fn bad_values_name_line_and_column() {
    let mut t = text(&config());
    t.push_str("9,ABC,nan,0,1,23,1e-6,0\n");
    let err = read_log_from(&t).unwrap_err().to_string();
    assert!(err.contains("mean_power_w") && err.contains("not finite"), "{err}");
    let mut t = text(&config());
    t.push_str("9,ABD,1,0,1,23,1e-6,0\n");
    let err = read_log_from(&t).unwrap_err().to_string();
    assert!(err.contains("\"ABD\""), "{err}");
}
