use mhdv_cli::config::parse_config;
use mhdv_core::stepper::DtSpec;

const MINIMAL: &str = "n = 16\nalpha = 0.1\nmu = 0.01\nt_end = 1.0\nic = taylor_green\n";

#[test]
fn minimal_config_fills_defaults() {
    let cfg = parse_config(MINIMAL).unwrap();
    assert_eq!(cfg.params.n, 16);
    assert_eq!(cfg.params.nu, 0.0);
    assert_eq!(cfg.params.dt, DtSpec::Auto);
    assert_eq!(cfg.params.cfl_safety, 0.5);
    assert!(cfg.params.integrating_factor);
    assert_eq!(cfg.diag_interval, 1);
    assert_eq!(cfg.snapshot_interval, None);
    assert_eq!(cfg.output_dir.to_str().unwrap(), "out");
    assert_eq!(cfg.params.seed, 0);
}

#[test]
fn comments_and_blanks_are_ignored() {
    let text = format!("# a run\n\n{MINIMAL}\nseed = 7   # fixed\n");
    let cfg = parse_config(&text).unwrap();
    assert_eq!(cfg.params.seed, 7);
}

#[test]
fn negative_alpha_rejected() {
    let text = MINIMAL.replace("alpha = 0.1", "alpha = -1");
    let err = parse_config(&text).unwrap_err().to_string();
    assert!(err.contains("alpha must be >= 0"), "got: {err}");
}

#[test]
fn duplicate_key_reports_both_lines() {
    let text = format!("{MINIMAL}alpha = 0.2\n");
    let err = parse_config(&text).unwrap_err().to_string();
    assert!(err.contains("duplicate key 'alpha'"), "got: {err}");
    assert!(err.contains("lines 2 and 6"), "got: {err}");
}

#[test]
fn unknown_key_names_the_line() {
    let text = format!("{MINIMAL}bogus = 3\n");
    let err = parse_config(&text).unwrap_err().to_string();
    assert!(err.contains("line 6"), "got: {err}");
    assert!(err.contains("unknown key 'bogus'"), "got: {err}");
}

#[test]
fn missing_required_key() {
    let err = parse_config("n = 16\nalpha = 0.1\n").unwrap_err().to_string();
    assert!(err.contains("missing required key"), "got: {err}");
}

#[test]
fn zero_interval_rejected() {
    let text = format!("{MINIMAL}diag_interval = 0\n");
    let err = parse_config(&text).unwrap_err().to_string();
    assert!(err.contains("intervals must be >= 1"), "got: {err}");
}

#[test]
fn reference_mhd_needs_resistivity_or_horizon() {
    let text = MINIMAL.replace("alpha = 0.1", "alpha = 0").replace("mu = 0.01", "mu = 0");
    assert!(parse_config(&text).is_err());
    let ok = format!("{}smoothness_horizon = 2.0\n", text);
    assert!(parse_config(&ok).is_ok());
}

#[test]
fn composite_ic_and_dt() {
    let text = "n = 32\nalpha = 0.1\nmu = 0.02\nt_end = 0.5\n\
                ic = taylor_green+single_mode_b\nic_amp_b = 0.5\ndt = 1e-3\n";
    let cfg = parse_config(text).unwrap();
    assert_eq!(cfg.params.dt, DtSpec::Fixed(1e-3));
    assert_eq!(cfg.params.ic.kinds.len(), 2);
    assert_eq!(cfg.params.ic.amp_b, 0.5);
}

#[test]
fn canonical_dump_roundtrips() {
    let text = "n = 32\nalpha = 0.125\nmu = 0.0225\nnu = 0.001\nt_end = 0.75\n\
                ic = random_divfree\nic_k0 = 4.5\nseed = 11\ndt = 0.002\n\
                cfl_safety = 0.25\ndiag_interval = 5\nsnapshot_interval = 50\n\
                checkpoint_interval = 25\nhs_monitor_set = 1.5,4\n\
                output_dir = results/run1\nintegrating_factor = false\n";
    let cfg = parse_config(text).unwrap();
    let dumped = cfg.dump();
    let reparsed = parse_config(&dumped).unwrap();
    assert_eq!(cfg, reparsed);
    // a second dump is stable
    assert_eq!(dumped, reparsed.dump());
}
