use mhdv_cli::snapshot::{load_snapshot, save_snapshot};
use mhdv_core::ic;
use mhdv_core::stepper::SimState;
use mhdv_core::WavenumberGrid;
use std::fs;

fn sample_state(n: usize) -> SimState {
    let grid = WavenumberGrid::new(n).unwrap();
    let (u, _) = ic::random_divfree(&grid, 3, 2.0, 1.0).unwrap();
    let (_, b) = ic::single_mode_b(&grid, [1, 0, 0], [0.0, 0.5, 0.0]).unwrap();
    let mut st = SimState::new(u, b);
    st.t = 0.375;
    st.step_index = 42;
    st
}

#[test]
fn roundtrip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.snap");
    let state = sample_state(8);
    save_snapshot(&state, 0.1, 0.01, 0.0, &path).unwrap();
    let snap = load_snapshot(&path).unwrap();
    assert_eq!(snap.n, 8);
    assert_eq!(snap.alpha, 0.1);
    assert_eq!(snap.t, 0.375);
    assert_eq!(snap.step, 42);
    assert_eq!(snap.u, state.u);
    assert_eq!(snap.b, state.b);

    // saving the loaded state reproduces the file bytes
    let path2 = dir.path().join("b.snap");
    save_snapshot(&snap.state(), snap.alpha, snap.mu, snap.nu, &path2).unwrap();
    assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
}

#[test]
fn payload_length_matches_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.snap");
    let state = sample_state(8);
    save_snapshot(&state, 0.1, 0.01, 0.0, &path).unwrap();
    let bytes = fs::read(&path).unwrap();
    let header = 4 + 4 + 4 + 8 + 8 + 8 + 8 + 8 + 1;
    assert_eq!(bytes.len(), header + 2 * 3 * 8usize.pow(3) * 16);
}

#[test]
fn corrupted_magic_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.snap");
    let state = sample_state(8);
    save_snapshot(&state, 0.1, 0.01, 0.0, &path).unwrap();
    let mut bytes = fs::read(&path).unwrap();
    bytes[0] = b'X';
    fs::write(&path, &bytes).unwrap();
    let err = load_snapshot(&path).unwrap_err().to_string();
    assert!(err.contains("bad magic"), "got: {err}");
    assert!(err.contains("bad.snap"), "got: {err}");
}

#[test]
fn version_mismatch_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v9.snap");
    let state = sample_state(8);
    save_snapshot(&state, 0.1, 0.01, 0.0, &path).unwrap();
    let mut bytes = fs::read(&path).unwrap();
    bytes[4] = 9;
    fs::write(&path, &bytes).unwrap();
    let err = load_snapshot(&path).unwrap_err().to_string();
    assert!(err.contains("format version"), "got: {err}");
}

#[test]
fn truncated_payload_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.snap");
    let state = sample_state(8);
    save_snapshot(&state, 0.1, 0.01, 0.0, &path).unwrap();
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 17]).unwrap();
    let err = load_snapshot(&path).unwrap_err().to_string();
    assert!(err.contains("truncated"), "got: {err}");
}

#[test]
fn nan_payload_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nan.snap");
    let state = sample_state(8);
    save_snapshot(&state, 0.1, 0.01, 0.0, &path).unwrap();
    let mut bytes = fs::read(&path).unwrap();
    let header = 53;
    bytes[header..header + 8].copy_from_slice(&f64::NAN.to_le_bytes());
    fs::write(&path, &bytes).unwrap();
    let err = load_snapshot(&path).unwrap_err().to_string();
    assert!(err.contains("NaN"), "got: {err}");
}
