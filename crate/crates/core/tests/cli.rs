use dtwave::io::{read_csv, write_pgm};
use dtwave::signal::relative_error;
use dtwave::Image;
use std::path::Path;
use std::process::{Command, Output};

fn dtwave(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtwave"))
        .args(args)
        .current_dir(cwd)
        .env_remove("DTCWT_FIXTURES")
        .output()
        .unwrap()
}

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}.flt", env!("CARGO_MANIFEST_DIR"))
}

fn test_image() -> Image {
    Image::from_fn(32, 32, |i, j| ((i * 13 + j * 7) % 251) as f64)
}

#[test]
fn transform_inverse_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let x = test_image();
    write_pgm(&x, dir.path().join("x.pgm")).unwrap();
    for (kind, filter) in [("dwt", fixture("haar")), ("complex", fixture("kingsbury_qshift_b")), ("real", fixture("kingsbury_qshift_b"))] {
        let o = dtwave(&["transform", "--filter", &filter, "--levels", "3", "--kind", kind, "--in", "x.pgm", "--out", "p.csv"], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(dir.path().join("p.csv").exists());
        let o = dtwave(&["inverse", "--filter", &filter, "--in", "p.csv", "--out", "y.csv"], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let y = read_csv(dir.path().join("y.csv")).unwrap();
        assert!(relative_error(y.data(), x.data()) < 1e-9, "{kind}");
    }
}

#[test]
fn alias_diagnostic_prefers_dual_tree() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtwave(
        &["diagnose", "alias", "--variant", "complex", "--filter", &fixture("learned_complex_h"), "--out", "alias"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let get = |k: &str| -> f64 {
        text.lines().find_map(|l| l.strip_prefix(&format!("{k},"))).unwrap().parse().unwrap()
    };
    assert!(get("energy_dtcwt") < get("energy_dwt"));
    assert!(dir.path().join("alias/alias_report.csv").exists());
    assert!(dir.path().join("alias/alias_signals.csv").exists());
}

#[test]
fn other_diagnostics_and_impulse() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["diagnose", "shift", "--filter", "learned_complex_h", "--out", "d"],
        vec!["diagnose", "band-recon", "--filter", "learned_complex_h", "--size", "64", "--level", "3", "--out", "d"],
        vec!["impulse", "--filter", "learned_complex_h", "--scale", "2", "--out", "imp"],
    ] {
        let o = dtwave(&args, dir.path());
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8(o.stdout).unwrap().starts_with("metric,value\nstatus,ok\n"));
    }
    assert!(dir.path().join("imp/band6_magnitude.csv").exists());
    assert!(dir.path().join("d/band_triangle_dtcwt.csv").exists());
    assert!(dir.path().join("d/shift_coefficients.csv").exists());
}

#[test]
fn compare_filters_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtwave(&["compare-filters", "learned_complex_h", &fixture("learned_complex_h")], dir.path());
    assert!(o.status.success());
    let d: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    assert_eq!(d, 0.0);
}

#[test]
fn usage_and_validation_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtwave(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(dtwave(&["--version"], dir.path()).status.code(), Some(0));
    let o = dtwave(&["transform", "--filter", "haar", "--in", "missing.pgm", "--out", "p.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    write_pgm(&Image::zeros(24, 24), dir.path().join("odd.pgm")).unwrap();
    let o = dtwave(&["transform", "--filter", "haar", "--levels", "4", "--in", "odd.pgm", "--out", "p.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(dir.path().join("bad.txt"), "steps = lots\n").unwrap();
    let o = dtwave(&["train", "--config", "bad.txt", "--out", "run"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn train_and_gen_data() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.txt"),
        "variant = real\nsteps = 3\nbatch_size = 2\nimages = 4\nimage_size = 16\nlevels = 2\nimpulse_scale = 2\nk = 4\nk_first = 4\n",
    )
    .unwrap();
    let o = dtwave(&["train", "--config", "cfg.txt", "--out", "run", "--quiet"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.txt", "history.csv", "checkpoint_h.flt", "checkpoint_hfirst.flt", "checkpoint.meta", "learned_h.flt"] {
        assert!(dir.path().join("run").join(f).exists(), "{f}");
    }
    let h = std::fs::read_to_string(dir.path().join("run/history.csv")).unwrap();
    assert_eq!(h.lines().count(), 4);
    let o = dtwave(&["gen-data", "--config", "cfg.txt", "--count", "3", "--out", "data"], dir.path());
    assert!(o.status.success());
    let x = read_csv(dir.path().join("data/image_0002.csv")).unwrap();
    assert_eq!(x.shape(), (16, 16));
}
