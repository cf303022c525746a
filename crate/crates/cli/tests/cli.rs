use std::path::Path;
use std::process::{Command, Output};

fn feqo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feqo")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.cfg", "");
    let out = feqo(&["validate", &good]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("grating period = 3.955632 nm"), "{text}");
    assert!(text.contains("regime: Bragg"), "{text}");

    let bad = write(dir.path(), "bad.cfg", "[grid]\nn_points = -4\n");
    let out = feqo(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("grid.n_points"));

    let syntax = write(dir.path(), "syntax.cfg", "[grid\n");
    assert_eq!(feqo(&["validate", &syntax]).status.code(), Some(4));
    assert_eq!(feqo(&["validate", "/nonexistent/x.cfg"]).status.code(), Some(3));
}

#[test]
fn emitted_presets_validate() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["fig2a", "fig3", "s4"] {
        let out = feqo(&["preset", name, "--emit-config"]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let path = write(dir.path(), &format!("{name}.cfg"), &String::from_utf8(out.stdout).unwrap());
        assert_eq!(feqo(&["validate", &path]).status.code(), Some(0), "{name}");
    }
    assert_eq!(feqo(&["preset", "fig9", "--emit-config"]).status.code(), Some(1));
}

#[test]
fn render_writes_a_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let g = feqo::io::GridFile::new(2, 3, [0.0, 1.0, 0.0, 1.0], vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    let grid = dir.path().join("g.bin");
    g.write(&grid).unwrap();
    let ppm = dir.path().join("g.ppm");
    let out = feqo(&["render", grid.to_str().unwrap(), "--log", "-o", ppm.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read(&ppm).unwrap().starts_with(b"P6\n3 2\n255\n"));
    let out = feqo(&["render", grid.to_str().unwrap(), "--colormap", "rainbow", "-o", ppm.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn classify_only_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "base.cfg", "");
    let out_dir = dir.path().join("map");
    let out = feqo(&[
        "sweep",
        &cfg,
        "--axis",
        "laser.e0_v_per_m=1e8,1e9",
        "--classify-only",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("regime_map.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("index,laser.e0_v_per_m,klein_cook_q"));
    let over = feqo(&["sweep", &cfg, "--axis", "laser.theta_rad=0,1,2", "--cap", "2", "--classify-only"]);
    assert_eq!(over.status.code(), Some(1));
}
