use feqo::config::ExperimentParams;
use feqo::runner::{run, simulate};
use feqo::sweep::{cartesian, sweep, Axis, SweepOptions};

const SMALL: &str = "outputs = spectrum, populations, record, wigner

[wavepacket]
delta_k_over_q = 0.05

[grid]
domain_nm = 1024
n_points = 4096

[evolution]
t_total_ps = 1.0
n_steps = 2000
snapshot_every = 100

[analysis]
wigner_points = 64
";

fn small() -> ExperimentParams {
    ExperimentParams::parse(SMALL).unwrap()
}

#[test]
fn zero_field_leaves_the_spectrum_alone() {
    let p = small().with_override("laser.e0_v_per_m", "0").unwrap();
    let sim = simulate(&p).unwrap();
    let (a, b) = (&sim.initial_spectrum.density, &sim.final_spectrum.density);
    let peak = a.iter().cloned().fold(0.0, f64::max);
    let change = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(change < 1e-10 * peak, "{change}");
    assert!(sim.abort.is_none());
}

#[test]
fn populations_are_recorded_on_schedule() {
    let sim = simulate(&small()).unwrap();
    assert_eq!(sim.times.len(), sim.populations.len());
    assert_eq!(sim.times.len(), sim.reports.len());
    assert_eq!(sim.times.len(), 2000 / 100 + 1);
    assert!(sim.times.windows(2).all(|w| w[1] > w[0]));
    // Population flows from +q/2 into -q/2 under the Bragg coupling.
    let last = sim.reports.last().unwrap();
    assert!(last.p_minus_half() > 1e-3);
    assert!((last.p_plus_half() + last.p_minus_half() + last.leakage - 1.0).abs() < 1e-9);
}

#[test]
fn runs_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&small(), &dir.path().join("a")).unwrap();
    let b = run(&small(), &dir.path().join("b")).unwrap();
    assert!(!a.manifest.files.is_empty());
    for f in &a.manifest.files {
        let x = std::fs::read(dir.path().join("a").join(&f.name)).unwrap();
        let y = std::fs::read(dir.path().join("b").join(&f.name)).unwrap();
        assert!(x == y, "{} differs", f.name);
    }
    let names: Vec<_> = b.manifest.files.iter().map(|f| f.name.as_str()).collect();
    for n in ["spectrum.csv", "populations.csv"] {
        assert!(names.contains(&n), "{names:?}");
    }
}

#[test]
fn cartesian_order_is_row_major() {
    let axes = [Axis::parse("a=1,2").unwrap(), Axis::parse("b=x,y,z").unwrap()];
    let pts = cartesian(&axes);
    assert_eq!(pts.len(), 6);
    assert_eq!(pts[1], vec!["1".to_string(), "y".to_string()]);
    assert_eq!(pts[3], vec!["2".to_string(), "x".to_string()]);
    assert!(Axis::parse("nothing").is_err());
    assert!(Axis::parse("a=1,,2").is_err());
}

#[test]
fn worker_count_does_not_change_the_map() {
    let dir = tempfile::tempdir().unwrap();
    let axes = [Axis::parse("laser.e0_v_per_m=5e7,1e8,2e8").unwrap()];
    let one = SweepOptions::default();
    let many = SweepOptions { workers: 3, ..one };
    let a = sweep(&small(), &axes, &dir.path().join("one"), &one).unwrap();
    let b = sweep(&small(), &axes, &dir.path().join("many"), &many).unwrap();
    assert_eq!(a, b);
    let csv = |d: &str| std::fs::read_to_string(dir.path().join(d).join("regime_map.csv")).unwrap();
    assert_eq!(csv("one"), csv("many"));
    assert!(a.iter().all(|r| r.leakage.is_some() && r.status == "ok"), "{a:?}");
    assert!(dir.path().join("many/point_0002/manifest.json").exists());
}

#[test]
fn sweeps_validate_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let axes = [Axis::parse("laser.e0_v_per_m=1e8,2e8").unwrap(), Axis::parse("laser.theta_rad=0,1").unwrap()];
    let capped = SweepOptions { cap: 3, ..SweepOptions::default() };
    assert!(sweep(&small(), &axes, dir.path(), &capped).is_err());
    let bad = [Axis::parse("laser.e0_v_per_m=1e8,-1").unwrap()];
    assert!(sweep(&small(), &bad, &dir.path().join("bad"), &SweepOptions::default()).is_err());
    assert!(!dir.path().join("bad/point_0000").exists());

    let classify = SweepOptions { classify_only: true, ..SweepOptions::default() };
    let rows = sweep(&small(), &axes, &dir.path().join("c"), &classify).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.leakage.is_none() && r.status == "classified"));
}
