use std::path::Path;
use std::process::{Command, Output};

use kppfront::profile_io::ProfileFile;
use kppfront::report::Report;
use kppfront::spectral::{ModelParams, SpectralRoots};

fn kppfront(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kppfront")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn report(o: &Output) -> Report {
    Report::parse(&stdout(o)).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn roots_match_library_bits() {
    let o = kppfront(&["roots", "--b", "0.2", "--tau", "0.2", "--c", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    let lib = SpectralRoots::compute(&ModelParams::new(0.2, 0.2, 3.0).unwrap()).unwrap();
    for (key, v) in [("lambda1", lib.lambda1), ("lambda2", lib.lambda2), ("mu1", lib.mu1), ("mu2", lib.mu2)] {
        assert_eq!(r.get_f64(key).unwrap().to_bits(), v.unwrap().to_bits(), "{key}");
    }
    assert_eq!(r.get("in_domain"), Some("true"));
}

#[test]
fn roots_flag_the_classical_critical_speed() {
    let r = report(&kppfront(&["roots", "--b", "0", "--tau", "0.3", "--c", "2"]));
    assert_eq!(r.get("critical_chi0"), Some("true"));
    assert_eq!(r.get("noncritical"), Some("false"));
}

#[test]
fn neutral_coefficient_bounds() {
    assert_eq!(kppfront(&["roots", "--b", "1", "--tau", "0.2", "--c", "3"]).status.code(), Some(2));
    assert_eq!(kppfront(&["roots", "--b", "0.9999", "--tau", "0.2", "--c", "300"]).status.code(), Some(0));
}

#[test]
fn curves_classical_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(kppfront(&["curves", "--b", "0", "--tau-min", "0.1", "--tau-max", "2", "--samples", "9", "--out", p(&a)])
        .status
        .success());
    let text = std::fs::read_to_string(&a).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.split(',').nth(1).unwrap().parse::<f64>().unwrap() == 2.0));

    let args = ["curves", "--b", "0.3", "--tau-min", "0.05", "--tau-max", "3", "--samples", "25", "--out"];
    let mut with_a = args.to_vec();
    with_a.push(p(&a));
    let mut with_b = args.to_vec();
    with_b.push(p(&b));
    assert!(kppfront(&with_a).status.success());
    assert!(kppfront(&with_b).status.success());
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());

    let text = String::from_utf8(bytes).unwrap();
    let col = |i: usize| -> Vec<f64> {
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .filter_map(|l| l.split(',').nth(i).and_then(|s| s.parse().ok()))
            .collect()
    };
    let cs = col(1);
    assert_eq!(cs.len(), 25);
    assert!(cs.windows(2).all(|w| w[1] < w[0]));
    let ch = col(3);
    assert!(ch.len() >= 2 && ch.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn solve_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("front");
    let o = kppfront(&["solve", "--b", "0.2", "--tau", "0.2", "--c", "3", "--out", p(&prefix)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&o).get("converged"), Some("true"));
    let u = dir.path().join("front_u.csv");
    let w = dir.path().join("front_w.csv");
    assert!(dir.path().join("front_report.txt").exists());

    for f in [&u, &w] {
        let v = kppfront(&["validate", p(f), "--b", "0.2", "--tau", "0.2", "--c", "3"]);
        assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    }

    // a dent in the middle breaks monotonicity and the residuals
    let mut file = ProfileFile::read(&u).unwrap();
    let mid = file.profile.values.len() / 2;
    file.profile.values[mid] -= 0.05;
    let bad = dir.path().join("bad_u.csv");
    file.write(&bad).unwrap();
    assert_eq!(kppfront(&["validate", p(&bad)]).status.code(), Some(1));

    assert_eq!(kppfront(&["validate", p(&u), "--c", "3.1"]).status.code(), Some(2));

    let pos = dir.path().join("pos.csv");
    let e = kppfront(&["evolve", p(&u), "--horizon", "6", "--out", p(&pos)]);
    assert_eq!(e.status.code(), Some(0), "{}", String::from_utf8_lossy(&e.stderr));
    let xs: Vec<f64> = std::fs::read_to_string(&pos)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    // the profile rises to the right, so the level crossing travels left
    assert!(xs.len() > 10 && xs.windows(2).all(|w| w[1] <= w[0]));

    assert_eq!(kppfront(&["evolve", p(&u), "--dt", "0.01"]).status.code(), Some(2));
    assert_eq!(kppfront(&["evolve", p(&u), "--horizon", "1"]).status.code(), Some(2));
}

#[test]
fn solve_outside_domain_is_invalid_input() {
    let o = kppfront(&["solve", "--b", "0", "--tau", "0.3", "--c", "1.9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_profile_is_invalid_input() {
    assert_eq!(kppfront(&["validate", "/nonexistent/profile.csv"]).status.code(), Some(2));
}
