use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cosetcov"))
        .args(args)
        .args(["--quiet", "--out"])
        .arg(dir)
        .output()
        .expect("spawn cosetcov")
}

fn csv(dir: &Path, name: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(dir.join(name)).expect("artifact");
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn exact_cover_of_z2_with_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        tmp.path(),
        &[
            "cover", "--group", "Z^2", "--roster", "lines2", "--r", "3", "--exact",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let rows = csv(tmp.path(), "cover.csv");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][3], "ExactOptimal");
    assert_eq!(rows[0][4], "6");
    assert!(tmp.path().join("cover.json").exists());
}

#[test]
fn bounds_rows_are_consistent() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        tmp.path(),
        &["bounds", "--group", "Z^2", "--r", "1..16", "--seed", "7"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv(tmp.path(), "bounds.csv");
    assert_eq!(rows.len(), 16);
    for row in rows {
        let lower: f64 = row[6].parse().unwrap();
        let upper: f64 = row[9].parse().unwrap();
        assert!(lower <= upper);
        assert_eq!(row[10], "true");
    }
}

#[test]
fn ball_of_radius_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        run(tmp.path(), &["ball", "--group", "free:2", "--r", "0"])
            .status
            .code(),
        Some(0)
    );
    let rows = csv(tmp.path(), "ball.csv");
    assert_eq!(rows, vec![vec!["0".to_string(), "e".into(), "0".into()]]);
}

#[test]
fn empty_radius_range_gives_empty_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        tmp.path(),
        &["bounds", "--group", "Z", "--r", "3..2", "--seed", "1"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(csv(tmp.path(), "bounds.csv").is_empty());
}

#[test]
fn config_file_and_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.ini");
    std::fs::write(
        &cfg,
        "[group]\nspec = Z\n[radius]\nr = 2\n[roster]\nsubgroups = trivial\n",
    )
    .unwrap();
    let out = run(
        tmp.path(),
        &["cover", "--config", cfg.to_str().unwrap(), "--exact"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv(tmp.path(), "cover.csv")[0][4], "5");
    let out = run(
        tmp.path(),
        &[
            "cover",
            "--config",
            cfg.to_str().unwrap(),
            "--exact",
            "--r",
            "4",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv(tmp.path(), "cover.csv")[0][4], "9");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.ini");
    std::fs::write(&bad, "[walk]\ntrails = 5\n").unwrap();
    let out = run(tmp.path(), &["walk", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("walk.trails"));

    assert_eq!(
        run(tmp.path(), &["walk", "--group", "Z", "--n", "5"])
            .status
            .code(),
        Some(64),
        "seed is mandatory"
    );
    assert_eq!(run(tmp.path(), &["nonsense"]).status.code(), Some(64));
    assert_eq!(
        run(
            tmp.path(),
            &[
                "cover",
                "--group",
                "Z^2",
                "--roster",
                "lattice:[[2,0],[0,1]]",
                "--r",
                "1"
            ]
        )
        .status
        .code(),
        Some(1),
        "finite-index roster"
    );
    assert_eq!(
        run(tmp.path(), &["ball", "--group", "free:3", "--r", "20"])
            .status
            .code(),
        Some(2)
    );
    let out = run(
        tmp.path(),
        &[
            "cover",
            "--group",
            "Z^2",
            "--r",
            "6",
            "--exact",
            "--node-budget",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(csv(tmp.path(), "cover.csv")[0][5], "false");
}

#[test]
fn export_writes_exchange_format() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("inst.txt");
    let out = run(
        tmp.path(),
        &[
            "cover",
            "--group",
            "Z",
            "--roster",
            "trivial",
            "--r",
            "2",
            "--export",
            path.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(path).unwrap();
    let sys = cosetcov_core::cover::parse_exchange(&text).unwrap();
    assert_eq!(sys.universe, 5);
    assert_eq!(sys.sets.len(), 5);
}

#[test]
fn remaining_commands_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 6] = [
        // sphere sizes 1, 4, 12, 36, 82 for the standard marking
        &["growth", "--group", "heisenberg", "--r", "4"],
        &[
            "schreier",
            "--group",
            "free:2",
            "--subgroup",
            "freegens:[a]",
            "--r",
            "3",
            "--roster",
            "cyclic",
        ],
        &["lyons", "--group", "Z^2", "--subgroup", "lattice:[[0,1]]"],
        &[
            "decay",
            "--group",
            "Z",
            "--subgroup",
            "trivial",
            "--n",
            "16",
        ],
        &[
            "sandwich",
            "--group",
            "Z",
            "--gens",
            "1,-1,2,-2",
            "--subgroup",
            "lattice:[[2]]",
            "--subgroup-gens",
            "2,-2",
            "--roster",
            "trivial",
            "--r",
            "3",
        ],
        &["lift", "--group", "free:2", "--r", "1..2"],
    ];
    for args in cases {
        let out = run(tmp.path(), args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(csv(tmp.path(), "growth.csv").last().unwrap()[2], "135");
    let lift = csv(tmp.path(), "lift.csv");
    assert_eq!(lift[0][5], "2");
    assert_eq!(lift[0][6], "true");
    let fit = csv(tmp.path(), "decay_fit.csv");
    assert_eq!(fit[0][10], "true");
}
