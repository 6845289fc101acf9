use std::process::Command;

fn milac() -> Command {
    Command::new(env!("CARGO_BIN_EXE_milac"))
}

#[test]
fn nmse_sweep_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(workers);
        let status = milac()
            .args([
                "nmse-sweep",
                "--size",
                "4x4",
                "--snr",
                "0,10",
                "--trials",
                "300",
                "--format",
                "both",
            ])
            .args(["--workers", workers, "--seed", "7", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        assert!(out.join("nmse_sweep.svg").exists());
        csvs.push(std::fs::read(out.join("nmse_sweep.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.pop().unwrap()).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 4);
    assert!(text.starts_with("scheme,n_tx,n_rx,snr_db,metric,value,trials,stderr\n"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nsize = 16x16\nschemes = digital-mmse\n").unwrap();
    let status = milac()
        .args([
            "complexity-sweep",
            "--format",
            "csv",
            "--size",
            "64x2048",
            "--config",
        ])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(dir.path().join("complexity_sweep.csv")).unwrap();
    assert!(
        text.contains("digital-mmse,64,2048,,online_real_ops,2.1474836480000000e9"),
        "{text}"
    );
    assert!(!text.contains("milac-ls"));
}

#[test]
fn verify_exit_codes() {
    let ok = milac().args(["verify", "--workers", "2"]).output().unwrap();
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stdout)
    );
    for fault in ["admittance", "multiplier"] {
        let bad = milac()
            .args(["verify", "--workers", "2", "--fault", fault])
            .output()
            .unwrap();
        assert_eq!(bad.status.code(), Some(1));
        assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
    }
}

#[test]
fn config_errors_exit_with_two() {
    for args in [
        vec!["nmse-sweep", "--schemes", "analog-magic"],
        vec!["nmse-sweep", "--trials", "0"],
        vec!["papr-report", "--format", "pdf"],
        vec!["verify", "--config", "/nonexistent/milac.cfg"],
    ] {
        let out = milac().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}
