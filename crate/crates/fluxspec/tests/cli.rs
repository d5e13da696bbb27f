//! CLI surface tests against the built binary.

use std::process::Command;

fn fluxspec() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fluxspec"))
}

#[test]
fn annulus_subcommand_prints_mode_table() {
    let out = fluxspec()
        .args(["annulus", "--r0", "1", "--r1", "2", "--phi", "0.5", "--n", "256"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("R0,R1,phi,m,bc,n,mu,err"));
    assert!(text.contains("# lambda = 1.941"));
}

#[test]
fn solve_subcommand_with_eccentric_shortcut() {
    let out = fluxspec()
        .args([
            "solve",
            "--eccentric",
            "1,2,0.3",
            "--phi",
            "0.5",
            "--resolution",
            "24x48",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("lambda = 1.29"), "{text}");
}

#[test]
fn solve_reads_domain_json() {
    let dir = std::env::temp_dir().join(format!("fluxspec-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("dom.json");
    std::fs::write(
        &path,
        r#"{"hole_center":[0,0],"hole_radius":1.0,
            "outer":{"c0":2.0,"cos":[0.1],"sin":[]},"label":"bumpy"}"#,
    )
    .unwrap();
    let out = fluxspec()
        .args([
            "solve",
            "--domain",
            path.to_str().unwrap(),
            "--phi",
            "0.25",
            "--resolution",
            "24x48",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_emits_csv_and_exit_zero() {
    let dir = std::env::temp_dir().join(format!("fluxspec-cli-v-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "experiment": "verify_theorem",
            "families": [{"eccentric": {"r0": 1.0, "r1": 2.0, "deltas": [0.3]}}],
            "flux_grid": [0.5],
            "resolution": {"n_s": 32, "n_t": 64},
            "radial_elements": 512
        }"#,
    )
    .unwrap();
    let out_path = dir.join("report.csv");
    let out = fluxspec()
        .args([
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
            "--no-timestamp",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("# fluxspec-schema v1"));
    assert!(!text.contains("# generated"));
    assert!(text.contains(",control,"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn execution_errors_exit_one() {
    let out = fluxspec()
        .args(["solve", "--eccentric", "1,2,5.0", "--phi", "0.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("hole touches outer boundary"), "{err}");
}

#[test]
fn certify_subcommand_reports_gaps() {
    let out = fluxspec()
        .args(["certify", "--eccentric", "1,2,0.3", "--phi", "0.5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("rq,lambda_annulus"), "{text}");
}
