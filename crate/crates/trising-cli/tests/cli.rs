use std::process::Command;

fn trising() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trising"))
}

#[test]
fn oracle_check_small_shape_passes() {
    let out = trising()
        .args(["oracle-check", "--shape", "parallelogram:3:3", "--maxdeg", "5", "--json"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["checks"][0]["passed"], serde_json::json!(true));
}

#[test]
fn square_check_reports_json() {
    let out = trising()
        .args(["square-check", "--order", "6", "--json"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["checks"].as_array().unwrap().len() >= 9);
}

#[test]
fn expand_is_idempotent_and_cached() {
    let dir = std::env::temp_dir().join(format!("trising-cli-test-{}", std::process::id()));
    let cache = dir.to_str().unwrap().to_string();
    let run = || {
        let out = trising()
            .args([
                "expand",
                "--shape",
                "parallelogram:4:4",
                "--isotropic",
                "--order",
                "8",
                "--cache",
                &cache,
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run();
    let files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 2);
    let before: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
    run();
    let after: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
    assert_eq!(before, after, "rerun must be byte-identical");
    // The z^4 coefficient of the 4x4 partition function is 2M+2N-1 = 15.
    let zhat_file = files
        .iter()
        .find(|f| f.file_name().unwrap().to_str().unwrap().starts_with("zhat-"))
        .unwrap();
    let text = std::fs::read_to_string(zhat_file).unwrap();
    let series = trising::series::Series::from_text(&text).unwrap();
    // Isotropic weights: sum the trivariate coefficients at total degree 4
    // is not applicable here; in p the z^4-degree structure appears at p^4.
    let c4 = series.coeff(trising::series::Exp::int(4)).unwrap();
    assert_eq!(c4, trising::scalar::GaussRat::from_int(15));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn budget_refusal_mentions_estimate() {
    let out = trising()
        .args(["expand", "--shape", "parallelogram:60:60", "--isotropic", "--order", "120"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("estimated"), "{err}");
}

#[test]
fn brute_force_refuses_large_lattices() {
    let out = trising()
        .args(["oracle-check", "--shape", "parallelogram:6:6", "--maxdeg", "4"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("refused"), "{text}");
}
