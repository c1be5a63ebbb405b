mod common;

use common::{configs, run, run_config, snapshot, REGRESSION};
use pmstat::analysis::{lambda_stat_defect, stat_defect};
use pmstat::{LambdaSpec, PartialMetricSpec, SequenceSpec};
use serde_json::Value;

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn regression_exit_statuses() {
    for (config, command, expected) in REGRESSION {
        let dir = tempfile::tempdir().unwrap();
        let o = run_config(command, config, dir.path());
        assert_eq!(o.status.code(), Some(expected), "{config}: {}", stderr(&o));
    }
}

#[test]
fn config_diagnostics_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config("analyze", "bad_eps.toml", dir.path());
    assert!(
        stderr(&o).contains("analysis.eps[0]: eps must be positive"),
        "{}",
        stderr(&o)
    );
    let o = run_config("analyze", "short_table.toml", dir.path());
    assert!(stderr(&o).contains("IndexError"), "{}", stderr(&o));

    let bad = dir.path().join("typo.toml");
    std::fs::write(&bad, "[analysis]\nalhpa = [1.0]\n").unwrap();
    let o = run(&["analyze", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = run(&["theorems", "--case", "T9.9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trace_rows_reevaluate() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config("analyze", "square_indicator.toml", dir.path());
    assert!(o.status.success());
    let seq = SequenceSpec::square_indicator();
    for alpha in [0.25, 0.6, 1.0] {
        let csv =
            std::fs::read_to_string(dir.path().join(format!("traces/stat_a{alpha}_e0.5.csv")))
                .unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,value"));
        for line in lines {
            let (n, v) = line.split_once(',').unwrap();
            let n: usize = n.parse().unwrap();
            let v: f64 = v.parse().unwrap();
            assert_eq!(
                v,
                stat_defect(&seq, &PartialMetricSpec::Max, alpha, 0.5, n).unwrap()
            );
        }
    }

    let o = run_config("analyze", "tail_block.toml", dir.path());
    assert!(o.status.success());
    let lambda = LambdaSpec::Affine { slope: 0.5 };
    let seq = SequenceSpec::tail_block(lambda.clone(), true);
    let csv = std::fs::read_to_string(dir.path().join("traces/lambda_stat_a0.6_e0.5.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let (n, v) = line.split_once(',').unwrap();
        let n: usize = n.parse().unwrap();
        let expected =
            lambda_stat_defect(&seq, &PartialMetricSpec::NegMin, &lambda, 0.6, 0.5, n).unwrap();
        assert_eq!(v.parse::<f64>().unwrap(), expected);
    }
}

#[test]
fn analyze_summary_shows_the_split() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_config("analyze", "square_indicator.toml", dir.path())
        .status
        .success());
    let summary: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("verdicts.json")).unwrap()).unwrap();
    let split = summary["splits"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["family"] == "stat_e0.5")
        .unwrap();
    assert_eq!(split["diverges_through"], 0.4);
    assert_eq!(split["converges_from"], 0.6);
    let log = std::fs::read_to_string(dir.path().join("traces/stat_a1_e0.5.log.csv")).unwrap();
    assert!(log.starts_with("log_n,log_value\n"));
}

#[test]
fn order_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config("estimate-order", "polynomial_order.toml", dir.path());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let g = v["verdict"]["gamma_hat"].as_f64().unwrap();
    assert!((0.68..=0.72).contains(&g), "{g}");
    assert_eq!(
        std::fs::read(dir.path().join("order.json")).unwrap(),
        o.stdout
    );

    let o = run_config("estimate-order", "constant_zero.toml", dir.path());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"]["gamma_hat"], 0.0);
    assert_eq!(v["verdict"]["decision"], "ConvergesToZero");

    let o = run(&["estimate-order", "--sequence", "square"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let g = v["verdict"]["gamma_hat"].as_f64().unwrap();
    assert!((0.48..=0.52).contains(&g), "{g}");
}

#[test]
fn theorem_cases_report_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[
        "theorems",
        "--case",
        "T3.6i",
        "--lambda",
        "affine:0.5",
        "--mu",
        "identity",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("theorems.json")).unwrap()).unwrap();
    assert_eq!(r["implications"][0]["conditions"][0]["id"], "C3.2");
    assert_eq!(r["implications"][0]["conditions"][0]["status"], "Holds");
    assert_eq!(r["exact"][0]["holds"], true);

    let o = run(&[
        "theorems", "--case", "T3.5", "--lambda", "log", "--out", out,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("theorems.json")).unwrap()).unwrap();
    assert_eq!(r["implications"][0]["conditions"][0]["status"], "Fails");
    assert_eq!(r["implications"][0]["outcome"], "Undetermined");
    assert!(String::from_utf8_lossy(&o.stdout).contains("C3.1=Fails"));
}

#[test]
fn hypothesis_violations_are_config_errors() {
    // λ = n exceeds μ = ⌈n/2⌉
    let o = run(&[
        "theorems",
        "--case",
        "T3.6i",
        "--lambda",
        "identity",
        "--mu",
        "affine:0.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("HypothesisError"), "{}", stderr(&o));
}

#[test]
fn axiom_command() {
    let bad = configs().join("bad_table.csv");
    let o = run(&["axioms", "--metric", &format!("custom:{}", bad.display())]);
    assert_eq!(o.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let first = &r["statuses"][0];
    assert_eq!(first["axiom"], "small_self_distance");
    assert_eq!(first["passed"], false);
    assert_eq!(first["witness"]["x"], 1.0);
    assert_eq!(first["witness"]["y"], 2.0);

    for metric in ["max", "neg_min", "usual"] {
        let o = run(&[
            "axioms",
            "--metric",
            metric,
            "--samples",
            "10000",
            "--seed",
            "3",
        ]);
        assert_eq!(o.status.code(), Some(0), "{metric}");
    }
    assert_eq!(
        run(&["axioms", "--metric", "taxicab"]).status.code(),
        Some(2)
    );
}

#[test]
fn jobs_do_not_change_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("square_indicator.toml");
    let cfg = cfg.to_str().unwrap();
    let oa = run(&[
        "analyze",
        "--config",
        cfg,
        "--jobs",
        "1",
        "--out",
        a.path().to_str().unwrap(),
    ]);
    let ob = run(&[
        "analyze",
        "--config",
        cfg,
        "--jobs",
        "4",
        "--out",
        b.path().to_str().unwrap(),
    ]);
    assert_eq!(oa.stdout, ob.stdout);
    assert_eq!(snapshot(a.path()), snapshot(b.path()));
}
