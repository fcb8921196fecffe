use std::process::{Command, Output};

use adaptive_sprt::analytics::{asn_wald, n1_star_closed_form, n1_star_series, wald_thresholds, SERIES_EPS};
use adaptive_sprt::config::parse_pair_key;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaptive-sprt")).args(args).env_remove("ADAPTIVE_SPRT_THREADS").output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = cli(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn n1star_prints_closed_form() {
    let text = stdout(&["n1star", "--normal", "0.1", "0"]);
    let closed: f64 = text.lines().next().unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert_eq!(closed, 400.0);
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
    assert_eq!(cli(&["thresholds"]).status.code(), Some(2));
    assert_eq!(cli(&["moments", "--normal", "1", "0", "--poisson", "1", "2"]).status.code(), Some(2));
    let out = cli(&["moments", "--poisson", "2", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rate must be > 0"));
    let out = cli(&["table", "--config", "/nonexistent/table.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn table_preset_is_byte_identical() {
    let args = ["table", "--preset", "table2", "--seed", "42", "--replications", "200"];
    let first = cli(&args);
    let second = cli(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let mut wide = Command::new(env!("CARGO_BIN_EXE_adaptive-sprt"));
    let wide = wide.args(args).env("ADAPTIVE_SPRT_THREADS", "3").output().unwrap();
    assert_eq!(first.stdout, wide.stdout);
}

#[test]
fn csv_round_trips_and_analytics_are_recomputable() {
    let text = stdout(&["table", "--preset", "table3", "--seed", "5", "--replications", "50"]);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(headers.len(), 14);
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.unwrap();
        rows += 1;
        for field in record.iter().skip(1) {
            let v: f64 = field.parse().unwrap();
            assert_eq!(v.to_string(), field, "lossy field {field}");
        }
        let pair = parse_pair_key(&record[col("scenario_id")]).unwrap();
        let alpha: f64 = record[col("alpha")].parse().unwrap();
        let beta: f64 = record[col("beta")].parse().unwrap();
        let m = pair.llr_moments().unwrap();
        let num = |name: &str| record[col(name)].parse::<f64>().unwrap();
        assert_eq!(num("n1_star_closed"), n1_star_closed_form(&m));
        assert_eq!(num("n1_star_series"), n1_star_series(&m, SERIES_EPS));
        assert_eq!(num("asn_wald_k0"), asn_wald(&m, &wald_thresholds(alpha, beta).unwrap()).0);
    }
    assert_eq!(rows, 20);
}

#[test]
fn config_file_drives_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.toml");
    let output = dir.path().join("grid.md");
    std::fs::write(
        &config,
        "schema_version = 1\nformat = \"markdown\"\n\n[[scenario]]\nid = \"demo\"\ndistribution = \"poisson\"\nparams_f0 = [2.0]\nparams_f1 = [1.0]\nalphas = [1e-2, 1e-3]\nreplications = 100\n",
    )
    .unwrap();
    let text = stdout(&["table", "--config", config.to_str().unwrap(), "--output", output.to_str().unwrap()]);
    assert!(text.is_empty());
    let md = std::fs::read_to_string(&output).unwrap();
    assert!(md.contains("N_1^* = 5.771"), "{md}");
    assert_eq!(md.lines().filter(|l| l.starts_with("| 1e-")).count(), 2);
}

#[test]
fn classical_reports_rounds() {
    let text =
        stdout(&["classical", "--normal", "0.5", "0", "--alpha", "1e-2", "--replications", "300", "--seed", "1"]);
    let field = |key: &str| -> f64 {
        text.lines().find(|l| l.starts_with(key)).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    assert!((field("rounds") - 38.152).abs() / 38.152 < 0.15);
    assert!((field("total_draws") - 2.0 * field("rounds")).abs() < 1e-3);
}
