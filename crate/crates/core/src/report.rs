//! CSV and markdown table output.
//!
//! CSV numbers use Rust's shortest round-trip formatting, so parsing a field
//! back yields the identical `f64`. Markdown rounds to three decimals.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;

use crate::config::{OutputFormat, Scenario, TableSpec};
use crate::error::{Error, Result};
use crate::montecarlo::{run_experiment, ExperimentSummary};
use crate::stopping::Procedure;

pub const ADAPTIVE_COLUMNS: [&str; 14] = [
    "scenario_id",
    "alpha",
    "beta",
    "pcs",
    "se_pcs",
    "e_n1",
    "se_n1",
    "asn",
    "se_asn",
    "n1_star_closed",
    "n1_star_series",
    "asn_wald_k0",
    "replications",
    "master_seed",
];

/// Classical tables report rounds in place of ASN, plus total draws.
pub const CLASSICAL_COLUMNS: [&str; 15] = [
    "scenario_id",
    "alpha",
    "beta",
    "pcs",
    "se_pcs",
    "e_n1",
    "se_n1",
    "rounds",
    "se_rounds",
    "total_draws",
    "n1_star_closed",
    "n1_star_series",
    "asn_wald_k0",
    "replications",
    "master_seed",
];

/// Simulated summaries for one scenario, one per error-rate cell.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub summaries: Vec<ExperimentSummary>,
}

/// Runs every cell of a table in order.
pub fn run_table(spec: &TableSpec) -> Result<Vec<ScenarioResult>> {
    spec.scenarios
        .iter()
        .map(|scenario| {
            let summaries = scenario.experiments().iter().map(run_experiment).collect::<Result<Vec<_>>>()?;
            Ok(ScenarioResult { scenario: scenario.clone(), summaries })
        })
        .collect()
}

pub fn render_csv(results: &[ScenarioResult]) -> Result<String> {
    if results.iter().all(|r| r.summaries.is_empty()) {
        return Err(Error::domain("no summaries to emit"));
    }
    let classical = results.first().is_some_and(|r| r.scenario.procedure == Procedure::Classical);
    let mut out = String::new();
    if classical {
        out.push_str(&CLASSICAL_COLUMNS.join(","));
    } else {
        out.push_str(&ADAPTIVE_COLUMNS.join(","));
    }
    out.push('\n');
    for r in results {
        for s in &r.summaries {
            let mut fields = vec![
                r.scenario.id.clone(),
                s.alpha.to_string(),
                s.beta.to_string(),
                s.pcs.to_string(),
                s.se_pcs.to_string(),
                s.mean_n_inferior.to_string(),
                s.se_n_inferior.to_string(),
                s.asn.to_string(),
                s.se_asn.to_string(),
            ];
            if classical {
                fields.push(s.mean_total_draws.to_string());
            }
            fields.extend([
                s.n1_star_closed.to_string(),
                s.n1_star_series.to_string(),
                s.asn_wald_k0.to_string(),
                s.replications.to_string(),
                s.master_seed.to_string(),
            ]);
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    Ok(out)
}

/// Three decimals with trailing zeros trimmed: 400, 44.444, 5.771.
fn short(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn rate(alpha: f64, beta: f64) -> String {
    if alpha == beta {
        format!("{alpha:e}")
    } else {
        format!("{alpha:e}, {beta:e}")
    }
}

pub fn render_markdown(results: &[ScenarioResult]) -> Result<String> {
    if results.iter().all(|r| r.summaries.is_empty()) {
        return Err(Error::domain("no summaries to emit"));
    }
    let mut out = String::new();
    for r in results {
        let Some(first) = r.summaries.first() else { continue };
        let pair = &r.scenario.pair;
        let _ = writeln!(
            out,
            "**{}**: f0 = {}, f1 = {}, N_1^* = {}\n",
            r.scenario.caption,
            pair.f0(),
            pair.f1(),
            short(first.n1_star_closed)
        );
        let rates = if r.summaries.iter().all(|s| s.alpha == s.beta) { "α(=β)" } else { "α, β" };
        match r.scenario.procedure {
            Procedure::Adaptive => {
                let _ = writeln!(out, "| {rates} | PCS | E(N_{{1,n}}) | ASN |");
                out.push_str("|:-:|:-:|:-:|:-:|\n");
                for s in &r.summaries {
                    let _ = writeln!(
                        out,
                        "| {} | {:.3} | {:.3} | {:.3} |",
                        rate(s.alpha, s.beta),
                        s.pcs,
                        s.mean_n_inferior,
                        s.asn
                    );
                }
            }
            Procedure::Classical => {
                let _ = writeln!(out, "| {rates} | PCS | rounds | total_draws |");
                out.push_str("|:-:|:-:|:-:|:-:|\n");
                for s in &r.summaries {
                    let _ = writeln!(
                        out,
                        "| {} | {:.3} | {:.3} | {:.3} |",
                        rate(s.alpha, s.beta),
                        s.pcs,
                        s.asn,
                        s.mean_total_draws
                    );
                }
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn render_table(results: &[ScenarioResult], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => render_csv(results),
        OutputFormat::Markdown => render_markdown(results),
    }
}

/// Writes the rendered table to `spec.output`, or to `fallback` when unset.
pub fn emit_table(results: &[ScenarioResult], spec: &TableSpec, fallback: &mut dyn Write) -> Result<()> {
    let text = render_table(results, spec.format)?;
    match &spec.output {
        Some(path) => fs::write(path, text).map_err(Error::from),
        None => fallback.write_all(text.as_bytes()).map_err(Error::from),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, preset};

    fn tiny_results(spec: &TableSpec) -> Vec<ScenarioResult> {
        let mut spec = spec.clone();
        spec.override_replications(20);
        run_table(&spec).unwrap()
    }

    #[test]
    fn one_row_has_fourteen_fields() {
        let spec =
            parse_config("distribution = \"normal\"\nparams_f0 = [0.5]\nparams_f1 = [0.0]\nalphas = [1e-2]\nseed = 3")
                .unwrap();
        let csv = render_csv(&tiny_results(&spec)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], ADAPTIVE_COLUMNS.join(","));
        assert_eq!(lines[1].split(',').count(), 14);
    }

    #[test]
    fn markdown_caption_carries_n1_star() {
        let mut spec = preset("table1").unwrap();
        spec.scenarios.truncate(1);
        spec.scenarios[0].alphas.truncate(1);
        spec.scenarios[0].betas.truncate(1);
        let md = render_markdown(&tiny_results(&spec)).unwrap();
        assert!(md.contains("N_1^* = 400"), "{md}");
        assert!(md.contains("Table 1(a)"));
        assert!(md.contains("| α(=β) | PCS | E(N_{1,n}) | ASN |"));
    }

    #[test]
    fn classical_layout_renames_asn() {
        let mut spec = preset("table4").unwrap();
        spec.scenarios.truncate(1);
        let csv = render_csv(&tiny_results(&spec)).unwrap();
        let header = csv.lines().next().unwrap();
        assert_eq!(header, CLASSICAL_COLUMNS.join(","));
        assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 15));
    }

    #[test]
    fn writes_to_output_path() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = parse_config(
            "distribution = \"poisson\"\nparams_f0 = [2.0]\nparams_f1 = [1.0]\nalphas = [1e-2]\nreplications = 10",
        )
        .unwrap();
        spec.output = Some(dir.path().join("out.csv"));
        let results = run_table(&spec).unwrap();
        let mut sink = Vec::new();
        emit_table(&results, &spec, &mut sink).unwrap();
        assert!(sink.is_empty());
        let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
        assert!(text.starts_with("scenario_id,"));

        spec.output = Some(dir.path().join("missing").join("out.csv"));
        assert!(matches!(emit_table(&results, &spec, &mut sink), Err(Error::Io(_))));
    }

    #[test]
    fn empty_results_rejected() {
        assert!(render_csv(&[]).is_err());
    }

    #[test]
    fn short_formatting() {
        assert_eq!(short(400.0), "400");
        assert_eq!(short(44.444_444), "44.444");
        assert_eq!(short(5.770_986), "5.771");
    }
}
