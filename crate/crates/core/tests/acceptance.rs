//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::process::{Command, ExitCode};

use adaptive_sprt::analytics::{n1_star_closed_form, n1_star_series, SERIES_EPS};
use adaptive_sprt::config::preset;
use adaptive_sprt::report::{run_table, ScenarioResult};
use adaptive_sprt::{ExperimentSummary, HypothesisPair, LlrMoments, StreamId, TrialRng};

/// Published (PCS, E(N1), ASN) per cell, in preset order.
#[rustfmt::skip]
const TABLE1: [[(f64, f64, f64); 5]; 5] = [
    [(0.908, 349.550, 1575.253), (0.955, 394.827, 2289.517), (0.969, 391.828, 2657.338), (0.975, 398.996, 2756.844), (0.986, 394.102, 3093.543)],
    [(0.918, 91.237, 418.085), (0.955, 98.748, 574.303), (0.979, 97.999, 663.545), (0.976, 99.725, 694.320), (0.984, 100.309, 781.425)],
    [(0.909, 38.350, 180.370), (0.969, 38.488, 252.804), (0.974, 46.189, 296.015), (0.975, 43.336, 309.886), (0.989, 40.482, 351.835)],
    [(0.919, 20.496, 100.263), (0.952, 23.338, 143.625), (0.971, 25.552, 168.346), (0.987, 23.845, 177.570), (0.984, 22.652, 194.418)],
    [(0.930, 13.422, 66.488), (0.961, 15.735, 94.617), (0.980, 14.324, 105.348), (0.979, 14.463, 110.278), (0.985, 15.161, 124.351)],
];

#[rustfmt::skip]
const TABLE2: [[(f64, f64, f64); 5]; 6] = [
    [(0.924, 32.295, 146.120), (0.959, 35.314, 203.890), (0.984, 32.991, 229.243), (0.982, 35.608, 245.363), (0.987, 34.219, 271.723)],
    [(0.909, 39.151, 176.486), (0.971, 41.286, 246.989), (0.980, 42.927, 286.710), (0.978, 43.234, 303.215), (0.986, 42.506, 333.556)],
    [(0.931, 10.940, 49.169), (0.967, 10.668, 66.835), (0.980, 11.002, 76.338), (0.987, 10.611, 80.323), (0.996, 10.525, 89.907)],
    [(0.935, 5.452, 24.310), (0.969, 5.548, 32.654), (0.981, 5.793, 37.123), (0.986, 5.962, 39.403), (0.992, 5.518, 42.659)],
    [(0.962, 3.662, 15.269), (0.981, 3.759, 20.489), (0.989, 3.689, 22.976), (0.986, 3.650, 24.098), (0.994, 3.701, 26.718)],
    [(0.952, 2.996, 12.614), (0.977, 3.093, 16.832), (0.986, 3.204, 19.170), (0.990, 2.991, 19.950), (0.989, 3.104, 21.790)],
];

#[rustfmt::skip]
const TABLE3: [[(f64, f64, f64); 5]; 4] = [
    [(0.844, 1.936, 11.701), (0.920, 1.996, 19.366), (0.949, 1.978, 20.703), (0.955, 2.020, 23.325), (0.964, 2.060, 27.126)],
    [(0.943, 3.259, 9.819), (0.985, 3.493, 12.693), (0.989, 3.416, 12.720), (0.994, 3.364, 13.489), (0.995, 3.511, 14.804)],
    [(0.893, 2.793, 15.669), (0.959, 2.890, 24.958), (0.969, 2.812, 26.276), (0.971, 3.005, 29.531), (0.975, 3.046, 33.611)],
    [(0.940, 2.323, 9.663), (0.975, 2.492, 14.553), (0.986, 2.539, 15.371), (0.989, 2.571, 17.121), (0.992, 2.514, 18.929)],
];

/// Classical baseline (PCS, rounds), one row per mean pair, α = 1e-2 … 1e-5.
#[rustfmt::skip]
const TABLE4: [[(f64, f64); 4]; 5] = [
    [(0.989, 928.385), (0.999, 1370.521), (0.999, 1867.227), (1.000, 2335.468)],
    [(0.991, 231.763), (1.000, 346.063), (1.000, 462.753), (1.000, 571.699)],
    [(0.990, 104.929), (1.000, 155.557), (1.000, 206.995), (1.000, 265.242)],
    [(0.992, 57.987), (0.999, 89.838), (0.999, 117.981), (1.000, 146.960)],
    [(0.989, 38.152), (0.998, 56.901), (1.000, 76.770), (1.000, 95.605)],
];

const NORMAL_N1: [f64; 5] = [400.0, 100.0, 44.444, 25.0, 16.0];
const POISSON_N1: [f64; 6] = [35.851, 43.879, 11.888, 5.771, 3.642, 2.911];
const LAPLACE_N1: [f64; 4] = [2.288, 4.802, 4.576, 2.774];

fn listing(label: &str, items: &[String]) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!("; {label}: {}", items.join("; "))
    }
}

struct Report {
    failures: usize,
}

impl Report {
    fn record(&mut self, id: &str, name: &str, ok: bool, detail: String) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {id}: {name} ({detail})");
        if !ok {
            self.failures += 1;
        }
    }
}

fn all_pairs() -> Vec<HypothesisPair> {
    ["table1", "table2", "table3"]
        .iter()
        .flat_map(|t| preset(t).unwrap().scenarios.into_iter().map(|s| s.pair))
        .collect()
}

fn round_sig(v: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits - 1 - v.abs().log10().floor() as i32);
    (v * scale).round() / scale
}

fn criterion_1(r: &mut Report) {
    let pairs = all_pairs();
    let published: Vec<f64> = NORMAL_N1.iter().chain(&POISSON_N1).chain(&LAPLACE_N1).copied().collect();
    let mut bad = Vec::new();
    for (pair, &expected) in pairs.iter().zip(&published) {
        let m = match pair.family() {
            adaptive_sprt::Family::AsymmetricLaplace => pair.llr_moments_numeric(1e-10).unwrap(),
            _ => pair.llr_moments_analytic().unwrap(),
        };
        let n1 = n1_star_closed_form(&m);
        let ok = match pair.family() {
            adaptive_sprt::Family::AsymmetricLaplace => ((n1 - expected) / expected).abs() <= 0.005,
            _ => round_sig(n1, 4) == round_sig(expected, 4),
        };
        if !ok {
            bad.push(format!("{}: {n1} vs {expected}", pair.f0()));
        }
    }
    let n = published.len();
    r.record(
        "1",
        "analytic N1* exactness",
        bad.is_empty(),
        format!("{}/{n} captions{}", n - bad.len(), listing("off", &bad)),
    );
}

/// Counts cells within PCS ±0.03, E(N1) ±20 %, ASN ±10 %.
fn table_hits(results: &[ScenarioResult], published: &[[(f64, f64, f64); 5]]) -> (usize, usize, Vec<String>) {
    let mut hits = 0;
    let mut total = 0;
    let mut misses = Vec::new();
    for (res, rows) in results.iter().zip(published) {
        for (s, &(pcs, en1, asn)) in res.summaries.iter().zip(rows) {
            total += 1;
            let ok = (s.pcs - pcs).abs() <= 0.03
                && ((s.mean_n_inferior - en1) / en1).abs() <= 0.20
                && ((s.asn - asn) / asn).abs() <= 0.10;
            if ok {
                hits += 1;
            } else {
                misses.push(format!(
                    "{} α={:e}: pcs {:.3}/{pcs}, e_n1 {:.3}/{en1}, asn {:.3}/{asn}",
                    res.scenario.caption, s.alpha, s.pcs, s.mean_n_inferior, s.asn
                ));
            }
        }
    }
    (hits, total, misses)
}

fn criterion_2(r: &mut Report, t1: &[ScenarioResult]) {
    let (hits, total, misses) = table_hits(t1, &TABLE1);
    r.record(
        "2",
        "table 1 reproduction",
        hits >= 22 && total == 25,
        format!("{hits}/{total} cells{}", listing("misses", &misses)),
    );
}

fn criterion_3(r: &mut Report, t2: &[ScenarioResult], t3: &[ScenarioResult]) {
    let (h2, n2, m2) = table_hits(t2, &TABLE2);
    let (h3, n3, m3) = table_hits(t3, &TABLE3);
    let ok = h2 >= 26 && n2 == 30 && h3 >= 17 && n3 == 20;
    let misses: Vec<String> = m2.into_iter().chain(m3).collect();
    r.record(
        "3",
        "tables 2 and 3 reproduction",
        ok,
        format!("{h2}/{n2} and {h3}/{n3} cells{}", listing("misses", &misses)),
    );
}

fn criterion_4(r: &mut Report) {
    let t4 = run_table(&preset("table4").unwrap()).unwrap();
    let mut hits = 0;
    let mut total = 0;
    let mut misses = Vec::new();
    for (res, rows) in t4.iter().zip(&TABLE4) {
        for (s, &(pcs, rounds)) in res.summaries.iter().zip(rows) {
            total += 1;
            if (s.pcs - pcs).abs() <= 0.01 && ((s.asn - rounds) / rounds).abs() <= 0.10 {
                hits += 1;
            } else {
                misses.push(format!(
                    "{} α={:e}: pcs {:.3}/{pcs}, rounds {:.3}/{rounds}",
                    res.scenario.id, s.alpha, s.pcs, s.asn
                ));
            }
        }
    }
    r.record(
        "4",
        "classical baseline",
        hits == 20 && total == 20,
        format!("{hits}/{total} cells{}", listing("misses", &misses)),
    );
}

fn criterion_5(r: &mut Report, t1: &[ScenarioResult]) {
    // (0.5, 0) at α = 1e-3, 1e-5, 1e-6.
    let cells: Vec<&ExperimentSummary> = [0, 2, 4].iter().map(|&i| &t1[4].summaries[i]).collect();
    let mut ok = true;
    let mut ratios = Vec::new();
    let mut detail = Vec::new();
    for s in &cells {
        let target = s.asn_wald_k0 + s.n1_star_closed;
        ok &= ((s.asn - target) / target).abs() <= 0.20;
        ratios.push(s.asn / s.asn_wald_k0);
        detail.push(format!("α={:e}: asn {:.2} vs {:.2}, ratio {:.4}", s.alpha, s.asn, target, s.asn / s.asn_wald_k0));
    }
    ok &= ratios.windows(2).all(|w| w[1] < w[0]) && ratios.iter().all(|&q| q > 1.0);
    r.record("5", "efficiency against wald ASN plus N1*", ok, detail.join("; "));
}

fn ratio_and_se(s: &ExperimentSummary) -> (f64, f64) {
    let q = s.mean_n_inferior / s.asn;
    let rel = ((s.se_n_inferior / s.mean_n_inferior).powi(2) + (s.se_asn / s.asn).powi(2)).sqrt();
    (q, q * rel)
}

fn criterion_6(r: &mut Report, t1: &[ScenarioResult], t2: &[ScenarioResult]) {
    let mut bad = Vec::new();
    for res in t1.iter().chain(t2) {
        let last = res.summaries.last().unwrap();
        if ((last.mean_n_inferior - last.n1_star_closed) / last.n1_star_closed).abs() > 0.20 {
            bad.push(format!(
                "{}: e_n1 {:.3} vs {:.3}",
                res.scenario.caption, last.mean_n_inferior, last.n1_star_closed
            ));
        }
        for w in res.summaries.windows(2) {
            let (q0, se0) = ratio_and_se(&w[0]);
            let (q1, se1) = ratio_and_se(&w[1]);
            if q1 > q0 + 2.0 * (se0 * se0 + se1 * se1).sqrt() {
                bad.push(format!("{}: ratio rises {q0:.4} -> {q1:.4} at α={:e}", res.scenario.caption, w[1].alpha));
            }
        }
    }
    r.record(
        "6",
        "inferior allocations converge to N1*",
        bad.is_empty(),
        format!("{} pairs{}", t1.len() + t2.len(), listing("violations", &bad)),
    );
}

/// Sample mean and variance of the LLR under `stream`'s density with their
/// standard errors.
fn empirical_llr(pair: &HypothesisPair, stream: StreamId, n: usize, seed: u64) -> [f64; 4] {
    let density = if stream == StreamId::X { pair.f0() } else { pair.f1() };
    let mut rng = TrialRng::seed_from_u64(seed);
    let z: Vec<f64> = (0..n).map(|_| pair.llr(density.sample(rng.stream(stream))).unwrap()).collect();
    let nf = n as f64;
    let mean = z.iter().sum::<f64>() / nf;
    let m2 = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let m4 = z.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
    [mean, (m2 / nf).sqrt(), m2, ((m4 - m2 * m2) / nf).sqrt()]
}

fn criterion_7(r: &mut Report) {
    let pairs = all_pairs();
    let mut bad = Vec::new();
    for pair in &pairs {
        let m: LlrMoments = pair.llr_moments().unwrap();
        let closed = n1_star_closed_form(&m);
        let series = n1_star_series(&m, SERIES_EPS);
        if (series - closed).abs() > (0.05 * closed).max(1.0) {
            bad.push(format!("(a) {}: series {series:.4} vs {closed:.4}", pair.f0()));
        }
        if pair.family() != adaptive_sprt::Family::AsymmetricLaplace {
            let num = pair.llr_moments_numeric(1e-10).unwrap();
            let diffs =
                [num.eta_x - m.eta_x, num.sigma2_x - m.sigma2_x, num.eta_y - m.eta_y, num.sigma2_y - m.sigma2_y];
            if diffs.iter().any(|d| d.abs() > 1e-6) {
                bad.push(format!("(b) {}: {diffs:?}", pair.f0()));
            }
        }
        for (k, (stream, eta, s2)) in
            [(StreamId::X, m.eta_x, m.sigma2_x), (StreamId::Y, m.eta_y, m.sigma2_y)].into_iter().enumerate()
        {
            let [mean, se_mean, var, se_var] = empirical_llr(pair, stream, 1_000_000, 7 + k as u64);
            if (mean - eta).abs() > 4.0 * se_mean || (var - s2).abs() > 4.0 * se_var {
                bad.push(format!("(c) {} {stream:?}: mean {mean} vs {eta}, var {var} vs {s2}", pair.f0()));
            }
        }
    }
    r.record(
        "7",
        "oracle equivalences",
        bad.is_empty(),
        format!("{} pairs{}", pairs.len(), listing("violations", &bad)),
    );
}

fn criterion_8(r: &mut Report) {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_adaptive-sprt"))
            .args(["table", "--preset", "table1", "--seed", "20260101"])
            .env("ADAPTIVE_SPRT_THREADS", threads)
            .output()
            .expect("run cli");
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let first = run("1");
    let again = run("1");
    let wide = run("4");
    let ok = first == again && first == wide && !first.is_empty();
    r.record("8", "reproducible table output", ok, format!("{} bytes, 1 vs 1 vs 4 threads", first.len()));
}

fn main() -> ExitCode {
    let mut r = Report { failures: 0 };
    let t1 = run_table(&preset("table1").unwrap()).unwrap();
    let t2 = run_table(&preset("table2").unwrap()).unwrap();
    let t3 = run_table(&preset("table3").unwrap()).unwrap();

    criterion_1(&mut r);
    criterion_2(&mut r, &t1);
    criterion_3(&mut r, &t2, &t3);
    criterion_4(&mut r);
    criterion_5(&mut r, &t1);
    criterion_6(&mut r, &t1, &t2);
    criterion_7(&mut r);
    criterion_8(&mut r);

    if r.failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", r.failures);
        ExitCode::FAILURE
    }
}
