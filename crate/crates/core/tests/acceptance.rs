//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use statrs::distribution::{ContinuousCDF, Normal};

use costcode::analysis::{
    first_order_threshold, fl_to_vl, lemma_bounds, second_order_threshold, vl_to_fl, LemmaMethod, ThresholdCase,
};
use costcode::codec::{
    build_exact_code, decode, encode, kraft_sum, overflow, random_prefix_code, OverflowMethod, OverflowQuery,
    OverflowTarget, PrefixCode, ThresholdFamily,
};
use costcode::cost_model::CostModel;
use costcode::sources::{enumerate_support, IidSource, MixedSource, Source, DEFAULT_SUPPORT_CAP};
use costcode::spectrum::{
    first_order_spectrum, second_order_spectrum, strong_converse_diagnostic, SpectrumMethod, SpectrumQuery, Verdict,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn bern(p: f64) -> IidSource {
    IidSource::bernoulli(p).unwrap()
}

fn mixed(w1: f64, a: f64, b: f64) -> MixedSource {
    MixedSource::new([w1, 1.0 - w1], [bern(a), bern(b)]).unwrap()
}

fn costs(c: &[f64]) -> CostModel {
    CostModel::new(c.to_vec()).unwrap()
}

/// Binary entropy in bits, straight from the definition.
fn h2(p: f64) -> f64 {
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Standard deviation of the per-symbol self-information of Bern(p), bits.
fn sigma2(p: f64) -> f64 {
    (p * (1.0 - p)).sqrt() * ((1.0 - p) / p).log2().abs()
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

/// `P(x)` computed symbol by symbol, independently of the library.
fn seq_prob(pmfs: &[(f64, [f64; 2])], x: &[usize]) -> f64 {
    pmfs.iter().map(|(w, pmf)| w * x.iter().map(|&s| pmf[s]).product::<f64>()).sum()
}

struct Instance {
    name: &'static str,
    source: Source,
    pmfs: Vec<(f64, [f64; 2])>,
}

fn instances() -> Vec<Instance> {
    let iid = |name, p: f64| Instance { name, source: bern(p).into(), pmfs: vec![(1.0, [1.0 - p, p])] };
    vec![
        iid("Bern(0.5)", 0.5),
        iid("Bern(0.25)", 0.25),
        iid("Bern(0.3)", 0.3),
        Instance {
            name: "mixed(0.4,0.6;Bern(0.11),Bern(0.5))",
            source: mixed(0.4, 0.11, 0.5).into(),
            pmfs: vec![(0.4, [0.89, 0.11]), (0.6, [0.5, 0.5])],
        },
    ]
}

fn cost_grid() -> Vec<CostModel> {
    vec![costs(&[1.0, 1.0]), costs(&[1.0, 2.0]), costs(&[1.0, 3.0])]
}

fn exact_overflow(code: &PrefixCode, eta: f64) -> f64 {
    let q = OverflowQuery { n: code.n(), family: ThresholdFamily::Raw { eta }, method: OverflowMethod::Exact };
    overflow(OverflowTarget::Code(code), &q).unwrap().probability
}

/// 20 positive thresholds spanning the codeword costs of `code`.
fn eta_grid(code: &PrefixCode) -> Vec<f64> {
    let top = code.max_cost() * 1.05;
    (1..=20).map(|j| top * j as f64 / 20.0).collect()
}

fn criterion_1() -> Outcome {
    let mut worst_unit: f64 = 0.0;
    for k in 2..=6 {
        let a = CostModel::unit(k).unwrap().capacity().unwrap().alpha_c;
        worst_unit = worst_unit.max((a - 1.0).abs());
    }
    let golden = ((1.0 + 5f64.sqrt()) / 2.0).log2();
    let a12 = costs(&[1.0, 2.0]).capacity().unwrap().alpha_c;
    let golden_err = (a12 - golden).abs();
    let mut worst_scale: f64 = 0.0;
    for base in [vec![1.0, 2.0], vec![1.0, 3.0], vec![0.5, 1.0, 2.5]] {
        let model = costs(&base);
        let a = model.capacity().unwrap().alpha_c;
        for t in [0.5, 2.0, 3.0] {
            let at = model.scaled(t).unwrap().capacity().unwrap().alpha_c;
            worst_scale = worst_scale.max((at - a / t).abs());
        }
    }
    check(
        worst_unit <= 1e-12 && golden_err <= 1e-10 && worst_scale <= 1e-9,
        format!("unit err {worst_unit:.1e} (tol 1e-12), golden err {golden_err:.1e} (tol 1e-10), scaling err {worst_scale:.1e} (tol 1e-9)"),
    )
}

fn criterion_2() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0usize;
    let mut worst_kraft: f64 = 0.0;
    let mut worst_margin = f64::NEG_INFINITY;
    for inst in instances() {
        for model in cost_grid() {
            let alpha = model.capacity().unwrap().alpha_c;
            for n in 1..=8 {
                let dist = enumerate_support(&inst.source, n, DEFAULT_SUPPORT_CAP).unwrap();
                let code = build_exact_code(&dist, &model).unwrap();
                // prefix-freeness by all pairs
                let words: Vec<&[u8]> = code.entries().iter().map(|e| e.codeword.as_slice()).collect();
                let prefix_free = words
                    .iter()
                    .enumerate()
                    .all(|(i, a)| words.iter().enumerate().all(|(j, b)| i == j || !b.starts_with(a)));
                let round_trip = dist.entries().iter().all(|e| {
                    encode(&code, &e.symbols).and_then(|w| decode(&code, w)).map(|x| x == e.symbols.as_slice()).unwrap_or(false)
                });
                let kraft: f64 = code.entries().iter().map(|e| 2f64.powf(-alpha * e.cost)).sum();
                worst_kraft = worst_kraft.max(kraft.max(kraft_sum(&code)));
                let mut bound_ok = true;
                for e in code.entries() {
                    let p = seq_prob(&inst.pmfs, &e.sequence);
                    let c: f64 = e.codeword.iter().map(|&u| model.costs()[u as usize]).sum();
                    let bound = (-p.log2() + 1.0) / alpha + 2.0 * model.c_max();
                    worst_margin = worst_margin.max(c - bound);
                    bound_ok &= c <= bound + 1e-9;
                }
                checked += 1;
                if !(prefix_free && round_trip && kraft <= 1.0 + 1e-9 && bound_ok) {
                    failures.push(format!("{} {:?} n={n}", inst.name, model.costs()));
                }
            }
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{checked} instances, max Kraft {worst_kraft:.12} (tol 1+1e-9), max cost-bound margin {worst_margin:.3}{}",
            if failures.is_empty() { String::new() } else { format!(", failing: {failures:?}") }
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    let mut comparisons = 0usize;
    for inst in instances() {
        for model in cost_grid() {
            let alpha = model.capacity().unwrap().alpha_c;
            for n in 1..=8 {
                let dist = enumerate_support(&inst.source, n, DEFAULT_SUPPORT_CAP).unwrap();
                let code = build_exact_code(&dist, &model).unwrap();
                let randoms: Vec<PrefixCode> = (0..100)
                    .map(|s| random_prefix_code(&dist, &model, alpha, 1000 * n as u64 + s).unwrap())
                    .collect();
                for eta in eta_grid(&code) {
                    let built = exact_overflow(&code, eta);
                    let rand_ov: Vec<f64> = randoms.iter().map(|c| exact_overflow(c, eta)).collect();
                    for z in [0.1, 0.01] {
                        let b = lemma_bounds(&inst.source, &model, n, eta, z, LemmaMethod::Exact).unwrap();
                        comparisons += 2 + rand_ov.len();
                        if !(b.lower_raw <= built && built <= b.upper_raw) {
                            failures.push(format!("{} {:?} n={n} eta={eta:.3} z={z}", inst.name, model.costs()));
                        }
                        if rand_ov.iter().any(|&r| r < b.lower_raw) {
                            failures.push(format!("random: {} {:?} n={n} eta={eta:.3} z={z}", inst.name, model.costs()));
                        }
                    }
                }
            }
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{comparisons} comparisons{}",
            if failures.is_empty() { String::new() } else { format!(", failing: {:?}", &failures[..failures.len().min(5)]) }
        ),
    )
}

fn criterion_4() -> Outcome {
    let source: Source = bern(0.3).into();
    let model = costs(&[1.0, 2.0]);
    let alpha = model.capacity().unwrap().alpha_c;
    let r = h2(0.3) / alpha;
    let q = SpectrumQuery {
        source: &source,
        n: 5000,
        alpha_c: alpha,
        base: 2,
        method: SpectrumMethod::MonteCarlo { samples: 100_000, seed: 4 },
        grid: vec![r - 0.05, r + 0.05],
    };
    let curve = first_order_spectrum(&q).unwrap();
    let (below, above) = (curve.points[0].probability, curve.points[1].probability);
    check(
        above <= 0.05 && below >= 0.95,
        format!("F(R*+0.05) = {above:.5} (<= 0.05), F(R*-0.05) = {below:.5} (>= 0.95), R* = {r:.6}"),
    )
}

fn criterion_5() -> Outcome {
    let p = 0.25;
    let source: Source = bern(p).into();
    let model = CostModel::unit(2).unwrap();
    let sigma = sigma2(p);
    let multipliers = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let q = SpectrumQuery {
        source: &source,
        n: 10_000,
        alpha_c: 1.0,
        base: 2,
        method: SpectrumMethod::MonteCarlo { samples: 100_000, seed: 5 },
        grid: multipliers.iter().map(|m| m * sigma).collect(),
    };
    let curve = second_order_spectrum(&q, h2(p)).unwrap();
    let normal = std_normal();
    let gauss_err = curve
        .points
        .iter()
        .map(|pt| (pt.probability - (1.0 - normal.cdf(pt.threshold / sigma))).abs())
        .fold(0.0, f64::max);

    let mut inverse_err: f64 = 0.0;
    for eps in [0.1, 0.5, 0.9] {
        let l = second_order_threshold(&source, &model, eps, None).unwrap().value;
        let q = SpectrumQuery { grid: vec![l], ..q.clone() };
        let f = second_order_spectrum(&q, h2(p)).unwrap().points[0].probability;
        inverse_err = inverse_err.max((f - eps).abs());
    }
    check(
        gauss_err <= 0.02 && inverse_err <= 0.02,
        format!("max |F - (1 - Phi)| = {gauss_err:.5} (tol 0.02), max |F(L(eps)) - eps| = {inverse_err:.5} (tol 0.02)"),
    )
}

fn criterion_6() -> Outcome {
    let m = mixed(0.4, 0.5, 0.11);
    let source: Source = m.clone().into();
    let model = CostModel::unit(2).unwrap();
    let q = SpectrumQuery {
        source: &source,
        n: 10_000,
        alpha_c: 1.0,
        base: 2,
        method: SpectrumMethod::MonteCarlo { samples: 100_000, seed: 6 },
        grid: vec![0.75],
    };
    let f = first_order_spectrum(&q).unwrap().points[0].probability;
    let r_low = first_order_threshold(&source, &model, 0.2).unwrap().value;
    let r_high = first_order_threshold(&source, &model, 0.7).unwrap().value;
    let t3 = second_order_threshold(&source, &model, 0.8, None).unwrap();
    let expected = sigma2(0.11) * std_normal().inverse_cdf(1.0 - (0.8 - 0.4) / 0.6);
    let t3_err = (t3.value - expected).abs();
    check(
        (f - 0.4).abs() <= 0.02
            && (r_low - 1.0).abs() <= 1e-9
            && (r_high - h2(0.11)).abs() <= 1e-9
            && t3.case == ThresholdCase::MixedIII
            && t3_err <= 1e-8,
        format!(
            "F(0.75) = {f:.5} (0.4 +- 0.02), R(0.2) = {r_low:.9}, R(0.7) = {r_high:.6} (H = {:.6}), T3 err {t3_err:.1e} (tol 1e-8)",
            h2(0.11)
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    let mut codes = 0usize;
    let mut tight_held = true;
    for inst in instances() {
        for model in cost_grid() {
            let alpha = model.capacity().unwrap().alpha_c;
            for n in 1..=8 {
                let dist = enumerate_support(&inst.source, n, DEFAULT_SUPPORT_CAP).unwrap();
                let code = build_exact_code(&dist, &model).unwrap();
                for eta in eta_grid(&code) {
                    let fl = vl_to_fl(&code, eta);
                    let count = code.entries().iter().filter(|e| e.cost <= eta).count();
                    let log_ok = fl.size == count && (count == 0 || (count as f64).log2() <= alpha * eta);
                    let err_ok = fl.error_probability == exact_overflow(&code, eta);
                    if !(log_ok && err_ok) {
                        failures.push(format!("vl2fl {} {:?} n={n} eta={eta:.3}", inst.name, model.costs()));
                    }
                    if fl.size == 0 {
                        continue;
                    }
                    let (vl, cert) = fl_to_vl(&fl, &dist, &model).unwrap();
                    codes += 1;
                    let flag = model.costs().iter().cloned().fold(f64::INFINITY, f64::min);
                    let bound = ((fl.size as f64).log2() + 1.0) / alpha + 2.0 * model.c_max() + flag + model.c_max();
                    for e in vl.entries() {
                        if fl.contains(&e.sequence) {
                            let c: f64 = e.codeword.iter().map(|&u| model.costs()[u as usize]).sum();
                            if c > bound + 1e-9 {
                                failures.push(format!("fl2vl {} {:?} n={n} eta={eta:.3}", inst.name, model.costs()));
                            }
                            tight_held &= c <= cert.threshold + 1e-9;
                        }
                    }
                }
            }
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{codes} fl2vl codes checked, tighter bound without the extra c_max held: {tight_held}{}",
            if failures.is_empty() { String::new() } else { format!(", failing: {:?}", &failures[..failures.len().min(5)]) }
        ),
    )
}

fn criterion_8() -> Outcome {
    let iid: Source = bern(0.25).into();
    let r = strong_converse_diagnostic(&iid, &[1000, 10_000], 0.05, 100_000, 8, 2).unwrap();
    let ratio = r.rows[0].gap / r.rows[1].gap;
    let mix: Source = mixed(0.4, 0.5, 0.11).into();
    let m = strong_converse_diagnostic(&mix, &[1000, 10_000], 0.05, 100_000, 8, 2).unwrap();
    let gaps: Vec<f64> = m.rows.iter().map(|row| row.gap).collect();
    let stable = gaps.iter().all(|g| (g - 0.5).abs() <= 0.05);
    check(
        ratio >= 2.5 && stable,
        format!(
            "Bern(0.25) gap {:.5} -> {:.5} (ratio {ratio:.3}, need >= 2.5, verdict {:?}); mixed gaps {gaps:.4?} (0.5 +- 0.05, verdict {:?})",
            r.rows[0].gap,
            r.rows[1].gap,
            r.verdict,
            m.verdict
        ),
    )
    .and(r.verdict == Verdict::StrongConverseConsistent && m.verdict == Verdict::TwoPeak)
}

impl Outcome {
    fn and(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "cost capacity", Duration::from_secs(1), criterion_1),
        (2, "code validity", Duration::from_secs(120), criterion_2),
        (3, "lemma sandwich", Duration::from_secs(300), criterion_3),
        (4, "first-order phase transition", Duration::from_secs(60), criterion_4),
        (5, "second-order Gaussian law", Duration::from_secs(120), criterion_5),
        (6, "mixed two-peak", Duration::from_secs(120), criterion_6),
        (7, "equivalence constructions", Duration::from_secs(120), criterion_7),
        (8, "strong converse diagnostic", Duration::from_secs(60), criterion_8),
    ];
    let mut all = true;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= budget;
        all &= pass;
        println!(
            "criterion {id} [{name}]: {} ({:.2}s, budget {}s) {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            outcome.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
