//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ychan::dyc::{
    plan_levels, plan_rates, search_levels, search_plan, verify_plan_with, DycConfig, FlowClass, Strategies,
};
use ychan::lattice::{monte_carlo_sum_decode, Dither, NestedLatticeCode};
use ychan::region::{
    achievable_point, corollary_rhs, downlink_bounds, maximize_objective, outer_bound_proxy, pinned_cases,
    proxy_contains, uplink_bounds, Allocation, DownlinkPowers, FreeUplinkPowers, OptimizerOptions, GAP_CONSTANTS,
};
use ychan::{decompose_flows, ChannelConfig, Execution, RateTuple};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn toy() -> (DycConfig, RateTuple<u32>) {
    (DycConfig::new(5, 4, 3).unwrap(), RateTuple::from_array([0, 2, 2, 1, 0, 2]))
}

fn rel_err(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        (got - want).abs() / got.abs().max(want.abs())
    }
}

fn random_config(rng: &mut ChaCha8Rng) -> ChannelConfig {
    let mut h: Vec<f64> = (0..3)
        .map(|_| {
            let mag = 10f64.powf(rng.random_range(-1.0..1.0));
            if rng.random_bool(0.5) { mag } else { -mag }
        })
        .collect();
    h.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
    ChannelConfig::new(h[0], h[1], h[2], 10f64.powf(rng.random_range(-1.0..4.0))).unwrap()
}

fn toy_reproduction() -> Outcome {
    let start = Instant::now();
    let (cfg, rates) = toy();
    let plan = match plan_rates(&cfg, &rates) {
        Ok(p) => p,
        Err(e) => return outcome(false, format!("planner rejected the toy tuple: {e}")),
    };
    let layout_ok = plan.check().is_ok()
        && plan.downlink_levels_for(FlowClass::Bi) == [1]
        && plan.downlink_levels_for(FlowClass::Cyclic) == [3, 4]
        && plan.downlink_levels_for(FlowClass::Uni) == [2, 5];
    let report = verify_plan_with(Execution::default(), &plan, 0, 0).unwrap();
    let elapsed = start.elapsed();
    let pass = layout_ok
        && plan.uplink_levels_used() == 5
        && plan.downlink_levels_used() == 5
        && report.exhaustive
        && report.patterns == 128
        && report.passed
        && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "levels up/down {}/{}, {} patterns, {} failures, {elapsed:.2?}",
            plan.uplink_levels_used(),
            plan.downlink_levels_used(),
            report.patterns,
            report.failures
        ),
    )
}

fn cyclic_necessity() -> Outcome {
    let start = Instant::now();
    let (cfg, rates) = toy();
    let without = search_plan(&cfg, &rates, Strategies::NO_CYCLIC);
    // the canonical decomposition with its cycle replaced by uni bits
    let mut d = decompose_flows(&rates);
    let cycle = d.c132;
    d.c132 = 0;
    d.u13 += cycle;
    d.u32 += cycle;
    d.u21 += cycle;
    let converted = plan_levels(&cfg, &d).is_err() && search_levels(&cfg, &d).is_none();
    let with = search_plan(&cfg, &rates, Strategies::ALL).is_some();
    let elapsed = start.elapsed();
    outcome(
        without.is_none() && converted && with && elapsed < Duration::from_secs(10),
        format!("bi+uni search feasible: {}, with cyclic: {with}, {elapsed:.2?}", without.is_some()),
    )
}

fn dyc_oracle() -> Outcome {
    let start = Instant::now();
    let mut configs = 0;
    let (mut accepted, mut patterns, mut failures) = (0u64, 0u64, 0u64);
    for n1 in 0..=3 {
        for n2 in 0..=n1 {
            for n3 in 0..=n2 {
                configs += 1;
                let cfg = DycConfig::new(n1, n2, n3).unwrap();
                // with n1 <= 3 no accepted tuple has a component above 3
                for k in 0..4u32.pow(6) {
                    let rates = RateTuple::from_array(std::array::from_fn(|i| (k >> (2 * i)) & 3));
                    let Ok(plan) = plan_rates(&cfg, &rates) else { continue };
                    let report = verify_plan_with(Execution::Sequential, &plan, 0, 0).unwrap();
                    accepted += 1;
                    patterns += report.patterns;
                    failures += report.failures + u64::from(!report.exhaustive);
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && elapsed < Duration::from_secs(60),
        format!("{configs} configs, {accepted} accepted tuples, {patterns} patterns, {failures} failures, {elapsed:.2?}"),
    )
}

fn formula_fidelity() -> Outcome {
    let golden: BTreeMap<String, BTreeMap<String, String>> =
        serde_json::from_str(include_str!("golden/fidelity.json")).unwrap();
    let mut worst = 0.0f64;
    let mut compared = 0;
    let mut problems = Vec::new();
    for case in pinned_cases() {
        let cfg = case.config;
        let up = uplink_bounds(&cfg, &case.allocation.coupled(&cfg).unwrap());
        let down = downlink_bounds(&cfg, &case.allocation.downlink);
        let mut got: BTreeMap<&str, f64> = up.constraints().into_iter().chain(down.constraints()).collect();
        got.insert("sigma_sq", up.sigma_sq);
        got.insert("sigma_r1_sq", down.sigma_r1_sq);
        got.insert("sigma_r2_sq", down.sigma_r2_sq);
        let want = &golden[case.name];
        if want.len() != got.len() {
            problems.push(format!("{}: {} reference values, {} evaluated", case.name, want.len(), got.len()));
        }
        for (name, value) in &got {
            let Some(reference) = want.get(*name) else {
                problems.push(format!("{}: no reference for {name}", case.name));
                continue;
            };
            let err = rel_err(*value, reference.parse().unwrap());
            worst = worst.max(err);
            compared += 1;
            if err > 1e-12 {
                problems.push(format!("{}.{name}: rel err {err:.2e}", case.name));
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{compared} values (26 constraints + 3 noise terms per config), max rel err {worst:.2e}{}",
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join(", ")) }
        ),
    )
}

fn containment() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (configs, per_config) = (25, 48);
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    let (mut p_lo, mut p_hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..configs {
        let cfg = random_config(&mut rng);
        p_lo = p_lo.min(cfg.p);
        p_hi = p_hi.max(cfg.p);
        for _ in 0..per_config {
            let a = Allocation::random(&cfg, &mut rng);
            let r = achievable_point(&cfg, &a.coupled(&cfg).unwrap(), &a.downlink).unwrap();
            let m = proxy_contains(&cfg, &r);
            violations += m.violated().len();
            min_slack = m.inequalities.iter().map(|c| c.slack).fold(min_slack, f64::min);
        }
    }
    outcome(
        violations == 0,
        format!(
            "{} allocations over {configs} configs (P in [{p_lo:.3}, {p_hi:.0}]), {violations} violations, min slack {min_slack:.3e}",
            configs * per_config
        ),
    )
}

fn scale_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    let mut compared = 0;
    for _ in 0..100 {
        let cfg = random_config(&mut rng);
        let a = Allocation::random(&cfg, &mut rng);
        let values = |cfg: &ChannelConfig, a: &Allocation| -> Vec<f64> {
            let up = uplink_bounds(cfg, &a.coupled(cfg).unwrap());
            let down = downlink_bounds(cfg, &a.downlink);
            let mut v: Vec<f64> = up.constraints().iter().chain(down.constraints().iter()).map(|c| c.1).collect();
            v.extend([up.sigma_sq, down.sigma_r1_sq, down.sigma_r2_sq]);
            v
        };
        let base = values(&cfg, &a);
        for lambda in [0.1, 2.0, 10.0] {
            let l2 = lambda * lambda;
            let scaled_cfg = ChannelConfig::new(lambda * cfg.h1, lambda * cfg.h2, lambda * cfg.h3, cfg.p / l2).unwrap();
            let b = Allocation {
                uplink: FreeUplinkPowers::from_slice(&a.uplink.to_vec().iter().map(|v| v / l2).collect::<Vec<_>>()),
                downlink: DownlinkPowers::from_slice(&a.downlink.to_vec().iter().map(|v| v / l2).collect::<Vec<_>>()),
            };
            for (x, y) in base.iter().zip(values(&scaled_cfg, &b)) {
                worst = worst.max(rel_err(*x, y));
                compared += 1;
            }
        }
    }
    outcome(worst <= 1e-12, format!("300 transformed pairs, {compared} values, max rel err {worst:.2e}"))
}

fn lattice_algebra() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checks = 0u64;
    let mut failures = Vec::new();
    for q in [2u64, 4, 8, 16] {
        let c = NestedLatticeCode::new(1, 1.0, q).unwrap();
        let scaled = c.scaled(1.0 / 2.0).unwrap();
        for ma in 0..q {
            for mb in 0..q {
                let (la, lb) = (c.lattice_point(ma).unwrap(), c.lattice_point(mb).unwrap());
                let truth = c.sum_mod(&la, &lb).unwrap();
                for dithered in [false, true] {
                    let (da, db) = if dithered {
                        (Dither::random(&c, &mut rng), Dither::random(&c, &mut rng))
                    } else {
                        (Dither::zero(&c), Dither::zero(&c))
                    };
                    let y = c.encode(ma, &da).unwrap()[0] + c.encode(mb, &db).unwrap()[0];
                    if c.relay_decode_sum(&[y], &da, &db, 0.0).unwrap() != truth {
                        failures.push(format!("q={q} sum ({ma},{mb})"));
                    }
                }
                if c.extract_partner(&truth, &la).unwrap() != lb || c.extract_partner(&truth, &lb).unwrap() != la {
                    failures.push(format!("q={q} extract ({ma},{mb})"));
                }
                // h = (2, 1): user 1 sends on the code scaled by h2/h1
                let v = 2.0 * scaled.lattice_point(ma).unwrap()[0] + lb[0];
                let reduced = c.reduce(&[v]);
                if c.index_of(&reduced).ok() != Some((ma + mb) % q) {
                    failures.push(format!("q={q} alignment ({ma},{mb})"));
                }
                checks += 4;
            }
            if 2.0 * scaled.lattice_point(ma).unwrap()[0] != c.lattice_point(ma).unwrap()[0] {
                failures.push(format!("q={q} point set {ma}"));
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < Duration::from_secs(5),
        format!("{checks} exact checks, {} failures, {elapsed:.2?}{}", failures.len(), failures.first().map(|f| format!(" first: {f}")).unwrap_or_default()),
    )
}

fn lattice_monte_carlo() -> Outcome {
    let trials = 10_000;
    let mut grid: Vec<f64> = (0..=16).map(|k| -5.0 + 2.5 * k as f64).collect();
    grid.push(f64::INFINITY);
    let mut notes = Vec::new();
    let mut pass = true;
    for q in [2u64, 4, 8, 16] {
        let c = NestedLatticeCode::new(1, 1.0, q).unwrap();
        let pts = monte_carlo_sum_decode(&c, &grid, trials, 1000 + q);
        let mut worst_rise = f64::NEG_INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let (a, b) = (pts[i].error_rate, pts[j].error_rate);
                let sd = ((a * (1.0 - a) + b * (1.0 - b)) / trials as f64).sqrt();
                // rise measured in units of the allowed 2-sigma band
                let rise = if sd > 0.0 { (b - a) / (2.0 * sd) } else if b > a { f64::INFINITY } else { 0.0 };
                worst_rise = worst_rise.max(rise);
            }
        }
        let noiseless = pts.last().unwrap().errors;
        pass &= worst_rise <= 1.0 && noiseless == 0;
        notes.push(format!("q={q}: {:.3}->{:.4}, noiseless errors {noiseless}", pts[0].error_rate, pts[pts.len() - 2].error_rate));
    }
    outcome(
        pass,
        format!("{trials} trials/point, {} points; {} (n=1: threshold trend only)", grid.len(), notes.join("; ")),
    )
}

fn corollary_arithmetic() -> Outcome {
    let boundary = ChannelConfig::new(3.0, 3.0, 1.0, 15.0).unwrap();
    let boundary2 = ChannelConfig::new(2.5, -2.0, 2.0, 3.75).unwrap();
    let zero_rhs = corollary_rhs(&boundary)[0] == 0.0 && corollary_rhs(&boundary2)[0] == 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let cfg = random_config(&mut rng);
        let (proxy, rhs) = (outer_bound_proxy(&cfg), corollary_rhs(&cfg));
        for k in 0..8 {
            worst = worst.max(((proxy[k] - rhs[k]) - GAP_CONSTANTS[k]).abs());
        }
    }
    let constants_ok = GAP_CONSTANTS == [2.0, 2.0, 3.0, 3.0, 3.0, 3.0, 3.5, 3.5];
    outcome(
        zero_rhs && constants_ok && worst <= 1e-12,
        format!("first RHS at h3^2 P = 15: {}, proxy - RHS off by at most {worst:.1e} over 1000 configs", corollary_rhs(&boundary)[0]),
    )
}

fn optimizer_sanity() -> Outcome {
    let cfg = ChannelConfig::new(1.0, 1.0, 1.0, 100.0).unwrap();
    let weights = [1.0; 6];
    // baseline first: every user splits its power over its two bi streams,
    // the relay splits over the three bi sums
    let base = Allocation {
        uplink: FreeUplinkPowers { p21b: 50.0, p31b: 50.0, p32b: 50.0, ..Default::default() },
        downlink: DownlinkPowers { r21: 100.0 / 3.0, r31: 100.0 / 3.0, r32: 100.0 / 3.0, ..Default::default() },
    };
    let baseline = achievable_point(&cfg, &base.coupled(&cfg).unwrap(), &base.downlink).unwrap().weighted_sum(&weights);
    let opts = OptimizerOptions { budget: 10_000, seed: 1, ..Default::default() };
    let best = maximize_objective(&cfg, &weights, &opts).unwrap();
    outcome(
        best.objective >= baseline && best.evaluations <= opts.budget,
        format!("objective {:.6} vs baseline {baseline:.6}, {} evaluations", best.objective, best.evaluations),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("toy reproduction", toy_reproduction),
        ("cyclic necessity", cyclic_necessity),
        ("DYC oracle equivalence", dyc_oracle),
        ("formula fidelity", formula_fidelity),
        ("containment", containment),
        ("scale invariance", scale_invariance),
        ("lattice algebra", lattice_algebra),
        ("lattice Monte Carlo", lattice_monte_carlo),
        ("corollary arithmetic", corollary_arithmetic),
        ("optimizer sanity", optimizer_sanity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += usize::from(!o.pass);
        println!("criterion {:>2} {:<24} {}  {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
