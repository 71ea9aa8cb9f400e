//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use leadsel_core::harness::{
    check_message_bounds, message_bound, rho_rule, run_benchmark, ExperimentConfig, RhoRule,
    TIMING_COLUMNS,
};
use leadsel_core::model::{check_constraints, generate_instance, Capacities, Instance, Mode, UeId};
use leadsel_core::optimal::{
    brute_force_oracle, count_configs_distributed_bound, count_configs_exhaustive,
    solve_exhaustive, stirling2, SolverOptions,
};
use leadsel_core::protocol::{run_episode, EdgeServerPolicy, ProtocolConfig, Scenario, Transport};
use leadsel_core::rng::derive_seed;
use leadsel_core::{ProtocolError, Score, Threshold};

type Outcome = Result<String, String>;

fn rho(v: i64) -> Threshold {
    Threshold::from_int(v).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let mut mismatches = Vec::new();
    for n in 3..=6usize {
        for i in 0..200u64 {
            let inst = generate_instance(n, derive_seed(101, &[n as u64, i]), None).unwrap();
            let a = solve_exhaustive(&inst, Threshold::ZERO, &opts).unwrap();
            let b = brute_force_oracle(&inst, Threshold::ZERO, &opts).unwrap();
            if a.utility != b.utility {
                mismatches.push((n, i, a.utility, b.utility));
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        mismatches.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "800 instances, {} mismatches, {:.1}s",
            mismatches.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let cfg = ProtocolConfig::new(rho(5));
    let (mut checked, mut marginal, mut failures) = (0, 0, 0);
    for s in 0..1000u64 {
        let inst = generate_instance(10, derive_seed(202, &[s]), None).unwrap();
        let out = run_episode(&inst, &cfg, s).unwrap();
        if out.scenario != Scenario::None {
            marginal += 1;
            continue;
        }
        let rep = check_constraints(&inst, &out.assignment, cfg.rho, None, Mode::Relaxed).unwrap();
        checked += 1;
        if !(rep.c1_ok && rep.c2_ok && rep.c3_ok) {
            failures += 1;
        }
    }
    let mut cap_failures = 0;
    for s in 0..1000u64 {
        let inst = generate_instance(10, derive_seed(203, &[s]), None).unwrap();
        let limit = 1 + (s % 3) as usize;
        let caps = Capacities::uniform(&inst, limit);
        let cfg = ProtocolConfig {
            caps: Some(caps.clone()),
            ..ProtocolConfig::new(rho((s % 10) as i64))
        };
        let out = run_episode(&inst, &cfg, s).unwrap();
        let rep =
            check_constraints(&inst, &out.assignment, cfg.rho, Some(&caps), Mode::Relaxed).unwrap();
        if !rep.capacity_ok {
            cap_failures += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        failures == 0 && cap_failures == 0 && elapsed < Duration::from_secs(60),
        format!(
            "{checked} non-marginal episodes ({marginal} marginal skipped), {failures} C1-C3 failures; \
             1000 capacitated episodes, {cap_failures} capacity failures; {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn within(v: f64, target: f64, rel: f64) -> bool {
    (v - target).abs() <= target * rel
}

fn criteria_3_and_4() -> (Outcome, Outcome) {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        n_values: vec![7, 10],
        instances_per_n: 100,
        instances_override: BTreeMap::new(),
        master_seed: 303,
        timing: false,
        ..ExperimentConfig::default()
    };
    let report = run_benchmark(&cfg).unwrap();
    let elapsed = start.elapsed();
    let t = Transport::Broadcast;

    let r10_5 = report.row(t, 10, rho(5)).unwrap();
    let r10_9 = report.row(t, 10, rho(9)).unwrap();
    let opt10 = r10_5.mean_util_opt;
    let opt7 = report.row(t, 7, rho(0)).unwrap().mean_util_opt;
    let best7 = report
        .rows_for(t)
        .filter(|r| r.n == 7)
        .max_by(|a, b| a.mean_util_dist.total_cmp(&b.mean_util_dist))
        .unwrap();
    let c3 = check(
        within(opt10, 84.4, 0.08)
            && (-16.0..=-4.0).contains(&r10_5.gap_pct)
            && r10_9.gap_pct <= -40.0
            && within(opt7, 55.7, 0.08)
            && (-19.0..=-7.0).contains(&best7.gap_pct)
            && elapsed < Duration::from_secs(600),
        format!(
            "N=10 opt {opt10:.2} (84.4±8%), gap ρ=5 {:.2}% [−16,−4], gap ρ=9 {:.2}% (≤−40); \
             N=7 opt {opt7:.2} (55.7±8%), best gap {:.2}% at ρ={} [−19,−7]; {:.1}s",
            r10_5.gap_pct,
            r10_9.gap_pct,
            best7.gap_pct,
            best7.rho,
            elapsed.as_secs_f64()
        ),
    );

    let opt = &report.histogram("optimal", 10).unwrap().stats;
    let dist = &report.histogram("distributed", 10).unwrap().stats;
    let c4 = check(
        (opt.mean() - 3.47).abs() <= 0.4
            && opt.variance() < dist.variance()
            && (dist.mean() - 2.1).abs() <= 0.5,
        format!(
            "optimal mean {:.3} (3.47±0.4) var {:.3}; distributed mean {:.3} (2.1±0.5) var {:.3}",
            opt.mean(),
            opt.variance(),
            dist.mean(),
            dist.variance()
        ),
    );
    (c3, c4)
}

/// Counts assignments in which every UE leads or follows a leader and every
/// leader has a follower, by enumerating each UE's choice of target (itself
/// meaning "lead").
fn brute_count(n: usize) -> u64 {
    let mut choice = vec![0usize; n];
    let mut count = 0;
    loop {
        let leader = |i: usize, c: &[usize]| c[i] == i;
        let valid = (0..n).all(|i| leader(i, &choice) || leader(choice[i], &choice))
            && (0..n)
                .filter(|&i| leader(i, &choice))
                .all(|l| (0..n).any(|j| j != l && choice[j] == l));
        count += u64::from(valid);
        let mut k = 0;
        while k < n {
            choice[k] += 1;
            if choice[k] < n {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == n {
            return count;
        }
    }
}

/// Set partitions of `n` items into exactly `k` blocks, by restricted growth
/// strings.
fn partitions(n: usize, k: usize) -> u64 {
    fn go(i: usize, n: usize, used: usize, k: usize) -> u64 {
        if i == n {
            return u64::from(used == k);
        }
        (0..=used.min(k.saturating_sub(1)))
            .map(|b| go(i + 1, n, used.max(b + 1), k))
            .sum()
    }
    if n == 0 {
        return u64::from(k == 0);
    }
    go(0, n, 0, k)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for n in 2..=7 {
        let brute = brute_count(n);
        if count_configs_exhaustive(n).0 != BigUint::from(brute) {
            bad.push(format!("exhaustive({n})"));
        }
    }
    for n in 2..=20 {
        for l in 1..n {
            if count_configs_distributed_bound(n, l) > count_configs_exhaustive(n) {
                bad.push(format!("bound({n},{l})"));
            }
        }
    }
    for n in 0..=8 {
        for k in 0..=n {
            if stirling2(n, k).0 != BigUint::from(partitions(n, k)) {
                bad.push(format!("S({n},{k})"));
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        bad.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "exhaustive count n=2..7, bound dominance n≤20, Stirling n≤8; {} mismatches {:?}; {:.1}s",
            bad.len(),
            bad,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut worst: BTreeMap<(usize, Transport), (usize, usize)> = BTreeMap::new();
    let mut violations = 0;
    for n in [7usize, 10] {
        for transport in [Transport::Broadcast, Transport::P2p] {
            for s in 0..1000u64 {
                let inst = generate_instance(n, derive_seed(606, &[n as u64, s]), None).unwrap();
                let cfg = ProtocolConfig {
                    transport,
                    ..ProtocolConfig::new(rho((s % 10) as i64))
                };
                let out = run_episode(&inst, &cfg, s).unwrap();
                let l = out.candidate_leaders;
                if !check_message_bounds(&out, n, l, transport) {
                    violations += 1;
                }
                let slack = message_bound(n, l, transport) as i64 - out.counts.total as i64;
                let e = worst.entry((n, transport)).or_insert((usize::MAX, 0));
                e.0 = e.0.min(slack.max(0) as usize);
                e.1 = e.1.max(out.counts.total);
            }
        }
    }
    let elapsed = start.elapsed();
    let summary: Vec<String> = worst
        .iter()
        .map(|((n, t), (slack, max))| format!("N={n} {t}: max {max}, min slack {slack}"))
        .collect();
    check(
        violations == 0 && elapsed < Duration::from_secs(60),
        format!(
            "4000 episodes, {violations} violations; {}; {:.1}s",
            summary.join("; "),
            elapsed.as_secs_f64()
        ),
    )
}

/// Mean wall-clock of one episode, from a batch large enough for the clock.
fn episode_time(inst: &Instance, cfg: &ProtocolConfig, seed: u64) -> f64 {
    let reps = 200;
    let mut samples = [0.0; 3];
    for s in &mut samples {
        let start = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(run_episode(inst, cfg, seed).unwrap());
        }
        *s = start.elapsed().as_secs_f64() / reps as f64;
    }
    samples.sort_by(f64::total_cmp);
    samples[1]
}

fn criterion_7() -> Outcome {
    let opts = SolverOptions::default();
    let (mut t_opt, mut t_dist) = (0.0, 0.0);
    let mut slowest = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    for i in 0..30u64 {
        let inst = generate_instance(12, derive_seed(707, &[i]), None).unwrap();
        let cfg = ProtocolConfig::new(rho_rule(&inst, RhoRule::Mean));
        let start = Instant::now();
        std::hint::black_box(solve_exhaustive(&inst, Threshold::ZERO, &opts).unwrap());
        let o = start.elapsed().as_secs_f64();
        let d = episode_time(&inst, &cfg, i);
        t_opt += o;
        t_dist += d;
        slowest = slowest.max(o);
        min_ratio = min_ratio.min(o / d);
    }
    let speedup = t_opt / t_dist;
    check(
        speedup >= 1e4 && slowest < 60.0,
        format!(
            "N=12, 30 instances: mean exhaustive {:.1} ms (slowest {:.1} ms), mean episode {:.2} µs, \
             speedup {speedup:.3e} (≥1e4); per-instance minimum {min_ratio:.3e}",
            t_opt / 30.0 * 1e3,
            slowest * 1e3,
            t_dist / 30.0 * 1e6
        ),
    )
}

fn strip_timing(csv_text: &str) -> String {
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let keep: Vec<usize> = (0..header.len())
        .filter(|&i| !TIMING_COLUMNS.contains(&header[i]))
        .collect();
    std::iter::once(header.join(","))
        .chain(lines.map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            keep.iter().map(|&i| cells[i]).collect::<Vec<_>>().join(",")
        }))
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_8() -> Outcome {
    let cfg = ExperimentConfig {
        n_values: vec![6, 7],
        instances_per_n: 10,
        instances_override: BTreeMap::new(),
        modes: vec![Transport::Broadcast, Transport::P2p],
        master_seed: 808,
        timing: true,
        ..ExperimentConfig::default()
    };
    let csv = |t| {
        let report = run_benchmark(&cfg).unwrap();
        let mut buf = Vec::new();
        report.write_csv(t, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let mut same = true;
    for t in [Transport::Broadcast, Transport::P2p] {
        same &= strip_timing(&csv(t)) == strip_timing(&csv(t));
    }
    check(
        same,
        "two runs of a timed 2x10-instance grid, CSV equal outside timing columns".into(),
    )
}

fn edge_cfg(r: i64, edge: bool) -> ProtocolConfig {
    ProtocolConfig {
        edge_server: if edge {
            EdgeServerPolicy::enabled_default()
        } else {
            EdgeServerPolicy::Disabled
        },
        ..ProtocolConfig::new(rho(r))
    }
}

fn all_under_edge(inst: &Instance, out: &leadsel_core::EpisodeOutcome) -> bool {
    out.assignment.leaders == BTreeSet::from([UeId::EDGE])
        && inst
            .ues()
            .all(|m| out.assignment.follows.get(&m) == Some(&UeId::EDGE))
}

fn criterion_9() -> Outcome {
    let ones = |n: usize| -> Vec<Vec<i64>> {
        (0..n)
            .map(|i| (0..n).map(|j| i64::from(i != j)).collect())
            .collect()
    };
    let mut lines = Vec::new();
    let mut ok = true;

    let marginal: [(&str, Instance, Scenario, bool); 4] = [
        (
            "Scenario 1",
            Instance::from_ints(&[8, 9, 7], &ones(3)).unwrap(),
            Scenario::Scenario1,
            false,
        ),
        (
            "Scenario 2",
            Instance::from_ints(&[8, 2, 1], &[[0, 3, 3], [0, 0, 5], [0, 5, 0]]).unwrap(),
            Scenario::Scenario2,
            false,
        ),
        (
            "Scenario 3",
            Instance::from_ints(&[3, 2, 1], &ones(3)).unwrap(),
            Scenario::Scenario3,
            false,
        ),
        (
            "Case 1",
            Instance::from_ints(&[0, 0, 0], &ones(3)).unwrap(),
            Scenario::Scenario3,
            true,
        ),
    ];
    for (name, inst, want, case1) in &marginal {
        let on = run_episode(inst, &edge_cfg(4, true), 1).unwrap();
        let off = run_episode(inst, &edge_cfg(4, false), 1).unwrap();
        let pass = on.scenario == *want
            && off.scenario == *want
            && on.feasibility.case1 == *case1
            && all_under_edge(inst, &on)
            && on.utility == Score::from_int(10 + inst.n() as i64)
            && off.assignment.isolated.len() == inst.n()
            && off.utility == Score::from_int(0)
            && off.fallback_error == Some(ProtocolError::EdgeServerUnavailable(inst.n()));
        ok &= pass;
        lines.push(format!("{name} {}", if pass { "ok" } else { "wrong" }));
    }

    // UE 4 refuses everyone and cannot lead.
    let case2 = Instance::from_ints(
        &[7, 2, 5, 1],
        &[[0, 3, 8, 1], [6, 0, 2, 1], [4, 9, 0, 1], [0, 0, 0, 0]],
    )
    .unwrap();
    let on = run_episode(&case2, &edge_cfg(4, true), 1).unwrap();
    let off = run_episode(&case2, &edge_cfg(4, false), 1).unwrap();
    let pass = on.feasibility.case2_isolated == BTreeSet::from([UeId(4)])
        && on.scenario == Scenario::None
        && on.assignment.isolated.is_empty()
        && on.assignment.follows.get(&UeId(4)) == Some(&UeId::EDGE)
        && off.assignment.isolated == BTreeSet::from([UeId(4)])
        && off.utility == Score::from_int(17)
        && off.fallback_error == Some(ProtocolError::EdgeServerUnavailable(1));
    ok &= pass;
    lines.push(format!("Case 2 {}", if pass { "ok" } else { "wrong" }));

    check(ok, lines.join(", "))
}

fn main() {
    let started = Instant::now();
    let (c3, c4) = criteria_3_and_4();
    let results = [
        ("1 oracle equivalence", criterion_1()),
        ("2 constraint satisfaction", criterion_2()),
        ("3 utility reproduction", c3),
        ("4 leader-set size moments", c4),
        ("5 configuration counts", criterion_5()),
        ("6 message bounds", criterion_6()),
        ("7 speedup", criterion_7()),
        ("8 report determinism", criterion_8()),
        ("9 marginal scenarios", criterion_9()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS criterion {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
