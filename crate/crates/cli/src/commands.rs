use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use leadsel_core::harness::{rho_rule, run_benchmark, ExperimentConfig, RhoRule};
use leadsel_core::model::{
    check_constraints, feasibility_scan, generate_instance, Capacities, EdgeServerSpec, Instance,
    Mode, UeId,
};
use leadsel_core::optimal::{
    count_configs_distributed_bound, count_configs_exhaustive, solve_exhaustive, SolverOptions,
};
use leadsel_core::protocol::{
    run_episode, write_jsonl, DeliveryOrder, EdgeServerPolicy, IncentivePolicy, ProtocolConfig,
    Transport,
};
use leadsel_core::{ModelError, Score, SolveError, Threshold};

use crate::args::{
    parse_list, BenchArgs, CountArgs, DeliveryArg, GenArgs, ModeArg, RhoRuleArg, SimulateArgs,
    SolveArgs, TransportArg,
};
use crate::error::CliError;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn print_json(v: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| CliError::io("<stdout>", e))
}

fn threshold(v: f64) -> Result<Threshold, CliError> {
    Threshold::from_f64(v).map_err(usage)
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    Instance::load(path)
        .map_err(|e| CliError::io(path, e))?
        .map_err(|e| CliError::Input {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}

/// Reads a follower-limit file: either one integer for every node or an
/// object mapping UE ids to limits.
fn load_caps(path: &Path, inst: &Instance) -> Result<Capacities, CliError> {
    let bad = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    match value {
        Value::Number(n) => {
            let k = n
                .as_u64()
                .ok_or_else(|| bad("limit must be a non-negative integer".into()))?;
            Ok(Capacities::uniform(inst, k as usize))
        }
        Value::Object(map) => {
            let mut limits = std::collections::BTreeMap::new();
            for (key, v) in map {
                let id: u32 = key
                    .parse()
                    .map_err(|_| bad(format!("`{key}` is not a UE id")))?;
                if !inst.contains(UeId(id)) {
                    return Err(bad(format!("UE {id} is not part of the instance")));
                }
                let k = v.as_u64().ok_or_else(|| {
                    bad(format!("limit of UE {id} must be a non-negative integer"))
                })?;
                limits.insert(UeId(id), k as usize);
            }
            Ok(Capacities::new(limits))
        }
        _ => Err(bad("expected an integer or an object of limits".into())),
    }
}

fn ids(set: impl IntoIterator<Item = UeId>) -> String {
    set.into_iter()
        .map(|u| u.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn gen(a: &GenArgs) -> Result<(), CliError> {
    let n = a.n as usize;
    let spec = if a.edge_server {
        Some(EdgeServerSpec {
            lii0: Score::from_f64(a.edge_lii).map_err(usage)?,
            lxi_to_edge: vec![Score::from_f64(a.edge_lxi).map_err(usage)?; n],
        })
    } else {
        None
    };
    let inst = generate_instance(n, a.seed, spec.as_ref()).map_err(usage)?;
    inst.validate()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let text = inst.to_json_pretty() + "\n";
    let target = match &a.out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| CliError::io(path, e))?;
            path.display().to_string()
        }
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io("<stdout>", e))?;
            "stdout".to_string()
        }
    };
    eprintln!(
        "{target}: n = {}, edge server: {}, scores in [0, 10], zero diagonal: ok",
        inst.n(),
        if inst.has_edge_server() { "yes" } else { "no" }
    );
    Ok(())
}

pub fn solve(a: &SolveArgs) -> Result<(), CliError> {
    let inst = load_instance(&a.instance)?;
    let rho = threshold(a.rho)?;
    let caps = a.caps.as_deref().map(|p| load_caps(p, &inst)).transpose()?;
    let mode = match a.mode {
        ModeArg::Strict => Mode::Strict,
        ModeArg::Relaxed => Mode::Relaxed,
    };
    let opts = SolverOptions {
        mode,
        caps: caps.clone(),
        max_n: a.max_n,
        prune: a.prune,
    };
    match solve_exhaustive(&inst, rho, &opts) {
        Ok(sol) => {
            let report = check_constraints(&inst, &sol.assignment, rho, caps.as_ref(), mode)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            let mut v = serde_json::to_value(sol.to_record()).expect("record serializes");
            v["mode"] = json!(mode);
            v["rho"] = json!(rho);
            v["report"] = serde_json::to_value(report).expect("report serializes");
            print_json(&v)
        }
        Err(SolveError::Infeasible) => {
            let scan = feasibility_scan(&inst, rho);
            let mut parts = Vec::new();
            if scan.case1 {
                parts.push("Case 1: every LII is 0, so no UE can lead".to_string());
            }
            if !scan.case2_isolated.is_empty() {
                parts.push(format!(
                    "Case 2: UE {} can neither lead (LII <= rho) nor follow anyone",
                    ids(scan.case2_isolated.iter().copied())
                ));
            }
            if parts.is_empty() {
                parts.push("no leader set lets every UE lead or follow".to_string());
            }
            Err(CliError::Infeasible {
                summary: parts.join("; "),
                diagnosis: serde_json::to_value(&scan).expect("report serializes"),
            })
        }
        Err(SolveError::LimitExceeded { n, limit }) => Err(CliError::Usage(format!(
            "instance has {n} UEs, above --max-n {limit}"
        ))),
        Err(SolveError::Model(e)) => Err(CliError::Input {
            path: a.instance.clone(),
            message: e.to_string(),
        }),
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let inst = load_instance(&a.instance)?;
    let rho = match (a.rho, a.rho_rule) {
        (Some(r), _) => threshold(r)?,
        (None, Some(RhoRuleArg::Mean)) => rho_rule(&inst, RhoRule::Mean),
        (None, Some(RhoRuleArg::HalfN)) => rho_rule(&inst, RhoRule::HalfN),
        (None, None) => return Err(usage("one of --rho or --rho-rule is required")),
    };
    let incentive = match (a.incentive_delta, a.incentive_prob) {
        (Some(d), Some(p)) => IncentivePolicy::Boost {
            delta: Score::from_f64(d).map_err(usage)?,
            accept_prob: p,
        },
        _ => IncentivePolicy::None,
    };
    let cfg = ProtocolConfig {
        rho,
        transport: transport(a.transport),
        caps: a.caps.as_deref().map(|p| load_caps(p, &inst)).transpose()?,
        edge_server: if a.edge_server {
            EdgeServerPolicy::enabled_default()
        } else {
            EdgeServerPolicy::Disabled
        },
        incentive,
        delivery: match a.delivery {
            DeliveryArg::Random => DeliveryOrder::Random,
            DeliveryArg::Ascending => DeliveryOrder::Ascending,
        },
        ..ProtocolConfig::default()
    };
    cfg.validate().map_err(usage)?;
    let out = run_episode(&inst, &cfg, a.seed).map_err(|e| match e {
        leadsel_core::ProtocolError::Model(m) => usage(m),
        other => CliError::Internal(other.to_string()),
    })?;
    if let Some(path) = &a.log {
        let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        write_jsonl(&out.messages, std::io::BufWriter::new(file))
            .map_err(|e| CliError::io(path, e))?;
    }
    let mut v = serde_json::to_value(&out).expect("outcome serializes");
    v["rho"] = json!(rho);
    print_json(&v)?;
    if a.strict_outcome && out.all_isolated() {
        return Err(CliError::Degenerate(
            "episode ended with every UE isolated".into(),
        ));
    }
    Ok(())
}

fn transport(t: TransportArg) -> Transport {
    match t {
        TransportArg::Broadcast => Transport::Broadcast,
        TransportArg::P2p => Transport::P2p,
    }
}

pub fn bench(a: &BenchArgs) -> Result<(), CliError> {
    let n_values = parse_list::<usize>(&a.n).map_err(usage)?;
    let rho_values = parse_list::<f64>(&a.rho)
        .map_err(usage)?
        .into_iter()
        .map(threshold)
        .collect::<Result<Vec<_>, _>>()?;
    let mut overrides = std::collections::BTreeMap::new();
    for item in &a.instances_at {
        let (n, k) = item
            .split_once('=')
            .and_then(|(n, k)| Some((n.trim().parse().ok()?, k.trim().parse().ok()?)))
            .ok_or_else(|| usage(format!("--instances-at expects N=COUNT, got `{item}`")))?;
        overrides.insert(n, k);
    }
    let mut modes: Vec<Transport> = a.transport.iter().map(|&t| transport(t)).collect();
    modes.dedup();
    let cfg = ExperimentConfig {
        n_values,
        instances_per_n: a.instances as usize,
        instances_override: overrides,
        rho_values,
        master_seed: a.seed,
        modes,
        caps: a.caps,
        optimal_rho: threshold(a.optimal_rho)?,
        jobs: a.jobs as usize,
        timing: !a.no_timing,
    };
    cfg.validate().map_err(usage)?;
    if let Some(&n) = cfg
        .n_values
        .iter()
        .find(|&&n| n > leadsel_core::optimal::DEFAULT_MAX_N)
    {
        return Err(usage(format!(
            "--n {n} is above the exact solver limit of {}",
            leadsel_core::optimal::DEFAULT_MAX_N
        )));
    }
    let report = run_benchmark(&cfg).map_err(|e| CliError::Internal(e.to_string()))?;
    let files = report.write_to_dir(&a.out).map_err(|e| match e {
        leadsel_core::HarnessError::Io(io) => CliError::io(&a.out, io),
        other => CliError::Internal(other.to_string()),
    })?;
    let mut out = std::io::stdout().lock();
    for f in files {
        writeln!(out, "{}", f.display()).map_err(|e| CliError::io("<stdout>", e))?;
    }
    Ok(())
}

pub fn count(a: &CountArgs) -> Result<(), CliError> {
    let n = a.n as usize;
    let mut v = json!({
        "n": n,
        "exhaustive": count_configs_exhaustive(n),
    });
    if let Some(l) = a.l {
        let l = l as usize;
        if l > n {
            return Err(usage(format!("--l {l} exceeds --n {n}")));
        }
        v["l"] = json!(l);
        v["distributed_bound"] = json!(count_configs_distributed_bound(n, l));
    }
    print_json(&v)
}

// Keeps error conversions in one place for model failures raised while
// building configs.
impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}
