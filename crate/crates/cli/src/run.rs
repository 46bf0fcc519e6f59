//! Job execution.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use blocknorm_core::multilinear::{sup_norm, MultiOperator};
use blocknorm_core::rng::{derive_seed, stream, SearchRng};
use blocknorm_core::sampling::{random_linear_map, random_operator, random_sequence_upto, random_vector};
use blocknorm_core::seqnorms::{ClassSpec, VecSequence};
use blocknorm_core::spaces::{FiniteLpSpace, Vector};
use blocknorm_core::summing::{check_compatibility, summing_norm};
use blocknorm_core::theorems::{
    check_coincidence, check_diagonal_reduction, check_finite_type_norm, check_ideal_inequality,
    check_multiple_formula, check_norm_domination, check_partition_formula, compat_samples,
    find_incompatibility_witness, CheckOptions, CheckReport, CheckStatus, CheckWitness, CoincidenceConstants,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    self, CheckJob, CheckKind, CheckSpec, Config, Diagnostic, Job, JobKind, Model, Overrides, Tolerances,
};
use crate::report::{JobResult, JobStatus, Report, Tool};

type JobOutcome = Result<(bool, Value), String>;

/// Reads, inlines, resolves and validates a config file.
pub fn load(path: &Path, overrides: &Overrides) -> Result<(Config, Model), Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path).map_err(|e| vec![Diagnostic { path: path.display().to_string(), message: e.to_string() }])?;
    load_str(&text, path.parent().unwrap_or(Path::new(".")), overrides)
}

/// As [`load`] for config text; `base` anchors relative tensor files.
pub fn load_str(text: &str, base: &Path, overrides: &Overrides) -> Result<(Config, Model), Vec<Diagnostic>> {
    let mut cfg = config::parse(text).map_err(|d| vec![d])?;
    let diags = config::inline_tensor_files(&mut cfg, base);
    if !diags.is_empty() {
        return Err(diags);
    }
    let cfg = config::resolve(cfg, overrides);
    let model = config::validate(&cfg)?;
    Ok((cfg, model))
}

/// Runs every job of a resolved config (or only those of kind `only`) on a
/// pool of `threads` workers; results keep config order.
pub fn execute(cfg: &Config, model: &Model, only: Option<JobKind>, threads: Option<usize>) -> Report {
    let start = Instant::now();
    let mut cfg = cfg.clone();
    if let Some(kind) = only {
        cfg.jobs.retain(|j| j.kind() == kind);
    }
    let tol = cfg.tolerances.unwrap_or_default();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().expect("thread pool");
    let outcomes: Vec<(JobResult, f64)> = pool.install(|| {
        cfg.jobs
            .par_iter()
            .map(|job| {
                let t0 = Instant::now();
                let outcome = catch_unwind(AssertUnwindSafe(|| run_job(job, model, tol)))
                    .unwrap_or_else(|p| Err(panic_message(p.as_ref())));
                let (status, error, result) = match outcome {
                    Ok((true, v)) => (JobStatus::Pass, None, v),
                    Ok((false, v)) => (JobStatus::Fail, None, v),
                    Err(e) => (JobStatus::Error, Some(e), Value::Null),
                };
                let res = JobResult { name: job.name().to_string(), kind: job.kind(), status, error, result };
                (res, t0.elapsed().as_secs_f64())
            })
            .collect()
    });
    let mut timing = BTreeMap::new();
    let mut results = Vec::with_capacity(outcomes.len());
    for (res, secs) in outcomes {
        timing.insert(format!("job:{}", res.name), secs);
        results.push(res);
    }
    timing.insert("total".into(), start.elapsed().as_secs_f64());
    let passed = results.iter().all(|r| r.status == JobStatus::Pass);
    Report { tool: Tool::current(), config: cfg, passed, results, timing }
}

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    let msg = p
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into());
    format!("internal failure: {msg}")
}

fn run_job(job: &Job, model: &Model, tol: Tolerances) -> JobOutcome {
    let err = |e: blocknorm_core::Error| e.to_string();
    match job {
        Job::Norm(j) => {
            let est = sup_norm(&model.operators[&j.operator], j.budget.unwrap_or(0), j.seed.unwrap_or(0));
            let ok = j.expect.is_none_or(|e| close(est.value, e, tol.chain));
            Ok((ok, serde_json::to_value(est).map_err(|e| e.to_string())?))
        }
        Job::SummingNorm(j) => {
            let xs = &model.classes[&j.x];
            let est = summing_norm(
                &model.operators[&j.operator],
                &model.blocks[&j.block],
                xs,
                &model.stack(&j.y),
                j.truncation,
                j.budget.unwrap_or(0),
                j.seed.unwrap_or(0),
            )
            .map_err(err)?;
            let ok = j.expect.is_none_or(|e| close(est.value, e, tol.chain));
            Ok((ok, serde_json::to_value(est).map_err(|e| e.to_string())?))
        }
        Job::Witness(j) => {
            let rep = find_incompatibility_witness(
                &model.classes[&j.x],
                &model.stack(&j.y),
                &model.blocks[&j.block],
                j.truncation,
                j.budget.unwrap_or(0),
                j.seed.unwrap_or(0),
                tol.identity,
            )
            .map_err(err)?;
            let ok = j.min_margin.is_none_or(|m| rep.worst_margin >= m) && j.max_margin.is_none_or(|m| rep.worst_margin <= m);
            Ok((ok, serde_json::to_value(rep).map_err(|e| e.to_string())?))
        }
        Job::Check(j) => {
            let reports = j
                .checks
                .iter()
                .enumerate()
                .map(|(c, spec)| run_check(j, c, spec, model, tol))
                .collect::<Result<Vec<_>, _>>()?;
            let ok = reports.iter().all(|r| r.status != CheckStatus::Fail);
            Ok((ok, json!({ "checks": reports })))
        }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn spaces(model: &Model, names: &[String]) -> Vec<FiniteLpSpace> {
    names.iter().map(|n| model.spaces[n]).collect()
}

/// The operator of one instance: the named one, or a draw on the domains.
fn instance_operator(spec: &CheckSpec, model: &Model, g: &mut SearchRng) -> MultiOperator {
    match &spec.operator {
        Some(name) => model.operators[name].clone(),
        None => {
            let domains = spaces(model, spec.domains.as_deref().unwrap_or_default());
            random_operator(g, &domains, model.spaces[spec.codomain.as_deref().unwrap_or_default()])
        }
    }
}

fn sequences(g: &mut SearchRng, domains: &[FiniteLpSpace], max_len: usize) -> Vec<VecSequence> {
    domains.iter().map(|d| random_sequence_upto(g, *d, max_len)).collect()
}

fn run_check(job: &CheckJob, index: usize, spec: &CheckSpec, model: &Model, tol: Tolerances) -> Result<CheckReport, String> {
    let check_seed = derive_seed(job.seed.unwrap_or(0), index as u64);
    let base = CheckOptions {
        tol_identity: tol.identity,
        tol_chain: tol.chain,
        budget: job.budget.unwrap_or(0),
        seed: check_seed,
        truncation: job.truncation,
    };
    let err = |e: blocknorm_core::Error| format!("{:?} check: {e}", spec.check);
    let xs = || model.classes[spec.x.as_deref().unwrap_or_default()].clone();
    let stack = || model.stack(spec.y.as_deref().unwrap_or_default());
    let block = || model.blocks[spec.block.as_deref().unwrap_or_default()].clone();

    if spec.check == CheckKind::Compatibility {
        let b = block();
        let samples = compat_samples(&b, job.truncation, job.instances, check_seed);
        let rep = check_compatibility(&xs(), &stack(), &b, &samples, tol.identity).map_err(err)?;
        let witness = CheckWitness {
            instance: 0,
            lhs: rep.worst_margin,
            rhs: 0.0,
            slack: rep.worst_margin,
            tolerance: tol.identity,
            data: json!({ "lambdas": rep.witness, "exact": rep.exact }),
        };
        return Ok(CheckReport {
            name: "compatibility".into(),
            instances: rep.samples,
            status: if rep.passed { CheckStatus::Pass } else { CheckStatus::Fail },
            worst_slack: rep.worst_margin,
            worst: Some(witness),
        });
    }

    let mut merged: Option<CheckReport> = None;
    for i in 0..job.instances {
        let mut g = stream(check_seed, i as u64);
        let opts = CheckOptions { seed: derive_seed(check_seed, i as u64), ..base };
        let t = instance_operator(spec, model, &mut g);
        let k = job.truncation;
        let mut rep = match spec.check {
            CheckKind::NormDomination => {
                let point: Vec<Vector> = t.domains.iter().map(|d| random_vector(&mut g, *d)).collect();
                check_norm_domination(&t, &block(), &xs(), &stack(), &[point], &opts)
            }
            CheckKind::IdealInequality => {
                let inner = spaces(model, spec.inner.as_deref().unwrap_or_default());
                let us: Vec<_> = inner.iter().zip(&t.domains).map(|(e, d)| random_linear_map(&mut g, *e, *d)).collect();
                let v = random_linear_map(&mut g, t.codomain, model.spaces[spec.outer.as_deref().unwrap_or_default()]);
                let seqs = sequences(&mut g, &inner, k);
                check_ideal_inequality(&v, &t, &us, &block(), &xs(), &stack(), &[seqs], &opts)
            }
            CheckKind::FiniteTypeNorm => {
                let phis: Vec<Vector> = t.domains.iter().map(|d| random_vector(&mut g, *d)).collect();
                let b = random_vector(&mut g, t.codomain);
                check_finite_type_norm(&phis, &b, &block(), &xs(), &stack(), &opts)
            }
            CheckKind::Coincidence => {
                let constants = match spec.constants {
                    Some([c1, c2]) => Some(CoincidenceConstants::new(c1, c2).map_err(err)?),
                    None => None,
                };
                let seqs = sequences(&mut g, &t.domains, k);
                check_coincidence(&t, &xs(), &stack(), constants, &[seqs], &opts)
            }
            CheckKind::DiagonalReduction => {
                let q = spec.q.as_ref().map_or(1.0, |q| q[0]);
                let z: ClassSpec = spec.z.as_deref().unwrap_or("sup").parse().map_err(err)?;
                let seqs = sequences(&mut g, &t.domains, k);
                check_diagonal_reduction(&t, q, z, &[seqs], &opts)
            }
            CheckKind::MultipleFormula => {
                let seqs = sequences(&mut g, &t.domains, k);
                check_multiple_formula(&t, spec.q.as_deref().unwrap_or_default(), &[seqs], &opts)
            }
            CheckKind::PartitionFormula => {
                let q = spec.q.as_deref().unwrap_or_default();
                let seqs = sequences(&mut g, &t.domains, k);
                check_partition_formula(&t, q[0], q[1], &[seqs], &opts)
            }
            CheckKind::Compatibility => unreachable!(),
        }
        .map_err(err)?;
        if let Some(w) = rep.worst.as_mut() {
            w.instance = i;
        }
        merged = Some(match merged {
            Some(m) => m.merge(rep),
            None => rep,
        });
    }
    Ok(merged.expect("at least one instance"))
}
