//! Instance loading and benchmark execution: single runs, directory
//! suites, resumption and the worker pool.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use banditplan::heuristics::HeuristicKind;
use banditplan::pddl::{ground, parse_domain, parse_problem};
use banditplan::search::{Algorithm, SearchLimits};
use banditplan::strips::{GroundTask, Plan};
use banditplan::Outcome;

use crate::record::BenchRecord;
use crate::CliError;

/// Search settings shared by every run of a batch.
#[derive(Debug, Clone)]
pub struct SearchParams {
    pub heuristic: HeuristicKind,
    pub budget: u64,
    pub seeds: Vec<u64>,
    pub deadline: Option<Duration>,
}

/// Everything needed to run one algorithm over one task.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub params: SearchParams,
}

pub struct LoadedInstance {
    pub domain_name: String,
    pub problem_name: String,
    pub task: GroundTask,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::NotFound(path.display().to_string())
        } else {
            CliError::Other(format!("reading {}: {e}", path.display()))
        }
    })
}

/// Parses and grounds a domain/problem pair.
pub fn load_instance(domain_path: &Path, problem_path: &Path) -> Result<LoadedInstance, CliError> {
    let domain_text = read_text(domain_path)?;
    let problem_text = read_text(problem_path)?;
    let domain = parse_domain(&domain_text).map_err(CliError::from_pddl)?;
    let problem = parse_problem(&problem_text).map_err(CliError::from_pddl)?;
    let task = ground(&domain, &problem).map_err(CliError::from_pddl)?;
    Ok(LoadedInstance {
        domain_name: domain.name,
        problem_name: problem.name,
        task,
    })
}

/// Runs every seed of a configuration on one task; returns the records and
/// the first plan found.
pub fn run_seeds(
    instance: &LoadedInstance,
    config: &RunConfig,
) -> (Vec<BenchRecord>, Option<Plan>) {
    let mut records = Vec::with_capacity(config.params.seeds.len());
    let mut first_plan = None;
    for &seed in &config.params.seeds {
        let limits = SearchLimits {
            budget: config.params.budget,
            deadline: config.params.deadline.map(|d| Instant::now() + d),
        };
        let result = config
            .algorithm
            .run(&instance.task, &config.params.heuristic, limits, seed);
        let plan_length = match &result.outcome {
            Outcome::Plan(plan) => {
                assert!(instance.task.validate_plan(plan), "plans must validate");
                if first_plan.is_none() {
                    first_plan = Some(plan.clone());
                }
                Some(plan.len() as u64)
            }
            _ => None,
        };
        records.push(BenchRecord {
            domain: instance.domain_name.clone(),
            problem: instance.problem_name.clone(),
            algorithm: config.algorithm.id().to_string(),
            heuristic: config.params.heuristic.name().to_string(),
            c: config.algorithm.coefficient(),
            seed,
            outcome: result.outcome.label().to_string(),
            expansions: result.expansions,
            plan_length,
            elapsed_ms: result.elapsed.as_millis() as u64,
        });
    }
    (records, first_plan)
}

/// Instances of a suite: every directory under `suite` (including itself)
/// holding a `domain.pddl` contributes its sorted `p*.pddl` files.
pub fn discover_instances(suite: &Path) -> Result<Vec<(PathBuf, PathBuf)>, CliError> {
    if !suite.is_dir() {
        return Err(CliError::NotFound(suite.display().to_string()));
    }
    let mut dirs = vec![suite.to_path_buf()];
    let mut queue = vec![suite.to_path_buf()];
    while let Some(dir) = queue.pop() {
        for entry in fs::read_dir(&dir)
            .map_err(|e| CliError::Other(format!("reading {}: {e}", dir.display())))?
        {
            let entry = entry.map_err(|e| CliError::Other(e.to_string()))?;
            if entry.path().is_dir() {
                dirs.push(entry.path());
                queue.push(entry.path());
            }
        }
    }
    dirs.sort();
    let mut instances = Vec::new();
    for dir in dirs {
        let domain = dir.join("domain.pddl");
        if !domain.is_file() {
            continue;
        }
        let mut problems: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| CliError::Other(e.to_string()))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| {
                p.is_file()
                    && p.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with('p') && n.ends_with(".pddl"))
            })
            .collect();
        problems.sort();
        for problem in problems {
            instances.push((domain.clone(), problem));
        }
    }
    Ok(instances)
}

/// Runs the cross product instances × algorithms × seeds, appending JSONL
/// records to `out`. Existing (domain, problem, algorithm, seed) records
/// are skipped, so an interrupted run resumes where it stopped. Instance
/// failures are reported on stderr and never abort the suite.
pub fn bench(
    suite: &Path,
    algorithms: &[Algorithm],
    params: &SearchParams,
    out: &Path,
    jobs: usize,
) -> Result<(), CliError> {
    let instances = discover_instances(suite)?;
    let done: HashSet<(String, String, String, u64)> = if out.exists() {
        crate::record::read_records(out)
            .map_err(|e| CliError::Other(format!("reading {}: {e}", out.display())))?
            .iter()
            .map(|r| r.key())
            .collect()
    } else {
        HashSet::new()
    };

    let mut writer = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(out)
        .map_err(|e| CliError::Other(format!("opening {}: {e}", out.display())))?;

    let jobs = jobs.max(1);
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<BenchRecord>();

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            let tx = tx.clone();
            let next = &next;
            let instances = &instances;
            let done = &done;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= instances.len() {
                    break;
                }
                let (domain_path, problem_path) = &instances[i];
                let instance = match load_instance(domain_path, problem_path) {
                    Ok(instance) => instance,
                    Err(e) => {
                        eprintln!("warning: skipping {}: {e}", problem_path.display());
                        continue;
                    }
                };
                for &algorithm in algorithms {
                    let mut config = RunConfig {
                        algorithm,
                        params: params.clone(),
                    };
                    config.params.seeds.retain(|&seed| {
                        !done.contains(&(
                            instance.domain_name.clone(),
                            instance.problem_name.clone(),
                            algorithm.id().to_string(),
                            seed,
                        ))
                    });
                    if config.params.seeds.is_empty() {
                        continue;
                    }
                    let (records, _) = run_seeds(&instance, &config);
                    for record in records {
                        if tx.send(record).is_err() {
                            return;
                        }
                    }
                }
            });
        }
        drop(tx);
        // Single writer serializes the records.
        for record in rx {
            let line = serde_json::to_string(&record).expect("records serialize");
            if let Err(e) = writeln!(writer, "{line}") {
                eprintln!("error: writing {}: {e}", out.display());
                break;
            }
        }
    });
    writer
        .flush()
        .map_err(|e| CliError::Other(format!("flushing {}: {e}", out.display())))
}
