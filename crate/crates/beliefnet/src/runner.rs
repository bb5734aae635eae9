//! Parallel execution of experiment presets.
//!
//! Units run on a rayon pool; results are gathered in unit order (variant,
//! then seed), whatever order they finish in, so the reduction and every file
//! written from it are independent of the thread count.

use std::time::{Duration, Instant};

use beliefnet_core::engine::PointOverride;
use beliefnet_core::experiments::{aggregate, run_unit, Protocol, UnitOutput, WorkUnit};
use beliefnet_core::{ExperimentSpec, FigureData, SignCounts, SignedNetwork, SimConfig};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::ConfigFile;
use crate::output::{json_number, summary_json};

pub struct ExperimentOutcome {
    pub data: FigureData,
    /// Final networks, in unit order, when requested.
    pub networks: Vec<(WorkUnit, SignedNetwork)>,
    pub wall_time: Duration,
}

/// A pool with `jobs` threads; `None` uses every available core.
pub fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, rayon::ThreadPoolBuildError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = jobs {
        builder = builder.num_threads(jobs);
    }
    builder.build()
}

pub fn run_experiment(
    spec: &ExperimentSpec,
    pool: &rayon::ThreadPool,
    keep_networks: bool,
) -> beliefnet_core::Result<ExperimentOutcome> {
    spec.validate()?;
    let start = Instant::now();
    let units = spec.units();
    let outputs: Vec<UnitOutput> = pool.install(|| {
        units
            .par_iter()
            .map(|&unit| {
                run_unit(spec, unit).map(|mut out| {
                    if !keep_networks {
                        out.network = None;
                    }
                    out
                })
            })
            .collect::<beliefnet_core::Result<_>>()
    })?;
    let mut results = Vec::with_capacity(outputs.len());
    let mut networks = Vec::new();
    for (unit, out) in units.into_iter().zip(outputs) {
        results.push(out.result);
        if let Some(net) = out.network {
            networks.push((unit, net));
        }
    }
    let data = aggregate(spec, &results)?;
    Ok(ExperimentOutcome {
        data,
        networks,
        wall_time: start.elapsed(),
    })
}

/// Resolved description of an experiment: every variant's configuration and
/// the seed of every run, enough to reproduce its output bit-exactly.
pub fn experiment_meta(spec: &ExperimentSpec, outcome: &ExperimentOutcome) -> Value {
    let variants: Vec<Value> = (0..spec.variants())
        .map(|variant| {
            let mut config = spec.variant_config(WorkUnit { variant, run: 0 });
            config.seed = spec.seed;
            json!({
                "label": spec.variant_label(variant),
                "config": config_json(&config),
            })
        })
        .collect();
    let run_seeds: Vec<u64> = (0..spec.runs).map(|r| spec.run_seed(r)).collect();
    let mut meta = json!({
        "figure": spec.figure.as_str(),
        "scale": spec.scale.as_str(),
        "runs": spec.runs,
        "seed": spec.seed,
        "run_seeds": run_seeds,
        "seed_rule": "run r of every variant uses seed + r",
        "variants": variants,
        "wall_time_secs": json_number(outcome.wall_time.as_secs_f64()),
        "summary": summary_json(&outcome.data),
    });
    let extra = match &spec.protocol {
        Protocol::Diameter { sample_pairs, .. } => json!({ "sample_pairs": sample_pairs }),
        Protocol::SpecialPoint { special, .. } => json!({ "special": override_json(special) }),
        Protocol::Attacker { attacker, .. } => json!({ "attacker": override_json(attacker) }),
        Protocol::Learning {
            new_info,
            added,
            total_time,
            ..
        } => json!({
            "new_info": config_json(new_info),
            "added": added,
            "total_time": total_time,
        }),
        _ => Value::Null,
    };
    if !extra.is_null() {
        meta["protocol"] = extra;
    }
    meta
}

pub fn config_json(config: &SimConfig) -> Value {
    serde_json::to_value(ConfigFile::from_sim(config)).expect("configurations always serialize")
}

fn override_json(o: &PointOverride) -> Value {
    let counts = |c: SignCounts| [c.a, c.b, c.c];
    json!({
        "fitness": o.fitness,
        "sign_counts": o.sign_counts.map(counts),
        "e": o.e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use beliefnet_core::experiments::{preset, run_experiment as run_sequential};
    use beliefnet_core::{FigureId, Scale};

    fn small(figure: FigureId) -> ExperimentSpec {
        let mut spec = preset(figure, Scale::Desk);
        spec.runs = 3;
        spec.seed = 5;
        match &mut spec.protocol {
            Protocol::DegreeDistribution { config } => config.n_points = 300,
            Protocol::Diameter { sizes, .. } => *sizes = vec![50, 120],
            Protocol::Attacker { sizes, .. } => *sizes = vec![40, 80],
            _ => {}
        }
        spec
    }

    #[test]
    fn parallel_matches_sequential() {
        for figure in [FigureId::Fig1bType2, FigureId::Fig2, FigureId::Fig6] {
            let spec = small(figure);
            let expected = run_sequential(&spec).unwrap();
            for jobs in [1, 4] {
                let pool = thread_pool(Some(jobs)).unwrap();
                let got = run_experiment(&spec, &pool, false).unwrap();
                assert_eq!(got.data, expected, "{figure} with {jobs} jobs");
                assert!(got.networks.is_empty());
            }
        }
    }

    #[test]
    fn networks_are_kept_in_unit_order() {
        let spec = small(FigureId::Fig2);
        let pool = thread_pool(Some(3)).unwrap();
        let got = run_experiment(&spec, &pool, true).unwrap();
        let units: Vec<WorkUnit> = got.networks.iter().map(|(u, _)| *u).collect();
        assert_eq!(units, spec.units());
    }

    #[test]
    fn meta_lists_seeds_and_variants() {
        let spec = small(FigureId::Fig6);
        let pool = thread_pool(Some(2)).unwrap();
        let outcome = run_experiment(&spec, &pool, false).unwrap();
        let meta = experiment_meta(&spec, &outcome);
        assert_eq!(meta["run_seeds"], json!([5, 6, 7]));
        assert_eq!(meta["variants"][1]["label"], "n80");
        assert_eq!(meta["variants"][1]["config"]["n_points"], 81);
        assert_eq!(meta["protocol"]["attacker"]["e"], 100);
    }
}
