//! Helpers shared by the integration tests: a threaded experiment runner and
//! a brute-force reference model for tiny networks.

#![allow(dead_code)]

use std::thread;

use beliefnet_core::engine::{structuring_step, CheckOutcome, StructuringOutcome, TimeBudget};
use beliefnet_core::experiments::{aggregate, run_unit, ExperimentSpec, UnitResult};
use beliefnet_core::{seeded_rng, EdgeSign, FigureData, SignedNetwork, VertexAttrs, VertexId};
use rand::Rng;

/// Runs every unit of `spec` on all cores and aggregates in unit order.
pub fn run_parallel(spec: &ExperimentSpec) -> FigureData {
    spec.validate().expect("valid preset");
    let units = spec.units();
    let workers = thread::available_parallelism().map_or(4, |n| n.get());
    let chunk = units.len().div_ceil(workers).max(1);
    let results: Vec<UnitResult> = thread::scope(|s| {
        let handles: Vec<_> = units
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .map(|&u| run_unit(spec, u).expect("unit runs").result)
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker finished"))
            .collect()
    });
    aggregate(spec, &results).expect("aggregation")
}

/// Plain dense description of a small network, independent of the model's
/// own data structures.
#[derive(Clone, Debug)]
pub struct Dense {
    pub tolerance: f64,
    pub fitness: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    /// `sign[u][v]`: None when absent, otherwise -1, 0 or +1.
    pub sign: Vec<Vec<Option<i8>>>,
}

impl Dense {
    pub fn n(&self) -> usize {
        self.fitness.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.sign[v].iter().filter(|s| s.is_some()).count()
    }

    pub fn negatives(&self, v: usize) -> usize {
        self.sign[v].iter().filter(|s| **s == Some(-1)).count()
    }

    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        (0..self.n())
            .filter(|&u| self.sign[v][u].is_some())
            .collect()
    }

    /// Reference attachment probabilities for a new link of `i`, indexed by
    /// vertex (zero for non-candidates).
    pub fn attachment(&self, i: usize) -> Vec<f64> {
        let candidates: Vec<usize> = (0..self.n())
            .filter(|&t| t != i && self.sign[i][t].is_none())
            .collect();
        let mut p = vec![0.0; self.n()];
        if candidates.is_empty() {
            return p;
        }
        let score = |t: usize| self.fitness[t] * self.degree(t) as f64;
        let pref: f64 = candidates.iter().map(|&t| score(t)).sum();
        let fit: f64 = candidates.iter().map(|&t| self.fitness[t]).sum();
        for &t in &candidates {
            p[t] = if pref > 0.0 {
                score(t) / pref
            } else if fit > 0.0 {
                self.fitness[t] / fit
            } else {
                1.0 / candidates.len() as f64
            };
        }
        p
    }

    pub fn killing(&self, j: usize) -> bool {
        let d = self.degree(j);
        d > 0 && (self.negatives(j) as f64) > self.tolerance * d as f64
    }

    fn by_fitness(&self, options: &[usize]) -> Vec<(usize, f64)> {
        let total: f64 = options.iter().map(|&v| self.fitness[v]).sum();
        options
            .iter()
            .map(|&v| {
                let p = if total > 0.0 {
                    self.fitness[v] / total
                } else {
                    1.0 / options.len() as f64
                };
                (v, p)
            })
            .collect()
    }

    /// Every outcome of one structuring step from `i` with its exact
    /// probability, merged by key.
    pub fn structuring(&self, i: usize) -> Vec<(WalkKey, f64)> {
        let mut out: Vec<(WalkKey, f64)> = Vec::new();
        let mut add = |key: WalkKey, p: f64| {
            if p == 0.0 {
                return;
            }
            match out.iter_mut().find(|(k, _)| *k == key) {
                Some(slot) => slot.1 += p,
                None => out.push((key, p)),
            }
        };
        let first = self.neighbours(i);
        if first.is_empty() {
            add(WalkKey::NoOp, 1.0);
            return out;
        }
        for (n1, p1) in self.by_fitness(&first) {
            let second: Vec<usize> = self
                .neighbours(n1)
                .into_iter()
                .filter(|&v| v != i)
                .collect();
            if second.is_empty() {
                add(WalkKey::NoOp, p1);
                continue;
            }
            for (n2, p2) in self.by_fitness(&second) {
                if self.sign[i][n2].is_some() {
                    add(WalkKey::NoOp, p1 * p2);
                    continue;
                }
                let signs = [
                    (1i8, self.g[i]),
                    (-1, self.h[i]),
                    (0, 1.0 - self.g[i] - self.h[i]),
                ];
                for (s, ps) in signs {
                    let mut next = self.clone();
                    next.sign[i][n2] = Some(s);
                    next.sign[n2][i] = Some(s);
                    let case = match (next.killing(i), next.killing(n2)) {
                        (false, false) => WalkCase::Consistent,
                        (true, false) => WalkCase::InputEjected,
                        (false, true) => WalkCase::TargetEjected,
                        (true, true) if next.degree(i) <= next.degree(n2) => WalkCase::InputEjected,
                        (true, true) => WalkCase::TargetEjected,
                    };
                    let sign = (case == WalkCase::Consistent).then_some(s);
                    add(
                        WalkKey::Linked {
                            target: n2,
                            case,
                            sign,
                        },
                        p1 * p2 * ps,
                    );
                }
            }
        }
        out
    }

    /// The same network in the model's representation; vertex `v` gets id `v`.
    pub fn to_network(&self) -> SignedNetwork {
        let mut net = SignedNetwork::new(self.tolerance).unwrap();
        for v in 0..self.n() {
            let a = VertexAttrs::new(self.fitness[v], self.g[v], self.h[v], v as u32).unwrap();
            assert_eq!(net.add_vertex(a), VertexId(v as u32));
        }
        for u in 0..self.n() {
            for v in u + 1..self.n() {
                if let Some(s) = self.sign[u][v] {
                    let sign = EdgeSign::from_value(s as i64).unwrap();
                    net.add_edge(VertexId(u as u32), VertexId(v as u32), sign)
                        .unwrap();
                }
            }
        }
        net
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkCase {
    Consistent,
    InputEjected,
    TargetEjected,
}

/// Observable result of one structuring step. The sign of the new link is
/// only observable when the link survives the check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkKey {
    NoOp,
    Linked {
        target: usize,
        case: WalkCase,
        sign: Option<i8>,
    },
}

/// Runs the model's structuring step once on a copy of `net`.
pub fn observe_structuring<R: Rng>(net: &SignedNetwork, i: usize, rng: &mut R) -> WalkKey {
    let mut copy = net.clone();
    let iv = VertexId(i as u32);
    let mut budget = TimeBudget::new(10);
    match structuring_step(&mut copy, iv, &mut budget, rng) {
        StructuringOutcome::NoOp => WalkKey::NoOp,
        StructuringOutcome::BudgetExhausted => panic!("budget of ten cannot run out"),
        StructuringOutcome::Linked { target, check } => {
            let case = match check {
                CheckOutcome::Consistent => WalkCase::Consistent,
                CheckOutcome::InputEjected { .. } => WalkCase::InputEjected,
                CheckOutcome::OthersEjected { .. } => WalkCase::TargetEjected,
                CheckOutcome::BudgetExhausted => panic!("budget of ten cannot run out"),
            };
            let sign = (case == WalkCase::Consistent)
                .then(|| copy.sign(iv, target).expect("link kept").value());
            WalkKey::Linked {
                target: target.index(),
                case,
                sign,
            }
        }
    }
}

/// A random network with at most `max_n` vertices. Fitness is occasionally
/// zero so that the fallbacks are exercised; `edge_p` is the edge density.
pub fn random_dense<R: Rng>(rng: &mut R, max_n: usize, edge_p: f64) -> Dense {
    let n = rng.gen_range(2..=max_n);
    let tolerance = [0.0, 0.25, 0.5, 0.75, 1.0][rng.gen_range(0..5)];
    let fitness = (0..n)
        .map(|_| {
            if rng.gen_bool(0.15) {
                0.0
            } else {
                rng.gen_range(0.05..2.0)
            }
        })
        .collect();
    let mut g = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = rng.gen();
        let b: f64 = rng.gen();
        let c: f64 = rng.gen();
        let s = a + b + c;
        g.push(a / s);
        h.push(b / s);
    }
    let mut sign = vec![vec![None; n]; n];
    #[allow(clippy::needless_range_loop)] // symmetric fill needs both indices
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(edge_p) {
                let s = [-1i8, 0, 1][rng.gen_range(0..3)];
                sign[u][v] = Some(s);
                sign[v][u] = Some(s);
            }
        }
    }
    Dense {
        tolerance,
        fitness,
        g,
        h,
        sign,
    }
}

/// Empirical frequencies of `draws` samples compared against exact
/// probabilities: every category within `z` binomial standard deviations.
/// Returns the worst deviation in units of sigma.
pub fn worst_sigma(exact: &[f64], counts: &[u64], draws: u64) -> f64 {
    exact
        .iter()
        .zip(counts)
        .map(|(&p, &c)| {
            let expected = p * draws as f64;
            let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
            let dev = (c as f64 - expected).abs();
            if sigma == 0.0 {
                if dev == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                dev / sigma
            }
        })
        .fold(0.0, f64::max)
}

pub fn rng(seed: u64) -> beliefnet_core::SimRng {
    seeded_rng(seed)
}

/// Exact agreement on `networks` random tiny networks: attachment
/// probabilities within `1e-12` and identical killing verdicts.
pub fn check_exact(networks: usize, seed: u64) -> Result<String, String> {
    let mut r = rng(seed);
    let mut compared = 0;
    for case in 0..networks {
        let density = [0.0, 0.3, 0.6, 1.0][case % 4];
        let dense = random_dense(&mut r, 6, density);
        let net = dense.to_network();
        for v in 0..dense.n() {
            let id = VertexId(v as u32);
            if net.killing(id) != dense.killing(v) {
                return Err(format!("killing differs at vertex {v} of {dense:?}"));
            }
            let exact = dense.attachment(v);
            let model = net.attachment_weights(id);
            let total: f64 = model.iter().map(|(_, p)| p).sum();
            if !model.is_empty() && (total - 1.0).abs() > 1e-12 {
                return Err(format!("weights of {v} sum to {total}"));
            }
            for (t, p) in exact.iter().enumerate() {
                let m = model
                    .iter()
                    .find(|(u, _)| u.index() == t)
                    .map_or(0.0, |(_, p)| *p);
                if (m - p).abs() > 1e-12 {
                    return Err(format!("P({v} -> {t}) = {m}, reference {p} in {dense:?}"));
                }
                compared += 1;
            }
        }
    }
    Ok(format!(
        "{networks} networks, {compared} probabilities exact"
    ))
}

/// Empirical agreement: `draws` seeded samples of attachment targets and of
/// one structuring step per network, every category within three sigma.
pub fn check_empirical(networks: usize, draws: u64, seed: u64) -> Result<String, String> {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < networks {
        let dense = random_dense(&mut r, 6, 0.5);
        let Some(i) = (0..dense.n()).find(|&v| dense.degree(v) > 0) else {
            continue;
        };
        let net = dense.to_network();

        let exact = dense.attachment(i);
        if exact.iter().any(|&p| p > 0.0) {
            let mut counts = vec![0u64; dense.n()];
            let mut draw_rng = rng(seed ^ (done as u64 + 1));
            for _ in 0..draws {
                let t = net
                    .sample_attachment_target(VertexId(i as u32), &mut draw_rng)
                    .ok_or("no target drawn")?;
                counts[t.index()] += 1;
            }
            worst = worst.max(worst_sigma(&exact, &counts, draws));
        }

        let outcomes = dense.structuring(i);
        let total: f64 = outcomes.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(format!("reference outcomes sum to {total}"));
        }
        let mut counts = vec![0u64; outcomes.len()];
        let mut walk_rng = rng(seed.wrapping_mul(31) ^ (done as u64 + 7));
        for _ in 0..draws {
            let key = observe_structuring(&net, i, &mut walk_rng);
            let pos = outcomes
                .iter()
                .position(|(k, _)| *k == key)
                .ok_or_else(|| format!("outcome {key:?} impossible in reference"))?;
            counts[pos] += 1;
        }
        let exact: Vec<f64> = outcomes.iter().map(|(_, p)| *p).collect();
        worst = worst.max(worst_sigma(&exact, &counts, draws));
        done += 1;
    }
    if worst <= 3.0 {
        Ok(format!(
            "{networks} networks x {draws} draws, worst deviation {worst:.2} sigma"
        ))
    } else {
        Err(format!("worst deviation {worst:.2} sigma exceeds 3"))
    }
}
