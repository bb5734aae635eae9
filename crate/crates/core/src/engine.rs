//! Cycle dynamics: input creation, first linking, structuring walks, checking,
//! the blacklist-driven self-consistency test and forgetting.
//!
//! Every stochastic choice of a run is drawn from one generator in a fixed
//! order. Per cycle: the input's fitness (if random) and its `a`, `b`, `c`
//! counts (if random); then for each first-linking attempt the `U` targets
//! followed by their `U` signs; then for each structuring step the first hop,
//! the second hop and the sign of the new link; finally the forgotten edges.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;

use rand::distributions::Open01;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{
    draw_sign, pick_by_fitness, sign_probs_from_counts, EdgeSign, SignCounts, SignedNetwork,
    VertexAttrs, VertexId,
};
use crate::{seeded_rng, SimRng};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitnessSource {
    Constant(f64),
    /// Uniform on (0, 1), drawn per input.
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SignCountsSource {
    Constant(SignCounts),
    /// Each of `a`, `b`, `c` uniform on (0, 1), drawn per input.
    Uniform,
}

/// Attribute and time-budget overrides for one input, addressed by ordinal.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointOverride {
    pub ordinal: u32,
    pub fitness: Option<f64>,
    pub sign_counts: Option<SignCounts>,
    pub e: Option<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Negativity tolerance.
    pub h: f64,
    /// Links carried by an input.
    pub u: u32,
    /// Time steps per cycle.
    pub e: u32,
    /// Edges forgotten per cycle.
    pub f_forget: u32,
    /// Inputs to process.
    pub n_points: u32,
    pub fitness: FitnessSource,
    pub sign_counts: SignCountsSource,
    pub overrides: Vec<PointOverride>,
    pub seed: u64,
}

impl SimConfig {
    /// Plain preferential attachment: all-positive links, one time step per
    /// cycle, no forgetting.
    pub fn barabasi_albert(n_points: u32, u: u32) -> Self {
        SimConfig {
            h: 1.0,
            u,
            e: 1,
            f_forget: 0,
            n_points,
            fitness: FitnessSource::Constant(1.0),
            sign_counts: SignCountsSource::Constant(SignCounts::new(1.0, 0.0, 0.0)),
            overrides: Vec::new(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_from(0)
    }

    /// Validation for a run whose first input has ordinal `first_ordinal`.
    pub fn validate_from(&self, first_ordinal: u32) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.h) {
            return bad(alloc::format!("h must lie in [0, 1], got {}", self.h));
        }
        if self.u == 0 {
            return bad("u must be positive".into());
        }
        if self.e == 0 {
            return bad("e must be positive".into());
        }
        if self.n_points == 0 {
            return bad("n_points must be positive".into());
        }
        if let FitnessSource::Constant(f) = self.fitness {
            check_fitness(f)?;
        }
        if let SignCountsSource::Constant(c) = self.sign_counts {
            c.validate()?;
        }
        let end = first_ordinal as u64 + self.n_points as u64;
        let mut seen = BTreeSet::new();
        for o in &self.overrides {
            if (o.ordinal as u64) < first_ordinal as u64 || o.ordinal as u64 >= end {
                return bad(alloc::format!(
                    "override ordinal {} outside the run's inputs [{first_ordinal}, {end})",
                    o.ordinal
                ));
            }
            if !seen.insert(o.ordinal) {
                return bad(alloc::format!(
                    "duplicate override for ordinal {}",
                    o.ordinal
                ));
            }
            if let Some(f) = o.fitness {
                check_fitness(f)?;
            }
            if let Some(c) = o.sign_counts {
                c.validate()?;
            }
            if o.e == Some(0) {
                return bad(alloc::format!(
                    "override e for ordinal {} must be positive",
                    o.ordinal
                ));
            }
        }
        Ok(())
    }

    pub fn override_for(&self, ordinal: u32) -> Option<&PointOverride> {
        self.overrides.iter().find(|o| o.ordinal == ordinal)
    }

    /// Time steps available to the cycle of input `ordinal`.
    pub fn time_budget(&self, ordinal: u32) -> u32 {
        self.override_for(ordinal)
            .and_then(|o| o.e)
            .unwrap_or(self.e)
    }

    /// True when some fitness value may exceed one (allowed, but outside the
    /// nominal unit range).
    pub fn has_fitness_above_one(&self) -> bool {
        let above = |f: f64| f > 1.0;
        matches!(self.fitness, FitnessSource::Constant(f) if above(f))
            || self.overrides.iter().any(|o| o.fitness.is_some_and(above))
    }
}

fn check_fitness(f: f64) -> Result<()> {
    if f.is_finite() && f >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(alloc::format!(
            "fitness must be finite and non-negative, got {f}"
        )))
    }
}

/// Remaining time steps of the current cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimeBudget {
    remaining: u32,
}

impl TimeBudget {
    pub fn new(steps: u32) -> Self {
        TimeBudget { remaining: steps }
    }

    pub fn remaining(&self) -> u32 {
        self.remaining
    }

    pub fn is_exhausted(&self) -> bool {
        self.remaining == 0
    }

    /// Spends one step; false if none was left.
    pub fn charge(&mut self) -> bool {
        if self.remaining == 0 {
            return false;
        }
        self.remaining -= 1;
        true
    }
}

/// Vertices waiting for a killing test. A vertex is held at most once at a
/// time but may re-enter after it has been popped.
#[derive(Clone, Debug, Default)]
pub struct Blacklist {
    queue: VecDeque<VertexId>,
    members: BTreeSet<VertexId>,
}

impl Blacklist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_start(start: VertexId) -> Self {
        let mut list = Self::new();
        list.push(start);
        list
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.contains(&v)
    }

    pub fn push(&mut self, v: VertexId) -> bool {
        if self.members.insert(v) {
            self.queue.push_back(v);
            true
        } else {
            false
        }
    }

    /// Appends a group ranked by descending fitness, ties by ascending id.
    pub fn push_ranked(&mut self, net: &SignedNetwork, mut group: Vec<VertexId>) {
        group.sort_by(|a, b| {
            net.fitness(*b)
                .total_cmp(&net.fitness(*a))
                .then_with(|| a.cmp(b))
        });
        for v in group {
            self.push(v);
        }
    }

    pub fn pop(&mut self) -> Option<VertexId> {
        let v = self.queue.pop_front()?;
        self.members.remove(&v);
        Some(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.queue.iter().copied()
    }
}

/// Draws the attributes of input `ordinal` and adds it to the network as an
/// isolated vertex awaiting first linking.
pub fn make_input<R: Rng + ?Sized>(
    net: &mut SignedNetwork,
    config: &SimConfig,
    ordinal: u32,
    rng: &mut R,
) -> (VertexId, VertexAttrs) {
    let mut fitness = match config.fitness {
        FitnessSource::Constant(f) => f,
        FitnessSource::Uniform => rng.sample(Open01),
    };
    let mut counts = match config.sign_counts {
        SignCountsSource::Constant(c) => c,
        SignCountsSource::Uniform => {
            SignCounts::new(rng.sample(Open01), rng.sample(Open01), rng.sample(Open01))
        }
    };
    if let Some(o) = config.override_for(ordinal) {
        fitness = o.fitness.unwrap_or(fitness);
        counts = o.sign_counts.unwrap_or(counts);
    }
    let (g, h) = sign_probs_from_counts(counts).expect("validated sign counts");
    let attrs = VertexAttrs {
        fitness,
        g,
        h,
        ordinal,
    };
    (net.add_vertex(attrs), attrs)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinkingOutcome {
    pub attached: bool,
    /// Killing tests run, one per attempt.
    pub attempts: u32,
    /// Other vertices that vanished along with the input (none, given the
    /// roll-back rule; kept for reporting symmetry).
    pub removed: Vec<VertexId>,
}

/// Links the isolated input `i` to `u` preferentially chosen targets and
/// tests it, retrying from scratch until it is consistent or the budget runs
/// out. A rejected attempt is rolled back edge by edge: its targets all had
/// links before the attempt (or were the isolated seed), so none of them
/// vanishes. On failure `i` is deleted.
///
/// When the network offers no candidate the input stays as an isolated seed
/// vertex and counts as attached.
pub fn first_linking<R: Rng + ?Sized>(
    net: &mut SignedNetwork,
    i: VertexId,
    u: u32,
    budget: &mut TimeBudget,
    rng: &mut R,
) -> LinkingOutcome {
    let mut outcome = LinkingOutcome::default();
    let attrs = *net.attrs(i).expect("input exists");
    loop {
        if budget.is_exhausted() {
            let removed = net.remove_vertex(i).expect("input exists");
            outcome.removed.extend(removed.into_iter().skip(1));
            return outcome;
        }
        let mut targets = Vec::with_capacity(u as usize);
        for _ in 0..u {
            let Some(t) = net.sample_attachment_target(i, rng) else {
                break;
            };
            net.add_edge(i, t, EdgeSign::Neutral)
                .expect("target is a non-adjacent candidate");
            targets.push(t);
        }
        for t in targets {
            net.set_sign(i, t, draw_sign(&attrs, rng));
        }
        budget.charge();
        outcome.attempts += 1;
        if !net.killing(i) {
            outcome.attached = true;
            return outcome;
        }
        // The attempt is rolled back: the network is left as it was before it.
        net.retract(i);
    }
}

/// Result of a blacklist run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConsistencyReport {
    /// Every removed vertex, including Definition-8 style vanishings.
    pub removed: Vec<VertexId>,
    /// True when the blacklist ran empty, false when time ran out first.
    pub completed: bool,
    /// Killing tests run.
    pub tests: u32,
}

/// Self-consistency test seeded with `start`.
pub fn self_consistency_test(
    net: &mut SignedNetwork,
    start: VertexId,
    budget: &mut TimeBudget,
) -> ConsistencyReport {
    run_blacklist(net, Blacklist::with_start(start), budget)
}

/// Works through a blacklist: the front vertex is tested (one time step); if
/// it must go, it is removed and its positive neighbours are appended ranked
/// by fitness. Stops when the list is empty or the budget is spent. Entries
/// that vanished in the meantime are dropped without a test.
pub fn run_blacklist(
    net: &mut SignedNetwork,
    mut list: Blacklist,
    budget: &mut TimeBudget,
) -> ConsistencyReport {
    let mut report = ConsistencyReport::default();
    loop {
        let Some(&front) = list.queue.front() else {
            report.completed = true;
            return report;
        };
        if !net.contains(front) {
            list.pop();
            continue;
        }
        if !budget.charge() {
            return report;
        }
        list.pop();
        report.tests += 1;
        if net.killing(front) {
            let positive: Vec<VertexId> = net
                .links(front)
                .iter()
                .filter(|l| l.sign == EdgeSign::Positive)
                .map(|l| l.to)
                .collect();
            report
                .removed
                .extend(net.remove_vertex(front).expect("front exists"));
            let survivors = positive.into_iter().filter(|&v| net.contains(v)).collect();
            list.push_ranked(net, survivors);
        }
    }
}

/// Outcome of the consistency check after a structuring link.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    /// Neither endpoint violates the tolerance.
    Consistent,
    /// The input had to go: its edges were cleared and first linking must be
    /// restarted. `removed` lists neighbours that vanished with the edges.
    InputEjected { removed: Vec<VertexId> },
    /// The walk target was removed and a self-consistency test followed.
    OthersEjected {
        removed: Vec<VertexId>,
        /// The cascade also took the input.
        input_lost: bool,
        /// The blacklist ran empty before time ran out.
        completed: bool,
    },
    /// No time was left for the tests; the network is left as is.
    BudgetExhausted,
}

/// Tests the input `i` and the walk target `n2` and resolves the four cases.
/// The pair of tests takes one time step; a self-consistency test that
/// follows charges one step per blacklist entry tested. When both violate,
/// the endpoint with fewer links is removed, the input on ties.
pub fn checking(
    net: &mut SignedNetwork,
    i: VertexId,
    n2: VertexId,
    budget: &mut TimeBudget,
) -> CheckOutcome {
    if !budget.charge() {
        return CheckOutcome::BudgetExhausted;
    }
    let input_bad = net.killing(i);
    let target_bad = net.killing(n2);
    let eject_input = match (input_bad, target_bad) {
        (false, false) => return CheckOutcome::Consistent,
        (true, false) => true,
        (false, true) => false,
        (true, true) => net.degree(i) <= net.degree(n2),
    };
    if eject_input {
        return CheckOutcome::InputEjected {
            removed: net.detach(i),
        };
    }
    let mut positive: Vec<VertexId> = net
        .links(n2)
        .iter()
        .filter(|l| l.sign == EdgeSign::Positive)
        .map(|l| l.to)
        .collect();
    let mut removed = net.remove_vertex(n2).expect("walk target exists");
    positive.retain(|&v| net.contains(v));
    let mut list = Blacklist::new();
    list.push_ranked(net, positive);
    let report = run_blacklist(net, list, budget);
    removed.extend(report.removed);
    CheckOutcome::OthersEjected {
        input_lost: !net.contains(i),
        removed,
        completed: report.completed,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructuringOutcome {
    /// The walk hit a dead end or an existing neighbour; the step was spent.
    NoOp,
    /// No time left for a walk.
    BudgetExhausted,
    /// A new link to `target` was built and then checked.
    Linked {
        target: VertexId,
        check: CheckOutcome,
    },
}

/// One two-step random walk from the input, weighted by fitness, followed by
/// a link to the second vertex reached and a consistency check.
pub fn structuring_step<R: Rng + ?Sized>(
    net: &mut SignedNetwork,
    i: VertexId,
    budget: &mut TimeBudget,
    rng: &mut R,
) -> StructuringOutcome {
    if !budget.charge() {
        return StructuringOutcome::BudgetExhausted;
    }
    let first: Vec<VertexId> = net.links(i).iter().map(|l| l.to).collect();
    let Some(n1) = pick_by_fitness(net, &first, rng) else {
        return StructuringOutcome::NoOp;
    };
    let second: Vec<VertexId> = net
        .links(n1)
        .iter()
        .map(|l| l.to)
        .filter(|&v| v != i)
        .collect();
    let Some(n2) = pick_by_fitness(net, &second, rng) else {
        return StructuringOutcome::NoOp;
    };
    if net.has_edge(i, n2) {
        return StructuringOutcome::NoOp;
    }
    let attrs = *net.attrs(i).expect("input exists");
    net.add_edge(i, n2, draw_sign(&attrs, rng))
        .expect("checked non-adjacent");
    StructuringOutcome::Linked {
        target: n2,
        check: checking(net, i, n2, budget),
    }
}

/// Summary of one cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleReport {
    pub ordinal: u32,
    pub input: VertexId,
    /// The input is part of the network when processing ends (before
    /// forgetting).
    pub attached: bool,
    pub time_used: u32,
    pub first_link_attempts: u32,
    /// Links built by structuring walks.
    pub walk_links: u32,
    /// Vertices other than the input that left the network during the cycle,
    /// forgetting included.
    pub removed: Vec<VertexId>,
    pub forgotten: u32,
    /// Status of the last self-consistency test of the cycle, if any ran:
    /// true when its blacklist ran empty.
    pub last_test_completed: Option<bool>,
    pub n_vertices: usize,
    pub n_edges: usize,
}

/// Processes one input: first linking, structuring until time runs out or the
/// input is gone, then forgetting.
///
/// Forgetting spares the edges of the current input; they are only exposed
/// from the next cycle on.
pub fn run_cycle<R: Rng + ?Sized>(
    net: &mut SignedNetwork,
    config: &SimConfig,
    ordinal: u32,
    rng: &mut R,
) -> CycleReport {
    let total = config.time_budget(ordinal);
    let mut budget = TimeBudget::new(total);
    let (i, _) = make_input(net, config, ordinal, rng);
    let mut removed = Vec::new();
    let mut walk_links = 0;
    let mut last_test_completed = None;

    let linking = first_linking(net, i, config.u, &mut budget, rng);
    let mut attempts = linking.attempts;
    removed.extend(linking.removed);
    let mut present = linking.attached;

    while present && net.degree(i) > 0 {
        match structuring_step(net, i, &mut budget, rng) {
            StructuringOutcome::NoOp => {}
            StructuringOutcome::BudgetExhausted => break,
            StructuringOutcome::Linked { check, .. } => {
                walk_links += 1;
                match check {
                    CheckOutcome::Consistent => {}
                    CheckOutcome::BudgetExhausted => break,
                    CheckOutcome::InputEjected { removed: gone } => {
                        removed.extend(gone);
                        let again = first_linking(net, i, config.u, &mut budget, rng);
                        attempts += again.attempts;
                        removed.extend(again.removed);
                        present = again.attached;
                    }
                    CheckOutcome::OthersEjected {
                        removed: gone,
                        input_lost,
                        completed,
                    } => {
                        removed.extend(gone.into_iter().filter(|&v| v != i));
                        last_test_completed = Some(completed);
                        present = !input_lost;
                    }
                }
            }
        }
    }

    let mut vanished = Vec::new();
    let spare = present.then_some(i);
    let forgotten = net.forget_edges_sparing(config.f_forget as usize, spare, rng, &mut vanished);
    removed.extend(vanished);

    CycleReport {
        ordinal,
        input: i,
        attached: present,
        time_used: total - budget.remaining(),
        first_link_attempts: attempts,
        walk_links,
        removed,
        forgotten: forgotten as u32,
        last_test_completed,
        n_vertices: net.vertex_count(),
        n_edges: net.edge_count(),
    }
}

/// Final network and per-cycle trace of a run.
#[derive(Clone, Debug)]
pub struct SimulationRun {
    pub network: SignedNetwork,
    pub trace: Vec<CycleReport>,
}

/// Runs `config.n_points` cycles on an empty network, seeded from
/// `config.seed`.
pub fn run_simulation(config: &SimConfig) -> Result<SimulationRun> {
    config.validate()?;
    let mut network = SignedNetwork::new(config.h)?;
    let mut rng = seeded_rng(config.seed);
    let trace = continue_simulation(&mut network, config, 0, &mut rng)?;
    Ok(SimulationRun { network, trace })
}

/// Feeds `config.n_points` further inputs into an existing network, the
/// first one with ordinal `first_ordinal`. The network adopts `config.h`.
pub fn continue_simulation(
    net: &mut SignedNetwork,
    config: &SimConfig,
    first_ordinal: u32,
    rng: &mut SimRng,
) -> Result<Vec<CycleReport>> {
    config.validate_from(first_ordinal)?;
    net.set_tolerance(config.h)?;
    let trace = (0..config.n_points)
        .map(|k| run_cycle(net, config, first_ordinal + k, rng))
        .collect();
    Ok(trace)
}
