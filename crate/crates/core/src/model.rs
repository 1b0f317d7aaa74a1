//! Schelling activation rule on a network, the step loop, and single runs.
//!
//! An unhappy agent breaks one edge to a random opposite-group neighbour and
//! then, if its degree fell below the floor, connects to random non-neighbours
//! until it is back at the floor. Happy agents do nothing. Each step activates
//! every agent once in a freshly shuffled order against the live graph.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, SpectralError};
use crate::graph::{AgentId, Group, GroupAssignment, NeighborStats, Network};
use crate::metrics::{similarity_report, SimilarityReport};
use crate::spectral::{self, DimEstimate, SingularProfile};

/// Fraction of same-group neighbours an agent needs, stored in hundredths so
/// the happiness boundary is decided in integer arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Tolerance(u32);

impl Tolerance {
    pub const ZERO: Tolerance = Tolerance(0);
    pub const ONE: Tolerance = Tolerance(100);

    pub fn from_hundredths(h: u32) -> Result<Self, ModelError> {
        if h > 100 {
            return Err(ModelError::ToleranceRange(h as f64 / 100.0));
        }
        Ok(Tolerance(h))
    }

    /// Accepts values in `[0, 1]` that sit on the 0.01 grid.
    pub fn new(t: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(ModelError::ToleranceRange(t));
        }
        let scaled = t * 100.0;
        let h = scaled.round();
        if (scaled - h).abs() > 1e-6 {
            return Err(ModelError::TolerancePrecision(t));
        }
        Ok(Tolerance(h as u32))
    }

    pub fn hundredths(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl TryFrom<f64> for Tolerance {
    type Error = ModelError;
    fn try_from(t: f64) -> Result<Self, ModelError> {
        Tolerance::new(t)
    }
}

impl From<Tolerance> for f64 {
    fn from(t: Tolerance) -> f64 {
        t.as_f64()
    }
}

impl std::fmt::Display for Tolerance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2}", self.as_f64())
    }
}

/// `same / total >= t`, exactly. Agents without neighbours are happy.
#[inline]
pub fn is_happy(same: usize, total: usize, t: Tolerance) -> bool {
    debug_assert!(same <= total);
    total == 0 || (same as u64) * 100 >= (t.0 as u64) * (total as u64)
}

/// How `initial_degree` turns into a starting network.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Wiring {
    /// Each agent initiates `initial_degree` links; mean degree near twice that.
    #[default]
    PerAgent,
    /// Uniform graph with exactly `n * initial_degree / 2` edges.
    ExactMean,
}

impl Wiring {
    pub fn name(self) -> &'static str {
        match self {
            Wiring::PerAgent => "per-agent",
            Wiring::ExactMean => "exact-mean",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "per-agent" => Some(Wiring::PerAgent),
            "exact-mean" => Some(Wiring::ExactMean),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub initial_degree: usize,
    pub wiring: Wiring,
    pub degree_floor: usize,
    pub t1: Tolerance,
    pub t2: Tolerance,
    /// Fraction of agents in group one.
    pub small_fraction: f64,
    pub max_steps: u32,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n: 1000,
            initial_degree: 80,
            wiring: Wiring::PerAgent,
            degree_floor: 40,
            t1: Tolerance(50),
            t2: Tolerance(50),
            small_fraction: 0.5,
            max_steps: 1000,
        }
    }
}

impl ModelParams {
    /// Default population and degrees with the given tolerances and group split.
    pub fn new(t1: f64, t2: f64, small_fraction: f64) -> Result<Self, ModelError> {
        let p = Self {
            t1: Tolerance::new(t1)?,
            t2: Tolerance::new(t2)?,
            small_fraction,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn tolerance(&self, g: Group) -> Tolerance {
        match g {
            Group::One => self.t1,
            Group::Two => self.t2,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidParams(m));
        if self.n < 2 {
            return bad(format!("n = {} (need at least 2)", self.n));
        }
        if self.degree_floor > self.initial_degree {
            return bad(format!(
                "degree_floor {} exceeds initial_degree {}",
                self.degree_floor, self.initial_degree
            ));
        }
        if self.initial_degree >= self.n {
            return bad(format!(
                "initial_degree {} must be below n = {}",
                self.initial_degree, self.n
            ));
        }
        if self.wiring == Wiring::ExactMean && !(self.n * self.initial_degree).is_multiple_of(2) {
            return bad("n * initial_degree must be even".into());
        }
        if !(self.small_fraction > 0.0 && self.small_fraction <= 0.5) {
            return bad(format!(
                "small_fraction {} outside (0, 0.5]",
                self.small_fraction
            ));
        }
        let small = (self.small_fraction * self.n as f64).round() as usize;
        if small == 0 {
            return bad(format!(
                "small_fraction {} leaves group one empty at n = {}",
                self.small_fraction, self.n
            ));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        Ok(())
    }
}

/// Aggregate counts for one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepReport {
    pub breaks: usize,
    pub adds: usize,
    /// Agents that were unhappy when their turn came.
    pub unhappy_before: usize,
    pub all_happy_after: bool,
}

/// What one activation did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActivationEvent {
    pub agent: AgentId,
    pub before: NeighborStats,
    pub happy: bool,
    /// Neighbour whose edge was broken.
    pub dropped: Option<AgentId>,
    pub adds: usize,
    /// Refill stopped because the agent was connected to everyone.
    pub saturated: bool,
    pub degree_after: usize,
    pub edges_before: usize,
    pub edges_after: usize,
}

/// Counters for conditions that default parameters never reach.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub saturated_refills: u64,
    pub unhappy_without_opposite: u64,
}

/// A run in progress.
#[derive(Clone, Debug)]
pub struct ModelState {
    params: ModelParams,
    net: Network,
    groups: GroupAssignment,
    same: Vec<u32>,
    order: Vec<AgentId>,
    steps_done: u32,
    rng: ChaCha8Rng,
    diagnostics: Diagnostics,
}

impl ModelState {
    /// Builds the initial random graph and group split from `seed`.
    pub fn new(params: ModelParams, seed: u64) -> Result<Self, ModelError> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = match params.wiring {
            Wiring::PerAgent => {
                Network::random_initiated(params.n, params.initial_degree, &mut rng)?
            }
            Wiring::ExactMean => Network::random(params.n, params.initial_degree, &mut rng)?,
        };
        let groups = GroupAssignment::split(params.n, params.small_fraction)?;
        Ok(Self::with_network(params, net, groups, rng))
    }

    /// Starts from a given graph, e.g. a hand-built scenario.
    pub fn from_parts(
        params: ModelParams,
        net: Network,
        groups: GroupAssignment,
        seed: u64,
    ) -> Result<Self, ModelError> {
        if net.n() != groups.len() {
            return Err(ModelError::InvalidParams(format!(
                "network has {} agents but groups label {}",
                net.n(),
                groups.len()
            )));
        }
        let params = ModelParams {
            n: net.n(),
            ..params
        };
        Ok(Self::with_network(
            params,
            net,
            groups,
            ChaCha8Rng::seed_from_u64(seed),
        ))
    }

    fn with_network(
        params: ModelParams,
        net: Network,
        groups: GroupAssignment,
        rng: ChaCha8Rng,
    ) -> Self {
        let same = (0..net.n())
            .map(|a| net.neighbor_stats(&groups, a).same as u32)
            .collect();
        let order = (0..net.n()).collect();
        Self {
            params,
            net,
            groups,
            same,
            order,
            steps_done: 0,
            rng,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn groups(&self) -> &GroupAssignment {
        &self.groups
    }

    /// Number of completed steps.
    pub fn steps_done(&self) -> u32 {
        self.steps_done
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    fn stats(&self, a: AgentId) -> NeighborStats {
        NeighborStats {
            same: self.same[a] as usize,
            total: self.net.degree(a),
        }
    }

    pub fn agent_happy(&self, a: AgentId) -> bool {
        let s = self.stats(a);
        is_happy(s.same, s.total, self.params.tolerance(self.groups.group(a)))
    }

    pub fn all_happy(&self) -> bool {
        (0..self.net.n()).all(|a| self.agent_happy(a))
    }

    fn link(&mut self, a: AgentId, b: AgentId) {
        if self.groups.group(a) == self.groups.group(b) {
            self.same[a] += 1;
            self.same[b] += 1;
        }
    }

    /// Applies the rule to agent `a`.
    pub fn activate(&mut self, a: AgentId) -> ActivationEvent {
        let before = self.stats(a);
        let edges_before = self.net.edge_count();
        let mine = self.groups.group(a);
        let mut ev = ActivationEvent {
            agent: a,
            before,
            happy: true,
            dropped: None,
            adds: 0,
            saturated: false,
            degree_after: before.total,
            edges_before,
            edges_after: edges_before,
        };
        if is_happy(before.same, before.total, self.params.tolerance(mine)) {
            return ev;
        }
        ev.happy = false;

        let opposite = before.opposite();
        if opposite == 0 {
            // only reachable with a tolerance above 1
            self.diagnostics.unhappy_without_opposite += 1;
            return ev;
        }
        let k = self.rng.gen_range(0..opposite);
        let b = self
            .net
            .neighbors(a)
            .iter()
            .map(|&b| b as AgentId)
            .filter(|&b| self.groups.group(b) != mine)
            .nth(k)
            .expect("opposite-neighbour count out of sync");
        self.net.remove_edge(a, b);
        ev.dropped = Some(b);

        while self.net.degree(a) < self.params.degree_floor {
            match self.net.add_random_nonneighbor(a, &mut self.rng) {
                Some(c) => {
                    self.link(a, c);
                    ev.adds += 1;
                }
                None => {
                    self.diagnostics.saturated_refills += 1;
                    ev.saturated = true;
                    break;
                }
            }
        }
        ev.degree_after = self.net.degree(a);
        ev.edges_after = self.net.edge_count();
        ev
    }

    /// One full step: every agent once, in a fresh uniform order.
    pub fn step(&mut self) -> StepReport {
        self.step_observed(|_, _, _| {})
    }

    /// Like [`step`](Self::step), calling `observe` after each activation.
    pub fn step_observed<F>(&mut self, mut observe: F) -> StepReport
    where
        F: FnMut(&Network, &GroupAssignment, &ActivationEvent),
    {
        for (i, slot) in self.order.iter_mut().enumerate() {
            *slot = i;
        }
        self.order.shuffle(&mut self.rng);

        let mut report = StepReport::default();
        for i in 0..self.order.len() {
            let a = self.order[i];
            let ev = self.activate(a);
            if !ev.happy {
                report.unhappy_before += 1;
            }
            if ev.dropped.is_some() {
                report.breaks += 1;
            }
            report.adds += ev.adds;
            observe(&self.net, &self.groups, &ev);
        }
        self.steps_done += 1;
        report.all_happy_after = self.all_happy();
        report
    }

    pub fn into_parts(self) -> (Network, GroupAssignment) {
        (self.net, self.groups)
    }
}

/// Outcome of one simulation.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub params: ModelParams,
    pub seed: u64,
    /// 1-based step after which every agent was happy.
    pub stabilisation_step: Option<u32>,
    pub steps_run: u32,
    pub similarity: SimilarityReport,
    pub diagnostics: Diagnostics,
    pub network: Network,
    pub groups: GroupAssignment,
}

impl RunResult {
    pub fn stabilised(&self) -> bool {
        self.stabilisation_step.is_some()
    }

    pub fn singular_profile(&self, k: usize) -> Result<SingularProfile, SpectralError> {
        spectral::singular_values(&self.network, k)
    }

    /// Embedded dimension of the final graph from its top `k` singular values.
    pub fn dimension(&self, k: usize) -> Result<DimEstimate, SpectralError> {
        spectral::zhu_ghodsi_dim(&self.singular_profile(k)?)
    }
}

/// Runs until every agent is happy or `max_steps` steps have elapsed.
pub fn run(params: &ModelParams, seed: u64) -> Result<RunResult, ModelError> {
    let mut state = ModelState::new(params.clone(), seed)?;
    let stabilisation_step = run_state(&mut state);
    Ok(finish(state, seed, stabilisation_step))
}

/// [`run`], calling `observe` after every activation.
pub fn run_observed<F>(
    params: &ModelParams,
    seed: u64,
    mut observe: F,
) -> Result<RunResult, ModelError>
where
    F: FnMut(&Network, &GroupAssignment, &ActivationEvent),
{
    let mut state = ModelState::new(params.clone(), seed)?;
    let mut stabilisation_step = None;
    while state.steps_done() < state.params().max_steps {
        if state.step_observed(&mut observe).all_happy_after {
            stabilisation_step = Some(state.steps_done());
            break;
        }
    }
    Ok(finish(state, seed, stabilisation_step))
}

/// Steps `state` to completion, returning the stabilisation step if any.
pub fn run_state(state: &mut ModelState) -> Option<u32> {
    while state.steps_done() < state.params().max_steps {
        if state.step().all_happy_after {
            return Some(state.steps_done());
        }
    }
    None
}

pub(crate) fn finish(state: ModelState, seed: u64, stabilisation_step: Option<u32>) -> RunResult {
    let params = state.params.clone();
    let diagnostics = state.diagnostics;
    let steps_run = state.steps_done;
    let (network, groups) = state.into_parts();
    let similarity = similarity_report(&network, &groups, &params);
    RunResult {
        params,
        seed,
        stabilisation_step,
        steps_run,
        similarity,
        diagnostics,
        network,
        groups,
    }
}
