//! Time-dependent shortest paths: a genetic search and an exhaustive oracle.
//!
//! Both evaluate a path with the same recursion (`t ← t + w(t)` hop by hop), so
//! their lengths are directly comparable.

use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphView, Topology};
use crate::zone::VnId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population_size: usize,
    pub max_generations: usize,
    pub stall_generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elite_count: usize,
    pub rng_seed: u64,
    /// Probability that a walk step heads toward the destination.
    pub greedy_bias: f64,
    pub tournament_size: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population_size: 40,
            max_generations: 200,
            stall_generations: 25,
            crossover_rate: 0.9,
            mutation_rate: 0.2,
            elite_count: 2,
            rng_seed: 0,
            greedy_bias: 0.8,
            tournament_size: 3,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::config("ga.population_size", "must be >= 2"));
        }
        if self.elite_count >= self.population_size {
            return Err(Error::config("ga.elite_count", "must be < population_size"));
        }
        for (field, v) in [
            ("ga.crossover_rate", self.crossover_rate),
            ("ga.mutation_rate", self.mutation_rate),
            ("ga.greedy_bias", self.greedy_bias),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(field, format!("must be in [0, 1], got {v}")));
            }
        }
        if self.tournament_size == 0 {
            return Err(Error::config("ga.tournament_size", "must be >= 1"));
        }
        Ok(())
    }
}

/// A loop-free path from source to destination with its length at the query
/// instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub path: Vec<VnId>,
    pub fitness: f64,
}

/// Best path found. An unreachable destination has an empty path and
/// infinite length; `source == dest` gives `[source]` with length 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub path: Vec<VnId>,
    pub length_s: f64,
}

impl PathResult {
    pub fn unreachable() -> Self {
        Self {
            path: Vec::new(),
            length_s: f64::INFINITY,
        }
    }

    pub fn is_reachable(&self) -> bool {
        !self.path.is_empty() && self.length_s.is_finite()
    }
}

/// Memo of hop weights for one `(ledger state, volume)`, keyed by the exact
/// entry instant.
#[derive(Debug, Default, Clone)]
pub struct HopMemo {
    hops: HashMap<(u32, u32, u64), f64>,
}

impl HopMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.hops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hops.is_empty()
    }

    fn weight<T: Topology + ?Sized>(&mut self, view: GraphView<'_, T>, a: VnId, b: VnId, volume_gb: f64, t: f64) -> f64 {
        *self
            .hops
            .entry((a.0, b.0, t.to_bits()))
            .or_insert_with(|| view.hop(a, b, volume_gb, t).map_or(f64::INFINITY, |h| h.total()))
    }
}

/// `ψ(path, t)`, memoized hop by hop. Same arithmetic as
/// [`crate::delay::leg_length`].
pub fn path_length<T: Topology + ?Sized>(
    view: GraphView<'_, T>,
    memo: &mut HopMemo,
    path: &[VnId],
    volume_gb: f64,
    t1: f64,
) -> f64 {
    let mut t = t1;
    for w in path.windows(2) {
        let d = memo.weight(view, w[0], w[1], volume_gb, t);
        if !d.is_finite() {
            return f64::INFINITY;
        }
        t += d;
    }
    t - t1
}

/// Diagnostics of one GA run.
#[derive(Debug, Clone, Default)]
pub struct GaTrace {
    /// Best fitness after each generation, starting with the initial population.
    pub best_per_generation: Vec<f64>,
    pub evaluations: usize,
}

struct Search<'a, 'g, T: ?Sized> {
    view: GraphView<'g, T>,
    memo: &'a mut HopMemo,
    cache: HashMap<Vec<VnId>, f64>,
    volume_gb: f64,
    t: f64,
    dest: VnId,
    rng: ChaCha8Rng,
    bias: f64,
    evaluations: usize,
}

impl<T: Topology + ?Sized> Search<'_, '_, T> {
    fn fitness(&mut self, path: &[VnId]) -> f64 {
        if let Some(&f) = self.cache.get(path) {
            return f;
        }
        self.evaluations += 1;
        let f = path_length(self.view, self.memo, path, self.volume_gb, self.t);
        self.cache.insert(path.to_vec(), f);
        f
    }

    /// Extends `prefix` to the destination by a walk that avoids revisiting
    /// nodes. `None` if it gets stuck.
    fn walk(&mut self, mut prefix: Vec<VnId>, bias: f64) -> Option<Vec<VnId>> {
        let topo = self.view.topology;
        let limit = topo.vn_count();
        let mut visited = vec![false; limit];
        for v in &prefix {
            visited[v.index()] = true;
        }
        let mut cur = *prefix.last()?;
        while cur != self.dest {
            if prefix.len() > limit {
                return None;
            }
            let open: smallvec::SmallVec<[VnId; 8]> = topo
                .neighbors(cur)
                .iter()
                .copied()
                .filter(|v| !visited[v.index()])
                .collect();
            if open.is_empty() {
                return None;
            }
            let next = if self.rng.random_bool(bias) {
                let dist = |v: VnId| topo.hop_distance(v, self.dest).unwrap_or(u32::MAX);
                let best = open.iter().map(|&v| dist(v)).min()?;
                let closest: smallvec::SmallVec<[VnId; 8]> =
                    open.iter().copied().filter(|&v| dist(v) == best).collect();
                *closest.choose(&mut self.rng)?
            } else {
                *open.choose(&mut self.rng)?
            };
            visited[next.index()] = true;
            prefix.push(next);
            cur = next;
        }
        Some(prefix)
    }

    fn tournament<'p>(&mut self, pop: &'p [Chromosome], size: usize) -> &'p Chromosome {
        let mut best = &pop[self.rng.random_range(0..pop.len())];
        for _ in 1..size {
            let c = &pop[self.rng.random_range(0..pop.len())];
            if c.fitness < best.fitness {
                best = c;
            }
        }
        best
    }
}

/// Removes cycles: whenever a node repeats, the loop between its occurrences
/// is cut out.
pub fn remove_loops(path: &[VnId]) -> Vec<VnId> {
    let mut out: Vec<VnId> = Vec::with_capacity(path.len());
    for &v in path {
        if let Some(i) = out.iter().position(|&x| x == v) {
            out.truncate(i + 1);
        } else {
            out.push(v);
        }
    }
    out
}

fn crossover(a: &[VnId], b: &[VnId], rng: &mut ChaCha8Rng) -> Option<Vec<VnId>> {
    let common: smallvec::SmallVec<[(usize, usize); 8]> = a[1..a.len().saturating_sub(1)]
        .iter()
        .enumerate()
        .filter_map(|(i, v)| b.iter().position(|x| x == v).map(|j| (i + 1, j)))
        .collect();
    let &(i, j) = common.choose(rng)?;
    let mut child = a[..i].to_vec();
    child.extend_from_slice(&b[j..]);
    Some(remove_loops(&child))
}

/// GA search for the shortest time-dependent path from `source` to `dest`
/// entered at `t` carrying `volume_gb`. Stops early once the best length
/// reaches `lower_bound`.
#[allow(clippy::too_many_arguments)]
pub fn ga_search<T: Topology + ?Sized>(
    view: GraphView<'_, T>,
    memo: &mut HopMemo,
    source: VnId,
    dest: VnId,
    t: f64,
    volume_gb: f64,
    lower_bound: f64,
    params: &GaParams,
) -> Result<(PathResult, GaTrace)> {
    params.validate()?;
    check_endpoints(view.topology, source, dest, t)?;
    let mut trace = GaTrace::default();
    if source == dest {
        trace.best_per_generation.push(0.0);
        return Ok((
            PathResult {
                path: vec![source],
                length_s: 0.0,
            },
            trace,
        ));
    }
    if view.topology.hop_distance(source, dest).is_none() {
        return Ok((PathResult::unreachable(), trace));
    }
    // Every path leaves the source at `t`.
    let stuck = view.topology.neighbors(source).iter().all(|&n| view.hop(source, n, volume_gb, t).is_none());
    if stuck {
        return Ok((PathResult::unreachable(), trace));
    }
    let mut s = Search {
        view,
        memo,
        cache: HashMap::new(),
        volume_gb,
        t,
        dest,
        rng: ChaCha8Rng::seed_from_u64(params.rng_seed),
        bias: params.greedy_bias,
        evaluations: 0,
    };

    // Initial population: mostly destination-biased walks, a few pure random
    // walks. Give up on a slot after repeated dead ends.
    let random_slots = (params.population_size / 5).max(1);
    let mut pop: Vec<Chromosome> = Vec::with_capacity(params.population_size);
    let mut attempts = 0;
    while pop.len() < params.population_size && attempts < params.population_size * 20 {
        attempts += 1;
        let bias = if pop.len() < params.population_size - random_slots {
            s.bias
        } else {
            0.0
        };
        if let Some(path) = s.walk(vec![source], bias) {
            let fitness = s.fitness(&path);
            pop.push(Chromosome { path, fitness });
        }
    }
    if pop.is_empty() {
        return Ok((PathResult::unreachable(), trace));
    }
    sort(&mut pop);
    trace.best_per_generation.push(pop[0].fitness);

    let mut stall = 0;
    // A population with no finite path gives up sooner.
    let hopeless = (params.stall_generations / 5).max(1);
    for _ in 0..params.max_generations {
        let limit = if pop[0].fitness.is_finite() { params.stall_generations } else { hopeless };
        if pop[0].fitness <= lower_bound || stall >= limit {
            break;
        }
        let elite = params.elite_count.min(pop.len());
        let mut next: Vec<Chromosome> = pop[..elite].to_vec();
        while next.len() < params.population_size {
            let a = s.tournament(&pop, params.tournament_size).path.clone();
            let mut child = if s.rng.random_bool(params.crossover_rate) {
                let b = s.tournament(&pop, params.tournament_size).path.clone();
                crossover(&a, &b, &mut s.rng).unwrap_or(a)
            } else {
                a
            };
            if s.rng.random_bool(params.mutation_rate) && child.len() >= 2 {
                let cut = s.rng.random_range(0..child.len() - 1);
                let bias = s.bias;
                if let Some(m) = s.walk(child[..=cut].to_vec(), bias) {
                    child = m;
                }
            }
            let fitness = s.fitness(&child);
            next.push(Chromosome { path: child, fitness });
        }
        sort(&mut next);
        if next[0].fitness < pop[0].fitness {
            stall = 0;
        } else {
            stall += 1;
        }
        pop = next;
        trace.best_per_generation.push(pop[0].fitness);
    }
    trace.evaluations = s.evaluations;
    let best = pop.swap_remove(0);
    if best.fitness.is_finite() {
        Ok((
            PathResult {
                path: best.path,
                length_s: best.fitness,
            },
            trace,
        ))
    } else {
        Ok((PathResult::unreachable(), trace))
    }
}

fn sort(pop: &mut [Chromosome]) {
    pop.sort_by(|a, b| a.fitness.total_cmp(&b.fitness).then_with(|| a.path.len().cmp(&b.path.len())));
}

fn check_endpoints<T: Topology + ?Sized>(topology: &T, source: VnId, dest: VnId, t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("start time must be >= 0, got {t}")));
    }
    for v in [source, dest] {
        if v.index() >= topology.vn_count() {
            return Err(Error::Lookup {
                kind: "vn",
                id: v.0 as u64,
            });
        }
    }
    Ok(())
}

/// GA shortest path with a fresh memo and no early-exit bound.
pub fn ga_shortest_path<T: Topology + ?Sized>(
    view: GraphView<'_, T>,
    source: VnId,
    dest: VnId,
    t: f64,
    volume_gb: f64,
    params: &GaParams,
) -> Result<PathResult> {
    let mut memo = HopMemo::new();
    ga_search(view, &mut memo, source, dest, t, volume_gb, 0.0, params).map(|(r, _)| r)
}

/// Partial paths explored before giving up.
pub const ENUMERATION_GUARD: usize = 1_000_000;

/// Exact minimum over every loop-free path of at most `max_hops` hops.
pub fn brute_force_shortest_path<T: Topology + ?Sized>(
    view: GraphView<'_, T>,
    source: VnId,
    dest: VnId,
    t: f64,
    volume_gb: f64,
    max_hops: usize,
) -> Result<PathResult> {
    let mut memo = HopMemo::new();
    brute_force_with(view, &mut memo, source, dest, t, volume_gb, max_hops)
}

pub(crate) fn brute_force_with<T: Topology + ?Sized>(
    view: GraphView<'_, T>,
    memo: &mut HopMemo,
    source: VnId,
    dest: VnId,
    t: f64,
    volume_gb: f64,
    max_hops: usize,
) -> Result<PathResult> {
    check_endpoints(view.topology, source, dest, t)?;
    if source == dest {
        return Ok(PathResult {
            path: vec![source],
            length_s: 0.0,
        });
    }
    struct Dfs<'m, 'g, T: ?Sized> {
        view: GraphView<'g, T>,
        memo: &'m mut HopMemo,
        dest: VnId,
        volume_gb: f64,
        t1: f64,
        max_hops: usize,
        path: Vec<VnId>,
        on_path: Vec<bool>,
        best: PathResult,
        explored: usize,
    }
    impl<T: Topology + ?Sized> Dfs<'_, '_, T> {
        fn go(&mut self, t: f64) -> Result<()> {
            self.explored += 1;
            if self.explored > ENUMERATION_GUARD {
                return Err(Error::Capacity(ENUMERATION_GUARD));
            }
            let cur = *self.path.last().expect("path holds the source");
            if cur == self.dest {
                let len = t - self.t1;
                if len < self.best.length_s {
                    self.best = PathResult {
                        path: self.path.clone(),
                        length_s: len,
                    };
                }
                return Ok(());
            }
            if self.path.len() > self.max_hops {
                return Ok(());
            }
            let topo = self.view.topology;
            for &next in topo.neighbors(cur) {
                if self.on_path[next.index()] {
                    continue;
                }
                let w = self.memo.weight(self.view, cur, next, self.volume_gb, t);
                // Weights are non-negative, so a prefix already at the best
                // length cannot improve on it.
                if !w.is_finite() || t + w - self.t1 >= self.best.length_s {
                    continue;
                }
                self.on_path[next.index()] = true;
                self.path.push(next);
                self.go(t + w)?;
                self.path.pop();
                self.on_path[next.index()] = false;
            }
            Ok(())
        }
    }
    let mut on_path = vec![false; view.topology.vn_count()];
    on_path[source.index()] = true;
    let mut dfs = Dfs {
        view,
        memo,
        dest,
        volume_gb,
        t1: t,
        max_hops,
        path: vec![source],
        on_path,
        best: PathResult::unreachable(),
        explored: 0,
    };
    dfs.go(t)?;
    Ok(dfs.best)
}

/// A sub-solver for one routing leg.
pub trait PathSolver: Sync {
    /// `seed` decorrelates independent calls; `lower_bound` allows early exit.
    #[allow(clippy::too_many_arguments)]
    fn solve<T: Topology + ?Sized>(
        &self,
        view: GraphView<'_, T>,
        memo: &mut HopMemo,
        source: VnId,
        dest: VnId,
        t: f64,
        volume_gb: f64,
        lower_bound: f64,
        seed: u64,
    ) -> Result<PathResult>;
}

#[derive(Debug, Clone, Default)]
pub struct Genetic(pub GaParams);

impl PathSolver for Genetic {
    fn solve<T: Topology + ?Sized>(
        &self,
        view: GraphView<'_, T>,
        memo: &mut HopMemo,
        source: VnId,
        dest: VnId,
        t: f64,
        volume_gb: f64,
        lower_bound: f64,
        seed: u64,
    ) -> Result<PathResult> {
        let params = GaParams {
            rng_seed: seed,
            ..self.0.clone()
        };
        ga_search(view, memo, source, dest, t, volume_gb, lower_bound, &params).map(|(r, _)| r)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Exhaustive {
    pub max_hops: usize,
}

impl PathSolver for Exhaustive {
    fn solve<T: Topology + ?Sized>(
        &self,
        view: GraphView<'_, T>,
        memo: &mut HopMemo,
        source: VnId,
        dest: VnId,
        t: f64,
        volume_gb: f64,
        _lower_bound: f64,
        _seed: u64,
    ) -> Result<PathResult> {
        brute_force_with(view, memo, source, dest, t, volume_gb, self.max_hops)
    }
}
