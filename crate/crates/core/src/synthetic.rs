//! Explicitly enumerated networks for analytic scenarios and oracle checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{split_waiting, Hop, Ledger, LinkKey, Processing, Topology};
use crate::network::BITS_PER_BYTE;
use crate::profile::ResourceProfile;
use crate::traffic::Subtask;
use crate::zone::VnId;

#[derive(Debug, Clone)]
struct Arc {
    id: u32,
    to: VnId,
    propagation_s: f64,
    capacity: f64,
}

#[derive(Debug, Clone)]
struct Downlink {
    propagation_s: f64,
}

/// A directed graph with per-arc rate profiles and per-node compute and
/// downlink. Availability lives in the [`Ledger`] returned by the builder.
#[derive(Debug, Clone)]
pub struct TableNetwork {
    arcs: Vec<Vec<Arc>>,
    neighbors: Vec<Vec<VnId>>,
    compute: Vec<Option<f64>>,
    memory_gb: Vec<f64>,
    downlink: Vec<Option<Downlink>>,
    hops: Vec<Vec<Option<u32>>>,
    min_propagation: f64,
}

#[derive(Debug)]
pub struct TableBuilder {
    n: usize,
    arcs: Vec<(VnId, VnId, ResourceProfile, f64)>,
    compute: Vec<Option<ResourceProfile>>,
    memory_gb: Vec<f64>,
    downlink: Vec<Option<(ResourceProfile, f64)>>,
}

impl TableBuilder {
    /// One-way arc at constant `rate_gbps`.
    pub fn arc(&mut self, from: u32, to: u32, rate_gbps: f64, propagation_s: f64) -> &mut Self {
        let p = ResourceProfile::new(rate_gbps).expect("rate must be positive");
        self.arc_with(from, to, p, propagation_s)
    }

    pub fn arc_with(&mut self, from: u32, to: u32, profile: ResourceProfile, propagation_s: f64) -> &mut Self {
        self.arcs.push((VnId(from), VnId(to), profile, propagation_s));
        self
    }

    /// Arcs both ways, each with its own copy of the rate.
    pub fn edge(&mut self, a: u32, b: u32, rate_gbps: f64, propagation_s: f64) -> &mut Self {
        self.arc(a, b, rate_gbps, propagation_s).arc(b, a, rate_gbps, propagation_s)
    }

    pub fn edge_with(&mut self, a: u32, b: u32, profile: ResourceProfile, propagation_s: f64) -> &mut Self {
        self.arc_with(a, b, profile.clone(), propagation_s)
            .arc_with(b, a, profile, propagation_s)
    }

    pub fn compute(&mut self, vn: u32, gflops: f64) -> &mut Self {
        self.compute[vn as usize] = Some(ResourceProfile::new(gflops).expect("compute must be positive"));
        self
    }

    pub fn compute_with(&mut self, vn: u32, profile: ResourceProfile) -> &mut Self {
        self.compute[vn as usize] = Some(profile);
        self
    }

    pub fn memory(&mut self, vn: u32, gb: f64) -> &mut Self {
        self.memory_gb[vn as usize] = gb;
        self
    }

    pub fn downlink(&mut self, vn: u32, rate_gbps: f64, propagation_s: f64) -> &mut Self {
        let p = ResourceProfile::new(rate_gbps).expect("rate must be positive");
        self.downlink[vn as usize] = Some((p, propagation_s));
        self
    }

    pub fn build(&self) -> Result<(TableNetwork, Ledger)> {
        let n = self.n;
        let mut ledger = Ledger::new(1.0, 1.0, 1.0)?;
        let mut arcs: Vec<Vec<Arc>> = vec![Vec::new(); n];
        let mut neighbors: Vec<Vec<VnId>> = vec![Vec::new(); n];
        let mut min_propagation = f64::INFINITY;
        for (id, (from, to, profile, prop)) in self.arcs.iter().enumerate() {
            if from.index() >= n || to.index() >= n {
                return Err(Error::Lookup {
                    kind: "vn",
                    id: from.0.max(to.0) as u64,
                });
            }
            if from == to {
                return Err(Error::Structural(format!("self-loop at {from}")));
            }
            if !(*prop >= 0.0) {
                return Err(Error::domain("propagation must be >= 0"));
            }
            if neighbors[from.index()].contains(to) {
                return Err(Error::Structural(format!("duplicate arc {from} -> {to}")));
            }
            let id = id as u32;
            ledger.set_link(LinkKey::Edge(id), profile.clone());
            min_propagation = min_propagation.min(*prop);
            arcs[from.index()].push(Arc {
                id,
                to: *to,
                propagation_s: *prop,
                capacity: profile.capacity(),
            });
            neighbors[from.index()].push(*to);
        }
        let mut compute = vec![None; n];
        for (v, p) in self.compute.iter().enumerate() {
            if let Some(p) = p {
                compute[v] = Some(p.capacity());
                ledger.set_compute(VnId(v as u32), p.clone());
            }
        }
        let mut downlink = vec![None; n];
        for (v, d) in self.downlink.iter().enumerate() {
            if let Some((p, prop)) = d {
                downlink[v] = Some(Downlink { propagation_s: *prop });
                ledger.set_link(LinkKey::Sgl(VnId(v as u32)), p.clone());
            }
        }
        let hops = (0..n).map(|s| bfs(&neighbors, s)).collect();
        let net = TableNetwork {
            arcs,
            neighbors,
            compute,
            memory_gb: self.memory_gb.clone(),
            downlink,
            hops,
            min_propagation: if min_propagation.is_finite() { min_propagation } else { 0.0 },
        };
        Ok((net, ledger))
    }
}

fn bfs(neighbors: &[Vec<VnId>], source: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; neighbors.len()];
    dist[source] = Some(0);
    let mut queue = std::collections::VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].expect("queued nodes have a distance");
        for v in &neighbors[u] {
            if dist[v.index()].is_none() {
                dist[v.index()] = Some(d + 1);
                queue.push_back(v.index());
            }
        }
    }
    dist
}

impl TableNetwork {
    /// Every node starts with unlimited memory, no compute and no downlink.
    pub fn builder(n: usize) -> TableBuilder {
        TableBuilder {
            n,
            arcs: Vec::new(),
            compute: vec![None; n],
            memory_gb: vec![f64::INFINITY; n],
            downlink: vec![None; n],
        }
    }

    fn arc(&self, from: VnId, to: VnId) -> Option<&Arc> {
        self.arcs.get(from.index())?.iter().find(|a| a.to == to)
    }
}

impl Topology for TableNetwork {
    fn vn_count(&self) -> usize {
        self.arcs.len()
    }

    fn neighbors(&self, vn: VnId) -> &[VnId] {
        &self.neighbors[vn.index()]
    }

    fn hop(&self, ledger: &Ledger, from: VnId, to: VnId, volume_gb: f64, t: f64) -> Option<Hop> {
        let arc = self.arc(from, to)?;
        let key = LinkKey::Edge(arc.id);
        let bits = BITS_PER_BYTE * volume_gb;
        let t_trans = ledger.link(key).time_to_accumulate(t, bits);
        if !t_trans.is_finite() {
            return None;
        }
        let (transmission_s, waiting_s) = split_waiting(t_trans, bits / arc.capacity);
        Some(Hop {
            link: Some(key),
            transmission_s,
            waiting_s,
            propagation_s: arc.propagation_s,
        })
    }

    fn process(&self, ledger: &Ledger, vn: VnId, subtask: &Subtask, t: f64) -> Option<Processing> {
        let capacity = self.compute[vn.index()]?;
        if self.memory_gb[vn.index()] < subtask.memory_gb {
            return None;
        }
        let t_comp = ledger.compute(vn).time_to_accumulate(t, subtask.compute_gflo);
        if !t_comp.is_finite() {
            return None;
        }
        let (compute_s, waiting_s) = split_waiting(t_comp, subtask.compute_gflo / capacity);
        Some(Processing {
            compute_s,
            waiting_s,
            handover_transmission_s: 0.0,
            handover_propagation_s: 0.0,
            handovers: 0,
        })
    }

    fn downlink(&self, ledger: &Ledger, vn: VnId, volume_gb: f64, t: f64) -> Option<Hop> {
        let d = self.downlink[vn.index()].as_ref()?;
        let key = LinkKey::Sgl(vn);
        let profile = ledger.link(key);
        let bits = BITS_PER_BYTE * volume_gb;
        let t_trans = profile.time_to_accumulate(t, bits);
        if !t_trans.is_finite() {
            return None;
        }
        let (transmission_s, waiting_s) = split_waiting(t_trans, bits / profile.capacity());
        Some(Hop {
            link: Some(key),
            transmission_s,
            waiting_s,
            propagation_s: d.propagation_s,
        })
    }

    fn min_hop_delay(&self, volume_gb: f64) -> f64 {
        let rate = self.max_rate();
        if rate > 0.0 {
            BITS_PER_BYTE * volume_gb / rate + self.min_propagation
        } else {
            0.0
        }
    }

    fn peak_compute_gflops(&self) -> f64 {
        self.compute.iter().flatten().copied().fold(0.0, f64::max)
    }

    fn hop_distance(&self, a: VnId, b: VnId) -> Option<u32> {
        self.hops[a.index()][b.index()]
    }
}

impl TableNetwork {
    fn max_rate(&self) -> f64 {
        self.arcs
            .iter()
            .flatten()
            .map(|a| a.capacity)
            .fold(0.0, f64::max)
    }
}

/// Parameters of [`random_instance`].
#[derive(Debug, Clone, Copy)]
pub struct RandomInstance {
    pub vns: usize,
    /// Upper bound on pieces per arc rate profile.
    pub max_pieces: usize,
    /// Probability of each non-tree pair being linked.
    pub extra_edge_probability: f64,
    pub with_compute: bool,
}

impl Default for RandomInstance {
    fn default() -> Self {
        Self {
            vns: 6,
            max_pieces: 3,
            extra_edge_probability: 0.4,
            with_compute: false,
        }
    }
}

fn random_profile(rng: &mut ChaCha8Rng, capacity: f64, max_pieces: usize, horizon: f64) -> ResourceProfile {
    let pieces = rng.random_range(1..=max_pieces.max(1));
    let mut cuts: Vec<f64> = (0..pieces - 1).map(|_| rng.random_range(0.0..horizon)).collect();
    cuts.sort_by(f64::total_cmp);
    let mut steps = Vec::with_capacity(pieces);
    for c in cuts {
        steps.push((c, capacity * rng.random_range(0.0..=1.0f64)));
    }
    // The final piece runs forever at full capacity.
    let mut profile = ResourceProfile::new(capacity).expect("positive capacity");
    let mut start = 0.0;
    for (end, avail) in steps {
        if end > start && avail < capacity {
            profile
                .reserve(start, end, capacity - avail)
                .expect("pieces are disjoint");
        }
        start = end;
    }
    profile
}

/// A connected random graph: spanning tree plus random extra links, each arc
/// with a piecewise-constant FIFO rate profile.
pub fn random_instance(seed: u64, spec: RandomInstance) -> Result<(TableNetwork, Ledger)> {
    if spec.vns == 0 {
        return Err(Error::domain("instance needs at least one VN"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = TableNetwork::builder(spec.vns);
    let mut linked = vec![vec![false; spec.vns]; spec.vns];
    let link = |b: &mut TableBuilder, rng: &mut ChaCha8Rng, u: usize, v: usize| {
        for (x, y) in [(u, v), (v, u)] {
            let cap = rng.random_range(1.0..10.0);
            let profile = random_profile(rng, cap, spec.max_pieces, 3.0);
            let prop = rng.random_range(0.0..0.05);
            b.arc_with(x as u32, y as u32, profile, prop);
        }
    };
    for v in 1..spec.vns {
        let u = rng.random_range(0..v);
        link(&mut b, &mut rng, u, v);
        linked[u][v] = true;
        linked[v][u] = true;
    }
    for u in 0..spec.vns {
        for v in u + 1..spec.vns {
            if !linked[u][v] && rng.random_bool(spec.extra_edge_probability) {
                link(&mut b, &mut rng, u, v);
            }
        }
    }
    if spec.with_compute {
        for v in 0..spec.vns as u32 {
            let cap = rng.random_range(20.0..200.0);
            let profile = random_profile(&mut rng, cap, spec.max_pieces, 3.0);
            b.compute_with(v, profile);
            b.downlink(v, rng.random_range(0.1..1.0), rng.random_range(0.001..0.005));
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphView;

    #[test]
    fn random_instances_are_connected() {
        for seed in 0..50 {
            let (net, _) = random_instance(seed, RandomInstance::default()).unwrap();
            for v in 0..6 {
                assert!(net.hop_distance(VnId(0), VnId(v)).is_some());
            }
        }
    }

    #[test]
    fn min_hop_delay_bounds_every_hop() {
        for seed in 0..20 {
            let (net, ledger) = random_instance(seed, RandomInstance::default()).unwrap();
            let view = GraphView::new(&net, &ledger);
            let lb = net.min_hop_delay(0.3);
            for u in 0..6u32 {
                for &v in net.neighbors(VnId(u)) {
                    for k in 0..10 {
                        if let Some(h) = view.hop(VnId(u), v, 0.3, 0.4 * k as f64) {
                            assert!(h.total() >= lb - 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn builder_rejects_bad_arcs() {
        let mut b = TableNetwork::builder(2);
        b.arc(0, 0, 1.0, 0.0);
        assert!(b.build().is_err());
        let mut b = TableNetwork::builder(2);
        b.arc(0, 1, 1.0, 0.0).arc(0, 1, 2.0, 0.0);
        assert!(b.build().is_err());
        let mut b = TableNetwork::builder(2);
        b.arc(0, 5, 1.0, 0.0);
        assert!(b.build().is_err());
    }
}
