//! The routing-facing view of a dynamic network.
//!
//! A [`Topology`] answers time-dependent, subtask-dependent weight queries for
//! hops between adjacent VNs, on-node processing and the satellite-to-ground
//! delivery. Mutable availability lives in a separate [`Ledger`] so that
//! many planners can read one topology while each scenario replica owns its
//! own reservations.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::orbit::SatId;
use crate::profile::ResourceProfile;
use crate::traffic::Subtask;
use crate::zone::VnId;

/// Identifies one reservable transmission resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkKey {
    /// One channel of a directed inter-satellite link.
    Isl { from: SatId, to: SatId, channel: u16 },
    /// Satellite-to-ground downlink serving a VN.
    Sgl(VnId),
    /// An explicitly enumerated edge of a synthetic graph.
    Edge(u32),
}

/// Cost of one transmission hop. `total()` is the weight `T_trans + T_prop`,
/// with `T_trans` split into pure transmission and waiting on busy capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hop {
    /// `None` for zero-cost boundary hops.
    pub link: Option<LinkKey>,
    pub transmission_s: f64,
    pub waiting_s: f64,
    pub propagation_s: f64,
}

impl Hop {
    pub const FREE: Hop = Hop {
        link: None,
        transmission_s: 0.0,
        waiting_s: 0.0,
        propagation_s: 0.0,
    };

    pub fn total(&self) -> f64 {
        self.transmission_s + self.waiting_s + self.propagation_s
    }
}

/// Cost of processing a subtask at one VN, including any satellite handover
/// (self-loop) needed while the computation runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Processing {
    pub compute_s: f64,
    pub waiting_s: f64,
    pub handover_transmission_s: f64,
    pub handover_propagation_s: f64,
    pub handovers: u32,
}

impl Processing {
    pub fn total(&self) -> f64 {
        self.compute_s + self.waiting_s + self.handover_transmission_s + self.handover_propagation_s
    }
}

/// Splits a raw integral-inversion delay into pure work time and waiting.
pub(crate) fn split_waiting(total: f64, pure: f64) -> (f64, f64) {
    let busy = pure.min(total);
    (busy, total - busy)
}

pub trait Topology: Sync {
    fn vn_count(&self) -> usize;

    /// Static adjacency used to build candidate paths.
    fn neighbors(&self, vn: VnId) -> &[VnId];

    /// Best hop from `from` to `to` entered at `t` for `volume_gb` of data, or
    /// `None` when the weight is infinite.
    fn hop(&self, ledger: &Ledger, from: VnId, to: VnId, volume_gb: f64, t: f64) -> Option<Hop>;

    fn process(&self, ledger: &Ledger, vn: VnId, subtask: &Subtask, t: f64) -> Option<Processing>;

    /// Delivery of `volume_gb` from `vn` to the ground station beneath it.
    fn downlink(&self, ledger: &Ledger, vn: VnId, volume_gb: f64, t: f64) -> Option<Hop>;

    /// A per-hop lower bound on any finite hop weight carrying `volume_gb`.
    fn min_hop_delay(&self, volume_gb: f64) -> f64;

    /// Best achievable compute rate at any VN.
    fn peak_compute_gflops(&self) -> f64;

    /// Minimum number of hops between `a` and `b` in the static adjacency.
    fn hop_distance(&self, a: VnId, b: VnId) -> Option<u32>;
}

/// Borrowed `(topology, ledger)` pair: the graph `G_SFDNM(t)` as seen by one
/// planner at one ledger state.
#[derive(Debug)]
pub struct GraphView<'a, T: ?Sized> {
    pub topology: &'a T,
    pub ledger: &'a Ledger,
}

impl<T: ?Sized> Clone for GraphView<'_, T> {
    fn clone(&self) -> Self {
        *self
    }
}
impl<T: ?Sized> Copy for GraphView<'_, T> {}

impl<'a, T: Topology + ?Sized> GraphView<'a, T> {
    pub fn new(topology: &'a T, ledger: &'a Ledger) -> Self {
        Self { topology, ledger }
    }

    pub fn hop(&self, from: VnId, to: VnId, volume_gb: f64, t: f64) -> Option<Hop> {
        self.topology.hop(self.ledger, from, to, volume_gb, t)
    }

    pub fn process(&self, vn: VnId, subtask: &Subtask, t: f64) -> Option<Processing> {
        self.topology.process(self.ledger, vn, subtask, t)
    }

    pub fn downlink(&self, vn: VnId, volume_gb: f64, t: f64) -> Option<Hop> {
        self.topology.downlink(self.ledger, vn, volume_gb, t)
    }
}

/// Edge weight `w_e(t)`: transmission plus propagation, `+∞` when infeasible.
pub fn edge_weight<T: Topology + ?Sized>(
    view: GraphView<'_, T>,
    from: VnId,
    to: VnId,
    volume_gb: f64,
    t: f64,
) -> f64 {
    view.hop(from, to, volume_gb, t)
        .map_or(f64::INFINITY, |h| h.total())
}

/// Node weight `w_i(t)`: processing delay, `+∞` when memory, energy or
/// coverage rule the VN out.
pub fn node_weight<T: Topology + ?Sized>(
    view: GraphView<'_, T>,
    vn: VnId,
    subtask: &Subtask,
    t: f64,
) -> f64 {
    view.process(vn, subtask, t).map_or(f64::INFINITY, |p| p.total())
}

/// Availability bookkeeping for every reservable resource. Missing entries are
/// idle at the default capacity of their kind.
#[derive(Debug, Clone)]
pub struct Ledger {
    idle_link: ResourceProfile,
    idle_compute: ResourceProfile,
    idle_sgl: ResourceProfile,
    links: HashMap<LinkKey, ResourceProfile>,
    compute: HashMap<VnId, ResourceProfile>,
}

impl Ledger {
    pub fn new(link_capacity: f64, compute_capacity: f64, sgl_capacity: f64) -> Result<Self> {
        Ok(Self {
            idle_link: ResourceProfile::new(link_capacity)?,
            idle_compute: ResourceProfile::new(compute_capacity)?,
            idle_sgl: ResourceProfile::new(sgl_capacity)?,
            links: HashMap::new(),
            compute: HashMap::new(),
        })
    }

    pub fn link(&self, key: LinkKey) -> &ResourceProfile {
        self.links.get(&key).unwrap_or(match key {
            LinkKey::Sgl(_) => &self.idle_sgl,
            _ => &self.idle_link,
        })
    }

    pub fn compute(&self, vn: VnId) -> &ResourceProfile {
        self.compute.get(&vn).unwrap_or(&self.idle_compute)
    }

    pub fn link_mut(&mut self, key: LinkKey) -> &mut ResourceProfile {
        let idle = match key {
            LinkKey::Sgl(_) => &self.idle_sgl,
            _ => &self.idle_link,
        };
        self.links.entry(key).or_insert_with(|| idle.clone())
    }

    pub fn compute_mut(&mut self, vn: VnId) -> &mut ResourceProfile {
        let idle = &self.idle_compute;
        self.compute.entry(vn).or_insert_with(|| idle.clone())
    }

    pub fn set_link(&mut self, key: LinkKey, profile: ResourceProfile) {
        self.links.insert(key, profile);
    }

    pub fn set_compute(&mut self, vn: VnId, profile: ResourceProfile) {
        self.compute.insert(vn, profile);
    }

    /// Occupies `[start, end)` on a link (`R ← 0`).
    pub fn reserve_link(&mut self, key: LinkKey, start: f64, end: f64) -> Result<()> {
        self.link_mut(key).occupy(start, end)
    }

    /// Occupies `[start, end)` of a VN's compute (`C ← 0`).
    pub fn reserve_compute(&mut self, vn: VnId, start: f64, end: f64) -> Result<()> {
        self.compute_mut(vn).occupy(start, end)
    }

    /// Every explicitly tracked profile.
    pub fn profiles(&self) -> impl Iterator<Item = &ResourceProfile> {
        self.links.values().chain(self.compute.values())
    }
}
