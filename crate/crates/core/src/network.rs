//! The snapshot-free dynamic network model over a real constellation.
//!
//! VNs are static zones; which satellites realize a VN changes continuously.
//! Every weight query resolves the association at the query instant and then
//! classifies the VN pair into one of five situations:
//!
//! 1. both VNs hold exactly one satellite: one normal edge;
//! 2. either VN is empty: rate 0, distance ∞, weight ∞;
//! 3. one satellite sits on the shared boundary and serves both VNs: weight 0;
//! 4. the satellite serving a VN leaves while it still has work, so the work is
//!    handed to its successor over a self-loop;
//! 5. several satellites in a VN: parallel edges, the router takes the best.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::association::{AssociationIndex, AssociationMap};
use crate::error::{Error, Result};
use crate::graph::{split_waiting, Hop, Ledger, LinkKey, Processing, Topology};
use crate::orbit::{sub_point_unchecked, Constellation, SatId};
use crate::traffic::Subtask;
use crate::zone::{VnId, ZoneGrid};

/// Gigabytes to gigabits.
pub const BITS_PER_BYTE: f64 = 8.0;

const MAX_HANDOVERS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkParams {
    pub isl_rate_gbps: f64,
    pub isl_channels: u16,
    pub isl_range_m: f64,
    pub sgl_rate_gbps: f64,
    pub compute_gflops: f64,
    pub memory_gb: f64,
    pub energy_wh: f64,
    /// `f(C̃) = energy_per_gflo_wh · C̃`.
    pub energy_per_gflo_wh: f64,
    /// `R = σ·B`; rates are stored directly, so this only scales them.
    pub spectral_efficiency: f64,
    /// A satellite whose zone entry is at most this far ahead already serves
    /// the zone it is about to enter.
    pub boundary_lookahead_s: f64,
    /// Horizon used when listing self-loop edges in a snapshot.
    pub handover_lookahead_s: f64,
    pub visibility_step_s: f64,
    /// Sampling step for building the association index.
    pub association_step_s: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            isl_rate_gbps: 5.0,
            isl_channels: 1,
            isl_range_m: 7_800_000.0,
            sgl_rate_gbps: 0.2,
            compute_gflops: 100.0,
            memory_gb: 8.0,
            energy_wh: f64::INFINITY,
            energy_per_gflo_wh: 0.0,
            spectral_efficiency: 1.0,
            boundary_lookahead_s: 0.1,
            handover_lookahead_s: 10.0,
            visibility_step_s: 1.0,
            association_step_s: 1.0,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("network.isl_rate_gbps", self.isl_rate_gbps),
            ("network.isl_range_m", self.isl_range_m),
            ("network.sgl_rate_gbps", self.sgl_rate_gbps),
            ("network.compute_gflops", self.compute_gflops),
            ("network.memory_gb", self.memory_gb),
            ("network.energy_wh", self.energy_wh),
            ("network.spectral_efficiency", self.spectral_efficiency),
            ("network.visibility_step_s", self.visibility_step_s),
            ("network.association_step_s", self.association_step_s),
        ];
        for (field, v) in positive {
            if !(v > 0.0) {
                return Err(Error::config(field, format!("must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("network.energy_per_gflo_wh", self.energy_per_gflo_wh),
            ("network.boundary_lookahead_s", self.boundary_lookahead_s),
            ("network.handover_lookahead_s", self.handover_lookahead_s),
        ];
        for (field, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        if self.isl_channels == 0 {
            return Err(Error::config("network.isl_channels", "must be >= 1"));
        }
        Ok(())
    }

    /// Rate of one ISL channel in Gb/s.
    pub fn channel_rate_gbps(&self) -> f64 {
        self.spectral_efficiency * self.isl_rate_gbps / self.isl_channels as f64
    }

    pub fn sgl_capacity_gbps(&self) -> f64 {
        self.spectral_efficiency * self.sgl_rate_gbps
    }

    pub fn new_ledger(&self) -> Result<Ledger> {
        Ledger::new(self.channel_rate_gbps(), self.compute_gflops, self.sgl_capacity_gbps())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    Normal,
    EmptyVn,
    SameSatelliteBoundary,
    SelfLoop,
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicEdge {
    pub head_vn: VnId,
    pub tail_vn: VnId,
    pub scenario: Scenario,
    pub satellite_pair: Option<(SatId, SatId)>,
    /// Distance at the listing instant; `∞` for empty-VN edges.
    pub distance_m: f64,
}

#[derive(Debug, Clone, Copy)]
struct Serving {
    sat: SatId,
    exit: f64,
}

type ServingSet = SmallVec<[Serving; 8]>;

#[derive(Debug, Clone)]
pub struct SfdnmNetwork {
    constellation: Constellation,
    grid: ZoneGrid,
    index: AssociationIndex,
    params: NetworkParams,
}

impl SfdnmNetwork {
    /// Builds the network and indexes satellite/zone association over
    /// `[0, horizon_s)`. Queries past the horizon fall back to direct
    /// propagation.
    pub fn new(constellation: Constellation, grid: ZoneGrid, params: NetworkParams, horizon_s: f64) -> Result<Self> {
        params.validate()?;
        if !(horizon_s > 0.0 && horizon_s.is_finite()) {
            return Err(Error::domain("association horizon must be finite and > 0"));
        }
        let index = AssociationIndex::build(&constellation, &grid, horizon_s, params.association_step_s);
        Ok(Self {
            constellation,
            grid,
            index,
            params,
        })
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn grid(&self) -> &ZoneGrid {
        &self.grid
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn index(&self) -> &AssociationIndex {
        &self.index
    }

    pub fn new_ledger(&self) -> Result<Ledger> {
        self.params.new_ledger()
    }

    pub fn association(&self, t: f64) -> AssociationMap {
        if self.index.covers(t) {
            self.index.snapshot(t)
        } else {
            let state = self
                .constellation
                .propagate(t.max(0.0))
                .expect("time is non-negative");
            crate::association::associate(&state, &self.grid)
        }
    }

    fn zone_of_sat(&self, sat: SatId, t: f64) -> VnId {
        let (lon, lat) = sub_point_unchecked(self.constellation.position(sat, t));
        self.grid.zone_of(lon, lat)
    }

    fn serving(&self, vn: VnId, t: f64) -> ServingSet {
        if self.index.covers(t) {
            self.index
                .serving(vn, t, self.params.boundary_lookahead_s)
                .map(|v| Serving { sat: v.sat, exit: v.exit })
                .collect()
        } else {
            self.constellation
                .satellites()
                .filter(|&s| self.zone_of_sat(s, t) == vn)
                .map(|sat| Serving {
                    sat,
                    exit: f64::INFINITY,
                })
                .collect()
        }
    }

    /// Weight components of sending `volume_gb` over the ISL `a → b` at `t`,
    /// choosing the best channel. `None` if out of range or the pair would not
    /// stay visible for the whole transfer.
    fn pair_hop(&self, ledger: &Ledger, a: SatId, b: SatId, volume_gb: f64, t: f64) -> Option<Hop> {
        let p = &self.params;
        let distance = self.constellation.distance(a, b, t);
        if distance > p.isl_range_m {
            return None;
        }
        let propagation_s = distance / self.constellation.constants().light_speed_m_s;
        let bits = BITS_PER_BYTE * volume_gb;
        let mut best: Option<Hop> = None;
        for channel in 0..p.isl_channels {
            let key = LinkKey::Isl { from: a, to: b, channel };
            let profile = ledger.link(key);
            let t_trans = profile.time_to_accumulate(t, bits);
            if !t_trans.is_finite() {
                continue;
            }
            let (transmission_s, waiting_s) = split_waiting(t_trans, bits / profile.capacity());
            let hop = Hop {
                link: Some(key),
                transmission_s,
                waiting_s,
                propagation_s,
            };
            if best.is_none_or(|b| hop.total() < b.total()) {
                best = Some(hop);
            }
        }
        let hop = best?;
        // The transfer must fit inside the visible duration.
        self.constellation
            .in_range_throughout(a, b, t, hop.total(), p.isl_range_m, p.visibility_step_s)
            .then_some(hop)
    }

    /// Cost of handing work from `from` to `to` at `t` (self-loop weight).
    fn handover_hop(&self, from: SatId, to: SatId, volume_gb: f64, t: f64) -> Option<(f64, f64)> {
        let distance = self.constellation.distance(from, to, t);
        if distance > self.params.isl_range_m {
            return None;
        }
        Some((
            BITS_PER_BYTE * volume_gb / self.params.channel_rate_gbps(),
            distance / self.constellation.constants().light_speed_m_s,
        ))
    }

    /// Successor of `leaving` in `vn` at the instant it exits.
    fn successor(&self, vn: VnId, leaving: SatId, at: f64) -> Option<Serving> {
        self.serving(vn, at)
            .into_iter()
            .filter(|s| s.sat != leaving)
            .max_by(|x, y| x.exit.total_cmp(&y.exit))
    }

    /// All edges of the dynamic graph at instant `t`.
    pub fn edges_at(&self, t: f64) -> Vec<DynamicEdge> {
        let mut edges = Vec::new();
        for head in 0..self.grid.len() as u32 {
            let head = VnId(head);
            let from = self.serving(head, t);
            for &tail in self.grid.adjacent(head) {
                let to = self.serving(tail, t);
                if from.is_empty() || to.is_empty() {
                    edges.push(DynamicEdge {
                        head_vn: head,
                        tail_vn: tail,
                        scenario: Scenario::EmptyVn,
                        satellite_pair: None,
                        distance_m: f64::INFINITY,
                    });
                    continue;
                }
                if let Some(s) = from.iter().find(|a| to.iter().any(|b| b.sat == a.sat)) {
                    edges.push(DynamicEdge {
                        head_vn: head,
                        tail_vn: tail,
                        scenario: Scenario::SameSatelliteBoundary,
                        satellite_pair: Some((s.sat, s.sat)),
                        distance_m: 0.0,
                    });
                    continue;
                }
                let scenario = if from.len() == 1 && to.len() == 1 {
                    Scenario::Normal
                } else {
                    Scenario::Parallel
                };
                for a in &from {
                    for b in &to {
                        let d = self.constellation.distance(a.sat, b.sat, t);
                        if d <= self.params.isl_range_m {
                            edges.push(DynamicEdge {
                                head_vn: head,
                                tail_vn: tail,
                                scenario,
                                satellite_pair: Some((a.sat, b.sat)),
                                distance_m: d,
                            });
                        }
                    }
                }
            }
            if let Some(leaving) = from
                .iter()
                .filter(|s| s.exit <= t + self.params.handover_lookahead_s)
                .max_by(|x, y| x.exit.total_cmp(&y.exit))
            {
                if let Some(next) = self.successor(head, leaving.sat, leaving.exit) {
                    edges.push(DynamicEdge {
                        head_vn: head,
                        tail_vn: head,
                        scenario: Scenario::SelfLoop,
                        satellite_pair: Some((leaving.sat, next.sat)),
                        distance_m: self.constellation.distance(leaving.sat, next.sat, t),
                    });
                }
            }
        }
        edges
    }

    /// Weight of one listed edge for `volume_gb` entered at `t`.
    pub fn edge_weight(&self, ledger: &Ledger, edge: &DynamicEdge, volume_gb: f64, t: f64) -> f64 {
        match (edge.scenario, edge.satellite_pair) {
            (Scenario::EmptyVn, _) | (_, None) => f64::INFINITY,
            (Scenario::SameSatelliteBoundary, _) => 0.0,
            (Scenario::SelfLoop, Some((a, b))) => self
                .handover_hop(a, b, volume_gb, t)
                .map_or(f64::INFINITY, |(tx, prop)| tx + prop),
            (Scenario::Normal | Scenario::Parallel, Some((a, b))) => self
                .pair_hop(ledger, a, b, volume_gb, t)
                .map_or(f64::INFINITY, |h| h.total()),
        }
    }
}

impl Topology for SfdnmNetwork {
    fn vn_count(&self) -> usize {
        self.grid.len()
    }

    fn neighbors(&self, vn: VnId) -> &[VnId] {
        self.grid.adjacent(vn)
    }

    fn hop(&self, ledger: &Ledger, from: VnId, to: VnId, volume_gb: f64, t: f64) -> Option<Hop> {
        let a_set = self.serving(from, t);
        if a_set.is_empty() {
            return None;
        }
        let b_set = self.serving(to, t);
        if b_set.is_empty() {
            return None;
        }
        if a_set.iter().any(|a| b_set.iter().any(|b| a.sat == b.sat)) {
            return Some(Hop::FREE);
        }
        let mut best: Option<Hop> = None;
        for a in &a_set {
            for b in &b_set {
                if let Some(h) = self.pair_hop(ledger, a.sat, b.sat, volume_gb, t) {
                    if best.is_none_or(|x| h.total() < x.total()) {
                        best = Some(h);
                    }
                }
            }
        }
        best
    }

    fn process(&self, ledger: &Ledger, vn: VnId, subtask: &Subtask, t: f64) -> Option<Processing> {
        let p = &self.params;
        if p.memory_gb < subtask.memory_gb || p.energy_wh < p.energy_per_gflo_wh * subtask.compute_gflo {
            return None;
        }
        let mut current = self
            .serving(vn, t)
            .into_iter()
            .max_by(|x, y| x.exit.total_cmp(&y.exit))?;
        let profile = ledger.compute(vn);
        let t_comp = profile.time_to_accumulate(t, subtask.compute_gflo);
        if !t_comp.is_finite() {
            return None;
        }
        let (compute_s, waiting_s) = split_waiting(t_comp, subtask.compute_gflo / profile.capacity());
        let mut out = Processing {
            compute_s,
            waiting_s,
            handover_transmission_s: 0.0,
            handover_propagation_s: 0.0,
            handovers: 0,
        };
        // Situation 4: the serving satellite leaves before the work is done.
        while current.exit < t + out.total() {
            if out.handovers == MAX_HANDOVERS {
                return None;
            }
            let next = self.successor(vn, current.sat, current.exit)?;
            let (tx, prop) = self.handover_hop(current.sat, next.sat, subtask.volume_gb, current.exit)?;
            out.handover_transmission_s += tx;
            out.handover_propagation_s += prop;
            out.handovers += 1;
            current = next;
        }
        Some(out)
    }

    fn downlink(&self, ledger: &Ledger, vn: VnId, volume_gb: f64, t: f64) -> Option<Hop> {
        let altitude = self
            .serving(vn, t)
            .iter()
            .map(|s| self.constellation.altitude_m(s.sat))
            .min_by(f64::total_cmp)?;
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
            propagation_s: altitude / self.constellation.constants().light_speed_m_s,
        })
    }

    fn min_hop_delay(&self, volume_gb: f64) -> f64 {
        BITS_PER_BYTE * volume_gb / self.params.channel_rate_gbps()
    }

    fn peak_compute_gflops(&self) -> f64 {
        self.params.compute_gflops
    }

    fn hop_distance(&self, a: VnId, b: VnId) -> Option<u32> {
        Some(self.grid.hop_distance(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{OrbitSpec, PhysicalConstants};
    use std::f64::consts::PI;

    fn subtask(volume_gb: f64, compute_gflo: f64, memory_gb: f64) -> Subtask {
        Subtask {
            task_id: 0,
            subtask_index: 0,
            source_vn: VnId(0),
            created_at_s: 0.0,
            compute_gflo,
            volume_gb,
            memory_gb,
            deadline_s: 10.0,
            dest_lon_rad: 0.0,
            dest_lat_rad: 0.0,
        }
    }

    /// One polar plane of `n` satellites over a `lon × lat` grid.
    fn plane(n: usize, lon: u32, lat: u32, phase: f64) -> SfdnmNetwork {
        let spec = OrbitSpec {
            altitude_m: 500_000.0,
            inclination_rad: PI / 2.0,
            raan_rad: 0.1,
            satellite_count: n,
            phase_offset_rad: phase,
        };
        let c = Constellation::new(vec![spec], PhysicalConstants::default()).unwrap();
        SfdnmNetwork::new(c, ZoneGrid::new(lon, lat).unwrap(), NetworkParams::default(), 4000.0).unwrap()
    }

    #[test]
    fn partition_and_scenario_exclusivity() {
        let net = plane(12, 12, 6, 0.1);
        for k in 0..50 {
            let t = 13.7 * k as f64;
            let map = net.association(t);
            assert_eq!(map.per_vn.iter().map(Vec::len).sum::<usize>(), 12);
            for e in net.edges_at(t) {
                match e.scenario {
                    Scenario::SelfLoop => assert_eq!(e.head_vn, e.tail_vn),
                    _ => assert_ne!(e.head_vn, e.tail_vn),
                }
                if e.scenario == Scenario::EmptyVn {
                    assert!(e.satellite_pair.is_none() && e.distance_m == f64::INFINITY);
                }
                if e.scenario == Scenario::SameSatelliteBoundary {
                    assert_eq!(e.distance_m, 0.0);
                }
            }
        }
    }

    #[test]
    fn normal_edge_between_single_satellites() {
        // 12 satellites 30° apart over 30° latitude bands: neighbors in
        // adjacent rows of the same column.
        let net = plane(12, 12, 6, 0.25);
        let ledger = net.new_ledger().unwrap();
        let t = 5.0;
        let map = net.association(t);
        let edge = net
            .edges_at(t)
            .into_iter()
            .find(|e| {
                e.scenario == Scenario::Normal
                    && map.satellites(e.head_vn).len() == 1
                    && map.satellites(e.tail_vn).len() == 1
            })
            .expect("some singly-occupied neighbor pair");
        let reverse = net
            .edges_at(t)
            .into_iter()
            .filter(|e| e.head_vn == edge.tail_vn && e.tail_vn == edge.head_vn)
            .count();
        assert_eq!(reverse, 1);
        let w = net.edge_weight(&ledger, &edge, 0.1, t);
        let expected = 0.8 / 5.0 + edge.distance_m / 299_792_458.0;
        assert!((w - expected).abs() < 1e-12, "{w} vs {expected}");
        assert_eq!(net.hop(&ledger, edge.head_vn, edge.tail_vn, 0.1, t).unwrap().total(), w);
    }

    #[test]
    fn empty_vn_edges_are_infinite() {
        let net = plane(2, 12, 6, 0.25);
        let ledger = net.new_ledger().unwrap();
        let map = net.association(0.0);
        let e = net
            .edges_at(0.0)
            .into_iter()
            .find(|e| e.scenario == Scenario::EmptyVn && !map.satellites(e.head_vn).is_empty())
            .unwrap();
        assert_eq!(net.edge_weight(&ledger, &e, 0.1, 0.0), f64::INFINITY);
        assert!(net.hop(&ledger, e.head_vn, e.tail_vn, 0.1, 0.0).is_none());
        let empty = VnId((0..72).find(|&v| map.satellites(VnId(v)).is_empty()).unwrap());
        assert!(net.process(&ledger, empty, &subtask(0.1, 50.0, 1.0), 0.0).is_none());
    }

    #[test]
    fn boundary_satellite_makes_a_free_hop() {
        // Find the instant satellite 0 crosses into a new zone and query just
        // before it: it serves both sides of the boundary.
        let net = plane(1, 12, 6, 0.1);
        let ledger = net.new_ledger().unwrap();
        let visit = net.index().visits_of(SatId(0))[1];
        let t = visit.enter - 0.05;
        let from = net.association(t).vn_of(SatId(0));
        assert_ne!(from, visit.vn);
        let hop = net.hop(&ledger, from, visit.vn, 0.1, t).unwrap();
        assert_eq!(hop.total(), 0.0);
        let e = net
            .edges_at(t)
            .into_iter()
            .find(|e| e.head_vn == from && e.tail_vn == visit.vn)
            .unwrap();
        assert_eq!(e.scenario, Scenario::SameSatelliteBoundary);
        assert_eq!(net.edge_weight(&ledger, &e, 0.1, t), 0.0);
    }

    #[test]
    fn node_weight_branches() {
        let net = plane(12, 12, 6, 0.25);
        let mut ledger = net.new_ledger().unwrap();
        let vn = net.association(0.0).vn_of(SatId(3));
        let p = net.process(&ledger, vn, &subtask(0.1, 50.0, 1.0), 0.0).unwrap();
        assert_eq!(p.compute_s, 0.5);
        assert_eq!(p.handovers, 0);
        assert!(net.process(&ledger, vn, &subtask(0.1, 50.0, 9.0), 0.0).is_none());
        ledger.reserve_compute(vn, 0.0, 2.0).unwrap();
        let p = net.process(&ledger, vn, &subtask(0.1, 50.0, 1.0), 0.0).unwrap();
        assert!((p.total() - 2.5).abs() < 1e-12);
        assert!((p.waiting_s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eleven_gflops_compute() {
        let spec = OrbitSpec {
            altitude_m: 500_000.0,
            inclination_rad: PI / 2.0,
            raan_rad: 0.1,
            satellite_count: 12,
            phase_offset_rad: 0.25,
        };
        let c = Constellation::new(vec![spec], PhysicalConstants::default()).unwrap();
        let params = NetworkParams {
            compute_gflops: 11.0,
            ..NetworkParams::default()
        };
        let net = SfdnmNetwork::new(c, ZoneGrid::new(12, 6).unwrap(), params, 4000.0).unwrap();
        let ledger = net.new_ledger().unwrap();
        let vn = net.association(0.0).vn_of(SatId(3));
        let p = net.process(&ledger, vn, &subtask(0.1, 50.0, 1.0), 0.0).unwrap();
        assert!((p.compute_s - 50.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn energy_branch() {
        let spec = OrbitSpec {
            altitude_m: 500_000.0,
            inclination_rad: PI / 2.0,
            raan_rad: 0.1,
            satellite_count: 12,
            phase_offset_rad: 0.25,
        };
        let c = Constellation::new(vec![spec], PhysicalConstants::default()).unwrap();
        let params = NetworkParams {
            energy_wh: 10.0,
            energy_per_gflo_wh: 0.5,
            ..NetworkParams::default()
        };
        let net = SfdnmNetwork::new(c, ZoneGrid::new(12, 6).unwrap(), params, 4000.0).unwrap();
        let ledger = net.new_ledger().unwrap();
        let vn = net.association(0.0).vn_of(SatId(3));
        assert!(net.process(&ledger, vn, &subtask(0.1, 50.0, 1.0), 0.0).is_none());
        assert!(net.process(&ledger, vn, &subtask(0.1, 20.0, 1.0), 0.0).is_some());
    }

    #[test]
    fn long_processing_hands_over() {
        let net = plane(12, 12, 6, 0.25);
        let ledger = net.new_ledger().unwrap();
        let vn = net.association(0.0).vn_of(SatId(3));
        let visit = *net.index().visit(SatId(3), 0.0).unwrap();
        // Work lasting past the satellite's exit triggers at least one handover.
        let gflo = 100.0 * (visit.exit + 30.0);
        let p = net.process(&ledger, vn, &subtask(0.1, gflo, 1.0), 0.0).unwrap();
        assert!(p.handovers >= 1);
        assert!(p.handover_transmission_s > 0.0 && p.handover_propagation_s > 0.0);
        let loops = net
            .edges_at(visit.exit - 1.0)
            .into_iter()
            .filter(|e| e.scenario == Scenario::SelfLoop && e.head_vn == vn)
            .count();
        assert_eq!(loops, 1);
    }

    #[test]
    fn downlink_components() {
        let net = plane(12, 12, 6, 0.25);
        let mut ledger = net.new_ledger().unwrap();
        let vn = net.association(0.0).vn_of(SatId(3));
        let h = net.downlink(&ledger, vn, 0.1, 0.0).unwrap();
        assert!((h.transmission_s - 4.0).abs() < 1e-12);
        assert!((h.propagation_s - 500_000.0 / 299_792_458.0).abs() < 1e-15);
        ledger.reserve_link(LinkKey::Sgl(vn), 0.0, 1.0).unwrap();
        let h = net.downlink(&ledger, vn, 0.1, 0.0).unwrap();
        assert!((h.waiting_s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weights_are_nonnegative() {
        let net = plane(12, 8, 6, 0.4);
        let ledger = net.new_ledger().unwrap();
        for k in 0..40 {
            let t = 31.0 * k as f64;
            for e in net.edges_at(t) {
                let w = net.edge_weight(&ledger, &e, 0.1, t);
                assert!(w >= 0.0);
            }
        }
    }
}
