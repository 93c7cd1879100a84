//! Delay components and path timelines.
//!
//! Transmission and computation delays are integral inversions over
//! piecewise-constant availability; waiting on reserved capacity shows up as
//! the part of the inversion not spent at full rate. A path timeline walks a
//! path hop by hop, freezing each weight at its entry instant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphView, Hop, LinkKey, Processing, Topology};
use crate::network::BITS_PER_BYTE;
use crate::profile::ResourceProfile;
use crate::traffic::Subtask;
use crate::zone::VnId;

/// Time to push `volume_gb` through `profile` starting at `t`, waiting included.
pub fn transmission_delay(profile: &ResourceProfile, volume_gb: f64, t: f64) -> Result<f64> {
    if !(volume_gb >= 0.0) {
        return Err(Error::domain(format!("volume must be >= 0, got {volume_gb}")));
    }
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    Ok(profile.time_to_accumulate(t, BITS_PER_BYTE * volume_gb))
}

/// Time to perform `compute_gflo` of work on `profile` starting at `t`.
pub fn computation_delay(profile: &ResourceProfile, compute_gflo: f64, t: f64) -> Result<f64> {
    if !(compute_gflo >= 0.0) {
        return Err(Error::domain(format!("work must be >= 0, got {compute_gflo}")));
    }
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    Ok(profile.time_to_accumulate(t, compute_gflo))
}

pub fn propagation_delay(distance_m: f64, light_speed_m_s: f64) -> f64 {
    distance_m / light_speed_m_s
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub isl_transmission_s: f64,
    pub sgl_transmission_s: f64,
    pub propagation_s: f64,
    pub processing_s: f64,
    pub waiting_s: f64,
}

impl Components {
    pub const INFINITE: Components = Components {
        isl_transmission_s: f64::INFINITY,
        sgl_transmission_s: 0.0,
        propagation_s: 0.0,
        processing_s: 0.0,
        waiting_s: 0.0,
    };

    /// Sum in a fixed order. Every reported total is computed this way.
    pub fn total(&self) -> f64 {
        self.isl_transmission_s + self.sgl_transmission_s + self.propagation_s + self.processing_s + self.waiting_s
    }

    pub fn add(&mut self, other: &Components) {
        self.isl_transmission_s += other.isl_transmission_s;
        self.sgl_transmission_s += other.sgl_transmission_s;
        self.propagation_s += other.propagation_s;
        self.processing_s += other.processing_s;
        self.waiting_s += other.waiting_s;
    }

    pub fn add_hop(&mut self, hop: &Hop) {
        match hop.link {
            Some(LinkKey::Sgl(_)) => self.sgl_transmission_s += hop.transmission_s,
            _ => self.isl_transmission_s += hop.transmission_s,
        }
        self.waiting_s += hop.waiting_s;
        self.propagation_s += hop.propagation_s;
    }

    pub fn add_processing(&mut self, p: &Processing) {
        self.processing_s += p.compute_s;
        self.waiting_s += p.waiting_s;
        self.isl_transmission_s += p.handover_transmission_s;
        self.propagation_s += p.handover_propagation_s;
    }

    pub fn scaled(&self, k: f64) -> Components {
        Components {
            isl_transmission_s: self.isl_transmission_s * k,
            sgl_transmission_s: self.sgl_transmission_s * k,
            propagation_s: self.propagation_s * k,
            processing_s: self.processing_s * k,
            waiting_s: self.waiting_s * k,
        }
    }
}

/// Hop-by-hop evaluation of one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTimeline {
    pub path: Vec<VnId>,
    pub computing_node: Option<VnId>,
    /// `t₁ … t_p`, with `t_q′` inserted right after `t_q` when a computing
    /// node is present.
    pub arrival_times: Vec<f64>,
    pub hops: Vec<Hop>,
    pub processing: Option<Processing>,
    pub total_length_s: f64,
    pub components: Components,
}

impl PathTimeline {
    /// Zero-length timeline at `vn`.
    pub fn at(vn: VnId, t: f64) -> Self {
        Self {
            path: vec![vn],
            computing_node: None,
            arrival_times: vec![t],
            hops: Vec::new(),
            processing: None,
            total_length_s: 0.0,
            components: Components::default(),
        }
    }

    pub fn start(&self) -> f64 {
        self.arrival_times[0]
    }

    pub fn end(&self) -> f64 {
        *self.arrival_times.last().expect("timeline is never empty")
    }

    pub fn hop_count(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    pub fn is_finite(&self) -> bool {
        self.total_length_s.is_finite()
    }

    /// Entry time of hop `i`.
    pub fn hop_entry(&self, i: usize) -> f64 {
        let shift = match self.computing_node_index() {
            Some(q) if i >= q => 1,
            _ => 0,
        };
        self.arrival_times[i + shift]
    }

    fn computing_node_index(&self) -> Option<usize> {
        let q = self.computing_node?;
        self.path.iter().position(|&v| v == q)
    }
}

pub fn check_contiguous<T: Topology + ?Sized>(topology: &T, path: &[VnId]) -> Result<()> {
    if path.is_empty() {
        return Err(Error::Structural("empty path".into()));
    }
    for &v in path {
        if v.index() >= topology.vn_count() {
            return Err(Error::Lookup {
                kind: "vn",
                id: v.0 as u64,
            });
        }
    }
    for w in path.windows(2) {
        if !topology.neighbors(w[0]).contains(&w[1]) {
            return Err(Error::Structural(format!("{} and {} are not adjacent", w[0], w[1])));
        }
    }
    Ok(())
}

/// Applies `t_{i+1} = t_i + w_{e_i}(t_i)` along `path`, processing `subtask`
/// at `computing_node` if given. Hops before the computing node carry the raw
/// volume, hops after it `result_volume_gb`.
pub fn path_timeline<T: Topology + ?Sized>(
    view: GraphView<'_, T>,
    path: &[VnId],
    computing_node: Option<VnId>,
    subtask: &Subtask,
    result_volume_gb: f64,
    t1: f64,
) -> Result<PathTimeline> {
    check_contiguous(view.topology, path)?;
    let q = match computing_node {
        Some(c) => Some(
            path.iter()
                .position(|&v| v == c)
                .ok_or_else(|| Error::Structural(format!("computing node {c} is not on the path")))?,
        ),
        None => None,
    };
    let mut out = PathTimeline {
        path: path.to_vec(),
        computing_node,
        arrival_times: Vec::with_capacity(path.len() + 1),
        hops: Vec::with_capacity(path.len().saturating_sub(1)),
        processing: None,
        total_length_s: 0.0,
        components: Components::default(),
    };
    let mut t = t1;
    out.arrival_times.push(t);
    let mut volume = subtask.volume_gb;
    for i in 0..path.len() {
        if q == Some(i) {
            match view.process(path[i], subtask, t) {
                Some(p) => {
                    out.components.add_processing(&p);
                    t += p.total();
                    out.processing = Some(p);
                }
                None => return Ok(infinite(out)),
            }
            out.arrival_times.push(t);
            volume = result_volume_gb;
        }
        if i + 1 == path.len() {
            break;
        }
        match view.hop(path[i], path[i + 1], volume, t) {
            Some(h) => {
                out.components.add_hop(&h);
                t += h.total();
                out.hops.push(h);
            }
            None => return Ok(infinite(out)),
        }
        out.arrival_times.push(t);
    }
    out.total_length_s = out.components.total();
    Ok(out)
}

fn infinite(mut out: PathTimeline) -> PathTimeline {
    out.total_length_s = f64::INFINITY;
    out.components = Components::INFINITE;
    out
}

/// Length of a pure transmission leg, `∞` as soon as one hop is infeasible.
/// Matches `path_timeline(..).total_length_s` up to summation order.
pub fn leg_length<T: Topology + ?Sized>(view: GraphView<'_, T>, path: &[VnId], volume_gb: f64, t1: f64) -> f64 {
    let mut t = t1;
    for w in path.windows(2) {
        match view.hop(w[0], w[1], volume_gb, t) {
            Some(h) => t += h.total(),
            None => return f64::INFINITY,
        }
    }
    t - t1
}

/// Timeline of a pure transmission leg carrying `volume_gb`.
pub fn leg_timeline<T: Topology + ?Sized>(
    view: GraphView<'_, T>,
    path: &[VnId],
    volume_gb: f64,
    t1: f64,
) -> Result<PathTimeline> {
    check_contiguous(view.topology, path)?;
    let mut out = PathTimeline::at(path[0], t1);
    out.path = path.to_vec();
    let mut t = t1;
    for w in path.windows(2) {
        match view.hop(w[0], w[1], volume_gb, t) {
            Some(h) => {
                out.components.add_hop(&h);
                t += h.total();
                out.hops.push(h);
            }
            None => return Ok(infinite(out)),
        }
        out.arrival_times.push(t);
    }
    out.total_length_s = out.components.total();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Ledger;
    use crate::synthetic::TableNetwork;

    fn subtask(volume_gb: f64, compute_gflo: f64) -> Subtask {
        Subtask {
            task_id: 0,
            subtask_index: 0,
            source_vn: VnId(0),
            created_at_s: 0.0,
            compute_gflo,
            volume_gb,
            memory_gb: 0.0,
            deadline_s: 10.0,
            dest_lon_rad: 0.0,
            dest_lat_rad: 0.0,
        }
    }

    #[test]
    fn transmission_examples() {
        let p = ResourceProfile::new(5.0).unwrap();
        assert_eq!(transmission_delay(&p, 0.0, 3.0).unwrap(), 0.0);
        assert!((transmission_delay(&p, 0.1, 0.0).unwrap() - 0.16).abs() < 1e-15);
        let p = ResourceProfile::from_pieces(4.0, 0.0, &[(1.0, 1.0)]).unwrap();
        assert!((transmission_delay(&p, 0.5, 0.0).unwrap() - 1.75).abs() < 1e-12);
        assert!(transmission_delay(&p, -1.0, 0.0).is_err());
    }

    #[test]
    fn computation_examples() {
        let p = ResourceProfile::new(100.0).unwrap();
        assert_eq!(computation_delay(&p, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(computation_delay(&p, 50.0, 0.0).unwrap(), 0.5);
        let p = ResourceProfile::from_pieces(100.0, 0.0, &[(2.0, 0.0)]).unwrap();
        assert!((computation_delay(&p, 50.0, 0.0).unwrap() - 2.5).abs() < 1e-12);
        assert!(computation_delay(&p, -0.1, 0.0).is_err());
    }

    #[test]
    fn propagation_examples() {
        let c = 299_792_458.0;
        assert_eq!(propagation_delay(0.0, c), 0.0);
        assert!((propagation_delay(7.8e6, c) - 0.026_017_999_425_455_86).abs() < 1e-15);
        assert_eq!(propagation_delay(f64::INFINITY, c), f64::INFINITY);
    }

    /// Line 0 – 1 – 2 whose hops take 1 s each for a 0.1 GB payload.
    fn line() -> (TableNetwork, Ledger) {
        let mut b = TableNetwork::builder(3);
        b.edge(0, 1, 0.8, 0.0).edge(1, 2, 0.8, 0.0);
        for v in 0..3 {
            b.compute(v, 100.0);
        }
        b.build().unwrap()
    }

    #[test]
    fn two_hop_timeline() {
        let (net, ledger) = line();
        let view = GraphView::new(&net, &ledger);
        let path = [VnId(0), VnId(1), VnId(2)];
        let tl = path_timeline(view, &path, Some(VnId(1)), &subtask(0.1, 50.0), 0.1, 10.0).unwrap();
        assert_eq!(tl.arrival_times, vec![10.0, 11.0, 11.5, 12.5]);
        assert_eq!(tl.total_length_s, 2.5);
        assert_eq!(tl.total_length_s, tl.components.total());
        assert_eq!(tl.hop_entry(0), 10.0);
        assert_eq!(tl.hop_entry(1), 11.5);
        assert!(tl.arrival_times.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn single_node_timeline_is_node_weight() {
        let (net, ledger) = line();
        let view = GraphView::new(&net, &ledger);
        let tl = path_timeline(view, &[VnId(2)], Some(VnId(2)), &subtask(0.1, 50.0), 0.0, 0.0).unwrap();
        assert_eq!(tl.total_length_s, 0.5);
        assert_eq!(tl.components.processing_s, 0.5);
    }

    #[test]
    fn infeasible_hop_absorbs() {
        let mut b = TableNetwork::builder(3);
        b.edge(0, 1, 0.8, 0.0).edge_with(1, 2, ResourceProfile::from_pieces(0.8, 0.0, &[(f64::INFINITY, 0.0)]).unwrap(), 0.0);
        let (net, ledger) = b.build().unwrap();
        let view = GraphView::new(&net, &ledger);
        let path = [VnId(0), VnId(1), VnId(2)];
        let tl = path_timeline(view, &path, None, &subtask(0.1, 0.0), 0.0, 0.0).unwrap();
        assert_eq!(tl.total_length_s, f64::INFINITY);
        assert_eq!(leg_length(view, &path, 0.1, 0.0), f64::INFINITY);
    }

    #[test]
    fn structural_errors() {
        let (net, ledger) = line();
        let view = GraphView::new(&net, &ledger);
        let s = subtask(0.1, 50.0);
        assert!(matches!(
            path_timeline(view, &[VnId(0), VnId(2)], None, &s, 0.0, 0.0),
            Err(Error::Structural(_))
        ));
        assert!(matches!(
            path_timeline(view, &[VnId(0), VnId(1)], Some(VnId(2)), &s, 0.0, 0.0),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn leg_length_matches_timeline() {
        let (net, ledger) = line();
        let view = GraphView::new(&net, &ledger);
        let path = [VnId(0), VnId(1), VnId(2)];
        let tl = leg_timeline(view, &path, 0.3, 1.0).unwrap();
        assert!((leg_length(view, &path, 0.3, 1.0) - tl.total_length_s).abs() < 1e-12);
    }
}
