//! Satellite ↔ VN association.
//!
//! [`associate`] answers the question for a single instant. [`AssociationIndex`]
//! precomputes, per satellite, the exact sequence of zone visits over a horizon
//! (crossing instants refined by bisection), so that instantaneous queries during
//! routing cost a binary search instead of propagating the whole constellation.

use crate::orbit::{sub_point_unchecked, Constellation, ConstellationState, SatId};
use crate::zone::{VnId, ZoneGrid};

/// Association at one instant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationMap {
    pub per_vn: Vec<Vec<SatId>>,
    pub per_sat: Vec<VnId>,
}

impl AssociationMap {
    pub fn satellites(&self, vn: VnId) -> &[SatId] {
        &self.per_vn[vn.index()]
    }

    pub fn vn_of(&self, sat: SatId) -> VnId {
        self.per_sat[sat.index()]
    }
}

pub fn associate(state: &ConstellationState, grid: &ZoneGrid) -> AssociationMap {
    let mut per_vn = vec![Vec::new(); grid.len()];
    let mut per_sat = Vec::with_capacity(state.positions.len());
    for (&sat, &p) in state.satellite_ids.iter().zip(&state.positions) {
        let (lon, lat) = sub_point_unchecked(p);
        let vn = grid.zone_of(lon, lat);
        per_vn[vn.index()].push(sat);
        per_sat.push(vn);
    }
    AssociationMap { per_vn, per_sat }
}

/// One stay of a satellite in a zone over `[enter, exit)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    pub sat: SatId,
    pub vn: VnId,
    pub enter: f64,
    pub exit: f64,
}

impl Visit {
    pub fn contains(&self, t: f64) -> bool {
        self.enter <= t && t < self.exit
    }
}

const CROSSING_TOLERANCE_S: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct AssociationIndex {
    horizon_s: f64,
    per_vn: Vec<Vec<Visit>>,
    longest: Vec<f64>,
    per_sat: Vec<Vec<Visit>>,
}

impl AssociationIndex {
    /// Tracks every satellite over `[0, horizon_s)`, sampling every `step_s`.
    pub fn build(constellation: &Constellation, grid: &ZoneGrid, horizon_s: f64, step_s: f64) -> Self {
        let zone_at = |sat: SatId, t: f64| {
            let (lon, lat) = sub_point_unchecked(constellation.position(sat, t));
            grid.zone_of(lon, lat)
        };
        let mut per_sat = Vec::with_capacity(constellation.len());
        for sat in constellation.satellites() {
            let mut visits = Vec::new();
            let mut enter = 0.0;
            let mut zone = zone_at(sat, 0.0);
            let mut prev = 0.0;
            let mut k = 1u64;
            while prev < horizon_s {
                let next = (k as f64 * step_s).min(horizon_s);
                k += 1;
                let mut from = prev;
                // Resolve every zone change between `from` and `next`, in order.
                while zone_at(sat, next) != zone {
                    let (mut lo, mut hi) = (from, next);
                    while hi - lo > CROSSING_TOLERANCE_S {
                        let mid = 0.5 * (lo + hi);
                        if zone_at(sat, mid) == zone {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    visits.push(Visit { sat, vn: zone, enter, exit: hi });
                    enter = hi;
                    zone = zone_at(sat, hi);
                    from = hi;
                }
                prev = next;
            }
            visits.push(Visit {
                sat,
                vn: zone,
                enter,
                exit: horizon_s,
            });
            per_sat.push(visits);
        }

        let mut per_vn: Vec<Vec<Visit>> = vec![Vec::new(); grid.len()];
        for v in per_sat.iter().flatten() {
            per_vn[v.vn.index()].push(*v);
        }
        let mut longest = vec![0.0f64; grid.len()];
        for (visits, l) in per_vn.iter_mut().zip(&mut longest) {
            visits.sort_by(|a, b| a.enter.total_cmp(&b.enter).then(a.sat.cmp(&b.sat)));
            *l = visits.iter().map(|v| v.exit - v.enter).fold(0.0, f64::max);
        }
        Self {
            horizon_s,
            per_vn,
            longest,
            per_sat,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon_s
    }

    pub fn covers(&self, t: f64) -> bool {
        (0.0..self.horizon_s).contains(&t)
    }

    pub fn visit(&self, sat: SatId, t: f64) -> Option<&Visit> {
        let visits = self.per_sat.get(sat.index())?;
        let i = visits.partition_point(|v| v.exit <= t);
        visits.get(i).filter(|v| v.contains(t))
    }

    pub fn visits_of(&self, sat: SatId) -> &[Visit] {
        &self.per_sat[sat.index()]
    }

    /// Visits of `vn` that contain `t`, or that begin in `(t, t + lookahead]`.
    pub fn serving(&self, vn: VnId, t: f64, lookahead: f64) -> impl Iterator<Item = &Visit> + '_ {
        let visits = &self.per_vn[vn.index()];
        let lo = visits.partition_point(|v| v.enter < t - self.longest[vn.index()]);
        let hi = visits.partition_point(|v| v.enter <= t + lookahead);
        visits[lo..hi]
            .iter()
            .filter(move |v| v.exit > t)
    }

    pub fn associated(&self, vn: VnId, t: f64) -> impl Iterator<Item = SatId> + '_ {
        self.serving(vn, t, 0.0).filter(move |v| v.enter <= t).map(|v| v.sat)
    }

    pub fn snapshot(&self, t: f64) -> AssociationMap {
        let mut per_vn = vec![Vec::new(); self.per_vn.len()];
        let mut per_sat = Vec::with_capacity(self.per_sat.len());
        for visits in &self.per_sat {
            let i = visits.partition_point(|v| v.exit <= t).min(visits.len() - 1);
            let v = visits[i];
            per_vn[v.vn.index()].push(v.sat);
            per_sat.push(v.vn);
        }
        AssociationMap { per_vn, per_sat }
    }
}
