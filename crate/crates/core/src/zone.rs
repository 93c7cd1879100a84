//! Static longitude/latitude zones. Each zone is one virtual node (VN).

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VnId(pub u32);

impl VnId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vn{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zone {
    pub lon_min: f64,
    pub lon_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
}

impl Zone {
    /// Solid angle in steradians.
    pub fn solid_angle(&self) -> f64 {
        (self.lon_max - self.lon_min) * (self.lat_max.sin() - self.lat_min.sin())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighbors {
    pub east: Option<VnId>,
    pub west: Option<VnId>,
    pub north: Option<VnId>,
    pub south: Option<VnId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualNode {
    pub vn_id: VnId,
    pub zone_index: usize,
    pub neighbors: Neighbors,
}

/// Row-major tiling of `[-π, π) × [-π/2, π/2]` starting at `(-π, -π/2)`.
/// Intervals are half-open on the low side, except the top row which also
/// owns the north pole.
#[derive(Debug, Clone)]
pub struct ZoneGrid {
    lon_divisions: u32,
    lat_divisions: u32,
    dlon: f64,
    dlat: f64,
    adjacency: Vec<Vec<VnId>>,
}

impl ZoneGrid {
    pub fn new(lon_divisions: u32, lat_divisions: u32) -> Result<Self> {
        if lon_divisions == 0 || lat_divisions == 0 {
            return Err(Error::domain("zone grid divisions must be >= 1"));
        }
        let mut grid = Self {
            lon_divisions,
            lat_divisions,
            dlon: TAU / lon_divisions as f64,
            dlat: PI / lat_divisions as f64,
            adjacency: Vec::new(),
        };
        grid.adjacency = (0..grid.len() as u32)
            .map(|v| {
                let n = grid.neighbors(VnId(v));
                let mut out: Vec<VnId> = Vec::with_capacity(4);
                for x in [n.east, n.west, n.north, n.south].into_iter().flatten() {
                    if !out.contains(&x) {
                        out.push(x);
                    }
                }
                out
            })
            .collect();
        Ok(grid)
    }

    pub fn lon_divisions(&self) -> u32 {
        self.lon_divisions
    }

    pub fn lat_divisions(&self) -> u32 {
        self.lat_divisions
    }

    pub fn len(&self) -> usize {
        (self.lon_divisions * self.lat_divisions) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn row_col(&self, vn: VnId) -> (u32, u32) {
        (vn.0 / self.lon_divisions, vn.0 % self.lon_divisions)
    }

    pub fn zone(&self, vn: VnId) -> Zone {
        let (row, col) = self.row_col(vn);
        Zone {
            lon_min: -PI + col as f64 * self.dlon,
            lon_max: -PI + (col + 1) as f64 * self.dlon,
            lat_min: -FRAC_PI_2 + row as f64 * self.dlat,
            lat_max: -FRAC_PI_2 + (row + 1) as f64 * self.dlat,
        }
    }

    pub fn zones(&self) -> Vec<Zone> {
        (0..self.len() as u32).map(|v| self.zone(VnId(v))).collect()
    }

    /// The VN whose zone contains `(lon, lat)`. Longitude is wrapped into
    /// `[-π, π)` and latitude clamped into `[-π/2, π/2]`.
    pub fn zone_of(&self, lon: f64, lat: f64) -> VnId {
        let lon = (lon + PI).rem_euclid(TAU);
        let lat = (lat + FRAC_PI_2).clamp(0.0, PI);
        let col = ((lon / self.dlon) as u32).min(self.lon_divisions - 1);
        let row = ((lat / self.dlat) as u32).min(self.lat_divisions - 1);
        VnId(row * self.lon_divisions + col)
    }

    pub fn neighbors(&self, vn: VnId) -> Neighbors {
        let (row, col) = self.row_col(vn);
        let n = self.lon_divisions;
        let at = |r: u32, c: u32| VnId(r * n + c);
        let (east, west) = if n == 1 {
            (None, None)
        } else {
            (Some(at(row, (col + 1) % n)), Some(at(row, (col + n - 1) % n)))
        };
        Neighbors {
            east,
            west,
            north: (row + 1 < self.lat_divisions).then(|| at(row + 1, col)),
            south: (row > 0).then(|| at(row - 1, col)),
        }
    }

    /// Distinct 4-neighbors of `vn`.
    pub fn adjacent(&self, vn: VnId) -> &[VnId] {
        &self.adjacency[vn.index()]
    }

    pub fn virtual_node(&self, vn: VnId) -> VirtualNode {
        VirtualNode {
            vn_id: vn,
            zone_index: vn.index(),
            neighbors: self.neighbors(vn),
        }
    }

    /// Minimum number of 4-neighbor hops between two VNs (longitude wraps).
    pub fn hop_distance(&self, a: VnId, b: VnId) -> u32 {
        let (ra, ca) = self.row_col(a);
        let (rb, cb) = self.row_col(b);
        let dc = ca.abs_diff(cb);
        ra.abs_diff(rb) + dc.min(self.lon_divisions - dc)
    }
}
