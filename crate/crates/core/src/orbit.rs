//! Circular two-body propagation of LEO constellations.
//!
//! Satellites move on ideal circular Keplerian orbits (no J2, no drag). Positions
//! are produced in an Earth-centered Earth-fixed frame by rotating the inertial
//! position by `-ω_e·t` about the polar axis, with the Earth modeled as a sphere.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SatId(pub u32);

impl SatId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sat{}", self.0)
    }
}

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    pub earth_radius_m: f64,
    pub earth_mass_kg: f64,
    pub gravitational_constant: f64,
    pub earth_rotation_rate_rad_s: f64,
    pub light_speed_m_s: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            earth_radius_m: 6_371_393.0,
            earth_mass_kg: 5.965e24,
            gravitational_constant: 6.674_28e-11,
            earth_rotation_rate_rad_s: 7.292_115_10e-5,
            light_speed_m_s: 299_792_458.0,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("earth_radius_m", self.earth_radius_m),
            ("earth_mass_kg", self.earth_mass_kg),
            ("gravitational_constant", self.gravitational_constant),
            ("earth_rotation_rate_rad_s", self.earth_rotation_rate_rad_s),
            ("light_speed_m_s", self.light_speed_m_s),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(
                    format!("constants.{name}"),
                    "must be finite and > 0",
                ));
            }
        }
        Ok(())
    }

    /// `G·M_e` in m³/s².
    pub fn mu(&self) -> f64 {
        self.gravitational_constant * self.earth_mass_kg
    }
}

/// Orbital period `2π·sqrt((R_e + h)³ / (G·M_e))` in seconds.
pub fn orbital_period(altitude_m: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(altitude_m.is_finite() && altitude_m > 0.0) {
        return Err(Error::domain(format!(
            "altitude must be > 0, got {altitude_m}"
        )));
    }
    let r = constants.earth_radius_m + altitude_m;
    Ok(TAU * (r * r * r / constants.mu()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSpec {
    pub altitude_m: f64,
    pub inclination_rad: f64,
    pub raan_rad: f64,
    pub satellite_count: usize,
    /// Argument of latitude of the first satellite on this orbit at epoch.
    pub phase_offset_rad: f64,
}

impl OrbitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.altitude_m.is_finite() && self.altitude_m > 0.0) {
            return Err(Error::domain("orbit altitude must be > 0"));
        }
        if self.satellite_count == 0 {
            return Err(Error::domain("orbit must hold at least one satellite"));
        }
        for (name, v) in [
            ("inclination", self.inclination_rad),
            ("raan", self.raan_rad),
            ("phase offset", self.phase_offset_rad),
        ] {
            if !(0.0..TAU).contains(&v) {
                return Err(Error::domain(format!("{name} must lie in [0, 2π), got {v}")));
            }
        }
        Ok(())
    }
}

/// Walker-star style layout: orbit `o` gets RAAN `o·spread/|O|` and the satellites
/// of an orbit are evenly phased, shifted by `o·inter_plane_phase`.
pub fn walker_star(
    altitudes_m: &[f64],
    satellites_per_orbit: &[usize],
    inclination_rad: f64,
    raan_spread_rad: f64,
    inter_plane_phase_rad: f64,
) -> Result<Vec<OrbitSpec>> {
    if altitudes_m.len() != satellites_per_orbit.len() {
        return Err(Error::domain(format!(
            "{} altitudes but {} satellite counts",
            altitudes_m.len(),
            satellites_per_orbit.len()
        )));
    }
    let planes = altitudes_m.len() as f64;
    altitudes_m
        .iter()
        .zip(satellites_per_orbit)
        .enumerate()
        .map(|(o, (&altitude_m, &satellite_count))| {
            let spec = OrbitSpec {
                altitude_m,
                inclination_rad,
                raan_rad: (o as f64 * raan_spread_rad / planes).rem_euclid(TAU),
                satellite_count,
                phase_offset_rad: (o as f64 * inter_plane_phase_rad).rem_euclid(TAU),
            };
            spec.validate().map(|_| spec)
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Elements {
    radius_m: f64,
    mean_motion: f64,
    cos_raan: f64,
    sin_raan: f64,
    cos_inc: f64,
    sin_inc: f64,
    arg_lat0: f64,
}

/// A propagatable constellation. Satellite ids are assigned orbit by orbit.
#[derive(Debug, Clone)]
pub struct Constellation {
    constants: PhysicalConstants,
    orbits: Vec<OrbitSpec>,
    orbit_of: Vec<usize>,
    elements: Vec<Elements>,
}

impl Constellation {
    pub fn new(orbits: Vec<OrbitSpec>, constants: PhysicalConstants) -> Result<Self> {
        constants.validate()?;
        let mut elements = Vec::new();
        let mut orbit_of = Vec::new();
        for (o, spec) in orbits.iter().enumerate() {
            spec.validate()?;
            let period = orbital_period(spec.altitude_m, &constants)?;
            for k in 0..spec.satellite_count {
                let arg_lat0 = spec.phase_offset_rad + TAU * k as f64 / spec.satellite_count as f64;
                elements.push(Elements {
                    radius_m: constants.earth_radius_m + spec.altitude_m,
                    mean_motion: TAU / period,
                    cos_raan: spec.raan_rad.cos(),
                    sin_raan: spec.raan_rad.sin(),
                    cos_inc: spec.inclination_rad.cos(),
                    sin_inc: spec.inclination_rad.sin(),
                    arg_lat0,
                });
                orbit_of.push(o);
            }
        }
        Ok(Self {
            constants,
            orbits,
            orbit_of,
            elements,
        })
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn orbits(&self) -> &[OrbitSpec] {
        &self.orbits
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn satellites(&self) -> impl Iterator<Item = SatId> {
        (0..self.elements.len() as u32).map(SatId)
    }

    pub fn orbit_of(&self, sat: SatId) -> Result<usize> {
        self.orbit_of.get(sat.index()).copied().ok_or(Error::Lookup {
            kind: "satellite",
            id: sat.0 as u64,
        })
    }

    pub fn altitude_m(&self, sat: SatId) -> f64 {
        self.elements[sat.index()].radius_m - self.constants.earth_radius_m
    }

    pub fn contains(&self, sat: SatId) -> bool {
        sat.index() < self.elements.len()
    }

    fn check(&self, sat: SatId) -> Result<()> {
        if self.contains(sat) {
            Ok(())
        } else {
            Err(Error::Lookup {
                kind: "satellite",
                id: sat.0 as u64,
            })
        }
    }

    /// Earth-fixed position of `sat` at simulation time `t`. Panics on an
    /// unknown id; use [`Constellation::try_position`] for checked access.
    pub fn position(&self, sat: SatId, t: f64) -> Vec3 {
        let e = &self.elements[sat.index()];
        let (su, cu) = (e.arg_lat0 + e.mean_motion * t).sin_cos();
        let x = e.radius_m * (e.cos_raan * cu - e.sin_raan * su * e.cos_inc);
        let y = e.radius_m * (e.sin_raan * cu + e.cos_raan * su * e.cos_inc);
        let z = e.radius_m * su * e.sin_inc;
        let (st, ct) = (self.constants.earth_rotation_rate_rad_s * t).sin_cos();
        [x * ct + y * st, -x * st + y * ct, z]
    }

    pub fn try_position(&self, sat: SatId, t: f64) -> Result<Vec3> {
        self.check(sat)?;
        Ok(self.position(sat, t))
    }

    /// Inertial argument of latitude (unwrapped) at `t`.
    pub fn argument_of_latitude(&self, sat: SatId, t: f64) -> f64 {
        let e = &self.elements[sat.index()];
        e.arg_lat0 + e.mean_motion * t
    }

    pub fn propagate(&self, t: f64) -> Result<ConstellationState> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::domain(format!("time must be >= 0, got {t}")));
        }
        Ok(ConstellationState {
            epoch_s: t,
            satellite_ids: self.satellites().collect(),
            positions: self.satellites().map(|s| self.position(s, t)).collect(),
        })
    }

    pub fn distance(&self, a: SatId, b: SatId, t: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        norm(sub(self.position(a, t), self.position(b, t)))
    }

    /// True when `a` and `b` stay within `max_range_m` over `[t, t + duration]`,
    /// sampled every `step_s` plus both endpoints. Equivalent to
    /// `duration <= visibility_window(..)` up to the sampling resolution, but
    /// never looks further ahead than `duration`.
    pub fn in_range_throughout(
        &self,
        a: SatId,
        b: SatId,
        t: f64,
        duration: f64,
        max_range_m: f64,
        step_s: f64,
    ) -> bool {
        if self.distance(a, b, t) > max_range_m {
            return false;
        }
        if !duration.is_finite() {
            return false;
        }
        let mut s = t + step_s;
        while s < t + duration {
            if self.distance(a, b, s) > max_range_m {
                return false;
            }
            s += step_s;
        }
        self.distance(a, b, t + duration) <= max_range_m
    }

    /// Largest `Δ` such that `distance(a, b, s) <= max_range_m` on `[t, t + Δ]`,
    /// found by forward sampling at `step_s` followed by bisection down to
    /// `tolerance_s`, and capped at `horizon_s - t`.
    pub fn visibility_window(
        &self,
        a: SatId,
        b: SatId,
        t: f64,
        max_range_m: f64,
        window: &WindowSearch,
    ) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        let cap = (window.horizon_s - t).max(0.0);
        if self.distance(a, b, t) > max_range_m {
            return Ok(0.0);
        }
        let mut inside = t;
        loop {
            let probe = (inside + window.step_s).min(t + cap);
            if probe <= inside {
                return Ok(cap);
            }
            if self.distance(a, b, probe) > max_range_m {
                let mut lo = inside;
                let mut hi = probe;
                while hi - lo > window.tolerance_s {
                    let mid = 0.5 * (lo + hi);
                    if self.distance(a, b, mid) > max_range_m {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Ok(lo - t);
            }
            if probe >= t + cap {
                return Ok(cap);
            }
            inside = probe;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSearch {
    pub step_s: f64,
    pub tolerance_s: f64,
    pub horizon_s: f64,
}

impl Default for WindowSearch {
    fn default() -> Self {
        Self {
            step_s: 1.0,
            tolerance_s: 0.01,
            horizon_s: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationState {
    pub epoch_s: f64,
    pub positions: Vec<Vec3>,
    pub satellite_ids: Vec<SatId>,
}

impl ConstellationState {
    pub fn position(&self, sat: SatId) -> Result<Vec3> {
        self.satellite_ids
            .iter()
            .position(|&s| s == sat)
            .map(|i| self.positions[i])
            .ok_or(Error::Lookup {
                kind: "satellite",
                id: sat.0 as u64,
            })
    }
}

/// Propagates a constellation given as raw orbit specs.
pub fn propagate(
    orbits: &[OrbitSpec],
    constants: &PhysicalConstants,
    t: f64,
) -> Result<ConstellationState> {
    Constellation::new(orbits.to_vec(), *constants)?.propagate(t)
}

/// Geocentric `(longitude, latitude)` of the radial projection of `position`,
/// with longitude in `[-π, π)` and latitude in `[-π/2, π/2]`.
pub fn sub_satellite_point(position: Vec3) -> Result<(f64, f64)> {
    let r = norm(position);
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain("sub-satellite point of a zero vector"));
    }
    Ok(sub_point_unchecked(position))
}

pub(crate) fn sub_point_unchecked(p: Vec3) -> (f64, f64) {
    let lat = (p[2] / norm(p)).clamp(-1.0, 1.0).asin();
    let mut lon = p[1].atan2(p[0]);
    if lon >= PI {
        lon -= TAU;
    }
    (lon, lat)
}

pub fn inter_satellite_distance(state: &ConstellationState, a: SatId, b: SatId) -> Result<f64> {
    let pa = state.position(a)?;
    let pb = state.position(b)?;
    Ok(norm(sub(pa, pb)))
}

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn polar(count: usize, altitude_m: f64) -> Constellation {
        let spec = OrbitSpec {
            altitude_m,
            inclination_rad: PI / 2.0,
            raan_rad: 0.0,
            satellite_count: count,
            phase_offset_rad: 0.0,
        };
        Constellation::new(vec![spec], PhysicalConstants::default()).unwrap()
    }

    #[test]
    fn period_matches_closed_form() {
        let c = PhysicalConstants::default();
        // Frozen from an independent double-precision evaluation.
        assert_relative_eq!(orbital_period(200_000.0, &c).unwrap(), 5304.672718041158, max_relative = 1e-12);
        assert_relative_eq!(orbital_period(600_000.0, &c).unwrap(), 5796.312372399585, max_relative = 1e-12);
        assert!(orbital_period(0.0, &c).is_err());
        assert!(orbital_period(-5.0, &c).is_err());
    }

    #[test]
    fn sub_point_axes() {
        assert_eq!(sub_satellite_point([7e6, 0.0, 0.0]).unwrap(), (0.0, 0.0));
        let (_, lat) = sub_satellite_point([0.0, 0.0, 7e6]).unwrap();
        assert_relative_eq!(lat, PI / 2.0);
        let (lon, lat) = sub_satellite_point([5.0, 5.0, 0.0]).unwrap();
        assert_relative_eq!(lon, PI / 4.0);
        assert_relative_eq!(lat, 0.0);
        assert!(sub_satellite_point([0.0; 3]).is_err());
        let (lon, _) = sub_satellite_point([-1.0, 0.0, 0.0]).unwrap();
        assert_eq!(lon, -PI);
    }

    #[test]
    fn epoch_positions_follow_phasing() {
        let c = polar(10, 500_000.0);
        let state = c.propagate(0.0).unwrap();
        let r = 6_371_393.0 + 500_000.0;
        for (k, p) in state.positions.iter().enumerate() {
            let u = TAU * k as f64 / 10.0;
            assert_relative_eq!(p[0], r * u.cos(), epsilon = 1e-6);
            assert_relative_eq!(p[2], r * u.sin(), epsilon = 1e-6);
        }
    }

    #[test]
    fn one_period_returns_inertial_phase_and_shifts_longitude() {
        let c = polar(10, 400_000.0);
        let period = orbital_period(400_000.0, c.constants()).unwrap();
        let sat = SatId(0);
        let p0 = c.position(sat, 0.0);
        let p1 = c.position(sat, period);
        // Same latitude (same inertial phase), longitude shifted by -ω_e·T.
        let (lon0, lat0) = sub_satellite_point(p0).unwrap();
        let (lon1, lat1) = sub_satellite_point(p1).unwrap();
        assert_relative_eq!(lat0, lat1, epsilon = 1e-9);
        let shift = (lon1 - lon0).rem_euclid(TAU);
        let expected = (-c.constants().earth_rotation_rate_rad_s * period).rem_euclid(TAU);
        assert_relative_eq!(shift, expected, epsilon = 1e-9);
    }

    #[test]
    fn uniform_phasing_is_preserved() {
        let c = polar(10, 300_000.0);
        let r = 6_371_393.0 + 300_000.0;
        let chord = 2.0 * r * (PI / 10.0).sin();
        for t in [0.0, 17.0, 1234.5, 9000.0] {
            for k in 0..10u32 {
                let d = c.distance(SatId(k), SatId((k + 1) % 10), t);
                assert_relative_eq!(d, chord, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn distance_identity_and_antipodes() {
        let c = polar(2, 200_000.0);
        assert_eq!(c.distance(SatId(1), SatId(1), 50.0), 0.0);
        let d = c.distance(SatId(0), SatId(1), 77.0);
        assert_relative_eq!(d, 13_142_786.0, max_relative = 1e-12);
        assert_eq!(c.distance(SatId(0), SatId(1), 3.0), c.distance(SatId(1), SatId(0), 3.0));
        let state = c.propagate(0.0).unwrap();
        assert!(inter_satellite_distance(&state, SatId(0), SatId(9)).is_err());
    }

    #[test]
    fn co_located_window_hits_horizon() {
        let spec = OrbitSpec {
            altitude_m: 500_000.0,
            inclination_rad: 1.0,
            raan_rad: 0.0,
            satellite_count: 1,
            phase_offset_rad: 0.0,
        };
        let c = Constellation::new(vec![spec, spec], PhysicalConstants::default()).unwrap();
        let search = WindowSearch {
            horizon_s: 250.0,
            ..WindowSearch::default()
        };
        let w = c.visibility_window(SatId(0), SatId(1), 10.0, 1000.0, &search).unwrap();
        assert_eq!(w, 240.0);
    }

    #[test]
    fn out_of_range_window_is_zero() {
        let c = polar(2, 200_000.0);
        let w = c
            .visibility_window(SatId(0), SatId(1), 0.0, 7_800_000.0, &WindowSearch::default())
            .unwrap();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn counter_rotating_window_matches_dense_sampling() {
        // Two polar planes 180° apart in RAAN fly in opposite directions over
        // the same meridian: they close, cross, and separate.
        let constants = PhysicalConstants::default();
        let a = OrbitSpec {
            altitude_m: 550_000.0,
            inclination_rad: PI / 2.0,
            raan_rad: 0.0,
            satellite_count: 1,
            phase_offset_rad: 0.0,
        };
        let b = OrbitSpec {
            raan_rad: PI,
            phase_offset_rad: 2.6,
            ..a
        };
        let c = Constellation::new(vec![a, b], constants).unwrap();
        let range = 4_000_000.0;
        let t0 = (0..20_000)
            .map(|k| k as f64)
            .find(|&t| c.distance(SatId(0), SatId(1), t) <= range)
            .unwrap();
        let search = WindowSearch {
            horizon_s: 1e6,
            ..WindowSearch::default()
        };
        let w = c.visibility_window(SatId(0), SatId(1), t0, range, &search).unwrap();
        // Dense oracle at 10 ms.
        let mut s = t0;
        while c.distance(SatId(0), SatId(1), s + 0.01) <= range {
            s += 0.01;
        }
        let dense = s - t0;
        assert!(w > 1.0);
        assert!((w - dense).abs() <= 0.02, "bisection {w} vs dense {dense}");
        assert!(c.in_range_throughout(SatId(0), SatId(1), t0, w - 0.05, range, 1.0));
        assert!(!c.in_range_throughout(SatId(0), SatId(1), t0, w + 0.05, range, 1.0));
    }

    #[test]
    fn walker_star_layout() {
        let orbits = walker_star(&[500e3; 4], &[3; 4], PI / 2.0, PI, 0.0).unwrap();
        let raans: Vec<f64> = orbits.iter().map(|o| o.raan_rad).collect();
        assert_eq!(raans, vec![0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0]);
        assert!(walker_star(&[500e3], &[3, 4], 1.0, PI, 0.0).is_err());
        assert!(walker_star(&[500e3], &[0], 1.0, PI, 0.0).is_err());
    }
}
