use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::{self, Execution};
use crate::ga::{brute_force_shortest_path, ga_shortest_path, GaParams};
use crate::graph::{GraphView, Topology};
use crate::synthetic::{random_instance, RandomInstance};
use crate::zone::VnId;

/// Settings of a GA-versus-enumeration comparison on random small graphs.
#[derive(Debug, Clone)]
pub struct OracleSpec {
    pub instances: usize,
    pub first_seed: u64,
    pub graph: RandomInstance,
    pub volume_gb: f64,
    pub start_s: f64,
    /// Allowed relative excess of the GA length over the exact one.
    pub tolerance: f64,
    pub ga: GaParams,
    pub execution: Execution,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            instances: 100,
            first_seed: 0,
            graph: RandomInstance::default(),
            volume_gb: 0.5,
            start_s: 0.3,
            tolerance: 0.05,
            ga: GaParams::default(),
            execution: Execution::default(),
        }
    }
}

/// One instance, routed from VN 0 to the last VN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCase {
    pub seed: u64,
    pub ga_length_s: f64,
    pub exact_length_s: f64,
    pub ga_hops: usize,
    pub exact_hops: usize,
    /// `ga / exact - 1`; 0 when both are equal (including both infinite).
    pub relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub tolerance: f64,
    pub cases: Vec<OracleCase>,
}

impl OracleReport {
    pub fn within_tolerance(&self) -> usize {
        self.cases.iter().filter(|c| c.relative_gap <= self.tolerance).count()
    }

    /// Cases where the GA claims a shorter path than the enumeration.
    pub fn below_exact(&self) -> usize {
        self.cases.iter().filter(|c| c.relative_gap < 0.0).count()
    }

    pub fn exact_matches(&self) -> usize {
        self.cases.iter().filter(|c| c.relative_gap == 0.0).count()
    }

    pub fn max_gap(&self) -> f64 {
        self.cases.iter().map(|c| c.relative_gap).fold(0.0, f64::max)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let n = self.cases.len();
        let _ = writeln!(s, "instances: {n}");
        let _ = writeln!(s, "exact matches: {}", self.exact_matches());
        let _ = writeln!(s, "within {:.1}%: {}", 100.0 * self.tolerance, self.within_tolerance());
        let _ = writeln!(s, "below exact: {}", self.below_exact());
        let _ = writeln!(s, "max relative gap: {:.6}", self.max_gap());
        s
    }
}

fn relative_gap(ga: f64, exact: f64) -> f64 {
    if ga == exact {
        0.0
    } else if exact > 0.0 && exact.is_finite() {
        ga / exact - 1.0
    } else if ga > exact {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

pub fn path_oracle(spec: &OracleSpec) -> Result<OracleReport> {
    let seeds: Vec<u64> = (0..spec.instances as u64).map(|k| spec.first_seed + k).collect();
    let cases = exec::map(spec.execution, &seeds, |&seed| -> Result<OracleCase> {
        let (net, ledger) = random_instance(seed, spec.graph)?;
        let view = GraphView::new(&net, &ledger);
        let dest = VnId(net.vn_count() as u32 - 1);
        let ga = GaParams {
            rng_seed: seed,
            ..spec.ga.clone()
        };
        let g = ga_shortest_path(view, VnId(0), dest, spec.start_s, spec.volume_gb, &ga)?;
        let e = brute_force_shortest_path(view, VnId(0), dest, spec.start_s, spec.volume_gb, net.vn_count())?;
        Ok(OracleCase {
            seed,
            ga_length_s: g.length_s,
            exact_length_s: e.length_s,
            ga_hops: g.path.len().saturating_sub(1),
            exact_hops: e.path.len().saturating_sub(1),
            relative_gap: relative_gap(g.length_s, e.length_s),
        })
    });
    Ok(OracleReport {
        tolerance: spec.tolerance,
        cases: cases.into_iter().collect::<Result<_>>()?,
    })
}
