//! Quantum connectivity measure (QCM), quantum-connected fraction (QCF) and
//! quantum clustering coefficient (QCC).
//!
//! A pair counts as functionally connected when its strength strictly exceeds
//! the task threshold ε. The comparison is made on `-ln S` against `-ln ε`,
//! the same log-domain quantity the path engine produces, so a single link of
//! concurrence exactly ε is excluded without rounding through `exp`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Network, NodeId};
use crate::pathopt::{all_pairs_strengths_with, PairStrength, StrengthTable, TableOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    epsilon: f64,
    cost_limit: f64,
}

impl MetricParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(MetricParams {
            epsilon,
            cost_limit: -epsilon.ln(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Strict Heaviside `Θ[S - ε]`, zero at `S = ε`.
    pub fn passes(&self, ps: &PairStrength) -> bool {
        ps.cost < self.cost_limit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub qcm: f64,
    pub qcf: f64,
    #[serde(rename = "pairs")]
    pub pair_count: u64,
    #[serde(rename = "passing")]
    pub passing_pairs: u64,
}

impl ConnectivityReport {
    pub const CSV_HEADER: [&'static str; 4] = ["qcm", "qcf", "pairs", "passing"];

    pub fn csv_record(&self) -> [String; 4] {
        [
            self.qcm.to_string(),
            self.qcf.to_string(),
            self.pair_count.to_string(),
            self.passing_pairs.to_string(),
        ]
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

pub fn connectivity_report(table: &StrengthTable, params: &MetricParams) -> Result<ConnectivityReport> {
    let pairs = table.pair_count();
    if pairs == 0 {
        return Err(Error::EmptyTable);
    }
    let mut sum = 0.0;
    let mut passing = 0u64;
    for ps in table.entries().iter().filter(|ps| params.passes(ps)) {
        sum += ps.strength();
        passing += 1;
    }
    Ok(ConnectivityReport {
        qcm: sum / pairs as f64,
        qcf: passing as f64 / pairs as f64,
        pair_count: pairs as u64,
        passing_pairs: passing,
    })
}

/// Mean thresholded strength over the table's pairs.
pub fn qcm(table: &StrengthTable, params: &MetricParams) -> Result<f64> {
    connectivity_report(table, params).map(|r| r.qcm)
}

/// Fraction of pairs strictly above threshold.
pub fn qcf(table: &StrengthTable, params: &MetricParams) -> Result<f64> {
    connectivity_report(table, params).map(|r| r.qcf)
}

/// QCM of the neighbor set of `node`. Paths run over the whole network and
/// may pass through `node` itself.
pub fn qcc(net: &Network, node: NodeId, params: &MetricParams) -> Result<f64> {
    let neighbors = net.neighbor_set(node)?;
    if neighbors.len() < 2 {
        return Err(Error::DegreeTooSmall {
            node,
            degree: neighbors.len(),
        });
    }
    let table = all_pairs_strengths_with(net, &neighbors, TableOptions { retain_paths: false })?;
    qcm(&table, params)
}

/// Classical local clustering coefficient: the fraction of neighbor pairs
/// that share an edge. `None` below degree 2.
pub fn clustering_coefficient(net: &Network, node: NodeId) -> Result<Option<f64>> {
    let neighbors = net.neighbor_set(node)?;
    let k = neighbors.len();
    if k < 2 {
        return Ok(None);
    }
    let m = neighbors.members();
    let mut links = 0usize;
    for (a, &u) in m.iter().enumerate() {
        for &v in &m[a + 1..] {
            if net.concurrence(u, v)?.is_some() {
                links += 1;
            }
        }
    }
    Ok(Some(links as f64 / (k * (k - 1) / 2) as f64))
}
