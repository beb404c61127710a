//! Regional connectivity maps for planar networks.
//!
//! Region centres sit on a hexagonal lattice of spacing `2r` around the
//! origin, keeping the lattice points inside the smallest origin-centred disk
//! that holds every node. Each node joins its nearest centre (lowest index on
//! ties). Regional metrics use optimal paths over the whole network.

use std::io::Write;

use crate::error::{Error, Result};
use crate::metrics::{connectivity_report, ConnectivityReport, MetricParams};
use crate::network::{Network, NodeId, NodeSet, Point};
use crate::pathopt::{all_pairs_strengths_with, StrengthTable, TableOptions};

/// Critical node density for connectivity of the photonic Waxman model,
/// per km².
pub const CRITICAL_DENSITY: f64 = 6.82e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct RegionPartition {
    pub region_radius: f64,
    pub centers: Vec<Point>,
    /// Region index per node, aligned with `Network::nodes()`.
    pub assignment: Vec<usize>,
    node_ids: Vec<NodeId>,
}

impl RegionPartition {
    pub fn region_count(&self) -> usize {
        self.centers.len()
    }

    pub fn node_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.centers.len()];
        for &r in &self.assignment {
            counts[r] += 1;
        }
        counts
    }

    pub fn region_of(&self, id: NodeId) -> Option<usize> {
        self.node_ids.binary_search(&id).ok().map(|k| self.assignment[k])
    }

    /// Members of each region, in increasing id order.
    pub fn members(&self) -> Vec<NodeSet> {
        let mut sets = vec![Vec::new(); self.centers.len()];
        for (&id, &r) in self.node_ids.iter().zip(&self.assignment) {
            sets[r].push(id);
        }
        sets.into_iter()
            .map(|m| NodeSet::new(m).expect("ids are unique"))
            .collect()
    }
}

fn hex_centers(region_radius: f64, disk_radius: f64) -> Vec<Point> {
    let spacing = 2.0 * region_radius;
    let row_step = spacing * 3f64.sqrt() / 2.0;
    let rows = (disk_radius / row_step).floor() as i64 + 1;
    let cols = (disk_radius / spacing).floor() as i64 + 2;
    let mut centers = Vec::new();
    for b in -rows..=rows {
        let y = b as f64 * row_step;
        let shift = if b.rem_euclid(2) == 1 { spacing / 2.0 } else { 0.0 };
        for a in -cols..=cols {
            let p = Point::new(a as f64 * spacing + shift, y);
            if p.norm() <= disk_radius {
                centers.push(p);
            }
        }
    }
    centers
}

pub fn partition_regions(net: &Network, region_radius: f64) -> Result<RegionPartition> {
    if !(region_radius.is_finite() && region_radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "region radius {region_radius} must be positive"
        )));
    }
    let points = net
        .nodes()
        .iter()
        .map(|n| n.position.ok_or(Error::MissingPositions(n.id)))
        .collect::<Result<Vec<_>>>()?;
    let disk = points.iter().map(Point::norm).fold(0.0, f64::max);
    partition_points(net, &points, region_radius, hex_centers(region_radius, disk))
}

/// Nearest-centre assignment against an explicit list of centres.
pub fn partition_with_centers(net: &Network, region_radius: f64, centers: Vec<Point>) -> Result<RegionPartition> {
    if centers.is_empty() {
        return Err(Error::InvalidParameter("no region centres".into()));
    }
    let points = net
        .nodes()
        .iter()
        .map(|n| n.position.ok_or(Error::MissingPositions(n.id)))
        .collect::<Result<Vec<_>>>()?;
    partition_points(net, &points, region_radius, centers)
}

fn partition_points(
    net: &Network,
    points: &[Point],
    region_radius: f64,
    centers: Vec<Point>,
) -> Result<RegionPartition> {
    let assignment = points
        .iter()
        .map(|p| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (k, c) in centers.iter().enumerate() {
                let d = p.distance_sq(c);
                if d < best_d {
                    best = k;
                    best_d = d;
                }
            }
            best
        })
        .collect();
    Ok(RegionPartition {
        region_radius,
        centers,
        assignment,
        node_ids: net.node_ids().collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub index: usize,
    pub center: Point,
    pub node_count: usize,
    /// `None` for regions with fewer than two nodes.
    pub report: Option<ConnectivityReport>,
}

/// Per-region QCM/QCF from one all-pairs table over the whole network.
pub fn regional_qcm(net: &Network, partition: &RegionPartition, params: &MetricParams) -> Result<Vec<RegionReport>> {
    if partition.node_ids.len() != net.node_count() || !partition.node_ids.iter().copied().eq(net.node_ids()) {
        return Err(Error::InconsistentPartition("node ids differ from the network".into()));
    }
    if let Some(&bad) = partition.assignment.iter().find(|&&r| r >= partition.centers.len()) {
        return Err(Error::InconsistentPartition(format!("region index {bad} out of range")));
    }
    let table = if net.node_count() >= 2 {
        Some(all_pairs_strengths_with(
            net,
            &net.all_nodes(),
            TableOptions { retain_paths: false },
        )?)
    } else {
        None
    };
    regional_reports(table.as_ref(), partition, params)
}

/// Regional reports from a precomputed table covering every node.
pub fn regional_reports(
    table: Option<&StrengthTable>,
    partition: &RegionPartition,
    params: &MetricParams,
) -> Result<Vec<RegionReport>> {
    partition
        .members()
        .into_iter()
        .enumerate()
        .map(|(index, members)| {
            let report = match table {
                Some(t) if members.len() >= 2 => Some(connectivity_report(&t.restrict(&members)?, params)?),
                _ => None,
            };
            Ok(RegionReport {
                index,
                center: partition.centers[index],
                node_count: members.len(),
                report,
            })
        })
        .collect()
}

/// `region_index,center_x,center_y,node_count,qcm,qcf`; undefined regions
/// leave the metric columns empty.
pub fn write_regional_csv<W: Write>(reports: &[RegionReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["region_index", "center_x", "center_y", "node_count", "qcm", "qcf"])?;
    for r in reports {
        let (qcm, qcf) = match &r.report {
            Some(rep) => (rep.qcm.to_string(), rep.qcf.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            r.index.to_string(),
            r.center.x.to_string(),
            r.center.y.to_string(),
            r.node_count.to_string(),
            qcm,
            qcf,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    /// Nodes per km².
    pub rho: f64,
    pub above_critical: bool,
}

/// `ρ = N / πR²` compared against [`CRITICAL_DENSITY`].
pub fn density_report(nodes: usize, radius: f64) -> Result<DensityReport> {
    if nodes == 0 || !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need N >= 1 and R > 0, got ({nodes}, {radius})"
        )));
    }
    let rho = nodes as f64 / (std::f64::consts::PI * radius * radius);
    Ok(DensityReport {
        rho,
        above_critical: rho > CRITICAL_DENSITY,
    })
}
