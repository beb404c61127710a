//! Functional connectivity of quantum networks.
//!
//! Links carry pure entangled states of a given concurrence. Entanglement
//! swapping along a path multiplies concurrences, so every node pair has a
//! connection strength set by its strongest path. This crate computes those
//! strengths and the connectivity metrics built on them:
//!
//! * QCM, the mean strength over the pairs of a node set that beat a task
//!   threshold ε;
//! * QCF, the fraction of such pairs;
//! * QCC, the QCM of a node's neighborhood.
//!
//! It also generates network families (complete, Erdős–Rényi, photonic
//! Waxman) and evaluates their ensemble means in closed form or from a
//! hop-distance PMF.

pub mod error;
pub mod family;
pub mod generate;
pub mod metrics;
pub mod network;
pub mod pathopt;
pub mod spatial;

pub use error::{Error, Result};
pub use family::{
    hop_class_estimate, mean_complete_homogeneous, mean_complete_uniform, mean_from_pmf, product_exceedance_u01,
    EnsembleEstimate, HopClassEstimate, Method,
};
pub use generate::{
    complete_graph, erdos_renyi, sample_concurrences, waxman, ConcurrenceDistribution, Topology, WaxmanParams,
    RNG_ALGORITHM,
};
pub use metrics::{clustering_coefficient, connectivity_report, qcc, qcf, qcm, ConnectivityReport, MetricParams};
pub use network::{build_network, load_network, save_network, Edge, Network, Node, NodeId, NodeSet, Point};
pub use pathopt::{
    all_pairs_strengths, all_pairs_strengths_with, hop_distance_pmf, optimal_path, PairStrength, PathLengthPmf,
    PathResult, StrengthTable, TableOptions,
};
pub use spatial::{density_report, partition_regions, regional_qcm, DensityReport, RegionPartition, RegionReport};
