//! Shared fixtures for the qconn benchmarks.

use qconn::{erdos_renyi, hop_distance_pmf, sample_concurrences, ConcurrenceDistribution, Network, PathLengthPmf};

/// ER graph of mean degree 10 with uniform(0.6, 0.005) concurrences.
pub fn er_network(nodes: usize, seed: u64) -> Network {
    let topology = erdos_renyi(nodes, 10.0, seed).expect("valid ER parameters");
    let dist = ConcurrenceDistribution::uniform(0.6, 0.005).expect("valid distribution");
    sample_concurrences(&topology, &dist, seed).expect("valid network")
}

pub fn er_pmf(nodes: usize, seed: u64) -> PathLengthPmf {
    hop_distance_pmf(&er_network(nodes, seed)).expect("at least two nodes")
}
