//! Network-family generators: topologies and i.i.d. edge concurrences.
//!
//! Every stochastic step draws from [`ChaCha8Rng`] seeded with
//! `seed_from_u64(seed)`, with a fixed stream number per operation so that
//! one seed can drive topology and concurrence sampling without the two
//! sharing random numbers.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Edge, Network, Node, NodeId};

/// Recorded in output headers next to every seed.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub(crate) enum Stream {
    ErdosRenyi = 1,
    Waxman = 2,
    Concurrence = 3,
    MonteCarlo = 4,
}

pub(crate) fn rng_for(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Nodes and links before edge values are assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub nodes: Vec<Node>,
    pub links: Vec<(NodeId, NodeId)>,
}

impl Topology {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Assigns the same concurrence to every link.
    pub fn with_concurrence(&self, c: f64) -> Result<Network> {
        Network::new(
            self.nodes.clone(),
            self.links.iter().map(|&(u, v)| Edge::new(u, v, c)).collect(),
        )
    }
}

pub fn complete_graph(n: usize) -> Result<Topology> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("complete graph needs N >= 2, got {n}")));
    }
    let n = n as NodeId;
    let links = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    Ok(Topology {
        nodes: (0..n).map(Node::new).collect(),
        links,
    })
}

/// G(N, p) with `p = k / (N - 1)`; pairs are visited in `(u, v)`, `u < v`
/// order, one uniform draw each.
pub fn erdos_renyi(n: usize, avg_degree: f64, seed: u64) -> Result<Topology> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("random graph needs N >= 2, got {n}")));
    }
    if !(avg_degree > 0.0 && avg_degree <= (n - 1) as f64) {
        return Err(Error::InvalidParameter(format!(
            "average degree {avg_degree} outside (0, {}]",
            n - 1
        )));
    }
    let p = avg_degree / (n - 1) as f64;
    let mut rng = rng_for(seed, Stream::ErdosRenyi);
    let n = n as NodeId;
    let mut links = Vec::with_capacity((p * (n as f64) * (n as f64 - 1.0) / 2.0 * 1.1) as usize);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                links.push((u, v));
            }
        }
    }
    Ok(Topology {
        nodes: (0..n).map(Node::new).collect(),
        links,
    })
}

/// Photonic Waxman model on a disk centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaxmanParams {
    pub nodes: usize,
    /// Disk radius R in km.
    pub radius: f64,
    /// Dimensionless length scale; `2αR` is the decay length in km.
    pub alpha: f64,
    /// Fiber loss in dB/km.
    pub gamma: f64,
    /// Photons per entanglement-generation attempt.
    pub photons: u32,
    pub seed: u64,
}

impl WaxmanParams {
    /// `α = 226 / 2R`, i.e. a 226 km decay length.
    pub fn default_alpha(radius: f64) -> f64 {
        226.0 / (2.0 * radius)
    }

    pub fn with_radius(nodes: usize, radius: f64, seed: u64) -> Self {
        WaxmanParams {
            nodes,
            radius,
            alpha: Self::default_alpha(radius),
            gamma: 0.2,
            photons: 1000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.nodes == 0
            || !positive(self.radius)
            || !positive(self.alpha)
            || !positive(self.gamma)
            || self.photons == 0
        {
            return Err(Error::InvalidParameter(format!(
                "Waxman parameters must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    /// Link probability at separation `z` km:
    /// `exp(-z / 2αR) · [1 - (1 - 10^(-γz/10))^n_p]`.
    pub fn link_probability(&self, z: f64) -> f64 {
        let decay = (-z / (2.0 * self.alpha * self.radius)).exp();
        let transmit = 10f64.powf(-self.gamma * z / 10.0);
        let all_lost = (self.photons as f64 * (-transmit).ln_1p()).exp();
        decay * (1.0 - all_lost)
    }
}

impl Default for WaxmanParams {
    fn default() -> Self {
        WaxmanParams::with_radius(500, 1000.0, 0)
    }
}

/// Area-uniform node placement (`r = R√u`), then one Bernoulli draw per pair.
pub fn waxman(params: &WaxmanParams) -> Result<Topology> {
    params.validate()?;
    let mut rng = rng_for(params.seed, Stream::Waxman);
    let nodes: Vec<Node> = (0..params.nodes as NodeId)
        .map(|id| {
            let r = params.radius * rng.gen::<f64>().sqrt();
            let theta = 2.0 * PI * rng.gen::<f64>();
            Node::at(id, r * theta.cos(), r * theta.sin())
        })
        .collect();
    let mut links = Vec::new();
    for (a, na) in nodes.iter().enumerate() {
        let pa = na.position.unwrap();
        for nb in &nodes[a + 1..] {
            let z = pa.distance(&nb.position.unwrap());
            if rng.gen::<f64>() < params.link_probability(z) {
                links.push((na.id, nb.id));
            }
        }
    }
    Ok(Topology { nodes, links })
}

/// Edge-concurrence distribution `p_C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConcurrenceDistribution {
    Delta { c0: f64 },
    Uniform { mean: f64, variance: f64 },
}

impl ConcurrenceDistribution {
    pub fn delta(c0: f64) -> Result<Self> {
        let d = ConcurrenceDistribution::Delta { c0 };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(mean: f64, variance: f64) -> Result<Self> {
        let d = ConcurrenceDistribution::Uniform { mean, variance };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ConcurrenceDistribution::Delta { c0 } if !(0.0..=1.0).contains(&c0) => {
                Err(Error::InvalidDistribution(format!("delta at {c0} outside [0, 1]")))
            }
            ConcurrenceDistribution::Uniform { mean, variance }
                if !(0.0..=1.0).contains(&mean) || !(variance >= 0.0 && variance.is_finite()) =>
            {
                Err(Error::InvalidDistribution(format!(
                    "uniform needs mean in [0, 1] and finite variance >= 0, got ({mean}, {variance})"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ConcurrenceDistribution::Delta { c0 } => c0,
            ConcurrenceDistribution::Uniform { mean, .. } => mean,
        }
    }

    /// Variance actually used: `min(σ², min(c̄, 1 - c̄)² / 3)` for the
    /// uniform kind, the largest value that keeps the support inside [0, 1]
    /// around the same mean.
    pub fn effective_variance(&self) -> f64 {
        match *self {
            ConcurrenceDistribution::Delta { .. } => 0.0,
            ConcurrenceDistribution::Uniform { mean, variance } => {
                let room = mean.min(1.0 - mean);
                variance.min(room * room / 3.0)
            }
        }
    }

    /// `√(3σ²_eff)`.
    pub fn half_width(&self) -> f64 {
        (3.0 * self.effective_variance()).sqrt()
    }

    /// Support `[min(c), max(c)]`, clamped against rounding at the edges.
    pub fn bounds(&self) -> (f64, f64) {
        let (m, h) = (self.mean(), self.half_width());
        ((m - h).max(0.0), (m + h).min(1.0))
    }

    /// Delta kind, or a uniform whose variance clipped to zero.
    pub fn is_degenerate(&self) -> bool {
        self.half_width() == 0.0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (lo, hi) = self.bounds();
        if lo == hi {
            return lo;
        }
        (lo + (hi - lo) * rng.gen::<f64>()).clamp(lo, hi)
    }
}

/// One i.i.d. draw per link, in link order.
pub fn sample_concurrences(topology: &Topology, dist: &ConcurrenceDistribution, seed: u64) -> Result<Network> {
    dist.validate()?;
    let mut rng = rng_for(seed, Stream::Concurrence);
    let edges = topology
        .links
        .iter()
        .map(|&(u, v)| Edge::new(u, v, dist.sample(&mut rng)))
        .collect();
    Network::new(topology.nodes.clone(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn complete_graph_edge_counts() {
        assert_eq!(complete_graph(4).unwrap().link_count(), 6);
        assert_eq!(complete_graph(2).unwrap().link_count(), 1);
        assert_eq!(complete_graph(100).unwrap().link_count(), 4950);
        assert!(complete_graph(1).is_err());
    }

    #[test]
    fn er_degree_validation() {
        assert!(erdos_renyi(10, 0.0, 1).is_err());
        assert!(erdos_renyi(10, 9.5, 1).is_err());
        assert!(erdos_renyi(1, 0.5, 1).is_err());
    }

    #[test]
    fn er_full_degree_is_complete() {
        assert_eq!(erdos_renyi(30, 29.0, 5).unwrap(), complete_graph(30).unwrap());
    }

    #[test]
    fn er_is_deterministic_per_seed() {
        let a = erdos_renyi(500, 4.0, 42).unwrap();
        assert_eq!(a, erdos_renyi(500, 4.0, 42).unwrap());
        assert_ne!(a, erdos_renyi(500, 4.0, 43).unwrap());
    }

    #[test]
    fn er_edge_count_within_three_sigma() {
        let (n, k) = (10_000usize, 10.0);
        let pairs = (n * (n - 1) / 2) as f64;
        let p = k / (n - 1) as f64;
        let (mean, sd) = (pairs * p, (pairs * p * (1.0 - p)).sqrt());
        assert!((mean - 5e4).abs() < 1e-6);
        for seed in 0..3 {
            let m = erdos_renyi(n, k, seed).unwrap().link_count() as f64;
            assert!((m - mean).abs() <= 3.0 * sd, "seed {seed}: {m} edges");
        }
    }

    #[test]
    fn waxman_probability_values() {
        let w = WaxmanParams::default();
        assert_eq!(w.link_probability(0.0), 1.0);
        // e^-1 · [1 - (1 - 10^-4.52)^1000]
        let expected = (-1.0f64).exp() * (1.0 - (1.0 - 10f64.powf(-4.52)).powi(1000));
        assert!((w.link_probability(226.0) / expected - 1.0).abs() < 1e-9);
        assert!((w.link_probability(226.0) - 0.01095).abs() < 1e-5);
        assert!(w.link_probability(300.0) < w.link_probability(100.0));
    }

    #[test]
    fn waxman_places_nodes_in_disk() {
        let p = WaxmanParams::with_radius(500, 1000.0, 7);
        let t = waxman(&p).unwrap();
        assert_eq!(t.node_count(), 500);
        assert!(t.nodes.iter().all(|n| n.position.unwrap().norm() <= 1000.0));
        // area-uniform: about a quarter of the nodes fall inside R/2
        let inner = t.nodes.iter().filter(|n| n.position.unwrap().norm() < 500.0).count() as f64;
        let sd = (500.0f64 * 0.25 * 0.75).sqrt();
        assert!((inner - 125.0).abs() < 4.0 * sd, "{inner}");
        assert_eq!(t, waxman(&p).unwrap());
        assert!(t.link_count() > 0);
    }

    #[test]
    fn waxman_rejects_bad_params() {
        let p = WaxmanParams {
            radius: -1.0,
            ..Default::default()
        };
        assert!(waxman(&p).is_err());
        let p = WaxmanParams {
            photons: 0,
            ..Default::default()
        };
        assert!(waxman(&p).is_err());
    }

    #[test]
    fn delta_assigns_constant() {
        let t = erdos_renyi(200, 5.0, 1).unwrap();
        let net = sample_concurrences(&t, &ConcurrenceDistribution::delta(0.6).unwrap(), 9).unwrap();
        assert!(net.edges().iter().all(|e| e.concurrence == 0.6));
    }

    #[test]
    fn uniform_bounds_and_mean() {
        let d = ConcurrenceDistribution::uniform(0.5, 0.005).unwrap();
        let (lo, hi) = d.bounds();
        assert!((lo - (0.5 - 0.015f64.sqrt())).abs() < 1e-15);
        assert!((hi - (0.5 + 0.015f64.sqrt())).abs() < 1e-15);

        let t = complete_graph(300).unwrap();
        let net = sample_concurrences(&t, &d, 4).unwrap();
        let cs: Vec<f64> = net.edges().iter().map(|e| e.concurrence).collect();
        assert!(cs.iter().all(|&c| (lo..=hi).contains(&c)));
        let n = cs.len() as f64;
        let mean = cs.iter().sum::<f64>() / n;
        let var = cs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 0.5).abs() < 3.0 * (0.005 / n).sqrt());
        // Var of the sample variance for U(a, b): (μ4 - σ⁴)/n with μ4 = 9σ⁴/5
        let var_sd = (0.8 * 0.005f64.powi(2) / n).sqrt();
        assert!((var - 0.005).abs() < 3.0 * var_sd, "{var}");
    }

    #[test]
    fn variance_clipped_near_edges() {
        let d = ConcurrenceDistribution::uniform(0.01, 0.005).unwrap();
        assert!((d.effective_variance() - 0.0001 / 3.0).abs() < 1e-18);
        assert!(d.bounds().0 >= 0.0);
        assert!((d.bounds().1 - 0.02).abs() < 1e-15);
        let top = ConcurrenceDistribution::uniform(0.99, 0.005).unwrap();
        assert!(top.bounds().1 <= 1.0);
        assert!(ConcurrenceDistribution::uniform(0.0, 0.005).unwrap().is_degenerate());
    }

    #[test]
    fn invalid_distributions() {
        assert!(ConcurrenceDistribution::delta(1.1).is_err());
        assert!(ConcurrenceDistribution::uniform(0.5, -0.1).is_err());
        assert!(ConcurrenceDistribution::uniform(-0.5, 0.1).is_err());
    }

    #[test]
    fn streams_are_independent() {
        // same seed, different operations, different draws
        let a: f64 = rng_for(1, Stream::ErdosRenyi).gen();
        let b: f64 = rng_for(1, Stream::Concurrence).gen();
        assert_ne!(a, b);
    }

    #[test]
    fn distribution_json_shape() {
        let d = ConcurrenceDistribution::uniform(0.5, 0.005).unwrap();
        let j = serde_json::to_value(d).unwrap();
        assert_eq!(j["kind"], "uniform");
        assert_eq!(serde_json::from_value::<ConcurrenceDistribution>(j).unwrap(), d);
    }

    proptest! {
        #[test]
        fn samples_always_in_unit_interval(mean in 0.0f64..=1.0, var in 0.0f64..1.0, seed in any::<u64>()) {
            let d = ConcurrenceDistribution::uniform(mean, var).unwrap();
            let (lo, hi) = d.bounds();
            prop_assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
            prop_assert!(((lo + hi) / 2.0 - mean).abs() < 1e-12);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..64 {
                let c = d.sample(&mut rng);
                prop_assert!((0.0..=1.0).contains(&c));
            }
        }
    }
}
