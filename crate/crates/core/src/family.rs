//! Ensemble-mean QCM and QCF over a network family.
//!
//! For a topology with hop-distance PMF `q(ℓ)` and i.i.d. edge concurrences,
//!
//! ```text
//! mean QCF = Σ_ℓ q(ℓ) · P(c_1 ⋯ c_ℓ > ε)
//! mean QCM = Σ_ℓ q(ℓ) · E[c_1 ⋯ c_ℓ · 1{c_1 ⋯ c_ℓ > ε}]
//! ```
//!
//! Delta distributions evaluate exactly. Uniform distributions use Monte
//! Carlo over the ℓ-cube with products accumulated in the log domain, and
//! report standard errors propagated through the mixture over ℓ.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::{ConcurrenceDistribution, Stream};
use crate::metrics::MetricParams;
use crate::pathopt::{PairStrength, PathLengthPmf};

/// Samples per independently seeded Monte Carlo block.
pub const MC_BLOCK: usize = 1 << 16;

/// Smallest sample count accepted for the uniform kind.
pub const MIN_MC_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    /// `mc_samples` is 0 when the per-ℓ integrals were evaluated exactly.
    SemiAnalytic {
        mc_samples: usize,
        seed: u64,
    },
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::SemiAnalytic { .. } => "semi_analytic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleEstimate {
    pub mean_qcm: f64,
    pub mean_qcf: f64,
    pub method: Method,
    /// Standard errors; `None` for closed forms, 0 for exact evaluations.
    pub qcm_se: Option<f64>,
    pub qcf_se: Option<f64>,
}

impl EnsembleEstimate {
    fn closed(qcm: f64, qcf: f64) -> Self {
        EnsembleEstimate {
            mean_qcm: qcm,
            mean_qcf: qcf,
            method: Method::ClosedForm,
            qcm_se: None,
            qcf_se: None,
        }
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} outside [0, 1]")))
    }
}

/// Complete topology with every link at `c̄`: QCM = c̄·[c̄ > ε], QCF = [c̄ > ε].
pub fn mean_complete_homogeneous(mean: f64, epsilon: f64) -> Result<EnsembleEstimate> {
    check_unit("mean concurrence", mean)?;
    check_unit("epsilon", epsilon)?;
    Ok(if mean > epsilon {
        EnsembleEstimate::closed(mean, 1.0)
    } else {
        EnsembleEstimate::closed(0.0, 0.0)
    })
}

/// Complete topology with uniform link concurrences on `c̄ ± √(3σ²)`, σ²
/// clipped as in [`ConcurrenceDistribution::effective_variance`].
pub fn mean_complete_uniform(mean: f64, variance: f64, epsilon: f64) -> Result<EnsembleEstimate> {
    check_unit("epsilon", epsilon)?;
    let dist = ConcurrenceDistribution::uniform(mean, variance)?;
    let h = dist.half_width();
    if h == 0.0 {
        return mean_complete_homogeneous(mean, epsilon);
    }
    let (lo, hi) = (mean - h, mean + h);
    Ok(if epsilon > hi {
        EnsembleEstimate::closed(0.0, 0.0)
    } else if epsilon < lo {
        EnsembleEstimate::closed(mean, 1.0)
    } else {
        EnsembleEstimate::closed((hi * hi - epsilon * epsilon) / (4.0 * h), (hi - epsilon) / (2.0 * h))
    })
}

/// Monte Carlo moments for one hop class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopClassEstimate {
    pub hops: u32,
    pub samples: usize,
    /// `P(∏c > ε)`
    pub exceed_prob: f64,
    pub exceed_prob_se: f64,
    /// `E[∏c · 1{∏c > ε}]`
    pub mean_strength: f64,
    pub mean_strength_se: f64,
}

#[derive(Default, Clone, Copy)]
struct BlockSums {
    n: usize,
    pass: u64,
    sum: f64,
    sum_sq: f64,
}

fn block_rng(seed: u64, hops: u32, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((Stream::MonteCarlo as u64) << 56) | ((hops as u64) << 32) | block as u64);
    rng
}

/// Estimates the hop-class moments from `samples` draws of ℓ i.i.d.
/// concurrences. Blocks of [`MC_BLOCK`] draws each get a substream derived
/// from `(seed, ℓ, block)`, so results do not depend on the thread count.
pub fn hop_class_estimate(
    dist: &ConcurrenceDistribution,
    hops: u32,
    params: &MetricParams,
    samples: usize,
    seed: u64,
) -> Result<HopClassEstimate> {
    dist.validate()?;
    if hops == 0 {
        return Err(Error::InvalidParameter("hop class must be at least 1".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let blocks = samples.div_ceil(MC_BLOCK);
    let sums: Vec<BlockSums> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let n = MC_BLOCK.min(samples - b * MC_BLOCK);
            let mut rng = block_rng(seed, hops, b);
            let mut s = BlockSums {
                n,
                ..Default::default()
            };
            for _ in 0..n {
                let mut cost = 0.0;
                for _ in 0..hops {
                    cost -= dist.sample(&mut rng).ln();
                }
                let ps = PairStrength { cost, hops };
                if params.passes(&ps) {
                    let v = ps.strength();
                    s.pass += 1;
                    s.sum += v;
                    s.sum_sq += v * v;
                }
            }
            s
        })
        .collect();

    let total = sums.iter().fold(BlockSums::default(), |a, b| BlockSums {
        n: a.n + b.n,
        pass: a.pass + b.pass,
        sum: a.sum + b.sum,
        sum_sq: a.sum_sq + b.sum_sq,
    });
    let n = total.n as f64;
    let p = total.pass as f64 / n;
    let m = total.sum / n;
    let var_i = (p * (1.0 - p) * n / (n - 1.0)).max(0.0);
    let var_v = ((total.sum_sq - n * m * m) / (n - 1.0)).max(0.0);
    Ok(HopClassEstimate {
        hops,
        samples: total.n,
        exceed_prob: p,
        exceed_prob_se: (var_i / n).sqrt(),
        mean_strength: m,
        mean_strength_se: (var_v / n).sqrt(),
    })
}

/// Semi-analytic ensemble mean from a hop-distance PMF. Disconnected pairs
/// contribute zero. The delta kind (or a uniform clipped to zero width) is
/// evaluated exactly, accumulating `-ln c₀` once per hop as the path engine
/// does.
pub fn mean_from_pmf(
    pmf: &PathLengthPmf,
    dist: &ConcurrenceDistribution,
    epsilon: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<EnsembleEstimate> {
    dist.validate()?;
    let params = MetricParams::new(epsilon)?;

    if dist.is_degenerate() {
        let step = -dist.mean().ln();
        let (mut qcm, mut qcf) = (0.0, 0.0);
        let mut cost = 0.0;
        for hops in 1..=pmf.ell_max() {
            cost += step;
            let ps = PairStrength { cost, hops };
            let q = pmf.mass(hops);
            if q > 0.0 && params.passes(&ps) {
                qcf += q;
                qcm += q * ps.strength();
            }
        }
        return Ok(EnsembleEstimate {
            mean_qcm: qcm,
            mean_qcf: qcf,
            method: Method::SemiAnalytic { mc_samples: 0, seed },
            qcm_se: Some(0.0),
            qcf_se: Some(0.0),
        });
    }

    if mc_samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "uniform kind needs at least {MIN_MC_SAMPLES} Monte Carlo samples per hop class, got {mc_samples}"
        )));
    }
    let (mut qcm, mut qcf, mut var_qcm, mut var_qcf) = (0.0, 0.0, 0.0, 0.0);
    for (&hops, &q) in pmf.masses() {
        let est = hop_class_estimate(dist, hops, &params, mc_samples, seed)?;
        qcf += q * est.exceed_prob;
        qcm += q * est.mean_strength;
        var_qcf += (q * est.exceed_prob_se).powi(2);
        var_qcm += (q * est.mean_strength_se).powi(2);
    }
    Ok(EnsembleEstimate {
        mean_qcm: qcm,
        mean_qcf: qcf,
        method: Method::SemiAnalytic { mc_samples, seed },
        qcm_se: Some(var_qcm.sqrt()),
        qcf_se: Some(var_qcf.sqrt()),
    })
}

/// Exact `P(U_1 ⋯ U_ℓ > ε)` for standard uniforms. `-ln(U_1 ⋯ U_ℓ)` is
/// Gamma(ℓ, 1), so the probability is `1 - ε · Σ_{k<ℓ} ln(1/ε)^k / k!`.
pub fn product_exceedance_u01(epsilon: f64, hops: u32) -> Result<f64> {
    check_unit("epsilon", epsilon)?;
    if hops == 0 {
        return Err(Error::InvalidParameter("hop class must be at least 1".into()));
    }
    if epsilon == 0.0 {
        return Ok(1.0);
    }
    Ok((1.0 - product_below_u01(epsilon, hops)).max(0.0))
}

/// `P(U_1 ⋯ U_ℓ ≤ ε) = ε · Σ_{k<ℓ} ln(1/ε)^k / k!`, for `ε > 0`.
fn product_below_u01(epsilon: f64, hops: u32) -> f64 {
    let l = -epsilon.ln();
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..hops {
        if k > 0 {
            term *= l / k as f64;
        }
        sum += term;
    }
    (epsilon * sum).min(1.0)
}
