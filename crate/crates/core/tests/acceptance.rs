//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p qconn --test acceptance -- --nocapture` to see them.
//!
//! Tests hold a shared lock so the wall-clock budgets are measured without
//! interference from one another.

use std::collections::{HashMap, VecDeque};
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use qconn::{
    all_pairs_strengths, all_pairs_strengths_with, complete_graph, connectivity_report, density_report, erdos_renyi,
    hop_class_estimate, hop_distance_pmf, mean_complete_uniform, mean_from_pmf, partition_regions,
    product_exceedance_u01, qcc, regional_qcm, sample_concurrences, waxman, ConcurrenceDistribution, Edge,
    MetricParams, Network, Node, NodeId, NodeSet, StrengthTable, TableOptions, WaxmanParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Written to stderr directly so the line shows up even when the harness
/// captures test output.
fn verdict(id: &str, ok: bool, detail: String) {
    let _ = writeln!(std::io::stderr(), "[{}] {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id} failed: {detail}");
}

fn strengths_only(net: &Network) -> StrengthTable {
    all_pairs_strengths_with(net, &net.all_nodes(), TableOptions { retain_paths: false }).unwrap()
}

fn eps(e: f64) -> MetricParams {
    MetricParams::new(e).unwrap()
}

#[test]
fn ac01_complete_homogeneous_piecewise_law() {
    let _g = lock();
    let start = Instant::now();
    let topo = complete_graph(50).unwrap();
    let mut worst: f64 = 0.0;
    for k in 1..=19 {
        let c0 = k as f64 / 20.0;
        let net = topo.with_concurrence(c0).unwrap();
        let r = connectivity_report(&strengths_only(&net), &eps(0.3)).unwrap();
        let (qcm, qcf) = if c0 > 0.3 { (c0, 1.0) } else { (0.0, 0.0) };
        worst = worst.max((r.qcm - qcm).abs()).max((r.qcf - qcf).abs());
    }
    let elapsed = start.elapsed();
    verdict(
        "AC1 complete/homogeneous",
        worst <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("max deviation {worst:.3e} (<= 1e-12), runtime {elapsed:.2?} (< 1 s)"),
    );
}

#[test]
fn ac02_complete_uniform_closed_form() {
    let _g = lock();
    let start = Instant::now();
    let spot = mean_complete_uniform(0.3, 0.005, 0.3).unwrap();
    let spot_ok = (spot.mean_qcf - 0.5).abs() < 1e-12 && (spot.mean_qcm - 0.18062).abs() < 5e-6;

    let topo = complete_graph(200).unwrap();
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for cbar in [0.2, 0.3, 0.4, 0.6] {
        let dist = ConcurrenceDistribution::uniform(cbar, 0.005).unwrap();
        let (mut qcm, mut qcf) = (0.0, 0.0);
        for seed in 0..100 {
            let net = sample_concurrences(&topo, &dist, seed).unwrap();
            let r = connectivity_report(&strengths_only(&net), &eps(0.3)).unwrap();
            qcm += r.qcm / 100.0;
            qcf += r.qcf / 100.0;
        }
        let exact = mean_complete_uniform(cbar, 0.005, 0.3).unwrap();
        let d = (qcm - exact.mean_qcm).abs().max((qcf - exact.mean_qcf).abs());
        worst = worst.max(d);
        lines.push(format!(
            "c̄={cbar}: sim ({qcm:.5}, {qcf:.5}) vs closed ({:.5}, {:.5})",
            exact.mean_qcm, exact.mean_qcf
        ));
    }
    let elapsed = start.elapsed();
    verdict(
        "AC2 complete/uniform",
        spot_ok && worst <= 0.02 && elapsed < Duration::from_secs(120),
        format!(
            "spot ({:.5}, {:.5}); {}; max |Δ| {worst:.4} (<= 0.02), runtime {elapsed:.2?} (< 2 min)",
            spot.mean_qcm,
            spot.mean_qcf,
            lines.join("; ")
        ),
    );
}

/// `Σ_{ℓ: c₀^ℓ > ε} q(ℓ)` with `c₀^ℓ` from `powi`.
fn staircase(q: &HashMap<u32, f64>, c0: f64, e: f64) -> f64 {
    q.iter().filter(|(&l, _)| c0.powi(l as i32) > e).map(|(_, &m)| m).sum()
}

#[test]
fn ac03_random_network_staircase() {
    let _g = lock();
    let start = Instant::now();
    let e = 0.3;
    let topo = erdos_renyi(2000, 10.0, 2024).unwrap();
    let pmf = hop_distance_pmf(&topo.with_concurrence(0.5).unwrap()).unwrap();
    let q: HashMap<u32, f64> = pmf.masses().iter().map(|(&l, &m)| (l, m)).collect();

    let qcf_at = |k: u32| {
        let c0 = k as f64 / 200.0;
        let net = topo.with_concurrence(c0).unwrap();
        connectivity_report(&strengths_only(&net), &eps(e)).unwrap().qcf
    };

    let mut ok = true;
    let mut notes = Vec::new();
    // grid points (step 0.005) straddling ε^(1/ℓ) for ℓ = 1, 2, 3
    for l in 1..=3u32 {
        let jump = e.powf(1.0 / l as f64);
        let below = (jump * 200.0).floor() as u32;
        let (lo, hi) = (qcf_at(below), qcf_at(below + 1));
        let (lo_ref, hi_ref) = (
            staircase(&q, below as f64 / 200.0, e),
            staircase(&q, (below + 1) as f64 / 200.0, e),
        );
        let step = hi - lo;
        let matches = (lo - lo_ref).abs() <= 1e-12 && (hi - hi_ref).abs() <= 1e-12;
        let jumped = (step - pmf.mass(l)).abs() <= 1e-12 && pmf.mass(l) > 0.0;
        ok &= matches && jumped;
        notes.push(format!(
            "ℓ={l} jump at {jump:.4}: QCF {lo:.6} @ {:.3} -> {hi:.6} @ {:.3} (q(ℓ)={:.6})",
            below as f64 / 200.0,
            (below + 1) as f64 / 200.0,
            pmf.mass(l)
        ));
    }
    // flat between jumps
    for k in [40, 80, 120, 150, 170, 190] {
        let v = qcf_at(k);
        let r = staircase(&q, k as f64 / 200.0, e);
        ok &= (v - r).abs() <= 1e-12;
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(120);
    verdict(
        "AC3 random staircase",
        ok,
        format!("{}; runtime {elapsed:.2?} (< 2 min)", notes.join("; ")),
    );
}

#[test]
fn ac04_semi_analytic_vs_simulation() {
    let _g = lock();
    let start = Instant::now();
    let topo = erdos_renyi(1000, 10.0, 77).unwrap();
    let dist = ConcurrenceDistribution::uniform(0.6, 0.005).unwrap();
    let pmf = hop_distance_pmf(&topo.with_concurrence(0.5).unwrap()).unwrap();
    let semi = mean_from_pmf(&pmf, &dist, 0.3, 100_000, 5).unwrap();

    let (mut qcm, mut qcf) = (0.0, 0.0);
    for seed in 0..50 {
        let net = sample_concurrences(&topo, &dist, seed).unwrap();
        let r = connectivity_report(&strengths_only(&net), &eps(0.3)).unwrap();
        qcm += r.qcm / 50.0;
        qcf += r.qcf / 50.0;
    }
    let (dm, df) = ((semi.mean_qcm - qcm).abs(), (semi.mean_qcf - qcf).abs());
    let elapsed = start.elapsed();
    verdict(
        "AC4 semi-analytic vs simulation",
        dm <= 0.03 && df <= 0.03 && elapsed < Duration::from_secs(300),
        format!(
            "semi ({:.4} ± {:.1e}, {:.4} ± {:.1e}) vs sim ({qcm:.4}, {qcf:.4}); |Δ| = ({dm:.4}, {df:.4}) (<= 0.03); runtime {elapsed:.2?} (< 5 min)",
            semi.mean_qcm,
            semi.qcm_se.unwrap(),
            semi.mean_qcf,
            semi.qcf_se.unwrap()
        ),
    );
}

#[test]
fn ac05_monte_carlo_oracle() {
    let _g = lock();
    let start = Instant::now();
    let u01 = ConcurrenceDistribution::uniform(0.5, 1.0 / 12.0).unwrap();
    assert_eq!(u01.bounds(), (0.0, 1.0));
    let mut worst_z: f64 = 0.0;
    for e in [0.1, 0.3, 0.5] {
        for l in 1..=6 {
            let est = hop_class_estimate(&u01, l, &eps(e), 1_000_000, 99).unwrap();
            let exact = product_exceedance_u01(e, l).unwrap();
            worst_z = worst_z.max((est.exceed_prob - exact).abs() / est.exceed_prob_se);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "AC5 Monte Carlo oracle",
        worst_z <= 3.0 && elapsed < Duration::from_secs(60),
        format!("max |z| over 18 cells {worst_z:.2} (<= 3), runtime {elapsed:.2?} (< 1 min)"),
    );
}

#[test]
fn ac06_star_qcc() {
    let _g = lock();
    let nodes = (0..5).map(Node::new).collect();
    let edges = (1..5).map(|l| Edge::new(0, l, 0.8)).collect();
    let star = Network::new(nodes, edges).unwrap();
    let value = qcc(&star, 0, &eps(0.3)).unwrap();

    // classical clustering by explicit triangle count over the edge list
    let edge_set: Vec<(NodeId, NodeId)> = star.edges().iter().map(|e| (e.u.min(e.v), e.u.max(e.v))).collect();
    let has = |a: NodeId, b: NodeId| edge_set.contains(&(a.min(b), a.max(b)));
    let nbrs: Vec<NodeId> = (1..5).filter(|&j| has(0, j)).collect();
    let mut triangles = 0;
    for (a, &u) in nbrs.iter().enumerate() {
        for &v in &nbrs[a + 1..] {
            if has(u, v) {
                triangles += 1;
            }
        }
    }
    let k = nbrs.len();
    let classical = triangles as f64 / (k * (k - 1) / 2) as f64;
    verdict(
        "AC6 star QCC",
        (value - 0.64).abs() <= 1e-15 && classical == 0.0,
        format!("QCC(0) = {value} (0.64), classical clustering {classical} (0)"),
    );
}

/// Largest log-strength over all simple paths.
fn enumerate_best_log(adj: &[Vec<(usize, f64)>], i: usize, j: usize) -> f64 {
    fn dfs(adj: &[Vec<(usize, f64)>], u: usize, j: usize, acc: f64, on: &mut [bool], best: &mut f64) {
        if u == j {
            if acc > *best {
                *best = acc;
            }
            return;
        }
        for &(v, c) in &adj[u] {
            if !on[v] && c > 0.0 {
                on[v] = true;
                dfs(adj, v, j, acc + c.ln(), on, best);
                on[v] = false;
            }
        }
    }
    let mut on = vec![false; adj.len()];
    on[i] = true;
    let mut best = f64::NEG_INFINITY;
    dfs(adj, i, j, 0.0, &mut on, &mut best);
    best
}

#[test]
fn ac07_path_engine_exactness() {
    let _g = lock();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut pairs, mut worst, mut mismatched_connectivity) = (0usize, 0.0f64, 0usize);
    for _ in 0..500 {
        let n = rng.gen_range(2..=10usize);
        let density: f64 = rng.gen_range(0.15..0.95);
        let mut adj = vec![Vec::new(); n];
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(density) {
                    let c: f64 = rng.gen();
                    adj[u].push((v, c));
                    adj[v].push((u, c));
                    edges.push(Edge::new(u as NodeId, v as NodeId, c));
                }
            }
        }
        let net = Network::new((0..n as NodeId).map(Node::new).collect(), edges).unwrap();
        let table = all_pairs_strengths(&net, &net.all_nodes()).unwrap();
        for (i, j, ps) in table.pairs() {
            pairs += 1;
            let best = enumerate_best_log(&adj, i as usize, j as usize);
            if best.is_finite() != ps.is_connected() {
                mismatched_connectivity += 1;
            } else if best.is_finite() {
                worst = worst.max((best - ps.log_strength()).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "AC7 path-engine exactness",
        worst <= 1e-12 && mismatched_connectivity == 0 && elapsed < Duration::from_secs(60),
        format!(
            "{pairs} pairs, max |Δ log S| {worst:.2e} (<= 1e-12), {mismatched_connectivity} connectivity mismatches, runtime {elapsed:.2?} (< 1 min)"
        ),
    );
}

#[test]
fn ac08_scale_and_complexity() {
    let _g = lock();
    let dist = ConcurrenceDistribution::uniform(0.6, 0.005).unwrap();
    let time_all_pairs = |n: usize| {
        let net = sample_concurrences(&erdos_renyi(n, 10.0, 8).unwrap(), &dist, 8).unwrap();
        let start = Instant::now();
        let table = strengths_only(&net);
        let elapsed = start.elapsed();
        assert_eq!(table.pair_count(), n * (n - 1) / 2);
        elapsed
    };
    let half = time_all_pairs(5_000);
    let full = time_all_pairs(10_000);
    let ratio = full.as_secs_f64() / half.as_secs_f64();
    verdict(
        "AC8 scale",
        full < Duration::from_secs(600) && ratio <= 5.0,
        format!(
            "N=5000 {half:.2?}, N=10000 {full:.2?} (< 10 min) on {} threads; ratio {ratio:.2} (<= 5)",
            rayon::current_num_threads()
        ),
    );
}

/// Fewest-hop distances from `s` over nonzero links, by plain BFS.
fn bfs_hops(net: &Network, s: NodeId) -> HashMap<NodeId, u32> {
    let mut adj: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for e in net.edges().iter().filter(|e| e.concurrence > 0.0) {
        adj.entry(e.u).or_default().push(e.v);
        adj.entry(e.v).or_default().push(e.u);
    }
    let mut dist = HashMap::from([(s, 0)]);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        for &v in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
            dist.entry(v).or_insert_with(|| {
                queue.push_back(v);
                d + 1
            });
        }
    }
    dist
}

#[test]
fn ac09_waxman_regional_map() {
    let _g = lock();
    let start = Instant::now();
    let density = density_report(500, 1000.0).unwrap();
    let density_ok = (density.rho - 1.5915e-4).abs() < 5e-9 && density.above_critical;

    let params = WaxmanParams::with_radius(500, 1000.0, 7);
    let topo = waxman(&params).unwrap();
    let net = sample_concurrences(&topo, &ConcurrenceDistribution::delta(0.6).unwrap(), 7).unwrap();
    let partition = partition_regions(&net, 200.0).unwrap();
    let reports = regional_qcm(&net, &partition, &eps(0.3)).unwrap();

    let mut ok = density_ok;
    let mut worst: f64 = 0.0;
    let mut defined = 0;
    for (report, members) in reports.iter().zip(partition.members()) {
        let Some(r) = report.report else {
            ok &= members.len() < 2;
            continue;
        };
        defined += 1;
        ok &= (0.0..=1.0).contains(&r.qcm) && r.qcm <= r.qcf;
        let m = members.members();
        let mut sum = 0.0;
        for (a, &i) in m.iter().enumerate() {
            let hops = bfs_hops(&net, i);
            for &j in &m[a + 1..] {
                match hops.get(&j) {
                    Some(1) => sum += 0.6,
                    Some(2) => sum += 0.6 * 0.6,
                    _ => {}
                }
            }
        }
        let oracle = sum / members.pair_count() as f64;
        worst = worst.max((r.qcm - oracle).abs());
    }
    ok &= worst <= 1e-12 && defined > 0;
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    verdict(
        "AC9 Waxman regional map",
        ok,
        format!(
            "ρ = {:.4e} (1.5915e-4), above critical {}; {} regions ({defined} defined), max |QCM - hop oracle| {worst:.2e} (<= 1e-12); {} links; runtime {elapsed:.2?} (< 1 min)",
            density.rho,
            density.above_critical,
            reports.len(),
            topo.link_count()
        ),
    );
}

#[test]
fn ac10_metric_invariants() {
    let _g = lock();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failures = Vec::new();
    let cases = 2000;
    for case in 0..cases {
        let m = rng.gen_range(2..9u32);
        let set = NodeSet::new((0..m).collect()).unwrap();
        let mut s: Vec<f64> = (0..m * (m - 1) / 2)
            .map(|_| match rng.gen_range(0..10) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.gen(),
            })
            .collect();
        let e: f64 = rng.gen();
        // put one strength exactly on the threshold
        let on = rng.gen_range(0..s.len());
        s[on] = e;
        let build = |s: &[f64]| {
            let mut it = s.iter();
            let triples: Vec<_> = (0..m)
                .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
                .map(|(a, b)| (a, b, *it.next().unwrap()))
                .collect();
            StrengthTable::from_strengths(set.clone(), triples).unwrap()
        };
        let t = build(&s);
        let r = connectivity_report(&t, &eps(e)).unwrap();
        if !(0.0 <= r.qcm && r.qcm <= r.qcf && r.qcf <= 1.0) {
            failures.push(format!("case {case}: bounds {r:?}"));
        }
        let scaled = r.qcf * r.pair_count as f64;
        if (scaled - scaled.round()).abs() > 1e-9 {
            failures.push(format!("case {case}: QCF·N_P = {scaled}"));
        }
        let e2 = (e + rng.gen::<f64>() * (1.0 - e)).min(1.0);
        let r2 = connectivity_report(&t, &eps(e2)).unwrap();
        if r2.qcm > r.qcm || r2.qcf > r.qcf {
            failures.push(format!("case {case}: not monotone in ε"));
        }
        let mut raised = s.clone();
        let k = rng.gen_range(0..raised.len());
        raised[k] = (raised[k] + rng.gen::<f64>()).min(1.0);
        let r3 = connectivity_report(&build(&raised), &eps(e)).unwrap();
        if r3.qcm < r.qcm || r3.qcf < r.qcf {
            failures.push(format!("case {case}: raising a strength lowered a metric"));
        }
        let mut dropped = s.clone();
        dropped[on] = 0.0;
        if connectivity_report(&build(&dropped), &eps(e)).unwrap() != r {
            failures.push(format!("case {case}: S = ε contributed"));
        }
    }
    verdict(
        "AC10 metric invariants",
        failures.is_empty(),
        format!(
            "{cases} random tables, {} violations {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    );
}
