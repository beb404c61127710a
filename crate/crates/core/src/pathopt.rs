//! Strongest-connection paths under entanglement swapping.
//!
//! Swapping pure states along a path multiplies the link concurrences, so the
//! strongest connection between two nodes is the shortest path under edge
//! weights `-ln c`. Costs are accumulated in the log domain and exponentiated
//! once when a strength is read out.
//!
//! Ties between equal-cost paths go to the path with fewer hops, then to the
//! lexicographically smallest node sequence read from the lower-id endpoint.
//! Every pair is always resolved by a sweep rooted at its lower-id endpoint,
//! which makes strengths exactly symmetric and makes table entries identical
//! to [`optimal_path`] results.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};
use std::io::Write;
use std::sync::Arc as Shared;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Network, NodeId, NodeSet};

const NONE: u32 = u32::MAX;

/// Sum tolerance for a PMF plus its disconnected fraction.
pub const PMF_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub source: NodeId,
    pub target: NodeId,
    /// Node sequence from `source` to `target`; empty when disconnected.
    pub path: Vec<NodeId>,
    pub strength: f64,
    /// `ln(strength)`, `-inf` when disconnected.
    pub log_strength: f64,
    pub hops: u32,
}

impl PathResult {
    pub fn is_connected(&self) -> bool {
        !self.path.is_empty()
    }
}

/// Strength of one pair in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStrength {
    /// `-ln S`; infinite when the pair is disconnected.
    pub cost: f64,
    pub hops: u32,
}

impl PairStrength {
    pub const DISCONNECTED: PairStrength = PairStrength {
        cost: f64::INFINITY,
        hops: 0,
    };

    pub fn strength(&self) -> f64 {
        (-self.cost).exp()
    }

    pub fn log_strength(&self) -> f64 {
        -self.cost
    }

    pub fn is_connected(&self) -> bool {
        self.cost.is_finite()
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    cost: f64,
    hops: u32,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (cost, hops, node)
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.hops.cmp(&self.hops))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable single-source Dijkstra state over dense node indices.
pub(crate) struct Sweep {
    cost: Vec<f64>,
    hops: Vec<u32>,
    pred: Vec<u32>,
    settled: Vec<bool>,
    heap: BinaryHeap<HeapEntry>,
}

impl Sweep {
    pub(crate) fn new(n: usize) -> Self {
        Sweep {
            cost: vec![f64::INFINITY; n],
            hops: vec![0; n],
            pred: vec![NONE; n],
            settled: vec![false; n],
            heap: BinaryHeap::new(),
        }
    }

    /// Runs from `source`. When `targets` is given, stops once `remaining` of
    /// the flagged nodes have been settled.
    pub(crate) fn run(&mut self, net: &Network, source: usize, targets: Option<(&[bool], usize)>) {
        self.cost.fill(f64::INFINITY);
        self.hops.fill(0);
        self.pred.fill(NONE);
        self.settled.fill(false);
        self.heap.clear();

        let (mask, mut remaining) = match targets {
            Some((mask, count)) => (Some(mask), count),
            None => (None, usize::MAX),
        };
        if remaining == 0 {
            return;
        }

        self.cost[source] = 0.0;
        self.heap.push(HeapEntry {
            cost: 0.0,
            hops: 0,
            node: source as u32,
        });

        while let Some(HeapEntry { cost, hops, node }) = self.heap.pop() {
            let u = node as usize;
            if self.settled[u] || cost > self.cost[u] || hops > self.hops[u] {
                continue;
            }
            self.settled[u] = true;
            if let Some(mask) = mask {
                if mask[u] {
                    remaining -= 1;
                    if remaining == 0 {
                        return;
                    }
                }
            }
            for arc in net.arcs_of(u) {
                if !arc.cost.is_finite() {
                    continue;
                }
                let v = arc.target as usize;
                if self.settled[v] {
                    continue;
                }
                let nc = cost + arc.cost;
                let nh = hops + 1;
                match nc.total_cmp(&self.cost[v]).then_with(|| nh.cmp(&self.hops[v])) {
                    Ordering::Less => {
                        self.cost[v] = nc;
                        self.hops[v] = nh;
                        self.pred[v] = node;
                        self.heap.push(HeapEntry {
                            cost: nc,
                            hops: nh,
                            node: v as u32,
                        });
                    }
                    Ordering::Equal if self.pred[v] != node && prefix_precedes(&self.pred, node, self.pred[v]) => {
                        self.pred[v] = node;
                    }
                    _ => {}
                }
            }
        }
    }

    fn strength_to(&self, target: usize) -> PairStrength {
        if self.cost[target].is_finite() {
            PairStrength {
                cost: self.cost[target],
                hops: self.hops[target],
            }
        } else {
            PairStrength::DISCONNECTED
        }
    }

    fn path_to(&self, target: usize) -> Vec<usize> {
        if !self.cost[target].is_finite() {
            return Vec::new();
        }
        trace_back(&self.pred, target)
    }
}

/// Whether the tree path ending at `a` is lexicographically smaller than the
/// one ending at `b`. Both must sit at the same depth of the same tree.
fn prefix_precedes(pred: &[u32], mut a: u32, mut b: u32) -> bool {
    loop {
        if a == b {
            return false;
        }
        let (pa, pb) = (pred[a as usize], pred[b as usize]);
        if pa == pb {
            return a < b;
        }
        a = pa;
        b = pb;
    }
}

fn trace_back(pred: &[u32], target: usize) -> Vec<usize> {
    let mut path = vec![target];
    let mut cur = pred[target];
    while cur != NONE {
        path.push(cur as usize);
        cur = pred[cur as usize];
    }
    path.reverse();
    path
}

/// Strongest connection between `i` and `j`.
pub fn optimal_path(net: &Network, i: NodeId, j: NodeId) -> Result<PathResult> {
    let (a, b) = (net.index_of(i)?, net.index_of(j)?);
    if a == b {
        return Err(Error::SameNode(i));
    }
    let (root, other) = (a.min(b), a.max(b));
    let mut mask = vec![false; net.node_count()];
    mask[other] = true;
    let mut sweep = Sweep::new(net.node_count());
    sweep.run(net, root, Some((&mask, 1)));

    let ps = sweep.strength_to(other);
    let mut path: Vec<NodeId> = sweep.path_to(other).into_iter().map(|k| net.id_at(k)).collect();
    if a > b {
        path.reverse();
    }
    Ok(PathResult {
        source: i,
        target: j,
        path,
        strength: ps.strength(),
        log_strength: ps.log_strength(),
        hops: ps.hops,
    })
}

/// Shortest-path trees kept for path reconstruction, keyed by root id.
#[derive(Debug)]
struct PathStore {
    ids: Vec<NodeId>,
    trees: HashMap<NodeId, Vec<u32>>,
}

impl PathStore {
    fn path(&self, root: NodeId, target: NodeId) -> Option<Vec<NodeId>> {
        let tree = self.trees.get(&root)?;
        let t = self.ids.binary_search(&target).ok()?;
        Some(trace_back(tree, t).into_iter().map(|k| self.ids[k]).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableOptions {
    /// Keep one shortest-path tree per subset member so paths can be listed.
    /// Costs `4 * |V|` bytes per member.
    pub retain_paths: bool,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions { retain_paths: true }
    }
}

/// Connection strengths for every unordered pair of a node subset.
///
/// Entries are stored in a condensed upper-triangular layout over the members
/// sorted by id, so the row of member `r` holds its pairs with every member of
/// higher id, in id order.
#[derive(Debug, Clone)]
pub struct StrengthTable {
    subset: NodeSet,
    ids: Vec<NodeId>,
    entries: Vec<PairStrength>,
    paths: Option<Shared<PathStore>>,
}

fn condensed_index(m: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < m);
    a * m - a * (a + 1) / 2 + (b - a - 1)
}

fn sorted_ids(subset: &NodeSet) -> Vec<NodeId> {
    let mut ids = subset.members().to_vec();
    ids.sort_unstable();
    ids
}

impl StrengthTable {
    /// Builds a table from explicit pair strengths; hop counts are left at 0
    /// and no paths are available. Every unordered pair must appear once.
    pub fn from_strengths(subset: NodeSet, strengths: impl IntoIterator<Item = (NodeId, NodeId, f64)>) -> Result<Self> {
        let ids = sorted_ids(&subset);
        let m = ids.len();
        let rank = |id: NodeId| ids.binary_search(&id).map_err(|_| Error::UnknownNode(id));
        let mut entries: Vec<Option<PairStrength>> = vec![None; m * m.saturating_sub(1) / 2];
        for (i, j, s) in strengths {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidParameter(format!(
                    "strength {s} for pair ({i}, {j}) outside [0, 1]"
                )));
            }
            let (ra, rb) = (rank(i)?, rank(j)?);
            if ra == rb {
                return Err(Error::SameNode(i));
            }
            let slot = &mut entries[condensed_index(m, ra.min(rb), ra.max(rb))];
            if slot.is_some() {
                return Err(Error::InvalidParameter(format!("pair ({i}, {j}) given twice")));
            }
            *slot = Some(if s > 0.0 {
                PairStrength { cost: -s.ln(), hops: 0 }
            } else {
                PairStrength::DISCONNECTED
            });
        }
        let entries = entries
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidParameter("strength table is missing pairs".into()))?;
        Ok(StrengthTable {
            subset,
            ids,
            entries,
            paths: None,
        })
    }

    pub fn subset(&self) -> &NodeSet {
        &self.subset
    }

    pub fn pair_count(&self) -> usize {
        self.entries.len()
    }

    pub fn has_paths(&self) -> bool {
        self.paths.is_some()
    }

    fn rank(&self, id: NodeId) -> Result<usize> {
        self.ids.binary_search(&id).map_err(|_| Error::UnknownNode(id))
    }

    fn slot(&self, i: NodeId, j: NodeId) -> Result<usize> {
        let (ra, rb) = (self.rank(i)?, self.rank(j)?);
        if ra == rb {
            return Err(Error::SameNode(i));
        }
        Ok(condensed_index(self.ids.len(), ra.min(rb), ra.max(rb)))
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> Result<PairStrength> {
        Ok(self.entries[self.slot(i, j)?])
    }

    pub fn strength(&self, i: NodeId, j: NodeId) -> Result<f64> {
        self.get(i, j).map(|p| p.strength())
    }

    /// Full result for one pair, oriented from `i` to `j`.
    pub fn path_result(&self, i: NodeId, j: NodeId) -> Result<PathResult> {
        let ps = self.get(i, j)?;
        let store = self.paths.as_ref().ok_or(Error::PathsNotRetained)?;
        let mut path = if ps.is_connected() {
            store.path(i.min(j), i.max(j)).ok_or(Error::PathsNotRetained)?
        } else {
            Vec::new()
        };
        if i > j {
            path.reverse();
        }
        Ok(PathResult {
            source: i,
            target: j,
            path,
            strength: ps.strength(),
            log_strength: ps.log_strength(),
            hops: ps.hops,
        })
    }

    /// Every pair as `(i, j, strength)` with `i < j`, ordered by `(i, j)`.
    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId, PairStrength)> + '_ {
        let ids = &self.ids;
        (0..ids.len())
            .flat_map(move |a| (a + 1..ids.len()).map(move |b| (a, b)))
            .zip(self.entries.iter())
            .map(move |((a, b), &ps)| (ids[a], ids[b], ps))
    }

    /// Condensed entries, in the order of [`StrengthTable::pairs`].
    pub fn entries(&self) -> &[PairStrength] {
        &self.entries
    }

    /// Table over a subset of this table's members, reusing computed entries.
    pub fn restrict(&self, members: &NodeSet) -> Result<StrengthTable> {
        let ids = sorted_ids(members);
        let ranks: Vec<usize> = ids.iter().map(|&id| self.rank(id)).collect::<Result<_>>()?;
        let m = self.ids.len();
        let mut entries = Vec::with_capacity(ids.len() * ids.len().saturating_sub(1) / 2);
        for (a, &ra) in ranks.iter().enumerate() {
            for &rb in &ranks[a + 1..] {
                entries.push(self.entries[condensed_index(m, ra, rb)]);
            }
        }
        Ok(StrengthTable {
            subset: members.clone(),
            ids,
            entries,
            paths: self.paths.clone(),
        })
    }

    /// Writes `i,j,strength,hops,path` rows; `path` is semicolon-joined and
    /// left empty when paths were not retained or the pair is disconnected.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "strength", "hops", "path"])?;
        for (i, j, ps) in self.pairs() {
            let path = if self.paths.is_some() && ps.is_connected() {
                self.path_result(i, j)?
                    .path
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(";")
            } else {
                String::new()
            };
            w.write_record([
                i.to_string(),
                j.to_string(),
                ps.strength().to_string(),
                ps.hops.to_string(),
                path,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// All-pairs strengths over `subset`, with paths retained.
pub fn all_pairs_strengths(net: &Network, subset: &NodeSet) -> Result<StrengthTable> {
    all_pairs_strengths_with(net, subset, TableOptions::default())
}

/// All-pairs strengths over `subset`. One Dijkstra sweep runs per member over
/// the whole network, so optimal paths may pass through non-members. Sweeps
/// fan out across the rayon pool, each writing its own row of the table.
pub fn all_pairs_strengths_with(net: &Network, subset: &NodeSet, opts: TableOptions) -> Result<StrengthTable> {
    if subset.len() < 2 {
        return Err(Error::SubsetTooSmall(subset.len()));
    }
    let n = net.node_count();
    let ids = sorted_ids(subset);
    // id order is index order
    let index: Vec<usize> = ids.iter().map(|&id| net.index_of(id)).collect::<Result<_>>()?;
    let m = ids.len();

    let mut entries = vec![PairStrength::DISCONNECTED; m * (m - 1) / 2];
    let mut rows: Vec<&mut [PairStrength]> = Vec::with_capacity(m);
    let mut rest = entries.as_mut_slice();
    for r in 0..m {
        let (row, tail) = rest.split_at_mut(m - r - 1);
        rows.push(row);
        rest = tail;
    }

    let trees: Vec<Option<Vec<u32>>> = rows
        .into_par_iter()
        .enumerate()
        .map_init(
            || (Sweep::new(n), vec![false; n]),
            |(sweep, targets), (rank, row)| {
                let later = &index[rank + 1..];
                if later.is_empty() {
                    return None;
                }
                for &t in later {
                    targets[t] = true;
                }
                sweep.run(net, index[rank], Some((targets, later.len())));
                for &t in later {
                    targets[t] = false;
                }
                for (slot, &t) in row.iter_mut().zip(later) {
                    *slot = sweep.strength_to(t);
                }
                opts.retain_paths.then(|| sweep.pred.clone())
            },
        )
        .collect();

    let paths = opts.retain_paths.then(|| {
        Shared::new(PathStore {
            ids: net.node_ids().collect(),
            trees: ids
                .iter()
                .zip(trees)
                .filter_map(|(&id, tree)| tree.map(|t| (id, t)))
                .collect(),
        })
    });
    Ok(StrengthTable {
        subset: subset.clone(),
        ids,
        entries,
        paths,
    })
}

/// Distribution of fewest-hop distances over all unordered node pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLengthPmf {
    q: BTreeMap<u32, f64>,
    disconnected_fraction: f64,
    counts: Option<(BTreeMap<u32, u64>, u64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PmfFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pairs: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<BTreeMap<u32, u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    disconnected_pairs: Option<u64>,
    #[serde(default)]
    q: BTreeMap<u32, f64>,
    #[serde(default)]
    disconnected_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ell_max: Option<u32>,
}

impl PathLengthPmf {
    /// Validates explicit masses: `ℓ ≥ 1`, all masses finite and
    /// non-negative, total with the disconnected fraction equal to 1.
    pub fn new(q: BTreeMap<u32, f64>, disconnected_fraction: f64) -> Result<Self> {
        if q.contains_key(&0) {
            return Err(Error::InvalidPmf("hop distance 0 is not a pair distance".into()));
        }
        let bad = |x: f64| !x.is_finite() || x < 0.0;
        if let Some((l, m)) = q.iter().find(|(_, &m)| bad(m)) {
            return Err(Error::InvalidPmf(format!("mass {m} at distance {l}")));
        }
        if bad(disconnected_fraction) {
            return Err(Error::InvalidPmf(format!(
                "disconnected fraction {disconnected_fraction}"
            )));
        }
        let total: f64 = q.values().sum::<f64>() + disconnected_fraction;
        if (total - 1.0).abs() > PMF_SUM_TOLERANCE {
            return Err(Error::InvalidPmf(format!("masses sum to {total}, not 1")));
        }
        let q = q.into_iter().filter(|&(_, m)| m > 0.0).collect();
        Ok(PathLengthPmf {
            q,
            disconnected_fraction,
            counts: None,
        })
    }

    /// Exact PMF from pair counts per hop distance.
    pub fn from_counts(counts: BTreeMap<u32, u64>, disconnected: u64) -> Result<Self> {
        if counts.contains_key(&0) {
            return Err(Error::InvalidPmf("hop distance 0 is not a pair distance".into()));
        }
        let counts: BTreeMap<u32, u64> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        let pairs = counts.values().sum::<u64>() + disconnected;
        if pairs == 0 {
            return Err(Error::InvalidPmf("no pairs".into()));
        }
        let total = pairs as f64;
        Ok(PathLengthPmf {
            q: counts.iter().map(|(&l, &c)| (l, c as f64 / total)).collect(),
            disconnected_fraction: disconnected as f64 / total,
            counts: Some((counts, disconnected)),
        })
    }

    /// `q(ℓ)`; zero outside the support.
    pub fn mass(&self, hops: u32) -> f64 {
        self.q.get(&hops).copied().unwrap_or(0.0)
    }

    pub fn masses(&self) -> &BTreeMap<u32, f64> {
        &self.q
    }

    /// Largest distance with positive mass; 0 when every pair is disconnected.
    pub fn ell_max(&self) -> u32 {
        self.q.keys().next_back().copied().unwrap_or(0)
    }

    pub fn disconnected_fraction(&self) -> f64 {
        self.disconnected_fraction
    }

    /// Raw pair counts, when the PMF was measured rather than supplied.
    pub fn counts(&self) -> Option<&BTreeMap<u32, u64>> {
        self.counts.as_ref().map(|(c, _)| c)
    }

    pub fn pair_count(&self) -> Option<u64> {
        self.counts.as_ref().map(|(c, d)| c.values().sum::<u64>() + d)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = PmfFile {
            pairs: self.pair_count(),
            counts: self.counts.as_ref().map(|(c, _)| c.clone()),
            disconnected_pairs: self.counts.as_ref().map(|&(_, d)| d),
            q: self.q.clone(),
            disconnected_fraction: self.disconnected_fraction,
            ell_max: Some(self.ell_max()),
        };
        serde_json::to_value(file).expect("pmf serializes")
    }

    /// Reads the JSON emitted by [`PathLengthPmf::to_json`]. Integer counts
    /// take precedence over the `q` masses when both are present.
    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        let file: PmfFile = serde_json::from_value(value)?;
        match file.counts {
            Some(counts) => Self::from_counts(counts, file.disconnected_pairs.unwrap_or(0)),
            None => Self::new(file.q, file.disconnected_fraction),
        }
    }
}

/// Breadth-first hop distances over all unordered pairs, counting only
/// traversable (nonzero-concurrence) links.
pub fn hop_distance_pmf(net: &Network) -> Result<PathLengthPmf> {
    let n = net.node_count();
    if n < 2 {
        return Err(Error::SubsetTooSmall(n));
    }
    let histogram = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![u32::MAX; n], VecDeque::new()),
            |(dist, queue), s| {
                let mut local: Vec<u64> = Vec::new();
                dist.fill(u32::MAX);
                dist[s] = 0;
                queue.clear();
                queue.push_back(s);
                while let Some(u) = queue.pop_front() {
                    let d = dist[u];
                    if u > s {
                        if local.len() <= d as usize {
                            local.resize(d as usize + 1, 0);
                        }
                        local[d as usize] += 1;
                    }
                    for arc in net.arcs_of(u) {
                        let v = arc.target as usize;
                        if arc.cost.is_finite() && dist[v] == u32::MAX {
                            dist[v] = d + 1;
                            queue.push_back(v);
                        }
                    }
                }
                local
            },
        )
        .reduce(Vec::new, |mut a, b| {
            if a.len() < b.len() {
                a.resize(b.len(), 0);
            }
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        });

    let pairs = (n as u64) * (n as u64 - 1) / 2;
    let counts: BTreeMap<u32, u64> = histogram
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &c)| c > 0)
        .map(|(l, &c)| (l as u32, c))
        .collect();
    let connected: u64 = counts.values().sum();
    PathLengthPmf::from_counts(counts, pairs - connected)
}
