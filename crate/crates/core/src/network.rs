//! Weighted undirected network model and its JSON file format.
//!
//! A [`Network`] is immutable once built. Nodes are kept sorted by id, so the
//! dense index of a node (its position in [`Network::nodes`]) orders the same
//! way as its id. The path engine relies on this for deterministic
//! tie-breaking.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = u32;

/// Planar position in kilometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub(crate) fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub position: Option<Point>,
}

impl Node {
    pub fn new(id: NodeId) -> Self {
        Node { id, position: None }
    }

    pub fn at(id: NodeId, x: f64, y: f64) -> Self {
        Node {
            id,
            position: Some(Point::new(x, y)),
        }
    }
}

/// Undirected link carrying a pure entangled pair of the given concurrence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub concurrence: f64,
}

impl Edge {
    pub fn new(u: NodeId, v: NodeId, concurrence: f64) -> Self {
        Edge { u, v, concurrence }
    }
}

/// Half-edge in the adjacency structure. `cost` is `-ln(concurrence)`, so a
/// zero-concurrence link has infinite cost and is never traversed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Arc {
    pub target: u32,
    pub cost: f64,
    pub concurrence: f64,
}

#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    arcs: Vec<Arc>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Network {
    /// Validates and builds a network. Nodes are reordered by id; edges keep
    /// their input order and orientation.
    pub fn new(mut nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        if let Some(w) = nodes.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::DuplicateNode(w[0].id));
        }

        let index = |id: NodeId| {
            nodes
                .binary_search_by_key(&id, |n| n.id)
                .map_err(|_| Error::DanglingEndpoint(id))
        };

        let mut seen = HashSet::with_capacity(edges.len());
        let mut degree = vec![0usize; nodes.len()];
        for e in &edges {
            if e.u == e.v {
                return Err(Error::SelfLoop(e.u));
            }
            if !(0.0..=1.0).contains(&e.concurrence) {
                return Err(Error::ConcurrenceOutOfRange {
                    u: e.u,
                    v: e.v,
                    c: e.concurrence,
                });
            }
            let (a, b) = (index(e.u)?, index(e.v)?);
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::DuplicateEdge { u: e.u, v: e.v });
            }
            degree[a] += 1;
            degree[b] += 1;
        }

        let mut offsets = Vec::with_capacity(nodes.len() + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..nodes.len()].to_vec();
        let mut arcs = vec![
            Arc {
                target: 0,
                cost: 0.0,
                concurrence: 1.0,
            };
            offsets[nodes.len()]
        ];
        for e in &edges {
            let (a, b) = (index(e.u)?, index(e.v)?);
            let cost = -e.concurrence.ln();
            arcs[fill[a]] = Arc {
                target: b as u32,
                cost,
                concurrence: e.concurrence,
            };
            fill[a] += 1;
            arcs[fill[b]] = Arc {
                target: a as u32,
                cost,
                concurrence: e.concurrence,
            };
            fill[b] += 1;
        }
        for i in 0..nodes.len() {
            arcs[offsets[i]..offsets[i + 1]].sort_unstable_by_key(|a| a.target);
        }

        Ok(Network {
            nodes,
            edges,
            offsets,
            arcs,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    /// Dense index of `id`.
    pub fn index_of(&self, id: NodeId) -> Result<usize> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .map_err(|_| Error::UnknownNode(id))
    }

    pub fn id_at(&self, index: usize) -> NodeId {
        self.nodes[index].id
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index_of(id).is_ok()
    }

    pub fn position(&self, id: NodeId) -> Result<Option<Point>> {
        Ok(self.nodes[self.index_of(id)?].position)
    }

    pub fn degree(&self, id: NodeId) -> Result<usize> {
        let i = self.index_of(id)?;
        Ok(self.offsets[i + 1] - self.offsets[i])
    }

    pub(crate) fn arcs_of(&self, index: usize) -> &[Arc] {
        &self.arcs[self.offsets[index]..self.offsets[index + 1]]
    }

    /// All nodes sharing an edge with `id`, in increasing id order. Edges of
    /// zero concurrence still count as topological neighbors.
    pub fn neighbor_set(&self, id: NodeId) -> Result<NodeSet> {
        let i = self.index_of(id)?;
        let members = self
            .arcs_of(i)
            .iter()
            .map(|a| self.nodes[a.target as usize].id)
            .collect();
        Ok(NodeSet { members })
    }

    /// Concurrence of the edge between `u` and `v`, if one exists.
    pub fn concurrence(&self, u: NodeId, v: NodeId) -> Result<Option<f64>> {
        let (a, b) = (self.index_of(u)?, self.index_of(v)?);
        Ok(self
            .arcs_of(a)
            .binary_search_by_key(&(b as u32), |arc| arc.target)
            .ok()
            .map(|k| self.arcs_of(a)[k].concurrence))
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet {
            members: self.node_ids().collect(),
        }
    }

    pub fn to_file(&self) -> NetworkFile {
        NetworkFile {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id,
                    x: n.position.map(|p| p.x),
                    y: n.position.map(|p| p.y),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    u: e.u,
                    v: e.v,
                    c: e.concurrence,
                })
                .collect(),
            meta: None,
        }
    }

    pub fn from_file(file: NetworkFile) -> Result<Self> {
        let nodes = file
            .nodes
            .into_iter()
            .map(|r| match (r.x, r.y) {
                (Some(x), Some(y)) => Ok(Node::at(r.id, x, y)),
                (None, None) => Ok(Node::new(r.id)),
                _ => Err(Error::PartialPosition(r.id)),
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = file.edges.into_iter().map(|r| Edge::new(r.u, r.v, r.c)).collect();
        Network::new(nodes, edges)
    }
}

pub fn build_network(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Network> {
    Network::new(nodes, edges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: NodeId,
    pub v: NodeId,
    pub c: f64,
}

/// On-disk JSON layout. `meta` carries provenance (generator config, RNG
/// name) and is ignored when loading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

pub fn save_network(network: &Network, path: impl AsRef<Path>) -> Result<()> {
    write_network_file(&network.to_file(), path)
}

pub fn save_network_with_meta(network: &Network, meta: serde_json::Value, path: impl AsRef<Path>) -> Result<()> {
    let mut file = network.to_file();
    file.meta = Some(meta);
    write_network_file(&file, path)
}

fn write_network_file(file: &NetworkFile, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, file)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network> {
    let r = BufReader::new(File::open(path)?);
    let file: NetworkFile = serde_json::from_reader(r)?;
    Network::from_file(file)
}

/// Ordered set of node ids without duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeSet {
    members: Vec<NodeId>,
}

impl NodeSet {
    pub fn new(members: Vec<NodeId>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(members.len());
        if let Some(&dup) = members.iter().find(|&&m| !seen.insert(m)) {
            return Err(Error::DuplicateMember(dup));
        }
        Ok(NodeSet { members })
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.members.contains(&id)
    }

    /// Number of unordered pairs, `n(n-1)/2`.
    pub fn pair_count(&self) -> u64 {
        let n = self.members.len() as u64;
        n * n.saturating_sub(1) / 2
    }

    /// Checks every member is a node of `network`.
    pub fn check_within(&self, network: &Network) -> Result<()> {
        for &m in &self.members {
            network.index_of(m)?;
        }
        Ok(())
    }
}

impl FromIterator<NodeId> for NodeSet {
    /// Collects ids, dropping repeats.
    fn from_iter<T: IntoIterator<Item = NodeId>>(iter: T) -> Self {
        let mut seen = HashSet::new();
        NodeSet {
            members: iter.into_iter().filter(|m| seen.insert(*m)).collect(),
        }
    }
}
