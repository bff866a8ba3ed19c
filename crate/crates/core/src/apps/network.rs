use std::collections::{BTreeSet, HashMap, VecDeque};

use log::warn;
use rand::Rng;

use super::rng::{stream, STREAM_NETWORK};
use crate::error::{IpldError, Result};

/// Undirected simple graph with edges stored as `(u, v)`, `u < v`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    index: HashMap<(usize, usize), usize>,
}

impl Network {
    /// Builds a graph; duplicate edges collapse and self-loops are dropped.
    pub fn new(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n_nodes || v >= n_nodes {
                return Err(IpldError::InvalidArgument(format!("edge ({u}, {v}) outside {n_nodes} nodes")));
            }
            if u == v {
                warn!("dropping self-loop at node {u}");
                continue;
            }
            set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n_nodes];
        let mut index = HashMap::with_capacity(edges.len());
        for (e, &(u, v)) in edges.iter().enumerate() {
            adjacency[u].push(v);
            adjacency[v].push(u);
            index.insert((u, v), e);
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        Ok(Self { n_nodes, edges, adjacency, index })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.index.get(&(u.min(v), u.max(v))).copied()
    }

    /// Hop distances from `source`; `usize::MAX` marks unreachable nodes.
    pub fn bfs(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_nodes];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n_nodes == 0 || self.bfs(0).iter().all(|&d| d != usize::MAX)
    }

    /// Sub-network induced by the first `size` nodes in BFS order from
    /// `center`, relabeled `0..size` in that order.
    pub fn bfs_ball(&self, center: usize, size: usize) -> Result<Network> {
        if center >= self.n_nodes {
            return Err(IpldError::InvalidArgument(format!("center {center} outside {} nodes", self.n_nodes)));
        }
        let mut order = vec![center];
        let mut seen = vec![false; self.n_nodes];
        seen[center] = true;
        let mut head = 0;
        while head < order.len() && order.len() < size {
            let u = order[head];
            head += 1;
            for &v in &self.adjacency[u] {
                if !seen[v] && order.len() < size {
                    seen[v] = true;
                    order.push(v);
                }
            }
        }
        let mut label = vec![usize::MAX; self.n_nodes];
        for (new, &old) in order.iter().enumerate() {
            label[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| label[u] != usize::MAX && label[v] != usize::MAX)
            .map(|&(u, v)| (label[u], label[v]));
        Network::new(order.len(), edges)
    }

    /// Connected random graph: a random recursive tree plus `extra` random edges.
    pub fn synthetic(n_nodes: usize, extra: usize, seed: u64) -> Result<Network> {
        if n_nodes < 2 {
            return Err(IpldError::InvalidArgument("synthetic network needs at least 2 nodes".into()));
        }
        let mut rng = stream(seed, STREAM_NETWORK);
        let mut edges = Vec::with_capacity(n_nodes - 1 + extra);
        for v in 1..n_nodes {
            edges.push((rng.random_range(0..v), v));
        }
        for _ in 0..extra {
            let u = rng.random_range(0..n_nodes);
            let v = rng.random_range(0..n_nodes);
            edges.push((u, v));
        }
        Network::new(n_nodes, edges)
    }
}

/// Fixed single-path routing: edge index lists per ordered node pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Routing {
    paths: HashMap<(usize, usize), Vec<usize>>,
}

impl Routing {
    pub fn path(&self, i: usize, j: usize) -> Option<&[usize]> {
        self.paths.get(&(i, j)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Unweighted shortest paths; among equally short paths the predecessor with
/// the smallest index is taken at every hop, walking back from the target.
pub fn shortest_paths(network: &Network, pairs: &[(usize, usize)]) -> Result<Routing> {
    let mut by_source: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(i, j) in pairs {
        if i >= network.n_nodes() || j >= network.n_nodes() {
            return Err(IpldError::InvalidArgument(format!("pair ({i}, {j}) outside the network")));
        }
        by_source.entry(i).or_default().push(j);
    }
    let mut paths = HashMap::with_capacity(pairs.len());
    for (i, targets) in by_source {
        let dist = network.bfs(i);
        for j in targets {
            if dist[j] == usize::MAX {
                return Err(IpldError::Unreachable(i, j));
            }
            let mut path = Vec::with_capacity(dist[j]);
            let mut v = j;
            while v != i {
                let u = *network
                    .neighbors(v)
                    .iter()
                    .find(|&&u| dist[u] != usize::MAX && dist[u] + 1 == dist[v])
                    .expect("BFS predecessor exists");
                path.push(network.edge_index(u, v).expect("neighbor edge exists"));
                v = u;
            }
            path.reverse();
            paths.insert((i, j), path);
        }
    }
    Ok(Routing { paths })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_uses_direct_edge() {
        let n = Network::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let r = shortest_paths(&n, &[(0, 2), (1, 1)]).unwrap();
        assert_eq!(r.path(0, 2).unwrap(), &[n.edge_index(0, 2).unwrap()]);
        assert!(r.path(1, 1).unwrap().is_empty());
    }

    #[test]
    fn four_cycle_tie_breaks_on_smallest_predecessor() {
        // nodes 0-1-2-3-0; from 0 to 2 both 1 and 3 are predecessors
        let n = Network::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let r = shortest_paths(&n, &[(0, 2)]).unwrap();
        let p = r.path(0, 2).unwrap();
        assert_eq!(p, &[n.edge_index(0, 1).unwrap(), n.edge_index(1, 2).unwrap()]);
    }

    #[test]
    fn unreachable_pair() {
        let n = Network::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(shortest_paths(&n, &[(0, 3)]), Err(IpldError::Unreachable(0, 3))));
    }

    #[test]
    fn dedup_and_self_loops() {
        let n = Network::new(3, [(0, 1), (1, 0), (2, 2), (1, 2)]).unwrap();
        assert_eq!(n.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn synthetic_is_connected_and_deterministic() {
        let a = Network::synthetic(30, 15, 3).unwrap();
        assert!(a.is_connected());
        assert_eq!(a, Network::synthetic(30, 15, 3).unwrap());
    }

    #[test]
    fn ball_is_connected() {
        let g = Network::synthetic(60, 40, 1).unwrap();
        let b = g.bfs_ball(5, 20).unwrap();
        assert_eq!(b.n_nodes(), 20);
        assert!(b.is_connected());
    }
}
