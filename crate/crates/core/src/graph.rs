//! Directed planar graphs whose edges run down or right.

use std::collections::HashSet;

use crate::geometry::{Edge, Point};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalGraph<S = f64> {
    pub nodes: Vec<Point<S>>,
    pub edges: Vec<(usize, usize)>,
    pub source: usize,
    pub sink: usize,
}

/// One broken structural rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateNode(usize, usize),
    NodeOutsideSquare(usize),
    EdgeIndexOutOfRange(usize),
    SourceNotOnNorthSide,
    SinkNotOnEastSide,
    SourceHasIncoming,
    SinkHasOutgoing,
    /// A node other than the source with no incoming edge.
    ExtraSource(usize),
    /// A node other than the sink with no outgoing edge.
    ExtraSink(usize),
    NotAxisAligned(usize),
    Crossing(usize, usize),
    Cycle,
}

impl<S: Scalar> OrthogonalGraph<S> {
    pub fn edge(&self, i: usize) -> Edge<S> {
        let (a, b) = self.edges[i];
        Edge::new(self.nodes[a].clone(), self.nodes[b].clone())
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut out = vec![0; self.nodes.len()];
        for &(a, _) in &self.edges {
            out[a] += 1;
        }
        out
    }

    /// Returns every broken rule; an empty list means the graph is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut found = Vec::new();
        let n = self.nodes.len();

        for i in 0..n {
            if !self.nodes[i].is_in_square() {
                found.push(Violation::NodeOutsideSquare(i));
            }
            for j in i + 1..n {
                if self.nodes[i] == self.nodes[j] {
                    found.push(Violation::DuplicateNode(i, j));
                }
            }
        }

        let mut bad_index = false;
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            if a >= n || b >= n {
                found.push(Violation::EdgeIndexOutOfRange(k));
                bad_index = true;
            }
        }
        if bad_index || self.source >= n || self.sink >= n {
            return found;
        }

        if self.nodes[self.source].y != S::one() {
            found.push(Violation::SourceNotOnNorthSide);
        }
        if self.nodes[self.sink].x != S::one() {
            found.push(Violation::SinkNotOnEastSide);
        }

        let mut indeg = vec![0usize; n];
        let mut outdeg = vec![0usize; n];
        for &(a, b) in &self.edges {
            outdeg[a] += 1;
            indeg[b] += 1;
        }
        if indeg[self.source] > 0 {
            found.push(Violation::SourceHasIncoming);
        }
        if outdeg[self.sink] > 0 {
            found.push(Violation::SinkHasOutgoing);
        }
        for i in 0..n {
            if i != self.source && indeg[i] == 0 {
                found.push(Violation::ExtraSource(i));
            }
            if i != self.sink && outdeg[i] == 0 {
                found.push(Violation::ExtraSink(i));
            }
        }

        let mut aligned = vec![true; self.edges.len()];
        for k in 0..self.edges.len() {
            if self.edge(k).orientation().is_err() {
                found.push(Violation::NotAxisAligned(k));
                aligned[k] = false;
            }
        }
        for i in 0..self.edges.len() {
            for j in i + 1..self.edges.len() {
                if !(aligned[i] && aligned[j]) {
                    continue;
                }
                if self.edges_cross(i, j) {
                    found.push(Violation::Crossing(i, j));
                }
            }
        }

        if self.topological_order().is_none() {
            found.push(Violation::Cycle);
        }
        found
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Two segments may only meet at a shared endpoint.
    fn edges_cross(&self, i: usize, j: usize) -> bool {
        let (a, b) = (self.edge(i), self.edge(j));
        if !a.segment_intersects(&b) {
            return false;
        }
        let ends_a = [&a.from, &a.to];
        let shared: Vec<&Point<S>> = [&b.from, &b.to]
            .into_iter()
            .filter(|p| ends_a.contains(p))
            .collect();
        match shared.len() {
            0 => true,
            // Sharing one endpoint is fine unless the segments also overlap elsewhere.
            1 => {
                let (oa, ob) = (a.orientation().ok(), b.orientation().ok());
                oa == ob && {
                    let other_a = if a.from == *shared[0] { &a.to } else { &a.from };
                    let other_b = if b.from == *shared[0] { &b.to } else { &b.from };
                    // Collinear edges sharing an endpoint overlap when both leave it the same way.
                    (other_a.x.clone() - shared[0].x.clone()) * (other_b.x.clone() - shared[0].x.clone())
                        + (other_a.y.clone() - shared[0].y.clone())
                            * (other_b.y.clone() - shared[0].y.clone())
                        > S::zero()
                }
            }
            _ => true,
        }
    }

    /// Kahn's algorithm; `None` when the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            indeg[b] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = stack.pop() {
            order.push(u);
            for &v in &adj[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    stack.push(v);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Builds the graph on `xs x ys` linking each node to its right and lower neighbour.
    /// Both coordinate lists must be strictly increasing and span `[0, 1]`.
    pub fn lattice(xs: &[S], ys: &[S]) -> Self {
        let (nx, ny) = (xs.len(), ys.len());
        let id = |i: usize, j: usize| i * ny + j;
        let mut nodes = Vec::with_capacity(nx * ny);
        for x in xs {
            for y in ys {
                nodes.push(Point::new(x.clone(), y.clone()));
            }
        }
        let mut edges = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                if i + 1 < nx {
                    edges.push((id(i, j), id(i + 1, j)));
                }
                if j > 0 {
                    edges.push((id(i, j), id(i, j - 1)));
                }
            }
        }
        OrthogonalGraph {
            nodes,
            edges,
            source: id(0, ny - 1),
            sink: id(nx - 1, 0),
        }
    }

    /// Builds a graph from axis-parallel segments and extra nodes, splitting
    /// each segment at every node lying on it.
    pub fn from_segments(
        segments: &[Edge<S>],
        extra_nodes: &[Point<S>],
        source: &Point<S>,
        sink: &Point<S>,
    ) -> Self {
        let mut nodes: Vec<Point<S>> = extra_nodes.to_vec();
        for s in segments {
            for p in [&s.from, &s.to] {
                if !nodes.contains(p) {
                    nodes.push(p.clone());
                }
            }
        }
        nodes.sort_by(|a, b| a.x.total_cmp(&b.x).then(b.y.total_cmp(&a.y)));
        let index = |p: &Point<S>| nodes.iter().position(|q| q == p).expect("node present");

        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for s in segments {
            let vertical = s.from.x == s.to.x;
            let mut on: Vec<usize> = (0..nodes.len())
                .filter(|&k| {
                    let q = &nodes[k];
                    if vertical {
                        q.x == s.from.x && q.y <= s.from.y && q.y >= s.to.y
                    } else {
                        q.y == s.from.y && q.x >= s.from.x && q.x <= s.to.x
                    }
                })
                .collect();
            if vertical {
                on.sort_by(|&a, &b| nodes[b].y.total_cmp(&nodes[a].y));
            } else {
                on.sort_by(|&a, &b| nodes[a].x.total_cmp(&nodes[b].x));
            }
            for w in on.windows(2) {
                edges.insert((w[0], w[1]));
            }
        }
        let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
        edges.sort_unstable();
        let (source, sink) = (index(source), index(sink));
        OrthogonalGraph { nodes, edges, source, sink }
    }

    pub fn find(&self, p: &Point<S>) -> Option<usize> {
        self.nodes.iter().position(|q| q == p)
    }

    pub fn has_edge(&self, a: &Point<S>, b: &Point<S>) -> bool {
        match (self.find(a), self.find(b)) {
            (Some(i), Some(j)) => self.edges.contains(&(i, j)),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_grid() -> OrthogonalGraph {
        let c = [0.0, 0.5, 1.0];
        OrthogonalGraph::lattice(&c, &c)
    }

    #[test]
    fn lattice_is_valid() {
        let g = half_grid();
        assert_eq!(g.nodes.len(), 9);
        assert_eq!(g.edges.len(), 12);
        assert!(g.validate().is_empty());
    }

    #[test]
    fn unreachable_north_node_is_flagged() {
        let mut g = half_grid();
        let top_mid = g.find(&Point::xy(0.5, 1.0)).unwrap();
        g.edges.retain(|&(_, b)| b != top_mid);
        let v = g.validate();
        assert!(v.contains(&Violation::ExtraSource(top_mid)), "{v:?}");
    }

    #[test]
    fn diagonal_edge_is_flagged() {
        let g = OrthogonalGraph {
            nodes: vec![Point::xy(0.0, 1.0), Point::xy(1.0, 0.0)],
            edges: vec![(0, 1)],
            source: 0,
            sink: 1,
        };
        assert_eq!(g.validate(), vec![Violation::NotAxisAligned(0)]);
    }

    #[test]
    fn crossing_and_overlap_are_flagged() {
        let nodes = vec![
            Point::xy(0.0, 1.0),
            Point::xy(0.5, 1.0),
            Point::xy(0.5, 0.0),
            Point::xy(0.0, 0.5),
            Point::xy(1.0, 0.5),
            Point::xy(1.0, 0.0),
        ];
        let g = OrthogonalGraph {
            nodes,
            edges: vec![(0, 1), (1, 2), (0, 3), (3, 4), (2, 5), (4, 5)],
            source: 0,
            sink: 5,
        };
        assert!(g.validate().contains(&Violation::Crossing(1, 3)));

        let overlap = OrthogonalGraph {
            nodes: vec![Point::xy(0.0, 1.0), Point::xy(0.5, 1.0), Point::xy(1.0, 1.0)],
            edges: vec![(0, 1), (0, 2), (1, 2)],
            source: 0,
            sink: 2,
        };
        assert!(!overlap.validate().is_empty());
    }

    #[test]
    fn segments_are_split_at_nodes() {
        let segs = vec![
            Edge::new(Point::xy(0.0, 1.0), Point::xy(1.0, 1.0)),
            Edge::new(Point::xy(0.5, 1.0), Point::xy(0.5, 0.0)),
            Edge::new(Point::xy(1.0, 1.0), Point::xy(1.0, 0.0)),
            Edge::new(Point::xy(0.5, 0.0), Point::xy(1.0, 0.0)),
        ];
        let g = OrthogonalGraph::from_segments(&segs, &[], &Point::xy(0.0, 1.0), &Point::xy(1.0, 0.0));
        assert_eq!(g.nodes.len(), 5);
        assert_eq!(g.edges.len(), 5);
        assert!(g.is_valid(), "{:?}", g.validate());
    }
}
