//! Distance-threshold proximity graphs over station locations and their
//! combinatorial Laplacians.

use std::collections::VecDeque;
use std::io::Write;

use thiserror::Error;

use crate::fmt::g17;
use crate::scene::SiteIndex;

/// Mean Earth radius in statute miles.
pub const EARTH_RADIUS_MI: f64 = 3958.8;

/// Default edge threshold, roughly one degree of latitude.
pub const DEFAULT_THRESHOLD_MI: f64 = 70.0;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("threshold must be a positive number of miles, got {0}")]
    Threshold(f64),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        GeoPoint { lat, lon }
    }
}

/// Great-circle distance in statute miles.
pub fn haversine_mi(a: GeoPoint, b: GeoPoint) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let half_dlat = (lat2 - lat1) / 2.0;
    let half_dlon = (b.lon - a.lon).to_radians() / 2.0;
    let h = half_dlat.sin().powi(2) + lat1.cos() * lat2.cos() * half_dlon.sin().powi(2);
    2.0 * EARTH_RADIUS_MI * h.min(1.0).sqrt().asin()
}

/// Unweighted graph with an edge between every pair of sites closer than
/// `threshold_mi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    threshold_mi: f64,
}

impl ProximityGraph {
    /// Build from an explicit edge list; pairs are normalized to `i < j`,
    /// self-loops and duplicates dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>, threshold_mi: f64) -> Self {
        let mut e: Vec<(usize, usize)> = edges
            .into_iter()
            .filter(|(i, j)| i != j)
            .map(|(i, j)| (i.min(j), i.max(j)))
            .inspect(|&(_, j)| assert!(j < n, "edge endpoint {j} out of range for {n} vertices"))
            .collect();
        e.sort_unstable();
        e.dedup();
        ProximityGraph { n, edges: e, threshold_mi }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn threshold_mi(&self) -> f64 {
        self.threshold_mi
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }
}

pub fn build_graph(sites: &SiteIndex, threshold_mi: f64) -> Result<ProximityGraph, GraphError> {
    build_graph_from_points(&sites.points(), threshold_mi)
}

/// All-pairs construction; an edge exists iff the distance is strictly less
/// than the threshold.
pub fn build_graph_from_points(points: &[GeoPoint], threshold_mi: f64) -> Result<ProximityGraph, GraphError> {
    if !(threshold_mi > 0.0) || !threshold_mi.is_finite() {
        return Err(GraphError::Threshold(threshold_mi));
    }
    let mut edges = Vec::new();
    for (i, a) in points.iter().enumerate() {
        for (j, b) in points.iter().enumerate().skip(i + 1) {
            if haversine_mi(*a, *b) < threshold_mi {
                edges.push((i, j));
            }
        }
    }
    Ok(ProximityGraph { n: points.len(), edges, threshold_mi })
}

/// Dense symmetric Laplacian, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    n: usize,
    data: Vec<f64>,
}

impl LaplacianMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// Connected components of the graph encoded by the off-diagonal pattern.
    pub fn component_count(&self) -> usize {
        let edges =
            (0..self.n).flat_map(|i| ((i + 1)..self.n).filter(move |&j| self.get(i, j) != 0.0).map(move |j| (i, j)));
        connected_components(&ProximityGraph::from_edges(self.n, edges, 0.0)).0
    }
}

/// `-1` on edges, vertex degree on the diagonal.
pub fn laplacian(graph: &ProximityGraph) -> LaplacianMatrix {
    let n = graph.n;
    let mut data = vec![0.0; n * n];
    for &(i, j) in &graph.edges {
        data[i * n + j] = -1.0;
        data[j * n + i] = -1.0;
        data[i * n + i] += 1.0;
        data[j * n + j] += 1.0;
    }
    LaplacianMatrix { n, data }
}

/// Component count and per-vertex labels; labels are numbered in order of each
/// component's lowest vertex.
pub fn connected_components(graph: &ProximityGraph) -> (usize, Vec<usize>) {
    let adj = graph.adjacency();
    let mut labels = vec![usize::MAX; graph.n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..graph.n {
        if labels[start] != usize::MAX {
            continue;
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if labels[w] == usize::MAX {
                    labels[w] = count;
                    queue.push_back(w);
                }
            }
        }
        count += 1;
    }
    (count, labels)
}

/// Debug dump: `i,j,distance_mi` per edge.
pub fn write_edge_csv<W: Write>(graph: &ProximityGraph, points: &[GeoPoint], mut writer: W) -> Result<(), GraphError> {
    writeln!(writer, "i,j,distance_mi")?;
    for &(i, j) in &graph.edges {
        writeln!(writer, "{i},{j},{}", g17(haversine_mi(points[i], points[j])))?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(n: usize) -> ProximityGraph {
        ProximityGraph::from_edges(n, (1..n).map(|i| (i - 1, i)), 1.0)
    }

    #[test]
    fn haversine_reference_distances() {
        let p = GeoPoint::new(40.0, -100.0);
        assert_eq!(haversine_mi(p, p), 0.0);
        let d = haversine_mi(p, GeoPoint::new(41.0, -100.0));
        // One degree of arc: R * pi / 180.
        assert!((d - 69.09).abs() < 0.01, "{d}");
        let anti = haversine_mi(GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 180.0));
        assert!((anti - 12436.8).abs() < 0.5, "{anti}");
    }

    #[test]
    fn threshold_is_strict() {
        let a = GeoPoint::new(40.0, -100.0);
        let b = GeoPoint::new(40.0 + 50.0 / 69.0932, -100.0);
        assert!((haversine_mi(a, b) - 50.0).abs() < 0.01);
        assert_eq!(build_graph_from_points(&[a, b], 70.0).unwrap().edges(), &[(0, 1)]);

        let c = GeoPoint::new(40.0 + 70.0 / 69.0932, -100.0);
        let exact = haversine_mi(a, c);
        assert!((exact - 70.0).abs() < 0.01);
        assert!(build_graph_from_points(&[a, c], exact).unwrap().edges().is_empty());

        assert!(build_graph_from_points(&[a], 70.0).unwrap().edges().is_empty());
    }

    #[test]
    fn bad_threshold() {
        for t in [0.0, -5.0, f64::NAN] {
            assert!(matches!(build_graph_from_points(&[], t), Err(GraphError::Threshold(_))));
        }
    }

    #[test]
    fn laplacian_examples() {
        let l = laplacian(&path(3));
        assert_eq!(l.as_slice(), &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);

        let empty = laplacian(&ProximityGraph::from_edges(2, [], 1.0));
        assert!(empty.as_slice().iter().all(|v| *v == 0.0));

        let tri = laplacian(&ProximityGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)], 1.0));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(tri.get(i, j), if i == j { 2.0 } else { -1.0 });
            }
        }
    }

    #[test]
    fn components() {
        assert_eq!(connected_components(&path(3)).0, 1);
        let (c, labels) = connected_components(&ProximityGraph::from_edges(2, [], 1.0));
        assert_eq!((c, labels), (2, vec![0, 1]));
        let (c, labels) = connected_components(&ProximityGraph::from_edges(0, [], 1.0));
        assert_eq!((c, labels.len()), (0, 0));
        let (c, labels) = connected_components(&ProximityGraph::from_edges(5, [(0, 3), (1, 4)], 1.0));
        assert_eq!(c, 3);
        assert_eq!(labels, vec![0, 1, 2, 0, 1]);
    }

    #[test]
    fn edge_dump() {
        let pts = [GeoPoint::new(40.0, -100.0), GeoPoint::new(40.5, -100.0)];
        let g = build_graph_from_points(&pts, 70.0).unwrap();
        let mut buf = Vec::new();
        write_edge_csv(&g, &pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i,j,distance_mi\n0,1,34.5"));
    }

    fn point() -> impl Strategy<Value = GeoPoint> {
        (-89.0f64..89.0, -179.0f64..179.0).prop_map(|(lat, lon)| GeoPoint::new(lat, lon))
    }

    proptest! {
        #[test]
        fn haversine_is_a_metric(a in point(), b in point(), c in point()) {
            let ab = haversine_mi(a, b);
            prop_assert_eq!(ab, haversine_mi(b, a));
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(haversine_mi(a, a), 0.0);
            let slack = 1e-9 * (ab + haversine_mi(b, c)).max(1.0);
            prop_assert!(haversine_mi(a, c) <= ab + haversine_mi(b, c) + slack);
        }

        #[test]
        fn laplacian_structure(pts in proptest::collection::vec((30.0f64..32.0, -101.0f64..-99.0), 1..25)) {
            let pts: Vec<_> = pts.into_iter().map(|(a, b)| GeoPoint::new(a, b)).collect();
            let g = build_graph_from_points(&pts, 40.0).unwrap();
            let l = laplacian(&g);
            for i in 0..l.n() {
                prop_assert!(l.row(i).iter().sum::<f64>().abs() <= 1e-12);
                for j in 0..l.n() {
                    prop_assert_eq!(l.get(i, j), l.get(j, i));
                    if i != j {
                        prop_assert!(l.get(i, j) == 0.0 || l.get(i, j) == -1.0);
                    }
                }
            }
            prop_assert_eq!(l.trace(), 2.0 * g.edges().len() as f64);
            prop_assert_eq!(l.component_count(), connected_components(&g).0);
        }

        #[test]
        fn graph_commutes_with_permutation(
            pts in proptest::collection::vec((30.0f64..32.0, -101.0f64..-99.0), 2..20),
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let pts: Vec<_> = pts.into_iter().map(|(a, b)| GeoPoint::new(a, b)).collect();
            let mut perm: Vec<usize> = (0..pts.len()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let permuted: Vec<_> = perm.iter().map(|&p| pts[p]).collect();
            let g = build_graph_from_points(&pts, 50.0).unwrap();
            let gp = build_graph_from_points(&permuted, 50.0).unwrap();
            let relabeled = ProximityGraph::from_edges(pts.len(), gp.edges().iter().map(|&(i, j)| (perm[i], perm[j])), 50.0);
            prop_assert_eq!(relabeled.edges(), g.edges());
        }
    }
}
