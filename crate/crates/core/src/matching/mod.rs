//! Second-stage decoding by minimum-weight perfect matching on the
//! per-sector detection graphs.

mod blossom;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub use blossom::{max_weight_matching, min_weight_perfect_matching, MatchWeight};

use crate::error::{Error, Result};
use crate::noise::{DepolarizingChannel, Quaternary};
use crate::pauli::{Pauli, PauliVector, Syndrome};
use crate::scalar::Real;
use crate::toric::{build_detection_geometry, DetectionGeometry, Sector, SectorGraph, ToricCode};

/// Default lower clamp on sector flip probabilities.
pub const DEFAULT_P_MIN: f64 = 1e-12;

/// Per-qubit flip probability of one sector from normalized marginals.
pub fn posterior_sector_probs<T: Real>(marginals: &[Quaternary<T>], sector: Sector, p_min: f64) -> Vec<f64> {
    marginals
        .iter()
        .map(|q| {
            let p = match sector {
                Sector::Vertex => q[Pauli::Z.index()] + q[Pauli::Y.index()],
                Sector::Plaquette => q[Pauli::X.index()] + q[Pauli::Y.index()],
            };
            p.as_f64().clamp(p_min, 1.0 - p_min)
        })
        .collect()
}

/// A sector graph with per-qubit edge weights `log((1 - p) / p)`.
#[derive(Clone, Debug)]
pub struct WeightedDetectionGraph<'a> {
    graph: &'a SectorGraph,
    weights: Vec<f64>,
}

impl<'a> WeightedDetectionGraph<'a> {
    pub fn from_probs(graph: &'a SectorGraph, probs: &[f64], p_min: f64) -> Result<Self> {
        if probs.len() != graph.num_edges() {
            return Err(Error::Dimension {
                what: "sector probabilities",
                expected: graph.num_edges(),
                got: probs.len(),
            });
        }
        let weights = probs
            .iter()
            .map(|&p| {
                let p = p.clamp(p_min, 1.0 - p_min);
                ((1.0 - p) / p).ln()
            })
            .collect::<Vec<_>>();
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("edge weight"));
        }
        Ok(WeightedDetectionGraph { graph, weights })
    }

    pub fn from_weights(graph: &'a SectorGraph, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != graph.num_edges() {
            return Err(Error::Dimension {
                what: "edge weights",
                expected: graph.num_edges(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("edge weight"));
        }
        Ok(WeightedDetectionGraph { graph, weights })
    }

    pub fn graph(&self) -> &SectorGraph {
        self.graph
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn has_negative(&self) -> bool {
        self.weights.iter().any(|&w| w < 0.0)
    }

    /// Folds every negative edge into a fixed partial correction.
    ///
    /// Returns the graph with `|w|` weights, the folded qubits, and the
    /// defect set with the folded edges' endpoints toggled. A minimum chain
    /// for the new defects, XOR the folded qubits, is a minimum chain for the
    /// original defects under the signed weights.
    pub fn fold_negative(&self, defects: &[usize]) -> (WeightedDetectionGraph<'a>, Vec<usize>, Vec<usize>) {
        let mut is_defect = vec![false; self.graph.num_nodes()];
        for &v in defects {
            is_defect[v] ^= true;
        }
        let mut folded = Vec::new();
        for (q, &w) in self.weights.iter().enumerate() {
            if w < 0.0 {
                folded.push(q);
                let (a, b) = self.graph.endpoints[q];
                is_defect[a] ^= true;
                is_defect[b] ^= true;
            }
        }
        let reduced = WeightedDetectionGraph {
            graph: self.graph,
            weights: self.weights.iter().map(|w| w.abs()).collect(),
        };
        let defects = (0..is_defect.len()).filter(|&v| is_defect[v]).collect();
        (reduced, folded, defects)
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    // Reversed so that BinaryHeap pops the smallest (distance, node).
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths. `pred[v]` is `(previous node, qubit)`.
fn dijkstra(g: &WeightedDetectionGraph<'_>, source: usize) -> (Vec<f64>, Vec<(usize, usize)>) {
    let n = g.graph.num_nodes();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![(usize::MAX, usize::MAX); n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem(0.0, source));
    while let Some(HeapItem(du, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, q) in &g.graph.adjacency[u] {
            let nd = du + g.weights[q];
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = (u, q);
                heap.push(HeapItem(nd, v));
            }
        }
    }
    (dist, pred)
}

/// Pairwise shortest-path distances between defects, with path recovery.
#[derive(Clone, Debug)]
pub struct DistanceTable {
    defects: Vec<usize>,
    dist: Vec<f64>,
    pred: Vec<Vec<(usize, usize)>>,
}

impl DistanceTable {
    pub fn len(&self) -> usize {
        self.defects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defects.is_empty()
    }

    pub fn defects(&self) -> &[usize] {
        &self.defects
    }

    /// Distance between the `a`-th and `b`-th defect.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.len() + b]
    }

    /// Row-major `k x k` table.
    pub fn table(&self) -> &[f64] {
        &self.dist
    }

    /// Qubits along the shortest path from defect `a` to defect `b`.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let pred = &self.pred[a];
        let (src, mut v) = (self.defects[a], self.defects[b]);
        let mut qubits = Vec::new();
        while v != src {
            let (u, q) = pred[v];
            qubits.push(q);
            v = u;
        }
        qubits.reverse();
        qubits
    }
}

/// Shortest paths between all defect pairs. Weights must be nonnegative;
/// see [`WeightedDetectionGraph::fold_negative`].
pub fn defect_distances(g: &WeightedDetectionGraph<'_>, defects: &[usize]) -> Result<DistanceTable> {
    if g.has_negative() {
        return Err(Error::Invariant("negative edge weight reached shortest paths".into()));
    }
    let n = g.graph.num_nodes();
    if let Some(&v) = defects.iter().find(|&&v| v >= n) {
        return Err(Error::Dimension {
            what: "defect node",
            expected: n,
            got: v,
        });
    }
    let k = defects.len();
    let mut dist = vec![0.0; k * k];
    let mut pred = Vec::with_capacity(k);
    for (a, &src) in defects.iter().enumerate() {
        let (d, p) = dijkstra(g, src);
        for (b, &dst) in defects.iter().enumerate() {
            dist[a * k + b] = d[dst];
        }
        pred.push(p);
    }
    Ok(DistanceTable {
        defects: defects.to_vec(),
        dist,
        pred,
    })
}

/// A perfect matching of defects with the chosen paths.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Matching {
    /// Node pairs `(u, v)`, each defect in exactly one pair.
    pub pairs: Vec<(usize, usize)>,
    /// Qubit path realizing each pair.
    pub paths: Vec<Vec<usize>>,
    pub total_weight: f64,
}

/// Exact minimum-weight perfect matching over a distance table.
pub fn mwpm(table: &DistanceTable) -> Result<Matching> {
    let idx = min_weight_perfect_matching(table.len(), table.table())?;
    let mut m = Matching::default();
    for (a, b) in idx {
        m.pairs.push((table.defects[a], table.defects[b]));
        m.paths.push(table.path(a, b));
        m.total_weight += table.distance(a, b);
    }
    Ok(m)
}

/// One sector's second-stage result.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SectorMatch {
    pub matching: Matching,
    /// Negative-weight qubits folded into the correction before matching.
    pub folded: Vec<usize>,
}

impl SectorMatch {
    /// Qubits that receive the sector's correction Pauli (XOR over paths).
    pub fn flipped_qubits(&self, n: usize) -> Vec<bool> {
        let mut f = vec![false; n];
        for &q in self.folded.iter().chain(self.matching.paths.iter().flatten()) {
            f[q] ^= true;
        }
        f
    }
}

/// Defect nodes of one sector: unsatisfied standard rows of that family.
pub fn sector_defects(graph: &SectorGraph, s: &Syndrome) -> Result<Vec<usize>> {
    let n = graph.num_nodes();
    if s.len() < graph.row_offset + n {
        return Err(Error::Dimension {
            what: "syndrome",
            expected: graph.row_offset + n,
            got: s.len(),
        });
    }
    let defects: Vec<usize> = (0..n).filter(|&v| s.get(graph.row_offset + v) == 1).collect();
    if defects.len() % 2 == 1 {
        return Err(Error::OddDefects(defects.len()));
    }
    Ok(defects)
}

/// Matches one sector's defects exactly under possibly signed weights.
pub fn match_sector(g: &WeightedDetectionGraph<'_>, defects: &[usize]) -> Result<SectorMatch> {
    let (reduced, folded, defects) = if g.has_negative() {
        g.fold_negative(defects)
    } else {
        (g.clone(), Vec::new(), defects.to_vec())
    };
    if defects.len() % 2 == 1 {
        return Err(Error::OddDefects(defects.len()));
    }
    let table = defect_distances(&reduced, &defects)?;
    let mut matching = mwpm(&table)?;
    matching.total_weight += folded.iter().map(|&q| g.weights[q]).sum::<f64>();
    Ok(SectorMatch { matching, folded })
}

/// Z on vertex-sector chains, X on plaquette-sector chains, composed.
pub fn assemble_correction(vertex: &SectorMatch, plaquette: &SectorMatch, n: usize) -> PauliVector {
    let mut c = PauliVector::identity(n);
    for (m, sector) in [(vertex, Sector::Vertex), (plaquette, Sector::Plaquette)] {
        for (q, f) in m.flipped_qubits(n).into_iter().enumerate() {
            if f {
                c.apply(q, sector.correction());
            }
        }
    }
    c
}

/// Reusable second-stage decoder for one code.
#[derive(Clone, Debug)]
pub struct BeliefMatcher {
    geometry: DetectionGeometry,
    n: usize,
    p_min: f64,
}

impl BeliefMatcher {
    pub fn new(code: &ToricCode) -> Self {
        BeliefMatcher {
            geometry: build_detection_geometry(code),
            n: code.num_qubits(),
            p_min: DEFAULT_P_MIN,
        }
    }

    pub fn with_p_min(mut self, p_min: f64) -> Self {
        self.p_min = p_min;
        self
    }

    pub fn geometry(&self) -> &DetectionGeometry {
        &self.geometry
    }

    fn decode_with(&self, s: &Syndrome, probs: impl Fn(Sector) -> Vec<f64>) -> Result<PauliVector> {
        let mut parts = Vec::with_capacity(2);
        for sector in Sector::BOTH {
            let graph = self.geometry.sector(sector);
            let defects = sector_defects(graph, s)?;
            if defects.is_empty() {
                parts.push(SectorMatch::default());
                continue;
            }
            let g = WeightedDetectionGraph::from_probs(graph, &probs(sector), self.p_min)?;
            parts.push(match_sector(&g, &defects)?);
        }
        Ok(assemble_correction(&parts[0], &parts[1], self.n))
    }

    /// Matching weighted by BP marginals. Only the standard rows of `s` are read.
    pub fn decode<T: Real>(&self, s: &Syndrome, marginals: &[Quaternary<T>]) -> Result<PauliVector> {
        if marginals.len() != self.n {
            return Err(Error::Dimension {
                what: "marginals",
                expected: self.n,
                got: marginals.len(),
            });
        }
        self.decode_with(s, |sector| posterior_sector_probs(marginals, sector, self.p_min))
    }

    /// Matching weighted by the channel prior (uniform weights).
    pub fn decode_prior(&self, s: &Syndrome, channel: &DepolarizingChannel) -> Result<PauliVector> {
        let p = 2.0 * channel.epsilon() / 3.0;
        self.decode_with(s, |_| vec![p; self.n])
    }
}

pub fn belief_match<T: Real>(code: &ToricCode, s: &Syndrome, marginals: &[Quaternary<T>]) -> Result<PauliVector> {
    BeliefMatcher::new(code).decode(s, marginals)
}

pub fn mwpm_baseline(code: &ToricCode, s: &Syndrome, channel: &DepolarizingChannel) -> Result<PauliVector> {
    BeliefMatcher::new(code).decode_prior(s, channel)
}
