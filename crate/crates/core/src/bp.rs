//! Quaternary belief propagation with scalar (commute/anticommute) messages,
//! flooding schedule and optional multiplicative message weights.
//!
//! Per Tanner edge `e = (j, i)` with check entry `S = H[j][i]`:
//!
//! * variable to check: `d_e = q(commutes with S) - q(anticommutes with S)`,
//!   where `q` is qubit `i`'s extrinsic distribution (all checks but `j`);
//! * check to variable: `delta_e = (-1)^{s_j} * prod_{e' in row j, e' != e} d_e'`;
//! * belief: `log Q_i(E) = log P(E) + sum_e w_e * log r_e(E)` with
//!   `r_e(E) = (1 + delta_e)/2` if `E` commutes with `S` and `(1 - delta_e)/2` otherwise.
//!
//! The weight `w_e` is one for plain BP, which makes weighted and unweighted
//! decoding share a single arithmetic path.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::noise::Quaternary;
use crate::pauli::{Pauli, PauliVector, SparseCheckMatrix, Syndrome};
use crate::scalar::Real;

/// Default probability floor applied to priors, marginals and check messages.
pub const DEFAULT_CLAMP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BpConfig {
    pub max_iterations: usize,
    /// Stop as soon as the hard decision reproduces the syndrome.
    pub early_stop: bool,
    /// Floor `c`: distributions are kept in `[c, 1]`, check messages in `[-(1-c), 1-c]`.
    pub clamp: f64,
}

impl BpConfig {
    pub fn new(max_iterations: usize) -> Self {
        BpConfig {
            max_iterations,
            early_stop: true,
            clamp: DEFAULT_CLAMP,
        }
    }

    /// `2 d` iterations.
    pub fn for_distance(d: usize) -> Self {
        BpConfig::new(2 * d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("BP needs at least one iteration".into()));
        }
        if !(self.clamp > 0.0 && self.clamp < 0.5) {
            return Err(Error::Config(format!("clamp {} outside (0, 0.5)", self.clamp)));
        }
        Ok(())
    }
}

/// Flattened Tanner graph of a sparse check matrix. Edge ids run row-major.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    num_qubits: usize,
    row_start: Vec<usize>,
    edge_qubit: Vec<usize>,
    edge_pauli: Vec<Pauli>,
    /// `anti[e][E]`: error `E` anticommutes with the entry of edge `e`.
    anti: Vec<[bool; 4]>,
    qubit_edges: Vec<Vec<usize>>,
}

impl TannerGraph {
    pub fn new(h: &SparseCheckMatrix) -> Self {
        let mut row_start = Vec::with_capacity(h.num_rows() + 1);
        let mut edge_qubit = Vec::with_capacity(h.num_edges());
        let mut edge_pauli = Vec::with_capacity(h.num_edges());
        let mut qubit_edges = vec![Vec::new(); h.num_qubits()];
        row_start.push(0);
        for row in h.rows() {
            for &(q, p) in row {
                qubit_edges[q].push(edge_qubit.len());
                edge_qubit.push(q);
                edge_pauli.push(p);
            }
            row_start.push(edge_qubit.len());
        }
        let anti = edge_pauli
            .iter()
            .map(|&p| Pauli::ALL.map(|e| e.anticommutes(p)))
            .collect();
        TannerGraph {
            num_qubits: h.num_qubits(),
            row_start,
            edge_qubit,
            edge_pauli,
            anti,
            qubit_edges,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_checks(&self) -> usize {
        self.row_start.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.edge_qubit.len()
    }

    #[inline]
    pub fn row_edges(&self, j: usize) -> std::ops::Range<usize> {
        self.row_start[j]..self.row_start[j + 1]
    }

    #[inline]
    pub fn edge_qubit(&self, e: usize) -> usize {
        self.edge_qubit[e]
    }

    #[inline]
    pub fn edge_pauli(&self, e: usize) -> Pauli {
        self.edge_pauli[e]
    }

    #[inline]
    pub fn anticommutes(&self, e: usize) -> &[bool; 4] {
        &self.anti[e]
    }

    #[inline]
    pub fn qubit_edges(&self, i: usize) -> &[usize] {
        &self.qubit_edges[i]
    }

    /// Check row owning edge `e`.
    pub fn edge_row(&self, e: usize) -> usize {
        self.row_start.partition_point(|&s| s <= e) - 1
    }

    /// Syndrome of `hard` restricted to this graph's rows.
    pub fn syndrome_matches(&self, hard: &[Pauli], s: &Syndrome) -> bool {
        (0..self.num_checks()).all(|j| {
            let bit = self
                .row_edges(j)
                .fold(false, |acc, e| acc ^ self.anti[e][hard[self.edge_qubit[e]] as usize]);
            bit as u8 == s.get(j)
        })
    }
}

/// Per-edge multiplicative weights, bound to one Tanner graph.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeWeights<T> {
    num_edges: usize,
    iterations: usize,
    shared: bool,
    values: Vec<T>,
}

impl<T: Real> EdgeWeights<T> {
    /// `values[t * num_edges + e]` for `t < iterations`.
    pub fn per_iteration(num_edges: usize, iterations: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != num_edges * iterations {
            return Err(Error::Dimension {
                what: "edge weights",
                expected: num_edges * iterations,
                got: values.len(),
            });
        }
        Ok(EdgeWeights {
            num_edges,
            iterations,
            shared: false,
            values,
        })
    }

    /// One value per edge reused by every iteration.
    pub fn shared(num_edges: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != num_edges {
            return Err(Error::Dimension {
                what: "shared edge weights",
                expected: num_edges,
                got: values.len(),
            });
        }
        Ok(EdgeWeights {
            num_edges,
            iterations: 1,
            shared: true,
            values,
        })
    }

    pub fn unit(num_edges: usize, iterations: usize) -> Self {
        EdgeWeights {
            num_edges,
            iterations,
            shared: false,
            values: vec![T::one(); num_edges * iterations],
        }
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Iterations covered, or `None` when one set of values serves every iteration.
    pub fn iterations(&self) -> Option<usize> {
        (!self.shared).then_some(self.iterations)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn iteration(&self, t: usize) -> &[T] {
        if self.shared {
            &self.values
        } else {
            &self.values[t * self.num_edges..(t + 1) * self.num_edges]
        }
    }

    fn check_against(&self, g: &TannerGraph, max_iterations: usize) -> Result<()> {
        if self.num_edges != g.num_edges() {
            return Err(Error::Dimension {
                what: "edge weights vs Tanner graph",
                expected: g.num_edges(),
                got: self.num_edges,
            });
        }
        if !self.shared && self.iterations < max_iterations {
            return Err(Error::Weights(format!(
                "weights cover {} iterations, decoder runs {}",
                self.iterations, max_iterations
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Weights("non-finite weight".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpResult<T> {
    pub marginals: Vec<Quaternary<T>>,
    pub hard_decision: PauliVector,
    pub converged: bool,
    pub iterations_used: usize,
}

/// Clamped prior and its logarithm.
pub fn log_prior<T: Real>(prior: &Quaternary<T>, clamp: f64) -> Result<Quaternary<T>> {
    let c = T::of(clamp);
    let mut out = [T::zero(); 4];
    for (o, &p) in out.iter_mut().zip(prior) {
        if !p.is_finite() || p < T::zero() {
            return Err(Error::Config(format!("invalid prior entry {p:?}")));
        }
        *o = p.max(c).ln();
    }
    Ok(out)
}

/// Variable-to-check messages from total beliefs `log_q` minus each edge's own factor.
///
/// Before any check message exists, pass zero factors: `d_e` is then the
/// prior's commuting minus anticommuting mass.
pub fn vn_to_cn_messages<T: Real>(
    g: &TannerGraph,
    log_q: &[Quaternary<T>],
    factors: &[(T, T)],
    w: &[T],
    d: &mut [T],
) {
    for (e, out) in d.iter_mut().enumerate() {
        let lq = &log_q[g.edge_qubit[e]];
        let (a, b) = factors[e];
        let anti = &g.anti[e];
        let ext = std::array::from_fn::<T, 4, _>(|k| lq[k] - w[e] * if anti[k] { b } else { a });
        *out = signed_mass(&ext, anti);
    }
}

/// `sum_E sign(E) softmax(ext)(E)` with sign -1 on anticommuting `E`.
#[inline]
pub(crate) fn signed_mass<T: Real>(ext: &Quaternary<T>, anti: &[bool; 4]) -> T {
    let mx = ext.iter().copied().fold(T::neg_infinity(), T::max);
    let mut num = T::zero();
    let mut den = T::zero();
    for k in 0..4 {
        let p = (ext[k] - mx).exp();
        den = den + p;
        num = if anti[k] { num - p } else { num + p };
    }
    num / den
}

/// Check-to-variable messages; products exclude the receiving edge.
pub fn cn_to_vn_messages<T: Real>(
    g: &TannerGraph,
    d: &[T],
    s: &Syndrome,
    clamp: f64,
    delta: &mut [T],
) {
    // `1 - clamp` must stay below one in the working precision.
    let lim = T::one() - T::of(clamp).max(T::epsilon());
    for j in 0..g.num_checks() {
        let r = g.row_edges(j);
        let sign = if s.get(j) == 1 { -T::one() } else { T::one() };
        // Prefix products in `delta`, then sweep suffix products back.
        let mut acc = sign;
        for e in r.clone() {
            delta[e] = acc;
            acc = acc * d[e];
        }
        let mut suffix = T::one();
        for e in r.rev() {
            delta[e] = (delta[e] * suffix).max(-lim).min(lim);
            suffix = suffix * d[e];
        }
    }
}

/// `(log((1+delta)/2), log((1-delta)/2))` per edge.
pub fn edge_log_factors<T: Real>(delta: &[T], factors: &mut [(T, T)]) {
    let half = T::of(0.5);
    for (f, &dl) in factors.iter_mut().zip(delta) {
        *f = (((T::one() + dl) * half).ln(), ((T::one() - dl) * half).ln());
    }
}

/// Unnormalized log beliefs `log P(E) + sum_e w_e log r_e(E)`.
pub fn update_beliefs<T: Real>(
    g: &TannerGraph,
    log_prior: &Quaternary<T>,
    factors: &[(T, T)],
    w: &[T],
    log_q: &mut [Quaternary<T>],
) {
    for (i, lq) in log_q.iter_mut().enumerate() {
        *lq = *log_prior;
        for &e in &g.qubit_edges[i] {
            let (a, b) = factors[e];
            let anti = &g.anti[e];
            for k in 0..4 {
                lq[k] = lq[k] + w[e] * if anti[k] { b } else { a };
            }
        }
    }
}

/// Normalized, floored marginal from log beliefs.
#[inline]
pub fn normalize<T: Real>(lq: &Quaternary<T>, clamp: T) -> Quaternary<T> {
    let mx = lq.iter().copied().fold(T::neg_infinity(), T::max);
    let ex = lq.map(|x| (x - mx).exp());
    let z: T = ex.iter().copied().sum();
    ex.map(|x| (x / z).max(clamp))
}

/// Argmax with ties resolved in the order I, X, Y, Z.
#[inline]
pub fn hard_decision<T: Real>(lq: &Quaternary<T>) -> Pauli {
    let mut best = 0;
    for k in 1..4 {
        if lq[k] > lq[best] {
            best = k;
        }
    }
    Pauli::from_index(best)
}

/// Reusable BP decoder bound to one Tanner graph and prior. Not `Sync`
/// by intent: each worker owns one.
#[derive(Clone, Debug)]
pub struct BpDecoder<T: Real> {
    graph: Arc<TannerGraph>,
    log_prior: Quaternary<T>,
    cfg: BpConfig,
    d: Vec<T>,
    delta: Vec<T>,
    factors: Vec<(T, T)>,
    log_q: Vec<Quaternary<T>>,
    unit: Vec<T>,
}

impl<T: Real> BpDecoder<T> {
    pub fn new(graph: Arc<TannerGraph>, prior: Quaternary<T>, cfg: BpConfig) -> Result<Self> {
        cfg.validate()?;
        let ne = graph.num_edges();
        let n = graph.num_qubits();
        Ok(BpDecoder {
            log_prior: log_prior(&prior, cfg.clamp)?,
            cfg,
            d: vec![T::zero(); ne],
            delta: vec![T::zero(); ne],
            factors: vec![(T::zero(), T::zero()); ne],
            log_q: vec![[T::zero(); 4]; n],
            unit: vec![T::one(); ne],
            graph,
        })
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    pub fn config(&self) -> &BpConfig {
        &self.cfg
    }

    pub fn decode(&mut self, s: &Syndrome, weights: Option<&EdgeWeights<T>>) -> Result<BpResult<T>> {
        let g = Arc::clone(&self.graph);
        if s.len() != g.num_checks() {
            return Err(Error::Dimension {
                what: "syndrome",
                expected: g.num_checks(),
                got: s.len(),
            });
        }
        if let Some(w) = weights {
            w.check_against(&g, self.cfg.max_iterations)?;
        }
        let clamp = T::of(self.cfg.clamp);

        for lq in self.log_q.iter_mut() {
            *lq = self.log_prior;
        }
        self.factors.fill((T::zero(), T::zero()));
        vn_to_cn_messages(&g, &self.log_q, &self.factors, &self.unit, &mut self.d);

        let mut hard = vec![Pauli::I; g.num_qubits()];
        let mut converged = false;
        let mut used = 0;
        for t in 0..self.cfg.max_iterations {
            let w = weights.map_or(&self.unit[..], |w| w.iteration(t));
            cn_to_vn_messages(&g, &self.d, s, self.cfg.clamp, &mut self.delta);
            edge_log_factors(&self.delta, &mut self.factors);
            update_beliefs(&g, &self.log_prior, &self.factors, w, &mut self.log_q);
            for (h, lq) in hard.iter_mut().zip(&self.log_q) {
                *h = hard_decision(lq);
            }
            used = t + 1;
            if g.syndrome_matches(&hard, s) {
                converged = true;
                if self.cfg.early_stop {
                    break;
                }
            } else {
                converged = false;
            }
            if t + 1 < self.cfg.max_iterations {
                vn_to_cn_messages(&g, &self.log_q, &self.factors, w, &mut self.d);
            }
        }

        let marginals: Vec<Quaternary<T>> =
            self.log_q.iter().map(|lq| normalize(lq, clamp)).collect();
        if marginals.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("BP marginals"));
        }
        Ok(BpResult {
            marginals,
            hard_decision: PauliVector::from_paulis(hard),
            converged,
            iterations_used: used,
        })
    }
}

/// One-shot convenience wrapper around [`BpDecoder`].
pub fn decode_bp<T: Real>(
    h: &SparseCheckMatrix,
    s: &Syndrome,
    prior: Quaternary<T>,
    cfg: BpConfig,
    weights: Option<&EdgeWeights<T>>,
) -> Result<BpResult<T>> {
    BpDecoder::new(Arc::new(TannerGraph::new(h)), prior, cfg)?.decode(s, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::DepolarizingChannel;
    use crate::toric::build_toric;

    fn single_edge(p: Pauli) -> TannerGraph {
        TannerGraph::new(&SparseCheckMatrix::new(1, vec![vec![(0, p)]]).unwrap())
    }

    fn initial_d(prior: [f64; 4], p: Pauli) -> f64 {
        let g = single_edge(p);
        let lp = log_prior(&prior, DEFAULT_CLAMP).unwrap();
        let mut d = [0.0];
        vn_to_cn_messages(&g, &[lp], &[(0.0, 0.0)], &[1.0], &mut d);
        d[0]
    }

    #[test]
    fn vn_to_cn_examples() {
        assert!((initial_d([1.0, 0.0, 0.0, 0.0], Pauli::X) - 1.0).abs() < 1e-10);
        assert!(initial_d([0.25; 4], Pauli::Y).abs() < 1e-15);
        assert!((initial_d([0.85, 0.05, 0.05, 0.05], Pauli::Z) - 0.8).abs() < 1e-14);
    }

    #[test]
    fn cn_to_vn_examples() {
        let h = SparseCheckMatrix::new(
            4,
            vec![vec![(0, Pauli::X), (1, Pauli::X), (2, Pauli::X), (3, Pauli::X)]],
        )
        .unwrap();
        let g = TannerGraph::new(&h);
        let mut delta = [0.0f64; 4];
        cn_to_vn_messages(&g, &[1.0; 4], &Syndrome::from_bits(vec![0]), 0.0, &mut delta);
        assert!(delta.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        cn_to_vn_messages(&g, &[1.0; 4], &Syndrome::from_bits(vec![1]), 0.0, &mut delta);
        assert!(delta.iter().all(|&x| (x + 1.0).abs() < 1e-15));
        cn_to_vn_messages(
            &g,
            &[0.8, 0.5, -0.5, 1.0],
            &Syndrome::from_bits(vec![0]),
            0.0,
            &mut delta,
        );
        assert!((delta[3] - (-0.2)).abs() < 1e-15);
        // Clamp keeps magnitudes strictly below one.
        cn_to_vn_messages(&g, &[1.0; 4], &Syndrome::from_bits(vec![0]), 1e-12, &mut delta);
        assert!(delta.iter().all(|&x| x < 1.0));
    }

    #[test]
    fn zero_delta_gives_prior() {
        let h = SparseCheckMatrix::new(2, vec![vec![(0, Pauli::X), (1, Pauli::Z)]]).unwrap();
        let g = TannerGraph::new(&h);
        let prior = [0.7f64, 0.1, 0.15, 0.05];
        let lp = log_prior(&prior, DEFAULT_CLAMP).unwrap();
        let mut f = [(0.0, 0.0); 2];
        edge_log_factors(&[0.0, 0.0], &mut f);
        let mut lq = [[0.0; 4]; 2];
        update_beliefs(&g, &lp, &f, &[1.0, 1.0], &mut lq);
        for l in &lq {
            let q = normalize(l, 0.0);
            for k in 0..4 {
                assert!((q[k] - prior[k]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_syndrome_converges_immediately() {
        let code = build_toric(4).unwrap();
        let prior = DepolarizingChannel::new(0.1).unwrap().prior::<f64>();
        let s = Syndrome::zeros(code.standard().num_rows());
        let r = decode_bp(code.standard(), &s, prior, BpConfig::for_distance(4), None).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations_used, 1);
        assert!(r.hard_decision.is_identity());
    }

    #[test]
    fn dimension_errors() {
        let code = build_toric(3).unwrap();
        let prior = DepolarizingChannel::new(0.1).unwrap().prior::<f64>();
        let s = Syndrome::zeros(5);
        assert!(decode_bp(code.standard(), &s, prior, BpConfig::new(3), None).is_err());
        let s = Syndrome::zeros(code.standard().num_rows());
        let w = EdgeWeights::<f64>::unit(7, 3);
        assert!(decode_bp(code.standard(), &s, prior, BpConfig::new(3), Some(&w)).is_err());
        let w = EdgeWeights::<f64>::unit(code.standard().num_edges(), 2);
        assert!(decode_bp(code.standard(), &s, prior, BpConfig::new(3), Some(&w)).is_err());
        assert!(BpConfig::new(0).validate().is_err());
    }

    #[test]
    fn tie_break_order() {
        assert_eq!(hard_decision(&[0.0f64; 4]), Pauli::I);
        assert_eq!(hard_decision(&[0.0, 1.0, 1.0, 1.0f64]), Pauli::X);
        assert_eq!(hard_decision(&[0.0, 0.0, 1.0, 1.0f64]), Pauli::Y);
    }

    #[test]
    fn f32_decoder_runs() {
        let code = build_toric(4).unwrap();
        let prior = DepolarizingChannel::new(0.05).unwrap().prior::<f32>();
        let e = PauliVector::from_support(32, &[5], Pauli::Y);
        let s = code.standard().syndrome(&e).unwrap();
        let r = decode_bp(code.standard(), &s, prior, BpConfig::for_distance(4), None).unwrap();
        assert!(r.converged);
        assert_eq!(code.standard().syndrome(&r.hard_decision).unwrap(), s);
    }
}
