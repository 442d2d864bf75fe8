//! Unrolled forward pass and its reverse-mode gradient.

use crate::bp::{
    cn_to_vn_messages, edge_log_factors, normalize, update_beliefs, vn_to_cn_messages, EdgeWeights,
    TannerGraph,
};
use crate::error::{Error, Result};
use crate::noise::Quaternary;
use crate::pauli::{Pauli, PauliVector, SparseCheckMatrix, Syndrome};
use crate::scalar::Real;

/// Every intermediate of `T` flooding iterations, without early stopping.
///
/// `d[t]` feeds the check update of iteration `t`; `delta[t]`, `factors[t]`
/// and `log_q[t]` are that iteration's outputs.
#[derive(Clone, Debug)]
pub struct Unrolled<T> {
    pub d: Vec<Vec<T>>,
    pub delta: Vec<Vec<T>>,
    pub factors: Vec<Vec<(T, T)>>,
    pub log_q: Vec<Vec<Quaternary<T>>>,
}

impl<T: Real> Unrolled<T> {
    pub fn iterations(&self) -> usize {
        self.log_q.len()
    }

    pub fn marginals(&self, t: usize, clamp: f64) -> Vec<Quaternary<T>> {
        let c = T::of(clamp);
        self.log_q[t].iter().map(|lq| normalize(lq, c)).collect()
    }
}

/// Runs exactly `iterations` weighted BP iterations with the same kernels,
/// in the same order, as [`crate::bp::BpDecoder`].
pub fn unroll<T: Real>(
    g: &TannerGraph,
    log_prior: &Quaternary<T>,
    s: &Syndrome,
    w: &EdgeWeights<T>,
    iterations: usize,
    clamp: f64,
) -> Result<Unrolled<T>> {
    if s.len() != g.num_checks() {
        return Err(Error::Dimension {
            what: "syndrome",
            expected: g.num_checks(),
            got: s.len(),
        });
    }
    if w.num_edges() != g.num_edges() {
        return Err(Error::Dimension {
            what: "edge weights vs Tanner graph",
            expected: g.num_edges(),
            got: w.num_edges(),
        });
    }
    if w.iterations().is_some_and(|t| t < iterations) {
        return Err(Error::Weights(format!(
            "weights cover {:?} iterations, unrolling {iterations}",
            w.iterations()
        )));
    }
    let ne = g.num_edges();
    let n = g.num_qubits();
    let unit = vec![T::one(); ne];
    let mut log_q = vec![*log_prior; n];
    let mut factors = vec![(T::zero(), T::zero()); ne];
    let mut d = vec![T::zero(); ne];
    vn_to_cn_messages(g, &log_q, &factors, &unit, &mut d);

    let mut tr = Unrolled {
        d: Vec::with_capacity(iterations),
        delta: Vec::with_capacity(iterations),
        factors: Vec::with_capacity(iterations),
        log_q: Vec::with_capacity(iterations),
    };
    let mut delta = vec![T::zero(); ne];
    for t in 0..iterations {
        let wt = w.iteration(t);
        cn_to_vn_messages(g, &d, s, clamp, &mut delta);
        edge_log_factors(&delta, &mut factors);
        update_beliefs(g, log_prior, &factors, wt, &mut log_q);
        tr.d.push(d.clone());
        tr.delta.push(delta.clone());
        tr.factors.push(factors.clone());
        tr.log_q.push(log_q.clone());
        if t + 1 < iterations {
            vn_to_cn_messages(g, &log_q, &factors, wt, &mut d);
        }
    }
    Ok(tr)
}

/// Mean cross-entropy `sum_t sum_i -log Q_i^t(e_i) / (T n)` of clamped marginals.
pub fn loss<T: Real>(marginals: &[Vec<Quaternary<T>>], e: &PauliVector) -> T {
    let t = marginals.len();
    let n = e.len();
    let mut acc = T::zero();
    for q in marginals {
        for (qi, p) in q.iter().zip(e.iter()) {
            acc = acc - qi[p.index()].ln();
        }
    }
    acc / T::of((t * n) as f64)
}

/// Per-iteration loss applied to the beliefs.
#[derive(Clone, Copy, Debug)]
pub enum LossHead<'a> {
    /// Cross-entropy against the true error, averaged over qubits.
    CrossEntropy,
    /// Probability that the residual `e + ê` anticommutes with each row,
    /// averaged over rows. With stabilizer generators and logicals as the
    /// rows, a residual scores zero exactly when it is a stabilizer.
    Commutation(&'a SparseCheckMatrix),
    /// Cross-entropy plus `weight` times the commutation term.
    Combined {
        rows: &'a SparseCheckMatrix,
        weight: f64,
    },
}

impl LossHead<'_> {
    /// Mean loss of a trace.
    pub fn eval<T: Real>(&self, tr: &Unrolled<T>, e: &PauliVector, clamp: f64) -> T {
        let mut acc = T::zero();
        for lq in &tr.log_q {
            acc = acc + self.step(lq, e, clamp, T::one(), None);
        }
        acc / T::of(tr.iterations() as f64)
    }

    /// `scale` times the loss of one iteration; with `g_l`, also adds
    /// `scale * dloss/dlog_q` into it.
    fn step<T: Real>(
        &self,
        lq: &[Quaternary<T>],
        e: &PauliVector,
        clamp: f64,
        scale: T,
        mut g_l: Option<&mut [Quaternary<T>]>,
    ) -> T {
        match *self {
            LossHead::CrossEntropy => cross_entropy_step(lq, e, clamp, scale, g_l),
            LossHead::Commutation(rows) => commutation_step(rows, lq, e, scale, g_l),
            LossHead::Combined { rows, weight } => {
                let ce = cross_entropy_step(lq, e, clamp, scale, g_l.as_deref_mut());
                ce + commutation_step(rows, lq, e, scale * T::of(weight), g_l)
            }
        }
    }
}

fn cross_entropy_step<T: Real>(
    lq: &[Quaternary<T>],
    e: &PauliVector,
    clamp: f64,
    scale: T,
    mut g_l: Option<&mut [Quaternary<T>]>,
) -> T {
    let scale = scale / T::of(lq.len() as f64);
    let ln_c = T::of(clamp).ln();
    let mut loss = T::zero();
    for (i, l) in lq.iter().enumerate() {
        let k = e.get(i).index();
        let lse = log_sum_exp(l);
        let lsm = l[k] - lse;
        // A clamped marginal is constant in the loss.
        if lsm < ln_c {
            loss = loss - ln_c;
            continue;
        }
        loss = loss - lsm;
        if let Some(gl) = g_l.as_deref_mut() {
            for m in 0..4 {
                let onehot = if m == k { T::one() } else { T::zero() };
                gl[i][m] = gl[i][m] + scale * ((l[m] - lse).exp() - onehot);
            }
        }
    }
    loss * scale
}

fn commutation_step<T: Real>(
    rows: &SparseCheckMatrix,
    lq: &[Quaternary<T>],
    e: &PauliVector,
    scale: T,
    g_l: Option<&mut [Quaternary<T>]>,
) -> T {
    let scale = scale / T::of(rows.num_rows() as f64);
    let q: Vec<Quaternary<T>> = lq
        .iter()
        .map(|l| {
            let lse = log_sum_exp(l);
            l.map(|x| (x - lse).exp())
        })
        .collect();
    let mut g_q = vec![[T::zero(); 4]; lq.len()];
    let two = T::of(2.0);
    let half = T::of(0.5);
    let mut loss = T::zero();
    let mut f = Vec::new();
    let mut suffix = Vec::new();
    for row in rows.rows() {
        // f_i = 1 - 2 P(residual on qubit i anticommutes with the row).
        f.clear();
        for &(i, sp) in row {
            let a = (0..4).fold(T::zero(), |acc, m| {
                if Pauli::from_index(m).anticommutes(sp) {
                    acc + q[i][m]
                } else {
                    acc
                }
            });
            let fi = T::one() - two * a;
            f.push(if e.get(i).anticommutes(sp) { -fi } else { fi });
        }
        let prod = f.iter().copied().fold(T::one(), |a, b| a * b);
        loss = loss + half * (T::one() - prod);
        if g_l.is_none() {
            continue;
        }
        suffix.clear();
        suffix.resize(f.len() + 1, T::one());
        for k in (0..f.len()).rev() {
            suffix[k] = suffix[k + 1] * f[k];
        }
        let mut prefix = T::one();
        for (k, &(i, sp)) in row.iter().enumerate() {
            let others = prefix * suffix[k + 1];
            prefix = prefix * f[k];
            // d(0.5 (1 - prod))/da_i with f_i = +-(1 - 2 a_i).
            let sgn = if e.get(i).anticommutes(sp) { -T::one() } else { T::one() };
            let ga = others * sgn * scale;
            for m in 0..4 {
                if Pauli::from_index(m).anticommutes(sp) {
                    g_q[i][m] = g_q[i][m] + ga;
                }
            }
        }
    }
    if let Some(gl) = g_l {
        for ((gl, qi), gq) in gl.iter_mut().zip(&q).zip(&g_q) {
            let mean = (0..4).fold(T::zero(), |acc, m| acc + qi[m] * gq[m]);
            for m in 0..4 {
                gl[m] = gl[m] + qi[m] * (gq[m] - mean);
            }
        }
    }
    loss * scale
}

fn log_sum_exp<T: Real>(l: &Quaternary<T>) -> T {
    let mx = l.iter().copied().fold(T::neg_infinity(), T::max);
    mx + l.iter().map(|&x| (x - mx).exp()).sum::<T>().ln()
}

/// Loss of a trace and its gradient with respect to every per-iteration
/// edge weight, laid out `[t * num_edges + e]`.
pub fn backward<T: Real>(
    g: &TannerGraph,
    tr: &Unrolled<T>,
    s: &Syndrome,
    w: &EdgeWeights<T>,
    e: &PauliVector,
    head: &LossHead<'_>,
    clamp: f64,
) -> (T, Vec<T>) {
    let iters = tr.iterations();
    let n = g.num_qubits();
    let ne = g.num_edges();
    let inv = T::one() / T::of(iters as f64);
    let lim = T::one() - T::of(clamp).max(T::epsilon());

    let mut grad = vec![T::zero(); iters * ne];
    let mut loss = T::zero();
    let mut g_d_next = vec![T::zero(); ne];
    let mut g_d = vec![T::zero(); ne];
    let mut g_l = vec![[T::zero(); 4]; n];
    let mut g_fac = vec![(T::zero(), T::zero()); ne];
    let mut g_delta = vec![T::zero(); ne];

    for t in (0..iters).rev() {
        let wt = w.iteration(t);
        let lq_t = &tr.log_q[t];
        let fac_t = &tr.factors[t];
        let gw = &mut grad[t * ne..(t + 1) * ne];

        g_l.fill([T::zero(); 4]);
        loss = loss + head.step(lq_t, e, clamp, inv, Some(&mut g_l));
        g_fac.fill((T::zero(), T::zero()));

        // Through d^{t+1} = signed_mass(log_q^t - w * factor).
        if t + 1 < iters {
            for ed in 0..ne {
                let gd = g_d_next[ed];
                if gd == T::zero() {
                    continue;
                }
                let i = g.edge_qubit(ed);
                let anti = g.anticommutes(ed);
                let (a, b) = fac_t[ed];
                let ext: Quaternary<T> =
                    std::array::from_fn(|m| lq_t[i][m] - wt[ed] * if anti[m] { b } else { a });
                let mx = ext.iter().copied().fold(T::neg_infinity(), T::max);
                let p = ext.map(|x| (x - mx).exp());
                let z: T = p.iter().copied().sum();
                let p = p.map(|x| x / z);
                let dval = (0..4).fold(T::zero(), |acc, m| if anti[m] { acc - p[m] } else { acc + p[m] });
                for m in 0..4 {
                    let sigma = if anti[m] { -T::one() } else { T::one() };
                    let ge = gd * p[m] * (sigma - dval);
                    g_l[i][m] = g_l[i][m] + ge;
                    if anti[m] {
                        g_fac[ed].1 = g_fac[ed].1 - wt[ed] * ge;
                        gw[ed] = gw[ed] - ge * b;
                    } else {
                        g_fac[ed].0 = g_fac[ed].0 - wt[ed] * ge;
                        gw[ed] = gw[ed] - ge * a;
                    }
                }
            }
        }

        // Through log_q^t = log P + sum_e w_e * factor_e.
        for ed in 0..ne {
            let gl = &g_l[g.edge_qubit(ed)];
            let anti = g.anticommutes(ed);
            let (a, b) = fac_t[ed];
            for m in 0..4 {
                if anti[m] {
                    g_fac[ed].1 = g_fac[ed].1 + wt[ed] * gl[m];
                    gw[ed] = gw[ed] + gl[m] * b;
                } else {
                    g_fac[ed].0 = g_fac[ed].0 + wt[ed] * gl[m];
                    gw[ed] = gw[ed] + gl[m] * a;
                }
            }
        }

        if t == 0 {
            break;
        }

        // Through the log factors and the clamp.
        for ed in 0..ne {
            let dl = tr.delta[t][ed];
            g_delta[ed] = if dl.abs() >= lim {
                T::zero()
            } else {
                g_fac[ed].0 / (T::one() + dl) - g_fac[ed].1 / (T::one() - dl)
            };
        }

        // Through the leave-one-out check products.
        let d_t = &tr.d[t];
        g_d.fill(T::zero());
        for j in 0..g.num_checks() {
            let r = g.row_edges(j);
            let sign = if s.get(j) == 1 { -T::one() } else { T::one() };
            for ed in r.clone() {
                let gdl = g_delta[ed];
                if gdl == T::zero() {
                    continue;
                }
                for other in r.clone().filter(|&x| x != ed) {
                    let mut prod = gdl * sign;
                    for k in r.clone().filter(|&x| x != ed && x != other) {
                        prod = prod * d_t[k];
                    }
                    g_d[other] = g_d[other] + prod;
                }
            }
        }
        std::mem::swap(&mut g_d, &mut g_d_next);
    }
    (loss, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::{log_prior, DEFAULT_CLAMP};
    use crate::noise::{DepolarizingChannel, ShotSeed};
    use crate::toric::ToricCode;

    fn total_loss(g: &TannerGraph, lp: &Quaternary<f64>, s: &Syndrome, w: &EdgeWeights<f64>, e: &PauliVector, t: usize) -> f64 {
        let tr = unroll(g, lp, s, w, t, DEFAULT_CLAMP).unwrap();
        let m: Vec<_> = (0..t).map(|k| tr.marginals(k, DEFAULT_CLAMP)).collect();
        loss(&m, e)
    }

    #[test]
    fn gradient_matches_central_differences() {
        let code = ToricCode::new(4).unwrap();
        let h = code.overcomplete();
        let g = TannerGraph::new(h);
        let ch = DepolarizingChannel::new(0.1).unwrap();
        let lp = log_prior(&ch.prior::<f64>(), DEFAULT_CLAMP).unwrap();
        let iters = 3;
        let ne = g.num_edges();
        let vals: Vec<f64> = (0..iters * ne).map(|k| 0.8 + 0.4 * ((k * 7919) % 101) as f64 / 101.0).collect();
        let w = EdgeWeights::per_iteration(ne, iters, vals.clone()).unwrap();
        let e = ch.sample_error(code.num_qubits(), ShotSeed::new(4, 2));
        let s = h.syndrome(&e).unwrap();
        let tr = unroll(&g, &lp, &s, &w, iters, DEFAULT_CLAMP).unwrap();
        let (l, gr) = backward(&g, &tr, &s, &w, &e, &LossHead::CrossEntropy, DEFAULT_CLAMP);
        assert!((l - total_loss(&g, &lp, &s, &w, &e, iters)).abs() < 1e-12);
        let hstep = 1e-5;
        for k in (0..iters * ne).step_by(97) {
            let mut vp = vals.clone();
            vp[k] += hstep;
            let mut vm = vals.clone();
            vm[k] -= hstep;
            let lp_ = total_loss(&g, &lp, &s, &EdgeWeights::per_iteration(ne, iters, vp).unwrap(), &e, iters);
            let lm_ = total_loss(&g, &lp, &s, &EdgeWeights::per_iteration(ne, iters, vm).unwrap(), &e, iters);
            let fd = (lp_ - lm_) / (2.0 * hstep);
            let rel = (fd - gr[k]).abs() / fd.abs().max(gr[k].abs()).max(1e-6);
            assert!(rel < 1e-4, "coord {k}: analytic {} fd {fd} rel {rel}", gr[k]);
        }
    }

    #[test]
    fn combined_gradient_matches_central_differences() {
        let code = ToricCode::new(4).unwrap();
        let h = code.overcomplete();
        let g = TannerGraph::new(h);
        let mut rows: Vec<PauliVector> = (0..code.standard().num_rows()).map(|j| code.standard().row_vector(j)).collect();
        rows.extend(code.logicals().iter().cloned());
        let rows = SparseCheckMatrix::from_pauli_vectors(code.num_qubits(), &rows).unwrap();
        let head = LossHead::Combined { rows: &rows, weight: 3.0 };
        let ch = DepolarizingChannel::new(0.1).unwrap();
        let lp = log_prior(&ch.prior::<f64>(), DEFAULT_CLAMP).unwrap();
        let iters = 3;
        let ne = g.num_edges();
        let vals: Vec<f64> = (0..iters * ne).map(|k| 0.7 + 0.5 * ((k * 104729) % 89) as f64 / 89.0).collect();
        let e = ch.sample_error(code.num_qubits(), ShotSeed::new(4, 5));
        let s = h.syndrome(&e).unwrap();
        let eval = |v: Vec<f64>| {
            let w = EdgeWeights::per_iteration(ne, iters, v).unwrap();
            let tr = unroll(&g, &lp, &s, &w, iters, DEFAULT_CLAMP).unwrap();
            head.eval(&tr, &e, DEFAULT_CLAMP)
        };
        let w = EdgeWeights::per_iteration(ne, iters, vals.clone()).unwrap();
        let tr = unroll(&g, &lp, &s, &w, iters, DEFAULT_CLAMP).unwrap();
        let (l, gr) = backward(&g, &tr, &s, &w, &e, &head, DEFAULT_CLAMP);
        assert!((l - eval(vals.clone())).abs() < 1e-12);
        let hstep = 1e-5;
        for k in (0..iters * ne).step_by(89) {
            let mut vp = vals.clone();
            vp[k] += hstep;
            let mut vm = vals.clone();
            vm[k] -= hstep;
            let fd = (eval(vp) - eval(vm)) / (2.0 * hstep);
            let rel = (fd - gr[k]).abs() / fd.abs().max(gr[k].abs()).max(1e-6);
            assert!(rel < 1e-4, "coord {k}: analytic {} fd {fd} rel {rel}", gr[k]);
        }
    }
}
