mod common;

use std::sync::Arc;

use rand::Rng;
use toric_nbm::bp::{log_prior, BpConfig, BpDecoder, TannerGraph, DEFAULT_CLAMP};
use toric_nbm::nbp::{
    backward, edge_class_ids, loss, normalizer_rows, train, unroll, LossHead, LossKind, TrainConfig,
};
use toric_nbm::{DepolarizingChannel, MatrixKind, ShotSeed, ToricCode, WeightKind, WeightSet};

fn random_conv(seed: u64, iterations: usize, shared: bool) -> WeightSet<f64> {
    let mut rng = common::rng(seed);
    let rows = if shared { 1 } else { iterations };
    let vals = (0..rows * 32).map(|_| rng.random_range(0.5..1.5)).collect();
    WeightSet::new(WeightKind::Conv, iterations, shared, 4, MatrixKind::Overcomplete, vec![0.1], vals).unwrap()
}

#[test]
fn conv_and_tied_dense_agree() {
    let code = ToricCode::new(4).unwrap();
    let h = code.overcomplete();
    let g = TannerGraph::new(h);
    let ch = DepolarizingChannel::new(0.1).unwrap();
    let lp = log_prior(&ch.prior::<f64>(), DEFAULT_CLAMP).unwrap();
    let conv = random_conv(1, 3, false);
    let dense = conv.transfer(&code).unwrap();
    assert_eq!(dense.kind, WeightKind::Dense);
    let (wc, wd) = (conv.bind(&code).unwrap(), dense.bind(&code).unwrap());
    assert_eq!(wc, wd);
    let classes = edge_class_ids(&code, MatrixKind::Overcomplete).unwrap();
    let ne = g.num_edges();
    for i in 0..10 {
        let e = ch.sample_error(code.num_qubits(), ShotSeed::new(6, i));
        let s = h.syndrome(&e).unwrap();
        let tc = unroll(&g, &lp, &s, &wc, 3, DEFAULT_CLAMP).unwrap();
        let td = unroll(&g, &lp, &s, &wd, 3, DEFAULT_CLAMP).unwrap();
        assert_eq!(tc.log_q, td.log_q);
        let (_, per_edge) = backward(&g, &td, &s, &wd, &e, &LossHead::CrossEntropy, DEFAULT_CLAMP);
        let gc = conv.reduce_gradient(&per_edge, Some(&classes));
        let gd = dense.reduce_gradient(&per_edge, None);
        assert_eq!(gd, per_edge);
        for t in 0..3 {
            let mut sums = [0.0; 32];
            for ed in 0..ne {
                sums[classes[ed]] += per_edge[t * ne + ed];
            }
            for k in 0..32 {
                assert!((gc[t * 32 + k] - sums[k]).abs() < 1e-12);
            }
        }
    }
}

/// End to end: conv values -> bound edges -> unrolled loss, against the
/// class-reduced analytic gradient, per-iteration and iteration-shared.
#[test]
fn conv_gradient_matches_finite_differences() {
    let code = ToricCode::new(4).unwrap();
    let h = code.overcomplete();
    let g = TannerGraph::new(h);
    let ch = DepolarizingChannel::new(0.1).unwrap();
    let lp = log_prior(&ch.prior::<f64>(), DEFAULT_CLAMP).unwrap();
    let rows = normalizer_rows(&code).unwrap();
    let heads = [LossHead::CrossEntropy, LossHead::Combined { rows: &rows, weight: 10.0 }];
    let classes = edge_class_ids(&code, MatrixKind::Overcomplete).unwrap();
    let e = ch.sample_error(code.num_qubits(), ShotSeed::new(2, 3));
    let s = h.syndrome(&e).unwrap();
    for shared in [false, true] {
        let ws = random_conv(4, 3, shared);
        for head in &heads {
            let eval = |w: &WeightSet<f64>| {
                let b = w.bind(&code).unwrap();
                head.eval(&unroll(&g, &lp, &s, &b, 3, DEFAULT_CLAMP).unwrap(), &e, DEFAULT_CLAMP)
            };
            let b = ws.bind(&code).unwrap();
            let tr = unroll(&g, &lp, &s, &b, 3, DEFAULT_CLAMP).unwrap();
            let (_, per_edge) = backward(&g, &tr, &s, &b, &e, head, DEFAULT_CLAMP);
            let grad = ws.reduce_gradient(&per_edge, Some(&classes));
            for k in (0..ws.values().len()).step_by(7) {
                let mut p = ws.clone();
                p.values_mut()[k] += 1e-5;
                let mut m = ws.clone();
                m.values_mut()[k] -= 1e-5;
                let fd = (eval(&p) - eval(&m)) / 2e-5;
                let rel = (fd - grad[k]).abs() / fd.abs().max(grad[k].abs()).max(1e-6);
                assert!(rel < 1e-4, "shared={shared} k={k}: {fd} vs {}", grad[k]);
            }
        }
    }
}

#[test]
fn loss_reference_values() {
    let e = common::random_pauli(&mut common::rng(1), 10);
    let onehot: Vec<[f64; 4]> = e
        .iter()
        .map(|p| std::array::from_fn(|m| if m == p.index() { 1.0 } else { 0.0 }))
        .collect();
    assert_eq!(loss(&[onehot.clone(), onehot], &e), 0.0);
    let uniform = vec![[0.25; 4]; 10];
    assert!((loss(&[uniform], &e) - 4f64.ln()).abs() < 1e-15);
}

#[test]
fn zero_steps_return_unit_weights() {
    let code = ToricCode::new(4).unwrap();
    let cfg = TrainConfig {
        steps: 0,
        ..TrainConfig::default()
    };
    let (w, report) = train::<f64>(&code, MatrixKind::Overcomplete, &cfg).unwrap();
    assert!(w.is_unit());
    assert_eq!(w.values().len(), 256);
    assert!(report.losses.is_empty());
}

/// The first recorded loss is the loss of plain BP, and the unrolled unit
/// pass reproduces the decoder's marginals.
#[test]
fn first_step_loss_is_plain_bp_loss() {
    let code = ToricCode::new(4).unwrap();
    let h = code.overcomplete();
    let cfg = TrainConfig {
        steps: 1,
        batch_size: 8,
        iterations: 4,
        loss: LossKind::CrossEntropy,
        ..TrainConfig::default()
    };
    let (_, report) = train::<f64>(&code, MatrixKind::Overcomplete, &cfg).unwrap();
    let ch = DepolarizingChannel::new(cfg.epsilons[0]).unwrap();
    let g = Arc::new(TannerGraph::new(h));
    let bp_cfg = BpConfig {
        early_stop: false,
        ..BpConfig::new(4)
    };
    let mut dec = BpDecoder::new(g.clone(), ch.prior::<f64>(), bp_cfg).unwrap();
    let lp = log_prior(&ch.prior::<f64>(), DEFAULT_CLAMP).unwrap();
    let mut total = 0.0;
    for b in 0..8 {
        let e = ch.sample_error(code.num_qubits(), ShotSeed::new(cfg.seed, b));
        let s = h.syndrome(&e).unwrap();
        let unit = toric_nbm::bp::EdgeWeights::unit(g.num_edges(), 4);
        let tr = unroll(&g, &lp, &s, &unit, 4, DEFAULT_CLAMP).unwrap();
        assert_eq!(tr.marginals(3, DEFAULT_CLAMP), dec.decode(&s, None).unwrap().marginals);
        let per_iter: Vec<_> = (0..4).map(|t| tr.marginals(t, DEFAULT_CLAMP)).collect();
        total += loss(&per_iter, &e);
    }
    assert!((report.losses[0] - total / 8.0).abs() < 1e-12);
}

#[test]
fn training_is_deterministic_across_workers() {
    let code = ToricCode::new(4).unwrap();
    let cfg = TrainConfig {
        steps: 3,
        batch_size: 6,
        iterations: 3,
        epsilons: vec![0.05, 0.1],
        ..TrainConfig::default()
    };
    let run = |workers| {
        toric_nbm::with_workers(workers, || train::<f64>(&code, MatrixKind::Overcomplete, &cfg).unwrap()).unwrap()
    };
    let (a, ra) = run(1);
    let (b, rb) = run(3);
    assert_eq!(a, b);
    assert_eq!(ra.losses, rb.losses);
    assert!(!a.is_unit());
}

#[test]
fn transfer_expands_by_class() {
    let small = ToricCode::new(4).unwrap();
    let big = ToricCode::new(10).unwrap();
    let conv = random_conv(8, 8, false);
    let dense = conv.transfer(&big).unwrap();
    assert_eq!(dense.values().len(), 8 * 3200);
    let classes = edge_class_ids(&big, MatrixKind::Overcomplete).unwrap();
    for t in 0..8 {
        for (ed, &c) in classes.iter().enumerate() {
            assert_eq!(dense.values()[t * 3200 + ed], conv.values()[t * 32 + c]);
        }
    }
    assert!(dense.transfer(&small).is_err());
    let unit = WeightSet::<f64>::init_unit(WeightKind::Conv, 8, false, &small, MatrixKind::Overcomplete).unwrap();
    assert!(unit.transfer(&big).unwrap().is_unit());
}
