mod common;

use std::sync::Arc;

use rand::Rng;
use toric_nbm::bp::{decode_bp, BpConfig, BpDecoder, EdgeWeights, TannerGraph};
use toric_nbm::{DepolarizingChannel, MatrixKind, Pauli, ShotSeed, SparseCheckMatrix, Syndrome, ToricCode};

fn exact_config(iters: usize) -> BpConfig {
    BpConfig {
        early_stop: false,
        ..BpConfig::new(iters)
    }
}

#[test]
fn acyclic_marginals_match_enumeration() {
    let mut rng = common::rng(11);
    for _ in 0..40 {
        let n = rng.random_range(2..=8);
        let h = common::random_acyclic(&mut rng, n);
        let e = common::random_pauli(&mut rng, n);
        let s = h.syndrome(&e).unwrap();
        let eps = rng.random_range(0.01..0.3);
        let prior = DepolarizingChannel::new(eps).unwrap().prior::<f64>();
        let r = decode_bp(&h, &s, prior, exact_config(2 * n + 2), None).unwrap();
        let want = common::brute_posteriors(&h, &s, prior);
        for (q, w) in r.marginals.iter().zip(&want) {
            for m in 0..4 {
                assert!((q[m] - w[m]).abs() < 1e-9, "{q:?} vs {w:?}");
            }
        }
    }
}

#[test]
fn single_check_is_exact_after_one_iteration() {
    let h = SparseCheckMatrix::new(4, vec![(0..4).map(|q| (q, Pauli::X)).collect()]).unwrap();
    let prior = DepolarizingChannel::new(0.12).unwrap().prior::<f64>();
    for bit in 0..2u8 {
        let s = Syndrome::from_bits(vec![bit]);
        let r = decode_bp(&h, &s, prior, exact_config(1), None).unwrap();
        let want = common::brute_posteriors(&h, &s, prior);
        for (q, w) in r.marginals.iter().zip(&want) {
            for m in 0..4 {
                assert!((q[m] - w[m]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn unit_weights_are_bit_identical() {
    let code = ToricCode::new(4).unwrap();
    let ch = DepolarizingChannel::new(0.1).unwrap();
    for kind in [MatrixKind::Standard, MatrixKind::Overcomplete] {
        let h = code.matrix(kind);
        let g = Arc::new(TannerGraph::new(h));
        let cfg = BpConfig::for_distance(4);
        let unit = EdgeWeights::unit(g.num_edges(), cfg.max_iterations);
        let mut dec = BpDecoder::new(g, ch.prior::<f64>(), cfg).unwrap();
        for i in 0..200 {
            let e = ch.sample_error(code.num_qubits(), ShotSeed::new(3, i));
            let s = h.syndrome(&e).unwrap();
            let plain = dec.decode(&s, None).unwrap();
            let weighted = dec.decode(&s, Some(&unit)).unwrap();
            assert_eq!(plain, weighted);
        }
    }
}

#[test]
fn converged_output_reproduces_syndrome() {
    let code = ToricCode::new(6).unwrap();
    let ch = DepolarizingChannel::new(0.05).unwrap();
    let h = code.overcomplete();
    let mut dec = BpDecoder::new(Arc::new(TannerGraph::new(h)), ch.prior::<f64>(), BpConfig::for_distance(6)).unwrap();
    let mut converged = 0;
    for i in 0..300 {
        let e = ch.sample_error(code.num_qubits(), ShotSeed::new(8, i));
        let s = h.syndrome(&e).unwrap();
        let r = dec.decode(&s, None).unwrap();
        if r.converged {
            converged += 1;
            assert_eq!(h.syndrome(&r.hard_decision).unwrap(), s);
        }
        for q in &r.marginals {
            assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
    assert!(converged > 150);
}

#[test]
fn f32_tracks_f64() {
    let code = ToricCode::new(4).unwrap();
    let ch = DepolarizingChannel::new(0.05).unwrap();
    let h = code.standard();
    let e = ch.sample_error(code.num_qubits(), ShotSeed::new(1, 17));
    let s = h.syndrome(&e).unwrap();
    let cfg = exact_config(3);
    let a = decode_bp(h, &s, ch.prior::<f64>(), cfg, None).unwrap();
    let b = decode_bp(h, &s, ch.prior::<f32>(), cfg, None).unwrap();
    for (x, y) in a.marginals.iter().zip(&b.marginals) {
        for m in 0..4 {
            assert!((x[m] - y[m] as f64).abs() < 1e-4);
        }
    }
}
