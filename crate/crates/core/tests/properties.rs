//! Property tests over the quantizer, the feedback messages and the
//! predictor plumbing.

use csi_twin::predictor::{build_input, mat_to_vec, vec_to_mat, Predictor, PredictorState, RnnWeights};
use csi_twin::protocol::{bs_reconstruct, mt_report};
use csi_twin::quant::{quantize_matrix, quantize_scalar, QuantizerConfig};
use csi_twin::rng::seeded;
use csi_twin::{ChannelMatrix, Complex64};
use proptest::prelude::*;

fn quantizer() -> impl Strategy<Value = QuantizerConfig> {
    (1u32..=12, 0.01f64..10.0).prop_map(|(b, r)| QuantizerConfig::new(b, r).unwrap())
}

fn matrix(rows: usize, cols: usize, scale: f64) -> impl Strategy<Value = ChannelMatrix> {
    prop::collection::vec((-scale..scale, -scale..scale), rows * cols)
        .prop_map(move |v| ChannelMatrix::from_entries(rows, cols, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn any_finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3f64..1e3,
        -1e-6f64..1e-6,
        prop::num::f64::NORMAL.prop_filter("moderate", |x| x.abs() < 1e150),
    ]
}

proptest! {
    #[test]
    fn quantizer_is_monotone(q in quantizer(), a in -20.0f64..20.0, b in -20.0f64..20.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(quantize_scalar(lo, &q) <= quantize_scalar(hi, &q));
    }

    #[test]
    fn quantizer_is_idempotent(q in quantizer(), x in -20.0f64..20.0) {
        let y = quantize_scalar(x, &q);
        prop_assert_eq!(quantize_scalar(y, &q), y);
    }

    #[test]
    fn quantizer_is_odd_off_boundaries(q in quantizer(), x in -20.0f64..20.0) {
        let step = q.step();
        prop_assume!(((x / step) - (x / step).round()).abs() > 1e-9);
        prop_assert_eq!(quantize_scalar(-x, &q), -quantize_scalar(x, &q));
    }

    #[test]
    fn quantizer_error_bounded_inside_range(q in quantizer(), t in -0.999f64..0.999) {
        let x = t * q.clip_range;
        prop_assert!((quantize_scalar(x, &q) - x).abs() <= q.step() / 2.0 + 1e-12 * q.clip_range);
    }

    #[test]
    fn quantizer_output_is_a_level(q in quantizer(), x in -50.0f64..50.0) {
        let y = quantize_scalar(x, &q);
        let m = y / q.step() - 0.5;
        prop_assert!((m - m.round()).abs() < 1e-9);
        prop_assert!(y.abs() <= q.clip_range - q.step() / 2.0 + 1e-12);
    }

    #[test]
    fn lossless_residual_round_trips_exactly(
        est in prop::collection::vec((any_finite(), any_finite()), 4),
        pred in prop::collection::vec((any_finite(), any_finite()), 4),
    ) {
        let m = |v: &[(f64, f64)]| ChannelMatrix::from_entries(2, 2, v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap();
        let (h, p) = (m(&est), m(&pred));
        let msg = mt_report(&h, &p, &QuantizerConfig::lossless(), 0).unwrap();
        prop_assert!(bs_reconstruct(&p, &msg).unwrap().bit_eq(&h));
    }

    #[test]
    fn reconstruction_is_prediction_minus_quantized_residual(
        q in quantizer(),
        h in matrix(1, 2, 3.0),
        p in matrix(1, 2, 3.0),
    ) {
        let msg = mt_report(&h, &p, &q, 3).unwrap();
        let rec = bs_reconstruct(&p, &msg).unwrap();
        let residual = &p - &h;
        let direct = &p - &quantize_matrix(&residual, &q);
        if msg.is_empty() {
            prop_assert_eq!(msg.bit_cost, 0);
            prop_assert!(rec.bit_eq(&p));
            prop_assert!(residual.distance_sqr(&quantize_matrix(&residual, &q)).unwrap() >= residual.norm_sqr());
        } else {
            prop_assert_eq!(msg.bit_cost, q.matrix_bits(1, 2));
            prop_assert!(rec.bit_eq(&direct));
            // Sending never leaves the BS further from the estimate than the
            // bare prediction.
            prop_assert!(rec.distance_sqr(&h).unwrap() < p.distance_sqr(&h).unwrap());
        }
    }

    #[test]
    fn unrolling_round_trips(h in (1usize..4, 1usize..4).prop_flat_map(|(r, c)| matrix(r, c, 5.0))) {
        let v = mat_to_vec(&h);
        prop_assert_eq!(v.len(), h.rows() * h.cols());
        prop_assert!(vec_to_mat(&v, h.rows(), h.cols()).unwrap().bit_eq(&h));
    }

    #[test]
    fn input_vector_shape(rows in 1usize..4, cols in 1usize..4, taps in 0usize..5) {
        let buffer = vec![ChannelMatrix::zeros(rows, cols); taps + 1];
        let x = build_input(&buffer, &ChannelMatrix::zeros(rows, cols), taps).unwrap();
        prop_assert_eq!(x.len(), rows * cols * (taps + 2));
    }

    #[test]
    fn twin_states_agree_bitwise(seed in any::<u64>(), history in prop::collection::vec(matrix(1, 2, 2.0), 3..12)) {
        let mut rng = seeded(seed);
        let p = Predictor::Recurrent {
            real: RnnWeights::init_uniform(6, 4, 2, &mut rng),
            imag: RnnWeights::init_uniform(6, 4, 2, &mut rng),
        };
        let mut a = PredictorState::new(p.clone(), 1, 2, 1, 1).unwrap();
        let mut b = PredictorState::new(p, 1, 2, 1, 1).unwrap();
        a.prime(&history[..2]).unwrap();
        b.prime(&history[..2]).unwrap();
        for h in &history[2..] {
            prop_assert!(a.predict().unwrap().bit_eq(&b.predict().unwrap()));
            a.ingest(h.clone()).unwrap();
            b.ingest(h.clone()).unwrap();
        }
    }
}
