use csi_twin::channel::{generate_sequence, ArModel};
use csi_twin::predictor::{decode_predictor, encode_predictor, train, Predictor, PredictorState, RnnConfig};
use csi_twin::quant::{quantize_matrix, QuantizerConfig};
use csi_twin::{ChannelMatrix, Complex64};

fn frozen(c: &ChannelMatrix, n: usize) -> Vec<ChannelMatrix> {
    (0..n).map(|t| c.clone().with_slot(t)).collect()
}

fn target() -> ChannelMatrix {
    ChannelMatrix::from_entries(1, 2, vec![Complex64::new(0.7, -0.4), Complex64::new(-1.1, 0.25)]).unwrap()
}

#[test]
fn constant_history_is_learned() {
    let c = target();
    let hist = frozen(&c, 2000);
    let cfg = RnnConfig { seed: 11, plateau_epochs: 10, patience: 100, weight_decay: 0.0, ..RnnConfig::default() };
    let trained = train(&hist, &cfg).unwrap();
    let r = &trained.report;
    println!("{r:?}");
    assert!(r.real.test_eta <= 1e-6 && r.imag.test_eta <= 1e-6, "{r:?}");

    let mut state = PredictorState::new(trained.predictor(), 1, 2, 1, 1).unwrap();
    state.prime(&hist).unwrap();
    for _ in 0..50 {
        let p = state.predict().unwrap();
        assert!(p.distance_sqr(&c).unwrap().sqrt() < 1e-3);
        state.ingest(c.clone()).unwrap();
    }
}

fn warmup_history(fm: f64, slots: usize, seed: u64) -> Vec<ChannelMatrix> {
    let model = ArModel::jakes(1, fm, 1, 2).unwrap();
    let q = QuantizerConfig::three_sigma(5, 1.0).unwrap();
    generate_sequence(&model, slots, seed).unwrap().iter().map(|h| quantize_matrix(h, &q)).collect()
}

fn small_config(seed: u64) -> RnnConfig {
    RnnConfig { seed, epochs: 40, ..RnnConfig::default() }
}

#[test]
fn training_is_deterministic_per_seed() {
    let hist = warmup_history(0.01, 1500, 3);
    let a = train(&hist, &small_config(5)).unwrap();
    let b = train(&hist, &small_config(5)).unwrap();
    let c = train(&hist, &small_config(6)).unwrap();
    assert!(a.real.bit_eq(&b.real) && a.imag.bit_eq(&b.imag));
    assert_eq!(a.report, b.report);
    assert!(!a.real.bit_eq(&c.real));
}

#[test]
fn report_accounts_for_every_sample() {
    let hist = warmup_history(0.01, 1500, 4);
    let cfg = small_config(1);
    let t = train(&hist, &cfg).unwrap();
    let r = &t.report;
    assert_eq!(r.train_samples + r.validation_samples + r.test_samples, hist.len() - cfg.delay_taps - cfg.horizon);
    for n in [&r.real, &r.imag] {
        assert!(n.best_epoch <= n.epochs_run && n.epochs_run <= cfg.epochs);
        assert!(n.test_eta.is_finite() && n.test_eta > 0.0);
        assert!(n.hold_test_eta > 0.0);
    }
    assert_eq!(r.beats_hold(), r.real.beats_hold() && r.imag.beats_hold());
}

#[test]
fn weights_file_round_trip_predicts_identically() {
    let hist = warmup_history(0.01, 1200, 8);
    let t = train(&hist, &small_config(2)).unwrap();
    let original = t.predictor();
    let text = encode_predictor(&original);
    let restored = decode_predictor(&text).unwrap();
    assert!(restored.bit_eq(&original));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.txt");
    csi_twin::predictor::write_predictor(&path, &original).unwrap();
    let from_disk = csi_twin::predictor::read_predictor(&path).unwrap();

    let mut a = PredictorState::new(original, 1, 2, 1, 1).unwrap();
    let mut b = PredictorState::new(from_disk, 1, 2, 1, 1).unwrap();
    a.prime(&hist).unwrap();
    b.prime(&hist).unwrap();
    for h in warmup_history(0.01, 100, 9) {
        assert!(a.predict().unwrap().bit_eq(&b.predict().unwrap()));
        a.ingest(h.clone()).unwrap();
        b.ingest(h).unwrap();
    }
}

#[test]
fn persistence_predicts_last_sample() {
    let hist = warmup_history(0.02, 50, 1);
    let mut s = PredictorState::new(Predictor::Persistence, 1, 2, 1, 1).unwrap();
    s.prime(&hist).unwrap();
    let p = s.predict().unwrap();
    assert!(p.bit_eq(hist.last().unwrap()));
}

#[test]
fn short_history_is_rejected() {
    let hist = warmup_history(0.01, 10, 1);
    assert!(train(&hist, &small_config(1)).is_err());
}
