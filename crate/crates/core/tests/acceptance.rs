//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::ExitCode;
use std::time::Instant;

use csi_twin::channel::{acf, bessel_j0, generate_sequence, sample_autocorrelation, solve_yule_walker, toeplitz_residual, ArModel};
use csi_twin::harness::{run_experiment, ExperimentConfig, ExperimentResults};
use csi_twin::metrics::AggregateResult;
use csi_twin::predictor::{complexity, layer_multiplications, Gradient, RnnConfig, RnnWeights, Scratch};
use csi_twin::protocol::{warm_up, LinkConfig, Scheme};
use csi_twin::quant::{quantize_scalar, QuantizerConfig, Resolution};
use csi_twin::rng::{derive, seeded, trial_seed};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn row(res: &ExperimentResults, scheme: Scheme, bits: u32) -> &AggregateResult {
    res.aggregates
        .iter()
        .find(|a| a.scheme == scheme && a.resolution == Resolution::Bits(bits))
        .expect("sweep row")
}

fn bit_scaling(res: &ExperimentResults) -> Verdict {
    let mse = |b| row(res, Scheme::Conventional, b).mse_mean;
    let ratios = [mse(1) / mse(2), mse(2) / mse(3)];
    let pass = ratios.iter().all(|r| (3.4..=4.6).contains(r));
    verdict(pass, format!("conventional mse ratios {:.3}, {:.3} (need 3.4..4.6)", ratios[0], ratios[1]))
}

fn mse_gap(res: &ExperimentResults) -> Verdict {
    let factors: Vec<f64> = (1..=3)
        .map(|b| row(res, Scheme::Conventional, b).mse_mean / row(res, Scheme::Proposed, b).mse_mean)
        .collect();
    let pass = factors.iter().all(|f| *f >= 10.0);
    verdict(pass, format!("conventional/proposed mse factors {:.1}, {:.1}, {:.1} (need >= 10)", factors[0], factors[1], factors[2]))
}

fn predictor_quality(res: &ExperimentResults) -> Verdict {
    let worst = res
        .training
        .iter()
        .map(|t| t.report.real.test_eta.max(t.report.imag.test_eta))
        .fold(0.0, f64::max);
    let wins = res.training.iter().filter(|t| t.report.beats_hold()).count();
    let n = res.training.len();
    let pass = n == 20 && worst <= 2e-2 && wins * 100 >= 95 * n;
    verdict(pass, format!("worst test eta {worst:.2e} (need <= 2e-2), beats hold in {wins}/{n} seeds (need >= 95%)"))
}

fn snr_ordering(res: &ExperimentResults) -> Verdict {
    let gaps: Vec<f64> = (1..=3)
        .map(|b| row(res, Scheme::Proposed, b).snr_db_mean - row(res, Scheme::Conventional, b).snr_db_mean)
        .collect();
    let pass = gaps[0] >= 0.1 && gaps[1] <= gaps[0] && gaps[2] <= gaps[1];
    verdict(pass, format!("proposed - conventional gain {:.4}, {:.4}, {:.4} dB (need >= 0.1 at b=1, non-increasing)", gaps[0], gaps[1], gaps[2]))
}

fn default_channel(cfg: &ExperimentConfig) -> (Vec<csi_twin::ChannelMatrix>, LinkConfig) {
    let seed = trial_seed(cfg.base_seed, 0);
    let model = ArModel::jakes(cfg.ar_order, cfg.fm, cfg.rows, cfg.cols).unwrap();
    let channel = generate_sequence(&model, cfg.total_slots(), derive(seed, 0)).unwrap();
    let mut link = cfg.link.clone();
    link.rnn.seed = derive(seed, 1);
    (channel, link)
}

fn twin_synchrony() -> Verdict {
    let cfg = ExperimentConfig::default();
    let (channel, mut link_cfg) = default_channel(&cfg);
    link_cfg.verify_twin_training = true;
    let run = || -> csi_twin::Result<usize> {
        let mut link = warm_up(&channel, &link_cfg)?;
        let model = link.train()?;
        link.activate(&model, Resolution::Bits(1))?;
        let mut checked = 0;
        for h in &channel[link_cfg.warmup_slots..] {
            let (mt, bs) = link.predictions().expect("operational");
            if !mt.bit_eq(bs) {
                return Err(csi_twin::Error::Desynchronized { slot: h.slot });
            }
            link.step(h)?;
            checked += 1;
        }
        Ok(checked)
    };
    match run() {
        Ok(n) => verdict(n == cfg.operational_slots, format!("twin predictions bit-identical in {n} operational slots, independently trained twins identical")),
        Err(e) => verdict(false, format!("{e}")),
    }
}

fn identity_limit() -> Verdict {
    let cfg = ExperimentConfig::default();
    let (channel, link_cfg) = default_channel(&cfg);
    let run = || -> csi_twin::Result<(usize, usize)> {
        let mut link = warm_up(&channel, &link_cfg)?;
        let model = link.train()?;
        link.activate(&model, Resolution::Lossless)?;
        let mut exact = 0;
        let ops = &channel[link_cfg.warmup_slots..];
        for h in ops {
            if link.step(h)?.reconstruction.bit_eq(h) {
                exact += 1;
            }
        }
        Ok((exact, ops.len()))
    };
    match run() {
        Ok((exact, n)) => verdict(exact == n, format!("lossless reconstruction bit-exact in {exact}/{n} slots")),
        Err(e) => verdict(false, format!("{e}")),
    }
}

fn frozen_limit() -> Verdict {
    let cfg = ExperimentConfig {
        fm: 0.0,
        trials: 4,
        operational_slots: 2000,
        ..ExperimentConfig::default()
    };
    let res = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("{e}")),
    };
    let shares: Vec<f64> = (1..=3)
        .map(|b| row(&res, Scheme::Proposed, b).bits_per_slot_mean / row(&res, Scheme::Conventional, b).bits_per_slot_mean)
        .collect();
    let pass = shares.iter().all(|s| *s <= 0.01);
    verdict(pass, format!("proposed bits/slot as share of conventional {:.4}%, {:.4}%, {:.4}% (need <= 1%)", 100.0 * shares[0], 100.0 * shares[1], 100.0 * shares[2]))
}

fn channel_fidelity() -> Verdict {
    let mut worst_acf: f64 = 0.0;
    for (i, fm) in [0.005, 0.01, 0.05].into_iter().enumerate() {
        let model = ArModel::jakes(2, fm, 1, 2).unwrap();
        let seq = generate_sequence(&model, 100_000, 100 + i as u64).unwrap();
        for entry in 0..2 {
            for lag in 1..=5 {
                worst_acf = worst_acf.max((sample_autocorrelation(&seq, entry, lag) - acf(lag as i64, fm)).abs());
            }
        }
    }

    let model = ArModel::jakes(1, 0.01, 1, 2).unwrap();
    let slots = 10_000_000;
    let mut power = [0.0; 2];
    for h in model.generator(7).take(slots) {
        for (p, z) in power.iter_mut().zip(h.entries()) {
            *p += z.norm_sqr();
        }
    }
    let worst_var = power.iter().map(|p| (p / slots as f64 - 1.0).abs()).fold(0.0, f64::max);

    let mut worst_yw: f64 = 0.0;
    for fm in [0.005, 0.01, 0.02, 0.05, 0.1, 0.2] {
        for order in 1..=4 {
            if let Ok(yw) = solve_yule_walker(order, fm) {
                worst_yw = worst_yw.max(toeplitz_residual(&yw.coeffs, fm));
            }
        }
    }
    let pass = worst_acf <= 0.02 && worst_var <= 0.03 && worst_yw <= 1e-10;
    verdict(
        pass,
        format!("acf lags 1-5 worst {worst_acf:.4} (need <= 0.02), variance worst {:.2}% (need <= 3%), yule-walker residual {worst_yw:.1e} (need <= 1e-10)", 100.0 * worst_var),
    )
}

fn quantizer_law() -> Verdict {
    let mut rng = seeded(99);
    let samples = 1_000_000;
    let range = 1.0;
    let mut mse = Vec::new();
    let mut worst_rel: f64 = 0.0;
    for bits in 1..=6 {
        let q = QuantizerConfig::new(bits, range).unwrap();
        let m = (0..samples)
            .map(|_| {
                let x: f64 = rng.random_range(-range..range);
                (quantize_scalar(x, &q) - x).powi(2)
            })
            .sum::<f64>()
            / samples as f64;
        let step = q.step();
        worst_rel = worst_rel.max((m / (step * step / 12.0) - 1.0).abs());
        mse.push(m);
    }
    let worst_ratio = mse.windows(2).map(|w| (w[0] / w[1] / 4.0 - 1.0).abs()).fold(0.0, f64::max);
    let pass = worst_rel <= 0.02 && worst_ratio <= 0.05;
    verdict(pass, format!("uniform-input mse vs step^2/12 worst {:.2}% (need <= 2%), per-bit ratio off 4 by {:.2}% (need <= 5%)", 100.0 * worst_rel, 100.0 * worst_ratio))
}

fn j0_series(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..40 {
        term *= q / (m as f64 * m as f64);
        sum += term;
    }
    sum
}

fn gradient_error(rng: &mut impl Rng) -> f64 {
    let inputs = rng.random_range(1..=8);
    let hidden = rng.random_range(1..=4);
    let outputs = rng.random_range(1..=4);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let (w, v) = (draw(inputs * hidden), draw(outputs * hidden));
    let x = draw(inputs);
    let t = draw(outputs);
    let net = RnnWeights::from_parts(inputs, hidden, outputs, w.clone(), v.clone()).unwrap();
    let mut grad = Gradient::zeros_like(&net);
    net.accumulate_gradient(&x, &t, &mut grad, &mut Scratch::for_network(&net));

    let h = 1e-6;
    let loss = |w: &[f64], v: &[f64]| RnnWeights::from_parts(inputs, hidden, outputs, w.to_vec(), v.to_vec()).unwrap().sample_loss(&x, &t).unwrap();
    let mut worst: f64 = 0.0;
    let mut check = |analytic: f64, plus: f64, minus: f64| {
        let numeric = (plus - minus) / (2.0 * h);
        worst = worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3));
    };
    for i in 0..w.len() {
        let (mut a, mut b) = (w.clone(), w.clone());
        a[i] += h;
        b[i] -= h;
        check(grad.hidden[i], loss(&a, &v), loss(&b, &v));
    }
    for i in 0..v.len() {
        let (mut a, mut b) = (v.clone(), v.clone());
        a[i] += h;
        b[i] -= h;
        check(grad.output[i], loss(&w, &a), loss(&w, &b));
    }
    worst
}

fn numerical_oracles() -> Verdict {
    let mut rng = seeded(2024);
    let worst_grad = (0..50).map(|_| gradient_error(&mut rng)).fold(0.0, f64::max);
    let worst_j0 = (0..=4000)
        .map(|i| {
            let x = -10.0 + 20.0 * i as f64 / 4000.0;
            (bessel_j0(x) - j0_series(x)).abs()
        })
        .fold(0.0, f64::max);
    let mut kappa_ok = 0;
    for _ in 0..100 {
        let (rows, cols) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let cfg = RnnConfig {
            delay_taps: rng.random_range(0..=10),
            hidden_neurons: rng.random_range(1..=64),
            ..RnnConfig::default()
        };
        let direct = layer_multiplications(cfg.input_size(rows, cols), rows * cols, cfg.hidden_neurons);
        if direct == complexity(&cfg, rows, cols).multiplications {
            kappa_ok += 1;
        }
    }
    let pass = worst_grad <= 1e-5 && worst_j0 <= 1e-9 && kappa_ok == 100;
    verdict(pass, format!("gradient rel err {worst_grad:.1e} (need <= 1e-5), J0 vs series {worst_j0:.1e} (need <= 1e-9), multiplication counts agree {kappa_ok}/100"))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, started: Instant, v: Verdict| {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        if !v.pass {
            failures += 1;
        }
        println!("{tag} {id:>2} {name}: {} [{:.1}s]", v.detail, started.elapsed().as_secs_f64());
    };

    let started = Instant::now();
    let default_run = run_experiment(&ExperimentConfig::default());
    match &default_run {
        Ok(res) => {
            report(1, "conventional bit scaling", started, bit_scaling(res));
            report(2, "proposed mse gap", started, mse_gap(res));
            report(3, "predictor quality", started, predictor_quality(res));
            report(4, "precoding snr ordering", started, snr_ordering(res));
        }
        Err(e) => {
            for (id, name) in [(1, "conventional bit scaling"), (2, "proposed mse gap"), (3, "predictor quality"), (4, "precoding snr ordering")] {
                report(id, name, started, verdict(false, format!("default run failed: {e}")));
            }
        }
    }
    let t = Instant::now();
    report(5, "twin synchrony", t, twin_synchrony());
    let t = Instant::now();
    report(6, "identity quantizer limit", t, identity_limit());
    let t = Instant::now();
    report(7, "frozen channel limit", t, frozen_limit());
    let t = Instant::now();
    report(8, "channel model fidelity", t, channel_fidelity());
    let t = Instant::now();
    report(9, "quantizer law", t, quantizer_law());
    let t = Instant::now();
    report(10, "numerical oracles", t, numerical_oracles());

    if failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
