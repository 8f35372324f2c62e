//! Acceptance criteria 1–8. Every test writes one PASS/FAIL line to stdout
//! (uncaptured) and then asserts the same verdict.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use ipdft::config::{ExperimentConfig, FilterKind};
use ipdft::estimator::{
    amplitude_closed_form_h2, estimate_frequency, frequency_closed_form_h2, phase_closed_form_h2,
    wrap_phase, Estimator, EstimatorConfig, FrequencyMode,
};
use ipdft::experiments::{run_combined, run_fig1, run_fig3, run_tables, run_transient};
use ipdft::prefilter::FirFilter;
use ipdft::streamer::{run_stream, StreamConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn report(id: u32, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {id} {verdict}: {title} | {detail}");
    let _ = out.flush();
    assert!(pass, "criterion {id} failed: {detail}");
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

#[test]
fn criterion_1_inverse_fourth_power_law() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut cfg = ExperimentConfig::default();
    cfg.sweep.cir = vec![0.3, 0.5, 1.0];
    cfg.sweep.n = (5..=11).map(|e| 1 << e).collect();
    cfg.sweep.phase_step = 0.01;
    let res = run_fig1(&cfg).unwrap();
    let elapsed = start.elapsed();
    let mut pass = elapsed < Duration::from_secs(120);
    let mut parts = Vec::new();
    for cir in [0.3, 0.5, 1.0] {
        let (a, p) = res.slopes(cir);
        let (a, p) = (a.unwrap_or(f64::NAN), p.unwrap_or(f64::NAN));
        let ok = within(a, -4.3, -3.7) && within(p, -4.3, -3.7);
        pass &= ok;
        parts.push(format!("CiR {cir}: amp {a:.2} phase {p:.2}{}", if ok { "" } else { " (out)" }));
    }
    parts.push(secs(elapsed));
    report(1, "log-log slope -4 +/- 0.3", pass, &parts.join(", "));
}

#[test]
fn criterion_2_optimum_at_one_cycle() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut cfg = ExperimentConfig::default();
    cfg.sweep.n = vec![512];
    let res = run_fig1(&cfg).unwrap();
    let elapsed = start.elapsed();
    let (ca, cp) = res.argmin_cir(512).unwrap();
    let pass = (ca - 1.0).abs() <= 0.05 + 1e-9 && (cp - 1.0).abs() <= 0.05 + 1e-9 && elapsed < Duration::from_secs(120);
    report(
        2,
        "worst-phase error minimal at CiR 1.0 +/- 0.05 (N=512)",
        pass,
        &format!("argmin amplitude {ca:.2}, phase {cp:.2}, {} grid points, {}", res.points.len(), secs(elapsed)),
    );
}

#[test]
fn criterion_3_pure_sine_floor() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut cfg = ExperimentConfig::default();
    cfg.sweep.n = vec![2048];
    cfg.sweep.cir = vec![0.1];
    let res = run_fig1(&cfg).unwrap();
    let w = res.points[0].worst;
    let pass = w.amplitude <= 1e-10 && w.phase <= 1e-10;
    report(
        3,
        "N=2048, CiR=0.1 errors <= 1e-10",
        pass,
        &format!("amplitude {:.2e}, phase {:.2e} rad, {}", w.amplitude, w.phase, secs(start.elapsed())),
    );
}

#[test]
fn criterion_4_emse_to_bound_ratios() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let cfg = ExperimentConfig::default();
    assert_eq!(cfg.noise.n, 512);
    assert_eq!(cfg.noise.realizations, 10_000);
    let res = run_fig3(&cfg, 20_240_601).unwrap();
    let elapsed = start.elapsed();
    let mut pass = elapsed < Duration::from_secs(600);
    let mut parts = Vec::new();
    for (cir, target) in [(0.7, 1.76), (1.5, 5.25)] {
        let ratios: Vec<f64> = res.at_cir(cir).map(|p| p.ratio_amplitude()).collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        let ok = ratios.len() == 7
            && ratios.iter().all(|r| within(*r, 0.85 * target, 1.15 * target))
            && hi / lo < 1.4;
        pass &= ok;
        parts.push(format!("CiR {cir}: ratio {lo:.3}..{hi:.3} (target {target} +/- 15%)"));
    }
    let above = res.points.iter().all(|p| {
        p.emse_amplitude + p.se_amplitude >= p.crb_amplitude && p.emse_phase + p.se_phase >= p.crb_phase
    });
    pass &= above;
    parts.push(format!("eMSE >= CRB everywhere: {above}"));
    parts.push(secs(elapsed));
    report(4, "eMSE/CRB ratios at N=512, 1e4 realizations", pass, &parts.join(", "));
}

const SETS: usize = 9;
const ROWS: [usize; 4] = [64, 128, 256, 512];

/// Worst amplitude error [%] per record length and harmonic set
/// (2, 3, 4, 5, 6, 7, 2+3, 3+4, 2+3+4): no filter, filter A, filter B.
const REF_AMPLITUDE: [[[f64; SETS]; 4]; 3] = [
    [
        [15.0, 12.0, 9.4, 22.0, 38.0, 48.0, 27.0, 19.0, 31.0],
        [8.9, 20.0, 25.0, 13.0, 7.6, 14.0, 25.0, 45.0, 48.0],
        [14.0, 4.1, 5.1, 6.4, 2.3, 1.1, 11.0, 8.8, 5.9],
        [3.6, 0.18, 0.065, 0.038, 0.025, 0.017, 3.8, 1.9, 3.8],
    ],
    [
        [0.47, 0.43, 0.48, 0.48, 0.67, 0.57, 0.49, 0.47, 0.51],
        [0.45, 0.44, 0.59, 0.45, 0.46, 0.46, 0.46, 0.56, 0.56],
        [0.47, 0.42, 0.45, 0.42, 0.42, 0.42, 0.46, 0.45, 0.5],
        [0.43, 0.42, 0.42, 0.42, 0.42, 0.42, 0.43, 0.42, 0.43],
    ],
    [
        [0.041, 0.045, 0.041, 0.041, 0.059, 0.066, 0.047, 0.046, 0.048],
        [0.039, 0.049, 0.046, 0.039, 0.041, 0.046, 0.051, 0.058, 0.059],
        [0.039, 0.039, 0.039, 0.037, 0.037, 0.037, 0.039, 0.041, 0.039],
        [0.037, 0.037, 0.037, 0.037, 0.037, 0.037, 0.038, 0.037, 0.038],
    ],
];

/// Worst phase error [rad], same layout.
const REF_PHASE: [[[f64; SETS]; 4]; 3] = [
    [
        [1.5e-1, 1.3e-1, 9.5e-2, 2.3e-1, 3.9e-1, 5.1e-1, 2.8e-1, 1.8e-1, 3.2e-1],
        [8.9e-2, 2.0e-1, 2.6e-1, 1.3e-1, 7.3e-2, 1.4e-1, 2.5e-1, 4.6e-1, 5.0e-1],
        [1.4e-1, 4.0e-2, 5.0e-2, 6.4e-3, 2.2e-3, 1.1e-3, 1.1e-1, 8.7e-2, 6.1e-2],
        [3.6e-2, 1.8e-3, 6.5e-4, 3.8e-4, 2.5e-4, 1.7e-4, 3.8e-2, 2.4e-3, 3.8e-2],
    ],
    [
        [5.5e-4, 1.6e-4, 6.3e-4, 6.4e-4, 2.5e-3, 1.6e-3, 7.1e-4, 5.9e-4, 8.7e-4],
        [3.2e-4, 2.6e-4, 1.7e-3, 3.6e-4, 4.3e-4, 4.6e-4, 4.9e-4, 1.5e-3, 1.6e-3],
        [5.1e-4, 4.8e-5, 3.5e-4, 1.8e-5, 1.5e-5, 3.6e-6, 4.6e-4, 3.1e-4, 8.1e-4],
        [1.3e-4, 2.3e-6, 4.5e-6, 1.1e-6, 1.6e-6, 5.5e-7, 1.3e-4, 2.6e-6, 1.3e-4],
    ],
    [
        [2.9e-5, 7.6e-5, 3.3e-5, 3.1e-5, 2.2e-4, 2.9e-4, 1.1e-4, 9.3e-5, 1.2e-4],
        [1.7e-5, 1.2e-4, 9.2e-5, 1.8e-5, 3.8e-5, 8.6e-5, 1.3e-4, 2.1e-4, 2.2e-4],
        [2.6e-5, 2.3e-5, 1.8e-5, 9.1e-7, 1.3e-6, 6.8e-7, 1.2e-5, 4.1e-5, 1.7e-5],
        [6.9e-6, 1.1e-6, 2.4e-7, 5.4e-8, 1.4e-7, 1.1e-7, 7.9e-6, 1.3e-6, 8.1e-6],
    ],
];

#[test]
fn criterion_5_harmonic_tables() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let cfg = ExperimentConfig::default();
    assert_eq!(cfg.tables.n, ROWS.to_vec());
    let res = run_tables(&cfg).unwrap();
    let elapsed = start.elapsed();
    let filters = [FilterKind::None, FilterKind::A, FilterKind::B];
    let mut misses = Vec::new();
    let mut checked = 0;
    let mut ours = [[[(0.0, 0.0); SETS]; 4]; 3];
    for (fi, &kind) in filters.iter().enumerate() {
        for (ri, &n) in ROWS.iter().enumerate() {
            for (si, set) in cfg.tables.harmonic_sets.iter().enumerate() {
                let cell = res.get(n, kind, set).expect("cell present");
                ours[fi][ri][si] = (cell.amplitude_pct, cell.phase);
                let (ra, rp) = (REF_AMPLITUDE[fi][ri][si], REF_PHASE[fi][ri][si]);
                let (ok_a, ok_p) = if kind == FilterKind::None {
                    (
                        (cell.amplitude_pct / ra - 1.0).abs() <= 0.3,
                        (cell.phase / rp - 1.0).abs() <= 0.5,
                    )
                } else {
                    (
                        within(cell.amplitude_pct / ra, 0.1, 10.0),
                        within(cell.phase / rp, 0.1, 10.0),
                    )
                };
                checked += 2;
                let label = format!("{}/N{}/{}", ipdft_label(kind), n, cell.harmonics_label());
                if !ok_a {
                    misses.push(format!("amp {label}: {:.3} vs {ra}", cell.amplitude_pct));
                }
                if !ok_p {
                    misses.push(format!("phase {label}: {:.2e} vs {rp:.1e}", cell.phase));
                }
            }
        }
    }
    let row_max = |fi: usize, ri: usize, pick: fn(&(f64, f64)) -> f64| {
        ours[fi][ri].iter().map(pick).fold(0.0, f64::max)
    };
    let mut order_ok = true;
    for ri in 0..4 {
        for pick in [(|c: &(f64, f64)| c.0) as fn(&(f64, f64)) -> f64, |c| c.1] {
            order_ok &= row_max(0, ri, pick) > row_max(1, ri, pick) && row_max(1, ri, pick) > row_max(2, ri, pick);
        }
        for si in 0..SETS {
            order_ok &= ours[0][ri][si].1 > ours[1][ri][si].1 && ours[1][ri][si].1 > ours[2][ri][si].1;
        }
    }
    let pass = misses.is_empty() && order_ok && elapsed < Duration::from_secs(900);
    let detail = format!(
        "{} of {checked} cells outside tolerance [{}], ordering none > A > B: {order_ok}, {}",
        misses.len(),
        misses.join("; "),
        secs(elapsed)
    );
    report(5, "harmonic tables against reference values", pass, &detail);
}

fn ipdft_label(kind: FilterKind) -> &'static str {
    match kind {
        FilterKind::None => "none",
        FilterKind::A => "A",
        FilterKind::B => "B",
        FilterKind::File => "file",
    }
}

#[test]
fn criterion_6_step_transients() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let cfg = ExperimentConfig::default();
    assert_eq!(cfg.transient.bits, 16);
    let res = run_transient(&cfg).unwrap();
    let elapsed = start.elapsed();
    let mut pass = elapsed < Duration::from_secs(60);
    let mut parts = Vec::new();
    for (n, phase_centre) in [(64, 0.52), (128, 0.61), (256, 0.71)] {
        let row = res.row(n).unwrap();
        let a = row.amplitude_settle_nt().unwrap_or(f64::NAN);
        let p = row.phase_settle_nt().unwrap_or(f64::NAN);
        let ok_a = within(a, 0.78 - 0.15, 0.82 + 0.15);
        let ok_p = within(p, phase_centre - 0.15, phase_centre + 0.15);
        pass &= ok_a && ok_p;
        parts.push(format!(
            "N={n}: amp {a:.3} NT{} phase {p:.3} NT{}",
            if ok_a { "" } else { " (out)" },
            if ok_p { "" } else { " (out)" }
        ));
    }
    let peak = res.row(64).unwrap().phase_peak;
    let ok_spike = peak <= 1.1 * PI / 2.0;
    pass &= ok_spike;
    parts.push(format!("N=64 phase peak {peak:.3} rad (limit {:.3})", 1.1 * PI / 2.0));
    parts.push(secs(elapsed));
    report(6, "16-bit step settle times and spike", pass, &parts.join(", "));
}

#[test]
fn criterion_7_combined_disturbances() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let cfg = ExperimentConfig::default();
    assert_eq!(cfg.combined.filter, FilterKind::A);
    let res = run_combined(&cfg, 20_240_601).unwrap();
    let elapsed = start.elapsed();
    let mut pass = (res.thd - 0.38).abs() <= 0.01 && (res.snr_db - 53.0).abs() <= 0.5;
    pass &= elapsed < Duration::from_secs(60);
    let mut parts = vec![format!("THD {:.1}%, SNR {:.1} dB", 100.0 * res.thd, res.snr_db)];
    for (n, phase_limit) in [(512, 8.5e-2), (256, 8e-2)] {
        let row = res.row(n).unwrap();
        let ok = row.failed == 0 && row.after.points > 0 && row.after.amplitude <= 0.01 && row.after.phase <= phase_limit;
        pass &= ok;
        parts.push(format!(
            "N={n}: amp {:.3}% phase {:.2e} rad over {} windows, {} failed (onset transient {:.2}% / {:.2e} rad, no drift {:.3}% / {:.2e} rad)",
            100.0 * row.after.amplitude,
            row.after.phase,
            row.after.points,
            row.failed,
            100.0 * row.transient.amplitude,
            row.transient.phase,
            100.0 * row.baseline.amplitude,
            row.baseline.phase,
        ));
    }
    parts.push(secs(elapsed));
    report(7, "harmonics + noise + drift through filter A", pass, &parts.join(", "));
}

fn direct_dtft(x: &[f64], w: &[f64], k: usize) -> Complex64 {
    let n = x.len();
    (0..n)
        .map(|i| {
            let arg = -2.0 * PI * ((i * k) % n) as f64 / n as f64;
            Complex64::new(arg.cos(), arg.sin()) * x[i] * w[i]
        })
        .sum()
}

#[test]
fn criterion_8_oracle_equivalence() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut parts = Vec::new();

    let mut fft_err: f64 = 0.0;
    for &n in &[64usize, 256, 1024] {
        for order in 2..=4 {
            let est = Estimator::new(EstimatorConfig::new(order, n, 1.0)).unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fast = est.dft().transform(&x).unwrap();
            let scale = fast.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for k in 0..n {
                let slow = direct_dtft(&x, est.dft().window(), k);
                fft_err = fft_err.max((fast[k] - slow).norm() / scale);
            }
        }
    }
    let ok_fft = fft_err <= 1e-10;
    parts.push(format!("FFT vs direct sum {fft_err:.1e}"));

    let n = 512;
    let mut closed_err: f64 = 0.0;
    for _ in 0..200 {
        let lambda = rng.gen_range(0.05..1.95);
        let phi = rng.gen_range(0.0..2.0 * PI);
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * lambda * i as f64 / n as f64 + phi).sin()).collect();
        let known = Estimator::new(
            EstimatorConfig::new(2, n, 1.0).with_frequency(FrequencyMode::Known(lambda)).with_max_cir(1.9),
        )
        .unwrap();
        let e = known.estimate(&x).unwrap();
        let t = known.dft().triplet(&x, 1).unwrap();
        let amp = amplitude_closed_form_h2(t.bins[0], t.bins[1], lambda, n);
        let root = amp * Complex64::from_polar(1.0, -PI * lambda);
        let ph = phase_closed_form_h2(t.bins[0], t.bins[1], lambda, n, root);
        let ph_neg = phase_closed_form_h2(t.bins[0], t.bins[1], lambda, n, -root);
        let dphi = wrap_phase(ph - e.phase).abs().min(wrap_phase(ph_neg - e.phase).abs());
        let general_l = estimate_frequency(&t).unwrap();
        let closed_l = frequency_closed_form_h2(&t.bins);
        closed_err = closed_err
            .max((amp.norm() - e.amplitude).abs() / e.amplitude)
            .max(dphi)
            .max((closed_l - general_l).abs() / general_l);
    }
    let ok_closed = closed_err <= 1e-10;
    parts.push(format!("closed forms vs general solver {closed_err:.1e}"));

    let fs = 24000.0;
    let x: Vec<f64> = (0..6000)
        .map(|i| {
            let t = i as f64 / fs;
            (2.0 * PI * 50.0 * t + 0.4).sin() + 0.1 * (2.0 * PI * 150.0 * t).sin() + 0.01 * rng.gen_range(-1.0..1.0)
        })
        .collect();
    let mut mismatches = 0;
    let mut compared = 0;
    let taps: Vec<f64> = (0..101).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / 100.0).cos()).collect();
    let sum: f64 = taps.iter().sum();
    let smooth = FirFilter::new(taps.iter().map(|t| t / sum).collect(), fs).unwrap();
    for filter in [None, Some(smooth)] {
        let mut cfg = StreamConfig::new(256, fs, 2).with_max_cir(1.9);
        let input = match &filter {
            Some(f) => {
                cfg = cfg.with_filter(f.clone());
                ipdft::prefilter::convolve(&f.taps, &x)
            }
            None => x.clone(),
        };
        let delay = filter.as_ref().map_or(0, |f| f.order() / 2);
        let trace = run_stream(&cfg, &x, 0.0).unwrap();
        let batch = Estimator::new(cfg.estimator()).unwrap();
        for p in trace.valid() {
            let newest = (p.t * fs).round() as usize + delay;
            let window = &input[newest + 1 - 256..=newest];
            let b = batch.estimate(window).unwrap();
            let s = p.estimate.unwrap();
            compared += 1;
            if s.amplitude.to_bits() != b.amplitude.to_bits()
                || s.phase.to_bits() != b.phase.to_bits()
                || s.lambda.to_bits() != b.lambda.to_bits()
            {
                mismatches += 1;
            }
        }
    }
    let ok_stream = mismatches == 0 && compared > 0;
    parts.push(format!("streaming vs batch: {mismatches} of {compared} windows differ"));
    report(8, "oracle equivalence", ok_fft && ok_closed && ok_stream, &parts.join(", "));
}
