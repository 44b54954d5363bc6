// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex, FftPlanner};

use cough_ssl::dataset::{read_labels, write_labels, AudioSignal};
use cough_ssl::dsp::{design_butterworth_lowpass, resample, BiquadCascade};
use cough_ssl::ml::{
    aggregate_logit_mean, aggregate_logit_median, fit_logistic, fleiss_kappa, jensen_shannon, roc_auc, ClassWeight,
    LogisticProblem, Standardizer, JS_BINS,
};
use cough_ssl::pipeline::{run_all, PipelineConfig, BAND_TESTS_CSV, COVERAGE_CSV, LABELS_CSV, METRICS_CSV};
use cough_ssl::segmentation::{segment_coughs, SegmentationParams};
use cough_ssl::ssl::{scheme_labels, AgreementScheme, LabelScheme};
use cough_ssl::synth::{generate, simulate_cough_features, CoughFeatureSim, SynthConfig};
use cough_ssl::tpe::{optimize, SearchSpace, TpeSettings};

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    check(
        elapsed.as_secs_f64() < limit_s as f64,
        format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64()),
    )
}

// 1. Butterworth gains and tone frequency after resampling.

fn peak_bin(x: &[f64]) -> usize {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    (1..buf.len() / 2).max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm())).unwrap()
}

fn cascade_gain(lp: &BiquadCascade, f: f64, fs: f64) -> f64 {
    let z1 = Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * f / fs);
    let z2 = z1 * z1;
    lp.sections
        .iter()
        .map(|s| ((s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2)).norm())
        .product()
}

fn dsp() -> Outcome {
    let start = Instant::now();
    let mut worst_cut = 0.0f64;
    let mut worst_dc = 0.0f64;
    for order in 1..=8 {
        for &(fc, fs) in &[(6000.0, 48000.0), (6000.0, 44100.0), (1000.0, 12000.0), (50.0, 12000.0), (3000.0, 8000.0)] {
            let lp = design_butterworth_lowpass(order, fc, fs).map_err(|e| e.to_string())?;
            worst_cut = worst_cut.max((cascade_gain(&lp, fc, fs) - std::f64::consts::FRAC_1_SQRT_2).abs());
            worst_dc = worst_dc.max((cascade_gain(&lp, 0.0, fs) - 1.0).abs());
            let settled = *lp.filter(&vec![1.0; 20 * fs as usize / fc as usize + 2000]).last().unwrap();
            worst_dc = worst_dc.max((settled - 1.0).abs());
        }
    }
    check(worst_cut <= 1e-6, format!("cutoff gain off by {worst_cut:e}"))?;
    check(worst_dc <= 1e-9, format!("DC gain off by {worst_dc:e}"))?;

    let mut worst_bins = 0.0f64;
    for &(src, dst, f) in &[(48000u32, 12000u32, 1000.0), (44100, 12000, 2500.0), (16000, 12000, 440.0), (8000, 12000, 3100.0), (22050, 12000, 5000.0)] {
        let n = src as usize;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / src as f64).sin()).collect();
        let y = resample(&AudioSignal::new(x, src).unwrap(), dst).map_err(|e| e.to_string())?;
        let m = y.len();
        let bin_hz = dst as f64 / m as f64;
        let got = peak_bin(y.samples()) as f64 * bin_hz;
        worst_bins = worst_bins.max((got - f).abs() / bin_hz);
    }
    check(worst_bins <= 1.0, format!("tone moved by {worst_bins:.2} bins"))?;
    within(start.elapsed(), 10)?;
    Ok(format!("cutoff err {worst_cut:.1e}, DC err {worst_dc:.1e}, tone err {worst_bins:.2} bins"))
}

// 2. Segmenter vs a sample-by-sample reference.

fn reference_segments(x: &[f64], p: &SegmentationParams, rate: u32) -> Vec<(usize, usize)> {
    let ms = |v: f64| ((v * rate as f64 / 1000.0).round() as usize).max(1);
    let (tol, min_len, pad, win) = (ms(p.tolerance_ms), ms(p.min_cough_ms), ms(p.pad_ms), ms(p.power_window_ms));
    let n = x.len();
    let mean_power = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let (lower, upper) = (p.lower_mult * mean_power, p.upper_mult * mean_power);
    let env = |i: usize| {
        let lo = i.saturating_sub(win / 2);
        let hi = (lo + win).min(n);
        x[lo..hi].iter().map(|v| v * v).sum::<f64>() / (hi - lo) as f64
    };

    let mut raw = Vec::new();
    let mut active = false;
    let mut run = 0;
    let mut onset = 0;
    for i in 0..n {
        let e = env(i);
        if !active {
            run = if e > upper { run + 1 } else { 0 };
            if run == tol {
                onset = i + 1 - tol;
                active = true;
                run = 0;
            }
        } else {
            run = if e < lower { run + 1 } else { 0 };
            if run == tol {
                raw.push((onset, i + 1 - tol));
                active = false;
                run = 0;
            }
        }
    }
    if active {
        raw.push((onset, n));
    }

    let mut out: Vec<(usize, usize)> = Vec::new();
    for (s, e) in raw {
        if e - s < min_len {
            continue;
        }
        let (s, e) = (s.saturating_sub(pad), (e + pad).min(n));
        match out.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}

fn burst_signal(rng: &mut ChaCha8Rng, rate: u32) -> Vec<f64> {
    let n = rng.random_range(rate as usize / 2..3 * rate as usize);
    let noise = 10f64.powf(rng.random_range(-4.0..-1.5));
    let mut x: Vec<f64> = (0..n).map(|_| noise * (rng.random::<f64>() * 2.0 - 1.0)).collect();
    for _ in 0..rng.random_range(0..5) {
        let len = rng.random_range(rate as usize / 50..rate as usize / 2);
        let at = rng.random_range(0..n);
        let amp = rng.random_range(0.05..1.0);
        let f = rng.random_range(100.0..2000.0);
        for (k, v) in x.iter_mut().skip(at).take(len).enumerate() {
            let w = (std::f64::consts::PI * k as f64 / len as f64).sin();
            *v += amp * w * (2.0 * std::f64::consts::PI * f * k as f64 / rate as f64).sin();
        }
    }
    x
}

fn segmentation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let rate = 12000;
    let mut total = 0;
    for case in 0..1000 {
        let p = SegmentationParams {
            lower_mult: rng.random_range(0.02..0.5),
            upper_mult: rng.random_range(0.8..4.0),
            tolerance_ms: rng.random_range(2.0..20.0),
            min_cough_ms: rng.random_range(20.0..300.0),
            pad_ms: rng.random_range(10.0..300.0),
            power_window_ms: rng.random_range(1.0..20.0),
        };
        let x = burst_signal(&mut rng, rate);
        let fast: Vec<(usize, usize)> = segment_coughs(&AudioSignal::new(x.clone(), rate).unwrap(), &p, "r")
            .into_iter()
            .map(|s| (s.start, s.end))
            .collect();
        let want = reference_segments(&x, &p, rate);
        check(fast == want, format!("signal {case}: {fast:?} vs reference {want:?}"))?;
        total += fast.len();
    }

    let p = SegmentationParams::default();
    let x = burst_signal(&mut ChaCha8Rng::seed_from_u64(9), rate);
    let base = segment_coughs(&AudioSignal::new(x.clone(), rate).unwrap(), &p, "r");
    for _ in 0..100 {
        let a = 10f64.powf(rng.random_range(-3.0..3.0));
        let scaled: Vec<f64> = x.iter().map(|v| a * v).collect();
        let got = segment_coughs(&AudioSignal::new(scaled, rate).unwrap(), &p, "r");
        check(got == base, format!("scale {a} changed the segmentation"))?;
    }
    within(start.elapsed(), 60)?;
    Ok(format!("1000 signals ({total} segments) match, 100 scales invariant"))
}

// 3. AUC, JS, Fleiss kappa, logit aggregation.

fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] && !labels[j] {
                den += 1.0;
                num += if si > sj {
                    1.0
                } else if si == sj {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    num / den
}

fn hand_kappa(ratings: &[Vec<usize>], k: usize) -> f64 {
    let n = ratings[0].len();
    let mut p_bar = 0.0;
    for item in ratings {
        let mut agree = 0;
        for a in 0..n {
            for b in 0..n {
                if a != b && item[a] == item[b] {
                    agree += 1;
                }
            }
        }
        p_bar += agree as f64 / (n * (n - 1)) as f64;
    }
    p_bar /= ratings.len() as f64;
    let total = (ratings.len() * n) as f64;
    let p_e: f64 = (0..k)
        .map(|c| {
            let share = ratings.iter().flatten().filter(|&&r| r == c).count() as f64 / total;
            share * share
        })
        .sum();
    (p_bar - p_e) / (1.0 - p_e)
}

fn metrics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_auc = 0.0f64;
    for trial in 0..50 {
        let scores: Vec<f64> = (0..200)
            .map(|_| if trial % 2 == 0 { rng.random::<f64>() } else { rng.random_range(0..20) as f64 })
            .collect();
        let labels: Vec<bool> = (0..200).map(|i| i < 2 || (i > 3 && rng.random_bool(0.4))).collect();
        let got = roc_auc(&scores, &labels).map_err(|e| e.to_string())?;
        worst_auc = worst_auc.max((got - pairwise_auc(&scores, &labels)).abs());
    }
    check(worst_auc <= 1e-12, format!("AUC off by {worst_auc:e}"))?;

    let mut worst_sym = 0.0f64;
    for _ in 0..50 {
        let a: Vec<f64> = (0..rng.random_range(1..300)).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..rng.random_range(1..300)).map(|_| rng.random::<f64>() * 2.0 - 0.5).collect();
        let ab = jensen_shannon(&a, &b, JS_BINS).map_err(|e| e.to_string())?;
        let ba = jensen_shannon(&b, &a, JS_BINS).map_err(|e| e.to_string())?;
        worst_sym = worst_sym.max((ab - ba).abs());
        let same = jensen_shannon(&a, &a, JS_BINS).map_err(|e| e.to_string())?;
        check(same.abs() <= 1e-6, format!("JS of a sample with itself is {same}"))?;
    }
    check(worst_sym <= 1e-12, format!("JS asymmetry {worst_sym:e}"))?;
    let low: Vec<f64> = (0..100).map(|i| i as f64 / 1000.0).collect();
    let high: Vec<f64> = (0..100).map(|i| 10.0 + i as f64 / 1000.0).collect();
    let disjoint = jensen_shannon(&low, &high, JS_BINS).map_err(|e| e.to_string())?;
    check((disjoint - 1.0).abs() <= 1e-6, format!("disjoint JS = {disjoint}"))?;

    let mut worst_kappa = 0.0f64;
    let mut matrices = 0;
    while matrices < 10 {
        let (items, raters, k) = (rng.random_range(2..7), rng.random_range(2..6), rng.random_range(2..4));
        let ratings: Vec<Vec<usize>> = (0..items).map(|_| (0..raters).map(|_| rng.random_range(0..k)).collect()).collect();
        let first = ratings[0][0];
        if ratings.iter().flatten().all(|&r| r == first) {
            continue;
        }
        let counts: Vec<Vec<usize>> = ratings.iter().map(|it| (0..k).map(|c| it.iter().filter(|&&r| r == c).count()).collect()).collect();
        let got = fleiss_kappa(&counts).map_err(|e| e.to_string())?;
        worst_kappa = worst_kappa.max((got - hand_kappa(&ratings, k)).abs());
        matrices += 1;
    }
    check(worst_kappa <= 1e-12, format!("kappa off by {worst_kappa:e}"))?;
    let aa_ab = fleiss_kappa(&[vec![2, 0], vec![1, 1]]).map_err(|e| e.to_string())?;
    check((aa_ab - hand_kappa(&[vec![0, 0], vec![0, 1]], 2)).abs() <= 1e-12, "(A,A),(A,B) example")?;

    let ln9 = 9f64.ln();
    let mean_cases: [(&[f64], f64); 3] = [(&[0.5, 0.5], 0.0), (&[0.9, 0.9], ln9), (&[0.9, 0.1], 0.0)];
    let median_cases: [(&[f64], f64); 3] = [(&[0.9], ln9), (&[0.1, 0.5, 0.9], 0.0), (&[0.5, 0.9], ln9 / 2.0)];
    for (ps, want) in mean_cases {
        let got = aggregate_logit_mean(ps).map_err(|e| e.to_string())?;
        check((got - want).abs() <= 1e-12, format!("logit mean {ps:?} = {got}"))?;
    }
    for (ps, want) in median_cases {
        let got = aggregate_logit_median(ps).map_err(|e| e.to_string())?;
        check((got - want).abs() <= 1e-12, format!("logit median {ps:?} = {got}"))?;
    }
    Ok(format!("AUC err {worst_auc:.1e}, JS asym {worst_sym:.1e}, disjoint JS {disjoint:.9}, kappa err {worst_kappa:.1e}"))
}

// 4. Logistic gradient and TPE vs random search.

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn optimizers() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for point in 0..50 {
        let d = rng.random_range(1..6);
        let n = rng.random_range(10..60);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        let c = 10f64.powf(rng.random_range(-2.0..1.0));
        let cw = if point % 2 == 0 { ClassWeight::None } else { ClassWeight::Balanced };
        let p = LogisticProblem::new(&x, &y, c, cw);
        let theta: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.5..1.5)).collect();
        let g = p.gradient(&theta);
        for j in 0..=d {
            let h = 1e-5;
            let (mut up, mut down) = (theta.clone(), theta.clone());
            up[j] += h;
            down[j] -= h;
            let fd = (p.value(&up) - p.value(&down)) / (2.0 * h);
            worst = worst.max((fd - g[j]).abs());
        }
    }
    check(worst < 1e-5, format!("gradient vs finite differences {worst:e}"))?;

    let space = SearchSpace::new().uniform("x", 0.0, 1.0);
    let quad = |c: &[cough_ssl::tpe::ParamValue]| Ok((-(c[0].real() - 0.3).powi(2), 0.0));
    let mut tpe_regret = Vec::new();
    let mut rand_regret = Vec::new();
    let mut close = 0;
    for seed in 0..20 {
        let t = optimize(&space, &TpeSettings::default(), 60, seed, quad).map_err(|e| e.to_string())?;
        let r = optimize(&space, &TpeSettings::random_search(), 60, seed, quad).map_err(|e| e.to_string())?;
        if (t.best_trial().config[0].real() - 0.3).abs() < 0.05 {
            close += 1;
        }
        tpe_regret.push(-t.best_trial().objective);
        rand_regret.push(-r.best_trial().objective);
    }
    let (mt, mr) = (median(tpe_regret), median(rand_regret));
    check(mt < mr, format!("TPE median regret {mt:e} not below random search {mr:e}"))?;
    check(close >= 18, format!("TPE within 0.05 of optimum in only {close}/20 runs"))?;
    within(start.elapsed(), 120)?;
    Ok(format!("FD err {worst:.1e}, median regret TPE {mt:.1e} vs random {mr:.1e}, {close}/20 near optimum"))
}

// 6. Aggregated vs per-cough AUC.

fn aggregation() -> Outcome {
    let sim = CoughFeatureSim::default();
    let mut wins = 0;
    let mut gain = 0.0;
    for seed in 0..20u64 {
        let (rows, labels, groups) = simulate_cough_features(&sim, seed);
        let is_test = |g: &str| {
            let id: usize = g.trim_start_matches("rec").parse().unwrap();
            id % 2 == 1
        };
        let train: Vec<usize> = (0..rows.len()).filter(|&i| !is_test(&groups[i])).collect();
        let test: Vec<usize> = (0..rows.len()).filter(|&i| is_test(&groups[i])).collect();
        let xt: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
        let yt: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
        let st = Standardizer::fit(&xt);
        let model = fit_logistic(&st.transform(&xt), &yt, 1.0, ClassWeight::Balanced).map_err(|e| e.to_string())?;

        let probs: Vec<f64> = test.iter().map(|&i| model.predict_proba(&st.transform_row(&rows[i]))).collect();
        let cough_labels: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
        let cough_auc = roc_auc(&probs, &cough_labels).map_err(|e| e.to_string())?;

        let mut per_rec: BTreeMap<&str, (Vec<f64>, bool)> = BTreeMap::new();
        for (k, &i) in test.iter().enumerate() {
            per_rec.entry(groups[i].as_str()).or_insert((Vec::new(), labels[i])).0.push(probs[k]);
        }
        let mut scores = Vec::new();
        let mut rec_labels = Vec::new();
        for (ps, l) in per_rec.values() {
            scores.push(aggregate_logit_mean(ps).map_err(|e| e.to_string())?);
            rec_labels.push(*l);
        }
        let rec_auc = roc_auc(&scores, &rec_labels).map_err(|e| e.to_string())?;
        if rec_auc >= cough_auc {
            wins += 1;
        }
        gain += (rec_auc - cough_auc) / 20.0;
    }
    check(wins >= 15, format!("aggregation helped in only {wins}/20 runs"))?;
    Ok(format!("aggregated >= per-cough in {wins}/20 runs, mean gain {gain:+.3}"))
}

// 5, 7 and 8 share pipeline runs on the synthetic corpus.

fn csv_rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let header = r.headers().unwrap().clone();
    r.records()
        .map(|row| header.iter().zip(row.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

fn num(row: &BTreeMap<String, String>, col: &str) -> f64 {
    row[col].parse().unwrap_or_else(|_| panic!("{col} = {:?}", row[col]))
}

fn run_pipeline(corpus_dir: &Path, out: &str) -> Result<PipelineConfig, String> {
    let mut cfg = PipelineConfig::new(corpus_dir.join("audio"), corpus_dir.join("metadata.csv"), corpus_dir.join(out));
    cfg.training.budget = 30;
    run_all(&cfg).map_err(|e| format!("pipeline failed: {e}"))?;
    Ok(cfg)
}

fn ssl_directional(out: &Path) -> Outcome {
    let records = read_labels(out.join(LABELS_CSV)).map_err(|e| e.to_string())?;
    let annotators: Vec<String> = records[0].expert_or_pseudo.keys().cloned().collect();
    let kept = |s: AgreementScheme| -> Result<BTreeSet<String>, String> {
        Ok(scheme_labels(&records, &annotators, LabelScheme::Agreement(s)).map_err(|e| e.to_string())?.into_keys().collect())
    };
    let (uni, exp, maj) = (kept(AgreementScheme::Universal)?, kept(AgreementScheme::Expert)?, kept(AgreementScheme::Majority)?);
    check(uni.is_subset(&exp) && exp.is_subset(&maj), "kept sets are not nested")?;

    let coverage = csv_rows(&out.join(COVERAGE_CSV));
    let js = |scheme: &str| {
        coverage.iter().find(|r| r["scheme"] == scheme).map(|r| num(r, "mean_js")).ok_or(format!("no {scheme} row"))
    };
    let (j_user, j_uni, j_exp, j_maj) = (js("user")?, js("universal")?, js("expert")?, js("majority")?);
    check(j_uni >= j_exp && j_exp >= j_maj, format!("JS not monotone: {j_uni:.4} {j_exp:.4} {j_maj:.4}"))?;
    check(j_maj >= 1.5 * j_user, format!("majority JS {j_maj:.4} < 1.5 x user JS {j_user:.4}"))?;

    let metrics = csv_rows(&out.join(METRICS_CSV));
    let auc = |model: &str| metrics.iter().find(|r| r["model"] == model).map(|r| num(r, "test_auc_recording")).unwrap();
    let (ssl, raw) = (auc("ssl"), auc("raw"));
    check(ssl >= raw + 0.05, format!("SSL test AUC {ssl:.3} vs raw {raw:.3}"))?;
    Ok(format!(
        "kept {}/{}/{}, JS user {j_user:.4} uni {j_uni:.4} exp {j_exp:.4} maj {j_maj:.4} ({:.2}x), test AUC SSL {ssl:.3} raw {raw:.3}",
        uni.len(),
        exp.len(),
        maj.len(),
        j_maj / j_user
    ))
}

fn psd_contrast(out: &Path) -> Outcome {
    let rows = csv_rows(&out.join(BAND_TESTS_CSV));
    let p = |scheme: &str| {
        rows.iter()
            .find(|r| r["label_scheme"] == scheme && num(r, "band_lo_hz") == 1000.0 && num(r, "band_hi_hz") == 1500.0)
            .map(|r| num(r, "log10_p"))
            .ok_or(format!("no 1000-1500 Hz row for {scheme}"))
    };
    let (user, maj) = (p("user")?, p("majority")?);
    check(maj < -10.0, format!("SSL subset log10 p = {maj:.1}"))?;
    check(user > maj, format!("user log10 p {user:.1} not larger than SSL {maj:.1}"))?;
    Ok(format!("log10 p: SSL subset {maj:.1}, user labels {user:.1}"))
}

fn determinism(a: &Path, b: &Path, scratch: &Path) -> Outcome {
    let ma = std::fs::read(a.join(METRICS_CSV)).map_err(|e| e.to_string())?;
    let mb = std::fs::read(b.join(METRICS_CSV)).map_err(|e| e.to_string())?;
    check(ma == mb, "metrics CSVs differ between identical runs")?;

    let records = read_labels(a.join(LABELS_CSV)).map_err(|e| e.to_string())?;
    let copy = scratch.join("labels_copy.csv");
    write_labels(&records, &copy).map_err(|e| e.to_string())?;
    let back = read_labels(&copy).map_err(|e| e.to_string())?;
    check(back == records, "label table changed on write/read")?;
    let original = std::fs::read(a.join(LABELS_CSV)).map_err(|e| e.to_string())?;
    check(original == std::fs::read(&copy).map_err(|e| e.to_string())?, "rewritten label table differs byte-wise")?;
    Ok(format!("metrics.csv identical ({} bytes), {} label records round-trip", ma.len(), records.len()))
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |n: u32, name: &'static str, r: Outcome| {
        match &r {
            Ok(msg) => println!("criterion {n} PASS  {name}: {msg}"),
            Err(msg) => println!("criterion {n} FAIL  {name}: {msg}"),
        }
        results.push((n, name, r));
    };

    report(1, "dsp", dsp());
    report(2, "segmentation", segmentation());
    report(3, "metric oracles", metrics());
    report(4, "optimizers", optimizers());

    let dir = tempfile::tempdir().expect("tempdir");
    let start = Instant::now();
    let corpus = generate(&SynthConfig::default()).expect("synthetic corpus");
    corpus.write(dir.path()).expect("write corpus");
    let first = run_pipeline(dir.path(), "run_a");
    let elapsed = start.elapsed();
    match &first {
        Ok(cfg) => {
            let r = ssl_directional(&cfg.paths.output_dir).and_then(|msg| {
                within(elapsed, 600)?;
                Ok(format!("{msg}, {:.0} s", elapsed.as_secs_f64()))
            });
            report(5, "ssl relabeling", r);
        }
        Err(e) => report(5, "ssl relabeling", Err(e.clone())),
    }
    report(6, "aggregation", aggregation());
    match &first {
        Ok(cfg) => report(7, "class psd", psd_contrast(&cfg.paths.output_dir)),
        Err(e) => report(7, "class psd", Err(e.clone())),
    }
    let second = run_pipeline(dir.path(), "run_b");
    match (&first, &second) {
        (Ok(a), Ok(b)) => report(8, "determinism", determinism(&a.paths.output_dir, &b.paths.output_dir, dir.path())),
        (Err(e), _) | (_, Err(e)) => report(8, "determinism", Err(e.clone())),
    }

    let failed: Vec<u32> = results.iter().filter(|r| r.2.is_err()).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("all {} criteria pass", results.len());
    } else {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
