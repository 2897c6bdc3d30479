//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line prints during
//! `cargo test`. Exits nonzero if any criterion fails.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use deadair_core::audio::mulaw::{decode_sample, encode_sample};
use deadair_core::audio::{encode_mulaw, normalize_clip, write_wav_pcm16};
use deadair_core::dsp::fft;
use deadair_core::eval::{cross_validate, metrics, ConfusionCounts, CvConfig, ModelKind, Sweep};
use deadair_core::factorization::{extract_features_from_matrix, svd};
use deadair_core::learn::{train_forest, ForestModel, TreeNode};
use deadair_core::synth::{gen_deadair, gen_digital_silence, gen_ham, DeadAirParams, HamParams};
use deadair_core::{
    Dataset, Detector, Featurizer, ForestParams, Label, Matrix, Model, SilencePolicy,
};
use deadair_service::{AppState, StatsReport, Verdict};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($fmt)+));
        }
    };
}

// Linear output of the G.191 reference μ-law expander, indexed by code.
const G191_ULAW: [i16; 256] = [
    -32124, -31100, -30076, -29052, -28028, -27004, -25980, -24956, -23932, -22908, -21884, -20860,
    -19836, -18812, -17788, -16764, -15996, -15484, -14972, -14460, -13948, -13436, -12924, -12412,
    -11900, -11388, -10876, -10364, -9852, -9340, -8828, -8316, -7932, -7676, -7420, -7164, -6908,
    -6652, -6396, -6140, -5884, -5628, -5372, -5116, -4860, -4604, -4348, -4092, -3900, -3772,
    -3644, -3516, -3388, -3260, -3132, -3004, -2876, -2748, -2620, -2492, -2364, -2236, -2108,
    -1980, -1884, -1820, -1756, -1692, -1628, -1564, -1500, -1436, -1372, -1308, -1244, -1180,
    -1116, -1052, -988, -924, -876, -844, -812, -780, -748, -716, -684, -652, -620, -588, -556,
    -524, -492, -460, -428, -396, -372, -356, -340, -324, -308, -292, -276, -260, -244, -228, -212,
    -196, -180, -164, -148, -132, -120, -112, -104, -96, -88, -80, -72, -64, -56, -48, -40, -32,
    -24, -16, -8, 0, 32124, 31100, 30076, 29052, 28028, 27004, 25980, 24956, 23932, 22908, 21884,
    20860, 19836, 18812, 17788, 16764, 15996, 15484, 14972, 14460, 13948, 13436, 12924, 12412,
    11900, 11388, 10876, 10364, 9852, 9340, 8828, 8316, 7932, 7676, 7420, 7164, 6908, 6652, 6396,
    6140, 5884, 5628, 5372, 5116, 4860, 4604, 4348, 4092, 3900, 3772, 3644, 3516, 3388, 3260, 3132,
    3004, 2876, 2748, 2620, 2492, 2364, 2236, 2108, 1980, 1884, 1820, 1756, 1692, 1628, 1564, 1500,
    1436, 1372, 1308, 1244, 1180, 1116, 1052, 988, 924, 876, 844, 812, 780, 748, 716, 684, 652,
    620, 588, 556, 524, 492, 460, 428, 396, 372, 356, 340, 324, 308, 292, 276, 260, 244, 228, 212,
    196, 180, 164, 148, 132, 120, 112, 104, 96, 88, 80, 72, 64, 56, 48, 40, 32, 24, 16, 8, 0,
];

fn main() {
    let criteria: [Criterion; 10] = [
        ("table-format", table_format),
        ("synthetic-end-to-end", synthetic_end_to_end),
        ("fft-oracle", fft_oracle),
        ("svd-contract", svd_contract),
        ("feature-invariance", feature_invariance),
        ("metrics-identity", metrics_identity),
        ("forest-determinism", forest_determinism),
        ("mulaw-codec", mulaw_codec),
        ("digital-silence", digital_silence),
        ("service-latency", service_latency),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn clusters(n: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Dataset::new(dim);
    for i in 0..n {
        let spam = i % 4 == 0;
        let shift = if spam { 0.3 } else { -0.3 };
        let x: Vec<f64> = (0..dim)
            .map(|_| shift + rng.random_range(-1.0..1.0))
            .collect();
        d.push(&x, if spam { Label::Spam } else { Label::Ham })
            .unwrap();
    }
    d
}

fn table_format() -> Outcome {
    let data = clusters(80, 6, 1);
    let cfg = CvConfig {
        n_splits: 3,
        test_fraction: 0.25,
        seed: 1,
    };
    let sweep = Sweep::parse("n_trees=10,100").unwrap();
    let report = cross_validate(
        &data,
        &ModelKind::forest(ForestParams::default()),
        &sweep,
        &cfg,
    )
    .map_err(|e| e.to_string())?;
    let table = report.render_table();
    let lines: Vec<&str> = table.lines().collect();
    ensure!(
        lines.len() == 3,
        "expected header + 2 rows, got {}",
        lines.len()
    );
    ensure!(
        lines[0] == "Model | n_trees | Precision | Recall | Accuracy",
        "header {:?}",
        lines[0]
    );
    for row in &lines[1..] {
        let cells: Vec<&str> = row.split(" | ").collect();
        ensure!(
            cells.len() == 5 && cells[0] == "Random Forest",
            "row {row:?}"
        );
        for c in &cells[2..] {
            let (whole, frac) = c
                .split_once('.')
                .ok_or(format!("cell {c:?} lacks decimals"))?;
            ensure!(
                frac.len() == 2 && whole.chars().all(|ch| ch.is_ascii_digit()),
                "cell {c:?}"
            );
            let v: f64 = c.parse().unwrap();
            ensure!((0.0..=100.0).contains(&v), "cell {c:?} out of range");
        }
    }
    let mut csv = Vec::new();
    report.write_csv(&mut csv).map_err(|e| e.to_string())?;
    let header = String::from_utf8(csv)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    ensure!(
        header == "setting,split,precision,recall,accuracy",
        "csv header {header:?}"
    );
    Ok(format!("{:?}", lines[1]))
}

fn deadair_bin(args: &[&str], cwd: &Path) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_deadair"))
        .args(args)
        .current_dir(cwd)
        .env_remove("DEADAIR_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.success(),
        "deadair {args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn synthetic_end_to_end() -> Outcome {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    deadair_bin(&["--seed", "2024", "synth", "-o", "corpus"], d)?;
    deadair_bin(&["featurize", "corpus", "-o", "features.csv"], d)?;
    deadair_bin(
        &[
            "--seed",
            "2024",
            "crossval",
            "-f",
            "features.csv",
            "--sweep",
            "n_trees=100",
            "--splits",
            "10",
            "-o",
            "cv",
        ],
        d,
    )?;
    let elapsed = started.elapsed();
    let report: serde_json::Value = serde_json::from_slice(
        &std::fs::read(d.join("cv/report.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let s = &report["report"]["settings"][0];
    let accuracy = s["accuracy"]["mean"].as_f64().ok_or("missing accuracy")?;
    let precision = s["precision"]["mean"].as_f64().ok_or("missing precision")?;
    let cells = report["report"]["cells"].as_array().map_or(0, Vec::len);
    ensure!(cells == 10, "expected 10 CV cells, got {cells}");
    let detail = format!(
        "accuracy {:.4}, precision {:.4}, recall {:.4}, {:.0}s",
        accuracy,
        precision,
        s["recall"]["mean"].as_f64().unwrap_or(f64::NAN),
        elapsed.as_secs_f64()
    );
    ensure!(accuracy >= 0.95 && precision >= 0.95, "{detail}");
    ensure!(elapsed <= Duration::from_secs(300), "too slow: {detail}");
    Ok(detail)
}

fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(l, &v)| {
                    let angle = -2.0 * std::f64::consts::PI * ((l * k) % n) as f64 / n as f64;
                    v * Complex64::new(angle.cos(), angle.sin())
                })
                .sum()
        })
        .collect()
}

fn fft_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for n in [8usize, 64, 256] {
        for _ in 0..500 {
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let got = fft(&x).map_err(|e| e.to_string())?;
            let want = naive_dft(&x);
            let diff: f64 = got
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let scale: f64 = want.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(diff / scale);
        }
    }
    ensure!(worst <= 1e-9, "worst relative error {worst:e}");
    Ok(format!("1500 inputs, worst relative error {worst:.2e}"))
}

fn eigen_oracle(x: &Matrix) -> Vec<f64> {
    let m = DMatrix::from_row_slice(x.rows(), x.cols(), x.as_slice());
    let gram = if x.rows() >= x.cols() {
        m.transpose() * &m
    } else {
        &m * m.transpose()
    };
    let mut s: Vec<f64> = gram
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn gram_deviation(m: &Matrix) -> f64 {
    let g = m.transpose().matmul(m);
    let mut worst: f64 = 0.0;
    for r in 0..g.rows() {
        for c in 0..g.cols() {
            worst = worst.max((g[(r, c)] - if r == c { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

fn svd_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut recon, mut orth, mut sigma): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..200 {
        let (rows, cols) = if i < 10 {
            (129, 124)
        } else {
            (rng.random_range(1..=129), rng.random_range(1..=124))
        };
        let x = Matrix::from_fn(rows, cols, |_, _| rng.random_range(0.0..1.0));
        let r = svd(&x);
        let approx = r.reconstruct();
        let diff: f64 = x
            .as_slice()
            .iter()
            .zip(approx.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        recon = recon.max(diff / x.frobenius_norm());
        orth = orth.max(gram_deviation(&r.u)).max(gram_deviation(&r.v));
        ensure!(
            r.singular_values.windows(2).all(|w| w[0] >= w[1]),
            "matrix {i} ({rows}x{cols}): not descending"
        );
        for (s, o) in r.singular_values.iter().zip(eigen_oracle(&x)) {
            sigma = sigma.max((s - o).abs());
        }
    }
    let detail =
        format!("reconstruction {recon:.1e}, orthogonality {orth:.1e}, oracle gap {sigma:.1e}");
    ensure!(recon <= 1e-6 && orth <= 1e-8 && sigma <= 1e-6, "{detail}");
    Ok(detail)
}

fn feature_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let x = Matrix::from_fn(129, 124, |_, _| rng.random_range(0.0..1.0f64).powi(2));
        let base = extract_features_from_matrix(&x, 3).map_err(|e| e.to_string())?;
        let again = extract_features_from_matrix(&x, 3).map_err(|e| e.to_string())?;
        ensure!(base == again, "matrix {i}: repeated extraction differs");
        for c in [0.5, 2.0, 10.0] {
            let scaled =
                extract_features_from_matrix(&x.scaled(c), 3).map_err(|e| e.to_string())?;
            for (a, b) in base.values.iter().zip(&scaled.values) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    ensure!(worst <= 1e-8, "worst deviation {worst:e}");
    Ok(format!(
        "100 matrices x 3 scales, worst deviation {worst:.1e}"
    ))
}

fn metrics_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10_000 {
        let mut c = ConfusionCounts {
            tp: rng.random_range(0..1000),
            fp: rng.random_range(0..1000),
            tn: rng.random_range(0..1000),
            fn_: rng.random_range(0..1000),
        };
        if c.total() == 0 {
            c.tn = 1;
        }
        let m = metrics(&c).map_err(|e| e.to_string())?;
        let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let accuracy = (tp + tn) / (tp + fp + tn + fn_);
        ensure!(
            (m.precision - precision).abs() <= 1e-12
                && (m.recall - recall).abs() <= 1e-12
                && (m.accuracy - accuracy).abs() <= 1e-12,
            "mismatch on {c:?}"
        );
    }
    let m = metrics(&ConfusionCounts {
        tp: 9,
        fp: 1,
        tn: 87,
        fn_: 3,
    })
    .map_err(|e| e.to_string())?;
    ensure!(
        (m.precision - 0.90).abs() <= 1e-12
            && (m.recall - 0.75).abs() <= 1e-12
            && (m.accuracy - 0.96).abs() <= 1e-12,
        "worked example gave {m:?}"
    );
    Ok("10^4 tables exact; worked example (0.90, 0.75, 0.96)".into())
}

fn forest_determinism() -> Outcome {
    let data = clusters(300, 387, 7);
    let params = |n_trees| ForestParams {
        n_trees,
        seed: 42,
        ..ForestParams::default()
    };
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for name in ["a.json", "b.json"] {
        let model = Model::Forest(train_forest(&data, &params(100)).map_err(|e| e.to_string())?);
        let path = dir.path().join(name);
        deadair_core::learn::save_model(&model, &path).map_err(|e| e.to_string())?;
        files.push(std::fs::read(path).map_err(|e| e.to_string())?);
    }
    ensure!(files[0] == files[1], "model files differ");
    let big = train_forest(&data, &params(100)).map_err(|e| e.to_string())?;
    let small = train_forest(&data, &params(50)).map_err(|e| e.to_string())?;
    ensure!(small.trees[..] == big.trees[..50], "first 50 trees differ");
    Ok(format!(
        "{} byte model files identical; 50-tree forest is a prefix of 100",
        files[0].len()
    ))
}

fn mulaw_codec() -> Outcome {
    for code in 0..=255u8 {
        let v = decode_sample(code);
        ensure!(
            v == G191_ULAW[code as usize],
            "code {code:#04x} decodes to {v}"
        );
        let back = encode_sample(v);
        if code == 0x7F || code == 0xFF {
            ensure!(
                back == 0x7F || back == 0xFF,
                "zero alias {code:#04x} encodes to {back:#04x}"
            );
        } else {
            ensure!(back == code, "code {code:#04x} round-trips to {back:#04x}");
        }
    }
    Ok("256 codes match reference; 254 round-trip, zero aliases map to zero".into())
}

fn constant_forest(dim: usize) -> Model {
    Model::Forest(ForestModel {
        n_trees: 1,
        max_features: 1,
        min_samples_leaf: 1,
        seed: 0,
        feature_dim: dim,
        trees: vec![TreeNode::Leaf { counts: [1, 0] }],
    })
}

fn digital_silence() -> Outcome {
    let featurizer = Featurizer::default();
    let dim = featurizer.feature_dim();
    let detector = Detector::new(featurizer, constant_forest(dim), SilencePolicy::Spam)
        .map_err(|e| e.to_string())?;
    let mut flagged = 0;
    for clip in gen_digital_silence(100, Label::Spam) {
        let c = detector
            .classify(&normalize_clip(&clip.samples).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        if c.digital_silence && c.degenerate && c.label == Label::Spam {
            flagged += 1;
        }
    }
    let calls = detector.featurizer().svd_calls();
    ensure!(
        flagged == 100 && calls == 0,
        "{flagged}/100 flagged, {calls} SVD calls"
    );
    Ok("100/100 flagged digital_silence, 0 SVD calls".into())
}

fn service_model(dir: &Path) -> Result<std::path::PathBuf, String> {
    let f = Featurizer::default();
    let mut data = Dataset::new(f.feature_dim());
    let clips = gen_deadair(77, 40, &DeadAirParams::default())
        .into_iter()
        .chain(gen_ham(77, 40, &HamParams::default()));
    for c in clips {
        let clip = normalize_clip(&c.samples).map_err(|e| e.to_string())?;
        data.push(
            &f.features(&clip).map_err(|e| e.to_string())?.values,
            c.label,
        )
        .map_err(|e| e.to_string())?;
    }
    let model = Model::Forest(
        train_forest(
            &data,
            &ForestParams {
                seed: 77,
                ..ForestParams::default()
            },
        )
        .map_err(|e| e.to_string())?,
    );
    let path = dir.join("model.json");
    deadair_core::learn::save_model(&model, &path).map_err(|e| e.to_string())?;
    Ok(path)
}

struct Body {
    call_id: String,
    content_type: &'static str,
    bytes: Vec<u8>,
}

fn service_bodies() -> Vec<Body> {
    let mut bodies = Vec::new();
    let clips = gen_deadair(9000, 8, &DeadAirParams::default())
        .into_iter()
        .chain(gen_ham(9000, 8, &HamParams::default()))
        .chain(gen_digital_silence(1, Label::Spam));
    for (i, c) in clips.enumerate() {
        let (content_type, bytes) = if i % 3 == 0 {
            let mut wav = Vec::new();
            write_wav_pcm16(&mut wav, &c.samples).unwrap();
            ("audio/wav", wav)
        } else {
            ("audio/basic", encode_mulaw(&c.samples))
        };
        bodies.push(Body {
            call_id: c.call_id,
            content_type,
            bytes,
        });
    }
    bodies
}

type Key = (Label, u64, bool, bool);

fn service_latency() -> Outcome {
    const CLIENTS: usize = 32;
    const DURATION: Duration = Duration::from_secs(60);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let model = service_model(dir.path())?;
    let state = Arc::new(
        AppState::from_model_file(&model, SilencePolicy::Spam).map_err(|e| e.to_string())?,
    );

    let server_rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?;
    let listener = server_rt
        .block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))
        .map_err(|e| e.to_string())?;
    let addr = listener.local_addr().map_err(|e| e.to_string())?;
    let (stop_tx, stop_rx) = tokio::sync::oneshot::channel::<()>();
    let server = server_rt.spawn(deadair_service::serve(
        listener,
        Arc::clone(&state),
        async {
            let _ = stop_rx.await;
        },
    ));

    let bodies = Arc::new(service_bodies());
    let client_rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?;
    let base = format!("http://{addr}");
    let results = client_rt.block_on(async {
        let client = reqwest::Client::new();
        let deadline = Instant::now() + DURATION;
        let mut tasks = Vec::new();
        for worker in 0..CLIENTS {
            let client = client.clone();
            let bodies = Arc::clone(&bodies);
            let url = format!("{base}/v1/classify");
            tasks.push(tokio::spawn(async move {
                let mut seen: Vec<(usize, Key)> = Vec::new();
                let mut round_trips = Vec::new();
                let mut failures = 0usize;
                let mut k = worker;
                while Instant::now() < deadline {
                    let i = k % bodies.len();
                    k += 1;
                    let b = &bodies[i];
                    let sent = Instant::now();
                    let resp = client
                        .post(&url)
                        .header("content-type", b.content_type)
                        .header("x-call-id", &b.call_id)
                        .body(b.bytes.clone())
                        .send()
                        .await;
                    let verdict = match resp {
                        Ok(r) if r.status().is_success() => r
                            .bytes()
                            .await
                            .ok()
                            .and_then(|x| serde_json::from_slice::<Verdict>(&x).ok()),
                        _ => None,
                    };
                    round_trips.push(sent.elapsed().as_secs_f64() * 1000.0);
                    match verdict {
                        Some(v) if v.call_id == b.call_id => seen.push((
                            i,
                            (v.label, v.score.to_bits(), v.degenerate, v.digital_silence),
                        )),
                        _ => failures += 1,
                    }
                }
                (seen, round_trips, failures)
            }));
        }
        let mut out = Vec::new();
        for t in tasks {
            out.push(t.await.expect("client task"));
        }
        let raw = client
            .get(format!("{base}/v1/stats"))
            .send()
            .await
            .expect("stats request")
            .bytes()
            .await
            .expect("stats body");
        let stats: StatsReport = serde_json::from_slice(&raw).expect("stats json");
        (out, stats)
    });
    let _ = stop_tx.send(());
    let _ = server_rt.block_on(server);

    let (per_client, stats) = results;
    let mut verdicts: HashMap<usize, Key> = HashMap::new();
    let mut inconsistent = 0usize;
    let mut failures = 0usize;
    let mut round_trips = Vec::new();
    for (seen, rt, f) in per_client {
        failures += f;
        round_trips.extend(rt);
        for (i, key) in seen {
            if *verdicts.entry(i).or_insert(key) != key {
                inconsistent += 1;
            }
        }
    }
    round_trips.sort_by(f64::total_cmp);
    let client_p99 = deadair_service::percentile(&round_trips, 99.0);
    let expected_labels = bodies.iter().enumerate().all(|(i, b)| {
        let want = if b.call_id.starts_with("ham") {
            Label::Ham
        } else {
            Label::Spam
        };
        verdicts.get(&i).map(|v| v.0) == Some(want)
    });
    let detail = format!(
        "{} requests, server p50/p95/p99 {:.1}/{:.1}/{:.1} ms, client round-trip p99 {:.0} ms, {} failures, {} inconsistent",
        stats.requests, stats.p50_processing_ms, stats.p95_processing_ms, stats.p99_processing_ms, client_p99, failures, inconsistent
    );
    ensure!(failures == 0 && stats.errors == 0, "{detail}");
    ensure!(inconsistent == 0, "{detail}");
    ensure!(expected_labels, "unexpected label for some body; {detail}");
    ensure!(stats.p99_processing_ms < 200.0, "{detail}");
    Ok(detail)
}
