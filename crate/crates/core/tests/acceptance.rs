//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits nonzero if any fails.
//!
//! `cargo test --test acceptance -- 3 7` runs only criteria 3 and 7.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use jncld::channel::{ChannelParams, ComplexSample};
use jncld::ldpc::{bp_decode, construct_regular, BitVector, Encoder, LlrVector, ParityCheckMatrix};
use jncld::pnc;
use jncld::relay_sim::{CodeSpec, Scope, SimConfig, Simulator, StoppingRule};
use jncld::RngStream;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_cli(config: &str, out: &Path, workers: usize) -> Result<(), String> {
    let output = Command::new(env!("CARGO_BIN_EXE_jncld"))
        .arg("run")
        .arg(configs_dir().join(config))
        .args([
            "--out",
            out.to_str().unwrap(),
            "--workers",
            &workers.to_string(),
        ])
        .args(["--no-timing", "--quiet"])
        .output()
        .map_err(|e| e.to_string())?;
    if output.status.success() {
        Ok(())
    } else {
        Err(format!(
            "jncld run {config} exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        ))
    }
}

#[derive(Debug)]
struct Row {
    snr_db: f64,
    frame_errors: u64,
    ber: f64,
}

fn read_csv(path: &Path) -> Vec<Row> {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("snr_db,trials,bit_errors,frame_errors,ber,fer,seconds")
    );
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Row {
                snr_db: f[0].parse().unwrap(),
                frame_errors: f[3].parse().unwrap(),
                ber: f[4].parse().unwrap(),
            }
        })
        .collect()
}

/// Pointwise BER(jncld) <= BER(mmse) where both have at least 200 frame errors.
fn ordering(dir: &Path) -> Outcome {
    let j = read_csv(&dir.join("jncld.csv"));
    let m = read_csv(&dir.join("mmse.csv"));
    let mut compared = 0;
    let mut violations = Vec::new();
    for (a, b) in j.iter().zip(&m) {
        assert_eq!(a.snr_db, b.snr_db);
        if a.frame_errors >= 200 && b.frame_errors >= 200 {
            compared += 1;
            if a.ber > b.ber {
                violations.push(format!("{} dB: {:.3e} > {:.3e}", a.snr_db, a.ber, b.ber));
            }
        }
    }
    let detail = format!(
        "{compared} of {} points with >=200 frame errors in both; {}",
        j.len(),
        if violations.is_empty() {
            "jncld never worse".to_string()
        } else {
            violations.join(", ")
        }
    );
    outcome(compared > 0 && violations.is_empty(), detail)
}

fn uniform(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

fn random_params(rng: &mut RngStream, complex: bool) -> ChannelParams {
    let h_a = uniform(rng, 0.1, 2.0);
    let h_b = uniform(rng, 0.1, 2.0);
    let rho_a = uniform(rng, 0.1, 2.0);
    let rho_b = uniform(rng, 0.1, 2.0);
    let sigma2 = uniform(rng, 0.05, 4.0);
    let (ta, tb) = if complex {
        (rng.phase(), rng.phase())
    } else {
        (0.0, 0.0)
    };
    ChannelParams::complex(h_a, h_b, rho_a, rho_b, ta, tb, sigma2).unwrap()
}

fn criterion_1() -> Outcome {
    const N: usize = 100_000;
    let mut rng = RngStream::new(101, 0);
    let (mut worst_real, mut worst_complex) = (0f64, 0f64);
    for _ in 0..N {
        let p = random_params(&mut rng, false);
        let y = uniform(&mut rng, -6.0, 6.0);
        let d = pnc::jncld_llr_awgn_sample(y, &p) - pnc::brute_force_llr_awgn_sample(y, &p);
        worst_real = worst_real.max(d.abs());

        let p = random_params(&mut rng, true);
        let y = ComplexSample::from_polar(6.0 * rng.uniform().sqrt(), rng.phase());
        let d = pnc::jncld_llr_complex_sample(y, &p) - pnc::brute_force_llr_complex_sample(y, &p);
        worst_complex = worst_complex.max(d.abs());
    }
    outcome(
        worst_real < 1e-9 && worst_complex < 1e-9,
        format!("{N} tuples each; max error real {worst_real:.2e}, complex {worst_complex:.2e} (tol 1e-9)"),
    )
}

fn criterion_2() -> Outcome {
    let h = construct_regular(1010, 3, 6, 1).unwrap();
    let enc = Encoder::new(&h);
    let mut rng = RngStream::new(102, 0);
    let mut failures = 0;
    for _ in 0..1000 {
        let a = enc
            .encode(&BitVector::new(rng.bits(enc.n_info())).unwrap())
            .unwrap();
        let b = enc
            .encode(&BitVector::new(rng.bits(enc.n_info())).unwrap())
            .unwrap();
        if !h.syndrome_check(&a.xor(&b).unwrap()).unwrap() {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!(
            "(1010,{}) code, 1000 pairs, {failures} XORs failed the syndrome check",
            enc.n_info()
        ),
    )
}

struct Scratch(PathBuf);

impl Scratch {
    fn new() -> Self {
        let dir = std::env::temp_dir().join(format!("jncld-acceptance-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        Self(dir)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn criterion_3(scratch: &Scratch) -> Outcome {
    let out = scratch.0.join("awgn-w1");
    match run_cli("sweep_awgn.toml", &out, 1) {
        Ok(()) => ordering(&out),
        Err(e) => outcome(false, e),
    }
}

fn criterion_4(scratch: &Scratch) -> Outcome {
    let out = scratch.0.join("sweep_complex");
    match run_cli("sweep_complex.toml", &out, 1) {
        Ok(()) => ordering(&out),
        Err(e) => outcome(false, e),
    }
}

fn criterion_5(scratch: &Scratch) -> Outcome {
    let mut lines = Vec::new();
    let mut passed = true;
    for config in ["gap_awgn.toml", "gap_complex.toml"] {
        let out = scratch.0.join(config.trim_end_matches(".toml"));
        if let Err(e) = run_cli(config, &out, 1) {
            return outcome(false, e);
        }
        let text = fs::read_to_string(out.join("gaps.csv")).unwrap();
        let gaps: BTreeMap<String, Option<f64>> = text
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[2].to_string(), f[5].parse().ok())
            })
            .collect();
        for target in ["1e-2", "1e-3"] {
            match gaps.get(target).copied().flatten() {
                Some(g) => {
                    passed &= g >= 0.0;
                    lines.push(format!(
                        "{} @ {target}: {g:+.3} dB",
                        config.trim_end_matches(".toml")
                    ));
                }
                None => {
                    passed = false;
                    lines.push(format!(
                        "{} @ {target}: not resolved",
                        config.trim_end_matches(".toml")
                    ));
                }
            }
        }
    }
    outcome(passed, lines.join("; "))
}

fn criterion_6() -> Outcome {
    let h = construct_regular(1010, 3, 6, 1).unwrap();
    let frames = StoppingRule {
        min_errors: 1001,
        max_trials: 1000,
    };
    let relay = SimConfig {
        code: CodeSpec::Regular {
            n_bits: 1010,
            col_degree: 3,
            row_degree: 6,
            seed: 1,
        },
        snr_db: vec![20.0],
        stop: frames,
        seed: 106,
        ..SimConfig::default()
    };
    let e2e = SimConfig {
        scope: Scope::EndToEnd,
        bc_snr_db: Some(20.0),
        ..relay.clone()
    };
    let r = Simulator::with_code(relay, &h).unwrap().run_point(0);
    let e = Simulator::with_code(e2e, &h).unwrap().run_point(0);
    outcome(
        r.trials == 1000 && r.bit_errors == 0 && e.trials == 1000 && e.bit_errors == 0 && e.frame_errors == 0,
        format!(
            "20 dB, rate {:.3}: relay {} bit errors in {} frames, end-to-end {} bit errors in {} frames",
            Encoder::new(&h).rate(),
            r.bit_errors,
            r.trials,
            e.bit_errors,
            e.trials
        ),
    )
}

fn criterion_7(scratch: &Scratch) -> Outcome {
    let first = scratch.0.join("awgn-w1");
    if !first.join("jncld.csv").exists() {
        if let Err(e) = run_cli("sweep_awgn.toml", &first, 1) {
            return outcome(false, e);
        }
    }
    let second = scratch.0.join("awgn-w3");
    if let Err(e) = run_cli("sweep_awgn.toml", &second, 3) {
        return outcome(false, e);
    }
    let mut mismatched = Vec::new();
    for name in ["jncld.csv", "mmse.csv"] {
        if fs::read(first.join(name)).unwrap() != fs::read(second.join(name)).unwrap() {
            mismatched.push(name);
        }
    }
    outcome(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            "sweep_awgn CSVs byte-identical with --workers 1 and --workers 3".to_string()
        } else {
            format!("differ: {}", mismatched.join(", "))
        },
    )
}

/// Maximum-likelihood codeword for LLRs `ln P(1)/P(0)`: maximizes `sum c_i L_i`.
fn ml_decode(codebook: &[BitVector], llr: &[f64]) -> BitVector {
    let score = |c: &BitVector| -> f64 {
        c.as_slice()
            .iter()
            .zip(llr)
            .map(|(&b, &l)| if b == 1 { l } else { 0.0 })
            .sum()
    };
    codebook
        .iter()
        .max_by(|a, b| score(a).total_cmp(&score(b)))
        .unwrap()
        .clone()
}

fn criterion_8() -> Outcome {
    const N: usize = 10_000;
    let sigma2: f64 = 0.5;
    let h = ParityCheckMatrix::hamming_7_4();
    let enc = Encoder::new(&h);
    let codebook: Vec<BitVector> = (0u8..16)
        .map(|m| {
            enc.encode(&BitVector::from_bools((0..4).map(|i| m >> i & 1 == 1)))
                .unwrap()
        })
        .collect();
    let mut rng = RngStream::new(108, 0);
    let (mut agree, mut converged, mut bits_agree) = (0, 0, 0);
    for _ in 0..N {
        let c = &codebook[rng.below(16)];
        let llr: Vec<f64> = c
            .as_slice()
            .iter()
            .map(|&b| {
                let x = if b == 1 { 1.0 } else { -1.0 };
                2.0 * (x + sigma2.sqrt() * rng.gaussian()) / sigma2
            })
            .collect();
        let bp = bp_decode(&h, &LlrVector::from_values(llr.clone()), 30);
        let ml = ml_decode(&codebook, &llr);
        agree += usize::from(bp.bits == ml);
        converged += usize::from(bp.converged);
        bits_agree += 7 - bp.bits.hamming_distance(&ml);
    }
    let rate = agree as f64 / N as f64;
    outcome(
        rate >= 0.99,
        format!(
            "BP matches exhaustive ML on {agree}/{N} = {:.2}% of inputs (need >= 99%); \
             per bit {:.2}%, BP converged on {converged}",
            100.0 * rate,
            100.0 * bits_agree as f64 / (7 * N) as f64
        ),
    )
}

fn main() {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let want = |k: u32| selected.is_empty() || selected.contains(&k);
    let scratch = Scratch::new();

    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (
            1,
            "closed form matches four-hypothesis LLR",
            Box::new(criterion_1),
        ),
        (2, "XOR of codewords is a codeword", Box::new(criterion_2)),
        (
            3,
            "real MAC: BER(jncld) <= BER(mmse)",
            Box::new(|| criterion_3(&scratch)),
        ),
        (
            4,
            "complex MAC: BER(jncld) <= BER(mmse)",
            Box::new(|| criterion_4(&scratch)),
        ),
        (
            5,
            "SNR gap >= 0 at BER 1e-2 and 1e-3",
            Box::new(|| criterion_5(&scratch)),
        ),
        (6, "error-free at 20 dB", Box::new(criterion_6)),
        (
            7,
            "CSV independent of worker count",
            Box::new(|| criterion_7(&scratch)),
        ),
        (8, "Hamming BP agrees with ML", Box::new(criterion_8)),
    ];

    let mut failed = 0;
    for (k, title, check) in &criteria {
        if !want(*k) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {k}: {title} ({:.1}s): {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    drop(criteria);
    drop(scratch);
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
