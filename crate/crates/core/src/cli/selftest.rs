//! Quick built-in checks: closed-form LLRs against direct evaluation, GF(2)
//! linearity of the encoder, and channel noise moments. Fixed seeds, so the
//! report is the same on every run.

use std::fmt;

use crate::channel::{mac_awgn, mac_complex, ChannelParams, ComplexSample};
use crate::ldpc::{construct_regular, BitVector, Encoder, ParityCheckMatrix};
use crate::pnc;
use crate::rng::RngStream;

const SEED: u64 = 0x5e1f_7e57;

#[derive(Debug, Clone, Copy, Default)]
pub struct SelftestOptions {
    /// Replace the leading constant 2 of the real closed form with 2.5, to
    /// confirm the oracle suite catches it.
    pub corrupt_closed_form: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            let verdict = if s.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{verdict} {:<10} {}", s.name, s.detail)?;
        }
        let failed = self.suites.iter().filter(|s| !s.passed).count();
        write!(f, "{} suites, {} failed", self.suites.len(), failed)
    }
}

pub fn selftest(opts: SelftestOptions) -> SelftestReport {
    SelftestReport {
        suites: vec![oracle_suite(opts), linearity_suite(), moment_suite()],
    }
}

fn random_params(rng: &mut RngStream, complex: bool) -> ChannelParams {
    let mut u = |lo: f64, hi: f64| lo + (hi - lo) * rng.uniform();
    let (h_a, h_b, rho_a, rho_b) = (u(0.1, 2.0), u(0.1, 2.0), u(0.1, 2.0), u(0.1, 2.0));
    let sigma2 = u(0.05, 4.0);
    let (ta, tb) = if complex {
        (u(0.0, std::f64::consts::TAU), u(0.0, std::f64::consts::TAU))
    } else {
        (0.0, 0.0)
    };
    ChannelParams::complex(h_a, h_b, rho_a, rho_b, ta, tb, sigma2)
        .expect("sampled parameters are valid")
}

fn oracle_suite(opts: SelftestOptions) -> SuiteResult {
    const TUPLES: usize = 20_000;
    const TOL: f64 = 1e-9;
    let lead = if opts.corrupt_closed_form { 2.5 } else { 2.0 };
    let mut rng = RngStream::new(SEED, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..TUPLES {
        let p = random_params(&mut rng, false);
        let y = -6.0 + 12.0 * rng.uniform();
        let d = pnc::awgn_closed_form(y, &p, lead) - pnc::brute_force_llr_awgn_sample(y, &p);
        worst = worst.max(d.abs());

        let p = random_params(&mut rng, true);
        let (r, phi) = (6.0 * rng.uniform().sqrt(), rng.phase());
        let y = ComplexSample::from_polar(r, phi);
        let d = pnc::jncld_llr_complex_sample(y, &p) - pnc::brute_force_llr_complex_sample(y, &p);
        worst = worst.max(d.abs());
    }
    SuiteResult {
        name: "oracle",
        passed: worst < TOL,
        detail: format!(
            "{} real + {} complex tuples, max |closed - direct| = {worst:.3e}",
            TUPLES, TUPLES
        ),
    }
}

fn linearity_suite() -> SuiteResult {
    let mut failures = Vec::new();

    // Every Hamming codeword, and every XOR of two.
    let hamming = ParityCheckMatrix::hamming_7_4();
    let enc = Encoder::new(&hamming);
    let words: Vec<BitVector> = (0u8..16)
        .map(|m| BitVector::from_bools((0..4).map(|i| m >> i & 1 == 1)))
        .map(|b| enc.encode(&b).expect("length 4"))
        .collect();
    let hamming_ok = words.iter().all(|a| {
        words.iter().all(|b| {
            hamming
                .syndrome_check(&a.xor(b).expect("same length"))
                .expect("length 7")
        })
    });
    if !hamming_ok {
        failures.push("Hamming codebook not closed under XOR".to_string());
    }

    let h = construct_regular(204, 3, 6, 1).expect("204-bit regular code");
    let enc = Encoder::new(&h);
    let mut rng = RngStream::new(SEED, 2);
    const PAIRS: usize = 200;
    let mut bad = 0;
    for _ in 0..PAIRS {
        let a = BitVector::new(rng.bits(enc.n_info())).expect("bits");
        let b = BitVector::new(rng.bits(enc.n_info())).expect("bits");
        let ca = enc.encode(&a).expect("length");
        let cb = enc.encode(&b).expect("length");
        let sum = enc.encode(&a.xor(&b).expect("length")).expect("length");
        let x = ca.xor(&cb).expect("length");
        if !h.syndrome_check(&x).expect("length") || x != sum {
            bad += 1;
        }
    }
    if bad > 0 {
        failures.push(format!("{bad}/{PAIRS} pairs on the 204-bit code"));
    }
    SuiteResult {
        name: "linearity",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!(
                "(7,4) codebook and {PAIRS} pairs on a (204,{}) code",
                enc.n_info()
            )
        } else {
            failures.join("; ")
        },
    }
}

/// Checks noise mean and variance against their targets within five standard
/// errors.
fn moment_suite() -> SuiteResult {
    const N: usize = 200_000;
    let mut failures = Vec::new();
    let mut check = |what: &str, est: f64, target: f64, se: f64| {
        if (est - target).abs() > 5.0 * se {
            failures.push(format!("{what}: {est:.5} vs {target:.5}"));
        }
    };

    let sigma2 = 0.7;
    let p = ChannelParams::real(1.0, 1.0, 0.8f64.sqrt(), 1.2f64.sqrt(), sigma2).expect("valid");
    let zeros = vec![0.0; N];
    let ones = vec![1.0; N];
    let neg = vec![-1.0; N];
    let mut rng = RngStream::new(SEED, 3);
    // Opposite-sign inputs make the noiseless mean a - b.
    let y = mac_awgn(&ones, &neg, &p, &mut rng).expect("equal lengths");
    let mean = y.iter().sum::<f64>() / N as f64;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (N - 1) as f64;
    let n = N as f64;
    check(
        "real mean",
        mean,
        p.amp_a() - p.amp_b(),
        (sigma2 / n).sqrt(),
    );
    check("real variance", var, sigma2, sigma2 * (2.0 / n).sqrt());

    let pc = p.with_phases(0.0, 0.0);
    let z = mac_complex(&zeros, &zeros, &pc, &mut rng).expect("equal lengths");
    let half = sigma2 / 2.0;
    let re_var = z.iter().map(|c| c.re * c.re).sum::<f64>() / n;
    let im_var = z.iter().map(|c| c.im * c.im).sum::<f64>() / n;
    let cross = z.iter().map(|c| c.re * c.im).sum::<f64>() / n;
    check("complex Re variance", re_var, half, half * (2.0 / n).sqrt());
    check("complex Im variance", im_var, half, half * (2.0 / n).sqrt());
    check("complex Re/Im covariance", cross, 0.0, half / n.sqrt());

    SuiteResult {
        name: "moments",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{N} real and {N} complex noise samples")
        } else {
            failures.join("; ")
        },
    }
}
