//! Soft demappers for the network-coded bit `c_A ⊕ c_B`.
//!
//! With BPSK (0 → −1, 1 → +1) the four equiprobable transmit pairs split
//! into two events per XOR value:
//!
//! | event | `(x_A, x_B)` | `c_A ⊕ c_B` |
//! |-------|--------------|-------------|
//! | E1    | (−1, +1)     | 1           |
//! | E2    | (+1, −1)     | 1           |
//! | E3    | (+1, +1)     | 0           |
//! | E4    | (−1, −1)     | 0           |
//!
//! and the LLR is `ln[p(y|E1) + p(y|E2)] − ln[p(y|E3) + p(y|E4)]`. This module
//! provides the closed forms of that ratio for the real and complex
//! multiple-access channels, the direct four-Gaussian evaluation used to check
//! them, a linear-MMSE baseline and the plain BPSK demapper for the broadcast
//! stage. Every function returns `ln P(1)/P(0)`.
//!
//! For the complex channel the noise is circularly symmetric with
//! `E|n|² = σ²`, i.e. density `exp(−|y − m|² / σ²)`. Under that convention
//! the complex closed form at `σ²` equals the real one at `σ²/2` when both
//! phases are zero.

use crate::channel::{ChannelParams, ComplexSample};
use crate::ldpc::LlrVector;

/// One transmit hypothesis `(x_A, x_B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypothesis {
    pub x_a: f64,
    pub x_b: f64,
}

impl Hypothesis {
    /// XOR of the underlying bits.
    pub fn xor_bit(&self) -> u8 {
        u8::from(self.x_a != self.x_b)
    }

    /// BPSK image of the XOR bit, `t = −x_A x_B`.
    pub fn xor_symbol(&self) -> f64 {
        -self.x_a * self.x_b
    }
}

/// E1..E4 in order; the first two have XOR 1, the last two XOR 0.
pub const HYPOTHESES: [Hypothesis; 4] = [
    Hypothesis {
        x_a: -1.0,
        x_b: 1.0,
    },
    Hypothesis {
        x_a: 1.0,
        x_b: -1.0,
    },
    Hypothesis { x_a: 1.0, x_b: 1.0 },
    Hypothesis {
        x_a: -1.0,
        x_b: -1.0,
    },
];

/// `ln cosh(x)` without overflow.
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

/// Closed-form LLR of one real sample.
pub fn jncld_llr_awgn_sample(y: f64, p: &ChannelParams) -> f64 {
    awgn_closed_form(y, p, 2.0)
}

/// The real closed form with the coefficient of `h_A h_B ρ_A ρ_B / σ²` exposed,
/// so a self-test can corrupt it on purpose.
#[doc(hidden)]
pub fn awgn_closed_form(y: f64, p: &ChannelParams, lead: f64) -> f64 {
    let (a, b, s2) = (p.amp_a(), p.amp_b(), p.sigma2);
    lead * a * b / s2 + log_cosh(y * (a - b) / s2) - log_cosh(y * (a + b) / s2)
}

/// Closed-form LLRs over the real multiple-access channel.
pub fn jncld_llr_awgn(y: &[f64], p: &ChannelParams) -> LlrVector {
    LlrVector::from_values(y.iter().map(|&v| jncld_llr_awgn_sample(v, p)).collect())
}

/// Closed-form LLR of one complex sample.
pub fn jncld_llr_complex_sample(y: ComplexSample, p: &ChannelParams) -> f64 {
    let (ga, gb) = (p.coeff_a(), p.coeff_b());
    let (sum, diff) = (ga + gb, ga - gb);
    let s2 = p.sigma2;
    (sum.norm_sqr() - diff.norm_sqr()) / s2 + log_cosh(2.0 * (y * diff.conj()).re / s2)
        - log_cosh(2.0 * (y * sum.conj()).re / s2)
}

/// Closed-form LLRs over the complex multiple-access channel.
pub fn jncld_llr_complex(y: &[ComplexSample], p: &ChannelParams) -> LlrVector {
    LlrVector::from_values(y.iter().map(|&v| jncld_llr_complex_sample(v, p)).collect())
}

/// Four-hypothesis LLR of one real sample, evaluated in log space.
pub fn brute_force_llr_awgn_sample(y: f64, p: &ChannelParams) -> f64 {
    let exponent = |h: &Hypothesis| {
        let mean = p.amp_a() * h.x_a + p.amp_b() * h.x_b;
        -(y - mean).powi(2) / (2.0 * p.sigma2)
    };
    let e: Vec<f64> = HYPOTHESES.iter().map(exponent).collect();
    log_sum_exp(e[0], e[1]) - log_sum_exp(e[2], e[3])
}

pub fn brute_force_llr_awgn(y: &[f64], p: &ChannelParams) -> LlrVector {
    LlrVector::from_values(
        y.iter()
            .map(|&v| brute_force_llr_awgn_sample(v, p))
            .collect(),
    )
}

/// Four-hypothesis LLR of one complex sample, evaluated in log space.
pub fn brute_force_llr_complex_sample(y: ComplexSample, p: &ChannelParams) -> f64 {
    let exponent = |h: &Hypothesis| {
        let mean = p.coeff_a() * h.x_a + p.coeff_b() * h.x_b;
        -(y - mean).norm_sqr() / p.sigma2
    };
    let e: Vec<f64> = HYPOTHESES.iter().map(exponent).collect();
    log_sum_exp(e[0], e[1]) - log_sum_exp(e[2], e[3])
}

pub fn brute_force_llr_complex(y: &[ComplexSample], p: &ChannelParams) -> LlrVector {
    LlrVector::from_values(
        y.iter()
            .map(|&v| brute_force_llr_complex_sample(v, p))
            .collect(),
    )
}

/// BPSK LLR `2y/σ²` for the broadcast stage.
pub fn p2p_bpsk_llr(y: &[f64], sigma2: f64) -> LlrVector {
    LlrVector::from_values(y.iter().map(|&v| 2.0 * v / sigma2).collect())
}

/// Second-order monomials of the received sample used as regressors.
const REAL_FEATURES: &[(usize, usize)] = &[(0, 0)];
const COMPLEX_FEATURES: &[(usize, usize)] = &[(0, 0), (1, 1), (0, 1)];

/// Linear-MMSE estimator of the XOR symbol `t = −x_A x_B`.
///
/// `t` has zero correlation with `y` itself (the mixture is symmetric under
/// `(x_A, x_B) → (−x_A, −x_B)`), so the estimator is affine in the
/// second-order terms of the sample instead: `y²` on the real channel and
/// `(Re y)², (Im y)², Re y · Im y` on the complex one. Coefficients come
/// from the exact moments of the four-hypothesis Gaussian mixture. The soft
/// output is `2 t̂ / σ_res²`, where `σ_res²` is the residual mean square
/// error.
#[derive(Debug, Clone)]
pub struct MmseEstimator {
    features: &'static [(usize, usize)],
    weights: Vec<f64>,
    feature_mean: Vec<f64>,
    residual: f64,
}

impl MmseEstimator {
    pub fn real(p: &ChannelParams) -> Self {
        let means = HYPOTHESES.map(|h| [p.amp_a() * h.x_a + p.amp_b() * h.x_b, 0.0]);
        Self::fit(REAL_FEATURES, &means, p.sigma2)
    }

    pub fn complex(p: &ChannelParams) -> Self {
        let means = HYPOTHESES.map(|h| {
            let m = p.coeff_a() * h.x_a + p.coeff_b() * h.x_b;
            [m.re, m.im]
        });
        Self::fit(COMPLEX_FEATURES, &means, 0.5 * p.sigma2)
    }

    fn fit(features: &'static [(usize, usize)], means: &[[f64; 2]; 4], var: f64) -> Self {
        let k = features.len();
        let delta = |i: usize, j: usize| if i == j { var } else { 0.0 };
        let weight = 1.0 / HYPOTHESES.len() as f64;

        let mut mean = vec![0.0; k];
        let mut cross = vec![0.0; k];
        let mut second = vec![vec![0.0; k]; k];
        for (h, m) in HYPOTHESES.iter().zip(means) {
            let t = h.xor_symbol();
            for (a, &(i, j)) in features.iter().enumerate() {
                let e2 = m[i] * m[j] + delta(i, j);
                mean[a] += weight * e2;
                cross[a] += weight * t * e2;
                for (b, &(k, l)) in features.iter().enumerate() {
                    second[a][b] += weight * fourth_moment(m, var, i, j, k, l);
                }
            }
        }
        let mut cov = second;
        for a in 0..k {
            for b in 0..k {
                cov[a][b] -= mean[a] * mean[b];
            }
        }
        // E[t] = 0 and E[t²] = 1, so cross is Cov(t, φ)
        let weights = solve_regularized(cov, &cross);
        let explained: f64 = weights.iter().zip(&cross).map(|(w, c)| w * c).sum();
        Self {
            features,
            weights,
            feature_mean: mean,
            residual: (1.0 - explained).max(1e-12),
        }
    }

    /// Estimate `t̂` from one sample given as `[Re, Im]`.
    pub fn estimate(&self, u: [f64; 2]) -> f64 {
        self.features
            .iter()
            .zip(&self.weights)
            .zip(&self.feature_mean)
            .map(|((&(i, j), w), m)| w * (u[i] * u[j] - m))
            .sum()
    }

    /// Residual mean square error of the estimate.
    pub fn residual_mse(&self) -> f64 {
        self.residual
    }

    pub fn llr(&self, u: [f64; 2]) -> f64 {
        2.0 * self.estimate(u) / self.residual
    }
}

/// `E[u_i u_j u_k u_l]` for `u ~ N(m, var·I)` (Isserlis).
fn fourth_moment(m: &[f64; 2], var: f64, i: usize, j: usize, k: usize, l: usize) -> f64 {
    let c = |a: usize, b: usize| if a == b { var } else { 0.0 };
    m[i] * m[j] * m[k] * m[l]
        + c(i, j) * m[k] * m[l]
        + c(i, k) * m[j] * m[l]
        + c(i, l) * m[j] * m[k]
        + c(j, k) * m[i] * m[l]
        + c(j, l) * m[i] * m[k]
        + c(k, l) * m[i] * m[j]
        + c(i, j) * c(k, l)
        + c(i, k) * c(j, l)
        + c(i, l) * c(j, k)
}

/// Solves `A w = b` for a small symmetric positive semidefinite `A`, with a
/// relative ridge so noiseless (singular) cases still give a usable answer.
fn solve_regularized(mut a: Vec<Vec<f64>>, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let trace: f64 = (0..n).map(|i| a[i][i]).sum();
    let ridge = 1e-12 * trace.max(1e-300);
    let mut rhs = b.to_vec();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += ridge;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap_or(col);
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let d = a[col][col];
        if d.abs() < 1e-300 {
            continue;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col] / d;
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    rhs[r] -= f * rhs[col];
                }
            }
        }
    }
    (0..n)
        .map(|i| {
            if a[i][i].abs() < 1e-300 {
                0.0
            } else {
                rhs[i] / a[i][i]
            }
        })
        .collect()
}

/// MMSE-baseline LLRs over the real multiple-access channel.
pub fn mmse_llr_awgn(y: &[f64], p: &ChannelParams) -> LlrVector {
    let est = MmseEstimator::real(p);
    LlrVector::from_values(y.iter().map(|&v| est.llr([v, 0.0])).collect())
}

/// MMSE-baseline LLRs over the complex multiple-access channel.
pub fn mmse_llr_complex(y: &[ComplexSample], p: &ChannelParams) -> LlrVector {
    let est = MmseEstimator::complex(p);
    LlrVector::from_values(y.iter().map(|v| est.llr([v.re, v.im])).collect())
}
