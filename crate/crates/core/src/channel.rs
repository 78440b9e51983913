//! BPSK mapping and the channel models of the two relay stages.
//!
//! MAC stage (real):    `y = h_A ρ_A x_A + h_B ρ_B x_B + n`, `n ~ N(0, σ²)`.
//! MAC stage (complex): `y = h_A e^{jθ_A} ρ_A x_A + h_B e^{jθ_B} ρ_B x_B + n`,
//! with circularly symmetric `n`, `E|n|² = σ²` (σ²/2 per real dimension).
//! BC stage:            `y = x + n`, `n ~ N(0, σ²)`.

use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::ldpc::BitVector;
pub use crate::rng::RngStream;

/// One received complex baseband sample.
pub type ComplexSample = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("length mismatch: x_A has {a} samples, x_B has {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("invalid channel parameter: {0}")]
    InvalidParams(String),
}

/// Gains, amplitudes, phases and noise variance seen by the relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub h_a: f64,
    pub h_b: f64,
    pub rho_a: f64,
    pub rho_b: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub sigma2: f64,
}

impl ChannelParams {
    /// Real-channel parameters (zero phases).
    pub fn real(
        h_a: f64,
        h_b: f64,
        rho_a: f64,
        rho_b: f64,
        sigma2: f64,
    ) -> Result<Self, ChannelError> {
        Self::complex(h_a, h_b, rho_a, rho_b, 0.0, 0.0, sigma2)
    }

    pub fn complex(
        h_a: f64,
        h_b: f64,
        rho_a: f64,
        rho_b: f64,
        theta_a: f64,
        theta_b: f64,
        sigma2: f64,
    ) -> Result<Self, ChannelError> {
        let p = Self {
            h_a,
            h_b,
            rho_a,
            rho_b,
            theta_a,
            theta_b,
            sigma2,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters meeting a received-power ratio `P_A h_A² / P_B h_B² = ratio`
    /// and total `P_A h_A² + P_B h_B² = total`, for the given gains.
    pub fn from_power_split(
        ratio: f64,
        total: f64,
        h_a: f64,
        h_b: f64,
        sigma2: f64,
    ) -> Result<Self, ChannelError> {
        let (recv_a, recv_b) = resolve_power_split(ratio, total)?;
        if h_a <= 0.0 || h_b <= 0.0 {
            return Err(ChannelError::InvalidParams(
                "gains must be positive to meet a power split".into(),
            ));
        }
        Self::real(h_a, h_b, recv_a.sqrt() / h_a, recv_b.sqrt() / h_b, sigma2)
    }

    fn validate(&self) -> Result<(), ChannelError> {
        let finite = [
            self.h_a,
            self.h_b,
            self.rho_a,
            self.rho_b,
            self.theta_a,
            self.theta_b,
            self.sigma2,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(ChannelError::InvalidParams("non-finite value".into()));
        }
        if self.rho_a < 0.0 || self.rho_b < 0.0 {
            return Err(ChannelError::InvalidParams(
                "amplitudes must be non-negative".into(),
            ));
        }
        if self.sigma2 <= 0.0 {
            return Err(ChannelError::InvalidParams(format!(
                "noise variance must be positive, got {}",
                self.sigma2
            )));
        }
        if !(0.0..TAU).contains(&self.theta_a) || !(0.0..TAU).contains(&self.theta_b) {
            return Err(ChannelError::InvalidParams(
                "phases must lie in [0, 2π)".into(),
            ));
        }
        Ok(())
    }

    /// Same gains and amplitudes with a new noise variance.
    pub fn with_sigma2(self, sigma2: f64) -> Result<Self, ChannelError> {
        let p = Self { sigma2, ..self };
        p.validate()?;
        Ok(p)
    }

    /// Same gains and amplitudes with new phases (wrapped into `[0, 2π)`).
    pub fn with_phases(self, theta_a: f64, theta_b: f64) -> Self {
        Self {
            theta_a: wrap_phase(theta_a),
            theta_b: wrap_phase(theta_b),
            ..self
        }
    }

    /// Real amplitude `h_A ρ_A` of source A at the relay.
    pub fn amp_a(&self) -> f64 {
        self.h_a * self.rho_a
    }

    pub fn amp_b(&self) -> f64 {
        self.h_b * self.rho_b
    }

    /// Complex coefficient `h_A e^{jθ_A} ρ_A`.
    pub fn coeff_a(&self) -> Complex64 {
        Complex64::from_polar(self.amp_a(), self.theta_a)
    }

    pub fn coeff_b(&self) -> Complex64 {
        Complex64::from_polar(self.amp_b(), self.theta_b)
    }

    /// Total received signal power `P_A h_A² + P_B h_B²`.
    pub fn received_power(&self) -> f64 {
        self.amp_a().powi(2) + self.amp_b().powi(2)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Splits total received power `total` so that `P_A h_A² / P_B h_B² = ratio`.
/// Returns `(P_A h_A², P_B h_B²)`.
pub fn resolve_power_split(ratio: f64, total: f64) -> Result<(f64, f64), ChannelError> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(ChannelError::InvalidParams(format!(
            "power ratio must be positive, got {ratio}"
        )));
    }
    if !(total.is_finite() && total > 0.0) {
        return Err(ChannelError::InvalidParams(format!(
            "total power must be positive, got {total}"
        )));
    }
    let b = total / (1.0 + ratio);
    Ok((total - b, b))
}

/// Maps bits to BPSK symbols: 0 → −1, 1 → +1.
pub fn bpsk_modulate(c: &BitVector) -> Vec<f64> {
    c.as_slice()
        .iter()
        .map(|&b| if b == 1 { 1.0 } else { -1.0 })
        .collect()
}

fn check_lengths(x_a: &[f64], x_b: &[f64]) -> Result<(), ChannelError> {
    if x_a.len() != x_b.len() {
        return Err(ChannelError::LengthMismatch {
            a: x_a.len(),
            b: x_b.len(),
        });
    }
    Ok(())
}

/// Real multiple-access channel.
pub fn mac_awgn(
    x_a: &[f64],
    x_b: &[f64],
    p: &ChannelParams,
    rng: &mut RngStream,
) -> Result<Vec<f64>, ChannelError> {
    check_lengths(x_a, x_b)?;
    let (a, b, sigma) = (p.amp_a(), p.amp_b(), p.sigma2.sqrt());
    Ok(x_a
        .iter()
        .zip(x_b)
        .map(|(xa, xb)| a * xa + b * xb + sigma * rng.gaussian())
        .collect())
}

/// Complex multiple-access channel with the phases in `p`.
///
/// Noise is drawn real part first, then imaginary part, per sample.
pub fn mac_complex(
    x_a: &[f64],
    x_b: &[f64],
    p: &ChannelParams,
    rng: &mut RngStream,
) -> Result<Vec<ComplexSample>, ChannelError> {
    check_lengths(x_a, x_b)?;
    let (ga, gb) = (p.coeff_a(), p.coeff_b());
    let sigma = (0.5 * p.sigma2).sqrt();
    Ok(x_a
        .iter()
        .zip(x_b)
        .map(|(&xa, &xb)| {
            let re = sigma * rng.gaussian();
            let im = sigma * rng.gaussian();
            ga * xa + gb * xb + Complex64::new(re, im)
        })
        .collect())
}

/// Complex multiple-access channel with a fresh uniform phase pair for every
/// symbol. Returns the samples and the phases used.
pub fn mac_complex_symbol_phases(
    x_a: &[f64],
    x_b: &[f64],
    p: &ChannelParams,
    rng: &mut RngStream,
) -> Result<(Vec<ComplexSample>, Vec<(f64, f64)>), ChannelError> {
    check_lengths(x_a, x_b)?;
    let sigma = (0.5 * p.sigma2).sqrt();
    let mut phases = Vec::with_capacity(x_a.len());
    let samples = x_a
        .iter()
        .zip(x_b)
        .map(|(&xa, &xb)| {
            let (ta, tb) = (rng.phase(), rng.phase());
            phases.push((ta, tb));
            let q = p.with_phases(ta, tb);
            let re = sigma * rng.gaussian();
            let im = sigma * rng.gaussian();
            q.coeff_a() * xa + q.coeff_b() * xb + Complex64::new(re, im)
        })
        .collect();
    Ok((samples, phases))
}

/// Point-to-point AWGN channel of the broadcast stage.
pub fn p2p_awgn(x: &[f64], sigma2: f64, rng: &mut RngStream) -> Vec<f64> {
    let sigma = sigma2.sqrt();
    x.iter().map(|v| v + sigma * rng.gaussian()).collect()
}

/// Noise variance giving relay SNR `snr_db`, where SNR is
/// `(P_A h_A² + P_B h_B²) / σ²`.
pub fn sigma2_from_snr(snr_db: f64, p: &ChannelParams) -> f64 {
    sigma2_for_power(snr_db, p.received_power())
}

/// Noise variance giving SNR `snr_db` for signal power `power`.
pub fn sigma2_for_power(snr_db: f64, power: f64) -> f64 {
    power / 10f64.powf(snr_db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TINY: f64 = 1e-300;

    fn unit(sigma2: f64) -> ChannelParams {
        ChannelParams::real(1.0, 1.0, 1.0, 1.0, sigma2).unwrap()
    }

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        (mean, xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
    }

    #[test]
    fn modulation_rule() {
        assert_eq!(
            bpsk_modulate(&BitVector::new(vec![0, 1, 0]).unwrap()),
            [-1.0, 1.0, -1.0]
        );
        assert!(bpsk_modulate(&BitVector::zeros(0)).is_empty());
        assert_eq!(
            bpsk_modulate(&BitVector::new(vec![1; 5]).unwrap()),
            [1.0; 5]
        );
    }

    #[test]
    fn mac_cancellation_and_power_split() {
        let mut rng = RngStream::new(0, 0);
        let y = mac_awgn(&[1.0], &[-1.0], &unit(TINY), &mut rng).unwrap();
        assert!(y[0].abs() < 1e-140);

        let p = ChannelParams::from_power_split(2.0 / 3.0, 2.0, 1.0, 1.0, TINY).unwrap();
        assert!((p.amp_a() - (0.8f64).sqrt()).abs() < 1e-12);
        assert!((p.amp_b() - (1.2f64).sqrt()).abs() < 1e-12);
        let y = mac_awgn(&[1.0], &[1.0], &p, &mut rng).unwrap();
        assert!((y[0] - ((0.8f64).sqrt() + (1.2f64).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn mac_length_mismatch() {
        let mut rng = RngStream::new(0, 0);
        assert_eq!(
            mac_awgn(&[1.0, 1.0], &[1.0], &unit(1.0), &mut rng),
            Err(ChannelError::LengthMismatch { a: 2, b: 1 })
        );
        assert!(mac_complex(&[1.0], &[], &unit(1.0), &mut rng).is_err());
    }

    #[test]
    fn mac_noise_mean() {
        let n = 1_000_000;
        let sigma2 = 0.7;
        let mut rng = RngStream::new(5, 1);
        let xa = vec![1.0; n];
        let xb = vec![-1.0; n];
        let p = ChannelParams::real(1.0, 1.0, 0.9, 0.4, sigma2).unwrap();
        let y = mac_awgn(&xa, &xb, &p, &mut rng).unwrap();
        let (mean, _) = mean_var(&y);
        assert!((mean - 0.5).abs() < 4.0 * sigma2.sqrt() / (n as f64).sqrt());
    }

    #[test]
    fn complex_phase_zero_and_rotation() {
        let mut rng = RngStream::new(0, 0);
        let p = ChannelParams::complex(1.0, 1.0, 0.8, 1.3, 0.0, 0.0, TINY).unwrap();
        let y = mac_complex(&[1.0, -1.0], &[1.0, 1.0], &p, &mut rng).unwrap();
        assert!((y[0].re - 2.1).abs() < 1e-12 && y[0].im.abs() < 1e-12);
        assert!((y[1].re - 0.5).abs() < 1e-12 && y[1].im.abs() < 1e-12);

        let p = ChannelParams::complex(1.0, 1.0, 1.0, 0.0, PI, 0.0, TINY).unwrap();
        let y = mac_complex(&[1.0], &[1.0], &p, &mut rng).unwrap();
        assert!((y[0].re + 1.0).abs() < 1e-12 && y[0].im.abs() < 1e-12);
    }

    #[test]
    fn complex_noise_variance() {
        let n = 1_000_000;
        let sigma2 = 1.3;
        let p = ChannelParams::complex(1.0, 1.0, 0.0, 0.0, 1.0, 2.0, sigma2).unwrap();
        let mut rng = RngStream::new(8, 0);
        let y = mac_complex(&vec![1.0; n], &vec![1.0; n], &p, &mut rng).unwrap();
        let power = y.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((power / sigma2 - 1.0).abs() < 0.01);
        let (_, var_re) = mean_var(&y.iter().map(|z| z.re).collect::<Vec<_>>());
        assert!((var_re / (0.5 * sigma2) - 1.0).abs() < 0.01);
    }

    #[test]
    fn p2p_moments_and_length() {
        let mut rng = RngStream::new(0, 0);
        assert_eq!(p2p_awgn(&[1.0, -1.0], TINY, &mut rng), [1.0, -1.0]);
        let n = 1_000_000;
        let sigma2 = 0.5;
        let y = p2p_awgn(&vec![1.0; n], sigma2, &mut RngStream::new(4, 4));
        assert_eq!(y.len(), n);
        let (mean, var) = mean_var(&y);
        assert!((mean - 1.0).abs() < 0.01);
        assert!((var / sigma2 - 1.0).abs() < 0.01);
    }

    #[test]
    fn snr_to_variance() {
        let p = ChannelParams::from_power_split(2.0 / 3.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        assert!((p.received_power() - 2.0).abs() < 1e-12);
        assert!((sigma2_from_snr(0.0, &p) - 2.0).abs() < 1e-12);
        assert!((sigma2_from_snr(3.0103, &p) - 1.0).abs() < 1e-5);
        let mut last = f64::INFINITY;
        for snr in [0.0, 10.0, 50.0, 200.0] {
            let s = sigma2_from_snr(snr, &p);
            assert!(s < last);
            last = s;
        }
        assert!(last < 1e-19);
    }

    #[test]
    fn power_split_resolution() {
        for (ratio, total) in [(2.0 / 3.0, 2.0), (1.0, 1.0), (5.0, 0.3), (1e-3, 7.0)] {
            let (a, b) = resolve_power_split(ratio, total).unwrap();
            assert!((a + b - total).abs() < 1e-12);
            assert!((a / b - ratio).abs() < 1e-12 * ratio.max(1.0));
        }
        assert!(resolve_power_split(0.0, 2.0).is_err());
        assert!(resolve_power_split(1.0, -1.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ChannelParams::real(1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ChannelParams::real(1.0, 1.0, -1.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::complex(1.0, 1.0, 1.0, 1.0, TAU, 0.0, 1.0).is_err());
        assert_eq!(unit(1.0).with_phases(-0.5 * PI, 3.0 * PI).theta_a, 1.5 * PI);
    }

    #[test]
    fn determinism() {
        let p = ChannelParams::complex(1.0, 0.5, 1.0, 1.0, 0.3, 4.0, 0.8).unwrap();
        let run = || mac_complex(&[1.0; 64], &[-1.0; 64], &p, &mut RngStream::new(77, 3)).unwrap();
        let (a, b) = (run(), run());
        assert!(a
            .iter()
            .zip(&b)
            .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
    }

    #[test]
    fn phase_zero_matches_real_channel_statistics() {
        // real parts of the complex channel equal the real channel run at half
        // the variance on the even-indexed draws of the same stream
        let p = ChannelParams::real(1.0, 1.0, 0.7, 1.1, 0.9).unwrap();
        let xa = [1.0, -1.0, 1.0, -1.0];
        let xb = [1.0, 1.0, -1.0, -1.0];
        let yc = mac_complex(&xa, &xb, &p, &mut RngStream::new(3, 3)).unwrap();
        let mut rng = RngStream::new(3, 3);
        for (k, z) in yc.iter().enumerate() {
            let g_re = rng.gaussian();
            let g_im = rng.gaussian();
            let det = p.amp_a() * xa[k] + p.amp_b() * xb[k];
            assert!((z.re - det - (0.45f64).sqrt() * g_re).abs() < 1e-12);
            assert!((z.im - (0.45f64).sqrt() * g_im).abs() < 1e-12);
        }
    }
}
