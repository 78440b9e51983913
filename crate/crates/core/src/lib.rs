//! Joint physical-layer network coding and LDPC decoding for BPSK two-way
//! relaying.
//!
//! The relay receives the superposition of two LDPC-coded BPSK streams and
//! decodes the XOR of the two messages directly: per-bit LLRs of `c_A ⊕ c_B`
//! are computed from the superimposed sample ([`pnc`]) and fed to a
//! sum-product decoder for the shared code ([`ldpc`]). [`relay_sim`] runs
//! Monte Carlo BER sweeps of the whole pipeline and [`cli`] drives them from
//! experiment files.
//!
//! ```
//! use jncld::channel::{bpsk_modulate, mac_awgn, sigma2_from_snr, ChannelParams};
//! use jncld::ldpc::{bp_decode, construct_regular, Encoder};
//! use jncld::{pnc, BitVector, RngStream};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let h = construct_regular(1010, 3, 6, 1)?;
//! let enc = Encoder::new(&h);
//! let p = ChannelParams::from_power_split(2.0 / 3.0, 2.0, 1.0, 1.0, 1.0)?;
//! let p = p.with_sigma2(sigma2_from_snr(8.0, &p))?;
//!
//! let mut rng = RngStream::new(42, 0);
//! let a = BitVector::new(rng.bits(enc.n_info()))?;
//! let b = BitVector::new(rng.bits(enc.n_info()))?;
//! let (ca, cb) = (enc.encode(&a)?, enc.encode(&b)?);
//! let y = mac_awgn(&bpsk_modulate(&ca), &bpsk_modulate(&cb), &p, &mut rng)?;
//!
//! let out = bp_decode(&h, &pnc::jncld_llr_awgn(&y, &p), 30);
//! assert_eq!(enc.extract_info(&out.bits)?, a.xor(&b)?);
//! # Ok(())
//! # }
//! ```

pub mod channel;
pub mod cli;
pub mod ldpc;
pub mod pnc;
pub mod relay_sim;
pub mod rng;

pub use ldpc::{BitVector, LlrVector, ParityCheckMatrix};
pub use rng::RngStream;
