//! Sum-product (belief propagation) decoding with the exact tanh rule.

use super::{BitVector, LlrVector, ParityCheckMatrix, LLR_CLAMP};

/// Largest |tanh| product fed to `atanh`; keeps check messages finite.
const TANH_LIMIT: f64 = 1.0 - 1e-15;

/// Result of one decoding run.
#[derive(Debug, Clone, PartialEq)]
pub struct BpOutcome {
    /// Hard decisions on the final posteriors (positive LLR → 1).
    pub bits: BitVector,
    /// True iff the decisions satisfy every check.
    pub converged: bool,
    /// Message-passing iterations performed (0 when the channel decisions
    /// already formed a codeword).
    pub iterations: usize,
    /// Final posterior LLRs.
    pub posterior: Vec<f64>,
}

/// Tanner graph in edge-list form, ready for repeated decoding.
///
/// Edges are numbered in check order; `var_edges` maps each bit to the
/// edges incident on it.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    h: ParityCheckMatrix,
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
}

impl BpDecoder {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let mut check_ptr = Vec::with_capacity(h.n_checks() + 1);
        let mut edge_var = Vec::with_capacity(h.n_edges());
        check_ptr.push(0);
        for row in h.rows() {
            edge_var.extend_from_slice(row);
            check_ptr.push(edge_var.len());
        }
        let mut incident = vec![Vec::new(); h.n_bits()];
        for (e, &v) in edge_var.iter().enumerate() {
            incident[v].push(e);
        }
        let mut var_ptr = Vec::with_capacity(h.n_bits() + 1);
        let mut var_edges = Vec::with_capacity(edge_var.len());
        var_ptr.push(0);
        for edges in incident {
            var_edges.extend(edges);
            var_ptr.push(var_edges.len());
        }
        Self {
            h: h.clone(),
            check_ptr,
            edge_var,
            var_ptr,
            var_edges,
        }
    }

    pub fn matrix(&self) -> &ParityCheckMatrix {
        &self.h
    }

    /// Runs flooding sum-product decoding for at most `max_iters` iterations,
    /// stopping as soon as the hard decisions satisfy every check.
    ///
    /// # Panics
    ///
    /// Panics if `llr.len()` differs from the code length.
    pub fn decode(&self, llr: &LlrVector, max_iters: usize) -> BpOutcome {
        let n = self.h.n_bits();
        assert_eq!(llr.len(), n, "LLR length does not match code length");
        let channel: Vec<f64> = llr
            .as_slice()
            .iter()
            .map(|v| v.clamp(-LLR_CLAMP, LLR_CLAMP))
            .collect();

        let mut posterior = channel.clone();
        let mut bits: Vec<u8> = posterior.iter().map(|&v| u8::from(v > 0.0)).collect();
        if self.h.syndrome_is_zero(&bits) {
            return self.outcome(bits, true, 0, posterior);
        }

        let n_edges = self.edge_var.len();
        let mut var_to_check: Vec<f64> = self.edge_var.iter().map(|&v| channel[v]).collect();
        let mut check_to_var = vec![0.0; n_edges];
        let mut tanhs: Vec<f64> = Vec::new();
        let mut suffix: Vec<f64> = Vec::new();

        for iter in 1..=max_iters {
            // Check update. In the ln P(1)/P(0) convention the rule reads
            // tanh(-m/2) = prod tanh(-q/2), so the sign flips with the
            // number of incoming messages.
            for c in 0..self.check_ptr.len() - 1 {
                let (lo, hi) = (self.check_ptr[c], self.check_ptr[c + 1]);
                let degree = hi - lo;
                tanhs.clear();
                tanhs.extend(var_to_check[lo..hi].iter().map(|&q| (-0.5 * q).tanh()));
                suffix.clear();
                suffix.resize(degree + 1, 1.0);
                for k in (0..degree).rev() {
                    suffix[k] = suffix[k + 1] * tanhs[k];
                }
                let mut prefix = 1.0;
                for k in 0..degree {
                    let prod = (prefix * suffix[k + 1]).clamp(-TANH_LIMIT, TANH_LIMIT);
                    check_to_var[lo + k] = (-2.0 * prod.atanh()).clamp(-LLR_CLAMP, LLR_CLAMP);
                    prefix *= tanhs[k];
                }
            }

            // Variable update and posteriors.
            for v in 0..n {
                let edges = &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]];
                let total = channel[v] + edges.iter().map(|&e| check_to_var[e]).sum::<f64>();
                posterior[v] = total;
                bits[v] = u8::from(total > 0.0);
                for &e in edges {
                    var_to_check[e] = (total - check_to_var[e]).clamp(-LLR_CLAMP, LLR_CLAMP);
                }
            }

            if self.h.syndrome_is_zero(&bits) {
                return self.outcome(bits, true, iter, posterior);
            }
        }
        self.outcome(bits, false, max_iters, posterior)
    }

    fn outcome(
        &self,
        bits: Vec<u8>,
        converged: bool,
        iterations: usize,
        posterior: Vec<f64>,
    ) -> BpOutcome {
        BpOutcome {
            bits: BitVector(bits),
            converged,
            iterations,
            posterior,
        }
    }
}

/// Decodes `llr` on the Tanner graph of `h`; see [`BpDecoder::decode`].
pub fn bp_decode(h: &ParityCheckMatrix, llr: &LlrVector, max_iters: usize) -> BpOutcome {
    BpDecoder::new(h).decode(llr, max_iters)
}
