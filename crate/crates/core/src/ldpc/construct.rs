//! Regular LDPC construction with 4-cycle avoidance.

use super::{LdpcError, ParityCheckMatrix};
use crate::rng::RngStream;

const GIRTH_ATTEMPTS: usize = 200;
const RELAXED_ATTEMPTS: usize = 200;

/// Builds a random regular matrix with exact column degree `col_degree` and
/// row degree `row_degree`.
///
/// Columns are connected one at a time. Each column picks the checks with
/// the most remaining capacity, ties broken by the seeded stream, skipping
/// any check that would close a 4-cycle. If no 4-cycle-free matrix appears
/// within the retry budget the cycle constraint is dropped (exact degrees
/// are kept); use [`ParityCheckMatrix::has_4cycle`] to see which case
/// occurred.
pub fn construct_regular(
    n_bits: usize,
    col_degree: usize,
    row_degree: usize,
    seed: u64,
) -> Result<ParityCheckMatrix, LdpcError> {
    if col_degree < 2 || row_degree < 2 {
        return Err(LdpcError::InfeasibleDegrees(format!(
            "degrees must be at least 2, got column {col_degree} row {row_degree}"
        )));
    }
    let edges = n_bits * col_degree;
    if !edges.is_multiple_of(row_degree) {
        return Err(LdpcError::InfeasibleDegrees(format!(
            "{n_bits} x {col_degree} = {edges} is not divisible by row degree {row_degree}"
        )));
    }
    let n_checks = edges / row_degree;
    if n_checks >= n_bits {
        return Err(LdpcError::InfeasibleDegrees(format!(
            "{n_checks} checks for {n_bits} bits leaves no information bits"
        )));
    }
    if col_degree > n_checks {
        return Err(LdpcError::InfeasibleDegrees(format!(
            "column degree {col_degree} exceeds the {n_checks} available checks"
        )));
    }

    let mut attempt = 0u64;
    for avoid_4cycles in [true, false] {
        let budget = if avoid_4cycles {
            GIRTH_ATTEMPTS
        } else {
            RELAXED_ATTEMPTS
        };
        for _ in 0..budget {
            let mut rng = RngStream::new(seed, attempt);
            attempt += 1;
            if let Some(rows) = try_build(
                n_bits,
                n_checks,
                col_degree,
                row_degree,
                avoid_4cycles,
                &mut rng,
            ) {
                return ParityCheckMatrix::from_rows(n_bits, rows);
            }
        }
    }
    Err(LdpcError::RetryBudgetExhausted {
        attempts: attempt as usize,
    })
}

fn try_build(
    n_bits: usize,
    n_checks: usize,
    col_degree: usize,
    row_degree: usize,
    avoid_4cycles: bool,
    rng: &mut RngStream,
) -> Option<Vec<Vec<usize>>> {
    let mut rows: Vec<Vec<usize>> = vec![Vec::with_capacity(row_degree); n_checks];
    let mut cols: Vec<Vec<usize>> = vec![Vec::with_capacity(col_degree); n_bits];
    let mut capacity = vec![row_degree; n_checks];
    // blocked[c] == stamp: check c is already chosen for the current bit or
    // shares a bit with one that is
    let mut blocked = vec![usize::MAX; n_checks];
    let mut order: Vec<usize> = (0..n_checks).collect();
    let mut bit_order: Vec<usize> = (0..n_bits).collect();
    rng.shuffle(&mut bit_order);

    for (stamp, &bit) in bit_order.iter().enumerate() {
        rng.shuffle(&mut order);
        for _ in 0..col_degree {
            let pick = order
                .iter()
                .copied()
                .filter(|&c| capacity[c] > 0 && blocked[c] != stamp)
                .max_by_key(|&c| capacity[c])?;
            blocked[pick] = stamp;
            if avoid_4cycles {
                for &other_bit in &rows[pick] {
                    for &c in &cols[other_bit] {
                        blocked[c] = stamp;
                    }
                }
            }
            rows[pick].push(bit);
            cols[bit].push(pick);
            capacity[pick] -= 1;
        }
    }
    Some(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degrees(h: &ParityCheckMatrix) -> (Vec<usize>, Vec<usize>) {
        (
            h.cols().iter().map(Vec::len).collect(),
            h.rows().iter().map(Vec::len).collect(),
        )
    }

    #[test]
    fn default_code_shape() {
        let h = construct_regular(1010, 3, 6, 1).unwrap();
        assert_eq!((h.n_checks(), h.n_bits()), (505, 1010));
        let (cols, rows) = degrees(&h);
        assert!(cols.iter().all(|&d| d == 3));
        assert!(rows.iter().all(|&d| d == 6));
        assert!(!h.has_4cycle());
        assert!(h.is_consistent());
        let k = h.n_bits() - h.rank();
        assert!((505..=507).contains(&k), "k = {k}");
    }

    #[test]
    fn tiny_code_degree_profile() {
        let h = construct_regular(6, 2, 4, 7).unwrap();
        assert_eq!((h.n_checks(), h.n_bits()), (3, 6));
        let (cols, rows) = degrees(&h);
        assert_eq!(cols, vec![2; 6]);
        assert_eq!(rows, vec![4; 3]);
        // six columns over three check pairs must repeat a pair
        assert!(h.has_4cycle());
    }

    #[test]
    fn deterministic_in_seed() {
        let a = construct_regular(96, 3, 6, 11).unwrap();
        let b = construct_regular(96, 3, 6, 11).unwrap();
        let c = construct_regular(96, 3, 6, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn infeasible_profiles() {
        assert!(matches!(
            construct_regular(5, 3, 4, 0),
            Err(LdpcError::InfeasibleDegrees(msg)) if msg.contains("15")
        ));
        assert!(construct_regular(10, 1, 2, 0).is_err());
        assert!(construct_regular(12, 4, 4, 0).is_err());
    }
}
