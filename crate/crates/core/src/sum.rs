//! Order-fixed reductions.
//!
//! Every aggregate in this crate goes through [`pairwise_sum`] so that the
//! result depends only on the input order, never on thread scheduling.

const BASE: usize = 16;

/// Pairwise (cascade) summation with a fixed split rule.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BASE {
        return values.iter().fold(0.0, |acc, v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Arithmetic mean via [`pairwise_sum`]. `None` for an empty slice.
pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(pairwise_sum(values) / values.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn matches_naive_sum_on_small_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(mean(&v), Some(500.5));
    }

    #[test]
    fn empty() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(mean(&[]), None);
    }
}
