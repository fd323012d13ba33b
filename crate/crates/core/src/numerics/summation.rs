//! Pairwise (cascade) summation with a fixed reduction tree.

use num_complex::Complex64;

const LEAF: usize = 16;

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_small_sums() {
        let xs: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn pairwise_beats_naive_on_many_tenths() {
        let xs = vec![0.1; 1 << 20];
        let exact = 0.1 * (1u64 << 20) as f64;
        let naive: f64 = xs.iter().sum();
        let pw = pairwise_sum(&xs);
        assert!((pw - exact).abs() <= (naive - exact).abs());
        assert!((pw - exact).abs() < 1e-9);
    }
}
