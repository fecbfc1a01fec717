//! Small numerical helpers shared by the models.

use alloc::vec::Vec;

/// `ln(k!)` for `k = 0..=n`, evaluated with the log-gamma function.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    (0..=n).map(|k| libm::lgamma(k as f64 + 1.0)).collect()
}

/// Sum of `values` by a fixed binary tree split at the midpoint.
///
/// The association order depends only on the length, so the result is
/// bit-identical however the caller produced the values.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len => {
            let (left, right) = values.split_at(len / 2);
            pairwise_sum(left) + pairwise_sum(right)
        }
    }
}

/// Accumulates signed terms given as `(sign, ln|term|)`.
///
/// Terms of each sign are summed separately in ascending magnitude relative
/// to the largest, and the two partial sums are subtracted once at the end.
#[derive(Debug, Default, Clone)]
pub struct SignedLogSum {
    positive: Vec<f64>,
    negative: Vec<f64>,
}

impl SignedLogSum {
    /// Empty accumulator.
    pub fn new() -> Self {
        Self::default()
    }

    /// Clears the accumulator, keeping its allocations.
    pub fn clear(&mut self) {
        self.positive.clear();
        self.negative.clear();
    }

    /// Adds `sign * exp(ln_magnitude)`. A magnitude of `-inf` is a zero term.
    pub fn push(&mut self, negative: bool, ln_magnitude: f64) {
        if ln_magnitude == f64::NEG_INFINITY {
            return;
        }
        if negative {
            self.negative.push(ln_magnitude);
        } else {
            self.positive.push(ln_magnitude);
        }
    }

    /// Value of the accumulated sum.
    pub fn value(&mut self) -> f64 {
        group_sum(&mut self.positive) - group_sum(&mut self.negative)
    }
}

fn group_sum(logs: &mut [f64]) -> f64 {
    if logs.is_empty() {
        return 0.0;
    }
    logs.sort_unstable_by(|a, b| a.total_cmp(b));
    let max = logs[logs.len() - 1];
    let scaled: f64 = logs.iter().map(|&l| libm::exp(l - max)).sum();
    libm::exp(max) * scaled
}

/// Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues3(m: [[f64; 3]; 3]) -> [f64; 3] {
    let mut a = m;
    for _ in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off <= 1e-30 * diag || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
            let c = 1.0 / libm::sqrt(t * t + 1.0);
            let s = t * c;
            // a <- R^T a R with the rotation in the (p, q) plane
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
        }
    }
    let mut eig = [a[0][0], a[1][1], a[2][2]];
    eig.sort_unstable_by(|x, y| x.total_cmp(y));
    eig
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorials_match_products() {
        let table = ln_factorials(20);
        let mut fact = 1.0f64;
        for (k, &lf) in table.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((lf - libm::log(fact)).abs() < 1e-12 * lf.max(1.0));
        }
        // 170! is the largest factorial representable in f64
        assert!(ln_factorials(170)[170] > 700.0);
    }

    #[test]
    fn signed_sum_handles_cancellation_and_zero_terms() {
        let mut acc = SignedLogSum::new();
        acc.push(false, libm::log(3.0));
        acc.push(true, libm::log(1.0));
        acc.push(false, f64::NEG_INFINITY);
        assert!((acc.value() - 2.0).abs() < 1e-15);

        let mut big = SignedLogSum::new();
        big.push(false, 800.0);
        big.push(false, 800.0);
        assert!(big.value().is_infinite());
        assert_eq!(SignedLogSum::new().value(), 0.0);
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let v: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        assert_eq!(pairwise_sum(&v), pairwise_sum(&v.clone()));
        assert!((pairwise_sum(&v) - v.iter().sum::<f64>()).abs() < 1e-12);
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[2.5]), 2.5);
    }

    #[test]
    fn jacobi_eigenvalues() {
        let eig = symmetric_eigenvalues3([[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]]);
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
        assert!((eig[2] - 5.0).abs() < 1e-12);
    }
}
