//! Small dense complex solves. The zero-forcing systems are `t x t` with
//! `t` in the single digits, so Gauss-Jordan with partial pivoting and an
//! explicit inverse (for the 1-norm condition estimate) is all that is
//! needed.

use num::complex::Complex64;

#[derive(Debug, Clone)]
pub(crate) struct SolveOutcome {
    pub solution: Vec<Complex64>,
    /// 1-norm condition estimate `|A|_1 * |A^-1|_1`.
    pub condition: f64,
}

fn norm1(a: &[Complex64], n: usize) -> f64 {
    (0..n)
        .map(|c| (0..n).map(|r| a[r * n + c].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solve `A x = b` for row-major square `a`. Returns `None` when a pivot
/// vanishes exactly; near-singularity shows up in the condition number.
pub(crate) fn solve_with_condition(
    a: &[Complex64],
    n: usize,
    b: &[Complex64],
) -> Option<SolveOutcome> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // Augmented [A | I | b], row-major with width 2n + 1.
    let width = 2 * n + 1;
    let mut w = vec![zero; n * width];
    for r in 0..n {
        w[r * width..r * width + n].copy_from_slice(&a[r * n..(r + 1) * n]);
        w[r * width + n + r] = one;
        w[r * width + 2 * n] = b[r];
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                w[i * width + col]
                    .norm()
                    .total_cmp(&w[j * width + col].norm())
            })
            .expect("non-empty range");
        if w[pivot_row * width + col].norm() == 0.0 {
            return None;
        }
        if pivot_row != col {
            for k in 0..width {
                w.swap(pivot_row * width + k, col * width + k);
            }
        }
        let pivot = w[col * width + col];
        for k in 0..width {
            w[col * width + k] /= pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = w[r * width + col];
            if factor == zero {
                continue;
            }
            for k in 0..width {
                let sub = factor * w[col * width + k];
                w[r * width + k] -= sub;
            }
        }
    }
    let mut inverse = vec![zero; n * n];
    let mut solution = vec![zero; n];
    for r in 0..n {
        inverse[r * n..(r + 1) * n].copy_from_slice(&w[r * width + n..r * width + 2 * n]);
        solution[r] = w[r * width + 2 * n];
    }
    Some(SolveOutcome {
        solution,
        condition: norm1(a, n) * norm1(&inverse, n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_known_system() {
        // [[1, i], [2, -1]] x = [1+i, 0]  =>  x = A^-1 b.
        let a = vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(-1.0, 0.0)];
        let b = vec![c(1.0, 1.0), c(0.0, 0.0)];
        let out = solve_with_condition(&a, 2, &b).unwrap();
        for r in 0..2 {
            let lhs = a[r * 2] * out.solution[0] + a[r * 2 + 1] * out.solution[1];
            assert!((lhs - b[r]).norm() < 1e-12);
        }
        assert!(out.condition >= 1.0);
    }

    #[test]
    fn identity_is_perfectly_conditioned() {
        let a = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let b = vec![c(3.0, -2.0), c(0.5, 0.0)];
        let out = solve_with_condition(&a, 2, &b).unwrap();
        assert_eq!(out.solution, b);
        assert!((out.condition - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_exact_singularity() {
        let a = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        let b = vec![c(1.0, 0.0), c(1.0, 0.0)];
        assert!(solve_with_condition(&a, 2, &b).is_none());
    }

    #[test]
    fn random_roundtrip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for n in 1..=6usize {
            let a: Vec<Complex64> = (0..n * n)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let b: Vec<Complex64> = (0..n)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let out = solve_with_condition(&a, n, &b).unwrap();
            for r in 0..n {
                let lhs: Complex64 = (0..n).map(|k| a[r * n + k] * out.solution[k]).sum();
                assert!((lhs - b[r]).norm() < 1e-9 * out.condition.max(1.0));
            }
        }
    }
}
