//! Dense vector helpers on plain slices.

use crate::scalar::Scalar;
use crate::error::{Error, Result};

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    norm_sq(a).sqrt()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn dist_sq<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled<T: Scalar>(alpha: T, x: &[T]) -> Vec<T> {
    x.iter().map(|&v| alpha * v).collect()
}

pub fn all_finite<T: Scalar>(x: &[T]) -> bool {
    x.iter().all(|v| v.is_finite())
}

pub fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Solves the dense system `mat * x = rhs` (row-major, `dim x dim`) by Gaussian
/// elimination with partial pivoting. Returns `None` when a pivot is negligible.
pub fn solve_dense<T: Scalar>(mut mat: Vec<T>, mut rhs: Vec<T>, dim: usize) -> Option<Vec<T>> {
    debug_assert_eq!(mat.len(), dim * dim);
    let scale = mat.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    if scale == T::zero() {
        return None;
    }
    let negligible = scale * T::epsilon() * T::from_count(dim);
    for col in 0..dim {
        let pivot_row = (col..dim)
            .max_by(|&a, &b| {
                mat[a * dim + col]
                    .abs()
                    .partial_cmp(&mat[b * dim + col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        let pivot = mat[pivot_row * dim + col];
        if !(pivot.abs() > negligible) {
            return None;
        }
        if pivot_row != col {
            for j in 0..dim {
                mat.swap(col * dim + j, pivot_row * dim + j);
            }
            rhs.swap(col, pivot_row);
        }
        for row in (col + 1)..dim {
            let factor = mat[row * dim + col] / pivot;
            if factor == T::zero() {
                continue;
            }
            for j in col..dim {
                let v = mat[col * dim + j];
                mat[row * dim + j] -= factor * v;
            }
            let r = rhs[col];
            rhs[row] -= factor * r;
        }
    }
    let mut x = vec![T::zero(); dim];
    for row in (0..dim).rev() {
        let mut acc = rhs[row];
        for j in (row + 1)..dim {
            acc -= mat[row * dim + j] * x[j];
        }
        x[row] = acc / mat[row * dim + row];
    }
    if all_finite(&x) {
        Some(x)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // [2 1; 1 3] x = [3; 5] -> x = [0.8, 1.4]
        let x = solve_dense(vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0], 2).unwrap();
        assert!((x[0] - 0.8_f64).abs() < 1e-15);
        assert!((x[1] - 1.4_f64).abs() < 1e-15);
    }

    #[test]
    fn needs_pivoting() {
        let x = solve_dense(vec![0.0, 1.0, 1.0, 0.0], vec![2.0, 3.0], 2).unwrap();
        assert_eq!(x, vec![3.0_f64, 2.0]);
    }

    #[test]
    fn singular_is_none() {
        assert!(solve_dense(vec![1.0_f64, 2.0, 2.0, 4.0], vec![1.0, 2.0], 2).is_none());
        assert!(solve_dense(vec![0.0_f64; 4], vec![1.0, 2.0], 2).is_none());
    }
}
