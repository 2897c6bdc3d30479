//! Thin SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! Column pairs of a working copy of `X` are rotated until every pair is
//! numerically orthogonal. The column norms are then the singular values,
//! the normalized columns the left singular vectors, and the accumulated
//! rotations the right singular vectors. Wide inputs are handled through the
//! transpose.

use crate::matrix::Matrix;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// Left singular vectors ("basis spectra"), rows × d.
    pub u: Matrix,
    /// Singular values, descending.
    pub singular_values: Vec<f64>,
    /// Right singular vectors ("time activations"), cols × d.
    pub v: Matrix,
    /// False when the input was all zeros; `u` and `v` are then arbitrary
    /// orthonormal bases rather than factors of anything.
    pub usable: bool,
}

impl SvdResult {
    pub fn rank_dimension(&self) -> usize {
        self.singular_values.len()
    }

    /// `U · diag(D) · Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let d = self.singular_values.len();
        let scaled_u = Matrix::from_fn(self.u.rows(), d, |r, c| {
            self.u[(r, c)] * self.singular_values[c]
        });
        scaled_u.matmul(&self.v.transpose())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn pair_mut(cols: &mut [Vec<f64>], p: usize, q: usize) -> (&mut Vec<f64>, &mut Vec<f64>) {
    debug_assert!(p < q);
    let (head, tail) = cols.split_at_mut(q);
    (&mut head[p], &mut tail[0])
}

fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xp, yp) = (*x, *y);
        *x = c * xp - s * yp;
        *y = s * xp + c * yp;
    }
}

/// Orthogonalizes the columns of a tall matrix in place and returns the
/// accumulated right rotation as columns.
fn jacobi_sweeps(cols: &mut [Vec<f64>]) -> Vec<Vec<f64>> {
    let n = cols.len();
    let m = cols.first().map_or(0, Vec::len);
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let tol = (m.max(n) as f64) * f64::EPSILON;
    let mut sq_norms: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let alpha = sq_norms[p];
                let beta = sq_norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(&cols[p], &cols[q]);
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;

                let (a, b) = pair_mut(cols, p, q);
                rotate(a, b, c, s);
                let (a, b) = pair_mut(&mut v, p, q);
                rotate(a, b, c, s);

                sq_norms[p] = alpha - t * gamma;
                sq_norms[q] = beta + t * gamma;
            }
        }
        // refresh the running norms so rounding drift never stalls convergence
        for (sq, c) in sq_norms.iter_mut().zip(cols.iter()) {
            *sq = dot(c, c);
        }
        if !rotated {
            break;
        }
    }
    v
}

/// Gram-Schmidt completion: the first standard basis vector (by index) with
/// a substantial component outside `basis`, orthonormalized against it.
fn orthonormal_completion(basis: &[Vec<f64>], dim: usize) -> Vec<f64> {
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for b in basis {
                let proj = dot(&e, b);
                for (x, y) in e.iter_mut().zip(b) {
                    *x -= proj * y;
                }
            }
        }
        let len = norm(&e);
        if len > 0.5 {
            return e.into_iter().map(|x| x / len).collect();
        }
    }
    unreachable!("basis of size {} cannot span R^{dim}", basis.len())
}

/// Flips column pairs so the largest-magnitude entry of each left singular
/// vector is non-negative (lowest row index wins ties).
fn normalize_signs(u: &mut [Vec<f64>], v: &mut [Vec<f64>]) {
    for (uc, vc) in u.iter_mut().zip(v.iter_mut()) {
        let mut pivot = 0;
        for (i, x) in uc.iter().enumerate() {
            if x.abs() > uc[pivot].abs() {
                pivot = i;
            }
        }
        if uc[pivot] < 0.0 {
            uc.iter_mut().for_each(|x| *x = -*x);
            vc.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Left vectors, singular values, right vectors (column lists), usable.
type TallSvd = (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>, bool);

fn svd_tall(x: &Matrix) -> TallSvd {
    let (m, n) = x.shape();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|c| x.column(c)).collect();
    let rotations = jacobi_sweeps(&mut cols);

    let sigmas: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigmas[b].total_cmp(&sigmas[a]).then(a.cmp(&b)));

    let sigma_max = order.first().map_or(0.0, |&j| sigmas[j]);
    let usable = sigma_max > 0.0;
    let zero_tol = sigma_max * (m.max(n) as f64) * f64::EPSILON;

    let mut u: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    for &j in &order {
        let sigma = sigmas[j];
        let column = if usable && sigma > zero_tol {
            cols[j].iter().map(|x| x / sigma).collect()
        } else {
            orthonormal_completion(&u, m)
        };
        u.push(column);
        v.push(rotations[j].clone());
        d.push(if usable { sigma } else { 0.0 });
    }
    (u, d, v, usable)
}

/// Thin SVD `X = U·diag(D)·Vᵀ` with `d = min(rows, cols)`.
///
/// All-zero input yields zero singular values, orthonormal placeholder
/// factors and `usable == false`.
pub fn svd(x: &Matrix) -> SvdResult {
    let (rows, cols) = x.shape();
    let (mut u, d, mut v, usable) = if rows >= cols {
        svd_tall(x)
    } else {
        let (vt, d, ut, usable) = svd_tall(&x.transpose());
        (ut, d, vt, usable)
    };
    normalize_signs(&mut u, &mut v);
    SvdResult {
        u: Matrix::from_columns(&u),
        singular_values: d,
        v: Matrix::from_columns(&v),
        usable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram_error(m: &Matrix) -> f64 {
        let g = m.transpose().matmul(m);
        let id = Matrix::identity(g.rows());
        let mut worst: f64 = 0.0;
        for r in 0..g.rows() {
            for c in 0..g.cols() {
                worst = worst.max((g[(r, c)] - id[(r, c)]).abs());
            }
        }
        worst
    }

    #[test]
    fn identity_matrix() {
        let r = svd(&Matrix::identity(3));
        assert_eq!(r.singular_values.len(), 3);
        for s in &r.singular_values {
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert!(r.usable);
    }

    #[test]
    fn rank_one_constant() {
        let r = svd(&Matrix::from_row_major(2, 2, vec![2.0, 2.0, 2.0, 2.0]));
        assert!((r.singular_values[0] - 4.0).abs() < 1e-12);
        assert!(r.singular_values[1].abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.u[(0, 0)] - h).abs() < 1e-12);
        assert!((r.u[(1, 0)] - h).abs() < 1e-12);
        assert!(gram_error(&r.u) < 1e-12);
        assert!(gram_error(&r.v) < 1e-12);
    }

    #[test]
    fn zero_matrix_is_flagged() {
        let r = svd(&Matrix::zeros(5, 4));
        assert!(!r.usable);
        assert!(r.singular_values.iter().all(|&s| s == 0.0));
        assert!(gram_error(&r.u) < 1e-15);
    }

    #[test]
    fn wide_matrix_goes_through_transpose() {
        let x = Matrix::from_row_major(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let r = svd(&x);
        assert_eq!(r.u.shape(), (2, 2));
        assert_eq!(r.v.shape(), (3, 2));
        let back = r.reconstruct();
        for (a, b) in back.as_slice().iter().zip(x.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
        // known singular values of [[1,2,3],[4,5,6]]
        assert!((r.singular_values[0] - 9.508_032_000_695_724).abs() < 1e-12);
        assert!((r.singular_values[1] - 0.772_869_635_673_484_4).abs() < 1e-12);
    }

    #[test]
    fn sign_convention_holds() {
        let x = Matrix::from_row_major(3, 2, vec![-1.0, 0.5, -3.0, 0.2, -0.5, 4.0]);
        let r = svd(&x);
        for c in 0..2 {
            let col = r.u.column(c);
            let pivot = col
                .iter()
                .enumerate()
                .fold(0, |p, (i, x)| if x.abs() > col[p].abs() { i } else { p });
            assert!(col[pivot] >= 0.0);
        }
    }
}
