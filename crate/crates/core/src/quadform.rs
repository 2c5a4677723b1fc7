//! Symmetric 4x4 quadratic forms: principal minors, eigenvalues, and the
//! positive-semidefiniteness test.
//!
//! The PSD decision is made from the fifteen principal minors (a symmetric
//! matrix is PSD iff every principal minor is non-negative); the Jacobi
//! eigenvalue routine provides an independent second route used by the
//! cross-check tests and the feasibility search.

use serde::Serialize;

use crate::scalar::Scalar;
use crate::tol::PSD_REL_TOL;
use crate::vec::SpatialVec;

/// Symmetric 4x4 matrix stored as the upper triangle (row-major):
/// `[a11, a12, a13, a14, a22, a23, a24, a33, a34, a44]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadForm4<T = f64> {
    upper: [T; 10],
}

/// The fifteen principal minors of a 4x4 symmetric matrix.
///
/// `d2[h][k]` conventions follow the habit of naming a minor by the deleted
/// rows/columns: `d2` holds the six 2x2 minors `d_{h,k}` (rows/cols `h` and
/// `k` deleted, `h < k`, in the order (1,2),(1,3),(1,4),(2,3),(2,4),(3,4));
/// `d3` holds the four 3x3 minors `d_h` (row/col `h` deleted, h = 1..4).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PrincipalMinors<T = f64> {
    /// Diagonal entries `a11..a44`.
    pub d1: [T; 4],
    /// 2x2 minors by deleted pair: `d_{1,2}, d_{1,3}, d_{1,4}, d_{2,3}, d_{2,4}, d_{3,4}`.
    pub d2: [T; 6],
    /// 3x3 minors by deleted index: `d_1, d_2, d_3, d_4`.
    pub d3: [T; 4],
    /// Full determinant.
    pub det: T,
}

impl<T: Scalar> PrincipalMinors<T> {
    /// All fifteen minors in documented order (diagonals, 2x2 by deleted
    /// pair, 3x3 by deleted index, determinant).
    pub fn to_vec(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(15);
        v.extend_from_slice(&self.d1);
        v.extend_from_slice(&self.d2);
        v.extend_from_slice(&self.d3);
        v.push(self.det);
        v
    }

    /// Minor order (1, 2, 3 or 4) for each slot of [`Self::to_vec`].
    pub fn orders() -> [usize; 15] {
        [1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 4]
    }
}

impl<T: Scalar> QuadForm4<T> {
    pub fn from_upper(upper: [T; 10]) -> Self {
        Self { upper }
    }

    /// Builds from a full matrix; the strictly lower triangle is ignored.
    pub fn from_matrix(m: [[T; 4]; 4]) -> Self {
        Self {
            upper: [
                m[0][0], m[0][1], m[0][2], m[0][3], m[1][1], m[1][2], m[1][3], m[2][2], m[2][3],
                m[3][3],
            ],
        }
    }

    pub fn zero() -> Self {
        Self {
            upper: [T::zero(); 10],
        }
    }

    /// Entry `(i, j)` with 0-based indices.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        // Offset of row r in the packed upper triangle of a 4x4 matrix.
        const ROW_OFFSET: [usize; 4] = [0, 4, 7, 9];
        self.upper[ROW_OFFSET[r] + (c - r)]
    }

    pub fn to_matrix(&self) -> [[T; 4]; 4] {
        let mut m = [[T::zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = self.get(i, j);
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> T {
        let mut acc = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                let v = self.get(i, j);
                acc += v * v;
            }
        }
        acc.sqrt()
    }

    /// Evaluates the form on four vector slots:
    /// `sum_i a_ii |x_i|^2 + 2 sum_{i<j} a_ij x_i . x_j`.
    pub fn value(&self, x: &[SpatialVec<T>; 4]) -> T {
        let mut acc = T::zero();
        for i in 0..4 {
            acc += self.get(i, i) * x[i].norm_sq();
            for j in (i + 1)..4 {
                acc += T::two() * self.get(i, j) * x[i].dot(&x[j]);
            }
        }
        acc
    }

    fn det2(&self, keep: [usize; 2]) -> T {
        let [a, b] = keep;
        self.get(a, a) * self.get(b, b) - self.get(a, b) * self.get(b, a)
    }

    fn det3(&self, keep: [usize; 3]) -> T {
        let m = |r: usize, c: usize| self.get(keep[r], keep[c]);
        m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
            - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
    }

    fn det4(&self) -> T {
        // Cofactor expansion along the first row against 3x3 minors of
        // rows {2,3,4}.
        let mut acc = T::zero();
        let mut sign = T::one();
        for c in 0..4 {
            acc += sign * self.get(0, c) * self.det3_cols([1, 2, 3], c);
            sign = -sign;
        }
        acc
    }

    /// 3x3 determinant of the given rows and the three columns != `skip_col`.
    fn det3_cols(&self, rows: [usize; 3], skip_col: usize) -> T {
        let mut cols = [0usize; 3];
        let mut n = 0;
        for k in 0..4 {
            if k != skip_col {
                cols[n] = k;
                n += 1;
            }
        }
        let m = |r: usize, c: usize| self.get(rows[r], cols[c]);
        m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
            - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
    }

    /// All fifteen principal minors.
    pub fn principal_minors(&self) -> PrincipalMinors<T> {
        let d1 = [
            self.get(0, 0),
            self.get(1, 1),
            self.get(2, 2),
            self.get(3, 3),
        ];
        // d_{h,k}: delete rows/cols h and k (1-based), keep the complement.
        let d2 = [
            self.det2([2, 3]), // d_{1,2}
            self.det2([1, 3]), // d_{1,3}
            self.det2([1, 2]), // d_{1,4}
            self.det2([0, 3]), // d_{2,3}
            self.det2([0, 2]), // d_{2,4}
            self.det2([0, 1]), // d_{3,4}
        ];
        let d3 = [
            self.det3([1, 2, 3]), // d_1
            self.det3([0, 2, 3]), // d_2
            self.det3([0, 1, 3]), // d_3
            self.det3([0, 1, 2]), // d_4
        ];
        PrincipalMinors {
            d1,
            d2,
            d3,
            det: self.det4(),
        }
    }

    /// PSD test via principal minors: every minor of order `k` must be
    /// `>= -tol * max(1, ||A||_F^k)`.
    pub fn is_psd(&self, tol: T) -> bool {
        let fro = self.frobenius_norm();
        let minors = self.principal_minors().to_vec();
        let orders = PrincipalMinors::<T>::orders();
        minors.iter().zip(orders.iter()).all(|(&m, &k)| {
            let scale = T::one().max(fro.powi(k as i32));
            m >= -tol * scale
        })
    }

    /// PSD test at the default relative tolerance.
    pub fn is_psd_default(&self) -> bool {
        self.is_psd(T::of(PSD_REL_TOL))
    }

    /// Eigenvalues by cyclic Jacobi rotations, ascending. Independent of the
    /// minor route; used for cross-checks and as the search objective.
    pub fn eigenvalues(&self) -> [T; 4] {
        let mut a = self.to_matrix();
        let eps = T::of(1e-30);
        for _sweep in 0..40 {
            let mut off = T::zero();
            for p in 0..4 {
                for q in (p + 1)..4 {
                    off += a[p][q] * a[p][q];
                }
            }
            let scale = {
                let mut s = T::zero();
                for i in 0..4 {
                    s += a[i][i] * a[i][i];
                }
                s.max(T::one())
            };
            if off <= eps * scale {
                break;
            }
            for p in 0..4 {
                for q in (p + 1)..4 {
                    if a[p][q] == T::zero() {
                        continue;
                    }
                    // Classic Jacobi rotation annihilating a[p][q].
                    let theta = (a[q][q] - a[p][p]) / (T::two() * a[p][q]);
                    let t = {
                        let s = if theta >= T::zero() {
                            T::one()
                        } else {
                            -T::one()
                        };
                        s / (theta.abs() + (theta * theta + T::one()).sqrt())
                    };
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..4 {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..4 {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev = [a[0][0], a[1][1], a[2][2], a[3][3]];
        ev.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
        ev
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: [f64; 4]) -> QuadForm4 {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            m[i][i] = d[i];
        }
        QuadForm4::from_matrix(m)
    }

    #[test]
    fn packed_indexing_is_symmetric() {
        let a = QuadForm4::from_upper([1., 2., 3., 4., 5., 6., 7., 8., 9., 10.]);
        assert_eq!(a.get(0, 3), 4.0);
        assert_eq!(a.get(3, 0), 4.0);
        assert_eq!(a.get(2, 1), 6.0);
        assert_eq!(a.get(3, 3), 10.0);
    }

    #[test]
    fn minors_of_diagonal_matrix() {
        let a = diag([1.0, 2.0, 3.0, 4.0]);
        let m = a.principal_minors();
        assert_eq!(m.d1, [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.d2, [12.0, 8.0, 6.0, 4.0, 3.0, 2.0]);
        assert_eq!(m.d3, [24.0, 12.0, 8.0, 6.0]);
        assert_eq!(m.det, 24.0);
    }

    #[test]
    fn psd_and_eigen_agree_on_simple_cases() {
        let a = diag([1.0, 2.0, 3.0, 4.0]);
        assert!(a.is_psd_default());
        assert_eq!(a.eigenvalues(), [1.0, 2.0, 3.0, 4.0]);

        let b = diag([1.0, 2.0, 3.0, -0.5]);
        assert!(!b.is_psd_default());
        assert!(b.min_eigenvalue() < 0.0);
    }

    #[test]
    fn eigenvalues_of_known_matrix() {
        // [[2,1],[1,2]] block twice: eigenvalues {1,1,3,3}.
        let mut m = [[0.0; 4]; 4];
        m[0][0] = 2.0;
        m[0][1] = 1.0;
        m[1][0] = 1.0;
        m[1][1] = 2.0;
        m[2][2] = 2.0;
        m[2][3] = 1.0;
        m[3][2] = 1.0;
        m[3][3] = 2.0;
        let a = QuadForm4::from_matrix(m);
        let ev: [f64; 4] = a.eigenvalues();
        for (got, want) in ev.iter().zip([1.0, 1.0, 3.0, 3.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(a.is_psd_default());
    }

    #[test]
    fn value_matches_matrix_product() {
        let a: QuadForm4 = QuadForm4::from_upper([1., 2., 3., 4., 5., 6., 7., 8., 9., 10.]);
        let x = [
            SpatialVec::d1(1.0),
            SpatialVec::d1(-2.0),
            SpatialVec::d1(0.5),
            SpatialVec::d1(3.0),
        ];
        let m = a.to_matrix();
        let xv = [1.0, -2.0, 0.5, 3.0];
        let mut want = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                want += xv[i] * m[i][j] * xv[j];
            }
        }
        assert!((a.value(&x) - want).abs() < 1e-12);
    }
}
