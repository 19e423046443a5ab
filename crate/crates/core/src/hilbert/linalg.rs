//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    frobenius(&(m - m.adjoint()))
}

/// `|v⟩⟨v|` for an arbitrary (not necessarily normalized) vector.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Zeroes entries far below the largest one. nalgebra's iterative
/// decompositions can stall on roundoff-sized entries and return inaccurate
/// factors; clearing them changes the matrix by a negligible amount.
fn scrub<T: nalgebra::ComplexField<RealField = f64> + Copy>(m: &DMatrix<T>) -> DMatrix<T> {
    let scale = m.iter().map(|x| x.modulus()).fold(0.0, f64::max);
    let cut = 1e-15 * scale;
    m.map(|x| if x.modulus() <= cut { T::zero() } else { x })
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// Column `i` of the returned matrix belongs to eigenvalue `i`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = scrub(&((m + m.adjoint()) * real(0.5)));
    let accurate = |e: &SymmetricEigen<C64, nalgebra::Dyn>| {
        let v = &e.eigenvectors;
        let d = CMatrix::from_diagonal(&e.eigenvalues.map(real));
        frobenius(&(v * d * v.adjoint() - &herm)) <= 1e-12 * frobenius(&herm).max(1.0)
    };
    let mut eig = SymmetricEigen::new(herm.clone());
    if !accurate(&eig) {
        if let Some(e) = SymmetricEigen::try_new(herm.clone(), 1e-13, 100_000).filter(accurate) {
            eig = e;
        }
    }
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

/// Singular value decomposition `(U, σ, Vᵀ)` with the factors checked
/// against the input. Falls back to a looser convergence threshold, then to
/// the transpose, then to the eigen-decomposition of the Gram matrix.
pub fn checked_svd(a: &RMatrix) -> (RMatrix, RVector, RMatrix) {
    let a = scrub(a);
    let norm = a.norm().max(1.0);
    let check = |u: &RMatrix, s: &RVector, vt: &RMatrix, target: &RMatrix| {
        (u * RMatrix::from_diagonal(s) * vt - target).norm() <= 1e-12 * norm
    };
    let attempt = |m: &RMatrix, eps: Option<f64>| {
        let svd = match eps {
            None => Some(m.clone().svd(true, true)),
            Some(eps) => m.clone().try_svd(true, true, eps, 100_000),
        }?;
        let (u, vt) = (svd.u?, svd.v_t?);
        check(&u, &svd.singular_values, &vt, m).then_some((u, svd.singular_values, vt))
    };
    if let Some(r) = attempt(&a, None).or_else(|| attempt(&a, Some(1e-13))) {
        return r;
    }
    let at = a.transpose();
    if let Some((u, s, vt)) = attempt(&at, None).or_else(|| attempt(&at, Some(1e-13))) {
        return (vt.transpose(), s, u.transpose());
    }
    // AᵀA = V Σ² Vᵀ; columns of U for nonzero σ are A v / σ
    let g = a.transpose() * &a;
    let eig = SymmetricEigen::new(g);
    let n = a.ncols();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let k = a.nrows().min(n);
    let v = RMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let s = RVector::from_fn(k, |i, _| eig.eigenvalues[order[i]].max(0.0).sqrt());
    let mut u = RMatrix::zeros(a.nrows(), k);
    for i in 0..k {
        if s[i] > 1e-300 {
            u.set_column(i, &(&a * v.column(i) / s[i]));
        }
    }
    let vt = if a.nrows() >= n {
        v.transpose()
    } else {
        v.columns(0, k).transpose()
    };
    (u, s, vt)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Coordinates in the Hilbert–Schmidt orthonormal Hermitian basis returned by
/// [`hermitian_basis`]. Only the Hermitian part of `m` is seen.
pub fn hermitian_coords(m: &CMatrix) -> RVector {
    let d = m.nrows();
    let s = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(m[(i, i)].re);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out.push(s * z.re);
            out.push(s * z.im);
        }
    }
    RVector::from_vec(out)
}

pub fn from_hermitian_coords(coords: &[f64], d: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(d, d);
    let mut it = coords.iter();
    for i in 0..d {
        m[(i, i)] = real(*it.next().expect("coordinate count"));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let re = *it.next().expect("coordinate count");
            let im = *it.next().expect("coordinate count");
            m[(i, j)] = c(re * s, im * s);
            m[(j, i)] = c(re * s, -im * s);
        }
    }
    m
}

/// Hilbert–Schmidt orthonormal basis of Hermitian `d×d` matrices.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    (0..d * d)
        .map(|k| {
            let mut e = vec![0.0; d * d];
            e[k] = 1.0;
            from_hermitian_coords(&e, d)
        })
        .collect()
}

/// Real and imaginary parts of every entry, row-major.
pub fn flatten_real(m: &CMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * m.len());
    for r in 0..m.nrows() {
        for col in 0..m.ncols() {
            let z = m[(r, col)];
            out.push(z.re);
            out.push(z.im);
        }
    }
    out
}

/// Hilbert–Schmidt inner product `Re tr(a† b)`.
pub fn hs_real(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Orthonormal basis (as columns) of the null space of `a`.
/// A right-singular vector is null when its singular value is at most `tol`.
pub fn null_space(a: &RMatrix, tol: f64) -> RMatrix {
    let n = a.ncols();
    if n == 0 {
        return RMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return RMatrix::identity(n, n);
    }
    // thin SVD only yields min(rows, cols) right vectors; pad to square.
    // Tall systems are reduced to their n x n R factor first, which has the
    // same null space and keeps the SVD small.
    let square = if a.nrows() < n {
        a.clone().resize_vertically(n, 0.0)
    } else if a.nrows() > n {
        a.clone().qr().r()
    } else {
        a.clone()
    };
    let (_, sv, v_t) = checked_svd(&square);
    let cols: Vec<RVector> = sv
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        RMatrix::zeros(n, 0)
    } else {
        RMatrix::from_columns(&cols)
    }
}

/// Minimum-norm least-squares solution of `a x = b` and the residual `‖a x − b‖₂`.
pub fn least_squares(a: &RMatrix, b: &RVector) -> (RVector, f64) {
    if a.ncols() == 0 {
        return (RVector::zeros(0), b.norm());
    }
    let (u, sv, v_t) = checked_svd(a);
    let smax = sv.max();
    let eps = 1e-12 * smax.max(1.0);
    let ub = u.transpose() * b;
    let scaled = RVector::from_fn(sv.len(), |i, _| if sv[i] > eps { ub[i] / sv[i] } else { 0.0 });
    let x = v_t.transpose() * scaled;
    let residual = (a * &x - b).norm();
    (x, residual)
}

/// Orthogonal projector onto the span of the given orthonormal columns.
pub fn projector_from_columns(q: &CMatrix) -> CMatrix {
    q * q.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_coords_round_trip() {
        let m = CMatrix::from_row_slice(2, 2, &[real(0.3), c(0.1, -0.4), c(0.1, 0.4), real(-1.2)]);
        let back = from_hermitian_coords(hermitian_coords(&m).as_slice(), 2);
        assert!(frobenius(&(back - &m)) < 1e-15);
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let b = hermitian_basis(3);
        for (i, x) in b.iter().enumerate() {
            assert!(hermitian_residual(x) < 1e-15);
            for (j, y) in b.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((hs_real(x, y) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn null_space_of_rank_one_row() {
        let a = RMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let n = null_space(&a, 1e-10);
        assert_eq!(n.ncols(), 2);
        assert!((&a * &n).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_sorted() {
        let m = CMatrix::from_row_slice(2, 2, &[real(2.0), ZERO, ZERO, real(-1.0)]);
        let (vals, _) = hermitian_eigen(&m);
        assert_eq!(vals, vec![-1.0, 2.0]);
    }
}
