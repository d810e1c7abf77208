//! Small dense linear-algebra kernel: skew operators, pseudo-inverses,
//! orthonormal null-space bases and minimum-norm solves.
//!
//! Every routine here is deterministic and rank-revealing (singular-value
//! based); normal-equation shortcuts are reserved for test oracles.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative rank cutoff and absolute residual bound used throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Singular values below `rank_eps * sigma_max` are treated as zero.
    pub rank_eps: f64,
    /// Absolute residual bound for consistency checks.
    pub residual_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_eps: 1e-10,
            residual_eps: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(rank_eps: f64, residual_eps: f64) -> Self {
        assert!(rank_eps > 0.0 && residual_eps > 0.0);
        Tolerance {
            rank_eps,
            residual_eps,
        }
    }
}

/// Skew-symmetric matrix representing the cross product with `r`,
/// i.e. `skew(r) * a == r x a`.
///
/// ```
/// use nalgebra::Vector3;
/// let s = wrenchdist::numerics::skew(&Vector3::new(1.0, 0.0, 0.0));
/// let a = Vector3::new(0.0, 1.0, 0.0);
/// assert_eq!(s * a, Vector3::new(0.0, 0.0, 1.0));
/// ```
pub fn skew(r: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -r.z, r.y, r.z, 0.0, -r.x, -r.y, r.x, 0.0)
}

fn svd(m: &Matrix) -> nalgebra::linalg::SVD<f64, nalgebra::Dyn, nalgebra::Dyn> {
    m.clone().svd(true, true)
}

fn max_singular(sv: &Vector) -> f64 {
    sv.iter().cloned().fold(0.0, f64::max)
}

/// Numerical rank with the relative cutoff from `tol`.
pub fn rank(m: &Matrix, tol: Tolerance) -> usize {
    let sv = m.clone().singular_values();
    let cutoff = tol.rank_eps * max_singular(&sv);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Moore-Penrose pseudo-inverse via SVD with relative singular-value cutoff.
/// The zero matrix maps to the zero (transposed-shape) matrix.
///
/// The SVD result is polished with a few Newton-Schulz steps
/// (`P <- P(2I - MP)`): the iteration preserves the row and column spaces
/// of the initial guess and converges quadratically, which repairs the
/// occasional silently-unconverged decomposition.
pub fn pseudo_inverse(m: &Matrix, tol: Tolerance) -> Matrix {
    let decomp = svd(m);
    let u = decomp.u.as_ref().expect("svd with u");
    let v_t = decomp.v_t.as_ref().expect("svd with v_t");
    let sv = &decomp.singular_values;
    let scale = max_singular(sv);
    let cutoff = tol.rank_eps * scale;
    let mut sinv = Matrix::zeros(v_t.nrows(), u.ncols());
    for i in 0..sv.len() {
        if sv[i] > cutoff {
            sinv[(i, i)] = 1.0 / sv[i];
        }
    }
    let mut p = v_t.transpose() * sinv * u.transpose();
    if scale == 0.0 {
        return p;
    }
    let eye = Matrix::identity(m.nrows(), m.nrows());
    let mut residual = (m * &p * m - m).norm();
    for _ in 0..8 {
        if residual <= 1e-14 * scale {
            break;
        }
        let candidate = &p * (&eye * 2.0 - m * &p);
        let next = (m * &candidate * m - m).norm();
        if next >= residual {
            break;
        }
        p = candidate;
        residual = next;
    }
    p
}

/// Orthonormal basis of the null space of `m`, one column per null direction.
///
/// Columns follow a deterministic sign convention: the first entry of each
/// column whose magnitude exceeds `rank_eps` is positive. Full-column-rank
/// input yields a matrix with zero columns.
pub fn null_space_basis(m: &Matrix, tol: Tolerance) -> Matrix {
    let cols = m.ncols();
    let r = rank(m, tol);
    let nullity = cols - r;
    if nullity == 0 {
        return Matrix::zeros(cols, 0);
    }
    // Right singular vectors of the smallest singular values, obtained from
    // the symmetric eigenproblem of m^T m, then refined against m itself to
    // push the residual down to working precision.
    let gram = m.transpose() * m;
    let eig = nalgebra::linalg::SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut basis = Matrix::zeros(cols, nullity);
    for (k, &idx) in order.iter().take(nullity).enumerate() {
        basis.set_column(k, &eig.eigenvectors.column(idx));
    }
    // One projection step removes the row-space leakage of the eigenvectors.
    let pinv = pseudo_inverse(m, tol);
    let refined = &basis - &pinv * (m * &basis);
    let mut out = orthonormalize(&refined, tol.rank_eps);
    apply_sign_convention(&mut out, tol.rank_eps);
    out
}

/// Modified Gram-Schmidt; drops columns that collapse below `eps` relative
/// to the largest input column norm.
pub(crate) fn orthonormalize(m: &Matrix, eps: f64) -> Matrix {
    let max_norm = (0..m.ncols())
        .map(|j| m.column(j).norm())
        .fold(0.0, f64::max);
    let mut kept: Vec<Vector> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = Vector::from_column_slice(m.column(j).as_slice());
        for q in &kept {
            let proj = q.dot(&v);
            v -= q * proj;
        }
        // second pass for numerical orthogonality
        for q in &kept {
            let proj = q.dot(&v);
            v -= q * proj;
        }
        let n = v.norm();
        if n > eps.max(1e-12) * max_norm.max(1.0) {
            kept.push(v / n);
        }
    }
    let mut out = Matrix::zeros(m.nrows(), kept.len());
    for (j, v) in kept.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

pub(crate) fn apply_sign_convention(m: &mut Matrix, eps: f64) {
    for j in 0..m.ncols() {
        let col = m.column(j);
        let lead = col
            .iter()
            .find(|x| x.abs() > eps)
            .copied()
            .unwrap_or_else(|| col.iter().cloned().fold(0.0, |a, b| {
                if b.abs() > a.abs() {
                    b
                } else {
                    a
                }
            }));
        if lead < 0.0 {
            let flipped = -m.column(j);
            m.set_column(j, &flipped);
        }
    }
}

/// Minimum-norm solution of `A x = b`; errors if `b` is not in the range of
/// `A` within `residual_eps * (1 + ||b||)`.
pub fn solve_min_norm(a: &Matrix, b: &Vector, tol: Tolerance) -> Result<Vector> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let x = pseudo_inverse(a, tol) * b;
    let residual = (a * &x - b).norm();
    if residual > tol.residual_eps * (1.0 + b.norm()) {
        return Err(Error::Inconsistent { residual });
    }
    Ok(x)
}

/// Symmetric positive semi-definite square root of a symmetric 3x3 matrix.
pub fn sym_sqrt3(m: &Matrix3<f64>) -> Matrix3<f64> {
    let eig = nalgebra::linalg::SymmetricEigen::new(*m);
    let mut d = Matrix3::zeros();
    for i in 0..3 {
        d[(i, i)] = eig.eigenvalues[i].max(0.0).sqrt();
    }
    eig.eigenvectors * d * eig.eigenvectors.transpose()
}
