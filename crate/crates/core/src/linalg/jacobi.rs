use super::{LinalgError, Matrix};

/// Symmetry gate shared by the symmetric eigensolver and its callers:
/// `‖m−mᵀ‖_F ≤ SYMMETRY_REL_TOL·(1+‖m‖_F)`.
pub const SYMMETRY_REL_TOL: f64 = 1e-10;

const OFF_DIAGONAL_REL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix: `m = V·diag(values)·Vᵀ`.
///
/// `values` are sorted in descending order and `vectors` holds the matching
/// unit eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenSym {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps plane rotations over all off-diagonal positions until the
/// off-diagonal Frobenius mass drops below `1e-12·‖m‖_F`, capped at 100
/// sweeps.
pub fn eig_symmetric(m: &Matrix) -> Result<EigenSym, LinalgError> {
    let residual = m.symmetry_residual();
    if residual > SYMMETRY_REL_TOL * (1.0 + m.frobenius_norm()) {
        return Err(LinalgError::NotSymmetric { residual });
    }
    let n = m.n();
    let norm = m.frobenius_norm();
    let off_target = OFF_DIAGONAL_REL_TOL * norm;

    // work on the symmetrized copy so downstream rotations see an exactly
    // symmetric matrix even when the input is only symmetric to tolerance
    let mut a = Matrix::from_fn(n, |i, j| 0.5 * (m.get(i, j) + m.get(j, i)));
    let mut v = Matrix::identity(n);

    let mut converged = off_diagonal_mass(&a) <= off_target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence {
                what: "cyclic Jacobi sweep cap",
            });
        }
        sweeps += 1;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = off_diagonal_mass(&a) <= off_target;
    }

    // sort eigenpairs by descending eigenvalue
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| a.get(k, k)).collect();
    let vectors = Matrix::from_fn(n, |i, j| v.get(i, order[j]));

    Ok(EigenSym { values, vectors })
}

/// Largest eigenvalue of a symmetric matrix and its unit eigenvector, the
/// maximizer of the Rayleigh quotient `⟨mx,x⟩` over unit vectors.
pub fn rayleigh_max(m: &Matrix) -> Result<(f64, Vec<f64>), LinalgError> {
    let eig = eig_symmetric(m)?;
    Ok((eig.values[0], eig.vectors.column(0)))
}

fn off_diagonal_mass(a: &Matrix) -> f64 {
    let n = a.n();
    let mut sum = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                let x = a.get(p, q);
                sum += x * x;
            }
        }
    }
    sum.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`, accumulated into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    if apq == 0.0 {
        return;
    }
    let theta = 0.5 * (a.get(q, q) - a.get(p, p)) / apq;
    let t = if theta.abs() > 1e150 {
        // formula underflows to 0/overflows; asymptotically t = 1/(2θ)
        0.5 / theta
    } else {
        let sign = if theta < 0.0 { -1.0 } else { 1.0 };
        sign / (theta.abs() + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = a.n();
    // rows p and q of Jᵀ·A
    for j in 0..n {
        let apj = a.get(p, j);
        let aqj = a.get(q, j);
        a.set(p, j, c * apj - s * aqj);
        a.set(q, j, s * apj + c * aqj);
    }
    // columns p and q of (Jᵀ·A)·J
    for i in 0..n {
        let aip = a.get(i, p);
        let aiq = a.get(i, q);
        a.set(i, p, c * aip - s * aiq);
        a.set(i, q, s * aip + c * aiq);
    }
    // the rotation zeroes these analytically
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);

    for i in 0..n {
        let vip = v.get(i, p);
        let viq = v.get(i, q);
        v.set(i, p, c * vip - s * viq);
        v.set(i, q, s * vip + c * viq);
    }
}
