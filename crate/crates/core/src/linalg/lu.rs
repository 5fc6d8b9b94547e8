use super::{LinalgError, Matrix};

/// Relative pivot floor: a pivot below `1e-13·‖m‖_F` is reported as
/// singular. For resolvents `Id − t·AB` this fires exactly when `t` sits at
/// or numerically next to a blowup time, so callers treat the error as a
/// signal rather than a failure.
pub const PIVOT_REL_THRESHOLD: f64 = 1e-13;

/// Solves `m · S = rhs` for the full matrix `S` by LU factorization with
/// partial pivoting.
pub fn lu_solve(m: &Matrix, rhs: &Matrix) -> Result<Matrix, LinalgError> {
    if m.n() != rhs.n() {
        return Err(LinalgError::DimensionMismatch {
            left: m.n(),
            right: rhs.n(),
        });
    }
    let n = m.n();
    let threshold = PIVOT_REL_THRESHOLD * m.frobenius_norm();

    let mut lu = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        // partial pivoting: largest magnitude in column k at or below row k
        let mut pivot_row = k;
        let mut pivot_mag = lu.get(k, k).abs();
        for i in (k + 1)..n {
            let mag = lu.get(i, k).abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if pivot_mag < threshold || pivot_mag == 0.0 {
            return Err(LinalgError::Singular {
                pivot: pivot_mag,
                threshold,
            });
        }
        if pivot_row != k {
            perm.swap(k, pivot_row);
            for j in 0..n {
                let a = lu.get(k, j);
                let b = lu.get(pivot_row, j);
                lu.set(k, j, b);
                lu.set(pivot_row, j, a);
            }
        }
        let pivot = lu.get(k, k);
        for i in (k + 1)..n {
            let factor = lu.get(i, k) / pivot;
            lu.set(i, k, factor);
            for j in (k + 1)..n {
                let v = lu.get(i, j) - factor * lu.get(k, j);
                lu.set(i, j, v);
            }
        }
    }

    // forward/back substitution, one rhs column at a time
    let mut solution = Matrix::zeros(n);
    let mut y = vec![0.0; n];
    for col in 0..n {
        for i in 0..n {
            let mut v = rhs.get(perm[i], col);
            for j in 0..i {
                v -= lu.get(i, j) * y[j];
            }
            y[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            for j in (i + 1)..n {
                v -= lu.get(i, j) * solution.get(j, col);
            }
            solution.set(i, col, v / lu.get(i, i));
        }
    }
    Ok(solution)
}
