use super::Matrix;

/// Householder QR factorization `m = Q·R` with `Q` orthogonal and `R`
/// upper triangular.
pub fn qr(m: &Matrix) -> (Matrix, Matrix) {
    let n = m.n();
    let mut r = m.clone();
    let mut q = Matrix::identity(n);

    for k in 0..n.saturating_sub(1) {
        let mut v: Vec<f64> = (k..n).map(|i| r.get(i, k)).collect();
        let alpha = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let alpha = if v[0] >= 0.0 { -alpha } else { alpha };
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;

        // R := P·R
        for j in k..n {
            let dot: f64 = (0..v.len()).map(|i| v[i] * r.get(k + i, j)).sum();
            let dot = tau * dot;
            for i in 0..v.len() {
                let val = r.get(k + i, j) - dot * v[i];
                r.set(k + i, j, val);
            }
        }
        // Q := Q·P (accumulates Q = P₀·P₁·⋯ transposed correctly since P is symmetric)
        for i in 0..n {
            let dot: f64 = (0..v.len()).map(|j| v[j] * q.get(i, k + j)).sum();
            let dot = tau * dot;
            for j in 0..v.len() {
                let val = q.get(i, k + j) - dot * v[j];
                q.set(i, k + j, val);
            }
        }
        r.set(k, k, alpha);
        for i in k + 1..n {
            r.set(i, k, 0.0);
        }
    }
    (q, r)
}
