use super::{LinalgError, Matrix};

const DEFLATION_REL_TOL: f64 = 1e-12;

/// Diagonal block of a real Schur form: either a converged real eigenvalue
/// or an unsplit 2×2 block. Complex conjugate pairs stay as raw 2×2 blocks
/// so no complex arithmetic is ever needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchurBlock {
    Single(f64),
    Quad { a: f64, b: f64, c: f64, d: f64 },
}

impl SchurBlock {
    pub fn trace(&self) -> f64 {
        match *self {
            SchurBlock::Single(x) => x,
            SchurBlock::Quad { a, d, .. } => a + d,
        }
    }

    pub fn det(&self) -> f64 {
        match *self {
            SchurBlock::Single(x) => x,
            SchurBlock::Quad { a, b, c, d } => a * d - b * c,
        }
    }

    /// `((a−d)/2)² + bc`; non-negative means two real eigenvalues.
    pub fn discriminant(&self) -> f64 {
        match *self {
            SchurBlock::Single(_) => 0.0,
            SchurBlock::Quad { a, b, c, d } => {
                let half = 0.5 * (a - d);
                half * half + b * c
            }
        }
    }
}

/// Real eigenvalue content of a general square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSpectrum {
    /// Real eigenvalues with multiplicity, descending.
    pub real_eigenvalues: Vec<f64>,
    /// Whether any complex conjugate pairs remain.
    pub has_complex_pairs: bool,
}

/// Reduces `m` to real Schur block structure (Hessenberg reduction followed
/// by shifted QR with deflation) and returns the diagonal blocks.
pub fn schur_blocks(m: &Matrix) -> Result<Vec<SchurBlock>, LinalgError> {
    let n = m.n();
    if n == 1 {
        return Ok(vec![SchurBlock::Single(m.get(0, 0))]);
    }
    let mut h = hessenberg(m);
    qr_iterate(&mut h, m.frobenius_norm())
}

/// Real eigenvalues of a general square matrix via the real Schur form.
///
/// 1×1 blocks contribute a real eigenvalue directly; 2×2 blocks with
/// non-negative discriminant split into two reals, the rest are complex
/// conjugate pairs and only flip `has_complex_pairs`.
pub fn real_eigenvalues(m: &Matrix) -> Result<RealSpectrum, LinalgError> {
    let blocks = schur_blocks(m)?;
    let mut reals = Vec::new();
    let mut has_complex_pairs = false;
    for block in &blocks {
        match block {
            SchurBlock::Single(x) => reals.push(*x),
            SchurBlock::Quad { a, d, .. } => {
                let disc = block.discriminant();
                if disc >= 0.0 {
                    let mid = 0.5 * (a + d);
                    let root = disc.sqrt();
                    reals.push(mid + root);
                    reals.push(mid - root);
                } else {
                    has_complex_pairs = true;
                }
            }
        }
    }
    reals.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(RealSpectrum {
        real_eigenvalues: reals,
        has_complex_pairs,
    })
}

/// Householder reduction to upper Hessenberg form (similarity transform;
/// the orthogonal factor is not accumulated since only eigenvalues are
/// needed downstream).
fn hessenberg(m: &Matrix) -> Matrix {
    let n = m.n();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        // reflector annihilating h[k+2..n, k]
        let mut v: Vec<f64> = (k + 1..n).map(|i| h.get(i, k)).collect();
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

        // H := P·H with P = I − τ·vvᵀ acting on rows k+1..n
        for j in k..n {
            let dot: f64 = (0..v.len()).map(|i| v[i] * h.get(k + 1 + i, j)).sum();
            let dot = tau * dot;
            for i in 0..v.len() {
                let val = h.get(k + 1 + i, j) - dot * v[i];
                h.set(k + 1 + i, j, val);
            }
        }
        // H := H·P acting on columns k+1..n
        for i in 0..n {
            let dot: f64 = (0..v.len()).map(|j| v[j] * h.get(i, k + 1 + j)).sum();
            let dot = tau * dot;
            for j in 0..v.len() {
                let val = h.get(i, k + 1 + j) - dot * v[j];
                h.set(i, k + 1 + j, val);
            }
        }
        for i in k + 2..n {
            h.set(i, k, 0.0);
        }
        h.set(k + 1, k, alpha);
    }
    h
}

/// Implicit double-shift (Francis) QR iteration on an upper Hessenberg
/// matrix, with 2×2 trailing-block deflation and an exceptional shift every
/// ten stalled iterations. Double shifts keep complex conjugate pairs in
/// real arithmetic and converge quadratically on them, which single real
/// shifts do not.
fn qr_iterate(h: &mut Matrix, norm_scale: f64) -> Result<Vec<SchurBlock>, LinalgError> {
    let n = h.n();
    let mut blocks = Vec::new();
    let mut hi = n - 1;
    let mut iters_since_deflation = 0usize;
    let iter_cap = 30 * n;

    loop {
        if hi == 0 {
            blocks.push(SchurBlock::Single(h.get(0, 0)));
            break;
        }
        // 1×1 deflation at the bottom
        if subdiag_negligible(h, hi, norm_scale) {
            h.set(hi, hi - 1, 0.0);
            blocks.push(SchurBlock::Single(h.get(hi, hi)));
            hi -= 1;
            iters_since_deflation = 0;
            continue;
        }
        // isolated trailing 2×2 block (whole window, or cut off above)
        if hi == 1 || subdiag_negligible(h, hi - 1, norm_scale) {
            if hi >= 2 {
                h.set(hi - 1, hi - 2, 0.0);
            }
            blocks.push(SchurBlock::Quad {
                a: h.get(hi - 1, hi - 1),
                b: h.get(hi - 1, hi),
                c: h.get(hi, hi - 1),
                d: h.get(hi, hi),
            });
            if hi == 1 {
                break;
            }
            hi -= 2;
            iters_since_deflation = 0;
            continue;
        }

        iters_since_deflation += 1;
        if iters_since_deflation > iter_cap {
            return Err(LinalgError::NoConvergence {
                what: "shifted QR iteration cap",
            });
        }

        // active window [lo..=hi]: walk up to the nearest negligible coupling
        let mut lo = hi - 1;
        while lo > 0 && !subdiag_negligible(h, lo, norm_scale) {
            lo -= 1;
        }
        if lo > 0 {
            h.set(lo, lo - 1, 0.0);
        }

        francis_step(h, lo, hi, iters_since_deflation % 10 == 0);
    }

    Ok(blocks)
}

fn subdiag_negligible(h: &Matrix, k: usize, norm_scale: f64) -> bool {
    let local = h.get(k - 1, k - 1).abs() + h.get(k, k).abs();
    let scale = if local > 0.0 { local } else { norm_scale };
    h.get(k, k - 1).abs() <= DEFLATION_REL_TOL * scale
}

/// One implicit double-shift QR sweep on the window `[lo..=hi]` (size ≥ 3):
/// forms the first column of `(H−σ₁I)(H−σ₂I)` for the trailing-block shift
/// pair and chases the resulting bulge down the window with Householder
/// reflectors applied on both sides.
fn francis_step(h: &mut Matrix, lo: usize, hi: usize, exceptional: bool) {
    let n = h.n();
    // shift pair as sum and product, so complex pairs never materialize
    let (s, t) = if exceptional {
        let w = h.get(hi, hi - 1).abs() + h.get(hi - 1, hi - 2).abs();
        (2.0 * w, w * w)
    } else {
        let a11 = h.get(hi - 1, hi - 1);
        let a12 = h.get(hi - 1, hi);
        let a21 = h.get(hi, hi - 1);
        let a22 = h.get(hi, hi);
        (a11 + a22, a11 * a22 - a12 * a21)
    };

    let h00 = h.get(lo, lo);
    let h01 = h.get(lo, lo + 1);
    let h10 = h.get(lo + 1, lo);
    let h11 = h.get(lo + 1, lo + 1);
    let mut x = h00 * h00 + h01 * h10 - s * h00 + t;
    let mut y = h10 * (h00 + h11 - s);
    let mut z = h10 * h.get(lo + 2, lo + 1);

    for k in lo..hi {
        // reflectors are scale-invariant; normalize against over/underflow
        let scale = x.abs() + y.abs() + z.abs();
        if scale != 0.0 {
            x /= scale;
            y /= scale;
            z /= scale;
        }
        let use3 = k + 2 <= hi;
        let (v1, v2, tau) = if use3 {
            householder3(x, y, z)
        } else {
            let (v1, tau) = householder2(x, y);
            (v1, 0.0, tau)
        };

        let col_start = if k > lo { k - 1 } else { lo };
        for j in col_start..n {
            let mut dot = h.get(k, j) + v1 * h.get(k + 1, j);
            if use3 {
                dot += v2 * h.get(k + 2, j);
            }
            let dot = tau * dot;
            h.set(k, j, h.get(k, j) - dot);
            h.set(k + 1, j, h.get(k + 1, j) - dot * v1);
            if use3 {
                h.set(k + 2, j, h.get(k + 2, j) - dot * v2);
            }
        }
        let row_end = if use3 { (k + 3).min(hi) } else { hi };
        for i in 0..=row_end.min(n - 1) {
            let mut dot = h.get(i, k) + v1 * h.get(i, k + 1);
            if use3 {
                dot += v2 * h.get(i, k + 2);
            }
            let dot = tau * dot;
            h.set(i, k, h.get(i, k) - dot);
            h.set(i, k + 1, h.get(i, k + 1) - dot * v1);
            if use3 {
                h.set(i, k + 2, h.get(i, k + 2) - dot * v2);
            }
        }

        if k + 2 <= hi.saturating_sub(1) {
            x = h.get(k + 1, k);
            y = h.get(k + 2, k);
            z = if k + 3 <= hi { h.get(k + 3, k) } else { 0.0 };
        } else if k + 1 <= hi.saturating_sub(1) {
            x = h.get(k + 1, k);
            y = h.get(k + 2, k);
            z = 0.0;
        }
    }

    // the chase restores Hessenberg form analytically; drop the rounding
    // residue below the first subdiagonal
    for i in lo + 2..=hi {
        for j in lo..i - 1 {
            h.set(i, j, 0.0);
        }
    }
}

/// Householder reflector for `(x, y, z)` with leading component scaled to
/// one: returns `(v1, v2, tau)` for `P = I − τ·(1, v1, v2)(1, v1, v2)ᵀ`.
fn householder3(x: f64, y: f64, z: f64) -> (f64, f64, f64) {
    let norm = (x * x + y * y + z * z).sqrt();
    if norm == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let sign = if x >= 0.0 { 1.0 } else { -1.0 };
    let u0 = x + sign * norm;
    let v1 = y / u0;
    let v2 = z / u0;
    let tau = 2.0 / (1.0 + v1 * v1 + v2 * v2);
    (v1, v2, tau)
}

fn householder2(x: f64, y: f64) -> (f64, f64) {
    let norm = x.hypot(y);
    if norm == 0.0 {
        return (0.0, 0.0);
    }
    let sign = if x >= 0.0 { 1.0 } else { -1.0 };
    let u0 = x + sign * norm;
    let v1 = y / u0;
    let tau = 2.0 / (1.0 + v1 * v1);
    (v1, tau)
}
