use ndarray::Array2;

use super::C64;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// The complex matrix `A + iB` is embedded as the real symmetric block matrix
/// `[[A, -B], [B, A]]`, whose spectrum is that of the original with every
/// eigenvalue doubled, and diagonalised by cyclic Jacobi rotations.
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "square matrix required");
    if n == 0 {
        return Vec::new();
    }
    let size = 2 * n;
    let mut a = Array2::<f64>::zeros((size, size));
    for i in 0..n {
        for j in 0..n {
            // symmetrise to suppress round-off asymmetry in the input
            let z = (m[[i, j]] + m[[j, i]].conj()) * 0.5;
            a[[i, j]] = z.re;
            a[[i + n, j + n]] = z.re;
            a[[i, j + n]] = -z.im;
            a[[i + n, j]] = z.im;
        }
    }
    jacobi_symmetric(&mut a);
    let mut all: Vec<f64> = (0..size).map(|i| a[[i, i]]).collect();
    all.sort_by(|x, y| x.total_cmp(y));
    all.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
}

/// In-place cyclic Jacobi diagonalisation of a real symmetric matrix.
fn jacobi_symmetric(a: &mut Array2<f64>) {
    let n = a.nrows();
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[[p, q]] * a[[p, q]];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            return;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
}
