//! Small dense symmetric eigenproblems and pointwise eigenvalue bounds.
//!
//! Used for sampled (non-certified) diagnostics and as the reference in
//! the eigen-bound checks; none of the certified constants depend on it.

/// Eigenvalues of the symmetric matrix `a`, ascending, by cyclic Jacobi
/// rotations. Only the upper triangle is read.
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if j >= i { a[i][j] } else { a[j][i] }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        let scale: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum::<f64>() + 2.0 * off;
        if off <= f64::EPSILON * f64::EPSILON * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                rotate(&mut m, p, q);
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// One Jacobi rotation zeroing `m[p][q]`.
fn rotate(m: &mut [Vec<f64>], p: usize, q: usize) {
    let n = m.len();
    let apq = m[p][q];
    let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for k in 0..n {
        let (akp, akq) = (m[k][p], m[k][q]);
        m[k][p] = c * akp - s * akq;
        m[k][q] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (m[p][k], m[q][k]);
        m[p][k] = c * apk - s * aqk;
        m[q][k] = s * apk + c * aqk;
    }
    m[p][q] = 0.0;
    m[q][p] = 0.0;
}

pub fn max_eigenvalue(a: &[Vec<f64>]) -> f64 {
    jacobi_eigenvalues(a).last().copied().unwrap_or(f64::NAN)
}

/// Largest singular value of a (possibly rectangular) matrix, via the
/// eigenvalues of `a aᵀ`.
pub fn spectral_norm(a: &[Vec<f64>]) -> f64 {
    let rows = a.len();
    let aat: Vec<Vec<f64>> =
        (0..rows).map(|i| (0..rows).map(|j| a[i].iter().zip(&a[j]).map(|(x, y)| x * y).sum()).collect()).collect();
    max_eigenvalue(&aat).max(0.0).sqrt()
}

/// `max_i (a_ii + Σ_{j≠i} |a_ij|)`.
pub fn gershgorin_bound(a: &[Vec<f64>]) -> f64 {
    (0..a.len())
        .map(|i| a[i][i] + (0..a.len()).filter(|&j| j != i).map(|j| a[i][j].abs()).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `max_i (a_ii + zeta · max_{j≠i} |a_ij|)`.
pub fn row_max_bound(a: &[Vec<f64>], zeta: f64) -> f64 {
    (0..a.len())
        .map(|i| a[i][i] + zeta * (0..a.len()).filter(|&j| j != i).map(|j| a[i][j].abs()).fold(0.0, f64::max))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_cases() {
        let ev = jacobi_eigenvalues(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14, "{ev:?}");
        let ev = jacobi_eigenvalues(&[vec![-3.0 * 25.0 - 25.0, -50.0], vec![-50.0, -100.0]]);
        assert!((ev[0] + 150.0).abs() < 1e-12 && (ev[1] + 50.0).abs() < 1e-12);
        assert_eq!(spectral_norm(&[vec![0.0, 1.0], vec![0.0, 0.0]]), 1.0);
        assert_eq!(gershgorin_bound(&[vec![2.0, 1.0], vec![1.0, 2.0]]), 3.0);
        assert_eq!(row_max_bound(&[vec![0.0, 1.0], vec![1.0, 0.0]], 1.0), 1.0);
    }

    #[test]
    fn agrees_with_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=8 {
            for _ in 0..20 {
                let mut a = vec![vec![0.0; n]; n];
                for i in 0..n {
                    for j in i..n {
                        let v: f64 = rng.gen_range(-1.0..1.0);
                        a[i][j] = v;
                        a[j][i] = v;
                    }
                }
                let ours = jacobi_eigenvalues(&a);
                let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
                let mut theirs: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
                theirs.sort_by(f64::total_cmp);
                for (x, y) in ours.iter().zip(&theirs) {
                    assert!((x - y).abs() < 1e-12, "{ours:?} vs {theirs:?}");
                }
            }
        }
    }
}
