//! Small dense vector and symmetric-matrix kernels.
//!
//! Everything operates on plain `&[f64]` slices; matrices are row-major
//! `Vec<f64>` buffers. Problem sizes here are desk scale (n up to a few
//! thousand, diagnostic blocks up to a few hundred), so straightforward
//! loops are all that is needed.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(v: &mut [f64], alpha: f64) {
    for x in v.iter_mut() {
        *x *= alpha;
    }
}

/// `a - b` as a new vector.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Scales `v` in place so that its Euclidean norm is at most `r`.
///
/// The post-condition `norm2(v) <= r` holds exactly: after the initial
/// rescale the norm can still exceed `r` by an ulp, so the tail loop nudges
/// the vector down until the inequality is satisfied in floating point.
pub fn project_to_ball(v: &mut [f64], r: f64) {
    debug_assert!(r > 0.0);
    let n = norm2(v);
    if n <= r || n == 0.0 {
        return;
    }
    scale(v, r / n);
    while norm2(v) > r {
        scale(v, 1.0 - f64::EPSILON);
    }
}

/// Extreme eigenvalues `(min, max)` of a symmetric `k x k` matrix given in
/// row-major order.
///
/// Dense cyclic Jacobi up to `k = 200`; above that, power iteration with a
/// spectral shift for the smallest eigenvalue. Diagnostic blocks are small
/// (4s stays well under 200 on the benchmark grids), so the Jacobi path is
/// the one that matters.
pub fn symmetric_extreme_eigenvalues(matrix: &[f64], k: usize) -> (f64, f64) {
    assert_eq!(matrix.len(), k * k, "matrix must be k*k");
    if k == 0 {
        return (0.0, 0.0);
    }
    if k == 1 {
        return (matrix[0], matrix[0]);
    }
    if k <= 200 {
        let eigs = jacobi_eigenvalues(matrix, k);
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (min, max)
    } else {
        power_extreme_eigenvalues(matrix, k)
    }
}

/// All eigenvalues of a symmetric matrix via cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(matrix: &[f64], k: usize) -> Vec<f64> {
    let mut a = matrix.to_vec();
    let idx = |i: usize, j: usize| i * k + j;
    let off_diag_sq = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..k {
            for j in (i + 1)..k {
                s += a[idx(i, j)] * a[idx(i, j)];
            }
        }
        s
    };
    let frob_sq: f64 = a.iter().map(|x| x * x).sum();
    let tol = 1e-30 * frob_sq.max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        if off_diag_sq(&a) <= tol {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[idx(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                // Stable rotation: t = sign(theta) / (|theta| + sqrt(theta^2 + 1))
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..k {
                    let arp = a[idx(r, p)];
                    let arq = a[idx(r, q)];
                    a[idx(r, p)] = c * arp - s * arq;
                    a[idx(r, q)] = s * arp + c * arq;
                }
                for r in 0..k {
                    let apr = a[idx(p, r)];
                    let aqr = a[idx(q, r)];
                    a[idx(p, r)] = c * apr - s * aqr;
                    a[idx(q, r)] = s * apr + c * aqr;
                }
            }
        }
    }
    (0..k).map(|i| a[idx(i, i)]).collect()
}

fn mat_vec(matrix: &[f64], k: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..k {
        out[i] = dot(&matrix[i * k..(i + 1) * k], x);
    }
}

fn power_extreme_eigenvalues(matrix: &[f64], k: usize) -> (f64, f64) {
    // Largest eigenvalue in magnitude of a shifted matrix brackets both
    // extremes; two power iterations recover (min, max).
    let dominant = |m: &dyn Fn(&[f64], &mut [f64])| -> f64 {
        let mut v: Vec<f64> = (0..k)
            .map(|i| if i % 2 == 0 { 1.0 } else { -0.5 })
            .collect();
        let mut w = vec![0.0; k];
        let mut lambda = 0.0;
        for _ in 0..500 {
            m(&v, &mut w);
            let n = norm2(&w);
            if n == 0.0 {
                return 0.0;
            }
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / n;
            }
            m(&v, &mut w);
            lambda = dot(&v, &w);
        }
        lambda
    };
    let apply = |x: &[f64], out: &mut [f64]| mat_vec(matrix, k, x, out);
    let lam_abs = {
        let mut v: Vec<f64> = (0..k).map(|i| 1.0 + (i as f64) * 1e-3).collect();
        let mut w = vec![0.0; k];
        let mut lam = 0.0f64;
        for _ in 0..500 {
            apply(&v, &mut w);
            let n = norm2(&w);
            if n == 0.0 {
                break;
            }
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / n;
            }
            apply(&v, &mut w);
            lam = dot(&v, &w);
        }
        lam.abs()
    };
    // Shift so the spectrum is nonnegative, then find both ends.
    let shift = lam_abs + 1.0;
    let shifted_up = |x: &[f64], out: &mut [f64]| {
        mat_vec(matrix, k, x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += shift * xi;
        }
    };
    let shifted_down = |x: &[f64], out: &mut [f64]| {
        mat_vec(matrix, k, x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = shift * xi - *o;
        }
    };
    let max = dominant(&shifted_up) - shift;
    let min = shift - dominant(&shifted_down);
    (min, max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn dot_and_norm() {
        assert_eq!(dot(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]), 32.0);
        assert_eq!(norm2(&[3.0, 4.0]), 5.0);
    }

    #[test]
    fn ball_projection_is_feasible_and_idempotent() {
        let mut v = vec![3.0, 4.0];
        project_to_ball(&mut v, 1.0);
        assert!(norm2(&v) <= 1.0);
        assert!((v[0] - 0.6).abs() < 1e-15);
        assert!((v[1] - 0.8).abs() < 1e-15);
        let before = v.clone();
        project_to_ball(&mut v, 1.0);
        assert_eq!(v, before);
    }

    #[test]
    fn ball_projection_feasible_for_many_random_vectors() {
        let mut rng = Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let mut v: Vec<f64> = (0..8).map(|_| 100.0 * rng.normal()).collect();
            project_to_ball(&mut v, 1.0);
            assert!(norm2(&v) <= 1.0);
        }
    }

    #[test]
    fn jacobi_diagonal_matrix() {
        let m = vec![3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 7.0];
        let (min, max) = symmetric_extreme_eigenvalues(&m, 3);
        assert!((min + 1.0).abs() < 1e-12);
        assert!((max - 7.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_known_2x2() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let m = vec![2.0, 1.0, 1.0, 2.0];
        let (min, max) = symmetric_extreme_eigenvalues(&m, 2);
        assert!((min - 1.0).abs() < 1e-12);
        assert!((max - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_matches_quadratic_form_extremes() {
        // Random symmetric matrix: eigenvalue extremes must bound the
        // Rayleigh quotient over random probes.
        let mut rng = Rng::seed_from_u64(17);
        let k = 12;
        let mut m = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let v = rng.normal();
                m[i * k + j] = v;
                m[j * k + i] = v;
            }
        }
        let (min, max) = symmetric_extreme_eigenvalues(&m, k);
        assert!(min <= max);
        for _ in 0..2000 {
            let mut d: Vec<f64> = (0..k).map(|_| rng.normal()).collect();
            let n = norm2(&d);
            scale(&mut d, 1.0 / n);
            let mut md = vec![0.0; k];
            mat_vec(&m, k, &d, &mut md);
            let q = dot(&d, &md);
            assert!(
                q >= min - 1e-9 && q <= max + 1e-9,
                "rayleigh {q} outside [{min}, {max}]"
            );
        }
    }

    #[test]
    fn power_iteration_agrees_with_jacobi() {
        let mut rng = Rng::seed_from_u64(23);
        let k = 40;
        let mut m = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let v = rng.normal();
                m[i * k + j] = v;
                m[j * k + i] = v;
            }
        }
        let (jmin, jmax) = {
            let eigs = jacobi_eigenvalues(&m, k);
            (
                eigs.iter().cloned().fold(f64::INFINITY, f64::min),
                eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        let (pmin, pmax) = power_extreme_eigenvalues(&m, k);
        assert!(
            (jmin - pmin).abs() < 1e-6 * (1.0 + jmin.abs()),
            "{jmin} vs {pmin}"
        );
        assert!(
            (jmax - pmax).abs() < 1e-6 * (1.0 + jmax.abs()),
            "{jmax} vs {pmax}"
        );
    }
}
