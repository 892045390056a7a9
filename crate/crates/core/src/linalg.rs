//! Small dense linear-algebra helpers on real and complex vectors.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CVec = Vec<Complex64>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Hermitian inner product, conjugate-linear in the first slot.
pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn cnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Packs real coordinates `(x_1, .., x_2n)` into `n` complex numbers.
pub fn to_complex(x: &[f64]) -> CVec {
    x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

pub fn to_real(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

/// Orthonormal basis of the orthogonal complement of `v` in `R^d`.
pub fn orthonormal_complement(v: &[f64]) -> Vec<Vec<f64>> {
    let d = v.len();
    let nv = norm(v);
    let mut basis: Vec<Vec<f64>> = vec![v.iter().map(|x| x / nv).collect()];
    // seed with the standard basis in order of least overlap with v
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs()));
    for i in order {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &e);
                e.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let ne = norm(&e);
        if ne > 1e-8 {
            e.iter_mut().for_each(|x| *x /= ne);
            basis.push(e);
        }
        if basis.len() == d {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Orthonormal basis of the Hermitian orthogonal complement of `v` in `C^n`.
pub fn complex_orthonormal_complement(v: &[Complex64]) -> Vec<CVec> {
    let n = v.len();
    let nv = cnorm(v);
    let mut basis: Vec<CVec> = vec![v.iter().map(|c| c / nv).collect()];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm()));
    for i in order {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[i] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in &basis {
                let c = cdot(b, &e);
                e.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let ne = cnorm(&e);
        if ne > 1e-8 {
            e.iter_mut().for_each(|x| *x /= ne);
            basis.push(e);
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Haar-distributed random unitary matrix, returned as rows.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<CVec> {
    loop {
        let mut rows: Vec<CVec> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut e: CVec = (0..n)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            for _ in 0..2 {
                for b in &rows {
                    let c = cdot(b, &e);
                    e.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let ne = cnorm(&e);
            if ne < 1e-6 {
                break;
            }
            e.iter_mut().for_each(|x| *x /= ne);
            rows.push(e);
        }
        if rows.len() == n {
            return rows;
        }
    }
}

/// Random orthogonal matrix of size `d`, returned as rows.
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    loop {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d);
        for _ in 0..d {
            let mut e: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            for _ in 0..2 {
                for b in &rows {
                    let c = dot(b, &e);
                    e.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let ne = norm(&e);
            if ne < 1e-6 {
                break;
            }
            e.iter_mut().for_each(|x| *x /= ne);
            rows.push(e);
        }
        if rows.len() == d {
            return rows;
        }
    }
}

/// `U v` for `U` given by rows.
pub fn cmatvec(rows: &[CVec], v: &[Complex64]) -> CVec {
    rows.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// `U^* v` for `U` given by rows.
pub fn cmatvec_adjoint(rows: &[CVec], v: &[Complex64]) -> CVec {
    let n = rows.first().map_or(0, Vec::len);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (r, vk) in rows.iter().zip(v) {
        for (o, a) in out.iter_mut().zip(r) {
            *o += a.conj() * vk;
        }
    }
    out
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a complex Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Spectral-norm upper bound used to scale eigenvalue tolerances.
pub fn frobenius<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.iter().map(|c| c.clone().modulus_squared()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complements_are_orthonormal() {
        let v = [0.3, -1.0, 2.0, 0.5];
        let b = orthonormal_complement(&v);
        assert_eq!(b.len(), 3);
        for (i, x) in b.iter().enumerate() {
            assert!(dot(x, &v).abs() < 1e-12);
            for (j, y) in b.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((dot(x, y) - e).abs() < 1e-12);
            }
        }
        let w = [
            Complex64::new(1.0, 2.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.5, 0.0),
        ];
        let cb = complex_orthonormal_complement(&w);
        assert_eq!(cb.len(), 2);
        for x in &cb {
            assert!(cdot(&w, x).norm() < 1e-12);
            assert!((cnorm(x) - 1.0).abs() < 1e-12);
        }
        assert!(cdot(&cb[0], &cb[1]).norm() < 1e-12);
    }

    #[test]
    fn unitary_rows_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(3, &mut rng);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((cdot(&u[i], &u[j]) - Complex64::new(e, 0.0)).norm() < 1e-12);
            }
        }
        let v = vec![
            Complex64::new(1.0, 0.5),
            Complex64::new(-0.2, 0.0),
            Complex64::new(0.0, 3.0),
        ];
        let back = cmatvec_adjoint(&u, &cmatvec(&u, &v));
        for (a, b) in back.iter().zip(&v) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_spectrum() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(2.0, 0.0),
            ],
        );
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(symmetric_eigenvalues(&s), vec![-1.0, 1.0]);
    }
}
