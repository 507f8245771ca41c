//! Dense symmetric linear algebra.
//!
//! The eigensolver is the classic Householder tridiagonalization followed by the
//! implicit QL iteration (EISPACK `tred2`/`tql2`, via the public-domain JAMA
//! port). It works in place on nalgebra's column-major storage, which keeps the
//! hot inner loops contiguous.

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

/// Eigendecomposition `A = V diag(values) Vᵀ` with eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, paired with `values`.
    pub vectors: DMatrix<f64>,
}

impl SymmetricEigen {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        let (values, vectors) = decompose(m, true)?;
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(λ)) Vᵀ`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(f(lambda));
        }
        &scaled * self.vectors.transpose()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map_spectrum(|x| x)
    }

    /// Largest `‖A v − λ v‖ / ‖A‖_F` over all pairs.
    pub fn max_residual(&self, m: &DMatrix<f64>) -> f64 {
        let norm = m.norm().max(f64::MIN_POSITIVE);
        let av = m * &self.vectors;
        (0..self.dim()).map(|k| (av.column(k) - self.vectors.column(k) * self.values[k]).norm() / norm).fold(0.0, f64::max)
    }
}

/// Eigenvalues only, sorted descending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    decompose(m, false).map(|(v, _)| v)
}

/// `Σ_ij A_ij B_ij`.
pub fn frobenius_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn frobenius_sq(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// Diagonal of `Vᵀ M V`.
pub fn rotated_diagonal(vectors: &DMatrix<f64>, m: &DMatrix<f64>) -> Vec<f64> {
    let mv = m * vectors;
    (0..vectors.ncols()).map(|k| vectors.column(k).dot(&mv.column(k))).collect()
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.nrows();
    let scale = m.amax().max(1.0);
    for j in 0..n {
        for i in (j + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

fn decompose(m: &DMatrix<f64>, want_vectors: bool) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if !m.is_square() {
        return Err(invalid(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    // Symmetrize from the lower triangle so that round-off asymmetry is ignored.
    let mut v = DMatrix::from_fn(n, n, |i, j| if i >= j { m[(i, j)] } else { m[(j, i)] });
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 1 {
        d[0] = v[(0, 0)];
        v[(0, 0)] = 1.0;
    } else {
        tred2(n, v.as_mut_slice(), &mut d, &mut e);
        tql2(n, v.as_mut_slice(), &mut d, &mut e, want_vectors)?;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
    let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let vectors = if want_vectors { DMatrix::from_fn(n, n, |i, j| v[(i, order[j])]) } else { DMatrix::zeros(0, 0) };
    Ok((values, vectors))
}

// Column-major accessor: element (row, col) of an n×n buffer.
#[inline(always)]
fn at(n: usize, row: usize, col: usize) -> usize {
    col * n + row
}

#[allow(clippy::needless_range_loop)]
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    for j in 0..n {
        d[j] = v[at(n, n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(n, i - 1, j)];
                v[at(n, i, j)] = 0.0;
                v[at(n, j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[at(n, j, i)] = f;
                g = e[j] + v[at(n, j, j)] * f;
                let col = &v[at(n, 0, j)..at(n, 0, j) + n];
                for k in (j + 1)..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = &mut v[at(n, 0, j)..at(n, 0, j) + n];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = col[i - 1];
                col[i] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..(n - 1) {
        v[at(n, n - 1, i)] = v[at(n, i, i)];
        v[at(n, i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(n, k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(n, k, i + 1)] * v[at(n, k, j)];
                }
                for k in 0..=i {
                    v[at(n, k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(n, k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n, n - 1, j)];
        v[at(n, n - 1, j)] = 0.0;
    }
    v[at(n, n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], want_vectors: bool) -> Result<()> {
    const MAX_SWEEPS: usize = 64;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_SWEEPS {
                    return Err(Error::Convergence { iterations: iter, last: e[l].abs() });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if want_vectors {
                        let (left, right) = v.split_at_mut(at(n, 0, i + 1));
                        let col_i = &mut left[at(n, 0, i)..];
                        let col_i1 = &mut right[..n];
                        for k in 0..n {
                            let hk = col_i1[k];
                            col_i1[k] = s * col_i[k] + c * hk;
                            col_i[k] = c * col_i[k] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut r = rng::seeded(seed);
        let a = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut r));
        (&a + a.transpose()) * 0.5
    }

    #[test]
    fn residual_and_orthogonality() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (40, 4), (120, 5)] {
            let m = random_symmetric(n, seed);
            let eig = SymmetricEigen::new(&m).unwrap();
            assert!(eig.max_residual(&m) < 1e-12, "n={n}");
            let vtv = eig.vectors.transpose() * &eig.vectors;
            assert!((vtv - DMatrix::identity(n, n)).amax() < 1e-12);
            let rec = eig.reconstruct();
            assert!((rec - &m).norm() / m.norm().max(1e-300) < 1e-12);
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn agrees_with_nalgebra() {
        let m = random_symmetric(30, 11);
        let ours = symmetric_eigenvalues(&m).unwrap();
        let mut theirs: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_spectra() {
        let m = DMatrix::<f64>::zeros(6, 6);
        let eig = SymmetricEigen::new(&m).unwrap();
        assert!(eig.values.iter().all(|&x| x == 0.0));
        let mut r = DMatrix::<f64>::zeros(5, 5);
        r[(0, 0)] = 5.0;
        let eig = SymmetricEigen::new(&r).unwrap();
        assert_eq!(eig.values[0], 5.0);
        assert!(eig.values[1..].iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SymmetricEigen::new(&DMatrix::<f64>::zeros(2, 3)).is_err());
        let mut m = DMatrix::<f64>::zeros(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(SymmetricEigen::new(&m).is_err());
    }
}
