//! Dense Hermitian linear algebra for small arrays.
//!
//! Everything here targets matrices of order <= 16 (one row/column per
//! antenna element), so the implementations favour determinism and clarity
//! over asymptotic tricks: Cholesky with one step of iterative refinement for
//! solves, and a cyclic complex Jacobi iteration for eigenvalues.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance used when validating Hermitian symmetry of caller input,
/// relative to the entry magnitude (absolute below magnitude 1).
const HERMITIAN_TOL: f64 = 1e-12;

/// Relative residual accepted by [`loaded_solve`] after refinement.
const SOLVE_RESIDUAL_TOL: f64 = 1e-8;

/// Sweep budget for the Jacobi eigenvalue iteration. Quadratic convergence
/// makes double-digit sweeps ample for order <= 16; hitting this budget means
/// the input was not meaningfully Hermitian.
const JACOBI_MAX_SWEEPS: usize = 100;

/// A dense Hermitian matrix in row-major storage.
///
/// Construction validates symmetry (within `1e-12` absolute) and then stores
/// the exact Hermitian part `(M + M^H) / 2`, so downstream code may rely on
/// `a[(i, j)] == conj(a[(j, i)])` holding bit-exactly and on purely real
/// diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Builds an `n x n` Hermitian matrix from row-major entries.
    ///
    /// Fails if the entry count is not `n * n`, any entry is non-finite, an
    /// off-diagonal pair violates `|m_ij - conj(m_ji)| <= 1e-12`, or a
    /// diagonal entry has `|Im| > 1e-12`.
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {} entries for an order-{} matrix, got {}",
                n * n,
                n,
                entries.len()
            )));
        }
        for (k, e) in entries.iter().enumerate() {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::NonFinite(format!(
                    "matrix entry ({}, {}) = {}",
                    k / n,
                    k % n,
                    e
                )));
            }
        }
        let mut data = entries;
        for i in 0..n {
            let d = data[i * n + i];
            if d.im.abs() > HERMITIAN_TOL * d.re.abs().max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "diagonal entry ({i}, {i}) has imaginary part {}",
                    d.im
                )));
            }
            data[i * n + i] = Complex64::new(d.re, 0.0);
            for j in (i + 1)..n {
                let upper = data[i * n + j];
                let lower = data[j * n + i];
                let gap = (upper - lower.conj()).norm();
                if gap > HERMITIAN_TOL * upper.norm().max(lower.norm()).max(1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "entries ({i}, {j}) and ({j}, {i}) are not conjugate (gap {gap:e})"
                    )));
                }
                // Store the exact Hermitian part so the pair is conjugate
                // bit-for-bit even when the input only matched to tolerance.
                let avg = (upper + lower.conj()) * 0.5;
                data[i * n + j] = avg;
                data[j * n + i] = avg.conj();
            }
        }
        Ok(HermitianMatrix { n, data })
    }

    /// Matrix order (rows == columns).
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    /// Row-major entries, length `order^2`.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Sum of the (real) diagonal.
    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i].re).sum()
    }

    /// `A * x`.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n, "matvec dimension mismatch");
        let mut y = vec![Complex64::ZERO; self.n];
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            let mut acc = Complex64::ZERO;
            for (a, xv) in row.iter().zip(x) {
                acc += a * xv;
            }
            y[i] = acc;
        }
        y
    }
}

fn check_finite_vector(name: &str, v: &[Complex64]) -> Result<()> {
    for (i, z) in v.iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite(format!("{name}[{i}] = {z}")));
        }
    }
    Ok(())
}

/// `sum_i conj(a_i) b_i`, the inner product conjugate-linear in `a`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Evaluates the quadratic form `w^H A w` and returns its real part.
///
/// For Hermitian `A` the form is real up to rounding; the leftover imaginary
/// part is asserted to be negligible (`|Im| <= 1e-6 * (1 + |Re|)`) and then
/// discarded.
pub fn quadratic_form(a: &HermitianMatrix, w: &[Complex64]) -> Result<f64> {
    if w.len() != a.order() {
        return Err(Error::Dimension(format!(
            "quadratic form: matrix order {} vs vector length {}",
            a.order(),
            w.len()
        )));
    }
    check_finite_vector("w", w)?;
    let mut acc = Complex64::ZERO;
    for i in 0..a.order() {
        let wi = w[i].conj();
        let row = &a.entries()[i * a.order()..(i + 1) * a.order()];
        for (j, entry) in row.iter().enumerate() {
            acc += wi * entry * w[j];
        }
    }
    assert!(
        acc.im.abs() <= 1e-6 * (1.0 + acc.re.abs()),
        "quadratic form of a Hermitian matrix drifted complex: {acc}"
    );
    Ok(acc.re)
}

/// Lower-triangular Cholesky factor of a Hermitian positive definite matrix
/// given by closure access. Returns `None` when a pivot is non-positive or
/// non-finite.
fn cholesky(n: usize, at: impl Fn(usize, usize) -> Complex64) -> Option<Vec<Complex64>> {
    let mut l = vec![Complex64::ZERO; n * n];
    for j in 0..n {
        let mut pivot = at(j, j).re;
        for k in 0..j {
            pivot -= l[j * n + k].norm_sqr();
        }
        if !(pivot.is_finite() && pivot > 0.0) {
            return None;
        }
        let ljj = pivot.sqrt();
        l[j * n + j] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = at(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / ljj;
        }
    }
    Some(l)
}

/// Solves `L L^H x = b` given the Cholesky factor `L`.
fn cholesky_solve(n: usize, l: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let t = l[i * n + k] * y[k];
            y[i] -= t;
        }
        y[i] /= l[i * n + i].re;
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let t = l[k * n + i].conj() * y[k];
            y[i] -= t;
        }
        y[i] /= l[i * n + i].re;
    }
    y
}

/// Solves `(A + eps I) x = b` for Hermitian `A` with non-negative loading
/// `eps`, via Cholesky with one step of iterative refinement.
///
/// The solution satisfies `||(A + eps I) x - b|| <= 1e-8 ||b||`; if the loaded
/// matrix is not numerically positive definite, or the residual bound cannot
/// be met, the call fails with [`Error::Singular`] rather than returning a
/// garbage vector.
pub fn loaded_solve(a: &HermitianMatrix, b: &[Complex64], eps: f64) -> Result<Vec<Complex64>> {
    let n = a.order();
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "loaded solve: matrix order {} vs rhs length {}",
            n,
            b.len()
        )));
    }
    check_finite_vector("b", b)?;
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "diagonal loading must be finite and non-negative, got {eps}"
        )));
    }
    let at = |i: usize, j: usize| {
        if i == j {
            a.get(i, i) + eps
        } else {
            a.get(i, j)
        }
    };
    let l = cholesky(n, at)
        .ok_or_else(|| Error::Singular("loaded matrix is not positive definite".into()))?;
    let mut x = cholesky_solve(n, &l, b);

    // One refinement step recovers most of the accuracy lost to a mildly
    // ill-conditioned factorization.
    let residual = |x: &[Complex64]| -> Vec<Complex64> {
        let mut r = a.matvec(x);
        for i in 0..n {
            r[i] = b[i] - (r[i] + eps * x[i]);
        }
        r
    };
    let r = residual(&x);
    let d = cholesky_solve(n, &l, &r);
    for i in 0..n {
        x[i] += d[i];
    }

    let b_norm = norm2(b);
    let final_residual = norm2(&residual(&x));
    if !final_residual.is_finite() || final_residual > SOLVE_RESIDUAL_TOL * b_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::Singular(format!(
            "residual {final_residual:e} exceeds {SOLVE_RESIDUAL_TOL:e} * ||b|| after refinement"
        )));
    }
    Ok(x)
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
///
/// Cyclic complex Jacobi iteration: each rotation annihilates one off-diagonal
/// pair with a unitary similarity, so the diagonal converges to the spectrum.
/// Fails with [`Error::NoConvergence`] if the off-diagonal mass has not
/// dropped to rounding level within the sweep budget.
pub fn hermitian_eigenvalues(a: &HermitianMatrix) -> Result<Vec<f64>> {
    let n = a.order();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut w = a.entries().to_vec();

    let off_norm = |w: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += w[i * n + j].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    };
    let fro = {
        let mut s = 0.0;
        for z in &w {
            s += z.norm_sqr();
        }
        s.sqrt()
    };
    let tol = 100.0 * f64::EPSILON * fro.max(1.0);

    let mut converged = off_norm(&w) <= tol;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // Zero w[p][q] with the unitary U = [[c, -s*u], [s*conj(u), c]]
                // embedded at (p, q), where u = apq / |apq| and the angle
                // satisfies tan(2*phi) = 2r / (a_pp - a_qq).
                let u = apq / r;
                let d = (w[p * n + p].re - w[q * n + q].re) / 2.0;
                let t = if d == 0.0 {
                    1.0
                } else {
                    let h = d.hypot(r);
                    d.signum() * r / (d.abs() + h)
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Column update (right-multiplication by U).
                for k in 0..n {
                    let kp = w[k * n + p];
                    let kq = w[k * n + q];
                    w[k * n + p] = c * kp + s * u.conj() * kq;
                    w[k * n + q] = -s * u * kp + c * kq;
                }
                // Row update (left-multiplication by U^H).
                for k in 0..n {
                    let pk = w[p * n + k];
                    let qk = w[q * n + k];
                    w[p * n + k] = c * pk + s * u * qk;
                    w[q * n + k] = -s * u.conj() * pk + c * qk;
                }
                // The rotation zeroes this pair analytically; make it exact
                // and keep the diagonal real.
                w[p * n + q] = Complex64::ZERO;
                w[q * n + p] = Complex64::ZERO;
                w[p * n + p] = Complex64::new(w[p * n + p].re, 0.0);
                w[q * n + q] = Complex64::new(w[q * n + q].re, 0.0);
            }
        }
        converged = off_norm(&w) <= tol;
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "jacobi eigenvalue iteration: off-diagonal norm {:e} after {} sweeps",
            off_norm(&w),
            JACOBI_MAX_SWEEPS
        )));
    }

    let mut eig: Vec<f64> = (0..n).map(|i| w[i * n + i].re).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(eig)
}
