//! Dense linear algebra and scalar numerics.
//!
//! Only what the solvers need: row-major matrices, Cholesky solves, power
//! iteration for dominant eigenvalues and singular values, a bracketed scalar
//! root finder, golden-section search and central finite differences.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, check_positive, Error, Result};

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, rejecting NaN and infinities.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("DenseMatrix::new", rows * cols, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        Self::new(n, n, data)
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_len("DenseMatrix::from_rows", cols, r.len())?;
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Column `j` copied into a new vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// `M x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("matvec", self.cols, x.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `M x` written into `out` (no allocation).
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    /// `Mᵀ x`.
    pub fn matvec_t(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("matvec_t", self.rows, x.len())?;
        let mut out = vec![0.0; self.cols];
        self.matvec_t_into(x, &mut out);
        Ok(out)
    }

    /// `Mᵀ x` written into `out` (no allocation).
    pub fn matvec_t_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, xi) in x.iter().enumerate() {
            if *xi != 0.0 {
                axpy(*xi, self.row(i), out);
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    /// `self · other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self> {
        check_len("matmul", self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, a) in self.row(i).iter().enumerate() {
                if *a != 0.0 {
                    axpy(*a, other.row(k), orow);
                }
            }
        }
        Ok(out)
    }

    /// `MᵀM`, exploiting symmetry.
    pub fn gram(&self) -> Self {
        self.weighted_gram(None)
    }

    /// `Mᵀ diag(w) M`; `None` means unit weights.
    pub fn weighted_gram(&self, weights: Option<&[f64]>) -> Self {
        let d = self.cols;
        let mut g = Self::zeros(d, d);
        for i in 0..self.rows {
            let w = weights.map_or(1.0, |w| w[i]);
            if w == 0.0 {
                continue;
            }
            let r = self.row(i);
            for a in 0..d {
                let ra = w * r[a];
                if ra == 0.0 {
                    continue;
                }
                let grow = &mut g.data[a * d..(a + 1) * d];
                for b in a..d {
                    grow[b] += ra * r[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                g.data[a * d + b] = g.data[b * d + a];
            }
        }
        g
    }

    /// Adds `alpha` to every diagonal entry.
    pub fn add_diag(&mut self, alpha: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += alpha;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    /// Entrywise `self + alpha·other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &DenseMatrix) -> Result<()> {
        check_len("add_scaled rows", self.rows, other.rows)?;
        check_len("add_scaled cols", self.cols, other.cols)?;
        axpy(alpha, &other.data, &mut self.data);
        Ok(())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol)
            })
    }

    /// True when every entry is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    /// Largest absolute row sum; a cheap upper bound on the spectral norm of a
    /// symmetric matrix.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `y += alpha · x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `a − b`.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + b`.
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scaled(alpha: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|v| alpha * v).collect()
}

/// `‖a − b‖∞`.
pub fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `‖a − b‖₂`.
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Cholesky factor `M = L Lᵀ` of a symmetric positive definite matrix.
///
/// Factor once, solve many times; the solvers reuse a factor across
/// iterations whenever the system matrix is constant.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    /// Lower triangle, row-major, full storage.
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                context: "Cholesky::factor",
                expected: m.rows(),
                found: m.cols(),
            });
        }
        let n = m.rows();
        let scale = (0..n).map(|i| m.get(i, i).abs()).fold(0.0, f64::max);
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = m.get(j, j);
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if !(diag > 1e-14 * scale) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    value: diag,
                });
            }
            let ljj = libm::sqrt(diag);
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len("Cholesky::solve", self.n, b.len())?;
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// Overwrites `b` with `M⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }
}

/// Solves `M x = b` for symmetric positive definite `M`.
pub fn solve_spd(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    Cholesky::factor(m)?.solve(b)
}

/// Dominant eigenvalue of a symmetric positive semidefinite operator given as
/// a matrix-vector product, by power iteration.
///
/// Stops when the eigen-residual `‖Kv − θv‖` falls below `tol·θ`, which bounds
/// the distance from `θ` to the spectrum. Starts from the normalized all-ones
/// vector and falls back to a deterministic pseudo-random start when that
/// vector lies in the null space.
pub fn dominant_eigenvalue<F>(dim: usize, mut apply: F, tol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if dim == 0 {
        return Ok(0.0);
    }
    check_positive("tol", tol)?;
    let mut v = vec![1.0 / libm::sqrt(dim as f64); dim];
    let mut kv = vec![0.0; dim];
    let mut theta = 0.0;
    let mut restarted = false;
    let mut rng = crate::rng::SplitMix64::new(0x5EED);
    for _ in 0..max_iter {
        apply(&v, &mut kv);
        if !all_finite(&kv) {
            return Err(Error::NonFinite("power iteration"));
        }
        theta = dot(&v, &kv);
        let knorm = norm2(&kv);
        if knorm == 0.0 || theta <= 0.0 {
            if restarted {
                return Ok(0.0);
            }
            restarted = true;
            for vi in v.iter_mut() {
                *vi = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            }
            let n = norm2(&v);
            v.iter_mut().for_each(|vi| *vi /= n);
            continue;
        }
        let resid = libm::sqrt(
            kv.iter()
                .zip(&v)
                .map(|(k, x)| (k - theta * x) * (k - theta * x))
                .sum::<f64>(),
        );
        for (vi, ki) in v.iter_mut().zip(&kv) {
            *vi = ki / knorm;
        }
        if resid <= tol * theta {
            // Rayleigh quotient at the refreshed vector is at least as good.
            apply(&v, &mut kv);
            return Ok(dot(&v, &kv).max(theta));
        }
    }
    Err(Error::NoConvergence {
        what: "power iteration",
        iterations: max_iter,
        estimate: theta,
    })
}

/// Largest singular value `σ_max(M)`, via power iteration on `MᵀM` without
/// forming the product.
pub fn spectral_norm(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    if m.rows() == 0 || m.cols() == 0 || m.is_zero() {
        return Ok(0.0);
    }
    let mut tmp = vec![0.0; m.rows()];
    let lam = dominant_eigenvalue(
        m.cols(),
        |v, out| {
            m.matvec_into(v, &mut tmp);
            m.matvec_t_into(&tmp, out);
        },
        tol,
        max_iter,
    )
    .map_err(|e| match e {
        Error::NoConvergence {
            what,
            iterations,
            estimate,
        } => Error::NoConvergence {
            what,
            iterations,
            estimate: libm::sqrt(estimate.max(0.0)),
        },
        other => other,
    })?;
    Ok(libm::sqrt(lam))
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
pub fn largest_eigenvalue_psd(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "largest_eigenvalue_psd",
            expected: m.rows(),
            found: m.cols(),
        });
    }
    if m.is_zero() {
        return Ok(0.0);
    }
    dominant_eigenvalue(m.rows(), |v, out| m.matvec_into(v, out), tol, max_iter)
}

/// Tolerance used when the crate itself needs a Lipschitz or norm estimate.
pub(crate) const NORM_TOL: f64 = 1e-10;
pub(crate) const NORM_MAX_ITER: usize = 100_000;

/// Finds `r ∈ [lo, hi]` with `|f(r)| ≤ tol`, given a sign change on the bracket.
///
/// Bisection shrinks the bracket until it is narrow, then Newton steps with a
/// central-difference slope polish the root; a Newton step that would leave
/// the current bracket is replaced by bisection. Fails if the bracket
/// collapses to adjacent floats before `|f| ≤ tol`.
pub fn scalar_root<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_positive("tol", tol)?;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::ParameterOutOfRange {
            name: "bracket",
            value: hi - lo,
            expected: "finite with lo <= hi",
        });
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::NonFinite("scalar_root"));
    }
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fb.abs() <= tol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootNotBracketed {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let width0 = b - a;
    let mut x = 0.5 * (a + b);
    for iter in 0..400 {
        let fx = f(x);
        if fx.is_nan() {
            return Err(Error::NonFinite("scalar_root"));
        }
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let narrow = (b - a) <= 1e-6 * width0.max(1e-300) || iter >= 60;
        x = mid;
        if narrow {
            let h = (b - a) * 1e-3;
            let slope = (f(x + h) - f(x - h)) / (2.0 * h);
            let fm = f(x);
            if slope.is_finite() && slope != 0.0 {
                let newton = x - fm / slope;
                if newton > a && newton < b {
                    x = newton;
                }
            }
        }
    }
    let best = if f(a).abs() <= f(b).abs() { a } else { b };
    if f(best).abs() <= tol {
        return Ok(best);
    }
    Err(Error::NoConvergence {
        what: "scalar_root",
        iterations: 400,
        estimate: best,
    })
}

/// Minimizes a unimodal function on `[lo, hi]` by golden-section search.
/// Returns `(argmin, min)`.
pub fn golden_section<F>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > tol * (1.0 + a.abs() + b.abs()) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if c >= d {
            break;
        }
    }
    let mut best = (c, fc);
    for (x, fx) in [(d, fd), (a, f(a)), (b, f(b))] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Central finite-difference gradient with step `h`.
pub fn finite_diff_gradient<F>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    check_positive("h", h)?;
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let xi = x[i];
        probe[i] = xi + h;
        let fp = f(&probe);
        probe[i] = xi - h;
        let fm = f(&probe);
        probe[i] = xi;
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(Error::NonFinite("finite_diff_gradient"));
        }
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}

/// `(d − 1) × d` first-difference matrix with rows `e_{i+1} − e_i`.
pub fn first_difference_matrix(d: usize) -> Result<DenseMatrix> {
    if d < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "d",
            value: d as f64,
            expected: ">= 2",
        });
    }
    let mut m = DenseMatrix::zeros(d - 1, d);
    for i in 0..d - 1 {
        m.set(i, i, -1.0);
        m.set(i, i + 1, 1.0);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cyclic Jacobi eigenvalue solver for small symmetric matrices; used as
    /// an independent oracle for power iteration.
    pub(crate) fn jacobi_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
        let n = m.rows();
        let mut a: Vec<f64> = m.as_slice().to_vec();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j] * a[i * n + j])
                .sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i * n + i]).collect()
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = DenseMatrix::from_diag(&[3.0, 1.0]).unwrap();
        let s = spectral_norm(&m, 1e-12, 10_000).unwrap();
        assert!((s - 3.0).abs() < 1e-10);
        let ev = jacobi_eigenvalues(&m.gram());
        assert!((ev.iter().cloned().fold(0.0, f64::max).sqrt() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_of_rank_one() {
        // u vᵀ with ‖u‖ = 5, ‖v‖ = √2.
        let m = DenseMatrix::from_rows(&[&[3.0, 3.0], &[4.0, 4.0]]).unwrap();
        let s = spectral_norm(&m, 1e-12, 10_000).unwrap();
        assert!((s - 5.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn spectral_norm_when_ones_vector_is_in_null_space() {
        let m = DenseMatrix::from_rows(&[&[1.0, -1.0]]).unwrap();
        let s = spectral_norm(&m, 1e-12, 10_000).unwrap();
        assert!((s - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn spectral_norm_zero_matrix() {
        assert_eq!(spectral_norm(&DenseMatrix::zeros(3, 2), 1e-10, 10).unwrap(), 0.0);
    }

    #[test]
    fn spectral_norm_reports_estimate_on_budget_exhaustion() {
        let m = DenseMatrix::from_diag(&[1.0, 0.999_999]).unwrap();
        match spectral_norm(&m, 1e-15, 3) {
            Err(Error::NoConvergence { estimate, .. }) => {
                assert!(estimate > 0.99 && estimate <= 1.0 + 1e-12)
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let m = DenseMatrix::from_rows(&[&[4.0, 2.0, 0.4], &[2.0, 5.0, 1.0], &[0.4, 1.0, 3.0]])
            .unwrap();
        let b = [1.0, -2.0, 0.5];
        let x = solve_spd(&m, &b).unwrap();
        let r = m.matvec(&x).unwrap();
        assert!(dist_inf(&r, &b) < 1e-13);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert!(matches!(
            Cholesky::factor(&m),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn matrix_rejects_nan() {
        assert!(DenseMatrix::new(1, 2, alloc::vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::new(1, 2, alloc::vec![1.0]).is_err());
    }

    #[test]
    fn gram_matches_explicit_product() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0, 0.0], &[-1.0, 0.5, 3.0]]).unwrap();
        let g = m.gram();
        let g2 = m.transpose().matmul(&m).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn scalar_root_example() {
        // Value frozen from an independent bracketed solver (Brent, xtol 1e-14).
        let f = |t: f64| t + 0.5 * t.powf(-0.5) - 2.0;
        let r = scalar_root(f, 1.0, 2.0, 1e-12).unwrap();
        assert!((r - 1.605_377_940_479_595_8).abs() < 1e-11);
        assert!(f(r).abs() <= 1e-12);
    }

    #[test]
    fn scalar_root_unbracketed() {
        assert!(matches!(
            scalar_root(|t| t * t + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::RootNotBracketed { .. })
        ));
    }

    #[test]
    fn golden_section_quadratic() {
        let (x, fx) = golden_section(|t| (t - 0.3) * (t - 0.3) + 2.0, -5.0, 5.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn finite_differences_of_quadratic() {
        let g = finite_diff_gradient(|x| x[0] * x[0] + 3.0 * x[0] * x[1], &[1.0, 2.0], 1e-5)
            .unwrap();
        assert!((g[0] - 8.0).abs() < 1e-8);
        assert!((g[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn first_difference_examples() {
        let d = first_difference_matrix(3).unwrap();
        assert_eq!(d, DenseMatrix::from_rows(&[&[-1.0, 1.0, 0.0], &[0.0, -1.0, 1.0]]).unwrap());
        assert_eq!(d.matvec(&[1.0, 4.0, 9.0]).unwrap(), alloc::vec![3.0, 5.0]);
        assert!(first_difference_matrix(1).is_err());
        // Rank d − 1: DDᵀ is positive definite, and D annihilates constants.
        let d5 = first_difference_matrix(5).unwrap();
        assert!(Cholesky::factor(&d5.transpose().gram()).is_ok());
        assert_eq!(d5.matvec(&[2.0; 5]).unwrap(), alloc::vec![0.0; 4]);
    }

    mod props {
        use super::super::*;
        use super::jacobi_eigenvalues;
        use proptest::prelude::*;

        fn matrix(max: usize) -> impl Strategy<Value = DenseMatrix> {
            (1..=max, 1..=max).prop_flat_map(|(r, c)| {
                proptest::collection::vec(-3.0..3.0f64, r * c)
                    .prop_map(move |data| DenseMatrix::new(r, c, data).unwrap())
            })
        }

        proptest! {
            #[test]
            fn spectral_norm_matches_jacobi(m in matrix(8)) {
                let s = spectral_norm(&m, 1e-12, 1_000_000).unwrap();
                let top = jacobi_eigenvalues(&m.gram()).into_iter().fold(0.0, f64::max).max(0.0).sqrt();
                prop_assert!((s - top).abs() <= 1e-6 * top.max(1e-12));
            }

            #[test]
            fn cholesky_residual(m in matrix(6)) {
                let mut g = m.gram();
                g.add_diag(0.5);
                let b: Vec<f64> = (0..g.rows()).map(|i| i as f64 - 1.0).collect();
                let x = solve_spd(&g, &b).unwrap();
                prop_assert!(dist_inf(&g.matvec(&x).unwrap(), &b) < 1e-9);
            }

            #[test]
            fn root_residual_within_tol(c in 0.1..50.0f64, k in 0.01..5.0f64) {
                // t + k·√t − c is increasing on [0, c].
                let f = |t: f64| t + k * t.sqrt() - c;
                let r = scalar_root(f, 0.0, c, 1e-10).unwrap();
                prop_assert!(f(r).abs() <= 1e-10);
            }
        }
    }
}
