//! Small dense linear algebra: enough for admittance matrices, Schur
//! complements and closed-loop state matrices with a few hundred rows.
//!
//! * [`solve`]: Gaussian elimination with partial pivoting.
//! * [`symmetric_eigenvalues`]: cyclic Jacobi rotations.
//! * [`hermitian_eigenvalues`]: Jacobi on the real symmetric embedding.
//! * [`eigenvalues`]: balancing, Hessenberg reduction and Francis
//!   double-shift QR for general real matrices.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Copy + Zero> Matrix<E> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![E::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<E>]) -> Result<Self> {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self::from_fn(r, cols, |i, j| rows[i][j]))
    }

    pub fn diag(values: &[E]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
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

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Sub-matrix with the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn map<F: Copy + Zero>(&self, f: impl Fn(E) -> F) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<E>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl<E: Copy + Zero + One> Matrix<E> {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { E::one() } else { E::zero() })
    }
}

impl<E> Index<(usize, usize)> for Matrix<E> {
    type Output = E;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &E {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<E> IndexMut<(usize, usize)> for Matrix<E> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut E {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<'a, E> Mul<&'a Matrix<E>> for &'a Matrix<E>
where
    E: Copy + Zero + Mul<Output = E>,
{
    type Output = Matrix<E>;
    fn mul(self, rhs: &'a Matrix<E>) -> Matrix<E> {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<'a, E> Add<&'a Matrix<E>> for &'a Matrix<E>
where
    E: Copy + Zero + Add<Output = E>,
{
    type Output = Matrix<E>;
    fn add(self, rhs: &'a Matrix<E>) -> Matrix<E> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl<'a, E> Sub<&'a Matrix<E>> for &'a Matrix<E>
where
    E: Copy + Zero + Sub<Output = E>,
{
    type Output = Matrix<E>;
    fn sub(self, rhs: &'a Matrix<E>) -> Matrix<E> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl<T: Real> Matrix<T> {
    pub fn scale(&self, k: T) -> Self {
        self.map(|x| x * k)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn to_complex(&self) -> Matrix<Complex<T>> {
        self.map(|x| Complex::new(x, T::zero()))
    }

    /// `max |a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols.min(self.rows) {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }
}

impl<T: Real> Matrix<Complex<T>> {
    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols(), self.rows(), |i, j| self[(j, i)].conj())
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.norm()))
    }

    /// `M + M^H`.
    pub fn hermitian_sum(&self) -> Self {
        Self::from_fn(self.rows(), self.cols(), |i, j| self[(i, j)] + self[(j, i)].conj())
    }

    /// Real symmetric embedding `[[Re, -Im], [Im, Re]]` of a complex matrix.
    pub fn real_embedding(&self) -> Matrix<T> {
        let n = self.rows();
        let m = self.cols();
        Matrix::from_fn(2 * n, 2 * m, |i, j| {
            let z = self[(i % n, j % m)];
            match (i < n, j < m) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        })
    }
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(Error::Dimension(format!(
            "solve: A is {}x{}, B has {} rows",
            a.rows(),
            a.cols(),
            b.rows()
        )));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs();
    for k in 0..n {
        let (piv, pval) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pval <= T::epsilon() * scale * T::lit(n as f64) || pval == T::zero() {
            return Err(Error::Internal("singular matrix in solve".into()));
        }
        if piv != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
            for j in 0..x.cols() {
                let t = x[(k, j)];
                x[(k, j)] = x[(piv, j)];
                x[(piv, j)] = t;
            }
        }
        for i in k + 1..n {
            let f = lu[(i, k)] / lu[(k, k)];
            if f == T::zero() {
                continue;
            }
            for j in k..n {
                let v = lu[(k, j)];
                lu[(i, j)] -= f * v;
            }
            for j in 0..x.cols() {
                let v = x[(k, j)];
                x[(i, j)] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..x.cols() {
            let mut s = x[(k, j)];
            for i in k + 1..n {
                s -= lu[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = s / lu[(k, k)];
        }
    }
    Ok(x)
}

/// Eigenvalues of a real symmetric matrix in ascending order.
///
/// Cyclic Jacobi; converges when the off-diagonal Frobenius norm drops
/// below `1e-11` (relative).
pub fn symmetric_eigenvalues<T: Real>(a: &Matrix<T>) -> Result<Vec<T>> {
    if !a.is_square() {
        return Err(Error::Dimension("symmetric_eigenvalues: not square".into()));
    }
    let n = a.rows();
    let mut m = a.clone();
    // enforce exact symmetry
    for i in 0..n {
        for j in i + 1..n {
            let v = (m[(i, j)] + m[(j, i)]) * T::lit(0.5);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let frob = m.data.iter().map(|x| *x * *x).sum::<T>().sqrt();
    if frob == T::zero() {
        return Ok(vec![T::zero(); n]);
    }
    let target = T::tol(1e-11) * frob * T::lit(1e-3);
    let mut converged = n < 2;
    for _sweep in 0..100 {
        let off = off_diagonal_norm(&m);
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= T::epsilon() * T::epsilon() * frob {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
                m[(p, q)] = T::zero();
                m[(q, p)] = T::zero();
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > T::tol(1e-9) * frob {
        return Err(Error::NoConvergence {
            algorithm: "Jacobi eigenvalue iteration",
        });
    }
    let mut ev: Vec<T> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ev)
}

fn off_diagonal_norm<T: Real>(m: &Matrix<T>) -> T {
    let n = m.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues (ascending) of a Hermitian matrix.
///
/// The real embedding `[[Re, -Im], [Im, Re]]` is symmetric with every
/// eigenvalue of the Hermitian matrix appearing twice.
pub fn hermitian_eigenvalues<T: Real>(h: &Matrix<Complex<T>>) -> Result<Vec<T>> {
    if !h.is_square() {
        return Err(Error::Dimension("hermitian_eigenvalues: not square".into()));
    }
    let herm = Matrix::from_fn(h.rows(), h.cols(), |i, j| {
        (h[(i, j)] + h[(j, i)].conj()) * T::lit(0.5)
    });
    let doubled = symmetric_eigenvalues(&herm.real_embedding())?;
    Ok(doubled.into_iter().step_by(2).collect())
}

/// Closed-form eigenvalues `(min, max)` of a 2x2 Hermitian matrix given by
/// its diagonal `a`, `d` and off-diagonal `b` (the (0,1) entry).
pub fn hermitian_2x2_eigenvalues<T: Real>(a: T, d: T, b: Complex<T>) -> (T, T) {
    let mean = (a + d) * T::lit(0.5);
    let half = (a - d) * T::lit(0.5);
    let r = (half * half + b.norm_sqr()).sqrt();
    (mean - r, mean + r)
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues<T: Real>(a: &Matrix<T>) -> Result<Vec<Complex<T>>> {
    if !a.is_square() {
        return Err(Error::Dimension("eigenvalues: not square".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    // 1-based working copy keeps the classic Hessenberg/QR index arithmetic readable.
    let mut w = vec![vec![T::zero(); n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            w[i + 1][j + 1] = a[(i, j)];
        }
    }
    balance(&mut w, n);
    hessenberg(&mut w, n);
    for i in 1..=n {
        for j in 1..=n {
            if i > j + 1 {
                w[i][j] = T::zero();
            }
        }
    }
    hessenberg_qr(&mut w, n)
}

fn balance<T: Real>(a: &mut [Vec<T>], n: usize) {
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < T::lit(0.95) * s {
                    done = false;
                    let g = T::one() / f;
                    for j in 1..=n {
                        a[i][j] *= g;
                    }
                    for j in 1..=n {
                        a[j][i] *= f;
                    }
                }
            }
        }
    }
}

/// Reduction to upper Hessenberg form by stabilized elementary similarity
/// transformations.
fn hessenberg<T: Real>(a: &mut [Vec<T>], n: usize) {
    if n < 3 {
        return;
    }
    for m in 2..n {
        let mut x = T::zero();
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let t = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = t;
            }
            for row in a.iter_mut().take(n + 1).skip(1) {
                row.swap(i, m);
            }
        }
        if x != T::zero() {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if y != T::zero() {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        let v = a[m][j];
                        a[i][j] -= y * v;
                    }
                    for row in a.iter_mut().take(n + 1).skip(1) {
                        let v = row[i];
                        row[m] += y * v;
                    }
                }
            }
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
#[allow(clippy::many_single_char_names)]
fn hessenberg_qr<T: Real>(a: &mut [Vec<T>], n: usize) -> Result<Vec<Complex<T>>> {
    let mut wr = vec![T::zero(); n + 1];
    let mut wi = vec![T::zero(); n + 1];
    let eps = T::epsilon();
    let mut anorm = T::zero();
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize;
    let mut t = T::zero();
    let (mut p, mut q, mut r);
    let (mut x, mut y, mut z);
    let mut w;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = 1usize;
            let mut ll = nu;
            while ll >= 2 {
                let mut s = a[ll - 1][ll - 1].abs() + a[ll][ll].abs();
                if s == T::zero() {
                    s = anorm;
                }
                if a[ll][ll - 1].abs() <= eps * s {
                    a[ll][ll - 1] = T::zero();
                    l = ll;
                    break;
                }
                ll -= 1;
            }
            x = a[nu][nu];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = T::zero();
                nn -= 1;
                break;
            }
            y = a[nu - 1][nu - 1];
            w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                p = T::lit(0.5) * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                if q >= T::zero() {
                    z = p + z.copysign(p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != T::zero() {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = T::zero();
                    wi[nu] = T::zero();
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its == 60 {
                return Err(Error::NoConvergence {
                    algorithm: "Hessenberg QR eigenvalue iteration",
                });
            }
            if its == 10 || its == 20 || its == 40 {
                // exceptional shift
                t += x;
                for i in 1..=nu {
                    a[i][i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            its += 1;
            let mut m = nu - 2;
            loop {
                z = a[m][m];
                r = x - z;
                let s0 = y - z;
                p = (r * s0 - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - r - s0;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                a[i][i - 2] = T::zero();
                if i != m + 2 {
                    a[i][i - 3] = T::zero();
                }
            }
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = T::zero();
                    if k != nu - 1 {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != T::zero() {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != T::zero() {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        p = a[k][j] + q * a[k + 1][j];
                        if k != nu - 1 {
                            p += r * a[k + 2][j];
                            a[k + 2][j] -= p * z;
                        }
                        a[k + 1][j] -= p * y;
                        a[k][j] -= p * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        p = x * a[i][k] + y * a[i][k + 1];
                        if k != nu - 1 {
                            p += z * a[i][k + 2];
                            a[i][k + 2] -= p * r;
                        }
                        a[i][k + 1] -= p * q;
                        a[i][k] -= p;
                    }
                }
                k += 1;
            }
            if l >= nu - 1 {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex::new(wr[i], wi[i])).collect())
}
