//! Dense real linear algebra for small systems.
//!
//! Everything here works on row-major `f64` storage and is sized for plants
//! with a handful of states. The three kernels the rest of the crate leans on
//! are [`mat_exp`], [`phi_gamma`] and [`spectral_radius`].

use std::fmt;
use std::ops::{Deref, Index, IndexMut};

use crate::error::{Error, Result};

/// Largest matrix dimension accepted by the kernels unless overridden.
pub const DEFAULT_MAX_DIM: usize = 64;

/// Padé degree used by [`mat_exp`].
const PADE_DEGREE: usize = 13;
/// 1-norm bound under which the degree-13 diagonal Padé approximant is
/// accurate to double precision (Higham, 2005).
const PADE13_THETA: f64 = 5.371_920_351_148_152;
/// Numerator/denominator coefficients of the [13/13] Padé approximant to e^x.
const PADE13_COEFFS: [f64; PADE_DEGREE + 1] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Size and iteration limits for the dense kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinalgLimits {
    pub max_dim: usize,
    /// Francis QR sweeps allowed per eigenvalue before giving up.
    pub max_qr_sweeps: usize,
}

impl Default for LinalgLimits {
    fn default() -> Self {
        Self {
            max_dim: DEFAULT_MAX_DIM,
            max_qr_sweeps: 60,
        }
    }
}

/// Dense real vector with finite entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "vector entry {i} is not finite ({})",
                entries[i]
            )));
        }
        Ok(Self(entries))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm(&self) -> f64 {
        self.dot(&self.0).sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| v * c).collect())
    }
}

impl Deref for RealVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<RealVector> for Vec<f64> {
    fn from(v: RealVector) -> Self {
        v.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.rows).map(|i| self.row(i)).collect();
        f.debug_struct("RealMatrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("data", &rows)
            .finish()
    }
}

impl RealMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "matrix entry ({}, {}) is not finite ({})",
                i / cols.max(1),
                i % cols.max(1),
                data[i]
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::Dimension(format!(
                "row {i} has {} columns, expected {cols}",
                rows[i].len()
            )));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, v) in entries.iter().enumerate() {
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// Elementwise `self + c * other`; shapes must match.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} matrix by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Copies the `rows x cols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    fn require_square(&self, what: &str, limits: &LinalgLimits) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "{what} requires a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.rows > limits.max_dim {
            return Err(Error::Dimension(format!(
                "{what}: dimension {} exceeds the cap of {}",
                self.rows, limits.max_dim
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `a * x = b` for a square `a` by LU with partial pivoting.
fn solve(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
    let n = a.rows;
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[(i, k)].abs().total_cmp(&lu[(j, k)].abs()))
            .unwrap_or(k);
        if lu[(p, k)] == 0.0 {
            return Err(Error::Numerical(format!(
                "singular Padé denominator (zero pivot in column {k})"
            )));
        }
        if p != k {
            for j in 0..n {
                lu.data.swap(k * n + j, p * n + j);
            }
            for j in 0..x.cols {
                x.data.swap(k * x.cols + j, p * x.cols + j);
            }
        }
        for i in k + 1..n {
            let f = lu[(i, k)] / lu[(k, k)];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                lu[(i, j)] -= f * lu[(k, j)];
            }
            for j in 0..x.cols {
                x[(i, j)] -= f * x[(k, j)];
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..x.cols {
            let mut s = x[(k, j)];
            for i in k + 1..n {
                s -= lu[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = s / lu[(k, k)];
        }
    }
    Ok(x)
}

/// Computes `e^{M t}`.
///
/// Scaling and squaring around the [13/13] diagonal Padé approximant: `Mt`
/// is divided by `2^s` until its 1-norm is at most 5.37, the approximant is
/// evaluated with the usual even/odd split, and the result is squared `s`
/// times.
pub fn mat_exp(m: &RealMatrix, t: f64) -> Result<RealMatrix> {
    mat_exp_with(m, t, &LinalgLimits::default())
}

pub fn mat_exp_with(m: &RealMatrix, t: f64, limits: &LinalgLimits) -> Result<RealMatrix> {
    m.require_square("mat_exp", limits)?;
    if !t.is_finite() {
        return Err(Error::Validation(format!(
            "mat_exp: time {t} is not finite"
        )));
    }
    let n = m.rows;
    let a = m.scaled(t);
    let norm = a.norm_one();
    if norm == 0.0 {
        return Ok(RealMatrix::identity(n));
    }
    let squarings = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a.scaled(2f64.powi(-squarings));

    let c = &PADE13_COEFFS;
    let ident = RealMatrix::identity(n);
    let a2 = a.mul_unchecked(&a);
    let a4 = a2.mul_unchecked(&a2);
    let a6 = a4.mul_unchecked(&a2);

    let lin = |terms: &[(f64, &RealMatrix)]| {
        let mut out = RealMatrix::zeros(n, n);
        for (coef, mat) in terms {
            for (o, v) in out.data.iter_mut().zip(&mat.data) {
                *o += coef * v;
            }
        }
        out
    };

    let u_hi = lin(&[(c[13], &a6), (c[11], &a4), (c[9], &a2)]);
    let u_lo = lin(&[(c[7], &a6), (c[5], &a4), (c[3], &a2), (c[1], &ident)]);
    let u_inner = a6.mul_unchecked(&u_hi).add_scaled(1.0, &u_lo)?;
    let u = a.mul_unchecked(&u_inner);

    let v_hi = lin(&[(c[12], &a6), (c[10], &a4), (c[8], &a2)]);
    let v_lo = lin(&[(c[6], &a6), (c[4], &a4), (c[2], &a2), (c[0], &ident)]);
    let v = a6.mul_unchecked(&v_hi).add_scaled(1.0, &v_lo)?;

    let numer = v.add_scaled(1.0, &u)?;
    let denom = v.add_scaled(-1.0, &u)?;
    let mut r = solve(&denom, &numer)?;
    for _ in 0..squarings {
        r = r.mul_unchecked(&r);
    }
    Ok(r)
}

/// Returns `(e^{At}, ∫_0^t e^{As} b ds)`.
///
/// Both come out of one exponential of the bordered matrix `[[A, b], [0, 0]]`
/// scaled by `t`: the top-left block is `e^{At}` and the last column holds
/// the integral.
pub fn phi_gamma(a: &RealMatrix, b: &[f64], t: f64) -> Result<(RealMatrix, RealVector)> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Validation(format!(
            "phi_gamma: integration horizon must be finite and >= 0, got {t}"
        )));
    }
    let limits = LinalgLimits::default();
    a.require_square("phi_gamma", &limits)?;
    let n = a.rows;
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "phi_gamma: A is {n}x{n} but b has length {}",
            b.len()
        )));
    }
    let mut bordered = RealMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            bordered[(i, j)] = a[(i, j)];
        }
        bordered[(i, n)] = b[i];
    }
    let e = mat_exp_with(
        &bordered,
        t,
        &LinalgLimits {
            max_dim: limits.max_dim + 1,
            ..limits
        },
    )?;
    let phi = e.block(0, 0, n, n);
    let gamma = RealVector::new((0..n).map(|i| e[(i, n)]).collect())?;
    Ok((phi, gamma))
}

/// Spectral radius `max |λ|` over all (possibly complex) eigenvalues.
pub fn spectral_radius(m: &RealMatrix) -> Result<f64> {
    spectral_radius_with(m, &LinalgLimits::default())
}

pub fn spectral_radius_with(m: &RealMatrix, limits: &LinalgLimits) -> Result<f64> {
    Ok(eigenvalues_with(m, limits)?
        .iter()
        .map(|&(re, im)| re.hypot(im))
        .fold(0.0, f64::max))
}

/// Eigenvalues as `(re, im)` pairs, in no particular order.
pub fn eigenvalues(m: &RealMatrix) -> Result<Vec<(f64, f64)>> {
    eigenvalues_with(m, &LinalgLimits::default())
}

pub fn eigenvalues_with(m: &RealMatrix, limits: &LinalgLimits) -> Result<Vec<(f64, f64)>> {
    m.require_square("spectral_radius", limits)?;
    let mut h = m.clone();
    balance(&mut h);
    hessenberg(&mut h);
    hessenberg_qr(&mut h, limits.max_qr_sweeps)
}

/// Parlett–Reinsch balancing by powers of two; preserves eigenvalues exactly.
fn balance(a: &mut RealMatrix) {
    const RADIX: f64 = 2.0;
    let n = a.rows;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
}

/// Reduces `a` to upper Hessenberg form in place with Householder reflectors.
fn hessenberg(a: &mut RealMatrix) {
    let n = a.rows;
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let alpha: f64 = (k + 1..n)
            .map(|i| a[(i, k)] * a[(i, k)])
            .sum::<f64>()
            .sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let sign = if x0 >= 0.0 { 1.0 } else { -1.0 };
        v[..].fill(0.0);
        v[k + 1] = x0 + sign * alpha;
        for i in k + 2..n {
            v[i] = a[(i, k)];
        }
        let vnorm2: f64 = v[k + 1..].iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A <- (I - 2vv^T/|v|^2) A (I - 2vv^T/|v|^2)
        for j in 0..n {
            let s: f64 = (k + 1..n).map(|i| v[i] * a[(i, j)]).sum();
            let f = 2.0 * s / vnorm2;
            for i in k + 1..n {
                a[(i, j)] -= f * v[i];
            }
        }
        for i in 0..n {
            let s: f64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum();
            let f = 2.0 * s / vnorm2;
            for j in k + 1..n {
                a[(i, j)] -= f * v[j];
            }
        }
        a[(k + 1, k)] = -sign * alpha;
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (EISPACK `hqr`).
fn hessenberg_qr(a: &mut RealMatrix, max_sweeps: usize) -> Result<Vec<(f64, f64)>> {
    let n = a.rows;
    let mut eig = vec![(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let anorm: f64 = (0..n)
        .map(|i| {
            (i.saturating_sub(1)..n)
                .map(|j| a[(i, j)].abs())
                .sum::<f64>()
        })
        .sum();
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0usize;
        loop {
            let nnu = nn as usize;
            // look for a single small subdiagonal element
            let mut l = nnu;
            while l >= 1 {
                let s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                let s = if s == 0.0 { anorm } else { s };
                if a[(l, l - 1)].abs() + s == s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let x = a[(nnu, nnu)];
            if l == nnu {
                eig[nnu] = (x + t, 0.0);
                nn -= 1;
                break;
            }
            let y = a[(nnu - 1, nnu - 1)];
            let w = a[(nnu, nnu - 1)] * a[(nnu - 1, nnu)];
            if l + 1 == nnu {
                // 2x2 block
                let pp = 0.5 * (y - x);
                let qq = pp * pp + w;
                let z = qq.abs().sqrt();
                let xs = x + t;
                if qq >= 0.0 {
                    let z = pp + z.copysign(pp);
                    let e1 = xs + z;
                    let e2 = if z != 0.0 { xs - w / z } else { e1 };
                    eig[nnu - 1] = (e1, 0.0);
                    eig[nnu] = (e2, 0.0);
                } else {
                    eig[nnu - 1] = (xs + pp, z);
                    eig[nnu] = (xs + pp, -z);
                }
                nn -= 2;
                break;
            }
            if its == max_sweeps {
                return Err(Error::Numerical(format!(
                    "QR iteration did not converge after {its} sweeps on the \
                     active block ending at row {nnu} (matrix dimension {n})"
                )));
            }
            let (mut x, mut y, mut w) = (x, y, w);
            if its == 10 || its == 20 {
                // exceptional shift
                t += x;
                for i in 0..=nnu {
                    a[(i, i)] -= x;
                }
                let s = a[(nnu, nnu - 1)].abs() + a[(nnu - 1, nnu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            // look for two consecutive small subdiagonal elements
            let (mut p, mut q, mut r): (f64, f64, f64);
            let mut m = nnu - 2;
            loop {
                let z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nnu {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }
            // double QR step on rows l..=nn, columns m..=nn
            let mut k = m;
            while k < nnu {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k + 1 != nnu { a[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nnu {
                        let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                        if k + 1 != nnu {
                            pp += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= pp * z;
                        }
                        a[(k + 1, j)] -= pp * y;
                        a[(k, j)] -= pp * x;
                    }
                    let mmin = if nnu < k + 3 { nnu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                        if k + 1 != nnu {
                            pp += z * a[(i, k + 2)];
                            a[(i, k + 2)] -= pp * r;
                        }
                        a[(i, k + 1)] -= pp * q;
                        a[(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(eig)
}
