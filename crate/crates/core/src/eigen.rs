//! Dense symmetric (cyclic Jacobi) and tridiagonal (characteristic
//! polynomial) eigenvalue engines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense symmetric matrix; only `set_sym` writes, so symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        Ok(SymMatrix {
            n,
            data: vec![0.0; n * n],
        })
    }

    /// Builds the matrix from `f(i, j)` evaluated for `i <= j` only.
    pub fn from_upper<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            for j in i..n {
                m.set_sym(i, j, f(i, j));
            }
        }
        Ok(m)
    }

    /// Builds the matrix from full rows, which must already be symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidArgument("matrix rows must be square".into()));
            }
            for j in i..n {
                if row[j] != rows[j][i] {
                    return Err(Error::InvalidArgument(format!("entry ({i},{j}) breaks symmetry")));
                }
                m.set_sym(i, j, row[j]);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        if i == j {
            self.data[i * self.n + i] += v;
        } else {
            self.data[i * self.n + j] += v;
            self.data[j * self.n + i] += v;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn off_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let v = self.get(i, j);
                acc += 2.0 * v * v;
            }
        }
        acc.sqrt()
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> SymMatrix {
        let mut m = self.clone();
        for v in m.data.iter_mut() {
            *v = -*v;
        }
        for i in 0..self.n {
            m.data[i * self.n + i] += 1.0;
        }
        m
    }
}

/// Eigenvalues (ascending) and, on request, the matching orthonormal
/// eigenvectors `vectors[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<f64>>>,
    pub sweeps: usize,
    pub off_norm: f64,
}

pub const MAX_JACOBI_SWEEPS: usize = 30;

/// Cyclic Jacobi. Sweeps until the off-diagonal Frobenius norm falls below
/// `max(tol, 1e-14 ||m||_F)`.
pub fn jacobi_eigen(m: &SymMatrix, tol: f64, want_vectors: bool) -> Result<EigenDecomposition> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Jacobi tolerance must be positive, got {tol}"
        )));
    }
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = if want_vectors {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        Some(id)
    } else {
        None
    };
    let target = tol.max(1e-14 * m.frobenius_norm());
    let mut off = m.off_norm();
    let mut sweeps = 0;
    while off > target {
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(Error::JacobiNonConvergence { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // negligible against both diagonal entries: drop it
                if apq.abs() < 1e-18 * app.abs().min(aqq.abs()) {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, n, p, q, c, s);
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        off = {
            let mut acc = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    acc += 2.0 * a[i * n + j] * a[i * n + j];
                }
            }
            acc.sqrt()
        };
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = v.map(|v| order.iter().map(|&j| (0..n).map(|k| v[k * n + j]).collect()).collect());
    Ok(EigenDecomposition {
        values,
        vectors,
        sweeps,
        off_norm: off,
    })
}

/// Applies the rotation to rows/columns `p`, `q` except the 2x2 block.
#[inline]
fn rotate(a: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let np = c * akp - s * akq;
        let nq = s * akp + c * akq;
        a[k * n + p] = np;
        a[p * n + k] = np;
        a[k * n + q] = nq;
        a[q * n + k] = nq;
    }
}

/// Tridiagonal matrix. Row `k` reads `sub[k-1] v_{k-1} + diag[k] v_k +
/// sup[k] v_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tridiag {
    pub diag: Vec<f64>,
    pub sub: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiag {
    pub fn new(diag: Vec<f64>, sub: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || sub.len() + 1 != diag.len() || sup.len() + 1 != diag.len() {
            return Err(Error::InvalidArgument(format!(
                "tridiagonal lengths {}/{}/{} are inconsistent",
                diag.len(),
                sub.len(),
                sup.len()
            )));
        }
        Ok(Tridiag { diag, sub, sup })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Rows `n = lo..=hi` of the Fourier-side matrix
    /// `(Av)_n = (eps/2) n(n-1) v_{n-1} - (eps/2) n(n+1) v_{n+1} + n v_n`.
    fn fourier_rows(eps: f64, lo: i64, hi: i64) -> Self {
        let e2 = 0.5 * eps;
        let diag = (lo..=hi).map(|n| n as f64).collect();
        let sub = (lo + 1..=hi).map(|n| e2 * (n * (n - 1)) as f64).collect();
        let sup = (lo..hi).map(|n| -e2 * (n * (n + 1)) as f64).collect();
        Tridiag { diag, sub, sup }
    }

    /// Dirichlet truncation of `A_+` to indices `1..=n`.
    pub fn a_plus(eps: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("truncation size must be positive".into()));
        }
        Ok(Self::fourier_rows(eps, 1, n as i64))
    }

    /// Truncation of the whole line, indices `-n..=n`.
    pub fn full_line(eps: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("truncation size must be positive".into()));
        }
        Ok(Self::fourier_rows(eps, -(n as i64), n as i64))
    }

    /// Same matrix with both off-diagonals negated (a diagonal similarity).
    pub fn flipped(&self) -> Self {
        Tridiag {
            diag: self.diag.clone(),
            sub: self.sub.iter().map(|v| -v).collect(),
            sup: self.sup.iter().map(|v| -v).collect(),
        }
    }
}

/// `det(T - lambda I)` in sign / log-magnitude form together with
/// `p'(lambda) / p(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharPolyValue {
    pub sign: f64,
    pub log_magnitude: f64,
    pub log_derivative_ratio: f64,
}

/// Three-term recurrence `p_k = (d_k - lambda) p_{k-1} - sub_k sup_{k-1}
/// p_{k-2}`, rescaled at every step.
pub fn charpoly_eval(t: &Tridiag, lambda: f64) -> CharPolyValue {
    let mut p_prev = 1.0; // p_{k-2}
    let mut dp_prev = 0.0;
    let mut p = t.diag[0] - lambda; // p_{k-1}
    let mut dp = -1.0;
    let mut log_scale = 0.0;
    for k in 1..t.dim() {
        let c = t.sub[k - 1] * t.sup[k - 1];
        let a = t.diag[k] - lambda;
        let p_next = a * p - c * p_prev;
        let dp_next = -p + a * dp - c * dp_prev;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
        let scale = p.abs().max(p_prev.abs());
        if scale > 1e100 || (scale < 1e-100 && scale > 0.0) {
            p /= scale;
            p_prev /= scale;
            dp /= scale;
            dp_prev /= scale;
            log_scale += scale.ln();
        }
    }
    CharPolyValue {
        sign: if p > 0.0 {
            1.0
        } else if p < 0.0 {
            -1.0
        } else {
            0.0
        },
        log_magnitude: p.abs().ln() + log_scale,
        log_derivative_ratio: dp / p,
    }
}

/// Which pipeline produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Fourier,
    Nystrom,
    ExactLimit,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Fourier => "fourier",
            Route::Nystrom => "nystrom",
            Route::ExactLimit => "exact_limit",
        }
    }
}

/// Discretization parameters that produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Discretization {
    pub truncation: Option<usize>,
    pub nodes: Option<usize>,
    pub cutoff: Option<f64>,
}

/// Ascending eigenvalues; the first `reliable_count` passed refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub route: Route,
    pub discretization: Discretization,
    pub reliable_count: usize,
}

impl Spectrum {
    pub fn new(
        eigenvalues: Vec<f64>,
        route: Route,
        discretization: Discretization,
        reliable_count: usize,
    ) -> Result<Self> {
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("spectrum must be sorted ascending".into()));
        }
        if reliable_count > eigenvalues.len() {
            return Err(Error::InvalidArgument("reliable_count exceeds eigenvalue count".into()));
        }
        Ok(Spectrum {
            eigenvalues,
            route,
            discretization,
            reliable_count,
        })
    }

    pub fn reliable(&self) -> &[f64] {
        &self.eigenvalues[..self.reliable_count]
    }
}

/// Number of leading entries with `|a - b| / |a| < rel_tol`.
pub fn stable_prefix(coarse: &[f64], fine: &[f64], rel_tol: f64) -> usize {
    coarse
        .iter()
        .zip(fine)
        .take_while(|(a, b)| ((*a - *b) / *a).abs() < rel_tol)
        .count()
}

fn sign_at(t: &Tridiag, x: f64) -> f64 {
    charpoly_eval(t, x).sign
}

/// Safeguarded Newton iteration inside a sign-change bracket.
fn refine_bracket(t: &Tridiag, mut a: f64, mut b: f64) -> f64 {
    let sa = sign_at(t, a);
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let v = charpoly_eval(t, x);
        if v.sign == 0.0 {
            return x;
        }
        if v.sign == sa {
            a = x;
        } else {
            b = x;
        }
        let newton = x - 1.0 / v.log_derivative_ratio;
        let next = if newton > a && newton < b && newton.is_finite() {
            newton
        } else {
            0.5 * (a + b)
        };
        let step = (next - x).abs();
        x = next;
        if step <= 2.0 * f64::EPSILON * x.abs() || (b - a) <= 2.0 * f64::EPSILON * x.abs() {
            break;
        }
    }
    x
}

/// Nearest sign-change bracket around `seed`, growing outward
/// geometrically; `None` if the window is exhausted.
fn bracket_near(t: &Tridiag, seed: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let s0 = sign_at(t, seed);
    if s0 == 0.0 {
        return Some((seed, seed));
    }
    let mut step = 1.0 / 64.0 * seed.abs().max(1.0).sqrt();
    let (mut left, mut right) = (seed, seed);
    let (mut sl, mut sr) = (s0, s0);
    loop {
        let mut moved = false;
        if right < hi {
            let x = (right + step).min(hi);
            let sx = sign_at(t, x);
            if sx != sr {
                return Some((right, x));
            }
            right = x;
            sr = sx;
            moved = true;
        }
        if left > lo {
            let x = (left - step).max(lo);
            let sx = sign_at(t, x);
            if sx != sl {
                return Some((x, left));
            }
            left = x;
            sl = sx;
            moved = true;
        }
        if !moved {
            return None;
        }
        step *= 1.5;
    }
}

/// Real roots of `det(T - lambda I)` near each seed.
pub fn tridiag_real_roots(t: &Tridiag, seeds: &[f64], window: (f64, f64)) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!("invalid root window [{lo}, {hi}]")));
    }
    if seeds.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("seeds must be sorted".into()));
    }
    let mut roots = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        if !(seed >= lo && seed <= hi) {
            return Err(Error::SeedLeftWindow { seed, lo, hi });
        }
        let (a, b) = bracket_near(t, seed, lo, hi).ok_or(Error::SeedLeftWindow { seed, lo, hi })?;
        let r = if a == b { a } else { refine_bracket(t, a, b) };
        roots.push(r);
    }
    let roots = merge_roots(roots);
    if roots.len() != seeds.len() {
        return Err(Error::BracketCountMismatch {
            requested: seeds.len(),
            found: roots.len(),
        });
    }
    Ok(roots)
}

/// The lowest `count` real roots in `window`, found by scanning upward for
/// sign changes. The step is `step` up to `|x| = 8` and grows like `|x|`
/// beyond, matching the quadratic spreading of the roots.
pub fn tridiag_roots_scan(t: &Tridiag, count: usize, window: (f64, f64), step: f64) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "invalid scan window [{lo}, {hi}] / step {step}"
        )));
    }
    let mut roots = Vec::with_capacity(count);
    let mut x = lo;
    let mut sx = sign_at(t, x);
    while roots.len() < count && x < hi {
        let y = (x + step * (x.abs() / 8.0).max(1.0)).min(hi);
        let sy = sign_at(t, y);
        if sy == 0.0 {
            roots.push(y);
            // restart just past the exact zero
            x = y + 1e-12 * y.abs().max(1.0);
            sx = sign_at(t, x);
            continue;
        }
        if sx != 0.0 && sy != sx {
            roots.push(refine_bracket(t, x, y));
        }
        x = y;
        sx = sy;
    }
    let roots = merge_roots(roots);
    if roots.len() < count {
        return Err(Error::BracketCountMismatch {
            requested: count,
            found: roots.len(),
        });
    }
    Ok(roots)
}

fn merge_roots(mut roots: Vec<f64>) -> Vec<f64> {
    roots.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        match out.last() {
            Some(&p) if (r - p).abs() <= 1e-9 * r.abs().max(p.abs()).max(1e-300) => {}
            _ => out.push(r),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lcg_matrix(n: usize, mut state: u64) -> SymMatrix {
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        SymMatrix::from_upper(n, |_, _| next()).unwrap()
    }

    #[test]
    fn diagonal_and_swap() {
        let m = SymMatrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]]).unwrap();
        assert_eq!(jacobi_eigen(&m, 1e-12, false).unwrap().values, vec![1.0, 2.0, 3.0]);
        let m = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let d = jacobi_eigen(&m, 1e-14, true).unwrap();
        assert!((d.values[0] + 1.0).abs() < 1e-15 && (d.values[1] - 1.0).abs() < 1e-15);
        assert!(SymMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(jacobi_eigen(&m, 0.0, false).is_err());
    }

    #[test]
    fn random_matrix_invariants() {
        let m = lcg_matrix(50, 7);
        let d = jacobi_eigen(&m, 1e-13, true).unwrap();
        let sum: f64 = d.values.iter().sum();
        assert!((sum - m.trace()).abs() < 1e-10);
        let fro: f64 = d.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((fro - m.frobenius_norm()).abs() < 1e-10);
        let v = d.vectors.as_ref().unwrap();
        for i in 0..50 {
            for j in 0..50 {
                let dot: f64 = (0..50).map(|k| v[i][k] * v[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
            // residual ||A v - lambda v||
            let res: f64 = (0..50)
                .map(|r| {
                    let av: f64 = (0..50).map(|k| m.get(r, k) * v[i][k]).sum();
                    (av - d.values[i] * v[i][r]).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-10);
        }
    }

    #[test]
    fn charpoly_small_cases() {
        let t = Tridiag::a_plus(0.3, 1).unwrap();
        let v = charpoly_eval(&t, 0.25);
        assert_eq!(v.sign, 1.0);
        assert!((v.log_magnitude - 0.75f64.ln()).abs() < 1e-15);
        let r = tridiag_real_roots(&t, &[0.9], (0.0, 2.0)).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15);

        // (1 - l)(2 - l) + eps^2 = 0
        let eps = 0.3;
        let t = Tridiag::a_plus(eps, 2).unwrap();
        let disc = (1.0 - 4.0 * eps * eps).sqrt();
        let want = [(3.0 - disc) / 2.0, (3.0 + disc) / 2.0];
        let got = tridiag_real_roots(&t, &[1.0, 2.0], (0.0, 3.0)).unwrap();
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-14, "{g} vs {w}");
        }
        let l = 0.7;
        let direct = (1.0 - l) * (2.0 - l) + eps * eps;
        let v = charpoly_eval(&t, l);
        assert!((v.sign * v.log_magnitude.exp() - direct).abs() < 1e-14);
        let deriv = -(2.0 - l) - (1.0 - l);
        assert!((v.log_derivative_ratio - deriv / direct).abs() < 1e-13);
    }

    #[test]
    fn large_truncation_stays_finite() {
        let t = Tridiag::a_plus(0.5, 5000).unwrap();
        let v = charpoly_eval(&t, 3.3);
        assert!(v.log_magnitude.is_finite() && v.log_derivative_ratio.is_finite());
        assert!(v.log_magnitude > 1000.0);
    }

    #[test]
    fn vanishing_eps_gives_integers() {
        let t = Tridiag::a_plus(1e-9, 12).unwrap();
        let seeds: Vec<f64> = (1..=12).map(|k| k as f64 + 0.3).collect();
        let r = tridiag_real_roots(&t, &seeds, (0.5, 12.5)).unwrap();
        for (k, x) in r.iter().enumerate() {
            assert!((x - (k + 1) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn sign_flip_similarity_preserves_roots() {
        let t = Tridiag::a_plus(0.1, 60).unwrap();
        let a = tridiag_roots_scan(&t, 5, (0.5, 20.0), 1.0 / 32.0).unwrap();
        let b = tridiag_roots_scan(&t.flipped(), 5, (0.5, 20.0), 1.0 / 32.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!((a[0] - 1.0).abs() < 0.05);
    }

    #[test]
    fn full_line_is_symmetric() {
        let t = Tridiag::full_line(0.1, 40).unwrap();
        let pos = tridiag_roots_scan(&t, 4, (0.5, 10.0), 1.0 / 32.0).unwrap();
        let zero = tridiag_real_roots(&t, &[0.1], (-0.4, 0.4)).unwrap();
        assert!(zero[0].abs() < 1e-8);
        let mut seeds: Vec<f64> = pos.iter().map(|p| -p + 0.01).collect();
        seeds.reverse();
        let mut neg = tridiag_real_roots(&t, &seeds, (-10.0, -0.5)).unwrap();
        neg.reverse();
        for (p, n) in pos.iter().zip(&neg) {
            assert!((p + n).abs() < 1e-8, "{p} vs {n}");
        }
    }

    #[test]
    fn seeds_outside_window_are_reported() {
        let t = Tridiag::a_plus(0.1, 20).unwrap();
        assert!(matches!(
            tridiag_real_roots(&t, &[50.0], (0.5, 10.0)),
            Err(Error::SeedLeftWindow { .. })
        ));
        // two seeds on the same root
        assert!(matches!(
            tridiag_real_roots(&t, &[1.0, 1.001], (0.5, 10.0)),
            Err(Error::BracketCountMismatch { .. })
        ));
    }

    #[test]
    fn stable_prefix_counts_leading_matches() {
        assert_eq!(stable_prefix(&[1.0, 2.0, 3.0], &[1.0, 2.0 + 1e-9, 3.1], 1e-6), 2);
        assert_eq!(stable_prefix(&[1.0], &[2.0], 1e-6), 0);
    }

    proptest! {
        #[test]
        fn jacobi_preserves_trace(seed in 0u64..1000, n in 1usize..12) {
            let m = lcg_matrix(n, seed);
            let d = jacobi_eigen(&m, 1e-14, false).unwrap();
            let sum: f64 = d.values.iter().sum();
            prop_assert!((sum - m.trace()).abs() < 1e-12);
            prop_assert!(d.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
