//! Weights, coefficients, Green functions and integral kernels of the
//! operator family, for `0 < eps < 1` and for the `eps -> 0` limit.
//!
//! Every power of the form `x^(1/eps)` is evaluated through the log ratio
//!
//! ```text
//! ln_z(s) = (ln(1 - eps s) - ln(1 + eps s)) / eps,   z = exp(ln_z)
//! ```
//!
//! using `ln_1p`/`exp_m1`, so nothing overflows for small `eps` and the
//! `s -> 0` behaviour keeps full relative accuracy.
//!
//! Internally the kernels are also written in the coordinate
//! `sigma = -ln_z / 2 = artanh(eps s) / eps` (for the limit, `sigma = s`).
//! In that coordinate both families share the same shape
//!
//! ```text
//! K(s, t) = (s t)^(-1/2) * exp(-|sigma(t) - sigma(s)|) * (1 - exp(-2 sigma(min)))
//! ```
//!
//! which is what the Nystrom discretization works with.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The small parameter, validated to lie in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value < 1.0 {
            Ok(Epsilon(value))
        } else {
            Err(Error::InvalidEpsilon(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Right end `1/eps` of the natural domain.
    #[inline]
    pub fn domain_end(self) -> f64 {
        1.0 / self.0
    }
}

impl TryFrom<f64> for Epsilon {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Epsilon::new(v)
    }
}

impl From<Epsilon> for f64 {
    fn from(e: Epsilon) -> f64 {
        e.0
    }
}

/// A point `(s, t)` of the open quadrant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub s: f64,
    pub t: f64,
}

impl KernelPoint {
    pub fn new(s: f64, t: f64) -> Result<Self> {
        for v in [s, t] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain {
                    what: "kernel point",
                    value: v,
                    domain: "[0, inf)".into(),
                });
            }
        }
        Ok(KernelPoint { s, t })
    }

    #[inline]
    pub fn ordered(self) -> (f64, f64) {
        if self.s <= self.t {
            (self.s, self.t)
        } else {
            (self.t, self.s)
        }
    }
}

/// `ln_z(s) <= 0`, the logarithm of `((1 - eps s)/(1 + eps s))^(1/eps)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogRatio(f64);

impl LogRatio {
    /// Requires `0 <= s < 1/eps`.
    pub fn new(eps: Epsilon, s: f64) -> Result<Self> {
        check_closed_open(eps, s, "log ratio")?;
        Ok(LogRatio(ln_z_unchecked(eps.value(), s)))
    }

    #[inline]
    pub fn ln_z(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn z(self) -> f64 {
        self.0.exp()
    }
}

#[inline]
fn ln_z_unchecked(eps: f64, s: f64) -> f64 {
    let x = eps * s;
    ((-x).ln_1p() - x.ln_1p()) / eps
}

fn check_open(eps: Epsilon, s: f64, what: &'static str) -> Result<()> {
    if s.is_finite() && s > 0.0 && eps.value() * s < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: s,
            domain: format!("(0, {})", eps.domain_end()),
        })
    }
}

fn check_closed_open(eps: Epsilon, s: f64, what: &'static str) -> Result<()> {
    if s.is_finite() && s >= 0.0 && eps.value() * s < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: s,
            domain: format!("[0, {})", eps.domain_end()),
        })
    }
}

fn check_positive(s: f64, what: &'static str) -> Result<()> {
    if s.is_finite() && s > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: s,
            domain: "(0, inf)".into(),
        })
    }
}

/// Weight `2 s^-1 (1 - eps s)^(1/eps) (1 + eps s)^(-1/eps)`.
pub fn weight_eps(eps: Epsilon, s: f64) -> Result<f64> {
    check_open(eps, s, "weight_eps")?;
    Ok(2.0 / s * ln_z_unchecked(eps.value(), s).exp())
}

/// Coefficient `(1 - eps s)^(1 + 1/eps) (1 + eps s)^(1 - 1/eps)`.
pub fn coefficient_eps(eps: Epsilon, s: f64) -> Result<f64> {
    check_closed_open(eps, s, "coefficient_eps")?;
    let x = eps.value() * s;
    // (1 - x^2) * z
    Ok((1.0 - x * x) * ln_z_unchecked(eps.value(), s).exp())
}

/// `gamma_eps(s) = (exp(-ln_z) - 1) / 2`, the integral of the reciprocal
/// coefficient from 0 to `s`.
pub fn gamma_eps(eps: Epsilon, s: f64) -> Result<f64> {
    check_closed_open(eps, s, "gamma_eps")?;
    let neg = -ln_z_unchecked(eps.value(), s);
    if neg > f64::MAX.ln() {
        return Err(Error::Overflow {
            what: "gamma_eps",
            at: s,
            exponent: neg,
        });
    }
    Ok(0.5 * neg.exp_m1())
}

/// Symmetric kernel of the inverse operator on `L^2((0, 1/eps), ds)`.
pub fn kernel_eps(eps: Epsilon, s: f64, t: f64) -> Result<f64> {
    check_open(eps, s, "kernel_eps")?;
    check_open(eps, t, "kernel_eps")?;
    let (a, b) = if s <= t { (s, t) } else { (t, s) };
    let la = ln_z_unchecked(eps.value(), a);
    let lb = ln_z_unchecked(eps.value(), b);
    Ok((s * t).sqrt().recip() * (0.5 * (lb - la)).exp() * (-la.exp_m1()))
}

/// Kernel extended by zero outside `(0, 1/eps]^2`.
pub fn kernel_eps_extended(eps: Epsilon, s: f64, t: f64) -> Result<f64> {
    check_positive(s, "kernel_eps_extended")?;
    check_positive(t, "kernel_eps_extended")?;
    if eps.value() * s >= 1.0 || eps.value() * t >= 1.0 {
        return Ok(0.0);
    }
    kernel_eps(eps, s, t)
}

/// Limit weight `2 s^-1 e^(-2s)`.
pub fn weight_zero(s: f64) -> Result<f64> {
    check_positive(s, "weight_zero")?;
    Ok(2.0 / s * (-2.0 * s).exp())
}

/// Limit coefficient `e^(-2s)`.
pub fn coefficient_zero(s: f64) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::Domain {
            what: "coefficient_zero",
            value: s,
            domain: "[0, inf)".into(),
        });
    }
    Ok((-2.0 * s).exp())
}

/// `gamma_0(s) = (e^(2s) - 1) / 2`.
pub fn gamma_zero(s: f64) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::Domain {
            what: "gamma_zero",
            value: s,
            domain: "[0, inf)".into(),
        });
    }
    if 2.0 * s > f64::MAX.ln() {
        return Err(Error::Overflow {
            what: "gamma_zero",
            at: s,
            exponent: 2.0 * s,
        });
    }
    Ok(0.5 * (2.0 * s).exp_m1())
}

/// Limit kernel `(st)^(-1/2) e^(-s) (e^(2s) - 1) e^(-t)` for `s <= t`.
pub fn kernel_zero(s: f64, t: f64) -> Result<f64> {
    check_positive(s, "kernel_zero")?;
    check_positive(t, "kernel_zero")?;
    let (a, b) = if s <= t { (s, t) } else { (t, s) };
    Ok((-(-2.0 * a).exp_m1()) * (a - b).exp() / (s * t).sqrt())
}

/// Green function `G_eps(s, t) = gamma_eps(min(s, t))`.
pub fn greens_eps(eps: Epsilon, s: f64, t: f64) -> Result<f64> {
    check_open(eps, s, "greens_eps")?;
    check_open(eps, t, "greens_eps")?;
    gamma_eps(eps, s.min(t))
}

/// Green function `G_0(s, t) = gamma_0(min(s, t))`.
pub fn greens_zero(s: f64, t: f64) -> Result<f64> {
    check_positive(s, "greens_zero")?;
    check_positive(t, "greens_zero")?;
    gamma_zero(s.min(t))
}

/// `(st)^(1/2) K_eps(s, t)`, defined on `0 <= s, t < 1/eps`.
pub fn stripped_kernel_eps(eps: Epsilon, s: f64, t: f64) -> Result<f64> {
    check_closed_open(eps, s, "stripped_kernel_eps")?;
    check_closed_open(eps, t, "stripped_kernel_eps")?;
    let (a, b) = if s <= t { (s, t) } else { (t, s) };
    let la = ln_z_unchecked(eps.value(), a);
    let lb = ln_z_unchecked(eps.value(), b);
    Ok((0.5 * (lb - la)).exp() * (-la.exp_m1()))
}

/// `(st)^(1/2) K_0(s, t)`, defined on `s, t >= 0`.
pub fn stripped_kernel_zero(s: f64, t: f64) -> Result<f64> {
    for v in [s, t] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Domain {
                what: "stripped_kernel_zero",
                value: v,
                domain: "[0, inf)".into(),
            });
        }
    }
    let (a, b) = if s <= t { (s, t) } else { (t, s) };
    Ok((-(-2.0 * a).exp_m1()) * (a - b).exp())
}

/// Unchecked `(st)^(1/2) K_eps` for `0 <= a <= b < 1/eps`; hot loops only.
#[inline]
pub(crate) fn stripped_eps_raw(eps: f64, a: f64, b: f64) -> f64 {
    let la = ln_z_unchecked(eps, a);
    let lb = ln_z_unchecked(eps, b);
    (0.5 * (lb - la)).exp() * (-la.exp_m1())
}

/// Unchecked `(st)^(1/2) K_0` for `0 <= a <= b`.
#[inline]
pub(crate) fn stripped_zero_raw(a: f64, b: f64) -> f64 {
    (-(-2.0 * a).exp_m1()) * (a - b).exp()
}

/// Which member of the family a kernel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "eps")]
pub enum Family {
    Eps(Epsilon),
    Limit,
}

impl Family {
    pub fn eps(self) -> Option<Epsilon> {
        match self {
            Family::Eps(e) => Some(e),
            Family::Limit => None,
        }
    }

    /// `s` as a function of `sigma`; maps `[0, inf)` onto `[0, 1/eps)`.
    #[inline]
    pub fn s_of_sigma(self, sigma: f64) -> f64 {
        match self {
            Family::Limit => sigma,
            Family::Eps(e) => (e.value() * sigma).tanh() / e.value(),
        }
    }

    /// `ds / dsigma = 1 - eps^2 s^2`, evaluated without forming `s`.
    #[inline]
    pub fn ds_dsigma(self, sigma: f64) -> f64 {
        match self {
            Family::Limit => 1.0,
            Family::Eps(e) => {
                let c = (e.value() * sigma).cosh();
                1.0 / (c * c)
            }
        }
    }

    #[inline]
    pub fn sigma_of_s(self, s: f64) -> f64 {
        match self {
            Family::Limit => s,
            Family::Eps(e) => -0.5 * ln_z_unchecked(e.value(), s),
        }
    }

    /// Kernel evaluated from the pair `(sigma, s)` of each argument.
    #[inline]
    pub fn kernel_sigma(self, sig_i: f64, s_i: f64, sig_j: f64, s_j: f64) -> f64 {
        let m = sig_i.min(sig_j);
        (-(sig_i - sig_j).abs()).exp() * (-(-2.0 * m).exp_m1()) / (s_i * s_j).sqrt()
    }

    /// `|u(t)v(s) - u(s)v(t)|` for the factorization `K = u(min) v(max)`;
    /// the size of the diagonal kink between two nearby points.
    #[inline]
    pub fn kink_sigma(self, sig_i: f64, s_i: f64, sig_j: f64, s_j: f64) -> f64 {
        2.0 * (sig_i - sig_j).abs().sinh() / (s_i * s_j).sqrt()
    }

    /// Kernel in the ordinary `s, t` coordinates.
    pub fn kernel(self, s: f64, t: f64) -> Result<f64> {
        match self {
            Family::Limit => kernel_zero(s, t),
            Family::Eps(e) => kernel_eps(e, s, t),
        }
    }

    /// Extended kernel (zero beyond the domain end for `eps > 0`).
    pub fn kernel_extended(self, s: f64, t: f64) -> Result<f64> {
        match self {
            Family::Limit => kernel_zero(s, t),
            Family::Eps(e) => kernel_eps_extended(e, s, t),
        }
    }

    pub fn weight(self, s: f64) -> Result<f64> {
        match self {
            Family::Limit => weight_zero(s),
            Family::Eps(e) => weight_eps(e, s),
        }
    }

    pub fn gamma(self, s: f64) -> Result<f64> {
        match self {
            Family::Limit => gamma_zero(s),
            Family::Eps(e) => gamma_eps(e, s),
        }
    }

    pub fn greens(self, s: f64, t: f64) -> Result<f64> {
        match self {
            Family::Limit => greens_zero(s, t),
            Family::Eps(e) => greens_eps(e, s, t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(v: f64) -> Epsilon {
        Epsilon::new(v).unwrap()
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let (a, b) = (lo.ln(), hi.ln());
        (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    /// Adaptive Simpson with a relative tolerance; independent quadrature oracle.
    fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec<F: Fn(f64) -> f64>(
            f: &F,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                left + right + delta / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol * whole.abs(), 40)
    }

    #[test]
    fn epsilon_validation() {
        assert!(Epsilon::new(0.5).is_ok());
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN, f64::INFINITY] {
            assert!(Epsilon::new(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn log_ratio_limits() {
        let e = eps(1e-4);
        let l = LogRatio::new(e, 1.5).unwrap();
        assert!((l.ln_z() + 3.0).abs() < 1e-7);
        let e = eps(0.5);
        assert!(LogRatio::new(e, 1.999_999).unwrap().ln_z() < -25.0);
        assert!(LogRatio::new(e, 2.0).is_err());
        assert_eq!(LogRatio::new(e, 0.0).unwrap().ln_z(), 0.0);
    }

    #[test]
    fn weight_eps_values() {
        // 40-digit mpmath value of the closed form: 2/9
        let w = weight_eps(eps(0.5), 1.0).unwrap();
        assert!((w - 2.0 / 9.0).abs() < 1e-15);
        // 2/s blow-up at the origin
        let e = eps(0.3);
        let s = 1e-9;
        assert!((weight_eps(e, s).unwrap() * s / 2.0 - 1.0).abs() < 1e-8);
        // eps -> 0 limit
        let s = 1.3;
        let w0 = weight_zero(s).unwrap();
        assert!((weight_eps(eps(1e-6), s).unwrap() / w0 - 1.0).abs() < 1e-5);
        assert!(weight_eps(e, 0.0).is_err());
        assert!(weight_eps(e, 1.0 / 0.3).is_err());
    }

    #[test]
    fn gamma_eps_values() {
        assert_eq!(gamma_eps(eps(0.3), 0.0).unwrap(), 0.0);
        assert!((gamma_eps(eps(0.5), 1.0).unwrap() - 4.0).abs() < 1e-13);
        // small-s accuracy: gamma ~ s
        let g = gamma_eps(eps(0.2), 1e-12).unwrap();
        assert!((g / 1e-12 - 1.0).abs() < 1e-10);
        let s = 0.8;
        let g0 = gamma_zero(s).unwrap();
        assert!((gamma_eps(eps(1e-6), s).unwrap() / g0 - 1.0).abs() < 1e-5);
        assert!((g0 - 0.5 * (1.6f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn gamma_eps_overflow_is_reported() {
        let e = eps(0.01);
        let s = 100.0 * (1.0 - 1e-300f64.max(f64::EPSILON));
        match gamma_eps(e, s) {
            Err(Error::Overflow { .. }) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn gamma_eps_matches_adaptive_integral() {
        for ev in [0.1, 0.5, 0.9] {
            let e = eps(ev);
            for s in [0.1, 1.0, 0.9 / ev] {
                if ev * s >= 1.0 {
                    continue;
                }
                let f = |u: f64| 1.0 / coefficient_eps(e, u).unwrap();
                let reference = adaptive_simpson(&f, 0.0, s, 1e-11);
                let g = gamma_eps(e, s).unwrap();
                assert!(
                    (g - reference).abs() <= 1e-8 * reference,
                    "eps={ev} s={s}: {g} vs {reference}"
                );
            }
        }
    }

    #[test]
    fn kernel_zero_values() {
        // 40-digit mpmath: 2^{-1/2} e^{-1} (e^2 - 1) e^{-2}
        let k = kernel_zero(1.0, 2.0).unwrap();
        assert!((k - 0.224_925_273_853_129_6).abs() < 1e-15);
        assert_eq!(kernel_zero(1.0, 2.0).unwrap(), kernel_zero(2.0, 1.0).unwrap());
        // diagonal: s^-1 (1 - e^-2s), -> 2 at 0 and ~ 1/s at infinity
        assert!((kernel_zero(1e-10, 1e-10).unwrap() - 2.0).abs() < 1e-9);
        let s = 50.0;
        assert!((kernel_zero(s, s).unwrap() * s - 1.0).abs() < 1e-15);
        let s = 0.7;
        let d = kernel_zero(s, s).unwrap();
        assert!((d - (1.0 - (-2.0 * s).exp()) / s).abs() < 1e-15);
        assert!(kernel_zero(0.0, 1.0).is_err());
    }

    #[test]
    fn kernel_eps_values() {
        // 40-digit mpmath evaluation of the unsimplified closed form
        let k = kernel_eps(eps(0.3), 0.7, 1.9).unwrap();
        assert!((k - 0.154_624_045_115_077_9).abs() < 1e-15);
        assert_eq!(k, kernel_eps(eps(0.3), 1.9, 0.7).unwrap());
        // diagonal tends to eps at the right end
        let e = eps(0.25);
        let s = 4.0 * (1.0 - 1e-12);
        assert!((kernel_eps(e, s, s).unwrap() - 0.25).abs() < 1e-10);
        assert!(kernel_eps(e, 4.0, 1.0).is_err());
        assert!(kernel_eps(e, 0.0, 1.0).is_err());
    }

    #[test]
    fn extended_kernel() {
        let e = eps(0.2);
        assert_eq!(kernel_eps_extended(e, 10.0, 1.0).unwrap(), 0.0);
        assert_eq!(kernel_eps_extended(e, 1.0, 7.0).unwrap(), 0.0);
        assert_eq!(
            kernel_eps_extended(e, 1.0, 2.0).unwrap(),
            kernel_eps(e, 1.0, 2.0).unwrap()
        );
        assert!(kernel_eps_extended(e, -1.0, 2.0).is_err());
    }

    #[test]
    fn greens_functions() {
        assert!((greens_zero(1.0, 2.0).unwrap() - 3.194_528_049_465_325).abs() < 1e-14);
        assert_eq!(greens_zero(1.0, 2.0).unwrap(), greens_zero(2.0, 1.0).unwrap());
        let e = eps(0.4);
        assert!(greens_eps(e, 1e-14, 2.0).unwrap() < 1e-13);
        assert_eq!(greens_eps(e, 0.3, 2.0).unwrap(), greens_eps(e, 2.0, 0.3).unwrap());
    }

    #[test]
    fn factorization_consistency() {
        for ev in [0.5, 0.1, 0.02] {
            let e = eps(ev);
            let grid = log_grid(1e-6, 0.99 / ev, 40);
            for &s in &grid {
                for &t in &grid {
                    let k = kernel_eps(e, s, t).unwrap();
                    let f = weight_eps(e, s).unwrap().sqrt()
                        * greens_eps(e, s, t).unwrap()
                        * weight_eps(e, t).unwrap().sqrt();
                    assert!((k - f).abs() <= 1e-10 * k, "eps={ev} s={s} t={t}: {k} vs {f}");
                }
            }
        }
        let grid = log_grid(1e-6, 100.0, 40);
        for &s in &grid {
            for &t in &grid {
                let k = kernel_zero(s, t).unwrap();
                let f = weight_zero(s).unwrap().sqrt() * greens_zero(s, t).unwrap() * weight_zero(t).unwrap().sqrt();
                assert!((k - f).abs() <= 1e-10 * k, "s={s} t={t}");
            }
        }
    }

    #[test]
    fn stripped_difference_bound() {
        for ev in [0.9, 0.5, 0.3, 0.05] {
            let e = eps(ev);
            let mut grid = log_grid(1e-6, 0.999_999 / ev, 60);
            grid.insert(0, 0.0);
            for (i, &s) in grid.iter().enumerate() {
                for &t in &grid[i..] {
                    let d = stripped_kernel_eps(e, s, t).unwrap() - stripped_kernel_zero(s, t).unwrap();
                    assert!(d <= (-s - t).exp() + 1e-12, "eps={ev} s={s} t={t}: {d}");
                }
            }
        }
    }

    #[test]
    fn pointwise_convergence_is_monotone() {
        for (s, t) in [(0.3, 0.3), (0.5, 2.0), (1.0, 4.0), (2.5, 3.0)] {
            let k0 = kernel_zero(s, t).unwrap();
            let diffs: Vec<f64> = [0.2, 0.1, 0.05]
                .iter()
                .map(|&ev| (kernel_eps(eps(ev), s, t).unwrap() - k0).abs())
                .collect();
            assert!(diffs[0] > diffs[1] && diffs[1] > diffs[2], "{s},{t}: {diffs:?}");
        }
        let k = kernel_eps(eps(1e-7), 1.0, 2.0).unwrap();
        assert!((k / kernel_zero(1.0, 2.0).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sigma_coordinates_agree_with_direct_forms() {
        for fam in [Family::Limit, Family::Eps(eps(0.3)), Family::Eps(eps(0.9))] {
            for (sa, sb) in [(0.1, 0.2), (0.5, 3.0), (2.0, 2.0), (7.0, 1.0)] {
                let (si, sj) = (fam.s_of_sigma(sa), fam.s_of_sigma(sb));
                let via_sigma = fam.kernel_sigma(sa, si, sb, sj);
                let direct = fam.kernel(si, sj).unwrap();
                assert!((via_sigma - direct).abs() <= 1e-12 * direct, "{fam:?} {sa} {sb}");
                assert!((fam.sigma_of_s(si) - sa).abs() < 1e-12 * sa.max(1.0));
            }
            // ds/dsigma against a central difference
            let h = 1e-6;
            let d = (fam.s_of_sigma(1.0 + h) - fam.s_of_sigma(1.0 - h)) / (2.0 * h);
            assert!((d - fam.ds_dsigma(1.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn kink_matches_kernel_derivative_jump() {
        // the one-sided t-derivatives of K at t = s differ by w/p
        for fam in [Family::Limit, Family::Eps(eps(0.4))] {
            let s = 0.9;
            let h = 1e-5;
            let k = |t: f64| fam.kernel(s, t).unwrap();
            let right = (k(s + h) - k(s)) / h;
            let left = (k(s) - k(s - h)) / h;
            let jump = left - right;
            let sig = fam.sigma_of_s(s);
            let sig2 = fam.sigma_of_s(s + h);
            let kink = fam.kink_sigma(sig, s, sig2, s + h) / h;
            assert!((jump - kink).abs() < 1e-3 * kink, "{fam:?}: {jump} vs {kink}");
        }
    }
}
