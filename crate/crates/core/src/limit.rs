//! Exact algebra of the limit operator
//! `L_0 f = -(s/2) f'' + s f'` on polynomials without constant term,
//! acting in `H = L^2((0, inf), 2 s^-1 e^-2s ds)`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::quadrature::{composite_gauss, PanelScheme};

/// Polynomial with exact rational coefficients, `coeffs[k]` multiplying `s^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    /// `s^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![BigRational::zero(); k + 1];
        c[k] = BigRational::one();
        Poly { coeffs: c }
    }

    /// From integer coefficients, lowest power first.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn has_constant_term(&self) -> bool {
        self.coeffs.first().is_some_and(|c| !c.is_zero())
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    /// Exact value at a rational point (Horner).
    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Floating-point value with compensated summation of the terms.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.to_f64().unwrap_or(f64::NAN) * x.powi(k as i32))
            .collect();
        neumaier_sum(&terms)
    }
}

impl fmt::Display for Poly {
    /// Descending powers, e.g. `s^3 - 3 s^2 + 3/2 s`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = k == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{mag}")?;
                if k > 0 {
                    write!(f, " ")?;
                }
            }
            match k {
                0 => {}
                1 => write!(f, "s")?,
                _ => write!(f, "s^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Kahan-Babuska-Neumaier summation.
pub fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Largest index served by the exact [`eigenpoly`].
pub const MAX_EXACT_INDEX: usize = 200;

/// Eigenpolynomial `f_n = sum_{r=1}^n a_{n,r} s^r` with `L_0 f_n = n f_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenPoly {
    pub n: usize,
    pub poly: Poly,
}

impl EigenPoly {
    /// `a_{n,r}` for `r = 1..=n`.
    pub fn a(&self, r: usize) -> BigRational {
        self.poly.coeff(r)
    }
}

/// `a_{n,n} = 1`, `a_{n,r} = -r(r+1) / (2(n-r)) a_{n,r+1}`.
pub fn eigenpoly(n: usize) -> Result<EigenPoly> {
    if n == 0 || n > MAX_EXACT_INDEX {
        return Err(Error::InvalidArgument(format!(
            "exact eigenpolynomial index must be in 1..={MAX_EXACT_INDEX}, got {n}"
        )));
    }
    let mut c = vec![BigRational::zero(); n + 1];
    c[n] = BigRational::one();
    for r in (1..n).rev() {
        let r_i = r as i64;
        let factor = BigRational::new(BigInt::from(-(r_i * (r_i + 1))), BigInt::from(2 * (n as i64 - r_i)));
        c[r] = &factor * &c[r + 1];
    }
    Ok(EigenPoly { n, poly: Poly::new(c) })
}

/// Floating-point coefficients `a_{n,1..=n}` for any `n` (index `r - 1`).
pub fn eigenpoly_float(n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n];
    if n == 0 {
        return c;
    }
    c[n - 1] = 1.0;
    for r in (1..n).rev() {
        let rf = r as f64;
        c[r - 1] = -rf * (rf + 1.0) / (2.0 * (n - r) as f64) * c[r];
    }
    c
}

/// Evaluates `f_n(s)` from floating-point coefficients.
pub fn eigenpoly_float_eval(coeffs: &[f64], s: f64) -> f64 {
    let terms: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * s.powi(k as i32 + 1))
        .collect();
    neumaier_sum(&terms)
}

/// `L_0 p = -(s/2) p'' + s p'`; maps `s^r` to `r s^r - r(r-1)/2 s^(r-1)`.
pub fn apply_l0(p: &Poly) -> Result<Poly> {
    if p.has_constant_term() {
        return Err(Error::ConstantTerm);
    }
    let n = p.coeffs.len();
    let mut out = vec![BigRational::zero(); n];
    for (r, c) in p.coeffs.iter().enumerate().skip(1) {
        if c.is_zero() {
            continue;
        }
        let r_i = r as i64;
        out[r] += c * rat(r_i);
        out[r - 1] -= c * BigRational::new(BigInt::from(r_i * (r_i - 1)), BigInt::from(2));
    }
    Ok(Poly::new(out))
}

/// Exact solution `g` in `sP` of `L_0 g = f`.
pub fn solve_l0(f: &Poly) -> Result<Poly> {
    if f.has_constant_term() {
        return Err(Error::ConstantTerm);
    }
    let Some(d) = f.degree() else {
        return Ok(Poly::zero());
    };
    let mut g = vec![BigRational::zero(); d + 1];
    for r in (1..=d).rev() {
        let r_i = r as i64;
        let upper = if r < d {
            &g[r + 1] * BigRational::new(BigInt::from(r_i * (r_i + 1)), BigInt::from(2))
        } else {
            BigRational::zero()
        };
        g[r] = (f.coeff(r) + upper) / rat(r_i);
    }
    Ok(Poly::new(g))
}

/// Inner product of `H` restricted to `sP`.
#[derive(Debug, Clone, Copy, Default)]
pub struct WeightedInnerProduct;

impl WeightedInnerProduct {
    /// `<s^a, s^b> = (a+b-1)! / 2^(a+b-1)` for `a, b >= 1`.
    pub fn moment(a: usize, b: usize) -> BigRational {
        let k = (a + b - 1) as u64;
        BigRational::new(factorial(k), BigInt::one() << k)
    }

    pub fn inner(p: &Poly, q: &Poly) -> Result<BigRational> {
        gram(p, q)
    }
}

/// Exact `int_0^inf p q 2 s^-1 e^-2s ds` for `p, q` in `sP`.
pub fn gram(p: &Poly, q: &Poly) -> Result<BigRational> {
    if p.has_constant_term() || q.has_constant_term() {
        return Err(Error::ConstantTerm);
    }
    // sum_k (sum_{a+b=k} p_a q_b) (k-1)! / 2^(k-1)
    let (dp, dq) = match (p.degree(), q.degree()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(BigRational::zero()),
    };
    let mut acc = BigRational::zero();
    for k in 2..=dp + dq {
        let mut conv = BigRational::zero();
        for a in 1..k {
            let b = k - a;
            if a > dp || b > dq {
                continue;
            }
            let (pa, qb) = (&p.coeffs[a], &q.coeffs[b]);
            if pa.is_zero() || qb.is_zero() {
                continue;
            }
            conv += pa * qb;
        }
        if !conv.is_zero() {
            acc += conv * WeightedInnerProduct::moment(k - 1, 1);
        }
    }
    Ok(acc)
}

/// `e_n(s) = f_n(s) / ||f_n||` at each point.
pub fn normalized_eigenfunction_values(n: usize, points: &[f64]) -> Result<Vec<f64>> {
    let f = eigenpoly(n)?;
    let norm_sq = gram(&f.poly, &f.poly)?;
    points
        .iter()
        .map(|&s| {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Domain {
                    what: "normalized_eigenfunction_values",
                    value: s,
                    domain: "(0, inf)".into(),
                });
            }
            let x = BigRational::from_float(s).expect("finite");
            let v = f.poly.eval_exact(&x);
            // square first so that the ratio stays in f64 range
            let ratio = (&v * &v / &norm_sq).to_f64().unwrap_or(f64::NAN);
            Ok(ratio.sqrt() * if v.is_negative() { -1.0 } else { 1.0 })
        })
        .collect()
}

/// `(R_0 f)(s) = int_0^inf G_0(s,t) f(t) w_0(t) dt` for `f` in `sP`.
///
/// The part `t < s` uses Gauss quadrature on `(1 - e^-2t) f(t) / t`; the
/// tail `t > s` is a closed-form upper incomplete gamma sum.
pub fn resolvent_zero_apply(f: &Poly, s: f64) -> Result<f64> {
    if f.has_constant_term() {
        return Err(Error::ConstantTerm);
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Domain {
            what: "resolvent_zero_apply",
            value: s,
            domain: "(0, inf)".into(),
        });
    }
    let Some(d) = f.degree() else {
        return Ok(0.0);
    };
    let coeffs: Vec<f64> = f.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let panels = (s.ceil() as usize).clamp(1, 64);
    let rule = composite_gauss(&PanelScheme::uniform(0.0, s, panels, (d / 2 + 12).min(64))?)?;
    let inner = rule.integrate(|t| {
        // f(t)/t, then times gamma_0 w_0 = (1 - e^-2t)/t * t
        let mut q = 0.0;
        for k in (1..=d).rev() {
            q = q * t + coeffs[k];
        }
        q * -(-2.0 * t).exp_m1()
    });
    // gamma_0(s) int_s^inf t^r 2 t^-1 e^-2t dt
    //   = (1 - e^-2s) (r-1)!/2^r sum_{k<r} (2s)^k / k!
    let x = 2.0 * s;
    let mut tail_terms = Vec::with_capacity(d);
    for (r, &c) in coeffs.iter().enumerate().skip(1) {
        if c == 0.0 {
            continue;
        }
        // (r-1)!/2^r sum_k x^k/k! = sum_k x^k (r-1)!/(k! 2^r)
        let mut term = 1.0;
        let mut partial = Vec::with_capacity(r);
        for k in 0..r {
            if k > 0 {
                term *= x / k as f64;
            }
            partial.push(term);
        }
        let fact_ratio: f64 = (1..r).map(|j| j as f64 / 2.0).product::<f64>() / 2.0;
        tail_terms.push(c * fact_ratio * neumaier_sum(&partial));
    }
    let tail = -(-x).exp_m1() * neumaier_sum(&tail_terms);
    Ok(inner + tail)
}

/// How much of `g(s) = s e^-s` the span of `e_1..e_N` captures in `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionCapture {
    pub n_max: usize,
    pub captured_fraction: f64,
    pub missing_fraction: f64,
}

/// Exact projection of `s e^-s` onto the first `n_max` eigenfunctions.
pub fn projection_capture(n_max: usize) -> Result<ProjectionCapture> {
    let g_norm_sq = BigRational::new(BigInt::one(), BigInt::from(8));
    // <s^r, s e^-s> = 2 r! / 3^(r+1)
    let g_moment = |r: usize| {
        BigRational::new(
            BigInt::from(2) * factorial(r as u64),
            num_traits::pow(BigInt::from(3), r + 1),
        )
    };
    let mut captured = BigRational::zero();
    for n in 1..=n_max {
        let f = eigenpoly(n)?;
        let mut proj = BigRational::zero();
        for r in 1..=n {
            proj += f.a(r) * g_moment(r);
        }
        captured += &proj * &proj / gram(&f.poly, &f.poly)?;
    }
    let frac = &captured / &g_norm_sq;
    let missing = BigRational::one() - &frac;
    Ok(ProjectionCapture {
        n_max,
        captured_fraction: frac.to_f64().unwrap_or(f64::NAN),
        missing_fraction: missing.to_f64().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{composite_gauss, PanelScheme};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn first_eigenpolynomials() {
        assert_eq!(eigenpoly(1).unwrap().poly, Poly::monomial(1));
        assert_eq!(eigenpoly(2).unwrap().poly, Poly::from_ints(&[0, -1, 1]));
        let f3 = eigenpoly(3).unwrap();
        assert_eq!(f3.a(3), rat(1));
        assert_eq!(f3.a(2), rat(-3));
        assert_eq!(f3.a(1), q(3, 2));
        assert_eq!(f3.poly.to_string(), "s^3 - 3 s^2 + 3/2 s");
        assert!(eigenpoly(0).is_err());
        assert!(eigenpoly(201).is_err());
    }

    #[test]
    fn display_forms() {
        assert_eq!(Poly::zero().to_string(), "0");
        assert_eq!(Poly::from_ints(&[0, -1, 1]).to_string(), "s^2 - s");
        assert_eq!(Poly::from_ints(&[-2, 0, -1]).to_string(), "-s^2 - 2");
    }

    #[test]
    fn l0_on_monomials() {
        assert_eq!(apply_l0(&Poly::monomial(1)).unwrap(), Poly::monomial(1));
        assert_eq!(apply_l0(&Poly::monomial(2)).unwrap(), Poly::from_ints(&[0, -1, 2]));
        assert_eq!(apply_l0(&Poly::from_ints(&[1, 1])), Err(Error::ConstantTerm));
    }

    #[test]
    fn exact_eigen_relation_up_to_fifty() {
        for n in 1..=50 {
            let f = eigenpoly(n).unwrap();
            assert_eq!(apply_l0(&f.poly).unwrap(), f.poly.scale(&rat(n as i64)), "n = {n}");
        }
    }

    #[test]
    fn gram_small_cases() {
        let f1 = eigenpoly(1).unwrap().poly;
        let f2 = eigenpoly(2).unwrap().poly;
        assert_eq!(gram(&f1, &f2).unwrap(), BigRational::zero());
        assert_eq!(gram(&f1, &f1).unwrap(), q(1, 2));
        assert_eq!(WeightedInnerProduct::moment(1, 1), q(1, 2));
        assert_eq!(WeightedInnerProduct::moment(2, 3), q(24, 16));
        assert_eq!(gram(&Poly::from_ints(&[1]), &f1), Err(Error::ConstantTerm));
    }

    #[test]
    fn moments_match_quadrature() {
        let rule = composite_gauss(&PanelScheme::uniform(0.0, 40.0, 40, 20).unwrap()).unwrap();
        for (a, b) in [(1, 1), (1, 2), (2, 3), (4, 4)] {
            let num = rule.integrate(|s| s.powi(a + b - 1) * 2.0 * (-2.0 * s).exp());
            let exact = WeightedInnerProduct::moment(a as usize, b as usize).to_f64().unwrap();
            assert!((num - exact).abs() < 1e-12 * exact.max(1.0), "{a},{b}");
        }
    }

    #[test]
    fn exact_orthogonality() {
        let polys: Vec<Poly> = (1..=30).map(|n| eigenpoly(n).unwrap().poly).collect();
        for m in 0..30 {
            for n in m + 1..30 {
                assert!(gram(&polys[m], &polys[n]).unwrap().is_zero(), "({}, {})", m + 1, n + 1);
            }
        }
    }

    #[test]
    fn normalized_values() {
        let pts = [0.1, 1.0, 2.5];
        let e1 = normalized_eigenfunction_values(1, &pts).unwrap();
        for (s, v) in pts.iter().zip(&e1) {
            assert!((v - 2f64.sqrt() * s).abs() < 1e-15);
        }
        // numerical norm of e_n in H
        let rule = composite_gauss(&PanelScheme::uniform(0.0, 60.0, 60, 24).unwrap()).unwrap();
        for n in [1usize, 3, 7, 12] {
            let vals = normalized_eigenfunction_values(n, &rule.nodes).unwrap();
            let norm: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .zip(&vals)
                .map(|((s, w), v)| w * v * v * 2.0 / s * (-2.0 * s).exp())
                .sum();
            assert!((norm - 1.0).abs() < 1e-12, "n={n}: {norm}");
        }
        assert!(normalized_eigenfunction_values(2, &[0.0]).is_err());
    }

    #[test]
    fn float_coefficients_match_exact() {
        for n in [1usize, 5, 30] {
            let exact = eigenpoly(n).unwrap();
            let fl = eigenpoly_float(n);
            for r in 1..=n {
                let e = exact.a(r).to_f64().unwrap();
                assert!((fl[r - 1] - e).abs() <= 1e-13 * e.abs());
            }
            // cancellation is bounded by the sum of term magnitudes
            let s = 1.7;
            let v = eigenpoly_float_eval(&fl, s);
            let x = exact
                .poly
                .eval_exact(&BigRational::from_float(s).unwrap())
                .to_f64()
                .unwrap();
            let scale: f64 = fl
                .iter()
                .enumerate()
                .map(|(k, c)| (c * s.powi(k as i32 + 1)).abs())
                .sum();
            assert!((v - x).abs() <= 1e-14 * scale, "n={n}: {v} vs {x}");
        }
    }

    #[test]
    fn resolvent_inverts_eigenpolynomials() {
        for n in 1..=5 {
            let f = eigenpoly(n).unwrap().poly;
            for s in [0.05, 0.5, 1.0, 2.0, 4.0, 7.5] {
                let r = resolvent_zero_apply(&f, s).unwrap();
                let want = f.eval_f64(s) / n as f64;
                assert!((r - want).abs() < 1e-8, "n={n} s={s}: {r} vs {want}");
            }
        }
    }

    #[test]
    fn resolvent_agrees_with_exact_inverse() {
        let f = Poly::from_ints(&[0, 3, -2, 0, 1]);
        let g = solve_l0(&f).unwrap();
        assert_eq!(apply_l0(&g).unwrap(), f);
        for s in [0.3, 1.0, 3.0] {
            let r = resolvent_zero_apply(&f, s).unwrap();
            assert!((r - g.eval_f64(s)).abs() < 1e-8);
            let r2 = resolvent_zero_apply(&f.scale(&rat(2)), s).unwrap();
            assert!((r2 - 2.0 * r).abs() < 1e-12 * r.abs().max(1.0));
        }
        // R_0(s) at s = 1 by direct quadrature of G_0(1, t) t w_0(t)
        let rule =
            composite_gauss(&PanelScheme::from_breakpoints(vec![0.0, 1.0, 5.0, 20.0, 45.0], 40).unwrap()).unwrap();
        let direct = rule.integrate(|t| {
            let g = 0.5 * (2.0 * t.min(1.0)).exp_m1();
            g * t * 2.0 / t * (-2.0 * t).exp()
        });
        let r = resolvent_zero_apply(&Poly::monomial(1), 1.0).unwrap();
        assert!((r - direct).abs() < 1e-12);
    }

    #[test]
    fn projection_is_nearly_complete() {
        let p = projection_capture(40).unwrap();
        assert!(p.captured_fraction >= 1.0 - 1e-6);
        assert!(p.missing_fraction >= 0.0 && p.missing_fraction < 1e-30);
        let p1 = projection_capture(1).unwrap();
        // <s, s e^-s>^2 / (1/2) / (1/8) = (2/9)^2 * 16
        assert!((p1.captured_fraction - 64.0 / 81.0).abs() < 1e-15);
    }
}
