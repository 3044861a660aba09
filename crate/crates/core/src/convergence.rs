//! Hilbert-Schmidt norms and distances, the kernel-difference audits, and
//! the eigenvalue-convergence sweep.
//!
//! Double integrals over `t >= s` are taken in the rotated variables
//! `u = min(s, t)`, `v = |t - s|`: the integrands decay like `e^{-2v}` but
//! only algebraically in `u`, so `u` gets geometric panels out to `2^30`
//! and `v` gets panels graded toward 0 on the scale of `u`.

use serde::{Deserialize, Serialize};

use crate::eigen::Route;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, map_slice, pairwise_sum, Execution};
use crate::kernel::{stripped_eps_raw, stripped_zero_raw, Epsilon, Family};
use crate::quadrature::{gauss_legendre, QuadratureRule};
use crate::routes::{minmax_mu, route_fourier, route_nystrom_detailed, FourierOptions, NystromOptions};

/// Largest `u` integrated numerically; the rest is the analytic tail.
const U_MAX: f64 = 1073741824.0; // 2^30
/// `v` beyond this contributes below `e^-80`.
const V_MAX: f64 = 40.0;
const HALF_LN2: f64 = 0.5 * std::f64::consts::LN_2;

/// Gauss points per panel for the first pass; the check pass doubles it.
const BASE_POINTS: usize = 12;

fn geometric_up(from: f64, to: f64, out: &mut Vec<f64>) {
    let mut x = from;
    while x < to {
        out.push(x);
        x *= 2.0;
    }
}

/// Breakpoints on `(a, b)` halving toward both ends `levels` times.
fn graded_both(a: f64, b: f64, levels: u32, out: &mut Vec<f64>) {
    let len = b - a;
    for k in 1..=levels {
        let d = len * 0.5f64.powi(k as i32);
        out.push(a + d);
        out.push(b - d);
    }
}

fn finish_breaks(mut v: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    v.push(lo);
    v.push(hi);
    v.retain(|x| *x >= lo && *x <= hi && x.is_finite());
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
    v
}

/// `u` breakpoints: geometric from `1e-12`, graded toward `1/eps` from
/// both sides when a cut is given, then doubling out to [`U_MAX`].
fn u_breaks(cuts: &[f64]) -> Vec<f64> {
    let mut b = Vec::new();
    geometric_up(1e-12, U_MAX, &mut b);
    b.extend_from_slice(cuts);
    let mut sorted: Vec<f64> = cuts.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut prev = 0.0;
    for &c in &sorted {
        graded_both(prev, c, 40, &mut b);
        prev = c;
    }
    finish_breaks(b, 0.0, U_MAX)
}

/// `v` breakpoints for a given `u`, with an optional jump at `v = end`.
fn v_breaks(u: f64, end: Option<f64>) -> Vec<f64> {
    let mut b = Vec::new();
    geometric_up((u / 8.0).clamp(1e-14, 0.125), V_MAX, &mut b);
    b.extend((1..=8).map(|k| k as f64 * 5.0));
    if let Some(e) = end.filter(|e| *e > 0.0 && *e < V_MAX) {
        b.push(e);
        let last_below = b.iter().copied().filter(|x| *x < e).fold(0.0, f64::max);
        graded_both(last_below, e, 30, &mut b);
        let first_above = b.iter().copied().filter(|x| *x > e).fold(V_MAX, f64::min);
        graded_both(e, first_above, 8, &mut b);
    }
    finish_breaks(b, 0.0, V_MAX)
}

fn composite(breaks: &[f64], base: &QuadratureRule) -> QuadratureRule {
    let mut nodes = Vec::with_capacity(base.len() * breaks.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for w in breaks.windows(2) {
        let m = base.mapped(w[0], w[1]);
        nodes.extend(m.nodes);
        weights.extend(m.weights);
    }
    QuadratureRule {
        nodes,
        weights,
        interval: (breaks[0], *breaks.last().unwrap()),
    }
}

/// `int_0^U du int_0^V dv f(u, v)` on the rotated grid.
fn rotated_integral<F>(
    f: &F,
    u_cuts: &[f64],
    v_end: &(dyn Fn(f64) -> Option<f64> + Sync),
    points: usize,
    exec: Execution,
) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let base = gauss_legendre(points)?;
    let ur = composite(&u_breaks(u_cuts), &base);
    let rows = map_indexed(exec, ur.len(), |i| {
        let u = ur.nodes[i];
        let vr = composite(&v_breaks(u, v_end(u)), &base);
        ur.weights[i] * vr.integrate(|v| f(u, v))
    });
    Ok(pairwise_sum(&rows))
}

/// Value of a refined integral with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinedValue {
    pub value: f64,
    /// Change from the coarse to the fine pass.
    pub refinement_delta: f64,
    pub tail_estimate: f64,
}

/// Runs the rotated integral at two densities; full integral over the
/// quadrant is twice the `t >= s` part.
fn refined<F>(
    f: F,
    u_cuts: &[f64],
    v_end: &(dyn Fn(f64) -> Option<f64> + Sync),
    tail: f64,
    exec: Execution,
) -> Result<RefinedValue>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let coarse = 2.0 * rotated_integral(&f, u_cuts, v_end, BASE_POINTS, exec)?;
    let fine = 2.0 * rotated_integral(&f, u_cuts, v_end, 2 * BASE_POINTS, exec)?;
    Ok(RefinedValue {
        value: fine + tail,
        refinement_delta: (fine - coarse).abs(),
        tail_estimate: tail,
    })
}

/// `K_0(u, u + v)^2`.
#[inline]
fn k0_sq(u: f64, v: f64) -> f64 {
    let k = stripped_zero_raw(u, u + v);
    k * k / (u * (u + v))
}

/// Squared HS norm `int int K_0^2` of the limit inverse.
///
/// Beyond `u = 2^30` the integrand is `1/(2u^2)` to leading order, so
/// the doubled tail is `1/U`, added to the value.
pub fn hs_norm_limit(exec: Execution) -> Result<RefinedValue> {
    refined(k0_sq, &[], &|_| None, 1.0 / U_MAX, exec)
}

/// Squared HS norm of the `eps` inverse (kernel on `(0, 1/eps)^2`).
pub fn hs_norm_eps(eps: Epsilon, exec: Execution) -> Result<RefinedValue> {
    let e = eps.value();
    let end = 1.0 / e;
    let f = move |u: f64, v: f64| {
        let t = u + v;
        if u >= end || t >= end {
            return 0.0;
        }
        let k = stripped_eps_raw(e, u, t);
        k * k / (u * t)
    };
    refined(f, &[end], &move |u| (u < end).then_some(end - u), 0.0, exec)
}

/// Upper-bound chain for `int int G_0^2 w_0 w_0` via `(1 - e^-2s)^2 / s^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedHsBound {
    /// Direct value from `G_0` and `w_0` on `u <= 150`, plus the tail bound.
    pub direct: f64,
    pub tail_bound: f64,
    /// `int_0^inf (1 - e^-2s)^2 s^-2 ds`, the intermediate step.
    pub intermediate: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `G_0^2 w_0 w_0` evaluated from its factors (so `e^{2u}` stays finite
/// only up to `u ~ 350`; the direct pass stops at 150).
pub fn weighted_hs_bound(exec: Execution) -> Result<WeightedHsBound> {
    const CUT: f64 = 150.0;
    let f = |u: f64, v: f64| {
        let s = u;
        let t = u + v;
        if s > CUT {
            return 0.0;
        }
        let g = 0.5 * (2.0 * s).exp_m1();
        let ws = 2.0 / s * (-2.0 * s).exp();
        let wt = 2.0 / t * (-2.0 * t).exp();
        g * g * ws * wt
    };
    let direct = 2.0 * rotated_integral(&f, &[CUT], &|_| None, 2 * BASE_POINTS, exec)?;
    // integrand <= 1/(2u^2) per side beyond the cut
    let tail_bound = 1.0 / CUT;
    let base = gauss_legendre(2 * BASE_POINTS)?;
    let mut b = Vec::new();
    geometric_up(1e-12, U_MAX, &mut b);
    let rule = composite(&finish_breaks(b, 0.0, U_MAX), &base);
    let intermediate = rule.integrate(|s| {
        let a = -(-2.0 * s).exp_m1();
        a * a / (s * s)
    }) + 1.0 / U_MAX;
    let bound = 5.0;
    Ok(WeightedHsBound {
        direct: direct + tail_bound,
        tail_bound,
        intermediate,
        bound,
        holds: direct + tail_bound <= intermediate && intermediate <= bound,
    })
}

/// Worst signed margin of one dominating-function inequality over the
/// sampled nodes; `<= 0` means the inequality held everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominatingAudit {
    pub samples: usize,
    pub worst_margin: f64,
    pub holds: bool,
}

/// Slack allowed in the dominating-function audits.
pub const AUDIT_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsReport {
    pub eps: Epsilon,
    /// `||N_eps - M_0^-1||_HS`.
    pub hs_distance: f64,
    /// Its square, the double integral itself.
    pub hs_distance_sq: f64,
    /// Numerical cutoff in `u`.
    pub truncation_t: f64,
    pub tail_estimate: f64,
    pub refinement_delta: f64,
    pub tolerance_met: bool,
    /// `s >= log(2)/2` region.
    pub audit_outer: DominatingAudit,
    /// `s < log(2)/2` region.
    pub audit_inner: DominatingAudit,
}

/// `||N_eps - M_0^-1||_HS` with the region audits run on the `(u, v)`
/// quadrature nodes.
pub fn hs_distance(eps: Epsilon, tol: f64, exec: Execution) -> Result<HsReport> {
    if !(tol >= 1e-5) {
        return Err(Error::InvalidArgument(format!(
            "HS tolerance must be at least 1e-5, got {tol}"
        )));
    }
    let e = eps.value();
    let end = 1.0 / e;
    let diff_sq = move |u: f64, v: f64| {
        let t = u + v;
        let k0 = stripped_zero_raw(u, t);
        let ke = if t < end { stripped_eps_raw(e, u, t) } else { 0.0 };
        let d = ke - k0;
        d * d / (u * t)
    };
    let cuts = [HALF_LN2, end];
    let v_end = move |u: f64| (u < end).then_some(end - u);
    let r = refined(diff_sq, &cuts, &v_end, 1.0 / U_MAX, exec)?;
    let (audit_outer, audit_inner) = dominating_audits(e, &cuts, &v_end, exec)?;
    let estimate = r.tail_estimate + r.refinement_delta;
    let tolerance_met = estimate < tol * r.value.max(1e-300) || estimate < tol * 1e-3;
    if !tolerance_met {
        return Err(Error::TailControl {
            estimate,
            tolerance: tol,
        });
    }
    Ok(HsReport {
        eps,
        hs_distance: r.value.sqrt(),
        hs_distance_sq: r.value,
        truncation_t: U_MAX,
        tail_estimate: r.tail_estimate,
        refinement_delta: r.refinement_delta,
        tolerance_met,
        audit_outer,
        audit_inner,
    })
}

fn dominating_audits(
    e: f64,
    cuts: &[f64],
    v_end: &(dyn Fn(f64) -> Option<f64> + Sync),
    exec: Execution,
) -> Result<(DominatingAudit, DominatingAudit)> {
    let base = gauss_legendre(BASE_POINTS)?;
    let ur = composite(&u_breaks(cuts), &base);
    let end = 1.0 / e;
    // skip far tails where both sides underflow to 0
    let idx: Vec<usize> = (0..ur.len()).filter(|&i| ur.nodes[i] < 400.0).collect();
    let per_row = map_slice(exec, &idx, |&i| {
        let s = ur.nodes[i];
        let vr = composite(&v_breaks(s, v_end(s)), &base);
        let mut worst = f64::NEG_INFINITY;
        for &v in &vr.nodes {
            let t = s + v;
            let k0 = stripped_zero_raw(s, t);
            let ke = if t < end { stripped_eps_raw(e, s, t) } else { 0.0 };
            let lhs = (ke - k0) * (ke - k0);
            let g = (2.0 * s).exp_m1();
            let main = (-2.0 * s).exp() * g * g * (-2.0 * t).exp();
            let rhs = if s >= HALF_LN2 {
                main
            } else {
                let r = (1.0 + s) / (1.0 - s) - 1.0;
                main.max((-2.0 * s).exp() * r * r * (-2.0 * t).exp())
            };
            worst = worst.max(lhs - rhs);
        }
        (s >= HALF_LN2, worst, vr.len())
    });
    let mut outer = DominatingAudit {
        samples: 0,
        worst_margin: f64::NEG_INFINITY,
        holds: true,
    };
    let mut inner = outer;
    for (is_outer, worst, n) in per_row {
        let a = if is_outer { &mut outer } else { &mut inner };
        a.samples += n;
        a.worst_margin = a.worst_margin.max(worst);
    }
    for a in [&mut outer, &mut inner] {
        a.holds = a.worst_margin <= AUDIT_SLACK;
    }
    Ok((outer, inner))
}

/// `max (stripped K_eps - stripped K_0 - e^{-s-t})` over the grid, signed.
pub fn pointwise_bound_audit(eps: Epsilon, grid: &[(f64, f64)]) -> Result<f64> {
    let e = eps.value();
    let mut worst = f64::NEG_INFINITY;
    for &(s, t) in grid {
        if !(s >= 0.0 && s <= t && e * t < 1.0) {
            return Err(Error::Domain {
                what: "pointwise_bound_audit",
                value: if s < 0.0 || s > t { s } else { t },
                domain: format!("0 <= s <= t < {}", 1.0 / e),
            });
        }
        let d = stripped_eps_raw(e, s, t) - stripped_zero_raw(s, t);
        worst = worst.max(d - (-s - t).exp());
    }
    Ok(worst)
}

/// Pairs `s <= t` from `n` log-spaced points in `[1e-6, 0.999/eps]`,
/// plus the corner `(0, 0)`.
pub fn log_grid_pairs(eps: Epsilon, n: usize) -> Vec<(f64, f64)> {
    let (a, b) = (1e-6f64.ln(), (0.999 / eps.value()).ln());
    let pts: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n.max(2) - 1) as f64).exp())
        .collect();
    let mut out = vec![(0.0, 0.0)];
    for (i, &s) in pts.iter().enumerate() {
        for &t in &pts[i..] {
            out.push((s, t));
        }
    }
    out
}

/// Which route the sweep uses for `lambda_{eps,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepRoute {
    Nystrom,
    Fourier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub nystrom: NystromOptions,
    pub fourier: FourierOptions,
    pub hs_tol: f64,
    /// Slack in the perturbation-coherence check.
    pub coherence_slack: f64,
    pub exec: Execution,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            nystrom: NystromOptions::default(),
            fourier: FourierOptions::default(),
            hs_tol: 1e-4,
            coherence_slack: 1e-6,
            exec: Execution::Parallel,
        }
    }
}

/// One `(eps, n)` cell of the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub eps: f64,
    pub n: usize,
    pub lambda: Option<f64>,
    pub route: Route,
    pub reliable: bool,
    /// `|lambda - n|`.
    pub gap: Option<f64>,
    /// `1 - 1/lambda`.
    pub mu: Option<f64>,
    /// Eigenvalue of the discretized `I - N_eps`.
    pub mu_direct: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub n: usize,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub epsilons: Vec<f64>,
    pub n_max: usize,
    pub table: Vec<SweepCell>,
    pub hs_curve: Vec<HsReport>,
    /// Least-squares slope of `log gap` against `log eps`, per `n`.
    pub fitted_rates: Vec<Option<f64>>,
    /// Log-log slope of the HS distance.
    pub hs_rate: Option<f64>,
    pub extrapolations: Vec<Extrapolation>,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn cell(&self, eps: f64, n: usize) -> Option<&SweepCell> {
        self.table.iter().find(|c| c.eps == eps && c.n == n)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }
}

/// Tolerance of the `mu` cross-check.
pub const MU_TOL: f64 = 1e-8;
/// Allowed distance of the extrapolated eigenvalue from `n`.
pub const EXTRAPOLATION_TOL: f64 = 1e-2;

/// Neville evaluation at `x = 0` of the interpolant through `(xs, ys)`.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i]);
        }
    }
    p[0]
}

fn log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

fn validate_epsilons(epsilons: &[f64]) -> Result<Vec<Epsilon>> {
    if epsilons.is_empty() {
        return Err(Error::InvalidArgument("epsilon list is empty".into()));
    }
    let eps: Vec<Epsilon> = epsilons.iter().map(|&e| Epsilon::new(e)).collect::<Result<_>>()?;
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(
            "epsilon list must be strictly decreasing".into(),
        ));
    }
    Ok(eps)
}

struct EpsCells {
    cells: Vec<SweepCell>,
    hs: Result<HsReport>,
}

fn sweep_one(eps: Epsilon, n_max: usize, route: SweepRoute, opts: &SweepOptions) -> EpsCells {
    let hs = hs_distance(eps, opts.hs_tol, opts.exec);
    let fail = |msg: String, route: Route| -> Vec<SweepCell> {
        (1..=n_max)
            .map(|n| SweepCell {
                eps: eps.value(),
                n,
                lambda: None,
                route,
                reliable: false,
                gap: None,
                mu: None,
                mu_direct: None,
                error: Some(msg.clone()),
            })
            .collect()
    };
    let (ny, disc) = match route_nystrom_detailed(Family::Eps(eps), n_max, &opts.nystrom) {
        Ok(v) => v,
        Err(e) => {
            let r = if route == SweepRoute::Fourier {
                Route::Fourier
            } else {
                Route::Nystrom
            };
            return EpsCells {
                cells: fail(e.to_string(), r),
                hs,
            };
        }
    };
    let spectrum = match route {
        SweepRoute::Nystrom => ny.spectrum,
        SweepRoute::Fourier => {
            let mut f = opts.fourier.clone();
            f.seeds = Some(ny.spectrum.eigenvalues.clone());
            match route_fourier(eps, n_max, &f) {
                Ok(s) => s,
                Err(e) => {
                    return EpsCells {
                        cells: fail(e.to_string(), Route::Fourier),
                        hs,
                    }
                }
            }
        }
    };
    let mu = minmax_mu(&spectrum);
    let mu_direct = disc.identity_minus_eigenvalues();
    let cells = (1..=n_max)
        .map(|n| {
            let l = spectrum.eigenvalues[n - 1];
            let mut err = None;
            let mu_n = match &mu {
                Ok(m) => Some(m[n - 1]),
                Err(e) => {
                    err = Some(e.to_string());
                    None
                }
            };
            let mu_d = match &mu_direct {
                Ok(m) => Some(m[n - 1]),
                Err(e) => {
                    err = Some(e.to_string());
                    None
                }
            };
            SweepCell {
                eps: eps.value(),
                n,
                lambda: Some(l),
                route: spectrum.route,
                reliable: n <= spectrum.reliable_count,
                gap: Some((l - n as f64).abs()),
                mu: mu_n,
                mu_direct: mu_d,
                error: err,
            }
        })
        .collect();
    EpsCells { cells, hs }
}

/// Eigenvalue-convergence sweep over a decreasing list of `eps`.
///
/// Cells run concurrently per `eps`; a failed cell is recorded and the
/// sweep continues.
pub fn convergence_sweep(
    epsilons: &[f64],
    n_max: usize,
    route: SweepRoute,
    opts: &SweepOptions,
) -> Result<ConvergenceReport> {
    let eps = validate_epsilons(epsilons)?;
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be positive".into()));
    }
    // the outer fan-out is per eps; inner loops stay sequential to avoid
    // oversubscription
    let mut inner = opts.clone();
    inner.nystrom.exec = Execution::Sequential;
    inner.exec = Execution::Sequential;
    let results = map_slice(opts.exec, &eps, |&e| sweep_one(e, n_max, route, &inner));

    let mut table = Vec::new();
    let mut hs_curve = Vec::new();
    let mut notes = Vec::new();
    for (e, r) in eps.iter().zip(results) {
        table.extend(r.cells);
        match r.hs {
            Ok(h) => hs_curve.push(h),
            Err(err) => notes.push(format!("hs_distance failed at eps = {}: {err}", e.value())),
        }
    }

    let gaps_for = |n: usize| -> Vec<Option<f64>> {
        epsilons
            .iter()
            .map(|&e| table.iter().find(|c| c.eps == e && c.n == n).and_then(|c| c.gap))
            .collect()
    };

    let mut assertions = Vec::new();

    // strict decrease of |lambda - n| as eps decreases
    let mut bad = Vec::new();
    for n in 1..=n_max {
        let g = gaps_for(n);
        if g.iter().any(|x| x.is_none()) || g.windows(2).any(|w| !(w[1].unwrap() < w[0].unwrap())) {
            bad.push(n);
        }
    }
    assertions.push(Assertion {
        name: "gap_strictly_decreasing".into(),
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("|lambda - n| decreases along eps for n = 1..{n_max}")
        } else {
            format!("not strictly decreasing for n in {bad:?}")
        },
    });

    // mu identity
    let mut worst_mu: f64 = 0.0;
    let mut mu_ok = true;
    for c in &table {
        match (c.mu, c.mu_direct) {
            (Some(a), Some(b)) => worst_mu = worst_mu.max((a - b).abs()),
            _ => mu_ok = false,
        }
    }
    assertions.push(Assertion {
        name: "mu_identity".into(),
        passed: mu_ok && worst_mu < MU_TOL,
        detail: format!("max |(1 - 1/lambda) - mu_direct| = {worst_mu:.3e}"),
    });

    // every requested cell reliable
    let unreliable: Vec<(f64, usize)> = table.iter().filter(|c| !c.reliable).map(|c| (c.eps, c.n)).collect();
    assertions.push(Assertion {
        name: "cells_reliable".into(),
        passed: unreliable.is_empty(),
        detail: if unreliable.is_empty() {
            "all cells stable under refinement".into()
        } else {
            format!("unreliable cells {unreliable:?}")
        },
    });

    // extrapolation to eps = 0 in the variable eps^2: flipping the sign of
    // eps is a diagonal similarity of the tridiagonal operator, so each
    // eigenvalue is even in eps
    let mut extrapolations = Vec::new();
    if epsilons.len() >= 2 {
        let eps_sq: Vec<f64> = epsilons.iter().map(|e| e * e).collect();
        let mut worst: f64 = 0.0;
        let mut complete = true;
        for n in 1..=n_max {
            let ls: Vec<Option<f64>> = epsilons
                .iter()
                .map(|&e| table.iter().find(|c| c.eps == e && c.n == n).and_then(|c| c.lambda))
                .collect();
            if ls.iter().any(|l| l.is_none()) {
                complete = false;
                continue;
            }
            let ys: Vec<f64> = ls.into_iter().map(Option::unwrap).collect();
            let value = extrapolate_to_zero(&eps_sq, &ys);
            let error = (value - n as f64).abs();
            worst = worst.max(error);
            extrapolations.push(Extrapolation { n, value, error });
        }
        assertions.push(Assertion {
            name: "extrapolation".into(),
            passed: complete && worst <= EXTRAPOLATION_TOL,
            detail: format!("max |extrapolated lambda - n| = {worst:.3e}"),
        });
    } else {
        notes.push("single eps: extrapolation skipped".into());
    }

    // HS distance strictly decreasing, audits
    let hs_dec = hs_curve.len() == eps.len() && hs_curve.windows(2).all(|w| w[1].hs_distance < w[0].hs_distance);
    assertions.push(Assertion {
        name: "hs_distance_decreasing".into(),
        passed: hs_dec,
        detail: format!(
            "hs distances {:?}",
            hs_curve.iter().map(|h| h.hs_distance).collect::<Vec<_>>()
        ),
    });
    let audits_ok = hs_curve.len() == eps.len() && hs_curve.iter().all(|h| h.audit_outer.holds && h.audit_inner.holds);
    assertions.push(Assertion {
        name: "dominating_audits".into(),
        passed: audits_ok,
        detail: format!(
            "worst margins {:?}",
            hs_curve
                .iter()
                .map(|h| h.audit_outer.worst_margin.max(h.audit_inner.worst_margin))
                .collect::<Vec<_>>()
        ),
    });

    // |lambda - n| <= lambda n ||N_eps - M_0^-1||_HS + slack
    let mut coherent = true;
    for c in table.iter().filter(|c| c.reliable) {
        let Some(h) = hs_curve.iter().find(|h| h.eps.value() == c.eps) else {
            coherent = false;
            continue;
        };
        let (l, g) = (c.lambda.unwrap(), c.gap.unwrap());
        if g > l * c.n as f64 * h.hs_distance + opts.coherence_slack {
            coherent = false;
        }
    }
    assertions.push(Assertion {
        name: "perturbation_coherence".into(),
        passed: coherent,
        detail: "|lambda - n| <= lambda n ||N_eps - M_0^-1||_HS".into(),
    });

    let fitted_rates = (1..=n_max)
        .map(|n| {
            let g = gaps_for(n);
            let ys: Vec<f64> = g.iter().map(|x| x.unwrap_or(f64::NAN)).collect();
            log_slope(epsilons, &ys)
        })
        .collect();
    let hs_rate = if hs_curve.len() == eps.len() {
        log_slope(epsilons, &hs_curve.iter().map(|h| h.hs_distance).collect::<Vec<_>>())
    } else {
        None
    };

    Ok(ConvergenceReport {
        epsilons: epsilons.to_vec(),
        n_max,
        table,
        hs_curve,
        fitted_rates,
        hs_rate,
        extrapolations,
        assertions,
        notes,
    })
}
