//! The eigenvalue pipelines: Fourier-side truncation, Nystrom on the
//! inverse kernel, and the exact limit spectrum.
//!
//! # Nystrom scheme
//!
//! The kernel is discretized in `sigma = artanh(eps s)/eps` (`sigma = s`
//! in the limit), further mapped by `sigma = y^3` and sampled with the
//! midpoint rule on `y in (0, T^(1/3))`. The cubic map flattens the
//! `(st)^(-1/2)` edge at the origin. The kink of the kernel along the
//! diagonal would limit the midpoint rule to second order; it is repaired
//! with the zeta-function (Navot) endpoint terms `c1 = 2 zeta(-1) = -1/6`
//! and `c2 = zeta(-3) = 1/120`, which touch only the diagonal and the first
//! off-diagonal, so the matrix stays symmetric.

use serde::{Deserialize, Serialize};

use crate::eigen::{
    jacobi_eigen, stable_prefix, tridiag_real_roots, tridiag_roots_scan, Discretization, Route, Spectrum, SymMatrix,
    Tridiag,
};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::kernel::{Epsilon, Family};
use crate::quadrature::QuadratureRule;

/// Default domain cutoff in the `sigma` coordinate.
pub const DEFAULT_CUTOFF: f64 = 40.0;
/// Relative change that still counts as stable under refinement.
pub const RELIABILITY_TOL: f64 = 1e-6;
/// Jacobi off-diagonal tolerance used by the Nystrom route.
pub const JACOBI_TOL: f64 = 1e-12;

const ZETA_C1: f64 = -1.0 / 6.0;
const ZETA_C2: f64 = 1.0 / 120.0;
const MAP_POWER: i32 = 3;

/// A Nystrom matrix together with the rule that produced it.
#[derive(Debug, Clone)]
pub struct NystromDiscretization {
    pub family: Family,
    pub cutoff: f64,
    /// Nodes `s_i` with weights `h ds/dy`, on `(0, s(T))`.
    pub rule: QuadratureRule,
    pub sigma: Vec<f64>,
    pub matrix: SymMatrix,
}

impl NystromDiscretization {
    pub fn build(family: Family, nodes: usize, cutoff: f64, exec: Execution) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidArgument("Nystrom needs at least two nodes".into()));
        }
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::InvalidArgument(format!("cutoff must be positive, got {cutoff}")));
        }
        let p = MAP_POWER as f64;
        let h = cutoff.powf(1.0 / p) / nodes as f64;
        let y: Vec<f64> = (0..nodes).map(|i| (i as f64 + 0.5) * h).collect();
        let sigma: Vec<f64> = y.iter().map(|y| y.powi(MAP_POWER)).collect();
        let dsig: Vec<f64> = y.iter().map(|y| p * y.powi(MAP_POWER - 1)).collect();
        let s: Vec<f64> = sigma.iter().map(|&g| family.s_of_sigma(g)).collect();
        let ds: Vec<f64> = sigma
            .iter()
            .zip(&dsig)
            .map(|(&g, &d)| family.ds_dsigma(g) * d)
            .collect();
        let w: Vec<f64> = ds.iter().map(|d| h * d).collect();

        let rows = map_indexed(exec, nodes, |i| {
            let mut row = Vec::with_capacity(nodes - i);
            for j in i..nodes {
                row.push((w[i] * w[j]).sqrt() * family.kernel_sigma(sigma[i], s[i], sigma[j], s[j]));
            }
            // diagonal endpoint terms
            let hd = -dsig[i] * ds[i] / s[i];
            row[0] += (-ZETA_C1 + 2.0 * ZETA_C2) * h * h * hd;
            if i + 1 < nodes {
                let kink = family.kink_sigma(sigma[i], s[i], sigma[i + 1], s[i + 1]);
                row[1] += ZETA_C2 * h * 0.5 * kink * (ds[i] * ds[i + 1]).sqrt();
            }
            row
        });
        let mut matrix = SymMatrix::zeros(nodes)?;
        for (i, row) in rows.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                matrix.set_sym(i, i + k, v);
            }
        }
        let upper = *s.last().unwrap() + 0.5 * w.last().unwrap();
        Ok(NystromDiscretization {
            family,
            cutoff,
            rule: QuadratureRule {
                nodes: s,
                weights: w,
                interval: (0.0, upper),
            },
            sigma,
            matrix,
        })
    }

    pub fn nodes(&self) -> usize {
        self.matrix.dim()
    }

    /// Eigenvalues `mu_1 >= mu_2 >= ...` of the matrix.
    pub fn mu_descending(&self) -> Result<Vec<f64>> {
        let mut v = jacobi_eigen(&self.matrix, JACOBI_TOL, false)?.values;
        v.reverse();
        Ok(v)
    }

    /// Ascending eigenvalues of the discretized `I - N`.
    pub fn identity_minus_eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(jacobi_eigen(&self.matrix.identity_minus(), JACOBI_TOL, false)?.values)
    }
}

/// `lambda_n = 1 / mu_n` for the leading `n_wanted` eigenvalues.
fn lambdas_from_mu(mu: &[f64], n_wanted: usize) -> Result<Vec<f64>> {
    if mu.len() < n_wanted {
        return Err(Error::InvalidArgument(format!(
            "only {} Nystrom eigenvalues available, {n_wanted} requested",
            mu.len()
        )));
    }
    mu[..n_wanted]
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            if m > 0.0 {
                Ok(1.0 / m)
            } else {
                Err(Error::NonPositiveMu { index: k + 1, value: m })
            }
        })
        .collect()
}

/// Settings for [`route_nystrom`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NystromOptions {
    pub nodes: usize,
    /// Cutoff `T` in the `sigma` coordinate.
    pub cutoff: f64,
    /// Compare against a coarser grid to set `reliable_count`.
    pub check_refinement: bool,
    /// Tail tolerance; when set, the cutoff is raised to `1.5 T` and the
    /// leading eigenvalues must move by less than this (relative).
    pub tail_tol: Option<f64>,
    pub exec: Execution,
}

impl Default for NystromOptions {
    fn default() -> Self {
        NystromOptions {
            nodes: 400,
            cutoff: DEFAULT_CUTOFF,
            check_refinement: true,
            tail_tol: None,
            exec: Execution::Parallel,
        }
    }
}

/// Minimum node count accepted by [`route_nystrom`].
pub const MIN_NYSTROM_NODES: usize = 64;

/// Nystrom result: spectrum plus diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NystromSpectrum {
    pub spectrum: Spectrum,
    /// All Nystrom eigenvalues, descending.
    pub mu: Vec<f64>,
    pub tail_estimate: Option<f64>,
}

/// Route B. Reliability compares against `nodes / 2`.
pub fn route_nystrom(family: Family, n_wanted: usize, opts: &NystromOptions) -> Result<NystromSpectrum> {
    route_nystrom_detailed(family, n_wanted, opts).map(|(s, _)| s)
}

/// [`route_nystrom`], also handing back the fine discretization.
pub fn route_nystrom_detailed(
    family: Family,
    n_wanted: usize,
    opts: &NystromOptions,
) -> Result<(NystromSpectrum, NystromDiscretization)> {
    if opts.nodes < MIN_NYSTROM_NODES {
        return Err(Error::InvalidArgument(format!(
            "Nystrom route needs at least {MIN_NYSTROM_NODES} nodes, got {}",
            opts.nodes
        )));
    }
    if n_wanted == 0 || 2 * n_wanted > opts.nodes {
        return Err(Error::InvalidArgument(format!(
            "n_wanted = {n_wanted} incompatible with {} nodes",
            opts.nodes
        )));
    }
    let disc = NystromDiscretization::build(family, opts.nodes, opts.cutoff, opts.exec)?;
    let mu = disc.mu_descending()?;
    let lambda = lambdas_from_mu(&mu, n_wanted)?;

    let reliable_count = if opts.check_refinement {
        let coarse = NystromDiscretization::build(family, opts.nodes / 2, opts.cutoff, opts.exec)?;
        let coarse_mu = coarse.mu_descending()?;
        let coarse_lambda: Vec<f64> = coarse_mu[..n_wanted]
            .iter()
            .map(|&m| if m > 0.0 { 1.0 / m } else { f64::NAN })
            .collect();
        stable_prefix(&coarse_lambda, &lambda, RELIABILITY_TOL)
    } else {
        n_wanted
    };

    let tail_estimate = match opts.tail_tol {
        None => None,
        Some(tol) => {
            let est = tail_change(family, n_wanted, opts, &lambda)?;
            if est > tol {
                return Err(Error::TailControl {
                    estimate: est,
                    tolerance: tol,
                });
            }
            Some(est)
        }
    };

    let upper = disc.rule.interval.1;
    let out = NystromSpectrum {
        spectrum: Spectrum::new(
            lambda,
            Route::Nystrom,
            Discretization {
                truncation: None,
                nodes: Some(opts.nodes),
                cutoff: Some(upper),
            },
            reliable_count,
        )?,
        mu,
        tail_estimate,
    };
    Ok((out, disc))
}

/// Largest relative change of the leading eigenvalues when the cutoff is
/// raised from `T` to `1.5 T` at the same node spacing in `y`.
fn tail_change(family: Family, n_wanted: usize, opts: &NystromOptions, lambda: &[f64]) -> Result<f64> {
    let scale = 1.5f64.powf(1.0 / MAP_POWER as f64);
    let nodes = (opts.nodes as f64 * scale).round() as usize;
    let wide = NystromDiscretization::build(family, nodes, 1.5 * opts.cutoff, opts.exec)?;
    let wide_lambda = lambdas_from_mu(&wide.mu_descending()?, n_wanted)?;
    Ok(lambda
        .iter()
        .zip(&wide_lambda)
        .map(|(a, b)| ((a - b) / a).abs())
        .fold(0.0, f64::max))
}

/// Settings for [`route_fourier`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierOptions {
    /// Starting truncation size; doubled until the roots are stable.
    pub trunc: usize,
    pub max_trunc: usize,
    /// Root seeds (typically Nystrom eigenvalues); a scan is used otherwise.
    pub seeds: Option<Vec<f64>>,
}

impl Default for FourierOptions {
    fn default() -> Self {
        FourierOptions {
            trunc: 80,
            max_trunc: 65536,
            seeds: None,
        }
    }
}

/// Root window `(0.5, n + 0.5 + 3 eps N^2)`.
pub fn default_window(eps: Epsilon, n: usize, trunc: usize) -> (f64, f64) {
    let nn = trunc as f64;
    (0.5, n as f64 + 0.5 + 3.0 * eps.value() * nn * nn)
}

fn fourier_roots(eps: Epsilon, n_wanted: usize, trunc: usize, seeds: Option<&[f64]>) -> Result<Vec<f64>> {
    let t = Tridiag::a_plus(eps.value(), trunc)?;
    let window = default_window(eps, n_wanted, trunc);
    if let Some(seeds) = seeds {
        if let Ok(r) = tridiag_real_roots(&t, seeds, window) {
            return Ok(r);
        }
    }
    tridiag_roots_scan(&t, n_wanted, window, 1.0 / 32.0)
}

/// Route A: roots of the truncated tridiagonal matrix, doubling the
/// truncation until the leading `n_wanted` agree to [`RELIABILITY_TOL`]
/// between `N` and `2N`.
pub fn route_fourier(eps: Epsilon, n_wanted: usize, opts: &FourierOptions) -> Result<Spectrum> {
    if n_wanted == 0 {
        return Err(Error::InvalidArgument("n_wanted must be positive".into()));
    }
    if opts.trunc < 4 * n_wanted {
        return Err(Error::InvalidArgument(format!(
            "truncation {} must be at least 4 n_wanted = {}",
            opts.trunc,
            4 * n_wanted
        )));
    }
    let seeds = opts.seeds.as_deref();
    let mut n = opts.trunc;
    let mut coarse = fourier_roots(eps, n_wanted, n, seeds);
    let mut best: Option<(Vec<f64>, usize, usize)> = None;
    while 2 * n <= opts.max_trunc.max(opts.trunc * 2) {
        let fine = fourier_roots(eps, n_wanted, 2 * n, seeds);
        if let (Ok(c), Ok(f)) = (&coarse, &fine) {
            let reliable = stable_prefix(c, f, RELIABILITY_TOL);
            if best.as_ref().is_none_or(|b| reliable >= b.1) {
                best = Some((f.clone(), reliable, 2 * n));
            }
            if reliable >= n_wanted {
                break;
            }
        }
        coarse = fine;
        n *= 2;
        if 2 * n > opts.max_trunc {
            break;
        }
    }
    match best {
        Some((roots, reliable, trunc)) if reliable >= n_wanted => Spectrum::new(
            roots,
            Route::Fourier,
            Discretization {
                truncation: Some(trunc),
                nodes: None,
                cutoff: None,
            },
            reliable,
        ),
        Some((roots, reliable, _)) => Err(Error::ReliabilityShortfall {
            achieved: reliable,
            wanted: n_wanted,
            eigenvalues: roots,
        }),
        None => Err(coarse.err().unwrap_or(Error::ReliabilityShortfall {
            achieved: 0,
            wanted: n_wanted,
            eigenvalues: Vec::new(),
        })),
    }
}

/// Route C: the exact limit spectrum `{1, ..., n_wanted}`.
pub fn route_exact_limit(n_wanted: usize) -> Spectrum {
    Spectrum {
        eigenvalues: (1..=n_wanted).map(|k| k as f64).collect(),
        route: Route::ExactLimit,
        discretization: Discretization::default(),
        reliable_count: n_wanted,
    }
}

/// `mu_n = 1 - 1/lambda_n`; rejects eigenvalues below `1 - 1e-9`.
pub fn minmax_mu(spec: &Spectrum) -> Result<Vec<f64>> {
    spec.eigenvalues
        .iter()
        .map(|&l| {
            if l < 1.0 - 1e-9 || !l.is_finite() {
                Err(Error::BelowSpectralBound { value: l })
            } else {
                Ok((1.0 - 1.0 / l).max(0.0))
            }
        })
        .collect()
}

/// One index of a route comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRecord {
    pub n: usize,
    pub lambda_fourier: f64,
    pub lambda_nystrom: f64,
    pub abs_gap: f64,
    /// Present only when both routes flag the index reliable.
    pub rel_gap: Option<f64>,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteComparison {
    pub eps: Epsilon,
    pub records: Vec<RouteRecord>,
    pub agreement_count: usize,
    pub fourier: Spectrum,
    pub nystrom: Spectrum,
}

/// Relative gap below which two routes are said to agree.
pub const AGREEMENT_TOL: f64 = 1e-4;

/// Runs Nystrom, seeds the Fourier route with its eigenvalues and pairs
/// the two in sorted order.
pub fn compare_routes(
    eps: Epsilon,
    n_wanted: usize,
    nystrom: &NystromOptions,
    fourier: &FourierOptions,
) -> Result<RouteComparison> {
    let ny = route_nystrom(Family::Eps(eps), n_wanted, nystrom)?.spectrum;
    let mut fopts = fourier.clone();
    if fopts.seeds.is_none() {
        fopts.seeds = Some(ny.eigenvalues.clone());
    }
    let fo = route_fourier(eps, n_wanted, &fopts)?;
    if fo.eigenvalues.len() != ny.eigenvalues.len() {
        return Err(Error::BracketCountMismatch {
            requested: ny.eigenvalues.len(),
            found: fo.eigenvalues.len(),
        });
    }
    let records: Vec<RouteRecord> = (0..n_wanted)
        .map(|k| {
            let (f, y) = (fo.eigenvalues[k], ny.eigenvalues[k]);
            let both = k < fo.reliable_count && k < ny.reliable_count;
            let rel = both.then(|| ((f - y) / f).abs());
            RouteRecord {
                n: k + 1,
                lambda_fourier: f,
                lambda_nystrom: y,
                abs_gap: (f - y).abs(),
                rel_gap: rel,
                agree: rel.is_some_and(|r| r < AGREEMENT_TOL),
            }
        })
        .collect();
    let agreement_count = records.iter().filter(|r| r.agree).count();
    Ok(RouteComparison {
        eps,
        records,
        agreement_count,
        fourier: fo,
        nystrom: ny,
    })
}

/// Fit of `lambda_n / n^2` over a range of indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub eps: Epsilon,
    pub indices: Vec<usize>,
    pub ratios: Vec<f64>,
    /// Mean of the ratios.
    pub constant: f64,
    /// `max |ratio / constant - 1|`.
    pub max_rel_deviation: f64,
    /// `constant / eps`, an estimate of `pi^2 / beta^2`.
    pub pi2_over_beta2: f64,
}

impl QuadraticFit {
    pub fn within(&self, rel: f64) -> bool {
        self.max_rel_deviation <= rel
    }
}

/// Ratios `lambda_n / n^2` for `n` in `lo..=hi`, from a spectrum holding
/// at least `hi` eigenvalues.
pub fn quadratic_regime(eps: Epsilon, spec: &Spectrum, lo: usize, hi: usize) -> Result<QuadraticFit> {
    if lo == 0 || hi < lo || spec.eigenvalues.len() < hi {
        return Err(Error::InvalidArgument(format!(
            "index range {lo}..={hi} not covered by {} eigenvalues",
            spec.eigenvalues.len()
        )));
    }
    let indices: Vec<usize> = (lo..=hi).collect();
    let ratios: Vec<f64> = indices
        .iter()
        .map(|&n| spec.eigenvalues[n - 1] / (n * n) as f64)
        .collect();
    let constant = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max_rel_deviation = ratios.iter().map(|r| (r / constant - 1.0).abs()).fold(0.0, f64::max);
    Ok(QuadraticFit {
        eps,
        indices,
        ratios,
        constant,
        max_rel_deviation,
        pi2_over_beta2: constant / eps.value(),
    })
}
