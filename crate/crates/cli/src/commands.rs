//! One function per subcommand, each returning a [`Rendered`] result.

use filmspec::convergence::{
    convergence_sweep, hs_distance, hs_norm_eps, hs_norm_limit, log_grid_pairs, pointwise_bound_audit,
    weighted_hs_bound, ConvergenceReport, SweepOptions, SweepRoute, AUDIT_SLACK,
};
use filmspec::eigen::Spectrum;
use filmspec::limit::{apply_l0, eigenpoly, gram};
use filmspec::routes::{
    compare_routes, minmax_mu, route_exact_limit, route_fourier, route_nystrom, FourierOptions, NystromOptions,
};
use filmspec::{Epsilon, Error, Execution, Family};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::json;

use crate::args::{
    AuditArgs, ConvergeArgs, Discretization, EigenpolyArgs, HsnormArgs, RouteArg, SpectrumArgs, SweepRouteArg,
};
use crate::error::{CliError, Status};
use crate::output::{num, opt_num, Rendered, Table};

const PI2_OVER_6: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
/// Threshold of the pointwise kernel-difference audit.
const POINTWISE_SLACK: f64 = 1e-12;

pub const SPECTRUM_COLUMNS: [&str; 8] = ["n", "lambda", "mu", "route", "reliable", "gap_to_n", "rel_gap", "agree"];
pub const CONVERGE_COLUMNS: [&str; 10] = [
    "eps",
    "n",
    "lambda",
    "route",
    "reliable",
    "gap",
    "mu",
    "mu_direct",
    "mu_diff",
    "error",
];
pub const HSNORM_COLUMNS: [&str; 8] = [
    "quantity",
    "eps",
    "value",
    "reference",
    "deviation",
    "tail_estimate",
    "refinement_delta",
    "passed",
];
pub const AUDIT_COLUMNS: [&str; 6] = ["check", "eps", "samples", "worst_margin", "threshold", "passed"];
pub const EIGENPOLY_COLUMNS: [&str; 4] = ["r", "coefficient", "coefficient_f64", "gram_with_f_r"];
pub const SELFTEST_COLUMNS: [&str; 3] = ["check", "passed", "detail"];

fn nystrom_opts(d: &Discretization, exec: Execution) -> NystromOptions {
    NystromOptions {
        nodes: d.nodes,
        cutoff: d.cutoff,
        exec,
        ..Default::default()
    }
}

fn fourier_opts(d: &Discretization) -> FourierOptions {
    FourierOptions {
        trunc: d.trunc,
        max_trunc: d.max_trunc,
        seeds: None,
    }
}

fn spectrum_rows(spec: &Spectrum, n_max: usize) -> Result<Vec<Vec<String>>, CliError> {
    let mu = minmax_mu(spec)?;
    Ok((0..n_max.min(spec.eigenvalues.len()))
        .map(|k| {
            let l = spec.eigenvalues[k];
            vec![
                (k + 1).to_string(),
                num(l),
                num(mu[k]),
                spec.route.as_str().to_string(),
                (k < spec.reliable_count).to_string(),
                num(l - (k + 1) as f64),
                String::new(),
                String::new(),
            ]
        })
        .collect())
}

pub fn spectrum(a: &SpectrumArgs, exec: Execution) -> Result<Rendered, CliError> {
    let family = match a.eps {
        Some(e) => Family::Eps(Epsilon::new(e)?),
        None => Family::Limit,
    };
    let label = a.eps.map_or("limit".to_string(), |e| format!("eps = {e}"));
    let (rows, result, reliable) = match a.route {
        RouteArg::Exact => {
            let s = route_exact_limit(a.n_max);
            (spectrum_rows(&s, a.n_max)?, json!(s), true)
        }
        RouteArg::Nystrom => {
            let s = route_nystrom(family, a.n_max, &nystrom_opts(&a.disc, exec))?.spectrum;
            let ok = s.reliable_count >= a.n_max;
            (spectrum_rows(&s, a.n_max)?, json!(s), ok)
        }
        RouteArg::Fourier => {
            let eps = family.eps().expect("validated: fourier needs eps");
            match route_fourier(eps, a.n_max, &fourier_opts(&a.disc)) {
                Ok(s) => (spectrum_rows(&s, a.n_max)?, json!(s), true),
                // keep the partial table, flagged unreliable
                Err(Error::ReliabilityShortfall {
                    achieved, eigenvalues, ..
                }) => {
                    let s = Spectrum {
                        eigenvalues,
                        route: filmspec::eigen::Route::Fourier,
                        discretization: Default::default(),
                        reliable_count: achieved,
                    };
                    (spectrum_rows(&s, a.n_max)?, json!(s), false)
                }
                Err(e) => return Err(e.into()),
            }
        }
        RouteArg::Both => {
            let eps = family.eps().expect("validated: both needs eps");
            let c = compare_routes(eps, a.n_max, &nystrom_opts(&a.disc, exec), &fourier_opts(&a.disc))?;
            let mu = minmax_mu(&c.fourier)?;
            let rows = c
                .records
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        num(r.lambda_fourier),
                        num(mu[r.n - 1]),
                        "both".to_string(),
                        r.rel_gap.is_some().to_string(),
                        num(r.lambda_fourier - r.n as f64),
                        opt_num(r.rel_gap),
                        r.agree.to_string(),
                    ]
                })
                .collect();
            let ok = c.records.iter().all(|r| r.rel_gap.is_some());
            let agree = c.agreement_count == a.n_max;
            let status = if !ok {
                Status::Shortfall
            } else if !agree {
                Status::Failure
            } else {
                Status::Success
            };
            return Ok(Rendered {
                table: Table {
                    header: SPECTRUM_COLUMNS.to_vec(),
                    rows,
                },
                summary: vec![format!(
                    "spectrum {label}, routes fourier and nystrom: {} of {} agree",
                    c.agreement_count, a.n_max
                )],
                result: json!(c),
                status,
            });
        }
    };
    Ok(Rendered {
        table: Table {
            header: SPECTRUM_COLUMNS.to_vec(),
            rows,
        },
        summary: vec![format!("spectrum {label}, route {:?}", a.route).to_lowercase()],
        result,
        status: if reliable { Status::Success } else { Status::Shortfall },
    })
}

fn converge_status(r: &ConvergenceReport) -> Status {
    let failed: Vec<&str> = r
        .assertions
        .iter()
        .filter(|a| !a.passed)
        .map(|a| a.name.as_str())
        .collect();
    match failed.as_slice() {
        [] => Status::Success,
        ["cells_reliable"] => Status::Shortfall,
        _ => Status::Failure,
    }
}

pub fn converge(a: &ConvergeArgs, exec: Execution) -> Result<Rendered, CliError> {
    let opts = SweepOptions {
        nystrom: nystrom_opts(&a.disc, exec),
        fourier: fourier_opts(&a.disc),
        hs_tol: a.hs_tol,
        exec,
        ..Default::default()
    };
    let route = match a.route {
        SweepRouteArg::Nystrom => SweepRoute::Nystrom,
        SweepRouteArg::Fourier => SweepRoute::Fourier,
    };
    let r = convergence_sweep(&a.eps_list, a.n_max, route, &opts)?;
    let rows = r
        .table
        .iter()
        .map(|c| {
            vec![
                num(c.eps),
                c.n.to_string(),
                opt_num(c.lambda),
                c.route.as_str().to_string(),
                c.reliable.to_string(),
                opt_num(c.gap),
                opt_num(c.mu),
                opt_num(c.mu_direct),
                opt_num(c.mu.zip(c.mu_direct).map(|(x, y)| x - y)),
                c.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let mut summary = vec![format!(
        "convergence sweep over eps = {:?}, n <= {}",
        a.eps_list, a.n_max
    )];
    for s in &r.assertions {
        summary.push(format!(
            "{} {}: {}",
            if s.passed { "PASS" } else { "FAIL" },
            s.name,
            s.detail
        ));
    }
    for h in &r.hs_curve {
        summary.push(format!(
            "hs distance at eps {}: {}",
            num(h.eps.value()),
            num(h.hs_distance)
        ));
    }
    if let Some(rate) = r.hs_rate {
        summary.push(format!("fitted hs distance rate: {rate:.4}"));
    }
    for (k, rate) in r.fitted_rates.iter().enumerate() {
        if let Some(rate) = rate {
            summary.push(format!("fitted gap rate n = {}: {rate:.4}", k + 1));
        }
    }
    for e in &r.extrapolations {
        summary.push(format!(
            "extrapolated lambda_{} = {} (error {})",
            e.n,
            num(e.value),
            num(e.error)
        ));
    }
    summary.extend(r.notes.iter().map(|n| format!("note: {n}")));
    Ok(Rendered {
        table: Table {
            header: CONVERGE_COLUMNS.to_vec(),
            rows,
        },
        summary,
        status: converge_status(&r),
        result: json!(r),
    })
}

fn hs_row(
    quantity: &str,
    eps: Option<f64>,
    value: f64,
    reference: Option<f64>,
    tail: Option<f64>,
    delta: Option<f64>,
    passed: bool,
) -> Vec<String> {
    vec![
        quantity.to_string(),
        opt_num(eps),
        num(value),
        opt_num(reference),
        opt_num(reference.map(|r| value - r)),
        opt_num(tail),
        opt_num(delta),
        passed.to_string(),
    ]
}

pub fn hsnorm(a: &HsnormArgs, exec: Execution) -> Result<Rendered, CliError> {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut result = serde_json::Map::new();
    if a.limit {
        let h = hs_norm_limit(exec)?;
        let ok = (h.value - PI2_OVER_6).abs() < a.tol && h.refinement_delta < 1e-5;
        rows.push(hs_row(
            "hs_norm_sq_limit",
            None,
            h.value,
            Some(PI2_OVER_6),
            Some(h.tail_estimate),
            Some(h.refinement_delta),
            ok,
        ));
        let w = weighted_hs_bound(exec)?;
        rows.push(hs_row(
            "weighted_integral",
            None,
            w.direct,
            Some(w.bound),
            Some(w.tail_bound),
            None,
            w.holds,
        ));
        rows.push(hs_row(
            "weighted_intermediate",
            None,
            w.intermediate,
            Some(w.bound),
            None,
            None,
            w.intermediate <= w.bound,
        ));
        summary.push(format!(
            "squared HS norm of the limit inverse: {} (pi^2/6 = {})",
            num(h.value),
            num(PI2_OVER_6)
        ));
        summary.push(format!(
            "weighted integral {} <= {} <= {}",
            num(w.direct),
            num(w.intermediate),
            num(w.bound)
        ));
        result.insert("limit".into(), json!(h));
        result.insert("weighted".into(), json!(w));
    }
    let mut reports = Vec::new();
    for &e in &a.eps {
        let eps = Epsilon::new(e)?;
        let h = hs_distance(eps, a.tol, exec)?;
        let n = hs_norm_eps(eps, exec)?;
        let audits = h.audit_inner.holds && h.audit_outer.holds;
        rows.push(hs_row(
            "hs_distance",
            Some(e),
            h.hs_distance,
            None,
            Some(h.tail_estimate),
            Some(h.refinement_delta),
            h.tolerance_met && audits,
        ));
        rows.push(hs_row(
            "hs_norm_sq_eps",
            Some(e),
            n.value,
            None,
            Some(n.tail_estimate),
            Some(n.refinement_delta),
            n.refinement_delta < a.tol * n.value,
        ));
        summary.push(format!("eps {}: HS distance {}", num(e), num(h.hs_distance)));
        reports.push(json!({ "distance": h, "norm_sq_eps": n }));
    }
    if !a.eps.is_empty() {
        result.insert("eps".into(), json!(reports));
    }
    let passed = rows.iter().all(|r| r[7] == "true");
    Ok(Rendered {
        table: Table {
            header: HSNORM_COLUMNS.to_vec(),
            rows,
        },
        summary,
        result: serde_json::Value::Object(result),
        status: if passed { Status::Success } else { Status::Failure },
    })
}

pub fn audit(a: &AuditArgs, exec: Execution) -> Result<Rendered, CliError> {
    let eps = Epsilon::new(a.eps)?;
    let grid = log_grid_pairs(eps, a.grid);
    let pointwise = pointwise_bound_audit(eps, &grid)?;
    let h = hs_distance(eps, a.tol, exec)?;
    let rows = vec![
        vec![
            "pointwise_difference".into(),
            num(a.eps),
            grid.len().to_string(),
            num(pointwise),
            num(POINTWISE_SLACK),
            (pointwise <= POINTWISE_SLACK).to_string(),
        ],
        vec![
            "dominating_outer".into(),
            num(a.eps),
            h.audit_outer.samples.to_string(),
            num(h.audit_outer.worst_margin),
            num(AUDIT_SLACK),
            h.audit_outer.holds.to_string(),
        ],
        vec![
            "dominating_inner".into(),
            num(a.eps),
            h.audit_inner.samples.to_string(),
            num(h.audit_inner.worst_margin),
            num(AUDIT_SLACK),
            h.audit_inner.holds.to_string(),
        ],
    ];
    let passed = rows.iter().all(|r| r[5] == "true");
    Ok(Rendered {
        table: Table {
            header: AUDIT_COLUMNS.to_vec(),
            rows,
        },
        summary: vec![format!(
            "kernel audits at eps = {}: worst pointwise margin {}",
            num(a.eps),
            num(pointwise)
        )],
        result: json!({
            "pointwise_margin": pointwise,
            "grid_pairs": grid.len(),
            "audit_outer": h.audit_outer,
            "audit_inner": h.audit_inner,
        }),
        status: if passed { Status::Success } else { Status::Failure },
    })
}

pub fn eigenpoly_cmd(a: &EigenpolyArgs) -> Result<Rendered, CliError> {
    let f = eigenpoly(a.n)?;
    let nn = BigRational::from_integer(a.n.into());
    let eigen_ok = apply_l0(&f.poly)? == f.poly.scale(&nn);
    let mut orth_ok = true;
    let mut rows = Vec::with_capacity(a.n);
    for r in 1..=a.n {
        let c = f.a(r);
        let g = gram(&eigenpoly(r)?.poly, &f.poly)?;
        if r != a.n && !g.is_zero() {
            orth_ok = false;
        }
        rows.push(vec![
            r.to_string(),
            c.to_string(),
            num(c.to_f64().unwrap_or(f64::NAN)),
            g.to_string(),
        ]);
    }
    let coeffs: Vec<String> = (1..=a.n).map(|r| f.a(r).to_string()).collect();
    Ok(Rendered {
        table: Table {
            header: EIGENPOLY_COLUMNS.to_vec(),
            rows,
        },
        summary: vec![
            f.poly.to_string(),
            format!(
                "L0 f_{0} = {0} f_{0}: {1}",
                a.n,
                if eigen_ok { "exact" } else { "FAILED" }
            ),
            format!(
                "orthogonal to f_1..f_{}: {}",
                a.n - 1,
                if orth_ok { "exact" } else { "FAILED" }
            ),
        ],
        result: json!({
            "n": a.n,
            "polynomial": f.poly.to_string(),
            "coefficients": coeffs,
            "eigen_identity": eigen_ok,
            "orthogonal": orth_ok,
        }),
        status: if eigen_ok && orth_ok {
            Status::Success
        } else {
            Status::Failure
        },
    })
}

/// The property suite at reduced sizes.
pub fn selftest(exec: Execution) -> Result<Rendered, CliError> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push =
        |name: &str, passed: bool, detail: String| rows.push(vec![name.to_string(), passed.to_string(), detail]);

    let small = NystromOptions {
        nodes: 200,
        exec,
        ..Default::default()
    };
    let lim = route_nystrom(Family::Limit, 4, &small)?;
    let worst = lim
        .spectrum
        .eigenvalues
        .iter()
        .take(4)
        .enumerate()
        .map(|(k, l)| (l - (k + 1) as f64).abs())
        .fold(0.0, f64::max);
    push(
        "limit_spectrum_integers",
        worst < 1e-6,
        format!("max |lambda_n - n| = {}", num(worst)),
    );

    let mut exact = true;
    let polys: Vec<_> = (1..=12).map(eigenpoly).collect::<Result<_, _>>()?;
    for (i, p) in polys.iter().enumerate() {
        exact &= apply_l0(&p.poly)? == p.poly.scale(&BigRational::from_integer(p.n.into()));
        for q in &polys[i + 1..] {
            exact &= gram(&p.poly, &q.poly)?.is_zero();
        }
    }
    push("exact_eigenpolynomials", exact, "n, m <= 12".into());

    let h = hs_norm_limit(exec)?;
    let dev = (h.value - PI2_OVER_6).abs();
    push("hs_identity", dev < 1e-4, format!("|HS^2 - pi^2/6| = {}", num(dev)));
    let w = weighted_hs_bound(exec)?;
    push(
        "weighted_bound",
        w.holds,
        format!("{} <= {} <= 5", num(w.direct), num(w.intermediate)),
    );

    let e = Epsilon::new(0.3)?;
    let m = pointwise_bound_audit(e, &log_grid_pairs(e, 20))?;
    push("pointwise_bound", m <= POINTWISE_SLACK, format!("margin {}", num(m)));

    let c = compare_routes(Epsilon::new(0.2)?, 3, &small, &FourierOptions::default())?;
    push(
        "route_agreement",
        c.agreement_count == 3,
        format!("{} of 3 agree", c.agreement_count),
    );

    let opts = SweepOptions {
        nystrom: small,
        exec,
        ..Default::default()
    };
    let r = convergence_sweep(&[0.1, 0.05, 0.025], 3, SweepRoute::Nystrom, &opts)?;
    for s in &r.assertions {
        push(&format!("sweep_{}", s.name), s.passed, s.detail.clone());
    }

    let passed = rows.iter().all(|r| r[1] == "true");
    let failed = rows.iter().filter(|r| r[1] != "true").count();
    let result = json!(rows
        .iter()
        .map(|r| json!({ "check": r[0], "passed": r[1] == "true", "detail": r[2] }))
        .collect::<Vec<_>>());
    Ok(Rendered {
        summary: vec![format!("selftest: {} checks, {failed} failed", rows.len())],
        table: Table {
            header: SELFTEST_COLUMNS.to_vec(),
            rows,
        },
        result,
        status: if passed { Status::Success } else { Status::Failure },
    })
}
