//! Gauss-Legendre rules, composite panel rules and symmetric 2D sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, pairwise_sum, Execution};

/// Nodes and positive weights on an interval `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Affine image of this rule on `(a, b)`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule {
        let (a0, b0) = self.interval;
        let scale = (b - a) / (b0 - a0);
        QuadratureRule {
            nodes: self.nodes.iter().map(|x| a + (x - a0) * scale).collect(),
            weights: self.weights.iter().map(|w| w * scale).collect(),
            interval: (a, b),
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).collect();
        pairwise_sum(&terms)
    }

    /// Like [`integrate`](Self::integrate) for fallible integrands.
    pub fn try_integrate<F: Fn(f64) -> Result<f64>>(&self, f: F) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.len());
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            terms.push(w * f(x)?);
        }
        Ok(pairwise_sum(&terms))
    }

    pub fn weight_sum(&self) -> f64 {
        pairwise_sum(&self.weights)
    }
}

/// Legendre `P_m(x)` and `P_m'(x)` by the three-term recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let mf = m as f64;
    let dp = mf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Largest rule size accepted by [`gauss_legendre`].
pub const MAX_GAUSS_POINTS: usize = 4096;

/// The `m`-point Gauss-Legendre rule on `(-1, 1)`.
pub fn gauss_legendre(m: usize) -> Result<QuadratureRule> {
    if m == 0 || m > MAX_GAUSS_POINTS {
        return Err(Error::InvalidArgument(format!(
            "Gauss-Legendre order must be in 1..={MAX_GAUSS_POINTS}, got {m}"
        )));
    }
    if m == 1 {
        return Ok(QuadratureRule {
            nodes: vec![0.0],
            weights: vec![2.0],
            interval: (-1.0, 1.0),
        });
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    let half = m.div_ceil(2);
    for i in 0..half {
        // Tricomi-type initial guess for the i-th largest root
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5);
        let mut x = theta.cos() * (1.0 - (mf - 1.0) / (8.0 * mf * mf * mf));
        let mut converged = false;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-3) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::QuadratureNonConvergence { m, index: i });
        }
        let (_, dp) = legendre_with_derivative(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
        weights[m - 1 - i] = w;
        weights[i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        interval: (-1.0, 1.0),
    })
}

/// Breakpoints of a composite rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelScheme {
    pub breakpoints: Vec<f64>,
    pub points_per_panel: usize,
    /// Panel width ratio used when the breakpoints were graded, if any.
    pub geometric_ratio: Option<f64>,
}

impl PanelScheme {
    pub fn from_breakpoints(breakpoints: Vec<f64>, points_per_panel: usize) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidArgument("a panel scheme needs at least one panel".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument(
                "panel breakpoints must be finite and increasing".into(),
            ));
        }
        if points_per_panel == 0 {
            return Err(Error::InvalidArgument("points_per_panel must be positive".into()));
        }
        Ok(PanelScheme {
            breakpoints,
            points_per_panel,
            geometric_ratio: None,
        })
    }

    pub fn uniform(a: f64, b: f64, panels: usize, points_per_panel: usize) -> Result<Self> {
        if panels == 0 {
            return Err(Error::InvalidArgument("need at least one panel".into()));
        }
        let bp = (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect();
        Self::from_breakpoints(bp, points_per_panel)
    }

    /// Panels shrinking geometrically toward `a`: the smallest panel is
    /// `(a, a + (b - a) ratio^-(panels - 1) ...)`, each next one `ratio`
    /// times wider.
    pub fn graded_left(a: f64, b: f64, panels: usize, points_per_panel: usize, ratio: f64) -> Result<Self> {
        if !(ratio > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "geometric ratio must exceed 1, got {ratio}"
            )));
        }
        if panels == 0 {
            return Err(Error::InvalidArgument("need at least one panel".into()));
        }
        // widths q^0, q^1, ..., q^(panels-1), normalized to b - a
        let total: f64 = (0..panels).map(|k| ratio.powi(k as i32)).sum();
        let mut bp = Vec::with_capacity(panels + 1);
        bp.push(a);
        let mut acc = 0.0;
        for k in 0..panels {
            acc += ratio.powi(k as i32);
            bp.push(if k + 1 == panels { b } else { a + (b - a) * acc / total });
        }
        let mut s = Self::from_breakpoints(bp, points_per_panel)?;
        s.geometric_ratio = Some(ratio);
        Ok(s)
    }

    /// Panels graded toward both ends, meeting in the middle.
    pub fn graded_both(a: f64, b: f64, panels_each_side: usize, points_per_panel: usize, ratio: f64) -> Result<Self> {
        let mid = 0.5 * (a + b);
        let left = Self::graded_left(a, mid, panels_each_side, points_per_panel, ratio)?;
        let mut bp = left.breakpoints.clone();
        let n = bp.len();
        for k in (0..n - 1).rev() {
            bp.push(b - (left.breakpoints[k] - a));
        }
        let mut s = Self::from_breakpoints(bp, points_per_panel)?;
        s.geometric_ratio = Some(ratio);
        Ok(s)
    }

    /// Geometric breakpoints `a, a r, a r^2, ...` up to and including `b`
    /// (requires `0 < a < b`), preceded by the panel `(0, a)`.
    pub fn geometric_from_zero(a: f64, b: f64, ratio: f64, points_per_panel: usize) -> Result<Self> {
        if !(a > 0.0 && b > a && ratio > 1.0) {
            return Err(Error::InvalidArgument(
                "geometric panels need 0 < a < b and ratio > 1".into(),
            ));
        }
        let mut bp = vec![0.0, a];
        let mut x = a;
        while x * ratio < b * (1.0 - 1e-12) {
            x *= ratio;
            bp.push(x);
        }
        bp.push(b);
        let mut s = Self::from_breakpoints(bp, points_per_panel)?;
        s.geometric_ratio = Some(ratio);
        Ok(s)
    }

    pub fn panels(&self) -> usize {
        self.breakpoints.len() - 1
    }
}

/// Composite rule: `rule` mapped onto every panel of `scheme`.
///
/// The scheme's `points_per_panel` is informational here; the point count
/// comes from `rule`.
pub fn map_panels(rule: &QuadratureRule, scheme: &PanelScheme) -> QuadratureRule {
    let mut nodes = Vec::with_capacity(rule.len() * scheme.panels());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for w in scheme.breakpoints.windows(2) {
        let m = rule.mapped(w[0], w[1]);
        nodes.extend(m.nodes);
        weights.extend(m.weights);
    }
    QuadratureRule {
        nodes,
        weights,
        interval: (scheme.breakpoints[0], *scheme.breakpoints.last().unwrap()),
    }
}

/// Convenience: Gauss rule of `scheme.points_per_panel` points per panel.
pub fn composite_gauss(scheme: &PanelScheme) -> Result<QuadratureRule> {
    Ok(map_panels(&gauss_legendre(scheme.points_per_panel)?, scheme))
}

/// Cutoff for integrands carrying an `e^{-2t}` factor.
pub fn exponential_cutoff(tol: f64) -> f64 {
    30f64.max((1.0 / tol).ln())
}

/// `sum_ij w_i w_j f(x_i, x_j)` for symmetric `f`, evaluating each
/// unordered pair once. Rows are summed independently (possibly in
/// parallel) and reduced in row order.
pub fn integrate_2d<F>(f: F, rule: &QuadratureRule, exec: Execution) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync + Send,
{
    let x = &rule.nodes;
    let w = &rule.weights;
    let rows = map_indexed(exec, x.len(), |i| {
        let mut terms = Vec::with_capacity(x.len() - i);
        terms.push(w[i] * w[i] * f(x[i], x[i]));
        for j in i + 1..x.len() {
            terms.push(2.0 * w[i] * w[j] * f(x[i], x[j]));
        }
        pairwise_sum(&terms)
    });
    pairwise_sum(&rows)
}
