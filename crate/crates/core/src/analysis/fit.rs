//! Finite-size-scaling fits and curve crossings.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitForm {
    Linear,
    Quadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub distance: usize,
    pub p: f64,
    pub p_fail: f64,
    pub std_err: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub form: FitForm,
    /// Only points with `window.0 <= p_fail <= window.1` enter the fit.
    pub window: (f64, f64),
    pub max_iterations: usize,
}

impl FitOptions {
    pub fn new(form: FitForm) -> Self {
        FitOptions {
            form,
            window: (0.05, 0.60),
            max_iterations: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub form: FitForm,
    pub a: f64,
    pub b: f64,
    pub c: Option<f64>,
    pub p_c: f64,
    pub nu0: f64,
    pub a_std_err: f64,
    pub b_std_err: f64,
    pub p_c_std_err: f64,
    pub nu0_std_err: f64,
    /// Weighted residual sum of squares.
    pub rss: f64,
    pub points_used: usize,
    pub iterations: usize,
}

impl FitResult {
    pub fn predict(&self, distance: usize, p: f64) -> f64 {
        let x = (p - self.p_c) * (distance as f64).powf(1.0 / self.nu0);
        self.a + self.b * x + self.c.unwrap_or(0.0) * x * x
    }
}

/// Parameter order: A, B, p_c, nu0, then C for the quadratic form.
struct Model<'a> {
    points: &'a [FitPoint],
    quadratic: bool,
}

impl Model<'_> {
    fn width(&self) -> usize {
        if self.quadratic {
            5
        } else {
            4
        }
    }

    fn value_and_gradient(&self, theta: &[f64], pt: &FitPoint) -> (f64, [f64; 5]) {
        let (a, b, pc, nu) = (theta[0], theta[1], theta[2], theta[3]);
        let c = if self.quadratic { theta[4] } else { 0.0 };
        let ln_d = (pt.distance as f64).ln();
        let s = (ln_d / nu).exp();
        let x = (pt.p - pc) * s;
        let slope = b + 2.0 * c * x;
        let f = a + b * x + c * x * x;
        (
            f,
            [1.0, x, -slope * s, -slope * x * ln_d / (nu * nu), x * x],
        )
    }

    /// Weighted residuals and Jacobian of the weighted model.
    fn linearize(&self, theta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let k = self.width();
        let mut r = DVector::zeros(self.points.len());
        let mut j = DMatrix::zeros(self.points.len(), k);
        for (i, pt) in self.points.iter().enumerate() {
            let (f, g) = self.value_and_gradient(theta, pt);
            r[i] = (pt.p_fail - f) / pt.std_err;
            for c in 0..k {
                j[(i, c)] = g[c] / pt.std_err;
            }
        }
        (r, j)
    }

    fn rss(&self, theta: &[f64]) -> f64 {
        self.linearize(theta).0.norm_squared()
    }
}

/// Crossing of two curves sampled on the same `p` grid, by linear
/// interpolation of their difference at the first sign change.
pub fn interpolated_crossing(a: &[(f64, f64)], b: &[(f64, f64)]) -> Option<f64> {
    let diff: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter(|(x, y)| x.0 == y.0)
        .map(|(x, y)| (x.0, x.1 - y.1))
        .collect();
    diff.windows(2).find_map(|w| {
        let ((p0, d0), (p1, d1)) = (w[0], w[1]);
        if d0 == 0.0 {
            Some(p0)
        } else if d0 * d1 < 0.0 {
            Some(p0 + (p1 - p0) * d0 / (d0 - d1))
        } else {
            None
        }
    })
}

/// Crossing of two sampled curves from a weighted straight-line fit of their
/// difference. Entries are `(p, p_fail, std_err)` on a shared grid. Returns
/// the root and its standard error.
pub fn regression_crossing(a: &[(f64, f64, f64)], b: &[(f64, f64, f64)]) -> Result<(f64, f64)> {
    let rows: Vec<(f64, f64, f64)> = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            if x.0 != y.0 {
                return Err(Error::InvalidInput("curves are on different grids".into()));
            }
            let var = (x.2 * x.2 + y.2 * y.2).max(f64::MIN_POSITIVE);
            Ok((x.0, x.1 - y.1, 1.0 / var))
        })
        .collect::<Result<_>>()?;
    weighted_root(&rows)
}

fn weighted_root(rows: &[(f64, f64, f64)]) -> Result<(f64, f64)> {
    if rows.len() < 2 {
        return invalid("need at least two shared grid points");
    }
    let sw: f64 = rows.iter().map(|r| r.2).sum();
    let mx = rows.iter().map(|r| r.2 * r.0).sum::<f64>() / sw;
    let my = rows.iter().map(|r| r.2 * r.1).sum::<f64>() / sw;
    let sxx: f64 = rows.iter().map(|r| r.2 * (r.0 - mx).powi(2)).sum();
    let sxy: f64 = rows.iter().map(|r| r.2 * (r.0 - mx) * (r.1 - my)).sum();
    if sxx == 0.0 || sxy == 0.0 {
        return invalid("difference curve is flat");
    }
    let slope = sxy / sxx;
    // var(my) = 1/sw and var(slope) = 1/sxx are uncorrelated after centering.
    let se = ((1.0 / sw) / (slope * slope) + (my * my / slope.powi(4)) / sxx).sqrt();
    Ok((mx - my / slope, se))
}

/// Crossing from a straight-line fit of `ln(b / a)` against `ln p`, which
/// suits curves that behave like powers of `p`. Entries with no failures
/// are skipped.
pub fn log_ratio_crossing(a: &[(f64, f64, f64)], b: &[(f64, f64, f64)]) -> Result<(f64, f64)> {
    let mut rows = Vec::new();
    for (x, y) in a.iter().zip(b) {
        if x.0 != y.0 {
            return invalid("curves are on different grids");
        }
        if x.1 <= 0.0 || y.1 <= 0.0 || x.0 <= 0.0 {
            continue;
        }
        let var = (x.2 / x.1).powi(2) + (y.2 / y.1).powi(2);
        rows.push((x.0.ln(), (y.1 / x.1).ln(), 1.0 / var.max(f64::MIN_POSITIVE)));
    }
    let (root, se) = weighted_root(&rows)?;
    Ok((root.exp(), root.exp() * se))
}

fn initial_guess(points: &[FitPoint], distances: &[usize]) -> f64 {
    let curve = |d: usize| -> Vec<(f64, f64)> {
        let mut c: Vec<(f64, f64)> = points
            .iter()
            .filter(|pt| pt.distance == d)
            .map(|pt| (pt.p, pt.p_fail))
            .collect();
        c.sort_by(|x, y| x.0.total_cmp(&y.0));
        c
    };
    let k = distances.len();
    let (hi, lo) = (curve(distances[k - 1]), curve(distances[k - 2]));
    interpolated_crossing(&lo, &hi)
        .unwrap_or_else(|| points.iter().map(|pt| pt.p).sum::<f64>() / points.len() as f64)
}

/// Weighted Gauss-Newton fit of `p_fail = A + B x (+ C x^2)` with
/// `x = (p - p_c) d^(1/nu0)`. The step is halved while it raises the
/// residual; the covariance is `(J^T W J)^-1` at the solution.
pub fn fit_threshold(points: &[FitPoint], options: &FitOptions) -> Result<FitResult> {
    let (lo, hi) = options.window;
    let used: Vec<FitPoint> = points
        .iter()
        .copied()
        .filter(|pt| pt.p_fail >= lo && pt.p_fail <= hi)
        .collect();
    if used
        .iter()
        .any(|pt| !(pt.std_err > 0.0) || !pt.p.is_finite() || !pt.p_fail.is_finite())
    {
        return invalid("every fitted point needs a positive std_err");
    }
    let mut distances: Vec<usize> = used.iter().map(|pt| pt.distance).collect();
    distances.sort_unstable();
    distances.dedup();
    if distances.len() < 2 {
        return invalid("need at least two distances inside the fit window");
    }
    for &d in &distances {
        let mut ps: Vec<u64> = used
            .iter()
            .filter(|pt| pt.distance == d)
            .map(|pt| pt.p.to_bits())
            .collect();
        ps.sort_unstable();
        ps.dedup();
        if ps.len() < 3 {
            return invalid(format!(
                "distance {d} has fewer than 3 p values inside the fit window"
            ));
        }
    }

    let model = Model {
        points: &used,
        quadratic: options.form == FitForm::Quadratic,
    };
    let k = model.width();
    let p_c0 = initial_guess(&used, &distances);
    let mut theta = vec![0.0, 0.0, p_c0, 1.5, 0.0];
    theta.truncate(k);
    {
        // Linear least squares for A, B at the initial p_c, nu0.
        let (_, j) = model.linearize(&theta);
        let y = DVector::from_iterator(used.len(), used.iter().map(|pt| pt.p_fail / pt.std_err));
        let cols = j.columns(0, 2).into_owned();
        let sol = (cols.transpose() * &cols)
            .try_inverse()
            .ok_or_else(|| Error::NoConvergence("singular start".into()))?
            * cols.transpose()
            * y;
        theta[0] = sol[0];
        theta[1] = sol[1];
    }

    let mut rss = model.rss(&theta);
    let mut trace = vec![rss];
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=options.max_iterations {
        iterations = it;
        let (r, j) = model.linearize(&theta);
        let jtj = j.transpose() * &j;
        let step = jtj
            .clone()
            .cholesky()
            .map(|c| c.solve(&(j.transpose() * &r)))
            .ok_or_else(|| {
                Error::NoConvergence(format!("singular normal matrix at iteration {it}"))
            })?;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(t, s)| t + scale * s)
                .collect();
            let trial_rss = model.rss(&trial);
            if trial[3] > 0.0 && trial_rss.is_finite() && trial_rss <= rss {
                accepted = Some((trial, trial_rss));
                break;
            }
            scale *= 0.5;
        }
        let Some((next, next_rss)) = accepted else {
            // No descent direction left: the current point is stationary.
            converged = true;
            break;
        };
        let small = next
            .iter()
            .zip(&theta)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * (b.abs() + 1e-12));
        let flat = (rss - next_rss) <= 1e-14 * (rss + f64::MIN_POSITIVE);
        theta = next;
        rss = next_rss;
        trace.push(rss);
        if small || flat || rss < 1e-28 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "no convergence in {} iterations; rss trace {:?}",
            options.max_iterations, trace
        )));
    }

    let (_, j) = model.linearize(&theta);
    let cov = (j.transpose() * &j)
        .try_inverse()
        .ok_or_else(|| Error::NoConvergence("singular covariance".into()))?;
    let se = |i: usize| cov[(i, i)].max(0.0).sqrt();
    let (p_min, p_max) = used
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), pt| {
            (a.min(pt.p), b.max(pt.p))
        });
    if !(theta[2] >= p_min && theta[2] <= p_max) || theta[3] <= 0.0 {
        return Err(Error::NoConvergence(format!(
            "fit left the data: p_c = {}, nu0 = {} (p in [{p_min}, {p_max}])",
            theta[2], theta[3]
        )));
    }
    Ok(FitResult {
        form: options.form,
        a: theta[0],
        b: theta[1],
        c: model.quadratic.then(|| theta[4]),
        p_c: theta[2],
        nu0: theta[3],
        a_std_err: se(0),
        b_std_err: se(1),
        p_c_std_err: se(2),
        nu0_std_err: se(3),
        rss,
        points_used: used.len(),
        iterations,
    })
}
