//! Correlation kernel of the product ensemble, in its finite-sum form and
//! its integrable form, together with the recurrence coefficients and the
//! algebraic identities they satisfy.

mod identities;
mod recurrences;

pub use identities::{check_exact_identities, Identity, IdentityReport};
pub use recurrences::{recurrence_suite, RecurrenceReport};

use crate::error::{invalid, Result};
pub use crate::specialfns::recurrence_coeff_a;
use crate::specialfns::{eval_poly, p_hat_coeffs, p_hat_table, prefer_recurrence, q_hat_deltas, EnsembleSpec, QRoute};

/// Relative distance below which the integrable form switches to its
/// diagonal expansion.
pub const DIAGONAL_SWITCH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelForm {
    Sum,
    #[default]
    Integrable,
}

/// e_k(v₁, …, v_m); e_0 = 1 and e_k = 0 for k > m.
pub fn elementary_symmetric(vals: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; vals.len() + 1];
    e[0] = 1.0;
    for (i, &v) in vals.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e.get(k).copied().unwrap_or(0.0)
}

/// α_i = (−1)^i e_{M−i}(ν₁, …, ν_M) for i = 0..=M.
pub fn alpha_coeffs(spec: &EnsembleSpec) -> Vec<f64> {
    let m = spec.m;
    (0..=m)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * elementary_symmetric(spec.nu_tail(), m - i)
        })
        .collect()
}

/// Values of φ_j and their first three x-derivatives at a point.
#[derive(Debug, Clone)]
pub struct PSide {
    /// `phi[j][r]` = d^r φ_j / dx^r
    pub phi: Vec<[f64; 4]>,
}

/// Values of ψ_j at a point.
#[derive(Debug, Clone)]
pub struct QSide {
    pub psi: Vec<f64>,
}

/// Evaluator for K_n(x, y) with the normalisation of P̂_n, Q̂_n.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    spec: EnsembleSpec,
    route: QRoute,
    alpha: Vec<f64>,
    // coefficients of φ_j, and of its first three derivatives
    phi: Vec<[Vec<f64>; 4]>,
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, v)| i as f64 * v).collect()
}

impl KernelEvaluator {
    pub fn new(spec: &EnsembleSpec, route: QRoute) -> Result<Self> {
        let p = p_hat_coeffs(spec, spec.n)?;
        let mut phi = Vec::with_capacity(spec.m + 1);
        let mut dj = p.clone();
        for j in 0..=spec.m {
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            let c0: Vec<f64> = dj.iter().map(|v| sign * v).collect();
            let c1 = derivative(&c0);
            let c2 = derivative(&c1);
            let c3 = derivative(&c2);
            phi.push([c0, c1, c2, c3]);
            for (i, v) in dj.iter_mut().enumerate() {
                *v *= i as f64;
            }
        }
        Ok(Self { spec: spec.clone(), route, alpha: alpha_coeffs(spec), phi })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn p_side(&self, x: f64) -> PSide {
        let m = self.spec.m;
        let n = self.spec.n;
        if prefer_recurrence(&self.spec, n, x).unwrap_or(false) {
            if let Ok(t) = p_hat_table(&self.spec, n, x, m + 3) {
                let d: Vec<f64> = t.iter().map(|row| row[n]).collect();
                let phi = (0..=m)
                    .map(|j| {
                        let sg = if j % 2 == 0 { -1.0 } else { 1.0 };
                        [
                            sg * d[j],
                            sg * d[j + 1] / x,
                            sg * (d[j + 2] - d[j + 1]) / (x * x),
                            sg * (d[j + 3] - 3.0 * d[j + 2] + 2.0 * d[j + 1]) / (x * x * x),
                        ]
                    })
                    .collect();
                return PSide { phi };
            }
        }
        let phi = self
            .phi
            .iter()
            .map(|c| [eval_poly(&c[0], x), eval_poly(&c[1], x), eval_poly(&c[2], x), eval_poly(&c[3], x)])
            .collect();
        PSide { phi }
    }

    pub fn q_side(&self, y: f64) -> Result<QSide> {
        let m = self.spec.m;
        let dq = q_hat_deltas(&self.spec, self.spec.n, y, m, self.route)?;
        let psi = (0..=m)
            .map(|j| {
                let mut v = if j == 0 { -y * dq[0] } else { 0.0 };
                for i in 0..=m - j {
                    v += self.alpha[i + j] * dq[i];
                }
                v
            })
            .collect();
        Ok(QSide { psi })
    }

    /// Numerator Σ_j φ_j(x) ψ_j(y) of the integrable form.
    pub fn numerator(px: &PSide, qy: &QSide) -> f64 {
        px.phi.iter().zip(&qy.psi).map(|(p, q)| p[0] * q).sum()
    }

    /// Combines precomputed sides. `py` must be the P-side at `y`, used
    /// when x and y are close.
    pub fn combine(px: &PSide, py: &PSide, qy: &QSide, x: f64, y: f64) -> f64 {
        let d = x - y;
        if d.abs() < DIAGONAL_SWITCH * x.abs().max(1.0) {
            py.phi
                .iter()
                .zip(&qy.psi)
                .map(|(p, q)| q * (p[1] + 0.5 * p[2] * d + p[3] * d * d / 6.0))
                .sum()
        } else {
            Self::numerator(px, qy) / d
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        if !(x.is_finite() && y > 0.0 && y.is_finite()) {
            return invalid(format!("kernel evaluated at ({x}, {y})"));
        }
        let qy = self.q_side(y)?;
        let px = self.p_side(x);
        let py = if (x - y).abs() < DIAGONAL_SWITCH * x.abs().max(1.0) { self.p_side(y) } else { px.clone() };
        Ok(Self::combine(&px, &py, &qy, x, y))
    }

    pub fn diagonal(&self, x: f64) -> Result<f64> {
        self.eval(x, x)
    }

    /// Σ_{k<n} P̂_k(x) Q̂_k(y).
    pub fn eval_sum(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.eval_sum_with_scale(x, y)?.0)
    }

    /// The finite sum together with Σ_{k<n} |P̂_k(x) Q̂_k(y)|.
    pub fn eval_sum_with_scale(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        if !(x.is_finite() && y > 0.0 && y.is_finite()) {
            return invalid(format!("kernel evaluated at ({x}, {y})"));
        }
        let mut s = crate::specialfns::CompensatedSum::new();
        let mut scale = 0.0;
        let n = self.spec.n;
        let p = p_hat_table(&self.spec, n.saturating_sub(1), x, 0)?;
        for k in 0..n {
            let q = q_hat_deltas(&self.spec, k, y, 0, self.route)?[0];
            s.add(p[0][k] * q);
            scale += (p[0][k] * q).abs();
        }
        Ok((s.value(), scale))
    }
}

/// K_n(x, y) in the requested form.
pub fn kernel_eval(spec: &EnsembleSpec, x: f64, y: f64, form: KernelForm) -> Result<f64> {
    let k = KernelEvaluator::new(spec, QRoute::Auto)?;
    match form {
        KernelForm::Sum => k.eval_sum(x, y),
        KernelForm::Integrable => k.eval(x, y),
    }
}

/// K_n(x, x) from the derivative of the integrable numerator.
pub fn kernel_diagonal(spec: &EnsembleSpec, x: f64) -> Result<f64> {
    KernelEvaluator::new(spec, QRoute::Auto)?.diagonal(x)
}

/// (1/n) K_n(x/n, y/n), the hard-edge scaling.
pub fn hard_edge_scaled(spec: &EnsembleSpec, x: f64, y: f64) -> Result<f64> {
    let n = spec.n as f64;
    Ok(KernelEvaluator::new(spec, QRoute::Auto)?.eval(x / n, y / n)? / n)
}
