use super::{c_matrix, e_matrix, eta_derivatives, integrate_through, residue_matrix, xi_derivatives, IntegrateOptions, PrimaryState};
use crate::error::{invalid, Result};
use crate::specialfns::{ln_gamma, EnsembleSpec};

type Mat = Vec<Vec<f64>>;

/// The matrices E, C and A₂ of the isomonodromic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SchlesingerTriple {
    pub e: Mat,
    pub c: Mat,
    pub a2: Mat,
}

impl SchlesingerTriple {
    pub fn from_state(state: &PrimaryState, n: usize) -> Self {
        Self { e: e_matrix(state.m(), n), c: c_matrix(state, n), a2: residue_matrix(state) }
    }
}

fn commutator(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).map(|k| a[i][k] * b[k][j] - b[i][k] * a[k][j]).sum()).collect())
        .collect()
}

fn max_abs(a: &Mat) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

fn combine(a: &Mat, b: &Mat, ca: f64, cb: f64) -> Mat {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| ca * x + cb * y).collect()).collect()
}

/// States at s − 2h, s − h, s, s + h, s + 2h with h = rel_step·s, integrated
/// from `state`.
pub fn stencil(state: &PrimaryState, spec: &EnsembleSpec, s: f64, rel_step: f64, opts: &IntegrateOptions) -> Result<Vec<PrimaryState>> {
    let h = rel_step * s;
    if s - 2.0 * h <= state.s {
        return invalid(format!("stencil around s = {s} starts before the current state"));
    }
    let pts: Vec<f64> = (-2..=2).map(|k| s + k as f64 * h).collect();
    integrate_through(state, spec, &pts, opts)
}

/// Fourth-order central difference from a five-point stencil.
pub fn central_difference(f: [f64; 5], h: f64) -> f64 {
    (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h)
}

fn mat_difference(ms: &[Mat], h: f64) -> Mat {
    let d = ms[0].len();
    (0..d)
        .map(|i| (0..d).map(|j| central_difference([ms[0][i][j], ms[1][i][j], ms[2][i][j], ms[3][i][j], ms[4][i][j]], h)).collect())
        .collect()
}

/// Largest relative residual of the two isomonodromic equations
/// s A₂′ = [C + sE, A₂] and C′ = [E, A₂] over the sample points.
pub fn schlesinger_residual(seed: &PrimaryState, spec: &EnsembleSpec, points: &[f64], opts: &IntegrateOptions) -> Result<f64> {
    let mut cur = seed.clone();
    let mut worst = 0.0_f64;
    let rel_step = 1e-3;
    for &s in points {
        let st = stencil(&cur, spec, s, rel_step, opts)?;
        let h = rel_step * s;
        let trip: Vec<SchlesingerTriple> = st.iter().map(|x| SchlesingerTriple::from_state(x, spec.n)).collect();
        let mid = &trip[2];
        let da: Mat = mat_difference(&trip.iter().map(|t| t.a2.clone()).collect::<Vec<_>>(), h);
        let dc: Mat = mat_difference(&trip.iter().map(|t| t.c.clone()).collect::<Vec<_>>(), h);
        let lhs1 = combine(&da, &da, s, 0.0);
        let rhs1 = commutator(&combine(&mid.c, &mid.e, 1.0, s), &mid.a2);
        let r1 = max_abs(&combine(&lhs1, &rhs1, 1.0, -1.0)) / (max_abs(&lhs1) + max_abs(&rhs1)).max(f64::MIN_POSITIVE);
        let rhs2 = commutator(&mid.e, &mid.a2);
        let r2 = max_abs(&combine(&dc, &rhs2, 1.0, -1.0)) / (max_abs(&dc) + max_abs(&rhs2)).max(f64::MIN_POSITIVE);
        worst = worst.max(r1).max(r2);
        cur = st[4].clone();
    }
    Ok(worst)
}

/// Relative residuals of the M = 1 reductions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct M1Residuals {
    /// v₁ against the multiple of u₀
    pub y1: f64,
    /// v₀ against the multiple of u₁
    pub y0: f64,
    /// ξ₀ against its expression through η₀, η₁
    pub xi0: f64,
    /// the second-order relation for η₀
    pub eta0_second_order: f64,
    /// the second-order relation for η₁
    pub eta1_second_order: f64,
}

impl M1Residuals {
    pub fn max(&self) -> f64 {
        [self.y1, self.y0, self.xi0, self.eta0_second_order, self.eta1_second_order].iter().fold(0.0, |a, b| a.max(b.abs()))
    }
}

fn rel(terms: &[f64]) -> f64 {
    let sum: f64 = terms.iter().sum();
    let mag: f64 = terms.iter().map(|t| t.abs()).sum();
    if mag == 0.0 {
        0.0
    } else {
        sum.abs() / mag
    }
}

pub fn m1_reduction_checks(state: &PrimaryState, spec: &EnsembleSpec) -> Result<M1Residuals> {
    if spec.m != 1 || state.m() != 1 {
        return invalid("reduction checks need M = 1");
    }
    let s = state.s;
    let n = spec.n as f64;
    let nu = spec.nu[1];
    let c = spec.lambda * (nu * s.ln() - s - ln_gamma(n + 1.0)? - ln_gamma(n + nu + 1.0)?).exp();
    let (u, v, eta, xi) = (&state.u, &state.v, &state.eta, &state.xi);
    let (d1, d2) = eta_derivatives(state, spec);
    let (dxi, _) = xi_derivatives(state, spec);
    let xi0 = (s * (n * d1[0] + d1[1]) + (n * eta[0] - 1.0) * (n * eta[0] + eta[1]) + n * (eta[1] - nu * eta[0])) / (1.0 + eta[0]);
    Ok(M1Residuals {
        y1: rel(&[v[1], -c * u[0]]),
        y0: rel(&[v[0], c * u[1]]),
        xi0: rel(&[xi[0], -xi0]),
        eta0_second_order: rel(&[s * d2[0], 2.0 * (1.0 + eta[0]) * d1[1], (2.0 * n * eta[0] + s - nu) * d1[0]]),
        eta1_second_order: rel(&[s * d2[1], -(1.0 + eta[0]) * (n * d1[1] + dxi[0]), (n * eta[1] - n * s - xi[0]) * d1[0]]),
    })
}
