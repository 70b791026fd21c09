use super::{sign_m, PrimaryState};
use crate::error::{invalid, GapError, Result};
use crate::fredholm::{build_operator, fredholm_det, gap_probability, FredholmOptions, IntervalUnion};
use crate::kernel::elementary_symmetric;
use crate::specialfns::{gamma, ln_gamma, ln_scale, pochhammer, EnsembleSpec};

// relative size of the dropped orders at the default seed point
const SEED_REL_TOL: f64 = 1e-10;

/// Largest s0 for which the dropped orders of the small-s expansion stay
/// below 1e−10 relative.
fn series_s0_limit(spec: &EnsembleSpec) -> f64 {
    let e1: f64 = spec.nu_tail().iter().sum();
    SEED_REL_TOL / (2.0 * spec.n as f64 + e1 + 1.0)
}

/// Default seed point of the series start.
pub fn default_series_s0(spec: &EnsembleSpec) -> f64 {
    0.1 * series_s0_limit(spec)
}

fn signed_pow(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// State at s0 from the leading small-s expansions (ν_min > 0; M = 2
/// also requires ν₁, ν₂, ν₁ − ν₂ non-integer).
pub fn initial_state_series(spec: &EnsembleSpec, s0: f64) -> Result<PrimaryState> {
    if !(s0 > 0.0) {
        return invalid(format!("seed point s0 = {s0} must be positive"));
    }
    if spec.nu_min() <= 0.0 {
        return Err(GapError::Unsupported("series start needs all exponents positive; use the numeric start".into()));
    }
    if s0 > series_s0_limit(spec) {
        return Err(GapError::SeedTooLarge(s0));
    }
    match spec.m {
        1 => series_m1(spec, s0),
        2 => {
            if !spec.series_available() {
                return Err(GapError::NearResonance(format!("nu = {:?}; use the numeric start", spec.nu_tail())));
            }
            series_m2(spec, s0)
        }
        m => Err(GapError::Unsupported(format!("series start is available for M = 1, 2 only (M = {m})"))),
    }
}

fn series_m1(spec: &EnsembleSpec, s: f64) -> Result<PrimaryState> {
    let n = spec.n;
    let nf = n as f64;
    let nu = spec.nu[1];
    let lam = spec.lambda;
    let r = pochhammer(nu + 1.0, n);
    let sg = signed_pow(n);
    let gn = gamma(nf)?;
    let l1 = lam * s.powf(nu + 1.0);
    let u0 = -sg * r - lam * sg * r * r * s.powf(nu + 1.0) / ((nu + 1.0) * gn * gamma(nu + 2.0)?);
    let u1 = -sg * nf * pochhammer(nu + 2.0, n - 1) * s - lam * sg * nf * r * r * s.powf(nu + 2.0) / ((nu + 1.0) * gn * gamma(nu + 3.0)?);
    let c = lam * s.powf(nu) * (-s).exp() / (ln_gamma(nf + 1.0)? + ln_gamma(nf + nu + 1.0)?).exp();
    let a0 = -r * l1 / (gamma(nf + 1.0)? * gamma(nu + 2.0)?);
    let a1 = -r * l1 * s / (gn * gamma(nu + 3.0)?);
    let xi0 = nf * r * l1 * s / (gn * gamma(nu + 3.0)?);
    let xi1 = -nu - r * l1 / (gn * gamma(nu + 2.0)?);
    let log_tau = nf * a0 / (nu + 1.0) + a1 / (nu + 2.0);
    Ok(PrimaryState { s, u: vec![u0, u1], v: vec![-c * u1, c * u0], xi: vec![xi0, xi1], eta: vec![a0, a1], log_tau })
}

fn series_m2(spec: &EnsembleSpec, s: f64) -> Result<PrimaryState> {
    let n = spec.n;
    let nf = n as f64;
    let lam = spec.lambda;
    let sg = signed_pow(n);
    let (n1, n2) = (spec.nu[1], spec.nu[2]);
    let e1 = n1 + n2;
    let e2 = n1 * n2;
    let gn = gamma(nf)?;
    let gn1 = gamma(nf + 1.0)?;
    let mut u = vec![0.0; 3];
    let mut v = vec![0.0; 3];
    let mut eta = vec![0.0; 3];
    let mut xi = vec![0.0, e2, -e1];
    let mut log_tau = 0.0;
    u[0] = -sg * pochhammer(n1 + 1.0, n) * pochhammer(n2 + 1.0, n);
    u[1] = -sg * nf * pochhammer(n1 + 2.0, n - 1) * pochhammer(n2 + 2.0, n - 1) * s;
    u[2] = -u[1];
    for (a, b) in [(n1, n2), (n2, n1)] {
        let g = gamma(b - a)?;
        let la = lam * s.powf(a);
        let ra = pochhammer(a + 1.0, n);
        let ra2 = pochhammer(a + 2.0, n - 1);
        let rb = pochhammer(b + 1.0, n);
        let x0 = -sg * la * s * ra2 * ra2 * rb * g / (gn * gamma(a + 1.0)? * gamma(b + 1.0)?);
        let x1 = -sg * la * s * s * nf * ra * ra * rb * g / ((a + 1.0) * gn * gamma(a + 3.0)? * gamma(b + 2.0)?);
        u[0] += x0;
        u[1] += x1;
        u[2] -= x1;
        let gy = g / (ln_gamma(b + nf + 1.0)?).exp();
        v[0] += la * s * sg * gy / (gn * gamma(a + 2.0)?);
        v[1] -= la * sg * b * gy / (gn1 * gamma(a + 1.0)?);
        v[2] += la * sg * gy / (gn1 * gamma(a + 1.0)?);
        let h0 = -la * s * ra2 * g / (gn1 * gamma(a + 1.0)? * gamma(b + 1.0)?);
        let h1 = -la * s * s * ra * g / (gn * gamma(a + 3.0)? * gamma(b + 2.0)?);
        eta[0] += h0;
        eta[1] += h1;
        eta[2] -= h1;
        xi[0] -= la * s * s * ra * nf * g / (gn * gamma(a + 3.0)? * gamma(b + 1.0)?);
        xi[1] += la * s * ra * g / (gn * gamma(a + 2.0)? * gamma(b)?);
        xi[2] -= la * s * ra * g / (gn * gamma(a + 2.0)? * gamma(b + 1.0)?);
        log_tau += nf * h0 / (a + 1.0) + h1 / (a + 2.0);
    }
    Ok(PrimaryState { s, u, v, xi, eta, log_tau })
}

/// State at s0 from the discretised resolvent on (0, s0).
pub fn initial_state_numeric(spec: &EnsembleSpec, s0: f64, opts: &FredholmOptions) -> Result<PrimaryState> {
    let j = IntervalUnion::hard_edge(s0)?;
    let conv = gap_probability(spec, &j, opts)?;
    let op = build_operator(spec, &j, conv.order, opts)?;
    let det = fredholm_det(&op, None)?;
    if !(det.value > 0.0) {
        return Err(GapError::SingularOperator);
    }
    let m = spec.m;
    let n = spec.n;
    let lam = spec.lambda;
    let (ln_c, sign_c) = ln_scale(spec, n);
    let c = sign_c * ln_c.exp();
    if !c.is_finite() {
        return Err(GapError::Unsupported(format!("normalisation of P_{n} overflows")));
    }
    let ev = op.evaluator();
    let ps = ev.p_side(s0);
    let qs = ev.q_side(s0)?;
    let row = op.kernel_row(s0);
    let col = op.kernel_col(s0)?;
    let w = &op.weights;
    let np = op.nodes.len();
    let mut u = vec![0.0; m + 1];
    let mut v = vec![0.0; m + 1];
    let mut h = Vec::with_capacity(m + 1);
    for jj in 0..=m {
        let f: Vec<f64> = op.p_sides().iter().map(|p| p.phi[jj][0]).collect();
        let g = op.resolvent_apply(&f, lam, false)?;
        let corr: f64 = (0..np).map(|k| w[k] * row[k] * g[k]).sum();
        u[jj] = c * (ps.phi[jj][0] + lam * corr);
        let f: Vec<f64> = op.q_sides().iter().map(|q| q.psi[jj]).collect();
        let hh = op.resolvent_apply(&f, lam, true)?;
        let corr: f64 = (0..np).map(|k| w[k] * col[k] * hh[k]).sum();
        v[jj] = lam * (qs.psi[jj] + lam * corr) / c;
        h.push(hh);
    }
    // V_ij = ∫_J φ_i P_j^{(n)}
    let vmat = |i: usize, jj: usize| -> f64 {
        lam * (0..np).map(|k| w[k] * op.p_sides()[k].phi[i][0] * h[jj][k]).sum::<f64>()
    };
    let sg = sign_m(m);
    let nf = n as f64;
    let xi = (0..=m)
        .map(|jj| sg * (nf * vmat(0, jj) + vmat(1, jj) - signed_pow(jj) * elementary_symmetric(&spec.nu, m + 1 - jj)))
        .collect();
    let eta = (0..=m).map(|jj| sg * vmat(jj, m)).collect();
    Ok(PrimaryState { s: s0, u, v, xi, eta, log_tau: det.log_abs })
}

/// Start used for trajectories: the series seed for M = 1 with ν > 0,
/// the discretised resolvent at s0 = 1e−2 otherwise.
pub fn trajectory_seed(spec: &EnsembleSpec) -> Result<PrimaryState> {
    if spec.m == 1 && spec.nu_min() > 0.0 {
        initial_state_series(spec, default_series_s0(spec))
    } else {
        initial_state_numeric(spec, 1e-2, &FredholmOptions::default())
    }
}
