//! Painlevé-level reductions of the flow: the σ-form of Painlevé V for
//! M = 1, the coupled χ-system for M = 2, and the small-s expansions of
//! χ₀, χ₁ and of the gap probability.

use crate::dynamics::{central_difference, eta_derivatives, rhs, stencil, IntegrateOptions, PrimaryState};
use crate::error::{invalid, GapError, Result};
use crate::specialfns::{gamma, pochhammer, EnsembleSpec};

/// Finite sum Σ c_k s^{e_k} with strictly increasing exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExpansion {
    pub terms: Vec<(f64, f64)>,
    /// s below which the first correction stays smaller than the leading term
    pub valid_radius_hint: f64,
}

impl SeriesExpansion {
    /// Sorts by exponent and merges coincident exponents.
    pub fn new(mut terms: Vec<(f64, f64)>, valid_radius_hint: f64) -> Self {
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match merged.last_mut() {
                Some(last) if (last.0 - e).abs() <= 1e-12 * e.abs().max(1.0) => last.1 += c,
                _ => merged.push((e, c)),
            }
        }
        Self { terms: merged, valid_radius_hint }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.terms.iter().map(|(e, c)| if *e == 0.0 { *c } else { c * s.powf(*e) }).sum()
    }

    /// Term-wise derivative in s.
    pub fn derivative(&self) -> Self {
        let terms = self.terms.iter().filter(|(e, _)| *e != 0.0).map(|(e, c)| (e - 1.0, c * e)).collect();
        Self { terms, valid_radius_hint: self.valid_radius_hint }
    }

    pub fn coefficient(&self, exponent: f64) -> Option<f64> {
        self.terms.iter().find(|(e, _)| (e - exponent).abs() <= 1e-12 * exponent.abs().max(1.0)).map(|t| t.1)
    }

    /// Keeps the terms with exponent ≤ cap.
    pub fn truncate(&self, cap: f64) -> Self {
        Self { terms: self.terms.iter().copied().filter(|(e, _)| *e <= cap).collect(), valid_radius_hint: self.valid_radius_hint }
    }
}

fn sum_and_scale(terms: &[f64]) -> (f64, f64) {
    (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
}

fn sigma_pv_terms(sigma: f64, ds: f64, d2s: f64, s: f64, n: usize, nu: f64) -> [f64; 7] {
    let nf = n as f64;
    [
        (s * d2s).powi(2),
        -4.0 * s * ds.powi(3),
        4.0 * sigma * ds * ds,
        -sigma * sigma,
        -2.0 * (nu - s + 2.0 * nf) * sigma * ds,
        -(nu - s).powi(2) * ds * ds,
        4.0 * s * nf * ds * ds,
    ]
}

/// (sσ″)² minus the right-hand side of the σ-form of Painlevé V.
pub fn sigma_pv_residual(sigma: f64, dsigma: f64, d2sigma: f64, s: f64, n: usize, nu: f64) -> f64 {
    sum_and_scale(&sigma_pv_terms(sigma, dsigma, d2sigma, s, n, nu)).0
}

/// Sum of the absolute values of the terms of the σ-PV residual.
pub fn sigma_pv_scale(sigma: f64, dsigma: f64, d2sigma: f64, s: f64, n: usize, nu: f64) -> f64 {
    sum_and_scale(&sigma_pv_terms(sigma, dsigma, d2sigma, s, n, nu)).1
}

/// σ = −nη₀ − η₁ and its first two derivatives at an M = 1 state.
pub fn sigma_from_state(state: &PrimaryState, spec: &EnsembleSpec) -> Result<(f64, f64, f64)> {
    if spec.m != 1 || state.m() != 1 {
        return invalid("σ is defined for M = 1");
    }
    let nf = spec.n as f64;
    let (d1, d2) = eta_derivatives(state, spec);
    Ok((-state.chi0(spec.n), -(nf * d1[0] + d1[1]), -(nf * d2[0] + d2[1])))
}

/// Three-term expansion of σ at s = 0 for M = 1.
pub fn sigma_boundary_series(n: usize, nu: f64, lambda: f64) -> Result<SeriesExpansion> {
    if n == 0 {
        return invalid("n must be positive");
    }
    let nf = n as f64;
    let a = lambda * pochhammer(nu + 1.0, n) / (gamma(nf)? * gamma(nu + 2.0)?);
    let c1 = -(2.0 * nf + nu) / (nu + 2.0);
    let c2 = (nu * (nu + 1.0).powi(2) + 2.0 * nf * (nf + nu) * (2.0 * nu + 3.0)) / (2.0 * pochhammer(nu + 1.0, 3));
    Ok(SeriesExpansion::new(vec![(nu + 1.0, a), (nu + 2.0, a * c1), (nu + 3.0, a * c2)], (1.0 / c1.abs()).min(1.0)))
}

/// χ₀, χ₁ and their first derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiValues {
    pub chi0: f64,
    pub chi1: f64,
    pub dchi0: f64,
    pub dchi1: f64,
}

fn require_m2(state: &PrimaryState, spec: &EnsembleSpec) -> Result<()> {
    if spec.m != 2 || state.m() != 2 {
        return invalid("χ variables are defined for M = 2");
    }
    Ok(())
}

/// χ₀ = nη₀ + η₁, χ₁ = nη₁ + η₂ and their derivatives from the flow.
pub fn chi_from_state(state: &PrimaryState, spec: &EnsembleSpec) -> Result<ChiValues> {
    require_m2(state, spec)?;
    let nf = spec.n as f64;
    let d = rhs(state, spec);
    let e = &state.eta;
    Ok(ChiValues { chi0: nf * e[0] + e[1], chi1: nf * e[1] + e[2], dchi0: nf * d.eta[0] + d.eta[1], dchi1: nf * d.eta[1] + d.eta[2] })
}

/// χ₀ through its third derivative and χ₁ through its second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiJet {
    pub chi0: [f64; 4],
    pub chi1: [f64; 3],
}

impl ChiJet {
    /// Jet of the two series at s.
    pub fn from_series(chi0: &SeriesExpansion, chi1: &SeriesExpansion, s: f64) -> Self {
        let mut a = [0.0; 4];
        let mut cur = chi0.clone();
        for slot in a.iter_mut() {
            *slot = cur.eval(s);
            cur = cur.derivative();
        }
        let mut b = [0.0; 3];
        let mut cur = chi1.clone();
        for slot in b.iter_mut() {
            *slot = cur.eval(s);
            cur = cur.derivative();
        }
        Self { chi0: a, chi1: b }
    }
}

fn chi2_second(state: &PrimaryState, spec: &EnsembleSpec) -> (f64, f64) {
    let nf = spec.n as f64;
    let (_, d2) = eta_derivatives(state, spec);
    (nf * d2[0] + d2[1], nf * d2[1] + d2[2])
}

/// Jet at s along the trajectory through `before` (with before.s < s).
/// Second derivatives come from the flow; χ₀‴ is a fourth-order central
/// difference of χ₀″ with step 1e−3·s.
pub fn chi_jet(before: &PrimaryState, spec: &EnsembleSpec, s: f64, opts: &IntegrateOptions) -> Result<(ChiJet, PrimaryState)> {
    require_m2(before, spec)?;
    let rel_step = 1e-3;
    let st = stencil(before, spec, s, rel_step, opts)?;
    let mid = &st[2];
    let v = chi_from_state(mid, spec)?;
    let (dd0, dd1) = chi2_second(mid, spec);
    let f: Vec<f64> = st.iter().map(|x| chi2_second(x, spec).0).collect();
    let d3 = central_difference([f[0], f[1], f[2], f[3], f[4]], rel_step * s);
    Ok((ChiJet { chi0: [v.chi0, v.dchi0, dd0, d3], chi1: [v.chi1, v.dchi1, dd1] }, st[4].clone()))
}

/// Residuals of the two equations of the χ-system with their scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiResiduals {
    pub r1: f64,
    pub r2: f64,
    pub scale1: f64,
    pub scale2: f64,
}

impl ChiResiduals {
    /// Largest residual relative to its scale.
    pub fn relative(&self) -> f64 {
        let q = |r: f64, sc: f64| if sc == 0.0 { 0.0 } else { r.abs() / sc };
        q(self.r1, self.scale1).max(q(self.r2, self.scale2))
    }
}

pub fn chi_system_residuals(jet: &ChiJet, s: f64, n: usize, e1: f64, e2: f64) -> ChiResiduals {
    let nf = n as f64;
    let [c0, d0, dd0, ddd0] = jet.chi0;
    let [c1, d1, dd1] = jet.chi1;
    let t1 = [
        3.0 * d1 * d1,
        3.0 * s * d1 * dd0,
        2.0 * d1 * d0 * (3.0 * c0 - e1),
        d0 * s * s * ddd0,
        d0 * (1.0 - e1) * s * dd0,
        3.0 * s * c0 * d0 * dd0,
        c0 * d0 * d0 * (3.0 * c0 - 2.0 * e1 - 1.0),
        -c0 * d0,
        (e2 - s) * d0 * d0,
        3.0 * s * d0.powi(3),
    ];
    let t2 = [
        (nf - 1.0) * d0 * d0 * (c0 - s * d0),
        d0.powi(3) * (1.0 + e1 + e2 - s - (2.0 + e1) * c0 + c0 * c0) * c0,
        d0.powi(3) * s * s * dd0,
        d0.powi(4) * (3.0 * s * c0 - s * (1.0 + e1)),
        2.0 * c1 * (1.0 - d0) * d0 * d0,
        d1 * d1 * (d1 + 3.0 * c0 * d0 - e1 * d0),
        s * s * d0 * dd0 * dd1,
        d1 * d0 * d0 * (e2 - s + 3.0 * c0 * c0 + 3.0 * s * d0),
        -d1 * c0 * d0 * (1.0 + (1.0 + 2.0 * e1) * d0),
        -d1 * s * s * dd0 * dd0,
    ];
    let (r1, scale1) = sum_and_scale(&t1);
    let (r2, scale2) = sum_and_scale(&t2);
    ChiResiduals { r1, r2, scale1, scale2 }
}

fn require_generic_m2(spec: &EnsembleSpec) -> Result<(f64, f64)> {
    if spec.m != 2 {
        return Err(GapError::Unsupported(format!("the χ expansions are for M = 2 (M = {})", spec.m)));
    }
    if !spec.series_available() {
        return Err(GapError::NearResonance(format!("nu = {:?}", spec.nu_tail())));
    }
    Ok((spec.nu[1], spec.nu[2]))
}

/// α₀ and β₀, the coefficients of s^{ν₁+1} and s^{ν₂+1} in χ₀.
pub fn chi_leading_coefficients(spec: &EnsembleSpec) -> Result<(f64, f64)> {
    let (a, b) = require_generic_m2(spec)?;
    let n = spec.n;
    let den = gamma(n as f64)? * gamma(a + 1.0)? * gamma(b + 1.0)?;
    let alpha = -spec.lambda * pochhammer(a + 2.0, n - 1) * gamma(b - a)? / den;
    let beta = -spec.lambda * pochhammer(b + 2.0, n - 1) * gamma(a - b)? / den;
    Ok((alpha, beta))
}

// first correction of χ₀ in the branch with leading exponent a + 1
fn chi0_correction(n: f64, a: f64, b: f64) -> f64 {
    (2.0 + 2.0 * a + a * b + n * (2.0 * b - a)) / ((a + 2.0) * (b + 1.0) * (1.0 + a - b))
}

fn radius(corrections: &[f64]) -> f64 {
    corrections.iter().map(|c| 1.0 / c.abs()).fold(1.0, f64::min)
}

/// Printed expansions of χ₀ and χ₁ at s = 0, keeping exponents ≤ order_cap.
pub fn chi_series(spec: &EnsembleSpec, order_cap: f64) -> Result<(SeriesExpansion, SeriesExpansion)> {
    let (a, b) = require_generic_m2(spec)?;
    let (al, be) = chi_leading_coefficients(spec)?;
    let nf = spec.n as f64;
    let ca = chi0_correction(nf, a, b);
    let cb = chi0_correction(nf, b, a);
    let chi0 = SeriesExpansion::new(
        vec![
            (a + 1.0, al),
            (a + 2.0, al * ca),
            (b + 1.0, be),
            (b + 2.0, be * cb),
            (a + b + 2.0, -al * be * (a + b + 2.0) / ((a + 1.0) * (b + 1.0))),
        ],
        radius(&[ca, cb]),
    );
    let chi1 = SeriesExpansion::new(
        vec![
            (a + 2.0, al * (nf - 1.0) / ((a + 2.0) * (b + 1.0))),
            (b + 2.0, be * (nf - 1.0) / ((a + 1.0) * (b + 2.0))),
            (a + b + 3.0, -al * be * (nf - 1.0) * (a + b + 4.0) / ((a + 1.0) * (a + 2.0) * (b + 1.0) * (b + 2.0))),
        ],
        radius(&[ca, cb]),
    );
    Ok((chi0.truncate(order_cap), chi1.truncate(order_cap)))
}

/// Printed expansion of E(0; (0, s)) at s = 0 for M = 2.
pub fn gap_series(spec: &EnsembleSpec) -> Result<SeriesExpansion> {
    let (a, b) = require_generic_m2(spec)?;
    let (al, be) = chi_leading_coefficients(spec)?;
    let nf = spec.n as f64;
    let ca = chi0_correction(nf, a, b);
    let cb = chi0_correction(nf, b, a);
    let cross = -al * be * (nf - 1.0) * (a - b).powi(2) / ((a + 1.0) * (b + 1.0) * (a + 2.0) * (b + 2.0)).powi(2);
    Ok(SeriesExpansion::new(
        vec![
            (0.0, 1.0),
            (a + 1.0, al / (a + 1.0)),
            (a + 2.0, al * ca / (a + 2.0)),
            (b + 1.0, be / (b + 1.0)),
            (b + 2.0, be * cb / (b + 2.0)),
            (a + b + 3.0, cross),
        ],
        radius(&[ca, cb]),
    ))
}

/// Exponent of the first term the printed gap expansion drops.
pub fn gap_series_omitted_exponent(spec: &EnsembleSpec) -> Result<f64> {
    let (a, b) = require_generic_m2(spec)?;
    Ok(a.min(b) + 3.0)
}

/// Size of the next omitted term of the gap expansion at s, estimated
/// from the first correction of each branch.
pub fn gap_series_error_estimate(spec: &EnsembleSpec, s: f64) -> Result<f64> {
    let (a, b) = require_generic_m2(spec)?;
    let (al, be) = chi_leading_coefficients(spec)?;
    let nf = spec.n as f64;
    let ca = chi0_correction(nf, a, b);
    let cb = chi0_correction(nf, b, a);
    Ok((al * ca * ca / (a + 3.0)).abs() * s.powf(a + 3.0) + (be * cb * cb / (b + 3.0)).abs() * s.powf(b + 3.0))
}
