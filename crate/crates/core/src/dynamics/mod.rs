//! Hamiltonian flow of the primary variables on J = (0, s).
//!
//! With x_j = i·u_j and y_j = i·v_j every product x_a y_b becomes −u_a v_b,
//! so the flow is carried by real variables. The τ-function is accumulated
//! as log τ(s) = ∫ (nη₀ + η₁)/t dt.

mod checks;
mod integrate;
mod seed;

pub use checks::{central_difference, m1_reduction_checks, schlesinger_residual, stencil, M1Residuals, SchlesingerTriple};
pub use integrate::{integrate, integrate_through, IntegrateOptions};
pub use seed::{default_series_s0, initial_state_numeric, initial_state_series, trajectory_seed};

use crate::kernel::elementary_symmetric;
use crate::specialfns::EnsembleSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct PrimaryState {
    pub s: f64,
    /// u_j = Im x_j
    pub u: Vec<f64>,
    /// v_j = Im y_j
    pub v: Vec<f64>,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub log_tau: f64,
}

/// d/ds of every field of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub log_tau: f64,
}

pub(crate) fn sign_m(m: usize) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl PrimaryState {
    pub fn m(&self) -> usize {
        self.u.len() - 1
    }

    pub fn tau(&self) -> f64 {
        self.log_tau.exp()
    }

    /// nu₀ + u₁
    pub fn w(&self, n: usize) -> f64 {
        n as f64 * self.u[0] + self.u[1]
    }

    /// nη₀ + η₁
    pub fn chi0(&self, n: usize) -> f64 {
        n as f64 * self.eta[0] + self.eta[1]
    }

    pub(crate) fn to_flat(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(4 * self.u.len() + 1);
        y.extend_from_slice(&self.u);
        y.extend_from_slice(&self.v);
        y.extend_from_slice(&self.xi);
        y.extend_from_slice(&self.eta);
        y.push(self.log_tau);
        y
    }

    pub(crate) fn from_flat(s: f64, y: &[f64]) -> Self {
        let k = (y.len() - 1) / 4;
        Self {
            s,
            u: y[..k].to_vec(),
            v: y[k..2 * k].to_vec(),
            xi: y[2 * k..3 * k].to_vec(),
            eta: y[3 * k..4 * k].to_vec(),
            log_tau: y[4 * k],
        }
    }
}

/// Right-hand side of the flow in s.
pub fn rhs(state: &PrimaryState, spec: &EnsembleSpec) -> Derivatives {
    let m = state.m();
    let n = spec.n as f64;
    let s = state.s;
    let sg = sign_m(m);
    let (u, v, xi, eta) = (&state.u, &state.v, &state.xi, &state.eta);
    let w = state.w(spec.n);
    let vm = v[m];
    let mut du = vec![0.0; m + 1];
    for j in 0..m {
        du[j] = (-eta[j] * w - u[j + 1]) / s;
    }
    let xu: f64 = u.iter().zip(xi).map(|(a, b)| a * b).sum();
    du[m] = (-(eta[m] + sg * s) * w + xu) / s;
    let ev: f64 = eta.iter().zip(v).map(|(a, b)| a * b).sum();
    let mut dv = vec![0.0; m + 1];
    dv[0] = ((sg * n * s - xi[0]) * vm + n * ev) / s;
    dv[1] = ((sg * s - xi[1]) * vm + v[0] + ev) / s;
    for j in 2..=m {
        dv[j] = (-xi[j] * vm + v[j - 1]) / s;
    }
    let dxi = v.iter().map(|vj| sg * w * vj).collect();
    let deta = u.iter().map(|uj| sg * uj * vm).collect();
    Derivatives { u: du, v: dv, xi: dxi, eta: deta, log_tau: state.chi0(spec.n) / s }
}

/// H_n(s) under the real parametrisation.
pub fn hamiltonian(state: &PrimaryState, spec: &EnsembleSpec) -> f64 {
    let m = state.m();
    let s = state.s;
    let (u, v, xi, eta) = (&state.u, &state.v, &state.xi, &state.eta);
    let w = state.w(spec.n);
    let mut h = sign_m(m) * s * w * v[m];
    for i in 0..m {
        h += u[i + 1] * v[i];
    }
    for i in 0..=m {
        h += w * eta[i] * v[i] - v[m] * xi[i] * u[i];
    }
    h
}

/// η′ and η″, from the flow.
pub fn eta_derivatives(state: &PrimaryState, spec: &EnsembleSpec) -> (Vec<f64>, Vec<f64>) {
    let m = state.m();
    let sg = sign_m(m);
    let d = rhs(state, spec);
    let d1 = d.eta.clone();
    let d2 = (0..=m).map(|j| sg * (d.u[j] * state.v[m] + state.u[j] * d.v[m])).collect();
    (d1, d2)
}

/// ξ′ and ξ″, from the flow.
pub fn xi_derivatives(state: &PrimaryState, spec: &EnsembleSpec) -> (Vec<f64>, Vec<f64>) {
    let m = state.m();
    let sg = sign_m(m);
    let n = spec.n as f64;
    let d = rhs(state, spec);
    let w = state.w(spec.n);
    let dw = n * d.u[0] + d.u[1];
    let d2 = (0..=m).map(|j| sg * (dw * state.v[j] + w * d.v[j])).collect();
    (d.xi, d2)
}

/// Residue matrix A₂ = x ⊗ y = −u ⊗ v.
pub fn residue_matrix(state: &PrimaryState) -> Vec<Vec<f64>> {
    state.u.iter().map(|ui| state.v.iter().map(|vj| -ui * vj).collect()).collect()
}

/// The constant matrix E, with a single nonzero last row.
pub fn e_matrix(m: usize, n: usize) -> Vec<Vec<f64>> {
    let mut e = vec![vec![0.0; m + 1]; m + 1];
    let sg = -sign_m(m);
    e[m][0] = sg * n as f64;
    e[m][1] = sg;
    e
}

/// The matrix C built from ξ and η.
pub fn c_matrix(state: &PrimaryState, n: usize) -> Vec<Vec<f64>> {
    let m = state.m();
    let nf = n as f64;
    let mut c = vec![vec![0.0; m + 1]; m + 1];
    for i in 0..m {
        c[i][0] = -nf * state.eta[i];
        c[i][1] = -state.eta[i];
        c[i][i + 1] -= 1.0;
    }
    c[m][0] = -nf * state.eta[m] + state.xi[0];
    c[m][1] = -state.eta[m] + state.xi[1];
    for j in 2..=m {
        c[m][j] = state.xi[j];
    }
    c
}

/// Coefficients c₀..c_{N−1} of det(zI − B) = z^N + Σ c_k z^k.
pub fn char_poly(b: &[Vec<f64>]) -> Vec<f64> {
    let dim = b.len();
    let mut coeffs = vec![0.0; dim + 1];
    coeffs[dim] = 1.0;
    let mut mk = vec![vec![0.0; dim]; dim];
    for k in 1..=dim {
        let mut next = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                next[i][j] = (0..dim).map(|l| b[i][l] * mk[l][j]).sum::<f64>();
            }
            next[i][i] += coeffs[dim - k + 1];
        }
        let tr: f64 = (0..dim).map(|i| (0..dim).map(|l| b[i][l] * next[l][i]).sum::<f64>()).sum();
        coeffs[dim - k] = -tr / k as f64;
        mk = next;
    }
    coeffs.truncate(dim);
    coeffs
}

/// B = A₂ − C.
pub fn b_matrix(state: &PrimaryState, n: usize) -> Vec<Vec<f64>> {
    let a = residue_matrix(state);
    let c = c_matrix(state, n);
    a.iter().zip(&c).map(|(ra, rc)| ra.iter().zip(rc).map(|(x, y)| x - y).collect()).collect()
}

/// Coefficients of the polynomial with roots 0, ν₁, …, ν_M.
pub fn expected_char_poly(spec: &EnsembleSpec) -> Vec<f64> {
    let m = spec.m;
    let roots: Vec<f64> = spec.nu.clone();
    (0..=m)
        .map(|k| {
            let deg = m + 1 - k;
            let sign = if deg % 2 == 0 { 1.0 } else { -1.0 };
            sign * elementary_symmetric(&roots, deg)
        })
        .collect()
}

/// Residuals of the known integrals and relations at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Conserved {
    /// ξ₁ − nη₀ − η₁ + ν (M = 1 only)
    pub first_integral: Option<f64>,
    /// Σ u_j v_j / (|u| |v|)
    pub orthogonality: f64,
    /// H − (nη₀ + η₁)
    pub hamiltonian_gap: f64,
    /// characteristic polynomial of B minus the one with roots (0, ν₁, …, ν_M)
    pub char_poly: Vec<f64>,
    /// relations expressing ξ₂, ξ₁, ξ₀ through χ₀, χ₁ (M = 2 only)
    pub m2_relations: Option<[f64; 3]>,
}

impl Conserved {
    /// Largest absolute residual; the spectrum is included only if asked.
    pub fn max_abs(&self, with_spectrum: bool) -> f64 {
        let mut r = self.orthogonality.abs().max(self.hamiltonian_gap.abs());
        if let Some(f) = self.first_integral {
            r = r.max(f.abs());
        }
        if with_spectrum {
            r = self.char_poly.iter().fold(r, |a, c| a.max(c.abs()));
        }
        if let Some(rel) = self.m2_relations {
            r = rel.iter().fold(r, |a, c| a.max(c.abs()));
        }
        r
    }
}

pub fn conserved_quantities(state: &PrimaryState, spec: &EnsembleSpec) -> Conserved {
    let m = state.m();
    let n = spec.n;
    let nf = n as f64;
    let dot: f64 = state.u.iter().zip(&state.v).map(|(a, b)| a * b).sum();
    let nu2: f64 = state.u.iter().map(|a| a * a).sum();
    let nv2: f64 = state.v.iter().map(|a| a * a).sum();
    let mag = (nu2 * nv2).sqrt();
    let orthogonality = if mag > 0.0 { dot / mag } else { 0.0 };
    let hamiltonian_gap = hamiltonian(state, spec) - state.chi0(n);
    let poly = char_poly(&b_matrix(state, n));
    let expected = expected_char_poly(spec);
    let char_poly = poly.iter().zip(&expected).map(|(a, b)| a - b).collect();
    let first_integral = (m == 1).then(|| state.xi[1] - state.chi0(n) + spec.nu[1]);
    let m2_relations = (m == 2).then(|| {
        let (d1, d2) = eta_derivatives(state, spec);
        let (e1, e2) = (spec.nu[1] + spec.nu[2], spec.nu[1] * spec.nu[2]);
        let s = state.s;
        let eta = &state.eta;
        let chi0 = nf * eta[0] + eta[1];
        let chi1 = nf * eta[1] + eta[2];
        let dchi0 = nf * d1[0] + d1[1];
        let ddchi0 = nf * d2[0] + d2[1];
        let dchi1 = nf * d1[1] + d1[2];
        let r2 = state.xi[2] - (chi0 - e1);
        let xi1 = e2 - (1.0 + e1) * chi0 + chi0 * chi0 + s * dchi0 + chi1;
        let r1 = state.xi[1] - xi1;
        let num = nf * chi0 * (chi0 - 1.0 - spec.nu[1]) * (chi0 - 1.0 - spec.nu[2])
            + (eta[2] - chi1) * (state.xi[1] + nf * (nf + e1 - chi0))
            + nf * chi1 * (chi0 + nf - 2.0)
            - nf * s * dchi0 * (1.0 + e1 - 3.0 * chi0)
            + nf * s * (s * ddchi0 + 2.0 * dchi1);
        let r0 = state.xi[0] - num / (nf * (1.0 + eta[0]));
        [r0, r1, r2]
    });
    Conserved { first_integral, orthogonality, hamiltonian_gap, char_poly, m2_relations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(m: usize, rng: &mut ChaCha8Rng) -> PrimaryState {
        let mut r = |k: usize| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
        PrimaryState { s: 0.7, u: r(m + 1), v: r(m + 1), xi: r(m + 1), eta: r(m + 1), log_tau: 0.0 }
    }

    // Complex form of the flow with a₁ = 0, a₂ = s, written directly from
    // the x, y variables.
    fn complex_rhs(m: usize, n: f64, s: f64, x: &[Complex64], y: &[Complex64], xi: &[Complex64], eta: &[Complex64]) -> Vec<Vec<Complex64>> {
        let sg = sign_m(m);
        let w = x[0] * n + x[1];
        let mut dx = vec![Complex64::new(0.0, 0.0); m + 1];
        for j in 0..m {
            dx[j] = (-eta[j] * w - x[j + 1]) / s;
        }
        let xu: Complex64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
        dx[m] = (-(eta[m] + sg * s) * w + xu) / s;
        let ey: Complex64 = eta.iter().zip(y).map(|(a, b)| a * b).sum();
        let mut dy = vec![Complex64::new(0.0, 0.0); m + 1];
        dy[0] = ((sg * n * s - xi[0]) * y[m] + ey * n) / s;
        dy[1] = ((sg * s - xi[1]) * y[m] + y[0] + ey) / s;
        for j in 2..=m {
            dy[j] = (-xi[j] * y[m] + y[j - 1]) / s;
        }
        let dxi = y.iter().map(|yj| -sg * w * yj).collect();
        let deta = x.iter().map(|xj| -sg * xj * y[m]).collect();
        vec![dx, dy, dxi, deta]
    }

    #[test]
    fn printed_m1_and_m2_signs() {
        // ξ₀′ = (nx₀+x₁)y₀ for M = 1 and −(nx₀+x₁)y₀ for M = 2
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [1, 2] {
            let spec = EnsembleSpec::new(m, 3, &vec![0.5; m], 1.0).unwrap();
            let st = random_state(m, &mut rng);
            let d = rhs(&st, &spec);
            let w = st.w(3);
            let printed = if m == 1 { -w * st.v[0] } else { w * st.v[0] };
            assert!((d.xi[0] - printed).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_state_has_linear_flow() {
        let spec = EnsembleSpec::new(2, 3, &[0.5, 1.5], 1.0).unwrap();
        let st = PrimaryState { s: 1.0, u: vec![0.0; 3], v: vec![0.0; 3], xi: vec![0.3, 0.1, 0.2], eta: vec![0.0; 3], log_tau: 0.0 };
        let d = rhs(&st, &spec);
        assert!(d.xi.iter().chain(&d.eta).chain(&d.u).chain(&d.v).all(|v| *v == 0.0));
    }

    #[test]
    fn real_parametrisation_matches_complex_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let i = Complex64::new(0.0, 1.0);
        for m in 1..=3 {
            let spec = EnsembleSpec::new(m, 4, &vec![0.7; m], 1.0).unwrap();
            let mut st = random_state(m, &mut rng);
            let mut x: Vec<Complex64> = st.u.iter().map(|v| i * v).collect();
            let mut y: Vec<Complex64> = st.v.iter().map(|v| i * v).collect();
            let mut xi: Vec<Complex64> = st.xi.iter().map(|v| Complex64::new(*v, 0.0)).collect();
            let mut eta: Vec<Complex64> = st.eta.iter().map(|v| Complex64::new(*v, 0.0)).collect();
            // shadow integration with a fixed-step RK4 in both variable sets
            let h = 1e-3;
            for _ in 0..200 {
                let s = st.s;
                let f = |s: f64, x: &[Complex64], y: &[Complex64], xi: &[Complex64], eta: &[Complex64]| complex_rhs(m, 4.0, s, x, y, xi, eta);
                let add = |a: &[Complex64], b: &[Complex64], c: f64| a.iter().zip(b).map(|(p, q)| p + q * c).collect::<Vec<_>>();
                let k1 = f(s, &x, &y, &xi, &eta);
                let k2 = f(s + h / 2.0, &add(&x, &k1[0], h / 2.0), &add(&y, &k1[1], h / 2.0), &add(&xi, &k1[2], h / 2.0), &add(&eta, &k1[3], h / 2.0));
                let k3 = f(s + h / 2.0, &add(&x, &k2[0], h / 2.0), &add(&y, &k2[1], h / 2.0), &add(&xi, &k2[2], h / 2.0), &add(&eta, &k2[3], h / 2.0));
                let k4 = f(s + h, &add(&x, &k3[0], h), &add(&y, &k3[1], h), &add(&xi, &k3[2], h), &add(&eta, &k3[3], h));
                let step = |z: &mut Vec<Complex64>, c: usize| {
                    for (idx, zi) in z.iter_mut().enumerate() {
                        *zi += (k1[c][idx] + k2[c][idx] * 2.0 + k3[c][idx] * 2.0 + k4[c][idx]) * (h / 6.0);
                    }
                };
                step(&mut x, 0);
                step(&mut y, 1);
                step(&mut xi, 2);
                step(&mut eta, 3);
                let g = |st: &PrimaryState| rhs(st, &spec);
                let with = |st: &PrimaryState, d: &Derivatives, c: f64| PrimaryState {
                    s: st.s + c,
                    u: st.u.iter().zip(&d.u).map(|(a, b)| a + b * c).collect(),
                    v: st.v.iter().zip(&d.v).map(|(a, b)| a + b * c).collect(),
                    xi: st.xi.iter().zip(&d.xi).map(|(a, b)| a + b * c).collect(),
                    eta: st.eta.iter().zip(&d.eta).map(|(a, b)| a + b * c).collect(),
                    log_tau: 0.0,
                };
                let r1 = g(&st);
                let r2 = g(&with(&st, &r1, h / 2.0));
                let r3 = g(&with(&st, &r2, h / 2.0));
                let r4 = g(&with(&st, &r3, h));
                let comb = |a: &[f64], d1: &[f64], d2: &[f64], d3: &[f64], d4: &[f64]| {
                    (0..a.len()).map(|k| a[k] + h / 6.0 * (d1[k] + 2.0 * d2[k] + 2.0 * d3[k] + d4[k])).collect::<Vec<_>>()
                };
                st = PrimaryState {
                    s: s + h,
                    u: comb(&st.u, &r1.u, &r2.u, &r3.u, &r4.u),
                    v: comb(&st.v, &r1.v, &r2.v, &r3.v, &r4.v),
                    xi: comb(&st.xi, &r1.xi, &r2.xi, &r3.xi, &r4.xi),
                    eta: comb(&st.eta, &r1.eta, &r2.eta, &r3.eta, &r4.eta),
                    log_tau: 0.0,
                };
            }
            for j in 0..=m {
                assert!(x[j].re.abs() < 1e-13 && y[j].re.abs() < 1e-13);
                assert!(xi[j].im.abs() < 1e-13 && eta[j].im.abs() < 1e-13);
                assert!((x[j].im - st.u[j]).abs() < 1e-12);
                assert!((y[j].im - st.v[j]).abs() < 1e-12);
                assert!((xi[j].re - st.xi[j]).abs() < 1e-12);
                assert!((eta[j].re - st.eta[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flow_is_the_poisson_flow_of_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in 1..=3 {
            let spec = EnsembleSpec::new(m, 3, &vec![0.4; m], 1.0).unwrap();
            for _ in 0..5 {
                let st = random_state(m, &mut rng);
                let d = rhs(&st, &spec);
                let sg = sign_m(m);
                let grad = |field: usize, j: usize| {
                    let h = 1e-6;
                    let mut p = st.clone();
                    let mut q = st.clone();
                    let (a, b) = match field {
                        0 => (&mut p.u[j], &mut q.u[j]),
                        1 => (&mut p.v[j], &mut q.v[j]),
                        2 => (&mut p.xi[j], &mut q.xi[j]),
                        _ => (&mut p.eta[j], &mut q.eta[j]),
                    };
                    *a += h;
                    *b -= h;
                    (hamiltonian(&p, &spec) - hamiltonian(&q, &spec)) / (2.0 * h)
                };
                for j in 0..=m {
                    assert!((d.u[j] + grad(1, j) / st.s).abs() < 1e-7);
                    assert!((d.v[j] - grad(0, j) / st.s).abs() < 1e-7);
                    assert!((d.xi[j] - sg * grad(3, j)).abs() < 1e-7);
                    assert!((d.eta[j] + sg * grad(2, j)).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn char_poly_of_companion_at_origin() {
        // at s → 0, B = −C(0) has spectrum (0, ν₁, …, ν_M)
        let spec = EnsembleSpec::new(3, 2, &[0.5, 1.25, 2.0], 1.0).unwrap();
        let m = 3;
        let xi = (0..=m)
            .map(|i| {
                let sg = if (m + i + 1) % 2 == 0 { 1.0 } else { -1.0 };
                sg * elementary_symmetric(&spec.nu, m + 1 - i)
            })
            .collect();
        let st = PrimaryState { s: 1e-3, u: vec![0.0; 4], v: vec![0.0; 4], xi, eta: vec![0.0; 4], log_tau: 0.0 };
        let c = conserved_quantities(&st, &spec);
        assert!(c.char_poly.iter().all(|v| v.abs() < 1e-13), "{:?}", c.char_poly);
    }
}
