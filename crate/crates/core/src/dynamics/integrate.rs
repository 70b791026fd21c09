use nalgebra::DVector;
use ode_solvers::{Dopri5, OutputType, System};

use super::{conserved_quantities, rhs, Conserved, PrimaryState};
use crate::error::{invalid, GapError, Result};
use crate::specialfns::EnsembleSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// per-step relative tolerance
    pub tol: f64,
    /// abort when any monitored integral drifts by more than this times tol
    pub drift_factor: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { tol: 1e-10, drift_factor: 100.0 }
    }
}

fn monitored(c: &Conserved) -> Vec<f64> {
    let mut v = vec![c.orthogonality, c.hamiltonian_gap];
    v.extend(c.first_integral);
    v.extend(&c.char_poly);
    v
}

// Flow in t = ln s.
struct LogTimeFlow<'a> {
    spec: &'a EnsembleSpec,
    reference: Vec<f64>,
    limit: f64,
}

impl System<f64, DVector<f64>> for LogTimeFlow<'_> {
    fn system(&self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let s = t.exp();
        let st = PrimaryState::from_flat(s, y.as_slice());
        let d = rhs(&st, self.spec);
        let k = st.u.len();
        for j in 0..k {
            dy[j] = s * d.u[j];
            dy[k + j] = s * d.v[j];
            dy[2 * k + j] = s * d.xi[j];
            dy[3 * k + j] = s * d.eta[j];
        }
        dy[4 * k] = st.chi0(self.spec.n);
    }

    fn solout(&mut self, t: f64, y: &DVector<f64>, _dy: &DVector<f64>) -> bool {
        let st = PrimaryState::from_flat(t.exp(), y.as_slice());
        let now = monitored(&conserved_quantities(&st, self.spec));
        let d = now.iter().zip(&self.reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        !d.is_finite() || d > self.limit
    }
}

/// Advances `state` to `s_target`.
pub fn integrate(state: &PrimaryState, spec: &EnsembleSpec, s_target: f64, opts: &IntegrateOptions) -> Result<PrimaryState> {
    Ok(integrate_through(state, spec, &[s_target], opts)?.pop().expect("one target"))
}

/// Advances `state` through an increasing list of targets, hitting each
/// exactly; returns one state per target.
pub fn integrate_through(state: &PrimaryState, spec: &EnsembleSpec, targets: &[f64], opts: &IntegrateOptions) -> Result<Vec<PrimaryState>> {
    if state.m() != spec.m {
        return invalid("state and ensemble have different M");
    }
    if !(opts.tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let reference = monitored(&conserved_quantities(state, spec));
    let mut out = Vec::with_capacity(targets.len());
    let mut cur = state.clone();
    for &target in targets {
        if !(target >= cur.s) || !target.is_finite() {
            return invalid(format!("targets must be increasing and beyond s = {}", cur.s));
        }
        if target == cur.s {
            out.push(cur.clone());
            continue;
        }
        let flow = LogTimeFlow { spec, reference: reference.clone(), limit: opts.drift_factor * opts.tol };
        let (t0, t1) = (cur.s.ln(), target.ln());
        let y0 = DVector::from_vec(cur.to_flat());
        let mut solver = Dopri5::from_param(
            flow,
            t0,
            t1,
            t1 - t0,
            y0,
            opts.tol,
            opts.tol * 1e-30,
            0.9,
            0.04,
            0.2,
            10.0,
            t1 - t0,
            0.0,
            1_000_000,
            u32::MAX,
            OutputType::Sparse,
        );
        let res = solver.integrate();
        let (xs, ys) = solver.results().get();
        let last_t = *xs.last().unwrap_or(&t0);
        if res.is_err() {
            return Err(GapError::StepCollapse { s: last_t.exp() });
        }
        let y = ys.last().expect("solver output");
        let st = PrimaryState::from_flat(target, y.as_slice());
        let fin = monitored(&conserved_quantities(&st, spec));
        let d = fin.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if (last_t - t1).abs() > 1e-12 * t1.abs().max(1.0) || !d.is_finite() || d > opts.drift_factor * opts.tol {
            return Err(GapError::ConservationDrift { s: last_t.exp(), drift: d });
        }
        cur = st;
        out.push(cur.clone());
    }
    Ok(out)
}
