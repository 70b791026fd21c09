//! Fredholm determinant of the kernel restricted to a union of intervals,
//! discretised by the Nyström method on Gauss–Legendre nodes.

mod quadrature;

pub use quadrature::gauss_legendre;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, GapError, Result};
use crate::kernel::{KernelEvaluator, KernelForm, PSide, QSide};
use crate::specialfns::{eval_poly, p_hat_coeffs, q_hat_deltas, EnsembleSpec, QRoute};

/// Finite union of disjoint intervals [a₁,b₁] ∪ … ∪ [a_K,b_K] with
/// 0 ≤ a₁ < b₁ < a₂ < … < b_K.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return invalid("empty interval union");
        }
        for (i, &(a, b)) in intervals.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && a >= 0.0 && a < b) {
                return invalid(format!("bad interval [{a}, {b}]"));
            }
            if i > 0 && a <= intervals[i - 1].1 {
                return invalid("intervals must be sorted and strictly separated");
            }
        }
        Ok(Self { intervals })
    }

    /// J = (0, s)
    pub fn hard_edge(s: f64) -> Result<Self> {
        Self::new(vec![(0.0, s)])
    }

    /// From a flat endpoint list a₁, b₁, a₂, b₂, …
    pub fn from_endpoints(e: &[f64]) -> Result<Self> {
        if e.len() % 2 != 0 || e.is_empty() {
            return invalid("endpoint list must have even, non-zero length");
        }
        Self::new(e.chunks(2).map(|c| (c[0], c[1])).collect())
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals.iter().flat_map(|&(a, b)| [a, b]).collect()
    }
}

/// Change of variables on an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeMap {
    Affine,
    /// x = a + (b − a) u^q, clustering nodes at the left end
    Power(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FredholmOptions {
    pub start_order: usize,
    pub max_order: usize,
    pub tol: f64,
    /// `None` picks the map from the behaviour of the kernel at 0
    pub map: Option<NodeMap>,
    pub form: KernelForm,
    pub route: QRoute,
}

impl Default for FredholmOptions {
    fn default() -> Self {
        Self {
            start_order: 32,
            max_order: 512,
            tol: 1e-9,
            map: None,
            form: KernelForm::Integrable,
            route: QRoute::Auto,
        }
    }
}

/// Kernel is analytic at x = 0 only for M = 1 with integer ν.
fn smooth_at_origin(spec: &EnsembleSpec) -> bool {
    spec.m == 1 && spec.nu[1] == spec.nu[1].round()
}

pub(crate) fn default_map(spec: &EnsembleSpec, a: f64) -> NodeMap {
    if a == 0.0 && !smooth_at_origin(spec) {
        NodeMap::Power(2)
    } else {
        NodeMap::Affine
    }
}

/// Discretised operator: nodes, weights and the symmetrised matrix
/// √(w_i w_k) K(x_i, x_k) evaluated at λ = 1.
#[derive(Debug, Clone)]
pub struct Operator {
    pub spec: EnsembleSpec,
    pub j: IntervalUnion,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub matrix: DMatrix<f64>,
    pub(crate) evaluator: KernelEvaluator,
    pub(crate) p_sides: Vec<PSide>,
    pub(crate) q_sides: Vec<QSide>,
}

fn nodes_for(j: &IntervalUnion, order: usize, spec: &EnsembleSpec, map: Option<NodeMap>) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_legendre(order);
    let mut xs = Vec::with_capacity(order * j.intervals().len());
    let mut ws = Vec::with_capacity(xs.capacity());
    for &(a, b) in j.intervals() {
        let map = map
            .map(|m| if a == 0.0 { m } else { NodeMap::Affine })
            .unwrap_or_else(|| default_map(spec, a));
        for (&t, &w) in rule.0.iter().zip(&rule.1) {
            let u = 0.5 * (t + 1.0);
            match map {
                NodeMap::Affine => {
                    xs.push(a + (b - a) * u);
                    ws.push(0.5 * w * (b - a));
                }
                NodeMap::Power(q) => {
                    let qf = q as f64;
                    xs.push(a + (b - a) * u.powi(q as i32));
                    ws.push(0.5 * w * (b - a) * qf * u.powi(q as i32 - 1));
                }
            }
        }
    }
    (xs, ws)
}

/// Builds the Nyström matrix with `order` nodes per interval.
pub fn build_operator(spec: &EnsembleSpec, j: &IntervalUnion, order: usize, opts: &FredholmOptions) -> Result<Operator> {
    if order == 0 {
        return invalid("quadrature order must be positive");
    }
    let unit = spec.with_lambda(1.0);
    let evaluator = KernelEvaluator::new(&unit, opts.route)?;
    let (nodes, weights) = nodes_for(j, order, spec, opts.map);
    let sq: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let np = nodes.len();
    let p_sides: Vec<PSide> = nodes.iter().map(|&x| evaluator.p_side(x)).collect();
    let q_sides: Vec<QSide> = nodes.par_iter().map(|&x| evaluator.q_side(x)).collect::<Result<_>>()?;
    let matrix = match opts.form {
        KernelForm::Integrable => DMatrix::from_fn(np, np, |i, k| {
            sq[i] * sq[k] * KernelEvaluator::combine(&p_sides[i], &p_sides[k], &q_sides[k], nodes[i], nodes[k])
        }),
        KernelForm::Sum => {
            let n = spec.n;
            let mut p = DMatrix::zeros(np, n);
            let mut q = DMatrix::zeros(n, np);
            for l in 0..n {
                let c = p_hat_coeffs(&unit, l)?;
                for i in 0..np {
                    p[(i, l)] = sq[i] * eval_poly(&c, nodes[i]);
                }
                let col: Vec<f64> = nodes
                    .par_iter()
                    .map(|&x| q_hat_deltas(&unit, l, x, 0, opts.route).map(|v| v[0]))
                    .collect::<Result<_>>()?;
                for k in 0..np {
                    q[(l, k)] = sq[k] * col[k];
                }
            }
            p * q
        }
    };
    Ok(Operator { spec: spec.clone(), j: j.clone(), nodes, weights, matrix, evaluator, p_sides, q_sides })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Determinant {
    pub value: f64,
    pub log_abs: f64,
    pub sign: f64,
}

/// det(I − λ K_J) for the discretised operator.
pub fn fredholm_det(op: &Operator, lambda_override: Option<f64>) -> Result<Determinant> {
    let lambda = lambda_override.unwrap_or(op.spec.lambda);
    if !(0.0..=1.0).contains(&lambda) {
        return invalid(format!("lambda = {lambda} outside [0, 1]"));
    }
    let np = op.nodes.len();
    let a = DMatrix::identity(np, np) - &op.matrix * lambda;
    let lu = a.lu();
    let mut log_abs = 0.0;
    let mut sign: f64 = lu.p().determinant();
    for i in 0..np {
        let d = lu.u()[(i, i)];
        if d == 0.0 {
            return Ok(Determinant { value: 0.0, log_abs: f64::NEG_INFINITY, sign: 0.0 });
        }
        log_abs += d.abs().ln();
        sign *= d.signum();
    }
    Ok(Determinant { value: sign * log_abs.exp(), log_abs, sign })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapResult {
    pub value: f64,
    /// |E(2p) − E(p)| at the accepted order
    pub est_error: f64,
    pub order: usize,
}

/// E(J) = det(I − λ K_J), doubling the order until successive values agree.
pub fn gap_probability(spec: &EnsembleSpec, j: &IntervalUnion, opts: &FredholmOptions) -> Result<GapResult> {
    let mut order = opts.start_order.max(2);
    let mut prev = fredholm_det(&build_operator(spec, j, order, opts)?, None)?.value;
    let mut change = f64::INFINITY;
    while order * 2 <= opts.max_order {
        order *= 2;
        let cur = fredholm_det(&build_operator(spec, j, order, opts)?, None)?.value;
        change = (cur - prev).abs();
        prev = cur;
        if change <= opts.tol {
            return Ok(GapResult { value: cur, est_error: change, order });
        }
    }
    Err(GapError::NotConverged { order, change })
}

/// E at a fixed order, for use inside finite differences.
pub fn gap_at_order(spec: &EnsembleSpec, j: &IntervalUnion, order: usize, opts: &FredholmOptions) -> Result<f64> {
    Ok(fredholm_det(&build_operator(spec, j, order, opts)?, None)?.value)
}

impl Operator {
    /// Solves g − λ K g = f (or with the transposed kernel) on the nodes.
    pub fn resolvent_apply(&self, f: &[f64], lambda: f64, transpose: bool) -> Result<Vec<f64>> {
        let np = self.nodes.len();
        if f.len() != np {
            return invalid("right-hand side has the wrong length");
        }
        let sq: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let a = if transpose { self.matrix.transpose() } else { self.matrix.clone() };
        let a = DMatrix::identity(np, np) - a * lambda;
        let rhs = DVector::from_iterator(np, f.iter().zip(&sq).map(|(f, s)| f * s));
        let g = a.lu().solve(&rhs).ok_or(GapError::SingularOperator)?;
        Ok(g.iter().zip(&sq).map(|(g, s)| g / s).collect())
    }

    /// K(x, x_k) for every node x_k, at λ = 1.
    pub fn kernel_row(&self, x: f64) -> Vec<f64> {
        let px = self.evaluator.p_side(x);
        (0..self.nodes.len())
            .map(|k| KernelEvaluator::combine(&px, &self.p_sides[k], &self.q_sides[k], x, self.nodes[k]))
            .collect()
    }

    /// K(x_k, y) for every node x_k, at λ = 1.
    pub fn kernel_col(&self, y: f64) -> Result<Vec<f64>> {
        let qy = self.evaluator.q_side(y)?;
        let py = self.evaluator.p_side(y);
        Ok((0..self.nodes.len())
            .map(|k| KernelEvaluator::combine(&self.p_sides[k], &py, &qy, self.nodes[k], y))
            .collect())
    }

    pub fn evaluator(&self) -> &KernelEvaluator {
        &self.evaluator
    }

    pub fn p_sides(&self) -> &[PSide] {
        &self.p_sides
    }

    pub fn q_sides(&self) -> &[QSide] {
        &self.q_sides
    }
}

/// d/ds log E(0, s), by Richardson-extrapolated central differences at a
/// fixed quadrature order.
pub fn log_det_derivative(spec: &EnsembleSpec, s: f64, opts: &FredholmOptions) -> Result<f64> {
    let base = gap_probability(spec, &IntervalUnion::hard_edge(s)?, opts)?;
    let order = base.order;
    let le = |t: f64| -> Result<f64> {
        Ok(gap_at_order(spec, &IntervalUnion::hard_edge(t)?, order, opts)?.ln())
    };
    let h = 1e-3 * s;
    let d1 = (le(s + h)? - le(s - h)?) / (2.0 * h);
    let d2 = (le(s + h / 2.0)? - le(s - h / 2.0)?) / h;
    Ok((4.0 * d2 - d1) / 3.0)
}
