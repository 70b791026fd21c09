use super::{elementary_symmetric, recurrence_coeff_a};
use crate::error::Result;
use crate::specialfns::{delta_pow, pochhammer, EnsembleSpec, Family, QRoute};

/// Worst scaled residual of one identity over a parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceReport {
    pub name: &'static str,
    pub cases: usize,
    /// max |residual| / Σ|terms|
    pub max_residual: f64,
}

// polynomial in δ: c[k] multiplies δ^k
type DeltaPoly = Vec<f64>;

fn poly_mul(a: &[f64], b: &[f64]) -> DeltaPoly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn product_of_linear(shifts: impl IntoIterator<Item = f64>) -> DeltaPoly {
    // ∏ (δ + shift)
    shifts.into_iter().fold(vec![1.0], |acc, s| poly_mul(&acc, &[s, 1.0]))
}

struct Terms {
    res: f64,
    mag: f64,
}

impl Terms {
    fn new() -> Self {
        Self { res: 0.0, mag: 0.0 }
    }
    fn add(&mut self, v: f64) {
        self.res += v;
        self.mag += v.abs();
    }
    fn ratio(&self) -> f64 {
        if self.mag == 0.0 {
            0.0
        } else {
            self.res.abs() / self.mag
        }
    }
}

struct Funcs<'a> {
    spec: &'a EnsembleSpec,
    x: f64,
    route: QRoute,
}

impl Funcs<'_> {
    fn deltas(&self, f: Family, k: usize, jmax: usize) -> Result<Vec<f64>> {
        (0..=jmax).map(|j| delta_pow(self.spec, f, k, j, self.x, self.route)).collect()
    }

    fn apply(&self, f: Family, k: usize, poly: &[f64], scale: f64, t: &mut Terms) -> Result<()> {
        let d = self.deltas(f, k, poly.len() - 1)?;
        for (c, v) in poly.iter().zip(d) {
            t.add(scale * c * v);
        }
        Ok(())
    }
}

/// Evaluates the differential and difference identities for P_n and Q_n
/// at the given points for n = 1..=n_max.
pub fn recurrence_suite(spec: &EnsembleSpec, n_max: usize, xs: &[f64], route: QRoute) -> Result<Vec<RecurrenceReport>> {
    let m = spec.m;
    let nu = spec.nu.clone();
    let tail = spec.nu_tail().to_vec();
    let mut reports: Vec<RecurrenceReport> = [
        "delta-equation P",
        "delta-equation Q",
        "three-term P",
        "three-term Q",
        "lowering P",
        "raising Q",
        "iterated lowering P",
        "iterated raising Q",
        "mixed P",
        "mixed Q",
    ]
    .iter()
    .map(|name| RecurrenceReport { name, cases: 0, max_residual: 0.0 })
    .collect();
    let mut record = |idx: usize, t: &Terms| {
        let r = &mut reports[idx];
        r.cases += 1;
        r.max_residual = r.max_residual.max(t.ratio());
    };

    for &x in xs {
        let fx = Funcs { spec, x, route };
        for n in 1..=n_max {
            let nf = n as f64;

            // ∏(δ+ν_i) P_n = x(δ−n) P_n
            let mut t = Terms::new();
            fx.apply(Family::P, n, &product_of_linear(nu.iter().copied()), 1.0, &mut t)?;
            fx.apply(Family::P, n, &[-nf, 1.0], -x, &mut t)?;
            record(0, &t);

            // ∏(δ−ν_i) Q_n = (−1)^M x(δ+n+1) Q_n
            let mut t = Terms::new();
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            fx.apply(Family::Q, n, &product_of_linear(nu.iter().map(|v| -v)), 1.0, &mut t)?;
            fx.apply(Family::Q, n, &[nf + 1.0, 1.0], -sign * x, &mut t)?;
            record(1, &t);

            // x P_n = P_{n+1} + Σ_k a_{k,n} P_{n−k}
            let mut t = Terms::new();
            t.add(x * delta_pow(spec, Family::P, n, 0, x, route)?);
            t.add(-delta_pow(spec, Family::P, n + 1, 0, x, route)?);
            for k in 0..=m.min(n) {
                t.add(-recurrence_coeff_a(spec, k, n) * delta_pow(spec, Family::P, n - k, 0, x, route)?);
            }
            record(2, &t);

            // x Q_n = Q_{n−1} + Σ_k a_{k,n+k} Q_{n+k}
            let mut t = Terms::new();
            t.add(x * delta_pow(spec, Family::Q, n, 0, x, route)?);
            t.add(-delta_pow(spec, Family::Q, n - 1, 0, x, route)?);
            for k in 0..=m {
                t.add(-recurrence_coeff_a(spec, k, n + k) * delta_pow(spec, Family::Q, n + k, 0, x, route)?);
            }
            record(3, &t);

            // ∏(n+ν_i) P_{n−1} = (δ−n) P_n
            let mut t = Terms::new();
            let c: f64 = nu.iter().map(|v| nf + v).product();
            t.add(c * delta_pow(spec, Family::P, n - 1, 0, x, route)?);
            fx.apply(Family::P, n, &[-nf, 1.0], -1.0, &mut t)?;
            record(4, &t);

            // ∏(n+ν_i+1) Q_{n+1} = (−δ−n−1) Q_n
            let mut t = Terms::new();
            let c: f64 = nu.iter().map(|v| nf + v + 1.0).product();
            t.add(c * delta_pow(spec, Family::Q, n + 1, 0, x, route)?);
            fx.apply(Family::Q, n, &[-nf - 1.0, -1.0], -1.0, &mut t)?;
            record(5, &t);

            // ∏_j (n−r+ν_j+1)_r P_{n−r} = (δ−n)_r P_n
            for r in 1..=n.min(4) {
                let mut t = Terms::new();
                let c: f64 = nu.iter().map(|v| pochhammer(nf - r as f64 + v + 1.0, r)).product();
                t.add(c * delta_pow(spec, Family::P, n - r, 0, x, route)?);
                let op = product_of_linear((0..r).map(|i| -nf + i as f64));
                fx.apply(Family::P, n, &op, -1.0, &mut t)?;
                record(6, &t);
            }

            // ∏_j (n+ν_j+1)_r Q_{n+r} = (−1)^r (δ+n+1)_r Q_n
            for r in 1..=3usize {
                let mut t = Terms::new();
                let c: f64 = nu.iter().map(|v| pochhammer(nf + v + 1.0, r)).product();
                t.add(c * delta_pow(spec, Family::Q, n + r, 0, x, route)?);
                let op = product_of_linear((0..r).map(|i| nf + 1.0 + i as f64));
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                fx.apply(Family::Q, n, &op, -sign, &mut t)?;
                record(7, &t);
            }

            // P_n − x P_{n−1} + Σ_k Σ_l e_{M−k−l} n^l δ^k P_{n−1} = 0
            let mut t = Terms::new();
            t.add(delta_pow(spec, Family::P, n, 0, x, route)?);
            t.add(-x * delta_pow(spec, Family::P, n - 1, 0, x, route)?);
            let mut op = vec![0.0; m + 1];
            let mut opq = vec![0.0; m + 1];
            for k in 0..=m {
                for l in 0..=m - k {
                    let c = elementary_symmetric(&tail, m - k - l) * nf.powi(l as i32);
                    op[k] += c;
                    opq[k] += c * if k % 2 == 0 { 1.0 } else { -1.0 };
                }
            }
            fx.apply(Family::P, n - 1, &op, 1.0, &mut t)?;
            record(8, &t);

            // Q_{n−1} − x Q_n + Σ_k Σ_l e_{M−k−l} n^l (−δ)^k Q_n = 0
            let mut t = Terms::new();
            t.add(delta_pow(spec, Family::Q, n - 1, 0, x, route)?);
            t.add(-x * delta_pow(spec, Family::Q, n, 0, x, route)?);
            fx.apply(Family::Q, n, &opq, 1.0, &mut t)?;
            record(9, &t);
        }
    }
    Ok(reports)
}
