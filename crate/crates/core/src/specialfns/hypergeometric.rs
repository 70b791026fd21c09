use crate::error::{GapError, Result};

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) const MAX_TERMS: usize = 20_000;
const REL_TOL: f64 = 1e-17;

fn terminating_degree(a: &[f64]) -> Option<usize> {
    a.iter()
        .filter(|&&v| v <= 0.0 && v == v.round())
        .map(|&v| (-v) as usize)
        .min()
}

/// Sums Σ_m (shift + m)^j t_m z^m for j = 0..=jmax, where t_m are the
/// coefficients of pFq(a; b; z).
pub fn hyp_series_weighted(
    a: &[f64],
    b: &[f64],
    z: f64,
    shift: f64,
    jmax: usize,
) -> Result<Vec<f64>> {
    hyp_series_weighted_mag(a, b, z, shift, jmax).map(|(v, _)| v)
}

/// As [`hyp_series_weighted`], also returning Σ_m |t_m z^m|.
pub fn hyp_series_weighted_mag(
    a: &[f64],
    b: &[f64],
    z: f64,
    shift: f64,
    jmax: usize,
) -> Result<(Vec<f64>, f64)> {
    let degree = terminating_degree(a);
    for &bj in b {
        if bj <= 0.0 && bj == bj.round() {
            let pole = (-bj) as usize;
            if degree.map_or(true, |d| d > pole) {
                return Err(GapError::Pole(bj));
            }
        }
    }
    if degree.is_none() {
        if a.len() > b.len() + 1 {
            return Err(GapError::InvalidParameter(format!(
                "{}F{} diverges for non-terminating parameters",
                a.len(),
                b.len()
            )));
        }
        if a.len() == b.len() + 1 && z.abs() >= 1.0 {
            return Err(GapError::InvalidParameter(format!(
                "{}F{} outside its disc of convergence (|z| = {})",
                a.len(),
                b.len(),
                z.abs()
            )));
        }
    }

    let mut sums = vec![CompensatedSum::new(); jmax + 1];
    let mut term = 1.0_f64;
    let limit = degree.map_or(MAX_TERMS, |d| d + 1);
    let mut quiet = 0;
    let mut l1 = 0.0;
    for m in 0..limit {
        l1 += term.abs();
        let mu = shift + m as f64;
        let mut w = term;
        let mut mag = 0.0_f64;
        for s in sums.iter_mut() {
            s.add(w);
            mag = mag.max(w.abs());
            w *= mu;
        }
        let mut ratio = z / (m as f64 + 1.0);
        for &ai in a {
            ratio *= ai + m as f64;
        }
        for &bj in b {
            ratio /= bj + m as f64;
        }
        let next = term * ratio;
        if degree.is_none() {
            let scale = sums.iter().map(|s| s.value().abs()).fold(0.0, f64::max);
            if mag <= REL_TOL * scale && ratio.abs() < 1.0 {
                quiet += 1;
                if quiet >= 2 {
                    return Ok((sums.iter().map(|s| s.value()).collect(), l1));
                }
            } else {
                quiet = 0;
            }
            if term == 0.0 {
                return Ok((sums.iter().map(|s| s.value()).collect(), l1));
            }
        }
        term = next;
    }
    if degree.is_some() {
        return Ok((sums.iter().map(|s| s.value()).collect(), l1));
    }
    Err(GapError::Truncation {
        terms: MAX_TERMS,
        last: term,
    })
}

/// Generalized hypergeometric function pFq(a; b; z).
pub fn hyp_pfq(a: &[f64], b: &[f64], z: f64) -> Result<f64> {
    Ok(hyp_series_weighted(a, b, z, 0.0, 0)?[0])
}

/// Coefficients c_i of the terminating series pFq(-k, a'; b; x) = Σ c_i x^i.
pub fn terminating_coefficients(k: usize, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    for &bj in b {
        if bj <= 0.0 && bj == bj.round() && ((-bj) as usize) < k {
            return Err(GapError::Pole(bj));
        }
    }
    let mut c = Vec::with_capacity(k + 1);
    let mut t = 1.0;
    c.push(t);
    for i in 0..k {
        let fi = i as f64;
        t *= (fi - k as f64) / (fi + 1.0);
        for &ai in a {
            t *= ai + fi;
        }
        for &bj in b {
            t /= bj + fi;
        }
        c.push(t);
    }
    Ok(c)
}

/// Horner evaluation with a compensated tail.
pub fn eval_poly(c: &[f64], x: f64) -> f64 {
    let mut s = CompensatedSum::new();
    let mut p = 1.0;
    for &ci in c {
        s.add(ci * p);
        p *= x;
    }
    s.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_cases() {
        // 0F0 = exp, 1F0(a;;z) = (1 - z)^(-a)
        assert!((hyp_pfq(&[], &[], 1.3).unwrap() - 1.3_f64.exp()).abs() < 1e-14);
        let v = hyp_pfq(&[0.7], &[], 0.4).unwrap();
        assert!((v - 0.6_f64.powf(-0.7)).abs() < 1e-14);
        assert!(hyp_pfq(&[0.7], &[], 1.2).is_err());
    }

    #[test]
    fn terminating_series_stops() {
        // 1F1(-3; 1; x) = 1 - 3x + 3x^2/2 - x^3/6
        let x = 2.5;
        let v = hyp_pfq(&[-3.0], &[1.0], x).unwrap();
        let exact = 1.0 - 3.0 * x + 1.5 * x * x - x * x * x / 6.0;
        assert!((v - exact).abs() < 1e-14);
        let c = terminating_coefficients(3, &[], &[1.0]).unwrap();
        assert_eq!(c.len(), 4);
        assert!((eval_poly(&c, x) - exact).abs() < 1e-14);
    }

    #[test]
    fn bessel_reference() {
        // 0F1(;1;-x^2/4) = J0(x); J0(3) from an independent evaluation
        let v = hyp_pfq(&[], &[1.0], -9.0 / 4.0).unwrap();
        assert!((v + 0.260_051_954_901_933_4).abs() < 1e-14);
        // 1F2(0.5; 1.5, 1.5; -1)
        let v = hyp_pfq(&[0.5], &[1.5, 1.5], -1.0).unwrap();
        assert!((v - 0.802_706_488_401_347_4).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_lower_parameter() {
        assert!(matches!(hyp_pfq(&[1.0], &[-2.0], 0.3), Err(GapError::Pole(_))));
        // terminates before the pole is reached
        assert!(hyp_pfq(&[-1.0], &[-2.0], 0.3).is_ok());
    }

    #[test]
    fn weighted_matches_derivative() {
        // δ^j of x^mu 1F1(a; b; x) evaluated termwise versus finite difference
        let (a, b, mu, x) = (0.4, 1.7, 0.3, 0.9_f64);
        let f = |x: f64| x.powf(mu) * hyp_pfq(&[a], &[b], x).unwrap();
        let w = hyp_series_weighted(&[a], &[b], x, mu, 1).unwrap();
        let h = 1e-5;
        let fd = x * (f(x + h) - f(x - h)) / (2.0 * h);
        assert!((x.powf(mu) * w[1] - fd).abs() < 1e-8);
    }

    #[test]
    fn compensated_sum_recovers_small_parts() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        s.add(1.0);
        s.add(-1e16);
        assert_eq!(s.value(), 1.0);
    }
}
