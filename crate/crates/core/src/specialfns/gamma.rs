use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{GapError, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const SHIFT: f64 = 12.0;

// B_{2k} / (2k (2k - 1)) for k = 1..10
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn stirling_real(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut tail = 0.0;
    for c in STIRLING.iter().rev() {
        tail = tail * inv2 + c;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + tail * inv
}

fn stirling_complex(z: Complex64) -> Complex64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut tail = Complex64::new(0.0, 0.0);
    for c in STIRLING.iter().rev() {
        tail = tail * inv2 + c;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + tail * inv
}

/// ln|Γ(x)| for real `x`, together with the sign of Γ(x).
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(GapError::InvalidParameter(format!("ln_gamma of {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(GapError::Pole(x));
    }
    if x < 0.5 {
        // reflection
        let s = (PI * x).sin();
        let (lg, _) = ln_gamma_signed(1.0 - x)?;
        return Ok((PI.ln() - s.abs().ln() - lg, s.signum()));
    }
    if x >= SHIFT {
        return Ok((stirling_real(x), 1.0));
    }
    let mut y = x;
    let mut prod = 1.0;
    while y < SHIFT {
        prod *= y;
        y += 1.0;
    }
    Ok((stirling_real(y) - prod.ln(), 1.0))
}

/// ln Γ(x) for real x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(GapError::InvalidParameter(format!(
            "ln_gamma of non-positive argument {x}; use ln_gamma_signed"
        )));
    }
    ln_gamma_signed(x).map(|(v, _)| v)
}

/// Γ(x) for real x.
pub fn gamma(x: f64) -> Result<f64> {
    let (lg, sign) = ln_gamma_signed(x)?;
    Ok(sign * lg.exp())
}

/// Principal branch of ln Γ(z).
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(GapError::InvalidParameter(format!("ln_gamma of {z}")));
    }
    if z.im == 0.0 {
        let (lg, sign) = ln_gamma_signed(z.re)?;
        return Ok(Complex64::new(lg, if sign < 0.0 { PI } else { 0.0 }));
    }
    if z.norm() >= SHIFT && z.re > 0.0 {
        return Ok(stirling_complex(z));
    }
    // upward shift keeps every factor in the same half plane, so the
    // sum of principal logarithms is the principal branch
    let mut w = z;
    let mut logs = Complex64::new(0.0, 0.0);
    while w.re < SHIFT {
        logs += w.ln();
        w += 1.0;
    }
    Ok(stirling_complex(w) - logs)
}

/// Rising factorial (a)_k.
pub fn pochhammer(a: f64, k: usize) -> f64 {
    let mut p = 1.0;
    for i in 0..k {
        p *= a + i as f64;
    }
    p
}

/// ln|(a)_k| and its sign, without overflow for large k.
pub fn ln_pochhammer_signed(a: f64, k: usize) -> (f64, f64) {
    if k < 64 {
        let p = pochhammer(a, k);
        if p.is_finite() && p != 0.0 {
            return (p.abs().ln(), p.signum());
        }
        if p == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
    }
    let mut ln = 0.0;
    let mut sign = 1.0;
    for i in 0..k {
        let f = a + i as f64;
        if f == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        ln += f.abs().ln();
        if f < 0.0 {
            sign = -sign;
        }
    }
    (ln, sign)
}

/// ln(k!)
pub fn ln_factorial(k: usize) -> f64 {
    if k < 2 {
        return 0.0;
    }
    ln_gamma(k as f64 + 1.0).expect("positive argument")
}
