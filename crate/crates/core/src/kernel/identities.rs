use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact rational identities behind the integrable form of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// Σ_i (−1)^i (x−i)^n / (i!(n−i)!(y+i)) = (x+y)^n / (y)_{n+1}
    PartialFraction,
    /// the same sum with power n+1 equals (x+y)^{n+1}/(y)_{n+1} − 1
    PartialFractionShifted,
    /// triple sum in x, y, z against its closed form
    TripleSum,
    /// operator identity in n, δ_x, δ_y for l = 0..=M
    OperatorSum,
}

impl Identity {
    pub const ALL: [Identity; 4] = [
        Identity::PartialFraction,
        Identity::PartialFractionShifted,
        Identity::TripleSum,
        Identity::OperatorSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::PartialFraction => "partial-fraction",
            Identity::PartialFractionShifted => "partial-fraction-shifted",
            Identity::TripleSum => "triple-sum",
            Identity::OperatorSum => "operator-sum",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub identity: Identity,
    pub cases: usize,
    pub failures: Vec<String>,
}

type Q = BigRational;

fn int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

fn pow(x: &Q, e: usize) -> Q {
    let mut r = Q::one();
    for _ in 0..e {
        r *= x;
    }
    r
}

fn rising(x: &Q, k: usize) -> Q {
    let mut r = Q::one();
    for i in 0..k {
        r *= x + int(i as i64);
    }
    r
}

fn factorial(k: usize) -> Q {
    (1..=k as i64).fold(Q::one(), |acc, i| acc * int(i))
}

fn sign(e: usize) -> Q {
    if e % 2 == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> Q {
    let num: i64 = rng.random_range(-10_000..=10_000);
    let den: i64 = rng.random_range(1..=10_000);
    Q::new(BigInt::from(num), BigInt::from(den))
}

fn avoids_poles(v: &Q, upto: usize) -> bool {
    // keeps y + i, 1 − y, 1 − x − y away from zero
    (0..=upto as i64).all(|i| !(v + int(i)).is_zero()) && !(int(1) - v).is_zero()
}

fn partial_fraction(x: &Q, y: &Q, n: usize, shift: usize) -> (Q, Q) {
    let mut lhs = Q::zero();
    for i in 0..=n {
        lhs += sign(i) * pow(&(x - int(i as i64)), n + shift)
            / (factorial(i) * factorial(n - i) * (y + int(i as i64)));
    }
    let mut rhs = pow(&(x + y), n + shift) / rising(y, n + 1);
    if shift == 1 {
        rhs -= Q::one();
    }
    (lhs, rhs)
}

fn triple_sum(x: &Q, y: &Q, z: &Q, l: usize) -> (Q, Q) {
    let mut lhs = Q::zero();
    for k in 1..=l {
        for m in 0..k {
            for j in 0..=k + 1 {
                lhs += sign(j + m) * rising(x, k - m) * rising(y, m)
                    / (factorial(j) * factorial(k + 1 - j))
                    * pow(&(z + int(m as i64) - int(j as i64) + int(1)), l + 1);
            }
        }
    }
    let one = Q::one();
    let rhs = pow(z, l + 1) / (&one - y) - pow(&(x + z), l + 1) / (&one - x - y)
        + x * pow(&(&one - y + z), l + 1) / ((&one - y) * (&one - x - y));
    (lhs, rhs)
}

fn operator_sum(n: &Q, dx: &Q, dy: &Q, m_max: usize, l: usize) -> (Q, Q) {
    let mut lhs = Q::zero();
    for k in 1..=m_max {
        for m in 0..k {
            for j in 0..=k + 1 {
                lhs += sign(j + m) / (factorial(j) * factorial(k + 1 - j))
                    * rising(&(dx - n), k - m)
                    * rising(&(dy + n + int(1)), m)
                    * pow(&(n + int(m as i64) - int(j as i64) + int(1)), l + 1);
            }
        }
    }
    let mut rhs = Q::zero();
    let neg_dy = -dy.clone();
    for i in 0..=l {
        rhs += pow(dx, l - i) * pow(&neg_dy, i) - pow(n, l - i) * pow(&neg_dy, i);
    }
    (lhs, rhs)
}

/// Checks the identities exactly at `samples` random rational points for
/// each order up to `order_max`.
pub fn check_exact_identities(ids: &[Identity], order_max: usize, samples: usize, seed: u64) -> Vec<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &id in ids {
        let mut cases = 0;
        let mut failures = Vec::new();
        for order in 0..=order_max {
            for _ in 0..samples {
                let (x, y, z) = loop {
                    let x = random_rational(&mut rng);
                    let y = random_rational(&mut rng);
                    let z = random_rational(&mut rng);
                    let xy = &x + &y;
                    if avoids_poles(&y, order_max + 1) && !(int(1) - &xy).is_zero() {
                        break (x, y, z);
                    }
                };
                let pairs: Vec<(Q, Q, String)> = match id {
                    Identity::PartialFraction => {
                        let (l, r) = partial_fraction(&x, &y, order, 0);
                        vec![(l, r, format!("n={order}"))]
                    }
                    Identity::PartialFractionShifted => {
                        let (l, r) = partial_fraction(&x, &y, order, 1);
                        vec![(l, r, format!("n={order}"))]
                    }
                    Identity::TripleSum => {
                        let (l, r) = triple_sum(&x, &y, &z, order);
                        vec![(l, r, format!("l={order}"))]
                    }
                    Identity::OperatorSum => {
                        let m_max = order.max(1);
                        (0..=m_max)
                            .map(|l| {
                                let (a, b) = operator_sum(&z, &x, &y, m_max, l);
                                (a, b, format!("M={m_max} l={l}"))
                            })
                            .collect()
                    }
                };
                for (l, r, label) in pairs {
                    cases += 1;
                    if l != r {
                        failures.push(format!("{label} at x={x} y={y} z={z}: diff {}", (l - r).abs()));
                    }
                }
            }
        }
        out.push(IdentityReport { identity: id, cases, failures });
    }
    out
}
