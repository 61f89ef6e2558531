//! Exact counting kernels on checked 128-bit integers.
//!
//! Every field value in the crate is a count of tuples or subsets, so all
//! arithmetic here is exact and overflow is reported instead of wrapping.

use crate::error::{Error, Result};

/// A nonnegative exact count.
pub type Count = u128;

/// Largest `k` with `k!` representable as [`Count`].
pub const MAX_FACTORIAL_ARG: usize = 34;

/// `m (m-1) ... (m-k+1)`; zero when `m < k`, one when `k = 0`.
pub fn falling_factorial(m: u64, k: u64) -> Result<Count> {
    if k > m {
        return Ok(0);
    }
    let mut acc: Count = 1;
    for j in 0..k {
        acc = acc
            .checked_mul(Count::from(m - j))
            .ok_or(Error::Overflow("falling_factorial"))?;
    }
    Ok(acc)
}

fn gcd(mut a: Count, mut b: Count) -> Count {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Binomial coefficient `C(a, b)`, zero when `b > a`.
///
/// Multiplicative formula; each step divides out the common factor with the
/// new denominator first so the intermediate never exceeds the final width
/// by more than necessary.
pub fn binomial(a: u64, b: u64) -> Result<Count> {
    if b > a {
        return Ok(0);
    }
    let b = b.min(a - b);
    let mut acc: Count = 1;
    for i in 0..b {
        let num = Count::from(a - i);
        let den = Count::from(i + 1);
        let g = gcd(acc, den);
        // (den / g) divides num because acc * num is divisible by den.
        let reduced = num / (den / g);
        acc = (acc / g)
            .checked_mul(reduced)
            .ok_or(Error::Overflow("binomial"))?;
    }
    Ok(acc)
}

/// Natural log of `C(a, b)` through the log-gamma function.
pub fn log_binomial(a: u64, b: u64) -> Result<f64> {
    if b > a {
        return Err(Error::Domain(format!("log_binomial({a}, {b}) with b > a")));
    }
    if b == 0 || b == a {
        return Ok(0.0);
    }
    use statrs::function::gamma::ln_gamma;
    let (a, b) = (a as f64, b as f64);
    Ok(ln_gamma(a + 1.0) - ln_gamma(b + 1.0) - ln_gamma(a - b + 1.0))
}

/// Precomputed `k!` for `k` up to a construction-time limit.
#[derive(Debug, Clone)]
pub struct FactorialTable {
    values: Vec<Count>,
}

impl FactorialTable {
    pub fn new(max_k: usize) -> Result<Self> {
        if max_k > MAX_FACTORIAL_ARG {
            return Err(Error::Overflow("factorial table"));
        }
        let mut values = Vec::with_capacity(max_k + 1);
        let mut acc: Count = 1;
        values.push(acc);
        for k in 1..=max_k {
            acc *= k as Count;
            values.push(acc);
        }
        Ok(FactorialTable { values })
    }

    pub fn get(&self, k: usize) -> Result<Count> {
        self.values
            .get(k)
            .copied()
            .ok_or(Error::Overflow("factorial"))
    }
}

/// `k!`, checked.
pub fn factorial(k: u64) -> Result<Count> {
    falling_factorial(k, k)
}
