use rayon::prelude::*;

use crate::error::{Error, Result};

/// Partial lattice sum plus a certified upper bound on what was left out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSum {
    pub value: f64,
    pub remainder: f64,
}

impl TailSum {
    pub fn upper(&self) -> f64 {
        self.value + self.remainder
    }
}

/// Closed-form bound on `Σ_{||j||₂ ≥ m^J} ||j||₂^{-2s}`:
/// `d^{1+s−d} 2^{2s} [(2s−d+1)/(2s−d) + 2s/(2s−1)] m^{−J(2s−d)}`.
pub fn tail_sum_bound(j: f64, s: f64, d: usize, m: f64) -> Result<f64> {
    let df = d as f64;
    check_tail_params(s, d, m)?;
    if 2.0 * s <= 1.0 {
        return Err(Error::constraint("2s > 1", format!("s = {s}")));
    }
    let threshold = df.ln() / m.ln();
    if j < threshold - 1e-12 {
        return Err(Error::constraint(
            "J >= log_m d",
            format!("J = {j}, log_m d = {threshold}"),
        ));
    }
    let bracket = (2.0 * s - df + 1.0) / (2.0 * s - df) + 2.0 * s / (2.0 * s - 1.0);
    Ok(df.powf(1.0 + s - df) * 2f64.powf(2.0 * s) * bracket * m.powf(-j * (2.0 * s - df)))
}

fn check_tail_params(s: f64, d: usize, m: f64) -> Result<()> {
    if d == 0 || d > 3 {
        return Err(Error::Argument(format!("lattice dimension must be 1..=3, got {d}")));
    }
    if !(m > 1.0) {
        return Err(Error::constraint("m > 1", format!("m = {m}")));
    }
    if 2.0 * s <= d as f64 {
        return Err(Error::Divergent(format!(
            "Σ ||j||^(-2s) diverges in dimension {d} for s = {s}"
        )));
    }
    Ok(())
}

/// Direct summation of `||j||₂^{-2s}` over `m^J ≤ ||j||₂ ≤ radius`, with an
/// integral-test remainder for `||j||₂ > radius`.
///
/// The remainder assigns each lattice point its unit cube; on that cube
/// `||x|| − √d/2 ≤ ||j||`, so the tail is at most
/// `∫_{||x|| ≥ R − √d/2} (||x|| − √d/2)^{-2s} dx`, evaluated in closed form.
pub fn tail_sum_bruteforce(j: f64, s: f64, d: usize, m: f64, radius: u64) -> Result<TailSum> {
    check_tail_params(s, d, m)?;
    let r0 = m.powf(j);
    let h = (d as f64).sqrt() / 2.0;
    let rf = radius as f64;
    if rf <= r0.max(2.0 * h) {
        return Err(Error::Argument(format!(
            "radius {radius} must exceed both m^J = {r0} and √d = {}",
            2.0 * h
        )));
    }
    let r0_sq = r0 * r0;
    let r_sq = radius as i128 * radius as i128;
    let term = |n: i128| -> f64 {
        let nf = n as f64;
        if n == 0 || nf < r0_sq || n > r_sq {
            0.0
        } else {
            nf.powf(-s)
        }
    };
    let r = radius as i64;

    let value = match d {
        1 => {
            // smallest terms first
            let start = r0.ceil().max(1.0) as i64;
            let mut acc = 0.0;
            for k in (start..=r).rev() {
                acc += term(k as i128 * k as i128);
            }
            2.0 * acc
        }
        2 => {
            let rows: Vec<f64> = (-r..=r)
                .into_par_iter()
                .map(|a| {
                    let a2 = a as i128 * a as i128;
                    let span = isqrt(r_sq - a2);
                    (-span..=span).map(|b| term(a2 + b as i128 * b as i128)).sum()
                })
                .collect();
            rows.iter().sum()
        }
        _ => {
            let slabs: Vec<f64> = (-r..=r)
                .into_par_iter()
                .map(|a| {
                    let a2 = a as i128 * a as i128;
                    let span_b = isqrt(r_sq - a2);
                    let mut acc = 0.0;
                    for b in -span_b..=span_b {
                        let ab = a2 + b as i128 * b as i128;
                        let span_c = isqrt(r_sq - ab);
                        for c in -span_c..=span_c {
                            acc += term(ab + c as i128 * c as i128);
                        }
                    }
                    acc
                })
                .collect();
            slabs.iter().sum()
        }
    };

    Ok(TailSum {
        value,
        remainder: shell_remainder(s, d, rf, h),
    })
}

/// `ω_d ∫_{R−2h}^∞ (u + h)^{d−1} u^{−2s} du`, expanded binomially.
fn shell_remainder(s: f64, d: usize, radius: f64, h: f64) -> f64 {
    let surface = match d {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    };
    let base = radius - 2.0 * h;
    let mut total = 0.0;
    let mut binom = 1.0;
    for i in 0..d {
        let p = i as f64 + 1.0 - 2.0 * s;
        total += binom * h.powi((d - 1 - i) as i32) * base.powf(p) / (-p);
        binom = binom * (d - 1 - i) as f64 / (i + 1) as f64;
    }
    surface * total
}

fn isqrt(n: i128) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x as i64
}
