//! λ-clustered jitter sequences `ε_k = θ_k + λ` on a finite index box.
//!
//! `θ` is stored only on the box and is zero outside it. Generated values
//! (both `θ` and random `λ`) are quantized to multiples of `2^-32`, which
//! makes `ε_k - λ` recover `θ_k` bit-exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{DilationScheme, IndexBox};

const QUANTUM: f64 = 1.0 / 4_294_967_296.0;
/// Stream id reserved for drawing `λ`; index keys never produce it in practice.
const LAMBDA_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSequence {
    index_box: IndexBox,
    lambda: Vec<f64>,
    /// Row-major over `index_box`, `d` components per index.
    theta: Vec<f64>,
    alpha: f64,
}

impl PerturbationSequence {
    pub fn new(index_box: IndexBox, lambda: Vec<f64>, theta: Vec<f64>, alpha: f64) -> Result<Self> {
        let d = index_box.dimension();
        Error::check_dim(d, lambda.len())?;
        Error::check_dim(index_box.len() * d, theta.len())?;
        validate_alpha(alpha)?;
        if lambda.iter().chain(&theta).any(|v| !v.is_finite()) {
            return Err(Error::Argument("perturbation entries must be finite".into()));
        }
        Ok(Self {
            index_box,
            lambda,
            theta,
            alpha,
        })
    }

    /// `θ ≡ 0`, `λ = 0`: the unperturbed operator.
    pub fn zero(index_box: IndexBox, alpha: f64) -> Result<Self> {
        let d = index_box.dimension();
        let n = index_box.len() * d;
        Self::new(index_box, vec![0.0; d], vec![0.0; n], alpha)
    }

    /// `θ ≡ 0` with constant offset `λ`.
    pub fn constant(index_box: IndexBox, lambda: Vec<f64>, alpha: f64) -> Result<Self> {
        let n = index_box.len() * index_box.dimension();
        Self::new(index_box, lambda, vec![0.0; n], alpha)
    }

    /// Builds from sparse `(k, θ_k)` entries; unlisted indices get `θ = 0`.
    pub fn from_entries(
        index_box: IndexBox,
        lambda: Vec<f64>,
        entries: &[(Vec<i64>, Vec<f64>)],
        alpha: f64,
    ) -> Result<Self> {
        let d = index_box.dimension();
        let mut theta = vec![0.0; index_box.len() * d];
        for (k, t) in entries {
            Error::check_dim(d, t.len())?;
            let off = index_box
                .offset(k)
                .ok_or_else(|| Error::Argument(format!("index {k:?} outside the box")))?;
            theta[off * d..(off + 1) * d].copy_from_slice(t);
        }
        Self::new(index_box, lambda, theta, alpha)
    }

    pub fn dimension(&self) -> usize {
        self.index_box.dimension()
    }

    pub fn index_box(&self) -> &IndexBox {
        &self.index_box
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta_values(&self) -> &[f64] {
        &self.theta
    }

    /// `θ_k`, zero outside the stored box.
    pub fn theta(&self, k: &[i64]) -> Vec<f64> {
        let d = self.dimension();
        match self.index_box.offset(k) {
            Some(off) => self.theta[off * d..(off + 1) * d].to_vec(),
            None => vec![0.0; d],
        }
    }

    pub(crate) fn theta_at_offset(&self, off: usize) -> &[f64] {
        let d = self.dimension();
        &self.theta[off * d..(off + 1) * d]
    }

    /// `ε_k = θ_k + λ`.
    pub fn epsilon(&self, k: &[i64]) -> Vec<f64> {
        self.theta(k).iter().zip(&self.lambda).map(|(t, l)| t + l).collect()
    }

    /// Recovers `θ` from `ε` over the whole box using the stored `λ`.
    pub fn decompose(&self) -> Vec<f64> {
        self.index_box
            .iter()
            .flat_map(|k| {
                self.epsilon(&k)
                    .into_iter()
                    .zip(&self.lambda)
                    .map(|(e, l)| e - l)
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            index_box: self.index_box.clone(),
            lambda: self.lambda.clone(),
            theta: self.theta.iter().map(|t| c * t).collect(),
            alpha: self.alpha,
        }
    }

    /// `(Σ_k ||θ_k||₂^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let d = self.dimension();
        let sum: f64 = self
            .theta
            .chunks(d)
            .map(|t| t.iter().map(|v| v * v).sum::<f64>().sqrt())
            .filter(|&n| n > 0.0)
            .map(|n| n.powf(p))
            .sum();
        if sum == 0.0 {
            0.0
        } else {
            sum.powf(1.0 / p)
        }
    }

    /// `||θ||_{ℓ^α}`.
    pub fn lp_alpha_norm(&self) -> f64 {
        self.lp_norm(self.alpha)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    /// `max{ ||θ||_{ℓ²}, ||θ||_{ℓ^α}^{α/2} }`.
    pub fn mixed_norm(&self) -> f64 {
        self.l2_norm().max(self.lp_alpha_norm().powf(self.alpha / 2.0))
    }

    pub fn lambda_norm(&self) -> f64 {
        self.lambda.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Upper bound `𝒟_N(X)` on the number of sample points
    /// `M^{-N}(k + ε_k)` in any translate of the unit cube.
    pub fn relative_separation_bound(&self, scheme: &DilationScheme, level: u32) -> Result<u64> {
        Error::check_dim(scheme.dimension(), self.dimension())?;
        Ok(relative_separation_bound(
            self.dimension(),
            self.lambda_norm(),
            self.l2_norm(),
            scheme.m(),
            level,
        ))
    }
}

/// `(⌊√d ||λ||₂ + √d ||θ||_{ℓ²} + 2√d m^N⌋)^d`.
pub fn relative_separation_bound(d: usize, lambda_l2: f64, theta_l2: f64, m: f64, level: u32) -> u64 {
    let rd = (d as f64).sqrt();
    let base = (rd * lambda_l2 + rd * theta_l2 + 2.0 * rd * m.powi(level as i32)).floor();
    (base as u64).pow(d as u32)
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::constraint("0 < alpha < 2", format!("alpha = {alpha}")))
    }
}

/// Checks `0 < α < min{2s − d, 2}` and `s > d/2`.
pub fn validate_pairing(alpha: f64, s: f64, d: usize) -> Result<()> {
    let d = d as f64;
    if s <= d / 2.0 {
        return Err(Error::constraint("s > d/2", format!("s = {s}, d = {d}")));
    }
    validate_alpha(alpha)?;
    if alpha >= 2.0 * s - d {
        return Err(Error::constraint(
            "alpha < 2s - d",
            format!("alpha = {alpha}, 2s - d = {}", 2.0 * s - d),
        ));
    }
    Ok(())
}

/// Smallest scale level with `N ≥ (2s + 2 − α)/(2 − α) · log_m d`.
///
/// Only the constraints needed for the expression are checked here
/// (`s > d/2`, `0 < α < 2`, `m > 1`); `α < 2s − d` belongs to
/// [`validate_pairing`].
pub fn min_scale_level(s: f64, alpha: f64, d: usize, m: f64) -> Result<u32> {
    if d == 0 {
        return Err(Error::Argument("dimension must be positive".into()));
    }
    if s <= d as f64 / 2.0 {
        return Err(Error::constraint("s > d/2", format!("s = {s}, d = {d}")));
    }
    validate_alpha(alpha)?;
    if !(m > 1.0) {
        return Err(Error::constraint("m > 1", format!("m = {m}")));
    }
    let value = (2.0 * s + 2.0 - alpha) / (2.0 - alpha) * (d as f64).ln() / m.ln();
    // Absorb rounding so that exact integers are not bumped up.
    Ok((value - 1e-12).ceil().max(0.0) as u32)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn index_stream(k: &[i64]) -> u64 {
    k.iter().fold(0x5851_F42D_4C95_7F2D, |h, &c| mix64(h ^ c as u64)) & !(1 << 63)
}

fn quantized_uniform(rng: &mut ChaCha8Rng, delta: f64) -> f64 {
    let u: f64 = rng.random();
    let x = delta * (2.0 * u - 1.0);
    // `+ 0.0` folds -0.0 into +0.0
    (x / QUANTUM).trunc() * QUANTUM + 0.0
}

/// `λ` uniform on `[-δ, δ]^d`, keyed by `seed` alone.
pub fn draw_uniform_lambda(d: usize, delta: f64, seed: u64) -> Result<Vec<f64>> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::Argument(format!("lambda delta must be >= 0, got {delta}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(LAMBDA_STREAM);
    Ok((0..d).map(|_| quantized_uniform(&mut rng, delta)).collect())
}

/// `θ_k` i.i.d. uniform on `[-δ, δ]^d`. Each index gets its own ChaCha
/// stream keyed by `(seed, k)`, so the values do not depend on iteration
/// order, box shape, or thread count.
pub fn generate_uniform_jitter(
    index_box: IndexBox,
    delta: f64,
    lambda: Vec<f64>,
    seed: u64,
    alpha: f64,
) -> Result<PerturbationSequence> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::Argument(format!("jitter delta must be >= 0, got {delta}")));
    }
    let d = index_box.dimension();
    let mut theta = vec![0.0; index_box.len() * d];
    if delta > 0.0 {
        use rayon::prelude::*;
        theta.par_chunks_mut(d).enumerate().for_each(|(off, slot)| {
            let k = index_box.index_at(off);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index_stream(&k));
            for v in slot.iter_mut() {
                *v = quantized_uniform(&mut rng, delta);
            }
        });
    }
    PerturbationSequence::new(index_box, lambda, theta, alpha)
}
