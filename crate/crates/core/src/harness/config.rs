use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::generators::Generator;
use crate::lattice::{DilationScheme, RealBox};

/// Padding ratio of the sinc index box over the domain half-width.
pub const SINC_BOX_RATIO: f64 = 89.0 / 40.0;
/// Default error-grid resolution is `GRID_OVERSAMPLING · m^N` nodes per unit.
pub const GRID_OVERSAMPLING: f64 = 4.0;
/// The default resolution is lowered, with a warning, to keep grids below this.
pub const DEFAULT_GRID_CAP: f64 = 4_194_304.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    /// Generator id, e.g. `"sinc"`, `"bspline2"`, `"tensor:bspline2^2"`.
    pub generator: String,
    /// Integer dilation matrix rows; `2I` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilation: Option<Vec<Vec<i64>>>,
    /// Test-function id, e.g. `"exp-abs"`.
    pub function: String,
    pub domain: RealBox,
    pub levels: Vec<u32>,
    #[serde(default)]
    pub jitter: JitterSpec,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub seed: u64,
    /// Error-grid nodes per unit; `4 m^N` (capped) when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    /// Sinc truncation radius in `x` units; when omitted the index box is the
    /// domain padded to `89/40` of its half-width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Sobolev exponent `s` used for `N_min` warnings and the predicted rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sobolev_s: Option<f64>,
    /// Source smoothness `ς` for the predicted rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varsigma: Option<f64>,
}

fn default_trials() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JitterSpec {
    /// Only `"uniform"`: `θ_k` i.i.d. uniform on `[-δ, δ]^d`.
    #[serde(rename = "type", default = "default_jitter_type")]
    pub kind: String,
    /// One `δ` or a list of them.
    #[serde(default)]
    pub delta: Deltas,
    #[serde(default)]
    pub lambda: LambdaMode,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_jitter_type() -> String {
    "uniform".into()
}

fn default_alpha() -> f64 {
    0.5
}

impl Default for JitterSpec {
    fn default() -> Self {
        Self {
            kind: default_jitter_type(),
            delta: Deltas::default(),
            lambda: LambdaMode::default(),
            alpha: default_alpha(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Deltas {
    One(f64),
    Many(Vec<f64>),
}

impl Default for Deltas {
    fn default() -> Self {
        Deltas::One(0.0)
    }
}

impl Deltas {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Deltas::One(d) => vec![*d],
            Deltas::Many(v) => v.clone(),
        }
    }
}

/// How the cluster offset `λ` is chosen for each trial.
///
/// In JSON: `"zero"`, `"uniform"` (uniform on `[-δ, δ]^d` with the row's `δ`),
/// `"uniform:<w>"` (uniform on `[-w, w]^d`), or an explicit vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum LambdaMode {
    Zero,
    #[default]
    UniformDelta,
    Uniform(f64),
    Fixed(Vec<f64>),
}

impl Serialize for LambdaMode {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LambdaMode::Zero => ser.serialize_str("zero"),
            LambdaMode::UniformDelta => ser.serialize_str("uniform"),
            LambdaMode::Uniform(w) => ser.serialize_str(&format!("uniform:{w}")),
            LambdaMode::Fixed(v) => v.serialize(ser),
        }
    }
}

impl<'de> Deserialize<'de> for LambdaMode {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Vector(Vec<f64>),
        }
        match Raw::deserialize(de)? {
            Raw::Vector(v) => Ok(LambdaMode::Fixed(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for LambdaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(LambdaMode::Zero),
            "uniform" => Ok(LambdaMode::UniformDelta),
            other => {
                if let Some(w) = other.strip_prefix("uniform:") {
                    let w: f64 = w
                        .parse()
                        .map_err(|_| Error::Config(format!("bad lambda width in {other:?}")))?;
                    if !(w >= 0.0 && w.is_finite()) {
                        return Err(Error::Config(format!("lambda width must be >= 0, got {w}")));
                    }
                    Ok(LambdaMode::Uniform(w))
                } else {
                    let v: Vec<f64> = other
                        .split(',')
                        .map(|t| t.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Error::Config(format!("unknown lambda mode {other:?}")))?;
                    Ok(LambdaMode::Fixed(v))
                }
            }
        }
    }
}

/// A config with every id resolved.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub generator: Generator,
    pub scheme: DilationScheme,
    pub function: TestFunction,
    pub deltas: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Parses ids and checks the structural invariants. Every failure is a
    /// [`Error::Config`].
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let cfg_err = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        let generator: Generator = self.generator.parse().map_err(cfg_err)?;
        let function: TestFunction = self.function.parse().map_err(cfg_err)?;
        let d = generator.dimension();
        let scheme = match &self.dilation {
            Some(rows) => DilationScheme::certify_isotropic(rows),
            None => DilationScheme::dyadic(d),
        }
        .map_err(cfg_err)?;
        for (what, got) in [
            ("dilation matrix", scheme.dimension()),
            ("test function", function.dimension()),
            ("domain", self.domain.dimension()),
        ] {
            if got != d {
                return Err(Error::Config(format!(
                    "{what} has dimension {got} but generator {} has dimension {d}",
                    self.generator
                )));
            }
        }
        if self.levels.is_empty() {
            return Err(Error::Config("levels must not be empty".into()));
        }
        let mut sorted = self.levels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.levels.len() {
            return Err(Error::Config(format!("levels contain duplicates: {:?}", self.levels)));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.jitter.kind != "uniform" {
            return Err(Error::Config(format!(
                "unknown jitter type {:?}; only \"uniform\" is supported",
                self.jitter.kind
            )));
        }
        let deltas = self.jitter.delta.values();
        if deltas.is_empty() || deltas.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Error::Config(format!(
                "jitter deltas must be finite and >= 0, got {deltas:?}"
            )));
        }
        if (1..deltas.len()).any(|i| deltas[..i].contains(&deltas[i])) {
            return Err(Error::Config(format!("jitter deltas contain duplicates: {deltas:?}")));
        }
        if !(self.jitter.alpha > 0.0 && self.jitter.alpha < 2.0) {
            return Err(Error::Config(format!(
                "jitter alpha must lie in (0, 2), got {}",
                self.jitter.alpha
            )));
        }
        if let LambdaMode::Fixed(v) = &self.jitter.lambda {
            if v.len() != d || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!(
                    "lambda vector {v:?} must have {d} finite entries"
                )));
            }
        }
        if let Some(r) = self.resolution {
            let max_level = *self.levels.iter().max().unwrap();
            let needed = 2.0 * scheme.m().powi(max_level as i32);
            if !(r >= needed && r.is_finite()) {
                return Err(Error::Config(format!(
                    "resolution {r} is below 2·m^maxN = {needed} nodes per unit"
                )));
            }
        }
        if let Some(r) = self.truncation_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("truncation radius must be positive, got {r}")));
            }
        }
        Ok(ResolvedConfig {
            generator,
            scheme,
            function,
            deltas,
        })
    }

    /// Sinc truncation radius in `x` units.
    pub fn sinc_radius_x(&self) -> f64 {
        self.truncation_radius.unwrap_or_else(|| {
            let half = self
                .domain
                .lo
                .iter()
                .zip(&self.domain.hi)
                .map(|(a, b)| (b - a) / 2.0)
                .fold(0.0, f64::max);
            (SINC_BOX_RATIO - 1.0) * half
        })
    }

    /// Error-grid resolution at level `N`, with a warning when the default
    /// had to be capped.
    pub fn resolution_at(&self, m: f64, level: u32) -> (f64, Option<String>) {
        if let Some(r) = self.resolution {
            return (r, None);
        }
        let wanted = GRID_OVERSAMPLING * m.powi(level as i32);
        let volume = self.domain.volume();
        let d = self.domain.dimension() as f64;
        let cap = (DEFAULT_GRID_CAP / volume).powf(1.0 / d);
        if wanted > cap {
            (
                cap,
                Some(format!(
                    "N = {level}: error grid resolution capped at {cap:.3} nodes per unit (wanted {wanted})"
                )),
            )
        } else {
            (wanted, None)
        }
    }
}
