//! Dilation matrices and sample-lattice geometry.

use std::collections::BTreeSet;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::Generator;

/// Relative tolerance for equal eigenvalue moduli.
pub const ISOTROPY_TOLERANCE: f64 = 1e-9;
/// Largest index box the library will allocate samples for.
pub const MAX_INDEX_BOX_LEN: u128 = 20_000_000;
const MAX_DIMENSION: usize = 3;

/// An isotropic expanding integer matrix `M` with `m = |det M|^{1/d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationScheme {
    matrix: Vec<i64>,
    dimension: usize,
    det: i64,
    m: f64,
}

impl DilationScheme {
    /// Validates `rows` as an expanding isotropic dilation matrix.
    pub fn certify_isotropic(rows: &[Vec<i64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 || d > MAX_DIMENSION {
            return Err(Error::Argument(format!(
                "dilation matrix dimension must be 1..={MAX_DIMENSION}, got {d}"
            )));
        }
        for row in rows {
            Error::check_dim(d, row.len())?;
        }
        let matrix: Vec<i64> = rows.iter().flatten().copied().collect();
        let det = int_det(&matrix, d)
            .and_then(|v| i64::try_from(v).ok())
            .ok_or_else(|| Error::Argument("dilation determinant overflows".into()))?;

        let moduli = eigenvalue_moduli(&matrix, d);
        let m = (det.unsigned_abs() as f64).powf(1.0 / d as f64);
        if let Some(&small) = moduli.iter().find(|&&r| r <= 1.0) {
            return Err(Error::NotExpanding { modulus: small });
        }
        if det.unsigned_abs() < 2 {
            return Err(Error::NotExpanding { modulus: m });
        }
        if moduli.iter().any(|r| (r - m).abs() > ISOTROPY_TOLERANCE * m) {
            return Err(Error::NotIsotropic { moduli });
        }
        Ok(Self {
            matrix,
            dimension: d,
            det,
            m,
        })
    }

    /// `M = 2I` in dimension `d`.
    pub fn dyadic(d: usize) -> Result<Self> {
        let rows: Vec<Vec<i64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 2 } else { 0 }).collect())
            .collect();
        Self::certify_isotropic(&rows)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `|det M|^{1/d}`.
    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.matrix.chunks(self.dimension).map(|r| r.to_vec()).collect()
    }

    /// Precomputed `M^N` and `M^{-N}` for repeated application.
    pub fn scale(&self, level: i64) -> ScaleMap {
        let d = self.dimension;
        let n = level.unsigned_abs();
        let (forward, inverse) = match int_power(&self.matrix, d, n) {
            Some(p) => {
                let adj = int_adjugate(&p, d);
                let det = det_i128(&p, d);
                match (adj, det) {
                    (Some(adj), Some(det)) => (
                        p.iter().map(|&v| v as f64).collect::<Vec<_>>(),
                        Inverse::Rational {
                            adjugate: adj.iter().map(|&v| v as f64).collect(),
                            det: det as f64,
                        },
                    ),
                    _ => float_power(&self.matrix, d, n),
                }
            }
            None => float_power(&self.matrix, d, n),
        };
        let (forward, inverse) = if level >= 0 {
            (LinearMap::Matrix(forward), inverse)
        } else {
            // M^{-|N|} forward, M^{|N|} inverse.
            (inverse.into_linear(), Inverse::Matrix(forward))
        };
        ScaleMap {
            dimension: d,
            forward,
            inverse: inverse.into_linear(),
        }
    }

    /// `M^N v` for any integer `N`.
    pub fn dilation_power_apply(&self, level: i64, v: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.dimension, v.len())?;
        Ok(self.scale(level).forward(v))
    }

    /// `M^{-N}(k + ε_k)`.
    pub fn sample_point(&self, level: u32, k: &[i64], eps: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.dimension, k.len())?;
        Error::check_dim(self.dimension, eps.len())?;
        let shifted: Vec<f64> = k.iter().zip(eps).map(|(&ki, &e)| ki as f64 + e).collect();
        Ok(self.scale(level as i64).inverse(&shifted))
    }

    /// Smallest integer box containing every `k` for which `φ(M^N x - k)`
    /// can be nonzero for some `x` in `domain` (closed generator support).
    pub fn index_box_for_domain(&self, level: u32, domain: &RealBox, generator: &Generator) -> Result<IndexBox> {
        let d = self.dimension;
        Error::check_dim(d, domain.dimension())?;
        Error::check_dim(d, generator.dimension())?;
        let map = self.scale(level as i64);
        let (lo, hi) = map.image_bounds(domain);
        let mut klo = Vec::with_capacity(d);
        let mut khi = Vec::with_capacity(d);
        for i in 0..d {
            let (a, b) = generator.axis_window(i);
            let low = lo[i] - b;
            let high = hi[i] - a;
            klo.push((low - 1e-9 * low.abs().max(1.0)).ceil() as i64);
            khi.push((high + 1e-9 * high.abs().max(1.0)).floor() as i64);
        }
        let bx = IndexBox::new(klo, khi)?;
        bx.guard(MAX_INDEX_BOX_LEN, "sample index box")?;
        Ok(bx)
    }

    /// Representatives of `[(Mᵀ)^{-1} ℤ^d] / ℤ^d` in `[0, 1)^d`.
    pub fn coset_representatives(&self) -> Vec<CosetRep> {
        let d = self.dimension;
        let transpose: Vec<i128> = (0..d * d)
            .map(|idx| self.matrix[(idx % d) * d + idx / d] as i128)
            .collect();
        let adj = int_adjugate(&transpose, d).expect("small matrix adjugate");
        let det = self.det as i128;
        let denom = det.unsigned_abs() as i128;
        let sign = det.signum();

        let mut seen = BTreeSet::new();
        let mut n = vec![0i128; d];
        loop {
            let numer: Vec<i64> = (0..d)
                .map(|i| {
                    let v: i128 = (0..d).map(|j| adj[i * d + j] * n[j]).sum::<i128>() * sign;
                    v.rem_euclid(denom) as i64
                })
                .collect();
            seen.insert(numer);
            // odometer over [0, denom)^d
            let mut axis = 0;
            loop {
                if axis == d {
                    return seen
                        .into_iter()
                        .map(|numer| CosetRep {
                            numer,
                            denom: denom as i64,
                        })
                        .collect();
                }
                n[axis] += 1;
                if n[axis] < denom {
                    break;
                }
                n[axis] = 0;
                axis += 1;
            }
        }
    }
}

/// A rational point `numer / denom`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CosetRep {
    pub numer: Vec<i64>,
    pub denom: i64,
}

impl CosetRep {
    pub fn to_f64(&self) -> Vec<f64> {
        self.numer.iter().map(|&n| n as f64 / self.denom as f64).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.numer.iter().all(|&n| n == 0)
    }
}

#[derive(Debug, Clone)]
enum LinearMap {
    Matrix(Vec<f64>),
    /// `adjugate · v / det`, the exact-integer route for inverse powers.
    Rational {
        adjugate: Vec<f64>,
        det: f64,
    },
}

enum Inverse {
    Matrix(Vec<f64>),
    Rational { adjugate: Vec<f64>, det: f64 },
}

impl Inverse {
    fn into_linear(self) -> LinearMap {
        match self {
            Inverse::Matrix(m) => LinearMap::Matrix(m),
            Inverse::Rational { adjugate, det } => LinearMap::Rational { adjugate, det },
        }
    }
}

impl LinearMap {
    fn apply(&self, d: usize, v: &[f64]) -> Vec<f64> {
        match self {
            LinearMap::Matrix(a) => mat_vec(a, d, v),
            LinearMap::Rational { adjugate, det } => mat_vec(adjugate, d, v).into_iter().map(|x| x / det).collect(),
        }
    }
}

/// `M^N` and `M^{-N}` for a fixed level.
#[derive(Debug, Clone)]
pub struct ScaleMap {
    dimension: usize,
    forward: LinearMap,
    inverse: LinearMap,
}

impl ScaleMap {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn forward(&self, v: &[f64]) -> Vec<f64> {
        self.forward.apply(self.dimension, v)
    }

    pub fn forward_into(&self, v: &[f64], out: &mut [f64]) {
        let d = self.dimension;
        match &self.forward {
            LinearMap::Matrix(a) => {
                for i in 0..d {
                    out[i] = (0..d).map(|j| a[i * d + j] * v[j]).sum();
                }
            }
            other => out.copy_from_slice(&other.apply(d, v)),
        }
    }

    pub fn inverse(&self, v: &[f64]) -> Vec<f64> {
        self.inverse.apply(self.dimension, v)
    }

    /// Per-axis bounds of the image of `domain` under the forward map.
    pub fn image_bounds(&self, domain: &RealBox) -> (Vec<f64>, Vec<f64>) {
        let d = self.dimension;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for corner in 0..(1usize << d) {
            let c: Vec<f64> = (0..d)
                .map(|i| {
                    if corner >> i & 1 == 0 {
                        domain.lo[i]
                    } else {
                        domain.hi[i]
                    }
                })
                .collect();
            let img = self.forward(&c);
            for i in 0..d {
                lo[i] = lo[i].min(img[i]);
                hi[i] = hi[i].max(img[i]);
            }
        }
        (lo, hi)
    }
}

/// Closed axis-aligned box in `ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl RealBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Error::check_dim(lo.len(), hi.len())?;
        if lo.is_empty() {
            return Err(Error::Argument("box must have at least one axis".into()));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Argument(format!("empty or non-finite box axis [{a}, {b}]")));
            }
        }
        Ok(Self { lo, hi })
    }

    /// `[-h, h]^d`.
    pub fn symmetric(half_width: f64, d: usize) -> Result<Self> {
        Self::new(vec![-half_width; d], vec![half_width; d])
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }
}

/// Per-axis closed integer ranges `[lo_i, hi_i]`, iterated row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexBox {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl IndexBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        Error::check_dim(lo.len(), hi.len())?;
        if lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Argument(format!("empty index box {lo:?}..{hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    pub fn cardinality(&self) -> u128 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a + 1) as u128).product()
    }

    pub fn len(&self) -> usize {
        self.cardinality() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn guard(&self, limit: u128, resource: &'static str) -> Result<()> {
        let count = self.cardinality();
        if count > limit {
            let shrink = (count as f64 / limit as f64).powf(1.0 / self.dimension() as f64);
            return Err(Error::InstanceTooLarge {
                resource,
                count,
                limit,
                suggestion: format!(
                    "shrink each axis of the domain by a factor of at least {shrink:.3} or lower the scale level"
                ),
            });
        }
        Ok(())
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| v >= a && v <= b)
    }

    /// Row-major position of `k`, or `None` outside the box.
    pub fn offset(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dimension() || !self.contains(k) {
            return None;
        }
        let mut off = 0usize;
        for i in 0..self.dimension() {
            off = off * self.extent(i) + (k[i] - self.lo[i]) as usize;
        }
        Some(off)
    }

    pub fn index_at(&self, mut offset: usize) -> Vec<i64> {
        let d = self.dimension();
        let mut k = vec![0i64; d];
        for i in (0..d).rev() {
            let e = self.extent(i);
            k[i] = self.lo[i] + (offset % e) as i64;
            offset /= e;
        }
        k
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(move |o| self.index_at(o))
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &IndexBox) -> Result<IndexBox> {
        Error::check_dim(self.dimension(), other.dimension())?;
        IndexBox::new(
            self.lo.iter().zip(&other.lo).map(|(a, b)| *a.min(b)).collect(),
            self.hi.iter().zip(&other.hi).map(|(a, b)| *a.max(b)).collect(),
        )
    }
}

fn mat_vec(a: &[f64], d: usize, v: &[f64]) -> Vec<f64> {
    (0..d).map(|i| (0..d).map(|j| a[i * d + j] * v[j]).sum()).collect()
}

fn int_det(a: &[i64], d: usize) -> Option<i128> {
    let a: Vec<i128> = a.iter().map(|&v| v as i128).collect();
    det_i128(&a, d)
}

fn det_i128(a: &[i128], d: usize) -> Option<i128> {
    match d {
        1 => Some(a[0]),
        2 => a[0].checked_mul(a[3])?.checked_sub(a[1].checked_mul(a[2])?),
        3 => {
            let minor = |r0: usize, r1: usize, c0: usize, c1: usize| -> Option<i128> {
                a[r0 * 3 + c0]
                    .checked_mul(a[r1 * 3 + c1])?
                    .checked_sub(a[r0 * 3 + c1].checked_mul(a[r1 * 3 + c0])?)
            };
            let t0 = a[0].checked_mul(minor(1, 2, 1, 2)?)?;
            let t1 = a[1].checked_mul(minor(1, 2, 0, 2)?)?;
            let t2 = a[2].checked_mul(minor(1, 2, 0, 1)?)?;
            t0.checked_sub(t1)?.checked_add(t2)
        }
        _ => None,
    }
}

fn int_adjugate(a: &[i128], d: usize) -> Option<Vec<i128>> {
    match d {
        1 => Some(vec![1]),
        2 => Some(vec![a[3], -a[1], -a[2], a[0]]),
        3 => {
            let mut adj = vec![0i128; 9];
            for i in 0..3 {
                for j in 0..3 {
                    // cofactor C_ji goes to adj[i][j]
                    let rows: Vec<usize> = (0..3).filter(|&r| r != j).collect();
                    let cols: Vec<usize> = (0..3).filter(|&c| c != i).collect();
                    let m = a[rows[0] * 3 + cols[0]]
                        .checked_mul(a[rows[1] * 3 + cols[1]])?
                        .checked_sub(a[rows[0] * 3 + cols[1]].checked_mul(a[rows[1] * 3 + cols[0]])?)?;
                    adj[i * 3 + j] = if (i + j) % 2 == 0 { m } else { -m };
                }
            }
            Some(adj)
        }
        _ => None,
    }
}

fn int_power(a: &[i64], d: usize, n: u64) -> Option<Vec<i128>> {
    let base: Vec<i128> = a.iter().map(|&v| v as i128).collect();
    let mut result: Vec<i128> = (0..d * d).map(|idx| if idx / d == idx % d { 1 } else { 0 }).collect();
    for _ in 0..n {
        let mut next = vec![0i128; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc: i128 = 0;
                for k in 0..d {
                    acc = acc.checked_add(result[i * d + k].checked_mul(base[k * d + j])?)?;
                }
                next[i * d + j] = acc;
            }
        }
        result = next;
    }
    // Keep entries where the adjugate products stay comfortably in range.
    if result.iter().any(|v| v.unsigned_abs() > 1u128 << 40) {
        return None;
    }
    Some(result)
}

/// Floating fallback for very large powers.
fn float_power(a: &[i64], d: usize, n: u64) -> (Vec<f64>, Inverse) {
    let base: Vec<f64> = a.iter().map(|&v| v as f64).collect();
    let mut p: Vec<f64> = (0..d * d)
        .map(|idx| if idx / d == idx % d { 1.0 } else { 0.0 })
        .collect();
    for _ in 0..n {
        let mut next = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                next[i * d + j] = (0..d).map(|k| p[i * d + k] * base[k * d + j]).sum();
            }
        }
        p = next;
    }
    let inv = nalgebra::DMatrix::from_row_slice(d, d, &p)
        .try_inverse()
        .expect("dilation powers are invertible");
    let inv_rows: Vec<f64> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| inv[(i, j)])
        .collect();
    (p, Inverse::Matrix(inv_rows))
}

fn eigenvalue_moduli(a: &[i64], d: usize) -> Vec<f64> {
    let f: Vec<f64> = a.iter().map(|&v| v as f64).collect();
    match d {
        1 => vec![f[0].abs()],
        2 => {
            let tr = f[0] + f[3];
            let det = f[0] * f[3] - f[1] * f[2];
            let disc = tr * tr - 4.0 * det;
            if disc < 0.0 {
                let r = det.sqrt();
                vec![r, r]
            } else {
                let sq = disc.sqrt();
                vec![((tr + sq) / 2.0).abs(), ((tr - sq) / 2.0).abs()]
            }
        }
        _ => Matrix3::from_row_slice(&f)
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quincunx() -> DilationScheme {
        DilationScheme::certify_isotropic(&[vec![1, 1], vec![1, -1]]).unwrap()
    }

    #[test]
    fn certify_examples() {
        let s = DilationScheme::certify_isotropic(&[vec![2]]).unwrap();
        assert_eq!(s.m(), 2.0);
        assert!((quincunx().m() - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!(matches!(
            DilationScheme::certify_isotropic(&[vec![2, 0], vec![0, 3]]),
            Err(Error::NotIsotropic { .. })
        ));
        assert!(matches!(
            DilationScheme::certify_isotropic(&[vec![1]]),
            Err(Error::NotExpanding { .. })
        ));
        assert!(matches!(
            DilationScheme::certify_isotropic(&[vec![1, 0], vec![0, 1]]),
            Err(Error::NotExpanding { .. })
        ));
        let three = DilationScheme::dyadic(3).unwrap();
        assert!((three.m() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn power_apply_examples() {
        let s = DilationScheme::dyadic(1).unwrap();
        assert_eq!(s.dilation_power_apply(3, &[1.0]).unwrap(), vec![8.0]);
        assert_eq!(s.dilation_power_apply(-1, &[3.0]).unwrap(), vec![1.5]);
        assert_eq!(quincunx().dilation_power_apply(2, &[1.0, 0.0]).unwrap(), vec![2.0, 0.0]);
        assert_eq!(
            quincunx().dilation_power_apply(-3, &[1.0, 0.0]).unwrap(),
            vec![0.25, 0.25]
        );
    }

    #[test]
    fn sample_point_examples() {
        let s = DilationScheme::dyadic(1).unwrap();
        assert_eq!(s.sample_point(2, &[3], &[0.0]).unwrap(), vec![0.75]);
        assert_eq!(s.sample_point(2, &[3], &[0.5]).unwrap(), vec![0.875]);
        let s2 = DilationScheme::dyadic(2).unwrap();
        assert_eq!(s2.sample_point(1, &[1, 1], &[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn index_box_examples() {
        let s = DilationScheme::dyadic(1).unwrap();
        let b = s
            .index_box_for_domain(1, &RealBox::new(vec![0.0], vec![1.0]).unwrap(), &Generator::BSpline2)
            .unwrap();
        assert_eq!((b.lo(), b.hi()), (&[-2][..], &[2][..]));
        let b = s
            .index_box_for_domain(
                0,
                &RealBox::symmetric(40.0, 1).unwrap(),
                &Generator::sinc_with_radius(178.0).unwrap(),
            )
            .unwrap();
        assert_eq!((b.lo(), b.hi()), (&[-218][..], &[218][..]));
        let b = s
            .index_box_for_domain(0, &RealBox::new(vec![5.0], vec![6.0]).unwrap(), &Generator::BSpline2)
            .unwrap();
        assert_eq!((b.lo(), b.hi()), (&[3][..], &[6][..]));
    }

    #[test]
    fn index_box_guard_reports_count() {
        let s = DilationScheme::dyadic(2).unwrap();
        let g: Generator = "tensor:bspline2^2".parse().unwrap();
        let err = s
            .index_box_for_domain(12, &RealBox::symmetric(20.0, 2).unwrap(), &g)
            .unwrap_err();
        match err {
            Error::InstanceTooLarge { count, limit, .. } => {
                assert!(count > limit);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coset_examples() {
        let reps =
            |s: &DilationScheme| -> Vec<Vec<f64>> { s.coset_representatives().iter().map(|c| c.to_f64()).collect() };
        assert_eq!(reps(&DilationScheme::dyadic(1).unwrap()), vec![vec![0.0], vec![0.5]]);
        let two = reps(&DilationScheme::dyadic(2).unwrap());
        assert_eq!(two.len(), 4);
        for expected in [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]] {
            assert!(two.contains(&expected.to_vec()));
        }
        assert_eq!(reps(&quincunx()), vec![vec![0.0, 0.0], vec![0.5, 0.5]]);
        let three = DilationScheme::dyadic(3).unwrap().coset_representatives();
        assert_eq!(three.len(), 8);
    }

    #[test]
    fn index_box_offsets_round_trip() {
        let b = IndexBox::new(vec![-2, 3], vec![1, 5]).unwrap();
        assert_eq!(b.len(), 12);
        for (o, k) in b.iter().enumerate() {
            assert_eq!(b.offset(&k), Some(o));
        }
        assert_eq!(b.offset(&[2, 3]), None);
    }

    #[test]
    fn index_box_never_drops_contributing_terms() {
        let s = DilationScheme::dyadic(1).unwrap();
        for (lo, hi, level) in [(0.0, 1.0, 1u32), (-1.3, 0.7, 2), (5.0, 6.0, 0), (2.25, 2.5, 3)] {
            let domain = RealBox::new(vec![lo], vec![hi]).unwrap();
            let b = s.index_box_for_domain(level, &domain, &Generator::BSpline2).unwrap();
            let scale = 2f64.powi(level as i32);
            // brute-force scan over a padded range of k and a fine x grid
            for k in (b.lo()[0] - 10)..=(b.hi()[0] + 10) {
                let touches = (0..=2000).any(|i| {
                    let x = lo + (hi - lo) * i as f64 / 2000.0;
                    crate::generators::bspline2(scale * x - k as f64) != 0.0
                });
                if touches {
                    assert!(b.contains(&[k]), "k={k} dropped for {lo}..{hi} at N={level}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn power_round_trip(n in 0i64..=30, a in -5.0f64..5.0, b in -5.0f64..5.0, q in any::<bool>()) {
            let s = if q { quincunx() } else { DilationScheme::dyadic(2).unwrap() };
            let v = [a, b];
            let back = s.dilation_power_apply(n, &s.dilation_power_apply(-n, &v).unwrap()).unwrap();
            for (x, y) in back.iter().zip(&v) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }

        #[test]
        fn isotropic_growth(n in 0i64..=20, theta in 0.0f64..std::f64::consts::TAU) {
            let s = quincunx();
            let v = [theta.cos(), theta.sin()];
            let w = s.dilation_power_apply(n, &v).unwrap();
            let ratio = (w[0] * w[0] + w[1] * w[1]).sqrt() / s.m().powi(n as i32);
            prop_assert!((0.1..=10.0).contains(&ratio));
        }
    }
}
