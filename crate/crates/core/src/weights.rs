//! Weights on phase space, weighted mixed norms and phase-space convolution.
//!
//! Mixed norms integrate with weight N^{-1/2} per coordinate, so that the
//! (2, 2) norm with m = 1 is exactly the L^2(mu) norm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::phase::{torus_distance, PhaseField, PhasePoint, VecPhaseField, C64};

/// Relative tolerance used by the exhaustive submultiplicativity check.
const SUBMULT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Submultiplicative,
    Moderate,
    Unchecked,
}

/// A positive function on Z_N x Z_N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    n: usize,
    values: Vec<f64>,
    kind: WeightKind,
}

impl Weight {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        check_dim(n * n, values.len())?;
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidWeight(format!(
                "entry {i} is {} (weights must be positive and finite)",
                values[i]
            )));
        }
        Ok(Self {
            n,
            values,
            kind: WeightKind::Unchecked,
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(PhasePoint) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        Self::new(n, crate::phase::phase_points(n).map(f).collect())
    }

    /// The constant weight 1 (submultiplicative).
    pub fn constant(n: usize) -> Result<Self> {
        let mut w = Self::new(n, vec![1.0; n * n])?;
        w.kind = WeightKind::Submultiplicative;
        Ok(w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, z: PhasePoint) -> f64 {
        let z = z.reduced(self.n);
        self.values[z.x * self.n + z.xi]
    }

    #[inline]
    fn idx(&self, x: usize, xi: usize) -> f64 {
        self.values[x * self.n + xi]
    }

    /// Largest value of v(z1 + z2) / (v(z1) v(z2)) over all pairs.
    pub fn submultiplicativity_ratio(&self) -> f64 {
        let n = self.n;
        (0..n * n)
            .into_par_iter()
            .map(|a| {
                let (x1, k1) = (a / n, a % n);
                let v1 = self.values[a];
                let mut worst = 0.0f64;
                for x2 in 0..n {
                    for k2 in 0..n {
                        let r = self.idx((x1 + x2) % n, (k1 + k2) % n) / (v1 * self.idx(x2, k2));
                        worst = worst.max(r);
                    }
                }
                worst
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// v(x, xi) = v(-x, xi) = v(x, -xi) = v(-x, -xi).
    pub fn is_sign_symmetric(&self) -> bool {
        let n = self.n;
        (0..n).all(|x| {
            (0..n).all(|k| {
                let v = self.idx(x, k);
                let nx = (n - x) % n;
                let nk = (n - k) % n;
                v == self.idx(nx, k) && v == self.idx(x, nk) && v == self.idx(nx, nk)
            })
        })
    }

    /// Verifies submultiplicativity and sign symmetry exhaustively and tags
    /// the weight accordingly.
    pub fn into_submultiplicative(mut self) -> Result<Self> {
        let ratio = self.submultiplicativity_ratio();
        if ratio > 1.0 + SUBMULT_RTOL {
            return Err(Error::InvalidWeight(format!(
                "not submultiplicative: max v(z1+z2)/(v(z1)v(z2)) = {ratio}"
            )));
        }
        if !self.is_sign_symmetric() {
            return Err(Error::InvalidWeight("not symmetric under coordinate sign flips".into()));
        }
        self.kind = WeightKind::Submultiplicative;
        Ok(self)
    }

    /// 1 / v, tagged as moderate.
    pub fn reciprocal(&self) -> Weight {
        Weight {
            n: self.n,
            values: self.values.iter().map(|v| 1.0 / v).collect(),
            kind: WeightKind::Moderate,
        }
    }

    /// v^k for k >= 0; keeps the submultiplicative tag (powers of a
    /// submultiplicative weight stay submultiplicative).
    pub fn powf(&self, k: f64) -> Result<Weight> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::OutOfFamily(k));
        }
        Ok(Weight {
            n: self.n,
            values: self.values.iter().map(|v| v.powf(k)).collect(),
            kind: self.kind,
        })
    }

    /// m~(z) = m(-z).
    pub fn reflect(&self) -> Weight {
        let n = self.n;
        Weight {
            n,
            values: crate::phase::phase_points(n)
                .map(|z| {
                    let r = z.neg(n);
                    self.idx(r.x, r.xi)
                })
                .collect(),
            kind: self.kind,
        }
    }

    pub fn as_moderate(mut self) -> Weight {
        if self.kind == WeightKind::Unchecked {
            self.kind = WeightKind::Moderate;
        }
        self
    }
}

/// v(x, xi) = (1 + d_N(x) + d_N(xi))^s, checked submultiplicative.
pub fn weight_polynomial(n: usize, s: f64) -> Result<Weight> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::OutOfFamily(s));
    }
    if n == 0 {
        return Err(Error::InvalidSize(0));
    }
    Weight::from_fn(n, |z| {
        (1.0 + torus_distance(n, z.x) as f64 + torus_distance(n, z.xi) as f64).powf(s)
    })?
    .into_submultiplicative()
}

/// The minimal C with m(z1 + z2) <= C v(z1) m(z2) for all z1, z2.
pub fn moderateness_constant(m: &Weight, v: &Weight) -> Result<f64> {
    check_dim(v.n, m.n)?;
    if v.kind != WeightKind::Submultiplicative {
        return Err(Error::InvalidWeight(
            "moderateness constant requires a submultiplicative reference weight".into(),
        ));
    }
    let n = m.n;
    let rows: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|a| {
            let (x1, k1) = (a / n, a % n);
            let v1 = v.values[a];
            let mut worst = 0.0f64;
            for x2 in 0..n {
                for k2 in 0..n {
                    let r = m.idx((x1 + x2) % n, (k1 + k2) % n) / (v1 * m.idx(x2, k2));
                    worst = worst.max(r);
                }
            }
            worst
        })
        .collect();
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// Exponents and weight of an L^{p,q}_m norm.
#[derive(Debug, Clone, Copy)]
pub struct MixedNormParams<'a> {
    pub p: f64,
    pub q: f64,
    pub m: &'a Weight,
}

impl<'a> MixedNormParams<'a> {
    pub fn new(p: f64, q: f64, m: &'a Weight) -> Result<Self> {
        check_exponent(p)?;
        check_exponent(q)?;
        Ok(Self { p, q, m })
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::Exponent {
            value: p,
            reason: "mixed-norm exponents must lie in [1, inf]",
        })
    }
}

pub(crate) fn check_quasi_exponent(p: f64) -> Result<()> {
    if p > 0.0 {
        Ok(())
    } else {
        Err(Error::Exponent {
            value: p,
            reason: "quasi-norm exponents must be positive",
        })
    }
}

/// Weighted L^r sum of nonnegative terms with per-term measure `w`.
fn lr_sum(terms: impl Iterator<Item = f64>, r: f64, w: f64) -> f64 {
    if r.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        let s: f64 = terms.map(|t| w * t.powf(r)).sum();
        s.powf(1.0 / r)
    }
}

/// Mixed (quasi-)norm of the nonnegative field `vals` (row-major x * n + xi),
/// inner in x, outer in xi. Exponents may be any positive value or infinity.
pub(crate) fn mixed_quasi_norm(vals: &[f64], n: usize, p: f64, q: f64, m: Option<&Weight>) -> f64 {
    let w = 1.0 / (n as f64).sqrt();
    let weight = |x: usize, k: usize| m.map_or(1.0, |m| m.idx(x, k));
    let inner = (0..n).map(|k| lr_sum((0..n).map(|x| vals[x * n + k] * weight(x, k)), p, w));
    lr_sum(inner, q, w)
}

/// ||F||_{L^{p,q}_m(mu)}.
pub fn mixed_norm(f: &PhaseField, params: &MixedNormParams<'_>) -> Result<f64> {
    check_exponent(params.p)?;
    check_exponent(params.q)?;
    check_dim(f.n(), params.m.n)?;
    let abs: Vec<f64> = f.as_slice().iter().map(|c| c.norm()).collect();
    Ok(mixed_quasi_norm(&abs, f.n(), params.p, params.q, Some(params.m)))
}

/// Mixed quasi-norm for exponents in (0, inf]; used for L^{1/2} functionals.
pub fn mixed_quasi_norm_field(f: &PhaseField, p: f64, q: f64, m: &Weight) -> Result<f64> {
    check_quasi_exponent(p)?;
    check_quasi_exponent(q)?;
    check_dim(f.n(), m.n)?;
    let abs: Vec<f64> = f.as_slice().iter().map(|c| c.norm()).collect();
    Ok(mixed_quasi_norm(&abs, f.n(), p, q, Some(m)))
}

/// ||z -> ||Phi(z)||_2||_{L^{p,q}_m(mu)}.
pub fn mixed_norm_vec(phi: &VecPhaseField, params: &MixedNormParams<'_>) -> Result<f64> {
    mixed_norm(&phi.pointwise_norms(), params)
}

/// (F * G)(z) = (1/N) sum_w F(w) G(z - w), by direct summation.
pub fn convolve_phase(f: &PhaseField, g: &PhaseField) -> Result<PhaseField> {
    check_dim(f.n(), g.n())?;
    let n = f.n();
    let fv = f.as_slice();
    let gv = g.as_slice();
    let scale = 1.0 / n as f64;
    let out: Vec<C64> = (0..n * n)
        .into_par_iter()
        .map(|a| {
            let (zx, zk) = (a / n, a % n);
            let mut acc = C64::new(0.0, 0.0);
            for wx in 0..n {
                let dx = (zx + n - wx) % n;
                for wk in 0..n {
                    let dk = (zk + n - wk) % n;
                    acc += fv[wx * n + wk] * gv[dx * n + dk];
                }
            }
            acc * scale
        })
        .collect();
    PhaseField::new(n, out)
}

/// Same convolution through the phase-space Fourier transform, where it
/// becomes a pointwise product.
pub fn convolve_phase_fft(f: &PhaseField, g: &PhaseField) -> Result<PhaseField> {
    check_dim(f.n(), g.n())?;
    let prod = crate::phase::dft2_mu(f).mul(&crate::phase::dft2_mu(g))?;
    Ok(crate::phase::idft2_mu(&prod))
}

/// Discrete Wiener amalgam quasi-norm over the (N / block)^2 phase blocks:
/// (sum_blocks ||a chi_B||_{L^p(mu)}^q v(corner_B)^q)^{1/q}.
pub fn amalgam_norm(a: &PhaseField, p: f64, q: f64, v: &Weight, block: usize) -> Result<f64> {
    check_exponent(p)?;
    check_quasi_exponent(q)?;
    let n = a.n();
    check_dim(n, v.n)?;
    if block == 0 || !n.is_multiple_of(block) {
        return Err(Error::Partition { block, n });
    }
    let nb = n / block;
    let av = a.as_slice();
    let inv_n = 1.0 / n as f64;
    let terms = (0..nb).flat_map(|bx| (0..nb).map(move |bk| (bx, bk))).map(|(bx, bk)| {
        let cells = (0..block).flat_map(|i| (0..block).map(move |j| (bx * block + i, bk * block + j)));
        let local = if p.is_infinite() {
            cells.map(|(x, k)| av[x * n + k].norm()).fold(0.0, f64::max)
        } else {
            cells
                .map(|(x, k)| inv_n * av[x * n + k].norm().powf(p))
                .sum::<f64>()
                .powf(1.0 / p)
        };
        local * v.idx(bx * block, bk * block)
    });
    Ok(lr_sum(terms, q, 1.0))
}

/// z -> ||a . T_z Phi||_{L^1(mu)} = (1/N) sum_w |a(w)| |Phi(w - z)|.
pub fn translated_window_masses(a: &PhaseField, window: &PhaseField) -> Result<PhaseField> {
    check_dim(a.n(), window.n())?;
    let reflected = window.abs().reflect();
    let conv = convolve_phase(&a.abs(), &reflected)?;
    // the inputs are nonnegative; drop imaginary roundoff
    Ok(conv.map(|c| C64::new(c.re.max(0.0), 0.0)))
}

/// ||z -> ||a . T_z Phi||_{L^1(mu)}||_{L^r_v(mu)}, a quasi-norm when r < 1.
pub fn window_functional(a: &PhaseField, window: &PhaseField, r: f64, v: &Weight) -> Result<f64> {
    let masses = translated_window_masses(a, window)?;
    mixed_quasi_norm_field(&masses, r, r, v)
}
