//! Matrices used as operator windows: Schatten norms, the operator-window
//! transform and its adjoint, B_{p,q}^m norms and the nuclear upper bound.

use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{hermitian_eigen, svd};
use crate::phase::{
    fft_in_place, gaussian_window, tf_shift, tf_shift_adjoint, unit_root, PhaseField, PhasePoint, Signal,
    VecPhaseField, C64,
};
use crate::stft::stft;
use crate::weights::{check_exponent, mixed_norm, moderateness_constant, MixedNormParams, Weight};

const ZERO: C64 = C64::new(0.0, 0.0);

/// An N x N complex matrix acting by (S f)(t) = sum_s S[t, s] f(s).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorWindow {
    n: usize,
    entries: Vec<C64>,
}

impl OperatorWindow {
    /// Row-major entries, S[t, s] at `t * n + s`.
    pub fn new(n: usize, entries: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        check_dim(n * n, entries.len())?;
        if let Some(i) = entries.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { n, entries })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        let mut entries = Vec::with_capacity(n * n);
        for t in 0..n {
            for s in 0..n {
                entries.push(f(t, s));
            }
        }
        Self::new(n, entries)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_fn(n, |_, _| ZERO)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |t, s| if t == s { C64::new(1.0, 0.0) } else { ZERO })
    }

    pub fn diagonal(d: &[C64]) -> Result<Self> {
        Self::from_fn(d.len(), |t, s| if t == s { d[t] } else { ZERO })
    }

    /// (xi ⊗ phi) f = <f, phi> xi.
    pub fn rank_one(xi: &Signal, phi: &Signal) -> Result<Self> {
        check_dim(xi.n(), phi.n())?;
        let (a, b) = (xi.as_slice(), phi.as_slice());
        Self::from_fn(xi.n(), |t, s| a[t] * b[s].conj())
    }

    /// Matrix of the time-frequency shift pi(z).
    pub fn tf_shift_matrix(n: usize, z: PhasePoint) -> Result<Self> {
        let z = z.reduced(n);
        Self::from_fn(n, |t, s| {
            if (s + z.x) % n == t {
                unit_root(n, (t * z.xi) as i64)
            } else {
                ZERO
            }
        })
    }

    pub(crate) fn from_vec_unchecked(n: usize, entries: Vec<C64>) -> Self {
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, t: usize, s: usize) -> C64 {
        self.entries[t * self.n + s]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = vec![ZERO; n * n];
        for t in 0..n {
            for s in 0..n {
                out[s * n + t] = self.entries[t * n + s].conj();
            }
        }
        Self::from_vec_unchecked(n, out)
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        check_dim(self.n, f.n())?;
        Ok(Signal::from_vec_unchecked(self.apply_slice(f.as_slice())))
    }

    fn apply_slice(&self, f: &[C64]) -> Vec<C64> {
        self.entries
            .chunks(self.n)
            .map(|row| row.iter().zip(f).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let n = self.n;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Ok(Self::from_vec_unchecked(n, out))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_vec_unchecked(self.n, self.entries.iter().map(|v| v * c).collect())
    }

    /// pi(z) S pi(z)^*, entrywise e^{2 pi i (t - s) xi / N} S[t - x, s - x].
    pub fn conjugate_by_shift(&self, z: PhasePoint) -> Self {
        let n = self.n;
        let z = z.reduced(n);
        let mut out = vec![ZERO; n * n];
        for t in 0..n {
            for s in 0..n {
                let phase = unit_root(n, (t * z.xi) as i64 - (s * z.xi) as i64);
                out[t * n + s] = phase * self.entries[((t + n - z.x) % n) * n + (s + n - z.x) % n];
            }
        }
        Self::from_vec_unchecked(n, out)
    }

    /// Frobenius norm sqrt(sum |S[t, s]|^2).
    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dim(self.n, other.n)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// ||S - S^*||_F / max(||S||_F, 1).
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let mut d = 0.0;
        for t in 0..n {
            for s in 0..n {
                d += (self.entries[t * n + s] - self.entries[s * n + t].conj()).norm_sqr();
            }
        }
        d.sqrt() / self.frobenius().max(1.0)
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        Ok(svd(&self.entries, self.n)?.sigma)
    }
}

impl Add for &OperatorWindow {
    type Output = OperatorWindow;
    fn add(self, rhs: &OperatorWindow) -> OperatorWindow {
        assert_eq!(self.n, rhs.n, "operator size mismatch");
        OperatorWindow::from_vec_unchecked(
            self.n,
            self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Sub for &OperatorWindow {
    type Output = OperatorWindow;
    fn sub(self, rhs: &OperatorWindow) -> OperatorWindow {
        assert_eq!(self.n, rhs.n, "operator size mismatch");
        OperatorWindow::from_vec_unchecked(
            self.n,
            self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        )
    }
}

impl Mul<C64> for &OperatorWindow {
    type Output = OperatorWindow;
    fn mul(self, c: C64) -> OperatorWindow {
        self.scale(c)
    }
}

/// l^p norm of the singular values; p = inf gives the operator norm.
pub fn schatten_norm(t: &OperatorWindow, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let sigma = t.singular_values()?;
    Ok(lp_of(&sigma, p))
}

pub(crate) fn lp_of(vals: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        vals.iter().cloned().fold(0.0, f64::max)
    } else {
        vals.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

pub fn trace(t: &OperatorWindow) -> C64 {
    (0..t.n).map(|i| t.get(i, i)).sum()
}

/// <S, T>_HS = tr(T^* S) = sum_{t,s} S[t, s] conj(T[t, s]).
pub fn hs_inner(s: &OperatorWindow, t: &OperatorWindow) -> Result<C64> {
    check_dim(s.n, t.n)?;
    Ok(s.entries.iter().zip(&t.entries).map(|(a, b)| a * b.conj()).sum())
}

/// Positive square root of a Hermitian positive semidefinite matrix.
pub fn psd_sqrt(t: &OperatorWindow) -> Result<OperatorWindow> {
    let defect = t.hermitian_defect();
    if defect > 1e-8 {
        return Err(Error::Domain(format!(
            "matrix is not Hermitian (relative defect {defect:e})"
        )));
    }
    let n = t.n;
    let eig = hermitian_eigen(&t.entries, n)?;
    let top = eig.values.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    let lowest = eig.values[0];
    if lowest < -1e-10 * top.max(1.0) {
        return Err(Error::Domain(format!(
            "matrix is not positive semidefinite (eigenvalue {lowest:e})"
        )));
    }
    // eigenvalues at roundoff level are zero; their square roots would not be
    let floor = 64.0 * f64::EPSILON * top;
    let roots: Vec<f64> = eig
        .values
        .iter()
        .map(|&l| if l <= floor { 0.0 } else { l.sqrt() })
        .collect();
    let v = &eig.vectors;
    let mut out = vec![ZERO; n * n];
    for (k, r) in roots.iter().enumerate() {
        if *r == 0.0 {
            continue;
        }
        for i in 0..n {
            let a = v[i * n + k] * *r;
            for j in 0..n {
                out[i * n + j] += a * v[j * n + k].conj();
            }
        }
    }
    // symmetrize away roundoff
    for i in 0..n {
        out[i * n + i].im = 0.0;
        for j in i + 1..n {
            let avg = (out[i * n + j] + out[j * n + i].conj()) * 0.5;
            out[i * n + j] = avg;
            out[j * n + i] = avg.conj();
        }
    }
    Ok(OperatorWindow::from_vec_unchecked(n, out))
}

/// 𝔙_S f(z) = S pi(z)^* f, evaluated with one FFT per (x, output index).
///
/// (S pi(x, xi)^* f)(r) = sum_t S[r, t - x] f(t) e^{-2 pi i t xi / N}.
pub fn op_stft(s: &OperatorWindow, f: &Signal) -> Result<VecPhaseField> {
    check_dim(s.n, f.n())?;
    let n = s.n;
    let fv = f.as_slice();
    let slabs: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut slab = vec![ZERO; n * n];
            let mut row = vec![ZERO; n];
            for r in 0..n {
                for t in 0..n {
                    row[t] = s.entries[r * n + (t + n - x) % n] * fv[t];
                }
                fft_in_place(&mut row, false);
                for (xi, v) in row.iter().enumerate() {
                    slab[xi * n + r] = *v;
                }
            }
            slab
        })
        .collect();
    VecPhaseField::new(n, slabs.concat())
}

/// Reference evaluation: one matrix-vector product per phase point.
pub fn op_stft_direct(s: &OperatorWindow, f: &Signal) -> Result<VecPhaseField> {
    check_dim(s.n, f.n())?;
    let signals = crate::phase::phase_points(s.n)
        .map(|z| s.apply(&tf_shift_adjoint(f, z)))
        .collect::<Result<Vec<_>>>()?;
    VecPhaseField::from_signals(s.n, signals)
}

/// z -> (sum_n |V_{S^* e_n} f(z)|^2)^{1/2} over the standard basis.
pub fn op_stft_norms_by_basis(s: &OperatorWindow, f: &Signal) -> Result<PhaseField> {
    check_dim(s.n, f.n())?;
    let n = s.n;
    let sa = s.adjoint();
    let mut acc = vec![0.0f64; n * n];
    for k in 0..n {
        let col = Signal::from_vec_unchecked((0..n).map(|t| sa.get(t, k)).collect());
        for (a, v) in acc.iter_mut().zip(stft(f, &col)?.as_slice()) {
            *a += v.norm_sqr();
        }
    }
    PhaseField::new(n, acc.into_iter().map(|v| C64::new(v.sqrt(), 0.0)).collect())
}

/// 𝔙_S^* F = (1/N) sum_z pi(z) S^* F(z).
pub fn op_stft_adjoint(s: &OperatorWindow, big_f: &VecPhaseField) -> Result<Signal> {
    check_dim(s.n, big_f.n())?;
    let n = s.n;
    let sa = s.adjoint();
    let parts: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|x| {
            // sum over xi of e^{2 pi i t xi / N} (S^* F(x, xi))(t - x)
            let mut acc = vec![ZERO; n];
            for xi in 0..n {
                let h = sa.apply_slice(big_f.at(PhasePoint::new(x, xi)));
                for (t, a) in acc.iter_mut().enumerate() {
                    *a += unit_root(n, (t * xi) as i64) * h[(t + n - x) % n];
                }
            }
            acc
        })
        .collect();
    let mut out = vec![ZERO; n];
    for part in &parts {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    let scale = 1.0 / n as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    Signal::new(out)
}

/// (1/N) sum_z pi(z) R pi(z)^*.
pub fn shift_average(r: &OperatorWindow) -> OperatorWindow {
    let n = r.n;
    let mut out = vec![ZERO; n * n];
    for z in crate::phase::phase_points(n) {
        for (o, v) in out.iter_mut().zip(&r.conjugate_by_shift(z).entries) {
            *o += v;
        }
    }
    let scale = 1.0 / n as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    OperatorWindow::from_vec_unchecked(n, out)
}

/// (1/N) sum_z tr(pi(z) R pi(z)^* T).
pub fn trace_average(r: &OperatorWindow, t: &OperatorWindow) -> Result<C64> {
    check_dim(r.n, t.n)?;
    // tr(A T) = sum_{i,j} A[i, j] T[j, i] = <A, T^*>_HS
    hs_inner(&shift_average(r), &t.adjoint())
}

/// z -> ||S pi(z)^* window||_2.
pub fn window_profile(s: &OperatorWindow, window: &Signal) -> Result<PhaseField> {
    check_dim(s.n, window.n())?;
    if window.is_zero() {
        return Err(Error::Domain("window must be nonzero".into()));
    }
    Ok(op_stft(s, window)?.pointwise_norms())
}

/// ||z -> ||S pi(z)^* window||_2||_{L^{p,q}_m}.
pub fn b_norm(s: &OperatorWindow, p: f64, q: f64, m: &Weight, window: &Signal) -> Result<f64> {
    let params = MixedNormParams::new(p, q, m)?;
    mixed_norm(&window_profile(s, window)?, &params)
}

/// [`b_norm`] with the Gaussian window.
pub fn b_norm_g0(s: &OperatorWindow, p: f64, q: f64, m: &Weight) -> Result<f64> {
    b_norm(s, p, q, m, &gaussian_window(s.n)?)
}

/// Operator-valued modulation norm ||z -> ||S pi(z) g0||_2||_{L^{p,q}_m}.
/// Equals [`b_norm_g0`] with the reflected weight.
pub fn op_modulation_norm(s: &OperatorWindow, p: f64, q: f64, m: &Weight) -> Result<f64> {
    let params = MixedNormParams::new(p, q, m)?;
    check_dim(s.n, m.n())?;
    let g0 = gaussian_window(s.n)?;
    let field = PhaseField::from_real_fn(s.n, |z| s.apply(&tf_shift(&g0, z)).map(|h| h.norm2()).unwrap_or(0.0))?;
    mixed_norm(&field, &params)
}

/// ||f||_{M^{p,q}_m} = ||V_{g0} f||_{L^{p,q}_m}.
pub fn modulation_norm(f: &Signal, p: f64, q: f64, m: &Weight) -> Result<f64> {
    let params = MixedNormParams::new(p, q, m)?;
    mixed_norm(&stft(f, &gaussian_window(f.n())?)?, &params)
}

/// ||f||_{M^1_v}.
pub fn m1_norm(f: &Signal, v: &Weight) -> Result<f64> {
    modulation_norm(f, 1.0, 1.0, v)
}

/// Decomposition bound sum_j sigma_j ||v_j||_{M^1_v} from S = sum_j sigma_j u_j ⊗ v_j.
/// Always at least b_norm(S, 1, 1, v).
pub fn nuclear_bound(s: &OperatorWindow, v: &Weight) -> Result<f64> {
    check_dim(s.n, v.n())?;
    let dec = svd(&s.entries, s.n)?;
    let mut total = 0.0;
    for (j, sigma) in dec.sigma.iter().enumerate() {
        if *sigma == 0.0 {
            continue;
        }
        let vj = Signal::new(dec.right(j))?;
        total += sigma * m1_norm(&vj, v)?;
    }
    Ok(total)
}

/// Exponent r with 1/r = 1 + 1/p2 - 1/p1, for p1 <= p2.
pub fn young_exponent(p1: f64, p2: f64) -> Result<f64> {
    check_exponent(p1)?;
    check_exponent(p2)?;
    if p2 < p1 {
        return Err(Error::Exponent {
            value: p2,
            reason: "embedding needs the target exponent to be at least the source exponent",
        });
    }
    let inv = 1.0 + 1.0 / p2 - 1.0 / p1;
    Ok(if inv <= 0.0 { f64::INFINITY } else { 1.0 / inv })
}

/// Constant K in ||S||_{B^{p2,q2}_m} <= K ||S||_{B^{p1,q1}_m}:
/// C_v^m ||V_{g0} g0||_{L^{p3,q3}_v} with Young exponents p3, q3.
pub fn embedding_constant(n: usize, p1: f64, q1: f64, p2: f64, q2: f64, m: &Weight, v: &Weight) -> Result<f64> {
    let p3 = young_exponent(p1, p2)?;
    let q3 = young_exponent(q1, q2)?;
    let c = moderateness_constant(m, v)?;
    let g0 = gaussian_window(n)?;
    Ok(c * mixed_norm(&stft(&g0, &g0)?, &MixedNormParams::new(p3, q3, v)?)?)
}
