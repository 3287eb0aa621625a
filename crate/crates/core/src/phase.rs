//! The finite phase space Z_N x Z_N.
//!
//! Signals are functions on Z_N with counting measure. Phase-space fields are
//! functions on Z_N x Z_N carrying the measure mu that puts mass 1/N on every
//! point, so that Moyal's identity holds without stray constants. All phases
//! use the character e^{2 pi i k / N} and every index is reduced mod N.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub type C64 = Complex64;

/// e^{2 pi i k / n}, with `k` reduced mod `n` before the angle is formed.
pub fn unit_root(n: usize, k: i64) -> C64 {
    let r = k.rem_euclid(n as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * r / n as f64)
}

pub(crate) fn wrap(n: usize, k: i64) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Torus distance d_N(t) = min(t, N - t).
pub fn torus_distance(n: usize, t: usize) -> usize {
    let t = t % n;
    t.min(n - t)
}

/// A complex-valued function on Z_N.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: Vec<C64>,
}

impl Signal {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSize(0));
        }
        if let Some(i) = values.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        Ok(Self {
            values: vec![C64::new(0.0, 0.0); n],
        })
    }

    /// Kronecker delta at `k mod n`.
    pub fn delta(n: usize, k: usize) -> Result<Self> {
        let mut s = Self::zeros(n)?;
        s.values[k % n] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub(crate) fn from_vec_unchecked(values: Vec<C64>) -> Self {
        debug_assert!(!values.is_empty());
        Self { values }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.values
    }

    pub fn get(&self, t: i64) -> C64 {
        self.values[wrap(self.n(), t)]
    }

    /// Inner product <f, g> = sum_t f(t) conj(g(t)), linear in the first slot.
    pub fn inner(&self, other: &Signal) -> Result<C64> {
        check_dim(self.n(), other.n())?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum())
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: C64) -> Signal {
        Signal::from_vec_unchecked(self.values.iter().map(|v| v * c).collect())
    }

    pub fn conj(&self) -> Signal {
        Signal::from_vec_unchecked(self.values.iter().map(|v| v.conj()).collect())
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Signal) -> Result<f64> {
        check_dim(self.n(), other.n())?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }
}

impl Add for &Signal {
    type Output = Signal;
    fn add(self, rhs: &Signal) -> Signal {
        assert_eq!(self.n(), rhs.n(), "signal sizes differ");
        Signal::from_vec_unchecked(self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Signal {
    type Output = Signal;
    fn sub(self, rhs: &Signal) -> Signal {
        assert_eq!(self.n(), rhs.n(), "signal sizes differ");
        Signal::from_vec_unchecked(self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect())
    }
}

impl Mul<C64> for &Signal {
    type Output = Signal;
    fn mul(self, rhs: C64) -> Signal {
        self.scale(rhs)
    }
}

/// A point z = (x, xi) of the phase space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: usize,
    pub xi: usize,
}

impl PhasePoint {
    pub fn new(x: usize, xi: usize) -> Self {
        Self { x, xi }
    }

    /// Builds a point from signed coordinates, reducing mod `n`.
    pub fn wrapped(n: usize, x: i64, xi: i64) -> Self {
        Self {
            x: wrap(n, x),
            xi: wrap(n, xi),
        }
    }

    pub fn reduced(self, n: usize) -> Self {
        Self {
            x: self.x % n,
            xi: self.xi % n,
        }
    }

    pub fn neg(self, n: usize) -> Self {
        Self::wrapped(n, -(self.x as i64), -(self.xi as i64))
    }

    pub fn add(self, other: Self, n: usize) -> Self {
        Self {
            x: (self.x + other.x) % n,
            xi: (self.xi + other.xi) % n,
        }
    }

    pub fn sub(self, other: Self, n: usize) -> Self {
        Self::wrapped(n, self.x as i64 - other.x as i64, self.xi as i64 - other.xi as i64)
    }
}

/// All N^2 phase points in row-major (x-major) order.
pub fn phase_points(n: usize) -> impl Iterator<Item = PhasePoint> {
    (0..n).flat_map(move |x| (0..n).map(move |xi| PhasePoint::new(x, xi)))
}

/// A complex function on Z_N x Z_N, stored row-major with index x * N + xi.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    n: usize,
    values: Vec<C64>,
}

impl PhaseField {
    pub fn new(n: usize, values: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        check_dim(n * n, values.len())?;
        if let Some(i) = values.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { n, values })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        Ok(Self {
            n,
            values: vec![C64::new(0.0, 0.0); n * n],
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(PhasePoint) -> C64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        Ok(Self {
            n,
            values: phase_points(n).map(&mut f).collect(),
        })
    }

    pub fn from_real_fn(n: usize, mut f: impl FnMut(PhasePoint) -> f64) -> Result<Self> {
        Self::from_fn(n, |z| C64::new(f(z), 0.0))
    }

    /// Unit-mass atom at `z`: value N there, zero elsewhere (mass 1 under mu).
    pub fn atom(n: usize, z: PhasePoint) -> Result<Self> {
        let mut f = Self::zeros(n)?;
        f.set(z, C64::new(n as f64, 0.0));
        Ok(f)
    }

    pub(crate) fn from_vec_unchecked(n: usize, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), n * n);
        Self { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.values
    }

    pub fn get(&self, z: PhasePoint) -> C64 {
        let z = z.reduced(self.n);
        self.values[z.x * self.n + z.xi]
    }

    pub fn at(&self, x: i64, xi: i64) -> C64 {
        self.values[wrap(self.n, x) * self.n + wrap(self.n, xi)]
    }

    pub fn set(&mut self, z: PhasePoint, v: C64) {
        let z = z.reduced(self.n);
        self.values[z.x * self.n + z.xi] = v;
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> PhaseField {
        PhaseField::from_vec_unchecked(self.n, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise modulus as a real-valued field.
    pub fn abs(&self) -> PhaseField {
        self.map(|v| C64::new(v.norm(), 0.0))
    }

    pub fn mul(&self, other: &PhaseField) -> Result<PhaseField> {
        check_dim(self.n, other.n)?;
        Ok(PhaseField::from_vec_unchecked(
            self.n,
            self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        ))
    }

    pub fn scale(&self, c: f64) -> PhaseField {
        self.map(|v| v * c)
    }

    /// Inner product in L^2(mu): (1/N) sum F conj(G).
    pub fn inner_mu(&self, other: &PhaseField) -> Result<C64> {
        check_dim(self.n, other.n)?;
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s / self.n as f64)
    }

    pub fn l2_mu(&self) -> f64 {
        (self.values.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.n as f64).sqrt()
    }

    /// (T_{z0} F)(z) = F(z - z0).
    pub fn translate(&self, z0: PhasePoint) -> PhaseField {
        let n = self.n as i64;
        PhaseField::from_fn(self.n, |z| {
            self.at(z.x as i64 - z0.x as i64 + n, z.xi as i64 - z0.xi as i64 + n)
        })
        .expect("n > 0")
    }

    /// F(-z).
    pub fn reflect(&self) -> PhaseField {
        PhaseField::from_fn(self.n, |z| self.at(-(z.x as i64), -(z.xi as i64))).expect("n > 0")
    }

    pub fn max_abs_diff(&self, other: &PhaseField) -> Result<f64> {
        check_dim(self.n, other.n)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn real_parts(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|c| c.re)
    }
}

/// A Signal-valued function on phase space (the range of the operator-window
/// transform). Inner signals are stored contiguously: index (x * N + xi) * N + t.
#[derive(Debug, Clone, PartialEq)]
pub struct VecPhaseField {
    n: usize,
    values: Vec<C64>,
}

impl VecPhaseField {
    pub fn new(n: usize, values: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        check_dim(n * n * n, values.len())?;
        Ok(Self { n, values })
    }

    /// Assembles a field from one signal per phase point (row-major order).
    pub fn from_signals(n: usize, signals: Vec<Signal>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(0));
        }
        check_dim(n * n, signals.len())?;
        let mut values = Vec::with_capacity(n * n * n);
        for s in signals {
            check_dim(n, s.n())?;
            values.extend_from_slice(s.as_slice());
        }
        Ok(Self { n, values })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![C64::new(0.0, 0.0); n * n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, z: PhasePoint) -> &[C64] {
        let z = z.reduced(self.n);
        let start = (z.x * self.n + z.xi) * self.n;
        &self.values[start..start + self.n]
    }

    pub fn signal(&self, z: PhasePoint) -> Signal {
        Signal::from_vec_unchecked(self.at(z).to_vec())
    }

    /// z -> ||F(z)||_2 as a real phase field.
    pub fn pointwise_norms(&self) -> PhaseField {
        let n = self.n;
        PhaseField::from_vec_unchecked(
            n,
            self.values
                .chunks(n)
                .map(|c| C64::new(c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(), 0.0))
                .collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &VecPhaseField) -> Result<f64> {
        check_dim(self.n, other.n)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// Periodized Gaussian g0(t) = c sum_k exp(-pi (t + kN)^2 / N), unit l2 norm.
///
/// Fixed by the unitary DFT. Evaluated through the torus distance so that
/// g0(t) = g0(N - t) holds bit for bit.
pub fn gaussian_window(n: usize) -> Result<Signal> {
    if n == 0 {
        return Err(Error::InvalidSize(0));
    }
    let nf = n as f64;
    // exp(-pi (|k| - 1)^2 n) < 1e-17 once (|k| - 1)^2 n > 12.5
    let k_max = 2 + (13.0 / nf).sqrt().ceil() as i64;
    let raw: Vec<f64> = (0..n)
        .map(|t| {
            let t = torus_distance(n, t) as f64;
            let mut acc = (-PI * t * t / nf).exp();
            for k in 1..=k_max {
                let kn = k as f64 * nf;
                acc += (-PI * (t + kn).powi(2) / nf).exp();
                acc += (-PI * (t - kn).powi(2) / nf).exp();
            }
            acc
        })
        .collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    Signal::from_real(&raw.iter().map(|v| v / norm).collect::<Vec<_>>())
}

/// pi(z) f (t) = e^{2 pi i t xi / N} f(t - x).
pub fn tf_shift(f: &Signal, z: PhasePoint) -> Signal {
    let n = f.n();
    let z = z.reduced(n);
    let src = f.as_slice();
    Signal::from_vec_unchecked(
        (0..n)
            .map(|t| unit_root(n, (t * z.xi) as i64) * src[(t + n - z.x) % n])
            .collect(),
    )
}

/// pi(z)^* h (s) = e^{-2 pi i (s + x) xi / N} h(s + x).
pub fn tf_shift_adjoint(h: &Signal, z: PhasePoint) -> Signal {
    let n = h.n();
    let z = z.reduced(n);
    let src = h.as_slice();
    Signal::from_vec_unchecked(
        (0..n)
            .map(|s| {
                let t = (s + z.x) % n;
                unit_root(n, -((t * z.xi) as i64)) * src[t]
            })
            .collect(),
    )
}

/// Unnormalized in-place FFT; `inverse` selects the e^{+2 pi i} kernel.
pub(crate) fn fft_in_place(buf: &mut [C64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    plan.process(buf);
}

/// Unitary DFT with kernel N^{-1/2} e^{-2 pi i t xi / N}.
pub fn dft(f: &Signal) -> Signal {
    let mut buf = f.as_slice().to_vec();
    fft_in_place(&mut buf, false);
    let s = 1.0 / (f.n() as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= s);
    Signal::from_vec_unchecked(buf)
}

pub fn idft(f: &Signal) -> Signal {
    let mut buf = f.as_slice().to_vec();
    fft_in_place(&mut buf, true);
    let s = 1.0 / (f.n() as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= s);
    Signal::from_vec_unchecked(buf)
}

/// Fourier transform on phase space with respect to mu:
/// (1/N) sum_{x,y} F(x,y) e^{-2 pi i (x u + y v) / N}.
pub fn dft2_mu(f: &PhaseField) -> PhaseField {
    let n = f.n();
    let mut buf = f.as_slice().to_vec();
    fft2_in_place(&mut buf, n, false);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= s);
    PhaseField::from_vec_unchecked(n, buf)
}

/// Inverse of [`dft2_mu`].
pub fn idft2_mu(f: &PhaseField) -> PhaseField {
    let n = f.n();
    let mut buf = f.as_slice().to_vec();
    fft2_in_place(&mut buf, n, true);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= s);
    PhaseField::from_vec_unchecked(n, buf)
}

/// Unnormalized 2D FFT of an n x n row-major buffer.
pub(crate) fn fft2_in_place(buf: &mut [C64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    for row in buf.chunks_mut(n) {
        plan.process(row);
    }
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = buf[i * n + j];
        }
        plan.process(&mut col);
        for i in 0..n {
            buf[i * n + j] = col[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn naive_dft(f: &Signal) -> Signal {
        let n = f.n();
        let s = 1.0 / (n as f64).sqrt();
        Signal::new(
            (0..n)
                .map(|k| {
                    (0..n)
                        .map(|t| f.as_slice()[t] * unit_root(n, -((t * k) as i64)))
                        .sum::<C64>()
                        * s
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn gaussian_trivial_sizes() {
        let g = gaussian_window(1).unwrap();
        assert!((g.as_slice()[0] - c(1.0, 0.0)).norm() < 1e-15);

        let g = gaussian_window(4).unwrap();
        let v = g.as_slice();
        assert_eq!(v[1], v[3]);
        assert!(v[0].re > v[1].re && v[1].re > v[2].re);
        assert!((g.norm2() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_is_dft_fixed_point() {
        for n in [2, 5, 8, 12, 17, 32] {
            let g = gaussian_window(n).unwrap();
            let diff = naive_dft(&g).max_abs_diff(&g).unwrap();
            assert!(diff < 1e-12, "n={n}: {diff}");
            assert!(dft(&g).max_abs_diff(&g).unwrap() < 1e-12);
        }
    }

    #[test]
    fn gaussian_rejects_zero() {
        assert_eq!(gaussian_window(0), Err(Error::InvalidSize(0)));
    }

    #[test]
    fn shift_examples() {
        let d0 = Signal::delta(4, 0).unwrap();
        let d1 = Signal::delta(4, 1).unwrap();
        assert_eq!(tf_shift(&d0, PhasePoint::new(1, 0)), d1);
        assert_eq!(tf_shift(&d0, PhasePoint::new(0, 1)), d0);
        let s = tf_shift(&d0, PhasePoint::new(1, 1));
        assert!(s.max_abs_diff(&d1.scale(c(0.0, 1.0))).unwrap() < 1e-15);
    }

    #[test]
    fn adjoint_examples() {
        let d0 = Signal::delta(4, 0).unwrap();
        let d1 = Signal::delta(4, 1).unwrap();
        let f = Signal::new(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0), c(0.25, -1.0)]).unwrap();
        assert_eq!(tf_shift_adjoint(&f, PhasePoint::new(0, 0)), f);
        assert_eq!(tf_shift_adjoint(&d1, PhasePoint::new(1, 0)), d0);
        // -i * e^{-2 pi i 3/4} = 1
        let expected = Signal::delta(4, 3).unwrap().scale(c(0.0, -1.0) * unit_root(4, -3));
        let got = tf_shift_adjoint(&d0, PhasePoint::new(1, 1));
        assert!(got.max_abs_diff(&expected).unwrap() < 1e-15);
        // agrees with e^{-2 pi i x xi / N} pi(-z)
        let z = PhasePoint::new(3, 2);
        let alt = tf_shift(&f, z.neg(4)).scale(unit_root(4, -6));
        assert!(tf_shift_adjoint(&f, z).max_abs_diff(&alt).unwrap() < 1e-14);
    }

    #[test]
    fn dft_examples() {
        let d0 = Signal::delta(4, 0).unwrap();
        let half = Signal::from_real(&[0.5; 4]).unwrap();
        assert!(dft(&d0).max_abs_diff(&half).unwrap() < 1e-15);
        assert!(dft(&half).max_abs_diff(&d0).unwrap() < 1e-15);
        let f = Signal::new((0..7).map(|k| c(k as f64, 1.0 - k as f64)).collect()).unwrap();
        assert!(idft(&dft(&f)).max_abs_diff(&f).unwrap() < 1e-13);
        assert!(dft(&f).max_abs_diff(&naive_dft(&f)).unwrap() < 1e-12);
    }

    #[test]
    fn signal_validation() {
        assert_eq!(Signal::new(vec![]), Err(Error::InvalidSize(0)));
        assert_eq!(
            Signal::new(vec![c(1.0, 0.0), c(f64::NAN, 0.0)]),
            Err(Error::NonFinite(1))
        );
        let a = Signal::zeros(3).unwrap();
        let b = Signal::zeros(4).unwrap();
        assert!(matches!(a.inner(&b), Err(Error::Dimension { .. })));
        assert!(PhaseField::new(2, vec![c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn dft2_round_trip() {
        let f = PhaseField::from_fn(5, |z| c(z.x as f64 - 1.0, (z.xi * z.x) as f64)).unwrap();
        let back = idft2_mu(&dft2_mu(&f));
        assert!(back.max_abs_diff(&f).unwrap() < 1e-12);
        // Plancherel with respect to mu
        assert!((dft2_mu(&f).l2_mu() - f.l2_mu()).abs() < 1e-12);
    }
}
