//! Short-time Fourier transform on Z_N, its adjoint, and the pointwise
//! identities and inequalities built on it.

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::phase::{fft_in_place, tf_shift, PhaseField, Signal, C64};
use crate::weights::convolve_phase;

/// V_g f(x, xi) = <f, pi(x, xi) g>, one FFT over t per time shift x.
pub fn stft(f: &Signal, g: &Signal) -> Result<PhaseField> {
    check_dim(f.n(), g.n())?;
    let n = f.n();
    let fv = f.as_slice();
    let gv = g.as_slice();
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut row: Vec<C64> = (0..n).map(|t| fv[t] * gv[(t + n - x) % n].conj()).collect();
            fft_in_place(&mut row, false);
            row
        })
        .collect();
    PhaseField::new(n, rows.concat())
}

/// Reference O(N^3) evaluation straight from the definition.
pub fn stft_direct(f: &Signal, g: &Signal) -> Result<PhaseField> {
    check_dim(f.n(), g.n())?;
    let n = f.n();
    let mut out = PhaseField::zeros(n)?;
    for z in crate::phase::phase_points(n) {
        out.set(z, f.inner(&tf_shift(g, z))?);
    }
    Ok(out)
}

/// V_g^* F = (1/N) sum_z F(z) pi(z) g.
pub fn stft_adjoint(big_f: &PhaseField, g: &Signal) -> Result<Signal> {
    check_dim(big_f.n(), g.n())?;
    let n = g.n();
    let gv = g.as_slice();
    let fv = big_f.as_slice();
    let parts: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut row = fv[x * n..(x + 1) * n].to_vec();
            // sum_xi F(x, xi) e^{2 pi i t xi / N}
            fft_in_place(&mut row, true);
            (0..n).map(|t| row[t] * gv[(t + n - x) % n]).collect()
        })
        .collect();
    let scale = 1.0 / n as f64;
    let mut out = vec![C64::new(0.0, 0.0); n];
    for part in &parts {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    out.iter_mut().for_each(|v| *v *= scale);
    Signal::new(out)
}

/// Reference evaluation of the adjoint by summing shifted windows.
pub fn stft_adjoint_direct(big_f: &PhaseField, g: &Signal) -> Result<Signal> {
    check_dim(big_f.n(), g.n())?;
    let n = g.n();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for z in crate::phase::phase_points(n) {
        let c = big_f.get(z);
        for (o, v) in out.iter_mut().zip(tf_shift(g, z).as_slice()) {
            *o += c * v;
        }
    }
    let scale = 1.0 / n as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    Signal::new(out)
}

/// Both sides of the Fourier-transform-of-products identity:
/// lhs = F_mu(V_{g1} f1 . conj(V_{g2} f2)) at (x, y),
/// rhs = (V_{f2} f1 . conj(V_{g2} g1)) at (-y, x).
///
/// On Z_N the identity holds with no correction factor when the phase-space
/// transform is normalized with respect to mu.
pub fn ft_product(f1: &Signal, g1: &Signal, f2: &Signal, g2: &Signal) -> Result<(PhaseField, PhaseField)> {
    let n = f1.n();
    for s in [g1, f2, g2] {
        check_dim(n, s.n())?;
    }
    let prod = stft(f1, g1)?.mul(&stft(f2, g2)?.map(|c| c.conj()))?;
    let lhs = crate::phase::dft2_mu(&prod);
    let a = stft(f1, f2)?;
    let b = stft(g1, g2)?;
    let rhs = PhaseField::from_fn(n, |z| {
        let (x, y) = (-(z.xi as i64), z.x as i64);
        a.at(x, y) * b.at(x, y).conj()
    })?;
    Ok((lhs, rhs))
}

/// lhs = |V_phi f|, rhs = ||psi||^{-2} |V_phi psi| * |V_psi f|.
pub fn dominance_pair(phi: &Signal, psi: &Signal, f: &Signal) -> Result<(PhaseField, PhaseField)> {
    check_dim(phi.n(), psi.n())?;
    check_dim(phi.n(), f.n())?;
    let psi_norm_sq = psi.norm2().powi(2);
    if psi_norm_sq == 0.0 {
        return Err(Error::Domain("auxiliary window psi must be nonzero".into()));
    }
    let lhs = stft(f, phi)?.abs();
    let conv = convolve_phase(&stft(psi, phi)?.abs(), &stft(f, psi)?.abs())?;
    let rhs = conv.map(|c| C64::new(c.re / psi_norm_sq, 0.0));
    Ok((lhs, rhs))
}

/// Vector-valued dominance with a unit-norm reference window g0:
/// lhs = (sum_n |V_{phi_n} f|^2)^{1/2},
/// rhs = (sum_n |V_{phi_n} g0|^2)^{1/2} * |V_{g0} f|.
pub fn vector_dominance_pair(windows: &[Signal], f: &Signal, g0: &Signal) -> Result<(PhaseField, PhaseField)> {
    let n = f.n();
    check_dim(n, g0.n())?;
    if windows.is_empty() {
        return Err(Error::Domain("window family must be nonempty".into()));
    }
    let mut lhs_sq = vec![0.0f64; n * n];
    let mut ref_sq = vec![0.0f64; n * n];
    for w in windows {
        check_dim(n, w.n())?;
        for (acc, v) in lhs_sq.iter_mut().zip(stft(f, w)?.as_slice()) {
            *acc += v.norm_sqr();
        }
        for (acc, v) in ref_sq.iter_mut().zip(stft(g0, w)?.as_slice()) {
            *acc += v.norm_sqr();
        }
    }
    let to_field = |sq: Vec<f64>| PhaseField::new(n, sq.into_iter().map(|s| C64::new(s.sqrt(), 0.0)).collect());
    let lhs = to_field(lhs_sq)?;
    let reference = to_field(ref_sq)?;
    let scale = g0.norm2().powi(-2);
    let rhs = convolve_phase(&reference, &stft(f, g0)?.abs())?.map(|c| C64::new(c.re * scale, 0.0));
    Ok((lhs, rhs))
}

/// Largest pointwise ratio lhs / rhs over points where rhs > 0 (or lhs > 0).
pub fn worst_ratio(lhs: &PhaseField, rhs: &PhaseField) -> f64 {
    lhs.as_slice()
        .iter()
        .zip(rhs.as_slice())
        .map(|(l, r)| {
            if r.re > 0.0 {
                l.re / r.re
            } else if l.re > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// Moyal pairing (1/N) sum_z V_{phi1} f1 conj(V_{phi2} f2).
pub fn moyal_pairing(f1: &Signal, phi1: &Signal, f2: &Signal, phi2: &Signal) -> Result<C64> {
    stft(f1, phi1)?.inner_mu(&stft(f2, phi2)?)
}
