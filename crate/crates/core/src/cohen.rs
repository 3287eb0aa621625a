//! Cohen's class distributions Q_T, localization operators and norms of
//! symbols on the double phase space.

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::operator::{b_norm, op_stft, psd_sqrt, OperatorWindow};
use crate::phase::{fft2_in_place, gaussian_window, tf_shift, tf_shift_adjoint, PhaseField, PhasePoint, Signal, C64};
use crate::stft::{stft, stft_adjoint};
use crate::weights::{check_exponent, mixed_quasi_norm_field, translated_window_masses, Weight};

/// Default largest N for double phase space computations.
pub const DEFAULT_SYMBOL_CAP: usize = 24;

/// Q_T f(z) = <T pi(z)^* f, pi(z)^* f>.
pub fn cohen(t: &OperatorWindow, f: &Signal) -> Result<PhaseField> {
    check_dim(t.n(), f.n())?;
    let n = f.n();
    let vt = op_stft(t, f)?;
    PhaseField::from_fn(n, |z| {
        let h = tf_shift_adjoint(f, z);
        vt.at(z).iter().zip(h.as_slice()).map(|(a, b)| a * b.conj()).sum()
    })
}

/// A f = V_{phi2}^*(a V_{phi1} f), assembled one column per basis vector.
pub fn localization(a: &PhaseField, phi1: &Signal, phi2: &Signal) -> Result<OperatorWindow> {
    let n = a.n();
    check_dim(n, phi1.n())?;
    check_dim(n, phi2.n())?;
    let columns = (0..n)
        .into_par_iter()
        .map(|s| {
            let delta = Signal::delta(n, s)?;
            stft_adjoint(&a.mul(&stft(&delta, phi1)?)?, phi2)
        })
        .collect::<Result<Vec<_>>>()?;
    OperatorWindow::from_fn(n, |t, s| columns[s].as_slice()[t])
}

/// Weak form (1/N) sum_z a(z) V_{phi1} f(z) conj(V_{phi2} g(z)) = <A f, g>.
pub fn localization_weak_form(a: &PhaseField, phi1: &Signal, phi2: &Signal, f: &Signal, g: &Signal) -> Result<C64> {
    a.mul(&stft(f, phi1)?)?.inner_mu(&stft(g, phi2)?)
}

/// Feeds `sink` the row zeta -> V_Phi a(z, zeta) for every z, where
/// V_Phi a(z, zeta) = (1/N) sum_w a(w) conj(Phi(w - z)) e^{-2 pi i w.zeta / N}.
fn for_each_symbol_row<R: Send>(
    a: &PhaseField,
    window: &PhaseField,
    init: impl Fn() -> R + Sync,
    sink: impl Fn(&mut R, &[C64]) + Sync,
) -> Result<Vec<R>> {
    check_dim(a.n(), window.n())?;
    let n = a.n();
    let scale = 1.0 / n as f64;
    // one accumulator per first coordinate of z; merged by the caller in order
    Ok((0..n)
        .into_par_iter()
        .map(|zx| {
            let mut acc = init();
            let mut buf = vec![C64::new(0.0, 0.0); n * n];
            for zk in 0..n {
                for wx in 0..n {
                    for wk in 0..n {
                        let w = window.at(wx as i64 - zx as i64, wk as i64 - zk as i64);
                        buf[wx * n + wk] = a.as_slice()[wx * n + wk] * w.conj();
                    }
                }
                fft2_in_place(&mut buf, n, false);
                buf.iter_mut().for_each(|v| *v *= scale);
                sink(&mut acc, &buf);
            }
            acc
        })
        .collect())
}

fn check_symbol_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Resource {
            what: "double phase space transform".into(),
            n,
            cap,
        });
    }
    Ok(())
}

/// Full double phase space STFT, index (z.x * N + z.xi) * N^2 + zeta.x * N + zeta.xi.
pub fn phase_stft(a: &PhaseField, window: &PhaseField, cap: usize) -> Result<Vec<C64>> {
    check_symbol_cap(a.n(), cap)?;
    let rows = for_each_symbol_row(a, window, Vec::new, |acc: &mut Vec<C64>, row| {
        acc.extend_from_slice(row)
    })?;
    Ok(rows.concat())
}

/// Mixed norm of V_Phi a over (z, zeta), L^p in z inside L^q in zeta, each
/// phase point carrying mass 1/N.
pub fn symbol_stft_norm(a: &PhaseField, window: &PhaseField, p: f64, q: f64, cap: usize) -> Result<f64> {
    check_exponent(p)?;
    check_exponent(q)?;
    let n = a.n();
    check_symbol_cap(n, cap)?;
    let nn = n * n;
    let parts = for_each_symbol_row(
        a,
        window,
        || vec![0.0f64; nn],
        |acc, row| {
            for (s, v) in acc.iter_mut().zip(row) {
                if p.is_infinite() {
                    *s = s.max(v.norm());
                } else {
                    *s += v.norm().powf(p);
                }
            }
        },
    )?;
    let mut inner = vec![0.0f64; nn];
    for part in &parts {
        for (s, v) in inner.iter_mut().zip(part) {
            if p.is_infinite() {
                *s = s.max(*v);
            } else {
                *s += v;
            }
        }
    }
    let w = 1.0 / n as f64;
    if p.is_finite() {
        inner.iter_mut().for_each(|s| *s = (w * *s).powf(1.0 / p));
    }
    Ok(if q.is_infinite() {
        inner.into_iter().fold(0.0, f64::max)
    } else {
        inner.iter().map(|s| w * s.powf(q)).sum::<f64>().powf(1.0 / q)
    })
}

/// ||a||_{M^{p,q}} on the double phase space with window V_{g0} g0.
pub fn symbol_mod_norm(a: &PhaseField, p: f64, q: f64) -> Result<f64> {
    symbol_mod_norm_capped(a, p, q, DEFAULT_SYMBOL_CAP)
}

pub fn symbol_mod_norm_capped(a: &PhaseField, p: f64, q: f64, cap: usize) -> Result<f64> {
    check_symbol_cap(a.n(), cap)?;
    let g0 = gaussian_window(a.n())?;
    symbol_stft_norm(a, &stft(&g0, &g0)?, p, q, cap)
}

fn check_nonnegative(a: &PhaseField) -> Result<()> {
    match a
        .as_slice()
        .iter()
        .position(|c| c.re < 0.0 || c.im != 0.0 || !c.re.is_finite())
    {
        Some(i) => Err(Error::Domain(format!(
            "symbol must be real and nonnegative (entry {i} is {})",
            a.as_slice()[i]
        ))),
        None => Ok(()),
    }
}

/// z -> ||sqrt(A) pi(z)^* g0||^2 = (1/N) sum_w a(w) Psi(w + z), Psi = |V_phi g0|^2.
pub fn localization_profile(a: &PhaseField, phi: &Signal) -> Result<PhaseField> {
    check_nonnegative(a)?;
    check_dim(a.n(), phi.n())?;
    if phi.is_zero() {
        return Err(Error::Domain("window must be nonzero".into()));
    }
    let g0 = gaussian_window(a.n())?;
    let psi = stft(&g0, phi)?.map(|c| C64::new(c.norm_sqr(), 0.0));
    Ok(translated_window_masses(a, &psi)?.reflect())
}

/// sqrt(|| z -> ||a T_z Psi||_{L^1} ||_{L^{1/2}_{v^2}}), computed directly from the symbol.
pub fn b1v_localization_value(a: &PhaseField, phi: &Signal, v: &Weight) -> Result<f64> {
    let profile = localization_profile(a, phi)?;
    Ok(mixed_quasi_norm_field(&profile, 0.5, 0.5, &v.powf(2.0)?)?.sqrt())
}

/// The same quantity through the operator pipeline: b_norm(sqrt(A), 1, 1, v).
pub fn b1v_localization_pipeline(a: &PhaseField, phi: &Signal, v: &Weight) -> Result<f64> {
    check_nonnegative(a)?;
    let root = psd_sqrt(&localization(a, phi, phi)?)?;
    b_norm(&root, 1.0, 1.0, v, &gaussian_window(a.n())?)
}

/// Pointwise pieces of the converse estimate at (z, zeta), u = (-zeta.xi, zeta.x):
/// (V_Psi a(z, zeta), <A pi(z) g0, pi(u) pi(z) g0>, ||A pi(z) g0||) with
/// A = A_a^{g0, pi(u) g0} and Psi = |V_{g0} g0|^2. The first two agree exactly.
pub fn converse_terms(a: &PhaseField, z: PhasePoint, zeta: PhasePoint) -> Result<(C64, C64, f64)> {
    let n = a.n();
    let g0 = gaussian_window(n)?;
    let psi = stft(&g0, &g0)?.map(|c| C64::new(c.norm_sqr(), 0.0));
    let zeta = zeta.reduced(n);
    let mut direct = C64::new(0.0, 0.0);
    for w in crate::phase::phase_points(n) {
        let phase = crate::phase::unit_root(n, -((w.x * zeta.x + w.xi * zeta.xi) as i64));
        direct += a.get(w) * psi.get(w.sub(z, n)) * phase;
    }
    direct /= n as f64;
    let u = PhasePoint::wrapped(n, -(zeta.xi as i64), zeta.x as i64);
    let op = localization(a, &g0, &tf_shift(&g0, u))?;
    let probe = op.apply(&tf_shift(&g0, z))?;
    let pairing = probe.inner(&tf_shift(&tf_shift(&g0, z), u))?;
    Ok((direct, pairing, probe.norm2()))
}
