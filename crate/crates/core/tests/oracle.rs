//! Worked examples with independent brute-force oracles. Frozen constants
//! were produced by a separate double-precision reference implementation.

use std::f64::consts::PI;

use opwin::cohen::{b1v_localization_value, cohen, localization, symbol_mod_norm};
use opwin::operator::{
    b_norm, m1_norm, nuclear_bound, op_stft, op_stft_adjoint, psd_sqrt, schatten_norm, trace, OperatorWindow,
};
use opwin::phase::{
    dft, gaussian_window, tf_shift, tf_shift_adjoint, PhaseField, PhasePoint, Signal, VecPhaseField, C64,
};
use opwin::stft::{dominance_pair, ft_product, stft, stft_adjoint};
use opwin::verify::{khinchin_exact, run_suite};
use opwin::weights::{
    amalgam_norm, convolve_phase, mixed_norm, mixed_norm_vec, moderateness_constant, weight_polynomial,
    MixedNormParams, Weight,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

fn delta(n: usize, k: usize) -> Signal {
    Signal::delta(n, k).unwrap()
}

/// Deterministic pseudo-random complex entries for oracle inputs.
fn lcg_values(seed: u64, len: usize) -> Vec<C64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    (0..len).map(|_| c(next(), next())).collect()
}

fn rand_signal(seed: u64, n: usize) -> Signal {
    Signal::new(lcg_values(seed, n)).unwrap()
}

fn rand_operator(seed: u64, n: usize) -> OperatorWindow {
    OperatorWindow::new(n, lcg_values(seed, n * n)).unwrap()
}

/// V_g f(x, xi) = sum_t f(t) conj(g(t - x)) e^{-2 pi i t xi / N}, straight from the definition.
fn stft_oracle(f: &Signal, g: &Signal) -> Vec<C64> {
    let n = f.n();
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for x in 0..n {
        for xi in 0..n {
            let mut acc = c(0.0, 0.0);
            for t in 0..n {
                let phase = -2.0 * PI * (t * xi) as f64 / n as f64;
                acc += f.as_slice()[t] * g.as_slice()[(t + n - x) % n].conj() * C64::from_polar(1.0, phase);
            }
            out[x * n + xi] = acc;
        }
    }
    out
}

// periodized Gaussian

#[test]
fn gaussian_window_small_sizes() {
    assert_eq!(gaussian_window(1).unwrap().as_slice(), &[c(1.0, 0.0)]);
    let g = gaussian_window(4).unwrap();
    let v = g.as_slice();
    assert!(v.iter().all(|x| x.re <= v[0].re));
    assert_eq!(v[1], v[3]);
    assert!(gaussian_window(0).is_err());
}

#[test]
fn gaussian_window_n8_frozen_and_dft_invariant() {
    let expect = [
        0.7071018493912875,
        0.4774577330621044,
        0.14699254549626808,
        0.020671349925049272,
        0.002640944418381838,
        0.020671349925049272,
        0.14699254549626808,
        0.4774577330621044,
    ];
    let g = gaussian_window(8).unwrap();
    for (a, b) in g.as_slice().iter().zip(expect) {
        assert!((a.re - b).abs() < 1e-15 && a.im == 0.0, "{a} vs {b}");
    }
    assert!(dft(&g).max_abs_diff(&g).unwrap() < 1e-12);
}

// time-frequency shifts

#[test]
fn tf_shift_examples() {
    let n = 4;
    assert_eq!(tf_shift(&delta(n, 0), PhasePoint::new(1, 0)), delta(n, 1));
    assert_eq!(tf_shift(&delta(n, 0), PhasePoint::new(0, 1)), delta(n, 0));
    let s = tf_shift(&delta(n, 0), PhasePoint::new(1, 1));
    assert!(s.max_abs_diff(&delta(n, 1).scale(c(0.0, 1.0))).unwrap() < 1e-15);
    let f = rand_signal(3, n);
    assert_eq!(tf_shift(&f, PhasePoint::new(0, 0)), f);
}

#[test]
fn tf_shift_adjoint_examples() {
    let n = 4;
    let f = rand_signal(4, n);
    assert_eq!(tf_shift_adjoint(&f, PhasePoint::new(0, 0)), f);
    assert_eq!(tf_shift_adjoint(&delta(n, 1), PhasePoint::new(1, 0)), delta(n, 0));
    // -i e^{-2 pi i 3/4} = 1
    let coeff = c(0.0, -1.0) * C64::from_polar(1.0, -2.0 * PI * 3.0 / 4.0);
    let got = tf_shift_adjoint(&delta(n, 0), PhasePoint::new(1, 1));
    assert!(got.max_abs_diff(&delta(n, 3).scale(coeff)).unwrap() < 1e-15);
}

// unitary DFT

#[test]
fn dft_examples() {
    let n = 4;
    let d = dft(&delta(n, 0));
    assert!(d.as_slice().iter().all(|v| close(*v, c(0.5, 0.0), 1e-15)));
    let flat = Signal::new(vec![c(0.5, 0.0); n]).unwrap();
    assert!(dft(&flat).max_abs_diff(&delta(n, 0)).unwrap() < 1e-15);
}

// weights and mixed norms

#[test]
fn polynomial_weight_examples() {
    assert!(weight_polynomial(4, 0.0).unwrap().values().iter().all(|v| *v == 1.0));
    assert_eq!(weight_polynomial(4, 1.0).unwrap().get(PhasePoint::new(2, 2)), 5.0);
    assert!(weight_polynomial(4, -0.5).is_err());
}

#[test]
fn moderateness_constant_examples() {
    let v = weight_polynomial(8, 1.0).unwrap();
    assert_eq!(moderateness_constant(&v, &v).unwrap(), 1.0);
    assert_eq!(moderateness_constant(&Weight::constant(8).unwrap(), &v).unwrap(), 1.0);
    // exhaustive O(N^4) oracle value
    let m = weight_polynomial(8, 0.5).unwrap();
    assert!((moderateness_constant(&m, &v).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn mixed_norm_examples() {
    let n = 6;
    let one = Weight::constant(n).unwrap();
    let z0 = PhasePoint::new(2, 5);
    let mut f = PhaseField::zeros(n).unwrap();
    f.set(z0, c(1.0, 0.0));
    let l1 = MixedNormParams::new(1.0, 1.0, &one).unwrap();
    assert!((mixed_norm(&f, &l1).unwrap() - 1.0 / n as f64).abs() < 1e-15);
    let m = weight_polynomial(n, 2.0).unwrap();
    let linf = MixedNormParams::new(f64::INFINITY, f64::INFINITY, &m).unwrap();
    assert_eq!(mixed_norm(&f, &linf).unwrap(), m.get(z0));

    let r = PhaseField::new(n, lcg_values(11, n * n)).unwrap();
    let direct = (r.as_slice().iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    let l2 = MixedNormParams::new(2.0, 2.0, &one).unwrap();
    assert!((mixed_norm(&r, &l2).unwrap() - direct).abs() < 1e-13);
    assert!(MixedNormParams::new(0.5, 1.0, &one).is_err());
}

#[test]
fn mixed_norm_vec_examples() {
    let n = 4;
    let one = Weight::constant(n).unwrap();
    let coeffs = lcg_values(12, n * n);
    let e = Signal::new(vec![c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
    let vf = VecPhaseField::from_signals(n, coeffs.iter().map(|k| e.scale(*k)).collect()).unwrap();
    let scalar = PhaseField::new(n, coeffs.clone()).unwrap();
    for (p, q) in [(1.0, 2.0), (2.0, 2.0), (4.0, f64::INFINITY)] {
        let params = MixedNormParams::new(p, q, &one).unwrap();
        let a = mixed_norm_vec(&vf, &params).unwrap();
        let b = mixed_norm(&scalar, &params).unwrap();
        assert!((a - b).abs() < 1e-14 * b);
    }
    let l2 = MixedNormParams::new(2.0, 2.0, &one).unwrap();
    assert_eq!(mixed_norm_vec(&VecPhaseField::zeros(n).unwrap(), &l2).unwrap(), 0.0);
    let big = VecPhaseField::new(n, lcg_values(13, n * n * n)).unwrap();
    let direct = (lcg_values(13, n * n * n).iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    assert!((mixed_norm_vec(&big, &l2).unwrap() - direct).abs() < 1e-13);
}

#[test]
fn convolution_with_unit_atom_is_identity() {
    let n = 5;
    let atom = PhaseField::atom(n, PhasePoint::new(0, 0)).unwrap();
    assert_eq!(convolve_phase(&atom, &atom).unwrap().max_abs_diff(&atom).unwrap(), 0.0);
    let f = PhaseField::new(n, lcg_values(14, n * n)).unwrap();
    assert!(convolve_phase(&f, &atom).unwrap().max_abs_diff(&f).unwrap() < 1e-15);
}

#[test]
fn amalgam_examples() {
    let n = 8;
    let one = Weight::constant(n).unwrap();
    let mut a = PhaseField::zeros(n).unwrap();
    for (x, k) in [(2, 4), (2, 5), (3, 4), (3, 5)] {
        a.set(PhasePoint::new(x, k), c(0.25 * (x + k) as f64, 0.0));
    }
    let mass: f64 = a.as_slice().iter().map(|v| v.norm()).sum::<f64>() / n as f64;
    assert!((amalgam_norm(&a, 1.0, 0.5, &one, 2).unwrap() - mass).abs() < 1e-15);
    assert_eq!(
        amalgam_norm(&PhaseField::zeros(n).unwrap(), 1.0, 0.5, &one, 2).unwrap(),
        0.0
    );
    assert!(amalgam_norm(&a, 1.0, 0.5, &one, 3).is_err());

    // Gaussian bump against a direct enumeration over the 16 blocks
    let bump = PhaseField::from_real_fn(n, |z| {
        let d = |k: usize| k.min(n - k) as f64;
        (-(d(z.x).powi(2) + d(z.xi).powi(2)) / 4.0).exp()
    })
    .unwrap();
    let v = weight_polynomial(n, 1.0).unwrap();
    let mut total = 0.0;
    for bx in 0..4 {
        for bk in 0..4 {
            let mut local = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    local += bump.get(PhasePoint::new(2 * bx + i, 2 * bk + j)).norm() / n as f64;
                }
            }
            total += (local * v.get(PhasePoint::new(2 * bx, 2 * bk))).sqrt();
        }
    }
    let expect = total * total;
    let got = amalgam_norm(&bump, 1.0, 0.5, &v, 2).unwrap();
    assert!((got - expect).abs() < 1e-13 * expect, "{got} vs {expect}");
}

// short-time Fourier transform

#[test]
fn stft_examples() {
    let v = stft(&delta(2, 0), &delta(2, 0)).unwrap();
    for z in opwin::phase::phase_points(2) {
        assert_eq!(v.get(z), c(if z.x == 0 { 1.0 } else { 0.0 }, 0.0));
    }
    let g = gaussian_window(8).unwrap();
    let z0 = PhasePoint::new(3, 6);
    let peak = stft(&tf_shift(&g, z0), &g).unwrap();
    assert!((peak.get(z0).norm() - 1.0).abs() < 1e-14);
    assert!(peak.as_slice().iter().all(|v| v.norm() <= 1.0 + 1e-14));

    let (f, w) = (rand_signal(20, 7), rand_signal(21, 7));
    let oracle = stft_oracle(&f, &w);
    let got = stft(&f, &w).unwrap();
    for (a, b) in got.as_slice().iter().zip(&oracle) {
        assert!(close(*a, *b, 1e-13));
    }
}

#[test]
fn stft_adjoint_examples() {
    let n = 6;
    let g = rand_signal(22, n);
    let atom = PhaseField::atom(n, PhasePoint::new(0, 0)).unwrap();
    assert!(stft_adjoint(&atom, &g).unwrap().max_abs_diff(&g).unwrap() < 1e-15);
    assert!(stft_adjoint(&PhaseField::zeros(n).unwrap(), &g).unwrap().is_zero());
}

#[test]
fn ft_product_examples() {
    let g = gaussian_window(4).unwrap();
    let (lhs, rhs) = ft_product(&g, &g, &g, &g).unwrap();
    assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10);
    let z = Signal::zeros(4).unwrap();
    let (lhs, rhs) = ft_product(&z, &z, &z, &z).unwrap();
    assert_eq!(lhs.max_abs(), 0.0);
    assert_eq!(rhs.max_abs(), 0.0);
    let s: Vec<Signal> = (0..4).map(|i| rand_signal(30 + i, 6)).collect();
    let (lhs, rhs) = ft_product(&s[0], &s[1], &s[2], &s[3]).unwrap();
    assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10);
}

#[test]
fn dominance_examples() {
    let g = gaussian_window(8).unwrap();
    let (lhs, rhs) = dominance_pair(&g, &g, &g).unwrap();
    let o = PhasePoint::new(0, 0);
    assert!((lhs.get(o).re - 1.0).abs() < 1e-14);
    assert!(lhs.get(o).re <= rhs.get(o).re + 1e-14);
    let (lhs, rhs) = dominance_pair(&g, &g, &Signal::zeros(8).unwrap()).unwrap();
    assert_eq!(lhs.max_abs() + rhs.max_abs(), 0.0);
    assert!(dominance_pair(&g, &Signal::zeros(8).unwrap(), &g).is_err());
}

// operators

#[test]
fn schatten_examples() {
    let n = 5;
    let id = OperatorWindow::identity(n).unwrap();
    for p in [1.0, 1.5, 2.0, 4.0] {
        assert!((schatten_norm(&id, p).unwrap() - (n as f64).powf(1.0 / p)).abs() < 1e-13);
    }
    assert_eq!(schatten_norm(&id, f64::INFINITY).unwrap(), 1.0);
    let (xi, phi) = (rand_signal(40, n), rand_signal(41, n));
    let r1 = OperatorWindow::rank_one(&xi, &phi).unwrap();
    for p in [1.0, 2.0, 3.0, f64::INFINITY] {
        let expect = xi.norm2() * phi.norm2();
        assert!((schatten_norm(&r1, p).unwrap() - expect).abs() < 1e-12 * expect);
    }
    let d = OperatorWindow::diagonal(&[c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
    assert!((schatten_norm(&d, 2.0).unwrap() - 5.0).abs() < 1e-14);
    assert!(schatten_norm(&d, 0.5).is_err());
}

#[test]
fn trace_examples() {
    assert_eq!(trace(&OperatorWindow::identity(4).unwrap()), c(4.0, 0.0));
    let (xi, phi) = (rand_signal(42, 4), rand_signal(43, 4));
    let r1 = OperatorWindow::rank_one(&xi, &phi).unwrap();
    assert!(close(trace(&r1), xi.inner(&phi).unwrap(), 1e-14));
}

#[test]
fn psd_sqrt_examples() {
    let d = OperatorWindow::diagonal(&[c(4.0, 0.0), c(9.0, 0.0)]).unwrap();
    let r = psd_sqrt(&d).unwrap();
    let expect = OperatorWindow::diagonal(&[c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
    assert!(r.max_abs_diff(&expect).unwrap() < 1e-14);
    let u = rand_signal(44, 5);
    let unit = u.scale(c(1.0 / u.norm2(), 0.0));
    let proj = OperatorWindow::rank_one(&unit, &unit).unwrap();
    assert!(psd_sqrt(&proj).unwrap().max_abs_diff(&proj).unwrap() < 1e-12);
    assert!(psd_sqrt(&rand_operator(45, 4)).is_err());
}

#[test]
fn op_stft_adjoint_reconstructs_with_hilbert_schmidt_factor() {
    let n = 6;
    let s = rand_operator(50, n);
    let f = rand_signal(51, n);
    let back = op_stft_adjoint(&s, &op_stft(&s, &f).unwrap()).unwrap();
    let hs2 = s.frobenius().powi(2);
    assert!(back.max_abs_diff(&f.scale(c(hs2, 0.0))).unwrap() < 1e-10 * hs2 * f.norm2());
    assert!(op_stft_adjoint(&s, &VecPhaseField::zeros(n).unwrap())
        .unwrap()
        .is_zero());
}

#[test]
fn b_norm_examples() {
    let n = 9;
    let g0 = gaussian_window(n).unwrap();
    let one = Weight::constant(n).unwrap();
    let id = OperatorWindow::identity(n).unwrap();
    assert!((b_norm(&id, 2.0, 2.0, &one, &g0).unwrap() - (n as f64).sqrt()).abs() < 1e-12);
    let s = rand_operator(52, n);
    assert!((b_norm(&s, 2.0, 2.0, &one, &g0).unwrap() - schatten_norm(&s, 2.0).unwrap()).abs() < 1e-10);
    assert!(b_norm(&s, 1.0, 1.0, &one, &Signal::zeros(n).unwrap()).is_err());
}

#[test]
fn nuclear_bound_examples() {
    let n = 6;
    let v = weight_polynomial(n, 1.0).unwrap();
    let (xi, phi) = (rand_signal(53, n), rand_signal(54, n));
    let r1 = OperatorWindow::rank_one(&xi, &phi).unwrap();
    let expect = xi.norm2() * m1_norm(&phi, &v).unwrap();
    assert!((nuclear_bound(&r1, &v).unwrap() - expect).abs() < 1e-10 * expect);
    assert_eq!(nuclear_bound(&OperatorWindow::zeros(n).unwrap(), &v).unwrap(), 0.0);
}

// Cohen class and localization

#[test]
fn cohen_examples() {
    let n = 4;
    let g0 = gaussian_window(n).unwrap();
    let f = rand_signal(60, n);
    let spectro = cohen(&OperatorWindow::rank_one(&g0, &g0).unwrap(), &f).unwrap();
    let oracle = stft_oracle(&f, &g0);
    for (a, b) in spectro.as_slice().iter().zip(&oracle) {
        assert!(close(*a, c(b.norm_sqr(), 0.0), 1e-13));
    }
    let flat = cohen(&OperatorWindow::identity(n).unwrap(), &f).unwrap();
    let e = f.norm2().powi(2);
    assert!(flat.as_slice().iter().all(|v| close(*v, c(e, 0.0), 1e-13)));
}

/// <A f, g> = (1/N) sum_z a(z) V_{phi1} f(z) conj(V_{phi2} g(z)) by direct summation.
fn weak_form_oracle(a: &PhaseField, phi1: &Signal, phi2: &Signal, f: &Signal, g: &Signal) -> C64 {
    let n = a.n();
    let vf = stft_oracle(f, phi1);
    let vg = stft_oracle(g, phi2);
    let mut acc = c(0.0, 0.0);
    for i in 0..n * n {
        acc += a.as_slice()[i] * vf[i] * vg[i].conj();
    }
    acc / n as f64
}

#[test]
fn localization_constant_symbol_pins_the_pairing_convention() {
    let n = 4;
    let (p1, p2) = (rand_signal(61, n), rand_signal(62, n));
    let ones = PhaseField::from_real_fn(n, |_| 1.0).unwrap();
    // the brute-force weak form on basis vectors gives the matrix entries
    let mut oracle = vec![c(0.0, 0.0); n * n];
    for t in 0..n {
        for s in 0..n {
            oracle[t * n + s] = weak_form_oracle(&ones, &p1, &p2, &delta(n, s), &delta(n, t));
        }
    }
    let oracle = OperatorWindow::new(n, oracle).unwrap();
    let expect = OperatorWindow::identity(n).unwrap().scale(p2.inner(&p1).unwrap());
    assert!(oracle.max_abs_diff(&expect).unwrap() < 1e-13);
    assert!(localization(&ones, &p1, &p2).unwrap().max_abs_diff(&expect).unwrap() < 1e-13);
}

#[test]
fn localization_atom_and_positivity() {
    let n = 5;
    let (p1, p2) = (rand_signal(63, n), rand_signal(64, n));
    let z0 = PhasePoint::new(3, 1);
    let a = localization(&PhaseField::atom(n, z0).unwrap(), &p1, &p2).unwrap();
    let expect = OperatorWindow::rank_one(&tf_shift(&p2, z0), &tf_shift(&p1, z0)).unwrap();
    assert!(a.max_abs_diff(&expect).unwrap() < 1e-13);

    let sym = PhaseField::from_real_fn(n, |z| ((z.x * 7 + z.xi * 3) % 5) as f64).unwrap();
    let op = localization(&sym, &p1, &p1).unwrap();
    assert!(op.hermitian_defect() < 1e-12);
    assert!(psd_sqrt(&op).is_ok());
    assert!(
        localization(&PhaseField::zeros(n).unwrap(), &p1, &p2)
            .unwrap()
            .frobenius()
            == 0.0
    );
}

#[test]
fn symbol_mod_norm_examples() {
    let n = 4;
    assert_eq!(symbol_mod_norm(&PhaseField::zeros(n).unwrap(), 1.0, 1.0).unwrap(), 0.0);
    // atom: sup over (z, zeta) of |V_{g0} g0(z0 - z)| = 1, attained at z = z0
    let a = PhaseField::atom(n, PhasePoint::new(1, 2)).unwrap();
    let v = symbol_mod_norm(&a, f64::INFINITY, f64::INFINITY).unwrap();
    assert!((v - 1.0).abs() < 1e-14, "{v}");
}

#[test]
fn b1v_localization_examples() {
    let n = 6;
    let g0 = gaussian_window(n).unwrap();
    let v = weight_polynomial(n, 1.0).unwrap();
    assert_eq!(
        b1v_localization_value(&PhaseField::zeros(n).unwrap(), &g0, &v).unwrap(),
        0.0
    );
    let neg = PhaseField::from_real_fn(n, |z| if z.x == 1 { -1.0 } else { 1.0 }).unwrap();
    assert!(b1v_localization_value(&neg, &g0, &v).is_err());
}

// harness

#[test]
fn khinchin_examples() {
    let one = |k: usize| vec![c(1.0, 0.0); k];
    for p in [0.5, 1.0, 3.0] {
        assert_eq!(khinchin_exact(&one(1), p).unwrap().ratio, 1.0);
    }
    assert_eq!(khinchin_exact(&one(2), 2.0).unwrap().ratio, 1.0);
    // |sum| = 4 (2 patterns), 2 (8 patterns), 0 (6 patterns): mean 24/16 over norm 2
    let r = khinchin_exact(&one(4), 1.0).unwrap();
    assert_eq!(r.ratio, 0.75);
    assert!(khinchin_exact(&one(17), 1.0).is_err());
}

#[test]
fn suite_examples() {
    let r = run_suite("moyal", 8, 100, 42).unwrap();
    assert!(r.passed());
    assert!(r.checks.iter().all(|c| c.residual < 1e-11));
    assert!(run_suite("isometry", 8, 50, 7).unwrap().passed());
    let r = run_suite("sandwich", 8, 20, 1).unwrap();
    assert!(r.passed(), "{}", r.summary());
    assert!(matches!(
        run_suite("nosuch", 8, 1, 0),
        Err(opwin::Error::UnknownSuite(_))
    ));
    assert!(matches!(
        run_suite("localization", 64, 1, 0),
        Err(opwin::Error::Resource { .. })
    ));
}
