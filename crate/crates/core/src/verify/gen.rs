//! Seeded instance generators.
//!
//! Every instance draws from its own ChaCha20 stream (seed, stream = instance
//! index), so instances are reproducible independently of each other and of
//! the number of trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::operator::OperatorWindow;
use crate::phase::{PhaseField, Signal, C64};

/// Identifier of the random number scheme, recorded in reports.
pub const PRNG_NAME: &str = "chacha20-stream-v1";

pub fn instance_rng(seed: u64, instance: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(instance as u64);
    rng
}

/// Real and imaginary parts independent and uniform on [-1, 1].
pub fn complex(rng: &mut ChaCha20Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

fn complexes(rng: &mut ChaCha20Rng, len: usize) -> Vec<C64> {
    (0..len).map(|_| complex(rng)).collect()
}

/// A random signal, redrawn in the (probability zero) event it vanishes.
pub fn signal(rng: &mut ChaCha20Rng, n: usize) -> Signal {
    loop {
        let s = Signal::new(complexes(rng, n)).expect("finite entries");
        if !s.is_zero() {
            return s;
        }
    }
}

pub fn unit_signal(rng: &mut ChaCha20Rng, n: usize) -> Signal {
    let s = signal(rng, n);
    s.scale(C64::new(1.0 / s.norm2(), 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Dense,
    RankOne,
    Psd,
    Diagonal,
    Unitary,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 5] = [
        OperatorKind::Dense,
        OperatorKind::RankOne,
        OperatorKind::Psd,
        OperatorKind::Diagonal,
        OperatorKind::Unitary,
    ];

    /// Kinds cycle with the instance index.
    pub fn for_instance(instance: usize) -> Self {
        Self::ALL[instance % Self::ALL.len()]
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Dense => "dense",
            OperatorKind::RankOne => "rank-one",
            OperatorKind::Psd => "psd",
            OperatorKind::Diagonal => "diagonal",
            OperatorKind::Unitary => "unitary",
        }
    }
}

pub fn operator(rng: &mut ChaCha20Rng, n: usize, kind: OperatorKind) -> OperatorWindow {
    match kind {
        OperatorKind::Dense => dense(rng, n),
        OperatorKind::RankOne => {
            let (xi, phi) = (signal(rng, n), signal(rng, n));
            OperatorWindow::rank_one(&xi, &phi).expect("sizes agree")
        }
        OperatorKind::Psd => psd(rng, n),
        OperatorKind::Diagonal => OperatorWindow::diagonal(&complexes(rng, n)).expect("n >= 1"),
        OperatorKind::Unitary => unitary(rng, n),
    }
}

pub fn dense(rng: &mut ChaCha20Rng, n: usize) -> OperatorWindow {
    OperatorWindow::new(n, complexes(rng, n * n)).expect("finite entries")
}

/// A^* A for a dense random A.
pub fn psd(rng: &mut ChaCha20Rng, n: usize) -> OperatorWindow {
    let a = dense(rng, n);
    a.adjoint().matmul(&a).expect("sizes agree")
}

/// Positive semidefinite of rank at most `rank`.
pub fn psd_low_rank(rng: &mut ChaCha20Rng, n: usize, rank: usize) -> OperatorWindow {
    let mut out = OperatorWindow::zeros(n).expect("n >= 1");
    for _ in 0..rank.max(1) {
        let u = signal(rng, n);
        out = &out + &OperatorWindow::rank_one(&u, &u).expect("sizes agree");
    }
    out
}

/// Unitary from Gram-Schmidt on the columns of a dense random matrix.
pub fn unitary(rng: &mut ChaCha20Rng, n: usize) -> OperatorWindow {
    let a = dense(rng, n);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v: Vec<C64> = (0..n).map(|i| a.get(i, j)).collect();
        for _ in 0..2 {
            for q in &cols {
                let proj: C64 = q.iter().zip(&v).map(|(qi, vi)| qi.conj() * vi).sum();
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= proj * qi);
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|c| *c /= norm);
        cols.push(v);
    }
    OperatorWindow::from_fn(n, |i, j| cols[j][i]).expect("finite entries")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Dense,
    Sparse,
    Nonnegative,
    SparseNonnegative,
}

impl SymbolKind {
    pub fn name(self) -> &'static str {
        match self {
            SymbolKind::Dense => "dense",
            SymbolKind::Sparse => "sparse",
            SymbolKind::Nonnegative => "nonnegative",
            SymbolKind::SparseNonnegative => "sparse-nonnegative",
        }
    }
}

/// Symbols on phase space; sparse kinds keep roughly one entry in four and
/// never return the zero field.
pub fn symbol(rng: &mut ChaCha20Rng, n: usize, kind: SymbolKind) -> PhaseField {
    let nonneg = matches!(kind, SymbolKind::Nonnegative | SymbolKind::SparseNonnegative);
    let sparse = matches!(kind, SymbolKind::Sparse | SymbolKind::SparseNonnegative);
    loop {
        let values: Vec<C64> = (0..n * n)
            .map(|_| {
                let c = complex(rng);
                let keep = !sparse || rng.gen_range(0..4) == 0;
                match (keep, nonneg) {
                    (false, _) => C64::new(0.0, 0.0),
                    (true, true) => C64::new(c.re.abs(), 0.0),
                    (true, false) => c,
                }
            })
            .collect();
        if values.iter().any(|c| *c != C64::new(0.0, 0.0)) {
            return PhaseField::new(n, values).expect("finite entries");
        }
    }
}

/// Exponents of the polynomial weight family used across suites.
pub const WEIGHT_FAMILY: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

/// Short label for an exponent, "inf" for infinity.
pub fn exp_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}
