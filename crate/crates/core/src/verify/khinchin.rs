//! Exact expectations over all sign patterns.

use crate::error::{Error, Result};
use crate::phase::C64;

/// Largest sequence length accepted by [`khinchin_exact`].
pub const KHINCHIN_MAX_TERMS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Khinchin {
    /// 2^{-K} sum over sign patterns of |sum_k a_k w_k|^p.
    pub lhs: f64,
    /// (sum_k |a_k|^2)^{p/2}.
    pub rhs: f64,
    pub ratio: f64,
}

pub fn khinchin_exact(a: &[C64], p: f64) -> Result<Khinchin> {
    let k = a.len();
    if k == 0 {
        return Err(Error::Domain("sequence must be nonempty".into()));
    }
    if k > KHINCHIN_MAX_TERMS {
        return Err(Error::Resource {
            what: "exact sign-pattern enumeration".into(),
            n: k,
            cap: KHINCHIN_MAX_TERMS,
        });
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Exponent {
            value: p,
            reason: "expectation exponent must be positive and finite",
        });
    }
    let patterns = 1usize << k;
    let mut total = 0.0;
    for mask in 0..patterns {
        let s: C64 = a
            .iter()
            .enumerate()
            .map(|(j, v)| if mask >> j & 1 == 1 { -v } else { *v })
            .sum();
        total += s.norm().powf(p);
    }
    let lhs = total / patterns as f64;
    let rhs = a.iter().map(|v| v.norm_sqr()).sum::<f64>().powf(p / 2.0);
    Ok(Khinchin {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(k: usize) -> Vec<C64> {
        vec![C64::new(1.0, 0.0); k]
    }

    #[test]
    fn worked_examples() {
        for p in [1.0, 2.0, 3.5] {
            assert_eq!(khinchin_exact(&ones(1), p).unwrap().ratio, 1.0);
        }
        assert_eq!(khinchin_exact(&ones(2), 2.0).unwrap().ratio, 1.0);
        // sums over 16 patterns: |s| = 4 (2x), 2 (8x), 0 (6x); mean 24/16
        let r = khinchin_exact(&ones(4), 1.0).unwrap();
        assert!((r.lhs - 1.5).abs() < 1e-15);
        assert!((r.ratio - 0.75).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(khinchin_exact(&ones(17), 1.0), Err(Error::Resource { .. })));
        assert!(khinchin_exact(&[], 1.0).is_err());
        assert!(khinchin_exact(&ones(2), 0.0).is_err());
    }
}
