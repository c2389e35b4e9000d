//! The constant-gap achievable region and its outer-bound proxy.
//!
//! Eight sum-rate inequalities `lhs(R) <= rhs`, where each `rhs` is a capacity
//! term minus a constant (2, 3 or 7/2 bits). Dropping the constants gives the
//! proxy used to sanity-check achievable points.

use serde::{Deserialize, Serialize};

use crate::model::{ChannelConfig, RateTuple};

use super::bounds::cap_plus;

/// Pair slots (in `R12, R13, R21, R23, R31, R32` order) summed by each
/// inequality.
pub const INEQUALITY_TERMS: [&[usize]; 8] = [
    &[4, 5],    // R31 + R32
    &[1, 3],    // R13 + R23
    &[0, 1, 5], // R12 + R13 + R32
    &[1, 3, 0], // R13 + R23 + R12
    &[0, 4, 5], // R12 + R31 + R32
    &[1, 3, 2], // R13 + R23 + R21
    &[2, 4, 3], // R21 + R31 + R23
    &[2, 4, 5], // R21 + R31 + R32
];

/// Gap constants subtracted from the proxy.
pub const GAP_CONSTANTS: [f64; 8] = [2.0, 2.0, 3.0, 3.0, 3.0, 3.0, 3.5, 3.5];

pub fn inequality_label(k: usize) -> String {
    const NAMES: [&str; 6] = ["R12", "R13", "R21", "R23", "R31", "R32"];
    INEQUALITY_TERMS[k].iter().map(|&i| NAMES[i]).collect::<Vec<_>>().join("+")
}

/// Left-hand sides of the eight inequalities.
pub fn inequality_lhs(r: &RateTuple) -> [f64; 8] {
    let a = r.to_array();
    INEQUALITY_TERMS.map(|terms| terms.iter().map(|&i| a[i]).sum())
}

/// Capacity terms of the eight inequalities without the gap constants.
pub fn outer_bound_proxy(cfg: &ChannelConfig) -> [f64; 8] {
    let [g1, g2, g3] = cfg.gains_sq();
    let p = cfg.p;
    // arguments are nonnegative, so C and C+ agree
    let weak = cap_plus(g3 * p);
    let mid = cap_plus(g2 * p + g3 * p);
    let coherent = cap_plus((cfg.h2.abs() + cfg.h3.abs()).powi(2) * p);
    [weak, weak, mid, mid, cap_plus(g1 * p + g2 * p), cap_plus(g1 * p + g3 * p), coherent, coherent]
}

/// Right-hand sides of the constant-gap region; may be negative at low power.
pub fn corollary_rhs(cfg: &ChannelConfig) -> [f64; 8] {
    let proxy = outer_bound_proxy(cfg);
    std::array::from_fn(|k| proxy[k] - GAP_CONSTANTS[k])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionMembership {
    pub member: bool,
    pub inequalities: Vec<InequalityCheck>,
}

impl RegionMembership {
    /// Indices of the violated inequalities.
    pub fn violated(&self) -> Vec<usize> {
        self.inequalities.iter().enumerate().filter(|(_, c)| c.slack < 0.0).map(|(k, _)| k).collect()
    }
}

fn membership(r: &RateTuple, rhs: [f64; 8]) -> RegionMembership {
    let lhs = inequality_lhs(r);
    let inequalities: Vec<InequalityCheck> = (0..8)
        .map(|k| InequalityCheck { label: inequality_label(k), lhs: lhs[k], rhs: rhs[k], slack: rhs[k] - lhs[k] })
        .collect();
    RegionMembership { member: inequalities.iter().all(|c| c.slack >= 0.0), inequalities }
}

/// Checks `r` against the constant-gap region.
pub fn corollary_region_contains(cfg: &ChannelConfig, r: &RateTuple) -> RegionMembership {
    membership(r, corollary_rhs(cfg))
}

/// Checks `r` against the proxy bound.
pub fn proxy_contains(cfg: &ChannelConfig, r: &RateTuple) -> RegionMembership {
    membership(r, outer_bound_proxy(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_at_snr_fifteen() {
        // h3² P = 15 puts the first right-hand side at exactly zero
        let cfg = ChannelConfig::new(3.0, 3.0, 1.0, 15.0).unwrap();
        assert_eq!(corollary_rhs(&cfg)[0], 0.0);
        let m = corollary_region_contains(&cfg, &RateTuple::zero());
        assert!(m.member);
        assert_eq!(m.inequalities[0].slack, 0.0);
    }

    #[test]
    fn low_power_region_is_empty() {
        let cfg = ChannelConfig::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let m = corollary_region_contains(&cfg, &RateTuple::zero());
        assert!(!m.member);
        assert_eq!(m.violated().len(), 8);
    }

    #[test]
    fn large_power_zero_tuple_member() {
        let cfg = ChannelConfig::new(1.0, 1.0, 1.0, 1e6).unwrap();
        assert!(corollary_region_contains(&cfg, &RateTuple::zero()).member);
    }

    #[test]
    fn exceeding_first_inequality() {
        // strong h1, h2 keep every other inequality slack
        let cfg = ChannelConfig::new(4.0, 4.0, 1.0, 1000.0).unwrap();
        let eps = 1e-3;
        let target = 0.5 * 1001f64.log2() - 2.0 + eps;
        let r = RateTuple { r31: target / 2.0, r32: target / 2.0, ..RateTuple::zero() };
        let m = corollary_region_contains(&cfg, &r);
        assert!(!m.member);
        assert_eq!(m.violated(), vec![0]);
        assert!((m.inequalities[0].slack + eps).abs() < 1e-12);
    }

    #[test]
    fn proxy_values() {
        let cfg = ChannelConfig::new(1.0, 1.0, 1.0, 3.0).unwrap();
        let proxy = outer_bound_proxy(&cfg);
        assert_eq!(proxy[0], 1.0);
        // (|h2| + |h3|)² P = 12
        assert_eq!(proxy[6], 0.5 * 13f64.log2());
        let tiny = ChannelConfig::new(1.0, 1.0, 1.0, 1e-300).unwrap();
        assert!(outer_bound_proxy(&tiny).iter().all(|&v| v >= 0.0 && v < 1e-290));
    }

    #[test]
    fn labels() {
        assert_eq!(inequality_label(0), "R31+R32");
        assert_eq!(inequality_label(6), "R21+R31+R23");
    }
}
