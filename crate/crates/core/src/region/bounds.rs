//! Rate constraints of the lattice-alignment scheme on the Gaussian channel.
//!
//! The relay decodes, in this order: the uni-directional signals of users 1
//! and 2 (`u12`, `u13`, `u21`, `u23`), the aligned sums at the `h2` level
//! (cycle 1-3-2, cycle 1-2-3, pair 1-2), then `u31`, `u32`, and the aligned
//! sums at the `h3` level (cycle 1-3-2, cycle 1-2-3, pair 1-3, pair 2-3).
//! Users 3, 2 and 1 then decode the relay's forwarded indices successively.
//! Every denominator below is kept in its original closed form, including
//! the places where the budget `P` stands next to the per-user totals.

use serde::{Deserialize, Serialize};

use crate::error::RegionError;
use crate::model::{ChannelConfig, RateTuple};

use super::powers::{check_feasibility, DownlinkPowers, FeasibilityReport, UplinkPowers};

// below this argument log2(1 + x) loses relative accuracy
const SMALL_ARG: f64 = 1e-3;

/// `C(x) = log2(1 + x) / 2`, defined for `x > -1`.
pub fn cap(x: f64) -> Result<f64, RegionError> {
    if x.is_nan() || x <= -1.0 {
        return Err(RegionError::Domain(x));
    }
    Ok(cap_unchecked(x))
}

fn cap_unchecked(x: f64) -> f64 {
    if x.abs() < SMALL_ARG {
        0.5 * x.ln_1p() / std::f64::consts::LN_2
    } else {
        0.5 * (1.0 + x).log2()
    }
}

/// `C⁺(x) = max(0, C(x))`; zero for every `x <= 0`.
pub fn cap_plus(x: f64) -> f64 {
    if x > 0.0 {
        cap_unchecked(x)
    } else {
        0.0
    }
}

/// Rate of a nested-lattice sum decoded at signal-to-noise ratio `snr`.
fn lattice(snr: f64) -> f64 {
    cap_plus(snr - 0.5)
}

/// One of the eleven sub-streams of the scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Substream {
    Bi12,
    Bi13,
    Bi23,
    Cyc123,
    Cyc132,
    Uni12,
    Uni13,
    Uni21,
    Uni23,
    Uni31,
    Uni32,
}

impl Substream {
    pub const ALL: [Substream; 11] = [
        Substream::Bi12,
        Substream::Bi13,
        Substream::Bi23,
        Substream::Cyc123,
        Substream::Cyc132,
        Substream::Uni12,
        Substream::Uni13,
        Substream::Uni21,
        Substream::Uni23,
        Substream::Uni31,
        Substream::Uni32,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Substream::Bi12 => "R21b",
            Substream::Bi13 => "R31b",
            Substream::Bi23 => "R32b",
            Substream::Cyc123 => "R123c",
            Substream::Cyc132 => "R132c",
            Substream::Uni12 => "R12u",
            Substream::Uni13 => "R13u",
            Substream::Uni21 => "R21u",
            Substream::Uni23 => "R23u",
            Substream::Uni31 => "R31u",
            Substream::Uni32 => "R32u",
        }
    }
}

/// Maximum rate of every sub-stream.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SubstreamBounds {
    #[serde(rename = "B21b")]
    pub bi12: f64,
    #[serde(rename = "B31b")]
    pub bi13: f64,
    #[serde(rename = "B32b")]
    pub bi23: f64,
    #[serde(rename = "B123c")]
    pub cyc123: f64,
    #[serde(rename = "B132c")]
    pub cyc132: f64,
    #[serde(rename = "B12u")]
    pub uni12: f64,
    #[serde(rename = "B13u")]
    pub uni13: f64,
    #[serde(rename = "B21u")]
    pub uni21: f64,
    #[serde(rename = "B23u")]
    pub uni23: f64,
    #[serde(rename = "B31u")]
    pub uni31: f64,
    #[serde(rename = "B32u")]
    pub uni32: f64,
}

impl SubstreamBounds {
    pub fn get(&self, s: Substream) -> f64 {
        self.to_array()[Substream::ALL.iter().position(|x| *x == s).expect("listed")]
    }

    pub fn to_array(&self) -> [f64; 11] {
        [
            self.bi12, self.bi13, self.bi23, self.cyc123, self.cyc132, self.uni12, self.uni13, self.uni21,
            self.uni23, self.uni31, self.uni32,
        ]
    }

    pub fn from_array(a: [f64; 11]) -> Self {
        SubstreamBounds {
            bi12: a[0],
            bi13: a[1],
            bi23: a[2],
            cyc123: a[3],
            cyc132: a[4],
            uni12: a[5],
            uni13: a[6],
            uni21: a[7],
            uni23: a[8],
            uni31: a[9],
            uni32: a[10],
        }
    }

    /// Componentwise minimum.
    pub fn min(&self, other: &SubstreamBounds) -> SubstreamBounds {
        let (a, b) = (self.to_array(), other.to_array());
        SubstreamBounds::from_array(std::array::from_fn(|i| a[i].min(b[i])))
    }

    /// Adds up the sub-streams of each message:
    /// `R_ij = bi + cyclic + uni` with the cyclic and bi-directional rates
    /// shared by all messages of the cycle or pair.
    pub fn compose(&self) -> RateTuple {
        RateTuple {
            r12: self.bi12 + self.cyc123 + self.uni12,
            r13: self.bi13 + self.cyc132 + self.uni13,
            r21: self.bi12 + self.cyc132 + self.uni21,
            r23: self.bi23 + self.cyc123 + self.uni23,
            r31: self.bi13 + self.cyc123 + self.uni31,
            r32: self.bi23 + self.cyc132 + self.uni32,
        }
    }
}

/// Every relay-side decoding constraint, in decoding order.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct UplinkBounds {
    /// Noise plus `h3`-level interference seen by the `h2`-level lattice sums.
    pub sigma_sq: f64,
    pub r12u: f64,
    pub r13u: f64,
    pub r21u: f64,
    pub r23u: f64,
    pub r132c_h2: f64,
    pub r123c_h2: f64,
    pub r21b: f64,
    pub r31u: f64,
    pub r32u: f64,
    pub r132c_h3: f64,
    pub r123c_h3: f64,
    pub r31b: f64,
    pub r32b: f64,
}

impl UplinkBounds {
    pub fn constraints(&self) -> [(&'static str, f64); 13] {
        [
            ("relay.R12u", self.r12u),
            ("relay.R13u", self.r13u),
            ("relay.R21u", self.r21u),
            ("relay.R23u", self.r23u),
            ("relay.R132c.h2", self.r132c_h2),
            ("relay.R123c.h2", self.r123c_h2),
            ("relay.R21b", self.r21b),
            ("relay.R31u", self.r31u),
            ("relay.R32u", self.r32u),
            ("relay.R132c.h3", self.r132c_h3),
            ("relay.R123c.h3", self.r123c_h3),
            ("relay.R31b", self.r31b),
            ("relay.R32b", self.r32b),
        ]
    }

    /// Governing uplink bound per sub-stream; cyclic sums must be decodable
    /// at both levels.
    pub fn substreams(&self) -> SubstreamBounds {
        SubstreamBounds {
            bi12: self.r21b,
            bi13: self.r31b,
            bi23: self.r32b,
            cyc123: self.r123c_h2.min(self.r123c_h3),
            cyc132: self.r132c_h2.min(self.r132c_h3),
            uni12: self.r12u,
            uni13: self.r13u,
            uni21: self.r21u,
            uni23: self.r23u,
            uni31: self.r31u,
            uni32: self.r32u,
        }
    }
}

/// Evaluates every relay decoding constraint for coupled uplink powers.
pub fn uplink_bounds(cfg: &ChannelConfig, up: &UplinkPowers) -> UplinkBounds {
    let [g1, g2, g3] = cfg.gains_sq();
    let p = cfg.p;
    let [_, p2, p3] = up.user_sums();
    let ratio = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };
    let c = |num: f64, den: f64| cap_plus(ratio(num, den));

    let r12u = c(g1 * up.p12u, 1.0 + g3 * p3 + g2 * p2 + g1 * (p - up.p12u));
    let r21u = c(g2 * up.p21u, 1.0 + g3 * p3 + g2 * (p2 - up.p21u) + g1 * (p - up.p12u - up.p13u));
    let r23u = c(
        g2 * up.p23u,
        1.0 + g3 * p3 + g2 * (p2 - up.p21u - up.p23u) + g1 * (p - up.p12u - up.p13u),
    );
    let r13u = c(g1 * up.p13u, 1.0 + g3 * p3 + g2 * p2 + g1 * (p - up.p12u - up.p13u));

    let sigma_sq =
        1.0 + g3 * (2.0 * up.p31b + 2.0 * up.p32b + 2.0 * up.p31c + 2.0 * up.p32c + up.p31u + up.p32u);
    let r132c_h2 = lattice(ratio(g2 * up.p21c, sigma_sq + 2.0 * g2 * (up.p21b + up.p23c)));
    let r123c_h2 = lattice(ratio(g2 * up.p23c, sigma_sq + 2.0 * g2 * up.p21b));
    let r21b = lattice(ratio(g2 * up.p21b, sigma_sq));

    let r31u = c(
        g3 * up.p31u,
        1.0 + g3 * (2.0 * up.p32b + 2.0 * up.p31b + 2.0 * up.p31c + 2.0 * up.p32c + up.p32u),
    );
    let r32u = c(g3 * up.p32u, 1.0 + 2.0 * g3 * (up.p32b + up.p31b + up.p31c + up.p32c));
    let r132c_h3 = lattice(ratio(g3 * up.p32c, 1.0 + 2.0 * g3 * (up.p32b + up.p31b + up.p31c)));
    let r123c_h3 = lattice(ratio(g3 * up.p31c, 1.0 + 2.0 * g3 * (up.p32b + up.p31b)));
    let r31b = lattice(ratio(g3 * up.p31b, 1.0 + 2.0 * g3 * up.p32b));
    let r32b = lattice(g3 * up.p32b);

    UplinkBounds {
        sigma_sq,
        r12u,
        r13u,
        r21u,
        r23u,
        r132c_h2,
        r123c_h2,
        r21b,
        r31u,
        r32u,
        r132c_h3,
        r123c_h3,
        r31b,
        r32b,
    }
}

/// Every user-side decoding constraint.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct DownlinkBounds {
    pub sigma_r1_sq: f64,
    pub sigma_r2_sq: f64,
    pub u3_r13u: f64,
    pub u3_r23u: f64,
    pub u3_r132c: f64,
    pub u3_r123c: f64,
    pub u3_r31b: f64,
    pub u3_r32b: f64,
    pub u2_r12u: f64,
    pub u2_r32u: f64,
    pub u2_r123c: f64,
    pub u2_r132c: f64,
    pub u2_r21b: f64,
    pub u1_r21u: f64,
    pub u1_r31u: f64,
}

impl DownlinkBounds {
    pub fn constraints(&self) -> [(&'static str, f64); 13] {
        [
            ("U3.R13u", self.u3_r13u),
            ("U3.R23u", self.u3_r23u),
            ("U3.R132c", self.u3_r132c),
            ("U3.R123c", self.u3_r123c),
            ("U3.R31b", self.u3_r31b),
            ("U3.R32b", self.u3_r32b),
            ("U2.R12u", self.u2_r12u),
            ("U2.R32u", self.u2_r32u),
            ("U2.R123c", self.u2_r123c),
            ("U2.R132c", self.u2_r132c),
            ("U2.R21b", self.u2_r21b),
            ("U1.R21u", self.u1_r21u),
            ("U1.R31u", self.u1_r31u),
        ]
    }

    /// Governing downlink bound per sub-stream. Stronger users are assumed to
    /// decode whatever a weaker user decodes.
    pub fn substreams(&self) -> SubstreamBounds {
        SubstreamBounds {
            bi12: self.u2_r21b,
            bi13: self.u3_r31b,
            bi23: self.u3_r32b,
            cyc123: self.u3_r123c.min(self.u2_r123c),
            cyc132: self.u3_r132c.min(self.u2_r132c),
            uni12: self.u2_r12u,
            uni13: self.u3_r13u,
            uni21: self.u1_r21u,
            uni23: self.u3_r23u,
            uni31: self.u1_r31u,
            uni32: self.u2_r32u,
        }
    }
}

/// Evaluates every downlink decoding constraint.
pub fn downlink_bounds(cfg: &ChannelConfig, down: &DownlinkPowers) -> DownlinkBounds {
    let [g1, g2, g3] = cfg.gains_sq();
    let d = down;
    let c = |num: f64, den: f64| if num == 0.0 { 0.0 } else { cap_plus(num / den) };

    let sigma_r1_sq = 1.0 + g3 * (d.t12 + d.t32 + d.s12 + d.s21 + d.r21 + d.t21 + d.t31);
    let u3_r13u = c(g3 * d.t13, sigma_r1_sq + g3 * (d.t23 + d.s32 + d.s31 + d.r31 + d.r32));
    let u3_r23u = c(g3 * d.t23, sigma_r1_sq + g3 * (d.s32 + d.s31 + d.r31 + d.r32));
    let u3_r132c = c(g3 * d.s32, sigma_r1_sq + g3 * (d.s31 + d.r31 + d.r32));
    let u3_r123c = c(g3 * d.s31, sigma_r1_sq + g3 * (d.r31 + d.r32));
    let u3_r31b = c(g3 * d.r31, sigma_r1_sq + g3 * d.r32);
    let u3_r32b = c(g3 * d.r32, sigma_r1_sq);

    let sigma_r2_sq = 1.0 + g2 * (d.t21 + d.t31);
    let u2_r12u = c(g2 * d.t12, sigma_r2_sq + g2 * (d.t32 + d.s12 + d.s21 + d.r21));
    let u2_r32u = c(g2 * d.t32, sigma_r2_sq + g2 * (d.s12 + d.s21 + d.r21));
    let u2_r123c = c(g2 * d.s12, sigma_r2_sq + g2 * (d.s21 + d.r21));
    let u2_r132c = c(g2 * d.s21, sigma_r2_sq + g2 * d.r21);
    let u2_r21b = c(g2 * d.r21, sigma_r2_sq);

    let u1_r21u = c(g1 * d.t21, 1.0 + g1 * d.t31);
    let u1_r31u = c(g1 * d.t31, 1.0);

    DownlinkBounds {
        sigma_r1_sq,
        sigma_r2_sq,
        u3_r13u,
        u3_r23u,
        u3_r132c,
        u3_r123c,
        u3_r31b,
        u3_r32b,
        u2_r12u,
        u2_r32u,
        u2_r123c,
        u2_r132c,
        u2_r21b,
        u1_r21u,
        u1_r31u,
    }
}

/// Everything computed for one allocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub feasibility: FeasibilityReport,
    pub uplink: UplinkBounds,
    pub downlink: DownlinkBounds,
    pub effective: SubstreamBounds,
    pub rates: RateTuple,
}

/// Evaluates all constraints without requiring feasibility.
pub fn evaluate(cfg: &ChannelConfig, up: &UplinkPowers, down: &DownlinkPowers) -> Evaluation {
    let uplink = uplink_bounds(cfg, up);
    let downlink = downlink_bounds(cfg, down);
    let effective = uplink.substreams().min(&downlink.substreams());
    Evaluation {
        feasibility: check_feasibility(up, down, cfg),
        uplink,
        downlink,
        effective,
        rates: effective.compose(),
    }
}

/// Relative tolerance on alignment when accepting explicit uplink powers.
pub const ALIGNMENT_TOL: f64 = 1e-9;

/// Rate tuple achieved by one power allocation: every sub-stream runs at
/// the smaller of its uplink and downlink bound.
pub fn achievable_point(cfg: &ChannelConfig, up: &UplinkPowers, down: &DownlinkPowers) -> Result<RateTuple, RegionError> {
    up.validate()?;
    down.validate()?;
    up.check_coupling(cfg, ALIGNMENT_TOL)?;
    let eval = evaluate(cfg, up, down);
    if !eval.feasibility.feasible {
        let f = eval.feasibility;
        return Err(RegionError::Infeasible(format!(
            "P1={}, P2={}, P3={}, relay={} with budget P={}",
            f.p1, f.p2, f.p3, f.downlink_sum, cfg.p
        )));
    }
    Ok(eval.rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::powers::{derive_coupled_powers, FreeUplinkPowers};
    use approx::assert_relative_eq;

    fn unit(p: f64) -> ChannelConfig {
        ChannelConfig::new(1.0, 1.0, 1.0, p).unwrap()
    }

    #[test]
    fn capacity_function() {
        assert_eq!(cap(1.0).unwrap(), 0.5);
        assert_eq!(cap(0.0).unwrap(), 0.0);
        assert_eq!(cap(15.0).unwrap(), 2.0);
        assert_eq!(cap(3.0).unwrap(), 1.0);
        assert_eq!(cap_plus(-0.25), 0.0);
        assert_eq!(cap_plus(-5.0), 0.0);
        assert!(matches!(cap(-1.0), Err(RegionError::Domain(_))));
        assert!(cap(-0.5).unwrap() < 0.0);
        assert_relative_eq!(cap(1e-9).unwrap(), 0.5 * 1e-9 / std::f64::consts::LN_2, max_relative = 1e-12);
    }

    #[test]
    fn zero_powers_give_zero_bounds() {
        let c = unit(10.0);
        let e = evaluate(&c, &UplinkPowers::default(), &DownlinkPowers::default());
        assert!(e.uplink.constraints().iter().all(|(_, v)| *v == 0.0));
        assert!(e.downlink.constraints().iter().all(|(_, v)| *v == 0.0));
        assert_eq!(e.rates, RateTuple::zero());
        assert_eq!(e.uplink.sigma_sq, 1.0);
    }

    #[test]
    fn hand_evaluated_bi_bounds() {
        let c = unit(100.0);
        let up = derive_coupled_powers(&FreeUplinkPowers { p21b: 1.0, ..Default::default() }, &c).unwrap();
        assert_eq!(up.p12b, 1.0);
        let b = uplink_bounds(&c, &up);
        assert_relative_eq!(b.r21b, 0.5 * 1.5f64.log2(), max_relative = 1e-15);
        assert_relative_eq!(b.r21b, 0.2925, epsilon = 1e-4);

        let up = derive_coupled_powers(&FreeUplinkPowers { p32b: 1.0, ..Default::default() }, &c).unwrap();
        let b = uplink_bounds(&c, &up);
        assert_relative_eq!(b.r32b, 0.5 * 1.5f64.log2(), max_relative = 1e-15);
    }

    #[test]
    fn hand_evaluated_downlink() {
        let c = unit(100.0);
        let b = downlink_bounds(&c, &DownlinkPowers { r32: 3.0, ..Default::default() });
        assert_eq!(b.u3_r32b, 1.0);
        assert_eq!(b.sigma_r1_sq, 1.0);
        let b = downlink_bounds(&c, &DownlinkPowers { t31: 1.0, ..Default::default() });
        assert_eq!(b.u1_r31u, 0.5);
    }

    #[test]
    fn bi_only_is_symmetric() {
        let c = ChannelConfig::new(2.0, 1.3, 0.8, 40.0).unwrap();
        let up = derive_coupled_powers(&FreeUplinkPowers { p21b: 5.0, p31b: 7.0, p32b: 3.0, ..Default::default() }, &c)
            .unwrap();
        let down = DownlinkPowers { r21: 10.0, r31: 12.0, r32: 15.0, ..Default::default() };
        let r = achievable_point(&c, &up, &down).unwrap();
        assert_eq!(r.r12, r.r21);
        assert_eq!(r.r13, r.r31);
        assert_eq!(r.r23, r.r32);
        assert!(r.r12 > 0.0 && r.r13 > 0.0 && r.r23 > 0.0);
    }

    #[test]
    fn infeasible_and_misaligned_are_rejected() {
        let c = unit(1.0);
        let up = derive_coupled_powers(&FreeUplinkPowers { p31u: 2.0, ..Default::default() }, &c).unwrap();
        assert!(matches!(achievable_point(&c, &up, &DownlinkPowers::default()), Err(RegionError::Infeasible(_))));
        let mut up = UplinkPowers::default();
        up.p21b = 0.5;
        assert!(matches!(achievable_point(&c, &up, &DownlinkPowers::default()), Err(RegionError::Coupling(_))));
    }

    #[test]
    fn composition_shares_cyclic_and_bi_rates() {
        let s = SubstreamBounds::from_array([1.0, 2.0, 3.0, 10.0, 20.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        let r = s.compose();
        assert_eq!(r.to_array(), [11.1, 22.2, 21.3, 13.4, 12.5, 23.6]);
        assert_eq!(s.get(Substream::Cyc132), 20.0);
    }
}
