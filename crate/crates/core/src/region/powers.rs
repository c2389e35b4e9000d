//! Uplink and downlink power allocations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::RegionError;
use crate::model::ChannelConfig;

macro_rules! power_struct {
    ($(#[$meta:meta])* $name:ident { $($field:ident => $json:literal),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                #[serde(rename = $json, default)]
                pub $field: f64,
            )*
        }

        impl $name {
            pub const NAMES: &'static [&'static str] = &[$($json),*];
            pub const LEN: usize = Self::NAMES.len();

            pub fn to_vec(&self) -> Vec<f64> {
                vec![$(self.$field),*]
            }

            /// Builds from values in [`Self::NAMES`] order.
            pub fn from_slice(v: &[f64]) -> Self {
                assert_eq!(v.len(), Self::LEN, "wrong number of powers");
                let mut it = v.iter().copied();
                $name { $($field: it.next().unwrap()),* }
            }

            /// Rejects negative or non-finite entries.
            pub fn validate(&self) -> Result<(), RegionError> {
                for (name, value) in Self::NAMES.iter().zip(self.to_vec()) {
                    if !(value.is_finite() && value >= 0.0) {
                        return Err(RegionError::InvalidPower { name: name.to_string(), value });
                    }
                }
                Ok(())
            }

            pub fn scaled(&self, factor: f64) -> Self {
                $name { $($field: self.$field * factor),* }
            }
        }
    };
}

power_struct! {
    /// The thirteen uplink powers that are not fixed by alignment.
    FreeUplinkPowers {
        p21b => "P21b", p31b => "P31b", p32b => "P32b",
        p23c => "P23c", p31c => "P31c", p32c => "P32c", p21c => "P21c",
        p12u => "P12u", p13u => "P13u", p21u => "P21u", p23u => "P23u", p31u => "P31u", p32u => "P32u",
    }
}

power_struct! {
    /// Every uplink sub-stream power. Alignment ties seven of them to the
    /// free powers, see [`derive_coupled_powers`].
    UplinkPowers {
        p12b => "P12b", p21b => "P21b", p13b => "P13b", p31b => "P31b", p23b => "P23b", p32b => "P32b",
        p12c => "P12c", p23c => "P23c", tp23c => "tP23c", p31c => "P31c",
        p13c => "P13c", tp13c => "tP13c", p32c => "P32c", p21c => "P21c",
        p12u => "P12u", p13u => "P13u", p21u => "P21u", p23u => "P23u", p31u => "P31u", p32u => "P32u",
    }
}

power_struct! {
    /// Relay powers: `t` for forwarded uni-directional messages, `s` for
    /// cyclic sums, `r` for bi-directional sums.
    DownlinkPowers {
        t12 => "t12", t13 => "t13", t21 => "t21", t23 => "t23", t31 => "t31", t32 => "t32",
        s12 => "s12", s31 => "s31", s21 => "s21", s32 => "s32",
        r21 => "r21", r31 => "r31", r32 => "r32",
    }
}

impl UplinkPowers {
    /// Per-user totals `[P1, P2, P3]`.
    pub fn user_sums(&self) -> [f64; 3] {
        [
            self.p12b + self.p13b + self.p12c + self.p13c + self.tp13c + self.p12u + self.p13u,
            self.p21b + self.p23b + self.p21c + self.p23c + self.tp23c + self.p21u + self.p23u,
            self.p31b + self.p32b + self.p31c + self.p32c + self.p31u + self.p32u,
        ]
    }

    pub fn free(&self) -> FreeUplinkPowers {
        FreeUplinkPowers {
            p21b: self.p21b,
            p31b: self.p31b,
            p32b: self.p32b,
            p23c: self.p23c,
            p31c: self.p31c,
            p32c: self.p32c,
            p21c: self.p21c,
            p12u: self.p12u,
            p13u: self.p13u,
            p21u: self.p21u,
            p23u: self.p23u,
            p31u: self.p31u,
            p32u: self.p32u,
        }
    }

    /// Each aligned pair as `(name, h_a² P_a, h_b² P_b)`.
    pub fn couplings(&self, cfg: &ChannelConfig) -> [(&'static str, f64, f64); 7] {
        let [g1, g2, g3] = cfg.gains_sq();
        [
            ("h1^2 P12b = h2^2 P21b", g1 * self.p12b, g2 * self.p21b),
            ("h1^2 P13b = h3^2 P31b", g1 * self.p13b, g3 * self.p31b),
            ("h2^2 P23b = h3^2 P32b", g2 * self.p23b, g3 * self.p32b),
            ("h1^2 P12c = h2^2 P23c", g1 * self.p12c, g2 * self.p23c),
            ("h2^2 tP23c = h3^2 P31c", g2 * self.tp23c, g3 * self.p31c),
            ("h1^2 P13c = h3^2 P32c", g1 * self.p13c, g3 * self.p32c),
            ("h1^2 tP13c = h2^2 P21c", g1 * self.tp13c, g2 * self.p21c),
        ]
    }

    /// Fails if any alignment equality is off by more than `rel_tol`.
    pub fn check_coupling(&self, cfg: &ChannelConfig, rel_tol: f64) -> Result<(), RegionError> {
        for (name, a, b) in self.couplings(cfg) {
            if (a - b).abs() > rel_tol * a.abs().max(b.abs()) {
                return Err(RegionError::Coupling(format!("{name}: {a} vs {b}")));
            }
        }
        Ok(())
    }
}

impl DownlinkPowers {
    pub fn total(&self) -> f64 {
        self.to_vec().iter().sum()
    }
}

/// Fills in the seven aligned powers so that every alignment equality holds.
pub fn derive_coupled_powers(free: &FreeUplinkPowers, cfg: &ChannelConfig) -> Result<UplinkPowers, RegionError> {
    free.validate()?;
    let [g1, g2, g3] = cfg.gains_sq();
    Ok(UplinkPowers {
        p12b: g2 * free.p21b / g1,
        p21b: free.p21b,
        p13b: g3 * free.p31b / g1,
        p31b: free.p31b,
        p23b: g3 * free.p32b / g2,
        p32b: free.p32b,
        p12c: g2 * free.p23c / g1,
        p23c: free.p23c,
        tp23c: g3 * free.p31c / g2,
        p31c: free.p31c,
        p13c: g3 * free.p32c / g1,
        tp13c: g2 * free.p21c / g1,
        p32c: free.p32c,
        p21c: free.p21c,
        p12u: free.p12u,
        p13u: free.p13u,
        p21u: free.p21u,
        p23u: free.p23u,
        p31u: free.p31u,
        p32u: free.p32u,
    })
}

/// Power totals and slacks of an allocation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    #[serde(rename = "P3")]
    pub p3: f64,
    pub downlink_sum: f64,
    /// `P - P1`, `P - P2`, `P - P3`, `P - downlink_sum`.
    pub slack: [f64; 4],
    pub feasible: bool,
}

/// Relative tolerance on the power budget.
pub const FEASIBILITY_TOL: f64 = 1e-9;

pub fn check_feasibility(up: &UplinkPowers, down: &DownlinkPowers, cfg: &ChannelConfig) -> FeasibilityReport {
    let [p1, p2, p3] = up.user_sums();
    let downlink_sum = down.total();
    let slack = [cfg.p - p1, cfg.p - p2, cfg.p - p3, cfg.p - downlink_sum];
    let feasible = slack.iter().all(|s| *s >= -FEASIBILITY_TOL * cfg.p);
    FeasibilityReport { p1, p2, p3, downlink_sum, slack, feasible }
}

/// Free uplink and downlink powers, the optimizer's search space.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Allocation {
    pub uplink: FreeUplinkPowers,
    pub downlink: DownlinkPowers,
}

impl Allocation {
    pub const DIM: usize = FreeUplinkPowers::LEN + DownlinkPowers::LEN;

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.uplink.to_vec();
        v.extend(self.downlink.to_vec());
        v
    }

    pub fn from_slice(v: &[f64]) -> Self {
        let (up, down) = v.split_at(FreeUplinkPowers::LEN);
        Allocation { uplink: FreeUplinkPowers::from_slice(up), downlink: DownlinkPowers::from_slice(down) }
    }

    pub fn coupled(&self, cfg: &ChannelConfig) -> Result<UplinkPowers, RegionError> {
        derive_coupled_powers(&self.uplink, cfg)
    }

    /// Scales the uplink uniformly until every user meets the budget, and
    /// the downlink until the relay does. Uniform scaling keeps alignment.
    pub fn project(&self, cfg: &ChannelConfig) -> Allocation {
        let clean = |v: Vec<f64>| v.into_iter().map(|x| if x.is_finite() { x.max(0.0) } else { 0.0 }).collect::<Vec<_>>();
        let uplink = FreeUplinkPowers::from_slice(&clean(self.uplink.to_vec()));
        let downlink = DownlinkPowers::from_slice(&clean(self.downlink.to_vec()));
        let coupled = derive_coupled_powers(&uplink, cfg).expect("cleaned powers are valid");
        let peak = coupled.user_sums().into_iter().fold(0.0, f64::max);
        let uplink = if peak > cfg.p { uplink.scaled(cfg.p / peak) } else { uplink };
        let total = downlink.total();
        let downlink = if total > cfg.p { downlink.scaled(cfg.p / total) } else { downlink };
        Allocation { uplink, downlink }
    }

    /// Random feasible allocation: each power is zero with probability 0.3,
    /// otherwise uniform, then both links are scaled to use a uniform random
    /// fraction of the budget.
    pub fn random<R: Rng>(cfg: &ChannelConfig, rng: &mut R) -> Allocation {
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() }).collect()
        };
        let up = FreeUplinkPowers::from_slice(&draw(FreeUplinkPowers::LEN));
        let down = DownlinkPowers::from_slice(&draw(DownlinkPowers::LEN));
        let coupled = derive_coupled_powers(&up, cfg).expect("nonnegative draws");
        let peak = coupled.user_sums().into_iter().fold(0.0, f64::max);
        let up_fill = rng.random::<f64>();
        let down_fill = rng.random::<f64>();
        let up = if peak > 0.0 { up.scaled(up_fill * cfg.p / peak) } else { up };
        let total = down.total();
        let down = if total > 0.0 { down.scaled(down_fill * cfg.p / total) } else { down };
        Allocation { uplink: up, downlink: down }
    }

    /// Bi-directional streams only, each user's budget split equally and
    /// the relay's budget split equally over the three forwarded sums.
    pub fn bi_only_equal_split(cfg: &ChannelConfig) -> Allocation {
        // user 3 carries P31b and P32b; with h1² >= h2² >= h3² the aligned
        // powers at users 1 and 2 never exceed their own two-way split
        let half = cfg.p / 2.0;
        let third = cfg.p / 3.0;
        Allocation {
            uplink: FreeUplinkPowers { p21b: half, p31b: half, p32b: half, ..Default::default() },
            downlink: DownlinkPowers { r21: third, r31: third, r32: third, ..Default::default() },
        }
        .project(cfg)
    }
}

/// Uplink powers as read from JSON: the free powers default to zero, the
/// aligned powers may be given and are then checked.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UplinkInput {
    #[serde(rename = "P21b", default)]
    pub p21b: f64,
    #[serde(rename = "P31b", default)]
    pub p31b: f64,
    #[serde(rename = "P32b", default)]
    pub p32b: f64,
    #[serde(rename = "P23c", default)]
    pub p23c: f64,
    #[serde(rename = "P31c", default)]
    pub p31c: f64,
    #[serde(rename = "P32c", default)]
    pub p32c: f64,
    #[serde(rename = "P21c", default)]
    pub p21c: f64,
    #[serde(rename = "P12u", default)]
    pub p12u: f64,
    #[serde(rename = "P13u", default)]
    pub p13u: f64,
    #[serde(rename = "P21u", default)]
    pub p21u: f64,
    #[serde(rename = "P23u", default)]
    pub p23u: f64,
    #[serde(rename = "P31u", default)]
    pub p31u: f64,
    #[serde(rename = "P32u", default)]
    pub p32u: f64,
    #[serde(rename = "P12b", default, skip_serializing_if = "Option::is_none")]
    pub p12b: Option<f64>,
    #[serde(rename = "P13b", default, skip_serializing_if = "Option::is_none")]
    pub p13b: Option<f64>,
    #[serde(rename = "P23b", default, skip_serializing_if = "Option::is_none")]
    pub p23b: Option<f64>,
    #[serde(rename = "P12c", default, skip_serializing_if = "Option::is_none")]
    pub p12c: Option<f64>,
    #[serde(rename = "tP23c", default, skip_serializing_if = "Option::is_none")]
    pub tp23c: Option<f64>,
    #[serde(rename = "P13c", default, skip_serializing_if = "Option::is_none")]
    pub p13c: Option<f64>,
    #[serde(rename = "tP13c", default, skip_serializing_if = "Option::is_none")]
    pub tp13c: Option<f64>,
}

/// Allocation as read from JSON.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationInput {
    #[serde(default)]
    pub uplink: UplinkInput,
    #[serde(default)]
    pub downlink: DownlinkPowers,
}

/// Relative tolerance for aligned powers given explicitly in an input.
pub const COUPLING_TOL: f64 = 1e-9;

impl AllocationInput {
    /// Validates powers and alignment, returning the free allocation and the
    /// full uplink powers.
    pub fn resolve(&self, cfg: &ChannelConfig) -> Result<(Allocation, UplinkPowers), RegionError> {
        let f = &self.uplink;
        let free = FreeUplinkPowers {
            p21b: f.p21b,
            p31b: f.p31b,
            p32b: f.p32b,
            p23c: f.p23c,
            p31c: f.p31c,
            p32c: f.p32c,
            p21c: f.p21c,
            p12u: f.p12u,
            p13u: f.p13u,
            p21u: f.p21u,
            p23u: f.p23u,
            p31u: f.p31u,
            p32u: f.p32u,
        };
        self.downlink.validate()?;
        let coupled = derive_coupled_powers(&free, cfg)?;
        let given = [
            ("P12b", self.uplink.p12b, coupled.p12b),
            ("P13b", self.uplink.p13b, coupled.p13b),
            ("P23b", self.uplink.p23b, coupled.p23b),
            ("P12c", self.uplink.p12c, coupled.p12c),
            ("tP23c", self.uplink.tp23c, coupled.tp23c),
            ("P13c", self.uplink.p13c, coupled.p13c),
            ("tP13c", self.uplink.tp13c, coupled.tp13c),
        ];
        for (name, value, derived) in given {
            if let Some(v) = value {
                if (v - derived).abs() > COUPLING_TOL * v.abs().max(derived.abs()) {
                    return Err(RegionError::Coupling(format!(
                        "{name} = {v} but alignment requires {derived}"
                    )));
                }
            }
        }
        Ok((Allocation { uplink: free, downlink: self.downlink }, coupled))
    }
}

impl From<Allocation> for AllocationInput {
    fn from(a: Allocation) -> Self {
        let u = a.uplink;
        AllocationInput {
            uplink: UplinkInput {
                p21b: u.p21b,
                p31b: u.p31b,
                p32b: u.p32b,
                p23c: u.p23c,
                p31c: u.p31c,
                p32c: u.p32c,
                p21c: u.p21c,
                p12u: u.p12u,
                p13u: u.p13u,
                p21u: u.p21u,
                p23u: u.p23u,
                p31u: u.p31u,
                p32u: u.p32u,
                ..Default::default()
            },
            downlink: a.downlink,
        }
    }
}
