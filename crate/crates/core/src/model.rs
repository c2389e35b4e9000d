//! Channel configuration, rate tuples and flow decomposition.
//!
//! A rate demand on the Y-channel is six pairwise rates `R_ij` (user `i` to
//! user `j`). The transmit schemes in this crate split every demand into
//! three kinds of flow:
//!
//! * bi-directional: equal rates `R_jk = R_kj` exchanged by one pair,
//! * cyclic: equal rates around `1 -> 2 -> 3 -> 1` or `1 -> 3 -> 2 -> 1`,
//! * uni-directional: whatever is left.
//!
//! [`decompose_flows`] extracts bi-directional flow first, cyclic flow from
//! the remainder, and leaves the rest as uni-directional flow. The output is
//! unique because every step takes a minimum.

use std::fmt;
use std::ops::{Add, Sub};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// One of the three users of the Y-channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum User {
    #[serde(rename = "U1")]
    One,
    #[serde(rename = "U2")]
    Two,
    #[serde(rename = "U3")]
    Three,
}

impl User {
    pub const ALL: [User; 3] = [User::One, User::Two, User::Three];

    /// Zero-based index.
    pub fn index(self) -> usize {
        match self {
            User::One => 0,
            User::Two => 1,
            User::Three => 2,
        }
    }

    /// One-based label as used in `R_ij`.
    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn from_index(i: usize) -> Option<User> {
        User::ALL.get(i).copied()
    }

    /// The user that is neither `self` nor `other`.
    pub fn third(self, other: User) -> User {
        debug_assert_ne!(self, other);
        User::from_index(3 - self.index() - other.index()).expect("distinct users")
    }
}

impl fmt::Display for User {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U{}", self.number())
    }
}

/// Ordered (source, destination) pair.
pub type Pair = (User, User);

/// The six ordered pairs in the canonical order `12, 13, 21, 23, 31, 32`.
pub const PAIRS: [Pair; 6] = [
    (User::One, User::Two),
    (User::One, User::Three),
    (User::Two, User::One),
    (User::Two, User::Three),
    (User::Three, User::One),
    (User::Three, User::Two),
];

fn pair_slot(from: User, to: User) -> usize {
    match (from, to) {
        (User::One, User::Two) => 0,
        (User::One, User::Three) => 1,
        (User::Two, User::One) => 2,
        (User::Two, User::Three) => 3,
        (User::Three, User::One) => 4,
        (User::Three, User::Two) => 5,
        _ => panic!("a user does not send to itself"),
    }
}

/// Numeric type usable as a rate.
///
/// Implemented for every ordered additive type with a zero, so the same
/// decomposition serves integer bit counts and real-valued rates.
pub trait Rate: Copy + PartialOrd + Zero + Add<Output = Self> + Sub<Output = Self> {}

impl<T> Rate for T where T: Copy + PartialOrd + Zero + Add<Output = T> + Sub<Output = T> {}

fn min<T: Rate>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

/// Real gains `h1, h2, h3` and the common power budget `P`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannelConfig")]
pub struct ChannelConfig {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    #[serde(rename = "P")]
    pub p: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannelConfig {
    h1: f64,
    h2: f64,
    h3: f64,
    #[serde(rename = "P")]
    p: f64,
}

impl TryFrom<RawChannelConfig> for ChannelConfig {
    type Error = ModelError;

    fn try_from(raw: RawChannelConfig) -> Result<Self, Self::Error> {
        ChannelConfig::new(raw.h1, raw.h2, raw.h3, raw.p)
    }
}

impl ChannelConfig {
    /// Validates `P > 0`, finite nonzero gains and `h1² >= h2² >= h3²`.
    pub fn new(h1: f64, h2: f64, h3: f64, p: f64) -> Result<Self, ModelError> {
        for (name, h) in [("h1", h1), ("h2", h2), ("h3", h3)] {
            if !h.is_finite() || h == 0.0 {
                return Err(ModelError::InvalidGain { name, value: h });
            }
        }
        if !(p.is_finite() && p > 0.0) {
            return Err(ModelError::InvalidPower(p));
        }
        if h1 * h1 < h2 * h2 || h2 * h2 < h3 * h3 {
            return Err(ModelError::GainOrder { h1, h2, h3 });
        }
        Ok(ChannelConfig { h1, h2, h3, p })
    }

    /// Squared gains `[h1², h2², h3²]`.
    pub fn gains_sq(&self) -> [f64; 3] {
        [self.h1 * self.h1, self.h2 * self.h2, self.h3 * self.h3]
    }

    pub fn gain(&self, user: User) -> f64 {
        [self.h1, self.h2, self.h3][user.index()]
    }
}

/// Six pairwise rates, `R_ij` from user `i` to user `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateTuple<T = f64> {
    #[serde(rename = "R12")]
    pub r12: T,
    #[serde(rename = "R13")]
    pub r13: T,
    #[serde(rename = "R21")]
    pub r21: T,
    #[serde(rename = "R23")]
    pub r23: T,
    #[serde(rename = "R31")]
    pub r31: T,
    #[serde(rename = "R32")]
    pub r32: T,
}

impl<T: Rate> RateTuple<T> {
    /// Builds a tuple from `[R12, R13, R21, R23, R31, R32]`.
    pub fn from_array(a: [T; 6]) -> Self {
        RateTuple { r12: a[0], r13: a[1], r21: a[2], r23: a[3], r31: a[4], r32: a[5] }
    }

    pub fn to_array(&self) -> [T; 6] {
        [self.r12, self.r13, self.r21, self.r23, self.r31, self.r32]
    }

    pub fn zero() -> Self {
        Self::from_array([T::zero(); 6])
    }

    pub fn rate(&self, from: User, to: User) -> T {
        self.to_array()[pair_slot(from, to)]
    }

    pub fn set_rate(&mut self, from: User, to: User, value: T) {
        let mut a = self.to_array();
        a[pair_slot(from, to)] = value;
        *self = Self::from_array(a);
    }

    /// Relabels users: the rate from `i` to `j` becomes the rate from
    /// `perm[i]` to `perm[j]`.
    pub fn permute(&self, perm: [User; 3]) -> Self {
        let mut out = Self::zero();
        for (from, to) in PAIRS {
            out.set_rate(perm[from.index()], perm[to.index()], self.rate(from, to));
        }
        out
    }
}

impl RateTuple<f64> {
    /// Checks that every component is finite and nonnegative.
    pub fn validate(&self) -> Result<(), ModelError> {
        for ((from, to), v) in PAIRS.iter().zip(self.to_array()) {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::InvalidRate {
                    pair: format!("R{}{}", from.number(), to.number()),
                    value: v,
                });
            }
        }
        Ok(())
    }

    /// Inner product with a weight vector in the canonical pair order.
    pub fn weighted_sum(&self, weights: &[f64; 6]) -> f64 {
        self.to_array().iter().zip(weights).map(|(r, w)| r * w).sum()
    }
}

/// Orientation of a three-user cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cycle {
    /// `1 -> 2 -> 3 -> 1`, carrying `R12`, `R23`, `R31`.
    #[serde(rename = "123")]
    Forward,
    /// `1 -> 3 -> 2 -> 1`, carrying `R13`, `R32`, `R21`.
    #[serde(rename = "132")]
    Backward,
}

impl Cycle {
    /// The three ordered pairs carried by the cycle.
    pub fn pairs(self) -> [Pair; 3] {
        use User::*;
        match self {
            Cycle::Forward => [(One, Two), (Two, Three), (Three, One)],
            Cycle::Backward => [(One, Three), (Three, Two), (Two, One)],
        }
    }

    /// The cycle that contains the ordered pair.
    pub fn containing(from: User, to: User) -> Cycle {
        if to.index() == (from.index() + 1) % 3 {
            Cycle::Forward
        } else {
            Cycle::Backward
        }
    }
}

/// A rate tuple split into bi-directional, cyclic and uni-directional parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FlowDecomposition<T = f64> {
    pub b12: T,
    pub b13: T,
    pub b23: T,
    pub c123: T,
    pub c132: T,
    pub u12: T,
    pub u13: T,
    pub u21: T,
    pub u23: T,
    pub u31: T,
    pub u32: T,
}

impl<T: Rate> FlowDecomposition<T> {
    pub fn zero() -> Self {
        let z = T::zero();
        FlowDecomposition {
            b12: z,
            b13: z,
            b23: z,
            c123: z,
            c132: z,
            u12: z,
            u13: z,
            u21: z,
            u23: z,
            u31: z,
            u32: z,
        }
    }

    /// Bi-directional rate shared by the unordered pair `{a, b}`.
    pub fn bi(&self, a: User, b: User) -> T {
        match (a.min(b), a.max(b)) {
            (User::One, User::Two) => self.b12,
            (User::One, User::Three) => self.b13,
            (User::Two, User::Three) => self.b23,
            _ => panic!("bi-directional flow needs two distinct users"),
        }
    }

    pub fn set_bi(&mut self, a: User, b: User, value: T) {
        match (a.min(b), a.max(b)) {
            (User::One, User::Two) => self.b12 = value,
            (User::One, User::Three) => self.b13 = value,
            (User::Two, User::Three) => self.b23 = value,
            _ => panic!("bi-directional flow needs two distinct users"),
        }
    }

    pub fn cyclic(&self, cycle: Cycle) -> T {
        match cycle {
            Cycle::Forward => self.c123,
            Cycle::Backward => self.c132,
        }
    }

    pub fn set_cyclic(&mut self, cycle: Cycle, value: T) {
        match cycle {
            Cycle::Forward => self.c123 = value,
            Cycle::Backward => self.c132 = value,
        }
    }

    /// Uni-directional remainders as a rate tuple.
    pub fn uni(&self) -> RateTuple<T> {
        RateTuple::from_array([self.u12, self.u13, self.u21, self.u23, self.u31, self.u32])
    }

    pub fn set_uni(&mut self, u: RateTuple<T>) {
        [self.u12, self.u13, self.u21, self.u23, self.u31, self.u32] = u.to_array();
    }

    /// Relabels users consistently with [`RateTuple::permute`].
    pub fn permute(&self, perm: [User; 3]) -> Self {
        let mut out = Self::zero();
        for (a, b) in [(User::One, User::Two), (User::One, User::Three), (User::Two, User::Three)] {
            out.set_bi(perm[a.index()], perm[b.index()], self.bi(a, b));
        }
        for cycle in [Cycle::Forward, Cycle::Backward] {
            let (from, to) = cycle.pairs()[0];
            let image = Cycle::containing(perm[from.index()], perm[to.index()]);
            out.set_cyclic(image, self.cyclic(cycle));
        }
        out.set_uni(self.uni().permute(perm));
        out
    }
}

/// Splits a rate demand into bi-directional, cyclic and uni-directional flow.
///
/// Bi-directional flow is extracted maximally per pair, then cyclic flow
/// maximally per orientation from what remains.
pub fn decompose_flows<T: Rate>(r: &RateTuple<T>) -> FlowDecomposition<T> {
    let mut rest = *r;
    let mut d = FlowDecomposition::zero();
    for (a, b) in [(User::One, User::Two), (User::One, User::Three), (User::Two, User::Three)] {
        let shared = min(rest.rate(a, b), rest.rate(b, a));
        d.set_bi(a, b, shared);
        rest.set_rate(a, b, rest.rate(a, b) - shared);
        rest.set_rate(b, a, rest.rate(b, a) - shared);
    }
    for cycle in [Cycle::Forward, Cycle::Backward] {
        let pairs = cycle.pairs();
        let flow = pairs
            .iter()
            .map(|&(i, j)| rest.rate(i, j))
            .reduce(min)
            .expect("three pairs");
        d.set_cyclic(cycle, flow);
        for (i, j) in pairs {
            rest.set_rate(i, j, rest.rate(i, j) - flow);
        }
    }
    d.set_uni(rest);
    d
}

/// Inverse of [`decompose_flows`]: `R_ij = b_ij + c_ij + u_ij`.
pub fn recompose<T: Rate>(d: &FlowDecomposition<T>) -> RateTuple<T> {
    let mut r = d.uni();
    for (i, j) in PAIRS {
        let total = r.rate(i, j) + d.bi(i, j) + d.cyclic(Cycle::containing(i, j));
        r.set_rate(i, j, total);
    }
    r
}
