//! Bit-exact simulation of the linear-shift deterministic Y-channel.
//!
//! User `k` reaches relay levels `1..=n_k` in the uplink and hears relay
//! levels `1..=n_k` in the downlink; level 1 is the most significant. Bits
//! landing on the same uplink level superpose modulo 2.
//!
//! A [`DycLevelPlan`] places every bit of a [`FlowDecomposition`] on relay
//! levels:
//!
//! * a bi-directional bit pair shares one uplink level and one downlink level
//!   (the relay forwards the XOR),
//! * a cyclic bit triple uses two uplink levels, where the pivot user sends
//!   its bit on both and each other user aligns on one, and two downlink
//!   levels,
//! * a uni-directional bit uses one level in each direction.
//!
//! The relay never decodes anything: every downlink level forwards the
//! content of exactly one uplink level.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DycError;
use crate::exec::{derive_seed, Execution};
use crate::model::{decompose_flows, recompose, Cycle, FlowDecomposition, RateTuple, User, PAIRS};

/// Level counts between each user and the relay, equal in both directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DycConfig {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl DycConfig {
    pub fn new(n1: usize, n2: usize, n3: usize) -> Result<Self, DycError> {
        if n1 < n2 || n2 < n3 {
            return Err(DycError::LevelOrder(n1, n2, n3));
        }
        Ok(DycConfig { n1, n2, n3 })
    }

    /// Number of relay levels.
    pub fn levels(&self) -> usize {
        self.n1
    }

    pub fn reach(&self, user: User) -> usize {
        [self.n1, self.n2, self.n3][user.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FlowClass {
    #[serde(rename = "b")]
    Bi,
    #[serde(rename = "c")]
    Cyclic,
    #[serde(rename = "u")]
    Uni,
}

/// Names bit `index` of the message from `from` to `to`, together with the
/// strategy that carries it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BitLabel {
    pub class: FlowClass,
    pub from: User,
    pub to: User,
    pub index: usize,
}

impl fmt::Display for BitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.class {
            FlowClass::Bi => 'b',
            FlowClass::Cyclic => 'c',
            FlowClass::Uni => 'u',
        };
        write!(f, "{}{}{}[{}]", c, self.from.number(), self.to.number(), self.index)
    }
}

/// One strategy instance with its assigned relay levels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "lowercase")]
pub enum Strategy {
    Bi {
        bits: [BitLabel; 2],
        uplink: usize,
        downlink: usize,
    },
    /// The pivot user `p` sends `pivot` (to `q`) on both uplink levels; `q`
    /// sends `second` (to `r`) aligned on `uplink[0]`, and `r` sends `third`
    /// (to `p`) aligned on `uplink[1]`. `downlink[i]` forwards `uplink[i]`.
    Cyclic {
        cycle: Cycle,
        pivot: BitLabel,
        second: BitLabel,
        third: BitLabel,
        uplink: [usize; 2],
        downlink: [usize; 2],
    },
    Uni {
        bit: BitLabel,
        uplink: usize,
        downlink: usize,
    },
}

impl Strategy {
    fn class(&self) -> FlowClass {
        match self {
            Strategy::Bi { .. } => FlowClass::Bi,
            Strategy::Cyclic { .. } => FlowClass::Cyclic,
            Strategy::Uni { .. } => FlowClass::Uni,
        }
    }

    /// Uplink slots as (senders with their bits).
    fn uplink_slots(&self) -> Vec<Vec<(User, BitLabel)>> {
        match *self {
            Strategy::Bi { bits, .. } => vec![bits.iter().map(|b| (b.from, *b)).collect()],
            Strategy::Cyclic { pivot, second, third, .. } => vec![
                vec![(pivot.from, pivot), (second.from, second)],
                vec![(pivot.from, pivot), (third.from, third)],
            ],
            Strategy::Uni { bit, .. } => vec![vec![(bit.from, bit)]],
        }
    }

    /// Downlink slots as (users that must hear the slot).
    fn downlink_audiences(&self) -> Vec<Vec<User>> {
        match *self {
            Strategy::Bi { bits, .. } => vec![sorted(vec![bits[0].from, bits[1].from])],
            Strategy::Cyclic { pivot, second, third, .. } => {
                let (p, q, r) = (pivot.from, second.from, third.from);
                vec![sorted(vec![q, r]), sorted(vec![p, r])]
            }
            Strategy::Uni { bit, .. } => vec![vec![bit.to]],
        }
    }

    fn uplink_levels(&self) -> Vec<usize> {
        match *self {
            Strategy::Bi { uplink, .. } | Strategy::Uni { uplink, .. } => vec![uplink],
            Strategy::Cyclic { uplink, .. } => uplink.to_vec(),
        }
    }

    fn downlink_levels(&self) -> Vec<usize> {
        match *self {
            Strategy::Bi { downlink, .. } | Strategy::Uni { downlink, .. } => vec![downlink],
            Strategy::Cyclic { downlink, .. } => downlink.to_vec(),
        }
    }

    fn set_uplink(&mut self, slot: usize, level: usize) {
        match self {
            Strategy::Bi { uplink, .. } | Strategy::Uni { uplink, .. } => *uplink = level,
            Strategy::Cyclic { uplink, .. } => uplink[slot] = level,
        }
    }

    fn set_downlink(&mut self, slot: usize, level: usize) {
        match self {
            Strategy::Bi { downlink, .. } | Strategy::Uni { downlink, .. } => *downlink = level,
            Strategy::Cyclic { downlink, .. } => downlink[slot] = level,
        }
    }
}

fn sorted(mut v: Vec<User>) -> Vec<User> {
    v.sort();
    v
}

/// Bits arriving on one relay level in the uplink.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UplinkLevel {
    pub level: usize,
    pub senders: Vec<(User, BitLabel)>,
}

/// The symbol the relay emits on one downlink level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DownlinkSymbol {
    pub level: usize,
    /// Uplink level whose content is forwarded.
    pub forwards: usize,
    /// The bits whose XOR the forwarded content equals.
    pub content: Vec<BitLabel>,
    /// Users that need this symbol.
    pub audience: Vec<User>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DycLevelPlan {
    pub config: DycConfig,
    pub rates: RateTuple<u32>,
    pub decomposition: FlowDecomposition<u32>,
    /// One entry per relay level, in level order.
    pub uplink: Vec<UplinkLevel>,
    /// One entry per relay level, `None` for unused levels.
    pub downlink: Vec<Option<DownlinkSymbol>>,
    pub strategies: Vec<Strategy>,
}

impl DycLevelPlan {
    pub fn uplink_levels_used(&self) -> usize {
        self.uplink.iter().filter(|l| !l.senders.is_empty()).count()
    }

    pub fn downlink_levels_used(&self) -> usize {
        self.downlink.iter().filter(|s| s.is_some()).count()
    }

    /// Downlink levels consumed by strategies of the given class.
    pub fn downlink_levels_for(&self, class: FlowClass) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .strategies
            .iter()
            .filter(|s| s.class() == class)
            .flat_map(Strategy::downlink_levels)
            .collect();
        v.sort_unstable();
        v
    }

    /// Checks the structural invariants: reach on both links, exclusive
    /// level use, and agreement between strategies and level tables.
    pub fn check(&self) -> Result<(), String> {
        let n = self.config.levels();
        if self.uplink.len() != n || self.downlink.len() != n {
            return Err(format!("plan tables must have {n} levels"));
        }
        let mut up_owner = vec![false; n + 1];
        let mut down_owner = vec![false; n + 1];
        for s in &self.strategies {
            for (senders, level) in s.uplink_slots().into_iter().zip(s.uplink_levels()) {
                if level == 0 || level > n {
                    return Err(format!("uplink level {level} out of range"));
                }
                if std::mem::replace(&mut up_owner[level], true) {
                    return Err(format!("uplink level {level} used twice"));
                }
                for (user, bit) in &senders {
                    if level > self.config.reach(*user) {
                        return Err(format!("{bit} sent by {user} above its reach on level {level}"));
                    }
                }
                if self.uplink[level - 1].senders != senders {
                    return Err(format!("uplink table disagrees on level {level}"));
                }
            }
            let ups = s.uplink_levels();
            for ((audience, level), src) in s.downlink_audiences().into_iter().zip(s.downlink_levels()).zip(ups) {
                if level == 0 || level > n {
                    return Err(format!("downlink level {level} out of range"));
                }
                if std::mem::replace(&mut down_owner[level], true) {
                    return Err(format!("downlink level {level} used twice"));
                }
                for user in &audience {
                    if level > self.config.reach(*user) {
                        return Err(format!("{user} cannot hear downlink level {level}"));
                    }
                }
                match &self.downlink[level - 1] {
                    Some(sym) if sym.forwards == src && sym.audience == audience => {}
                    _ => return Err(format!("downlink table disagrees on level {level}")),
                }
            }
        }
        if self.uplink.iter().any(|l| !l.senders.is_empty() && !up_owner[l.level]) {
            return Err("uplink table has bits without a strategy".into());
        }
        if self.downlink.iter().flatten().any(|s| !down_owner[s.level]) {
            return Err("downlink table has symbols without a strategy".into());
        }
        if recompose(&self.decomposition) != self.rates {
            return Err("decomposition does not match rates".into());
        }
        Ok(())
    }
}

/// The pivot sends its cyclic bit twice. With `n1 >= n2 >= n3` these choices
/// give the largest reach on every slot.
fn pivot(cycle: Cycle) -> User {
    match cycle {
        Cycle::Forward => User::Two,
        Cycle::Backward => User::One,
    }
}

/// Destination of `user` inside the cycle.
fn next_in(cycle: Cycle, user: User) -> User {
    cycle.pairs().iter().find(|(i, _)| *i == user).map(|&(_, j)| j).expect("user in cycle")
}

/// Which strategies may be used when searching for a plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Strategies {
    pub bi: bool,
    pub cyclic: bool,
}

impl Strategies {
    pub const ALL: Strategies = Strategies { bi: true, cyclic: true };
    pub const NO_CYCLIC: Strategies = Strategies { bi: true, cyclic: false };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug)]
struct Demand {
    strategy: usize,
    slot: usize,
    cap: usize,
    class: FlowClass,
}

/// Strategy instances for a decomposition, with unassigned levels.
fn strategies_for(d: &FlowDecomposition<u32>) -> Vec<Strategy> {
    let label = |class, from, to, index| BitLabel { class, from, to, index };
    let mut out = Vec::new();
    for (a, b) in [(User::Two, User::Three), (User::One, User::Three), (User::One, User::Two)] {
        for k in 0..d.bi(a, b) as usize {
            out.push(Strategy::Bi {
                bits: [label(FlowClass::Bi, a, b, k), label(FlowClass::Bi, b, a, k)],
                uplink: 0,
                downlink: 0,
            });
        }
    }
    for cycle in [Cycle::Backward, Cycle::Forward] {
        let p = pivot(cycle);
        let q = next_in(cycle, p);
        let r = next_in(cycle, q);
        for k in 0..d.cyclic(cycle) as usize {
            let bit = |from: User, to: User| label(FlowClass::Cyclic, from, to, d.bi(from, to) as usize + k);
            out.push(Strategy::Cyclic {
                cycle,
                pivot: bit(p, q),
                second: bit(q, r),
                third: bit(r, p),
                uplink: [0, 0],
                downlink: [0, 0],
            });
        }
    }
    let uni = d.uni();
    for (i, j) in PAIRS {
        let offset = (d.bi(i, j) + d.cyclic(Cycle::containing(i, j))) as usize;
        for k in 0..uni.rate(i, j) as usize {
            out.push(Strategy::Uni { bit: label(FlowClass::Uni, i, j, offset + k), uplink: 0, downlink: 0 });
        }
    }
    out
}

fn demands(cfg: &DycConfig, strategies: &[Strategy], dir: Direction) -> Vec<Demand> {
    let mut out = Vec::new();
    for (idx, s) in strategies.iter().enumerate() {
        let caps: Vec<usize> = match dir {
            Direction::Up => s
                .uplink_slots()
                .iter()
                .map(|senders| senders.iter().map(|(u, _)| cfg.reach(*u)).min().unwrap_or(0))
                .collect(),
            Direction::Down => s
                .downlink_audiences()
                .iter()
                .map(|aud| aud.iter().map(|u| cfg.reach(*u)).min().unwrap_or(0))
                .collect(),
        };
        for (slot, cap) in caps.into_iter().enumerate() {
            out.push(Demand { strategy: idx, slot, cap, class: s.class() });
        }
    }
    out
}

fn describe(strategies: &[Strategy], d: &Demand, dir: Direction) -> String {
    let what = match &strategies[d.strategy] {
        Strategy::Bi { bits, .. } => format!("bi-directional pair {} / {}", bits[0], bits[1]),
        Strategy::Cyclic { pivot, second, third, .. } => {
            let (a, b) = if d.slot == 0 { (pivot, second) } else { (pivot, third) };
            format!("cyclic sum {a} + {b} (triple with {})", if d.slot == 0 { third } else { second })
        }
        Strategy::Uni { bit, .. } => format!("uni-directional bit {bit}"),
    };
    let link = match dir {
        Direction::Up => "uplink",
        Direction::Down => "downlink",
    };
    format!("no free {link} level <= {} for {what}", d.cap)
}

fn assemble(
    cfg: &DycConfig,
    d: &FlowDecomposition<u32>,
    mut strategies: Vec<Strategy>,
    up: &[(Demand, usize)],
    down: &[(Demand, usize)],
) -> DycLevelPlan {
    for (dem, level) in up {
        strategies[dem.strategy].set_uplink(dem.slot, *level);
    }
    for (dem, level) in down {
        strategies[dem.strategy].set_downlink(dem.slot, *level);
    }
    let n = cfg.levels();
    let mut uplink: Vec<UplinkLevel> = (1..=n).map(|level| UplinkLevel { level, senders: Vec::new() }).collect();
    let mut downlink: Vec<Option<DownlinkSymbol>> = vec![None; n];
    for s in &strategies {
        let ups = s.uplink_levels();
        for (senders, &level) in s.uplink_slots().into_iter().zip(&ups) {
            uplink[level - 1].senders = senders;
        }
        for ((audience, level), src) in s.downlink_audiences().into_iter().zip(s.downlink_levels()).zip(&ups) {
            let mut content: Vec<BitLabel> = uplink[src - 1].senders.iter().map(|(_, b)| *b).collect();
            content.dedup();
            downlink[level - 1] = Some(DownlinkSymbol { level, forwards: *src, content, audience });
        }
    }
    DycLevelPlan { config: *cfg, rates: recompose(d), decomposition: *d, uplink, downlink, strategies }
}

/// Order in which each link's demands are placed. Every demand takes the
/// deepest free level within its reach, which succeeds whenever any
/// assignment exists, so the order only decides the layout.
const UPLINK_ORDER: [FlowClass; 3] = [FlowClass::Uni, FlowClass::Cyclic, FlowClass::Bi];
const DOWNLINK_ORDER: [FlowClass; 3] = [FlowClass::Cyclic, FlowClass::Uni, FlowClass::Bi];

fn place_greedy(
    cfg: &DycConfig,
    strategies: &[Strategy],
    dir: Direction,
) -> Result<Vec<(Demand, usize)>, DycError> {
    let order = match dir {
        Direction::Up => UPLINK_ORDER,
        Direction::Down => DOWNLINK_ORDER,
    };
    let mut pending = demands(cfg, strategies, dir);
    // stable: equal caps keep creation order
    pending.sort_by_key(|d| {
        let rank = order.iter().position(|c| *c == d.class).expect("class in order");
        (rank, std::cmp::Reverse(d.cap))
    });
    let mut free = vec![true; cfg.levels() + 1];
    free[0] = false;
    let mut placed = Vec::with_capacity(pending.len());
    for dem in pending {
        let level = (1..=dem.cap.min(cfg.levels()))
            .rev()
            .find(|&l| free[l])
            .ok_or_else(|| DycError::Infeasible(describe(strategies, &dem, dir)))?;
        free[level] = false;
        placed.push((dem, level));
    }
    Ok(placed)
}

/// Assigns relay levels to every bit of `d`.
pub fn plan_levels(cfg: &DycConfig, d: &FlowDecomposition<u32>) -> Result<DycLevelPlan, DycError> {
    let strategies = strategies_for(d);
    let up = place_greedy(cfg, &strategies, Direction::Up)?;
    let down = place_greedy(cfg, &strategies, Direction::Down)?;
    Ok(assemble(cfg, d, strategies, &up, &down))
}

/// Decomposes `rates` with [`decompose_flows`] and plans it.
pub fn plan_rates(cfg: &DycConfig, rates: &RateTuple<u32>) -> Result<DycLevelPlan, DycError> {
    plan_levels(cfg, &decompose_flows(rates))
}

fn backtrack(demands: &[Demand], free: &mut [bool], chosen: &mut Vec<usize>) -> bool {
    let Some(dem) = demands.get(chosen.len()) else {
        return true;
    };
    for level in 1..=dem.cap.min(free.len() - 1) {
        if free[level] {
            free[level] = false;
            chosen.push(level);
            if backtrack(demands, free, chosen) {
                return true;
            }
            chosen.pop();
            free[level] = true;
        }
    }
    false
}

fn place_exhaustive(cfg: &DycConfig, strategies: &[Strategy], dir: Direction) -> Option<Vec<(Demand, usize)>> {
    let dems = demands(cfg, strategies, dir);
    if dems.len() > cfg.levels() {
        return None;
    }
    let mut free = vec![true; cfg.levels() + 1];
    free[0] = false;
    let mut chosen = Vec::new();
    backtrack(&dems, &mut free, &mut chosen).then(|| dems.into_iter().zip(chosen).collect())
}

/// All decompositions of `rates` reachable with the allowed strategies.
pub fn candidate_decompositions(rates: &RateTuple<u32>, allowed: Strategies) -> Vec<FlowDecomposition<u32>> {
    let mut out = Vec::new();
    let bi_pairs = [(User::One, User::Two), (User::One, User::Three), (User::Two, User::Three)];
    let max_bi = |a: User, b: User| if allowed.bi { rates.rate(a, b).min(rates.rate(b, a)) } else { 0 };
    for b12 in 0..=max_bi(bi_pairs[0].0, bi_pairs[0].1) {
        for b13 in 0..=max_bi(bi_pairs[1].0, bi_pairs[1].1) {
            for b23 in 0..=max_bi(bi_pairs[2].0, bi_pairs[2].1) {
                let d = FlowDecomposition { b12, b13, b23, ..FlowDecomposition::zero() };
                let mut rest = *rates;
                for (a, b) in bi_pairs {
                    let v = d.bi(a, b);
                    rest.set_rate(a, b, rest.rate(a, b) - v);
                    rest.set_rate(b, a, rest.rate(b, a) - v);
                }
                let max_cyc = |c: Cycle| {
                    if allowed.cyclic {
                        c.pairs().iter().map(|&(i, j)| rest.rate(i, j)).min().unwrap_or(0)
                    } else {
                        0
                    }
                };
                for c123 in 0..=max_cyc(Cycle::Forward) {
                    for c132 in 0..=max_cyc(Cycle::Backward) {
                        let mut u = rest;
                        for (cycle, v) in [(Cycle::Forward, c123), (Cycle::Backward, c132)] {
                            for (i, j) in cycle.pairs() {
                                u.set_rate(i, j, u.rate(i, j) - v);
                            }
                        }
                        let mut cand = d;
                        cand.c123 = c123;
                        cand.c132 = c132;
                        cand.set_uni(u);
                        out.push(cand);
                    }
                }
            }
        }
    }
    out
}

/// Exhaustive search over every decomposition of `rates` using the allowed
/// strategies and every level assignment. Returns the first feasible plan.
pub fn search_plan(cfg: &DycConfig, rates: &RateTuple<u32>, allowed: Strategies) -> Option<DycLevelPlan> {
    candidate_decompositions(rates, allowed).into_iter().find_map(|d| search_levels(cfg, &d))
}

/// Exhaustive search over every level assignment for a fixed
/// decomposition.
pub fn search_levels(cfg: &DycConfig, d: &FlowDecomposition<u32>) -> Option<DycLevelPlan> {
    let strategies = strategies_for(d);
    let up = place_exhaustive(cfg, &strategies, Direction::Up)?;
    let down = place_exhaustive(cfg, &strategies, Direction::Down)?;
    Some(assemble(cfg, d, strategies, &up, &down))
}

/// One bit vector per ordered pair.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DycMessageSet {
    pub m12: Vec<bool>,
    pub m13: Vec<bool>,
    pub m21: Vec<bool>,
    pub m23: Vec<bool>,
    pub m31: Vec<bool>,
    pub m32: Vec<bool>,
}

impl DycMessageSet {
    pub fn get(&self, from: User, to: User) -> &[bool] {
        match (from, to) {
            (User::One, User::Two) => &self.m12,
            (User::One, User::Three) => &self.m13,
            (User::Two, User::One) => &self.m21,
            (User::Two, User::Three) => &self.m23,
            (User::Three, User::One) => &self.m31,
            (User::Three, User::Two) => &self.m32,
            _ => panic!("a user does not send to itself"),
        }
    }

    pub fn get_mut(&mut self, from: User, to: User) -> &mut Vec<bool> {
        match (from, to) {
            (User::One, User::Two) => &mut self.m12,
            (User::One, User::Three) => &mut self.m13,
            (User::Two, User::One) => &mut self.m21,
            (User::Two, User::Three) => &mut self.m23,
            (User::Three, User::One) => &mut self.m31,
            (User::Three, User::Two) => &mut self.m32,
            _ => panic!("a user does not send to itself"),
        }
    }

    /// Lays out `pattern` bit by bit over the messages in pair order `12,
    /// 13, 21, 23, 31, 32`, least significant bit first.
    pub fn from_pattern(rates: &RateTuple<u32>, pattern: u64) -> Self {
        let mut out = DycMessageSet::default();
        let mut shift = 0;
        for (i, j) in PAIRS {
            let len = rates.rate(i, j) as usize;
            *out.get_mut(i, j) = (0..len).map(|k| (pattern >> (shift + k)) & 1 == 1).collect();
            shift += len;
        }
        out
    }

    pub fn random<R: Rng>(rates: &RateTuple<u32>, rng: &mut R) -> Self {
        let mut out = DycMessageSet::default();
        for (i, j) in PAIRS {
            *out.get_mut(i, j) = (0..rates.rate(i, j)).map(|_| rng.random()).collect();
        }
        out
    }

    fn bit(&self, label: &BitLabel) -> bool {
        self.get(label.from, label.to)[label.index]
    }
}

fn check_lengths(plan: &DycLevelPlan, msgs: &DycMessageSet) -> Result<(), DycError> {
    for (i, j) in PAIRS {
        let expected = plan.rates.rate(i, j) as usize;
        let actual = msgs.get(i, j).len();
        if expected != actual {
            return Err(DycError::DimensionMismatch {
                pair: format!("m{}{}", i.number(), j.number()),
                expected,
                actual,
            });
        }
    }
    Ok(())
}

/// Relay observation: one bit per level, the XOR of everything sent there.
pub fn simulate_uplink(plan: &DycLevelPlan, msgs: &DycMessageSet) -> Result<Vec<bool>, DycError> {
    check_lengths(plan, msgs)?;
    Ok(plan
        .uplink
        .iter()
        .map(|l| {
            l.senders
                .iter()
                .filter(|(user, _)| l.level <= plan.config.reach(*user))
                .fold(false, |acc, (_, bit)| acc ^ msgs.bit(bit))
        })
        .collect())
}

/// What each user hears in the downlink: levels `1..=n_k` of the relay signal.
pub fn simulate_downlink(plan: &DycLevelPlan, relay: &[bool]) -> Result<[Vec<bool>; 3], DycError> {
    let n = plan.config.levels();
    if relay.len() != n {
        return Err(DycError::ObservationLength { expected: n, actual: relay.len() });
    }
    let mut signal = vec![false; n];
    for sym in plan.downlink.iter().flatten() {
        let produced = sym.forwards >= 1
            && sym.forwards <= n
            && !plan.uplink[sym.forwards - 1].senders.is_empty();
        if !produced {
            return Err(DycError::MissingRelaySymbol { level: sym.level, source_level: sym.forwards });
        }
        signal[sym.level - 1] = relay[sym.forwards - 1];
    }
    Ok(User::ALL.map(|u| signal[..plan.config.reach(u)].to_vec()))
}

/// Recovers every message bit addressed to `user` from its downlink
/// observation and its own transmitted bits. Messages not addressed to
/// `user` are left empty in the result.
pub fn decode_user(
    plan: &DycLevelPlan,
    user: User,
    observation: &[bool],
    own: &DycMessageSet,
) -> Result<DycMessageSet, DycError> {
    let read = |level: usize| {
        observation.get(level.wrapping_sub(1)).copied().ok_or_else(|| DycError::Undecodable {
            user,
            reason: format!("needs downlink level {level} but hears only {} levels", observation.len()),
        })
    };
    let own_bit = |label: &BitLabel| {
        own.get(label.from, label.to).get(label.index).copied().ok_or_else(|| DycError::Undecodable {
            user,
            reason: format!("own bit {label} missing"),
        })
    };

    let mut out = DycMessageSet::default();
    for from in User::ALL.into_iter().filter(|&u| u != user) {
        *out.get_mut(from, user) = vec![false; plan.rates.rate(from, user) as usize];
    }
    let mut set = |label: &BitLabel, value: bool| {
        out.get_mut(label.from, label.to)[label.index] = value;
    };

    for s in &plan.strategies {
        match s {
            Strategy::Bi { bits, downlink, .. } => {
                for (want, mine) in [(bits[0], bits[1]), (bits[1], bits[0])] {
                    if want.to == user {
                        set(&want, read(*downlink)? ^ own_bit(&mine)?);
                    }
                }
            }
            Strategy::Cyclic { pivot, second, third, downlink, .. } => {
                if pivot.to == user {
                    set(pivot, read(downlink[0])? ^ own_bit(second)?);
                } else if second.to == user {
                    set(second, read(downlink[0])? ^ read(downlink[1])? ^ own_bit(third)?);
                } else if third.to == user {
                    set(third, read(downlink[1])? ^ own_bit(pivot)?);
                }
            }
            Strategy::Uni { bit, downlink, .. } => {
                if bit.to == user {
                    set(bit, read(*downlink)?);
                }
            }
        }
    }
    Ok(out)
}

/// Full run of one message set through the plan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DycTrace {
    pub plan: DycLevelPlan,
    pub messages: DycMessageSet,
    pub relay_observation: Vec<bool>,
    pub user_observations: BTreeMap<User, Vec<bool>>,
    pub recovered: BTreeMap<User, DycMessageSet>,
    pub success: bool,
}

pub fn run_trace(plan: &DycLevelPlan, msgs: &DycMessageSet) -> Result<DycTrace, DycError> {
    let relay = simulate_uplink(plan, msgs)?;
    let heard = simulate_downlink(plan, &relay)?;
    let mut recovered = BTreeMap::new();
    let mut success = true;
    for user in User::ALL {
        let got = decode_user(plan, user, &heard[user.index()], msgs)?;
        success &= User::ALL
            .iter()
            .filter(|&&from| from != user)
            .all(|&from| got.get(from, user) == msgs.get(from, user));
        recovered.insert(user, got);
    }
    Ok(DycTrace {
        plan: plan.clone(),
        messages: msgs.clone(),
        relay_observation: relay,
        user_observations: User::ALL.into_iter().zip(heard).collect(),
        recovered,
        success,
    })
}

/// Outcome of [`verify_end_to_end`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub total_bits: u32,
    pub exhaustive: bool,
    pub patterns: u64,
    pub failures: u64,
    /// Index of the first failing pattern (exhaustive) or trial (random).
    pub first_failure: Option<u64>,
    pub passed: bool,
}

/// Message sets with at most this many bits are verified exhaustively.
pub const EXHAUSTIVE_BIT_LIMIT: u32 = 20;

/// Plans `rates` and checks that every user recovers every addressed bit,
/// over all bit patterns when the tuple is small enough, otherwise over
/// `trials` seeded random patterns.
pub fn verify_end_to_end(
    cfg: &DycConfig,
    rates: &RateTuple<u32>,
    trials: u64,
    seed: u64,
) -> Result<VerificationReport, DycError> {
    verify_end_to_end_with(Execution::default(), cfg, rates, trials, seed)
}

pub fn verify_end_to_end_with(
    exec: Execution,
    cfg: &DycConfig,
    rates: &RateTuple<u32>,
    trials: u64,
    seed: u64,
) -> Result<VerificationReport, DycError> {
    let plan = plan_rates(cfg, rates)?;
    verify_plan_with(exec, &plan, trials, seed)
}

/// As [`verify_end_to_end_with`] for an existing plan.
pub fn verify_plan_with(
    exec: Execution,
    plan: &DycLevelPlan,
    trials: u64,
    seed: u64,
) -> Result<VerificationReport, DycError> {
    let rates = &plan.rates;
    let total_bits: u32 = rates.to_array().iter().sum();
    let exhaustive = total_bits <= EXHAUSTIVE_BIT_LIMIT;
    let patterns = if exhaustive { 1u64 << total_bits } else { trials };
    let messages = |i: u64| {
        if exhaustive {
            DycMessageSet::from_pattern(rates, i)
        } else {
            DycMessageSet::random(rates, &mut ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, i)))
        }
    };
    // a structurally broken plan fails every pattern
    let fails = |i: u64| !run_trace(plan, &messages(i)).map(|t| t.success).unwrap_or(false);
    let failures = exec.count(patterns, fails);
    let first_failure = if failures > 0 { exec.find_first(patterns, fails) } else { None };
    Ok(VerificationReport { total_bits, exhaustive, patterns, failures, first_failure, passed: failures == 0 })
}
