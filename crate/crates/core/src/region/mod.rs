//! Achievable rates of the lattice-alignment scheme on the Gaussian Y-channel.
//!
//! An allocation assigns power to every uplink sub-stream and every relay
//! codeword. [`achievable_point`] turns a feasible allocation into a rate
//! tuple; [`maximize_objective`] searches the union over allocations;
//! [`corollary_region_contains`] and [`outer_bound_proxy`] check the
//! constant-gap region.

mod bounds;
mod corollary;
mod optimize;
mod pinned;
mod powers;

pub use bounds::{
    achievable_point, cap, cap_plus, downlink_bounds, evaluate, uplink_bounds, DownlinkBounds, Evaluation,
    Substream, SubstreamBounds, UplinkBounds, ALIGNMENT_TOL,
};
pub use corollary::{
    corollary_region_contains, corollary_rhs, inequality_label, inequality_lhs, outer_bound_proxy, proxy_contains,
    InequalityCheck, RegionMembership, GAP_CONSTANTS, INEQUALITY_TERMS,
};
pub use optimize::{
    maximize_objective, objective, sweep_region, weight_directions, weighted_uni_start, Optimum, OptimizerOptions,
    SweepPoint,
};
pub use pinned::{pinned_cases, PinnedCase};
pub use powers::{
    check_feasibility, derive_coupled_powers, Allocation, AllocationInput, DownlinkPowers, FeasibilityReport,
    FreeUplinkPowers, UplinkInput, UplinkPowers, COUPLING_TOL, FEASIBILITY_TOL,
};
