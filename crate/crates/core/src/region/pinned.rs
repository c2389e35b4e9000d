//! Fixed configurations shared by the fidelity tests and `ychan region --pin`.

use crate::model::ChannelConfig;

use super::powers::{Allocation, DownlinkPowers, FreeUplinkPowers};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PinnedCase {
    pub name: &'static str,
    pub config: ChannelConfig,
    pub allocation: Allocation,
}

pub fn pinned_cases() -> [PinnedCase; 3] {
    [
        // A: equal gains, one bi-directional pair
        PinnedCase {
            name: "A",
            config: ChannelConfig { h1: 1.0, h2: 1.0, h3: 1.0, p: 100.0 },
            allocation: Allocation {
                uplink: FreeUplinkPowers { p21b: 1.0, ..Default::default() },
                downlink: DownlinkPowers { r21: 1.0, ..Default::default() },
            },
        },
        // B: every sub-stream active
        PinnedCase {
            name: "B",
            config: ChannelConfig { h1: 2.0, h2: 1.5, h3: 0.7, p: 50.0 },
            allocation: Allocation {
                uplink: FreeUplinkPowers {
                    p21b: 4.0,
                    p31b: 3.0,
                    p32b: 2.0,
                    p23c: 3.0,
                    p31c: 2.5,
                    p32c: 1.5,
                    p21c: 2.0,
                    p12u: 5.0,
                    p13u: 3.0,
                    p21u: 4.0,
                    p23u: 2.0,
                    p31u: 1.0,
                    p32u: 0.5,
                },
                downlink: DownlinkPowers {
                    t12: 3.0,
                    t13: 2.0,
                    t21: 4.0,
                    t23: 1.5,
                    t31: 2.0,
                    t32: 1.0,
                    s12: 5.0,
                    s31: 4.0,
                    s21: 3.0,
                    s32: 6.0,
                    r21: 5.0,
                    r31: 4.0,
                    r32: 7.0,
                },
            },
        },
        // C: signed gains, high power
        PinnedCase {
            name: "C",
            config: ChannelConfig { h1: -3.1, h2: 1.2, h3: -0.9, p: 1000.0 },
            allocation: Allocation {
                uplink: FreeUplinkPowers {
                    p21b: 100.0,
                    p31b: 80.0,
                    p32b: 60.0,
                    p23c: 90.0,
                    p31c: 70.0,
                    p32c: 50.0,
                    p21c: 40.0,
                    p12u: 200.0,
                    p13u: 150.0,
                    p21u: 100.0,
                    p23u: 80.0,
                    p31u: 60.0,
                    p32u: 30.0,
                },
                downlink: DownlinkPowers {
                    t12: 50.0,
                    t13: 40.0,
                    t21: 60.0,
                    t23: 30.0,
                    t31: 20.0,
                    t32: 25.0,
                    s12: 80.0,
                    s31: 90.0,
                    s21: 70.0,
                    s32: 100.0,
                    r21: 120.0,
                    r31: 110.0,
                    r32: 150.0,
                },
            },
        },
    ]
}
