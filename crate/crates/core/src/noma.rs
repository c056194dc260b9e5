//! Power-domain NOMA link budget: per-AP power split with SIC ordering, the
//! direct-mode SINR, the relayed second-phase SINR, and their MRC sum.
//!
//! Users decoded *after* user `i` at an access point (the ones with stronger
//! channels and smaller power shares) remain as interference for `i`; users
//! decoded before it have been cancelled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::real::Real;

/// Elementary charge in coulombs.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel<T> {
    /// Thermal noise current spectral density, A²/Hz.
    pub thermal_density: T,
    /// Background photocurrent, A.
    pub background_current: T,
    /// Noise-equivalent bandwidth, Hz.
    pub bandwidth: T,
}

impl<T: Real> Default for NoiseModel<T> {
    fn default() -> Self {
        Self {
            thermal_density: T::lit(1e-24),
            background_current: T::zero(),
            bandwidth: T::lit(1e10),
        }
    }
}

impl<T: Real> NoiseModel<T> {
    pub fn validate(&self, path: &str) -> Result<()> {
        for (name, v) in [
            ("thermal_density", self.thermal_density),
            ("background_current", self.background_current),
            ("bandwidth", self.bandwidth),
        ] {
            if !(v >= T::zero() && v.is_finite()) {
                return Err(Error::validation(format!("{path}.{name}"), format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Shot plus thermal noise variance in A²:
/// `2 q (R P_rx + I_bg) B + N0 B`.
pub fn noise_variance<T: Real>(model: &NoiseModel<T>, received_optical_power: T, responsivity: T) -> T {
    let q = T::lit(ELECTRON_CHARGE);
    let shot = T::lit(2.0) * q * (responsivity * received_optical_power + model.background_current) * model.bandwidth;
    shot + model.thermal_density * model.bandwidth
}

/// O-E-O amplify-and-forward relay terminal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaySpec<T> {
    pub position: Point3<T>,
    /// Index of the access point whose signal this relay forwards.
    pub paired_ap: Option<usize>,
    /// Retransmitted average optical power, watts.
    pub output_power_cap: T,
    pub noise: NoiseModel<T>,
    /// Photodetector responsivity, A/W.
    pub responsivity: T,
}

impl<T: Real> RelaySpec<T> {
    /// Optical-to-optical gain that drives the laser at its power cap for the
    /// given received power (automatic gain control).
    pub fn amplifier_gain(&self, received_optical_power: T) -> T {
        if received_optical_power > T::zero() {
            self.output_power_cap / received_optical_power
        } else {
            T::zero()
        }
    }

    /// Relay front-end noise variance for the given received power.
    pub fn noise_variance(&self, received_optical_power: T) -> T {
        noise_variance(&self.noise, received_optical_power, self.responsivity)
    }
}

/// Superposition coding at one access point.
#[derive(Clone, Debug, PartialEq)]
pub struct ApGroup<T> {
    pub ap: usize,
    /// Total average optical power of the AP, watts.
    pub budget: T,
    /// Served users in SIC decoding order (ascending channel gain).
    pub order: Vec<usize>,
    /// Power of each user, aligned with `order`.
    pub power: Vec<T>,
}

impl<T: Real> ApGroup<T> {
    pub fn sic_index(&self, user: usize) -> Option<usize> {
        self.order.iter().position(|&u| u == user)
    }

    pub fn power_for(&self, user: usize) -> Option<T> {
        self.sic_index(user).map(|k| self.power[k])
    }

    /// Users decoded after the one at `index`, with their powers.
    pub fn decoded_after(&self, index: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.order[index + 1..].iter().copied().zip(self.power[index + 1..].iter().copied())
    }
}

/// Power split for every access point, indexed by AP.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NomaAllocation<T> {
    pub groups: Vec<ApGroup<T>>,
}

impl<T: Real> NomaAllocation<T> {
    pub fn group(&self, ap: usize) -> Option<&ApGroup<T>> {
        self.groups.iter().find(|g| g.ap == ap)
    }
}

/// Orders an AP's users by ascending channel gain (ties by id) and splits the
/// budget geometrically: each user gets `ratio` times the share of the next
/// stronger one.
pub fn order_users_and_allocate<T: Real>(ap: usize, budget: T, served: &[(usize, T)], ratio: T) -> Result<ApGroup<T>> {
    if served.is_empty() {
        return Err(Error::EmptyUserSet(format!("AP{}", ap + 1)));
    }
    let mut sorted = served.to_vec();
    sorted.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
    let n = sorted.len();
    let weights: Vec<T> = (0..n).map(|k| ratio.powi((n - 1 - k) as i32)).collect();
    let total: T = weights.iter().copied().sum();
    Ok(ApGroup {
        ap,
        budget,
        order: sorted.iter().map(|s| s.0).collect(),
        power: weights.into_iter().map(|w| budget * w / total).collect(),
    })
}

/// Dense table of DC channel gains; `None` marks links that do not exist.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelGains<T> {
    pub n_ap: usize,
    pub n_relay: usize,
    pub n_user: usize,
    ap_user: Vec<Option<T>>,
    ap_relay: Vec<Option<T>>,
    relay_user: Vec<Option<T>>,
}

impl<T: Real> ChannelGains<T> {
    pub fn new(n_ap: usize, n_relay: usize, n_user: usize) -> Self {
        Self {
            n_ap,
            n_relay,
            n_user,
            ap_user: vec![None; n_ap * n_user],
            ap_relay: vec![None; n_ap * n_relay],
            relay_user: vec![None; n_relay * n_user],
        }
    }

    pub fn set_ap_user(&mut self, ap: usize, user: usize, h: T) {
        self.ap_user[ap * self.n_user + user] = Some(h);
    }

    pub fn set_ap_relay(&mut self, ap: usize, relay: usize, h: T) {
        self.ap_relay[ap * self.n_relay + relay] = Some(h);
    }

    pub fn set_relay_user(&mut self, relay: usize, user: usize, h: T) {
        self.relay_user[relay * self.n_user + user] = Some(h);
    }

    pub fn ap_user(&self, ap: usize, user: usize) -> Result<T> {
        self.ap_user
            .get(ap * self.n_user + user)
            .copied()
            .flatten()
            .ok_or_else(|| Error::MissingGain(format!("AP{}->U{}", ap + 1, user + 1)))
    }

    pub fn ap_relay(&self, ap: usize, relay: usize) -> Result<T> {
        self.ap_relay
            .get(ap * self.n_relay + relay)
            .copied()
            .flatten()
            .ok_or_else(|| Error::MissingGain(format!("AP{}->R{}", ap + 1, relay + 1)))
    }

    pub fn relay_user(&self, relay: usize, user: usize) -> Result<T> {
        self.relay_user
            .get(relay * self.n_user + user)
            .copied()
            .flatten()
            .ok_or_else(|| Error::MissingGain(format!("R{}->U{}", relay + 1, user + 1)))
    }
}

/// Binary blockage factors for one human configuration; `true` means the
/// link is clear (factor 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockageState {
    n_user: usize,
    beta: Vec<bool>,
    gamma: Vec<bool>,
}

impl BlockageState {
    pub fn all_clear(n_ap: usize, n_relay: usize, n_user: usize) -> Self {
        Self {
            n_user,
            beta: vec![true; n_ap * n_user],
            gamma: vec![true; n_relay * n_user],
        }
    }

    /// `β` for the AP `ap` → user `user` link.
    pub fn beta(&self, ap: usize, user: usize) -> bool {
        self.beta[ap * self.n_user + user]
    }

    /// `γ` for the path through relay `relay` to user `user`.
    pub fn gamma(&self, relay: usize, user: usize) -> bool {
        self.gamma[relay * self.n_user + user]
    }

    pub fn set_beta(&mut self, ap: usize, user: usize, clear: bool) {
        self.beta[ap * self.n_user + user] = clear;
    }

    pub fn set_gamma(&mut self, relay: usize, user: usize, clear: bool) {
        self.gamma[relay * self.n_user + user] = clear;
    }

    pub fn reset(&mut self) {
        self.beta.iter_mut().for_each(|b| *b = true);
        self.gamma.iter_mut().for_each(|g| *g = true);
    }
}

fn factor<T: Real>(clear: bool) -> T {
    if clear {
        T::one()
    } else {
        T::zero()
    }
}

/// Direct-mode SINR of `user`:
/// `Σ_l (β_li P_li R_i H_li)² / (σ_i² + Σ_l Σ_{k>i} (β_lk P_lk R_i H_li)²)`.
pub fn sinr_direct<T: Real>(
    user: usize,
    blockage: &BlockageState,
    alloc: &NomaAllocation<T>,
    gains: &ChannelGains<T>,
    responsivity: T,
    noise_var: T,
) -> Result<T> {
    let mut signal = T::zero();
    let mut denom = noise_var;
    for g in &alloc.groups {
        let Some(idx) = g.sic_index(user) else { continue };
        let h = gains.ap_user(g.ap, user)?;
        let a = factor::<T>(blockage.beta(g.ap, user)) * g.power[idx] * responsivity * h;
        signal = signal + a * a;
        for (k, p) in g.decoded_after(idx) {
            let b = factor::<T>(blockage.beta(g.ap, k)) * p * responsivity * h;
            denom = denom + b * b;
        }
    }
    Ok(if signal == T::zero() { T::zero() } else { signal / denom })
}

/// Second-phase SINR of `user` through the relays in `serving`:
/// `Σ_r (γ P_li R_i H_lr H_ri)² / (σ_i² + Σ_r Σ_{k>i} (γ P_lk R_i H_lr H_ri)² + Σ_r γ σ_r²)`,
/// with `l` the AP paired with relay `r`.
#[allow(clippy::too_many_arguments)]
pub fn relay_second_phase_sinr<T: Real>(
    user: usize,
    blockage: &BlockageState,
    alloc: &NomaAllocation<T>,
    gains: &ChannelGains<T>,
    relays: &[RelaySpec<T>],
    serving: &[usize],
    responsivity: T,
    noise_var: T,
) -> Result<T> {
    let mut signal = T::zero();
    let mut interference = T::zero();
    let mut relay_noise = T::zero();
    for &r in serving {
        let relay = relays
            .get(r)
            .ok_or_else(|| Error::InvalidArgument(format!("no relay R{}", r + 1)))?;
        let l = relay.paired_ap.ok_or_else(|| Error::UnpairedRelay(format!("R{}", r + 1)))?;
        let Some(g) = alloc.group(l) else { continue };
        let Some(idx) = g.sic_index(user) else { continue };
        let gamma = factor::<T>(blockage.gamma(r, user));
        let hop = gains.ap_relay(l, r)? * gains.relay_user(r, user)?;
        let a = gamma * g.power[idx] * responsivity * hop;
        signal = signal + a * a;
        for (_, p) in g.decoded_after(idx) {
            let b = gamma * p * responsivity * hop;
            interference = interference + b * b;
        }
        let received = g.budget * gains.ap_relay(l, r)?;
        relay_noise = relay_noise + gamma * relay.noise_variance(received);
    }
    Ok(if signal == T::zero() {
        T::zero()
    } else {
        signal / (noise_var + interference + relay_noise)
    })
}

/// Maximum ratio combining of the two phases.
pub fn sinr_mrc<T: Real>(first_phase: T, second_phase: T) -> T {
    first_phase + second_phase
}

/// Per-user SINR of both phases and their combination.
#[derive(Clone, Debug, PartialEq)]
pub struct SinrBreakdown<T> {
    pub user: usize,
    pub first_phase: T,
    pub second_phase: T,
    pub mrc: T,
    /// `(ap, β)` for each serving AP.
    pub beta: Vec<(usize, bool)>,
    /// `(relay, γ)` for each serving relay.
    pub gamma: Vec<(usize, bool)>,
}

impl<T: Real> SinrBreakdown<T> {
    pub fn new(user: usize, first_phase: T, second_phase: T) -> Self {
        Self {
            user,
            first_phase,
            second_phase,
            mrc: sinr_mrc(first_phase, second_phase),
            beta: Vec::new(),
            gamma: Vec::new(),
        }
    }
}
