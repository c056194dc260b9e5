//! Scenario schema, defaults for the reference office room, validation and
//! TOML persistence.
//!
//! Every field has a default, so an empty document is the reference scenario.
//! Node references in override maps are 1-based, matching the `AP1`, `R1`,
//! `U1` names used in reports.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::RoomModel;
use crate::error::{Error, Result};
use crate::geometry::{CylinderSpec, Point3};
use crate::noma::NoiseModel;

type P3 = Point3<f64>;

fn p3(x: f64, y: f64, z: f64) -> P3 {
    Point3::new(x, y, z)
}

fn one_milliwatt() -> f64 {
    1e-3
}
fn divergence() -> f64 {
    2.1e-3
}
fn ap_max_steering() -> f64 {
    40.0
}
fn relay_max_steering() -> f64 {
    60.0
}
fn responsivity() -> f64 {
    0.5
}
fn detector_area() -> f64 {
    1e-4
}
fn fov() -> f64 {
    90.0
}
fn elevation() -> f64 {
    90.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApConfig {
    pub position: P3,
    /// Average optical power, W.
    #[serde(default = "one_milliwatt")]
    pub power: f64,
    /// Beam divergence half-angle, rad.
    #[serde(default = "divergence")]
    pub divergence: f64,
    /// Largest steering angle off the downward boresight, degrees.
    #[serde(default = "ap_max_steering")]
    pub max_steering_deg: f64,
}

impl ApConfig {
    pub fn at(position: P3) -> Self {
        Self {
            position,
            power: one_milliwatt(),
            divergence: divergence(),
            max_steering_deg: ap_max_steering(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayConfig {
    pub position: P3,
    /// Access point whose signal the relay forwards (1-based). Nearest AP
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paired_ap: Option<usize>,
    /// Users the relay forwards to (1-based). When absent, every user of the
    /// paired AP inside the relay steering cone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serves: Option<Vec<usize>>,
    /// Retransmitted average optical power, W.
    #[serde(default = "one_milliwatt")]
    pub output_power: f64,
    #[serde(default = "divergence")]
    pub divergence: f64,
    /// Largest steering angle off the inward wall normal, degrees.
    #[serde(default = "relay_max_steering")]
    pub max_steering_deg: f64,
    #[serde(default = "responsivity")]
    pub responsivity: f64,
    #[serde(default = "detector_area")]
    pub area: f64,
    #[serde(default = "fov")]
    pub fov_deg: f64,
    #[serde(default)]
    pub noise: NoiseModel<f64>,
}

impl RelayConfig {
    pub fn at(position: P3) -> Self {
        Self {
            position,
            paired_ap: None,
            serves: None,
            output_power: one_milliwatt(),
            divergence: divergence(),
            max_steering_deg: relay_max_steering(),
            responsivity: responsivity(),
            area: detector_area(),
            fov_deg: fov(),
            noise: NoiseModel::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    pub position: P3,
    /// Detector normal elevation, degrees (90 faces the ceiling).
    #[serde(default = "elevation")]
    pub elevation_deg: f64,
    #[serde(default)]
    pub azimuth_deg: f64,
    /// Detector area, m².
    #[serde(default = "detector_area")]
    pub area: f64,
    /// Field-of-view half-angle, degrees.
    #[serde(default = "fov")]
    pub fov_deg: f64,
    /// A/W.
    #[serde(default = "responsivity")]
    pub responsivity: f64,
}

impl UserConfig {
    pub fn at(position: P3) -> Self {
        Self {
            position,
            elevation_deg: elevation(),
            azimuth_deg: 0.0,
            area: detector_area(),
            fov_deg: fov(),
            responsivity: responsivity(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HumanConfig {
    /// Number of independently walking humans.
    pub count: usize,
    pub height: f64,
    pub radius: f64,
}

impl Default for HumanConfig {
    fn default() -> Self {
        let c = CylinderSpec::<f64>::default();
        Self {
            count: 1,
            height: c.height,
            radius: c.radius,
        }
    }
}

impl HumanConfig {
    pub fn cylinder(&self) -> CylinderSpec<f64> {
        CylinderSpec {
            height: self.height,
            radius: self.radius,
        }
    }
}

/// Users served by one AP, replacing the steering-cone rule for that AP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssociationOverride {
    pub ap: usize,
    pub users: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NomaConfig {
    /// Power ratio between consecutive users in SIC order.
    pub power_ratio: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub association: Vec<AssociationOverride>,
}

impl Default for NomaConfig {
    fn default() -> Self {
        Self {
            power_ratio: 4.0,
            association: Vec::new(),
        }
    }
}

/// How blockage factors of different links are drawn in Monte Carlo.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockageModel {
    /// One human position per sample decides every link at once.
    #[default]
    Joint,
    /// Every link is blocked independently with its own probability.
    Independent,
}

impl std::fmt::Display for BlockageModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BlockageModel::Joint => "joint",
            BlockageModel::Independent => "independent",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub samples: u64,
    pub seed: u64,
    pub blockage_model: BlockageModel,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 1,
            blockage_model: BlockageModel::Joint,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub max_bounces: u8,
    /// Surface element edge for first-order reflections, m.
    pub first_resolution: f64,
    /// Surface element edge for second-order reflections, m.
    pub second_resolution: f64,
    /// Impulse response bin width, s.
    pub bin_duration: f64,
    /// Carried for reference only.
    pub wavelength_nm: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            max_bounces: 2,
            first_resolution: 0.05,
            second_resolution: 0.20,
            bin_duration: 1e-11,
            wavelength_nm: 850.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub threshold_db: f64,
    pub room: RoomModel<f64>,
    pub human: HumanConfig,
    /// Receiver noise of every user.
    pub noise: NoiseModel<f64>,
    pub noma: NomaConfig,
    pub sampler: SamplerConfig,
    pub channel: ChannelConfig,
    pub quadrature: QuadratureConfig,
    pub aps: Vec<ApConfig>,
    pub relays: Vec<RelayConfig>,
    pub users: Vec<UserConfig>,
}

impl Default for Scenario {
    fn default() -> Self {
        default_scenario()
    }
}

/// The reference 4 m × 8 m × 3 m office: 8 ceiling APs, 8 wall relays at
/// 1.5 m, 6 desk-height users facing up.
pub fn default_scenario() -> Scenario {
    let aps = [(1., 1.), (1., 3.), (1., 5.), (1., 7.), (3., 1.), (3., 3.), (3., 5.), (3., 7.)]
        .into_iter()
        .map(|(x, y)| ApConfig::at(p3(x, y, 3.0)))
        .collect();
    let relays = [(0., 1.), (0., 3.), (0., 5.), (0., 7.), (4., 1.), (4., 3.), (4., 5.), (4., 7.)]
        .into_iter()
        .map(|(x, y)| RelayConfig::at(p3(x, y, 1.5)))
        .collect();
    let users = [(1., 1.), (1., 4.), (1., 7.), (2., 1.), (2., 4.), (2., 7.)]
        .into_iter()
        .map(|(x, y)| UserConfig::at(p3(x, y, 1.0)))
        .collect();
    Scenario {
        threshold_db: 15.6,
        room: RoomModel::default(),
        human: HumanConfig::default(),
        noise: NoiseModel::default(),
        noma: NomaConfig::default(),
        sampler: SamplerConfig::default(),
        channel: ChannelConfig::default(),
        quadrature: QuadratureConfig::default(),
        aps,
        relays,
        users,
    }
}

fn check_positive(path: String, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(path, format!("must be positive, got {v}")))
    }
}

fn check_angle(path: String, v: f64, max: f64) -> Result<()> {
    if v > 0.0 && v <= max {
        Ok(())
    } else {
        Err(Error::validation(path, format!("must lie in (0, {max}] degrees, got {v}")))
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.room.validate()?;
        if !(self.threshold_db > 0.0 && self.threshold_db.is_finite()) {
            return Err(Error::validation("threshold_db", format!("must be positive, got {}", self.threshold_db)));
        }
        self.human
            .cylinder()
            .validate()
            .map_err(|e| Error::validation("human", e.to_string()))?;
        self.noise.validate("noise")?;
        check_positive("noma.power_ratio".into(), self.noma.power_ratio)?;
        if self.sampler.samples == 0 {
            return Err(Error::validation("sampler.samples", "must be at least 1"));
        }
        let ch = &self.channel;
        if ch.max_bounces > 2 {
            return Err(Error::validation("channel.max_bounces", format!("at most 2, got {}", ch.max_bounces)));
        }
        check_positive("channel.first_resolution".into(), ch.first_resolution)?;
        check_positive("channel.second_resolution".into(), ch.second_resolution)?;
        check_positive("channel.bin_duration".into(), ch.bin_duration)?;
        check_positive("quadrature.rel_tol".into(), self.quadrature.rel_tol)?;

        for (i, ap) in self.aps.iter().enumerate() {
            let path = format!("aps[{i}]");
            self.check_inside(&format!("{path}.position"), &format!("AP{}", i + 1), ap.position)?;
            check_positive(format!("{path}.power"), ap.power)?;
            check_positive(format!("{path}.divergence"), ap.divergence)?;
            check_angle(format!("{path}.max_steering_deg"), ap.max_steering_deg, 90.0)?;
        }
        for (i, r) in self.relays.iter().enumerate() {
            let path = format!("relays[{i}]");
            self.check_inside(&format!("{path}.position"), &format!("R{}", i + 1), r.position)?;
            if self.wall_of(r.position).is_none() {
                return Err(Error::validation(format!("{path}.position"), format!("relay R{} is not on a wall", i + 1)));
            }
            if let Some(ap) = r.paired_ap {
                self.check_ref(&format!("{path}.paired_ap"), ap, self.aps.len(), "AP")?;
            }
            for (j, &u) in r.serves.iter().flatten().enumerate() {
                self.check_ref(&format!("{path}.serves[{j}]"), u, self.users.len(), "user")?;
            }
            check_positive(format!("{path}.output_power"), r.output_power)?;
            check_positive(format!("{path}.divergence"), r.divergence)?;
            check_angle(format!("{path}.max_steering_deg"), r.max_steering_deg, 90.0)?;
            check_positive(format!("{path}.responsivity"), r.responsivity)?;
            check_positive(format!("{path}.area"), r.area)?;
            check_angle(format!("{path}.fov_deg"), r.fov_deg, 90.0)?;
            r.noise.validate(&format!("{path}.noise"))?;
        }
        for (i, u) in self.users.iter().enumerate() {
            let path = format!("users[{i}]");
            self.check_inside(&format!("{path}.position"), &format!("user U{}", i + 1), u.position)?;
            check_positive(format!("{path}.area"), u.area)?;
            check_angle(format!("{path}.fov_deg"), u.fov_deg, 90.0)?;
            check_positive(format!("{path}.responsivity"), u.responsivity)?;
        }
        for (i, a) in self.noma.association.iter().enumerate() {
            let path = format!("noma.association[{i}]");
            self.check_ref(&format!("{path}.ap"), a.ap, self.aps.len(), "AP")?;
            for (j, &u) in a.users.iter().enumerate() {
                self.check_ref(&format!("{path}.users[{j}]"), u, self.users.len(), "user")?;
            }
        }
        Ok(())
    }

    fn check_inside(&self, path: &str, who: &str, p: P3) -> Result<()> {
        let r = &self.room;
        for (axis, v, hi, name) in [
            ("x", p.x, r.width, "width"),
            ("y", p.y, r.length, "length"),
            ("z", p.z, r.height, "height"),
        ] {
            if !(v >= 0.0 && v <= hi) {
                return Err(Error::validation(
                    format!("{path}.{axis}"),
                    format!("{who} at {axis} = {v} lies outside [0, {hi}] (room {name})"),
                ));
            }
        }
        Ok(())
    }

    fn check_ref(&self, path: &str, id: usize, count: usize, kind: &str) -> Result<()> {
        if id >= 1 && id <= count {
            Ok(())
        } else {
            Err(Error::validation(path, format!("{kind} {id} does not exist (1..={count})")))
        }
    }

    /// Inward unit normal of the wall `p` lies on, if any.
    pub fn wall_of(&self, p: P3) -> Option<P3> {
        let r = &self.room;
        if p.x == 0.0 {
            Some(p3(1.0, 0.0, 0.0))
        } else if p.x == r.width {
            Some(p3(-1.0, 0.0, 0.0))
        } else if p.y == 0.0 {
            Some(p3(0.0, 1.0, 0.0))
        } else if p.y == r.length {
            Some(p3(0.0, -1.0, 0.0))
        } else {
            None
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            if msg.starts_with("unknown field") || msg.starts_with("unknown variant") {
                Error::UnknownKey(e.to_string().trim().to_string())
            } else {
                Error::Parse(e.to_string().trim().to_string())
            }
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    Scenario::from_toml_str(&text)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scenario.to_toml_string()?)?;
    Ok(())
}
