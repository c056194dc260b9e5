//! Outage simulation for multiuser beam-steered indoor optical wireless links
//! under random human blockage, with and without O-E-O amplify-and-forward
//! relays combined by maximum ratio combining.
//!
//! The numerical core ([`geometry`], [`quadrature`], [`mobility`], [`channel`],
//! [`noma`]) is generic over the scalar type through [`Real`]; the scenario
//! driven layers ([`network`], [`outage`], [`scenario`]) work in `f64`. The
//! aliases at the crate root pin the generic types to `f64`.

pub mod channel;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod mobility;
pub mod network;
pub mod noma;
pub mod outage;
pub mod quadrature;
pub mod real;
pub mod results;
pub mod scenario;

pub use error::{Error, Result};
pub use real::Real;

pub type Point2 = geometry::Point2<f64>;
pub type Point3 = geometry::Point3<f64>;
pub type Rect2 = geometry::Rect2<f64>;
pub type Segment3 = geometry::Segment3<f64>;
pub type CylinderSpec = geometry::CylinderSpec<f64>;
pub type StadiumRegion = geometry::StadiumRegion<f64>;
pub type RwpDistribution = mobility::RwpDistribution<f64>;
pub type BlockageProbabilityTable = mobility::BlockageProbabilityTable<f64>;
pub type RoomModel = channel::RoomModel<f64>;
pub type SurfaceElement = channel::SurfaceElement<f64>;
pub type TransmitterSpec = channel::TransmitterSpec<f64>;
pub type ReceiverSpec = channel::ReceiverSpec<f64>;
pub type ChannelImpulseResponse = channel::ChannelImpulseResponse<f64>;
pub type NomaAllocation = noma::NomaAllocation<f64>;
pub type NoiseModel = noma::NoiseModel<f64>;
pub type SinrBreakdown = noma::SinrBreakdown<f64>;

/// Single-precision variants of the geometric and channel types.
pub mod single {
    pub type Point2 = crate::geometry::Point2<f32>;
    pub type Point3 = crate::geometry::Point3<f32>;
    pub type Segment3 = crate::geometry::Segment3<f32>;
    pub type CylinderSpec = crate::geometry::CylinderSpec<f32>;
    pub type RwpDistribution = crate::mobility::RwpDistribution<f32>;
    pub type TransmitterSpec = crate::channel::TransmitterSpec<f32>;
    pub type ReceiverSpec = crate::channel::ReceiverSpec<f32>;
}
