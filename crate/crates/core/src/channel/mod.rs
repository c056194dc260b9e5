//! Indoor optical channel: a narrow steered beam for the line-of-sight path
//! plus Lambertian reflections off discretised room surfaces, accumulated
//! into a time-binned impulse response.

mod beam;
mod cir;
mod surfaces;

pub use beam::{circle_overlap_area, lambertian_gain, narrow_beam_los_gain, BeamCapture};
pub use cir::{dc_gain, ChannelImpulseResponse, ChannelModel, GainSplit, Human, PathContribution, SPEED_OF_LIGHT};
pub use surfaces::{discretize_surfaces, BounceOrder, Surface, SurfaceElement, SurfaceTiling};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, Rect2};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoomModel<T> {
    /// Extent along `x`.
    pub width: T,
    /// Extent along `y`.
    pub length: T,
    pub height: T,
    pub wall_reflectivity: T,
    pub ceiling_reflectivity: T,
    pub floor_reflectivity: T,
    /// Lambertian mode number of the reflecting surfaces.
    pub lambertian_mode: T,
}

impl<T: Real> Default for RoomModel<T> {
    fn default() -> Self {
        Self {
            width: T::lit(4.0),
            length: T::lit(8.0),
            height: T::lit(3.0),
            wall_reflectivity: T::lit(0.8),
            ceiling_reflectivity: T::lit(0.8),
            floor_reflectivity: T::lit(0.3),
            lambertian_mode: T::one(),
        }
    }
}

impl<T: Real> RoomModel<T> {
    pub fn footprint(&self) -> Rect2<T> {
        Rect2::from_extent(self.width, self.length)
    }

    pub fn contains(&self, p: Point3<T>) -> bool {
        p.is_finite()
            && p.x >= T::zero()
            && p.x <= self.width
            && p.y >= T::zero()
            && p.y <= self.length
            && p.z >= T::zero()
            && p.z <= self.height
    }

    pub fn total_surface_area(&self) -> T {
        T::lit(2.0) * (self.width * self.length + self.width * self.height + self.length * self.height)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("width", self.width), ("length", self.length), ("height", self.height)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::validation(format!("room.{name}"), format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("wall_reflectivity", self.wall_reflectivity),
            ("ceiling_reflectivity", self.ceiling_reflectivity),
            ("floor_reflectivity", self.floor_reflectivity),
        ] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::validation(format!("room.{name}"), format!("must lie in [0, 1], got {v}")));
            }
        }
        if !(self.lambertian_mode >= T::zero() && self.lambertian_mode.is_finite()) {
            return Err(Error::validation("room.lambertian_mode", "must be non-negative"));
        }
        Ok(())
    }

    /// Where a ray from `origin` along unit `dir` leaves the room, with the
    /// surface it hits.
    pub fn ray_exit(&self, origin: Point3<T>, dir: Point3<T>) -> Option<(Point3<T>, Surface)> {
        let mut best: Option<(T, Surface)> = None;
        let axes = [
            (origin.x, dir.x, self.width, Surface::WallX0, Surface::WallX1),
            (origin.y, dir.y, self.length, Surface::WallY0, Surface::WallY1),
            (origin.z, dir.z, self.height, Surface::Floor, Surface::Ceiling),
        ];
        for (p, d, hi, low_face, high_face) in axes {
            let hit = if d > T::zero() {
                Some(((hi - p) / d, high_face))
            } else if d < T::zero() {
                Some(((T::zero() - p) / d, low_face))
            } else {
                None
            };
            if let Some((t, s)) = hit {
                if t > T::zero() && best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, s));
                }
            }
        }
        best.map(|(t, s)| (origin + dir * t, s))
    }
}

/// Beam-steered optical transmitter (access point or relay laser).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransmitterSpec<T> {
    pub position: Point3<T>,
    /// Average optical power in watts.
    pub power: T,
    /// Beam divergence half-angle in radians.
    pub divergence: T,
    /// Steering target.
    pub aim: Point3<T>,
    /// Unit vector of the unsteered beam direction.
    pub boresight: Point3<T>,
    /// Largest steering angle off boresight, radians.
    pub max_steering: T,
}

impl<T: Real> TransmitterSpec<T> {
    /// Ceiling access point pointing straight down, with default optics.
    pub fn ceiling(position: Point3<T>) -> Self {
        Self {
            position,
            power: T::lit(1e-3),
            divergence: T::lit(2.1e-3),
            aim: position - Point3::new(T::zero(), T::zero(), T::one()),
            boresight: Point3::new(T::zero(), T::zero(), -T::one()),
            max_steering: T::lit(40.0).to_radians(),
        }
    }

    pub fn aimed_at(mut self, aim: Point3<T>) -> Self {
        self.aim = aim;
        self
    }

    /// Angle between the steered beam and boresight.
    pub fn steering_angle(&self) -> T {
        steering_angle(self.position, self.boresight, self.aim)
    }

    pub fn beam_axis(&self) -> Option<Point3<T>> {
        (self.aim - self.position).normalized()
    }
}

/// Angle between `boresight` and the direction from `from` to `to`.
pub fn steering_angle<T: Real>(from: Point3<T>, boresight: Point3<T>, to: Point3<T>) -> T {
    match (to - from).normalized() {
        Some(u) => u.dot(boresight).max(-T::one()).min(T::one()).acos(),
        None => T::zero(),
    }
}

/// Photodiode front end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReceiverSpec<T> {
    pub position: Point3<T>,
    /// Unit normal of the detector surface.
    pub normal: Point3<T>,
    /// Aperture area in square metres.
    pub area: T,
    /// Field-of-view half-angle in radians.
    pub fov: T,
    /// Responsivity in A/W.
    pub responsivity: T,
}

impl<T: Real> ReceiverSpec<T> {
    /// Upward facing 1 cm² detector, 90° FOV, 0.5 A/W.
    pub fn upward(position: Point3<T>) -> Self {
        Self {
            position,
            normal: Point3::new(T::zero(), T::zero(), T::one()),
            area: T::lit(1e-4),
            fov: T::FRAC_PI_2(),
            responsivity: T::lit(0.5),
        }
    }

    /// Normal from elevation and azimuth angles (radians).
    pub fn normal_from_angles(elevation: T, azimuth: T) -> Point3<T> {
        Point3::new(
            elevation.cos() * azimuth.cos(),
            elevation.cos() * azimuth.sin(),
            elevation.sin(),
        )
    }

    pub fn aperture_radius(&self) -> T {
        (self.area / T::PI()).sqrt()
    }
}
