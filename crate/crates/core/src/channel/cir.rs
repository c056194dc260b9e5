use crate::error::{Error, Result};
use crate::geometry::{segment_intersects_cylinder, CylinderSpec, Point2, Point3, Segment3};
use crate::real::Real;

use super::beam::{lambertian_gain, BeamCapture};
use super::surfaces::{BounceOrder, SurfaceTiling};
use super::{ReceiverSpec, RoomModel, TransmitterSpec};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// A human standing at `center`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Human<T> {
    pub center: Point2<T>,
    pub cylinder: CylinderSpec<T>,
}

impl<T: Real> Human<T> {
    pub fn blocks(&self, leg: &Segment3<T>) -> bool {
        segment_intersects_cylinder(leg, self.center, &self.cylinder)
    }
}

/// One propagation path from transmitter to receiver.
#[derive(Clone, Debug, PartialEq)]
pub struct PathContribution<T> {
    pub legs: Vec<Segment3<T>>,
    pub gain: T,
    /// Propagation delay in seconds.
    pub delay: T,
    /// Number of surface reflections.
    pub bounces: u8,
}

impl<T: Real> PathContribution<T> {
    fn new(points: &[Point3<T>], gain: T, bounces: u8) -> Option<Self> {
        let legs = points
            .windows(2)
            .map(|w| Segment3::new(w[0], w[1]))
            .collect::<Result<Vec<_>>>()
            .ok()?;
        let length: T = legs.iter().map(|l| l.length()).sum();
        Some(Self {
            legs,
            gain,
            delay: length / T::lit(SPEED_OF_LIGHT),
            bounces,
        })
    }

    pub fn blocked_by(&self, human: &Human<T>) -> bool {
        self.legs.iter().any(|l| human.blocks(l))
    }
}

/// Time-binned power gain of one link.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelImpulseResponse<T> {
    /// Bin width in seconds.
    pub bin_duration: T,
    /// Time of bin 0 in seconds.
    pub origin_time: T,
    pub bins: Vec<T>,
}

impl<T: Real> ChannelImpulseResponse<T> {
    pub fn zeros(bin_duration: T) -> Self {
        Self {
            bin_duration,
            origin_time: T::zero(),
            bins: Vec::new(),
        }
    }

    pub fn bin_index(&self, delay: T) -> usize {
        ((delay - self.origin_time) / self.bin_duration)
            .round()
            .to_usize()
            .unwrap_or(0)
    }

    pub fn add(&mut self, delay: T, gain: T) {
        let k = self.bin_index(delay);
        if k >= self.bins.len() {
            self.bins.resize(k + 1, T::zero());
        }
        self.bins[k] = self.bins[k] + gain;
    }

    /// `(bin_index, time_s, gain)` for every non-zero bin.
    pub fn nonzero_bins(&self) -> impl Iterator<Item = (usize, T, T)> + '_ {
        self.bins
            .iter()
            .enumerate()
            .filter(|(_, g)| **g != T::zero())
            .map(|(k, &g)| (k, self.origin_time + self.bin_duration * T::lit(k as f64), g))
    }
}

/// Total mass of the impulse response, i.e. the DC channel gain.
pub fn dc_gain<T: Real>(cir: &ChannelImpulseResponse<T>) -> T {
    cir.bins.iter().copied().sum()
}

/// LOS and reflected parts of a link's DC gain.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GainSplit<T> {
    pub los: T,
    pub reflected: T,
}

impl<T: Real> GainSplit<T> {
    pub fn total(&self) -> T {
        self.los + self.reflected
    }
}

/// Room plus its surface discretisation; traces paths between transceivers.
#[derive(Clone, Debug)]
pub struct ChannelModel<T> {
    pub room: RoomModel<T>,
    pub first: SurfaceTiling<T>,
    pub second: SurfaceTiling<T>,
    pub bin_duration: T,
}

impl<T: Real> ChannelModel<T> {
    pub fn new(room: RoomModel<T>, first_res: T, second_res: T, bin_duration: T) -> Result<Self> {
        if !(bin_duration > T::zero()) {
            return Err(Error::InvalidArgument(format!("bin duration must be positive, got {bin_duration}")));
        }
        let (first, second) = super::discretize_surfaces(&room, first_res, second_res)?;
        Ok(Self {
            room,
            first,
            second,
            bin_duration,
        })
    }

    /// Enumerates LOS, first- and second-bounce paths up to `max_bounces`.
    ///
    /// Beam power the receiver does not capture continues along the beam axis
    /// to the first surface it meets; the tile hit there re-emits it as a
    /// Lambertian source.
    pub fn trace_paths(
        &self,
        tx: &TransmitterSpec<T>,
        rx: &ReceiverSpec<T>,
        max_bounces: u8,
    ) -> Result<Vec<PathContribution<T>>> {
        if max_bounces > 2 {
            return Err(Error::InvalidArgument(format!("at most 2 bounces supported, got {max_bounces}")));
        }
        let beam = BeamCapture::compute(tx, rx)?;
        let mut paths = Vec::new();
        let los = beam.gain();
        if los > T::zero() {
            paths.extend(PathContribution::new(&[tx.position, rx.position], los, 0));
        }
        let residue = beam.residue();
        if max_bounces == 0 || residue <= T::zero() {
            return Ok(paths);
        }
        let Some(axis) = tx.beam_axis() else {
            return Ok(paths);
        };
        let Some((spot, surface)) = self.room.ray_exit(tx.position, axis) else {
            return Ok(paths);
        };
        let Some(first) = self.first.locate(surface, spot).copied() else {
            return Ok(paths);
        };
        let mode = self.room.lambertian_mode;
        let source = residue * first.reflectivity;

        let g1 = source * lambertian_gain(first.center, first.normal, mode, rx);
        if g1 > T::zero() {
            paths.extend(PathContribution::new(&[tx.position, first.center, rx.position], g1, 1));
        }
        if max_bounces < 2 {
            return Ok(paths);
        }
        debug_assert_eq!(self.second.order, BounceOrder::Second);
        for e in &self.second.elements {
            if e.surface == first.surface {
                continue;
            }
            let as_receiver = ReceiverSpec {
                position: e.center,
                normal: e.normal,
                area: e.area,
                fov: T::FRAC_PI_2(),
                responsivity: T::one(),
            };
            let incident = source * lambertian_gain(first.center, first.normal, mode, &as_receiver);
            if incident <= T::zero() {
                continue;
            }
            let g2 = incident * e.reflectivity * lambertian_gain(e.center, e.normal, mode, rx);
            if g2 > T::zero() {
                paths.extend(PathContribution::new(&[tx.position, first.center, e.center, rx.position], g2, 2));
            }
        }
        Ok(paths)
    }

    /// Impulse response of one link; paths with a leg through `human` drop out.
    pub fn impulse_response(
        &self,
        tx: &TransmitterSpec<T>,
        rx: &ReceiverSpec<T>,
        max_bounces: u8,
        human: Option<&Human<T>>,
    ) -> Result<ChannelImpulseResponse<T>> {
        let paths = self.trace_paths(tx, rx, max_bounces)?;
        let mut cir = ChannelImpulseResponse::zeros(self.bin_duration);
        for p in &paths {
            if human.is_some_and(|h| p.blocked_by(h)) {
                continue;
            }
            cir.add(p.delay, p.gain);
        }
        Ok(cir)
    }

    /// Unblocked DC gain split into LOS and reflected parts.
    pub fn gain_split(&self, tx: &TransmitterSpec<T>, rx: &ReceiverSpec<T>, max_bounces: u8) -> Result<GainSplit<T>> {
        let mut split = GainSplit {
            los: T::zero(),
            reflected: T::zero(),
        };
        for p in self.trace_paths(tx, rx, max_bounces)? {
            if p.bounces == 0 {
                split.los = split.los + p.gain;
            } else {
                split.reflected = split.reflected + p.gain;
            }
        }
        Ok(split)
    }
}
