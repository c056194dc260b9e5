use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::real::Real;

use super::{ReceiverSpec, TransmitterSpec};

/// How much of a top-hat beam lands on the receiver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamCapture<T> {
    /// Fraction of the beam spot covered by the aperture disk.
    pub capture: T,
    /// Cosine of the incidence angle on the detector (0 outside the FOV).
    pub cos_incidence: T,
}

impl<T: Real> BeamCapture<T> {
    pub fn gain(&self) -> T {
        self.capture * self.cos_incidence
    }

    /// Fraction of the beam that travels on past the receiver.
    pub fn residue(&self) -> T {
        T::one() - self.capture
    }

    pub(crate) fn compute(tx: &TransmitterSpec<T>, rx: &ReceiverSpec<T>) -> Result<Self> {
        let steer = tx.steering_angle();
        if steer > tx.max_steering {
            return Err(Error::UnservableLink {
                tx: format!("{:?}", tx.position),
                rx: format!("{:?}", tx.aim),
                angle_deg: steer.as_f64().to_degrees(),
                max_deg: tx.max_steering.as_f64().to_degrees(),
            });
        }
        let none = Self {
            capture: T::zero(),
            cos_incidence: T::zero(),
        };
        let Some(axis) = tx.beam_axis() else {
            return Ok(none);
        };
        let v = rx.position - tx.position;
        let d = v.norm();
        let axial = v.dot(axis);
        if d == T::zero() || axial <= T::zero() {
            return Ok(none);
        }
        let offset = (v - axis * axial).norm();
        let spot = axial * tx.divergence.tan();
        let aperture = rx.aperture_radius();
        let capture = (circle_overlap_area(spot, aperture, offset) / (T::PI() * spot * spot)).min(T::one());

        let cos_psi = -(v * (T::one() / d)).dot(rx.normal);
        let cos_incidence = if cos_psi > T::zero() && cos_psi >= rx.fov.cos() {
            cos_psi
        } else {
            T::zero()
        };
        Ok(Self {
            capture,
            cos_incidence,
        })
    }
}

/// Line-of-sight gain of a top-hat beam: captured spot fraction times the
/// cosine of incidence.
pub fn narrow_beam_los_gain<T: Real>(tx: &TransmitterSpec<T>, rx: &ReceiverSpec<T>) -> Result<T> {
    BeamCapture::compute(tx, rx).map(|c| c.gain())
}

/// Area of the intersection of two disks with radii `r1`, `r2` whose centres
/// are `dist` apart.
pub fn circle_overlap_area<T: Real>(r1: T, r2: T, dist: T) -> T {
    let two = T::lit(2.0);
    if dist >= r1 + r2 {
        return T::zero();
    }
    if dist <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return T::PI() * r * r;
    }
    let clamp = |c: T| c.max(-T::one()).min(T::one());
    let a1 = clamp((dist * dist + r1 * r1 - r2 * r2) / (two * dist * r1)).acos();
    let a2 = clamp((dist * dist + r2 * r2 - r1 * r1) / (two * dist * r2)).acos();
    let k = ((-dist + r1 + r2) * (dist + r1 - r2) * (dist - r1 + r2) * (dist + r1 + r2))
        .max(T::zero())
        .sqrt();
    r1 * r1 * a1 + r2 * r2 * a2 - k / two
}

/// Generalised Lambertian single-leg gain from a point source to a receiver.
pub fn lambertian_gain<T: Real>(src_pos: Point3<T>, src_normal: Point3<T>, mode: T, rx: &ReceiverSpec<T>) -> T {
    let v = rx.position - src_pos;
    let d2 = v.norm_sq();
    if d2 == T::zero() {
        return T::zero();
    }
    let u = v * (T::one() / d2.sqrt());
    let cos_phi = u.dot(src_normal);
    let cos_psi = -u.dot(rx.normal);
    if cos_phi <= T::zero() || cos_psi <= T::zero() || cos_psi < rx.fov.cos() {
        return T::zero();
    }
    (mode + T::one()) * rx.area * cos_phi.powf(mode) * cos_psi / (T::lit(2.0) * T::PI() * d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p3(x: f64, y: f64, z: f64) -> Point3<f64> {
        Point3::new(x, y, z)
    }

    fn aimed_down(d: f64) -> (TransmitterSpec<f64>, ReceiverSpec<f64>) {
        let rx = ReceiverSpec::upward(p3(1.0, 1.0, 3.0 - d));
        let tx = TransmitterSpec::ceiling(p3(1.0, 1.0, 3.0)).aimed_at(rx.position);
        (tx, rx)
    }

    #[test]
    fn full_capture_at_two_metres() {
        let (tx, rx) = aimed_down(2.0);
        assert!(2.0 * (2.1e-3f64).tan() < rx.aperture_radius());
        assert_eq!(narrow_beam_los_gain(&tx, &rx).unwrap(), 1.0);
    }

    #[test]
    fn partial_capture_at_four_metres() {
        let mut rx = ReceiverSpec::upward(p3(1.0, 1.0, 0.0));
        let tx = TransmitterSpec::ceiling(p3(1.0, 1.0, 4.0)).aimed_at(rx.position);
        // oracle: ratio of aperture area to uniform spot area
        let spot = 4.0 * (2.1e-3f64).tan();
        let expected = 1e-4 / (std::f64::consts::PI * spot * spot);
        assert_relative_eq!(expected, 0.45112, max_relative = 1e-4);
        assert_relative_eq!(narrow_beam_los_gain(&tx, &rx).unwrap(), expected, max_relative = 1e-12);
        rx.fov = 0.1;
        assert_relative_eq!(narrow_beam_los_gain(&tx, &rx).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn receiver_outside_beam_cone_gets_nothing() {
        let (tx, mut rx) = aimed_down(2.0);
        rx.position.x += 0.02;
        assert_eq!(narrow_beam_los_gain(&tx, &rx).unwrap(), 0.0);
    }

    #[test]
    fn oblique_incidence_scales_by_cosine() {
        let rx = ReceiverSpec::upward(p3(2.0, 4.0, 1.0));
        let tx = TransmitterSpec::ceiling(p3(1.0, 3.0, 3.0)).aimed_at(rx.position);
        let g = narrow_beam_los_gain(&tx, &rx).unwrap();
        assert_relative_eq!(g, 2.0 / 6.0f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn steering_beyond_limit_is_unservable() {
        let rx = ReceiverSpec::upward(p3(3.0, 3.0, 1.0));
        let tx = TransmitterSpec::ceiling(p3(1.0, 1.0, 3.0)).aimed_at(rx.position);
        assert!(matches!(narrow_beam_los_gain(&tx, &rx), Err(Error::UnservableLink { .. })));
    }

    #[test]
    fn outside_fov_gets_nothing() {
        let (tx, mut rx) = aimed_down(2.0);
        rx.normal = p3(1.0, 0.0, 0.0);
        rx.fov = 0.5;
        assert_eq!(narrow_beam_los_gain(&tx, &rx).unwrap(), 0.0);
    }

    #[test]
    fn overlap_area_limits() {
        use std::f64::consts::PI;
        assert_eq!(circle_overlap_area(1.0, 1.0, 2.0), 0.0);
        assert_relative_eq!(circle_overlap_area(1.0, 0.5, 0.2), PI * 0.25);
        // half-overlap of equal unit circles at distance 1: 2pi/3 - sqrt(3)/2
        assert_relative_eq!(circle_overlap_area(1.0, 1.0, 1.0), 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn lambertian_on_axis() {
        let rx = ReceiverSpec::upward(p3(0.0, 0.0, 0.0));
        let g = lambertian_gain(p3(0.0, 0.0, 1.0), p3(0.0, 0.0, -1.0), 1.0, &rx);
        assert_relative_eq!(g, 3.18310e-5, max_relative = 1e-5);
    }

    #[test]
    fn lambertian_nulls() {
        let mut rx = ReceiverSpec::upward(p3(0.0, 0.0, 0.0));
        // source edge-on: phi = 90 deg
        assert_eq!(lambertian_gain(p3(0.0, 0.0, 1.0), p3(1.0, 0.0, 0.0), 1.0, &rx), 0.0);
        // psi beyond FOV
        rx.fov = 0.3;
        assert_eq!(lambertian_gain(p3(1.0, 0.0, 1.0), p3(0.0, 0.0, -1.0), 1.0, &rx), 0.0);
    }

    #[test]
    fn lambertian_inverse_square() {
        let rx = ReceiverSpec::upward(p3(0.0, 0.0, 0.0));
        let n = p3(0.0, -0.6, -0.8);
        let g1 = lambertian_gain(p3(0.3, 0.5, 1.0), n, 1.0, &rx);
        let g2 = lambertian_gain(p3(0.6, 1.0, 2.0), n, 1.0, &rx);
        assert_relative_eq!(g1, 4.0 * g2, max_relative = 1e-12);
    }

    #[test]
    fn lambertian_reciprocity() {
        let a = p3(0.2, 0.1, 2.5);
        let na = p3(0.0, 0.0, -1.0);
        let b = p3(1.0, 2.0, 0.0);
        let nb = p3(0.0, 0.0, 1.0);
        let rx_b = ReceiverSpec { position: b, normal: nb, area: 0.01, fov: std::f64::consts::FRAC_PI_2, responsivity: 1.0 };
        let rx_a = ReceiverSpec { position: a, normal: na, area: 0.01, fov: std::f64::consts::FRAC_PI_2, responsivity: 1.0 };
        assert_relative_eq!(lambertian_gain(a, na, 1.0, &rx_b), lambertian_gain(b, nb, 1.0, &rx_a), max_relative = 1e-12);
    }
}
