//! Stationary position law of a random-waypoint walker on a rectangular floor,
//! and the blockage probabilities it induces on line-of-sight links.
//!
//! The density is separable, `f(x) f(y)` with
//! `f(u) = 6 / u_m^3 * (u_m^2 / 4 - u^2)` in coordinates centred on the floor.
//! Scenario coordinates are corner-origin, so every evaluation first shifts by
//! half the floor extent.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{blocked_region, CylinderSpec, Point2, Rect2, RegionUnion, Segment3, SlicedRegion};
use crate::network::LinkId;
use crate::quadrature::{integrate_region, QuadratureOptions};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwpDistribution<T> {
    /// Floor extent along `x` (room width).
    pub x_m: T,
    /// Floor extent along `y` (room length).
    pub y_m: T,
    /// Corner of the floor in scenario coordinates.
    pub origin: Point2<T>,
}

impl<T: Real> RwpDistribution<T> {
    pub fn new(x_m: T, y_m: T) -> Result<Self> {
        if !(x_m > T::zero() && y_m > T::zero() && x_m.is_finite() && y_m.is_finite()) {
            return Err(Error::validation("rwp", "floor extents must be positive"));
        }
        Ok(Self {
            x_m,
            y_m,
            origin: Point2::new(T::zero(), T::zero()),
        })
    }

    pub fn with_origin(mut self, origin: Point2<T>) -> Self {
        self.origin = origin;
        self
    }

    pub fn footprint(&self) -> Rect2<T> {
        Rect2::new(self.origin, self.origin + Point2::new(self.x_m, self.y_m))
    }

    /// Centred coordinates of a scenario point.
    pub fn to_centered(&self, p: Point2<T>) -> Point2<T> {
        let half = T::lit(0.5);
        Point2::new(p.x - self.origin.x - self.x_m * half, p.y - self.origin.y - self.y_m * half)
    }

    fn marginal(u: T, extent: T) -> T {
        let h2 = extent * extent * T::lit(0.25);
        if u * u > h2 {
            return T::zero();
        }
        T::lit(6.0) / (extent * extent * extent) * (h2 - u * u)
    }

    /// Density per square metre; zero outside the floor.
    pub fn pdf(&self, p: Point2<T>) -> T {
        let c = self.to_centered(p);
        Self::marginal(c.x, self.x_m) * Self::marginal(c.y, self.y_m)
    }

    /// Maximum of the density, attained at the floor centre: `9 / (4 x_m y_m)`.
    pub fn peak(&self) -> T {
        T::lit(9.0) / (T::lit(4.0) * self.x_m * self.y_m)
    }

    /// Integral of the density over a floor region.
    pub fn probability<R: SlicedRegion<T> + ?Sized>(&self, region: &R, rel_tol: T) -> Result<T> {
        let opts = QuadratureOptions::with_rel_tol(rel_tol);
        match integrate_region(region, |x, y| self.pdf(Point2::new(x, y)), &opts) {
            Ok(e) => Ok(e.value.max(T::zero()).min(T::one())),
            Err(e) => Err(Error::QuadratureNonConvergence {
                estimate: e.value.as_f64(),
                error: e.error.as_f64(),
            }),
        }
    }
}

/// Draws one human position by rejection against the uniform envelope at the
/// peak density. Consumes three uniforms per trial.
pub fn sample_human_position<T: Real, R: Rng + ?Sized>(dist: &RwpDistribution<T>, rng: &mut R) -> Point2<T> {
    let peak = dist.peak().as_f64();
    let (x_m, y_m) = (dist.x_m.as_f64(), dist.y_m.as_f64());
    let (ox, oy) = (dist.origin.x.as_f64(), dist.origin.y.as_f64());
    loop {
        let x = ox + rng.gen::<f64>() * x_m;
        let y = oy + rng.gen::<f64>() * y_m;
        let u = rng.gen::<f64>() * peak;
        let p = Point2::new(T::lit(x), T::lit(y));
        if u < dist.pdf(p).as_f64() {
            return p;
        }
    }
}

/// Probability that a single human blocks `link`.
pub fn blockage_probability<T: Real>(
    link: &Segment3<T>,
    cyl: &CylinderSpec<T>,
    dist: &RwpDistribution<T>,
    rel_tol: T,
) -> Result<T> {
    let region = blocked_region(link, cyl, dist.footprint());
    dist.probability(&region, rel_tol)
}

/// Probability that a single human blocks at least one hop of a relayed path.
pub fn relay_path_blockage_probability<T: Real>(
    ap_to_relay: &Segment3<T>,
    relay_to_user: &Segment3<T>,
    cyl: &CylinderSpec<T>,
    dist: &RwpDistribution<T>,
    rel_tol: T,
) -> Result<T> {
    let fp = dist.footprint();
    let union = RegionUnion::new(vec![
        blocked_region(ap_to_relay, cyl, fp),
        blocked_region(relay_to_user, cyl, fp),
    ]);
    dist.probability(&union, rel_tol)
}

/// Per-link blockage probabilities for one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockageProbabilityTable<T> {
    pub entries: BTreeMap<LinkId, T>,
    pub rel_tol: T,
    pub cylinder: CylinderSpec<T>,
}

impl<T: Real> BlockageProbabilityTable<T> {
    pub fn new(rel_tol: T, cylinder: CylinderSpec<T>) -> Self {
        Self {
            entries: BTreeMap::new(),
            rel_tol,
            cylinder,
        }
    }

    pub fn get(&self, id: &LinkId) -> Option<T> {
        self.entries.get(id).copied()
    }

    pub fn insert(&mut self, id: LinkId, p: T) {
        self.entries.insert(id, p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dist() -> RwpDistribution<f64> {
        RwpDistribution::new(4.0, 8.0).unwrap()
    }

    #[test]
    fn density_at_centre_and_corner() {
        let d = dist();
        assert_relative_eq!(d.pdf(Point2::new(2.0, 4.0)), 0.0703125, max_relative = 1e-12);
        assert_eq!(d.pdf(Point2::new(0.0, 0.0)), 0.0);
        assert_relative_eq!(d.pdf(Point2::new(1.0, 1.0)), 0.0230713, max_relative = 1e-5);
        assert_eq!(d.pdf(Point2::new(-0.1, 4.0)), 0.0);
        assert_eq!(d.pdf(Point2::new(2.0, 8.5)), 0.0);
    }

    #[test]
    fn peak_is_centre_density() {
        let d = dist();
        assert_relative_eq!(d.peak(), d.pdf(Point2::new(2.0, 4.0)), max_relative = 1e-15);
    }

    #[test]
    fn normalises_over_floor() {
        let d = dist();
        let p = d.probability(&d.footprint(), 1e-12).unwrap();
        assert_relative_eq!(p, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn shifted_frame_keeps_probabilities() {
        let base = dist();
        let shifted = dist().with_origin(Point2::new(10.0, -3.0));
        let cyl = CylinderSpec::default();
        let a = Point3::new(1.0, 1.0, 3.0);
        let b = Point3::new(2.0, 4.0, 1.0);
        let off = Point3::new(10.0, -3.0, 0.0);
        let p0 = blockage_probability(&Segment3::new(a, b).unwrap(), &cyl, &base, 1e-8).unwrap();
        let p1 = blockage_probability(&Segment3::new(a + off, b + off).unwrap(), &cyl, &shifted, 1e-8).unwrap();
        assert_relative_eq!(p0, p1, max_relative = 1e-8);
        // moving the link but not the density frame changes the answer
        let p2 = blockage_probability(&Segment3::new(a + off, b + off).unwrap(), &cyl, &base, 1e-8).unwrap();
        assert_eq!(p2, 0.0);
    }

    #[test]
    fn link_above_head_height_has_zero_probability() {
        let link = Segment3::new(Point3::new(1.0, 1.0, 3.0), Point3::new(3.0, 1.0, 2.9)).unwrap();
        assert_eq!(blockage_probability(&link, &CylinderSpec::default(), &dist(), 1e-4).unwrap(), 0.0);
    }

    #[test]
    fn vertical_link_probability_near_midpoint_rule() {
        let link = Segment3::new(Point3::new(1.0, 1.0, 3.0), Point3::new(1.0, 1.0, 1.0)).unwrap();
        let p = blockage_probability(&link, &CylinderSpec::default(), &dist(), 1e-6).unwrap();
        let midpoint = 0.0230713 * 0.282743;
        assert!((p / midpoint - 1.0).abs() < 0.03, "p = {p}");
    }

    #[test]
    fn relay_path_union_properties() {
        let d = dist();
        let cyl = CylinderSpec::default();
        let s = |a: [f64; 3], b: [f64; 3]| {
            Segment3::new(Point3::new(a[0], a[1], a[2]), Point3::new(b[0], b[1], b[2])).unwrap()
        };
        let h1 = s([1.0, 3.0, 3.0], [0.0, 3.0, 1.5]);
        let h2 = s([0.0, 3.0, 1.5], [2.0, 4.0, 1.0]);
        let p1 = blockage_probability(&h1, &cyl, &d, 1e-8).unwrap();
        let p2 = blockage_probability(&h2, &cyl, &d, 1e-8).unwrap();
        let pu = relay_path_blockage_probability(&h1, &h2, &cyl, &d, 1e-8).unwrap();
        assert!(pu <= p1 + p2 + 1e-10);
        assert!(pu + 1e-10 >= p1.max(p2));
        // identical hops
        let same = relay_path_blockage_probability(&h2, &h2, &cyl, &d, 1e-8).unwrap();
        assert_relative_eq!(same, p2, max_relative = 1e-7);
        // disjoint hops add
        let far = s([3.0, 7.0, 3.0], [4.0, 7.0, 1.5]);
        let pf = blockage_probability(&far, &cyl, &d, 1e-8).unwrap();
        let pd = relay_path_blockage_probability(&h1, &far, &cyl, &d, 1e-8).unwrap();
        assert_relative_eq!(pd, p1 + pf, max_relative = 1e-6);
        // both hops high
        let hi1 = s([1.0, 1.0, 3.0], [2.0, 1.0, 2.5]);
        let hi2 = s([2.0, 1.0, 2.5], [3.0, 1.0, 2.9]);
        assert_eq!(relay_path_blockage_probability(&hi1, &hi2, &cyl, &d, 1e-4).unwrap(), 0.0);
    }

    #[test]
    fn sampler_is_deterministic() {
        let d = dist();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100).map(|_| sample_human_position(&d, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    #[test]
    fn sampler_stays_on_floor() {
        let d = dist().with_origin(Point2::new(1.0, 2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let p = sample_human_position(&d, &mut rng);
            assert!(d.footprint().contains(p));
        }
    }

    #[test]
    fn single_precision_density() {
        let d = RwpDistribution::<f32>::new(4.0, 8.0).unwrap();
        assert!((d.pdf(Point2::new(2.0, 4.0)) - 0.0703125).abs() < 1e-7);
    }
}
