//! Exact geometry for line-of-sight links and the vertical-cylinder human model.
//!
//! Coordinates are metres in a corner-origin room frame: `x` across the width,
//! `y` along the length, `z` up from the floor.
//!
//! The set of human positions that block a link is a *stadium*: the floor
//! projection of the part of the link below head height, inflated by the body
//! radius and clipped to the room footprint. [`segment_intersects_cylinder`] and
//! [`StadiumRegion::contains`] compute the same predicate by two independent
//! routes (a ray/cylinder quadratic and a point/segment distance).

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureOptions};
use crate::real::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }
}

impl<T: Real> Add for Point2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

/// A point (or displacement) in the room frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn from_f64(x: f64, y: f64, z: f64) -> Self {
        Self::new(T::lit(x), T::lit(y), T::lit(z))
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > T::zero() && n.is_finite()).then(|| self * (T::one() / n))
    }

    pub fn xy(self) -> Point2<T> {
        Point2::new(self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl<T: Real> Add for Point3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Point3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Point3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Neg for Point3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

// Points serialize as `[x, y, z]` so scenario files stay compact.
impl<T: Serialize> Serialize for Point3<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (&self.x, &self.y, &self.z).serialize(s)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Point3<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (x, y, z) = <(T, T, T)>::deserialize(d)?;
        Ok(Point3 { x, y, z })
    }
}

/// Axis-aligned rectangle in the floor plane (closed).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect2<T> {
    pub min: Point2<T>,
    pub max: Point2<T>,
}

impl<T: Real> Rect2<T> {
    pub fn new(min: Point2<T>, max: Point2<T>) -> Self {
        Self { min, max }
    }

    /// Footprint `[0, width] x [0, length]`.
    pub fn from_extent(width: T, length: T) -> Self {
        Self::new(Point2::new(T::zero(), T::zero()), Point2::new(width, length))
    }

    pub fn contains(&self, p: Point2<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> T {
        self.width().max(T::zero()) * self.height().max(T::zero())
    }

    pub fn is_empty(&self) -> bool {
        self.max.x < self.min.x || self.max.y < self.min.y
    }

    pub fn intersect(&self, o: &Self) -> Option<Self> {
        let r = Self::new(
            Point2::new(self.min.x.max(o.min.x), self.min.y.max(o.min.y)),
            Point2::new(self.max.x.min(o.max.x), self.max.y.min(o.max.y)),
        );
        (!r.is_empty()).then_some(r)
    }

    pub fn union(&self, o: &Self) -> Self {
        Self::new(
            Point2::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            Point2::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        )
    }
}

/// Line-of-sight link from a transmitter (`a`) to a receiver (`b`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment3<T> {
    a: Point3<T>,
    b: Point3<T>,
}

impl<T: Real> Segment3<T> {
    pub fn new(a: Point3<T>, b: Point3<T>) -> Result<Self> {
        if a == b || !a.is_finite() || !b.is_finite() {
            return Err(Error::DegenerateSegment);
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> Point3<T> {
        self.a
    }

    pub fn b(&self) -> Point3<T> {
        self.b
    }

    pub fn length(&self) -> T {
        self.a.distance(self.b)
    }

    pub fn at(&self, t: T) -> Point3<T> {
        self.a + (self.b - self.a) * t
    }

    /// Parameter range `[t0, t1] ⊆ [0, 1]` where `lo <= z <= hi`.
    fn z_clip(&self, lo: T, hi: T) -> Option<(T, T)> {
        let dz = self.b.z - self.a.z;
        let (mut t0, mut t1) = (T::zero(), T::one());
        if dz == T::zero() {
            if self.a.z < lo || self.a.z > hi {
                return None;
            }
        } else {
            let s0 = (lo - self.a.z) / dz;
            let s1 = (hi - self.a.z) / dz;
            t0 = t0.max(s0.min(s1));
            t1 = t1.min(s0.max(s1));
        }
        (t0 <= t1).then_some((t0, t1))
    }
}

/// Vertical solid cylinder standing on the floor; the human body model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec<T> {
    pub height: T,
    pub radius: T,
}

impl<T: Real> CylinderSpec<T> {
    pub fn new(height: T, radius: T) -> Result<Self> {
        let c = Self { height, radius };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.height > T::zero() && self.radius > T::zero() && self.height.is_finite() && self.radius.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidCylinder)
        }
    }
}

impl<T: Real> Default for CylinderSpec<T> {
    /// 1.8 m tall, 0.3 m radius.
    fn default() -> Self {
        Self {
            height: T::lit(1.8),
            radius: T::lit(0.3),
        }
    }
}

/// True iff the closed segment touches the closed solid cylinder centred at `center`.
///
/// Solves `|p(t)_xy - c|^2 <= r^2` as a quadratic in the segment parameter and
/// intersects the root interval with the slab `0 <= z <= height`.
pub fn segment_intersects_cylinder<T: Real>(link: &Segment3<T>, center: Point2<T>, cyl: &CylinderSpec<T>) -> bool {
    let Some((s0, s1)) = link.z_clip(T::zero(), cyl.height) else {
        return false;
    };
    let d = (link.b - link.a).xy();
    let w = link.a.xy() - center;
    let a = d.norm_sq();
    let c = w.norm_sq() - cyl.radius * cyl.radius;
    if a == T::zero() {
        return c <= T::zero();
    }
    let b = T::lit(2.0) * w.dot(d);
    let disc = b * b - T::lit(4.0) * a * c;
    if disc < T::zero() {
        return false;
    }
    let sq = disc.sqrt();
    let two_a = T::lit(2.0) * a;
    let t_lo = (-b - sq) / two_a;
    let t_hi = (-b + sq) / two_a;
    t_lo <= s1 && t_hi >= s0
}

/// A region of the floor plane that can be integrated over by slicing at
/// constant `x`.
pub trait SlicedRegion<T: Real> {
    /// Exact membership test.
    fn contains(&self, p: Point2<T>) -> bool;

    /// Tight bounding box, `None` when the region is empty.
    fn bounding_box(&self) -> Option<Rect2<T>>;

    /// Appends the `y`-intervals of the vertical line at `x` that lie inside
    /// the region. Intervals are sorted and disjoint.
    fn slice(&self, x: T, out: &mut Vec<(T, T)>);

    /// Appends `x` positions where the slice bounds are not smooth.
    fn breakpoints(&self, out: &mut Vec<T>);
}

impl<T: Real> SlicedRegion<T> for Rect2<T> {
    fn contains(&self, p: Point2<T>) -> bool {
        Rect2::contains(self, p)
    }

    fn bounding_box(&self) -> Option<Rect2<T>> {
        (!self.is_empty()).then_some(*self)
    }

    fn slice(&self, x: T, out: &mut Vec<(T, T)>) {
        if x >= self.min.x && x <= self.max.x && !self.is_empty() {
            out.push((self.min.y, self.max.y));
        }
    }

    fn breakpoints(&self, out: &mut Vec<T>) {
        out.push(self.min.x);
        out.push(self.max.x);
    }
}

/// `{ c : dist(c, spine) <= radius } ∩ clip`. An absent spine means the
/// region is empty; a spine with equal ends is a disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StadiumRegion<T> {
    pub spine: Option<(Point2<T>, Point2<T>)>,
    pub radius: T,
    pub clip: Rect2<T>,
}

impl<T: Real> StadiumRegion<T> {
    pub fn empty(clip: Rect2<T>) -> Self {
        Self {
            spine: None,
            radius: T::zero(),
            clip,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.spine.is_none()
    }

    pub fn spine_length(&self) -> T {
        self.spine.map_or(T::zero(), |(p, q)| p.distance(q))
    }

    /// Area before clipping: `2 r L + pi r^2`.
    pub fn unclipped_area(&self) -> T {
        if self.is_empty() {
            return T::zero();
        }
        T::lit(2.0) * self.radius * self.spine_length() + T::PI() * self.radius * self.radius
    }

    /// Distance from `p` to the spine.
    pub fn spine_distance(&self, p: Point2<T>) -> Option<T> {
        let (a, b) = self.spine?;
        let ab = b - a;
        let len2 = ab.norm_sq();
        let t = if len2 > T::zero() {
            ((p - a).dot(ab) / len2).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        Some(p.distance(a + ab * t))
    }

    /// Corners of the band around the spine (empty for a disk).
    fn band(&self) -> Option<[Point2<T>; 4]> {
        let (a, b) = self.spine?;
        let ab = b - a;
        let len = ab.norm();
        if len == T::zero() {
            return None;
        }
        let n = Point2::new(-ab.y, ab.x) * (self.radius / len);
        Some([a + n, b + n, b - n, a - n])
    }

    fn unclipped_slice(&self, x: T) -> Option<(T, T)> {
        let (a, b) = self.spine?;
        let r = self.radius;
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for c in [a, b] {
            let dx = x - c.x;
            let h2 = r * r - dx * dx;
            if h2 >= T::zero() {
                let h = h2.sqrt();
                lo = lo.min(c.y - h);
                hi = hi.max(c.y + h);
            }
        }
        if let Some(quad) = self.band() {
            for k in 0..4 {
                let p = quad[k];
                let q = quad[(k + 1) % 4];
                let (x0, x1) = (p.x.min(q.x), p.x.max(q.x));
                if x < x0 || x > x1 {
                    continue;
                }
                if p.x == q.x {
                    lo = lo.min(p.y.min(q.y));
                    hi = hi.max(p.y.max(q.y));
                } else {
                    let y = p.y + (x - p.x) / (q.x - p.x) * (q.y - p.y);
                    lo = lo.min(y);
                    hi = hi.max(y);
                }
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Exact area via quadrature of the membership indicator.
    pub fn area(&self) -> T {
        region_area(self)
    }
}

impl<T: Real> SlicedRegion<T> for StadiumRegion<T> {
    fn contains(&self, p: Point2<T>) -> bool {
        match self.spine_distance(p) {
            Some(d) => d <= self.radius && self.clip.contains(p),
            None => false,
        }
    }

    fn bounding_box(&self) -> Option<Rect2<T>> {
        let (a, b) = self.spine?;
        let r = self.radius;
        let bb = Rect2::new(
            Point2::new(a.x.min(b.x) - r, a.y.min(b.y) - r),
            Point2::new(a.x.max(b.x) + r, a.y.max(b.y) + r),
        );
        bb.intersect(&self.clip)
    }

    fn slice(&self, x: T, out: &mut Vec<(T, T)>) {
        if x < self.clip.min.x || x > self.clip.max.x {
            return;
        }
        if let Some((lo, hi)) = self.unclipped_slice(x) {
            let lo = lo.max(self.clip.min.y);
            let hi = hi.min(self.clip.max.y);
            if lo <= hi {
                out.push((lo, hi));
            }
        }
    }

    fn breakpoints(&self, out: &mut Vec<T>) {
        let Some((a, b)) = self.spine else { return };
        let r = self.radius;
        out.extend([self.clip.min.x, self.clip.max.x]);
        for c in [a, b] {
            out.extend([c.x - r, c.x, c.x + r]);
            // where the circle crosses the clip's horizontal edges
            for y in [self.clip.min.y, self.clip.max.y] {
                let h2 = r * r - (y - c.y) * (y - c.y);
                if h2 >= T::zero() {
                    let h = h2.sqrt();
                    out.extend([c.x - h, c.x + h]);
                }
            }
        }
        if let Some(quad) = self.band() {
            for k in 0..4 {
                let p = quad[k];
                let q = quad[(k + 1) % 4];
                out.push(p.x);
                for y in [self.clip.min.y, self.clip.max.y] {
                    if (p.y - y) * (q.y - y) < T::zero() {
                        out.push(p.x + (y - p.y) / (q.y - p.y) * (q.x - p.x));
                    }
                }
            }
        }
    }
}

/// Union of regions, e.g. the two hops of a relayed path.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionUnion<R> {
    pub parts: Vec<R>,
}

impl<R> RegionUnion<R> {
    pub fn new(parts: Vec<R>) -> Self {
        Self { parts }
    }
}

impl<T: Real, R: SlicedRegion<T>> SlicedRegion<T> for RegionUnion<R> {
    fn contains(&self, p: Point2<T>) -> bool {
        self.parts.iter().any(|r| r.contains(p))
    }

    fn bounding_box(&self) -> Option<Rect2<T>> {
        self.parts
            .iter()
            .filter_map(|r| r.bounding_box())
            .reduce(|a, b| a.union(&b))
    }

    fn slice(&self, x: T, out: &mut Vec<(T, T)>) {
        let start = out.len();
        for r in &self.parts {
            r.slice(x, out);
        }
        let mut pieces = out.split_off(start);
        pieces.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite slice bounds"));
        for (lo, hi) in pieces {
            if out.len() > start {
                let last = out.last_mut().expect("non-empty");
                if lo <= last.1 {
                    last.1 = last.1.max(hi);
                    continue;
                }
            }
            out.push((lo, hi));
        }
    }

    fn breakpoints(&self, out: &mut Vec<T>) {
        for r in &self.parts {
            r.breakpoints(out);
        }
    }
}

/// The set of cylinder centres for which the cylinder blocks `link`,
/// clipped to `footprint`.
pub fn blocked_region<T: Real>(link: &Segment3<T>, cyl: &CylinderSpec<T>, footprint: Rect2<T>) -> StadiumRegion<T> {
    match link.z_clip(T::zero(), cyl.height) {
        None => StadiumRegion::empty(footprint),
        Some((t0, t1)) => StadiumRegion {
            spine: Some((link.at(t0).xy(), link.at(t1).xy())),
            radius: cyl.radius,
            clip: footprint,
        },
    }
}

/// Area of a sliced region by adaptive quadrature of its indicator (relative
/// tolerance 1e-4).
pub fn region_area<T: Real, R: SlicedRegion<T>>(region: &R) -> T {
    let opts = QuadratureOptions::with_rel_tol(T::lit(1e-4));
    match quadrature::integrate_region(region, |_, _| T::one(), &opts) {
        Ok(e) => e.value,
        Err(e) => e.value,
    }
}
