use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::real::Real;

use super::RoomModel;

/// The six reflecting faces of a rectangular room.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Surface {
    Floor,
    Ceiling,
    /// Wall in the plane `x = 0`.
    WallX0,
    /// Wall in the plane `x = width`.
    WallX1,
    /// Wall in the plane `y = 0`.
    WallY0,
    /// Wall in the plane `y = length`.
    WallY1,
}

impl Surface {
    pub const ALL: [Surface; 6] = [
        Surface::Floor,
        Surface::Ceiling,
        Surface::WallX0,
        Surface::WallX1,
        Surface::WallY0,
        Surface::WallY1,
    ];

    /// Unit normal pointing into the room.
    pub fn inward_normal<T: Real>(self) -> Point3<T> {
        let (o, z) = (T::one(), T::zero());
        match self {
            Surface::Floor => Point3::new(z, z, o),
            Surface::Ceiling => Point3::new(z, z, -o),
            Surface::WallX0 => Point3::new(o, z, z),
            Surface::WallX1 => Point3::new(-o, z, z),
            Surface::WallY0 => Point3::new(z, o, z),
            Surface::WallY1 => Point3::new(z, -o, z),
        }
    }

    pub fn reflectivity<T: Real>(self, room: &RoomModel<T>) -> T {
        match self {
            Surface::Floor => room.floor_reflectivity,
            Surface::Ceiling => room.ceiling_reflectivity,
            _ => room.wall_reflectivity,
        }
    }

    /// Plane offset and the two in-plane extents `(u, v)`.
    fn frame<T: Real>(self, room: &RoomModel<T>) -> (T, T, T) {
        let (w, l, h) = (room.width, room.length, room.height);
        match self {
            Surface::Floor => (T::zero(), w, l),
            Surface::Ceiling => (h, w, l),
            Surface::WallX0 => (T::zero(), l, h),
            Surface::WallX1 => (w, l, h),
            Surface::WallY0 => (T::zero(), w, h),
            Surface::WallY1 => (l, w, h),
        }
    }

    fn to_room<T: Real>(self, plane: T, u: T, v: T) -> Point3<T> {
        match self {
            Surface::Floor | Surface::Ceiling => Point3::new(u, v, plane),
            Surface::WallX0 | Surface::WallX1 => Point3::new(plane, u, v),
            Surface::WallY0 | Surface::WallY1 => Point3::new(u, plane, v),
        }
    }

    fn to_plane<T: Real>(self, p: Point3<T>) -> (T, T) {
        match self {
            Surface::Floor | Surface::Ceiling => (p.x, p.y),
            Surface::WallX0 | Surface::WallX1 => (p.y, p.z),
            Surface::WallY0 | Surface::WallY1 => (p.x, p.z),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BounceOrder {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceElement<T> {
    pub center: Point3<T>,
    pub normal: Point3<T>,
    pub area: T,
    pub reflectivity: T,
    pub surface: Surface,
    pub order: BounceOrder,
}

#[derive(Clone, Copy, Debug)]
struct Grid<T> {
    surface: Surface,
    start: usize,
    nu: usize,
    nv: usize,
    extent_u: T,
    extent_v: T,
}

/// All room surfaces tiled at one resolution. Edge tiles keep their true,
/// smaller area.
#[derive(Clone, Debug)]
pub struct SurfaceTiling<T> {
    pub resolution: T,
    pub order: BounceOrder,
    pub elements: Vec<SurfaceElement<T>>,
    grids: Vec<Grid<T>>,
}

fn tile_count<T: Real>(extent: T, res: T) -> usize {
    let n = (extent / res - T::lit(1e-9)).ceil();
    n.to_usize().unwrap_or(0).max(1)
}

impl<T: Real> SurfaceTiling<T> {
    pub fn new(room: &RoomModel<T>, resolution: T, order: BounceOrder) -> Result<Self> {
        if !(resolution > T::zero() && resolution.is_finite()) {
            return Err(Error::InvalidResolution(resolution.as_f64()));
        }
        room.validate()?;
        let mut elements = Vec::new();
        let mut grids = Vec::with_capacity(6);
        for surface in Surface::ALL {
            let (plane, eu, ev) = surface.frame(room);
            let (nu, nv) = (tile_count(eu, resolution), tile_count(ev, resolution));
            grids.push(Grid {
                surface,
                start: elements.len(),
                nu,
                nv,
                extent_u: eu,
                extent_v: ev,
            });
            let normal = surface.inward_normal();
            let reflectivity = surface.reflectivity(room);
            let span = |i: usize, n: usize, extent: T| {
                let lo = resolution * T::lit(i as f64);
                let hi = if i + 1 == n { extent } else { lo + resolution };
                (lo, hi)
            };
            for iu in 0..nu {
                let (u0, u1) = span(iu, nu, eu);
                for iv in 0..nv {
                    let (v0, v1) = span(iv, nv, ev);
                    let half = T::lit(0.5);
                    elements.push(SurfaceElement {
                        center: surface.to_room(plane, (u0 + u1) * half, (v0 + v1) * half),
                        normal,
                        area: (u1 - u0) * (v1 - v0),
                        reflectivity,
                        surface,
                        order,
                    });
                }
            }
        }
        Ok(Self {
            resolution,
            order,
            elements,
            grids,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn total_area(&self) -> T {
        self.elements.iter().map(|e| e.area).sum()
    }

    /// Element of `surface` containing the in-plane projection of `p`.
    pub fn locate(&self, surface: Surface, p: Point3<T>) -> Option<&SurfaceElement<T>> {
        let g = self.grids.iter().find(|g| g.surface == surface)?;
        let (u, v) = surface.to_plane(p);
        if u < T::zero() || v < T::zero() || u > g.extent_u || v > g.extent_v {
            return None;
        }
        let idx = |x: T, n: usize| (x / self.resolution).floor().to_usize().unwrap_or(0).min(n - 1);
        let (iu, iv) = (idx(u, g.nu), idx(v, g.nv));
        self.elements.get(g.start + iu * g.nv + iv)
    }
}

/// Tiles every surface at the first- and second-order resolutions.
pub fn discretize_surfaces<T: Real>(
    room: &RoomModel<T>,
    first_res: T,
    second_res: T,
) -> Result<(SurfaceTiling<T>, SurfaceTiling<T>)> {
    Ok((
        SurfaceTiling::new(room, first_res, BounceOrder::First)?,
        SurfaceTiling::new(room, second_res, BounceOrder::Second)?,
    ))
}
