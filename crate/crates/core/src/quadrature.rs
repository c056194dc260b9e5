//! Adaptive Gauss-Kronrod quadrature in one dimension, and iterated
//! integration over [`SlicedRegion`]s in the floor plane.
//!
//! The 2D rule integrates over `x` adaptively and, for each abscissa, over the
//! exact `y`-slices of the region. Region boundaries never cut through a
//! quadrature panel, so the only non-smoothness left is in the slice bounds
//! (square-root behaviour at disk edges), which the outer adaptive rule
//! resolves by bisection.

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::SlicedRegion;
use crate::real::Real;

// Kronrod 15-point abscissae and weights; the Gauss 7-point rule uses the odd
// Kronrod nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Upper bound on the number of panels kept by the adaptive rule.
    pub max_panels: usize,
}

impl<T: Real> QuadratureOptions<T> {
    pub fn with_rel_tol(rel_tol: T) -> Self {
        Self {
            rel_tol,
            abs_tol: T::lit(1e-15),
            max_panels: 4000,
        }
    }
}

impl<T: Real> Default for QuadratureOptions<T> {
    fn default() -> Self {
        Self::with_rel_tol(T::lit(1e-4))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    /// Estimated absolute error.
    pub error: T,
    pub evaluations: usize,
}

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.partial_cmp(&o.error).unwrap_or(Ordering::Equal)
    }
}

fn gauss_kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Panel<T> {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        kronrod = kronrod + s * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * T::lit(WG[j / 2]);
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]`, first splitting at the given interior
/// `breakpoints`. On failure the best estimate is returned in `Err`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    breakpoints: &[T],
    opts: &QuadratureOptions<T>,
) -> Result<Estimate<T>, Estimate<T>> {
    if !(b > a) {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    let mut cuts: Vec<T> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap_or(Ordering::Equal));
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut lo = a;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        if hi > lo {
            heap.push(gauss_kronrod(&mut f, lo, hi));
        }
        lo = hi;
    }
    let mut evaluations = 15 * heap.len();
    let min_width = (b - a) * T::epsilon() * T::lit(64.0);

    loop {
        let value: T = heap.iter().map(|p| p.value).sum();
        let error: T = heap.iter().map(|p| p.error).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        let est = Estimate {
            value,
            error,
            evaluations,
        };
        if error <= tol {
            return Ok(est);
        }
        if heap.len() >= opts.max_panels {
            return Err(est);
        }
        let worst = heap.pop().expect("non-empty panel set");
        if worst.b - worst.a <= min_width {
            // cannot refine further; accept what is left as the error
            heap.push(Panel { error: T::zero(), ..worst });
            if heap.iter().all(|p| p.error == T::zero()) {
                return Err(est);
            }
            continue;
        }
        let m = (worst.a + worst.b) * T::lit(0.5);
        heap.push(gauss_kronrod(&mut f, worst.a, m));
        heap.push(gauss_kronrod(&mut f, m, worst.b));
        evaluations += 30;
    }
}

/// Integrates `f(x, y)` over a region by iterated adaptive quadrature.
pub fn integrate_region<T, R, F>(region: &R, f: F, opts: &QuadratureOptions<T>) -> Result<Estimate<T>, Estimate<T>>
where
    T: Real,
    R: SlicedRegion<T> + ?Sized,
    F: Fn(T, T) -> T,
{
    let Some(bb) = region.bounding_box() else {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    };
    let mut breaks = Vec::new();
    region.breakpoints(&mut breaks);

    let inner_opts = QuadratureOptions {
        rel_tol: opts.rel_tol * T::lit(1e-3),
        abs_tol: opts.abs_tol * T::lit(1e-3),
        max_panels: opts.max_panels,
    };
    let inner_failed = Cell::new(false);
    let inner_evals = Cell::new(0usize);
    let slices = RefCell::new(Vec::with_capacity(4));

    let outer = integrate(
        |x| {
            let mut s = slices.borrow_mut();
            s.clear();
            region.slice(x, &mut s);
            let mut total = T::zero();
            for &(lo, hi) in s.iter() {
                let r = integrate(|y| f(x, y), lo, hi, &[], &inner_opts);
                let e = r.unwrap_or_else(|e| {
                    inner_failed.set(true);
                    e
                });
                inner_evals.set(inner_evals.get() + e.evaluations);
                total = total + e.value;
            }
            total
        },
        bb.min.x,
        bb.max.x,
        &breaks,
        opts,
    );
    let add = |mut e: Estimate<T>| {
        e.evaluations += inner_evals.get();
        e
    };
    match outer {
        Ok(e) if !inner_failed.get() => Ok(add(e)),
        Ok(e) | Err(e) => Err(add(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point2, Rect2, StadiumRegion};
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let opts = QuadratureOptions::with_rel_tol(1e-12);
        let e = integrate(|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, &[], &opts).unwrap();
        assert_relative_eq!(e.value, 0.0, epsilon = 1e-14);
        let e = integrate(|x: f64| x.powi(6), -1.0, 1.0, &[], &opts).unwrap();
        assert_relative_eq!(e.value, 2.0 / 7.0, max_relative = 1e-14);
    }

    #[test]
    fn square_root_endpoint_converges() {
        let opts = QuadratureOptions::with_rel_tol(1e-10);
        let e = integrate(|x: f64| (1.0 - x * x).max(0.0).sqrt(), -1.0, 1.0, &[], &opts).unwrap();
        assert_relative_eq!(e.value, std::f64::consts::FRAC_PI_2, max_relative = 1e-9);
    }

    #[test]
    fn empty_interval_is_zero() {
        let e = integrate(|x: f64| x, 1.0, 1.0, &[], &QuadratureOptions::default()).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn panel_budget_exhaustion_reports_best_estimate() {
        let opts = QuadratureOptions {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_panels: 3,
        };
        let r = integrate(|x: f64| (1.0 - x * x).max(0.0).sqrt(), -1.0, 1.0, &[], &opts);
        let e = r.unwrap_err();
        assert_relative_eq!(e.value, std::f64::consts::FRAC_PI_2, max_relative = 1e-2);
    }

    #[test]
    fn disk_area_to_high_accuracy() {
        let disk = StadiumRegion {
            spine: Some((Point2::new(2.0, 2.0), Point2::new(2.0, 2.0))),
            radius: 0.3,
            clip: Rect2::from_extent(4.0, 8.0),
        };
        let e = integrate_region(&disk, |_, _| 1.0, &QuadratureOptions::with_rel_tol(1e-10)).unwrap();
        assert_relative_eq!(e.value, std::f64::consts::PI * 0.09, max_relative = 1e-9);
    }

    #[test]
    fn rectangle_moment() {
        let r = Rect2::from_extent(2.0, 3.0);
        let e = integrate_region(&r, |x: f64, y: f64| x * y, &QuadratureOptions::with_rel_tol(1e-12)).unwrap();
        assert_relative_eq!(e.value, 2.0 * 4.5, max_relative = 1e-12);
    }
}
