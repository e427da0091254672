//! Piecewise-smooth base loops: circle arcs and line segments, closure
//! and clearance validation, and routing of connecting paths around
//! invariant fibers.

use super::HolonomyError;
use crate::matrix::C64;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// One parametrized piece of a base path, traversed over t in [0, 1].
#[derive(Clone, Debug)]
pub enum Segment {
    Line {
        from: C64,
        to: C64,
    },
    /// theta runs linearly from theta0 to theta1; a decreasing range is a
    /// clockwise arc.
    Arc {
        center: C64,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
}

impl Segment {
    pub fn start(&self) -> C64 {
        self.point(0.0)
    }

    pub fn end(&self) -> C64 {
        self.point(1.0)
    }

    pub fn point(&self, t: f64) -> C64 {
        match self {
            Segment::Line { from, to } => from + (to - from) * C64::new(t, 0.0),
            Segment::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => center + C64::from_polar(*radius, theta0 + (theta1 - theta0) * t),
        }
    }

    pub fn velocity(&self, t: f64) -> C64 {
        match self {
            Segment::Line { from, to } => to - from,
            Segment::Arc {
                center: _,
                radius,
                theta0,
                theta1,
            } => {
                let theta = theta0 + (theta1 - theta0) * t;
                C64::from_polar(*radius, theta) * C64::new(0.0, theta1 - theta0)
            }
        }
    }

    pub fn reversed(&self) -> Segment {
        match self {
            Segment::Line { from, to } => Segment::Line {
                from: *to,
                to: *from,
            },
            Segment::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => Segment::Arc {
                center: *center,
                radius: *radius,
                theta0: *theta1,
                theta1: *theta0,
            },
        }
    }

    /// Exact distance from a point to the segment.
    pub fn distance_to(&self, p: C64) -> f64 {
        match self {
            Segment::Line { from, to } => {
                let d = to - from;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return (p - from).norm();
                }
                // Projection parameter in the real inner product.
                let w = p - from;
                let t = ((w.re * d.re + w.im * d.im) / len2).clamp(0.0, 1.0);
                (p - (from + d * C64::new(t, 0.0))).norm()
            }
            Segment::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let rel = p - center;
                let phi = rel.arg();
                let (lo, hi) = if theta0 <= theta1 {
                    (*theta0, *theta1)
                } else {
                    (*theta1, *theta0)
                };
                // Does phi + 2 pi k land inside the sweep?
                let mut inside = false;
                let mut k = ((lo - phi) / TAU).floor() - 1.0;
                while phi + k * TAU <= hi + 1e-12 {
                    if phi + k * TAU >= lo - 1e-12 {
                        inside = true;
                        break;
                    }
                    k += 1.0;
                }
                if inside {
                    (rel.norm() - radius).abs()
                } else {
                    let a = (p - self.start()).norm();
                    let b = (p - self.end()).norm();
                    a.min(b)
                }
            }
        }
    }
}

/// A closed piecewise-smooth base loop avoiding a declared set of
/// forbidden points (the invariant fibers) by a declared margin.
#[derive(Clone, Debug)]
pub struct LoopPath {
    pub segments: Vec<Segment>,
    pub base_point: C64,
    pub forbidden: Vec<C64>,
    pub clearance: f64,
}

impl LoopPath {
    pub fn new(
        segments: Vec<Segment>,
        forbidden: Vec<C64>,
        clearance: f64,
    ) -> Result<Self, HolonomyError> {
        if segments.is_empty() {
            return Err(HolonomyError::OpenLoop { gap: f64::INFINITY });
        }
        let scale = segments
            .iter()
            .map(|s| s.start().norm().max(s.end().norm()))
            .fold(1.0f64, f64::max);
        for pair in segments.windows(2) {
            let gap = (pair[0].end() - pair[1].start()).norm();
            if gap > 1e-9 * scale {
                return Err(HolonomyError::OpenLoop { gap });
            }
        }
        let gap = (segments.last().unwrap().end() - segments[0].start()).norm();
        if gap > 1e-9 * scale {
            return Err(HolonomyError::OpenLoop { gap });
        }
        for f in &forbidden {
            let d = segments
                .iter()
                .map(|s| s.distance_to(*f))
                .fold(f64::INFINITY, f64::min);
            if d < clearance * (1.0 - 1e-9) {
                return Err(HolonomyError::ClearanceViolated {
                    clearance,
                    distance: d,
                });
            }
        }
        let base_point = segments[0].start();
        Ok(LoopPath {
            segments,
            base_point,
            forbidden,
            clearance,
        })
    }

    /// Counterclockwise circle based at center + radius.
    pub fn circle(center: C64, radius: f64) -> Result<Self, HolonomyError> {
        LoopPath::new(
            vec![Segment::Arc {
                center,
                radius,
                theta0: 0.0,
                theta1: TAU,
            }],
            vec![center],
            radius * 0.99,
        )
    }

    pub fn reversed(&self) -> LoopPath {
        let segments: Vec<Segment> = self.segments.iter().rev().map(|s| s.reversed()).collect();
        LoopPath {
            base_point: segments[0].start(),
            segments,
            forbidden: self.forbidden.clone(),
            clearance: self.clearance,
        }
    }
}

// ---------------------------------------------------------------------------
// Routing
// ---------------------------------------------------------------------------

/// Straight path from `from` to `to`, bending around any obstacle that
/// the straight segment approaches closer than the clearance. Obstacles
/// are assumed mutually separated by at least four clearances.
pub fn route_segments(
    from: C64,
    to: C64,
    obstacles: &[C64],
    clearance: f64,
) -> Result<Vec<Segment>, HolonomyError> {
    fn go(
        from: C64,
        to: C64,
        obstacles: &[C64],
        clearance: f64,
        depth: usize,
        out: &mut Vec<Segment>,
    ) -> Result<(), HolonomyError> {
        if depth > 16 {
            return Err(HolonomyError::RoutingFailure {
                reason: "detour recursion exceeded".into(),
            });
        }
        let d = to - from;
        let len2 = d.norm_sqr();
        if len2 == 0.0 {
            return Ok(());
        }
        // Closest offending obstacle by entry parameter along the segment.
        let mut hit: Option<(f64, C64)> = None;
        for &obs in obstacles {
            let w = obs - from;
            let t = ((w.re * d.re + w.im * d.im) / len2).clamp(0.0, 1.0);
            let dist = (obs - (from + d * C64::new(t, 0.0))).norm();
            if dist < clearance * (1.0 - 1e-12) {
                // Strictly interior approach only; grazing endpoints are
                // the caller's business.
                if t > 1e-9 && t < 1.0 - 1e-9 {
                    match hit {
                        Some((t0, _)) if t0 <= t => {}
                        _ => hit = Some((t, obs)),
                    }
                }
            }
        }
        let Some((_, obs)) = hit else {
            out.push(Segment::Line { from, to });
            return Ok(());
        };
        // Entry and exit of the line through the clearance circle.
        let w = obs - from;
        let tm = (w.re * d.re + w.im * d.im) / len2;
        let dist = (obs - (from + d * C64::new(tm, 0.0))).norm();
        if dist >= clearance {
            out.push(Segment::Line { from, to });
            return Ok(());
        }
        let half = (clearance * clearance - dist * dist).sqrt() / len2.sqrt();
        let t_in = (tm - half).max(0.0);
        let t_out = (tm + half).min(1.0);
        let p_in = from + d * C64::new(t_in, 0.0);
        let p_out = from + d * C64::new(t_out, 0.0);
        // Project both onto the circle exactly.
        let snap = |p: C64| -> C64 {
            let rel = p - obs;
            let n = rel.norm();
            if n == 0.0 {
                obs + C64::new(clearance, 0.0)
            } else {
                obs + rel * C64::new(clearance / n, 0.0)
            }
        };
        let c_in = snap(p_in);
        let c_out = snap(p_out);
        let th_in = (c_in - obs).arg();
        let mut th_out = (c_out - obs).arg();
        while th_out - th_in > std::f64::consts::PI {
            th_out -= TAU;
        }
        while th_out - th_in < -std::f64::consts::PI {
            th_out += TAU;
        }
        // The detour must not change the corridor's homotopy class in the
        // punctured plane: it bulges on the side opposite to where the
        // obstacle sits relative to the exact segment, so the obstacle
        // stays on the side it already was. An obstacle exactly on the
        // segment counts as lying to the right (the angular generator
        // order breaks such ties with the nearer fiber first, which
        // corresponds to rotating the far corridor counterclockwise).
        let travel = d / C64::new(len2.sqrt(), 0.0);
        let cross = travel.re * (obs - from).im - travel.im * (obs - from).re;
        let want_left_bulge = cross <= 0.0;
        let left = C64::new(0.0, 1.0) * travel;
        let midpoint = C64::from_polar(1.0, (th_in + th_out) / 2.0);
        let is_left = midpoint.re * left.re + midpoint.im * left.im > 0.0;
        if is_left != want_left_bulge {
            th_out += if th_out < th_in { TAU } else { -TAU };
        }
        let remaining: Vec<C64> = obstacles.iter().copied().filter(|o| *o != obs).collect();
        go(from, c_in, &remaining, clearance, depth + 1, out)?;
        out.push(Segment::Arc {
            center: obs,
            radius: clearance,
            theta0: th_in,
            theta1: th_out,
        });
        go(c_out, to, &remaining, clearance, depth + 1, out)?;
        Ok(())
    }
    let mut out = Vec::new();
    go(from, to, obstacles, clearance, 0, &mut out)?;
    Ok(out)
}

/// The composite loop around one fiber: out along a routed path to the
/// small circle, once around counterclockwise, and back.
pub fn lasso_loop(
    base: C64,
    target: C64,
    all_fibers: &[C64],
    clearance: f64,
) -> Result<LoopPath, HolonomyError> {
    let to_target = target - base;
    if to_target.norm() <= clearance {
        return Err(HolonomyError::RoutingFailure {
            reason: "base point inside the target clearance disk".into(),
        });
    }
    // Circle radius: the clearance, shrunk by nearby fibers.
    let nearest_other = all_fibers
        .iter()
        .filter(|f| (*f - target).norm() > 1e-12)
        .map(|f| (f - target).norm())
        .fold(f64::INFINITY, f64::min);
    let radius = clearance.min(nearest_other / 2.0).min(to_target.norm() / 2.0);
    let dir = to_target / C64::new(to_target.norm(), 0.0);
    let entry = target - dir * C64::new(radius, 0.0);
    let others: Vec<C64> = all_fibers
        .iter()
        .copied()
        .filter(|f| (*f - target).norm() > 1e-12)
        .collect();
    let approach = route_segments(base, entry, &others, clearance)?;
    let theta_entry = (entry - target).arg();
    let circle = Segment::Arc {
        center: target,
        radius,
        theta0: theta_entry,
        theta1: theta_entry + TAU,
    };
    let mut segments = approach.clone();
    segments.push(circle);
    segments.extend(approach.iter().rev().map(|s| s.reversed()));
    let declared = radius.min(clearance) * 0.98;
    LoopPath::new(segments, all_fibers.to_vec(), declared)
}

/// Loop around the fiber over infinity: out to a large circle enclosing
/// every finite fiber, once around clockwise, and back.
pub fn infinity_loop(
    base: C64,
    all_fibers: &[C64],
    clearance: f64,
) -> Result<LoopPath, HolonomyError> {
    let far = all_fibers
        .iter()
        .map(|f| f.norm())
        .fold(base.norm(), f64::max);
    let radius = 2.0 * far + 2.0;
    let dir = if base.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        base / C64::new(base.norm(), 0.0)
    };
    let exit = dir * C64::new(radius, 0.0);
    let approach = route_segments(base, exit, all_fibers, clearance)?;
    let theta = exit.arg();
    let circle = Segment::Arc {
        center: C64::new(0.0, 0.0),
        radius,
        theta0: theta,
        theta1: theta - TAU,
    };
    let mut segments = approach.clone();
    segments.push(circle);
    segments.extend(approach.iter().rev().map(|s| s.reversed()));
    LoopPath::new(segments, all_fibers.to_vec(), clearance * 0.98)
}
