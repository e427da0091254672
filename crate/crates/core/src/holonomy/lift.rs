//! Numerical lifting of base paths through an accepted Riccati field:
//! an embedded Dormand-Prince 5(4) integrator over the fiber coordinates
//! with switching among the three affine fiber charts, and the fitting of
//! the resulting start-to-end correspondences as a projective map.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::loops::{infinity_loop, lasso_loop, LoopPath, Segment};
use super::HolonomyError;
use crate::classify::ProjMap;
use crate::matrix::{fit_projective, Correspondence, C64};
use crate::normal_form::{check_riccati_cp2, invariant_fibers};
use crate::poly::{fiber_chart_cp2, fiber_chart_cp2_second, MultiPoly, PolyVectorField};

const ZERO: C64 = Complex64::new(0.0, 0.0);
const ONE: C64 = Complex64::new(1.0, 0.0);

/// Chart-switch trigger on the max coordinate modulus, with hysteresis:
/// only switch when the best chart improves by the hysteresis factor.
const SWITCH_THRESHOLD: f64 = 2.0;
const SWITCH_HYSTERESIS: f64 = 1.5;

#[derive(Clone, Copy, Debug, Default)]
pub struct IntegratorStats {
    pub steps: u64,
    pub rejected_steps: u64,
    pub chart_switches: u64,
}

impl IntegratorStats {
    fn absorb(&mut self, other: &IntegratorStats) {
        self.steps += other.steps;
        self.rejected_steps += other.rejected_steps;
        self.chart_switches += other.chart_switches;
    }
}

#[derive(Clone, Debug)]
pub struct LiftOptions {
    pub n_samples: usize,
    /// Relative and absolute integration tolerance.
    pub tol: f64,
    pub seed: u64,
    pub max_steps: u64,
    /// Loop clearance for automatically generated loops; None picks a
    /// quarter of the smallest fiber separation.
    pub clearance: Option<f64>,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            n_samples: 8,
            tol: 1e-9,
            seed: 0,
            max_steps: 1_000_000,
            clearance: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HolonomyResult {
    pub map: ProjMap,
    pub residual: f64,
    pub n_samples: usize,
    pub stats: IntegratorStats,
}

// ---------------------------------------------------------------------------
// Fiber charts
// ---------------------------------------------------------------------------

/// Homogeneous fiber coordinates [h0, h1, h2]; the first affine chart is
/// (y, z) = (h0/h2, h1/h2), so affine maps embed as [[L, t], [0, 1]].
fn hom_from_chart(chart: usize, y: &[C64; 2]) -> [C64; 3] {
    match chart {
        0 => [y[0], y[1], ONE],
        1 => [ONE, y[1], y[0]],
        _ => [y[0], ONE, y[1]],
    }
}

fn chart_from_hom(chart: usize, h: &[C64; 3]) -> [C64; 2] {
    match chart {
        0 => [h[0] / h[2], h[1] / h[2]],
        1 => [h[2] / h[0], h[1] / h[0]],
        _ => [h[0] / h[1], h[2] / h[1]],
    }
}

fn chart_denominator(chart: usize, h: &[C64; 3]) -> f64 {
    match chart {
        0 => h[2].norm(),
        1 => h[0].norm(),
        _ => h[1].norm(),
    }
}

/// Chart with the smallest max coordinate modulus, with its coordinates.
fn best_chart(h: &[C64; 3]) -> (usize, [C64; 2], f64) {
    let mut best = (0usize, [ZERO; 2], f64::INFINITY);
    for chart in 0..3 {
        if chart_denominator(chart, h) == 0.0 {
            continue;
        }
        let y = chart_from_hom(chart, h);
        let m = y[0].norm().max(y[1].norm());
        if m < best.2 {
            best = (chart, y, m);
        }
    }
    best
}

/// The three chart incarnations of an accepted Riccati field, all with
/// base component p(x) (clearing exponents are zero by acceptance).
struct ChartSet {
    p: MultiPoly,
    fields: [PolyVectorField; 3],
}

fn build_charts(x: &PolyVectorField) -> Result<ChartSet, HolonomyError> {
    let form = match check_riccati_cp2(x)? {
        Ok(form) => form,
        Err(rej) => {
            return Err(HolonomyError::NotRiccati {
                reason: rej.constraint.name(),
            })
        }
    };
    let c1 = fiber_chart_cp2(x)?;
    let c2 = fiber_chart_cp2_second(x)?;
    if c1.clearing_exponent != 0 || c2.clearing_exponent != 0 {
        return Err(HolonomyError::NotRiccati {
            reason: "chart change required pole clearing".into(),
        });
    }
    Ok(ChartSet {
        p: form.p,
        fields: [x.clone(), c1.field, c2.field],
    })
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)
// ---------------------------------------------------------------------------

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Lifter<'a> {
    charts: &'a ChartSet,
    tol: f64,
    max_steps: u64,
    stats: IntegratorStats,
}

impl<'a> Lifter<'a> {
    fn new(charts: &'a ChartSet, tol: f64, max_steps: u64) -> Self {
        Lifter {
            charts,
            tol,
            max_steps,
            stats: IntegratorStats::default(),
        }
    }

    fn rhs(&self, chart: usize, segment: &Segment, t: f64, y: &[C64; 2]) -> Result<[C64; 2], HolonomyError> {
        let x = segment.point(t);
        let dx = segment.velocity(t);
        let p = self
            .charts
            .p
            .eval(&[x, ZERO, ZERO])
            .map_err(HolonomyError::Poly)?;
        if p.norm() < 1e-14 {
            return Err(HolonomyError::PoleOnPath);
        }
        let field = &self.charts.fields[chart];
        let pt = [x, y[0], y[1]];
        let f1 = field.components[1].eval(&pt).map_err(HolonomyError::Poly)?;
        let f2 = field.components[2].eval(&pt).map_err(HolonomyError::Poly)?;
        let factor = dx / p;
        Ok([f1 * factor, f2 * factor])
    }

    /// Integrate one segment, switching charts as needed.
    fn lift_segment(
        &mut self,
        segment: &Segment,
        chart: &mut usize,
        y: &mut [C64; 2],
    ) -> Result<(), HolonomyError> {
        let mut t = 0.0f64;
        let mut h = 0.01f64;
        let mut err_prev: f64 = 1.0;
        while t < 1.0 {
            if self.stats.steps + self.stats.rejected_steps > self.max_steps {
                return Err(HolonomyError::IntegrationFailure {
                    reason: "step budget exhausted".into(),
                });
            }
            h = h.min(1.0 - t);
            if h < 1e-14 {
                return Err(HolonomyError::IntegrationFailure {
                    reason: "step size underflow".into(),
                });
            }
            let mut k: [[C64; 2]; 7] = [[ZERO; 2]; 7];
            k[0] = self.rhs(*chart, segment, t, y)?;
            for stage in 0..6 {
                let mut ys = *y;
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        ys[0] += kj[0] * C64::new(a * h, 0.0);
                        ys[1] += kj[1] * C64::new(a * h, 0.0);
                    }
                }
                k[stage + 1] = self.rhs(*chart, segment, t + C[stage] * h, &ys)?;
            }
            // Fifth-order solution is the last stage base (FSAL layout).
            let mut y5 = *y;
            for (j, kj) in k.iter().enumerate().take(6) {
                let b = A[5][j];
                if b != 0.0 {
                    y5[0] += kj[0] * C64::new(b * h, 0.0);
                    y5[1] += kj[1] * C64::new(b * h, 0.0);
                }
            }
            // Embedded error estimate.
            let mut err_sq = 0.0f64;
            for i in 0..2 {
                let mut e = ZERO;
                for (j, kj) in k.iter().enumerate() {
                    if E[j] != 0.0 {
                        e += kj[i] * C64::new(E[j] * h, 0.0);
                    }
                }
                let sc = self.tol + self.tol * y[i].norm().max(y5[i].norm());
                err_sq += (e.norm() / sc).powi(2);
            }
            let err = (err_sq / 2.0).sqrt();
            if err <= 1.0 {
                t += h;
                *y = y5;
                self.stats.steps += 1;
                // Chart switch with hysteresis.
                let maxmod = y[0].norm().max(y[1].norm());
                if maxmod > SWITCH_THRESHOLD {
                    let h3 = hom_from_chart(*chart, y);
                    let (bc, by, bm) = best_chart(&h3);
                    if bc != *chart && bm <= maxmod / SWITCH_HYSTERESIS {
                        *chart = bc;
                        *y = by;
                        self.stats.chart_switches += 1;
                    }
                }
                let fac = (0.9 * err.max(1e-10).powf(-0.2) * err_prev.powf(0.08))
                    .clamp(0.2, 5.0);
                err_prev = err.max(1e-10);
                h *= fac;
            } else {
                self.stats.rejected_steps += 1;
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                h *= fac;
            }
        }
        Ok(())
    }

    fn lift(
        &mut self,
        segments: &[Segment],
        start: &[C64; 3],
    ) -> Result<[C64; 3], HolonomyError> {
        let (mut chart, mut y, _) = best_chart(start);
        for segment in segments {
            self.lift_segment(segment, &mut chart, &mut y)?;
        }
        Ok(hom_from_chart(chart, &y))
    }
}

// ---------------------------------------------------------------------------
// Public lifting interface
// ---------------------------------------------------------------------------

/// Deterministic fiber sample points spread across the three charts,
/// topped up with seeded random points.
fn sample_points(n: usize, seed: u64) -> Vec<[C64; 3]> {
    let mut pts: Vec<[C64; 3]> = vec![
        [ZERO, ZERO, ONE],
        [ONE, ZERO, ZERO],
        [ZERO, ONE, ZERO],
        [ONE, ONE, ONE],
        [ONE, C64::new(0.0, 0.5), C64::new(-0.75, 0.0)],
        [C64::new(0.5, 0.0), -ONE, C64::new(0.0, 0.3)],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while pts.len() < n {
        let mut p = [ZERO; 3];
        for slot in p.iter_mut() {
            *slot = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        if p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() > 0.3 {
            pts.push(p);
        }
    }
    pts.truncate(n.max(6));
    pts
}

fn check_pole_free(charts: &ChartSet, lp: &LoopPath) -> Result<(), HolonomyError> {
    let p_scale = charts
        .p
        .terms()
        .map(|(_, c)| c.norm())
        .fold(0.0f64, f64::max)
        .max(1e-30);
    for segment in &lp.segments {
        for i in 0..=128 {
            let x = segment.point(i as f64 / 128.0);
            let v = charts
                .p
                .eval(&[x, ZERO, ZERO])
                .map_err(HolonomyError::Poly)?;
            if v.norm() < 1e-7 * p_scale {
                return Err(HolonomyError::PoleOnPath);
            }
        }
    }
    Ok(())
}

/// Lift a single fiber point along an open base path.
pub fn lift_fiber_point(
    x: &PolyVectorField,
    segments: &[Segment],
    start: &[C64; 3],
    opts: &LiftOptions,
) -> Result<([C64; 3], IntegratorStats), HolonomyError> {
    let charts = build_charts(x)?;
    let mut lifter = Lifter::new(&charts, opts.tol, opts.max_steps);
    let end = lifter.lift(segments, start)?;
    Ok((end, lifter.stats))
}

/// Holonomy of one closed loop: lift a spread of fiber points and fit
/// the start-to-end correspondences as a projective map.
pub fn numeric_holonomy(
    x: &PolyVectorField,
    lp: &LoopPath,
    opts: &LiftOptions,
) -> Result<HolonomyResult, HolonomyError> {
    let charts = build_charts(x)?;
    check_pole_free(&charts, lp)?;
    let n = opts.n_samples.max(6);
    let points = sample_points(n, opts.seed);
    let mut stats = IntegratorStats::default();
    let mut corrs = Vec::with_capacity(points.len());
    for start in &points {
        let mut lifter = Lifter::new(&charts, opts.tol, opts.max_steps);
        let end = lifter.lift(&lp.segments, start)?;
        stats.absorb(&lifter.stats);
        corrs.push(Correspondence::new(*start, end).map_err(HolonomyError::Matrix)?);
    }
    let (m, residual) = fit_projective(&corrs).map_err(HolonomyError::Matrix)?;
    Ok(HolonomyResult {
        map: ProjMap::new(m).map_err(HolonomyError::Matrix)?,
        residual,
        n_samples: points.len(),
        stats,
    })
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum FiberId {
    Finite(C64),
    Infinity,
}

#[derive(Clone, Debug)]
pub struct GeneratorResult {
    pub fiber: FiberId,
    pub holonomy: HolonomyResult,
    pub loop_path: LoopPath,
}

/// One holonomy generator per invariant fiber (plus infinity when it is
/// invariant), around composite loops from the base point. Finite fibers
/// are ordered by the angle at which they are seen from the base point;
/// the infinity generator comes last.
pub fn holonomy_generators(
    x: &PolyVectorField,
    base_point: C64,
    opts: &LiftOptions,
) -> Result<Vec<GeneratorResult>, HolonomyError> {
    let form = match check_riccati_cp2(x)? {
        Ok(form) => form,
        Err(rej) => {
            return Err(HolonomyError::NotRiccati {
                reason: rej.constraint.name(),
            })
        }
    };
    let fibers = invariant_fibers(&form.p, x)?;
    if fibers.every_fiber_invariant {
        return Err(HolonomyError::NotRiccati {
            reason: "base polynomial vanishes identically".into(),
        });
    }
    let mut finite: Vec<C64> = fibers.finite_fibers.iter().map(|(v, _)| *v).collect();
    // Deterministic order: departure angle from the base point measured
    // from the outward direction (where the infinity lasso departs), then
    // distance. Cutting the cyclic order at the outward ray keeps the
    // ordered product the identity.
    finite.sort_by(|a, b| {
        let ka = angle_key(base_point, *a);
        let kb = angle_key(base_point, *b);
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });

    let min_pair = min_pairwise_distance(&finite);
    let min_base = finite
        .iter()
        .map(|f| (f - base_point).norm())
        .fold(f64::INFINITY, f64::min);
    let clearance = opts
        .clearance
        .unwrap_or_else(|| 0.25 * min_pair.min(min_base).min(4.0));
    if min_pair < 4.0 * clearance {
        return Err(HolonomyError::RoutingFailure {
            reason: format!(
                "fibers separated by {min_pair} are closer than four clearances ({clearance})"
            ),
        });
    }
    if min_base < clearance {
        return Err(HolonomyError::RoutingFailure {
            reason: "base point too close to an invariant fiber".into(),
        });
    }

    let mut out = Vec::new();
    for fiber in &finite {
        let lp = lasso_loop(base_point, *fiber, &finite, clearance)?;
        let holonomy = numeric_holonomy(x, &lp, opts)?;
        out.push(GeneratorResult {
            fiber: FiberId::Finite(*fiber),
            holonomy,
            loop_path: lp,
        });
    }
    if fibers.infinity_invariant {
        let lp = infinity_loop(base_point, &finite, clearance)?;
        let holonomy = numeric_holonomy(x, &lp, opts)?;
        out.push(GeneratorResult {
            fiber: FiberId::Infinity,
            holonomy,
            loop_path: lp,
        });
    }
    Ok(out)
}

fn angle_key(base: C64, fiber: C64) -> (f64, f64) {
    let rel = fiber - base;
    let outward = if base.norm() == 0.0 { 0.0 } else { base.arg() };
    let mut angle = rel.arg() - outward;
    while angle < 0.0 {
        angle += 2.0 * std::f64::consts::PI;
    }
    while angle >= 2.0 * std::f64::consts::PI {
        angle -= 2.0 * std::f64::consts::PI;
    }
    (angle, rel.norm())
}

fn min_pairwise_distance(points: &[C64]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            min = min.min((points[i] - points[j]).norm());
        }
    }
    min
}
