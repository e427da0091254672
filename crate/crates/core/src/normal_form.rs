//! Riccati normal-form checking on both bundle geometries, invariant-fiber
//! extraction, and transversality tests against a fixed fiber. Rejections
//! are structured: they name the violated constraint and carry a witness
//! monomial, matching the chart-by-chart pole analysis.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::matrix::C64;
use crate::poly::{
    base_chart, fiber_chart_cp2, fiber_chart_cp2_second, polydisk_chart_cn, ChartChangeResult,
    MultiPoly, PolyError, PolyVectorField,
};

const ZERO: C64 = Complex64::new(0.0, 0.0);
const ONE: C64 = Complex64::new(1.0, 0.0);

/// Relative clustering tolerance for multiple roots of p.
pub const ROOT_CLUSTER_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum NormalFormError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("field has {got} components; expected {want}")]
    WrongComponentCount { want: usize, got: usize },
}

/// Which compactification the fiber lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    /// Projective plane fiber; variables (x, y, z).
    Cp2,
    /// Product of n Riemann spheres; variables (x, y_1, ..., y_n).
    Cn(usize),
}

// ---------------------------------------------------------------------------
// Structured rejections
// ---------------------------------------------------------------------------

/// A monomial witnessing a violated constraint.
#[derive(Clone, Debug)]
pub struct WitnessMonomial {
    pub component: usize,
    pub exponents: Vec<u32>,
    pub coefficient: C64,
    pub rendered: String,
}

fn witness(field: &PolyVectorField, component: usize, exps: &[u32], coef: C64) -> WitnessMonomial {
    WitnessMonomial {
        component,
        exponents: exps.to_vec(),
        coefficient: coef,
        rendered: field.components[component].describe_monomial(exps),
    }
}

/// The violated constraint, named after the proof's case analysis.
#[derive(Clone, Debug)]
pub enum RejectionConstraint {
    /// Base component depends on a fiber variable.
    BaseDependsOnFiber,
    /// deg_{y_k}(Q_k) > 2 on the polydisk geometry.
    DegreeExceedsTwo { coord: usize },
    /// deg_{y_i}(Q_j) > 0 for i != j on the polydisk geometry.
    CrossVariable { component: usize, variable: usize },
    /// Total fiber degree of Q above two (alpha > 2).
    AlphaExceedsTwo,
    /// Total fiber degree of R above two.
    RDegreeExceedsTwo,
    /// beta > alpha with beta >= 2: poles survive in the first chart.
    BetaExceedsAlpha,
    /// F != 0: Q carries a z^2 term (possibilities 4 and 5).
    QHasZSquared,
    /// e != 0: R carries a y^2 term.
    RHasYSquared,
    /// d != E: R's yz coefficient differs from Q's y^2 coefficient.
    SharedEMismatch,
    /// f != D: R's z^2 coefficient differs from Q's yz coefficient.
    SharedDMismatch,
}

impl RejectionConstraint {
    pub fn name(&self) -> String {
        match self {
            RejectionConstraint::BaseDependsOnFiber => "base component depends on fiber".into(),
            RejectionConstraint::DegreeExceedsTwo { coord } => {
                format!("deg_y{coord}(Q_{coord}) <= 2")
            }
            RejectionConstraint::CrossVariable { component, variable } => {
                format!("deg_y{variable}(Q_{component}) = 0")
            }
            RejectionConstraint::AlphaExceedsTwo => "alpha <= 2".into(),
            RejectionConstraint::RDegreeExceedsTwo => "beta <= 2".into(),
            RejectionConstraint::BetaExceedsAlpha => "beta <= alpha".into(),
            RejectionConstraint::QHasZSquared => "F != 0".into(),
            RejectionConstraint::RHasYSquared => "e != 0".into(),
            RejectionConstraint::SharedEMismatch => "d != E".into(),
            RejectionConstraint::SharedDMismatch => "f != D".into(),
        }
    }

    /// Which possibility of the pole analysis the rejection falls under,
    /// when the field reaches that stage (alpha = 2 cases only).
    pub fn possibility(&self, beta: i64) -> Option<u8> {
        match self {
            RejectionConstraint::QHasZSquared
            | RejectionConstraint::RHasYSquared
            | RejectionConstraint::SharedEMismatch
            | RejectionConstraint::SharedDMismatch => Some(match beta {
                b if b <= 0 => 4,
                1 => 5,
                _ => 6,
            }),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Rejection {
    pub constraint: RejectionConstraint,
    pub witness: WitnessMonomial,
    pub possibility: Option<u8>,
}

// ---------------------------------------------------------------------------
// Accepted forms
// ---------------------------------------------------------------------------

/// Accepted normal form on the polydisk geometry: X = p d/dx +
/// sum_j (q_{j,2} y_j^2 + q_{j,1} y_j + q_{j,0}) d/dy_j with all
/// coefficients univariate in x.
#[derive(Clone, Debug)]
pub struct RiccatiCnForm {
    pub n: usize,
    pub p: MultiPoly,
    /// Per fiber coordinate: (q_{j,2}, q_{j,1}, q_{j,0}).
    pub coeffs: Vec<(MultiPoly, MultiPoly, MultiPoly)>,
    vars: Vec<String>,
}

impl RiccatiCnForm {
    /// Rebuild the vector field from the extracted coefficients.
    pub fn reassemble(&self) -> PolyVectorField {
        let names: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        let mut comps = vec![self.p.clone()];
        for (j, (q2, q1, q0)) in self.coeffs.iter().enumerate() {
            let yj = MultiPoly::var(&names, j + 1);
            let yj2 = yj.mul(&yj).unwrap();
            let comp = q2
                .mul(&yj2)
                .unwrap()
                .add(&q1.mul(&yj).unwrap())
                .unwrap()
                .add(q0)
                .unwrap();
            comps.push(comp);
        }
        PolyVectorField::new("affine", comps).unwrap()
    }
}

/// Accepted normal form on the projective-plane geometry:
/// Q = A + B y + C z + D yz + E y^2 and R = a + b y + c z + E yz + D z^2,
/// sharing D and E exactly as the pole analysis forces.
#[derive(Clone, Debug)]
pub struct RiccatiCp2Form {
    pub p: MultiPoly,
    pub big_a: MultiPoly,
    pub big_b: MultiPoly,
    pub big_c: MultiPoly,
    pub big_d: MultiPoly,
    pub big_e: MultiPoly,
    pub a: MultiPoly,
    pub b: MultiPoly,
    pub c: MultiPoly,
    vars: Vec<String>,
}

impl RiccatiCp2Form {
    pub fn reassemble(&self) -> PolyVectorField {
        let names: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        let y = MultiPoly::var(&names, 1);
        let z = MultiPoly::var(&names, 2);
        let yy = y.mul(&y).unwrap();
        let yz = y.mul(&z).unwrap();
        let zz = z.mul(&z).unwrap();
        let q = self
            .big_a
            .add(&self.big_b.mul(&y).unwrap())
            .unwrap()
            .add(&self.big_c.mul(&z).unwrap())
            .unwrap()
            .add(&self.big_d.mul(&yz).unwrap())
            .unwrap()
            .add(&self.big_e.mul(&yy).unwrap())
            .unwrap();
        let r = self
            .a
            .add(&self.b.mul(&y).unwrap())
            .unwrap()
            .add(&self.c.mul(&z).unwrap())
            .unwrap()
            .add(&self.big_e.mul(&yz).unwrap())
            .unwrap()
            .add(&self.big_d.mul(&zz).unwrap())
            .unwrap();
        PolyVectorField::new("affine", vec![self.p.clone(), q, r]).unwrap()
    }
}

// ---------------------------------------------------------------------------
// Checkers
// ---------------------------------------------------------------------------

fn fiber_indices(arity: usize) -> Vec<usize> {
    (1..arity).collect()
}

/// First monomial (in deterministic term order) satisfying `pred`.
fn first_monomial_where(
    p: &MultiPoly,
    pred: impl Fn(&[u32]) -> bool,
) -> Option<(Vec<u32>, C64)> {
    p.terms()
        .find(|(e, _)| pred(e))
        .map(|(e, c)| (e.clone(), *c))
}

/// Check the polydisk normal form for n fiber coordinates.
pub fn check_riccati_cn(
    x: &PolyVectorField,
    n: usize,
) -> Result<Result<RiccatiCnForm, Rejection>, NormalFormError> {
    let arity = n + 1;
    if x.arity() != arity || x.components.len() != arity {
        return Err(NormalFormError::WrongComponentCount {
            want: arity,
            got: x.components.len(),
        });
    }
    let base = &x.components[0];
    // Base component must depend only on x.
    if let Some((e, c)) = first_monomial_where(base, |e| e[1..].iter().any(|&k| k > 0)) {
        return Ok(Err(Rejection {
            constraint: RejectionConstraint::BaseDependsOnFiber,
            witness: witness(x, 0, &e, c),
            possibility: None,
        }));
    }
    // Each Q_j: degree <= 2 in y_j and independent of the other fibers.
    for j in 1..arity {
        let qj = &x.components[j];
        if let Some((e, c)) = first_monomial_where(qj, |e| e[j] > 2) {
            return Ok(Err(Rejection {
                constraint: RejectionConstraint::DegreeExceedsTwo { coord: j },
                witness: witness(x, j, &e, c),
                possibility: None,
            }));
        }
        for i in 1..arity {
            if i == j {
                continue;
            }
            if let Some((e, c)) = first_monomial_where(qj, |e| e[i] > 0) {
                return Ok(Err(Rejection {
                    constraint: RejectionConstraint::CrossVariable {
                        component: j,
                        variable: i,
                    },
                    witness: witness(x, j, &e, c),
                    possibility: None,
                }));
            }
        }
    }
    let vars = x.components[0].vars().to_vec();
    let fibers = fiber_indices(arity);
    let coeffs = (1..arity)
        .map(|j| {
            let qj = &x.components[j];
            let pat = |k: u32| {
                let mut pattern = vec![0u32; fibers.len()];
                pattern[j - 1] = k;
                qj.coefficient_of(&fibers, &pattern)
            };
            (pat(2), pat(1), pat(0))
        })
        .collect();
    Ok(Ok(RiccatiCnForm {
        n,
        p: base.clone(),
        coeffs,
        vars,
    }))
}

/// Check the projective-plane normal form.
pub fn check_riccati_cp2(
    x: &PolyVectorField,
) -> Result<Result<RiccatiCp2Form, Rejection>, NormalFormError> {
    if x.arity() != 3 || x.components.len() != 3 {
        return Err(NormalFormError::WrongComponentCount {
            want: 3,
            got: x.components.len(),
        });
    }
    let base = &x.components[0];
    if let Some((e, c)) = first_monomial_where(base, |e| e[1] > 0 || e[2] > 0) {
        return Ok(Err(Rejection {
            constraint: RejectionConstraint::BaseDependsOnFiber,
            witness: witness(x, 0, &e, c),
            possibility: None,
        }));
    }
    let q = &x.components[1];
    let r = &x.components[2];
    let fib = [1usize, 2];
    let alpha = q.total_deg_in(&fib);
    let beta = r.total_deg_in(&fib);
    if alpha > 2 {
        let (e, c) = first_monomial_where(q, |e| e[1] as i64 + e[2] as i64 > 2).unwrap();
        return Ok(Err(Rejection {
            constraint: RejectionConstraint::AlphaExceedsTwo,
            witness: witness(x, 1, &e, c),
            possibility: None,
        }));
    }
    if beta > 2 {
        let (e, c) = first_monomial_where(r, |e| e[1] as i64 + e[2] as i64 > 2).unwrap();
        return Ok(Err(Rejection {
            constraint: RejectionConstraint::RDegreeExceedsTwo,
            witness: witness(x, 2, &e, c),
            possibility: None,
        }));
    }
    if beta > alpha && beta >= 2 {
        let (e, c) = first_monomial_where(r, |e| e[1] as i64 + e[2] as i64 >= 2).unwrap();
        return Ok(Err(Rejection {
            constraint: RejectionConstraint::BetaExceedsAlpha,
            witness: witness(x, 2, &e, c),
            possibility: None,
        }));
    }
    // Named quadratic coefficients.
    let coef = |p: &MultiPoly, ey: u32, ez: u32| p.coefficient_of(&fib, &[ey, ez]);
    let q_f = coef(q, 0, 2); // F
    let r_e = coef(r, 2, 0); // e
    let q_e = coef(q, 2, 0); // E
    let r_d = coef(r, 1, 1); // d
    let q_d = coef(q, 1, 1); // D
    let r_f = coef(r, 0, 2); // f
    // The residual of S = R~ - v Q~ modulo u decides transversality over
    // the first chart: -F v^3 + (f - D) v^2 + (d - E) v + e. Report the
    // first nonzero coefficient by v-degree descending.
    if !q_f.is_zero() {
        let (e, c) = first_monomial_where(q, |e| e[2] == 2 && e[1] == 0).unwrap();
        return Ok(Err(Rejection {
            constraint: RejectionConstraint::QHasZSquared,
            witness: witness(x, 1, &e, c),
            possibility: RejectionConstraint::QHasZSquared.possibility(beta),
        }));
    }
    let f_minus_d = r_f.sub(&q_d)?;
    if !f_minus_d.is_zero() {
        let (comp, (e, c)) = match first_monomial_where(r, |e| e[1] == 0 && e[2] == 2) {
            Some(w) => (2usize, w),
            None => (1usize, first_monomial_where(q, |e| e[1] == 1 && e[2] == 1).unwrap()),
        };
        return Ok(Err(Rejection {
            constraint: RejectionConstraint::SharedDMismatch,
            witness: witness(x, comp, &e, c),
            possibility: RejectionConstraint::SharedDMismatch.possibility(beta),
        }));
    }
    let d_minus_e = r_d.sub(&q_e)?;
    if !d_minus_e.is_zero() {
        let (comp, (e, c)) = match first_monomial_where(r, |e| e[1] == 1 && e[2] == 1) {
            Some(w) => (2usize, w),
            None => (1usize, first_monomial_where(q, |e| e[1] == 2 && e[2] == 0).unwrap()),
        };
        return Ok(Err(Rejection {
            constraint: RejectionConstraint::SharedEMismatch,
            witness: witness(x, comp, &e, c),
            possibility: RejectionConstraint::SharedEMismatch.possibility(beta),
        }));
    }
    if !r_e.is_zero() {
        let (e, c) = first_monomial_where(r, |e| e[1] == 2 && e[2] == 0).unwrap();
        return Ok(Err(Rejection {
            constraint: RejectionConstraint::RHasYSquared,
            witness: witness(x, 2, &e, c),
            possibility: RejectionConstraint::RHasYSquared.possibility(beta),
        }));
    }
    let vars = base.vars().to_vec();
    Ok(Ok(RiccatiCp2Form {
        p: base.clone(),
        big_a: coef(q, 0, 0),
        big_b: coef(q, 1, 0),
        big_c: coef(q, 0, 1),
        big_d: q_d,
        big_e: q_e,
        a: coef(r, 0, 0),
        b: coef(r, 1, 0),
        c: coef(r, 0, 1),
        vars,
    }))
}

// ---------------------------------------------------------------------------
// Roots of p and invariant fibers
// ---------------------------------------------------------------------------

/// Roots of a univariate complex polynomial given coefficients in
/// ascending order. Closed form through degree three; Durand-Kerner
/// simultaneous iteration above, with a Newton polish either way.
pub fn univariate_roots(coeffs: &[C64]) -> Vec<C64> {
    let mut cs: Vec<C64> = coeffs.to_vec();
    while let Some(last) = cs.last() {
        if last.norm() < 1e-300 && cs.len() > 1 {
            cs.pop();
        } else {
            break;
        }
    }
    let deg = cs.len().saturating_sub(1);
    if deg == 0 {
        return vec![];
    }
    let lead = cs[deg];
    let monic: Vec<C64> = cs.iter().map(|c| c / lead).collect();
    let eval = |t: C64| -> C64 {
        let mut acc = ZERO;
        for c in monic.iter().rev() {
            acc = acc * t + c;
        }
        acc
    };
    let deriv = |t: C64| -> C64 {
        let n = monic.len() - 1;
        let mut acc = ZERO;
        for k in (1..=n).rev() {
            acc = acc * t + C64::new(k as f64, 0.0) * monic[k];
        }
        acc
    };
    let mut roots: Vec<C64> = match deg {
        1 => vec![-monic[0]],
        2 => {
            let b = monic[1];
            let c = monic[0];
            let disc = (b * b - C64::new(4.0, 0.0) * c).sqrt();
            let r1 = if (-b + disc).norm() >= (-b - disc).norm() {
                (-b + disc) / C64::new(2.0, 0.0)
            } else {
                (-b - disc) / C64::new(2.0, 0.0)
            };
            if r1.norm() > 0.0 {
                vec![r1, c / r1]
            } else {
                vec![r1, -b - r1]
            }
        }
        3 => crate::matrix::cubic_roots(monic[0], monic[1], monic[2]).to_vec(),
        _ => {
            // Durand-Kerner with deterministic seeding.
            let radius = 1.0
                + monic[..deg]
                    .iter()
                    .map(|c| c.norm())
                    .fold(0.0f64, f64::max);
            let seed = C64::new(0.4, 0.9);
            let mut zs: Vec<C64> = (0..deg)
                .map(|k| seed.powu(k as u32 + 1) * C64::new(radius, 0.0))
                .collect();
            for _ in 0..200 {
                let mut delta_max = 0.0f64;
                for i in 0..deg {
                    let mut denom = ONE;
                    for j in 0..deg {
                        if i != j {
                            denom *= zs[i] - zs[j];
                        }
                    }
                    if denom.norm() < 1e-300 {
                        continue;
                    }
                    let step = eval(zs[i]) / denom;
                    zs[i] -= step;
                    delta_max = delta_max.max(step.norm());
                }
                if delta_max < 1e-14 * radius {
                    break;
                }
            }
            zs
        }
    };
    for r in roots.iter_mut() {
        for _ in 0..2 {
            let d = deriv(*r);
            if d.norm() > 1e-300 {
                let step = eval(*r) / d;
                if step.norm().is_finite() && step.norm() < 1.0 + r.norm() {
                    *r -= step;
                }
            }
        }
    }
    roots.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    roots
}

/// Roots with multiplicities by relative clustering.
pub fn clustered_roots(coeffs: &[C64]) -> Vec<(C64, usize)> {
    let roots = univariate_roots(coeffs);
    let mut out: Vec<(C64, usize)> = Vec::new();
    for r in roots {
        match out
            .iter_mut()
            .find(|(v, _)| (*v - r).norm() <= ROOT_CLUSTER_TOL * (1.0 + v.norm()))
        {
            Some((v, k)) => {
                // Running mean keeps the representative second-order accurate.
                *v = (*v * C64::new(*k as f64, 0.0) + r) / C64::new((*k + 1) as f64, 0.0);
                *k += 1;
            }
            None => out.push((r, 1)),
        }
    }
    out
}

/// Invariant fibers of an accepted Riccati field: zeros of p with
/// multiplicity, the possible fiber over infinity, and the degenerate
/// p = 0 flag.
#[derive(Clone, Debug)]
pub struct FiberSet {
    pub finite_fibers: Vec<(C64, usize)>,
    pub infinity_invariant: bool,
    /// p vanishes identically: every fiber is invariant.
    pub every_fiber_invariant: bool,
}

/// Whether the fiber over infinity is invariant: after the base chart
/// change, saturate the common monomial factor in w (the clearing
/// variable) and test tangency of the resulting field to w = 0.
fn base_w_component_vanishes(x: &PolyVectorField) -> Result<bool, NormalFormError> {
    let ChartChangeResult { field, .. } = base_chart(x)?;
    let common_w = field
        .components
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| p.terms().map(|(e, _)| e[0]).min().unwrap_or(0))
        .min()
        .unwrap_or(0);
    let wc = &field.components[0];
    Ok(wc.is_zero() || wc.terms().all(|(e, _)| e[0] > common_w))
}

pub fn invariant_fibers(p: &MultiPoly, x: &PolyVectorField) -> Result<FiberSet, NormalFormError> {
    if p.is_zero() {
        return Ok(FiberSet {
            finite_fibers: vec![],
            infinity_invariant: true,
            every_fiber_invariant: true,
        });
    }
    let coeffs = p.univariate_coeffs(0);
    let finite = clustered_roots(&coeffs);
    Ok(FiberSet {
        finite_fibers: finite,
        infinity_invariant: base_w_component_vanishes(x)?,
        every_fiber_invariant: false,
    })
}

// ---------------------------------------------------------------------------
// Transversality
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum TransversalityVerdict {
    Transverse,
    /// The field is vertical but nonzero at the witness.
    Tangent { chart: String, witness: Vec<C64> },
    /// The field vanishes at the witness.
    Singular { chart: String, witness: Vec<C64> },
}

impl TransversalityVerdict {
    pub fn is_transverse(&self) -> bool {
        matches!(self, TransversalityVerdict::Transverse)
    }
}

/// All fiber charts for the geometry: the identity chart plus the chart
/// changes, each with its clearing exponent already applied.
fn all_charts(
    x: &PolyVectorField,
    geometry: Geometry,
) -> Result<Vec<(String, PolyVectorField)>, NormalFormError> {
    let mut charts = vec![("affine".to_string(), x.clone())];
    match geometry {
        Geometry::Cp2 => {
            let c1 = fiber_chart_cp2(x)?;
            charts.push((c1.field.chart_id.clone(), c1.field));
            let c2 = fiber_chart_cp2_second(x)?;
            charts.push((c2.field.chart_id.clone(), c2.field));
        }
        Geometry::Cn(n) => {
            // All nonempty subsets of inverted fiber coordinates.
            for mask in 1u32..(1 << n) {
                let mut field = x.clone();
                let mut label = String::from("cn");
                for k in 1..=n {
                    if mask & (1 << (k - 1)) != 0 {
                        let res = polydisk_chart_cn(&field, k)?;
                        field = res.field;
                        label.push_str(&format!("_w{k}"));
                    }
                }
                charts.push((label, field));
            }
        }
    }
    Ok(charts)
}

/// Search the fiber {x = x0} in one chart for a point where the base
/// component vanishes; classify it as tangent or singular.
fn witness_on_chart(
    chart: &str,
    field: &PolyVectorField,
    x0: C64,
    abs_tol: f64,
) -> Option<TransversalityVerdict> {
    let arity = field.arity();
    let base_at = field.components[0].eval_var(0, x0);
    // Base restricted to the fiber is a polynomial in the fiber variables:
    // nonzero constant means transverse on this whole chart.
    if !base_at.is_zero()
        && base_at.num_terms() == 1
        && base_at.terms().next().map(|(e, _)| e.iter().all(|&k| k == 0)) == Some(true)
    {
        return None;
    }
    let fiber_vals: Vec<f64> = vec![0.0, 1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 3.0, -3.0];
    let classify_at = |pt: &[C64]| -> Option<TransversalityVerdict> {
        let vals = field.eval(pt).ok()?;
        if vals[0].norm() > abs_tol {
            return None;
        }
        let vertical_norm: f64 = vals[1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let witness_pt = pt.to_vec();
        if vertical_norm > abs_tol {
            Some(TransversalityVerdict::Tangent {
                chart: chart.to_string(),
                witness: witness_pt,
            })
        } else {
            Some(TransversalityVerdict::Singular {
                chart: chart.to_string(),
                witness: witness_pt,
            })
        }
    };
    // Prefer a tangency witness (the generic situation in the proofs);
    // fall back to a singular one.
    let mut singular_fallback: Option<TransversalityVerdict> = None;
    let mut consider = |verdict: Option<TransversalityVerdict>| -> Option<TransversalityVerdict> {
        match verdict {
            Some(v @ TransversalityVerdict::Tangent { .. }) => Some(v),
            Some(v @ TransversalityVerdict::Singular { .. }) => {
                if singular_fallback.is_none() {
                    singular_fallback = Some(v);
                }
                None
            }
            _ => None,
        }
    };
    if base_at.is_zero() {
        // The base component vanishes on the whole fiber.
        for &v in &fiber_vals {
            let mut pt = vec![ZERO; arity];
            pt[0] = x0;
            for slot in pt.iter_mut().skip(1) {
                *slot = C64::new(v, 0.0);
            }
            if let Some(verdict) = consider(classify_at(&pt)) {
                return Some(verdict);
            }
        }
        return singular_fallback;
    }
    // Otherwise find zeros of the restriction along the first fiber
    // variable of positive degree, the rest held on a deterministic grid.
    let var_idx = (1..arity)
        .find(|&i| base_at.deg_in(i).unwrap_or(-1) > 0)
        .unwrap_or(1);
    for &other in &fiber_vals {
        let mut restricted = base_at.clone();
        for i in 1..arity {
            if i != var_idx {
                restricted = restricted.eval_var(i, C64::new(other, 0.0));
            }
        }
        let coeffs = restricted.univariate_coeffs(var_idx);
        if coeffs.len() <= 1 {
            continue;
        }
        for root in univariate_roots(&coeffs) {
            let mut pt = vec![ZERO; arity];
            pt[0] = x0;
            for slot in pt.iter_mut().skip(1) {
                *slot = C64::new(other, 0.0);
            }
            pt[var_idx] = root;
            if let Some(verdict) = consider(classify_at(&pt)) {
                return Some(verdict);
            }
        }
    }
    singular_fallback
}

/// Transversality of the field to the fiber over a finite base point:
/// transverse iff the base component is a nonzero constant on the fiber
/// in every affine fiber chart.
pub fn transversality_at(
    x: &PolyVectorField,
    geometry: Geometry,
    x0: C64,
) -> Result<TransversalityVerdict, NormalFormError> {
    let scale: f64 = x
        .components
        .iter()
        .flat_map(|p| p.terms().map(|(_, c)| c.norm()))
        .fold(0.0f64, f64::max);
    let abs_tol = 1e-9 * (1.0 + scale) * (1.0 + x0.norm().powi(3));
    for (chart, field) in all_charts(x, geometry)? {
        if let Some(verdict) = witness_on_chart(&chart, &field, x0, abs_tol) {
            return Ok(verdict);
        }
    }
    Ok(TransversalityVerdict::Transverse)
}

// ---------------------------------------------------------------------------
// Corollary check
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum CorollaryOutcome {
    /// A transverse fiber exists and the normal-form check accepts.
    Verified,
    /// No sampled fiber was transverse.
    NoTransverseFiber,
    /// A transverse fiber exists but the checker rejected: this must
    /// never fire on valid inputs.
    Counterexample,
}

#[derive(Clone, Debug)]
pub struct CorollaryReport {
    pub outcome: CorollaryOutcome,
    pub transverse_at: Option<C64>,
    pub rejection: Option<Rejection>,
    pub samples: usize,
}

/// Sample the nonvanishing locus of the base component on a circle and
/// test the Corollary: one transverse fiber forces the normal form.
pub fn corollary_check(
    x: &PolyVectorField,
    geometry: Geometry,
    seed: u64,
) -> Result<CorollaryReport, NormalFormError> {
    let samples = 32usize;
    // Radius 1 + largest root estimate of the base component specialized
    // to the fiber origin.
    let base_at_origin = {
        let mut b = x.components[0].clone();
        for i in 1..x.arity() {
            b = b.eval_var(i, ZERO);
        }
        b
    };
    let radius = 1.0
        + univariate_roots(&base_at_origin.univariate_coeffs(0))
            .iter()
            .map(|r| r.norm())
            .fold(0.0f64, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transverse_at = None;
    for _ in 0..samples {
        let theta: f64 = rng.random_range(0.0..(2.0 * std::f64::consts::PI));
        let x0 = C64::from_polar(radius, theta);
        if transversality_at(x, geometry, x0)?.is_transverse() {
            transverse_at = Some(x0);
            break;
        }
    }
    let Some(x0) = transverse_at else {
        return Ok(CorollaryReport {
            outcome: CorollaryOutcome::NoTransverseFiber,
            transverse_at: None,
            rejection: None,
            samples,
        });
    };
    let rejection = match geometry {
        Geometry::Cp2 => check_riccati_cp2(x)?.err(),
        Geometry::Cn(n) => check_riccati_cn(x, n)?.err(),
    };
    Ok(CorollaryReport {
        outcome: if rejection.is_none() {
            CorollaryOutcome::Verified
        } else {
            CorollaryOutcome::Counterexample
        },
        transverse_at: Some(x0),
        rejection,
        samples,
    })
}
