//! Local models of the synthesis construction with their closed-form
//! holonomy, gluing identifications, numerical lifting of base loops
//! through accepted Riccati fields, and the synthesis verification.

mod lift;
mod loops;
mod models;

pub use lift::{
    holonomy_generators, lift_fiber_point, numeric_holonomy, FiberId, GeneratorResult,
    HolonomyResult, IntegratorStats, LiftOptions,
};
pub use loops::{lasso_loop, infinity_loop, route_segments, LoopPath, Segment};
pub use models::{
    affine_normal_form, analytic_holonomy, gluing_map, local_model_field, model_for, LocalModel,
};

use num_complex::Complex64;
use thiserror::Error;

use crate::classify::{self, PaperType, ProjMap};
use crate::matrix::{JordanCase, Mat2, Mat3, MatrixError, Vec2, C64};
use crate::normal_form::NormalFormError;
use crate::poly::PolyError;

const ZERO: C64 = Complex64::new(0.0, 0.0);
const ONE: C64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error)]
pub enum HolonomyError {
    #[error("loop is not closed (gap {gap})")]
    OpenLoop { gap: f64 },
    #[error("loop violates the declared clearance {clearance} (distance {distance})")]
    ClearanceViolated { clearance: f64, distance: f64 },
    #[error("base component vanishes on the integration path")]
    PoleOnPath,
    #[error("integration failed: {reason}")]
    IntegrationFailure { reason: String },
    #[error("cannot route around fibers: {reason}")]
    RoutingFailure { reason: String },
    #[error("field is not an accepted Riccati field: {reason}")]
    NotRiccati { reason: String },
    #[error("gluing argument lies on the branch cut")]
    BranchCutHit,
    #[error("degenerate affine fiber map (|det| = {det})")]
    DegenerateAffineMap { det: f64 },
    #[error("generator {index} cannot be classified: {source}")]
    UnclassifiableGenerator {
        index: usize,
        source: MatrixError,
    },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
}

// ---------------------------------------------------------------------------
// Affine fiber maps
// ---------------------------------------------------------------------------

/// Affine self-map of the fiber chart: Y -> linear Y + translation.
/// This is the shape of every local-model holonomy.
#[derive(Clone, Copy, Debug)]
pub struct AffineFiberMap {
    pub linear: Mat2,
    pub translation: Vec2,
}

impl AffineFiberMap {
    pub fn new(linear: Mat2, translation: Vec2) -> Result<Self, HolonomyError> {
        let det = linear.det().norm();
        if det <= 1e-12 {
            return Err(HolonomyError::DegenerateAffineMap { det });
        }
        Ok(AffineFiberMap {
            linear,
            translation,
        })
    }

    pub fn identity() -> Self {
        AffineFiberMap {
            linear: Mat2::identity(),
            translation: [ZERO; 2],
        }
    }

    pub fn apply(&self, y: &Vec2) -> Vec2 {
        let ly = self.linear.mul_vec(y);
        [ly[0] + self.translation[0], ly[1] + self.translation[1]]
    }

    /// self after other: (self . other)(y) = self(other(y)).
    pub fn compose(&self, other: &AffineFiberMap) -> AffineFiberMap {
        let lt = self.linear.mul_vec(&other.translation);
        AffineFiberMap {
            linear: self.linear.mul(&other.linear),
            translation: [
                lt[0] + self.translation[0],
                lt[1] + self.translation[1],
            ],
        }
    }

    pub fn inverse(&self) -> Option<AffineFiberMap> {
        let inv = self.linear.inverse()?;
        let it = inv.mul_vec(&self.translation);
        Some(AffineFiberMap {
            linear: inv,
            translation: [-it[0], -it[1]],
        })
    }

    /// Block embedding [[L, t], [0, 1]] into the projective group.
    pub fn embed(&self) -> Mat3 {
        let mut m = Mat3::identity();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = self.linear.0[i][j];
            }
            m.0[i][2] = self.translation[i];
        }
        m.0[2][0] = ZERO;
        m.0[2][1] = ZERO;
        m.0[2][2] = ONE;
        m
    }

    /// Entrywise distance of the embeddings.
    pub fn distance(&self, other: &AffineFiberMap) -> f64 {
        self.embed().sub(&other.embed()).norm_fro()
    }
}

// ---------------------------------------------------------------------------
// Synthesis verification
// ---------------------------------------------------------------------------

/// Ordered product of holonomy generators in lifting order: the matrix
/// of the concatenated loop around every invariant fiber in turn (finite
/// fibers by departure angle, then infinity). When the generators enclose
/// all invariant fibers this is projectively the identity.
pub fn generator_product(gens: &[GeneratorResult]) -> Mat3 {
    let mut prod = Mat3::identity();
    for g in gens {
        prod = g.holonomy.map.matrix().mul(&prod);
    }
    prod
}

#[derive(Clone, Debug)]
pub struct SynthesisOptions {
    pub lift: LiftOptions,
    /// Analytic holonomy must match the affine normal form this tightly.
    pub analytic_tol: f64,
    /// Numeric cross-check threshold (projective distance).
    pub numeric_tol: f64,
    /// Product-relation threshold (projective distance to the identity).
    pub product_tol: f64,
    /// Classification tolerance.
    pub eigen_tol: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            lift: LiftOptions::default(),
            analytic_tol: 1e-10,
            numeric_tol: 1e-6,
            product_tol: 1e-8,
            eigen_tol: crate::matrix::DEFAULT_EIGEN_TOL,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeneratorCheck {
    /// 0 is the compensating generator f_0; inputs are 1-based.
    pub index: usize,
    pub paper_type: PaperType,
    pub jordan_case: JordanCase,
    pub model: LocalModel,
    pub conjugator: Mat3,
    /// Entrywise gap between the closed-form holonomy of the model and
    /// the generator's affine normal form.
    pub analytic_error: f64,
    /// Projective distance between the numerically lifted holonomy of the
    /// model and the closed form.
    pub numeric_error: f64,
}

#[derive(Clone, Debug)]
pub struct SynthesisReport {
    pub generators: Vec<GeneratorCheck>,
    /// Projective distance of f_0 . f_1 ... f_k from the identity.
    pub product_error: f64,
    pub passed: bool,
}

/// Verify the synthesis data for a list of generators: build the local
/// model for each (after classification), check its closed-form holonomy
/// against the generator's normal form, cross-check numerically, and
/// verify the compensated product relation.
pub fn verify_synthesis(
    gens: &[ProjMap],
    opts: &SynthesisOptions,
) -> Result<SynthesisReport, HolonomyError> {
    // f_0 = (f_1 . f_2 ... f_k)^-1.
    let mut prod = Mat3::identity();
    for g in gens {
        prod = prod.mul(g.matrix());
    }
    let f0_matrix = prod
        .inverse()
        .ok_or(HolonomyError::UnclassifiableGenerator {
            index: 0,
            source: MatrixError::DegenerateMatrix {
                det: 0.0,
                tol: opts.eigen_tol,
            },
        })?;
    let f0 = ProjMap::new(f0_matrix)?;

    let mut all: Vec<(usize, ProjMap)> = vec![(0, f0.clone())];
    for (i, g) in gens.iter().enumerate() {
        all.push((i + 1, g.clone()));
    }

    let mut checks = Vec::with_capacity(all.len());
    for (slot, (index, f)) in all.iter().enumerate() {
        let classification = classify::classify(f, opts.eigen_tol).map_err(|e| {
            HolonomyError::UnclassifiableGenerator {
                index: *index,
                source: e,
            }
        })?;
        let j = classification.normal_form.matrix();
        let affine = affine_normal_form(j)?;
        let center = C64::new(3.0 * slot as f64, 0.0);
        let model = model_for(classification.jordan_case, j, center)?;
        let analytic = analytic_holonomy(&model);
        let analytic_error = analytic.distance(&affine);

        let field = local_model_field(&model);
        let circle = LoopPath::circle(center, 0.5)?;
        let numeric = numeric_holonomy(&field, &circle, &opts.lift)?;
        let numeric_error = numeric.map.distance(&ProjMap::new(analytic.embed())?);

        checks.push(GeneratorCheck {
            index: *index,
            paper_type: classification.paper_type,
            jordan_case: classification.jordan_case,
            model,
            conjugator: classification.conjugator,
            analytic_error,
            numeric_error,
        });
    }

    // Product relation: f_0 . f_1 ... f_k is projectively the identity.
    let mut total = *f0.matrix();
    for g in gens {
        total = total.mul(g.matrix());
    }
    let product_error = crate::matrix::projective_distance(&total, &Mat3::identity());

    let passed = checks.iter().all(|c| {
        c.analytic_error <= opts.analytic_tol && c.numeric_error <= opts.numeric_tol
    }) && product_error <= opts.product_tol;

    Ok(SynthesisReport {
        generators: checks,
        product_error,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::projective_distance;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn affine_map_compose_inverse() {
        let m = AffineFiberMap::new(
            Mat2([[r(2.0), r(1.0)], [ZERO, r(0.5)]]),
            [r(0.3), r(-0.7)],
        )
        .unwrap();
        let inv = m.inverse().unwrap();
        let id = m.compose(&inv);
        assert!(id.distance(&AffineFiberMap::identity()) < 1e-12);
        let p = [r(0.4), r(1.1)];
        let q = m.apply(&p);
        let back = inv.apply(&q);
        assert!((back[0] - p[0]).norm() + (back[1] - p[1]).norm() < 1e-12);
    }

    #[test]
    fn affine_map_rejects_degenerate() {
        let res = AffineFiberMap::new(Mat2([[ZERO, ZERO], [ZERO, ONE]]), [ZERO, ZERO]);
        assert!(matches!(res, Err(HolonomyError::DegenerateAffineMap { .. })));
    }

    #[test]
    fn embed_block_shape() {
        let m = AffineFiberMap::new(
            Mat2([[ONE, r(2.0)], [ZERO, ONE]]),
            [r(5.0), r(7.0)],
        )
        .unwrap();
        let e = m.embed();
        assert_eq!(e.0[0][2], r(5.0));
        assert_eq!(e.0[1][2], r(7.0));
        assert_eq!(e.0[2][2], ONE);
        assert_eq!(e.0[2][0], ZERO);
    }

    #[test]
    fn synthesis_identity_generators_pass() {
        let id = ProjMap::new(Mat3::identity()).unwrap();
        let report = verify_synthesis(&[id.clone(), id], &SynthesisOptions::default()).unwrap();
        assert!(report.passed, "report: {report:?}");
        assert!(report.product_error < 1e-12);
    }

    #[test]
    fn synthesis_single_diagonal_generator() {
        let g = ProjMap::new(Mat3::diag(r(2.0), r(3.0), r(5.0))).unwrap();
        let report = verify_synthesis(&[g], &SynthesisOptions::default()).unwrap();
        assert!(report.passed, "report: {report:?}");
        // Generator 1 is type P3 and runs through the two-exponent model.
        let g1 = &report.generators[1];
        assert_eq!(g1.paper_type, PaperType::P3);
        assert!(matches!(g1.model, LocalModel::CaseC { .. }));
        assert!(g1.analytic_error <= 1e-10);
        assert!(g1.numeric_error <= 1e-6);
    }

    #[test]
    fn product_of_f0_and_generators_is_identity_by_construction() {
        let a = ProjMap::new(Mat3::from_rows([
            [r(2.0), r(1.0), ZERO],
            [ZERO, r(2.0), ZERO],
            [ZERO, ZERO, r(3.0)],
        ]))
        .unwrap();
        let b = ProjMap::new(Mat3::diag(r(1.0), r(2.0), r(4.0))).unwrap();
        let mut prod = Mat3::identity();
        for g in [&a, &b] {
            prod = prod.mul(g.matrix());
        }
        let f0 = prod.inverse().unwrap();
        let total = f0.mul(a.matrix()).mul(b.matrix());
        assert!(projective_distance(&total, &Mat3::identity()) < 1e-12);
    }
}
