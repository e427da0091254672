//! The five local-model vector fields around an invariant fiber, their
//! closed-form holonomy around the defining circle, and the gluing maps
//! identifying annulus coordinates with disk coordinates.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{AffineFiberMap, HolonomyError};
use crate::matrix::{alpha_from_lambda, mat_exp3, JordanCase, Mat2, Mat3, Vec2, C64};
use crate::poly::{MultiPoly, PolyVectorField};

const ZERO: C64 = Complex64::new(0.0, 0.0);

fn two_pi_i() -> C64 {
    C64::new(0.0, 2.0 * PI)
}

/// Local model around the invariant fiber {x = center}: one of the five
/// explicit vector fields whose monodromy realizes an affine normal form.
#[derive(Clone, Debug)]
pub enum LocalModel {
    /// Holonomy (u, v) -> (u + mu v, v + mu).
    CaseA { center: C64, mu: C64 },
    /// Holonomy (u, v) -> (mu u + nu v, mu v) with exp(2 pi i lambda) = mu.
    CaseB {
        center: C64,
        lambda: C64,
        nu: C64,
        mu: C64,
    },
    /// Holonomy (u, v) -> (lambda' u, lambda'' v) via two exponents.
    CaseC {
        center: C64,
        alpha1: C64,
        alpha2: C64,
    },
    /// Scalar holonomy lambda'' (u, v).
    CaseD { center: C64, alpha2: C64 },
    /// Holonomy (u, v) -> (u + nu v, v).
    CaseE { center: C64, nu: C64 },
}

impl LocalModel {
    pub fn center(&self) -> C64 {
        match self {
            LocalModel::CaseA { center, .. }
            | LocalModel::CaseB { center, .. }
            | LocalModel::CaseC { center, .. }
            | LocalModel::CaseD { center, .. }
            | LocalModel::CaseE { center, .. } => *center,
        }
    }

    pub fn case_label(&self) -> char {
        match self {
            LocalModel::CaseA { .. } => 'a',
            LocalModel::CaseB { .. } => 'b',
            LocalModel::CaseC { .. } => 'c',
            LocalModel::CaseD { .. } => 'd',
            LocalModel::CaseE { .. } => 'e',
        }
    }

    /// Case-B consistency: exp(2 pi i lambda) = mu.
    pub fn validate(&self) -> Result<(), HolonomyError> {
        if let LocalModel::CaseB { lambda, mu, .. } = self {
            let back = (two_pi_i() * lambda).exp();
            if (back - mu).norm() > 1e-10 * mu.norm() {
                return Err(HolonomyError::IntegrationFailure {
                    reason: "case-b exponent does not match its multiplier".into(),
                });
            }
        }
        Ok(())
    }

    /// Matrix of the linear fiber part of the model field.
    pub fn linear_part(&self) -> Mat2 {
        match self {
            LocalModel::CaseA { mu, .. } => {
                Mat2([[ZERO, mu / two_pi_i()], [ZERO, ZERO]])
            }
            LocalModel::CaseB { lambda, nu, mu, .. } => Mat2([
                [*lambda, nu / (two_pi_i() * mu)],
                [ZERO, *lambda],
            ]),
            LocalModel::CaseC { alpha1, alpha2, .. } => Mat2::diag(*alpha1, *alpha2),
            LocalModel::CaseD { alpha2, .. } => Mat2::diag(*alpha2, *alpha2),
            LocalModel::CaseE { nu, .. } => Mat2([[ZERO, nu / two_pi_i()], [ZERO, ZERO]]),
        }
    }

    /// Constant fiber part of the model field.
    pub fn constant_part(&self) -> Vec2 {
        match self {
            LocalModel::CaseA { mu, .. } => {
                let four_pi_i = C64::new(0.0, 4.0 * PI);
                [-(mu * mu) / four_pi_i, mu / two_pi_i()]
            }
            _ => [ZERO, ZERO],
        }
    }
}

/// The model as a polynomial vector field in variables (x, u, v), with
/// (u, v) read as the first affine fiber chart.
pub fn local_model_field(m: &LocalModel) -> PolyVectorField {
    let vars = ["x", "y", "z"];
    let c = m.center();
    let base = MultiPoly::var(&vars, 0)
        .add(&MultiPoly::constant(&vars, -c))
        .unwrap();
    let lin = m.linear_part();
    let cst = m.constant_part();
    let comp = |row: usize| {
        MultiPoly::monomial(&vars, &[0, 1, 0], lin.0[row][0])
            .add(&MultiPoly::monomial(&vars, &[0, 0, 1], lin.0[row][1]))
            .unwrap()
            .add(&MultiPoly::constant(&vars, cst[row]))
            .unwrap()
    };
    PolyVectorField::new("model", vec![base, comp(0), comp(1)]).unwrap()
}

/// Flow of the affine fiber ODE dY/dl = A Y + B over a log-time l,
/// through the augmented exponential exp(l [[A, B], [0, 0]]).
fn affine_flow(a: &Mat2, b: &Vec2, l: C64) -> AffineFiberMap {
    let mut aug = Mat3::zeros();
    for i in 0..2 {
        for j in 0..2 {
            aug.0[i][j] = a.0[i][j] * l;
        }
        aug.0[i][2] = b[i] * l;
    }
    let e = mat_exp3(&aug);
    AffineFiberMap {
        linear: Mat2([[e.0[0][0], e.0[0][1]], [e.0[1][0], e.0[1][1]]]),
        translation: [e.0[0][2], e.0[1][2]],
    }
}

/// Closed-form holonomy of the model around its defining circle,
/// traversed once counterclockwise.
pub fn analytic_holonomy(m: &LocalModel) -> AffineFiberMap {
    affine_flow(&m.linear_part(), &m.constant_part(), two_pi_i())
}

/// Gluing identification (U, V) -> (u, v) between the horizontal
/// coordinates on the connecting annulus and the disk coordinates of the
/// model, evaluated at base point x in the slit disk. The branch is the
/// principal logarithm of (x - center)/(r/2), so the map is the identity
/// at the anchor x = center + r/2.
pub fn gluing_map(m: &LocalModel, x: C64, r: f64) -> Result<AffineFiberMap, HolonomyError> {
    let w = (x - m.center()) / C64::new(r / 2.0, 0.0);
    if w.norm() == 0.0 || (w.im == 0.0 && w.re <= 0.0) {
        return Err(HolonomyError::BranchCutHit);
    }
    let l = C64::new(w.norm().ln(), w.arg());
    Ok(affine_flow(&m.linear_part(), &m.constant_part(), l))
}

// ---------------------------------------------------------------------------
// Models from classified generators
// ---------------------------------------------------------------------------

/// Affine normal form of a Jordan representative: in the chart whose
/// infinity line is the invariant plane spanned by the first two axes,
/// every one of the six Jordan shapes acts as [[L, t], [0, 1]] = J / J22.
pub fn affine_normal_form(j: &Mat3) -> Result<AffineFiberMap, HolonomyError> {
    let pivot = j.0[2][2];
    if pivot.norm() == 0.0 {
        return Err(HolonomyError::DegenerateAffineMap { det: 0.0 });
    }
    let linear = Mat2([
        [j.0[0][0] / pivot, j.0[0][1] / pivot],
        [j.0[1][0] / pivot, j.0[1][1] / pivot],
    ]);
    let translation = [j.0[0][2] / pivot, j.0[1][2] / pivot];
    AffineFiberMap::new(linear, translation)
}

/// The local model realizing a classified generator's affine normal form
/// as monodromy around the chosen center.
pub fn model_for(case: JordanCase, j: &Mat3, center: C64) -> Result<LocalModel, HolonomyError> {
    let pivot = j.0[2][2];
    if pivot.norm() == 0.0 {
        return Err(HolonomyError::DegenerateAffineMap { det: 0.0 });
    }
    let model = match case {
        JordanCase::I => LocalModel::CaseC {
            center,
            alpha1: alpha_from_lambda(j.0[0][0] / pivot, 0)?,
            alpha2: alpha_from_lambda(j.0[1][1] / pivot, 0)?,
        },
        JordanCase::III1 => LocalModel::CaseC {
            center,
            alpha1: ZERO,
            alpha2: ZERO,
        },
        JordanCase::II1 => LocalModel::CaseD {
            center,
            alpha2: alpha_from_lambda(j.0[0][0] / pivot, 0)?,
        },
        JordanCase::III2 => LocalModel::CaseE {
            center,
            nu: j.0[0][1] / pivot,
        },
        JordanCase::II2 => {
            let mu = j.0[0][0] / pivot;
            LocalModel::CaseB {
                center,
                lambda: alpha_from_lambda(mu, 0)?,
                nu: j.0[0][1] / pivot,
                mu,
            }
        }
        JordanCase::III3 => LocalModel::CaseA {
            center,
            mu: j.0[0][1] / pivot,
        },
    };
    model.validate()?;
    Ok(model)
}
