//! Classification of automorphisms of the projective plane by fixed locus:
//! Jordan case, type label, fixed points and pointwise-fixed lines, and the
//! conjugation to the polynomial normal form.

use num_complex::Complex64;

use crate::matrix::{
    self, chordal_distance, cross, normalize_matrix, normalize_triple, JordanCase,
    JordanDecomposition, Mat3, MatrixError, Vec3, C64,
};

const ONE: C64 = Complex64::new(1.0, 0.0);
const ZERO: C64 = Complex64::new(0.0, 0.0);

/// Element of PGL(3, C): a nonzero matrix taken up to scale.
#[derive(Clone, Debug)]
pub struct ProjMap {
    matrix: Mat3,
}

impl ProjMap {
    pub fn new(matrix: Mat3) -> Result<Self, MatrixError> {
        matrix.ensure_finite()?;
        if matrix.norm_fro() == 0.0 {
            return Err(MatrixError::ZeroVector);
        }
        Ok(ProjMap { matrix })
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.matrix
    }

    /// Unit-Frobenius representative with deterministic phase.
    pub fn normalized(&self) -> Mat3 {
        normalize_matrix(&self.matrix).expect("nonzero by construction")
    }

    pub fn compose(&self, other: &ProjMap) -> ProjMap {
        ProjMap {
            matrix: self.matrix.mul(&other.matrix),
        }
    }

    pub fn inverse(&self) -> Option<ProjMap> {
        self.matrix.inverse().map(|m| ProjMap { matrix: m })
    }

    pub fn distance(&self, other: &ProjMap) -> f64 {
        matrix::projective_distance(&self.matrix, &other.matrix)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        matrix::projective_distance(&self.matrix, &Mat3::identity()) <= tol
    }
}

/// The paper-style label attached to each Jordan case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PaperType {
    P1,
    P2,
    P3,
    R2,
    P1R2,
    Identity,
}

impl PaperType {
    pub fn label(&self) -> &'static str {
        match self {
            PaperType::P1 => "P1",
            PaperType::P2 => "P2",
            PaperType::P3 => "P3",
            PaperType::R2 => "R2",
            PaperType::P1R2 => "P1R2",
            PaperType::Identity => "Identity",
        }
    }
}

/// Fixed mapping from Jordan case to type label.
pub fn paper_type_of(case: JordanCase) -> PaperType {
    match case {
        JordanCase::I => PaperType::P3,
        JordanCase::II1 => PaperType::P1R2,
        JordanCase::II2 => PaperType::P2,
        JordanCase::III1 => PaperType::Identity,
        JordanCase::III2 => PaperType::R2,
        JordanCase::III3 => PaperType::P1,
    }
}

/// Fixed locus of a projective automorphism, reported algebraically:
/// isolated fixed points from 1-dimensional eigenspaces, pointwise-fixed
/// lines from 2-dimensional eigenspaces.
#[derive(Clone, Debug, Default)]
pub struct FixedLocus {
    pub points: Vec<Vec3>,
    /// Line coefficient triples l with l . p = 0 for every point p on the line.
    pub lines: Vec<Vec3>,
    pub is_all: bool,
}

#[derive(Clone, Debug)]
pub struct AutClassification {
    pub jordan_case: JordanCase,
    pub paper_type: PaperType,
    pub fixed_locus: FixedLocus,
    pub normal_form: ProjMap,
    /// conjugator^-1 . normal_form . conjugator is proportional to the input.
    pub conjugator: Mat3,
    pub conjugator_condition: f64,
    pub ill_conditioned: bool,
    pub borderline_clustering: bool,
}

fn lex_key(v: &Vec3) -> [f64; 6] {
    [v[0].re, v[0].im, v[1].re, v[1].im, v[2].re, v[2].im]
}

fn sort_triples(list: &mut [Vec3]) {
    list.sort_by(|a, b| {
        lex_key(a)
            .partial_cmp(&lex_key(b))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Fixed locus from the eigenspaces of the Jordan decomposition.
fn locus_from_decomposition(jd: &JordanDecomposition, tol: f64, m: &Mat3) -> FixedLocus {
    let mut locus = FixedLocus::default();
    let thr = tol * m.norm_fro();
    for cluster in &jd.eigen.clusters {
        let shifted = m.sub(&Mat3::diag(cluster.value, cluster.value, cluster.value));
        let basis = matrix::null_space(&shifted, thr);
        match basis.len() {
            0 => {}
            1 => {
                if let Ok(p) = normalize_triple(&basis[0]) {
                    locus.points.push(p);
                }
            }
            2 => {
                let line = cross(&basis[0], &basis[1]);
                if let Ok(l) = normalize_triple(&line) {
                    locus.lines.push(l);
                }
            }
            _ => {
                locus.is_all = true;
            }
        }
    }
    if locus.is_all {
        locus.points.clear();
        locus.lines.clear();
    }
    sort_triples(&mut locus.points);
    sort_triples(&mut locus.lines);
    locus
}

/// The polynomial normal form for each case, exactly the six listed maps.
pub fn normal_form_matrix(case: JordanCase, jd: &JordanDecomposition) -> Mat3 {
    // The Jordan form itself is the representative: diag and shift shapes.
    let _ = case;
    jd.j
}

pub fn classify(f: &ProjMap, tol: f64) -> Result<AutClassification, MatrixError> {
    let m = f.matrix();
    let jd = matrix::jordan_form(m, tol)?;
    let fixed_locus = locus_from_decomposition(&jd, tol, m);
    let normal_form = ProjMap::new(normal_form_matrix(jd.case_tag, &jd))?;
    Ok(AutClassification {
        jordan_case: jd.case_tag,
        paper_type: paper_type_of(jd.case_tag),
        fixed_locus,
        normal_form,
        conjugator: jd.p,
        conjugator_condition: jd.conjugator_condition,
        ill_conditioned: jd.ill_conditioned,
        borderline_clustering: jd.eigen.borderline,
    })
}

pub fn fixed_locus(f: &ProjMap, tol: f64) -> Result<FixedLocus, MatrixError> {
    Ok(classify(f, tol)?.fixed_locus)
}

/// Apply the projective map to a homogeneous triple, renormalized.
pub fn apply(f: &ProjMap, p: &Vec3) -> Result<Vec3, MatrixError> {
    for z in p {
        matrix::ensure_finite_c(*z)?;
    }
    normalize_triple(&f.matrix().mul_vec(p))
}

/// Angular soundness of a reported fixed point: |sin angle(M v, v)|.
pub fn fixed_point_angle(m: &Mat3, v: &Vec3) -> f64 {
    chordal_distance(&m.mul_vec(v), v)
}

/// Sample points on a reported fixed line (for soundness checks): the
/// line with coefficients l is the set of p with l . p = 0.
pub fn sample_line_points(line: &Vec3, count: usize) -> Vec<Vec3> {
    // Two independent points on the line: columns of a basis of l-perp
    // under the bilinear (not Hermitian) pairing.
    let candidates = [
        [ONE, ZERO, ZERO],
        [ZERO, ONE, ZERO],
        [ZERO, ZERO, ONE],
    ];
    let mut basis: Vec<Vec3> = Vec::new();
    for e in candidates {
        // Project e against the line functional: p = e - (l.e / l.l) l
        // works for the bilinear form only if l.l != 0; use cross products
        // instead, which always lie on the line.
        let p = cross(line, &e);
        if matrix::vec3_norm(&p) > 1e-12 {
            let p = normalize_triple(&p).unwrap();
            if basis
                .iter()
                .all(|b| chordal_distance(b, &p) > 1e-9)
            {
                basis.push(p);
            }
        }
        if basis.len() == 2 {
            break;
        }
    }
    assert_eq!(basis.len(), 2, "line must contain two distinct points");
    let (a, b) = (basis[0], basis[1]);
    (0..count)
        .map(|k| {
            let t = k as f64 / count as f64;
            let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * t) * C64::new(t + 0.5, 0.0);
            let p = [
                a[0] + w * b[0],
                a[1] + w * b[1],
                a[2] + w * b[2],
            ];
            normalize_triple(&p).unwrap()
        })
        .collect()
}
