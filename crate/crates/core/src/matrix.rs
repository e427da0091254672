//! Complex small-matrix algebra: characteristic/minimal polynomial data,
//! closed-form eigenstructure, Jordan form with conjugator, matrix
//! exponential and projective-map fitting from point correspondences.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Default relative tolerance for eigenvalue clustering and rank decisions.
pub const DEFAULT_EIGEN_TOL: f64 = 1e-8;

/// Resolution floors for root clustering. Closed-form cubic roots computed
/// from the coefficients split by about sqrt(eps) at an exact double root
/// and eps^(1/3) at a triple root, so merge decisions cannot honor
/// tolerances below these floors; requests below them are floored and the
/// borderline flag reports decisions near the threshold.
pub const PAIR_CLUSTER_FLOOR: f64 = 1e-6;
pub const TRIPLE_CLUSTER_FLOOR: f64 = 1e-4;

/// Conjugator condition numbers above this are flagged, not rejected.
pub const ILL_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix is degenerate (not in GL(3)) at tolerance {tol}: |det| = {det}")]
    DegenerateMatrix { det: f64, tol: f64 },
    #[error("logarithm of zero requested")]
    ZeroArgument,
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("correspondence design matrix has null space of dimension > 1")]
    DegenerateConfiguration,
    #[error("need at least {min} correspondences, got {got}")]
    TooFewCorrespondences { min: usize, got: usize },
    #[error("non-finite component in input")]
    NonFinite,
}

pub fn ensure_finite_c(z: C64) -> Result<C64, MatrixError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(MatrixError::NonFinite)
    }
}

// ---------------------------------------------------------------------------
// Small dense matrices over C
// ---------------------------------------------------------------------------

/// 3x3 complex matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3(pub [[C64; 3]; 3]);

/// 2x2 complex matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

pub type Vec3 = [C64; 3];
pub type Vec2 = [C64; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

impl Mat3 {
    pub fn zeros() -> Self {
        Mat3([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn diag(a: C64, b: C64, c: C64) -> Self {
        let mut m = Self::zeros();
        m.0[0][0] = a;
        m.0[1][1] = b;
        m.0[2][2] = c;
        m
    }

    pub fn from_rows(rows: [[C64; 3]; 3]) -> Self {
        Mat3(rows)
    }

    pub fn ensure_finite(&self) -> Result<(), MatrixError> {
        for row in &self.0 {
            for &z in row {
                ensure_finite_c(z)?;
            }
        }
        Ok(())
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for z in row.iter_mut() {
                *z *= s;
            }
        }
        m
    }

    pub fn add(&self, other: &Mat3) -> Self {
        let mut m = *self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] += other.0[i][j];
            }
        }
        m
    }

    pub fn sub(&self, other: &Mat3) -> Self {
        let mut m = *self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] -= other.0[i][j];
            }
        }
        m
    }

    pub fn mul(&self, other: &Mat3) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = ZERO;
                for k in 0..3 {
                    acc += self.0[i][k] * other.0[k][j];
                }
                m.0[i][j] = acc;
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let mut out = [ZERO; 3];
        for i in 0..3 {
            for k in 0..3 {
                out[i] += self.0[i][k] * v[k];
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn norm_fro(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Inverse via the adjugate; callers must have checked invertibility.
    pub fn inverse(&self) -> Option<Mat3> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        let m = &self.0;
        let cof = |r1: usize, r2: usize, c1: usize, c2: usize| {
            m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
        };
        let adj = Mat3([
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ]);
        Some(adj.scale(ONE / d))
    }

    /// Frobenius condition estimate ||M|| * ||M^-1||.
    pub fn cond_fro(&self) -> f64 {
        match self.inverse() {
            Some(inv) => self.norm_fro() * inv.norm_fro(),
            None => f64::INFINITY,
        }
    }
}

impl Mat2 {
    pub fn zeros() -> Self {
        Mat2([[ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn diag(a: C64, b: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, b]])
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for z in row.iter_mut() {
                *z *= s;
            }
        }
        m
    }

    pub fn add(&self, other: &Mat2) -> Self {
        let mut m = *self;
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] += other.0[i][j];
            }
        }
        m
    }

    pub fn mul(&self, other: &Mat2) -> Self {
        let mut m = Self::zeros();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = self.0[i][0] * other.0[0][j] + self.0[i][1] * other.0[1][j];
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &Vec2) -> Vec2 {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn norm_fro(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        Some(Mat2([
            [self.0[1][1] / d, -self.0[0][1] / d],
            [-self.0[1][0] / d, self.0[0][0] / d],
        ]))
    }
}

// ---------------------------------------------------------------------------
// Homogeneous-triple utilities
// ---------------------------------------------------------------------------

pub fn vec3_norm(v: &Vec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit norm with the largest-modulus entry made real positive.
pub fn normalize_triple(v: &Vec3) -> Result<Vec3, MatrixError> {
    let n = vec3_norm(v);
    if n == 0.0 {
        return Err(MatrixError::ZeroVector);
    }
    let mut best = 0usize;
    for i in 1..3 {
        if v[i].norm_sqr() > v[best].norm_sqr() {
            best = i;
        }
    }
    let phase = v[best] / v[best].norm();
    let factor = ONE / (phase * n);
    Ok([v[0] * factor, v[1] * factor, v[2] * factor])
}

/// Chordal distance between projective points: the sine of the angle
/// between representative vectors, computed from the rejection so small
/// angles do not lose half the precision.
pub fn chordal_distance(a: &Vec3, b: &Vec3) -> f64 {
    let na = vec3_norm(a);
    let nb = vec3_norm(b);
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let mut ip = ZERO;
    for i in 0..3 {
        ip += (a[i] / na).conj() * b[i];
    }
    let mut rej = [ZERO; 3];
    for i in 0..3 {
        rej[i] = b[i] - ip * a[i] / na;
    }
    (vec3_norm(&rej) / nb).min(1.0)
}

/// Cross product without conjugation; gives the line through two
/// projective points, and the point on two projective lines.
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Distance between two matrices viewed projectively: Frobenius distance
/// of unit-normalized representatives after optimal phase alignment.
pub fn projective_distance(a: &Mat3, b: &Mat3) -> f64 {
    let na = a.norm_fro();
    let nb = b.norm_fro();
    if na == 0.0 || nb == 0.0 {
        return f64::INFINITY;
    }
    let mut ip = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            ip += b.0[i][j].conj() * a.0[i][j];
        }
    }
    let phase = if ip.norm() == 0.0 { ONE } else { ip / ip.norm() };
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let d = a.0[i][j] / na - phase * b.0[i][j] / nb;
            acc += d.norm_sqr();
        }
    }
    acc.sqrt()
}

// ---------------------------------------------------------------------------
// Characteristic polynomial and closed-form eigenvalues
// ---------------------------------------------------------------------------

/// Coefficients (c0, c1, c2) of det(tI - M) = t^3 + c2 t^2 + c1 t + c0.
pub fn char_poly(m: &Mat3) -> (C64, C64, C64) {
    let tr = m.trace();
    let det = m.det();
    // Sum of principal 2x2 minors.
    let a = &m.0;
    let m01 = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let m02 = a[0][0] * a[2][2] - a[0][2] * a[2][0];
    let m12 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    let c2 = -tr;
    let c1 = m01 + m02 + m12;
    let c0 = -det;
    (c0, c1, c2)
}

pub fn eval_cubic(c0: C64, c1: C64, c2: C64, t: C64) -> C64 {
    ((t + c2) * t + c1) * t + c0
}

fn eval_cubic_deriv(c1: C64, c2: C64, t: C64) -> C64 {
    (C64::new(3.0, 0.0) * t + C64::new(2.0, 0.0) * c2) * t + c1
}

/// Roots of the monic cubic via Cardano on the depressed form, each
/// polished by one guarded Newton step.
pub fn cubic_roots(c0: C64, c1: C64, c2: C64) -> [C64; 3] {
    let third = C64::new(1.0 / 3.0, 0.0);
    let shift = c2 * third;
    // t = s - c2/3: s^3 + p s + q
    let p = c1 - c2 * c2 * third;
    let q = c2 * (C64::new(2.0, 0.0) * c2 * c2 - C64::new(9.0, 0.0) * c1)
        / C64::new(27.0, 0.0)
        + c0;
    let half_q = q * C64::new(0.5, 0.0);
    let disc = half_q * half_q + (p * third) * (p * third) * (p * third);
    let sq = disc.sqrt();
    // Pick the branch with the larger modulus to avoid cancellation.
    let cand1 = -half_q + sq;
    let cand2 = -half_q - sq;
    let c = if cand1.norm() >= cand2.norm() {
        cand1
    } else {
        cand2
    };
    let mut roots = [ZERO; 3];
    if c.norm() == 0.0 {
        // p = q = 0: triple root.
        roots = [-shift; 3];
    } else {
        let cr = c.cbrt();
        let omega = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let mut w = ONE;
        for r in roots.iter_mut() {
            let wc = w * cr;
            *r = wc - p * third / wc - shift;
            w *= omega;
        }
    }
    roots
}

/// One guarded Newton step on the monic cubic.
fn polish_simple_root(c0: C64, c1: C64, c2: C64, r: C64) -> C64 {
    let f = eval_cubic(c0, c1, c2, r);
    let df = eval_cubic_deriv(c1, c2, r);
    if df.norm() > 1e-300 {
        let step = f / df;
        if step.norm().is_finite() && step.norm() < 1.0 + r.norm() {
            return r - step;
        }
    }
    r
}

/// Refine a double-root representative via one Newton step on the
/// derivative (whose root there is simple and well conditioned).
fn polish_double_root(c1: C64, c2: C64, r: C64) -> C64 {
    let df = eval_cubic_deriv(c1, c2, r);
    let ddf = C64::new(6.0, 0.0) * r + C64::new(2.0, 0.0) * c2;
    if ddf.norm() > 1e-300 {
        let step = df / ddf;
        if step.norm().is_finite() && step.norm() < 1.0 + r.norm() {
            return r - step;
        }
    }
    r
}

// ---------------------------------------------------------------------------
// Eigenstructure with clustering
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct EigenCluster {
    pub value: C64,
    pub algebraic: usize,
    pub geometric: usize,
}

#[derive(Clone, Debug)]
pub struct EigenData {
    /// Clusters ordered by |value| descending, then Arg ascending.
    pub clusters: Vec<EigenCluster>,
    pub clustering_tol: f64,
    /// Some root pair fell within a factor 10 of the merge threshold.
    pub borderline: bool,
}

fn eigen_order_key(z: &C64) -> (f64, f64) {
    (-z.norm(), z.arg())
}

/// Numerical rank of a 3x3 matrix by full-pivot elimination at an
/// absolute threshold.
pub fn rank_at(m: &Mat3, threshold: f64) -> usize {
    let mut a = m.0;
    let mut rank = 0;
    let mut rows: Vec<usize> = (0..3).collect();
    let mut cols: Vec<usize> = (0..3).collect();
    while rank < 3 {
        // Full pivot over the remaining submatrix.
        let (mut pr, mut pc, mut pv) = (0usize, 0usize, 0.0f64);
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in cols.iter().enumerate() {
                let v = a[r][c].norm();
                if v > pv {
                    pv = v;
                    pr = ri;
                    pc = ci;
                }
            }
        }
        if pv <= threshold {
            break;
        }
        let r = rows.remove(pr);
        let c = cols.remove(pc);
        for &r2 in &rows {
            let f = a[r2][c] / a[r][c];
            for &c2 in &cols {
                let sub = f * a[r][c2];
                a[r2][c2] -= sub;
            }
            a[r2][c] = ZERO;
        }
        rank += 1;
    }
    rank
}

/// Orthonormal basis of the (numerical) null space of a 3x3 matrix.
pub fn null_space(m: &Mat3, threshold: f64) -> Vec<Vec3> {
    // Row echelon with full pivoting, then back substitution on the free
    // columns; Gram-Schmidt at the end for a well-conditioned basis.
    let mut a = m.0;
    let mut col_perm = [0usize, 1, 2];
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, permuted col idx)
    let mut row = 0usize;
    for col in 0..3 {
        // Find pivot among rows >= row, columns >= col (in permuted order).
        let (mut pr, mut pc, mut pv) = (row, col, 0.0f64);
        for r in row..3 {
            for c in col..3 {
                let v = a[r][col_perm[c]].norm();
                if v > pv {
                    pv = v;
                    pr = r;
                    pc = c;
                }
            }
        }
        if pv <= threshold {
            break;
        }
        a.swap(row, pr);
        col_perm.swap(col, pc);
        let piv = a[row][col_perm[col]];
        for r in (row + 1)..3 {
            let f = a[r][col_perm[col]] / piv;
            a[r][col_perm[col]] = ZERO;
            for c in (col + 1)..3 {
                let sub = f * a[row][col_perm[c]];
                a[r][col_perm[c]] -= sub;
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    let rank = pivots.len();
    let mut basis = Vec::new();
    for free in rank..3 {
        let mut x = [ZERO; 3];
        x[col_perm[free]] = ONE;
        // Back substitute pivot variables.
        for &(prow, pcol) in pivots.iter().rev() {
            let mut acc = ZERO;
            for c in (pcol + 1)..3 {
                acc += a[prow][col_perm[c]] * x[col_perm[c]];
            }
            x[col_perm[pcol]] = -acc / a[prow][col_perm[pcol]];
        }
        basis.push(x);
    }
    // Gram-Schmidt.
    let mut ortho: Vec<Vec3> = Vec::new();
    for mut v in basis {
        for u in &ortho {
            let mut ip = ZERO;
            for i in 0..3 {
                ip += u[i].conj() * v[i];
            }
            for i in 0..3 {
                v[i] -= ip * u[i];
            }
        }
        let n = vec3_norm(&v);
        if n > 0.0 {
            for z in v.iter_mut() {
                *z /= n;
            }
            ortho.push(v);
        }
    }
    ortho
}

fn check_invertible(m: &Mat3, tol: f64) -> Result<(), MatrixError> {
    let scale = m.norm_fro();
    let det = m.det().norm();
    if scale == 0.0 || det <= tol * scale * scale * scale {
        return Err(MatrixError::DegenerateMatrix { det, tol });
    }
    Ok(())
}

/// Eigenvalues of a 3x3 complex matrix with multiplicity clustering.
pub fn eigen_structure(m: &Mat3, tol: f64) -> Result<EigenData, MatrixError> {
    m.ensure_finite()?;
    assert!(tol > 0.0, "tolerance must be positive");
    check_invertible(m, tol)?;
    let (c0, c1, c2) = char_poly(m);
    let roots = cubic_roots(c0, c1, c2);

    let pair_tol = tol.max(PAIR_CLUSTER_FLOOR);
    let mut borderline = false;
    let mut near = |d: f64, thr: f64| {
        if d >= 0.1 * thr && d <= 10.0 * thr {
            borderline = true;
        }
    };

    // Triple hypothesis first: all roots near their exact mean -c2/3.
    let tri_center = -c2 / C64::new(3.0, 0.0);
    let tri_thr = tol.max(TRIPLE_CLUSTER_FLOOR) * (1.0 + tri_center.norm());
    let tri_dist = roots
        .iter()
        .map(|r| (r - tri_center).norm())
        .fold(0.0f64, f64::max);
    near(tri_dist, tri_thr);
    let mut groups: Vec<Vec<C64>> = Vec::new();
    if tri_dist <= tri_thr {
        groups.push(roots.to_vec());
    } else {
        // Pairwise merge with transitivity.
        let merge_dist = |a: &C64, b: &C64| -> (f64, f64) {
            let d = (a - b).norm();
            let thr = pair_tol * (1.0 + a.norm().max(b.norm()));
            (d, thr)
        };
        for r in roots {
            let mut joined = false;
            for g in groups.iter_mut() {
                let touches = g.iter().any(|x| {
                    let (d, thr) = merge_dist(x, &r);
                    d <= thr
                });
                for x in g.iter() {
                    let (d, thr) = merge_dist(x, &r);
                    near(d, thr);
                }
                if touches {
                    g.push(r);
                    joined = true;
                    break;
                }
            }
            if !joined {
                groups.push(vec![r]);
            }
        }
        loop {
            let mut merged = false;
            'outer: for i in 0..groups.len() {
                for j in (i + 1)..groups.len() {
                    let touch = groups[i].iter().any(|a| {
                        groups[j].iter().any(|b| {
                            let (d, thr) = merge_dist(a, b);
                            d <= thr
                        })
                    });
                    if touch {
                        let g = groups.remove(j);
                        groups[i].extend(g);
                        merged = true;
                        break 'outer;
                    }
                }
            }
            if !merged {
                break;
            }
        }
    }

    let fro = m.norm_fro();
    let rank_thr = tol * fro;
    let mut clusters: Vec<EigenCluster> = groups
        .into_iter()
        .map(|g| {
            // Mean of the raw closed-form roots, then a polish matched to
            // the multiplicity: plain Newton is noise-amplifying at a
            // multiple root, so double roots are refined through the
            // derivative and the triple root is -c2/3 exactly.
            let mean = g.iter().sum::<C64>() / C64::new(g.len() as f64, 0.0);
            let value = match g.len() {
                1 => polish_simple_root(c0, c1, c2, mean),
                2 => polish_double_root(c1, c2, mean),
                _ => -c2 / C64::new(3.0, 0.0),
            };
            let shifted = m.sub(&Mat3::diag(value, value, value));
            let geometric = 3 - rank_at(&shifted, rank_thr);
            EigenCluster {
                value,
                algebraic: g.len(),
                geometric: geometric.clamp(1, g.len()),
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        eigen_order_key(&a.value)
            .partial_cmp(&eigen_order_key(&b.value))
            .unwrap()
    });
    // Repeated clusters come first so the Jordan shapes match the
    // classification cases (the repeated eigenvalue is lambda_0).
    clusters.sort_by_key(|cl| std::cmp::Reverse(cl.algebraic));
    Ok(EigenData {
        clusters,
        clustering_tol: tol,
        borderline,
    })
}

// ---------------------------------------------------------------------------
// Jordan canonical form
// ---------------------------------------------------------------------------

/// The six case tags of the classification: characteristic polynomial
/// pattern (i)/(ii)/(iii) refined by the minimal polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JordanCase {
    I,
    II1,
    II2,
    III1,
    III2,
    III3,
}

impl JordanCase {
    pub fn label(&self) -> &'static str {
        match self {
            JordanCase::I => "I",
            JordanCase::II1 => "II1",
            JordanCase::II2 => "II2",
            JordanCase::III1 => "III1",
            JordanCase::III2 => "III2",
            JordanCase::III3 => "III3",
        }
    }
}

#[derive(Clone, Debug)]
pub struct JordanDecomposition {
    pub j: Mat3,
    /// Conjugator with M = P^-1 J P.
    pub p: Mat3,
    pub case_tag: JordanCase,
    pub eigen: EigenData,
    pub conjugator_condition: f64,
    pub ill_conditioned: bool,
}

/// Deterministically pick the candidate vector maximizing |N v| (resp.
/// |N^2 v|) among the standard basis; used to seed Jordan chains.
fn argmax_image(n: &Mat3) -> Vec3 {
    let basis = [
        [ONE, ZERO, ZERO],
        [ZERO, ONE, ZERO],
        [ZERO, ZERO, ONE],
    ];
    let mut best = basis[0];
    let mut best_n = -1.0;
    for b in basis {
        let img = n.mul_vec(&b);
        let v = vec3_norm(&img);
        if v > best_n {
            best_n = v;
            best = b;
        }
    }
    best
}

pub fn jordan_form(m: &Mat3, tol: f64) -> Result<JordanDecomposition, MatrixError> {
    let eigen = eigen_structure(m, tol)?;
    let rank_thr = tol * m.norm_fro();
    let (case_tag, s, j) = build_chains(m, &eigen, rank_thr);
    let p = s
        .inverse()
        .ok_or(MatrixError::DegenerateMatrix { det: 0.0, tol })?;
    let cond = p.cond_fro();
    Ok(JordanDecomposition {
        j,
        p,
        case_tag,
        eigen,
        conjugator_condition: cond,
        ill_conditioned: cond > ILL_CONDITION_LIMIT,
    })
}

/// Columns of S are (generalized) eigenvectors with M = S J S^-1.
fn build_chains(m: &Mat3, eigen: &EigenData, thr: f64) -> (JordanCase, Mat3, Mat3) {
    let clusters = &eigen.clusters;
    let col = |s: &mut Mat3, idx: usize, v: &Vec3| {
        for r in 0..3 {
            s.0[r][idx] = v[r];
        }
    };
    let shifted = |lambda: C64| m.sub(&Mat3::diag(lambda, lambda, lambda));

    match clusters.len() {
        3 => {
            // Case I: three simple eigenvalues.
            let mut s = Mat3::zeros();
            let mut j = Mat3::zeros();
            for (i, cl) in clusters.iter().enumerate() {
                let ns = null_space(&shifted(cl.value), thr);
                let v = ns.first().copied().unwrap_or([ONE, ZERO, ZERO]);
                col(&mut s, i, &v);
                j.0[i][i] = cl.value;
            }
            (JordanCase::I, s, j)
        }
        2 => {
            // lambda_0 is the repeated cluster (sorted first).
            let l0 = clusters[0].value;
            let l1 = clusters[1].value;
            let n0 = shifted(l0);
            let simple = null_space(&shifted(l1), thr)
                .first()
                .copied()
                .unwrap_or([ZERO, ZERO, ONE]);
            if clusters[0].geometric >= 2 {
                // Case II1: diag(l0, l0, l1).
                let ns = null_space(&n0, thr);
                let mut s = Mat3::zeros();
                let (a, b) = match (ns.first(), ns.get(1)) {
                    (Some(a), Some(b)) => (*a, *b),
                    _ => ([ONE, ZERO, ZERO], [ZERO, ONE, ZERO]),
                };
                col(&mut s, 0, &a);
                col(&mut s, 1, &b);
                col(&mut s, 2, &simple);
                (JordanCase::II1, s, Mat3::diag(l0, l0, l1))
            } else {
                // Case II2: one chain of length 2 plus the simple eigenvector.
                // v2 in ker(N^2) \ ker(N), v1 = N v2.
                let n2 = n0.mul(&n0);
                let k2 = null_space(&n2, thr * (1.0 + n0.norm_fro()));
                let mut v2 = [ZERO; 3];
                let mut best = -1.0;
                for cand in &k2 {
                    let img = n0.mul_vec(cand);
                    let v = vec3_norm(&img);
                    if v > best {
                        best = v;
                        v2 = *cand;
                    }
                }
                if best <= 0.0 {
                    v2 = argmax_image(&n0);
                }
                let v1 = n0.mul_vec(&v2);
                let scale = vec3_norm(&v1).max(1e-300);
                let v1 = [v1[0] / scale, v1[1] / scale, v1[2] / scale];
                let v2 = [v2[0] / scale, v2[1] / scale, v2[2] / scale];
                let mut s = Mat3::zeros();
                col(&mut s, 0, &v1);
                col(&mut s, 1, &v2);
                col(&mut s, 2, &simple);
                let mut j = Mat3::diag(l0, l0, l1);
                j.0[0][1] = ONE;
                (JordanCase::II2, s, j)
            }
        }
        _ => {
            let l0 = clusters[0].value;
            let n = shifted(l0);
            match clusters[0].geometric {
                3 => (JordanCase::III1, Mat3::identity(), Mat3::diag(l0, l0, l0)),
                2 => {
                    // Case III2: chain of length 2 + independent eigenvector.
                    let v2 = argmax_image(&n);
                    let v1 = n.mul_vec(&v2);
                    let scale = vec3_norm(&v1).max(1e-300);
                    let v1 = [v1[0] / scale, v1[1] / scale, v1[2] / scale];
                    let v2 = [v2[0] / scale, v2[1] / scale, v2[2] / scale];
                    let kern = null_space(&n, thr);
                    // Pick the kernel vector least aligned with v1.
                    let v1n = normalize_triple(&v1).unwrap_or(v1);
                    let mut w = [ZERO, ZERO, ONE];
                    let mut best = -1.0;
                    for cand in &kern {
                        let mut ip = ZERO;
                        for i in 0..3 {
                            ip += v1n[i].conj() * cand[i];
                        }
                        let mut resid = *cand;
                        for i in 0..3 {
                            resid[i] -= ip * v1n[i];
                        }
                        let r = vec3_norm(&resid);
                        if r > best {
                            best = r;
                            w = *cand;
                        }
                    }
                    let mut s = Mat3::zeros();
                    col(&mut s, 0, &v1);
                    col(&mut s, 1, &v2);
                    col(&mut s, 2, &w);
                    let mut j = Mat3::diag(l0, l0, l0);
                    j.0[0][1] = ONE;
                    (JordanCase::III2, s, j)
                }
                _ => {
                    // Case III3: full chain v1 = N^2 v3, v2 = N v3.
                    let n2 = n.mul(&n);
                    let mut v3 = [ZERO; 3];
                    let mut best = -1.0;
                    for b in [
                        [ONE, ZERO, ZERO],
                        [ZERO, ONE, ZERO],
                        [ZERO, ZERO, ONE],
                    ] {
                        let img = n2.mul_vec(&b);
                        let v = vec3_norm(&img);
                        if v > best {
                            best = v;
                            v3 = b;
                        }
                    }
                    let v2 = n.mul_vec(&v3);
                    let v1 = n2.mul_vec(&v3);
                    let scale = vec3_norm(&v1).max(1e-300);
                    let v1 = [v1[0] / scale, v1[1] / scale, v1[2] / scale];
                    let v2 = [v2[0] / scale, v2[1] / scale, v2[2] / scale];
                    let v3 = [v3[0] / scale, v3[1] / scale, v3[2] / scale];
                    let mut s = Mat3::zeros();
                    col(&mut s, 0, &v1);
                    col(&mut s, 1, &v2);
                    col(&mut s, 2, &v3);
                    let mut j = Mat3::diag(l0, l0, l0);
                    j.0[0][1] = ONE;
                    j.0[1][2] = ONE;
                    (JordanCase::III3, s, j)
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Matrix exponential: scaling and squaring with a truncated series
// ---------------------------------------------------------------------------

macro_rules! impl_mat_exp {
    ($name:ident, $mat:ty, $n:expr) => {
        pub fn $name(m: &$mat) -> $mat {
            let norm = m.norm_fro();
            let s = if norm > 0.5 {
                (norm / 0.5).log2().ceil() as u32
            } else {
                0
            };
            let scaled = m.scale(C64::new(1.0 / 2f64.powi(s as i32), 0.0));
            // Taylor series on the scaled matrix.
            let mut result = <$mat>::identity();
            let mut term = <$mat>::identity();
            for k in 1..=32u32 {
                term = term.mul(&scaled).scale(C64::new(1.0 / k as f64, 0.0));
                result = result.add(&term);
                if term.norm_fro() <= 1e-18 * result.norm_fro() {
                    break;
                }
            }
            for _ in 0..s {
                result = result.mul(&result);
            }
            result
        }
    };
}

impl_mat_exp!(mat_exp3, Mat3, 3);
impl_mat_exp!(mat_exp2, Mat2, 2);

// ---------------------------------------------------------------------------
// Branch-controlled logarithm
// ---------------------------------------------------------------------------

/// alpha with exp(2 pi i alpha) = lambda, principal branch plus an
/// integer winding offset.
pub fn alpha_from_lambda(lambda: C64, winding: i32) -> Result<C64, MatrixError> {
    ensure_finite_c(lambda)?;
    if lambda.norm() == 0.0 {
        return Err(MatrixError::ZeroArgument);
    }
    let log = C64::new(lambda.norm().ln(), lambda.arg());
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    Ok(log / two_pi_i + C64::new(winding as f64, 0.0))
}

// ---------------------------------------------------------------------------
// Projective-map fitting (DLT with smallest singular direction)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Correspondence {
    pub source: Vec3,
    pub target: Vec3,
}

impl Correspondence {
    pub fn new(source: Vec3, target: Vec3) -> Result<Self, MatrixError> {
        for z in source.iter().chain(target.iter()) {
            ensure_finite_c(*z)?;
        }
        if vec3_norm(&source) == 0.0 || vec3_norm(&target) == 0.0 {
            return Err(MatrixError::ZeroVector);
        }
        Ok(Correspondence { source, target })
    }
}

/// Unit-Frobenius normalization with the largest-modulus entry made
/// real positive, so proportional matrices become equal.
pub fn normalize_matrix(m: &Mat3) -> Result<Mat3, MatrixError> {
    let n = m.norm_fro();
    if n == 0.0 {
        return Err(MatrixError::ZeroVector);
    }
    let mut bi = 0;
    let mut bj = 0;
    for i in 0..3 {
        for j in 0..3 {
            if m.0[i][j].norm_sqr() > m.0[bi][bj].norm_sqr() {
                bi = i;
                bj = j;
            }
        }
    }
    let phase = m.0[bi][bj] / m.0[bi][bj].norm();
    Ok(m.scale(ONE / (phase * n)))
}

/// Fit M with target ~ M source from >= 4 correspondences.
/// Returns the normalized matrix and the worst chordal residual.
pub fn fit_projective(corrs: &[Correspondence]) -> Result<(Mat3, f64), MatrixError> {
    if corrs.len() < 4 {
        return Err(MatrixError::TooFewCorrespondences {
            min: 4,
            got: corrs.len(),
        });
    }
    let mut a = DMatrix::<C64>::zeros(2 * corrs.len(), 9);
    let eps = |a: usize, b: usize, c: usize| -> f64 {
        match (a, b, c) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
            _ => 0.0,
        }
    };
    for (ci, corr) in corrs.iter().enumerate() {
        let s = normalize_triple(&corr.source)?;
        let t = normalize_triple(&corr.target)?;
        // Drop the cross-product row indexed by the largest |t| entry.
        let mut skip = 0usize;
        for i in 1..3 {
            if t[i].norm_sqr() > t[skip].norm_sqr() {
                skip = i;
            }
        }
        let mut row = 2 * ci;
        for r in 0..3 {
            if r == skip {
                continue;
            }
            for c in 0..3 {
                for d in 0..3 {
                    let mut coef = ZERO;
                    for b in 0..3 {
                        let e = eps(r, b, c);
                        if e != 0.0 {
                            coef += C64::new(e, 0.0) * t[b];
                        }
                    }
                    a[(row, c * 3 + d)] += coef * s[d];
                }
            }
            row += 1;
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested v_t");
    let sv = &svd.singular_values;
    let mut min_idx = 0usize;
    let mut max_sv = 0.0f64;
    for i in 0..sv.len() {
        if sv[i] < sv[min_idx] {
            min_idx = i;
        }
        if sv[i] > max_sv {
            max_sv = sv[i];
        }
    }
    // Null space of dimension > 1: a second singular value at noise level.
    let mut near_null = 0;
    for i in 0..sv.len() {
        if sv[i] <= 1e-10 * max_sv.max(1.0) {
            near_null += 1;
        }
    }
    if near_null > 1 || max_sv == 0.0 {
        return Err(MatrixError::DegenerateConfiguration);
    }
    let mut m = Mat3::zeros();
    for c in 0..3 {
        for d in 0..3 {
            m.0[c][d] = v_t[(min_idx, c * 3 + d)].conj();
        }
    }
    let m = normalize_matrix(&m)?;
    let mut residual = 0.0f64;
    for corr in corrs {
        let mapped = m.mul_vec(&corr.source);
        residual = residual.max(chordal_distance(&mapped, &corr.target));
    }
    Ok((m, residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn r(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn char_poly_identity() {
        let (c0, c1, c2) = char_poly(&Mat3::identity());
        assert!((c0 - r(-1.0)).norm() < 1e-14);
        assert!((c1 - r(3.0)).norm() < 1e-14);
        assert!((c2 - r(-3.0)).norm() < 1e-14);
    }

    #[test]
    fn char_poly_diag_235() {
        // (t-2)(t-3)(t-5) = t^3 - 10 t^2 + 31 t - 30
        let m = Mat3::diag(r(2.0), r(3.0), r(5.0));
        let (c0, c1, c2) = char_poly(&m);
        assert!((c0 - r(-30.0)).norm() < 1e-12);
        assert!((c1 - r(31.0)).norm() < 1e-12);
        assert!((c2 - r(-10.0)).norm() < 1e-12);
        let mut roots = cubic_roots(c0, c1, c2)
            .iter()
            .map(|z| z.re)
            .collect::<Vec<_>>();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((roots[0] - 2.0).abs() < 1e-10);
        assert!((roots[1] - 3.0).abs() < 1e-10);
        assert!((roots[2] - 5.0).abs() < 1e-10);
    }

    #[test]
    fn eigen_residual_on_random_matrices() {
        // |p(lambda)| <= 1e-8 (1 + |lambda|)^3 for each reported eigenvalue.
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for _ in 0..200 {
            let mut m = Mat3::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    m.0[i][j] = c(next(), next());
                }
            }
            let Ok(ed) = eigen_structure(&m, 1e-8) else {
                continue;
            };
            let (c0, c1, c2) = char_poly(&m);
            for cl in &ed.clusters {
                let p = eval_cubic(c0, c1, c2, cl.value).norm();
                let bound = 1e-8 * (1.0 + cl.value.norm()).powi(3);
                assert!(p <= bound, "residual {p} vs bound {bound}");
            }
        }
    }

    #[test]
    fn eigen_diag_distinct() {
        let m = Mat3::diag(r(2.0), r(3.0), r(5.0));
        let ed = eigen_structure(&m, 1e-8).unwrap();
        assert_eq!(ed.clusters.len(), 3);
        for cl in &ed.clusters {
            assert_eq!((cl.algebraic, cl.geometric), (1, 1));
        }
    }

    #[test]
    fn eigen_identity_full_multiplicity() {
        let ed = eigen_structure(&Mat3::identity(), 1e-8).unwrap();
        assert_eq!(ed.clusters.len(), 1);
        assert_eq!(ed.clusters[0].algebraic, 3);
        assert_eq!(ed.clusters[0].geometric, 3);
    }

    #[test]
    fn eigen_single_jordan_block_geometric() {
        // [[1,1,0],[0,1,0],[0,0,1]]: rank(M - I) = 1 by inspection.
        let mut m = Mat3::identity();
        m.0[0][1] = ONE;
        assert_eq!(rank_at(&m.sub(&Mat3::identity()), 1e-8 * m.norm_fro()), 1);
        let ed = eigen_structure(&m, 1e-8).unwrap();
        assert_eq!(ed.clusters.len(), 1);
        assert_eq!(ed.clusters[0].algebraic, 3);
        assert_eq!(ed.clusters[0].geometric, 2);
    }

    #[test]
    fn eigen_rejects_singular() {
        let m = Mat3::diag(r(1.0), r(1.0), r(0.0));
        assert!(matches!(
            eigen_structure(&m, 1e-8),
            Err(MatrixError::DegenerateMatrix { .. })
        ));
    }

    fn assert_reconstruction(m: &Mat3, jd: &JordanDecomposition) {
        let pinv = jd.p.inverse().unwrap();
        let rec = pinv.mul(&jd.j).mul(&jd.p);
        let err = rec.sub(m).norm_fro();
        assert!(
            err <= 1e-8 * m.norm_fro(),
            "reconstruction error {err} for case {:?}",
            jd.case_tag
        );
    }

    #[test]
    fn jordan_diag_is_case_i() {
        let m = Mat3::diag(r(2.0), r(3.0), r(5.0));
        let jd = jordan_form(&m, 1e-8).unwrap();
        assert_eq!(jd.case_tag, JordanCase::I);
        // Deterministic order: |5| > |3| > |2|.
        assert!((jd.j.0[0][0] - r(5.0)).norm() < 1e-9);
        assert!((jd.j.0[1][1] - r(3.0)).norm() < 1e-9);
        assert!((jd.j.0[2][2] - r(2.0)).norm() < 1e-9);
        assert_reconstruction(&m, &jd);
    }

    #[test]
    fn jordan_case_ii2_shape() {
        let m = Mat3::from_rows([
            [r(1.0), r(1.0), r(0.0)],
            [r(0.0), r(1.0), r(0.0)],
            [r(0.0), r(0.0), r(2.0)],
        ]);
        let jd = jordan_form(&m, 1e-8).unwrap();
        assert_eq!(jd.case_tag, JordanCase::II2);
        assert!((jd.j.0[0][0] - r(1.0)).norm() < 1e-9);
        assert!((jd.j.0[0][1] - r(1.0)).norm() < 1e-12);
        assert!((jd.j.0[2][2] - r(2.0)).norm() < 1e-9);
        assert_reconstruction(&m, &jd);
    }

    #[test]
    fn jordan_case_iii3_recovered_under_conjugation() {
        // Conjugate the full Jordan block by a fixed well-conditioned P0.
        let l0 = c(1.3, -0.4);
        let mut j = Mat3::diag(l0, l0, l0);
        j.0[0][1] = ONE;
        j.0[1][2] = ONE;
        let p0 = Mat3::from_rows([
            [r(1.0), r(0.3), c(0.1, 0.2)],
            [c(-0.2, 0.1), r(1.1), r(0.4)],
            [r(0.25), c(0.0, -0.3), r(0.9)],
        ]);
        let m = p0.inverse().unwrap().mul(&j).mul(&p0);
        let jd = jordan_form(&m, 1e-8).unwrap();
        assert_eq!(jd.case_tag, JordanCase::III3);
        assert!((jd.j.0[0][0] - l0).norm() < 1e-7);
        assert_reconstruction(&m, &jd);
    }

    #[test]
    fn jordan_case_ii1_and_iii2() {
        let m = Mat3::diag(r(2.0), r(2.0), r(3.0));
        let jd = jordan_form(&m, 1e-8).unwrap();
        assert_eq!(jd.case_tag, JordanCase::II1);
        assert_reconstruction(&m, &jd);

        let mut m2 = Mat3::diag(r(2.0), r(2.0), r(2.0));
        m2.0[0][1] = ONE;
        let jd2 = jordan_form(&m2, 1e-8).unwrap();
        assert_eq!(jd2.case_tag, JordanCase::III2);
        assert_reconstruction(&m2, &jd2);
    }

    #[test]
    fn mat_exp_zero_is_identity() {
        let e = mat_exp3(&Mat3::zeros());
        assert!(e.sub(&Mat3::identity()).norm_fro() < 1e-15);
    }

    #[test]
    fn mat_exp_diagonal_phases() {
        // exp(2 pi i diag(a', a'')) = diag(e^{2 pi i a'}, e^{2 pi i a''})
        let ap = c(0.3, 0.1);
        let app = c(-0.2, 0.05);
        let two_pi_i = c(0.0, 2.0 * PI);
        let m = Mat2::diag(two_pi_i * ap, two_pi_i * app);
        let e = mat_exp2(&m);
        let want0 = (two_pi_i * ap).exp();
        let want1 = (two_pi_i * app).exp();
        assert!((e.0[0][0] - want0).norm() < 1e-12 * want0.norm());
        assert!((e.0[1][1] - want1).norm() < 1e-12 * want1.norm());
        assert!(e.0[0][1].norm() < 1e-13);
    }

    #[test]
    fn mat_exp_upper_triangular_case_b() {
        // exp(2 pi i [[l, nu/(2 pi i mu)], [0, l]]) = [[mu, nu], [0, mu]]
        // when exp(2 pi i l) = mu.
        let mu = c(0.8, 0.6);
        let nu = c(0.3, -0.2);
        let lambda = alpha_from_lambda(mu, 0).unwrap();
        let two_pi_i = c(0.0, 2.0 * PI);
        let m = Mat2([
            [two_pi_i * lambda, two_pi_i * nu / (two_pi_i * mu)],
            [ZERO, two_pi_i * lambda],
        ]);
        let e = mat_exp2(&m);
        assert!((e.0[0][0] - mu).norm() < 1e-11);
        assert!((e.0[0][1] - nu).norm() < 1e-11);
        assert!((e.0[1][1] - mu).norm() < 1e-11);
        assert!(e.0[1][0].norm() < 1e-13);
    }

    #[test]
    fn exp_homomorphism_on_commuting_split() {
        // D scalar-diagonal, N nilpotent: exp(D+N) = exp(D) exp(N).
        let d = Mat2::diag(c(0.4, 1.1), c(0.4, 1.1));
        let mut n = Mat2::zeros();
        n.0[0][1] = c(-0.7, 0.2);
        let lhs = mat_exp2(&d.add(&n));
        let rhs = mat_exp2(&d).mul(&mat_exp2(&n));
        let mut err = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                err = err.max((lhs.0[i][j] - rhs.0[i][j]).norm());
            }
        }
        assert!(err < 1e-10);
    }

    #[test]
    fn alpha_branch_values() {
        assert!(alpha_from_lambda(r(1.0), 0).unwrap().norm() < 1e-15);
        let ai = alpha_from_lambda(c(0.0, 1.0), 0).unwrap();
        assert!((ai - r(0.25)).norm() < 1e-15);
        let am = alpha_from_lambda(r(-1.0), 0).unwrap();
        assert!((am - r(0.5)).norm() < 1e-15);
        // Winding offset shifts by an integer.
        let aw = alpha_from_lambda(r(-1.0), 2).unwrap();
        assert!((aw - r(2.5)).norm() < 1e-15);
    }

    #[test]
    fn alpha_round_trip_random() {
        let mut seed = 42u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        let two_pi_i = c(0.0, 2.0 * PI);
        for _ in 0..1000 {
            let lambda = c(next(), next());
            if lambda.norm() < 1e-6 {
                continue;
            }
            let a = alpha_from_lambda(lambda, 0).unwrap();
            let back = (two_pi_i * a).exp();
            assert!((back - lambda).norm() <= 1e-12 * lambda.norm());
        }
    }

    #[test]
    fn alpha_zero_rejected() {
        assert!(matches!(
            alpha_from_lambda(ZERO, 0),
            Err(MatrixError::ZeroArgument)
        ));
    }

    fn sample_sources() -> Vec<Vec3> {
        vec![
            [r(1.0), r(0.0), r(0.0)],
            [r(0.0), r(1.0), r(0.0)],
            [r(0.0), r(0.0), r(1.0)],
            [r(1.0), r(1.0), r(1.0)],
            [r(1.0), c(0.5, 0.5), r(-1.0)],
            [c(0.2, -0.3), r(1.0), c(0.7, 0.1)],
        ]
    }

    #[test]
    fn fit_identity() {
        let corrs: Vec<_> = sample_sources()
            .into_iter()
            .map(|s| Correspondence::new(s, s).unwrap())
            .collect();
        let (m, res) = fit_projective(&corrs).unwrap();
        let d = projective_distance(&m, &Mat3::identity());
        assert!(d < 1e-10, "distance {d}");
        assert!(res < 1e-12);
    }

    #[test]
    fn fit_recovers_diag_235() {
        let target = Mat3::diag(r(2.0), r(3.0), r(5.0));
        let corrs: Vec<_> = sample_sources()
            .into_iter()
            .map(|s| Correspondence::new(s, target.mul_vec(&s)).unwrap())
            .collect();
        let (m, res) = fit_projective(&corrs).unwrap();
        assert!(projective_distance(&m, &target) < 1e-9);
        assert!(res < 1e-10);
    }

    #[test]
    fn fit_recovers_conjugated_jordan_block() {
        let mut j = Mat3::diag(c(1.0, 0.5), c(1.0, 0.5), c(1.0, 0.5));
        j.0[0][1] = ONE;
        j.0[1][2] = ONE;
        let p0 = Mat3::from_rows([
            [r(1.0), r(0.2), r(-0.1)],
            [r(0.1), r(0.9), c(0.0, 0.3)],
            [c(-0.2, 0.1), r(0.3), r(1.2)],
        ]);
        let target = p0.inverse().unwrap().mul(&j).mul(&p0);
        let corrs: Vec<_> = sample_sources()
            .into_iter()
            .map(|s| Correspondence::new(s, target.mul_vec(&s)).unwrap())
            .collect();
        let (m, _res) = fit_projective(&corrs).unwrap();
        assert!(projective_distance(&m, &target) < 1e-8);
    }

    #[test]
    fn fit_scale_invariance() {
        let target = Mat3::diag(r(2.0), r(3.0), r(5.0));
        let scales = [c(1.0, 0.0), c(0.0, 2.0), c(-0.7, 1.3)];
        let mut results = Vec::new();
        for sc in scales {
            let corrs: Vec<_> = sample_sources()
                .into_iter()
                .map(|s| {
                    let t = target.mul_vec(&s);
                    Correspondence::new(s, [t[0] * sc, t[1] * sc, t[2] * sc]).unwrap()
                })
                .collect();
            results.push(fit_projective(&corrs).unwrap());
        }
        for w in results.windows(2) {
            assert!(projective_distance(&w[0].0, &w[1].0) < 1e-10);
            assert!((w[0].1 - w[1].1).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_degenerate_configuration() {
        // All sources on a line: null space dimension > 1.
        let corrs: Vec<_> = (0..6)
            .map(|k| {
                let s = [r(1.0), r(k as f64), r(0.0)];
                Correspondence::new(s, s).unwrap()
            })
            .collect();
        assert!(matches!(
            fit_projective(&corrs),
            Err(MatrixError::DegenerateConfiguration)
        ));
    }
}
