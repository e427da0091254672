//! Acceptance suite: one test per criterion, each printing a pass line
//! with its measured runtime. Run with `cargo test --test acceptance`.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use riccati::classify::{classify, PaperType, ProjMap};
use riccati::holonomy::{
    analytic_holonomy, generator_product, gluing_map, holonomy_generators, local_model_field,
    numeric_holonomy, verify_synthesis, lift_fiber_point, LiftOptions, LocalModel, LoopPath,
    Segment, SynthesisOptions,
};
use riccati::matrix::{
    chordal_distance, normalize_triple, projective_distance, JordanCase, Mat3, Vec3, C64,
};
use riccati::normal_form::{
    check_riccati_cn, check_riccati_cp2, invariant_fibers, transversality_at, Geometry,
    RejectionConstraint, TransversalityVerdict,
};
use riccati::poly::{MultiPoly, PolyVectorField};

const XYZ: [&str; 3] = ["x", "y", "z"];

fn r(x: f64) -> C64 {
    Complex64::new(x, 0.0)
}

fn c(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

const ZERO: C64 = Complex64::new(0.0, 0.0);
const ONE: C64 = Complex64::new(1.0, 0.0);

fn report(criterion: u32, label: &str, started: Instant, budget_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("[PASS] criterion {criterion}: {label} ({elapsed:.2}s, budget {budget_s}s)");
    assert!(
        elapsed < budget_s,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.2}s"
    );
}

fn pm(m: Mat3) -> ProjMap {
    ProjMap::new(m).unwrap()
}

fn jordan_shape(case: JordanCase, l0: C64, l1: C64, l2: C64) -> Mat3 {
    match case {
        JordanCase::I => Mat3::diag(l0, l1, l2),
        JordanCase::II1 => Mat3::diag(l0, l0, l1),
        JordanCase::II2 => {
            let mut j = Mat3::diag(l0, l0, l1);
            j.0[0][1] = ONE;
            j
        }
        JordanCase::III1 => Mat3::diag(l0, l0, l0),
        JordanCase::III2 => {
            let mut j = Mat3::diag(l0, l0, l0);
            j.0[0][1] = ONE;
            j
        }
        JordanCase::III3 => {
            let mut j = Mat3::diag(l0, l0, l0);
            j.0[0][1] = ONE;
            j.0[1][2] = ONE;
            j
        }
    }
}

fn okamoto(a: f64, b: f64) -> PolyVectorField {
    let p = MultiPoly::constant(&XYZ, ONE);
    let q = MultiPoly::monomial(&XYZ, &[0, 0, 1], ONE)
        .add(&MultiPoly::monomial(&XYZ, &[0, 2, 0], -ONE))
        .unwrap();
    let rr = MultiPoly::constant(&XYZ, r(-a))
        .add(&MultiPoly::monomial(&XYZ, &[0, 1, 0], r(-b)))
        .unwrap()
        .add(&MultiPoly::monomial(&XYZ, &[0, 1, 1], -ONE))
        .unwrap();
    PolyVectorField::new("affine", vec![p, q, rr]).unwrap()
}

// ---------------------------------------------------------------------------
// Criterion 1: classification golden suite
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_classification_golden_suite() {
    let started = Instant::now();
    let l0 = r(2.0);
    let l1 = r(3.0);
    let l2 = r(5.0);

    let triple_set_eq = |got: &[Vec3], want: &[Vec3]| -> bool {
        got.len() == want.len()
            && want
                .iter()
                .all(|w| got.iter().any(|g| chordal_distance(g, w) < 1e-10))
    };

    let e1: Vec3 = [ONE, ZERO, ZERO];
    let e2: Vec3 = [ZERO, ONE, ZERO];
    let e3: Vec3 = [ZERO, ZERO, ONE];

    // The six normal forms in the stated order, with their types.
    let cases = [
        (JordanCase::III3, PaperType::P1),
        (JordanCase::II2, PaperType::P2),
        (JordanCase::I, PaperType::P3),
        (JordanCase::II1, PaperType::P1R2),
        (JordanCase::III2, PaperType::R2),
        (JordanCase::III1, PaperType::Identity),
    ];
    for (case, want_type) in cases {
        let g = jordan_shape(case, l0, l1, l2);
        let got = classify(&pm(g), 1e-8).unwrap();
        assert_eq!(got.jordan_case, case);
        assert_eq!(got.paper_type, want_type);
        match case {
            JordanCase::I => {
                assert!(triple_set_eq(&got.fixed_locus.points, &[e1, e2, e3]));
                assert!(got.fixed_locus.lines.is_empty());
            }
            JordanCase::II2 => {
                assert!(triple_set_eq(&got.fixed_locus.points, &[e1, e3]));
                assert!(got.fixed_locus.lines.is_empty());
            }
            JordanCase::III3 => {
                assert!(triple_set_eq(&got.fixed_locus.points, &[e1]));
                assert!(got.fixed_locus.lines.is_empty());
            }
            JordanCase::III1 => {
                assert!(got.fixed_locus.is_all);
                assert!(got.fixed_locus.points.is_empty());
            }
            JordanCase::II1 => {
                assert!(triple_set_eq(&got.fixed_locus.points, &[e3]));
                assert!(triple_set_eq(&got.fixed_locus.lines, &[e3]));
            }
            JordanCase::III2 => {
                assert!(got.fixed_locus.points.is_empty());
                assert!(triple_set_eq(&got.fixed_locus.lines, &[e2]));
            }
        }
    }
    report(1, "six normal forms classify with exact fixed loci", started, 1.0);
}

// ---------------------------------------------------------------------------
// Criterion 2: conjugation and scaling robustness
// ---------------------------------------------------------------------------

fn random_unit_disk(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    loop {
        let z = c(
            rng.random_range(-radius..radius),
            rng.random_range(-radius..radius),
        );
        if z.norm() <= radius {
            return z;
        }
    }
}

fn random_conjugator(rng: &mut ChaCha8Rng, max_cond: f64) -> Mat3 {
    loop {
        let mut p = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                p.0[i][j] = random_unit_disk(rng, 1.0);
            }
        }
        if p.cond_fro() <= max_cond {
            return p;
        }
    }
}

fn random_eigenvalues(rng: &mut ChaCha8Rng) -> (C64, C64, C64) {
    loop {
        let draw = |rng: &mut ChaCha8Rng| {
            let modulus = rng.random_range(0.5..2.2);
            let phase = rng.random_range(0.0..(2.0 * std::f64::consts::PI));
            C64::from_polar(modulus, phase)
        };
        let l0 = draw(rng);
        let l1 = draw(rng);
        let l2 = draw(rng);
        if (l0 - l1).norm() > 0.3 && (l0 - l2).norm() > 0.3 && (l1 - l2).norm() > 0.3 {
            return (l0, l1, l2);
        }
    }
}

#[test]
fn criterion_2_conjugation_scaling_robustness() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cases = [
        (JordanCase::I, PaperType::P3),
        (JordanCase::II1, PaperType::P1R2),
        (JordanCase::II2, PaperType::P2),
        (JordanCase::III1, PaperType::Identity),
        (JordanCase::III2, PaperType::R2),
        (JordanCase::III3, PaperType::P1),
    ];
    let mut total = 0usize;
    for (case, want_type) in cases {
        for _ in 0..1000 {
            let (l0, l1, l2) = random_eigenvalues(&mut rng);
            let j = jordan_shape(case, l0, l1, l2);
            let p0 = random_conjugator(&mut rng, 50.0);
            let p0_inv = p0.inverse().unwrap();
            let scale = C64::from_polar(
                rng.random_range(0.3..3.0),
                rng.random_range(0.0..(2.0 * std::f64::consts::PI)),
            );
            let m = p0_inv.mul(&j).mul(&p0).scale(scale);
            let got = classify(&pm(m), 1e-8).unwrap();
            assert_eq!(
                got.paper_type, want_type,
                "case {case:?} misclassified as {:?} (jordan {:?})",
                got.paper_type, got.jordan_case
            );
            total += 1;

            // Covariance of the fixed locus: the reference classification
            // of J itself provides the expected points and lines.
            let reference = classify(&pm(j), 1e-8).unwrap();
            // Points of M map through P0^-1... points w of M satisfy
            // M w ~ w; then J (P0 w) ~ P0 w.
            for w in &got.fixed_locus.points {
                let image = normalize_triple(&p0.mul_vec(w)).unwrap();
                let matched = reference
                    .fixed_locus
                    .points
                    .iter()
                    .any(|v| chordal_distance(&image, v) <= 1e-7);
                assert!(matched, "fixed point fails covariance for case {case:?}");
            }
            // Line coefficients transform by the inverse transpose.
            let p0_inv_t = p0_inv.transpose();
            for l in &got.fixed_locus.lines {
                let image = normalize_triple(&p0_inv_t.mul_vec(l)).unwrap();
                let matched = reference
                    .fixed_locus
                    .lines
                    .iter()
                    .any(|v| chordal_distance(&image, v) <= 1e-7);
                assert!(matched, "fixed line fails covariance for case {case:?}");
            }
            assert_eq!(got.fixed_locus.is_all, reference.fixed_locus.is_all);
        }
    }
    assert_eq!(total, 6000);
    report(
        2,
        "6000 conjugated and scaled classifications with covariant loci",
        started,
        30.0,
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: Okamoto regression
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_okamoto_regression() {
    let started = Instant::now();
    let x = okamoto(1.0, 1.0);
    let form = check_riccati_cp2(&x).unwrap().expect("accepted");

    let const_poly = |v: f64| {
        if v == 0.0 {
            MultiPoly::zero(&XYZ)
        } else {
            MultiPoly::constant(&XYZ, r(v))
        }
    };
    assert_eq!(form.p, const_poly(1.0));
    assert_eq!(form.big_a, const_poly(0.0));
    assert_eq!(form.big_b, const_poly(0.0));
    assert_eq!(form.big_c, const_poly(1.0));
    assert_eq!(form.big_d, const_poly(0.0));
    assert_eq!(form.big_e, const_poly(-1.0));
    assert_eq!(form.a, const_poly(-1.0));
    assert_eq!(form.b, const_poly(-1.0));
    assert_eq!(form.c, const_poly(0.0));

    // Transverse at 32 sampled finite base points.
    for k in 0..32 {
        let x0 = C64::from_polar(0.25 + 0.1 * k as f64, 0.39 * k as f64);
        let verdict = transversality_at(&x, Geometry::Cp2, x0).unwrap();
        assert!(verdict.is_transverse(), "not transverse at {x0}");
    }

    // The fiber over infinity is invariant.
    let fibers = invariant_fibers(&form.p, &x).unwrap();
    assert!(fibers.finite_fibers.is_empty());
    assert!(fibers.infinity_invariant);
    report(3, "Okamoto field: exact coefficients, transversality, infinity", started, 1.0);
}

// ---------------------------------------------------------------------------
// Criterion 4: possibility rejection suite
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_possibility_rejections() {
    let started = Instant::now();
    let mono = |e: [u32; 3], v: f64| MultiPoly::monomial(&XYZ, &e, r(v));
    let field = |q: MultiPoly, rr: MultiPoly| {
        PolyVectorField::new("affine", vec![MultiPoly::constant(&XYZ, ONE), q, rr]).unwrap()
    };

    // F != 0 at beta = 0, 1, 2: possibilities 4, 5, 6.
    let f4 = field(mono([0, 0, 2], 1.0), MultiPoly::zero(&XYZ));
    let f5 = field(mono([0, 0, 2], 1.0), mono([0, 1, 0], 1.0));
    let f6 = field(
        mono([0, 0, 2], 1.0).add(&mono([0, 1, 1], 0.5)).unwrap(),
        mono([0, 0, 2], 0.5),
    );
    for (f, poss) in [(&f4, 4u8), (&f5, 5), (&f6, 6)] {
        let rej = check_riccati_cp2(f).unwrap().unwrap_err();
        assert!(matches!(rej.constraint, RejectionConstraint::QHasZSquared));
        assert_eq!(rej.constraint.name(), "F != 0");
        assert_eq!(rej.possibility, Some(poss));
    }

    // beta > alpha.
    let fb = field(mono([0, 1, 0], 1.0), mono([0, 0, 2], 1.0));
    let rej = check_riccati_cp2(&fb).unwrap().unwrap_err();
    assert!(matches!(rej.constraint, RejectionConstraint::BetaExceedsAlpha));

    // Mismatched shared coefficients: f != D and d != E and e != 0.
    let fd = field(mono([0, 1, 1], 1.0), mono([0, 0, 2], 2.0));
    let rej = check_riccati_cp2(&fd).unwrap().unwrap_err();
    assert!(matches!(rej.constraint, RejectionConstraint::SharedDMismatch));
    assert_eq!(rej.constraint.name(), "f != D");

    let fe = field(mono([0, 2, 0], 1.0), mono([0, 1, 1], 0.5));
    let rej = check_riccati_cp2(&fe).unwrap().unwrap_err();
    assert!(matches!(rej.constraint, RejectionConstraint::SharedEMismatch));
    assert_eq!(rej.constraint.name(), "d != E");

    let fy = field(
        mono([0, 2, 0], 1.0),
        mono([0, 1, 1], 1.0).add(&mono([0, 2, 0], 1.0)).unwrap(),
    );
    let rej = check_riccati_cp2(&fy).unwrap().unwrap_err();
    assert!(matches!(rej.constraint, RejectionConstraint::RHasYSquared));
    assert_eq!(rej.constraint.name(), "e != 0");

    // Tangency witness at (x0, u = 0, v0) for the rejected fields, as in
    // the contradiction arguments.
    for f in [&f4, &f5, &fb, &fd] {
        let verdict = transversality_at(f, Geometry::Cp2, r(0.7)).unwrap();
        match verdict {
            TransversalityVerdict::Tangent { chart, witness }
            | TransversalityVerdict::Singular { chart, witness } => {
                assert!(chart == "cp2_u" || chart == "cp2_t", "chart {chart}");
                // Witness on the locus where the cleared base component
                // vanishes: the inverted coordinate is zero.
                assert!(witness[1].norm() < 1e-10);
            }
            TransversalityVerdict::Transverse => panic!("rejected field reported transverse"),
        }
    }
    report(4, "possibility 4/5/6 violations rejected with named constraints", started, 5.0);
}

// ---------------------------------------------------------------------------
// Criterion 5: local-model holonomy oracle suite
// ---------------------------------------------------------------------------

/// Exponent draws keep |param| <= 2 with a capped imaginary part so the
/// multiplier ratios stay inside the numerically fittable range.
fn random_exponent(rng: &mut ChaCha8Rng) -> C64 {
    c(
        rng.random_range(-1.8..1.8),
        rng.random_range(-0.35..0.35),
    )
}

fn random_annulus(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> C64 {
    C64::from_polar(
        rng.random_range(lo..hi),
        rng.random_range(0.0..(2.0 * std::f64::consts::PI)),
    )
}

#[test]
fn criterion_5_local_model_holonomy_oracles() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = LiftOptions::default();
    let sample_triples: Vec<[C64; 3]> = vec![
        [ZERO, ZERO, ONE],
        [ONE, ZERO, ZERO],
        [ZERO, ONE, ZERO],
        [ONE, ONE, ONE],
        [ONE, c(0.0, 0.5), c(-0.75, 0.0)],
        [c(0.5, 0.0), -ONE, c(0.0, 0.3)],
        [c(0.2, -0.4), c(0.8, 0.1), ONE],
        [c(-0.6, 0.2), ONE, c(0.4, 0.7)],
    ];
    for case in ['a', 'b', 'c', 'd', 'e'] {
        for _ in 0..50 {
            let model = match case {
                'a' => LocalModel::CaseA {
                    center: ZERO,
                    mu: random_annulus(&mut rng, 0.2, 2.0),
                },
                'b' => {
                    let mu = random_annulus(&mut rng, 0.2, 2.0);
                    LocalModel::CaseB {
                        center: ZERO,
                        lambda: riccati::matrix::alpha_from_lambda(mu, 0).unwrap(),
                        nu: random_annulus(&mut rng, 0.05, 2.0),
                        mu,
                    }
                }
                'c' => LocalModel::CaseC {
                    center: ZERO,
                    alpha1: random_exponent(&mut rng),
                    alpha2: random_exponent(&mut rng),
                },
                'd' => LocalModel::CaseD {
                    center: ZERO,
                    alpha2: random_exponent(&mut rng),
                },
                _ => LocalModel::CaseE {
                    center: ZERO,
                    nu: random_annulus(&mut rng, 0.05, 2.0),
                },
            };
            model.validate().unwrap();
            let field = local_model_field(&model);
            let circle = LoopPath::circle(ZERO, 0.5).unwrap();
            let numeric = numeric_holonomy(&field, &circle, &opts).unwrap();
            assert!(
                numeric.residual <= 1e-7,
                "case {case}: fit residual {}",
                numeric.residual
            );
            let analytic = analytic_holonomy(&model).embed();
            let mut sup = 0.0f64;
            for p in &sample_triples {
                let got = numeric.map.matrix().mul_vec(p);
                let want = analytic.mul_vec(p);
                sup = sup.max(chordal_distance(&got, &want));
            }
            assert!(sup <= 1e-6, "case {case}: sup distance {sup}");
        }
    }
    report(5, "five local models x 50 draws match the closed forms", started, 120.0);
}

// ---------------------------------------------------------------------------
// Criterion 6: monodromy product relation
// ---------------------------------------------------------------------------

fn random_x_poly(rng: &mut ChaCha8Rng, max_deg: usize, scale: f64) -> MultiPoly {
    let mut p = MultiPoly::zero(&XYZ);
    for d in 0..=max_deg {
        if rng.random_range(0.0..1.0) < 0.7 {
            let coef = random_unit_disk(rng, scale);
            p = p
                .add(&MultiPoly::monomial(&XYZ, &[d as u32, 0, 0], coef))
                .unwrap();
        }
    }
    p
}

fn random_theorem3_field(rng: &mut ChaCha8Rng, deg_p: usize) -> (PolyVectorField, Vec<C64>) {
    // Well-separated roots for p.
    let mut roots: Vec<C64> = Vec::new();
    while roots.len() < deg_p {
        let cand = random_unit_disk(rng, 1.8);
        if roots.iter().all(|z| (z - cand).norm() > 1.2) {
            roots.push(cand);
        }
    }
    let mut p = MultiPoly::constant(&XYZ, ONE);
    for root in &roots {
        let lin = MultiPoly::var(&XYZ, 0)
            .add(&MultiPoly::constant(&XYZ, -root))
            .unwrap();
        p = p.mul(&lin).unwrap();
    }
    let cdeg = deg_p.min(2);
    let big_a = random_x_poly(rng, cdeg, 0.3);
    let big_b = random_x_poly(rng, cdeg, 0.3);
    let big_c = random_x_poly(rng, cdeg, 0.3);
    let a = random_x_poly(rng, cdeg, 0.3);
    let b = random_x_poly(rng, cdeg, 0.3);
    let cc = random_x_poly(rng, cdeg, 0.3);
    // Quadratic coupling terms, small and only sometimes present.
    let (big_d, big_e) = if rng.random_range(0.0..1.0) < 0.5 {
        (
            random_x_poly(rng, 0, 0.2),
            random_x_poly(rng, 0, 0.2),
        )
    } else {
        (MultiPoly::zero(&XYZ), MultiPoly::zero(&XYZ))
    };
    let y = MultiPoly::var(&XYZ, 1);
    let z = MultiPoly::var(&XYZ, 2);
    let yy = y.mul(&y).unwrap();
    let yz = y.mul(&z).unwrap();
    let zz = z.mul(&z).unwrap();
    let q = big_a
        .add(&big_b.mul(&y).unwrap())
        .unwrap()
        .add(&big_c.mul(&z).unwrap())
        .unwrap()
        .add(&big_d.mul(&yz).unwrap())
        .unwrap()
        .add(&big_e.mul(&yy).unwrap())
        .unwrap();
    let rr = a
        .add(&b.mul(&y).unwrap())
        .unwrap()
        .add(&cc.mul(&z).unwrap())
        .unwrap()
        .add(&big_e.mul(&yz).unwrap())
        .unwrap()
        .add(&big_d.mul(&zz).unwrap())
        .unwrap();
    (
        PolyVectorField::new("affine", vec![p, q, rr]).unwrap(),
        roots,
    )
}

#[test]
fn criterion_6_monodromy_product_relation() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // The product compounds the error of up to four lifted generators, so
    // integrate tighter than the 1e-6 identity threshold.
    let opts = LiftOptions {
        tol: 1e-11,
        ..LiftOptions::default()
    };
    for trial in 0..20 {
        let deg_p = 1 + trial % 3;
        let (field, roots) = random_theorem3_field(&mut rng, deg_p);
        // Base point away from the roots.
        let far = roots.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        let base = loop {
            let cand = C64::from_polar(
                far + rng.random_range(0.8..1.4),
                rng.random_range(0.0..(2.0 * std::f64::consts::PI)),
            );
            if roots.iter().all(|z| (z - cand).norm() > 0.6) {
                break cand;
            }
        };
        let gens = holonomy_generators(&field, base, &opts).unwrap();
        assert!(gens.len() >= roots.len());
        let product = generator_product(&gens);
        let distance = projective_distance(&product, &Mat3::identity());
        assert!(
            distance <= 1e-6,
            "trial {trial} (deg {deg_p}, {} generators): product distance {distance}",
            gens.len()
        );
    }
    report(6, "20 random fields: ordered generator product is the identity", started, 300.0);
}

// ---------------------------------------------------------------------------
// Criterion 7: synthesis end to end
// ---------------------------------------------------------------------------

fn random_generator_of_type(rng: &mut ChaCha8Rng, t: PaperType) -> ProjMap {
    let (l0, l1, l2) = loop {
        let draw = |rng: &mut ChaCha8Rng| random_annulus(rng, 0.4, 2.0);
        let l0 = draw(rng);
        let l1 = draw(rng);
        let l2 = draw(rng);
        if (l0 - l1).norm() > 0.3 && (l0 - l2).norm() > 0.3 && (l1 - l2).norm() > 0.3 {
            break (l0, l1, l2);
        }
    };
    let case = match t {
        PaperType::P3 => JordanCase::I,
        PaperType::P1R2 => JordanCase::II1,
        PaperType::P2 => JordanCase::II2,
        PaperType::Identity => JordanCase::III1,
        PaperType::R2 => JordanCase::III2,
        PaperType::P1 => JordanCase::III3,
    };
    let j = jordan_shape(case, l0, l1, l2);
    let p0 = random_conjugator(rng, 20.0);
    let m = p0.inverse().unwrap().mul(&j).mul(&p0);
    pm(m)
}

#[test]
fn criterion_7_synthesis_end_to_end() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = SynthesisOptions::default();
    use PaperType::*;
    let runs: Vec<Vec<PaperType>> = vec![
        vec![P1],
        vec![P2],
        vec![P3],
        vec![R2],
        vec![P1R2],
        vec![P1, P2],
        vec![P3, R2],
        vec![P1R2, P3],
        vec![P1, P2, P3],
        vec![R2, P1R2, P1],
    ];
    for types in runs {
        let gens: Vec<ProjMap> = types
            .iter()
            .map(|t| random_generator_of_type(&mut rng, *t))
            .collect();
        let result = verify_synthesis(&gens, &opts).unwrap();
        for check in &result.generators {
            assert!(
                check.analytic_error <= 1e-10,
                "types {types:?}: analytic error {} on generator {}",
                check.analytic_error,
                check.index
            );
            assert!(
                check.numeric_error <= 1e-6,
                "types {types:?}: numeric error {} on generator {}",
                check.numeric_error,
                check.index
            );
        }
        assert!(
            result.product_error <= 1e-8,
            "types {types:?}: product error {}",
            result.product_error
        );
        assert!(result.passed);
        // Input generators carry their requested types.
        for (check, want) in result.generators.iter().skip(1).zip(&types) {
            assert_eq!(check.paper_type, *want);
        }
    }
    report(7, "synthesis verified for k in 1..3 across all five types", started, 180.0);
}

// ---------------------------------------------------------------------------
// Criterion 8: gluing-leaf constancy
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_gluing_leaf_constancy() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let disk_r = 1.0;
    let anchor_radius = disk_r / 2.0;
    let opts = LiftOptions::default();
    for leaf in 0..10 {
        let model = if leaf % 2 == 0 {
            LocalModel::CaseC {
                center: ZERO,
                alpha1: c(rng.random_range(-0.5..0.5), rng.random_range(-0.2..0.2)),
                alpha2: c(rng.random_range(-0.5..0.5), rng.random_range(-0.2..0.2)),
            }
        } else {
            LocalModel::CaseE {
                center: ZERO,
                nu: random_unit_disk(&mut rng, 1.0),
            }
        };
        let field = local_model_field(&model);
        let u0 = random_unit_disk(&mut rng, 1.0);
        let v0 = random_unit_disk(&mut rng, 1.0);
        // Walk the leaf along the anchored circle of radius r/2 in steps,
        // staying inside the slit annulus.
        let angles = [0.4, 0.9, 1.4, 1.9, 2.4];
        let mut prev_angle = 0.0f64;
        let mut current: [C64; 3] = [u0, v0, ONE];
        for &angle in &angles {
            let segment = Segment::Arc {
                center: ZERO,
                radius: anchor_radius,
                theta0: prev_angle,
                theta1: angle,
            };
            let (end, _) = lift_fiber_point(&field, &[segment], &current, &opts).unwrap();
            current = end;
            prev_angle = angle;
            let x_t = C64::from_polar(anchor_radius, angle);
            // Affine chart coordinates of the lifted point.
            let u = current[0] / current[2];
            let v = current[1] / current[2];
            let glue = gluing_map(&model, x_t, disk_r).unwrap();
            let pulled = glue.inverse().unwrap().apply(&[u, v]);
            let drift = (pulled[0] - u0).norm().max((pulled[1] - v0).norm());
            assert!(
                drift <= 1e-7,
                "leaf {leaf} case {}: gluing coordinates drift {drift}",
                model.case_label()
            );
        }
    }
    report(8, "gluing coordinates constant along ten integrated leaves", started, 60.0);
}

// ---------------------------------------------------------------------------
// Criterion 9: polydisk checker at n = 1, 2, 3
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_polydisk_checker() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    for trial in 0..100 {
        let n = 1 + trial % 3;
        let arity = n + 1;
        let names: Vec<String> = std::iter::once("x".to_string())
            .chain((1..=n).map(|k| format!("y{k}")))
            .collect();
        let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let x_poly = |rng: &mut ChaCha8Rng| {
            let mut p = MultiPoly::zero(&name_refs);
            for d in 0..=2u32 {
                if rng.random_range(0.0..1.0) < 0.6 {
                    let mut e = vec![0u32; arity];
                    e[0] = d;
                    p = p
                        .add(&MultiPoly::monomial(
                            &name_refs,
                            &e,
                            random_unit_disk(rng, 0.8),
                        ))
                        .unwrap();
                }
            }
            p
        };
        // Conforming field.
        let mut comps = vec![x_poly(&mut rng)
            .add(&MultiPoly::constant(&name_refs, ONE))
            .unwrap()];
        for j in 1..=n {
            let mut comp = MultiPoly::zero(&name_refs);
            for k in 0..=2u32 {
                let mut e = vec![0u32; arity];
                e[j] = k;
                let coef_poly = x_poly(&mut rng);
                let mono = MultiPoly::monomial(&name_refs, &e, ONE);
                comp = comp.add(&coef_poly.mul(&mono).unwrap()).unwrap();
            }
            comps.push(comp);
        }
        let field = PolyVectorField::new("affine", comps.clone()).unwrap();
        let form = check_riccati_cn(&field, n).unwrap().expect("conforming");
        let re = form.reassemble();
        for (a, b) in re.components.iter().zip(&field.components) {
            assert_eq!(a, b, "reassembly must be exact");
        }
        accepted += 1;

        // Violating fields: a cubic term or a cross-variable term.
        let bad_coord = 1 + (trial % n);
        let mut bad = comps.clone();
        if trial % 2 == 0 {
            let mut e = vec![0u32; arity];
            e[bad_coord] = 3;
            bad[bad_coord] = bad[bad_coord]
                .add(&MultiPoly::monomial(&name_refs, &e, r(0.7)))
                .unwrap();
            let rej = check_riccati_cn(
                &PolyVectorField::new("affine", bad).unwrap(),
                n,
            )
            .unwrap()
            .unwrap_err();
            match rej.constraint {
                RejectionConstraint::DegreeExceedsTwo { coord } => {
                    assert_eq!(coord, bad_coord);
                    assert_eq!(
                        rej.constraint.name(),
                        format!("deg_y{bad_coord}(Q_{bad_coord}) <= 2")
                    );
                }
                other => panic!("expected degree constraint, got {other:?}"),
            }
        } else {
            let other_coord = 1 + (bad_coord % n.max(1));
            if other_coord != bad_coord {
                let mut e = vec![0u32; arity];
                e[other_coord] = 1;
                bad[bad_coord] = bad[bad_coord]
                    .add(&MultiPoly::monomial(&name_refs, &e, r(0.5)))
                    .unwrap();
                let rej = check_riccati_cn(
                    &PolyVectorField::new("affine", bad).unwrap(),
                    n,
                )
                .unwrap()
                .unwrap_err();
                assert!(matches!(
                    rej.constraint,
                    RejectionConstraint::CrossVariable { .. }
                ));
            } else {
                // n = 1 has no cross variable; use the base instead.
                let mut e = vec![0u32; arity];
                e[1] = 1;
                bad[0] = bad[0]
                    .add(&MultiPoly::monomial(&name_refs, &e, r(0.5)))
                    .unwrap();
                let rej = check_riccati_cn(
                    &PolyVectorField::new("affine", bad).unwrap(),
                    n,
                )
                .unwrap()
                .unwrap_err();
                assert!(matches!(
                    rej.constraint,
                    RejectionConstraint::BaseDependsOnFiber
                ));
            }
        }
        rejected += 1;
    }
    assert_eq!(accepted, 100);
    assert_eq!(rejected, 100);
    report(9, "polydisk checker: 100 accepted exactly, 100 rejected by name", started, 10.0);
}
