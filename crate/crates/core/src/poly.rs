//! Sparse multivariate polynomials over C and polynomial vector fields in
//! affine charts, with the fiber-chart and base-chart changes (including
//! pole clearing by the minimal power of the new coordinate).

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::matrix::C64;

/// Coefficients below this absolute size are dropped on normalization.
pub const COEF_DROP: f64 = 1e-14;

const ZERO: C64 = Complex64::new(0.0, 0.0);
const ONE: C64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("arity mismatch: {left} vs {right} variables")]
    ArityMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for arity {arity}")]
    VariableOutOfRange { index: usize, arity: usize },
    #[error("non-finite coefficient")]
    NonFinite,
}

/// Sparse multivariate polynomial; exponent vectors are keyed in a
/// BTreeMap so iteration order (and hence all derived output) is
/// deterministic. Variables are positional; names are metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, C64>,
}

impl MultiPoly {
    pub fn zero(vars: &[&str]) -> Self {
        MultiPoly {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            terms: BTreeMap::new(),
        }
    }

    pub fn zero_named(vars: Vec<String>) -> Self {
        MultiPoly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[&str], c: C64) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; p.arity()], c);
        p
    }

    /// Monomial c * prod(var_i ^ exp_i).
    pub fn monomial(vars: &[&str], exps: &[u32], c: C64) -> Self {
        assert_eq!(vars.len(), exps.len(), "exponent vector arity");
        let mut p = Self::zero(vars);
        p.add_term(exps.to_vec(), c);
        p
    }

    /// The variable `index` as a polynomial.
    pub fn var(vars: &[&str], index: usize) -> Self {
        let mut e = vec![0u32; vars.len()];
        e[index] = 1;
        Self::monomial(vars, &e, ONE)
    }

    pub fn from_terms(
        vars: Vec<String>,
        terms: impl IntoIterator<Item = (Vec<u32>, C64)>,
    ) -> Result<Self, PolyError> {
        let mut p = MultiPoly {
            vars,
            terms: BTreeMap::new(),
        };
        for (e, c) in terms {
            if e.len() != p.arity() {
                return Err(PolyError::ArityMismatch {
                    left: p.arity(),
                    right: e.len(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(PolyError::NonFinite);
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, e: Vec<u32>, c: C64) {
        let entry = self.terms.entry(e).or_insert(ZERO);
        *entry += c;
        if entry.norm() < COEF_DROP {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.norm() < COEF_DROP)
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    /// Drop all coefficients below the threshold.
    pub fn normalized(mut self) -> Self {
        self.terms.retain(|_, c| c.norm() >= COEF_DROP);
        self
    }

    fn check_arity(&self, other: &MultiPoly) -> Result<(), PolyError> {
        if self.arity() != other.arity() {
            return Err(PolyError::ArityMismatch {
                left: self.arity(),
                right: other.arity(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            let entry = out.terms.entry(e.clone()).or_insert(ZERO);
            *entry += c;
        }
        Ok(out.normalized())
    }

    pub fn sub(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, s: C64) -> MultiPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.normalized()
    }

    pub fn mul(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check_arity(other)?;
        let mut out = MultiPoly {
            vars: self.vars.clone(),
            terms: BTreeMap::new(),
        };
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = out.terms.entry(e).or_insert(ZERO);
                *entry += ca * cb;
            }
        }
        Ok(out.normalized())
    }

    /// Multiply by var_index ^ power.
    pub fn mul_var_power(&self, index: usize, power: u32) -> MultiPoly {
        let mut out = MultiPoly {
            vars: self.vars.clone(),
            terms: BTreeMap::new(),
        };
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[index] += power;
            out.terms.insert(e2, *c);
        }
        out
    }

    pub fn eval(&self, point: &[C64]) -> Result<C64, PolyError> {
        if point.len() != self.arity() {
            return Err(PolyError::ArityMismatch {
                left: self.arity(),
                right: point.len(),
            });
        }
        let mut acc = ZERO;
        for (e, c) in &self.terms {
            let mut term = *c;
            for (x, &k) in point.iter().zip(e) {
                term *= x.powu(k);
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Degree in one variable; the zero polynomial has degree -1.
    pub fn deg_in(&self, index: usize) -> Result<i64, PolyError> {
        if index >= self.arity() {
            return Err(PolyError::VariableOutOfRange {
                index,
                arity: self.arity(),
            });
        }
        Ok(self
            .terms
            .keys()
            .map(|e| e[index] as i64)
            .max()
            .unwrap_or(-1))
    }

    /// Maximum total degree over a set of variables; -1 for zero.
    pub fn total_deg_in(&self, indices: &[usize]) -> i64 {
        self.terms
            .keys()
            .map(|e| indices.iter().map(|&i| e[i] as i64).sum())
            .max()
            .unwrap_or(-1)
    }

    /// Coefficient of a monomial in a subset of variables: collects the
    /// terms whose exponents in `indices` match `pattern` exactly, as a
    /// polynomial in the remaining variables (same arity, zero exponents
    /// on `indices`).
    pub fn coefficient_of(&self, indices: &[usize], pattern: &[u32]) -> MultiPoly {
        let mut out = MultiPoly {
            vars: self.vars.clone(),
            terms: BTreeMap::new(),
        };
        'term: for (e, c) in &self.terms {
            for (&i, &want) in indices.iter().zip(pattern) {
                if e[i] != want {
                    continue 'term;
                }
            }
            let mut e2 = e.clone();
            for &i in indices {
                e2[i] = 0;
            }
            out.terms.insert(e2, *c);
        }
        out
    }

    /// Substitute a value for one variable, keeping arity (the variable's
    /// exponent is consumed).
    pub fn eval_var(&self, index: usize, value: C64) -> MultiPoly {
        let mut out = MultiPoly {
            vars: self.vars.clone(),
            terms: BTreeMap::new(),
        };
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[index];
            e2[index] = 0;
            let coef = c * value.powu(k);
            let entry = out.terms.entry(e2).or_insert(ZERO);
            *entry += coef;
        }
        out.normalized()
    }

    /// Univariate coefficient list in `index` with everything else
    /// evaluated away (callers ensure the rest is constant).
    pub fn univariate_coeffs(&self, index: usize) -> Vec<C64> {
        let deg = self.deg_in(index).unwrap_or(-1);
        if deg < 0 {
            return vec![];
        }
        let mut coeffs = vec![ZERO; deg as usize + 1];
        for (e, c) in &self.terms {
            coeffs[e[index] as usize] += c;
        }
        coeffs
    }

    /// Render for diagnostics, e.g. "(1+0i) x^2 y".
    pub fn describe_monomial(&self, e: &[u32]) -> String {
        let mut s = String::new();
        for (i, &k) in e.iter().enumerate() {
            if k == 0 {
                continue;
            }
            if !s.is_empty() {
                s.push(' ');
            }
            s.push_str(&self.vars[i]);
            if k > 1 {
                s.push_str(&format!("^{k}"));
            }
        }
        if s.is_empty() {
            s.push('1');
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Laurent scratch representation for chart changes
// ---------------------------------------------------------------------------

/// Internal Laurent polynomial (signed exponents); chart substitutions
/// produce these before pole clearing.
#[derive(Clone, Debug)]
struct Laurent {
    arity: usize,
    terms: BTreeMap<Vec<i64>, C64>,
}

impl Laurent {
    fn new(arity: usize) -> Self {
        Laurent {
            arity,
            terms: BTreeMap::new(),
        }
    }

    fn add_term(&mut self, e: Vec<i64>, c: C64) {
        let entry = self.terms.entry(e).or_insert(ZERO);
        *entry += c;
    }

    fn min_exp(&self, index: usize) -> i64 {
        self.terms
            .iter()
            .filter(|(_, c)| c.norm() >= COEF_DROP)
            .map(|(e, _)| e[index])
            .min()
            .unwrap_or(0)
    }

    fn shift(&self, index: usize, by: i64) -> Laurent {
        let mut out = Laurent::new(self.arity);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[index] += by;
            out.terms.insert(e2, *c);
        }
        out
    }

    fn add(&self, other: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            let entry = out.terms.entry(e.clone()).or_insert(ZERO);
            *entry += c;
        }
        out
    }

    /// Multiply by the monomial with the given signed exponent vector.
    fn mul_monomial(&self, exps: &[i64], coef: C64) -> Laurent {
        let mut out = Laurent::new(self.arity);
        for (e, c) in &self.terms {
            let e2: Vec<i64> = e.iter().zip(exps).map(|(a, b)| a + b).collect();
            out.terms.insert(e2, c * coef);
        }
        out
    }

    fn into_poly(self, vars: Vec<String>) -> MultiPoly {
        let mut terms = BTreeMap::new();
        for (e, c) in self.terms {
            if c.norm() < COEF_DROP {
                continue;
            }
            let eu: Vec<u32> = e
                .iter()
                .map(|&x| u32::try_from(x).expect("cleared exponent must be nonnegative"))
                .collect();
            let entry = terms.entry(eu).or_insert(ZERO);
            *entry += c;
        }
        let mut p = MultiPoly { vars, terms };
        p.terms.retain(|_, c| c.norm() >= COEF_DROP);
        p
    }
}

// ---------------------------------------------------------------------------
// Vector fields and chart changes
// ---------------------------------------------------------------------------

/// Polynomial vector field in one affine chart; the first component is
/// the base direction, the rest the fiber directions.
#[derive(Clone, Debug)]
pub struct PolyVectorField {
    pub chart_id: String,
    pub components: Vec<MultiPoly>,
}

impl PolyVectorField {
    pub fn new(chart_id: &str, components: Vec<MultiPoly>) -> Result<Self, PolyError> {
        let arity = components
            .first()
            .map(|p| p.arity())
            .unwrap_or(0);
        for p in &components {
            if p.arity() != arity {
                return Err(PolyError::ArityMismatch {
                    left: arity,
                    right: p.arity(),
                });
            }
        }
        Ok(PolyVectorField {
            chart_id: chart_id.to_string(),
            components,
        })
    }

    pub fn arity(&self) -> usize {
        self.components.first().map(|p| p.arity()).unwrap_or(0)
    }

    pub fn eval(&self, point: &[C64]) -> Result<Vec<C64>, PolyError> {
        self.components.iter().map(|p| p.eval(point)).collect()
    }
}

/// Result of a chart change: the transformed field after multiplying by
/// the minimal power of the new variable that clears all poles.
#[derive(Clone, Debug)]
pub struct ChartChangeResult {
    pub field: PolyVectorField,
    pub clearing_exponent: u32,
}

/// Substitute, in every monomial of `p`, the inversion rules described by
/// `subst`: variable i maps to a Laurent monomial with coefficient 1 and
/// signed exponent vector subst[i].
fn substitute_monomials(p: &MultiPoly, subst: &[Vec<i64>]) -> Laurent {
    let arity = subst.first().map(|v| v.len()).unwrap_or(p.arity());
    let mut out = Laurent::new(arity);
    for (e, c) in p.terms() {
        let mut acc = vec![0i64; arity];
        for (i, &k) in e.iter().enumerate() {
            for (slot, delta) in acc.iter_mut().zip(&subst[i]) {
                *slot += delta * k as i64;
            }
        }
        out.add_term(acc, *c);
    }
    out
}

fn clear_and_pack(
    chart_id: &str,
    vars: Vec<String>,
    comps: Vec<Laurent>,
    clear_index: usize,
) -> ChartChangeResult {
    let k = comps
        .iter()
        .map(|l| l.min_exp(clear_index))
        .min()
        .unwrap_or(0)
        .min(0);
    let clearing = (-k) as u32;
    let field = PolyVectorField {
        chart_id: chart_id.to_string(),
        components: comps
            .into_iter()
            .map(|l| l.shift(clear_index, clearing as i64).into_poly(vars.clone()))
            .collect(),
    };
    ChartChangeResult {
        field,
        clearing_exponent: clearing,
    }
}

/// Fiber chart change on the projective-plane bundle: (x, y, z) to
/// (x, u, v) with u = 1/y, v = z/y. Before clearing, the u-component is
/// -u^2 Q(x, 1/u, v/u) and the v-component u R - u v Q.
pub fn fiber_chart_cp2(x: &PolyVectorField) -> Result<ChartChangeResult, PolyError> {
    if x.arity() != 3 || x.components.len() != 3 {
        return Err(PolyError::ArityMismatch {
            left: 3,
            right: x.arity(),
        });
    }
    // x -> x, y -> 1/u, z -> v/u in the (x, u, v) exponent basis.
    let subst = vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, -1, 1]];
    let p = substitute_monomials(&x.components[0], &subst);
    let q = substitute_monomials(&x.components[1], &subst);
    let r = substitute_monomials(&x.components[2], &subst);
    let u_comp = q.mul_monomial(&[0, 2, 0], -ONE);
    let v_comp = r
        .mul_monomial(&[0, 1, 0], ONE)
        .add(&q.mul_monomial(&[0, 1, 1], -ONE));
    let vars = vec!["x".to_string(), "u".to_string(), "v".to_string()];
    Ok(clear_and_pack("cp2_u", vars, vec![p, u_comp, v_comp], 1))
}

/// Second fiber chart: (x, t, s) with t = y/z, s = 1/z.
pub fn fiber_chart_cp2_second(x: &PolyVectorField) -> Result<ChartChangeResult, PolyError> {
    if x.arity() != 3 || x.components.len() != 3 {
        return Err(PolyError::ArityMismatch {
            left: 3,
            right: x.arity(),
        });
    }
    // x -> x, y -> t/s, z -> 1/s in the (x, t, s) exponent basis.
    let subst = vec![vec![1, 0, 0], vec![0, 1, -1], vec![0, 0, -1]];
    let p = substitute_monomials(&x.components[0], &subst);
    let q = substitute_monomials(&x.components[1], &subst);
    let r = substitute_monomials(&x.components[2], &subst);
    // t' = s Q - t s R, s' = -s^2 R.
    let t_comp = q
        .mul_monomial(&[0, 0, 1], ONE)
        .add(&r.mul_monomial(&[0, 1, 1], -ONE));
    let s_comp = r.mul_monomial(&[0, 0, 2], -ONE);
    let vars = vec!["x".to_string(), "t".to_string(), "s".to_string()];
    Ok(clear_and_pack("cp2_t", vars, vec![p, t_comp, s_comp], 2))
}

/// Polydisk chart change inverting fiber coordinate k (1-based among the
/// fiber variables): w_k = 1/y_k.
pub fn polydisk_chart_cn(x: &PolyVectorField, k: usize) -> Result<ChartChangeResult, PolyError> {
    let arity = x.arity();
    if k == 0 || k >= arity {
        return Err(PolyError::VariableOutOfRange { index: k, arity });
    }
    let mut subst = Vec::with_capacity(arity);
    for i in 0..arity {
        let mut e = vec![0i64; arity];
        e[i] = if i == k { -1 } else { 1 };
        subst.push(e);
    }
    let mut comps: Vec<Laurent> = Vec::with_capacity(arity);
    for (i, comp) in x.components.iter().enumerate() {
        let sub = substitute_monomials(comp, &subst);
        if i == k {
            // w_k' = -w_k^2 Q_k(..., 1/w_k, ...)
            let mut m = vec![0i64; arity];
            m[k] = 2;
            comps.push(sub.mul_monomial(&m, -ONE));
        } else {
            comps.push(sub);
        }
    }
    let mut vars: Vec<String> = (0..arity)
        .map(|i| {
            if i == 0 {
                "x".to_string()
            } else {
                format!("y{i}")
            }
        })
        .collect();
    vars[k] = format!("w{k}");
    Ok(clear_and_pack(
        &format!("cn_w{k}"),
        vars,
        comps,
        k,
    ))
}

/// Base chart change w = 1/x, fiber coordinates unchanged.
pub fn base_chart(x: &PolyVectorField) -> Result<ChartChangeResult, PolyError> {
    let arity = x.arity();
    if arity == 0 {
        return Err(PolyError::ArityMismatch { left: 1, right: 0 });
    }
    let mut subst = Vec::with_capacity(arity);
    for i in 0..arity {
        let mut e = vec![0i64; arity];
        e[i] = if i == 0 { -1 } else { 1 };
        subst.push(e);
    }
    let mut comps: Vec<Laurent> = Vec::with_capacity(arity);
    for (i, comp) in x.components.iter().enumerate() {
        let sub = substitute_monomials(comp, &subst);
        if i == 0 {
            let mut m = vec![0i64; arity];
            m[0] = 2;
            comps.push(sub.mul_monomial(&m, -ONE));
        } else {
            comps.push(sub);
        }
    }
    let mut vars: Vec<String> = x.components[0].vars().to_vec();
    if vars.len() == arity {
        vars[0] = "w".to_string();
    }
    Ok(clear_and_pack("base_w", vars, comps, 0))
}
