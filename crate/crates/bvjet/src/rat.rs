//! Sparse multivariate polynomials and rational functions over the rationals.
//!
//! This is the coefficient field of the whole crate: exact rational functions
//! of the base coordinates `x1..xd` and of named formal parameters (`B`, ...).
//! Equality is decided by cross multiplication; gcd-based reduction is a size
//! control pass and is never required for correctness.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Variable context: coordinate names first, then parameter names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    names: Vec<String>,
    n_coords: usize,
}

impl Context {
    pub fn new(coords: &[&str], params: &[&str]) -> Arc<Context> {
        let mut names: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
        names.extend(params.iter().map(|s| s.to_string()));
        Arc::new(Context {
            names,
            n_coords: coords.len(),
        })
    }

    /// Standard context with coordinates `x1..xd` plus the given parameters.
    pub fn coords(d: usize, params: &[&str]) -> Arc<Context> {
        let names: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        Context::new(&refs, params)
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn n_coords(&self) -> usize {
        self.n_coords
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Exponent vector, fixed length = number of context variables.
pub type Mono = Vec<u16>;

/// Sparse multivariate polynomial with arbitrary-precision rational coefficients.
///
/// Invariant: no zero coefficients are stored; term order is the lexicographic
/// order of exponent vectors, fixed by the `BTreeMap`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub n_vars: usize,
    pub terms: BTreeMap<Mono, BigRational>,
}

impl Poly {
    pub fn zero(n_vars: usize) -> Poly {
        Poly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: BigRational) -> Poly {
        let mut p = Poly::zero(n_vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; n_vars], c);
        }
        p
    }

    pub fn one(n_vars: usize) -> Poly {
        Poly::constant(n_vars, BigRational::one())
    }

    pub fn from_int(n_vars: usize, c: i64) -> Poly {
        Poly::constant(n_vars, BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(n_vars: usize, i: usize) -> Poly {
        let mut m = vec![0u16; n_vars];
        m[i] = 1;
        let mut p = Poly::zero(n_vars);
        p.terms.insert(m, BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    /// The constant term (zero if absent).
    pub fn constant_term(&self) -> BigRational {
        self.terms
            .get(&vec![0u16; self.n_vars])
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    fn insert_term(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.n_vars, other.n_vars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.n_vars, other.n_vars);
        let mut out = Poly::zero(self.n_vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m: Mono = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                out.insert_term(m, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.n_vars);
        }
        Poly {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one(self.n_vars);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Formal partial derivative with respect to variable `i`.
    pub fn d_var(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.n_vars);
        for (m, c) in &self.terms {
            let e = m[i];
            if e > 0 {
                let mut m2 = m.clone();
                m2[i] = e - 1;
                out.insert_term(m2, c * BigRational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Componentwise minimum of all exponent vectors (the monomial content).
    fn mono_content(&self) -> Mono {
        let mut it = self.terms.keys();
        let first = match it.next() {
            Some(m) => m.clone(),
            None => return vec![0; self.n_vars],
        };
        it.fold(first, |acc, m| {
            acc.iter().zip(m).map(|(a, b)| (*a).min(*b)).collect()
        })
    }

    fn div_mono(&self, m: &Mono) -> Poly {
        Poly {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.iter().zip(m).map(|(a, b)| a - b).collect(), c.clone()))
                .collect(),
        }
    }

    /// Leading coefficient in the fixed term order.
    fn leading_coeff(&self) -> BigRational {
        self.terms
            .iter()
            .next_back()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// The set of variables actually occurring.
    fn used_vars(&self) -> Vec<usize> {
        let mut used = vec![false; self.n_vars];
        for m in self.terms.keys() {
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    used[i] = true;
                }
            }
        }
        (0..self.n_vars).filter(|&i| used[i]).collect()
    }

    /// Dense univariate coefficient list in variable `i`, constant term first.
    fn univariate_coeffs(&self, i: usize) -> Vec<BigRational> {
        let deg = self.terms.keys().map(|m| m[i]).max().unwrap_or(0) as usize;
        let mut out = vec![BigRational::zero(); deg + 1];
        for (m, c) in &self.terms {
            out[m[i] as usize] += c;
        }
        out
    }

    fn from_univariate(n_vars: usize, i: usize, coeffs: &[BigRational]) -> Poly {
        let mut p = Poly::zero(n_vars);
        for (e, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut m = vec![0u16; n_vars];
                m[i] = e as u16;
                p.insert_term(m, c.clone());
            }
        }
        p
    }
}

/// Monic gcd of two dense univariate coefficient lists (Euclid over Q).
fn univariate_gcd(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
        while v.last().map(|c| c.is_zero()).unwrap_or(false) {
            v.pop();
        }
        v
    }
    fn rem(mut a: Vec<BigRational>, b: &[BigRational]) -> Vec<BigRational> {
        let db = b.len() - 1;
        let lb = b[db].clone();
        while a.len() >= b.len() && !a.is_empty() {
            let da = a.len() - 1;
            let q = a[da].clone() / lb.clone();
            for k in 0..=db {
                let t = q.clone() * b[k].clone();
                a[da - db + k] -= t;
            }
            a = trim(a);
        }
        a
    }
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = rem(a, &b);
        a = b;
        b = r;
    }
    if a.is_empty() {
        return a;
    }
    let lead = a.last().unwrap().clone();
    a.into_iter().map(|c| c / lead.clone()).collect()
}

/// Exact univariate division, assuming divisibility. Returns None otherwise.
fn univariate_div(a: &[BigRational], b: &[BigRational]) -> Option<Vec<BigRational>> {
    if b.is_empty() {
        return None;
    }
    let mut a = a.to_vec();
    while a.last().map(|c| c.is_zero()).unwrap_or(false) {
        a.pop();
    }
    let db = b.len() - 1;
    let lb = &b[db];
    if a.is_empty() {
        return Some(vec![]);
    }
    if a.len() < b.len() {
        return None;
    }
    let mut q = vec![BigRational::zero(); a.len() - db];
    while a.len() >= b.len() && !a.is_empty() {
        let da = a.len() - 1;
        let c = a[da].clone() / lb.clone();
        q[da - db] = c.clone();
        for k in 0..=db {
            let t = c.clone() * b[k].clone();
            a[da - db + k] -= t;
        }
        while a.last().map(|x| x.is_zero()).unwrap_or(false) {
            a.pop();
        }
    }
    if a.is_empty() {
        Some(q)
    } else {
        None
    }
}

/// Rational function num/den in normalized representation.
///
/// Normalization cancels the common monomial content, a univariate gcd when
/// numerator and denominator share a single variable, and fixes the sign and
/// scale of the denominator. Values compare equal through [`Rat::eq_value`]
/// (cross multiplication) regardless of representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rat {
    pub num: Poly,
    pub den: Poly,
}

impl Rat {
    pub fn from_poly(num: Poly) -> Rat {
        let n = num.n_vars;
        Rat {
            num,
            den: Poly::one(n),
        }
        .reduced()
    }

    pub fn zero(n_vars: usize) -> Rat {
        Rat::from_poly(Poly::zero(n_vars))
    }

    pub fn one(n_vars: usize) -> Rat {
        Rat::from_poly(Poly::one(n_vars))
    }

    pub fn from_int(n_vars: usize, c: i64) -> Rat {
        Rat::from_poly(Poly::from_int(n_vars, c))
    }

    pub fn from_rational(n_vars: usize, c: BigRational) -> Rat {
        Rat::from_poly(Poly::constant(n_vars, c))
    }

    pub fn var(n_vars: usize, i: usize) -> Rat {
        Rat::from_poly(Poly::var(n_vars, i))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    /// True when the value is constant in the coordinates (parameters allowed).
    pub fn is_coord_constant(&self, n_coords: usize) -> bool {
        (0..n_coords).all(|i| self.d_coord(i).is_zero())
    }

    fn reduced(mut self) -> Rat {
        assert!(!self.den.is_zero(), "zero denominator");
        if self.num.is_zero() {
            self.den = Poly::one(self.num.n_vars);
            return self;
        }
        // common monomial content
        let cn = self.num.mono_content();
        let cd = self.den.mono_content();
        let common: Mono = cn.iter().zip(&cd).map(|(a, b)| (*a).min(*b)).collect();
        if common.iter().any(|&e| e > 0) {
            self.num = self.num.div_mono(&common);
            self.den = self.den.div_mono(&common);
        }
        // univariate gcd when both sides live in one shared variable
        let un = self.num.used_vars();
        let ud = self.den.used_vars();
        if un.len() <= 1 && ud.len() == 1 && (un.is_empty() || un == ud) {
            let i = ud[0];
            let g = univariate_gcd(
                &self.num.univariate_coeffs(i),
                &self.den.univariate_coeffs(i),
            );
            if g.len() > 1 {
                if let (Some(qn), Some(qd)) = (
                    univariate_div(&self.num.univariate_coeffs(i), &g),
                    univariate_div(&self.den.univariate_coeffs(i), &g),
                ) {
                    self.num = Poly::from_univariate(self.num.n_vars, i, &qn);
                    self.den = Poly::from_univariate(self.den.n_vars, i, &qd);
                }
            }
        }
        // scale so the denominator has leading coefficient 1
        let lc = self.den.leading_coeff();
        if !lc.is_one() {
            let inv = BigRational::one() / lc;
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
        self
    }

    pub fn add(&self, other: &Rat) -> Rat {
        if self.den == other.den {
            return Rat {
                num: self.num.add(&other.num),
                den: self.den.clone(),
            }
            .reduced();
        }
        Rat {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
        .reduced()
    }

    pub fn neg(&self) -> Rat {
        Rat {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Rat) -> Rat {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Rat) -> Rat {
        Rat {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
        .reduced()
    }

    pub fn scale_int(&self, k: i64) -> Rat {
        Rat {
            num: self.num.scale(&BigRational::from_integer(BigInt::from(k))),
            den: self.den.clone(),
        }
        .reduced()
    }

    pub fn scale(&self, c: &BigRational) -> Rat {
        Rat {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
        .reduced()
    }

    /// Exact division; fails on a zero divisor.
    pub fn div(&self, other: &Rat) -> Result<Rat, DivisionByZero> {
        if other.is_zero() {
            return Err(DivisionByZero);
        }
        Ok(Rat {
            num: self.num.mul(&other.den),
            den: self.den.mul(&other.num),
        }
        .reduced())
    }

    pub fn pow(&self, e: u32) -> Rat {
        Rat {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
        .reduced()
    }

    /// Formal partial derivative with respect to coordinate `i` (quotient rule).
    pub fn d_coord(&self, i: usize) -> Rat {
        let n = self.num.d_var(i).mul(&self.den).sub(&self.num.mul(&self.den.d_var(i)));
        Rat {
            num: n,
            den: self.den.mul(&self.den),
        }
        .reduced()
    }

    /// Value equality by cross multiplication, exact.
    pub fn eq_value(&self, other: &Rat) -> bool {
        self.num.mul(&other.den).sub(&other.num.mul(&self.den)).is_zero()
    }

    /// Total order on representations (used for deterministic term maps).
    pub fn cmp_repr(&self, other: &Rat) -> Ordering {
        let key = |p: &Poly| -> Vec<(Mono, BigRational)> {
            p.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect()
        };
        key(&self.num)
            .cmp(&key(&other.num))
            .then_with(|| key(&self.den).cmp(&key(&other.den)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("division by the zero polynomial")]
pub struct DivisionByZero;

fn fmt_coeff(c: &BigRational) -> String {
    if c.denom().is_one() {
        format!("{}", c.numer())
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Renders one polynomial with names from the context.
pub fn poly_to_string(p: &Poly, ctx: &Context) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (m, c) in &p.terms {
        let mut factors = Vec::new();
        for (i, &e) in m.iter().enumerate() {
            if e == 1 {
                factors.push(ctx.name(i).to_string());
            } else if e > 1 {
                factors.push(format!("{}^{}", ctx.name(i), e));
            }
        }
        let body = factors.join("*");
        let s = if body.is_empty() {
            fmt_coeff(c)
        } else if c.is_one() {
            body
        } else if (-c.clone()).is_one() {
            format!("-{body}")
        } else {
            format!("{}*{}", fmt_coeff(c), body)
        };
        parts.push(s);
    }
    let mut out = String::new();
    for (i, s) in parts.iter().enumerate() {
        if i == 0 {
            out.push_str(s);
        } else if let Some(rest) = s.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(s);
        }
    }
    out
}

pub fn rat_to_string(r: &Rat, ctx: &Context) -> String {
    if r.den.is_constant() && r.den.constant_term().is_one() {
        poly_to_string(&r.num, ctx)
    } else {
        let n = poly_to_string(&r.num, ctx);
        let d = poly_to_string(&r.den, ctx);
        let n = if r.num.terms.len() > 1 { format!("({n})") } else { n };
        format!("{n}/({d})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_coeff;

    fn ctx2() -> Arc<Context> {
        Context::coords(2, &["B"])
    }

    #[test]
    fn d_coord_examples() {
        let ctx = ctx2();
        let f = parse_coeff("x1^2", &ctx).unwrap();
        assert!(f.d_coord(0).eq_value(&parse_coeff("2*x1", &ctx).unwrap()));

        let g = parse_coeff("1/x1", &ctx).unwrap();
        assert!(g.d_coord(0).eq_value(&parse_coeff("0-1/x1^2", &ctx).unwrap()));

        let h = parse_coeff("B*x1*x2", &ctx).unwrap();
        assert!(h.d_coord(1).eq_value(&parse_coeff("B*x1", &ctx).unwrap()));
    }

    #[test]
    fn equality_by_cross_multiplication() {
        let ctx = ctx2();
        let a = parse_coeff("(x1+1)^2/(x1+1)", &ctx).unwrap();
        let b = parse_coeff("x1+1", &ctx).unwrap();
        assert!(a.eq_value(&b));

        let c = parse_coeff("x1/x2", &ctx).unwrap();
        let d = parse_coeff("x2/x1", &ctx).unwrap();
        assert!(!c.eq_value(&d));

        let e = parse_coeff("(x1^2-x2^2)/(x1-x2)", &ctx).unwrap();
        let f = parse_coeff("x1+x2", &ctx).unwrap();
        assert!(e.eq_value(&f));
    }

    #[test]
    fn mixed_partials_commute() {
        let ctx = ctx2();
        let f = parse_coeff("(x1^2*x2 + B*x1/(1+x2))", &ctx).unwrap();
        let a = f.d_coord(0).d_coord(1);
        let b = f.d_coord(1).d_coord(0);
        assert!(a.eq_value(&b));
    }

    #[test]
    fn univariate_reduction_keeps_sizes_small() {
        let ctx = ctx2();
        let f = parse_coeff("x2^3/x2", &ctx).unwrap();
        assert!(f.eq_value(&parse_coeff("x2^2", &ctx).unwrap()));
        assert!(f.den.is_constant());
    }

    proptest::proptest! {
        #[test]
        fn field_axioms(a in arb_rat(), b in arb_rat(), c in arb_rat()) {
            // associativity and distributivity
            let l = a.mul(&b).mul(&c);
            let r = a.mul(&b.mul(&c));
            proptest::prop_assert!(l.eq_value(&r));
            let l = a.mul(&b.add(&c));
            let r = a.mul(&b).add(&a.mul(&c));
            proptest::prop_assert!(l.eq_value(&r));
            // inverses of nonzero values
            if !a.is_zero() {
                let inv = Rat::one(a.num.n_vars).div(&a).unwrap();
                proptest::prop_assert!(a.mul(&inv).eq_value(&Rat::one(a.num.n_vars)));
            }
        }

        #[test]
        fn leibniz_rule(a in arb_rat(), b in arb_rat()) {
            let l = a.mul(&b).d_coord(0);
            let r = a.d_coord(0).mul(&b).add(&a.mul(&b.d_coord(0)));
            proptest::prop_assert!(l.eq_value(&r));
        }
    }

    fn arb_rat() -> impl proptest::strategy::Strategy<Value = Rat> {
        use proptest::prelude::*;
        let term = (0u16..3, 0u16..2, 0u16..2, -3i64..4).prop_map(|(e1, e2, ep, c)| {
            let mut p = Poly::zero(3);
            p.insert_term(vec![e1, e2, ep], BigRational::from_integer(BigInt::from(c)));
            p
        });
        let poly = proptest::collection::vec(term, 1..4)
            .prop_map(|ts| ts.into_iter().fold(Poly::zero(3), |acc, t| acc.add(&t)));
        (poly.clone(), poly).prop_map(|(n, d)| {
            let den = if d.is_zero() { Poly::one(3) } else { d };
            Rat { num: n, den }.reduced()
        })
    }
}
