//! Canonical differential expressions in the fields and antifields.
//!
//! An expression is a sum of terms: an exact rational coefficient times a
//! graded monomial in jet variables, an integer (possibly negative) power of
//! the localizable even ghost, and optional odd symbols `eps` and `dt` of
//! square zero. Odd jet variables occur with exponent at most one; sorting odd
//! factors into the fixed order introduces Koszul signs.

use crate::rat::{rat_to_string, Rat};
use crate::roster::{GenId, Parity, Roster};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

/// A jet variable: the `order`-th total derivative of one field component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVar {
    pub gen: GenId,
    pub comp: usize,
    pub order: u32,
}

/// Canonical monomial data of one term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Term {
    /// Sorted by `JetVar`; odd variables carry exponent 1.
    pub vars: Vec<(JetVar, u32)>,
    /// Laurent power of the order-0 localizable ghost.
    pub gamma: i32,
    pub eps: bool,
    pub dt: bool,
}

impl Term {
    fn unit() -> Term {
        Term::default()
    }

    fn is_unit(&self) -> bool {
        self.vars.is_empty() && self.gamma == 0 && !self.eps && !self.dt
    }
}

/// Rank key ordering the odd factors of a term: odd jet variables in variable
/// order, then `eps`, then `dt`.
type OddRank = (u8, GenId, usize, u32);

fn odd_ranks(term: &Term, roster: &Roster) -> Vec<OddRank> {
    let mut out: Vec<OddRank> = term
        .vars
        .iter()
        .filter(|(v, _)| roster.parity(v.gen) == Parity::Odd)
        .map(|(v, _)| (0u8, v.gen, v.comp, v.order))
        .collect();
    if term.eps {
        out.push((1, 0, 0, 0));
    }
    if term.dt {
        out.push((2, 0, 0, 0));
    }
    out
}

/// Multiplies two canonical terms; returns the Koszul sign and the merged
/// term, or `None` when an odd square kills the product.
fn mul_terms(a: &Term, b: &Term, roster: &Roster) -> Option<(i8, Term)> {
    if (a.eps && b.eps) || (a.dt && b.dt) {
        return None;
    }
    // Koszul sign: inversions between the two sorted odd sequences.
    let ra = odd_ranks(a, roster);
    let rb = odd_ranks(b, roster);
    let mut inv = 0usize;
    for x in &ra {
        for y in &rb {
            if x == y {
                return None; // odd square
            }
            if x > y {
                inv += 1;
            }
        }
    }
    // merge variable lists
    let mut vars: Vec<(JetVar, u32)> = Vec::with_capacity(a.vars.len() + b.vars.len());
    let (mut i, mut j) = (0, 0);
    while i < a.vars.len() && j < b.vars.len() {
        match a.vars[i].0.cmp(&b.vars[j].0) {
            std::cmp::Ordering::Less => {
                vars.push(a.vars[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                vars.push(b.vars[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let v = a.vars[i].0;
                if roster.parity(v.gen) == Parity::Odd {
                    return None; // already caught above, kept for clarity
                }
                vars.push((v, a.vars[i].1 + b.vars[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    vars.extend_from_slice(&a.vars[i..]);
    vars.extend_from_slice(&b.vars[j..]);
    let sign = if inv % 2 == 0 { 1 } else { -1 };
    Some((
        sign,
        Term {
            vars,
            gamma: a.gamma + b.gamma,
            eps: a.eps || b.eps,
            dt: a.dt || b.dt,
        },
    ))
}

/// A canonical sum of terms over a fixed roster.
#[derive(Debug, Clone)]
pub struct Expr {
    pub roster: Arc<Roster>,
    pub terms: BTreeMap<Term, Rat>,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if self.terms.len() != other.terms.len() {
            return false;
        }
        self.terms
            .iter()
            .zip(other.terms.iter())
            .all(|((t1, c1), (t2, c2))| t1 == t2 && c1.eq_value(c2))
    }
}

impl Eq for Expr {}

impl Expr {
    pub fn zero(roster: &Arc<Roster>) -> Expr {
        Expr {
            roster: roster.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_coeff(roster: &Arc<Roster>, c: Rat) -> Expr {
        let mut e = Expr::zero(roster);
        e.add_term(Term::unit(), c);
        e
    }

    pub fn one(roster: &Arc<Roster>) -> Expr {
        Expr::from_coeff(roster, Rat::one(roster.ctx.n_vars()))
    }

    pub fn int(roster: &Arc<Roster>, k: i64) -> Expr {
        Expr::from_coeff(roster, Rat::from_int(roster.ctx.n_vars(), k))
    }

    /// The jet variable `d^order(gen_comp)` as an expression.
    ///
    /// Order 0 of the base coordinate yields the coordinate as a coefficient;
    /// order 0 of the localizable ghost yields a gamma power.
    pub fn jet(roster: &Arc<Roster>, gen: GenId, comp: usize, order: u32) -> Expr {
        if order == 0 && roster.is_base(gen) {
            return Expr::from_coeff(roster, Rat::var(roster.ctx.n_vars(), comp));
        }
        if order == 0 && roster.is_gamma(gen) {
            return Expr::gamma_pow(roster, 1);
        }
        let mut e = Expr::zero(roster);
        e.add_term(
            Term {
                vars: vec![(JetVar { gen, comp, order }, 1)],
                ..Term::default()
            },
            Rat::one(roster.ctx.n_vars()),
        );
        e
    }

    pub fn gen(roster: &Arc<Roster>, name: &str, comp: usize) -> Expr {
        let g = roster
            .gen_id(name)
            .unwrap_or_else(|| panic!("unknown generator `{name}`"));
        Expr::jet(roster, g, comp, 0)
    }

    pub fn gamma_pow(roster: &Arc<Roster>, k: i32) -> Expr {
        assert!(roster.gamma.is_some(), "roster has no localizable ghost");
        let mut e = Expr::zero(roster);
        e.add_term(
            Term {
                gamma: k,
                ..Term::default()
            },
            Rat::one(roster.ctx.n_vars()),
        );
        e
    }

    pub fn eps(roster: &Arc<Roster>) -> Expr {
        let mut e = Expr::zero(roster);
        e.add_term(
            Term {
                eps: true,
                ..Term::default()
            },
            Rat::one(roster.ctx.n_vars()),
        );
        e
    }

    pub fn dt_sym(roster: &Arc<Roster>) -> Expr {
        let mut e = Expr::zero(roster);
        e.add_term(
            Term {
                dt: true,
                ..Term::default()
            },
            Rat::one(roster.ctx.n_vars()),
        );
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub(crate) fn add_term(&mut self, t: Term, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(t) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        debug_assert!(Arc::ptr_eq(&self.roster, &other.roster));
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Expr {
        Expr {
            roster: self.roster.clone(),
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> Expr {
        let mut out = Expr::zero(&self.roster);
        for (t, k) in &self.terms {
            out.add_term(t.clone(), k.mul(c));
        }
        out
    }

    pub fn scale_int(&self, k: i64) -> Expr {
        self.scale(&Rat::from_int(self.roster.ctx.n_vars(), k))
    }

    /// Divides by an integer (exact).
    pub fn div_int(&self, k: i64) -> Expr {
        let c = Rat::one(self.roster.ctx.n_vars())
            .div(&Rat::from_int(self.roster.ctx.n_vars(), k))
            .expect("nonzero divisor");
        self.scale(&c)
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        debug_assert!(Arc::ptr_eq(&self.roster, &other.roster));
        let mut out = Expr::zero(&self.roster);
        for (t1, c1) in &self.terms {
            for (t2, c2) in &other.terms {
                if let Some((sign, t)) = mul_terms(t1, t2, &self.roster) {
                    let mut c = c1.mul(c2);
                    if sign < 0 {
                        c = c.neg();
                    }
                    out.add_term(t, c);
                }
            }
        }
        out
    }

    /// Product of a slice of expressions, left to right.
    pub fn prod(factors: &[&Expr]) -> Expr {
        assert!(!factors.is_empty());
        let mut acc = factors[0].clone();
        for f in &factors[1..] {
            acc = acc.mul(f);
        }
        acc
    }

    pub fn term_parity(&self, t: &Term) -> Parity {
        let mut bit = 0u32;
        for (v, e) in &t.vars {
            bit += self.roster.parity(v.gen).bit() as u32 * e;
        }
        if t.eps {
            bit += 1;
        }
        if t.dt {
            bit += 1;
        }
        Parity::from_bit((bit % 2) as u8)
    }

    pub fn term_ghost(&self, t: &Term) -> i64 {
        let mut gh = 0i64;
        for (v, e) in &t.vars {
            gh += self.roster.ghost(v.gen) * (*e as i64);
        }
        if let Some(g) = self.roster.gamma {
            gh += self.roster.ghost(g) * t.gamma as i64;
        }
        if t.eps {
            gh += self.roster.eps_ghost;
        }
        if t.dt {
            gh += self.roster.dt_ghost;
        }
        gh
    }

    /// Splits into homogeneous components keyed by (ghost, parity).
    pub fn grading(&self) -> BTreeMap<(i64, u8), Expr> {
        let mut out: BTreeMap<(i64, u8), Expr> = BTreeMap::new();
        for (t, c) in &self.terms {
            let key = (self.term_ghost(t), self.term_parity(t).bit());
            out.entry(key)
                .or_insert_with(|| Expr::zero(&self.roster))
                .add_term(t.clone(), c.clone());
        }
        out
    }

    /// Parity when homogeneous.
    pub fn parity(&self) -> Option<Parity> {
        let mut p = None;
        for t in self.terms.keys() {
            let tp = self.term_parity(t);
            match p {
                None => p = Some(tp),
                Some(q) if q != tp => return None,
                _ => {}
            }
        }
        p.or(Some(Parity::Even))
    }

    /// Ghost number when homogeneous (zero expression reports 0).
    pub fn ghost(&self) -> Option<i64> {
        let mut g = None;
        for t in self.terms.keys() {
            let tg = self.term_ghost(t);
            match g {
                None => g = Some(tg),
                Some(h) if h != tg => return None,
                _ => {}
            }
        }
        g.or(Some(0))
    }

    /// (even part, odd part).
    pub fn parity_parts(&self) -> (Expr, Expr) {
        let mut even = Expr::zero(&self.roster);
        let mut odd = Expr::zero(&self.roster);
        for (t, c) in &self.terms {
            match self.term_parity(t) {
                Parity::Even => even.add_term(t.clone(), c.clone()),
                Parity::Odd => odd.add_term(t.clone(), c.clone()),
            }
        }
        (even, odd)
    }

    /// Maximal jet order of (gen, comp) occurring in a monomial. Order-0
    /// coefficient dependence of the base coordinate is not counted here.
    pub fn max_order(&self, gen: GenId, comp: usize) -> Option<u32> {
        self.terms
            .keys()
            .flat_map(|t| {
                t.vars
                    .iter()
                    .filter(move |(v, _)| v.gen == gen && v.comp == comp)
                    .map(|(v, _)| v.order)
            })
            .max()
    }

    /// Maximal jet order over all variables (0 for coefficient-only terms).
    pub fn max_total_order(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|t| t.vars.iter().map(|(v, _)| v.order))
            .max()
            .unwrap_or(0)
    }

    /// True when no term carries a negative gamma power.
    pub fn is_pole_free(&self) -> bool {
        self.terms.keys().all(|t| t.gamma >= 0)
    }

    pub fn has_eps_or_dt(&self) -> bool {
        self.terms.keys().any(|t| t.eps || t.dt)
    }

    /// The coefficient of the unit monomial.
    pub fn constant_coeff(&self) -> Rat {
        self.terms
            .iter()
            .find(|(t, _)| t.is_unit())
            .map(|(_, c)| c.clone())
            .unwrap_or_else(|| Rat::zero(self.roster.ctx.n_vars()))
    }

    /// Removes the unit-monomial term when its coefficient is constant in the
    /// coordinates. This realizes the quotient by constants.
    pub fn strip_constant(&self) -> Expr {
        let n_coords = self.roster.ctx.n_coords();
        let mut out = self.clone();
        let unit = Term::unit();
        if let Some(c) = out.terms.get(&unit) {
            if c.is_coord_constant(n_coords) {
                out.terms.remove(&unit);
            }
        }
        out
    }

    /// Splits off terms containing `dt`: returns (dt-free part, dt cofactor)
    /// where the cofactor is taken with `dt` moved to the front of each term.
    pub fn split_dt(&self) -> (Expr, Expr) {
        let mut free = Expr::zero(&self.roster);
        let mut cof = Expr::zero(&self.roster);
        for (t, c) in &self.terms {
            if !t.dt {
                free.add_term(t.clone(), c.clone());
            } else {
                // moving dt (rank after every other odd factor) to the front
                // crosses every remaining odd factor
                let mut t2 = t.clone();
                t2.dt = false;
                let odds = odd_ranks(&t2, &self.roster).len();
                let mut c2 = c.clone();
                if odds % 2 == 1 {
                    c2 = c2.neg();
                }
                cof.add_term(t2, c2);
            }
        }
        (free, cof)
    }

    /// Same splitting for `eps`, cofactor with `eps` kept on the right
    /// (no sign: eps ranks after all jet variables and terms never carry both
    /// eps and dt in the complexes that use this).
    pub fn split_eps(&self) -> (Expr, Expr) {
        let mut free = Expr::zero(&self.roster);
        let mut cof = Expr::zero(&self.roster);
        for (t, c) in &self.terms {
            if !t.eps {
                free.add_term(t.clone(), c.clone());
            } else {
                let mut t2 = t.clone();
                t2.eps = false;
                cof.add_term(t2, c.clone());
            }
        }
        (free, cof)
    }

    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let ctx = &self.roster.ctx;
        let mut out = String::new();
        for (i, (t, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            let mut factors: Vec<String> = Vec::new();
            let cs = rat_to_string(c, ctx);
            if cs != "1" || t.is_unit() {
                factors.push(if cs.contains(' ') { format!("({cs})") } else { cs });
            }
            for (v, e) in &t.vars {
                let name = &self.roster.gens[v.gen].name;
                let base = if self.roster.gens[v.gen].comps > 1 {
                    format!("{}{}", name, v.comp + 1)
                } else {
                    name.clone()
                };
                let dv = if v.order == 0 {
                    base
                } else if v.order == 1 {
                    format!("d({base})")
                } else {
                    format!("d{}({})", v.order, base)
                };
                if *e == 1 {
                    factors.push(dv);
                } else {
                    factors.push(format!("{dv}^{e}"));
                }
            }
            if t.gamma != 0 {
                if t.gamma == 1 {
                    factors.push("gamma".into());
                } else {
                    factors.push(format!("gamma^{}", t.gamma));
                }
            }
            if t.eps {
                factors.push("eps".into());
            }
            if t.dt {
                factors.push("dt".into());
            }
            let _ = write!(out, "{}", factors.join("*"));
        }
        out
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::Context;
    use crate::roster::FieldDecl;

    pub(crate) fn tiny_roster() -> Arc<Roster> {
        let ctx = Context::coords(2, &[]);
        Roster::with_antifields(
            vec![
                FieldDecl::new("x", 2, Parity::Even, 0).base(),
                FieldDecl::new("p", 1, Parity::Even, 0),
                FieldDecl::new("theta", 2, Parity::Odd, 0),
                FieldDecl::new("gamma", 1, Parity::Even, 1),
            ],
            ctx,
            -1,
        )
    }

    #[test]
    fn odd_squares_vanish() {
        let r = tiny_roster();
        let th1 = Expr::gen(&r, "theta", 0);
        assert!(th1.mul(&th1).is_zero());
    }

    #[test]
    fn anticommutativity() {
        let r = tiny_roster();
        let th1 = Expr::gen(&r, "theta", 0);
        let th2 = Expr::gen(&r, "theta", 1);
        let s = th1.mul(&th2).add(&th2.mul(&th1));
        assert!(s.is_zero());
    }

    #[test]
    fn localization_unit() {
        let r = tiny_roster();
        let g = Expr::gamma_pow(&r, 1);
        let gi = Expr::gamma_pow(&r, -1);
        assert_eq!(g.mul(&gi), Expr::one(&r));
    }

    #[test]
    fn grading_examples() {
        let r = tiny_roster();
        // p theta^1 gamma: ghost 1, parity odd
        let e = Expr::prod(&[
            &Expr::gen(&r, "p", 0),
            &Expr::gen(&r, "theta", 0),
            &Expr::gamma_pow(&r, 1),
        ]);
        let g = e.grading();
        assert_eq!(g.len(), 1);
        assert_eq!(*g.keys().next().unwrap(), (1, 1));
    }

    #[test]
    fn base_coordinate_at_order_zero_is_a_coefficient() {
        let r = tiny_roster();
        let x1 = Expr::gen(&r, "x", 0);
        assert!(x1.terms.keys().all(|t| t.vars.is_empty()));
        let x1d = Expr::jet(&r, r.gen_id("x").unwrap(), 0, 1);
        assert!(x1d.terms.keys().all(|t| t.vars.len() == 1));
    }

    #[test]
    fn multiplication_is_associative_on_samples() {
        let r = tiny_roster();
        let a = Expr::gen(&r, "theta", 0).add(&Expr::gen(&r, "p", 0));
        let b = Expr::gen(&r, "theta", 1).mul(&Expr::gamma_pow(&r, -2));
        let c = Expr::gen(&r, "x", 0).add(&Expr::eps(&r));
        assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn graded_commutativity() {
        let r = tiny_roster();
        let th = Expr::gen(&r, "theta", 0);
        let e = Expr::eps(&r);
        // two odds anticommute
        assert_eq!(th.mul(&e), e.mul(&th).neg());
        // even commutes with odd
        let p = Expr::gen(&r, "p", 0);
        assert_eq!(p.mul(&th), th.mul(&p));
    }
}
