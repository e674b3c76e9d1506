//! Jet calculus on expressions: the total derivative, graded left partial
//! derivatives, the higher Euler operators and the exactness test for the
//! quotient by total derivatives.

use crate::expr::{Expr, JetVar};
use crate::rat::Rat;
use crate::roster::{GenId, Parity};
use num_bigint::BigInt;
use num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JetError {
    #[error("exactness test requires no negative gamma powers and no eps/dt factors")]
    NotPlainAlgebra,
    #[error("order-0 partial of a base coordinate acts on coefficients; order must be >= 1 here")]
    BaseOrderZero,
}

/// Graded left partial derivative with respect to the jet variable
/// `d^k(gen_comp)`.
///
/// For the base coordinate at `k = 0` this differentiates the coefficients;
/// for the localizable ghost at `k = 0` it is the Laurent derivative in the
/// gamma power.
pub fn jet_partial(a: &Expr, gen: GenId, comp: usize, k: u32) -> Expr {
    let roster = &a.roster;
    let mut out = Expr::zero(roster);
    if k == 0 && roster.is_base(gen) {
        for (t, c) in &a.terms {
            out.add_term(t.clone(), c.d_coord(comp));
        }
        return out;
    }
    if k == 0 && roster.is_gamma(gen) {
        for (t, c) in &a.terms {
            if t.gamma != 0 {
                let mut t2 = t.clone();
                t2.gamma -= 1;
                out.add_term(t2, c.scale_int(t.gamma as i64));
            }
        }
        return out;
    }
    let target = JetVar { gen, comp, order: k };
    for (t, c) in &a.terms {
        if let Some(idx) = t.vars.iter().position(|(v, _)| *v == target) {
            let (v, e) = t.vars[idx];
            let odd = roster.parity(v.gen) == Parity::Odd;
            let mut sign = 1i64;
            if odd {
                let before = t.vars[..idx]
                    .iter()
                    .filter(|(w, _)| roster.parity(w.gen) == Parity::Odd)
                    .count();
                if before % 2 == 1 {
                    sign = -1;
                }
            }
            let mut t2 = t.clone();
            if e == 1 {
                t2.vars.remove(idx);
            } else {
                t2.vars[idx].1 = e - 1;
            }
            out.add_term(t2, c.scale_int(sign * e as i64));
        }
    }
    out
}

/// The total derivative: an even derivation raising jet orders by one and
/// acting on coefficients through the chain rule.
pub fn total_derivative(a: &Expr) -> Expr {
    let roster = &a.roster;
    let mut out = Expr::zero(roster);
    // coefficient part: sum_mu (d_mu c) * dx^mu * monomial
    if let Some(base) = roster.base {
        for mu in 0..roster.gens[base].comps {
            let dxmu = Expr::jet(roster, base, mu, 1);
            let mut piece = Expr::zero(roster);
            for (t, c) in &a.terms {
                piece.add_term(t.clone(), c.d_coord(mu));
            }
            out = out.add(&dxmu.mul(&piece));
        }
    }
    // gamma part
    if let Some(g) = roster.gamma {
        let dgamma = Expr::jet(roster, g, 0, 1);
        let piece = jet_partial(a, g, 0, 0);
        out = out.add(&dgamma.mul(&piece));
    }
    // jet variable part: replace one occurrence of v by v' in place, realized
    // as v' * (left partial), which carries the same Koszul sign
    let mut seen: std::collections::BTreeSet<JetVar> = std::collections::BTreeSet::new();
    for t in a.terms.keys() {
        for (v, _) in &t.vars {
            seen.insert(*v);
        }
    }
    for v in seen {
        let vprime = Expr::jet(
            roster,
            v.gen,
            v.comp,
            v.order + 1,
        );
        let piece = jet_partial(a, v.gen, v.comp, v.order);
        out = out.add(&vprime.mul(&piece));
    }
    out
}

pub fn total_derivative_n(a: &Expr, n: u32) -> Expr {
    let mut out = a.clone();
    for _ in 0..n {
        out = total_derivative(&out);
    }
    out
}

fn binom(n: u32, k: u32) -> BigRational {
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    BigRational::new(num, den)
}

/// Higher Euler operator `delta_{k,Phi} = sum_l binom(k+l, k) (-d)^l
/// partial_{k+l,Phi}`; `k = 0` is the variational derivative.
pub fn euler_operator(a: &Expr, gen: GenId, comp: usize, k: u32) -> Expr {
    let roster = a.roster.clone();
    let top = a.max_order(gen, comp).unwrap_or(0);
    if k > top && !(k == 0) {
        return Expr::zero(&roster);
    }
    let mut out = Expr::zero(&roster);
    let l_max = top.saturating_sub(k);
    for l in 0..=l_max {
        let p = jet_partial(a, gen, comp, k + l);
        if p.is_zero() {
            continue;
        }
        let mut d = total_derivative_n(&p, l);
        if l % 2 == 1 {
            d = d.neg();
        }
        let c = Rat::from_rational(roster.ctx.n_vars(), binom(k + l, k));
        out = out.add(&d.scale(&c));
    }
    out
}

/// Verdict of the exactness test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exactness {
    /// Some variational derivative (or the constant part) is nonzero.
    NotExact { obstruction_terms: usize },
    /// All Euler obstructions vanish but no witness was constructed.
    VariationallyExact,
    /// A witness `g` with `d(g) = a` was found and verified.
    WitnessFound(Expr),
}

impl Exactness {
    pub fn is_exact(&self) -> bool {
        !matches!(self, Exactness::NotExact { .. })
    }
}

/// Tests whether `a` is a total derivative: the Euler criterion over every
/// roster generator plus vanishing of the jet-free constant part, followed by
/// an integration-by-parts witness attempt.
pub fn exactness(a: &Expr) -> Result<Exactness, JetError> {
    if a.terms.keys().any(|t| t.gamma < 0 || t.eps || t.dt) {
        return Err(JetError::NotPlainAlgebra);
    }
    let roster = a.roster.clone();
    let mut obstruction_terms = 0usize;
    for (gen, comp) in roster.slots() {
        let e = euler_operator(a, gen, comp, 0);
        obstruction_terms += e.n_terms();
    }
    let c = a.constant_coeff();
    if !c.is_zero() && c.is_coord_constant(roster.ctx.n_coords()) {
        obstruction_terms += 1;
    }
    if obstruction_terms > 0 {
        return Ok(Exactness::NotExact { obstruction_terms });
    }
    match find_witness(a) {
        Some(w) => Ok(Exactness::WitnessFound(w)),
        None => Ok(Exactness::VariationallyExact),
    }
}

/// Integration by parts homotopy. Eliminates the maximal jet variable at each
/// step by integrating its predecessor; bounded fuel, may give up.
fn find_witness(a: &Expr) -> Option<Expr> {
    let roster = a.roster.clone();
    let mut f = a.clone();
    let mut g = Expr::zero(&roster);
    let mut fuel = 16 + 4 * f.terms.len();
    loop {
        if f.is_zero() {
            return Some(g);
        }
        if fuel == 0 {
            return None;
        }
        fuel -= 1;
        // maximal jet variable of order >= 1 (order >= 2 when the predecessor
        // would be an order-0 base coordinate)
        let v = f
            .terms
            .keys()
            .flat_map(|t| t.vars.iter().map(|(v, _)| *v))
            .filter(|v| v.order >= 1)
            .max_by_key(|v| (v.order, v.gen, v.comp))?;
        if v.order == 1 && roster.is_base(v.gen) {
            return witness_endgame(&f, &g);
        }
        let cof = jet_partial(&f, v.gen, v.comp, v.order);
        // linearity in the top variable is necessary for exactness
        if cof
            .terms
            .keys()
            .any(|t| t.vars.iter().any(|(w, _)| *w == v))
        {
            return None;
        }
        let h = if v.order == 1 && roster.is_gamma(v.gen) {
            antiderivative_gamma(&cof)?
        } else {
            let pred = JetVar {
                gen: v.gen,
                comp: v.comp,
                order: v.order - 1,
            };
            antiderivative_var(&cof, pred)?
        };
        f = f.sub(&total_derivative(&h));
        g = g.add(&h);
        // the top variable must be gone now, otherwise we are stuck
        if f
            .terms
            .keys()
            .any(|t| t.vars.iter().any(|(w, _)| *w == v))
        {
            return None;
        }
    }
}

/// Antiderivative of `a` with respect to the jet variable `v` (left partial
/// inverse). Fails when `v` is odd and occurs in `a`.
fn antiderivative_var(a: &Expr, v: JetVar) -> Option<Expr> {
    let roster = a.roster.clone();
    let odd = roster.parity(v.gen) == Parity::Odd;
    if odd {
        if a.terms
            .keys()
            .any(|t| t.vars.iter().any(|(w, _)| *w == v))
        {
            return None;
        }
        return Some(Expr::jet(&roster, v.gen, v.comp, v.order).mul(a));
    }
    let mut out = Expr::zero(&roster);
    for (t, c) in &a.terms {
        let e = t
            .vars
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0);
        let mut t2 = t.clone();
        match t2.vars.iter_mut().find(|(w, _)| *w == v) {
            Some(entry) => entry.1 += 1,
            None => {
                t2.vars.push((v, 1));
                t2.vars.sort_by_key(|(w, _)| *w);
            }
        }
        out.add_term(
            t2,
            c.mul(
                &Rat::one(roster.ctx.n_vars())
                    .div(&Rat::from_int(roster.ctx.n_vars(), (e + 1) as i64))
                    .unwrap(),
            ),
        );
    }
    Some(out)
}

fn antiderivative_gamma(a: &Expr) -> Option<Expr> {
    let roster = a.roster.clone();
    let mut out = Expr::zero(&roster);
    for (t, c) in &a.terms {
        if t.gamma == -1 {
            return None;
        }
        let mut t2 = t.clone();
        t2.gamma += 1;
        out.add_term(
            t2,
            c.mul(
                &Rat::one(roster.ctx.n_vars())
                    .div(&Rat::from_int(roster.ctx.n_vars(), (t.gamma + 1) as i64))
                    .unwrap(),
            ),
        );
    }
    Some(out)
}

/// Final stage: `f` should consist of terms `c_mu(x) dx^mu`. Integrates the
/// first coordinate component and cross-checks all gradients.
fn witness_endgame(f: &Expr, g: &Expr) -> Option<Expr> {
    let roster = f.roster.clone();
    let base = roster.base?;
    let d = roster.gens[base].comps;
    let mut comps: Vec<Rat> = vec![Rat::zero(roster.ctx.n_vars()); d];
    for (t, c) in &f.terms {
        if t.gamma != 0 || t.eps || t.dt || t.vars.len() != 1 {
            return None;
        }
        let (v, e) = t.vars[0];
        if v.gen != base || v.order != 1 || e != 1 {
            return None;
        }
        comps[v.comp] = comps[v.comp].add(c);
    }
    // integrate the first nonzero component, monomial denominators only
    let mu = (0..d).find(|&i| !comps[i].is_zero())?;
    let g0 = integrate_coeff(&comps[mu], mu)?;
    for nu in 0..d {
        if !g0.d_coord(nu).eq_value(&comps[nu]) {
            return None;
        }
    }
    let h = Expr::from_coeff(&roster, g0);
    let rem = f.sub(&total_derivative(&h));
    if rem.is_zero() {
        Some(g.add(&h))
    } else {
        None
    }
}

/// Termwise antiderivative in coordinate `mu` for rational functions whose
/// denominator is a monomial; fails on logarithmic obstructions.
fn integrate_coeff(c: &Rat, mu: usize) -> Option<Rat> {
    let n = c.num.n_vars;
    let den_mono = {
        if c.den.terms.len() != 1 {
            return None;
        }
        c.den.terms.iter().next().unwrap().0.clone()
    };
    let mut out = Rat::zero(n);
    for (m, k) in &c.num.terms {
        // exponent of x_mu in the Laurent monomial m / den_mono
        let e = m[mu] as i64 - den_mono[mu] as i64;
        if e == -1 {
            return None;
        }
        let mut m2 = m.clone();
        m2[mu] += 1;
        let mut num = crate::rat::Poly::zero(n);
        num.terms.insert(
            m2,
            k / BigRational::from_integer(BigInt::from(e + 1)),
        );
        let term = Rat {
            num,
            den: c.den.clone(),
        };
        out = out.add(&term);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::Context;
    use crate::roster::{FieldDecl, Roster};
    use std::sync::Arc;

    fn roster() -> Arc<Roster> {
        let ctx = Context::coords(2, &[]);
        Roster::with_antifields(
            vec![
                FieldDecl::new("x", 2, Parity::Even, 0).base(),
                FieldDecl::new("p", 1, Parity::Even, 0),
                FieldDecl::new("theta", 1, Parity::Odd, 0),
                FieldDecl::new("e", 1, Parity::Even, 0),
                FieldDecl::new("c", 1, Parity::Odd, 1),
                FieldDecl::new("gamma", 1, Parity::Even, 1),
            ],
            ctx,
            -1,
        )
    }

    #[test]
    fn total_derivative_examples() {
        let r = roster();
        let th = Expr::gen(&r, "theta", 0);
        let th_id = r.gen_id("theta").unwrap();
        // d(theta) is the order-1 jet variable
        assert_eq!(total_derivative(&th), Expr::jet(&r, th_id, 0, 1));
        // d(theta * d(theta)) = theta * d2(theta)
        let a = th.mul(&Expr::jet(&r, th_id, 0, 1));
        let expect = th.mul(&Expr::jet(&r, th_id, 0, 2));
        assert_eq!(total_derivative(&a), expect);
        // chain rule on a coefficient
        let f = Expr::gen(&r, "x", 0).mul(&Expr::gen(&r, "x", 1));
        let x = r.gen_id("x").unwrap();
        let expect = Expr::gen(&r, "x", 1)
            .mul(&Expr::jet(&r, x, 0, 1))
            .add(&Expr::gen(&r, "x", 0).mul(&Expr::jet(&r, x, 1, 1)));
        assert_eq!(total_derivative(&f), expect);
    }

    #[test]
    fn jet_partial_examples() {
        let r = roster();
        let p = Expr::gen(&r, "p", 0);
        let pid = r.gen_id("p").unwrap();
        let dp = Expr::jet(&r, pid, 0, 1);
        // partial_{0,p}(p^2) = 2p
        assert_eq!(jet_partial(&p.mul(&p), pid, 0, 0), p.scale_int(2));
        // partial_{1,p}(p dp) = p
        assert_eq!(jet_partial(&p.mul(&dp), pid, 0, 1), p);
        // left derivative convention: partial_{0,theta}(theta dtheta) = dtheta
        let th = Expr::gen(&r, "theta", 0);
        let tid = r.gen_id("theta").unwrap();
        let dth = Expr::jet(&r, tid, 0, 1);
        assert_eq!(jet_partial(&th.mul(&dth), tid, 0, 0), dth);
        // order-reversed evaluation oracle: theta*dtheta == -dtheta*theta
        assert_eq!(th.mul(&dth), dth.mul(&th).neg());
        assert_eq!(jet_partial(&dth.mul(&th).neg(), tid, 0, 0), dth);
    }

    #[test]
    fn euler_examples() {
        let r = roster();
        let pid = r.gen_id("p").unwrap();
        let p = Expr::gen(&r, "p", 0);
        let dp = Expr::jet(&r, pid, 0, 1);
        // delta_0(p dp) = 0 since p dp = d(p^2)/2
        assert!(euler_operator(&p.mul(&dp), pid, 0, 0).is_zero());
        // delta_0(p^2) = 2p
        assert_eq!(euler_operator(&p.mul(&p), pid, 0, 0), p.scale_int(2));
        // delta_1(p dp) = p: only the l = 0 summand survives
        assert_eq!(euler_operator(&p.mul(&dp), pid, 0, 1), p);
    }

    #[test]
    fn exactness_examples() {
        let r = roster();
        let e_id = r.gen_id("e").unwrap();
        let ep = r.antifield(e_id);
        let c = Expr::gen(&r, "c", 0);
        let epv = Expr::jet(&r, ep, 0, 0);
        // d(e+ c) = d(e+) c + e+ d(c), witness e+ c
        let a = total_derivative(&epv.mul(&c));
        match exactness(&a).unwrap() {
            Exactness::WitnessFound(w) => {
                assert_eq!(total_derivative(&w), a);
            }
            other => panic!("expected witness, got {other:?}"),
        }
        // p^2 is not exact
        let p = Expr::gen(&r, "p", 0);
        assert!(matches!(
            exactness(&p.mul(&p)).unwrap(),
            Exactness::NotExact { .. }
        ));
        // the constant 1 is not exact
        assert!(matches!(
            exactness(&Expr::one(&r)).unwrap(),
            Exactness::NotExact { .. }
        ));
    }

    #[test]
    fn coefficient_witness_with_rational_obstruction() {
        let r = roster();
        let x = r.gen_id("x").unwrap();
        // (1/x1) dx1 is variationally exact but has no rational witness
        let c = crate::parse::parse_coeff("1/x1", &r.ctx).unwrap();
        let a = Expr::from_coeff(&r, c).mul(&Expr::jet(&r, x, 0, 1));
        assert_eq!(exactness(&a).unwrap(), Exactness::VariationallyExact);
        // x2 dx1 + x1 dx2 has witness x1 x2
        let b = Expr::gen(&r, "x", 1)
            .mul(&Expr::jet(&r, x, 0, 1))
            .add(&Expr::gen(&r, "x", 0).mul(&Expr::jet(&r, x, 1, 1)));
        assert!(matches!(
            exactness(&b).unwrap(),
            Exactness::WitnessFound(_)
        ));
    }

    #[test]
    fn jet_commutation_and_euler_kill_derivatives() {
        let r = roster();
        let mut rng = crate::randgen::Rng::new(7);
        for _ in 0..40 {
            let e = crate::randgen::random_expr(&r, &mut rng, &crate::randgen::GenCfg::default());
            // [partial_{k,Phi}, d] = partial_{k-1,Phi}
            for (gen, comp) in [(r.gen_id("p").unwrap(), 0), (r.gen_id("theta").unwrap(), 0)] {
                for k in 1..=2u32 {
                    let lhs = jet_partial(&total_derivative(&e), gen, comp, k)
                        .sub(&total_derivative(&jet_partial(&e, gen, comp, k)));
                    let rhs = jet_partial(&e, gen, comp, k - 1);
                    assert_eq!(lhs, rhs, "commutation failed at k={k}");
                }
            }
            // delta_0 annihilates total derivatives
            let de = total_derivative(&e);
            for (gen, comp) in r.slots() {
                assert!(
                    euler_operator(&de, gen, comp, 0).is_zero(),
                    "delta_0 of a total derivative must vanish"
                );
            }
        }
    }

    #[test]
    fn derivation_leibniz() {
        let r = roster();
        let mut rng = crate::randgen::Rng::new(99);
        for _ in 0..25 {
            let a = crate::randgen::random_expr(&r, &mut rng, &crate::randgen::GenCfg::default());
            let b = crate::randgen::random_expr(&r, &mut rng, &crate::randgen::GenCfg::default());
            let lhs = total_derivative(&a.mul(&b));
            let rhs = total_derivative(&a)
                .mul(&b)
                .add(&a.mul(&total_derivative(&b)));
            assert_eq!(lhs, rhs);
        }
    }
}
