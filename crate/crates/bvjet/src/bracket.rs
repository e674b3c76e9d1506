//! The total-derivative-corrected antibracket on densities, evolutionary
//! vector fields with prolongation, the ad-component expansion, the sigma
//! vector fields, and the odd-symbol-extended complex.

use crate::expr::Expr;
use crate::jet::{euler_operator, jet_partial, total_derivative, total_derivative_n};
use crate::rat::Rat;
use crate::roster::{GenId, Parity, Roster};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BracketError {
    #[error("bracket arguments must be parity homogeneous")]
    NotHomogeneous,
    #[error("bracket arguments must be free of eps and dt")]
    OddSymbolInBracket,
    #[error("master equation violated: residue has {residue_terms} terms")]
    MasterViolated { residue_terms: usize },
}

fn sign_of(b: bool) -> i64 {
    if b {
        -1
    } else {
        1
    }
}

/// Upper bound for the partial-derivative order of `(gen, comp)` in `a`,
/// including the order-0 coefficient/gamma slot where applicable.
fn order_limit(a: &Expr, gen: GenId, comp: usize) -> i64 {
    let roster = &a.roster;
    let mut k = a.max_order(gen, comp).map(|m| m as i64).unwrap_or(-1);
    if roster.is_base(gen) || roster.is_gamma(gen) {
        k = k.max(0);
    }
    k
}

/// The antibracket of two parity-homogeneous densities, evaluated from the
/// defining double sum over jet orders. Carries ghost number +1 and reverses
/// parity: `pa[f,g] = pa(f) + pa(g) + 1`.
pub fn soloviev_bracket(f: &Expr, g: &Expr) -> Result<Expr, BracketError> {
    if f.has_eps_or_dt() || g.has_eps_or_dt() {
        return Err(BracketError::OddSymbolInBracket);
    }
    let (Some(pf), Some(_)) = (f.parity(), g.parity()) else {
        return Err(BracketError::NotHomogeneous);
    };
    Ok(bracket_homogeneous(f, pf, g))
}

/// Bilinear extension of the bracket to arbitrary (finite) parity mixtures.
pub fn bracket_any(f: &Expr, g: &Expr) -> Expr {
    let (fe, fo) = f.parity_parts();
    let mut out = Expr::zero(&f.roster);
    for (part, p) in [(fe, Parity::Even), (fo, Parity::Odd)] {
        if !part.is_zero() {
            out = out.add(&bracket_homogeneous(&part, p, g));
        }
    }
    out
}

fn bracket_homogeneous(f: &Expr, pf: Parity, g: &Expr) -> Expr {
    let roster = f.roster.clone();
    let mut out = Expr::zero(&roster);
    let pf_bit = pf.bit() as i64;
    for i in 0..roster.n_fields {
        for comp in 0..roster.gens[i].comps {
            let phi = (i, comp);
            let phip = (roster.antifield(i), comp);
            let s1 = sign_of(((pf_bit + 1) * roster.parity(i).bit() as i64) % 2 != 0);
            let s2 = s1 * sign_of(pf_bit % 2 != 0);
            out = out.add(&bracket_piece(f, g, phi, phip, s1));
            out = out.add(&bracket_piece(f, g, phip, phi, s2));
        }
    }
    out
}

/// One summand family: sum_{k,l} d^l(partial_{k,a} f) * d^k(partial_{l,b} g).
fn bracket_piece(
    f: &Expr,
    g: &Expr,
    a: (GenId, usize),
    b: (GenId, usize),
    sign: i64,
) -> Expr {
    let roster = f.roster.clone();
    let mut out = Expr::zero(&roster);
    let kmax = order_limit(f, a.0, a.1);
    let lmax = order_limit(g, b.0, b.1);
    if kmax < 0 || lmax < 0 {
        return out;
    }
    for k in 0..=(kmax as u32) {
        let fk = jet_partial(f, a.0, a.1, k);
        if fk.is_zero() {
            continue;
        }
        let mut dl_fk = fk;
        for l in 0..=(lmax as u32) {
            if l > 0 {
                dl_fk = total_derivative(&dl_fk);
            }
            let gl = jet_partial(g, b.0, b.1, l);
            if gl.is_zero() {
                continue;
            }
            let dk_gl = total_derivative_n(&gl, k);
            let mut piece = dl_fk.mul(&dk_gl);
            if sign < 0 {
                piece = piece.neg();
            }
            out = out.add(&piece);
        }
    }
    out
}

/// Evaluates the functional bracket through variational derivatives and
/// returns the difference from the density-level bracket. The difference is a
/// total derivative.
pub fn functional_bracket_residue(f: &Expr, g: &Expr) -> Result<Expr, BracketError> {
    if f.has_eps_or_dt() || g.has_eps_or_dt() {
        return Err(BracketError::OddSymbolInBracket);
    }
    let (Some(pf), Some(_)) = (f.parity(), g.parity()) else {
        return Err(BracketError::NotHomogeneous);
    };
    let roster = f.roster.clone();
    let pf_bit = pf.bit() as i64;
    let mut fb = Expr::zero(&roster);
    for i in 0..roster.n_fields {
        for comp in 0..roster.gens[i].comps {
            let s1 = sign_of(((pf_bit + 1) * roster.parity(i).bit() as i64) % 2 != 0);
            let s2 = s1 * sign_of(pf_bit % 2 != 0);
            let ip = roster.antifield(i);
            let t1 = euler_operator(f, i, comp, 0).mul(&euler_operator(g, ip, comp, 0));
            let t2 = euler_operator(f, ip, comp, 0).mul(&euler_operator(g, i, comp, 0));
            fb = fb.add(&t1.scale_int(s1)).add(&t2.scale_int(s2));
        }
    }
    Ok(soloviev_bracket(f, g)?.sub(&fb))
}

/// An evolutionary vector field: a derivation commuting with the total
/// derivative, determined by its generator values via prolongation.
#[derive(Debug, Clone)]
pub struct EvolutionaryVF {
    pub roster: Arc<Roster>,
    pub assign: BTreeMap<(GenId, usize), Expr>,
}

impl EvolutionaryVF {
    pub fn zero(roster: &Arc<Roster>) -> EvolutionaryVF {
        EvolutionaryVF {
            roster: roster.clone(),
            assign: BTreeMap::new(),
        }
    }

    /// Prolongation: build the derivation from one value per generator slot.
    /// Fails on a slot outside the roster.
    pub fn prolong(
        roster: &Arc<Roster>,
        assign: BTreeMap<(GenId, usize), Expr>,
    ) -> EvolutionaryVF {
        for ((g, c), _) in &assign {
            assert!(
                *g < roster.gens.len() && *c < roster.gens[*g].comps,
                "assignment references undeclared generator"
            );
        }
        let mut vf = EvolutionaryVF::zero(roster);
        for (k, v) in assign {
            if !v.is_zero() {
                vf.assign.insert(k, v);
            }
        }
        vf
    }

    pub fn set(&mut self, name: &str, comp: usize, value: Expr) {
        let g = self.roster.gen_id(name).expect("unknown generator");
        if value.is_zero() {
            self.assign.remove(&(g, comp));
        } else {
            self.assign.insert((g, comp), value);
        }
    }

    pub fn value(&self, gen: GenId, comp: usize) -> Expr {
        self.assign
            .get(&(gen, comp))
            .cloned()
            .unwrap_or_else(|| Expr::zero(&self.roster))
    }

    pub fn is_zero(&self) -> bool {
        self.assign.values().all(|v| v.is_zero())
    }

    /// Parity shift of the derivation; `None` when the assignments disagree.
    pub fn parity(&self) -> Option<Parity> {
        let mut p = None;
        for ((g, _), v) in &self.assign {
            let vp = v.parity()?;
            let shift = Parity::from_bit(vp.bit() ^ self.roster.parity(*g).bit());
            match p {
                None => p = Some(shift),
                Some(q) if q != shift => return None,
                _ => {}
            }
        }
        p.or(Some(Parity::Even))
    }

    /// Applies the prolonged derivation to an expression.
    pub fn apply(&self, a: &Expr) -> Expr {
        let mut out = Expr::zero(&self.roster);
        for ((gen, comp), val) in &self.assign {
            let kmax = order_limit(a, *gen, *comp);
            if kmax < 0 {
                continue;
            }
            let mut dk_val = val.clone();
            for k in 0..=(kmax as u32) {
                if k > 0 {
                    dk_val = total_derivative(&dk_val);
                }
                let p = jet_partial(a, *gen, *comp, k);
                if !p.is_zero() {
                    out = out.add(&dk_val.mul(&p));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &EvolutionaryVF) -> EvolutionaryVF {
        let mut out = self.clone();
        for (k, v) in &other.assign {
            let s = out.value(k.0, k.1).add(v);
            if s.is_zero() {
                out.assign.remove(k);
            } else {
                out.assign.insert(*k, s);
            }
        }
        out
    }

    pub fn sub(&self, other: &EvolutionaryVF) -> EvolutionaryVF {
        self.add(&other.scale_int(-1))
    }

    pub fn scale_int(&self, k: i64) -> EvolutionaryVF {
        EvolutionaryVF {
            roster: self.roster.clone(),
            assign: self
                .assign
                .iter()
                .map(|(s, v)| (*s, v.scale_int(k)))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> EvolutionaryVF {
        EvolutionaryVF {
            roster: self.roster.clone(),
            assign: self
                .assign
                .iter()
                .map(|(s, v)| (*s, v.scale(c)))
                .collect(),
        }
    }
}

/// Graded commutator of evolutionary vector fields, again evolutionary.
pub fn evol_commutator(xi: &EvolutionaryVF, eta: &EvolutionaryVF) -> EvolutionaryVF {
    let roster = xi.roster.clone();
    let sign = match (xi.parity(), eta.parity()) {
        (Some(Parity::Odd), Some(Parity::Odd)) => 1,
        _ => -1,
    };
    let mut assign = BTreeMap::new();
    let slots: std::collections::BTreeSet<(GenId, usize)> = roster.slots().collect();
    for (g, c) in slots {
        let a = xi.apply(&eta.value(g, c));
        let b = eta.apply(&xi.value(g, c));
        let v = a.add(&b.scale_int(sign));
        if !v.is_zero() {
            assign.insert((g, c), v);
        }
    }
    EvolutionaryVF { roster, assign }
}

/// The ad-component expansion: `[f, -] = sum_k d^k f_k` with evolutionary
/// components `f_k` built from the higher Euler operators of `f`.
pub fn ad_components(f: &Expr) -> Result<Vec<EvolutionaryVF>, BracketError> {
    if f.has_eps_or_dt() {
        return Err(BracketError::OddSymbolInBracket);
    }
    let Some(pf) = f.parity() else {
        return Err(BracketError::NotHomogeneous);
    };
    let roster = f.roster.clone();
    let pf_bit = pf.bit() as i64;
    let kmax = f.max_total_order();
    let mut out = Vec::new();
    for k in 0..=kmax {
        let mut vf = EvolutionaryVF::zero(&roster);
        for i in 0..roster.n_fields {
            for comp in 0..roster.gens[i].comps {
                let s1 = sign_of(((pf_bit + 1) * roster.parity(i).bit() as i64) % 2 != 0);
                let s2 = s1 * sign_of(pf_bit % 2 != 0);
                let to_anti = euler_operator(f, i, comp, k).scale_int(s1);
                if !to_anti.is_zero() {
                    vf.assign.insert((roster.antifield(i), comp), to_anti);
                }
                let to_field =
                    euler_operator(f, roster.antifield(i), comp, k).scale_int(s2);
                if !to_field.is_zero() {
                    vf.assign.insert((i, comp), to_field);
                }
            }
        }
        out.push(vf);
    }
    while out.len() > 1 && out.last().map(|v| v.is_zero()).unwrap_or(false) {
        out.pop();
    }
    Ok(out)
}

fn component(vfs: &[EvolutionaryVF], k: usize, roster: &Arc<Roster>) -> EvolutionaryVF {
    vfs.get(k).cloned().unwrap_or_else(|| EvolutionaryVF::zero(roster))
}

/// Exact master-equation residue `(1/2)[S,S] - d(S~)`.
pub fn master_residue(s: &Expr, s_tilde: &Expr) -> Result<Expr, BracketError> {
    let half_ss = soloviev_bracket(s, s)?.div_int(2);
    Ok(half_ss.sub(&total_derivative(s_tilde)))
}

/// The vector fields `sigma_k = s~_k - (1/2) sum_{l=0}^{k+1} [s_l, s_{k-l+1}]`
/// for a master pair. Errors when the master precondition fails.
pub fn sigma_k(s: &Expr, s_tilde: &Expr, k: usize) -> Result<EvolutionaryVF, BracketError> {
    let res = master_residue(s, s_tilde)?;
    if !res.is_zero() {
        return Err(BracketError::MasterViolated {
            residue_terms: res.n_terms(),
        });
    }
    let roster = s.roster.clone();
    let sk = ad_components(s)?;
    let stk = ad_components(s_tilde)?;
    let mut acc = component(&stk, k, &roster);
    let half = Rat::one(roster.ctx.n_vars())
        .div(&Rat::from_int(roster.ctx.n_vars(), 2))
        .unwrap();
    for l in 0..=(k + 1) {
        let comm = evol_commutator(
            &component(&sk, l, &roster),
            &component(&sk, k + 1 - l, &roster),
        );
        acc = acc.sub(&comm.scale(&half));
    }
    Ok(acc)
}

/// Element of the extended complex: `body + eps_part * eps` with the eps part
/// stored without the odd symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VElement {
    pub body: Expr,
    pub eps: Expr,
}

impl VElement {
    pub fn new(body: Expr, eps: Expr) -> VElement {
        VElement { body, eps }
    }

    pub fn zero(roster: &Arc<Roster>) -> VElement {
        VElement {
            body: Expr::zero(roster),
            eps: Expr::zero(roster),
        }
    }

    pub fn add(&self, other: &VElement) -> VElement {
        VElement {
            body: self.body.add(&other.body),
            eps: self.eps.add(&other.eps),
        }
    }

    pub fn sub(&self, other: &VElement) -> VElement {
        VElement {
            body: self.body.sub(&other.body),
            eps: self.eps.sub(&other.eps),
        }
    }

    /// Equality in the complex: the eps part lives modulo constants.
    pub fn eq_mod_constants(&self, other: &VElement) -> bool {
        self.body == other.body
            && self.eps.strip_constant() == other.eps.strip_constant()
    }

    pub fn is_zero_mod_constants(&self) -> bool {
        self.body.is_zero() && self.eps.strip_constant().is_zero()
    }

    /// Renders as `body + (eps_part) eps`.
    pub fn to_text(&self) -> String {
        format!("({}) + ({}) eps", self.body, self.eps)
    }
}

/// The differential `d(f + g eps) = (-1)^{pa(g)} d(g)`.
pub fn v_differential(v: &VElement) -> VElement {
    let roster = v.body.roster.clone();
    let (ge, go) = v.eps.parity_parts();
    let body = total_derivative(&ge).sub(&total_derivative(&go));
    VElement {
        body,
        eps: Expr::zero(&roster),
    }
}

/// Extension of the bracket to the complex:
/// `[f0 + g0 eps, f1 + g1 eps] = [f0,f1] + [f0,g1] eps + (-1)^{pa(f1)+1} [g0,f1] eps`.
pub fn v_bracket(a: &VElement, b: &VElement) -> VElement {
    let body = bracket_any(&a.body, &b.body);
    let mut eps = bracket_any(&a.body, &b.eps);
    let (f1e, f1o) = b.body.parity_parts();
    if !f1e.is_zero() {
        eps = eps.sub(&bracket_any(&a.eps, &f1e));
    }
    if !f1o.is_zero() {
        eps = eps.add(&bracket_any(&a.eps, &f1o));
    }
    VElement { body, eps }
}

/// The automorphism `P(f + g eps) = f + g eps + (-1)^{pa f} sum_k d^k s_{k+1} f eps`
/// built from the ad components of `S`.
pub fn p_automorphism(s_comps: &[EvolutionaryVF], v: &VElement) -> VElement {
    let roster = v.body.roster.clone();
    let mut extra = Expr::zero(&roster);
    for (fp, sign) in [
        (v.body.parity_parts().0, 1i64),
        (v.body.parity_parts().1, -1i64),
    ] {
        if fp.is_zero() {
            continue;
        }
        for k in 0..s_comps.len().saturating_sub(1) {
            let skf = component(s_comps, k + 1, &roster).apply(&fp);
            if !skf.is_zero() {
                extra = extra.add(&total_derivative_n(&skf, k as u32).scale_int(sign));
            }
        }
    }
    VElement {
        body: v.body.clone(),
        eps: v.eps.add(&extra),
    }
}

/// Checks `(d + ad(S + S~ eps)) P(v) = P((d + s) v)` with `s` acting on the
/// two components. Errors when the master precondition fails.
pub fn p_conjugation_check(
    s: &Expr,
    s_tilde: &Expr,
    v: &VElement,
) -> Result<bool, BracketError> {
    let res = master_residue(s, s_tilde)?;
    if !res.is_zero() {
        return Err(BracketError::MasterViolated {
            residue_terms: res.n_terms(),
        });
    }
    let s_comps = ad_components(s)?;
    let script = VElement::new(s.clone(), s_tilde.clone());
    let pv = p_automorphism(&s_comps, v);
    let lhs = v_differential(&pv).add(&v_bracket(&script, &pv));
    let s0 = component(&s_comps, 0, &s.roster);
    let dsv = v_differential(v);
    let inner = VElement {
        body: s0.apply(&v.body).add(&dsv.body),
        eps: s0.apply(&v.eps),
    };
    let rhs = p_automorphism(&s_comps, &inner);
    Ok(lhs.eq_mod_constants(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::rat::Context;
    use crate::roster::FieldDecl;

    fn roster() -> Arc<Roster> {
        let ctx = Context::coords(2, &[]);
        Roster::with_antifields(
            vec![
                FieldDecl::new("x", 2, Parity::Even, 0).base(),
                FieldDecl::new("p", 2, Parity::Even, 0),
                FieldDecl::new("theta", 2, Parity::Odd, 0),
                FieldDecl::new("e", 1, Parity::Even, 0),
                FieldDecl::new("c", 1, Parity::Odd, 1),
                FieldDecl::new("gamma", 1, Parity::Even, 1),
            ],
            ctx,
            -1,
        )
    }

    #[test]
    fn canonical_pairings() {
        let r = roster();
        let p0 = Expr::gen(&r, "p", 0);
        let pp1 = Expr::gen(&r, "p+", 1);
        // [p_a, p^{+b}] = delta_a^b
        assert!(soloviev_bracket(&p0, &pp1).unwrap().is_zero());
        let pp0 = Expr::gen(&r, "p+", 0);
        assert_eq!(soloviev_bracket(&p0, &pp0).unwrap(), Expr::one(&r));
        // [theta^a, theta^+_b] = delta^a_b, sign (+1)
        let th = Expr::gen(&r, "theta", 0);
        let thp = Expr::gen(&r, "theta+", 0);
        assert_eq!(soloviev_bracket(&th, &thp).unwrap(), Expr::one(&r));
        // no antifields: zero
        let p2 = p0.mul(&p0);
        let p3 = p2.mul(&p0);
        assert!(soloviev_bracket(&p2, &p3).unwrap().is_zero());
    }

    #[test]
    fn bracket_laws_on_random_samples() {
        let r = roster();
        let mut rng = crate::randgen::Rng::new(42);
        let cfg = crate::randgen::GenCfg::default();
        for trial in 0..30 {
            let pf = if trial % 2 == 0 { Parity::Even } else { Parity::Odd };
            let pg = if trial % 3 == 0 { Parity::Even } else { Parity::Odd };
            let f = crate::randgen::random_homogeneous(&r, &mut rng, &cfg, pf);
            let g = crate::randgen::random_homogeneous(&r, &mut rng, &cfg, pg);
            let fg = soloviev_bracket(&f, &g).unwrap();
            let gf = soloviev_bracket(&g, &f).unwrap();
            // skew: [f,g] = -(-1)^{(pa f+1)(pa g+1)} [g,f]
            let odd_sign = (pf.bit() + 1) * (pg.bit() + 1) % 2 == 1;
            let skew = if odd_sign { fg.sub(&gf) } else { fg.add(&gf) };
            assert!(skew.is_zero(), "skew symmetry failed: {skew}");
            // linearity over d
            let df = total_derivative(&f);
            let dg = total_derivative(&g);
            let l1 = soloviev_bracket(&df, &g).unwrap();
            let l2 = soloviev_bracket(&f, &dg).unwrap();
            let l3 = total_derivative(&fg);
            assert_eq!(l1, l2);
            assert_eq!(l1, l3);
        }
    }

    #[test]
    fn jacobi_on_random_samples() {
        let r = roster();
        let mut rng = crate::randgen::Rng::new(43);
        let cfg = crate::randgen::GenCfg {
            max_terms: 2,
            max_factors: 2,
            ..Default::default()
        };
        for trial in 0..15 {
            let pf = if trial % 2 == 0 { Parity::Even } else { Parity::Odd };
            let pg = if trial % 3 == 0 { Parity::Even } else { Parity::Odd };
            let ph = if trial % 5 == 0 { Parity::Even } else { Parity::Odd };
            let f = crate::randgen::random_homogeneous(&r, &mut rng, &cfg, pf);
            let g = crate::randgen::random_homogeneous(&r, &mut rng, &cfg, pg);
            let h = crate::randgen::random_homogeneous(&r, &mut rng, &cfg, ph);
            let lhs = soloviev_bracket(&f, &soloviev_bracket(&g, &h).unwrap()).unwrap();
            let r1 = soloviev_bracket(&soloviev_bracket(&f, &g).unwrap(), &h).unwrap();
            let mut r2 = soloviev_bracket(&g, &soloviev_bracket(&f, &h).unwrap()).unwrap();
            if (pf.bit() + 1) * (pg.bit() + 1) % 2 == 1 {
                r2 = r2.neg();
            }
            assert!(lhs.sub(&r1).sub(&r2).is_zero(), "Jacobi failed");
        }
    }

    #[test]
    fn ad_expansion_matches_bracket() {
        let r = roster();
        let mut rng = crate::randgen::Rng::new(44);
        let cfg = crate::randgen::GenCfg::default();
        for trial in 0..20 {
            let pf = if trial % 2 == 0 { Parity::Even } else { Parity::Odd };
            let f = crate::randgen::random_homogeneous(&r, &mut rng, &cfg, pf);
            let g = crate::randgen::random_expr(&r, &mut rng, &cfg);
            let fg = bracket_any(&f, &g);
            let comps = ad_components(&f).unwrap();
            let mut rhs = Expr::zero(&r);
            for (k, vf) in comps.iter().enumerate() {
                rhs = rhs.add(&total_derivative_n(&vf.apply(&g), k as u32));
            }
            assert_eq!(fg, rhs, "ad expansion failed");
        }
    }

    #[test]
    fn ad_components_truncate_for_order_zero_input() {
        let r = roster();
        let f = Expr::gen(&r, "p", 0).mul(&Expr::gen(&r, "p+", 0));
        let comps = ad_components(&f).unwrap();
        assert!(comps.iter().skip(1).all(|v| v.is_zero()));
    }

    #[test]
    fn prolongation_examples() {
        let r = roster();
        let pid = r.gen_id("p").unwrap();
        // assign xi(p_1) = 1, rest zero: xi(p dp) = dp
        let mut xi = EvolutionaryVF::zero(&r);
        xi.set("p", 0, Expr::one(&r));
        let p = Expr::gen(&r, "p", 0);
        let dp = Expr::jet(&r, pid, 0, 1);
        assert_eq!(xi.apply(&p.mul(&dp)), dp);
        // zero assignment is the zero derivation
        let z = EvolutionaryVF::zero(&r);
        assert!(z.apply(&p.mul(&dp)).is_zero());
        // the translation: assign d(Phi) to every generator slot
        let mut tr = EvolutionaryVF::zero(&r);
        for (g, c) in r.slots() {
            tr.assign
                .insert((g, c), total_derivative(&Expr::jet(&r, g, c, 0)));
        }
        let mut rng = crate::randgen::Rng::new(45);
        let cfg = crate::randgen::GenCfg::default();
        for _ in 0..10 {
            let e = crate::randgen::random_expr(&r, &mut rng, &cfg);
            assert_eq!(tr.apply(&e), total_derivative(&e));
            // evolutionary fields commute with the translation
            let xi = {
                let mut v = EvolutionaryVF::zero(&r);
                v.set("theta", 0, Expr::gen(&r, "p", 0));
                v
            };
            let c = evol_commutator(&tr, &xi);
            assert!(c.apply(&e).is_zero());
        }
    }

    #[test]
    fn prolongation_commutes_with_total_derivative() {
        let r = roster();
        let mut rng = crate::randgen::Rng::new(46);
        let cfg = crate::randgen::GenCfg::default();
        let mut xi = EvolutionaryVF::zero(&r);
        xi.set("p", 0, Expr::gen(&r, "theta", 0).mul(&Expr::gen(&r, "c", 0)));
        xi.set("theta", 1, Expr::gen(&r, "p", 1));
        for _ in 0..15 {
            let e = crate::randgen::random_expr(&r, &mut rng, &cfg);
            assert_eq!(
                xi.apply(&total_derivative(&e)),
                total_derivative(&xi.apply(&e))
            );
        }
    }

    #[test]
    fn odd_square_zero_commutator() {
        let r = roster();
        let mut xi = EvolutionaryVF::zero(&r);
        // odd shift: theta -> p, everything else zero; xi^2 = 0 on generators
        xi.set("theta", 0, Expr::gen(&r, "p", 0));
        assert_eq!(xi.parity(), Some(Parity::Odd));
        let c = evol_commutator(&xi, &xi);
        assert!(c.is_zero());
    }

    #[test]
    fn functional_bracket_examples() {
        let r = roster();
        let pid = r.gen_id("p").unwrap();
        let p = Expr::gen(&r, "p", 0);
        let dp = Expr::jet(&r, pid, 0, 1);
        let f = p.mul(&dp);
        let g = Expr::gen(&r, "p+", 0);
        let diff = functional_bracket_residue(&f, &g).unwrap();
        assert!(crate::jet::exactness(&diff).unwrap().is_exact());
        // antifield-free arguments: both brackets vanish
        let diff = functional_bracket_residue(&p, &p).unwrap();
        assert!(diff.is_zero());
        // f = d(e+) c, g = c+ e
        let eid = r.gen_id("e").unwrap();
        let f = Expr::jet(&r, r.antifield(eid), 0, 1).mul(&Expr::gen(&r, "c", 0));
        let g = Expr::gen(&r, "c+", 0).mul(&Expr::gen(&r, "e", 0));
        let diff = functional_bracket_residue(&f, &g).unwrap();
        assert!(crate::jet::exactness(&diff).unwrap().is_exact());
    }

    #[test]
    fn v_complex_basics() {
        let r = roster();
        let p = Expr::gen(&r, "p", 0);
        let pp = Expr::gen(&r, "p+", 0);
        // d(p eps) has body d(p)
        let v = VElement::new(Expr::zero(&r), p.clone());
        let dv = v_differential(&v);
        assert_eq!(dv.body, total_derivative(&p));
        // d is zero without an eps part and squares to zero
        let w = VElement::new(p.clone(), Expr::zero(&r));
        assert!(v_differential(&w).body.is_zero());
        let mut rng = crate::randgen::Rng::new(47);
        let cfg = crate::randgen::GenCfg::default();
        for _ in 0..10 {
            let v = VElement::new(
                crate::randgen::random_expr(&r, &mut rng, &cfg),
                crate::randgen::random_expr(&r, &mut rng, &cfg),
            );
            assert!(v_differential(&v_differential(&v)).body.is_zero());
        }
        // [p + 0 eps, p+ eps] = 1 eps
        let a = VElement::new(p.clone(), Expr::zero(&r));
        let b = VElement::new(Expr::zero(&r), pp.clone());
        let ab = v_bracket(&a, &b);
        assert!(ab.body.is_zero());
        assert_eq!(ab.eps, Expr::one(&r));
        // eps-free inputs reduce to the plain bracket
        let c = VElement::new(pp.clone(), Expr::zero(&r));
        let ac = v_bracket(&a, &c);
        assert_eq!(ac.body, soloviev_bracket(&p, &pp).unwrap());
        assert!(ac.eps.is_zero());
    }

    #[test]
    fn v_bracket_leibniz() {
        let r = roster();
        let mut rng = crate::randgen::Rng::new(48);
        let cfg = crate::randgen::GenCfg {
            max_terms: 2,
            max_factors: 2,
            ..Default::default()
        };
        for trial in 0..12 {
            let pa = if trial % 2 == 0 { Parity::Even } else { Parity::Odd };
            let a = VElement::new(
                crate::randgen::random_homogeneous(&r, &mut rng, &cfg, pa),
                crate::randgen::random_homogeneous(&r, &mut rng, &cfg, pa.flip()),
            );
            let b = VElement::new(
                crate::randgen::random_homogeneous(&r, &mut rng, &cfg, Parity::Even),
                crate::randgen::random_homogeneous(&r, &mut rng, &cfg, Parity::Odd),
            );
            // d[a,b] = [da,b] + (-1)^{pa(a)+1}[a,db]
            let lhs = v_differential(&v_bracket(&a, &b));
            let mut rhs = v_bracket(&v_differential(&a), &b);
            let t2 = v_bracket(&a, &v_differential(&b));
            if pa == Parity::Even {
                rhs = rhs.sub(&t2);
            } else {
                rhs = rhs.add(&t2);
            }
            assert!(
                lhs.sub(&rhs).is_zero_mod_constants(),
                "extended Leibniz failed"
            );
        }
    }
}
