//! Seeded, reproducible random expressions for the property suites.
//!
//! Deliberately small: bounded jet order, bounded term count, coefficients
//! from a fixed pool of coordinate monomials, so that exact checks stay fast.

use crate::expr::Expr;
use crate::rat::Rat;
use crate::roster::{Parity, Roster};
use std::sync::Arc;

/// SplitMix64: deterministic across platforms and releases.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

#[derive(Debug, Clone)]
pub struct GenCfg {
    pub max_order: u32,
    pub max_terms: usize,
    pub max_factors: usize,
    pub target_parity: Option<Parity>,
    /// Allow small gamma powers (localized sector).
    pub gamma_powers: bool,
}

impl Default for GenCfg {
    fn default() -> Self {
        GenCfg {
            max_order: 2,
            max_terms: 4,
            max_factors: 3,
            target_parity: None,
            gamma_powers: false,
        }
    }
}

fn coeff_pool(roster: &Arc<Roster>, rng: &mut Rng) -> Rat {
    let n = roster.ctx.n_vars();
    let d = roster.ctx.n_coords();
    match rng.below(6) {
        0 => Rat::from_int(n, 1),
        1 => Rat::from_int(n, 2),
        2 => Rat::from_int(n, -1),
        3 if d >= 1 => Rat::var(n, 0),
        4 if d >= 2 => Rat::var(n, 1),
        5 if d >= 2 => Rat::var(n, 0).mul(&Rat::var(n, 1)),
        _ => Rat::from_int(n, 3),
    }
}

fn random_term(roster: &Arc<Roster>, rng: &mut Rng, cfg: &GenCfg) -> Expr {
    let mut acc = Expr::from_coeff(roster, coeff_pool(roster, rng));
    let n_factors = 1 + rng.below(cfg.max_factors as u64) as usize;
    for _ in 0..n_factors {
        let g = rng.below(roster.gens.len() as u64) as usize;
        let comps = roster.gens[g].comps;
        let comp = rng.below(comps as u64) as usize;
        let min_order = if roster.is_base(g) { 1 } else { 0 };
        let order = min_order + rng.below((cfg.max_order - min_order as u32 + 1) as u64) as u32;
        acc = acc.mul(&Expr::jet(roster, g, comp, order));
    }
    if cfg.gamma_powers && roster.gamma.is_some() && rng.below(3) == 0 {
        let k = rng.below(3) as i32 - 1;
        acc = acc.mul(&Expr::gamma_pow(roster, k));
    }
    acc
}

/// A random expression; when `target_parity` is set, every term has that
/// parity, so the result is parity homogeneous.
pub fn random_expr(roster: &Arc<Roster>, rng: &mut Rng, cfg: &GenCfg) -> Expr {
    let n_terms = 1 + rng.below(cfg.max_terms as u64) as usize;
    let mut out = Expr::zero(roster);
    let mut produced = 0;
    let mut attempts = 0;
    while produced < n_terms && attempts < 64 {
        attempts += 1;
        let t = random_term(roster, rng, cfg);
        if t.is_zero() {
            continue;
        }
        if let Some(p) = cfg.target_parity {
            if t.parity() != Some(p) {
                continue;
            }
        }
        out = out.add(&t);
        produced += 1;
    }
    out
}

/// A nonzero parity-homogeneous random expression (retries as needed).
pub fn random_homogeneous(
    roster: &Arc<Roster>,
    rng: &mut Rng,
    cfg: &GenCfg,
    parity: Parity,
) -> Expr {
    let cfg = GenCfg {
        target_parity: Some(parity),
        ..cfg.clone()
    };
    loop {
        let e = random_expr(roster, rng, &cfg);
        if !e.is_zero() {
            return e;
        }
    }
}
