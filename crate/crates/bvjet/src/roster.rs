//! Field rosters: graded generators, their antifields and the coefficient
//! context they live over.

use crate::rat::Context;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn from_bit(b: u8) -> Parity {
        if b % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

pub type GenId = usize;

#[derive(Debug, Clone)]
pub struct GenDecl {
    pub name: String,
    pub comps: usize,
    pub parity: Parity,
    pub ghost: i64,
    /// True exactly for the base coordinates x^mu: order-0 dependence lives in
    /// the coefficients, so jet variables of this generator need order >= 1.
    pub base_coordinate: bool,
}

/// Declaration of one field before antifield generation.
#[derive(Debug, Clone)]
pub struct FieldDecl {
    pub name: String,
    pub comps: usize,
    pub parity: Parity,
    pub ghost: i64,
    pub base_coordinate: bool,
}

impl FieldDecl {
    pub fn new(name: &str, comps: usize, parity: Parity, ghost: i64) -> FieldDecl {
        FieldDecl {
            name: name.into(),
            comps,
            parity,
            ghost,
            base_coordinate: false,
        }
    }

    pub fn base(mut self) -> FieldDecl {
        self.base_coordinate = true;
        self
    }
}

/// A full roster: fields first, antifields second, with the antifield of
/// generator `i` at index `i + n_fields`. The antifield of `Phi` has parity
/// `1 - pa(Phi)` and ghost number `-1 - gh(Phi)`.
#[derive(Debug, Clone)]
pub struct Roster {
    pub gens: Vec<GenDecl>,
    pub n_fields: usize,
    pub ctx: Arc<Context>,
    /// Generator whose order-0 power is allowed to be a Laurent power
    /// (localization at the even ghost), if any.
    pub gamma: Option<GenId>,
    /// The base-coordinate generator, if any.
    pub base: Option<GenId>,
    /// Ghost number carried by the odd symbol epsilon.
    pub eps_ghost: i64,
    /// Ghost number carried by the odd symbol dt.
    pub dt_ghost: i64,
    /// When false (zero-mode style rosters) antifields are not generated.
    pub has_antifields: bool,
}

impl Roster {
    pub fn with_antifields(
        fields: Vec<FieldDecl>,
        ctx: Arc<Context>,
        eps_ghost: i64,
    ) -> Arc<Roster> {
        let n_fields = fields.len();
        let mut gens: Vec<GenDecl> = fields
            .iter()
            .map(|f| GenDecl {
                name: f.name.clone(),
                comps: f.comps,
                parity: f.parity,
                ghost: f.ghost,
                base_coordinate: f.base_coordinate,
            })
            .collect();
        for f in &fields {
            gens.push(GenDecl {
                name: format!("{}+", f.name),
                comps: f.comps,
                parity: f.parity.flip(),
                ghost: -1 - f.ghost,
                base_coordinate: false,
            });
        }
        let gamma = gens
            .iter()
            .position(|g| g.name == "gamma" && g.parity == Parity::Even);
        let base = gens.iter().position(|g| g.base_coordinate);
        Arc::new(Roster {
            gens,
            n_fields,
            ctx,
            gamma,
            base,
            eps_ghost,
            dt_ghost: 1,
            has_antifields: true,
        })
    }

    /// A roster of bare generators without antifields (zero-mode algebras).
    pub fn plain(fields: Vec<FieldDecl>, ctx: Arc<Context>) -> Arc<Roster> {
        let n_fields = fields.len();
        let gens: Vec<GenDecl> = fields
            .into_iter()
            .map(|f| GenDecl {
                name: f.name,
                comps: f.comps,
                parity: f.parity,
                ghost: f.ghost,
                base_coordinate: f.base_coordinate,
            })
            .collect();
        let base = gens.iter().position(|g| g.base_coordinate);
        Arc::new(Roster {
            gens,
            n_fields,
            ctx,
            gamma: None,
            base,
            eps_ghost: -1,
            dt_ghost: 1,
            has_antifields: false,
        })
    }

    pub fn gen_id(&self, name: &str) -> Option<GenId> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn antifield(&self, g: GenId) -> GenId {
        debug_assert!(self.has_antifields && g < self.n_fields);
        g + self.n_fields
    }

    pub fn field_of(&self, g: GenId) -> GenId {
        debug_assert!(g >= self.n_fields);
        g - self.n_fields
    }

    pub fn is_antifield(&self, g: GenId) -> bool {
        g >= self.n_fields
    }

    pub fn parity(&self, g: GenId) -> Parity {
        self.gens[g].parity
    }

    pub fn ghost(&self, g: GenId) -> i64 {
        self.gens[g].ghost
    }

    pub fn is_base(&self, g: GenId) -> bool {
        self.gens[g].base_coordinate
    }

    pub fn is_gamma(&self, g: GenId) -> bool {
        self.gamma == Some(g)
    }

    /// All (generator, component) pairs.
    pub fn slots(&self) -> impl Iterator<Item = (GenId, usize)> + '_ {
        self.gens
            .iter()
            .enumerate()
            .flat_map(|(g, d)| (0..d.comps).map(move |c| (g, c)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::Context;

    #[test]
    fn antifield_grading_convention() {
        let ctx = Context::coords(2, &[]);
        let roster = Roster::with_antifields(
            vec![
                FieldDecl::new("x", 2, Parity::Even, 0).base(),
                FieldDecl::new("c", 1, Parity::Odd, 1),
                FieldDecl::new("gamma", 1, Parity::Even, 1),
            ],
            ctx,
            -1,
        );
        let c = roster.gen_id("c").unwrap();
        let cp = roster.antifield(c);
        assert_eq!(roster.parity(cp), Parity::Even);
        assert_eq!(roster.ghost(cp), -2);
        let x = roster.gen_id("x").unwrap();
        assert_eq!(roster.ghost(roster.antifield(x)), -1);
        assert_eq!(roster.parity(roster.antifield(x)), Parity::Odd);
        assert!(roster.is_gamma(roster.gen_id("gamma").unwrap()));
        assert_eq!(roster.base, Some(x));
    }
}
