//! Moving-frame geometry on one coordinate patch: inverse frame, metric, the
//! unique skew torsion-free connection, curvature, magnetic field strength,
//! covariant derivatives and the structure-equation/Bianchi verification.
//!
//! All entries are exact rational functions; every identity is checked by
//! normalizing to the zero polynomial.

use crate::parse::{parse_coeff, ParseError};
use crate::rat::{Context, Rat};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("singular frame: det E = 0 as a rational function")]
    SingularFrame,
    #[error("signature entries must be +1 or -1")]
    BadSignature,
    #[error("connection solve inconsistent (implementation bug)")]
    ConnectionSolve,
    #[error("frame entry parse error: {0}")]
    Parse(#[from] ParseError),
}

/// Input data: dimension, signature diagonal, frame `E[mu][a]` and magnetic
/// potential `A[mu]`.
#[derive(Debug, Clone)]
pub struct FrameData {
    pub dim: usize,
    pub eta: Vec<i64>,
    pub frame: Vec<Vec<Rat>>,
    pub potential: Vec<Rat>,
    pub ctx: Arc<Context>,
    pub params: Vec<String>,
    pub name: String,
}

impl FrameData {
    /// Builds frame data from coefficient text entries. `frame[mu][a]`.
    pub fn from_text(
        name: &str,
        dim: usize,
        eta: Vec<i64>,
        frame: &[&[&str]],
        potential: &[&str],
        params: &[&str],
    ) -> Result<FrameData, GeometryError> {
        if eta.len() != dim || eta.iter().any(|&s| s != 1 && s != -1) {
            return Err(GeometryError::BadSignature);
        }
        let ctx = Context::coords(dim, params);
        let mut fr = Vec::new();
        for row in frame {
            let mut r = Vec::new();
            for entry in *row {
                r.push(parse_coeff(entry, &ctx)?);
            }
            fr.push(r);
        }
        let mut pot = Vec::new();
        for entry in potential {
            pot.push(parse_coeff(entry, &ctx)?);
        }
        Ok(FrameData {
            dim,
            eta,
            frame: fr,
            potential: pot,
            ctx,
            params: params.iter().map(|s| s.to_string()).collect(),
            name: name.to_string(),
        })
    }
}

/// Derived geometric data. Index conventions: `frame[mu][a]` is the frame
/// one-form, `frame_inv[a][mu]` its inverse, `conn[mu][a][b]` the connection
/// with first internal index up, `riem[mu][nu][a][b]` likewise,
/// `riem_int[a][b][c][d]` the fully internal curvature with all indices down.
#[derive(Debug, Clone)]
pub struct GeometryBundle {
    pub dim: usize,
    pub eta: Vec<i64>,
    pub frame: Vec<Vec<Rat>>,
    pub frame_inv: Vec<Vec<Rat>>,
    pub metric: Vec<Vec<Rat>>,
    pub metric_inv: Vec<Vec<Rat>>,
    pub conn: Vec<Vec<Vec<Rat>>>,
    pub riem: Vec<Vec<Vec<Vec<Rat>>>>,
    pub riem_int: Vec<Vec<Vec<Vec<Rat>>>>,
    pub potential: Vec<Rat>,
    pub fstr: Vec<Vec<Rat>>,
    pub fstr_int: Vec<Vec<Rat>>,
    pub nabla_f: Vec<Vec<Vec<Rat>>>,
    pub ctx: Arc<Context>,
    pub params: Vec<String>,
    pub name: String,
}

fn zero_mat(n: usize, vars: usize) -> Vec<Vec<Rat>> {
    vec![vec![Rat::zero(vars); n]; n]
}

/// Exact Gaussian elimination solve of `m x = rhs` for square `m`.
fn solve_linear(mut m: Vec<Vec<Rat>>, mut rhs: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = m.len();
    let vars = rhs.first().map(|r| r.num.n_vars).unwrap_or(0);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = Rat::one(vars).div(&m[col][col]).ok()?;
        for j in col..n {
            m[col][j] = m[col][j].mul(&inv);
        }
        rhs[col] = rhs[col].mul(&inv);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for j in col..n {
                    let t = m[col][j].mul(&factor);
                    m[r][j] = m[r][j].sub(&t);
                }
                let t = rhs[col].mul(&factor);
                rhs[r] = rhs[r].sub(&t);
            }
        }
    }
    Some(rhs)
}

/// Inverts the frame by Gaussian elimination, exactly.
pub fn invert_frame(frame: &[Vec<Rat>]) -> Result<Vec<Vec<Rat>>, GeometryError> {
    let n = frame.len();
    let vars = frame[0][0].num.n_vars;
    // augmented elimination on E^T so that inv[a][mu] satisfies
    // sum_mu E[mu][a] inv[b][mu]... we invert M[a][mu] = frame[mu][a]
    let mut m: Vec<Vec<Rat>> = (0..n)
        .map(|a| (0..n).map(|mu| frame[mu][a].clone()).collect())
        .collect();
    let mut inv = zero_mat(n, vars);
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = Rat::one(vars);
    }
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or(GeometryError::SingularFrame)?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let piv_inv = Rat::one(vars)
            .div(&m[col][col])
            .map_err(|_| GeometryError::SingularFrame)?;
        for j in 0..n {
            m[col][j] = m[col][j].mul(&piv_inv);
            inv[col][j] = inv[col][j].mul(&piv_inv);
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in 0..n {
                    let t = m[col][j].mul(&f);
                    m[r][j] = m[r][j].sub(&t);
                    let t = inv[col][j].mul(&f);
                    inv[r][j] = inv[r][j].sub(&t);
                }
            }
        }
    }
    // `inv` is the inverse of M[a][mu] = frame[mu][a]; re-index so that the
    // result satisfies sum_mu frame[mu][a] * out[b][mu] = delta_ab
    let out: Vec<Vec<Rat>> = (0..n)
        .map(|a| (0..n).map(|mu| inv[mu][a].clone()).collect())
        .collect();
    Ok(out)
}

pub fn det(frame: &[Vec<Rat>]) -> Rat {
    let n = frame.len();
    let vars = frame[0][0].num.n_vars;
    // cofactor expansion; n <= 4 in practice
    fn go(m: &[Vec<Rat>], rows: &[usize], cols: &[usize], vars: usize) -> Rat {
        if rows.len() == 1 {
            return m[rows[0]][cols[0]].clone();
        }
        let mut acc = Rat::zero(vars);
        for (i, &c) in cols.iter().enumerate() {
            let sub_rows = &rows[1..];
            let sub_cols: Vec<usize> = cols
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, &cc)| cc)
                .collect();
            let minor = go(m, sub_rows, &sub_cols, vars);
            let term = m[rows[0]][c].mul(&minor);
            acc = if i % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        acc
    }
    let idx: Vec<usize> = (0..n).collect();
    go(frame, &idx, &idx, vars)
}

/// Solves the component form of the first structure equation for the unique
/// connection that is skew after lowering, then verifies by substitution.
pub fn solve_connection(
    frame: &[Vec<Rat>],
    eta: &[i64],
) -> Result<Vec<Vec<Vec<Rat>>>, GeometryError> {
    let d = frame.len();
    let vars = frame[0][0].num.n_vars;
    // unknowns: w[mu][(a,b)] with a < b, lowered and antisymmetric
    let mut pairs = Vec::new();
    for a in 0..d {
        for b in (a + 1)..d {
            pairs.push((a, b));
        }
    }
    let n_unknowns = d * pairs.len();
    let unknown_index = |mu: usize, p: usize| mu * pairs.len() + p;
    // equations: for mu < nu and each a:
    //   d_mu E[nu][a] - d_nu E[mu][a]
    //   + eta^{ac} w_{mu c b} E[nu][b] - eta^{ac} w_{nu c b} E[mu][b] = 0
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut rhs: Vec<Rat> = Vec::new();
    let lowered = |p: usize, c: usize, b: usize, sgn: &mut i64| -> bool {
        // w_{cb} in terms of the unknown pair list
        let (x, y) = pairs[p];
        if (c, b) == (x, y) {
            *sgn = 1;
            true
        } else if (c, b) == (y, x) {
            *sgn = -1;
            true
        } else {
            false
        }
    };
    for mu in 0..d {
        for nu in (mu + 1)..d {
            for a in 0..d {
                let mut row = vec![Rat::zero(vars); n_unknowns];
                for p in 0..pairs.len() {
                    for b in 0..d {
                        // + eta^{aa} w_{mu a b} E[nu][b] (eta diagonal)
                        let mut sgn = 0i64;
                        if lowered(p, a, b, &mut sgn) {
                            let coeff = frame[nu][b].scale_int(sgn * eta[a]);
                            row[unknown_index(mu, p)] =
                                row[unknown_index(mu, p)].add(&coeff);
                            let coeff = frame[mu][b].scale_int(-sgn * eta[a]);
                            row[unknown_index(nu, p)] =
                                row[unknown_index(nu, p)].add(&coeff);
                        }
                    }
                }
                rows.push(row);
                let s = frame[nu][a]
                    .d_coord(mu)
                    .sub(&frame[mu][a].d_coord(nu));
                rhs.push(s.neg());
            }
        }
    }
    let sol = solve_linear(rows, rhs).ok_or(GeometryError::ConnectionSolve)?;
    // assemble conn[mu][a][b] = eta^{aa} w_{mu a b}
    let mut conn = vec![vec![vec![Rat::zero(vars); d]; d]; d];
    for mu in 0..d {
        for (p, &(x, y)) in pairs.iter().enumerate() {
            let w = sol[unknown_index(mu, p)].clone();
            // w_{mu x y} = w, w_{mu y x} = -w
            conn[mu][x][y] = w.scale_int(eta[x]);
            conn[mu][y][x] = w.scale_int(-eta[y]);
        }
    }
    // verify the structure equation by substitution
    for mu in 0..d {
        for nu in (mu + 1)..d {
            for a in 0..d {
                let mut s = frame[nu][a].d_coord(mu).sub(&frame[mu][a].d_coord(nu));
                for b in 0..d {
                    s = s.add(&conn[mu][a][b].mul(&frame[nu][b]));
                    s = s.sub(&conn[nu][a][b].mul(&frame[mu][b]));
                }
                if !s.is_zero() {
                    return Err(GeometryError::ConnectionSolve);
                }
            }
        }
    }
    Ok(conn)
}

/// Second structure equation in components.
pub fn curvature(conn: &[Vec<Vec<Rat>>]) -> Vec<Vec<Vec<Vec<Rat>>>> {
    let d = conn.len();
    let vars = conn[0][0][0].num.n_vars;
    let mut r = vec![vec![vec![vec![Rat::zero(vars); d]; d]; d]; d];
    for mu in 0..d {
        for nu in 0..d {
            for a in 0..d {
                for b in 0..d {
                    let mut s = conn[nu][a][b].d_coord(mu).sub(&conn[mu][a][b].d_coord(nu));
                    for c in 0..d {
                        s = s.add(&conn[mu][a][c].mul(&conn[nu][c][b]));
                        s = s.sub(&conn[nu][a][c].mul(&conn[mu][c][b]));
                    }
                    r[mu][nu][a][b] = s;
                }
            }
        }
    }
    r
}

/// `F_{mu nu} = d_mu A_nu - d_nu A_mu`.
pub fn field_strength(potential: &[Rat]) -> Vec<Vec<Rat>> {
    let d = potential.len();
    let vars = potential.first().map(|r| r.num.n_vars).unwrap_or(0);
    let mut f = zero_mat(d, vars);
    for mu in 0..d {
        for nu in 0..d {
            f[mu][nu] = potential[nu].d_coord(mu).sub(&potential[mu].d_coord(nu));
        }
    }
    f
}

pub fn build_bundle(data: &FrameData) -> Result<GeometryBundle, GeometryError> {
    let d = data.dim;
    let vars = data.ctx.n_vars();
    if det(&data.frame).is_zero() {
        return Err(GeometryError::SingularFrame);
    }
    let frame_inv = invert_frame(&data.frame)?;
    let mut metric = zero_mat(d, vars);
    let mut metric_inv = zero_mat(d, vars);
    for mu in 0..d {
        for nu in 0..d {
            let mut g = Rat::zero(vars);
            let mut gi = Rat::zero(vars);
            for a in 0..d {
                g = g.add(&data.frame[mu][a].mul(&data.frame[nu][a]).scale_int(data.eta[a]));
                gi = gi.add(&frame_inv[a][mu].mul(&frame_inv[a][nu]).scale_int(data.eta[a]));
            }
            metric[mu][nu] = g;
            metric_inv[mu][nu] = gi;
        }
    }
    let conn = solve_connection(&data.frame, &data.eta)?;
    let riem = curvature(&conn);
    // fully internal curvature, all indices down:
    // riem_int[a][b][c][d] = inv[a][mu] inv[b][nu] eta_{c e} riem[mu][nu][e][d]
    let mut riem_int = vec![vec![vec![vec![Rat::zero(vars); d]; d]; d]; d];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for dd in 0..d {
                    let mut s = Rat::zero(vars);
                    for mu in 0..d {
                        for nu in 0..d {
                            s = s.add(
                                &frame_inv[a][mu]
                                    .mul(&frame_inv[b][nu])
                                    .mul(&riem[mu][nu][c][dd])
                                    .scale_int(data.eta[c]),
                            );
                        }
                    }
                    riem_int[a][b][c][dd] = s;
                }
            }
        }
    }
    let fstr = field_strength(&data.potential);
    let mut fstr_int = zero_mat(d, vars);
    for a in 0..d {
        for b in 0..d {
            let mut s = Rat::zero(vars);
            for mu in 0..d {
                for nu in 0..d {
                    s = s.add(&frame_inv[a][mu].mul(&frame_inv[b][nu]).mul(&fstr[mu][nu]));
                }
            }
            fstr_int[a][b] = s;
        }
    }
    // nabla_lambda F_{ab} with the connection in internal indices:
    // d_lambda F_{ab} - conn_{lambda}{}^c{}_a F_{cb} - conn_{lambda}{}^c{}_b F_{ac}
    let mut nabla_f = vec![zero_mat(d, vars); d];
    for lam in 0..d {
        for a in 0..d {
            for b in 0..d {
                let mut s = fstr_int[a][b].d_coord(lam);
                for c in 0..d {
                    s = s.sub(&conn[lam][c][a].mul(&fstr_int[c][b]));
                    s = s.sub(&conn[lam][c][b].mul(&fstr_int[a][c]));
                }
                nabla_f[lam][a][b] = s;
            }
        }
    }
    Ok(GeometryBundle {
        dim: d,
        eta: data.eta.clone(),
        frame: data.frame.clone(),
        frame_inv,
        metric,
        metric_inv,
        conn,
        riem,
        riem_int,
        potential: data.potential.clone(),
        fstr,
        fstr_int,
        nabla_f,
        ctx: data.ctx.clone(),
        params: data.params.clone(),
        name: data.name.clone(),
    })
}

impl GeometryBundle {
    pub fn det_frame(&self) -> Rat {
        det(&self.frame)
    }

    /// Lowered connection `w_{mu a b} = eta_{a a} conn[mu][a][b]`.
    pub fn conn_lowered(&self, mu: usize, a: usize, b: usize) -> Rat {
        self.conn[mu][a][b].scale_int(self.eta[a])
    }

    /// `eta^{ac} eta^{bd} R_{abcd}` summed: twice the sectional trace.
    pub fn scalar_curvature(&self) -> Rat {
        let d = self.dim;
        let mut s = Rat::zero(self.ctx.n_vars());
        for a in 0..d {
            for b in 0..d {
                s = s.add(&self.riem_int[a][b][a][b].scale_int(self.eta[a] * self.eta[b]));
            }
        }
        s
    }

    pub fn is_flat(&self) -> bool {
        self.riem
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .all(|r| r.is_zero())
    }

    /// Frame potential in internal indices: `A_a = inv[a][mu] A_mu`.
    pub fn potential_int(&self, a: usize) -> Rat {
        let mut s = Rat::zero(self.ctx.n_vars());
        for mu in 0..self.dim {
            s = s.add(&self.frame_inv[a][mu].mul(&self.potential[mu]));
        }
        s
    }

    /// Checks both structure equations, the closedness of F and both Bianchi
    /// identities; returns the number of nonzero residues (0 on success).
    pub fn verify(&self) -> usize {
        let d = self.dim;
        let mut bad = 0usize;
        // metric pairing g_{mu l} g^{l nu} = delta
        for mu in 0..d {
            for nu in 0..d {
                let mut s = Rat::zero(self.ctx.n_vars());
                for l in 0..d {
                    s = s.add(&self.metric[mu][l].mul(&self.metric_inv[l][nu]));
                }
                let target = Rat::from_int(self.ctx.n_vars(), (mu == nu) as i64);
                if !s.eq_value(&target) {
                    bad += 1;
                }
            }
        }
        // lowered connection antisymmetric
        for mu in 0..d {
            for a in 0..d {
                for b in 0..d {
                    if !self
                        .conn_lowered(mu, a, b)
                        .add(&self.conn_lowered(mu, b, a))
                        .is_zero()
                    {
                        bad += 1;
                    }
                }
            }
        }
        // first structure equation
        for mu in 0..d {
            for nu in 0..d {
                for a in 0..d {
                    let mut s = self.frame[nu][a].d_coord(mu).sub(&self.frame[mu][a].d_coord(nu));
                    for b in 0..d {
                        s = s.add(&self.conn[mu][a][b].mul(&self.frame[nu][b]));
                        s = s.sub(&self.conn[nu][a][b].mul(&self.frame[mu][b]));
                    }
                    if !s.is_zero() {
                        bad += 1;
                    }
                }
            }
        }
        // F antisymmetric and closed
        for mu in 0..d {
            for nu in 0..d {
                if !self.fstr[mu][nu].add(&self.fstr[nu][mu]).is_zero() {
                    bad += 1;
                }
                for lam in 0..d {
                    let s = self.fstr[mu][nu]
                        .d_coord(lam)
                        .add(&self.fstr[nu][lam].d_coord(mu))
                        .add(&self.fstr[lam][mu].d_coord(nu));
                    if !s.is_zero() {
                        bad += 1;
                    }
                }
            }
        }
        bad + self.verify_bianchi()
    }

    /// The two Bianchi identities: total antisymmetrization over the three
    /// form indices of `E_lam^a R_{mu nu a b}` and of the covariant-derivative
    /// expression.
    pub fn verify_bianchi(&self) -> usize {
        let d = self.dim;
        let vars = self.ctx.n_vars();
        let mut bad = 0usize;
        let lowered_riem = |mu: usize, nu: usize, a: usize, b: usize| -> Rat {
            self.riem[mu][nu][a][b].scale_int(self.eta[a])
        };
        let perms: [(usize, usize, usize, i64); 6] = [
            (0, 1, 2, 1),
            (1, 2, 0, 1),
            (2, 0, 1, 1),
            (1, 0, 2, -1),
            (0, 2, 1, -1),
            (2, 1, 0, -1),
        ];
        let mut idxs = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    idxs.push([i, j, k]);
                }
            }
        }
        for idx in &idxs {
            // algebraic identity: sum_a E_lam^a R_{mu nu a b}, antisymmetrized
            for b in 0..d {
                let mut s = Rat::zero(vars);
                for &(p0, p1, p2, sg) in &perms {
                    let (lam, mu, nu) = (idx[p0], idx[p1], idx[p2]);
                    for a in 0..d {
                        let t = self.frame[lam][a].mul(&lowered_riem(mu, nu, a, b));
                        s = s.add(&t.scale_int(sg));
                    }
                }
                if !s.is_zero() {
                    bad += 1;
                }
            }
            // differential identity: antisymmetrization of the covariant
            // derivative of R_{mu nu a b} in the internal indices
            for a in 0..d {
                for b in 0..d {
                    let mut s = Rat::zero(vars);
                    for &(p0, p1, p2, sg) in &perms {
                        let (lam, mu, nu) = (idx[p0], idx[p1], idx[p2]);
                        let mut t = lowered_riem(mu, nu, a, b).d_coord(lam);
                        for c in 0..d {
                            t = t.sub(&self.conn[lam][c][a].mul(&lowered_riem(mu, nu, c, b)));
                            t = t.sub(&self.conn[lam][c][b].mul(&lowered_riem(mu, nu, a, c)));
                        }
                        s = s.add(&t.scale_int(sg));
                    }
                    if !s.is_zero() {
                        bad += 1;
                    }
                }
            }
        }
        bad
    }
}

/// Named preset geometries.
pub fn preset(name: &str) -> Option<FrameData> {
    let r = match name {
        "flat2" => FrameData::from_text(
            "flat2",
            2,
            vec![1, 1],
            &[&["1", "0"], &["0", "1"]],
            &["0", "0"],
            &[],
        ),
        "flat4-lorentz" => FrameData::from_text(
            "flat4-lorentz",
            4,
            vec![-1, 1, 1, 1],
            &[
                &["1", "0", "0", "0"],
                &["0", "1", "0", "0"],
                &["0", "0", "1", "0"],
                &["0", "0", "0", "1"],
            ],
            &["0", "0", "0", "0"],
            &[],
        ),
        "polar2" => FrameData::from_text(
            "polar2",
            2,
            vec![1, 1],
            &[&["1", "0"], &["0", "x1"]],
            &["0", "0"],
            &[],
        ),
        "halfplane2" => FrameData::from_text(
            "halfplane2",
            2,
            vec![1, 1],
            &[&["1/x2", "0"], &["0", "1/x2"]],
            &["0", "0"],
            &[],
        ),
        "magnetic2" => FrameData::from_text(
            "magnetic2",
            2,
            vec![1, 1],
            &[&["1", "0"], &["0", "1"]],
            &["0", "B*x1"],
            &["B"],
        ),
        "halfplane2+B" => FrameData::from_text(
            "halfplane2+B",
            2,
            vec![1, 1],
            &[&["1/x2", "0"], &["0", "1/x2"]],
            &["0", "B*x1"],
            &["B"],
        ),
        _ => return None,
    };
    Some(r.expect("preset data parses"))
}

/// The six geometric preset names (the KdV mode is separate).
pub const GEOMETRY_PRESETS: [&str; 6] = [
    "flat2",
    "flat4-lorentz",
    "polar2",
    "halfplane2",
    "magnetic2",
    "halfplane2+B",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invert_examples() {
        let flat = preset("flat2").unwrap();
        let inv = invert_frame(&flat.frame).unwrap();
        assert!(inv[0][0].is_one() && inv[1][1].is_one());
        assert!(inv[0][1].is_zero() && inv[1][0].is_zero());

        let polar = preset("polar2").unwrap();
        let inv = invert_frame(&polar.frame).unwrap();
        let ctx = polar.ctx.clone();
        assert!(inv[1][1].eq_value(&parse_coeff("1/x1", &ctx).unwrap()));

        // generic 2x2 verified by multiplying back
        let ctx = Context::coords(2, &[]);
        let e = vec![
            vec![
                parse_coeff("1+x1", &ctx).unwrap(),
                parse_coeff("x2", &ctx).unwrap(),
            ],
            vec![
                parse_coeff("x1", &ctx).unwrap(),
                parse_coeff("2", &ctx).unwrap(),
            ],
        ];
        let inv = invert_frame(&e).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let mut s = Rat::zero(ctx.n_vars());
                for mu in 0..2 {
                    s = s.add(&e[mu][a].mul(&inv[b][mu]));
                }
                assert!(s.eq_value(&Rat::from_int(ctx.n_vars(), (a == b) as i64)));
            }
        }
    }

    #[test]
    fn singular_frame_rejected() {
        let ctx = Context::coords(2, &[]);
        let e = vec![
            vec![parse_coeff("x1", &ctx).unwrap(), parse_coeff("x2", &ctx).unwrap()],
            vec![parse_coeff("x1", &ctx).unwrap(), parse_coeff("x2", &ctx).unwrap()],
        ];
        assert!(matches!(
            invert_frame(&e).err(),
            Some(GeometryError::SingularFrame) | None
        ));
        let data = FrameData {
            dim: 2,
            eta: vec![1, 1],
            frame: e,
            potential: vec![Rat::zero(2), Rat::zero(2)],
            ctx,
            params: vec![],
            name: "bad".into(),
        };
        assert!(matches!(
            build_bundle(&data),
            Err(GeometryError::SingularFrame)
        ));
    }

    #[test]
    fn flat_and_polar_connections() {
        let b = build_bundle(&preset("flat2").unwrap()).unwrap();
        assert!(b.conn.iter().flatten().flatten().all(|w| w.is_zero()));
        assert!(b.is_flat());
        assert_eq!(b.verify(), 0);

        // polar coordinates: nonzero connection, identically flat
        let b = build_bundle(&preset("polar2").unwrap()).unwrap();
        assert!(!b.conn.iter().flatten().flatten().all(|w| w.is_zero()));
        assert!(b.is_flat());
        assert_eq!(b.verify(), 0);
    }

    #[test]
    fn halfplane_scalar_curvature() {
        let b = build_bundle(&preset("halfplane2").unwrap()).unwrap();
        assert!(!b.is_flat());
        let s = b.scalar_curvature();
        assert!(s.eq_value(&Rat::from_int(b.ctx.n_vars(), -2)));
        assert_eq!(b.verify(), 0);
    }

    #[test]
    fn field_strength_examples() {
        let b = build_bundle(&preset("magnetic2").unwrap()).unwrap();
        let bparam = parse_coeff("B", &b.ctx).unwrap();
        assert!(b.fstr[0][1].eq_value(&bparam));
        // constant F over a flat frame: covariant derivative vanishes
        assert!(b.nabla_f.iter().flatten().flatten().all(|r| r.is_zero()));
        assert_eq!(b.verify(), 0);

        // gradient potential: F = 0
        let ctx = Context::coords(2, &[]);
        let grad = vec![
            parse_coeff("x2", &ctx).unwrap(),
            parse_coeff("x1", &ctx).unwrap(),
        ];
        let f = field_strength(&grad);
        assert!(f.iter().flatten().all(|r| r.is_zero()));
    }

    #[test]
    fn combined_preset_verifies() {
        let b = build_bundle(&preset("halfplane2+B").unwrap()).unwrap();
        assert_eq!(b.verify(), 0);
        assert!(!b.is_flat());
        let b = build_bundle(&preset("flat4-lorentz").unwrap()).unwrap();
        assert_eq!(b.verify(), 0);
    }

    #[test]
    fn metric_from_frame_and_roundtrip() {
        for name in GEOMETRY_PRESETS {
            let b = build_bundle(&preset(name).unwrap()).unwrap();
            let d = b.dim;
            for mu in 0..d {
                for nu in 0..d {
                    // g_{mu nu} = eta_{ab} E_mu^a E_nu^b holds by construction;
                    // raise then lower an index and compare
                    let mut raised = Rat::zero(b.ctx.n_vars());
                    for l in 0..d {
                        raised = raised.add(&b.metric_inv[mu][l].mul(&b.metric[l][nu]));
                    }
                    let target = Rat::from_int(b.ctx.n_vars(), (mu == nu) as i64);
                    assert!(raised.eq_value(&target));
                }
            }
        }
    }
}
