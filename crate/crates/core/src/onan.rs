//! O'Nan configurations: four distinct lines meeting in six distinct unital
//! points, three per line.
//!
//! This module provides the three explicit constructions (odd-characteristic
//! and even-characteristic orthogonal Buekenhout-Metz, and Buekenhout-Tits),
//! the scalar tables they rest on (kappa, G), an independent exhaustive
//! searcher with canonical-form deduplication, and the serializable
//! certificate / report formats.
//!
//! Constructors never trust their derivation: every output is re-verified
//! semantically through [`verify_config`], and a verification failure is
//! escalated as a theorem violation with a full state dump.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::gf::{Field, FieldSpec, Fq, Fq2};
use crate::pg2::{self, Collineation, ProjLine, ProjPoint};
use crate::unitals::{
    bm_block_x, normalize_even_params, BmParams, Unital, UnitalDescriptor, UnitalParams,
};

/// Canonical identity of a configuration: the sorted, normalized coefficient
/// index triples of its four lines.
pub type CanonicalKey = [[u32; 3]; 4];

/// Why a candidate quadruple of lines is not an O'Nan configuration of the
/// unital. `ContainsSpecialPoint` is reported only after every definitional
/// check has passed, so it flags a genuine counterexample to the special
/// point lemma rather than a malformed candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigRejection {
    DuplicateLine { i: usize, j: usize },
    ConcurrentLines { first: (usize, usize), second: (usize, usize), point: [u32; 3] },
    PointOutsideUnital { lines: (usize, usize), point: [u32; 3] },
    ContainsSpecialPoint,
}

impl std::fmt::Display for ConfigRejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigRejection::DuplicateLine { i, j } => {
                write!(f, "lines {i} and {j} coincide")
            }
            ConfigRejection::ConcurrentLines { first, second, point } => write!(
                f,
                "meets of line pairs {first:?} and {second:?} coincide at {point:?}"
            ),
            ConfigRejection::PointOutsideUnital { lines, point } => write!(
                f,
                "meet {point:?} of line pair {lines:?} lies outside the unital"
            ),
            ConfigRejection::ContainsSpecialPoint => {
                write!(f, "configuration contains the special point (0,1,0)")
            }
        }
    }
}

impl ConfigRejection {
    pub fn into_error(self) -> Error {
        Error::ConfigRejected(self.to_string())
    }
}

/// A verified O'Nan configuration in canonical form: lines sorted, points
/// sorted, incidence mapping each line to the indices of its three points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnanConfig {
    lines: [ProjLine; 4],
    points: [ProjPoint; 6],
    incidence: [[usize; 3]; 4],
}

impl OnanConfig {
    pub fn lines(&self) -> &[ProjLine; 4] {
        &self.lines
    }

    pub fn points(&self) -> &[ProjPoint; 6] {
        &self.points
    }

    pub fn incidence(&self) -> &[[usize; 3]; 4] {
        &self.incidence
    }

    pub fn contains_point(&self, p: &ProjPoint) -> bool {
        self.points.contains(p)
    }

    /// The dedup key; equal keys mean the same line set.
    pub fn canonical_key(&self, f: &Field) -> CanonicalKey {
        [
            self.lines[0].indices(f),
            self.lines[1].indices(f),
            self.lines[2].indices(f),
            self.lines[3].indices(f),
        ]
    }

    /// Image under a collineation, re-verified against the target unital.
    pub fn apply_collineation(
        &self,
        col: &Collineation,
        target: &Unital,
    ) -> Result<OnanConfig, ConfigRejection> {
        let f = target.field().as_ref();
        let mapped = [
            col.apply_line(f, &self.lines[0]),
            col.apply_line(f, &self.lines[1]),
            col.apply_line(f, &self.lines[2]),
            col.apply_line(f, &self.lines[3]),
        ];
        verify_config(target, mapped)
    }
}

/// Verifies that four lines form an O'Nan configuration of the unital:
/// pairwise distinct lines, six pairwise distinct meets, all six on the
/// unital, and (checked last) none of them the special point.
pub fn verify_config(u: &Unital, lines_in: [ProjLine; 4]) -> Result<OnanConfig, ConfigRejection> {
    let f = u.field().as_ref();
    for i in 0..4 {
        for j in i + 1..4 {
            if lines_in[i] == lines_in[j] {
                return Err(ConfigRejection::DuplicateLine { i, j });
            }
        }
    }
    let mut lines = lines_in;
    lines.sort_unstable();

    // the search visits this path once per candidate, so keep it free of
    // heap allocation
    const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut meets = [ProjPoint::special(); 6];
    for (slot, &(i, j)) in meets.iter_mut().zip(PAIRS.iter()) {
        *slot = pg2::meet(f, &lines[i], &lines[j]).expect("lines are distinct");
    }
    for a in 0..6 {
        for b in a + 1..6 {
            if meets[a] == meets[b] {
                return Err(ConfigRejection::ConcurrentLines {
                    first: PAIRS[a],
                    second: PAIRS[b],
                    point: meets[a].indices(f),
                });
            }
        }
    }
    for (k, p) in meets.iter().enumerate() {
        if !u.contains(p) {
            return Err(ConfigRejection::PointOutsideUnital {
                lines: PAIRS[k],
                point: p.indices(f),
            });
        }
    }
    let special = ProjPoint::special();
    if meets.contains(&special) {
        return Err(ConfigRejection::ContainsSpecialPoint);
    }

    let mut points = meets;
    points.sort_unstable();
    let mut incidence = [[0usize; 3]; 4];
    for (i, row) in incidence.iter_mut().enumerate() {
        let mut slot = 0;
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            if a == i || b == i {
                row[slot] =
                    points.iter().position(|x| *x == meets[k]).expect("meet is stored");
                slot += 1;
            }
        }
        debug_assert_eq!(slot, 3);
        row.sort_unstable();
    }
    Ok(OnanConfig { lines, points, incidence })
}

// --- odd characteristic -----------------------------------------------------

/// The central involution (x, y, z) -> (-x, y, z) stabilizing every
/// U_{alpha,beta}.
pub fn odd_involution(f: &Field) -> Collineation {
    Collineation::new(f, [f.neg2(Fq2::ONE), Fq2::ONE, Fq2::ONE], 0)
        .expect("scales are nonzero")
}

/// Replaces beta by beta + u for the smallest u in F_q making
/// Tr_{q^2/q}(alpha - beta) nonzero; the point set is unchanged.
pub fn trace_shift(f: &Field, params: &BmParams) -> Result<(BmParams, Fq), Error> {
    for u in f.elements() {
        let beta = f.add2(params.beta, f.embed(u));
        if !f.trace_rel(f.sub2(params.alpha, beta)).is_zero() {
            return Ok((BmParams::validate(f, params.alpha, beta)?, u));
        }
    }
    Err(Error::Internal("no shift can make the relative trace nonzero".into()))
}

/// Table of kappa(x) = h(x) / g(x) over F_q, with numerator h(X) =
/// (X + alpha^q - beta)^(q+1) and denominator g(X) = alpha^(q+1) -
/// (X - beta)^(q+1), the norm-form numerator and denominator of the block
/// abscissa x_X at y = 1. (When Tr_{q^2/q}(beta) = 0 the denominator reduces
/// to the familiar -X^2 + alpha^(q+1) - beta^(q+1).) For valid nonclassical
/// parameters both are nonvanishing on F_q by the nonvanishing lemma, so
/// kappa lands in F_q*; with Tr_{q^2/q}(alpha - beta) != 0 the image has at
/// least ceil(q/2) values.
#[derive(Debug, Clone)]
pub struct KappaTable {
    /// kappa(lambda), indexed by lambda.index().
    pub values: Vec<Fq>,
    pub image: BTreeSet<Fq>,
    /// kappa value -> the lambdas mapping to it, sorted.
    pub preimages: BTreeMap<Fq, Vec<Fq>>,
}

pub fn kappa_table(f: &Field, params: &BmParams) -> Result<KappaTable, Error> {
    if f.char_is_two() {
        return Err(Error::RequiresOddChar);
    }
    if params.classical {
        return Err(Error::Classical);
    }
    let norm_alpha = f.norm_rel(params.alpha);
    let aq_b = f.sub2(f.frobenius_q(params.alpha), params.beta);
    let mut values = Vec::with_capacity(f.q() as usize);
    for lambda in f.elements() {
        let lb = f.sub2(f.embed(lambda), params.beta);
        let g = f.sub(norm_alpha, f.norm_rel(lb));
        let h = f.norm_rel(f.add2(f.embed(lambda), aq_b));
        if g.is_zero() || h.is_zero() {
            return Err(Error::TheoremViolation {
                context: "kappa_table".into(),
                dump: format!(
                    "g or h vanishes at lambda index {} for alpha index {}, beta index {} \
                     (contradicts the nonvanishing lemma)",
                    lambda.index(),
                    f.fq2_index(params.alpha),
                    f.fq2_index(params.beta)
                ),
            });
        }
        values.push(f.div(h, g)?);
    }
    let image: BTreeSet<Fq> = values.iter().copied().collect();
    let mut preimages: BTreeMap<Fq, Vec<Fq>> = BTreeMap::new();
    for lambda in f.elements() {
        preimages.entry(values[lambda.index() as usize]).or_default().push(lambda);
    }
    Ok(KappaTable { values, image, preimages })
}

/// The sigma-symmetric candidate quadruple for a lambda pair: the fixed
/// lines `[-1,1,0]` and `[1,1,0]` through (0,0,1), plus join(A, sigma B) and its
/// sigma-image, where A, B are the block points of parameters lambda1,
/// lambda2 on the line y = x.
pub fn odd_candidate_lines(
    f: &Field,
    params: &BmParams,
    lambda1: Fq,
    lambda2: Fq,
) -> Result<[ProjLine; 4], Error> {
    let y = f.fq2_from_int(-1);
    let x1 = bm_block_x(f, params.alpha, params.beta, y, lambda1)?;
    let x2 = bm_block_x(f, params.alpha, params.beta, y, lambda2)?;
    let a = ProjPoint::new(f, [x1, x1, Fq2::ONE])?;
    let b = ProjPoint::new(f, [x2, x2, Fq2::ONE])?;
    let sigma = odd_involution(f);
    let sa = sigma.apply_point(f, &a);
    let sb = sigma.apply_point(f, &b);
    let l_plus = ProjLine::new(f, [f.neg2(Fq2::ONE), Fq2::ONE, Fq2::ZERO])?;
    let l_minus = ProjLine::new(f, [Fq2::ONE, Fq2::ONE, Fq2::ZERO])?;
    let lp = pg2::join(f, &a, &sb)?;
    let lpp = pg2::join(f, &b, &sa)?;
    Ok([l_plus, l_minus, lp, lpp])
}

/// Construction trace recorded in certificates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstructionTrace {
    Odd { u_shift: u32, lambda1: u32, lambda2: u32, r: u32 },
    Even {
        f_scale: u32,
        s: u64,
        u_shift: u32,
        a: u32,
        delta: u64,
        v: u32,
        lambda1: u32,
        lambda2: u32,
        r: u32,
    },
    Tits { c: u32, v: u32, a_coeff: u32, r1: u32, r2: u32 },
}

/// Builds a sigma-invariant O'Nan configuration in a nonclassical odd-order
/// orthogonal Buekenhout-Metz unital: shift beta so the relative trace of
/// alpha - beta is nonzero, pick the lexicographically smallest pair with
/// kappa(lambda1) + kappa(lambda2) = 0, and verify the resulting quadruple.
pub fn construct_odd(u: &Unital) -> Result<(OnanConfig, ConstructionTrace), Error> {
    let f = u.field().as_ref();
    let params = u.bm_params().ok_or(Error::WrongKind("construct_odd needs Buekenhout-Metz"))?;
    if f.char_is_two() {
        return Err(Error::RequiresOddChar);
    }
    if params.classical {
        return Err(Error::Classical);
    }
    let (shifted, u_shift) = trace_shift(f, params)?;
    let table = kappa_table(f, &shifted)?;

    let mut pair = None;
    'outer: for l1 in f.elements() {
        for l2 in f.elements() {
            let k1 = table.values[l1.index() as usize];
            let k2 = table.values[l2.index() as usize];
            if f.add(k1, k2).is_zero() {
                pair = Some((l1, l2));
                break 'outer;
            }
        }
    }
    let Some((lambda1, lambda2)) = pair else {
        return Err(Error::TheoremViolation {
            context: "construct_odd".into(),
            dump: format!(
                "no pair with kappa sum zero over q = {}; alpha index {}, beta index {}, \
                 kappa values {:?}",
                f.q(),
                f.fq2_index(shifted.alpha),
                f.fq2_index(shifted.beta),
                table.values.iter().map(|k| k.index()).collect::<Vec<_>>()
            ),
        });
    };

    let lines = odd_candidate_lines(f, &shifted, lambda1, lambda2)?;
    let config = verify_config(u, lines).map_err(|rej| Error::TheoremViolation {
        context: "construct_odd".into(),
        dump: format!(
            "candidate for lambda pair ({}, {}) rejected: {rej}\nlines: {:?}",
            lambda1.index(),
            lambda2.index(),
            lines.map(|l| l.indices(f))
        ),
    })?;

    let meet = pg2::meet(f, &lines[2], &lines[3]).expect("verified lines are distinct");
    let r = f
        .as_base(meet.coords()[1])
        .filter(|_| meet.coords()[0].is_zero())
        .ok_or_else(|| Error::Internal("odd construction meet is not of the form (0,r,1)".into()))?;
    let trace = ConstructionTrace::Odd {
        u_shift: u_shift.index(),
        lambda1: lambda1.index(),
        lambda2: lambda2.index(),
        r: r.index(),
    };
    Ok((config, trace))
}

// --- even characteristic ----------------------------------------------------

/// G(X) over F_q for normalized even parameters (alpha = a in F_q*, beta =
/// delta): the meet of ell_infinity with the line joining the block point
/// P_lambda to its Frobenius image is (0, 1/G(lambda), 1). Denominator zeros
/// are reported as None.
pub fn g_table(f: &Field, params: &BmParams) -> Result<Vec<Option<Fq>>, Error> {
    if !f.char_is_two() {
        return Err(Error::RequiresCharTwo);
    }
    let a = match f.as_base(params.alpha) {
        Some(a) if !a.is_zero() => a,
        _ => return Err(Error::NotNormalized),
    };
    if f.trace_rel(params.beta) != Fq::ONE {
        return Err(Error::NotNormalized);
    }
    let v = f.norm_rel(params.beta);
    let a2 = f.mul(a, a);
    let mut out = Vec::with_capacity(f.q() as usize);
    for x in f.elements() {
        let x2 = f.mul(x, x);
        // (a^2 + X^2 + X + v)(X + a)
        let num = f.mul(f.add(f.add(a2, x2), f.add(x, v)), f.add(x, a));
        // X^2 v + X(a + v) + a v + v^2 + a^2 v
        let den = f.add(
            f.add(f.mul(x2, v), f.mul(x, f.add(a, v))),
            f.add(f.mul(a, v), f.add(f.mul(v, v), f.mul(a2, v))),
        );
        out.push(if den.is_zero() { None } else { Some(f.div(num, den)?) });
    }
    Ok(out)
}

/// The phi-symmetric candidate quadruple for a lambda pair over normalized
/// even parameters: the lines `[delta,1,0]` and `[delta^q,1,0]` through (0,0,1),
/// plus the joins of each block point with its Frobenius image. Fails with
/// `EqualArguments` when a block point is Frobenius-fixed (lambda = a).
pub fn even_candidate_lines(
    f: &Field,
    params: &BmParams,
    lambda1: Fq,
    lambda2: Fq,
) -> Result<[ProjLine; 4], Error> {
    let delta = params.beta;
    let phi = Collineation::frobenius_q_map(f);
    let mut cross = Vec::with_capacity(2);
    for lambda in [lambda1, lambda2] {
        let x = bm_block_x(f, params.alpha, delta, delta, lambda)?;
        let p = ProjPoint::new(f, [x, f.mul2(delta, x), Fq2::ONE])?;
        let pq = phi.apply_point(f, &p);
        cross.push(pg2::join(f, &p, &pq)?);
    }
    let l_delta = ProjLine::new(f, [delta, Fq2::ONE, Fq2::ZERO])?;
    let l_delta_q = ProjLine::new(f, [f.frobenius_q(delta), Fq2::ONE, Fq2::ZERO])?;
    Ok([l_delta, l_delta_q, cross[0], cross[1]])
}

/// Builds an O'Nan configuration in a nonclassical even-order orthogonal
/// Buekenhout-Metz unital: normalize the parameters, solve
/// Z^2 + Z + (a^2/v + v) = 0 for the lambda pair, verify the phi-symmetric
/// quadruple over the normalized unital, and carry the result back through
/// the inverse collineation.
pub fn construct_even(u: &Unital) -> Result<(OnanConfig, ConstructionTrace), Error> {
    let f = u.field().as_ref();
    let params = u.bm_params().ok_or(Error::WrongKind("construct_even needs Buekenhout-Metz"))?;
    if !f.char_is_two() {
        return Err(Error::RequiresCharTwo);
    }
    if params.classical {
        return Err(Error::Classical);
    }
    let norm = normalize_even_params(f, params)?;
    let (a, v) = (norm.a, norm.v);
    if a == v {
        return Err(Error::Internal(
            "a = v after normalization; trace conditions exclude this".into(),
        ));
    }
    let unital_n =
        Unital::from_params(u.field().clone(), UnitalParams::OrthogonalBm(norm.params));

    let coeff = f.add(f.div(f.mul(a, a), v)?, v);
    let roots = f.solve_artin_schreier(coeff)?;
    if roots.len() != 2 {
        return Err(Error::TheoremViolation {
            context: "construct_even".into(),
            dump: format!(
                "Z^2 + Z + a^2/v + v = 0 has {} roots for a index {}, v index {} \
                 (absolute trace should vanish)",
                roots.len(),
                a.index(),
                v.index()
            ),
        });
    }
    let mut lambdas: Vec<Fq> = roots.iter().map(|&z| f.add(z, a)).collect();
    lambdas.sort();
    let (lambda1, lambda2) = (lambdas[0], lambdas[1]);

    let theorem_violation = |msg: String| Error::TheoremViolation {
        context: "construct_even".into(),
        dump: format!(
            "{msg}\nnormalized a index {}, delta index {}, lambda pair ({}, {})",
            a.index(),
            f.fq2_index(norm.delta),
            lambda1.index(),
            lambda2.index()
        ),
    };
    let lines = even_candidate_lines(f, &norm.params, lambda1, lambda2)
        .map_err(|e| theorem_violation(format!("candidate lines degenerate: {e}")))?;
    let config_n = verify_config(&unital_n, lines)
        .map_err(|rej| theorem_violation(format!("candidate rejected: {rej}")))?;

    let meet = pg2::meet(f, &lines[2], &lines[3]).expect("verified lines are distinct");
    let r = f
        .as_base(meet.coords()[1])
        .filter(|r| meet.coords()[0].is_zero() && !r.is_zero())
        .ok_or_else(|| {
            theorem_violation("meet of the symmetric lines is not (0, r, 1) with r nonzero".into())
        })?;
    debug_assert_eq!(r, f.div(v, f.add(v, a)).unwrap());

    let config = config_n
        .apply_collineation(&norm.map.inverse(f), u)
        .map_err(|rej| Error::Internal(format!("inverse image failed verification: {rej}")))?;
    let trace = ConstructionTrace::Even {
        f_scale: norm.f_scale.index(),
        s: f.fq2_index(norm.s),
        u_shift: norm.u_shift.index(),
        a: a.index(),
        delta: f.fq2_index(norm.delta),
        v: v.index(),
        lambda1: lambda1.index(),
        lambda2: lambda2.index(),
        r: r.index(),
    };
    Ok((config, trace))
}

// --- Buekenhout-Tits ----------------------------------------------------------

/// The smallest c in F_q* with Tr_{q/2}(c^(tau+2) + c + 1) = 0.
pub fn find_c(f: &Field, tau: u64) -> Result<Fq, Error> {
    for c in f.elements().skip(1) {
        let val = f.add(f.add(f.pow(c, tau + 2), c), Fq::ONE);
        if f.abs_trace(val).is_zero() {
            return Ok(c);
        }
    }
    Err(Error::TheoremViolation {
        context: "find_c".into(),
        dump: format!("no c in F_{}* satisfies the trace condition", f.q()),
    })
}

/// Builds an O'Nan configuration in the Buekenhout-Tits unital containing
/// (0,0,1), ell_infinity and ell_c, whose three ell_infinity points lie in
/// the Baer subline B_infinity: choose c by the trace lemma, compute v and
/// the Artin-Schreier-style coefficient A, solve Y^tau + Y + A = 0, and set
/// r_i = Y_i / c^tau for the two remaining lines [r_i + v + delta, 1, r_i].
pub fn construct_tits(u: &Unital) -> Result<(OnanConfig, ConstructionTrace), Error> {
    let f = u.field().as_ref();
    let t = u.tits_params().ok_or(Error::WrongKind("construct_tits needs a Tits unital"))?;
    let tau = t.tau;
    let delta = t.delta;
    let c = find_c(f, tau)?;
    let ct = f.pow(c, tau);
    debug_assert_ne!(ct, Fq::ONE, "c = 1 never satisfies the trace condition");
    // v = (c^2 + c^(1-tau) + c^(tau+1)) / (c^tau + 1)
    let v = f.div(
        f.add(f.add(f.mul(c, c), f.div(c, ct)?), f.mul(ct, c)),
        f.add(ct, Fq::ONE),
    )?;
    // A = (1+c)^(tau+2) + c + c^tau v + c^2 v^tau
    let a_coeff = f.add(
        f.add(f.pow(f.add(Fq::ONE, c), tau + 2), c),
        f.add(f.mul(ct, v), f.mul(f.mul(c, c), f.pow(v, tau))),
    );
    let dump_scalars = || {
        format!(
            "q = {}, c index {}, v index {}, A index {}",
            f.q(),
            c.index(),
            v.index(),
            a_coeff.index()
        )
    };
    let ys = f.solve_tau_equation(a_coeff)?;
    if ys.len() != 2 || ys.contains(&Fq::ZERO) {
        return Err(Error::TheoremViolation {
            context: "construct_tits".into(),
            dump: format!(
                "Y^tau + Y + A = 0 expected two nonzero roots, got {:?}; {}",
                ys.iter().map(|y| y.index()).collect::<Vec<_>>(),
                dump_scalars()
            ),
        });
    }
    let mut rs: Vec<Fq> = ys.iter().map(|&y| f.div(y, ct).expect("c^tau is nonzero")).collect();
    rs.sort();
    let (r1, r2) = (rs[0], rs[1]);

    let l_inf = ProjLine::new(f, [Fq2::ONE, Fq2::ZERO, Fq2::ZERO])?;
    let l_c = ProjLine::new(f, [f.embed(c), Fq2::ONE, Fq2::ZERO])?;
    let cross_line = |r: Fq| {
        ProjLine::new(f, [f.add2(f.embed(f.add(r, v)), delta), Fq2::ONE, f.embed(r)])
    };
    let lines = [l_inf, l_c, cross_line(r1)?, cross_line(r2)?];
    let config = verify_config(u, lines).map_err(|rej| Error::TheoremViolation {
        context: "construct_tits".into(),
        dump: format!("candidate rejected: {rej}; {}", dump_scalars()),
    })?;

    // The cross lines are built to meet at P = (1, v + delta, 1).
    let p = ProjPoint::new(f, [Fq2::ONE, f.add2(f.embed(v), delta), Fq2::ONE])?;
    if pg2::meet(f, &lines[2], &lines[3]).expect("distinct lines") != p {
        return Err(Error::Internal("Tits cross lines do not meet at (1, v+delta, 1)".into()));
    }
    let trace = ConstructionTrace::Tits {
        c: c.index(),
        v: v.index(),
        a_coeff: a_coeff.index(),
        r1: r1.index(),
        r2: r2.index(),
    };
    Ok((config, trace))
}

/// Dispatches to the construction matching the unital.
pub fn construct(u: &Unital) -> Result<(OnanConfig, ConstructionTrace), Error> {
    match u.params() {
        UnitalParams::OrthogonalBm(_) => {
            if u.field().char_is_two() {
                construct_even(u)
            } else {
                construct_odd(u)
            }
        }
        UnitalParams::Tits(_) => construct_tits(u),
    }
}

// --- exhaustive search --------------------------------------------------------

/// One deduplicated configuration from a search, with the number of times
/// the enumeration visited it (a consistency statistic).
#[derive(Debug, Clone)]
pub struct FoundConfig {
    pub config: OnanConfig,
    pub visits: u64,
}

/// Deterministic search result: census keyed by canonical form plus
/// search-space statistics. Independent of worker count and scheduling.
#[derive(Debug, Clone, Default)]
pub struct SearchOutcome {
    pub census: BTreeMap<CanonicalKey, FoundConfig>,
    pub vertices: u64,
    pub secant_pairs: u64,
    pub candidates: u64,
}

impl SearchOutcome {
    pub fn count(&self) -> u64 {
        self.census.len() as u64
    }

    pub fn total_visits(&self) -> u64 {
        self.census.values().map(|c| c.visits).sum()
    }
}

fn search_vertex(u: &Unital, vertex: &ProjPoint) -> Result<SearchOutcome, Error> {
    let f = u.field().as_ref();
    let mut secants: Vec<(ProjLine, Vec<ProjPoint>)> = Vec::new();
    for line in pg2::lines_through(f, vertex) {
        let members: Vec<ProjPoint> =
            pg2::points_on_line(f, &line).into_iter().filter(|p| u.contains(p)).collect();
        match members.len() as u32 {
            1 => {}
            c if c == f.q() + 1 => {
                let others: Vec<ProjPoint> =
                    members.into_iter().filter(|p| p != vertex).collect();
                secants.push((line, others));
            }
            c => {
                return Err(Error::AxiomViolation(format!(
                    "line {:?} meets the unital in {} points",
                    line.indices(f),
                    c
                )))
            }
        }
    }

    let mut out = SearchOutcome { vertices: 1, ..Default::default() };
    for (i, (l1, blk1)) in secants.iter().enumerate() {
        for (j, (l2, blk2)) in secants.iter().enumerate() {
            if i == j {
                continue;
            }
            out.secant_pairs += 1;
            for a in blk1 {
                for c in blk1 {
                    if a == c {
                        continue;
                    }
                    for b in blk2 {
                        for d in blk2 {
                            if b == d {
                                continue;
                            }
                            out.candidates += 1;
                            let l3 = pg2::join(f, a, b).expect("points on distinct secants");
                            let l4 = pg2::join(f, c, d).expect("points on distinct secants");
                            let e = pg2::meet(f, &l3, &l4).expect("cross lines are distinct");
                            if !u.contains(&e) {
                                continue;
                            }
                            match verify_config(u, [*l1, *l2, l3, l4]) {
                                Ok(config) => {
                                    let key = config.canonical_key(f);
                                    out.census
                                        .entry(key)
                                        .or_insert(FoundConfig { config, visits: 0 })
                                        .visits += 1;
                                }
                                Err(ConfigRejection::ContainsSpecialPoint) => {
                                    return Err(Error::TheoremViolation {
                                        context: "exhaustive_search".into(),
                                        dump: format!(
                                            "O'Nan configuration through the special point; \
                                             lines {:?}",
                                            [*l1, *l2, l3, l4].map(|l| l.indices(f))
                                        ),
                                    });
                                }
                                Err(_) => {}
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn merge_outcomes(mut acc: SearchOutcome, other: SearchOutcome) -> SearchOutcome {
    acc.vertices += other.vertices;
    acc.secant_pairs += other.secant_pairs;
    acc.candidates += other.candidates;
    for (key, found) in other.census {
        acc.census
            .entry(key)
            .and_modify(|f| f.visits += found.visits)
            .or_insert(found);
    }
    acc
}

/// Independent exhaustive enumeration of O'Nan configurations. For each
/// vertex (all unital points, or just the anchor), each ordered pair of
/// secants through it and each ordered pair of points on each block, the
/// candidate quadruple is verified in full; results are deduplicated by
/// canonical key. The vertex loop is partitioned over the rayon pool; the
/// merged result does not depend on worker count.
pub fn exhaustive_search(
    u: &Unital,
    anchor: Option<&ProjPoint>,
) -> Result<SearchOutcome, Error> {
    let vertices: Vec<ProjPoint> = match anchor {
        Some(p) => {
            if !u.contains(p) {
                return Err(Error::VerificationFailed(
                    "anchor point does not lie on the unital".into(),
                ));
            }
            vec![*p]
        }
        None => u.points()?.to_vec(),
    };
    vertices
        .par_iter()
        .map(|p| search_vertex(u, p))
        .try_reduce(SearchOutcome::default, |a, b| Ok(merge_outcomes(a, b)))
}

// --- serialized artifacts -------------------------------------------------------

/// Self-contained, re-verifiable JSON certificate of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub field: FieldSpec,
    pub unital: UnitalDescriptor,
    pub lines: [[u32; 3]; 4],
    pub points: [[u32; 3]; 6],
    pub incidence: [[usize; 3]; 4],
    pub trace: ConstructionTrace,
    pub verified: bool,
}

impl Certificate {
    pub fn new(u: &Unital, config: &OnanConfig, trace: ConstructionTrace) -> Certificate {
        let f = u.field().as_ref();
        Certificate {
            field: f.spec(),
            unital: u.descriptor(),
            lines: config.canonical_key(f),
            points: config.points().map(|p| p.indices(f)),
            incidence: *config.incidence(),
            trace,
            verified: true,
        }
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        let mut key = self.lines;
        key.sort_unstable();
        key
    }

    /// Full re-verification from scratch: rebuild the field and unital,
    /// re-run the configuration checks, and compare every recorded datum.
    pub fn reverify(&self) -> Result<(), Error> {
        if !self.verified {
            return Err(Error::VerificationFailed("certificate is not marked verified".into()));
        }
        let field = Arc::new(Field::from_spec(&self.field)?);
        let unital = self.unital.to_unital(field.clone())?;
        let f = field.as_ref();
        let mut lines = [ProjLine::new(f, [Fq2::ONE, Fq2::ZERO, Fq2::ZERO])?; 4];
        for (slot, idx) in lines.iter_mut().zip(self.lines) {
            let line = ProjLine::from_indices(f, idx)?;
            if line.indices(f) != idx {
                return Err(Error::VerificationFailed(format!(
                    "line {idx:?} is not in normalized form"
                )));
            }
            *slot = line;
        }
        let config = verify_config(&unital, lines).map_err(|rej| {
            Error::VerificationFailed(format!("configuration check failed: {rej}"))
        })?;
        if config.canonical_key(f) != self.canonical_key() {
            return Err(Error::VerificationFailed("line set changed under verification".into()));
        }
        if config.points().map(|p| p.indices(f)) != self.points {
            return Err(Error::VerificationFailed(
                "recorded points differ from the recomputed meets".into(),
            ));
        }
        if *config.incidence() != self.incidence {
            return Err(Error::VerificationFailed(
                "recorded incidence differs from the recomputed incidence".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub vertices: u64,
    pub secant_pairs: u64,
    pub candidates: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportedConfig {
    pub lines: [[u32; 3]; 4],
    pub points: [[u32; 3]; 6],
    pub visits: u64,
}

/// Deterministic machine-readable search report. Wall time deliberately
/// lives outside this structure so that identical runs are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub field: FieldSpec,
    pub unital: UnitalDescriptor,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub anchor: Option<[u32; 3]>,
    pub configuration_count: u64,
    pub total_visits: u64,
    pub search_space: SearchSpace,
    pub configurations: Vec<ReportedConfig>,
    pub truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub contains_certificate: Option<bool>,
}

pub fn build_search_report(
    u: &Unital,
    outcome: &SearchOutcome,
    anchor: Option<&ProjPoint>,
    list_limit: Option<usize>,
    certificate_key: Option<&CanonicalKey>,
) -> SearchReport {
    let f = u.field().as_ref();
    let limit = list_limit.unwrap_or(usize::MAX);
    let configurations: Vec<ReportedConfig> = outcome
        .census
        .values()
        .take(limit)
        .map(|found| ReportedConfig {
            lines: found.config.canonical_key(f),
            points: found.config.points().map(|p| p.indices(f)),
            visits: found.visits,
        })
        .collect();
    SearchReport {
        field: f.spec(),
        unital: u.descriptor(),
        mode: if anchor.is_some() { "anchored".into() } else { "full".into() },
        anchor: anchor.map(|p| p.indices(f)),
        configuration_count: outcome.count(),
        total_visits: outcome.total_visits(),
        search_space: SearchSpace {
            vertices: outcome.vertices,
            secant_pairs: outcome.secant_pairs,
            candidates: outcome.candidates,
        },
        configurations,
        truncated: outcome.census.len() > limit,
        contains_certificate: certificate_key.map(|key| outcome.census.contains_key(key)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3_nonclassical() -> Unital {
        let f = Arc::new(Field::build(3, 1).unwrap());
        let alpha = f.fq2(4).unwrap();
        Unital::new_bm(f, alpha, Fq2::ZERO).unwrap()
    }

    #[test]
    fn verify_rejects_concurrent_lines() {
        let u = q3_nonclassical();
        let f = u.field().as_ref();
        // four lines through (0,0,1)
        let pencil: Vec<ProjLine> = f
            .ext_elements()
            .take(4)
            .map(|y| ProjLine::new(f, [y, Fq2::ONE, Fq2::ZERO]).unwrap())
            .collect();
        let lines: [ProjLine; 4] = pencil.try_into().unwrap();
        assert!(matches!(
            verify_config(&u, lines),
            Err(ConfigRejection::ConcurrentLines { .. })
        ));
        let dup = [lines[0], lines[0], lines[1], lines[2]];
        assert!(matches!(
            verify_config(&u, dup),
            Err(ConfigRejection::DuplicateLine { .. })
        ));
    }

    #[test]
    fn construct_odd_q3() {
        let u = q3_nonclassical();
        let f = u.field().as_ref();
        let (config, trace) = construct_odd(&u).unwrap();
        // sigma fixes the configuration
        let sigma = odd_involution(f);
        let image = config.apply_collineation(&sigma, &u).unwrap();
        assert_eq!(image.canonical_key(f), config.canonical_key(f));
        let ConstructionTrace::Odd { r, .. } = trace else { panic!("odd trace") };
        assert!(r < f.q());
        // every configuration point is on the unital and none is special
        for p in config.points() {
            assert!(u.contains(p));
            assert_ne!(*p, ProjPoint::special());
        }
    }

    #[test]
    fn construct_refuses_classical() {
        let f = Arc::new(Field::build(3, 1).unwrap());
        let classical = Unital::new_bm(f.clone(), Fq2::ZERO, f.gen_t()).unwrap();
        assert!(matches!(construct_odd(&classical), Err(Error::Classical)));
        assert!(matches!(construct(&classical), Err(Error::Classical)));
    }

    #[test]
    fn construct_even_q4() {
        let f = Arc::new(Field::build(2, 2).unwrap());
        let valid = crate::unitals::enumerate_valid_bm_params(&f);
        let params = valid.iter().find(|p| !p.classical).unwrap();
        let u = Unital::new_bm(f.clone(), params.alpha, params.beta).unwrap();
        let (config, trace) = construct_even(&u).unwrap();
        for p in config.points() {
            assert!(u.contains(p));
        }
        let ConstructionTrace::Even { r, .. } = trace else { panic!("even trace") };
        assert_ne!(r, 0);
    }

    #[test]
    fn construct_tits_q8() {
        let f = Arc::new(Field::build(2, 3).unwrap());
        let u = Unital::new_tits(f.clone()).unwrap();
        let (config, trace) = construct_tits(&u).unwrap();
        let ConstructionTrace::Tits { c, r1, r2, .. } = trace else { panic!("tits trace") };
        assert_ne!(r1, r2);
        assert_ne!(r1, 0);
        assert_ne!(r2, 0);
        // c = 1 fails the trace condition for q = 8
        assert_ne!(c, 1);
        for p in config.points() {
            assert!(u.contains(p));
        }
    }

    #[test]
    fn search_smoke_q3() {
        let u = q3_nonclassical();
        let f = u.field().as_ref();
        let outcome = exhaustive_search(&u, None).unwrap();
        assert!(outcome.count() >= 1);
        let (config, _) = construct_odd(&u).unwrap();
        assert!(outcome.census.contains_key(&config.canonical_key(f)));

        // anchored search at (0,0,1) finds only configurations through it
        let p = ProjPoint::new(f, [Fq2::ZERO, Fq2::ZERO, Fq2::ONE]).unwrap();
        let anchored = exhaustive_search(&u, Some(&p)).unwrap();
        assert!(anchored.count() >= 1);
        for found in anchored.census.values() {
            assert!(found.config.contains_point(&p));
        }
        // off-unital anchor is rejected
        let off = ProjPoint::new(f, [Fq2::ONE, Fq2::ZERO, Fq2::ZERO]).unwrap();
        assert!(exhaustive_search(&u, Some(&off)).is_err());
    }

    #[test]
    fn certificate_round_trip() {
        let u = q3_nonclassical();
        let (config, trace) = construct_odd(&u).unwrap();
        let cert = Certificate::new(&u, &config, trace);
        cert.reverify().unwrap();
        let json = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cert);
        back.reverify().unwrap();

        let mut tampered = cert.clone();
        tampered.points[0] = [999, 999, 999];
        assert!(tampered.reverify().is_err());
    }

    #[test]
    fn canonical_key_is_order_free() {
        let u = q3_nonclassical();
        let f = u.field().as_ref();
        let (config, _) = construct_odd(&u).unwrap();
        let mut lines = *config.lines();
        lines.reverse();
        let again = verify_config(&u, lines).unwrap();
        assert_eq!(again.canonical_key(f), config.canonical_key(f));
        assert_eq!(again, config);
    }
}
