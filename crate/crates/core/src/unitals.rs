//! The two ovoidal unital families in PG(2, q^2) and their machinery:
//! parameter validation, point-set construction, closed-form membership,
//! line classification, blocks, and the parameter equivalences realized as
//! explicit collineations.
//!
//! An orthogonal Buekenhout-Metz unital is
//!   U_{alpha,beta} = {(x, alpha x^2 + beta x^(q+1) + r, 1)} u {(0,1,0)},
//! subject to the discriminant condition (nonsquare for odd q, absolute
//! trace 0 for even q). A Buekenhout-Tits unital (q = 2^m, m odd > 1) is
//!   U_T = {(x0 + x1 d, r + f(x0,x1) d, 1)} u {(0,1,0)}
//! with f(x0,x1) = x0^(tau+2) + x0 x1 + x1^tau and d the cube root of unity.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParamViolation};
use crate::gf::{Field, FieldSpec, Fq, Fq2};
use crate::pg2::{self, Collineation, ProjLine, ProjPoint};

/// Validated parameters of an orthogonal Buekenhout-Metz unital.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BmParams {
    pub alpha: Fq2,
    pub beta: Fq2,
    pub discriminant: Fq,
    pub classical: bool,
}

impl BmParams {
    /// Checks the discriminant condition and returns the validated record.
    /// Classical parameters (alpha = 0) are accepted but flagged.
    pub fn validate(f: &Field, alpha: Fq2, beta: Fq2) -> Result<BmParams, Error> {
        let classical = alpha.is_zero();
        if f.char_is_two() {
            if f.in_base(beta) {
                return Err(Error::InvalidParams(ParamViolation::BetaInBaseField));
            }
            let tb = f.trace_rel(beta);
            let d = f.div(f.norm_rel(alpha), f.mul(tb, tb))?;
            if !f.abs_trace(d).is_zero() {
                return Err(Error::InvalidParams(ParamViolation::DiscriminantTraceNonzero {
                    d: d.index(),
                }));
            }
            Ok(BmParams { alpha, beta, discriminant: d, classical })
        } else {
            let diff = f.sub2(beta, f.frobenius_q(beta));
            let diff_sq = f.mul2(diff, diff);
            let four_norm = f.scale2(f.embed(f.norm_rel(alpha)), f.fq_from_int(4));
            let d2 = f.add2(diff_sq, four_norm);
            let d = f
                .as_base(d2)
                .ok_or_else(|| Error::Internal("discriminant left the base field".into()))?;
            if f.is_square(d)? {
                return Err(Error::InvalidParams(ParamViolation::DiscriminantIsSquare {
                    d: d.index(),
                }));
            }
            Ok(BmParams { alpha, beta, discriminant: d, classical })
        }
    }
}

/// Parameters of the Buekenhout-Tits unital; deterministic up to the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TitsParams {
    /// The cube root of unity in the F_4 subfield of GF(q^2).
    pub delta: Fq2,
    /// tau = 2^((m+1)/2).
    pub tau: u64,
}

impl TitsParams {
    pub fn new(f: &Field) -> Result<TitsParams, Error> {
        let tau = f.tau()?;
        if f.m() == 1 {
            return Err(Error::RequiresOddDegree);
        }
        let delta = f.find_cube_root_delta()?;
        Ok(TitsParams { delta, tau })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitalParams {
    OrthogonalBm(BmParams),
    Tits(TitsParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineClass {
    Tangent,
    Secant,
}

/// The q+1 unital points on a secant line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub line: ProjLine,
    pub points: Vec<ProjPoint>,
}

/// The Tits ovoid function f(x, y) = x^(tau+2) + x y + y^tau over GF(q).
pub fn tits_f(f: &Field, tau: u64, x: Fq, y: Fq) -> Fq {
    f.add(f.add(f.pow(x, tau + 2), f.mul(x, y)), f.pow(y, tau))
}

/// Writes x = x0 + x1 * delta with x0, x1 in GF(q); requires delta not in
/// GF(q) so that {1, delta} is a basis.
pub fn decompose_in_delta_basis(f: &Field, delta: Fq2, x: Fq2) -> (Fq, Fq) {
    debug_assert!(!delta.hi.is_zero());
    let x1 = f.div(x.hi, delta.hi).expect("delta does not lie in the base field");
    let x0 = f.sub(x.lo, f.mul(x1, delta.lo));
    (x0, x1)
}

/// The closed-form abscissa of Lemma-style block points on the line
/// [y, 1, 0]: x_lambda = -(alpha^q y + (lambda - beta) y^q) /
/// (alpha^(q+1) - (lambda - beta)^(q+1)).
pub fn bm_block_x(f: &Field, alpha: Fq2, beta: Fq2, y: Fq2, lambda: Fq) -> Result<Fq2, Error> {
    let lb = f.sub2(f.embed(lambda), beta);
    let num = f.add2(f.mul2(f.frobenius_q(alpha), y), f.mul2(lb, f.frobenius_q(y)));
    let den = f.sub(f.norm_rel(alpha), f.norm_rel(lb));
    if den.is_zero() {
        return Err(Error::Internal(
            "vanishing denominator in block formula; parameters fail the nonvanishing lemma"
                .into(),
        ));
    }
    Ok(f.neg2(f.scale2(num, f.inv(den)?)))
}

/// A unital, known by its parameters; the point set is materialized on
/// demand and cached. Membership testing never materializes.
pub struct Unital {
    field: Arc<Field>,
    params: UnitalParams,
    points: OnceLock<Vec<ProjPoint>>,
}

impl Unital {
    pub fn new_bm(field: Arc<Field>, alpha: Fq2, beta: Fq2) -> Result<Unital, Error> {
        let params = BmParams::validate(&field, alpha, beta)?;
        Ok(Unital { field, params: UnitalParams::OrthogonalBm(params), points: OnceLock::new() })
    }

    pub fn new_tits(field: Arc<Field>) -> Result<Unital, Error> {
        let params = TitsParams::new(&field)?;
        Ok(Unital { field, params: UnitalParams::Tits(params), points: OnceLock::new() })
    }

    pub fn from_params(field: Arc<Field>, params: UnitalParams) -> Unital {
        Unital { field, params, points: OnceLock::new() }
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn params(&self) -> &UnitalParams {
        &self.params
    }

    pub fn bm_params(&self) -> Option<&BmParams> {
        match &self.params {
            UnitalParams::OrthogonalBm(p) => Some(p),
            UnitalParams::Tits(_) => None,
        }
    }

    pub fn tits_params(&self) -> Option<&TitsParams> {
        match &self.params {
            UnitalParams::OrthogonalBm(_) => None,
            UnitalParams::Tits(p) => Some(p),
        }
    }

    pub fn is_classical(&self) -> bool {
        matches!(&self.params, UnitalParams::OrthogonalBm(p) if p.classical)
    }

    pub fn special_point(&self) -> ProjPoint {
        ProjPoint::special()
    }

    /// q^3 + 1.
    pub fn expected_size(&self) -> u64 {
        let q = self.field.q() as u64;
        q * q * q + 1
    }

    /// Closed-form membership test. For the Buekenhout-Metz family a point
    /// (x, y, 1) belongs iff y - alpha x^2 - beta x^(q+1) is fixed by the
    /// q-Frobenius; for Tits, iff the delta-component of y equals f(x0, x1).
    pub fn contains(&self, p: &ProjPoint) -> bool {
        let f = self.field.as_ref();
        let c = p.coords();
        if c[2].is_zero() {
            return *p == ProjPoint::special();
        }
        let (x, y) = (c[0], c[1]);
        match &self.params {
            UnitalParams::OrthogonalBm(bm) => {
                let ax2 = f.mul2(bm.alpha, f.mul2(x, x));
                let bxq1 = f.scale2(bm.beta, f.norm_rel(x));
                let w = f.sub2(f.sub2(y, ax2), bxq1);
                f.frobenius_q(w) == w
            }
            UnitalParams::Tits(t) => {
                let (x0, x1) = decompose_in_delta_basis(f, t.delta, x);
                let (_, y1) = decompose_in_delta_basis(f, t.delta, y);
                y1 == tits_f(f, t.tau, x0, x1)
            }
        }
    }

    fn materialize(&self) -> Result<Vec<ProjPoint>, Error> {
        let f = self.field.as_ref();
        let mut pts = Vec::with_capacity(self.expected_size() as usize);
        match &self.params {
            UnitalParams::OrthogonalBm(bm) => {
                for x in f.ext_elements() {
                    let base =
                        f.add2(f.mul2(bm.alpha, f.mul2(x, x)), f.scale2(bm.beta, f.norm_rel(x)));
                    for r in f.elements() {
                        let y = f.add2(base, f.embed(r));
                        pts.push(ProjPoint::new(f, [x, y, Fq2::ONE])?);
                    }
                }
            }
            UnitalParams::Tits(t) => {
                for x0 in f.elements() {
                    for x1 in f.elements() {
                        let x = f.add2(f.embed(x0), f.scale2(t.delta, x1));
                        let fx = tits_f(f, t.tau, x0, x1);
                        for r in f.elements() {
                            let y = f.add2(f.embed(r), f.scale2(t.delta, fx));
                            pts.push(ProjPoint::new(f, [x, y, Fq2::ONE])?);
                        }
                    }
                }
            }
        }
        pts.push(ProjPoint::special());
        pts.sort();
        if pts.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Internal("duplicate point during unital materialization".into()));
        }
        if pts.len() as u64 != self.expected_size() {
            return Err(Error::Internal(format!(
                "materialized {} points, expected {}",
                pts.len(),
                self.expected_size()
            )));
        }
        Ok(pts)
    }

    /// The materialized point set, sorted in enumeration order; built once
    /// and cached.
    pub fn points(&self) -> Result<&[ProjPoint], Error> {
        if self.points.get().is_none() {
            let pts = self.materialize()?;
            let _ = self.points.set(pts);
        }
        Ok(self.points.get().expect("just initialized").as_slice())
    }

    /// Tangent or secant; any other intersection size is an axiom violation
    /// and escalates.
    pub fn classify_line(&self, l: &ProjLine) -> Result<LineClass, Error> {
        let f = self.field.as_ref();
        let count =
            pg2::points_on_line(f, l).iter().filter(|p| self.contains(p)).count() as u32;
        match count {
            1 => Ok(LineClass::Tangent),
            c if c == f.q() + 1 => Ok(LineClass::Secant),
            c => Err(Error::AxiomViolation(format!(
                "line {:?} meets the unital in {} points",
                l.indices(f),
                c
            ))),
        }
    }

    /// The block on a secant line, by brute-force intersection.
    pub fn block_on_line(&self, l: &ProjLine) -> Result<Block, Error> {
        let f = self.field.as_ref();
        let points: Vec<ProjPoint> =
            pg2::points_on_line(f, l).into_iter().filter(|p| self.contains(p)).collect();
        match points.len() as u32 {
            1 => Err(Error::TangentLine),
            c if c == f.q() + 1 => Ok(Block { line: *l, points }),
            c => Err(Error::AxiomViolation(format!(
                "line {:?} meets the unital in {} points",
                l.indices(f),
                c
            ))),
        }
    }

    /// The block B_infinity = {(0, r, 1) : r in F_q} u {(0,1,0)} on the line
    /// [1, 0, 0].
    pub fn block_infinity(&self) -> Block {
        let f = self.field.as_ref();
        let line = ProjLine::new(f, [Fq2::ONE, Fq2::ZERO, Fq2::ZERO]).expect("nonzero triple");
        let mut points: Vec<ProjPoint> = f
            .elements()
            .map(|r| {
                ProjPoint::new(f, [Fq2::ZERO, f.embed(r), Fq2::ONE]).expect("nonzero triple")
            })
            .collect();
        points.push(ProjPoint::special());
        points.sort();
        Block { line, points }
    }

    /// The block B_y on the secant [y, 1, 0] through (0, 0, 1), in closed
    /// form: {(x_lambda, -x_lambda y, 1) : lambda in F_q} u {(0,0,1)}.
    /// Orthogonal Buekenhout-Metz only; y must be nonzero.
    pub fn block_by_formula(&self, y: Fq2) -> Result<Block, Error> {
        let f = self.field.as_ref();
        let bm = self.bm_params().ok_or(Error::WrongKind("block formula is Buekenhout-Metz"))?;
        if y.is_zero() {
            // [0,1,0] is the tangent at (0,0,1).
            return Err(Error::TangentLine);
        }
        let line = ProjLine::new(f, [y, Fq2::ONE, Fq2::ZERO])?;
        let mut set = std::collections::BTreeSet::new();
        set.insert(ProjPoint::new(f, [Fq2::ZERO, Fq2::ZERO, Fq2::ONE])?);
        for lambda in f.elements() {
            let x = bm_block_x(f, bm.alpha, bm.beta, y, lambda)?;
            let my = f.neg2(f.mul2(x, y));
            set.insert(ProjPoint::new(f, [x, my, Fq2::ONE])?);
        }
        if set.len() as u32 != f.q() + 1 {
            return Err(Error::AxiomViolation(format!(
                "closed-form block on [y,1,0] has {} points, expected {}",
                set.len(),
                f.q() + 1
            )));
        }
        Ok(Block { line, points: set.into_iter().collect() })
    }

    pub fn descriptor(&self) -> UnitalDescriptor {
        let f = self.field.as_ref();
        match &self.params {
            UnitalParams::OrthogonalBm(bm) => UnitalDescriptor {
                kind: "orthogonal-bm".into(),
                p: f.p(),
                m: f.m(),
                alpha: Some(f.fq2_index(bm.alpha)),
                beta: Some(f.fq2_index(bm.beta)),
                delta: None,
                tau: None,
                discriminant: Some(bm.discriminant.index()),
                classical: bm.classical,
            },
            UnitalParams::Tits(t) => UnitalDescriptor {
                kind: "tits".into(),
                p: f.p(),
                m: f.m(),
                alpha: None,
                beta: None,
                delta: Some(f.fq2_index(t.delta)),
                tau: Some(t.tau),
                discriminant: None,
                classical: false,
            },
        }
    }
}

impl std::fmt::Debug for Unital {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Unital")
            .field("q", &self.field.q())
            .field("params", &self.params)
            .finish()
    }
}

/// Serializable unital descriptor; element values are enumeration indices
/// under the deterministic field spec.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitalDescriptor {
    pub kind: String,
    pub p: u32,
    pub m: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub discriminant: Option<u32>,
    pub classical: bool,
}

impl UnitalDescriptor {
    /// Rebuilds the unital over the given field, re-validating everything.
    pub fn to_unital(&self, field: Arc<Field>) -> Result<Unital, Error> {
        if field.p() != self.p || field.m() != self.m {
            return Err(Error::SpecMismatch(format!(
                "descriptor is for p={}, m={}, field is p={}, m={}",
                self.p,
                self.m,
                field.p(),
                field.m()
            )));
        }
        match self.kind.as_str() {
            "orthogonal-bm" => {
                let alpha = field.fq2(self.alpha.ok_or_else(|| {
                    Error::SpecMismatch("orthogonal-bm descriptor without alpha".into())
                })?)?;
                let beta = field.fq2(self.beta.ok_or_else(|| {
                    Error::SpecMismatch("orthogonal-bm descriptor without beta".into())
                })?)?;
                let unital = Unital::new_bm(field, alpha, beta)?;
                if let Some(d) = self.discriminant {
                    let got = unital.bm_params().expect("bm unital").discriminant.index();
                    if got != d {
                        return Err(Error::SpecMismatch(format!(
                            "descriptor discriminant {d} does not match computed {got}"
                        )));
                    }
                }
                Ok(unital)
            }
            "tits" => Unital::new_tits(field),
            other => Err(Error::SpecMismatch(format!("unknown unital kind {other:?}"))),
        }
    }

    pub fn field_spec(&self) -> Result<Field, Error> {
        Field::build(self.p as u64, self.m)
    }
}

/// Header + descriptor pair, the self-describing form used in files.
pub fn descriptor_with_field(u: &Unital) -> (FieldSpec, UnitalDescriptor) {
    (u.field().spec(), u.descriptor())
}

/// All (alpha, beta) pairs passing validation, in enumeration order
/// (alpha index outer, beta index inner).
pub fn enumerate_valid_bm_params(f: &Field) -> Vec<BmParams> {
    let mut out = Vec::new();
    for alpha in f.ext_elements() {
        for beta in f.ext_elements() {
            if let Ok(p) = BmParams::validate(f, alpha, beta) {
                out.push(p);
            }
        }
    }
    out
}

/// The parameter transform alpha' = alpha^sigma s^2 f, beta' =
/// beta^sigma s^(q+1) f + u; validity is preserved.
pub fn equivalence_transform(
    field: &Field,
    params: &BmParams,
    f: Fq,
    s: Fq2,
    u: Fq,
    sigma_pow: u32,
) -> Result<BmParams, Error> {
    if f.is_zero() || s.is_zero() {
        return Err(Error::ZeroScale);
    }
    let alpha_s = field.apply_aut(params.alpha, sigma_pow);
    let beta_s = field.apply_aut(params.beta, sigma_pow);
    let alpha2 = field.mul2(alpha_s, field.scale2(field.mul2(s, s), f));
    let beta2 = field.add2(field.scale2(beta_s, field.mul(field.norm_rel(s), f)), field.embed(u));
    BmParams::validate(field, alpha2, beta2)
}

/// The collineation realizing `equivalence_transform` with the same (f, s,
/// sigma) and u = 0: (x, y, z) -> (s^-1 x^sigma, f y^sigma, z^sigma). Its
/// image of U_{alpha,beta} is U_{alpha',beta'} as a point set, the
/// F_q-shift u being absorbed by U_{alpha,beta+u} = U_{alpha,beta}.
pub fn equivalence_collineation(
    field: &Field,
    f: Fq,
    s: Fq2,
    sigma_pow: u32,
) -> Result<Collineation, Error> {
    if f.is_zero() || s.is_zero() {
        return Err(Error::ZeroScale);
    }
    Collineation::new(field, [field.inv2(s)?, field.embed(f), Fq2::ONE], sigma_pow)
}

/// Result of normalizing even-characteristic parameters to the canonical
/// form alpha = a in F_q*, beta = delta with delta + delta^q = 1 and
/// Tr_{q/2}(a^2 / v) = 1, v = delta^(q+1).
#[derive(Debug, Clone)]
pub struct EvenNormalization {
    pub params: BmParams,
    pub a: Fq,
    pub delta: Fq2,
    pub v: Fq,
    /// Sends the original unital's point set onto the normalized one.
    pub map: Collineation,
    pub f_scale: Fq,
    pub s: Fq2,
    pub u_shift: Fq,
}

fn is_normalized_even(f: &Field, params: &BmParams) -> bool {
    match f.as_base(params.alpha) {
        Some(a) if !a.is_zero() => {
            if f.trace_rel(params.beta) != Fq::ONE {
                return false;
            }
            let v = f.norm_rel(params.beta);
            f.abs_trace(f.div(f.mul(a, a), v).expect("v is nonzero")) == Fq::ONE
        }
        _ => false,
    }
}

/// Normalizes valid nonclassical even-characteristic parameters, searching
/// the smallest w in F_q* for the alpha direction and then the smallest
/// shift u in F_q that fixes the trace condition.
pub fn normalize_even_params(
    field: &Field,
    params: &BmParams,
) -> Result<EvenNormalization, Error> {
    if !field.char_is_two() {
        return Err(Error::RequiresCharTwo);
    }
    if params.classical {
        return Err(Error::Classical);
    }
    if is_normalized_even(field, params) {
        return Ok(EvenNormalization {
            params: *params,
            a: field.as_base(params.alpha).expect("normalized alpha is in F_q"),
            delta: params.beta,
            v: field.norm_rel(params.beta),
            map: Collineation::identity(),
            f_scale: Fq::ONE,
            s: Fq2::ONE,
            u_shift: Fq::ZERO,
        });
    }
    let tb = field.trace_rel(params.beta);
    debug_assert!(!tb.is_zero(), "validated even params have beta outside F_q");
    for w in field.elements().skip(1) {
        // alpha s^2 = w: unique s since squaring is bijective in char 2.
        let s = field.sqrt2(field.div2(field.embed(w), params.alpha)?)?;
        let f_scale = field.inv(field.mul(tb, field.norm_rel(s)))?;
        let a = field.mul(w, f_scale);
        let delta_cand = field.scale2(params.beta, field.mul(field.norm_rel(s), f_scale));
        debug_assert_eq!(field.trace_rel(delta_cand), Fq::ONE);
        for u in field.elements() {
            let delta = field.add2(delta_cand, field.embed(u));
            let v = field.norm_rel(delta);
            debug_assert!(!v.is_zero());
            if field.abs_trace(field.div(field.mul(a, a), v)?) == Fq::ONE {
                let normalized = BmParams::validate(field, field.embed(a), delta)?;
                let map = equivalence_collineation(field, f_scale, s, 0)?;
                return Ok(EvenNormalization {
                    params: normalized,
                    a,
                    delta,
                    v,
                    map,
                    f_scale,
                    s,
                    u_shift: u,
                });
            }
        }
    }
    Err(Error::TheoremViolation {
        context: "normalize_even_params".into(),
        dump: format!(
            "no trace-adjusting shift found for alpha index {}, beta index {} over q = {}",
            field.fq2_index(params.alpha),
            field.fq2_index(params.beta),
            field.q()
        ),
    })
}
