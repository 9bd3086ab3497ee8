//! The Desarguesian projective plane PG(2, q^2): points, lines, incidence,
//! joins, meets, cross-ratios and Baer sublines.
//!
//! Points and lines are homogeneous triples over GF(q^2), normalized so that
//! the last nonzero coordinate is 1. All equality tests and orderings work on
//! normalized triples; the ordering is lexicographic on the serialized
//! element indices, which fixes a reproducible enumeration everywhere.

use crate::error::Error;
use crate::gf::{Field, Fq2};

/// A point of PG(2, q^2), normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjPoint([Fq2; 3]);

/// A line `[u]` = {x : x . u = 0} of PG(2, q^2), coefficients normalized the
/// same way as point coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjLine([Fq2; 3]);

fn normalize(f: &Field, mut c: [Fq2; 3]) -> Result<[Fq2; 3], Error> {
    let k = (0..3).rev().find(|&i| !c[i].is_zero()).ok_or(Error::ZeroTriple)?;
    let s = f.inv2(c[k])?;
    for x in &mut c {
        *x = f.mul2(*x, s);
    }
    Ok(c)
}

fn index_triple(f: &Field, c: &[Fq2; 3]) -> [u32; 3] {
    [
        f.fq2_index(c[0]) as u32,
        f.fq2_index(c[1]) as u32,
        f.fq2_index(c[2]) as u32,
    ]
}

fn triple_from_indices(f: &Field, idx: [u32; 3]) -> Result<[Fq2; 3], Error> {
    Ok([f.fq2(idx[0] as u64)?, f.fq2(idx[1] as u64)?, f.fq2(idx[2] as u64)?])
}

impl ProjPoint {
    pub fn new(f: &Field, coords: [Fq2; 3]) -> Result<ProjPoint, Error> {
        Ok(ProjPoint(normalize(f, coords)?))
    }

    /// The special point (0, 1, 0).
    pub fn special() -> ProjPoint {
        ProjPoint([Fq2::ZERO, Fq2::ONE, Fq2::ZERO])
    }

    pub fn coords(&self) -> &[Fq2; 3] {
        &self.0
    }

    pub fn indices(&self, f: &Field) -> [u32; 3] {
        index_triple(f, &self.0)
    }

    pub fn from_indices(f: &Field, idx: [u32; 3]) -> Result<ProjPoint, Error> {
        ProjPoint::new(f, triple_from_indices(f, idx)?)
    }
}

impl ProjLine {
    pub fn new(f: &Field, coeffs: [Fq2; 3]) -> Result<ProjLine, Error> {
        Ok(ProjLine(normalize(f, coeffs)?))
    }

    pub fn coeffs(&self) -> &[Fq2; 3] {
        &self.0
    }

    pub fn indices(&self, f: &Field) -> [u32; 3] {
        index_triple(f, &self.0)
    }

    pub fn from_indices(f: &Field, idx: [u32; 3]) -> Result<ProjLine, Error> {
        ProjLine::new(f, triple_from_indices(f, idx)?)
    }
}

/// x . u = 0 under the usual Euclidean inner product.
pub fn incident(f: &Field, p: &ProjPoint, l: &ProjLine) -> bool {
    let mut acc = Fq2::ZERO;
    for i in 0..3 {
        acc = f.add2(acc, f.mul2(p.0[i], l.0[i]));
    }
    acc.is_zero()
}

fn cross(f: &Field, a: &[Fq2; 3], b: &[Fq2; 3]) -> [Fq2; 3] {
    [
        f.sub2(f.mul2(a[1], b[2]), f.mul2(a[2], b[1])),
        f.sub2(f.mul2(a[2], b[0]), f.mul2(a[0], b[2])),
        f.sub2(f.mul2(a[0], b[1]), f.mul2(a[1], b[0])),
    ]
}

/// The unique line through two distinct points.
pub fn join(f: &Field, p: &ProjPoint, q: &ProjPoint) -> Result<ProjLine, Error> {
    if p == q {
        return Err(Error::EqualArguments);
    }
    ProjLine::new(f, cross(f, &p.0, &q.0))
}

/// The unique point on two distinct lines; dual of join.
pub fn meet(f: &Field, l: &ProjLine, m: &ProjLine) -> Result<ProjPoint, Error> {
    if l == m {
        return Err(Error::EqualArguments);
    }
    ProjPoint::new(f, cross(f, &l.0, &m.0))
}

/// Two independent solutions of u . x = 0, spanning the line.
fn line_basis(f: &Field, u: &[Fq2; 3]) -> ([Fq2; 3], [Fq2; 3]) {
    let k = (0..3).rev().find(|&i| !u[i].is_zero()).expect("normalized triple is nonzero");
    let inv = f.inv2(u[k]).expect("pivot is nonzero");
    let others: Vec<usize> = (0..3).filter(|&i| i != k).collect();
    let mut basis = Vec::with_capacity(2);
    for &i in &others {
        let mut v = [Fq2::ZERO; 3];
        v[i] = Fq2::ONE;
        v[k] = f.neg2(f.mul2(u[i], inv));
        basis.push(v);
    }
    (basis[0], basis[1])
}

/// The q^2 + 1 points of a line, sorted in enumeration order.
pub fn points_on_line(f: &Field, l: &ProjLine) -> Vec<ProjPoint> {
    let (v1, v2) = line_basis(f, &l.0);
    let mut pts = Vec::with_capacity(f.q2() as usize + 1);
    pts.push(ProjPoint::new(f, v2).expect("basis vector is nonzero"));
    for s in f.ext_elements() {
        let c = [
            f.add2(v1[0], f.mul2(s, v2[0])),
            f.add2(v1[1], f.mul2(s, v2[1])),
            f.add2(v1[2], f.mul2(s, v2[2])),
        ];
        pts.push(ProjPoint::new(f, c).expect("line points are nonzero"));
    }
    pts.sort();
    debug_assert!(pts.windows(2).all(|w| w[0] != w[1]));
    pts
}

/// The q^2 + 1 lines through a point, sorted; dual of points_on_line.
pub fn lines_through(f: &Field, p: &ProjPoint) -> Vec<ProjLine> {
    let (v1, v2) = line_basis(f, &p.0);
    let mut lines = Vec::with_capacity(f.q2() as usize + 1);
    lines.push(ProjLine::new(f, v2).expect("basis vector is nonzero"));
    for s in f.ext_elements() {
        let c = [
            f.add2(v1[0], f.mul2(s, v2[0])),
            f.add2(v1[1], f.mul2(s, v2[1])),
            f.add2(v1[2], f.mul2(s, v2[2])),
        ];
        lines.push(ProjLine::new(f, c).expect("pencil lines are nonzero"));
    }
    lines.sort();
    lines
}

fn all_triples(f: &Field) -> Vec<[Fq2; 3]> {
    let mut out = Vec::with_capacity((f.q2() * f.q2() + f.q2() + 1) as usize);
    for x in f.ext_elements() {
        for y in f.ext_elements() {
            out.push([x, y, Fq2::ONE]);
        }
    }
    for x in f.ext_elements() {
        out.push([x, Fq2::ONE, Fq2::ZERO]);
    }
    out.push([Fq2::ONE, Fq2::ZERO, Fq2::ZERO]);
    out
}

/// All q^4 + q^2 + 1 points of the plane, sorted in enumeration order.
pub fn all_points(f: &Field) -> Vec<ProjPoint> {
    let mut pts: Vec<ProjPoint> = all_triples(f).into_iter().map(ProjPoint).collect();
    pts.sort();
    pts
}

/// All q^4 + q^2 + 1 lines of the plane, sorted in enumeration order.
pub fn all_lines(f: &Field) -> Vec<ProjLine> {
    let mut lines: Vec<ProjLine> = all_triples(f).into_iter().map(ProjLine).collect();
    lines.sort();
    lines
}

/// A cross-ratio value in GF(q^2) together with the point at infinity of the
/// parameter line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossRatio {
    Finite(Fq2),
    Infinite,
}

impl CrossRatio {
    /// Whether the value lies in F_q (as the Frobenius-fixed subfield) or is
    /// infinite; this is the Baer subline membership test.
    pub fn in_base(&self, f: &Field) -> bool {
        match self {
            CrossRatio::Finite(x) => f.in_base(*x),
            CrossRatio::Infinite => true,
        }
    }
}

/// Homogeneous parameter (a : b) of x = a*p0 + b*p1 on the line spanned by
/// p0, p1. The caller guarantees x lies on that line.
fn line_param(f: &Field, p0: &ProjPoint, p1: &ProjPoint, x: &ProjPoint) -> (Fq2, Fq2) {
    for i in 0..3 {
        for j in i + 1..3 {
            let det = f.sub2(f.mul2(p0.0[i], p1.0[j]), f.mul2(p0.0[j], p1.0[i]));
            if !det.is_zero() {
                let dinv = f.inv2(det).expect("nonzero determinant");
                let a = f.mul2(f.sub2(f.mul2(x.0[i], p1.0[j]), f.mul2(x.0[j], p1.0[i])), dinv);
                let b = f.mul2(f.sub2(f.mul2(p0.0[i], x.0[j]), f.mul2(p0.0[j], x.0[i])), dinv);
                return (a, b);
            }
        }
    }
    unreachable!("p0 and p1 are distinct projective points")
}

fn param_det(f: &Field, a: (Fq2, Fq2), b: (Fq2, Fq2)) -> Fq2 {
    f.sub2(f.mul2(a.0, b.1), f.mul2(a.1, b.0))
}

/// Cross-ratio of four parameters, of which the first three are pairwise
/// distinct; the fourth may coincide with one of them.
fn cross_ratio_of_params(
    f: &Field,
    ta: (Fq2, Fq2),
    tb: (Fq2, Fq2),
    tc: (Fq2, Fq2),
    td: (Fq2, Fq2),
) -> CrossRatio {
    let num = f.mul2(param_det(f, ta, tc), param_det(f, tb, td));
    let den = f.mul2(param_det(f, ta, td), param_det(f, tb, tc));
    if den.is_zero() {
        CrossRatio::Infinite
    } else {
        CrossRatio::Finite(f.div2(num, den).expect("nonzero denominator"))
    }
}

/// Classical cross-ratio (A, B; C, D) of four distinct collinear points. The
/// parameterization anchors are the two enumeration-smallest points of the
/// line; the value does not depend on that choice up to the invariance that
/// matters here (membership of the value in F_q).
pub fn cross_ratio(
    f: &Field,
    a: &ProjPoint,
    b: &ProjPoint,
    c: &ProjPoint,
    d: &ProjPoint,
) -> Result<CrossRatio, Error> {
    let pts = [a, b, c, d];
    for i in 0..4 {
        for j in i + 1..4 {
            if pts[i] == pts[j] {
                return Err(Error::CrossRatioDegenerate("repeated point"));
            }
        }
    }
    let l = join(f, a, b)?;
    if !incident(f, c, &l) || !incident(f, d, &l) {
        return Err(Error::CrossRatioDegenerate("points not collinear"));
    }
    let on_line = points_on_line(f, &l);
    let (p0, p1) = (&on_line[0], &on_line[1]);
    let ta = line_param(f, p0, p1, a);
    let tb = line_param(f, p0, p1, b);
    let tc = line_param(f, p0, p1, c);
    let td = line_param(f, p0, p1, d);
    Ok(cross_ratio_of_params(f, ta, tb, tc, td))
}

/// Whether s is a Baer subline: q+1 distinct collinear points such that,
/// anchoring on its three smallest points, every cross-ratio lies in
/// F_q union {infinity}, and s is exactly the closure of those anchors.
pub fn is_baer_subline(f: &Field, s: &[ProjPoint]) -> Result<bool, Error> {
    let expected = f.q() as usize + 1;
    if s.len() != expected {
        return Err(Error::BaerPrecondition(format!(
            "expected q+1 = {} points, got {}",
            expected,
            s.len()
        )));
    }
    let mut sorted = s.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::BaerPrecondition("repeated point".into()));
    }
    let l = join(f, &sorted[0], &sorted[1])?;
    if sorted.iter().any(|p| !incident(f, p, &l)) {
        return Err(Error::BaerPrecondition("points not collinear".into()));
    }

    let on_line = points_on_line(f, &l);
    let (p0, p1) = (&on_line[0], &on_line[1]);
    let ta = line_param(f, p0, p1, &sorted[0]);
    let tb = line_param(f, p0, p1, &sorted[1]);
    let tc = line_param(f, p0, p1, &sorted[2]);
    let in_closure = |x: &ProjPoint| {
        let tx = line_param(f, p0, p1, x);
        cross_ratio_of_params(f, ta, tb, tc, tx).in_base(f)
    };

    if !sorted.iter().all(&in_closure) {
        return Ok(false);
    }
    // The given points all sit in the closure of the three anchors; they are
    // the whole closure exactly when the closure has q+1 points.
    let closure_size = on_line.iter().filter(|p| in_closure(p)).count();
    Ok(closure_size == expected)
}

/// A diagonal semilinear collineation (x0, x1, x2) -> (s0 x0^sigma,
/// s1 x1^sigma, s2 x2^sigma) with sigma the frob_pow-th power of the
/// absolute Frobenius of GF(q^2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Collineation {
    scales: [Fq2; 3],
    frob_pow: u32,
}

impl Collineation {
    pub fn new(f: &Field, scales: [Fq2; 3], frob_pow: u32) -> Result<Collineation, Error> {
        if scales.iter().any(|s| s.is_zero()) {
            return Err(Error::ZeroScale);
        }
        Ok(Collineation { scales, frob_pow: frob_pow % f.aut_order() })
    }

    pub fn identity() -> Collineation {
        Collineation { scales: [Fq2::ONE; 3], frob_pow: 0 }
    }

    /// The involution (x, y, z) -> (x^q, y^q, z^q).
    pub fn frobenius_q_map(f: &Field) -> Collineation {
        Collineation { scales: [Fq2::ONE; 3], frob_pow: f.m() }
    }

    pub fn scales(&self) -> [Fq2; 3] {
        self.scales
    }

    pub fn frob_pow(&self) -> u32 {
        self.frob_pow
    }

    pub fn is_identity(&self) -> bool {
        self.frob_pow == 0 && self.scales.iter().all(|&s| s == Fq2::ONE)
    }

    pub fn apply_point(&self, f: &Field, p: &ProjPoint) -> ProjPoint {
        let c = p.coords();
        let mapped = [
            f.mul2(self.scales[0], f.apply_aut(c[0], self.frob_pow)),
            f.mul2(self.scales[1], f.apply_aut(c[1], self.frob_pow)),
            f.mul2(self.scales[2], f.apply_aut(c[2], self.frob_pow)),
        ];
        ProjPoint::new(f, mapped).expect("collineation image is nonzero")
    }

    /// Image of a line: coefficients map by u_i -> u_i^sigma / s_i.
    pub fn apply_line(&self, f: &Field, l: &ProjLine) -> ProjLine {
        let c = l.coeffs();
        let mapped = [
            f.div2(f.apply_aut(c[0], self.frob_pow), self.scales[0]).expect("nonzero scale"),
            f.div2(f.apply_aut(c[1], self.frob_pow), self.scales[1]).expect("nonzero scale"),
            f.div2(f.apply_aut(c[2], self.frob_pow), self.scales[2]).expect("nonzero scale"),
        ];
        ProjLine::new(f, mapped).expect("collineation image is nonzero")
    }

    pub fn inverse(&self, f: &Field) -> Collineation {
        let inv_pow = (f.aut_order() - self.frob_pow) % f.aut_order();
        let scales = self.scales.map(|s| {
            f.apply_aut(f.inv2(s).expect("collineation scales are nonzero"), inv_pow)
        });
        Collineation { scales, frob_pow: inv_pow }
    }
}
