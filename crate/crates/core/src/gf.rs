//! The finite field tower GF(p) -> GF(q = p^m) -> GF(q^2).
//!
//! The tower is deterministic: both defining polynomials are the smallest
//! monic irreducibles of their degree, where polynomials are ordered by the
//! integer value of their non-leading coefficient vector, low degree first
//! (so the candidate with value sum c_i * p^i is tried in increasing order).
//! Elements are indexed the same way, which makes every serialized artifact
//! reproducible from (p, m) alone.
//!
//! GF(q) arithmetic is table-driven; GF(q^2) is handled as a degree-2
//! extension lo + hi*t over GF(q), which keeps the q-Frobenius, relative
//! trace and relative norm O(1).

use crate::error::Error;
use serde::{Deserialize, Serialize};

/// Desk-scale bound on the base field order q = p^m.
pub const MAX_Q: u32 = 1024;

/// Element of GF(q), stored as its enumeration index sum c_i * p^i.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fq(u32);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Element of GF(q^2), stored as lo + hi*t for the adjoined root t.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Fq2 {
    pub lo: Fq,
    pub hi: Fq,
}

impl Fq2 {
    pub const ZERO: Fq2 = Fq2 { lo: Fq::ZERO, hi: Fq::ZERO };
    pub const ONE: Fq2 = Fq2 { lo: Fq::ONE, hi: Fq::ZERO };

    pub fn is_zero(self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }
}

// Order by enumeration index lo + q*hi; hi is the more significant digit.
impl Ord for Fq2 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.hi, self.lo).cmp(&(other.hi, other.lo))
    }
}

impl PartialOrd for Fq2 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Serializable field header; reconstructing from (p, m) must reproduce the
/// polynomials bit-exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub m: u32,
    /// Monic degree-m polynomial over GF(p), coefficients low degree first.
    pub irr_q: Vec<u32>,
    /// Monic degree-2 polynomial over GF(q); each coefficient is the GF(p)
    /// coefficient vector of an element of GF(q), low degree first.
    pub irr_q2: Vec<Vec<u32>>,
}

/// The built tower with its arithmetic tables. Immutable after construction;
/// all operations are pure and safe to share across threads.
pub struct Field {
    p: u32,
    m: u32,
    q: u32,
    irr_q: Vec<u32>,
    /// irr_q2 = X^2 + c1*X + c0 over GF(q).
    c0: Fq,
    c1: Fq,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// --- polynomial helpers over GF(p), used only while building the tables ---

fn poly_trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// Remainder of a modulo the monic polynomial mp (coefficients low first).
fn poly_rem(p: u32, mut a: Vec<u32>, mp: &[u32]) -> Vec<u32> {
    let dm = mp.len() - 1;
    while a.len() > dm {
        let lead = *a.last().unwrap();
        let shift = a.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in mp.iter().enumerate() {
                let idx = shift + i;
                let sub = (lead * c) % p;
                a[idx] = (a[idx] + p - sub) % p;
            }
        }
        a.pop();
    }
    poly_trim(&mut a);
    a
}

fn poly_mul(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &ca) in a.iter().enumerate() {
        if ca == 0 {
            continue;
        }
        for (j, &cb) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ca * cb) % p;
        }
    }
    out
}

/// Irreducibility over GF(p) by trial division against every monic
/// polynomial of degree 1..=deg/2. Fine at desk scale.
fn poly_is_irreducible(p: u32, poly: &[u32]) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for v in 0..count {
            let mut div = decode_coeffs(p, d as u32, v as u32);
            div.push(1);
            if poly_rem(p, poly.to_vec(), &div).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Index -> coefficient vector of length m (low degree first).
fn decode_coeffs(p: u32, m: u32, mut idx: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(m as usize);
    for _ in 0..m {
        out.push(idx % p);
        idx /= p;
    }
    out
}

fn encode_coeffs(p: u32, coeffs: &[u32]) -> u32 {
    let mut idx = 0u32;
    for &c in coeffs.iter().rev() {
        idx = idx * p + c;
    }
    idx
}

impl Field {
    /// Builds the deterministic tower for q = p^m. Rejects non-prime p and
    /// orders outside the supported range 2 < q <= MAX_Q.
    pub fn build(p: u64, m: u32) -> Result<Field, Error> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::UnsupportedOrder(1));
        }
        let mut q: u64 = 1;
        for _ in 0..m {
            q = q.saturating_mul(p);
        }
        if q <= 2 || q > MAX_Q as u64 {
            return Err(Error::UnsupportedOrder(q));
        }
        let p = p as u32;
        let q = q as u32;

        // Smallest monic irreducible of degree m over GF(p).
        let irr_q = if m == 1 {
            vec![0, 1]
        } else {
            let mut found = None;
            for v in 0..q {
                let mut cand = decode_coeffs(p, m, v);
                cand.push(1);
                if poly_is_irreducible(p, &cand) {
                    found = Some(cand);
                    break;
                }
            }
            found.ok_or_else(|| Error::Internal("no irreducible polynomial found".into()))?
        };

        // GF(q) tables.
        let qs = q as usize;
        let coeffs: Vec<Vec<u32>> = (0..q).map(|v| decode_coeffs(p, m, v)).collect();
        let mut add = vec![0u32; qs * qs];
        let mut mul = vec![0u32; qs * qs];
        let mut neg = vec![0u32; qs];
        for a in 0..qs {
            let ca = &coeffs[a];
            let nc: Vec<u32> = ca.iter().map(|&c| (p - c) % p).collect();
            neg[a] = encode_coeffs(p, &nc);
            for b in 0..qs {
                let cb = &coeffs[b];
                let sum: Vec<u32> = ca.iter().zip(cb).map(|(&x, &y)| (x + y) % p).collect();
                add[a * qs + b] = encode_coeffs(p, &sum);
                let prod = poly_rem(p, poly_mul(p, ca, cb), &irr_q);
                mul[a * qs + b] = encode_coeffs(p, &prod);
            }
        }
        let mut field = Field {
            p,
            m,
            q,
            irr_q,
            c0: Fq::ZERO,
            c1: Fq::ZERO,
            add,
            mul,
            neg,
            inv: vec![0u32; qs],
        };
        for a in 1..q {
            field.inv[a as usize] = field.pow(Fq(a), q as u64 - 2).0;
        }

        // Smallest monic irreducible quadratic over GF(q): X^2 + c1*X + c0,
        // candidates ordered by index(c0) + q*index(c1). Irreducible over a
        // field iff it has no root.
        let mut found = None;
        'outer: for v in 0..(q as u64) * (q as u64) {
            let cand0 = Fq((v % q as u64) as u32);
            let cand1 = Fq((v / q as u64) as u32);
            for x in 0..q {
                let x = Fq(x);
                let val = field.add(field.add(field.mul(x, x), field.mul(cand1, x)), cand0);
                if val.is_zero() {
                    continue 'outer;
                }
            }
            found = Some((cand0, cand1));
            break;
        }
        let (c0, c1) =
            found.ok_or_else(|| Error::Internal("no irreducible quadratic found".into()))?;
        field.c0 = c0;
        field.c1 = c1;
        Ok(field)
    }

    /// Rebuilds the field from a serialized header, verifying that the header
    /// matches the deterministic construction for its (p, m).
    pub fn from_spec(spec: &FieldSpec) -> Result<Field, Error> {
        let field = Field::build(spec.p as u64, spec.m)?;
        let fresh = field.spec();
        if fresh != *spec {
            return Err(Error::SpecMismatch(format!(
                "header does not match the deterministic tower for p={}, m={}",
                spec.p, spec.m
            )));
        }
        Ok(field)
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec {
            p: self.p,
            m: self.m,
            irr_q: self.irr_q.clone(),
            irr_q2: vec![
                decode_coeffs(self.p, self.m, self.c0.0),
                decode_coeffs(self.p, self.m, self.c1.0),
                {
                    let mut one = vec![0u32; self.m as usize];
                    one[0] = 1;
                    one
                },
            ],
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn q2(&self) -> u64 {
        self.q as u64 * self.q as u64
    }

    pub fn char_is_two(&self) -> bool {
        self.p == 2
    }

    pub fn irr_q(&self) -> &[u32] {
        &self.irr_q
    }

    /// Coefficients (c0, c1) of irr_q2 = X^2 + c1*X + c0.
    pub fn irr_q2(&self) -> (Fq, Fq) {
        (self.c0, self.c1)
    }

    // --- GF(q) ---

    pub fn fq(&self, index: u32) -> Result<Fq, Error> {
        if index < self.q {
            Ok(Fq(index))
        } else {
            Err(Error::IndexOutOfRange { index: index as u64, order: self.q as u64 })
        }
    }

    /// The integer constant n as a field element (n mod p).
    pub fn fq_from_int(&self, n: i64) -> Fq {
        let p = self.p as i64;
        Fq(n.rem_euclid(p) as u32)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> + '_ {
        (0..self.q).map(Fq)
    }

    /// GF(p) coefficient vector of x in the power basis of irr_q.
    pub fn fq_coeffs(&self, x: Fq) -> Vec<u32> {
        decode_coeffs(self.p, self.m, x.0)
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.add[(a.0 * self.q + b.0) as usize])
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        Fq(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.mul[(a.0 * self.q + b.0) as usize])
    }

    pub fn inv(&self, a: Fq) -> Result<Fq, Error> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Fq(self.inv[a.0 as usize]))
    }

    pub fn div(&self, a: Fq, b: Fq) -> Result<Fq, Error> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// a^e by square and multiply; a^0 = 1 by convention, including a = 0.
    pub fn pow(&self, a: Fq, mut e: u64) -> Fq {
        let mut base = a;
        let mut acc = Fq::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Tr_{q/p^d}(x) = x + x^(p^d) + ... + x^(p^(m-d)); requires d | m.
    pub fn trace(&self, x: Fq, d: u32) -> Result<Fq, Error> {
        if d == 0 || self.m % d != 0 {
            return Err(Error::BadTraceDegree { d, m: self.m });
        }
        let step = (self.p as u64).pow(d);
        let mut term = x;
        let mut acc = Fq::ZERO;
        for _ in 0..self.m / d {
            acc = self.add(acc, term);
            term = self.pow(term, step);
        }
        Ok(acc)
    }

    /// Absolute trace Tr_{q/p}.
    pub fn abs_trace(&self, x: Fq) -> Fq {
        self.trace(x, 1).expect("d = 1 always divides m")
    }

    /// Whether x is a square in GF(q); zero counts as a square. Odd p only.
    pub fn is_square(&self, x: Fq) -> Result<bool, Error> {
        if self.char_is_two() {
            return Err(Error::RequiresOddChar);
        }
        if x.is_zero() {
            return Ok(true);
        }
        Ok(self.pow(x, (self.q as u64 - 1) / 2) == Fq::ONE)
    }

    /// Roots of Z^2 + Z + A = 0 over GF(q), characteristic 2. Returns both
    /// roots (they differ by 1) when Tr_{q/2}(A) = 0, the empty set otherwise.
    pub fn solve_artin_schreier(&self, a: Fq) -> Result<Vec<Fq>, Error> {
        if !self.char_is_two() {
            return Err(Error::RequiresCharTwo);
        }
        if !self.abs_trace(a).is_zero() {
            return Ok(Vec::new());
        }
        let z = if self.m % 2 == 1 {
            // Half trace: z = sum_{i=0}^{(m-1)/2} A^(4^i) solves z^2 + z = A
            // when m is odd.
            let mut term = a;
            let mut acc = Fq::ZERO;
            for _ in 0..(self.m + 1) / 2 {
                acc = self.add(acc, term);
                term = self.pow(term, 4);
            }
            acc
        } else {
            // Even m: exhaust. Desk scale keeps this cheap.
            let mut found = None;
            for z in self.elements() {
                if self.add(self.mul(z, z), z) == a {
                    found = Some(z);
                    break;
                }
            }
            found.ok_or_else(|| {
                Error::Internal("trace-zero Artin-Schreier equation with no root".into())
            })?
        };
        debug_assert_eq!(self.add(self.mul(z, z), z), a);
        let z1 = self.add(z, Fq::ONE);
        let mut roots = vec![z, z1];
        roots.sort();
        Ok(roots)
    }

    /// tau = 2^((m+1)/2); defined for characteristic 2 with m odd.
    pub fn tau(&self) -> Result<u64, Error> {
        if !self.char_is_two() {
            return Err(Error::RequiresCharTwo);
        }
        if self.m % 2 == 0 {
            return Err(Error::RequiresOddDegree);
        }
        Ok(1u64 << ((self.m + 1) / 2))
    }

    /// Roots of Y^tau + Y + A = 0 over GF(q), q = 2^m with m odd. The kernel
    /// of y -> y^tau + y is F_2, so there are 0 or 2 roots; they are built as
    /// z^tau + z and z^tau + z + 1 from a root z of Z^2 + Z + A = 0.
    pub fn solve_tau_equation(&self, a: Fq) -> Result<Vec<Fq>, Error> {
        let tau = self.tau()?;
        let z_roots = self.solve_artin_schreier(a)?;
        let Some(&z) = z_roots.first() else {
            return Ok(Vec::new());
        };
        let y = self.add(self.pow(z, tau), z);
        debug_assert_eq!(self.add(self.pow(y, tau), y), a);
        let y1 = self.add(y, Fq::ONE);
        let mut roots = vec![y, y1];
        roots.sort();
        Ok(roots)
    }

    // --- GF(q^2) ---

    pub fn fq2(&self, index: u64) -> Result<Fq2, Error> {
        if index < self.q2() {
            Ok(Fq2 { lo: Fq((index % self.q as u64) as u32), hi: Fq((index / self.q as u64) as u32) })
        } else {
            Err(Error::IndexOutOfRange { index, order: self.q2() })
        }
    }

    pub fn fq2_index(&self, x: Fq2) -> u64 {
        x.lo.0 as u64 + self.q as u64 * x.hi.0 as u64
    }

    pub fn ext_elements(&self) -> impl Iterator<Item = Fq2> + '_ {
        (0..self.q2()).map(|i| Fq2 {
            lo: Fq((i % self.q as u64) as u32),
            hi: Fq((i / self.q as u64) as u32),
        })
    }

    pub fn embed(&self, a: Fq) -> Fq2 {
        Fq2 { lo: a, hi: Fq::ZERO }
    }

    pub fn fq2_from_int(&self, n: i64) -> Fq2 {
        self.embed(self.fq_from_int(n))
    }

    /// The adjoined root t of irr_q2.
    pub fn gen_t(&self) -> Fq2 {
        Fq2 { lo: Fq::ZERO, hi: Fq::ONE }
    }

    #[inline]
    pub fn add2(&self, a: Fq2, b: Fq2) -> Fq2 {
        Fq2 { lo: self.add(a.lo, b.lo), hi: self.add(a.hi, b.hi) }
    }

    #[inline]
    pub fn neg2(&self, a: Fq2) -> Fq2 {
        Fq2 { lo: self.neg(a.lo), hi: self.neg(a.hi) }
    }

    #[inline]
    pub fn sub2(&self, a: Fq2, b: Fq2) -> Fq2 {
        self.add2(a, self.neg2(b))
    }

    /// (a0 + a1 t)(b0 + b1 t) with t^2 = -c1 t - c0.
    #[inline]
    pub fn mul2(&self, a: Fq2, b: Fq2) -> Fq2 {
        let a0b0 = self.mul(a.lo, b.lo);
        let a1b1 = self.mul(a.hi, b.hi);
        let cross = self.add(self.mul(a.lo, b.hi), self.mul(a.hi, b.lo));
        Fq2 {
            lo: self.sub(a0b0, self.mul(self.c0, a1b1)),
            hi: self.sub(cross, self.mul(self.c1, a1b1)),
        }
    }

    pub fn scale2(&self, x: Fq2, s: Fq) -> Fq2 {
        Fq2 { lo: self.mul(x.lo, s), hi: self.mul(x.hi, s) }
    }

    /// x^q: the relative Frobenius. t^q = -c1 - t, so this is O(1).
    #[inline]
    pub fn frobenius_q(&self, x: Fq2) -> Fq2 {
        Fq2 {
            lo: self.sub(x.lo, self.mul(self.c1, x.hi)),
            hi: self.neg(x.hi),
        }
    }

    /// Tr_{q^2/q}(x) = x + x^q, as an element of GF(q).
    #[inline]
    pub fn trace_rel(&self, x: Fq2) -> Fq {
        self.sub(self.add(x.lo, x.lo), self.mul(self.c1, x.hi))
    }

    /// N_{q^2/q}(x) = x^(q+1), as an element of GF(q).
    #[inline]
    pub fn norm_rel(&self, x: Fq2) -> Fq {
        // (lo + hi t)(lo - c1 hi - hi t) = lo^2 - c1 lo hi + c0 hi^2
        let lo2 = self.mul(x.lo, x.lo);
        let hi2 = self.mul(x.hi, x.hi);
        let lohi = self.mul(x.lo, x.hi);
        self.add(self.sub(lo2, self.mul(self.c1, lohi)), self.mul(self.c0, hi2))
    }

    pub fn in_base(&self, x: Fq2) -> bool {
        x.hi.is_zero()
    }

    pub fn as_base(&self, x: Fq2) -> Option<Fq> {
        x.hi.is_zero().then_some(x.lo)
    }

    pub fn inv2(&self, x: Fq2) -> Result<Fq2, Error> {
        let n = self.norm_rel(x);
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let ninv = self.inv(n)?;
        Ok(self.scale2(self.frobenius_q(x), ninv))
    }

    pub fn div2(&self, a: Fq2, b: Fq2) -> Result<Fq2, Error> {
        Ok(self.mul2(a, self.inv2(b)?))
    }

    pub fn pow2(&self, a: Fq2, mut e: u64) -> Fq2 {
        let mut base = a;
        let mut acc = Fq2::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul2(acc, base);
            }
            base = self.mul2(base, base);
            e >>= 1;
        }
        acc
    }

    /// x^p on GF(q^2): the absolute Frobenius generating Aut(F_{q^2}).
    pub fn frobenius_p(&self, x: Fq2) -> Fq2 {
        self.pow2(x, self.p as u64)
    }

    /// The k-th power of the absolute Frobenius; k is taken mod 2m.
    pub fn apply_aut(&self, x: Fq2, k: u32) -> Fq2 {
        let k = k % (2 * self.m);
        let mut y = x;
        for _ in 0..k {
            y = self.frobenius_p(y);
        }
        y
    }

    /// Order of Aut(F_{q^2}) = 2m.
    pub fn aut_order(&self) -> u32 {
        2 * self.m
    }

    /// The square root in characteristic 2, where squaring is bijective.
    pub fn sqrt2(&self, x: Fq2) -> Result<Fq2, Error> {
        if !self.char_is_two() {
            return Err(Error::RequiresCharTwo);
        }
        let mut y = x;
        for _ in 0..2 * self.m - 1 {
            y = self.mul2(y, y);
        }
        debug_assert_eq!(self.mul2(y, y), x);
        Ok(y)
    }

    /// Enumeration-smallest delta in GF(q^2) with delta + delta^q = 1, plus
    /// v = delta^(q+1), which has absolute trace 1. Characteristic 2 only.
    pub fn find_unit_trace_delta(&self) -> Result<(Fq2, Fq), Error> {
        if !self.char_is_two() {
            return Err(Error::RequiresCharTwo);
        }
        for x in self.ext_elements() {
            if self.trace_rel(x) == Fq::ONE {
                let v = self.norm_rel(x);
                return Ok((x, v));
            }
        }
        Err(Error::Internal("relative trace is surjective; delta must exist".into()))
    }

    /// Enumeration-smallest cube root of unity delta != 1 in GF(q^2), i.e.
    /// the solution of delta^2 + delta + 1 = 0 in the F_4 subfield. Requires
    /// characteristic 2 and m odd, so that F_4 is a subfield of F_{q^2} but
    /// not of F_q.
    pub fn find_cube_root_delta(&self) -> Result<Fq2, Error> {
        if !self.char_is_two() {
            return Err(Error::RequiresCharTwo);
        }
        if self.m % 2 == 0 {
            return Err(Error::RequiresOddDegree);
        }
        for x in self.ext_elements() {
            let val = self.add2(self.add2(self.mul2(x, x), x), Fq2::ONE);
            if val.is_zero() {
                return Ok(x);
            }
        }
        Err(Error::Internal("F_4 is a subfield of F_{q^2}; delta must exist".into()))
    }
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("m", &self.m)
            .field("q", &self.q)
            .field("irr_q", &self.irr_q)
            .field("irr_q2", &(self.c0, self.c1))
            .finish()
    }
}
