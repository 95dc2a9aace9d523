//! Exact arithmetic in GF(p^e).
//!
//! Elements are stored as integer codes in `[0, q)`: digit `i` of the code in
//! base `p` is the coefficient of `X^i` in the residue polynomial. Code 0 is
//! the additive identity and code 1 the multiplicative identity in every field.
//!
//! A [`Field`] is a cheap-to-clone handle holding log/antilog tables, so the
//! hot operations (`mul`, `inv`, `pow`) are table lookups. The tables are built
//! from a slow polynomial-multiplication path which is also exposed for
//! testing ([`Field::mul_slow`]).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 20;

/// Fields up to this order get a full addition table.
const ADD_TABLE_LIMIT: u32 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{e} exceeds the supported maximum 2^20")]
    TooLarge { p: u64, e: u32 },
    #[error("modulus {0:?} is not a monic irreducible polynomial of the requested degree")]
    BadModulus(Vec<u32>),
    #[error("element code {code} out of range for GF({q})")]
    OutOfRange { code: u64, q: u32 },
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("operands belong to different fields")]
    MixedFields,
}

/// An element of some GF(q), by code. Carries no reference to its field.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Description of GF(p^e): characteristic, degree and reduction polynomial.
///
/// `modulus` is little-endian and monic of degree `e`. For prime fields it is
/// the placeholder `[0, 1]`, which is never used for reduction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    pub p: u32,
    pub e: u32,
    pub modulus: Vec<u32>,
    q: u32,
}

/// JSON shape of a field description; `modulus` may be omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpecJson {
    pub p: u32,
    pub e: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

impl FieldSpec {
    /// GF(p^e) with the canonical modulus from [`find_modulus`].
    pub fn new(p: u32, e: u32) -> Result<Self, GfError> {
        check_params(p as u64, e)?;
        let modulus = find_modulus(p, e)?;
        Ok(FieldSpec { p, e, modulus, q: p.pow(e) })
    }

    /// GF(p^e) reduced by an explicit modulus.
    pub fn with_modulus(p: u32, e: u32, modulus: Vec<u32>) -> Result<Self, GfError> {
        check_params(p as u64, e)?;
        let ok = if e == 1 {
            modulus == vec![0, 1]
        } else {
            modulus.len() == e as usize + 1
                && modulus.last() == Some(&1)
                && modulus.iter().all(|&c| c < p)
                && is_irreducible(&modulus, p)
        };
        if !ok {
            return Err(GfError::BadModulus(modulus));
        }
        Ok(FieldSpec { p, e, modulus, q: p.pow(e) })
    }

    /// Smallest prime-power field of order `q`.
    pub fn from_order(q: u64) -> Result<Self, GfError> {
        let (p, e) = prime_power(q).ok_or(GfError::NotPrime(q))?;
        FieldSpec::new(p as u32, e)
    }

    pub fn from_json(json: &FieldSpecJson) -> Result<Self, GfError> {
        match &json.modulus {
            Some(m) => FieldSpec::with_modulus(json.p, json.e, m.clone()),
            None => FieldSpec::new(json.p, json.e),
        }
    }

    pub fn to_json(&self) -> FieldSpecJson {
        FieldSpecJson { p: self.p, e: self.e, modulus: Some(self.modulus.clone()) }
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }
}

fn check_params(p: u64, e: u32) -> Result<(), GfError> {
    if !is_prime(p) {
        return Err(GfError::NotPrime(p));
    }
    if e == 0 {
        return Err(GfError::ZeroDegree);
    }
    match p.checked_pow(e) {
        Some(q) if q <= MAX_ORDER => Ok(()),
        _ => Err(GfError::TooLarge { p, e }),
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Decomposes `q = p^e` with `p` prime.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut rest = q;
    let mut e = 0;
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

// ---- polynomials over GF(p), little-endian coefficient vectors ----

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_mul_mod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let out: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
    poly_rem(&trim(out), m, p)
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    pow_mod(a as u64, p as u64 - 2, p as u64) as u32
}

fn pow_mod(mut b: u64, mut n: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while n > 0 {
        if n & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        n >>= 1;
    }
    r
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = trim(a.to_vec());
    let m = trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod_p(m[dm], p) as u64;
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let c = r[r.len() - 1] as u64 * lead_inv % p as u64;
        for (i, &mi) in m.iter().enumerate() {
            let sub = c * mi as u64 % p as u64;
            r[shift + i] = ((r[shift + i] as u64 + p as u64 - sub) % p as u64) as u32;
        }
        r = trim(r);
    }
    r
}

fn poly_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Degree-`e` monic `f` is irreducible iff `gcd(X^(p^i) - X, f) = 1` for `i <= e/2`.
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let e = f.len() - 1;
    if e == 1 {
        return true;
    }
    let x = vec![0, 1];
    let mut power = poly_rem(&x, f, p);
    for _ in 1..=e / 2 {
        // power <- power^p mod f
        let mut acc = vec![1];
        let mut base = power.clone();
        let mut n = p;
        while n > 0 {
            if n & 1 == 1 {
                acc = poly_mul_mod(&acc, &base, f, p);
            }
            base = poly_mul_mod(&base, &base, f, p);
            n >>= 1;
        }
        power = acc;
        let g = poly_gcd(f, &poly_sub(&power, &x, p), p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// The monic irreducible polynomial of degree `e` over GF(p) whose
/// little-endian coefficient list, read as a base-`p` integer, is smallest.
///
/// For `e = 1` this is `X`, i.e. `[0, 1]`.
pub fn find_modulus(p: u32, e: u32) -> Result<Vec<u32>, GfError> {
    check_params(p as u64, e)?;
    let lower = (p as u64).pow(e);
    for code in 0..lower {
        let mut coeffs = digits(code, p, e as usize);
        coeffs.push(1);
        if is_irreducible(&coeffs, p) {
            return Ok(coeffs);
        }
    }
    unreachable!("an irreducible polynomial of every degree exists")
}

fn digits(mut code: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((code % p as u64) as u32);
        code /= p as u64;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0u32, |acc, &c| acc * p + c)
}

struct Tables {
    spec: FieldSpec,
    /// exp[i] = g^i for i in 0..2(q-1)
    exp: Vec<u32>,
    /// log[a] for a != 0
    log: Vec<u32>,
    neg: Vec<u32>,
    add: Option<Vec<u32>>,
}

/// Arithmetic context for one finite field. Cloning is cheap.
#[derive(Clone)]
pub struct Field(Arc<Tables>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p(), self.e())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Field {}

/// Binary and unary field operations, by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Inv,
    Pow(u64),
}

impl Field {
    pub fn new(spec: FieldSpec) -> Field {
        let q = spec.q();
        let p = spec.p;
        let e = spec.e as usize;
        let neg: Vec<u32> = (0..q)
            .map(|a| undigits(&digits(a as u64, p, e).iter().map(|&d| (p - d) % p).collect::<Vec<_>>(), p))
            .collect();
        let mut field = Tables { spec, exp: Vec::new(), log: Vec::new(), neg, add: None };
        if q <= ADD_TABLE_LIMIT {
            let mut add = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    add[(a * q + b) as usize] = add_digits(a, b, p, e);
                }
            }
            field.add = Some(add);
        }
        let g = primitive_element(&field.spec);
        let mut exp = vec![0u32; 2 * (q as usize - 1).max(1)];
        let mut log = vec![0u32; q as usize];
        let mut x = 1u32;
        for i in 0..(q - 1) as usize {
            exp[i] = x;
            log[x as usize] = i as u32;
            x = mul_slow(&field.spec, x, g);
        }
        for i in (q - 1) as usize..exp.len() {
            exp[i] = exp[i - (q - 1) as usize];
        }
        field.exp = exp;
        field.log = log;
        Field(Arc::new(field))
    }

    /// GF(q) with the canonical modulus.
    pub fn with_order(q: u64) -> Result<Field, GfError> {
        Ok(Field::new(FieldSpec::from_order(q)?))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.0.spec.q
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.0.spec.p
    }

    #[inline]
    pub fn e(&self) -> u32 {
        self.0.spec.e
    }

    pub fn is_odd(&self) -> bool {
        self.p() != 2
    }

    pub fn element(&self, code: u64) -> Result<FieldElement, GfError> {
        if code < self.q() as u64 {
            Ok(FieldElement(code as u32))
        } else {
            Err(GfError::OutOfRange { code, q: self.q() })
        }
    }

    /// Image of an integer under `Z -> GF(p)`.
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.p() as i64) as u32)
    }

    /// Codes `0..q` in ascending order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q()).map(FieldElement)
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a.0 < self.q()
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let t = &*self.0;
        if let Some(add) = &t.add {
            return FieldElement(add[(a.0 * t.spec.q + b.0) as usize]);
        }
        if t.spec.p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        if t.spec.e == 1 {
            let s = a.0 + b.0;
            return FieldElement(if s >= t.spec.p { s - t.spec.p } else { s });
        }
        FieldElement(add_digits(a.0, b.0, t.spec.p, t.spec.e as usize))
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.0.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let t = &*self.0;
        FieldElement(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, GfError> {
        if a.is_zero() {
            return Err(GfError::ZeroInverse);
        }
        let t = &*self.0;
        let l = t.log[a.0 as usize];
        Ok(FieldElement(t.exp[((t.spec.q - 1 - l) % (t.spec.q - 1)) as usize]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^n`, with `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, n: u64) -> FieldElement {
        if n == 0 {
            return FieldElement::ONE;
        }
        if a.is_zero() {
            return FieldElement::ZERO;
        }
        let t = &*self.0;
        let order = (t.spec.q - 1) as u64;
        let l = t.log[a.0 as usize] as u64 * (n % order) % order;
        FieldElement(t.exp[l as usize])
    }

    /// Dispatch on an operation name. `b` is ignored for unary operations.
    pub fn apply(&self, op: FieldOp, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        for x in [a, b] {
            if !self.contains(x) {
                return Err(GfError::OutOfRange { code: x.0 as u64, q: self.q() });
            }
        }
        Ok(match op {
            FieldOp::Add => self.add(a, b),
            FieldOp::Sub => self.sub(a, b),
            FieldOp::Mul => self.mul(a, b),
            FieldOp::Div => self.div(a, b)?,
            FieldOp::Neg => self.neg(a),
            FieldOp::Inv => self.inv(a)?,
            FieldOp::Pow(n) => self.pow(a, n),
        })
    }

    /// Multiplication by polynomial reduction, bypassing the tables.
    pub fn mul_slow(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(mul_slow(self.spec(), a.0, b.0))
    }

    /// Sum of products `sum a_i * b_i`.
    #[inline]
    pub fn dot(&self, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).fold(FieldElement::ZERO, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    pub fn bind(&self, a: FieldElement) -> BoundElement {
        BoundElement { field: self.clone(), value: a }
    }
}

fn add_digits(a: u32, b: u32, p: u32, e: usize) -> u32 {
    let (mut a, mut b) = (a, b);
    let mut out = 0u32;
    let mut place = 1u32;
    for _ in 0..e {
        let d = (a % p + b % p) % p;
        out += d * place;
        place *= p;
        a /= p;
        b /= p;
    }
    out
}

fn mul_slow(spec: &FieldSpec, a: u32, b: u32) -> u32 {
    let (p, e) = (spec.p, spec.e as usize);
    if e == 1 {
        return ((a as u64 * b as u64) % p as u64) as u32;
    }
    let r = poly_mul_mod(&trim(digits(a as u64, p, e)), &trim(digits(b as u64, p, e)), &spec.modulus, p);
    let mut d = r;
    d.resize(e, 0);
    undigits(&d, p)
}

fn pow_slow(spec: &FieldSpec, a: u32, mut n: u64) -> u32 {
    let mut acc = 1u32;
    let mut base = a;
    while n > 0 {
        if n & 1 == 1 {
            acc = mul_slow(spec, acc, base);
        }
        base = mul_slow(spec, base, base);
        n >>= 1;
    }
    acc
}

fn primitive_element(spec: &FieldSpec) -> u32 {
    let q = spec.q();
    if q == 2 {
        return 1;
    }
    let order = (q - 1) as u64;
    let mut factors = Vec::new();
    let mut m = order;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            factors.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..q)
        .find(|&g| factors.iter().all(|&r| pow_slow(spec, g, order / r) != 1))
        .expect("multiplicative group is cyclic")
}

/// A field element that knows its field; used where mixing fields must be
/// detected. Operator impls panic on mixed fields, [`BoundElement::checked`]
/// returns an error instead.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundElement {
    pub field: Field,
    pub value: FieldElement,
}

impl BoundElement {
    pub fn checked(&self, op: FieldOp, other: &BoundElement) -> Result<BoundElement, GfError> {
        if self.field != other.field {
            return Err(GfError::MixedFields);
        }
        let value = self.field.apply(op, self.value, other.value)?;
        Ok(BoundElement { field: self.field.clone(), value })
    }

    pub fn inv(&self) -> Result<BoundElement, GfError> {
        self.checked(FieldOp::Inv, self)
    }

    pub fn pow(&self, n: u64) -> BoundElement {
        self.field.bind(self.field.pow(self.value, n))
    }
}

macro_rules! bound_op {
    ($tr:ident, $method:ident, $op:expr) => {
        impl std::ops::$tr for BoundElement {
            type Output = BoundElement;
            fn $method(self, rhs: BoundElement) -> BoundElement {
                self.checked($op, &rhs).expect("field operation")
            }
        }
    };
}

bound_op!(Add, add, FieldOp::Add);
bound_op!(Sub, sub, FieldOp::Sub);
bound_op!(Mul, mul, FieldOp::Mul);
bound_op!(Div, div, FieldOp::Div);

impl std::ops::Neg for BoundElement {
    type Output = BoundElement;
    fn neg(self) -> BoundElement {
        let value = self.field.neg(self.value);
        BoundElement { field: self.field, value }
    }
}
