// SPDX-License-Identifier: Apache-2.0

//! Arithmetic in prime fields `F_p` and extension fields `F_p[x]/(f(x))`.
//!
//! Every element is stored in canonical form: `n` residues in `[0, p)`,
//! degree-0 coefficient first. Equality, ordering, hashing and the byte
//! encoding all work directly on that form.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;
use thiserror::Error;

/// Number of Miller-Rabin bases tried before a modulus is accepted as prime.
const MILLER_RABIN_ROUNDS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("operands belong to different fields")]
    MismatchedField,
    #[error("zero has no multiplicative inverse")]
    NonInvertible,
    #[error("element is not a square")]
    NonResidue,
    #[error("modulus {0} is not prime")]
    NotPrime(BigUint),
    #[error("field order must be at least 5")]
    FieldTooSmall,
    #[error("defining polynomial is invalid: {0}")]
    InvalidModulusPolynomial(&'static str),
    #[error("expected {expected} bytes, got {actual}")]
    BadLength { expected: usize, actual: usize },
    #[error("residue is not reduced modulo p")]
    NonCanonical,
}

/// Shared handle to a field description.
pub type Field = Arc<FieldParams>;

/// Description of `F_q`, `q = p^n`.
///
/// For `n > 1` the field is `F_p[x]/(f(x))` with `f` monic and irreducible.
pub struct FieldParams {
    p: BigUint,
    degree: usize,
    /// Monic defining polynomial, ascending, `degree + 1` entries. Empty for prime fields.
    modulus_poly: Vec<BigUint>,
    order: BigUint,
    byte_width: usize,
    nonresidue: OnceLock<Vec<BigUint>>,
}

impl fmt::Debug for FieldParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldParams")
            .field("p", &self.p)
            .field("degree", &self.degree)
            .field("modulus_poly", &self.modulus_poly)
            .finish()
    }
}

impl PartialEq for FieldParams {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.degree == other.degree && self.modulus_poly == other.modulus_poly
    }
}

impl Eq for FieldParams {}

impl FieldParams {
    /// Builds the prime field `F_p`.
    pub fn prime(p: BigUint) -> Result<Field, FieldError> {
        if !is_probable_prime(&p) {
            return Err(FieldError::NotPrime(p));
        }
        if p < BigUint::from(5u32) {
            return Err(FieldError::FieldTooSmall);
        }
        Ok(Arc::new(Self::assemble(p, Vec::new())))
    }

    pub fn prime_u64(p: u64) -> Result<Field, FieldError> {
        Self::prime(BigUint::from(p))
    }

    /// Builds `F_p[x]/(f(x))` from the coefficients of `f`, lowest degree first.
    ///
    /// `f` must be monic of degree `n >= 2` and irreducible over `F_p`.
    pub fn extension(p: BigUint, irreducible: Vec<BigUint>) -> Result<Field, FieldError> {
        if !is_probable_prime(&p) {
            return Err(FieldError::NotPrime(p));
        }
        if irreducible.len() < 3 {
            return Err(FieldError::InvalidModulusPolynomial("degree must be at least 2"));
        }
        if irreducible.iter().any(|c| c >= &p) {
            return Err(FieldError::InvalidModulusPolynomial("coefficients must be reduced mod p"));
        }
        if !irreducible.last().is_some_and(One::is_one) {
            return Err(FieldError::InvalidModulusPolynomial("polynomial must be monic"));
        }
        let degree = irreducible.len() - 1;
        if p.pow(degree as u32) < BigUint::from(5u32) {
            return Err(FieldError::FieldTooSmall);
        }
        let base = Arc::new(Self::assemble(p.clone(), Vec::new()));
        if !crate::poly::is_irreducible_over_prime_field(&base, &irreducible) {
            return Err(FieldError::InvalidModulusPolynomial("polynomial is reducible"));
        }
        Ok(Arc::new(Self::assemble(p, irreducible)))
    }

    fn assemble(p: BigUint, modulus_poly: Vec<BigUint>) -> Self {
        let degree = if modulus_poly.is_empty() { 1 } else { modulus_poly.len() - 1 };
        let order = p.pow(degree as u32);
        let byte_width = (p.bits() as usize).div_ceil(8);
        Self { p, degree, modulus_poly, order, byte_width, nonresidue: OnceLock::new() }
    }

    pub fn characteristic(&self) -> &BigUint {
        &self.p
    }

    /// Extension degree `n`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Field order `q = p^n`.
    pub fn order(&self) -> &BigUint {
        &self.order
    }

    /// Coefficients of the defining polynomial, empty for prime fields.
    pub fn modulus_poly(&self) -> &[BigUint] {
        &self.modulus_poly
    }

    /// Bytes per residue in the canonical encoding.
    pub fn byte_width(&self) -> usize {
        self.byte_width
    }

    /// Bytes per element in the canonical encoding.
    pub fn element_len(&self) -> usize {
        self.byte_width * self.degree
    }

    pub fn is_char_two(&self) -> bool {
        self.p == BigUint::from(2u32)
    }
}

pub fn same_field(a: &Field, b: &Field) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Convenience constructors that need the shared handle.
#[allow(clippy::wrong_self_convention)]
pub trait FieldExt {
    fn zero(&self) -> FieldElement;
    fn one(&self) -> FieldElement;
    fn from_u64(&self, v: u64) -> FieldElement;
    /// Reduces an integer into the prime subfield.
    fn from_biguint(&self, v: &BigUint) -> FieldElement;
    /// Builds an element from residues, reducing each; missing high coefficients are zero.
    fn from_residues(&self, residues: &[BigUint]) -> FieldElement;
    /// The element whose base-`p` digits are `index`, for `index < q`.
    fn element_at(&self, index: &BigUint) -> FieldElement;
    /// The class of `x` in an extension field; `1` in a prime field.
    fn generator(&self) -> FieldElement;
    fn random_element<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElement;
    fn random_nonzero<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElement;
    /// Decodes the canonical byte encoding, rejecting unreduced residues.
    fn element_from_bytes(&self, bytes: &[u8]) -> Result<FieldElement, FieldError>;
}

impl FieldExt for Field {
    fn zero(&self) -> FieldElement {
        FieldElement { coeffs: vec![BigUint::zero(); self.degree], field: self.clone() }
    }

    fn one(&self) -> FieldElement {
        self.from_u64(1)
    }

    fn from_u64(&self, v: u64) -> FieldElement {
        self.from_biguint(&BigUint::from(v))
    }

    fn from_biguint(&self, v: &BigUint) -> FieldElement {
        let mut e = self.zero();
        e.coeffs[0] = v % &self.p;
        e
    }

    fn from_residues(&self, residues: &[BigUint]) -> FieldElement {
        let mut e = self.zero();
        for (i, r) in residues.iter().enumerate().take(self.degree) {
            e.coeffs[i] = r % &self.p;
        }
        e
    }

    fn element_at(&self, index: &BigUint) -> FieldElement {
        let mut e = self.zero();
        let mut rest = index % &self.order;
        for c in e.coeffs.iter_mut() {
            let (q, r) = rest.div_rem(&self.p);
            *c = r;
            rest = q;
        }
        e
    }

    fn generator(&self) -> FieldElement {
        let mut e = self.zero();
        if self.degree > 1 {
            e.coeffs[1] = BigUint::one();
        } else {
            e.coeffs[0] = BigUint::one();
        }
        e
    }

    fn random_element<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElement {
        let mut e = self.zero();
        for c in e.coeffs.iter_mut() {
            *c = random_below(&self.p, rng);
        }
        e
    }

    fn random_nonzero<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElement {
        loop {
            let e = self.random_element(rng);
            if !e.is_zero() {
                return e;
            }
        }
    }

    fn element_from_bytes(&self, bytes: &[u8]) -> Result<FieldElement, FieldError> {
        let expected = self.element_len();
        if bytes.len() != expected {
            return Err(FieldError::BadLength { expected, actual: bytes.len() });
        }
        let mut e = self.zero();
        for (c, chunk) in e.coeffs.iter_mut().zip(bytes.chunks(self.byte_width)) {
            let v = BigUint::from_bytes_be(chunk);
            if v >= self.p {
                return Err(FieldError::NonCanonical);
            }
            *c = v;
        }
        Ok(e)
    }
}

/// Uniform integer in `[0, bound)` by rejection on `bitlen(bound)`-bit draws.
pub(crate) fn random_below<R: RngCore + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    let bits = bound.bits() as usize;
    let nbytes = bits.div_ceil(8);
    let top_mask: u8 = if bits.is_multiple_of(8) { 0xff } else { (1u8 << (bits % 8)) - 1 };
    let mut buf = vec![0u8; nbytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= top_mask;
        let v = BigUint::from_bytes_be(&buf);
        if &v < bound {
            return v;
        }
    }
}

/// An element of `F_q` in canonical form.
#[derive(Clone)]
pub struct FieldElement {
    coeffs: Vec<BigUint>,
    field: Field,
}

impl FieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Residues, degree-0 coefficient first.
    pub fn residues(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    pub fn same_field(&self, other: &FieldElement) -> bool {
        same_field(&self.field, &other.field)
    }

    fn check(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.same_field(other) {
            Ok(())
        } else {
            Err(FieldError::MismatchedField)
        }
    }

    /// Integer `sum c_i p^i` in `[0, q)`. For prime fields this is the residue itself.
    pub fn to_index(&self) -> BigUint {
        self.coeffs.iter().rev().fold(BigUint::zero(), |acc, c| acc * &self.field.p + c)
    }

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        let p = &self.field.p;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| {
                let s = a + b;
                if &s >= p {
                    s - p
                } else {
                    s
                }
            })
            .collect();
        Ok(FieldElement { coeffs, field: self.field.clone() })
    }

    pub fn checked_sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        let p = &self.field.p;
        let coeffs =
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| if a >= b { a - b } else { p - b + a }).collect();
        Ok(FieldElement { coeffs, field: self.field.clone() })
    }

    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        let p = &self.field.p;
        if self.field.degree == 1 {
            let v = (&self.coeffs[0] * &other.coeffs[0]) % p;
            return Ok(FieldElement { coeffs: vec![v], field: self.field.clone() });
        }
        let n = self.field.degree;
        // Schoolbook product, then reduce by the monic modulus from the top down.
        let mut prod = vec![BigUint::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                prod[i + j] += a * b;
            }
        }
        for c in prod.iter_mut() {
            *c %= p;
        }
        let f = &self.field.modulus_poly;
        for top in (n..prod.len()).rev() {
            let lead = std::mem::take(&mut prod[top]);
            if lead.is_zero() {
                continue;
            }
            for k in 0..n {
                let sub = (&lead * &f[k]) % p;
                let slot = &mut prod[top - n + k];
                *slot = if *slot >= sub { &*slot - &sub } else { p - &sub + &*slot };
            }
        }
        prod.truncate(n);
        Ok(FieldElement { coeffs: prod, field: self.field.clone() })
    }

    pub fn square(&self) -> FieldElement {
        self * self
    }

    /// Multiplicative inverse.
    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::NonInvertible);
        }
        if self.field.degree == 1 {
            let p = &self.field.p;
            let v = mod_inverse(&self.coeffs[0], p).ok_or(FieldError::NonInvertible)?;
            return Ok(FieldElement { coeffs: vec![v], field: self.field.clone() });
        }
        Ok(self.pow(&(&self.field.order - 2u32)))
    }

    /// Square-and-multiply exponentiation; `0^0 = 1`.
    pub fn pow(&self, e: &BigUint) -> FieldElement {
        if self.field.degree == 1 {
            let v = self.coeffs[0].modpow(e, &self.field.p);
            return FieldElement { coeffs: vec![v], field: self.field.clone() };
        }
        let mut acc = self.field.one();
        for i in (0..e.bits()).rev() {
            acc = acc.square();
            if e.bit(i) {
                acc = &acc * self;
            }
        }
        acc
    }

    pub fn pow_u64(&self, e: u64) -> FieldElement {
        self.pow(&BigUint::from(e))
    }

    /// Square root with the lexicographically smaller of `{r, -r}` returned.
    pub fn sqrt(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let field = &self.field;
        let q = &field.order;
        if field.is_char_two() {
            // Frobenius is a bijection, so x^(q/2) is the unique root.
            return Ok(self.pow(&(q >> 1u32)));
        }
        let q_minus_1 = q - 1u32;
        let root = if (q % 4u32) == BigUint::from(3u32) {
            let r = self.pow(&((q + 1u32) >> 2u32));
            if r.square() != *self {
                return Err(FieldError::NonResidue);
            }
            r
        } else {
            if !self.pow(&(&q_minus_1 >> 1u32)).is_one() {
                return Err(FieldError::NonResidue);
            }
            self.tonelli_shanks(&q_minus_1)
        };
        debug_assert_eq!(root.square(), *self);
        let neg = -&root;
        Ok(if neg < root { neg } else { root })
    }

    fn tonelli_shanks(&self, q_minus_1: &BigUint) -> FieldElement {
        let field = &self.field;
        let two_adicity = q_minus_1.trailing_zeros().unwrap_or(0);
        let odd = q_minus_1 >> two_adicity;
        let z = FieldElement { coeffs: field.nonresidue().to_vec(), field: field.clone() };

        let mut m = two_adicity;
        let mut c = z.pow(&odd);
        let mut t = self.pow(&odd);
        let mut r = self.pow(&((&odd + 1u32) >> 1u32));
        while !t.is_one() {
            let mut i = 0;
            let mut t2 = t.clone();
            while !t2.is_one() {
                t2 = t2.square();
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(m - i - 1) {
                b = b.square();
            }
            m = i;
            c = b.square();
            t = &t * &c;
            r = &r * &b;
        }
        r
    }

    /// Canonical encoding: each residue big-endian in `byte_width` bytes, degree 0 first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let w = self.field.byte_width;
        let mut out = Vec::with_capacity(self.field.element_len());
        for c in &self.coeffs {
            let raw = c.to_bytes_be();
            let raw: &[u8] = if c.is_zero() { &[] } else { &raw };
            out.extend(std::iter::repeat_n(0u8, w - raw.len()));
            out.extend_from_slice(raw);
        }
        out
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.to_index().to_u64()
    }
}

impl FieldParams {
    /// Smallest-index non-square, cached; only meaningful for odd order.
    fn nonresidue(&self) -> &[BigUint] {
        self.nonresidue.get_or_init(|| {
            let field = Arc::new(Self::assemble(self.p.clone(), self.modulus_poly.clone()));
            let half = (&self.order - 1u32) >> 1u32;
            let mut idx = BigUint::from(2u32);
            loop {
                let cand = field.element_at(&idx);
                let legendre = cand.pow(&half);
                if !legendre.is_one() && !legendre.is_zero() {
                    return cand.coeffs;
                }
                idx += 1u32;
            }
        })
    }
}

/// Inverse modulo a prime by the extended Euclidean algorithm.
fn mod_inverse(a: &BigUint, p: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    let (mut old_r, mut r) = (BigInt::from(a.clone()), BigInt::from(p.clone()));
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    while !r.is_zero() {
        let q = &old_r / &r;
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
    }
    if !old_r.is_one() {
        return None;
    }
    let p = BigInt::from(p.clone());
    old_s.mod_floor(&p).to_biguint()
}

pub fn is_probable_prime(n: &BigUint) -> bool {
    const SMALL: [u32; 64] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107,
        109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229,
        233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311,
    ];
    if n < &BigUint::from(2u32) {
        return false;
    }
    for &sp in &SMALL {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &base in SMALL.iter().take(MILLER_RABIN_ROUNDS) {
        let a = BigUint::from(base) % n;
        if a.is_zero() {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Binary operations accepted by [`field_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    /// Negates `x`; `y` only has to share the field.
    Neg,
}

pub fn field_arith(op: ArithOp, x: &FieldElement, y: &FieldElement) -> Result<FieldElement, FieldError> {
    match op {
        ArithOp::Add => x.checked_add(y),
        ArithOp::Sub => x.checked_sub(y),
        ArithOp::Mul => x.checked_mul(y),
        ArithOp::Neg => {
            x.check(y)?;
            Ok(-x)
        }
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && self.same_field(other)
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

/// Lexicographic on the coefficient vector, degree 0 first.
impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs.cmp(&other.coeffs)
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.len() == 1 {
            write!(f, "{}", self.coeffs[0])
        } else {
            write!(f, "[")?;
            for (i, c) in self.coeffs.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, "]")
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        let p = &self.field.p;
        let coeffs = self.coeffs.iter().map(|c| if c.is_zero() { BigUint::zero() } else { p - c }).collect();
        FieldElement { coeffs, field: self.field.clone() }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        -&self
    }
}

// Operator forms panic on mismatched fields; the `checked_*` methods report it instead.
macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&FieldElement> for &FieldElement {
            type Output = FieldElement;

            fn $method(self, rhs: &FieldElement) -> FieldElement {
                self.$checked(rhs).expect("field mismatch in operator")
            }
        }

        impl $trait<FieldElement> for FieldElement {
            type Output = FieldElement;

            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }

        impl $trait<&FieldElement> for FieldElement {
            type Output = FieldElement;

            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }

        impl $trait<FieldElement> for &FieldElement {
            type Output = FieldElement;

            fn $method(self, rhs: FieldElement) -> FieldElement {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
