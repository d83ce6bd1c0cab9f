// SPDX-License-Identifier: Apache-2.0

//! Dense univariate polynomials over `F_q` and the root-finding machinery the
//! schemes are built on.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::field::{same_field, Field, FieldElement, FieldError, FieldExt};

/// Largest degree accepted by [`roots_in_field`].
pub const MAX_ROOT_FINDING_DEGREE: usize = 8;

/// Random probes tried per equal-degree split before giving up.
const SPLIT_PROBES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("expected a polynomial of degree {expected}, got {actual:?}")]
    WrongDegree { expected: usize, actual: Option<usize> },
    #[error("degree {0} exceeds the root-finding cap")]
    DegreeTooLarge(usize),
    #[error("the zero polynomial has no finite root set")]
    ZeroPolynomial,
    #[error("need at least one root")]
    EmptyRoots,
    #[error("the two known roots coincide")]
    DegenerateRoots,
    #[error("the discriminant is zero")]
    ZeroDiscriminant,
    #[error("equal-degree splitting failed after {0} probes")]
    SplitFailure(usize),
}

/// Polynomial with coefficients in ascending degree; trailing zeros are stripped.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<FieldElement>,
    field: Field,
}

impl Polynomial {
    pub fn new(field: &Field, coeffs: Vec<FieldElement>) -> Result<Self, PolyError> {
        if coeffs.iter().any(|c| !same_field(c.field(), field)) {
            return Err(FieldError::MismatchedField.into());
        }
        Ok(Self::trimmed(field.clone(), coeffs))
    }

    fn trimmed(field: Field, mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(FieldElement::is_zero) {
            coeffs.pop();
        }
        Self { coeffs, field }
    }

    pub fn zero(field: &Field) -> Self {
        Self { coeffs: Vec::new(), field: field.clone() }
    }

    pub fn constant(c: FieldElement) -> Self {
        let field = c.field().clone();
        Self::trimmed(field, vec![c])
    }

    /// The monomial `x`.
    pub fn x(field: &Field) -> Self {
        Self { coeffs: vec![field.zero(), field.one()], field: field.clone() }
    }

    /// Monic polynomial vanishing on the given multiset of roots.
    pub fn from_roots(roots: &[FieldElement]) -> Result<Self, PolyError> {
        let first = roots.first().ok_or(PolyError::EmptyRoots)?;
        let field = first.field().clone();
        let mut coeffs = vec![field.one()];
        for r in roots {
            if !r.same_field(first) {
                return Err(FieldError::MismatchedField.into());
            }
            // multiply by (x - r)
            let mut next = vec![field.zero(); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] = &next[i + 1] + c;
                next[i] = &next[i] - &(c * r);
            }
            coeffs = next;
        }
        Ok(Self { coeffs, field })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }

    /// Coefficient of `x^i`, zero past the degree.
    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Horner evaluation.
    pub fn evaluate(&self, x: &FieldElement) -> FieldElement {
        self.coeffs.iter().rev().fold(self.field.zero(), |acc, c| &(&acc * x) + c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| &self.coeff(i) + &other.coeff(i)).collect();
        Self::trimmed(self.field.clone(), coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| &self.coeff(i) - &other.coeff(i)).collect();
        Self::trimmed(self.field.clone(), coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.field);
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Self::trimmed(self.field.clone(), out)
    }

    pub fn scale(&self, k: &FieldElement) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * k).collect();
        Self::trimmed(self.field.clone(), coeffs)
    }

    /// Rescales to leading coefficient one. The zero polynomial is returned unchanged.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lc) if !lc.is_one() => self.scale(&lc.inv().expect("leading coefficient is nonzero")),
            _ => self.clone(),
        }
    }

    /// Euclidean division; panics if `divisor` is zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = &divisor.coeffs[dd];
        let lead_inv = if lead.is_one() { None } else { Some(lead.inv().expect("leading coefficient is nonzero")) };
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(&self.field), self.clone());
        }
        let mut quot = vec![self.field.zero(); rem.len() - dd];
        for top in (dd..rem.len()).rev() {
            if rem[top].is_zero() {
                continue;
            }
            let k = match &lead_inv {
                Some(li) => &rem[top] * li,
                None => rem[top].clone(),
            };
            for (j, d) in divisor.coeffs.iter().enumerate() {
                let slot = top - dd + j;
                rem[slot] = &rem[slot] - &(&k * d);
            }
            quot[top - dd] = k;
        }
        rem.truncate(dd);
        (Self::trimmed(self.field.clone(), quot), Self::trimmed(self.field.clone(), rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `self^e mod modulus` by square-and-multiply.
    pub fn pow_mod(&self, e: &BigUint, modulus: &Self) -> Self {
        let base = self.rem(modulus);
        if self.field.degree() == 1 && modulus.leading().is_some_and(FieldElement::is_one) && modulus.coeffs.len() > 1 {
            let raw = |p: &Self| p.coeffs.iter().map(|c| c.residues()[0].clone()).collect::<Vec<_>>();
            let out = prime_pow_mod(&raw(&base), e, &raw(modulus), self.field.characteristic());
            let coeffs = out.iter().map(|r| self.field.from_residues(std::slice::from_ref(r))).collect();
            return Self::trimmed(self.field.clone(), coeffs);
        }
        let mut acc = Self::constant(self.field.one()).rem(modulus);
        for i in (0..e.bits()).rev() {
            acc = acc.mul(&acc).rem(modulus);
            if e.bit(i) {
                acc = acc.mul(&base).rem(modulus);
            }
        }
        acc
    }
}

/// Prime-field kernel for [`Polynomial::pow_mod`] on raw residues, reducing
/// mod `p` once per product rather than per term. `modulus` is monic.
fn prime_pow_mod(base: &[BigUint], e: &BigUint, modulus: &[BigUint], p: &BigUint) -> Vec<BigUint> {
    let d = modulus.len() - 1;
    let neg: Vec<BigUint> = modulus[..d].iter().map(|m| (p - m) % p).collect();
    let mulmod = |a: &[BigUint], b: &[BigUint]| -> Vec<BigUint> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![BigUint::ZERO; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        for top in (d..prod.len()).rev() {
            let lead = std::mem::take(&mut prod[top]) % p;
            for (k, n) in neg.iter().enumerate() {
                prod[top - d + k] += &lead * n;
            }
        }
        prod.truncate(d);
        for c in prod.iter_mut() {
            *c %= p;
        }
        prod
    };
    let mut acc: Vec<BigUint> = if d == 0 { Vec::new() } else { vec![BigUint::from(1u32)] };
    for i in (0..e.bits()).rev() {
        acc = mulmod(&acc, &acc);
        if e.bit(i) {
            acc = mulmod(&acc, base);
        }
    }
    acc
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coeffs).finish()
    }
}

/// Cubic discriminant `18abcd - 4b^3 d + b^2 c^2 - 4ac^3 - 27a^2 d^2`.
///
/// For a monic cubic with roots `r1, r2, r3` this is `prod_{i<j} (ri - rj)^2`.
pub fn discriminant_cubic(p: &Polynomial) -> Result<FieldElement, PolyError> {
    if p.degree() != Some(3) {
        return Err(PolyError::WrongDegree { expected: 3, actual: p.degree() });
    }
    let f = p.field();
    let (d, c, b, a) = (&p.coeffs[0], &p.coeffs[1], &p.coeffs[2], &p.coeffs[3]);
    let k = |v: u64| f.from_u64(v);
    let t1 = &k(18) * &(&(a * b) * &(c * d));
    let t2 = &k(4) * &(&b.pow_u64(3) * d);
    let t3 = &b.square() * &c.square();
    let t4 = &k(4) * &(a * &c.pow_u64(3));
    let t5 = &k(27) * &(&a.square() * &d.square());
    Ok(t1 - t2 + t3 - t4 - t5)
}

/// All `x in F_q` with `P(x) = 0`, each reported once.
///
/// Isolates the product of the distinct linear factors as `gcd(P, x^q - x)`,
/// then splits it with Cantor-Zassenhaus probes (trace-map probes in
/// characteristic two).
pub fn roots_in_field<R: RngCore + ?Sized>(p: &Polynomial, rng: &mut R) -> Result<BTreeSet<FieldElement>, PolyError> {
    let deg = p.degree().ok_or(PolyError::ZeroPolynomial)?;
    if deg > MAX_ROOT_FINDING_DEGREE {
        return Err(PolyError::DegreeTooLarge(deg));
    }
    let mut roots = BTreeSet::new();
    if deg == 0 {
        return Ok(roots);
    }
    let field = p.field();
    let monic = p.monic();
    let x = Polynomial::x(field);
    let frob = x.pow_mod(field.order(), &monic);
    let linear_part = monic.gcd(&frob.sub(&x));
    split_linear(&linear_part, rng, &mut roots)?;
    Ok(roots)
}

fn split_linear<R: RngCore + ?Sized>(
    g: &Polynomial,
    rng: &mut R,
    roots: &mut BTreeSet<FieldElement>,
) -> Result<(), PolyError> {
    match g.degree() {
        None | Some(0) => return Ok(()),
        Some(1) => {
            // monic: x + c0
            roots.insert(-&g.coeffs[0]);
            return Ok(());
        }
        _ => {}
    }
    let field = g.field();
    let d = g.degree().unwrap_or(0);
    for _ in 0..SPLIT_PROBES {
        let c = field.random_element(rng);
        let probe = if field.is_char_two() {
            trace_probe(g, &c)
        } else {
            let shifted = Polynomial::x(field).add(&Polynomial::constant(c));
            let half = (field.order() - 1u32) >> 1u32;
            shifted.pow_mod(&half, g).sub(&Polynomial::constant(field.one()))
        };
        let h = g.gcd(&probe);
        let hd = h.degree().unwrap_or(0);
        if h.is_zero() || hd == 0 || hd == d {
            continue;
        }
        let (other, _) = g.div_rem(&h);
        split_linear(&h, rng, roots)?;
        split_linear(&other.monic(), rng, roots)?;
        return Ok(());
    }
    Err(PolyError::SplitFailure(SPLIT_PROBES))
}

/// `Tr(c x) = sum_{i < m} (c x)^(2^i) mod g` for `q = 2^m`.
fn trace_probe(g: &Polynomial, c: &FieldElement) -> Polynomial {
    let field = g.field();
    let mut term = Polynomial::x(field).scale(c).rem(g);
    let mut acc = term.clone();
    for _ in 1..field.degree() {
        term = term.mul(&term).rem(g);
        acc = acc.add(&term);
    }
    acc
}

/// Every `a1` with `((a1 - a2)(a1 - a3)(a2 - a3))^2 = D`.
///
/// Writing `w = D / (a2 - a3)^2`, each square root `s` of `w` gives the
/// quadratic `a1^2 - (a2 + a3) a1 + a2 a3 - s = 0`; up to four candidates overall.
pub fn solve_a1_from_discriminant(
    a2: &FieldElement,
    a3: &FieldElement,
    d: &FieldElement,
) -> Result<BTreeSet<FieldElement>, PolyError> {
    if !a2.same_field(a3) || !a2.same_field(d) {
        return Err(FieldError::MismatchedField.into());
    }
    if a2 == a3 {
        return Err(PolyError::DegenerateRoots);
    }
    if d.is_zero() {
        return Err(PolyError::ZeroDiscriminant);
    }
    let field = a2.field();
    let gap_sq = (a2 - a3).square();
    let w = d * &gap_sq.inv()?;
    let mut out = BTreeSet::new();
    let s = match w.sqrt() {
        Ok(s) => s,
        Err(FieldError::NonResidue) => return Ok(out),
        Err(e) => return Err(e.into()),
    };
    let sum = a2 + a3;
    let prod = a2 * a3;
    for s in [s.clone(), -&s] {
        if field.is_char_two() {
            let quad = Polynomial::new(field, vec![&prod - &s, -&sum, field.one()])?;
            let mut rng = ChaCha20Rng::seed_from_u64(0);
            out.extend(roots_in_field(&quad, &mut rng)?);
        } else {
            // roots of a^2 - sum a + (prod - s): (sum +- sqrt(gap^2 + 4 s)) / 2
            let disc = &gap_sq + &(&field.from_u64(4) * &s);
            let Ok(r) = disc.sqrt() else { continue };
            let half = field.from_u64(2).inv()?;
            out.insert(&(&sum + &r) * &half);
            out.insert(&(&sum - &r) * &half);
        }
    }
    out.remove(a2);
    out.remove(a3);
    Ok(out)
}

/// All `h` with `P(t + h) = y` for a cubic `P`.
pub fn solve_shift<R: RngCore + ?Sized>(
    p: &Polynomial,
    t: &FieldElement,
    y: &FieldElement,
    rng: &mut R,
) -> Result<BTreeSet<FieldElement>, PolyError> {
    if p.degree() != Some(3) {
        return Err(PolyError::WrongDegree { expected: 3, actual: p.degree() });
    }
    if !t.same_field(y) || !same_field(t.field(), p.field()) {
        return Err(FieldError::MismatchedField.into());
    }
    let shifted = p.sub(&Polynomial::constant(y.clone()));
    Ok(roots_in_field(&shifted, rng)?.into_iter().map(|u| &u - t).collect())
}

/// Ben-Or test over the prime field: `f` is irreducible iff
/// `gcd(f, x^(p^k) - x) = 1` for every `k <= deg f / 2`.
pub(crate) fn is_irreducible_over_prime_field(base: &Field, coeffs: &[BigUint]) -> bool {
    let elems = coeffs.iter().map(|c| base.from_biguint(c)).collect();
    let f = Polynomial::trimmed(base.clone(), elems);
    let Some(n) = f.degree() else { return false };
    let x = Polynomial::x(base);
    let mut frob = x.clone();
    for _ in 1..=n / 2 {
        frob = frob.pow_mod(base.characteristic(), &f);
        let g = f.gcd(&frob.sub(&x));
        if g.degree() != Some(0) {
            return false;
        }
    }
    true
}
