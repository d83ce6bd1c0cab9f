// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use rand::RngCore;

use super::CrError;
use crate::field::{Field, FieldElement, FieldExt};

/// A point of the projective line `F_q ∪ {∞}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum ProjPoint {
    Finite(FieldElement),
    Infinity,
}

impl ProjPoint {
    pub fn finite(&self) -> Option<&FieldElement> {
        match self {
            ProjPoint::Finite(e) => Some(e),
            ProjPoint::Infinity => None,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, ProjPoint::Infinity)
    }
}

impl From<FieldElement> for ProjPoint {
    fn from(e: FieldElement) -> Self {
        ProjPoint::Finite(e)
    }
}

impl fmt::Debug for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjPoint::Finite(e) => write!(f, "{e}"),
            ProjPoint::Infinity => write!(f, "∞"),
        }
    }
}

/// `z ↦ (a z + b) / (c z + d)` with `ad - bc ≠ 0`.
///
/// This is a class representative; scalar multiples act identically.
#[derive(Clone, PartialEq, Eq)]
pub struct MobiusMap {
    a: FieldElement,
    b: FieldElement,
    c: FieldElement,
    d: FieldElement,
}

impl MobiusMap {
    pub fn new(a: FieldElement, b: FieldElement, c: FieldElement, d: FieldElement) -> Result<Self, CrError> {
        if !(a.same_field(&b) && a.same_field(&c) && a.same_field(&d)) {
            return Err(crate::field::FieldError::MismatchedField.into());
        }
        let map = Self { a, b, c, d };
        if map.determinant().is_zero() {
            return Err(CrError::SingularMap);
        }
        Ok(map)
    }

    pub fn identity(field: &Field) -> Self {
        Self { a: field.one(), b: field.zero(), c: field.zero(), d: field.one() }
    }

    /// Uniform over `GL_2(F_q)`, hence uniform over its projective classes.
    pub fn random<R: RngCore + ?Sized>(field: &Field, rng: &mut R) -> Self {
        loop {
            let m = Self {
                a: field.random_element(rng),
                b: field.random_element(rng),
                c: field.random_element(rng),
                d: field.random_element(rng),
            };
            if !m.determinant().is_zero() {
                return m;
            }
        }
    }

    pub fn coefficients(&self) -> [&FieldElement; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn determinant(&self) -> FieldElement {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    /// `(d, -b, -c, a)`.
    pub fn inverse(&self) -> Self {
        Self { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
    }

    pub fn is_identity_class(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.a == self.d
    }

    pub fn apply(&self, z: &ProjPoint) -> ProjPoint {
        match z {
            ProjPoint::Infinity => {
                if self.c.is_zero() {
                    ProjPoint::Infinity
                } else {
                    ProjPoint::Finite(&self.a * &self.c.inv().expect("c is nonzero"))
                }
            }
            ProjPoint::Finite(z) => {
                let num = &(&self.a * z) + &self.b;
                let den = &(&self.c * z) + &self.d;
                match den.inv() {
                    Ok(di) => ProjPoint::Finite(&num * &di),
                    // num ≠ 0 here since ad - bc ≠ 0
                    Err(_) => ProjPoint::Infinity,
                }
            }
        }
    }

    pub fn apply_finite(&self, z: &FieldElement) -> ProjPoint {
        self.apply(&ProjPoint::Finite(z.clone()))
    }
}

impl fmt::Debug for MobiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MobiusMap({}, {}, {}, {})", self.a, self.b, self.c, self.d)
    }
}

pub fn apply_mask(f: &MobiusMap, z: &ProjPoint) -> ProjPoint {
    f.apply(z)
}

pub fn invert_mask(f: &MobiusMap, w: &ProjPoint) -> ProjPoint {
    f.inverse().apply(w)
}
