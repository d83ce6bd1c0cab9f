// SPDX-License-Identifier: Apache-2.0

//! Cross-ratio exchange of a hidden fourth point under projective masking.

mod experiment;
mod mobius;

pub use experiment::{indistinguishability_experiment, ControlReport, CoordinateStat, ExperimentReport};
pub use mobius::{apply_mask, invert_mask, MobiusMap, ProjPoint};

use num_bigint::BigUint;
use rand::RngCore;
use thiserror::Error;

use crate::codec::{self, integrity_tag, CodecError, IntegrityKind, Nonce, SharedSecret, TagBytes};
use crate::field::{Field, FieldElement, FieldError, FieldExt};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrError {
    #[error("integrity check failed")]
    IntegrityFailure,
    #[error("cross-ratio denominator vanishes")]
    DegenerateQuadruple,
    #[error("no finite fourth point: denominator vanishes")]
    DegenerateDenominator,
    #[error("the three known points must be pairwise distinct")]
    DistinctnessViolation,
    #[error("the invariant must be nonzero")]
    ZeroInvariant,
    #[error("mask is singular (ad - bc = 0)")]
    SingularMap,
    #[error("unmasked point is at infinity")]
    PointAtInfinity,
    #[error("field order must be at least 7")]
    FieldTooSmall,
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `<m1, m2, m3, z [, H_check]>`; the `mi` are the (possibly masked) known points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrMessage {
    pub m1: FieldElement,
    pub m2: FieldElement,
    pub m3: FieldElement,
    pub z: Nonce,
    pub h_check: Option<TagBytes>,
}

/// Difference of two projective points for cross-ratio purposes: a factor
/// touching ∞ cancels against its partner and counts as one.
fn proj_diff(u: &ProjPoint, v: &ProjPoint, field: &Field) -> FieldElement {
    match (u, v) {
        (ProjPoint::Finite(a), ProjPoint::Finite(b)) => a - b,
        (ProjPoint::Infinity, ProjPoint::Infinity) => field.zero(),
        _ => field.one(),
    }
}

/// `((z1 - z3)(z2 - z4)) / ((z1 - z4)(z2 - z3))`.
pub fn cross_ratio(z1: &ProjPoint, z2: &ProjPoint, z3: &ProjPoint, z4: &ProjPoint) -> Result<FieldElement, CrError> {
    let field = [z1, z2, z3, z4]
        .iter()
        .find_map(|p| p.finite())
        .map(|e| e.field().clone())
        .ok_or(CrError::DegenerateQuadruple)?;
    for p in [z1, z2, z3, z4] {
        if let Some(e) = p.finite() {
            if !crate::field::same_field(e.field(), &field) {
                return Err(FieldError::MismatchedField.into());
            }
        }
    }
    let num = &proj_diff(z1, z3, &field) * &proj_diff(z2, z4, &field);
    let den = &proj_diff(z1, z4, &field) * &proj_diff(z2, z3, &field);
    let den_inv = den.inv().map_err(|_| CrError::DegenerateQuadruple)?;
    Ok(&num * &den_inv)
}

/// Cross-ratio of four finite points.
pub fn cross_ratio_finite(
    z1: &FieldElement,
    z2: &FieldElement,
    z3: &FieldElement,
    z4: &FieldElement,
) -> Result<FieldElement, CrError> {
    let p = |e: &FieldElement| ProjPoint::Finite(e.clone());
    cross_ratio(&p(z1), &p(z2), &p(z3), &p(z4))
}

/// The unique `z4` with `CR(z1, z2; z3, z4) = I`.
pub fn solve_fourth(
    z1: &FieldElement,
    z2: &FieldElement,
    z3: &FieldElement,
    invariant: &FieldElement,
) -> Result<FieldElement, CrError> {
    if !(z1.same_field(z2) && z1.same_field(z3) && z1.same_field(invariant)) {
        return Err(FieldError::MismatchedField.into());
    }
    if z1 == z2 || z1 == z3 || z2 == z3 {
        return Err(CrError::DistinctnessViolation);
    }
    if invariant.is_zero() {
        return Err(CrError::ZeroInvariant);
    }
    let a = z1 - z3;
    let b = z2 - z3;
    let den = &a - &(invariant * &b);
    let den_inv = den.inv().map_err(|_| CrError::DegenerateDenominator)?;
    let num = &(&a * z2) - &(&(invariant * &b) * z1);
    Ok(&num * &den_inv)
}

/// Distinct `z1, z2, z3` for which [`solve_fourth`] succeeds, plus `z4`.
fn sample_quadruple<R: RngCore + ?Sized>(field: &Field, invariant: &FieldElement, rng: &mut R) -> [FieldElement; 4] {
    loop {
        let z1 = field.random_element(rng);
        let z2 = field.random_element(rng);
        let z3 = field.random_element(rng);
        if let Ok(z4) = solve_fourth(&z1, &z2, &z3, invariant) {
            return [z1, z2, z3, z4];
        }
    }
}

fn check_field_size(field: &Field) -> Result<(), CrError> {
    if field.order() < &BigUint::from(7u32) {
        return Err(CrError::FieldTooSmall);
    }
    Ok(())
}

/// Alice's side. Returns the message and the hidden `z4`.
///
/// With masking on, triples whose image would hit ∞ are redrawn, so the
/// message always carries finite points.
pub fn cr_alice_generate<R: RngCore + ?Sized>(
    s: &SharedSecret,
    z: &Nonce,
    field: &Field,
    use_mask: bool,
    use_check: bool,
    rng: &mut R,
) -> Result<(CrMessage, FieldElement), CrError> {
    check_field_size(field)?;
    let invariant = codec::derive_invariant(s, z, field)?;
    let mask = if use_mask { Some(codec::derive_mask(s, z, field)?) } else { None };
    let (masked, z4) = loop {
        let [z1, z2, z3, z4] = sample_quadruple(field, &invariant, rng);
        let pts = [z1, z2, z3];
        let Some(mask) = &mask else { break (pts, z4) };
        let images: Option<Vec<FieldElement>> = pts.iter().map(|p| mask.apply_finite(p).finite().cloned()).collect();
        if let Some(v) = images {
            let [m1, m2, m3]: [FieldElement; 3] = v.try_into().expect("three points");
            break ([m1, m2, m3], z4);
        }
    };
    let [m1, m2, m3] = masked;
    let h_check = use_check.then(|| integrity_tag(IntegrityKind::Check, s, z, &[&m1, &m2, &m3]));
    Ok((CrMessage { m1, m2, m3, z: *z, h_check }, z4))
}

/// Bob's side: checks the tag if present, unmasks and solves for `z4`.
pub fn cr_bob_recover(s: &SharedSecret, msg: &CrMessage, use_mask: bool) -> Result<FieldElement, CrError> {
    let field = msg.m1.field();
    if let Some(tag) = msg.h_check {
        if integrity_tag(IntegrityKind::Check, s, &msg.z, &[&msg.m1, &msg.m2, &msg.m3]) != tag {
            return Err(CrError::IntegrityFailure);
        }
    }
    let pts = [&msg.m1, &msg.m2, &msg.m3];
    let [z1, z2, z3] = if use_mask {
        let inverse = codec::derive_mask(s, &msg.z, field)?.inverse();
        let mut out = Vec::with_capacity(3);
        for m in pts {
            match inverse.apply_finite(m) {
                ProjPoint::Finite(e) => out.push(e),
                ProjPoint::Infinity => return Err(CrError::PointAtInfinity),
            }
        }
        out.try_into().expect("three points")
    } else {
        pts.map(Clone::clone)
    };
    let invariant = codec::derive_invariant(s, &msg.z, field)?;
    solve_fourth(&z1, &z2, &z3, &invariant)
}
