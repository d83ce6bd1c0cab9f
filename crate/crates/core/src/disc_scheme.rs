// SPDX-License-Identifier: Apache-2.0

//! Discriminant-bound exchange of a secret offset `h`.
//!
//! Alice hides `h` as the shift in `y = P(t + h)` where `P` has roots
//! `a1, a2, a3`. Only `a2, a3`, the discriminant `D` and `y` are sent; Bob
//! rebuilds the candidates for `a1` from `D` and solves the shifted cubic.

use std::collections::BTreeSet;

use rand::RngCore;
use thiserror::Error;

use crate::codec::{self, integrity_tag, CodecError, IntegrityKind, Nonce, SharedSecret, TagBytes};
use crate::field::{Field, FieldElement, FieldExt};
use crate::poly::{self, PolyError, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiscError {
    #[error("integrity check failed")]
    IntegrityFailure,
    #[error("no root a1 matches the discriminant")]
    NoCandidateRoot,
    #[error("no offset solves the shifted evaluation")]
    NoShiftSolution,
    #[error("{0} candidate offsets match the auth tag, expected exactly one")]
    AmbiguousAuth(usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// `<a2, a3, D, y, z, H_check [, H_auth]>`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscMessage {
    pub a2: FieldElement,
    pub a3: FieldElement,
    pub d: FieldElement,
    pub y: FieldElement,
    pub z: Nonce,
    pub h_check: TagBytes,
    pub h_auth: Option<TagBytes>,
}

/// Alice's side: samples `h` and a fresh root triple, then builds the message.
///
/// Returns the message together with the hidden `h` and `a1`.
pub fn alice_generate<R: RngCore + ?Sized>(
    s: &SharedSecret,
    z: &Nonce,
    field: &Field,
    with_auth: bool,
    rng: &mut R,
) -> Result<(DiscMessage, FieldElement, FieldElement), DiscError> {
    let h = field.random_element(rng);
    let (msg, a1) = alice_generate_with_offset(s, z, &h, with_auth, rng)?;
    Ok((msg, h, a1))
}

/// As [`alice_generate`] with a caller-chosen offset `h`.
pub fn alice_generate_with_offset<R: RngCore + ?Sized>(
    s: &SharedSecret,
    z: &Nonce,
    h: &FieldElement,
    with_auth: bool,
    rng: &mut R,
) -> Result<(DiscMessage, FieldElement), DiscError> {
    let field = h.field();
    let t = codec::derive_t(s, z, field)?;
    let (a1, a2, a3) = sample_distinct_triple(field, rng);
    let p = Polynomial::from_roots(&[a1.clone(), a2.clone(), a3.clone()])?;
    let d = poly::discriminant_cubic(&p)?;
    debug_assert!(!d.is_zero());
    let y = p.evaluate(&(&t + h));
    let h_check = integrity_tag(IntegrityKind::Check, s, z, &[&a2, &a3, &d, &y]);
    let h_auth = with_auth.then(|| integrity_tag(IntegrityKind::Auth, s, z, &[h]));
    Ok((DiscMessage { a2, a3, d, y, z: *z, h_check, h_auth }, a1))
}

/// Three pairwise distinct elements; any repeat redraws all three.
pub(crate) fn sample_distinct_triple<R: RngCore + ?Sized>(
    field: &Field,
    rng: &mut R,
) -> (FieldElement, FieldElement, FieldElement) {
    loop {
        let a1 = field.random_element(rng);
        let a2 = field.random_element(rng);
        let a3 = field.random_element(rng);
        if a1 != a2 && a1 != a3 && a2 != a3 {
            return (a1, a2, a3);
        }
    }
}

/// Bob's side: verifies `H_check`, then returns every consistent offset.
///
/// With `H_auth` present the result is exactly one offset.
pub fn bob_recover<R: RngCore + ?Sized>(
    s: &SharedSecret,
    msg: &DiscMessage,
    rng: &mut R,
) -> Result<BTreeSet<FieldElement>, DiscError> {
    let field = msg.a2.field();
    let expected = integrity_tag(IntegrityKind::Check, s, &msg.z, &[&msg.a2, &msg.a3, &msg.d, &msg.y]);
    if expected != msg.h_check {
        return Err(DiscError::IntegrityFailure);
    }
    let t = codec::derive_t(s, &msg.z, field)?;
    let offsets = recover_offsets(&msg.a2, &msg.a3, &msg.d, &t, &msg.y, rng)?
        .into_iter()
        .flat_map(|(_, hs)| hs)
        .collect::<BTreeSet<_>>();

    let Some(auth) = msg.h_auth else {
        return Ok(offsets);
    };
    let survivors: BTreeSet<_> =
        offsets.into_iter().filter(|h| integrity_tag(IntegrityKind::Auth, s, &msg.z, &[h]) == auth).collect();
    match survivors.len() {
        1 => Ok(survivors),
        // no candidate reproduces the auth tag: the tag itself was altered
        0 => Err(DiscError::IntegrityFailure),
        n => Err(DiscError::AmbiguousAuth(n)),
    }
}

/// For each `a1` consistent with `(a2, a3, D)`, the offsets solving
/// `P(t + h) = y`. Candidates without any offset are dropped.
pub(crate) fn recover_offsets<R: RngCore + ?Sized>(
    a2: &FieldElement,
    a3: &FieldElement,
    d: &FieldElement,
    t: &FieldElement,
    y: &FieldElement,
    rng: &mut R,
) -> Result<Vec<(FieldElement, BTreeSet<FieldElement>)>, DiscError> {
    let candidates = match poly::solve_a1_from_discriminant(a2, a3, d) {
        Ok(c) => c,
        Err(PolyError::DegenerateRoots | PolyError::ZeroDiscriminant) => return Err(DiscError::NoCandidateRoot),
        Err(e) => return Err(e.into()),
    };
    if candidates.is_empty() {
        return Err(DiscError::NoCandidateRoot);
    }
    let mut out = Vec::new();
    for a1 in candidates {
        let p = Polynomial::from_roots(&[a1.clone(), a2.clone(), a3.clone()])?;
        let hs = poly::solve_shift(&p, t, y, rng)?;
        if !hs.is_empty() {
            out.push((a1, hs));
        }
    }
    if out.is_empty() {
        return Err(DiscError::NoShiftSolution);
    }
    Ok(out)
}
