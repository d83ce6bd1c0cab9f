// SPDX-License-Identifier: Apache-2.0

//! Hash-based derivations with domain separation, and the wire format.
//!
//! Every derivation hashes
//!
//! ```text
//! SHA-256(tag || 0x00 || ctr || len32(part_0) || part_0 || len32(part_1) || ...)
//! ```
//!
//! with `ctr` a single counter byte and `len32` a big-endian `u32`.

mod wire;

pub use wire::{decode_message, encode_message, MessageType, WireError, WireMessage, MAGIC, VERSION};

use std::fmt;

use num_bigint::BigUint;
use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cr_scheme::MobiusMap;
use crate::field::{Field, FieldElement, FieldError, FieldExt};

/// Attempts allowed when redrawing a singular mask.
const MASK_ATTEMPTS: u32 = 256;

/// A 32-byte integrity tag.
pub type TagBytes = [u8; 32];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("unknown domain-separation tag {0:?}")]
    UnknownTag(String),
    #[error("expected {expected} bytes, got {actual}")]
    BadLength { expected: usize, actual: usize },
    #[error("invalid hex: {0}")]
    BadHex(String),
    #[error("hash-to-field counter exhausted without a nonzero draw")]
    CounterExhausted,
    #[error("no invertible mask after {0} attempts")]
    MaskExhausted(u32),
    #[error(transparent)]
    Field(#[from] FieldError),
}

macro_rules! secret_bytes {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash)]
        pub struct $name([u8; 32]);

        impl $name {
            pub const LEN: usize = 32;

            pub fn new(bytes: [u8; 32]) -> Self {
                Self(bytes)
            }

            pub fn from_slice(bytes: &[u8]) -> Result<Self, CodecError> {
                let arr: [u8; 32] = bytes
                    .try_into()
                    .map_err(|_| CodecError::BadLength { expected: 32, actual: bytes.len() })?;
                Ok(Self(arr))
            }

            pub fn from_hex(s: &str) -> Result<Self, CodecError> {
                let raw = hex::decode(s.trim()).map_err(|e| CodecError::BadHex(e.to_string()))?;
                Self::from_slice(&raw)
            }

            pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
                let mut b = [0u8; 32];
                rng.fill_bytes(&mut b);
                Self(b)
            }

            pub fn as_bytes(&self) -> &[u8; 32] {
                &self.0
            }

            pub fn to_hex(&self) -> String {
                hex::encode(self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "({})"), self.to_hex())
            }
        }
    };
}

secret_bytes!(
    /// The 256-bit secret shared by both parties.
    SharedSecret
);
secret_bytes!(
    /// Per-session 256-bit nonce.
    Nonce
);

/// Registered domain-separation tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    EvalPoint,
    Invariant,
    Mask,
    Check,
    Auth,
    Commit,
}

impl Tag {
    pub const ALL: [Tag; 6] = [Tag::EvalPoint, Tag::Invariant, Tag::Mask, Tag::Check, Tag::Auth, Tag::Commit];

    pub fn as_bytes(self) -> &'static [u8] {
        match self {
            Tag::EvalPoint => b"IBC/t",
            Tag::Invariant => b"IBC/inv",
            Tag::Mask => b"IBC/mask",
            Tag::Check => b"IBC/check",
            Tag::Auth => b"IBC/auth",
            Tag::Commit => b"IBC/commit",
        }
    }

    pub fn parse(raw: &[u8]) -> Result<Tag, CodecError> {
        Tag::ALL
            .into_iter()
            .find(|t| t.as_bytes() == raw)
            .ok_or_else(|| CodecError::UnknownTag(String::from_utf8_lossy(raw).into_owned()))
    }
}

/// Output constraint for [`hash_to_field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    Any,
    NonZero,
}

/// The framed SHA-256 used by every derivation.
pub fn framed_digest(tag: Tag, ctr: u8, parts: &[&[u8]]) -> TagBytes {
    let mut h = Sha256::new();
    h.update(tag.as_bytes());
    h.update([0x00, ctr]);
    for part in parts {
        h.update((part.len() as u32).to_be_bytes());
        h.update(part);
    }
    h.finalize().into()
}

/// Maps `parts` to an element of `F_q`; one digest per coefficient.
///
/// Under [`Constraint::NonZero`] a zero draw advances the counter base by `n`
/// and retries.
pub fn hash_to_field(
    tag: Tag,
    parts: &[&[u8]],
    field: &Field,
    constraint: Constraint,
) -> Result<FieldElement, CodecError> {
    let n = field.degree();
    let mut base = 0usize;
    loop {
        if base + n > 256 {
            return Err(CodecError::CounterExhausted);
        }
        let residues: Vec<BigUint> =
            (0..n).map(|i| BigUint::from_bytes_be(&framed_digest(tag, (base + i) as u8, parts))).collect();
        let e = field.from_residues(&residues);
        if constraint == Constraint::Any || !e.is_zero() {
            return Ok(e);
        }
        base += n;
    }
}

/// Shared evaluation point `t(S, z)`.
pub fn derive_t(s: &SharedSecret, z: &Nonce, field: &Field) -> Result<FieldElement, CodecError> {
    hash_to_field(Tag::EvalPoint, &[s.as_bytes(), z.as_bytes()], field, Constraint::Any)
}

/// Session invariant: the discriminant `D` in derived-invariant mode and the
/// cross-ratio `I` in the cross-ratio scheme. Never zero.
pub fn derive_invariant(s: &SharedSecret, z: &Nonce, field: &Field) -> Result<FieldElement, CodecError> {
    hash_to_field(Tag::Invariant, &[s.as_bytes(), z.as_bytes()], field, Constraint::NonZero)
}

/// Session mask `(a, b, c, d)` with `ad - bc != 0`.
pub fn derive_mask(s: &SharedSecret, z: &Nonce, field: &Field) -> Result<MobiusMap, CodecError> {
    for attempt in 0..MASK_ATTEMPTS {
        let attempt_bytes = attempt.to_be_bytes();
        let draw = |idx: u8| {
            hash_to_field(Tag::Mask, &[s.as_bytes(), z.as_bytes(), &[idx], &attempt_bytes], field, Constraint::Any)
        };
        let (a, b, c, d) = (draw(0)?, draw(1)?, draw(2)?, draw(3)?);
        if let Ok(map) = MobiusMap::new(a, b, c, d) {
            return Ok(map);
        }
    }
    Err(CodecError::MaskExhausted(MASK_ATTEMPTS))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrityKind {
    /// Binds the transmitted values.
    Check,
    /// Binds the hidden value.
    Auth,
}

/// `H(S, z, parts...)` under the check or auth tag.
pub fn integrity_tag(kind: IntegrityKind, s: &SharedSecret, z: &Nonce, parts: &[&FieldElement]) -> TagBytes {
    let tag = match kind {
        IntegrityKind::Check => Tag::Check,
        IntegrityKind::Auth => Tag::Auth,
    };
    let encoded: Vec<Vec<u8>> = parts.iter().map(|e| e.to_bytes()).collect();
    let mut all: Vec<&[u8]> = vec![s.as_bytes(), z.as_bytes()];
    all.extend(encoded.iter().map(Vec::as_slice));
    framed_digest(tag, 0, &all)
}

pub fn tag_from_hex(s: &str) -> Result<TagBytes, CodecError> {
    let raw = hex::decode(s.trim()).map_err(|e| CodecError::BadHex(e.to_string()))?;
    raw.as_slice().try_into().map_err(|_| CodecError::BadLength { expected: 32, actual: raw.len() })
}

pub fn element_from_hex(field: &Field, s: &str) -> Result<FieldElement, CodecError> {
    let raw = hex::decode(s.trim()).map_err(|e| CodecError::BadHex(e.to_string()))?;
    Ok(field.element_from_bytes(&raw)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn sha256_empty_vector() {
        let d = Sha256::digest(b"");
        assert!(hex::encode(d).starts_with("e3b0c44298fc"));
    }

    #[test]
    fn tag_parsing() {
        assert_eq!(Tag::parse(b"IBC/mask").unwrap(), Tag::Mask);
        assert!(matches!(Tag::parse(b"IBC/nope"), Err(CodecError::UnknownTag(_))));
    }

    #[test]
    fn framing_is_pinned() {
        // tag || 00 || ctr || len32 || part, computed by hand
        let mut manual = Vec::new();
        manual.extend_from_slice(b"IBC/t");
        manual.extend_from_slice(&[0, 3, 0, 0, 0, 2, 0xab, 0xcd]);
        let expect: TagBytes = Sha256::digest(&manual).into();
        assert_eq!(framed_digest(Tag::EvalPoint, 3, &[&[0xab, 0xcd]]), expect);
    }

    #[test]
    fn nonzero_constraint_holds_over_small_field() {
        let f = FieldParams::prime_u64(13).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let s = SharedSecret::random(&mut rng);
            let z = Nonce::random(&mut rng);
            let v = hash_to_field(Tag::Invariant, &[s.as_bytes(), z.as_bytes()], &f, Constraint::NonZero).unwrap();
            assert!(!v.is_zero());
        }
    }

    #[test]
    fn secret_length_is_checked() {
        assert!(SharedSecret::from_slice(&[0u8; 31]).is_err());
        assert!(Nonce::from_hex(&"00".repeat(32)).is_ok());
        assert!(Nonce::from_hex("zz").is_err());
    }

    #[test]
    fn mask_is_invertible_and_shared() {
        let f = FieldParams::prime_u64(13).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..200 {
            let s = SharedSecret::random(&mut rng);
            let z = Nonce::random(&mut rng);
            let m = derive_mask(&s, &z, &f).unwrap();
            assert!(!m.determinant().is_zero());
            assert_eq!(m, derive_mask(&s, &z, &f).unwrap());
        }
    }

    #[test]
    fn check_and_auth_tags_differ() {
        let f = FieldParams::prime_u64(10007).unwrap();
        let s = SharedSecret::new([1; 32]);
        let z = Nonce::new([2; 32]);
        let x = f.from_u64(77);
        assert_ne!(
            integrity_tag(IntegrityKind::Check, &s, &z, &[&x]),
            integrity_tag(IntegrityKind::Auth, &s, &z, &[&x])
        );
    }
}
