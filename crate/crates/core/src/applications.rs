// SPDX-License-Identifier: Apache-2.0

//! Higher-level uses of the schemes: commitments, challenge-response
//! authentication and constraint-embedded puzzles.

use num_bigint::BigUint;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{self, integrity_tag, Constraint, IntegrityKind, Nonce, SharedSecret, Tag, TagBytes};
use crate::cr_scheme::{self, cross_ratio_finite, solve_fourth, CrError, CrMessage};
use crate::disc_scheme::{self, DiscError, DiscMessage};
use crate::field::{Field, FieldElement, FieldError, FieldExt, FieldParams};

/// Largest field order `puzzle_solve` will scan.
pub const MAX_PUZZLE_ORDER: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AppError {
    #[error("no witness exists")]
    NoSolution,
    #[error("field order exceeds the brute-force bound of 2^20")]
    FieldTooLarge,
    #[error("malformed puzzle: {0}")]
    MalformedPuzzle(String),
    #[error(transparent)]
    Disc(#[from] DiscError),
    #[error(transparent)]
    Cr(#[from] CrError),
    #[error(transparent)]
    Codec(#[from] codec::CodecError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A published commitment; the hidden offset is `H(object)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commitment {
    pub encoding: DiscMessage,
    pub context: Nonce,
}

fn object_value(object: &[u8], field: &Field) -> Result<FieldElement, codec::CodecError> {
    codec::hash_to_field(Tag::Commit, &[object], field, Constraint::Any)
}

pub fn commit<R: RngCore + ?Sized>(
    s: &SharedSecret,
    object: &[u8],
    field: &Field,
    rng: &mut R,
) -> Result<Commitment, AppError> {
    let context = Nonce::random(rng);
    let v = object_value(object, field)?;
    let (encoding, _) = disc_scheme::alice_generate_with_offset(s, &context, &v, true, rng)?;
    Ok(Commitment { encoding, context })
}

/// Opens a commitment against `object`. Any protocol failure reads as `false`.
pub fn verify_commitment(s: &SharedSecret, object: &[u8], c: &Commitment) -> bool {
    if c.context != c.encoding.z {
        return false;
    }
    let Ok(v) = object_value(object, c.encoding.a2.field()) else {
        return false;
    };
    // root finding is randomised but its output is not
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    match disc_scheme::bob_recover(s, &c.encoding, &mut rng) {
        Ok(set) => set.len() == 1 && set.contains(&v),
        Err(_) => false,
    }
}

/// What the verifier keeps back while a challenge is outstanding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedResponse {
    pub z4: FieldElement,
    pub tag: TagBytes,
}

/// Verifier: a masked, checked cross-ratio instance with `z4` withheld.
pub fn cr_challenge<R: RngCore + ?Sized>(
    s: &SharedSecret,
    field: &Field,
    rng: &mut R,
) -> Result<(CrMessage, ExpectedResponse), AppError> {
    let z = Nonce::random(rng);
    let (msg, z4) = cr_scheme::cr_alice_generate(s, &z, field, true, true, rng)?;
    let tag = integrity_tag(IntegrityKind::Auth, s, &z, &[&z4]);
    Ok((msg, ExpectedResponse { z4, tag }))
}

/// Prover: rebuilds `z4` and answers with `H_auth(S, z, z4)`.
pub fn cr_respond(s: &SharedSecret, challenge: &CrMessage) -> Result<TagBytes, AppError> {
    let z4 = cr_scheme::cr_bob_recover(s, challenge, true)?;
    Ok(integrity_tag(IntegrityKind::Auth, s, &challenge.z, &[&z4]))
}

pub fn cr_check(expected: &ExpectedResponse, response: &TagBytes) -> bool {
    expected.tag == *response
}

/// Find `z3, z4` with `CR(z1, z2; z3, z4) = I` and `z3^z4 = k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Puzzle {
    pub z1: FieldElement,
    pub z2: FieldElement,
    pub invariant: FieldElement,
    pub k: FieldElement,
}

impl Puzzle {
    pub fn field(&self) -> &Field {
        self.z1.field()
    }
}

/// `z3^z4` with `z4` lifted to its integer representative in `[0, q)`.
fn exponent_constraint(z3: &FieldElement, z4: &FieldElement) -> FieldElement {
    z3.pow(&z4.to_index())
}

pub fn puzzle_make<R: RngCore + ?Sized>(field: &Field, rng: &mut R) -> (Puzzle, (FieldElement, FieldElement)) {
    loop {
        let z1 = field.random_element(rng);
        let z2 = field.random_element(rng);
        let invariant = field.random_nonzero(rng);
        if z1 == z2 {
            continue;
        }
        let z3 = field.random_element(rng);
        let Ok(z4) = solve_fourth(&z1, &z2, &z3, &invariant) else { continue };
        let k = exponent_constraint(&z3, &z4);
        return (Puzzle { z1, z2, invariant, k }, (z3, z4));
    }
}

pub fn puzzle_verify(p: &Puzzle, z3: &FieldElement, z4: &FieldElement) -> bool {
    match cross_ratio_finite(&p.z1, &p.z2, z3, z4) {
        Ok(cr) if cr == p.invariant => exponent_constraint(z3, z4) == p.k,
        _ => false,
    }
}

/// Exhaustive scan over `z3` in ascending index order; the first hit wins.
pub fn puzzle_solve(p: &Puzzle) -> Result<(FieldElement, FieldElement), AppError> {
    let field = p.field();
    if field.order() > &BigUint::from(MAX_PUZZLE_ORDER) {
        return Err(AppError::FieldTooLarge);
    }
    let mut idx = BigUint::from(0u32);
    while &idx < field.order() {
        let z3 = field.element_at(&idx);
        idx += 1u32;
        let Ok(z4) = solve_fourth(&p.z1, &p.z2, &z3, &p.invariant) else { continue };
        if exponent_constraint(&z3, &z4) == p.k {
            return Ok((z3, z4));
        }
    }
    Err(AppError::NoSolution)
}

/// Interchange form of a puzzle; elements are hex in the canonical encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuzzleJson {
    pub modulus_hex: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub irreducible_hex: Vec<String>,
    pub z1: String,
    pub z2: String,
    pub invariant: String,
    pub k: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub z3: String,
    pub z4: String,
}

impl PuzzleJson {
    pub fn from_puzzle(p: &Puzzle) -> Self {
        let f = p.field();
        Self {
            modulus_hex: f.characteristic().to_str_radix(16),
            irreducible_hex: f.modulus_poly().iter().map(|c| c.to_str_radix(16)).collect(),
            z1: p.z1.to_hex(),
            z2: p.z2.to_hex(),
            invariant: p.invariant.to_hex(),
            k: p.k.to_hex(),
        }
    }

    pub fn field(&self) -> Result<Field, AppError> {
        let parse = |s: &str| {
            BigUint::parse_bytes(s.as_bytes(), 16)
                .ok_or_else(|| AppError::MalformedPuzzle(format!("bad hex integer {s:?}")))
        };
        let p = parse(&self.modulus_hex)?;
        if self.irreducible_hex.is_empty() {
            Ok(FieldParams::prime(p)?)
        } else {
            let coeffs = self.irreducible_hex.iter().map(|c| parse(c)).collect::<Result<Vec<_>, _>>()?;
            Ok(FieldParams::extension(p, coeffs)?)
        }
    }

    pub fn to_puzzle(&self) -> Result<Puzzle, AppError> {
        let f = self.field()?;
        let el = |s: &str| codec::element_from_hex(&f, s);
        let puzzle = Puzzle { z1: el(&self.z1)?, z2: el(&self.z2)?, invariant: el(&self.invariant)?, k: el(&self.k)? };
        if puzzle.z1 == puzzle.z2 || puzzle.invariant.is_zero() {
            return Err(AppError::MalformedPuzzle("need z1 != z2 and I != 0".into()));
        }
        Ok(puzzle)
    }
}

impl WitnessJson {
    pub fn new(z3: &FieldElement, z4: &FieldElement) -> Self {
        Self { z3: z3.to_hex(), z4: z4.to_hex() }
    }

    pub fn parse(&self, field: &Field) -> Result<(FieldElement, FieldElement), AppError> {
        Ok((codec::element_from_hex(field, &self.z3)?, codec::element_from_hex(field, &self.z4)?))
    }
}
