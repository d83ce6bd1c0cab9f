// SPDX-License-Identifier: Apache-2.0

//! Session modes that reuse an invariant across messages.
//!
//! * Derived-invariant mode: both sides derive `D` from `(S, z)`; each message
//!   is just `<a2, a3, y>`.
//! * Shared-root mode: one full exchange establishes `a1`; afterwards each
//!   message `<a2, a3, h>` lets both sides compute `y = P(t + h)`.
//!
//! Neither mode carries hash tags, so both assume an authenticated transport.

use std::collections::BTreeSet;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::codec::{self, CodecError, Nonce, SharedSecret};
use crate::disc_scheme::{self, DiscError};
use crate::field::{Field, FieldElement, FieldExt};
use crate::poly::{self, PolyError, Polynomial};

/// Pairs `(a2, a3)` tried before [`sample_triple_with_discriminant`] gives up.
pub const TRIPLE_SAMPLING_ATTEMPTS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("operation not valid in {0:?} mode")]
    WrongMode(SessionMode),
    #[error("shared root not established")]
    UninitializedSession,
    #[error("shared root already established")]
    AlreadyInitialized,
    #[error("{0} root candidates are viable; refusing to pick one")]
    AmbiguousInit(usize),
    #[error("no root a1 matches the discriminant")]
    NoCandidateRoot,
    #[error("no offset solves the shifted evaluation")]
    NoShiftSolution,
    #[error("no triple with the requested discriminant after {0} attempts")]
    SamplingFailure(usize),
    #[error("the discriminant must be nonzero")]
    ZeroDiscriminant,
    #[error("derived invariant is a non-square; no split cubic has it as discriminant")]
    InfeasibleInvariant,
    #[error("open roots a2 and a3 coincide")]
    DegenerateRoots,
    #[error("message variant does not belong to this step")]
    UnexpectedMessage,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

impl From<DiscError> for SessionError {
    fn from(e: DiscError) -> Self {
        match e {
            DiscError::NoCandidateRoot => SessionError::NoCandidateRoot,
            DiscError::NoShiftSolution => SessionError::NoShiftSolution,
            DiscError::Poly(p) => SessionError::Poly(p),
            DiscError::Codec(c) => SessionError::Codec(c),
            // tags never appear in session messages
            DiscError::IntegrityFailure | DiscError::AmbiguousAuth(_) => SessionError::UnexpectedMessage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionMode {
    DerivedInvariant,
    SharedRoot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionMessage {
    /// Derived-invariant mode, wire type 0x02.
    Minimal { a2: FieldElement, a3: FieldElement, y: FieldElement },
    /// Shared-root initialisation, wire type 0x03.
    Init { a2: FieldElement, a3: FieldElement, d: FieldElement, y: FieldElement },
    /// Shared-root streaming, wire type 0x04.
    Stream { a2: FieldElement, a3: FieldElement, h: FieldElement },
}

impl SessionMessage {
    pub fn element_count(&self) -> usize {
        match self {
            SessionMessage::Minimal { .. } | SessionMessage::Stream { .. } => 3,
            SessionMessage::Init { .. } => 4,
        }
    }
}

/// One party's view of a session.
#[derive(Debug, Clone)]
pub struct SessionState {
    secret: SharedSecret,
    nonce: Nonce,
    field: Field,
    t: FieldElement,
    mode: SessionMode,
    invariant: Option<FieldElement>,
    a1: Option<FieldElement>,
    msg_counter: u64,
}

impl SessionState {
    pub fn new(secret: SharedSecret, nonce: Nonce, field: &Field, mode: SessionMode) -> Result<Self, SessionError> {
        let t = codec::derive_t(&secret, &nonce, field)?;
        let invariant = match mode {
            SessionMode::DerivedInvariant => {
                let d = codec::derive_invariant(&secret, &nonce, field)?;
                // Δ = ((a1-a2)(a1-a3)(a2-a3))^2 is always a square
                if d.sqrt().is_err() {
                    return Err(SessionError::InfeasibleInvariant);
                }
                Some(d)
            }
            SessionMode::SharedRoot => None,
        };
        Ok(Self { secret, nonce, field: field.clone(), t, mode, invariant, a1: None, msg_counter: 0 })
    }

    /// Derived-invariant session under the first fresh nonce whose `D` is a square.
    pub fn derived_with_fresh_nonce<R: RngCore + ?Sized>(
        secret: SharedSecret,
        field: &Field,
        rng: &mut R,
    ) -> Result<Self, SessionError> {
        loop {
            match Self::new(secret, Nonce::random(rng), field, SessionMode::DerivedInvariant) {
                Err(SessionError::InfeasibleInvariant) => continue,
                other => return other,
            }
        }
    }

    pub fn mode(&self) -> SessionMode {
        self.mode
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nonce(&self) -> &Nonce {
        &self.nonce
    }

    pub fn secret(&self) -> &SharedSecret {
        &self.secret
    }

    pub fn t(&self) -> &FieldElement {
        &self.t
    }

    /// `D` in derived-invariant mode.
    pub fn invariant(&self) -> Option<&FieldElement> {
        self.invariant.as_ref()
    }

    pub fn shared_root(&self) -> Option<&FieldElement> {
        self.a1.as_ref()
    }

    pub fn msg_counter(&self) -> u64 {
        self.msg_counter
    }

    fn require(&self, mode: SessionMode) -> Result<(), SessionError> {
        if self.mode != mode {
            return Err(SessionError::WrongMode(self.mode));
        }
        Ok(())
    }

    fn derived_d(&self) -> Result<&FieldElement, SessionError> {
        self.require(SessionMode::DerivedInvariant)?;
        self.invariant.as_ref().ok_or(SessionError::WrongMode(self.mode))
    }
}

/// Picks one `a1` completing `(a2, a3)` to a triple with discriminant `d`,
/// uniformly among the candidates, or `None` if there is none.
pub fn complete_triple<R: RngCore + ?Sized>(
    d: &FieldElement,
    a2: &FieldElement,
    a3: &FieldElement,
    rng: &mut R,
) -> Result<Option<FieldElement>, SessionError> {
    let cands: Vec<_> = poly::solve_a1_from_discriminant(a2, a3, d)?.into_iter().collect();
    if cands.is_empty() {
        return Ok(None);
    }
    let i = rng.gen_range(0..cands.len());
    Ok(Some(cands[i].clone()))
}

/// A root triple `(a1, a2, a3)` whose discriminant is exactly `d`.
pub fn sample_triple_with_discriminant<R: RngCore + ?Sized>(
    d: &FieldElement,
    rng: &mut R,
) -> Result<(FieldElement, FieldElement, FieldElement), SessionError> {
    if d.is_zero() {
        return Err(SessionError::ZeroDiscriminant);
    }
    let field = d.field();
    for _ in 0..TRIPLE_SAMPLING_ATTEMPTS {
        let a2 = field.random_element(rng);
        let a3 = field.random_element(rng);
        if a2 == a3 {
            continue;
        }
        if let Some(a1) = complete_triple(d, &a2, &a3, rng)? {
            return Ok((a1, a2, a3));
        }
    }
    Err(SessionError::SamplingFailure(TRIPLE_SAMPLING_ATTEMPTS))
}

fn cubic(a1: &FieldElement, a2: &FieldElement, a3: &FieldElement) -> Result<Polynomial, SessionError> {
    Ok(Polynomial::from_roots(&[a1.clone(), a2.clone(), a3.clone()])?)
}

/// Derived-invariant sender. Returns `<a2, a3, y>` and the hidden `h`.
pub fn minimal_send<R: RngCore + ?Sized>(
    st: &mut SessionState,
    rng: &mut R,
) -> Result<(SessionMessage, FieldElement), SessionError> {
    let d = st.derived_d()?.clone();
    let (a1, a2, a3) = sample_triple_with_discriminant(&d, rng)?;
    let h = st.field.random_element(rng);
    let y = cubic(&a1, &a2, &a3)?.evaluate(&(&st.t + &h));
    st.msg_counter += 1;
    Ok((SessionMessage::Minimal { a2, a3, y }, h))
}

/// Derived-invariant receiver: every offset consistent with `D`, `t` and the message.
pub fn minimal_receive<R: RngCore + ?Sized>(
    st: &mut SessionState,
    msg: &SessionMessage,
    rng: &mut R,
) -> Result<BTreeSet<FieldElement>, SessionError> {
    let d = st.derived_d()?.clone();
    let SessionMessage::Minimal { a2, a3, y } = msg else {
        return Err(SessionError::UnexpectedMessage);
    };
    let found = disc_scheme::recover_offsets(a2, a3, &d, &st.t, y, rng)?;
    st.msg_counter += 1;
    Ok(found.into_iter().flat_map(|(_, hs)| hs).collect())
}

/// Shared-root initialisation sender; fixes `a1` in the sender's state.
pub fn shared_root_init_send<R: RngCore + ?Sized>(
    st: &mut SessionState,
    rng: &mut R,
) -> Result<(SessionMessage, FieldElement, FieldElement), SessionError> {
    st.require(SessionMode::SharedRoot)?;
    if st.a1.is_some() {
        return Err(SessionError::AlreadyInitialized);
    }
    let (a1, a2, a3) = disc_scheme::sample_distinct_triple(&st.field, rng);
    let p = cubic(&a1, &a2, &a3)?;
    let d = poly::discriminant_cubic(&p)?;
    let h = st.field.random_element(rng);
    let y = p.evaluate(&(&st.t + &h));
    st.a1 = Some(a1.clone());
    st.msg_counter += 1;
    Ok((SessionMessage::Init { a2, a3, d, y }, h, a1))
}

/// Shared-root initialisation receiver.
///
/// Returns each viable `a1` with its offsets, and commits `a1` only when
/// exactly one candidate is viable.
pub fn shared_root_init_receive<R: RngCore + ?Sized>(
    st: &mut SessionState,
    msg: &SessionMessage,
    rng: &mut R,
) -> Result<Vec<(FieldElement, BTreeSet<FieldElement>)>, SessionError> {
    st.require(SessionMode::SharedRoot)?;
    if st.a1.is_some() {
        return Err(SessionError::AlreadyInitialized);
    }
    let SessionMessage::Init { a2, a3, d, y } = msg else {
        return Err(SessionError::UnexpectedMessage);
    };
    let viable = disc_scheme::recover_offsets(a2, a3, d, &st.t, y, rng)?;
    if viable.len() != 1 {
        return Err(SessionError::AmbiguousInit(viable.len()));
    }
    st.a1 = Some(viable[0].0.clone());
    st.msg_counter += 1;
    Ok(viable)
}

/// Streams an explicit tuple. Returns the message and the shared value `y`.
pub fn stream_send_tuple(
    st: &mut SessionState,
    a2: FieldElement,
    a3: FieldElement,
    h: FieldElement,
) -> Result<(SessionMessage, FieldElement), SessionError> {
    let msg = SessionMessage::Stream { a2, a3, h };
    let y = stream_value(st, &msg)?;
    st.msg_counter += 1;
    Ok((msg, y))
}

/// Streams a fresh random tuple.
pub fn stream_send<R: RngCore + ?Sized>(
    st: &mut SessionState,
    rng: &mut R,
) -> Result<(SessionMessage, FieldElement), SessionError> {
    let (a2, a3) = loop {
        let a2 = st.field.random_element(rng);
        let a3 = st.field.random_element(rng);
        if a2 != a3 {
            break (a2, a3);
        }
    };
    let h = st.field.random_element(rng);
    stream_send_tuple(st, a2, a3, h)
}

pub fn stream_receive(st: &mut SessionState, msg: &SessionMessage) -> Result<FieldElement, SessionError> {
    let y = stream_value(st, msg)?;
    st.msg_counter += 1;
    Ok(y)
}

fn stream_value(st: &SessionState, msg: &SessionMessage) -> Result<FieldElement, SessionError> {
    st.require(SessionMode::SharedRoot)?;
    let a1 = st.a1.as_ref().ok_or(SessionError::UninitializedSession)?;
    let SessionMessage::Stream { a2, a3, h } = msg else {
        return Err(SessionError::UnexpectedMessage);
    };
    if a2 == a3 {
        return Err(SessionError::DegenerateRoots);
    }
    Ok(cubic(a1, a2, a3)?.evaluate(&(&st.t + h)))
}
