// SPDX-License-Identifier: Apache-2.0

//! Framing: `"IBC1" | version | type | u16 field count | (u32 len | bytes)*`,
//! all integers big-endian.

use thiserror::Error;

use super::{Nonce, TagBytes};
use crate::cr_scheme::CrMessage;
use crate::disc_scheme::DiscMessage;
use crate::field::{Field, FieldElement, FieldError, FieldExt};
use crate::session::SessionMessage;

pub const MAGIC: &[u8; 4] = b"IBC1";
pub const VERSION: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0:#04x}")]
    BadVersion(u8),
    #[error("unknown message type {0:#04x}")]
    UnknownType(u8),
    #[error("buffer truncated")]
    Truncated,
    #[error("{0} trailing bytes after message")]
    TrailingBytes(usize),
    #[error("message type {kind:?} cannot carry {count} fields")]
    FieldCount { kind: MessageType, count: usize },
    #[error("field {index} has length {actual}, expected {expected}")]
    FieldLength { index: usize, expected: usize, actual: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MessageType {
    DiscFull = 0x01,
    DiscMinimal = 0x02,
    SharedRootInit = 0x03,
    SharedRootStream = 0x04,
    CrossRatio = 0x05,
}

impl MessageType {
    pub fn from_byte(b: u8) -> Result<Self, WireError> {
        Ok(match b {
            0x01 => Self::DiscFull,
            0x02 => Self::DiscMinimal,
            0x03 => Self::SharedRootInit,
            0x04 => Self::SharedRootStream,
            0x05 => Self::CrossRatio,
            other => return Err(WireError::UnknownType(other)),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::DiscFull => "disc-full",
            Self::DiscMinimal => "disc-minimal",
            Self::SharedRootInit => "shared-root-init",
            Self::SharedRootStream => "shared-root-stream",
            Self::CrossRatio => "cross-ratio",
        }
    }
}

/// Any protocol payload that can travel on the wire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WireMessage {
    Disc(DiscMessage),
    Session(SessionMessage),
    CrossRatio(CrMessage),
}

impl WireMessage {
    pub fn message_type(&self) -> MessageType {
        match self {
            WireMessage::Disc(_) => MessageType::DiscFull,
            WireMessage::Session(SessionMessage::Minimal { .. }) => MessageType::DiscMinimal,
            WireMessage::Session(SessionMessage::Init { .. }) => MessageType::SharedRootInit,
            WireMessage::Session(SessionMessage::Stream { .. }) => MessageType::SharedRootStream,
            WireMessage::CrossRatio(_) => MessageType::CrossRatio,
        }
    }

    fn fields(&self) -> Vec<Vec<u8>> {
        let el = |e: &FieldElement| e.to_bytes();
        match self {
            WireMessage::Disc(m) => {
                let mut v = vec![el(&m.a2), el(&m.a3), el(&m.d), el(&m.y), m.z.as_bytes().to_vec(), m.h_check.to_vec()];
                if let Some(auth) = m.h_auth {
                    v.push(auth.to_vec());
                }
                v
            }
            WireMessage::Session(SessionMessage::Minimal { a2, a3, y }) => vec![el(a2), el(a3), el(y)],
            WireMessage::Session(SessionMessage::Init { a2, a3, d, y }) => vec![el(a2), el(a3), el(d), el(y)],
            WireMessage::Session(SessionMessage::Stream { a2, a3, h }) => vec![el(a2), el(a3), el(h)],
            WireMessage::CrossRatio(m) => {
                let mut v = vec![el(&m.m1), el(&m.m2), el(&m.m3), m.z.as_bytes().to_vec()];
                if let Some(check) = m.h_check {
                    v.push(check.to_vec());
                }
                v
            }
        }
    }
}

pub fn encode_message(m: &WireMessage) -> Vec<u8> {
    let fields = m.fields();
    let mut out = Vec::with_capacity(8 + fields.iter().map(|f| f.len() + 4).sum::<usize>());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(m.message_type() as u8);
    out.extend_from_slice(&(fields.len() as u16).to_be_bytes());
    for f in &fields {
        out.extend_from_slice(&(f.len() as u32).to_be_bytes());
        out.extend_from_slice(f);
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.buf.len() < n {
            return Err(WireError::Truncated);
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }
}

/// Parses a framed message; field elements are checked against `field`.
pub fn decode_message(bytes: &[u8], field: &Field) -> Result<WireMessage, WireError> {
    let mut r = Reader { buf: bytes };
    if r.take(4)? != MAGIC {
        return Err(WireError::BadMagic);
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(WireError::BadVersion(version));
    }
    let kind = MessageType::from_byte(r.u8()?)?;
    let count = u16::from_be_bytes(r.take(2)?.try_into().expect("two bytes")) as usize;
    let mut raw = Vec::with_capacity(count.min(16));
    for _ in 0..count {
        let len = u32::from_be_bytes(r.take(4)?.try_into().expect("four bytes")) as usize;
        raw.push(r.take(len)?);
    }
    if !r.buf.is_empty() {
        return Err(WireError::TrailingBytes(r.buf.len()));
    }

    let el = |i: usize| -> Result<FieldElement, WireError> {
        let expected = field.element_len();
        if raw[i].len() != expected {
            return Err(WireError::FieldLength { index: i, expected, actual: raw[i].len() });
        }
        Ok(field.element_from_bytes(raw[i])?)
    };
    let fixed32 = |i: usize| -> Result<TagBytes, WireError> {
        raw[i].try_into().map_err(|_| WireError::FieldLength { index: i, expected: 32, actual: raw[i].len() })
    };
    let bad_count = || WireError::FieldCount { kind, count };

    Ok(match kind {
        MessageType::DiscFull => {
            if count != 6 && count != 7 {
                return Err(bad_count());
            }
            WireMessage::Disc(DiscMessage {
                a2: el(0)?,
                a3: el(1)?,
                d: el(2)?,
                y: el(3)?,
                z: Nonce::new(fixed32(4)?),
                h_check: fixed32(5)?,
                h_auth: if count == 7 { Some(fixed32(6)?) } else { None },
            })
        }
        MessageType::DiscMinimal | MessageType::SharedRootStream => {
            if count != 3 {
                return Err(bad_count());
            }
            let (a2, a3, last) = (el(0)?, el(1)?, el(2)?);
            WireMessage::Session(if kind == MessageType::DiscMinimal {
                SessionMessage::Minimal { a2, a3, y: last }
            } else {
                SessionMessage::Stream { a2, a3, h: last }
            })
        }
        MessageType::SharedRootInit => {
            if count != 4 {
                return Err(bad_count());
            }
            WireMessage::Session(SessionMessage::Init { a2: el(0)?, a3: el(1)?, d: el(2)?, y: el(3)? })
        }
        MessageType::CrossRatio => {
            if count != 4 && count != 5 {
                return Err(bad_count());
            }
            WireMessage::CrossRatio(CrMessage {
                m1: el(0)?,
                m2: el(1)?,
                m3: el(2)?,
                z: Nonce::new(fixed32(3)?),
                h_check: if count == 5 { Some(fixed32(4)?) } else { None },
            })
        }
    })
}
