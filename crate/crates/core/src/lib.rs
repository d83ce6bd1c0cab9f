// SPDX-License-Identifier: Apache-2.0

//! Invariant-based symmetric primitives over finite fields.

pub mod applications;
pub mod codec;
pub mod cr_scheme;
pub mod disc_scheme;
pub mod field;
pub mod poly;
pub mod session;
