// SPDX-License-Identifier: Apache-2.0

//! JSON transcripts of in-process exchanges.

use serde_json::{json, Map, Value};

use ibc_core::codec::{encode_message, WireMessage};
use ibc_core::field::{Field, FieldElement};
use ibc_core::session::SessionMessage;

pub struct Transcript {
    mode: String,
    field: Field,
    messages: Vec<Value>,
}

impl Transcript {
    pub fn new(mode: impl Into<String>, field: &Field) -> Self {
        Self { mode: mode.into(), field: field.clone(), messages: Vec::new() }
    }

    /// Records a message as it went on the wire.
    pub fn push(&mut self, msg: &WireMessage, bytes: &[u8]) {
        self.messages.push(json!({
            "type": msg.message_type().name(),
            "hex": hex::encode(bytes),
            "decoded": decoded(msg),
        }));
    }

    pub fn push_message(&mut self, msg: &WireMessage) -> Vec<u8> {
        let bytes = encode_message(msg);
        self.push(msg, &bytes);
        bytes
    }

    pub fn finish(self, result: Value) -> Value {
        let mut top = Map::new();
        top.insert("mode".into(), self.mode.into());
        top.insert("modulus_hex".into(), self.field.characteristic().to_str_radix(16).into());
        if self.field.degree() > 1 {
            let poly: Vec<Value> = self.field.modulus_poly().iter().map(|c| c.to_str_radix(16).into()).collect();
            top.insert("irreducible_hex".into(), poly.into());
        }
        top.insert("messages".into(), self.messages.into());
        top.insert("result".into(), result);
        Value::Object(top)
    }
}

fn el(e: &FieldElement) -> Value {
    e.to_hex().into()
}

pub fn decoded(msg: &WireMessage) -> Value {
    match msg {
        WireMessage::Disc(m) => json!({
            "a2": el(&m.a2),
            "a3": el(&m.a3),
            "D": el(&m.d),
            "y": el(&m.y),
            "z": m.z.to_hex(),
            "h_check": hex::encode(m.h_check),
            "h_auth": m.h_auth.map(hex::encode),
        }),
        WireMessage::Session(SessionMessage::Minimal { a2, a3, y }) => {
            json!({ "a2": el(a2), "a3": el(a3), "y": el(y) })
        }
        WireMessage::Session(SessionMessage::Init { a2, a3, d, y }) => {
            json!({ "a2": el(a2), "a3": el(a3), "D": el(d), "y": el(y) })
        }
        WireMessage::Session(SessionMessage::Stream { a2, a3, h }) => json!({ "a2": el(a2), "a3": el(a3), "h": el(h) }),
        WireMessage::CrossRatio(m) => json!({
            "m1": el(&m.m1),
            "m2": el(&m.m2),
            "m3": el(&m.m3),
            "z": m.z.to_hex(),
            "h_check": m.h_check.map(hex::encode),
        }),
    }
}
