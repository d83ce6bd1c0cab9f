// SPDX-License-Identifier: Apache-2.0

use std::process::Command;

use serde_json::Value;

use ibc_cli::{parse_field, run, EXIT_OK, EXIT_PROTOCOL, EXIT_USAGE};
use ibc_core::codec::decode_message;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ibc").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut with = args.to_vec();
    with.push("--json");
    let (code, out, err) = invoke(&with);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}{err}"));
    (code, v)
}

/// Every emitted message decodes and its re-encoding is the emitted hex.
fn assert_messages_roundtrip(doc: &Value) {
    let modulus = doc["modulus_hex"].as_str().unwrap();
    let field = parse_field(modulus, None).unwrap();
    let msgs = doc["messages"].as_array().unwrap();
    assert!(!msgs.is_empty());
    for m in msgs {
        let bytes = hex::decode(m["hex"].as_str().unwrap()).unwrap();
        let decoded = decode_message(&bytes, &field).unwrap();
        assert_eq!(ibc_core::codec::encode_message(&decoded), bytes);
        assert_eq!(ibc_cli::decoded(&decoded), m["decoded"]);
        assert_eq!(decoded.message_type().name(), m["type"]);
    }
}

#[test]
fn demo_disc_is_deterministic() {
    let a = invoke(&["demo-disc", "--modulus", "demo10007", "--seed", "1", "--json"]);
    let b = invoke(&["demo-disc", "--modulus", "demo10007", "--seed", "1", "--json"]);
    assert_eq!(a.0, EXIT_OK);
    assert_eq!(a.1, b.1);
    let c = invoke(&["demo-disc", "--modulus", "demo10007", "--seed", "2", "--json"]);
    assert_ne!(a.1, c.1);
}

#[test]
fn demo_disc_transcript_shape() {
    let (code, doc) = json(&["demo-disc", "--modulus", "p256k1", "--seed", "3", "--reveal"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(doc["mode"], "demo-disc");
    assert_eq!(doc["result"]["ok"], true);
    let recovered = doc["result"]["recovered"].as_array().unwrap();
    assert_eq!(recovered.len(), 1);
    assert_eq!(recovered[0], doc["result"]["hidden"]["h"]);
    assert_messages_roundtrip(&doc);
}

#[test]
fn tampering_is_reported() {
    let (code, doc) = json(&["demo-disc", "--seed", "1", "--tamper"]);
    assert_eq!(code, EXIT_PROTOCOL);
    assert_eq!(doc["result"]["ok"], false);
    assert!(doc["result"]["error"].as_str().unwrap().contains("integrity"));

    let (code, out, _) = invoke(&["demo-disc", "--modulus", "p256k1", "--tamper", "5"]);
    assert_eq!(code, EXIT_PROTOCOL);
    assert!(out.contains("integrity check failed"));

    let (code, doc) = json(&["demo-cr", "--seed", "4", "--tamper"]);
    assert_eq!(code, EXIT_PROTOCOL);
    assert!(doc["result"]["error"].as_str().unwrap().contains("integrity"));
}

#[test]
fn demo_cr_variants() {
    for extra in [&[][..], &["--no-mask"], &["--no-check"], &["--no-mask", "--no-check"]] {
        let mut args = vec!["demo-cr", "--seed", "5", "--modulus", "p256k1"];
        args.extend_from_slice(extra);
        let (code, doc) = json(&args);
        assert_eq!(code, EXIT_OK, "{extra:?}");
        assert_messages_roundtrip(&doc);
    }
}

#[test]
fn extension_field_demo() {
    let (code, doc) = json(&["demo-disc", "--modulus", "3", "--ext", "5:1,2,0,0,0,1", "--seed", "6"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(doc["irreducible_hex"].as_array().unwrap().len(), 6);
    let (code, _, err) = invoke(&["demo-disc", "--modulus", "3", "--ext", "2,0,1"]);
    assert_eq!(code, EXIT_USAGE, "x^2 + 2 = (x - 1)(x + 1) over F_3: {err}");
}

#[test]
fn sessions() {
    let (code, doc) = json(&["session", "minimal", "--modulus", "p256k1", "--count", "3", "--seed", "7"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(doc["messages"].as_array().unwrap().len(), 3);
    assert_messages_roundtrip(&doc);

    let (code, doc) = json(&["session", "shared-root", "--count", "4", "--seed", "8"]);
    assert_eq!(code, EXIT_OK);
    let attempts = doc["result"]["init_attempts"].as_u64().unwrap() as usize;
    assert_eq!(doc["messages"].as_array().unwrap().len(), attempts + 4);
    assert_eq!(doc["result"]["shared_values"].as_array().unwrap().len(), 4);
    assert_messages_roundtrip(&doc);
}

#[test]
fn puzzle_flow() {
    let (code, out, _) = invoke(&["puzzle", "make", "--modulus", "65", "--seed", "9"]);
    assert_eq!(code, EXIT_OK);
    let made: Value = serde_json::from_str(&out).unwrap();
    assert!(made.get("witness").is_none());
    let puzzle = made.to_string();

    let (code, out, _) = invoke(&["puzzle", "solve", "--puzzle", &puzzle]);
    assert_eq!(code, EXIT_OK);
    let witness: Value = serde_json::from_str(&out).unwrap();
    let (code, _, _) = invoke(&["puzzle", "verify", "--puzzle", &puzzle, "--witness", &witness.to_string()]);
    assert_eq!(code, EXIT_OK);

    let mut wrong = witness.clone();
    let z4 = wrong["witness"]["z4"].as_str().unwrap();
    wrong["witness"]["z4"] = if z4 == "00" { "01" } else { "00" }.into();
    let (code, out, _) = invoke(&["puzzle", "verify", "--puzzle", &puzzle, "--witness", &wrong.to_string()]);
    assert_eq!(code, EXIT_PROTOCOL);
    assert!(out.contains("false"));
}

#[test]
fn experiment_reports_json() {
    let (code, doc) = json(&["experiment", "--sessions", "1000", "--seed", "42"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(doc["N"], 1000);
    assert_eq!(doc["coordinates"].as_array().unwrap().len(), 3);
    assert_eq!(doc["control"]["distinguished"], true);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["frobnicate"][..],
        &["demo-disc", "--modulus", "f"],
        &["demo-disc", "--modulus", "zz"],
        &["demo-disc", "--secret", "abcd"],
        &["demo-disc", "--tamper", "x"],
        &["demo-disc", "--tamper", "99999"],
        &["puzzle", "solve", "--puzzle", "{}"],
        &["experiment", "--p", "65537"],
    ] {
        let (code, _, err) = invoke(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(!err.is_empty());
    }
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("demo-disc"));
}

#[test]
fn explicit_secret_and_nonce_are_honoured() {
    let secret = "11".repeat(32);
    let nonce = "22".repeat(32);
    let (code, doc) = json(&["demo-disc", "--secret", &secret, "--nonce", &nonce, "--seed", "10"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(doc["messages"][0]["decoded"]["z"], nonce.as_str());
}

#[test]
fn binary_selftest_passes() {
    let out = Command::new(env!("CARGO_BIN_EXE_ibc")).arg("selftest").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains("FAIL"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ibc");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(code(&["demo-disc", "--seed", "1"]), Some(0));
    assert_eq!(code(&["demo-disc", "--seed", "1", "--tamper"]), Some(1));
    assert_eq!(code(&["demo-disc", "--modulus", "1"]), Some(2));
}
