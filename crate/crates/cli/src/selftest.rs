// SPDX-License-Identifier: Apache-2.0

//! Scaled-down property checks that run in a second or two.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use ibc_core::applications::{puzzle_make, puzzle_solve, puzzle_verify};
use ibc_core::codec::{decode_message, encode_message, Nonce, SharedSecret, WireMessage};
use ibc_core::cr_scheme::{self, cross_ratio, indistinguishability_experiment, MobiusMap, ProjPoint};
use ibc_core::disc_scheme::{self, DiscError};
use ibc_core::field::{Field, FieldExt, FieldParams};
use ibc_core::poly::{self, Polynomial};
use ibc_core::session::{self, SessionMode, SessionState};

use crate::P256K1_HEX;

type Check = Result<String, String>;

pub struct Report {
    checks: Vec<(&'static str, Check)>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, c)| c.is_ok())
    }

    pub fn lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .checks
            .iter()
            .map(|(name, c)| match c {
                Ok(d) => format!("PASS {name}: {d}"),
                Err(d) => format!("FAIL {name}: {d}"),
            })
            .collect();
        let ok = self.checks.iter().filter(|(_, c)| c.is_ok()).count();
        lines.push(format!("{ok}/{} checks passed", self.checks.len()));
        lines
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|(name, c)| match c {
                Ok(d) => json!({ "name": name, "ok": true, "detail": d }),
                Err(d) => json!({ "name": name, "ok": false, "detail": d }),
            })
            .collect();
        json!({ "ok": self.passed(), "checks": checks })
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fp(p: u64) -> Field {
    FieldParams::prime_u64(p).expect("prime")
}

fn p256() -> Field {
    FieldParams::prime(BigUint::parse_bytes(P256K1_HEX.as_bytes(), 16).expect("constant")).expect("prime")
}

fn field_axioms(r: &mut ChaCha20Rng) -> Check {
    let f243 = FieldParams::extension(BigUint::from(3u32), [1u32, 2, 0, 0, 0, 1].map(BigUint::from).to_vec())
        .map_err(|e| e.to_string())?;
    for f in [fp(13), p256(), f243] {
        for _ in 0..500 {
            let (a, b, c) = (f.random_element(r), f.random_element(r), f.random_element(r));
            ensure(&a * &(&b + &c) == &(&a * &b) + &(&a * &c), || "distributivity".into())?;
            ensure(&(&a * &b) * &c == &a * &(&b * &c), || "associativity".into())?;
            if !a.is_zero() {
                let inv = a.inv().map_err(|e| e.to_string())?;
                ensure((&a * &inv).is_one(), || "inverse".into())?;
            }
        }
    }
    Ok("500 triples each over F_13, 256-bit, F_3^5".into())
}

fn sqrt_table() -> Check {
    let mut count = 0;
    for p in [13u64, 101, 257, 509, 1009] {
        let f = fp(p);
        let squares: BTreeSet<u64> = (0..p).map(|x| x * x % p).collect();
        for v in 0..p {
            let ok = match f.from_u64(v).sqrt() {
                Ok(r) => squares.contains(&v) && r.square() == f.from_u64(v),
                Err(_) => !squares.contains(&v),
            };
            ensure(ok, || format!("sqrt({v}) mod {p}"))?;
        }
        count += 1;
    }
    Ok(format!("exhaustive over {count} primes"))
}

fn hashing_and_wire(r: &mut ChaCha20Rng) -> Check {
    ensure(
        hex::encode(Sha256::digest(b"abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad",
        || "SHA-256(abc)".into(),
    )?;
    let f = p256();
    let s = SharedSecret::random(r);
    for _ in 0..50 {
        let z = Nonce::random(r);
        let (m, _, _) = disc_scheme::alice_generate(&s, &z, &f, true, r).map_err(|e| e.to_string())?;
        let (c, _) = cr_scheme::cr_alice_generate(&s, &z, &f, true, true, r).map_err(|e| e.to_string())?;
        for msg in [WireMessage::Disc(m), WireMessage::CrossRatio(c)] {
            let back = decode_message(&encode_message(&msg), &f).map_err(|e| e.to_string())?;
            ensure(back == msg, || "wire roundtrip".into())?;
        }
    }
    Ok("SHA-256 vector and 100 wire roundtrips".into())
}

fn root_finder(r: &mut ChaCha20Rng) -> Check {
    let f = fp(251);
    let els: Vec<_> = (0..251).map(|v| f.from_u64(v)).collect();
    for _ in 0..100 {
        let deg = r.gen_range(1..=6);
        let mut coeffs: Vec<_> = (0..deg).map(|_| f.from_u64(r.gen_range(0..251))).collect();
        coeffs.push(f.one());
        let p = Polynomial::new(&f, coeffs).map_err(|e| e.to_string())?;
        let want: BTreeSet<_> = els.iter().filter(|x| p.evaluate(x).is_zero()).cloned().collect();
        ensure(poly::roots_in_field(&p, r).map_err(|e| e.to_string())? == want, || format!("{p:?}"))?;
    }
    Ok("100 polynomials over F_251 match brute force".into())
}

fn disc_exchange(r: &mut ChaCha20Rng) -> Check {
    let f = p256();
    let mut detected = 0;
    for i in 0..50 {
        let s = SharedSecret::random(r);
        let z = Nonce::random(r);
        let (m, h, _) = disc_scheme::alice_generate(&s, &z, &f, true, r).map_err(|e| e.to_string())?;
        let got = disc_scheme::bob_recover(&s, &m, r).map_err(|e| e.to_string())?;
        ensure(got.len() == 1 && got.contains(&h), || format!("session {i}"))?;
        let mut bad = m.clone();
        bad.y = &bad.y + &f.one();
        if let Err(DiscError::IntegrityFailure) = disc_scheme::bob_recover(&s, &bad, r) {
            detected += 1;
        }
    }
    ensure(detected == 50, || format!("{detected}/50 tampered messages caught"))?;
    Ok("50 roundtrips at 256 bits, 50/50 tampering caught".into())
}

fn cross_ratio_exchange(r: &mut ChaCha20Rng) -> Check {
    let f = fp(10007);
    for _ in 0..50 {
        let s = SharedSecret::random(r);
        let z = Nonce::random(r);
        let (m, z4) = cr_scheme::cr_alice_generate(&s, &z, &f, true, true, r).map_err(|e| e.to_string())?;
        ensure(cr_scheme::cr_bob_recover(&s, &m, true).map_err(|e| e.to_string())? == z4, || "z4 mismatch".into())?;
        let pts: Vec<ProjPoint> = (0..4).map(|_| f.random_element(r).into()).collect();
        if let Ok(cr) = cross_ratio(&pts[0], &pts[1], &pts[2], &pts[3]) {
            let mask = MobiusMap::random(&f, r);
            let img: Vec<_> = pts.iter().map(|p| mask.apply(p)).collect();
            ensure(cross_ratio(&img[0], &img[1], &img[2], &img[3]).ok() == Some(cr), || "invariance".into())?;
        }
    }
    Ok("50 masked roundtrips and invariance samples".into())
}

fn sessions(r: &mut ChaCha20Rng) -> Check {
    let f = fp(10007);
    let s = SharedSecret::random(r);
    let mut a = SessionState::derived_with_fresh_nonce(s, &f, r).map_err(|e| e.to_string())?;
    let mut b = SessionState::new(s, *a.nonce(), &f, SessionMode::DerivedInvariant).map_err(|e| e.to_string())?;
    for _ in 0..50 {
        let (m, h) = session::minimal_send(&mut a, r).map_err(|e| e.to_string())?;
        ensure(session::minimal_receive(&mut b, &m, r).map_err(|e| e.to_string())?.contains(&h), || "minimal".into())?;
    }
    let mut streamed = 0;
    for _ in 0..20 {
        let z = Nonce::random(r);
        let mut a = SessionState::new(s, z, &f, SessionMode::SharedRoot).map_err(|e| e.to_string())?;
        let mut b = SessionState::new(s, z, &f, SessionMode::SharedRoot).map_err(|e| e.to_string())?;
        let (init, _, _) = session::shared_root_init_send(&mut a, r).map_err(|e| e.to_string())?;
        if session::shared_root_init_receive(&mut b, &init, r).is_err() {
            continue;
        }
        for _ in 0..10 {
            let (m, y) = session::stream_send(&mut a, r).map_err(|e| e.to_string())?;
            ensure(session::stream_receive(&mut b, &m).map_err(|e| e.to_string())? == y, || "stream".into())?;
            streamed += 1;
        }
    }
    ensure(streamed > 0, || "no unambiguous initialisation".into())?;
    Ok(format!("50 minimal messages, {streamed} streamed values agree"))
}

fn puzzles(r: &mut ChaCha20Rng) -> Check {
    let f = fp(101);
    for i in 0..10 {
        let (p, _) = puzzle_make(&f, r);
        let (z3, z4) = puzzle_solve(&p).map_err(|e| format!("puzzle {i}: {e}"))?;
        ensure(puzzle_verify(&p, &z3, &z4), || format!("puzzle {i}"))?;
    }
    Ok("10 puzzles over F_101 solved".into())
}

fn experiment() -> Check {
    let rep = indistinguishability_experiment(10007, 1000, 42).map_err(|e| e.to_string())?;
    ensure(rep.min_p_value() > 0.01, || format!("min p-value {:.4}", rep.min_p_value()))?;
    ensure(rep.control.distinguished, || "control not distinguished".into())?;
    Ok(format!("min masked p-value {:.3}, control distinguished", rep.min_p_value()))
}

pub fn run(seed: u64) -> Report {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    let checks = vec![
        ("field axioms", field_axioms(&mut r)),
        ("square roots", sqrt_table()),
        ("hashing and wire", hashing_and_wire(&mut r)),
        ("root finding", root_finder(&mut r)),
        ("discriminant exchange", disc_exchange(&mut r)),
        ("cross-ratio exchange", cross_ratio_exchange(&mut r)),
        ("session modes", sessions(&mut r)),
        ("puzzles", puzzles(&mut r)),
        ("masking experiment", experiment()),
    ];
    Report { checks }
}
