// SPDX-License-Identifier: Apache-2.0

//! Command-line driver. Both parties run in-process; every message is encoded,
//! optionally corrupted, and decoded again before the receiver sees it.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use ibc_core::applications::{puzzle_make, puzzle_solve, puzzle_verify, PuzzleJson, WitnessJson};
use ibc_core::codec::{decode_message, encode_message, Nonce, SharedSecret, WireMessage};
use ibc_core::cr_scheme::{self, indistinguishability_experiment};
use ibc_core::disc_scheme;
use ibc_core::field::{Field, FieldParams};
use ibc_core::session::{self, SessionError, SessionMode, SessionState};

mod selftest;
mod transcript;

pub use transcript::{decoded, Transcript};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROTOCOL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Shared-root initialisations tried before an ambiguous result is reported.
pub const MAX_INIT_ATTEMPTS: usize = 64;

/// 2^256 - 2^32 - 977.
pub const P256K1_HEX: &str = "fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2f";

#[derive(Debug, Parser)]
#[command(name = "ibc", version, about = "Invariant-based exchanges over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Discriminant exchange: Alice hides h, Bob recovers it.
    DemoDisc {
        #[command(flatten)]
        common: Common,
        /// Omit the authentication tag.
        #[arg(long)]
        no_auth: bool,
    },
    /// Cross-ratio exchange: Alice sends three points, Bob completes the fourth.
    DemoCr {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        no_mask: bool,
        #[arg(long)]
        no_check: bool,
    },
    /// Multi-message session modes.
    Session {
        #[command(subcommand)]
        mode: SessionCmd,
    },
    /// Constraint-embedded puzzles.
    Puzzle {
        #[command(subcommand)]
        action: PuzzleCmd,
    },
    /// Fixed-versus-random invariant experiment on masked triples.
    Experiment {
        #[arg(long, default_value_t = 10007)]
        p: u64,
        /// Sessions per arm.
        #[arg(long, default_value_t = 2000)]
        sessions: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Reduced-size run of the property checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
enum SessionCmd {
    /// Both sides derive D; messages are <a2, a3, y>.
    Minimal {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
    /// One initialisation fixes a1; messages are <a2, a3, h>.
    SharedRoot {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
}

#[derive(Debug, Subcommand)]
enum PuzzleCmd {
    /// Generate a puzzle; --reveal also prints the planted witness.
    Make {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        reveal: bool,
    },
    /// Brute-force a witness (field order at most 2^20).
    Solve {
        /// Puzzle JSON, inline or @path.
        #[arg(long)]
        puzzle: String,
    },
    /// Exit 0 if the witness satisfies the puzzle, 1 otherwise.
    Verify {
        #[arg(long)]
        puzzle: String,
        /// Witness JSON {"z3", "z4"}, inline or @path.
        #[arg(long)]
        witness: String,
    },
}

#[derive(Debug, Clone, Args)]
struct FieldArgs {
    /// demo13, demo10007, p256k1, or a hex prime.
    #[arg(long, default_value = "demo10007")]
    modulus: String,
    /// Irreducible polynomial for an extension field, coefficients low degree
    /// first including the leading 1, optionally prefixed by "n:".
    #[arg(long)]
    ext: Option<String>,
}

#[derive(Debug, Clone, Args)]
struct Common {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// 32-byte hex; defaults to a hash of the seed.
    #[arg(long)]
    secret: Option<String>,
    /// 32-byte hex; defaults to a draw from the seeded generator.
    #[arg(long)]
    nonce: Option<String>,
    #[arg(long)]
    json: bool,
    /// Flip one payload bit of the first message. BIT counts from the most
    /// significant bit of the first field; without BIT a nonce bit is used.
    #[arg(long, num_args = 0..=1, default_missing_value = "auto", value_name = "BIT")]
    tamper: Option<String>,
    /// Include the hidden values in the output.
    #[arg(long)]
    reveal: bool,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn protocol(message: impl ToString) -> Self {
        Self { code: EXIT_PROTOCOL, message: message.to_string() }
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::DemoDisc { common, no_auth } => demo_disc(&common, !no_auth, out),
        Command::DemoCr { common, no_mask, no_check } => demo_cr(&common, !no_mask, !no_check, out),
        Command::Session { mode: SessionCmd::Minimal { common, count } } => session_minimal(&common, count, out),
        Command::Session { mode: SessionCmd::SharedRoot { common, count } } => session_shared(&common, count, out),
        Command::Puzzle { action } => puzzle(action, out),
        Command::Experiment { p, sessions, seed, json } => experiment(p, sessions, seed, json, out),
        Command::Selftest { seed, json } => {
            let report = selftest::run(seed);
            emit_lines(out, json, &report.to_json(), &report.lines())?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_PROTOCOL })
        }
    }
}

pub fn parse_field(modulus: &str, ext: Option<&str>) -> Result<Field, String> {
    let p = match modulus {
        "demo13" => BigUint::from(13u32),
        "demo10007" => BigUint::from(10007u32),
        "p256k1" => BigUint::parse_bytes(P256K1_HEX.as_bytes(), 16).expect("constant"),
        hex => parse_hex_int(hex)?,
    };
    let Some(ext) = ext else {
        return FieldParams::prime(p).map_err(|e| format!("--modulus {modulus} (read as hex): {e}"));
    };
    let (declared, list) = match ext.split_once(':') {
        Some((n, rest)) => (Some(n.trim().parse::<usize>().map_err(|_| format!("bad extension degree {n:?}"))?), rest),
        None => (None, ext),
    };
    let coeffs = list
        .split(',')
        .map(|c| {
            let c = c.trim();
            match c.strip_prefix("0x") {
                Some(h) => parse_hex_int(h),
                None => c.parse::<BigUint>().map_err(|_| format!("bad coefficient {c:?}")),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(n) = declared {
        if coeffs.len() != n + 1 {
            return Err(format!("degree {n} needs {} coefficients, got {}", n + 1, coeffs.len()));
        }
    }
    FieldParams::extension(p, coeffs).map_err(|e| format!("extension: {e}"))
}

fn parse_hex_int(s: &str) -> Result<BigUint, String> {
    let digits = s.trim().trim_start_matches("0x");
    BigUint::parse_bytes(digits.as_bytes(), 16).ok_or_else(|| format!("not a named modulus or hex integer: {s:?}"))
}

/// `SHA-256("ibc-cli/secret" || seed_be)`.
pub fn default_secret(seed: u64) -> SharedSecret {
    let mut h = Sha256::new();
    h.update(b"ibc-cli/secret");
    h.update(seed.to_be_bytes());
    SharedSecret::new(h.finalize().into())
}

struct Setup {
    field: Field,
    secret: SharedSecret,
    nonce: Option<Nonce>,
    rng: ChaCha20Rng,
}

impl Common {
    fn setup(&self) -> Result<Setup, Failure> {
        let field = parse_field(&self.field.modulus, self.field.ext.as_deref()).map_err(Failure::usage)?;
        let secret = match &self.secret {
            Some(h) => SharedSecret::from_hex(h).map_err(|e| Failure::usage(format!("--secret: {e}")))?,
            None => default_secret(self.seed),
        };
        let nonce = match &self.nonce {
            Some(h) => Some(Nonce::from_hex(h).map_err(|e| Failure::usage(format!("--nonce: {e}")))?),
            None => None,
        };
        Ok(Setup { field, secret, nonce, rng: ChaCha20Rng::seed_from_u64(self.seed) })
    }

    fn tamper_bit(&self) -> Result<Option<TamperAt>, Failure> {
        match self.tamper.as_deref() {
            None => Ok(None),
            Some("auto") => Ok(Some(TamperAt::Auto)),
            Some(b) => b
                .parse::<usize>()
                .map(|b| Some(TamperAt::Bit(b)))
                .map_err(|_| Failure::usage(format!("--tamper expects a bit index, got {b:?}"))),
        }
    }
}

#[derive(Clone, Copy)]
enum TamperAt {
    Auto,
    Bit(usize),
}

/// Byte ranges of the field payloads in a framed message.
fn payload_ranges(bytes: &[u8]) -> Vec<std::ops::Range<usize>> {
    let count = u16::from_be_bytes([bytes[6], bytes[7]]) as usize;
    let mut at = 8;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let len = u32::from_be_bytes(bytes[at..at + 4].try_into().expect("four bytes")) as usize;
        at += 4;
        out.push(at..at + len);
        at += len;
    }
    out
}

/// Flips one payload bit; returns the absolute bit position.
fn tamper(bytes: &mut [u8], msg: &WireMessage, at: TamperAt) -> Result<usize, Failure> {
    let ranges = payload_ranges(bytes);
    let payload: Vec<usize> = ranges.iter().flat_map(|r| r.clone()).collect();
    let bit = match at {
        TamperAt::Bit(b) => b,
        TamperAt::Auto => {
            let nonce_field = match msg {
                WireMessage::Disc(_) => Some(4),
                WireMessage::CrossRatio(_) => Some(3),
                WireMessage::Session(_) => None,
            };
            match nonce_field {
                Some(i) => (ranges[..i].iter().map(|r| r.len()).sum::<usize>()) * 8,
                // lowest bit of the last field
                None => payload.len() * 8 - 1,
            }
        }
    };
    let byte = *payload
        .get(bit / 8)
        .ok_or_else(|| Failure::usage(format!("--tamper bit {bit} is beyond the {}-bit payload", payload.len() * 8)))?;
    bytes[byte] ^= 0x80 >> (bit % 8);
    Ok(byte * 8 + bit % 8)
}

/// Encodes, records, optionally corrupts and decodes a message.
fn transmit(
    tr: &mut Transcript,
    msg: &WireMessage,
    field: &Field,
    corrupt: Option<TamperAt>,
) -> Result<(WireMessage, Option<usize>), Failure> {
    let mut bytes = encode_message(msg);
    let flipped = match corrupt {
        Some(at) => Some(tamper(&mut bytes, msg, at)?),
        None => None,
    };
    tr.push(msg, &bytes);
    let received = decode_message(&bytes, field).map_err(|e| Failure::protocol(format!("wire: {e}")))?;
    Ok((received, flipped))
}

fn emit_lines(out: &mut dyn Write, json: bool, value: &Value, lines: &[String]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::protocol(format!("output: {e}"));
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(value).expect("serialisable")).map_err(io)?;
    } else {
        for l in lines {
            writeln!(out, "{l}").map_err(io)?;
        }
    }
    Ok(())
}

/// Prints the transcript (JSON) or a short text rendering of it.
fn emit(out: &mut dyn Write, json: bool, tr: Transcript, result: Value, ok: bool) -> Result<i32, Failure> {
    let doc = tr.finish(result);
    let mut lines = vec![format!("mode: {}", doc["mode"].as_str().unwrap_or_default())];
    for m in doc["messages"].as_array().into_iter().flatten() {
        lines.push(format!("{}: {}", m["type"].as_str().unwrap_or_default(), m["hex"].as_str().unwrap_or_default()));
    }
    if let Some(obj) = doc["result"].as_object() {
        for (k, v) in obj {
            lines.push(format!("{k}: {}", v.as_str().map(str::to_owned).unwrap_or_else(|| v.to_string())));
        }
    }
    emit_lines(out, json, &doc, &lines)?;
    Ok(if ok { EXIT_OK } else { EXIT_PROTOCOL })
}

fn fail_result(e: impl ToString, flipped: Option<usize>) -> Value {
    json!({ "ok": false, "error": e.to_string(), "tampered_bit": flipped })
}

fn demo_disc(c: &Common, with_auth: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let Setup { field, secret, nonce, mut rng } = c.setup()?;
    let z = nonce.unwrap_or_else(|| Nonce::random(&mut rng));
    let (msg, h, a1) =
        disc_scheme::alice_generate(&secret, &z, &field, with_auth, &mut rng).map_err(Failure::protocol)?;
    let mut tr = Transcript::new("demo-disc", &field);
    let (received, flipped) = match transmit(&mut tr, &WireMessage::Disc(msg), &field, c.tamper_bit()?) {
        Ok(r) => r,
        Err(f) if f.code == EXIT_PROTOCOL => return emit(out, c.json, tr, fail_result(f.message, None), false),
        Err(f) => return Err(f),
    };
    let WireMessage::Disc(received) = received else { unreachable!("type byte lies outside the payload") };
    let mut result = match disc_scheme::bob_recover(&secret, &received, &mut rng) {
        Ok(set) => {
            let ok = set.contains(&h);
            let mut r = json!({ "ok": ok, "recovered": set.iter().map(|e| e.to_hex()).collect::<Vec<_>>() });
            if !ok {
                r["error"] = "recovered offsets exclude the sent h".into();
            }
            r
        }
        Err(e) => fail_result(e, flipped),
    };
    if c.reveal {
        result["hidden"] = json!({ "h": h.to_hex(), "a1": a1.to_hex() });
    }
    let ok = result["ok"] == true;
    emit(out, c.json, tr, result, ok)
}

fn demo_cr(c: &Common, use_mask: bool, use_check: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let Setup { field, secret, nonce, mut rng } = c.setup()?;
    let z = nonce.unwrap_or_else(|| Nonce::random(&mut rng));
    let (msg, z4) =
        cr_scheme::cr_alice_generate(&secret, &z, &field, use_mask, use_check, &mut rng).map_err(Failure::protocol)?;
    let mut tr = Transcript::new("demo-cr", &field);
    let (received, flipped) = match transmit(&mut tr, &WireMessage::CrossRatio(msg), &field, c.tamper_bit()?) {
        Ok(r) => r,
        Err(f) if f.code == EXIT_PROTOCOL => return emit(out, c.json, tr, fail_result(f.message, None), false),
        Err(f) => return Err(f),
    };
    let WireMessage::CrossRatio(received) = received else { unreachable!("type byte lies outside the payload") };
    let mut result = match cr_scheme::cr_bob_recover(&secret, &received, use_mask) {
        Ok(got) if got == z4 => json!({ "ok": true, "z4": got.to_hex() }),
        Ok(got) => {
            json!({ "ok": false, "z4": got.to_hex(), "error": "reconstructed point differs", "tampered_bit": flipped })
        }
        Err(e) => fail_result(e, flipped),
    };
    if c.reveal {
        result["hidden"] = json!({ "z4": z4.to_hex() });
    }
    let ok = result["ok"] == true;
    emit(out, c.json, tr, result, ok)
}

fn session_minimal(c: &Common, count: usize, out: &mut dyn Write) -> Result<i32, Failure> {
    let Setup { field, secret, nonce, mut rng } = c.setup()?;
    let alice = match nonce {
        Some(z) => SessionState::new(secret, z, &field, SessionMode::DerivedInvariant),
        None => SessionState::derived_with_fresh_nonce(secret, &field, &mut rng),
    };
    let mut tr = Transcript::new("session-minimal", &field);
    let mut alice = match alice {
        Ok(a) => a,
        Err(e) => return emit(out, c.json, tr, fail_result(e, None), false),
    };
    let mut bob =
        SessionState::new(secret, *alice.nonce(), &field, SessionMode::DerivedInvariant).map_err(Failure::protocol)?;
    let mut corrupt = c.tamper_bit()?;
    let mut recovered = Vec::new();
    let mut hidden = Vec::new();
    for i in 0..count {
        let (msg, h) = session::minimal_send(&mut alice, &mut rng).map_err(Failure::protocol)?;
        hidden.push(h.to_hex());
        let received = match transmit(&mut tr, &WireMessage::Session(msg), &field, corrupt.take()) {
            Ok((WireMessage::Session(m), _)) => m,
            Ok(_) => unreachable!("type byte lies outside the payload"),
            Err(f) if f.code == EXIT_PROTOCOL => return emit(out, c.json, tr, fail_result(f.message, None), false),
            Err(f) => return Err(f),
        };
        match session::minimal_receive(&mut bob, &received, &mut rng) {
            Ok(set) if set.contains(&h) => recovered.push(set.iter().map(|e| e.to_hex()).collect::<Vec<_>>()),
            Ok(_) => {
                return emit(
                    out,
                    c.json,
                    tr,
                    fail_result(format!("message {i}: recovered offsets exclude h"), None),
                    false,
                )
            }
            Err(e) => return emit(out, c.json, tr, fail_result(format!("message {i}: {e}"), None), false),
        }
    }
    let mut result = json!({ "ok": true, "nonce": alice.nonce().to_hex(), "recovered": recovered });
    if c.reveal {
        result["hidden"] = json!({ "D": alice.invariant().map(|d| d.to_hex()), "h": hidden });
    }
    emit(out, c.json, tr, result, true)
}

fn session_shared(c: &Common, count: usize, out: &mut dyn Write) -> Result<i32, Failure> {
    let Setup { field, secret, nonce, mut rng } = c.setup()?;
    let z = nonce.unwrap_or_else(|| Nonce::random(&mut rng));
    let mut tr = Transcript::new("session-shared-root", &field);
    let mut corrupt = c.tamper_bit()?;
    // without tags the receiver may see several viable roots; the sender then re-initialises
    let mut attempts = 0;
    let (mut alice, mut bob, h, a1) = loop {
        attempts += 1;
        let mut alice = SessionState::new(secret, z, &field, SessionMode::SharedRoot).map_err(Failure::protocol)?;
        let mut bob = SessionState::new(secret, z, &field, SessionMode::SharedRoot).map_err(Failure::protocol)?;
        let (init, h, a1) = session::shared_root_init_send(&mut alice, &mut rng).map_err(Failure::protocol)?;
        let received = match transmit(&mut tr, &WireMessage::Session(init), &field, corrupt.take()) {
            Ok((WireMessage::Session(m), _)) => m,
            Ok(_) => unreachable!("type byte lies outside the payload"),
            Err(f) if f.code == EXIT_PROTOCOL => return emit(out, c.json, tr, fail_result(f.message, None), false),
            Err(f) => return Err(f),
        };
        match session::shared_root_init_receive(&mut bob, &received, &mut rng) {
            Ok(_) => break (alice, bob, h, a1),
            Err(SessionError::AmbiguousInit(_)) if attempts < MAX_INIT_ATTEMPTS => continue,
            Err(e) => return emit(out, c.json, tr, fail_result(format!("init: {e}"), None), false),
        }
    };
    if bob.shared_root() != Some(&a1) {
        return emit(out, c.json, tr, fail_result("init: receiver settled on a different root", None), false);
    }
    let mut shared = Vec::new();
    for i in 0..count {
        let (msg, y) = session::stream_send(&mut alice, &mut rng).map_err(Failure::protocol)?;
        let (received, _) = transmit(&mut tr, &WireMessage::Session(msg), &field, None)?;
        let WireMessage::Session(received) = received else { unreachable!("type byte lies outside the payload") };
        match session::stream_receive(&mut bob, &received) {
            Ok(got) if got == y => shared.push(y.to_hex()),
            Ok(_) => return emit(out, c.json, tr, fail_result(format!("message {i}: values differ"), None), false),
            Err(e) => return emit(out, c.json, tr, fail_result(format!("message {i}: {e}"), None), false),
        }
    }
    let mut result = json!({ "ok": true, "nonce": z.to_hex(), "init_attempts": attempts, "shared_values": shared });
    if c.reveal {
        result["hidden"] = json!({ "a1": a1.to_hex(), "h": h.to_hex() });
    }
    emit(out, c.json, tr, result, true)
}

fn read_json_arg(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{path}: {e}"))),
        None => Ok(arg.to_owned()),
    }
}

fn puzzle(action: PuzzleCmd, out: &mut dyn Write) -> Result<i32, Failure> {
    let print = |out: &mut dyn Write, v: &Value| {
        writeln!(out, "{}", serde_json::to_string_pretty(v).expect("serialisable")).map_err(Failure::protocol)
    };
    match action {
        PuzzleCmd::Make { field, seed, reveal } => {
            let f = parse_field(&field.modulus, field.ext.as_deref()).map_err(Failure::usage)?;
            let (p, (z3, z4)) = puzzle_make(&f, &mut ChaCha20Rng::seed_from_u64(seed));
            let mut doc = json!({ "puzzle": PuzzleJson::from_puzzle(&p) });
            if reveal {
                doc["witness"] = serde_json::to_value(WitnessJson::new(&z3, &z4)).expect("serialisable");
            }
            print(out, &doc)?;
            Ok(EXIT_OK)
        }
        PuzzleCmd::Solve { puzzle } => {
            let p = load_puzzle(&puzzle)?;
            match puzzle_solve(&p) {
                Ok((z3, z4)) => {
                    print(out, &json!({ "witness": WitnessJson::new(&z3, &z4) }))?;
                    Ok(EXIT_OK)
                }
                Err(e) => Err(Failure::protocol(e)),
            }
        }
        PuzzleCmd::Verify { puzzle, witness } => {
            let p = load_puzzle(&puzzle)?;
            let raw = read_json_arg(&witness)?;
            let w: Value = serde_json::from_str(&raw).map_err(|e| Failure::usage(format!("witness: {e}")))?;
            let w: WitnessJson = serde_json::from_value(w.get("witness").cloned().unwrap_or(w))
                .map_err(|e| Failure::usage(format!("witness: {e}")))?;
            let (z3, z4) = w.parse(p.field()).map_err(|e| Failure::usage(format!("witness: {e}")))?;
            let valid = puzzle_verify(&p, &z3, &z4);
            print(out, &json!({ "valid": valid }))?;
            Ok(if valid { EXIT_OK } else { EXIT_PROTOCOL })
        }
    }
}

/// Accepts a bare puzzle object or the `{"puzzle": ...}` document `make` prints.
fn load_puzzle(arg: &str) -> Result<ibc_core::applications::Puzzle, Failure> {
    let raw = read_json_arg(arg)?;
    let v: Value = serde_json::from_str(&raw).map_err(|e| Failure::usage(format!("puzzle: {e}")))?;
    let pj: PuzzleJson = serde_json::from_value(v.get("puzzle").cloned().unwrap_or(v))
        .map_err(|e| Failure::usage(format!("puzzle: {e}")))?;
    pj.to_puzzle().map_err(|e| Failure::usage(format!("puzzle: {e}")))
}

fn experiment(p: u64, sessions: usize, seed: u64, json: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let rep = indistinguishability_experiment(p, sessions, seed).map_err(|e| Failure::usage(e.to_string()))?;
    let indistinguishable = rep.min_p_value() > 0.01;
    let mut lines = vec![format!("p = {p}, {sessions} sessions per arm, seed {seed}, {} bins", rep.bins)];
    for c in &rep.coordinates {
        lines.push(format!(
            "masked coordinate {}: chi2 = {:.2} (dof {}), p = {:.4}",
            c.coordinate, c.chi2, c.dof, c.p_value
        ));
    }
    lines.push(format!(
        "unmasked cross-ratio control: chi2 = {:.2} (dof {}), p = {:.3e}, distinguished = {}",
        rep.control.chi2, rep.control.dof, rep.control.p_value, rep.control.distinguished
    ));
    let value = serde_json::to_value(&rep).expect("serialisable");
    emit_lines(out, json, &value, &lines)?;
    Ok(if indistinguishable && rep.control.distinguished { EXIT_OK } else { EXIT_PROTOCOL })
}
