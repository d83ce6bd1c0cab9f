// SPDX-License-Identifier: Apache-2.0

//! Desk-scale check that masked triples carry no information about `I`.
//!
//! Two arms of `N` sessions each: one with a fixed invariant, one with a fresh
//! invariant per session. Every session draws its own uniformly random mask.
//! Each masked coordinate is binned and the two arms are compared with a
//! two-sample chi-square homogeneity test. A control compares the arms on the
//! cross-ratio of the unmasked, completed quadruple, where the fixed arm is
//! constant and must be told apart.

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{cross_ratio_finite, sample_quadruple, MobiusMap};
use crate::field::{Field, FieldElement, FieldExt, FieldParams};

const MAX_BINS: u64 = 64;
const MAX_PRIME: u64 = 1 << 16;

#[derive(Debug, Clone, Serialize)]
pub struct CoordinateStat {
    /// 1, 2 or 3.
    pub coordinate: usize,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlReport {
    pub fixed_arm_distinct_cr: usize,
    pub random_arm_distinct_cr: usize,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
    pub distinguished: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub bins: usize,
    pub fixed_invariant: u64,
    pub coordinates: Vec<CoordinateStat>,
    pub control: ControlReport,
}

impl ExperimentReport {
    /// Smallest masked-coordinate p-value.
    pub fn min_p_value(&self) -> f64 {
        self.coordinates.iter().map(|c| c.p_value).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExperimentError {
    #[error("prime must be at most 2^16 and prime, got {0}")]
    BadPrime(u64),
    #[error("need at least 1000 sessions per arm, got {0}")]
    TooFewSessions(usize),
}

struct Arm {
    masked: [Vec<u64>; 3],
    cross_ratios: Vec<u64>,
}

fn run_arm(field: &Field, n: usize, fixed: Option<&FieldElement>, rng: &mut ChaCha20Rng) -> Arm {
    let mut masked: [Vec<u64>; 3] = Default::default();
    let mut cross_ratios = Vec::with_capacity(n);
    for _ in 0..n {
        let invariant = match fixed {
            Some(i) => i.clone(),
            None => field.random_nonzero(rng),
        };
        let quad = sample_quadruple(field, &invariant, rng);
        let images = loop {
            let mask = MobiusMap::random(field, rng);
            let imgs: Option<Vec<u64>> =
                quad[..3].iter().map(|z| mask.apply_finite(z).finite().and_then(FieldElement::to_u64)).collect();
            if let Some(v) = imgs {
                break v;
            }
        };
        for (col, v) in masked.iter_mut().zip(images) {
            col.push(v);
        }
        let cr = cross_ratio_finite(&quad[0], &quad[1], &quad[2], &quad[3]).expect("nondegenerate by construction");
        cross_ratios.push(cr.to_u64().expect("small field"));
    }
    Arm { masked, cross_ratios }
}

fn histogram(values: &[u64], p: u64, bins: u64) -> Vec<u64> {
    let mut h = vec![0u64; bins as usize];
    for &v in values {
        h[(v * bins / p) as usize] += 1;
    }
    h
}

/// Two-sample chi-square over bins where at least one arm is populated.
fn chi_square_two_sample(a: &[u64], b: &[u64]) -> (f64, usize, f64) {
    let na: f64 = a.iter().sum::<u64>() as f64;
    let nb: f64 = b.iter().sum::<u64>() as f64;
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let mut chi2 = 0.0;
    let mut used = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if x + y == 0 {
            continue;
        }
        used += 1;
        let diff = ka * x as f64 - kb * y as f64;
        chi2 += diff * diff / (x + y) as f64;
    }
    let dof = used.saturating_sub(1).max(1);
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    (chi2, dof, dist.sf(chi2))
}

fn distinct(values: &[u64]) -> usize {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

pub fn indistinguishability_experiment(p: u64, n: usize, seed: u64) -> Result<ExperimentReport, ExperimentError> {
    if p > MAX_PRIME {
        return Err(ExperimentError::BadPrime(p));
    }
    if n < 1000 {
        return Err(ExperimentError::TooFewSessions(n));
    }
    let field = FieldParams::prime(BigUint::from(p)).map_err(|_| ExperimentError::BadPrime(p))?;
    let bins = p.min(MAX_BINS);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let fixed = field.random_nonzero(&mut rng);

    let fixed_arm = run_arm(&field, n, Some(&fixed), &mut rng);
    let random_arm = run_arm(&field, n, None, &mut rng);

    let coordinates = (0..3)
        .map(|c| {
            let ha = histogram(&fixed_arm.masked[c], p, bins);
            let hb = histogram(&random_arm.masked[c], p, bins);
            let (chi2, dof, p_value) = chi_square_two_sample(&ha, &hb);
            CoordinateStat { coordinate: c + 1, chi2, dof, p_value }
        })
        .collect();

    let (chi2, dof, p_value) = chi_square_two_sample(
        &histogram(&fixed_arm.cross_ratios, p, bins),
        &histogram(&random_arm.cross_ratios, p, bins),
    );
    let fixed_distinct = distinct(&fixed_arm.cross_ratios);
    let random_distinct = distinct(&random_arm.cross_ratios);
    let control = ControlReport {
        fixed_arm_distinct_cr: fixed_distinct,
        random_arm_distinct_cr: random_distinct,
        chi2,
        dof,
        p_value,
        distinguished: fixed_distinct == 1 && random_distinct > 1 && p_value < 0.01,
    };

    Ok(ExperimentReport {
        p,
        n,
        seed,
        bins: bins as usize,
        fixed_invariant: fixed.to_u64().unwrap_or_default(),
        coordinates,
        control,
    })
}
