//! Deterministic synthetic fixtures in the raw exchange format.
//!
//! The four standard datasets (Cleveland, Hungarian, Switzerland, Long Beach
//! VA) are not redistributable here, so the repository ships generated
//! stand-ins with the canonical record counts and severity distributions.
//! Attribute values are drawn class-conditionally (binary symptom rates come
//! from the shipped likelihood table where it covers them), with per-dataset
//! missingness profiles mirroring the well-known gaps (Swiss cholesterol,
//! Hungarian ca/thal). Generation is a pure function of the profile seed, so
//! `examples/make_fixtures.rs` always reproduces the committed files byte for
//! byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ingest::{AttributeSchema, Dataset, PatientRecord, ATTRIBUTE_COUNT, CLASS_COUNT};
use crate::nbc::builtin_table6;

/// Shape of one synthetic dataset.
#[derive(Debug, Clone)]
pub struct SynthProfile {
    pub name: &'static str,
    pub seed: u64,
    pub id_start: i64,
    /// Records per severity class, absence..serious.
    pub class_counts: [usize; CLASS_COUNT],
    /// Missing rate of serum cholesterol.
    pub chol_missing: f64,
    /// Missing rate of the ca and thal attributes.
    pub ca_thal_missing: f64,
    /// Missing rate of the per-vessel attributes 59..=68.
    pub vessel_missing: f64,
    /// Missing rate of the smoking attributes 13..=15.
    pub smoking_missing: f64,
}

pub const CLEVELAND: SynthProfile = SynthProfile {
    name: "cleveland",
    seed: 101,
    id_start: 1,
    class_counts: [164, 55, 36, 35, 13],
    chol_missing: 0.03,
    ca_thal_missing: 0.03,
    vessel_missing: 0.25,
    smoking_missing: 0.2,
};

pub const HUNGARIAN: SynthProfile = SynthProfile {
    name: "hungarian",
    seed: 102,
    id_start: 1254,
    class_counts: [188, 37, 26, 28, 15],
    chol_missing: 0.08,
    ca_thal_missing: 0.9,
    vessel_missing: 0.6,
    smoking_missing: 0.35,
};

pub const SWITZERLAND: SynthProfile = SynthProfile {
    name: "switzerland",
    seed: 103,
    id_start: 3001,
    class_counts: [8, 48, 32, 30, 5],
    chol_missing: 0.93,
    ca_thal_missing: 0.55,
    vessel_missing: 0.45,
    smoking_missing: 0.3,
};

pub const LONG_BEACH: SynthProfile = SynthProfile {
    name: "long-beach-va",
    seed: 104,
    id_start: 1,
    class_counts: [51, 56, 41, 42, 10],
    chol_missing: 0.12,
    ca_thal_missing: 0.5,
    vessel_missing: 0.4,
    smoking_missing: 0.25,
};

pub fn profiles() -> [SynthProfile; 4] {
    [CLEVELAND, HUNGARIAN, SWITZERLAND, LONG_BEACH]
}

pub fn cleveland() -> Dataset {
    generate(&CLEVELAND)
}

pub fn hungarian() -> Dataset {
    generate(&HUNGARIAN)
}

pub fn switzerland() -> Dataset {
    generate(&SWITZERLAND)
}

pub fn long_beach() -> Dataset {
    generate(&LONG_BEACH)
}

pub fn all_four() -> Vec<Dataset> {
    profiles().iter().map(generate).collect()
}

fn put(values: &mut [Option<f64>], slot: u8, value: Option<f64>) {
    values[slot as usize - 1] = value;
}

struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    fn bernoulli(&mut self, p: f64) -> f64 {
        (self.rng.gen::<f64>() < p.clamp(0.01, 0.99)) as u8 as f64
    }

    fn normal(&mut self, mean: f64, sd: f64, lo: f64, hi: f64, decimals: i32) -> f64 {
        let v = Normal::new(mean, sd).expect("finite parameters").sample(&mut self.rng);
        let scale = 10f64.powi(decimals);
        ((v * scale).round() / scale).clamp(lo, hi)
    }

    fn uniform_int(&mut self, lo: i64, hi: i64) -> f64 {
        self.rng.gen_range(lo..=hi) as f64
    }

    /// Pick a category with weights peaked around `anchor` (an index).
    fn anchored(&mut self, categories: &[f64], anchor: f64, sharpness: f64) -> f64 {
        let weights: Vec<f64> =
            (0..categories.len()).map(|i| 1.0 / (1.0 + sharpness * (i as f64 - anchor).abs())).collect();
        self.weighted(categories, &weights)
    }

    fn weighted(&mut self, categories: &[f64], weights: &[f64]) -> f64 {
        let total: f64 = weights.iter().sum();
        let mut draw = self.rng.gen::<f64>() * total;
        for (category, weight) in categories.iter().zip(weights) {
            draw -= weight;
            if draw <= 0.0 {
                return *category;
            }
        }
        *categories.last().expect("non-empty categories")
    }

    /// Draw a value, then blank it at the given missing rate.
    fn opt(&mut self, rate: f64, draw: impl FnOnce(&mut Self) -> f64) -> Option<f64> {
        let value = draw(self);
        let dropped = self.rng.gen::<f64>() < rate;
        (!dropped).then_some(value)
    }
}

/// Generate one dataset from its profile. Record counts and the label
/// distribution are exact; everything else is class-conditioned noise.
pub fn generate(profile: &SynthProfile) -> Dataset {
    let schema = AttributeSchema::heart76();
    let table6 = builtin_table6();
    let mut sampler = Sampler { rng: ChaCha8Rng::seed_from_u64(profile.seed) };

    let mut labels: Vec<u8> = Vec::new();
    for (code, count) in profile.class_counts.iter().enumerate() {
        labels.extend(std::iter::repeat_n(code as u8, *count));
    }
    use rand::seq::SliceRandom;
    labels.shuffle(&mut sampler.rng);

    let table_p = |name: &str, class: u8| -> f64 {
        table6.get(name).expect("table covers the name")[class as usize]
    };

    let mut records = Vec::with_capacity(labels.len());
    for (index, &class) in labels.iter().enumerate() {
        let c = class as f64;
        let mut values: Vec<Option<f64>> = vec![None; ATTRIBUTE_COUNT];
        let s = &mut sampler;

        put(&mut values, 1, Some((profile.id_start + index as i64) as f64));
        put(&mut values, 2, Some(0.0));
        put(&mut values, 3, Some(s.normal(49.0 + 2.2 * c, 8.5, 28.0, 77.0, 0)));
        put(&mut values, 4, Some(s.bernoulli(0.55 + 0.06 * c)));
        for (slot, name) in [(5u8, "painloc"), (6, "painexer"), (7, "relrest")] {
            let p = table_p(name, class);
            put(&mut values, slot, s.opt(0.05, |s| s.bernoulli(p)));
        }
        // pncaden is the sum of 5..7 when all three are present
        let pncaden = match (values[4], values[5], values[6]) {
            (Some(a), Some(b), Some(x)) => Some(a + b + x),
            _ => None,
        };
        put(&mut values, 8, pncaden);
        put(&mut values, 9, Some(s.anchored(&[1.0, 2.0, 3.0, 4.0], 0.75 * c, 2.2)));
        put(&mut values, 10, s.opt(0.02, |s| s.normal(124.0 + 4.0 * c, 16.0, 90.0, 210.0, 0)));
        let htn = table_p("htn", class);
        put(&mut values, 11, s.opt(0.1, |s| s.bernoulli(htn)));
        put(
            &mut values,
            12,
            s.opt(profile.chol_missing, |s| s.normal(232.0 + 7.0 * c, 45.0, 85.0, 600.0, 0)),
        );
        let smoke = s.bernoulli(table_p("smoke", class));
        put(&mut values, 13, s.opt(profile.smoking_missing, |_| smoke));
        let cigs = if smoke > 0.0 { s.normal(16.0 + 2.0 * c, 9.0, 1.0, 70.0, 0) } else { 0.0 };
        put(&mut values, 14, s.opt(profile.smoking_missing, |_| cigs));
        let years = if smoke > 0.0 { s.normal(14.0 + 1.5 * c, 9.0, 1.0, 50.0, 0) } else { 0.0 };
        put(&mut values, 15, s.opt(profile.smoking_missing, |_| years));
        let fbs = table_p("fbs", class);
        put(&mut values, 16, s.opt(0.07, |s| s.bernoulli(fbs)));
        let dm = table_p("dm", class);
        put(&mut values, 17, s.opt(0.55, |s| s.bernoulli(dm)));
        let famhist = table_p("famhist", class);
        put(&mut values, 18, s.opt(0.4, |s| s.bernoulli(famhist)));
        put(&mut values, 19, s.opt(0.01, |s| s.anchored(&[0.0, 1.0, 2.0], 0.5 * c, 1.8)));
        put(&mut values, 20, s.opt(0.02, |s| s.uniform_int(1, 12)));
        put(&mut values, 21, s.opt(0.02, |s| s.uniform_int(1, 28)));
        put(&mut values, 22, s.opt(0.02, |s| s.uniform_int(81, 87)));
        let dig = table_p("dig", class);
        put(&mut values, 23, s.opt(0.04, |s| s.bernoulli(dig)));
        put(&mut values, 24, s.opt(0.04, |s| s.bernoulli(0.2 + 0.08 * c)));
        put(&mut values, 25, s.opt(0.04, |s| s.bernoulli(0.15 + 0.1 * c)));
        put(&mut values, 26, s.opt(0.04, |s| s.bernoulli(0.12 + 0.07 * c)));
        put(&mut values, 27, s.opt(0.04, |s| s.bernoulli(0.08 + 0.07 * c)));
        put(
            &mut values,
            28,
            s.opt(0.1, |s| {
                s.weighted(
                    &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0],
                    &[10.0, 8.0, 6.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
                )
            }),
        );
        put(&mut values, 29, s.opt(0.05, |s| s.normal(11.0 - 0.8 * c, 3.0, 2.0, 25.0, 1)));
        put(&mut values, 30, s.opt(0.35, |s| s.normal(6.0 - 0.4 * c, 2.5, 0.5, 20.0, 1)));
        put(&mut values, 31, s.opt(0.08, |s| s.normal(10.0 - 0.8 * c, 3.0, 2.0, 20.0, 0)));
        put(&mut values, 32, s.opt(0.02, |s| s.normal(162.0 - 7.5 * c, 17.0, 80.0, 202.0, 0)));
        put(&mut values, 33, s.opt(0.02, |s| s.normal(72.0 + 2.5 * c, 10.0, 45.0, 120.0, 0)));
        put(&mut values, 34, s.opt(0.05, |s| s.normal(165.0 + 5.0 * c, 20.0, 110.0, 250.0, 0)));
        put(&mut values, 35, s.opt(0.05, |s| s.normal(86.0 + 2.0 * c, 10.0, 50.0, 140.0, 0)));
        // 36 dummy stays missing
        put(&mut values, 37, s.opt(0.02, |s| s.normal(82.0 + 2.5 * c, 9.0, 50.0, 130.0, 0)));
        put(&mut values, 38, s.opt(0.02, |s| s.bernoulli(0.18 + 0.14 * c)));
        put(&mut values, 39, s.opt(0.03, |s| s.bernoulli(0.05 + 0.05 * c)));
        put(&mut values, 40, s.opt(0.02, |s| s.normal(0.35 + 0.55 * c, 0.9, 0.0, 6.2, 1)));
        put(&mut values, 41, s.opt(0.15, |s| s.anchored(&[1.0, 2.0, 3.0], 0.5 * c, 1.6)));
        put(&mut values, 42, s.opt(0.45, |s| s.normal(12.0, 3.5, 5.0, 30.0, 0)));
        put(&mut values, 43, s.opt(0.3, |s| s.normal(14.0, 4.0, 5.0, 35.0, 0)));
        put(
            &mut values,
            44,
            s.opt(profile.ca_thal_missing, |s| {
                s.anchored(&[0.0, 1.0, 2.0, 3.0], (c * 0.8).min(3.0), 2.6)
            }),
        );
        // 45, 46 stay missing
        put(&mut values, 47, s.opt(0.55, |s| s.normal(0.57 - 0.03 * c, 0.09, 0.15, 0.85, 2)));
        put(&mut values, 48, s.opt(0.5, |s| s.anchored(&[0.0, 1.0, 2.0, 3.0], 0.7 * c, 2.0)));
        put(&mut values, 49, s.opt(0.6, |s| s.normal(0.6 - 0.04 * c, 0.1, 0.1, 0.9, 2)));
        put(&mut values, 50, s.opt(0.55, |s| s.anchored(&[0.0, 1.0, 2.0, 3.0], 0.7 * c, 2.0)));
        put(
            &mut values,
            51,
            s.opt(profile.ca_thal_missing, |s| {
                s.weighted(&[3.0, 6.0, 7.0], &[(8.0 - 1.6 * c).max(0.5), 1.0 + 0.8 * c, 1.0 + 1.2 * c])
            }),
        );
        // 52..=54 stay missing
        put(&mut values, 55, s.opt(0.03, |s| s.uniform_int(1, 12)));
        put(&mut values, 56, s.opt(0.03, |s| s.uniform_int(1, 28)));
        put(&mut values, 57, s.opt(0.03, |s| s.uniform_int(81, 87)));
        put(&mut values, 58, Some(c));
        for vessel in 59u8..=68 {
            let base = [0.02, 0.15, 0.3, 0.45, 0.6][class as usize];
            let p = base + 0.01 * (vessel - 59) as f64;
            put(&mut values, vessel, s.opt(profile.vessel_missing, |s| s.bernoulli(p)));
        }
        // 69..=75 stay missing; 76 is the name terminator

        let patient_id = profile.id_start + index as i64;
        records.push(
            PatientRecord::new(patient_id, values, profile.name.to_string())
                .expect("76 cells by construction"),
        );
    }
    Dataset::new(profile.name, schema, records)
}
