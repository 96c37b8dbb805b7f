//! Oracles and fixtures shared by the integration suites.
#![allow(dead_code)]

use half::f16;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bullion::quantization::FloatFormat;

pub const SAMPLES: usize = 1_000_000;

pub fn specials() -> Vec<f32> {
    let mut v = vec![
        0.0,
        -0.0,
        f32::INFINITY,
        f32::NEG_INFINITY,
        f32::NAN,
        -f32::NAN,
        f32::from_bits(0x7F80_0001),
        f32::from_bits(0xFFBF_FFFF),
        f32::from_bits(0x7FC1_2345),
        f32::MIN_POSITIVE,
        f32::from_bits(1),
        f32::from_bits(0x8000_0001),
        f32::from_bits(0x007F_FFFF),
        f32::MAX,
        f32::MIN,
        65504.0,
        65520.0,
        65519.99,
        448.0,
        464.0,
        480.0,
        57344.0,
        61440.0,
        6.0e-8,
        2.0f32.powi(-24),
        2.0f32.powi(-25),
        2.0f32.powi(-133),
    ];
    v.extend(v.clone().iter().map(|x| -x));
    v
}

/// Random values that stress every exponent range: raw bit patterns,
/// values near each format's range, and exact midpoints between adjacent
/// fp16 and bf16 values.
pub fn samples(seed: u64) -> Vec<f32> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut v = specials();
    while v.len() < SAMPLES {
        let x = match r.random_range(0..5) {
            0 => f32::from_bits(r.random()),
            1 => {
                let mag = 2f32.powf(r.random_range(-30.0f32..20.0));
                if r.random() {
                    mag
                } else {
                    -mag
                }
            }
            2 => {
                let a = f16::from_bits(r.random_range(0..0x7C00u16)).to_f64();
                let b = f16::from_bits(f16::from_f64(a).to_bits() + 1).to_f64();
                ((a + b) / 2.0) as f32
            }
            3 => {
                let a = r.random_range(0..0x7F80u16);
                let mid = f32::from_bits(((a as u32) << 16) | 0x8000);
                if r.random() {
                    mid
                } else {
                    -mid
                }
            }
            _ => f32::from_bits(r.random_range(0x3000_0000..0x4800_0000u32)),
        };
        v.push(x);
    }
    v
}

/// Value of an fp8 code computed from its fields in f64 (None for NaN and
/// infinities).
pub fn fp8_value(code: u8, exp_bits: u32, man_bits: u32, bias: i32, ieee: bool) -> Option<f64> {
    let exp = ((code >> man_bits) as u32) & ((1 << exp_bits) - 1);
    let man = (code as u32) & ((1 << man_bits) - 1);
    let top = (1 << exp_bits) - 1;
    if exp == top && (ieee || man == (1 << man_bits) - 1) {
        return None;
    }
    let mag = if exp == 0 {
        man as f64 / (1u32 << man_bits) as f64 * 2f64.powi(1 - bias)
    } else {
        (1.0 + man as f64 / (1u32 << man_bits) as f64) * 2f64.powi(exp as i32 - bias)
    };
    Some(if code & 0x80 != 0 { -mag } else { mag })
}

pub struct Fp8Oracle {
    pub fmt: FloatFormat,
    /// Non-negative finite values by code, ascending.
    pub table: Vec<(f64, u8)>,
    /// One step past the largest finite value; rounding onto it overflows.
    pub beyond: f64,
}

impl Fp8Oracle {
    pub fn new(fmt: FloatFormat) -> Self {
        let mut table: Vec<(f64, u8)> = (0u8..0x80)
            .filter_map(|c| fp8_value(c, fmt.exp_bits, fmt.man_bits, fmt.bias, fmt.ieee_specials).map(|v| (v, c)))
            .collect();
        table.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (max, _) = *table.last().unwrap();
        let (prev, _) = table[table.len() - 2];
        Fp8Oracle { fmt, table, beyond: max + (max - prev) }
    }

    pub fn convert(&self, x: f32) -> u8 {
        let sign = if x.is_sign_negative() { 0x80u8 } else { 0 };
        let max_code = self.table.last().unwrap().1;
        if x.is_nan() {
            return sign | if self.fmt.ieee_specials { 0x7E } else { 0x7F };
        }
        if x.is_infinite() {
            return sign | if self.fmt.ieee_specials { 0x7C } else { max_code };
        }
        let a = (x as f64).abs();
        let overflow = if self.fmt.ieee_specials { 0x7C } else { max_code };
        if a >= self.beyond {
            return sign | overflow;
        }
        // Candidates: every finite value plus the virtual overflow step,
        // whose code is even (its mantissa field is zero).
        let mut best = (f64::INFINITY, 0u8, false);
        let cands = self.table.iter().map(|&(v, c)| (v, c, false)).chain(std::iter::once((self.beyond, 0u8, true)));
        for (v, c, over) in cands {
            let d = (v - a).abs();
            let even = |code: u8, over: bool| over || code & 1 == 0;
            if d < best.0 || (d == best.0 && even(c, over) && !even(best.1, best.2)) {
                best = (d, c, over);
            }
        }
        let code = if best.2 { overflow } else { best.1 };
        sign | code
    }
}

/// Base vector of the three-vector click-sequence example. Only its first and
/// last five ids are known; the six middle slots hold distinct placeholders.
pub fn base() -> Vec<i64> {
    vec![92, 82, 66, 18, 67, 1001, 1002, 1003, 1004, 1005, 1006, 85, 59, 30, 47, 55]
}

pub fn example_vectors() -> Vec<Vec<i64>> {
    let b = base();
    let second: Vec<i64> = std::iter::once(76).chain(b[..15].iter().copied()).collect();
    vec![b, second.clone(), second]
}

/// Each vector drops up to `max_shift` old ids from one end and takes as
/// many new ids at the other, like a click history moving forward in time.
pub fn sliding_sequences(n: usize, len: usize, max_shift: usize, seed: u64) -> Vec<Vec<i64>> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut cur: Vec<i64> = (0..len).map(|_| r.random_range(0..10_000_000)).collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(cur.clone());
        let s = r.random_range(0..=max_shift);
        let fresh: Vec<i64> = (0..s).map(|_| r.random_range(0..10_000_000)).collect();
        if r.random_bool(0.8) {
            cur.truncate(len - s);
            cur.splice(0..0, fresh);
        } else {
            cur.drain(..s);
            cur.extend(fresh);
        }
    }
    out
}
