//! Storage quantization: narrowing fp32 features to 16- or 8-bit floats,
//! exact fp32 dual split into two 16-bit halves, and lossless rehashing of
//! wide integer ids into dense small codes.
//!
//! All float narrowing rounds to nearest, ties to even. NaN stays NaN,
//! infinities map to the target's infinity (or its largest finite value for
//! E4M3, which has no infinity), and finite overflow follows the same rule.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column storage representation for quantized features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantSpec {
    Fp16,
    Bf16,
    #[serde(alias = "fp8")]
    Fp8E4m3,
    Fp8E5m2,
    IntRehash,
    #[serde(rename = "dual_split_16", alias = "dual")]
    DualSplit16,
}

impl QuantSpec {
    /// Narrow float format, when this representation stores floats in one.
    pub fn float_format(self) -> Option<FloatFormat> {
        match self {
            QuantSpec::Fp16 => Some(FloatFormat::FP16),
            QuantSpec::Bf16 => Some(FloatFormat::BF16),
            QuantSpec::Fp8E4m3 => Some(FloatFormat::FP8_E4M3),
            QuantSpec::Fp8E5m2 => Some(FloatFormat::FP8_E5M2),
            _ => None,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            QuantSpec::Fp16 => 1,
            QuantSpec::Bf16 => 2,
            QuantSpec::Fp8E4m3 => 3,
            QuantSpec::Fp8E5m2 => 4,
            QuantSpec::IntRehash => 5,
            QuantSpec::DualSplit16 => 6,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            1 => QuantSpec::Fp16,
            2 => QuantSpec::Bf16,
            3 => QuantSpec::Fp8E4m3,
            4 => QuantSpec::Fp8E5m2,
            5 => QuantSpec::IntRehash,
            6 => QuantSpec::DualSplit16,
            _ => return None,
        })
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "fp16" | "f16" => QuantSpec::Fp16,
            "bf16" => QuantSpec::Bf16,
            "fp8" | "fp8_e4m3" | "e4m3" => QuantSpec::Fp8E4m3,
            "fp8_e5m2" | "e5m2" => QuantSpec::Fp8E5m2,
            "int_rehash" | "rehash" => QuantSpec::IntRehash,
            "dual_split_16" | "dual" => QuantSpec::DualSplit16,
            _ => return None,
        })
    }
}

/// Binary floating-point layout with a sign bit, `exp_bits` exponent bits
/// and `man_bits` stored mantissa bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FloatFormat {
    pub exp_bits: u32,
    pub man_bits: u32,
    pub bias: i32,
    /// IEEE-style specials (all-ones exponent = Inf/NaN). When false, only the
    /// all-ones pattern is NaN and there is no infinity (E4M3 "FN").
    pub ieee_specials: bool,
}

impl FloatFormat {
    pub const FP16: FloatFormat = FloatFormat { exp_bits: 5, man_bits: 10, bias: 15, ieee_specials: true };
    pub const BF16: FloatFormat = FloatFormat { exp_bits: 8, man_bits: 7, bias: 127, ieee_specials: true };
    pub const FP8_E4M3: FloatFormat = FloatFormat { exp_bits: 4, man_bits: 3, bias: 7, ieee_specials: false };
    pub const FP8_E5M2: FloatFormat = FloatFormat { exp_bits: 5, man_bits: 2, bias: 15, ieee_specials: true };

    pub fn total_bits(self) -> u32 {
        1 + self.exp_bits + self.man_bits
    }

    pub fn bytes(self) -> usize {
        (self.total_bits() / 8) as usize
    }

    fn exp_all_ones(self) -> u32 {
        (1 << self.exp_bits) - 1
    }

    fn sign_bit(self) -> u32 {
        1 << (self.exp_bits + self.man_bits)
    }

    /// Largest finite magnitude encoding.
    pub fn max_finite(self) -> u32 {
        if self.ieee_specials {
            (self.exp_all_ones() << self.man_bits) - 1
        } else {
            (self.exp_all_ones() << self.man_bits) | ((1 << self.man_bits) - 2)
        }
    }

    fn infinity(self) -> u32 {
        self.exp_all_ones() << self.man_bits
    }

    fn quiet_nan(self) -> u32 {
        if self.ieee_specials {
            self.infinity() | 1 << (self.man_bits - 1)
        } else {
            (self.exp_all_ones() << self.man_bits) | ((1 << self.man_bits) - 1)
        }
    }
}

/// Drops `shift` low bits of `v`, rounding to nearest with ties to even.
fn shift_round_even(v: u64, shift: u32) -> u64 {
    if shift == 0 {
        return v;
    }
    if shift > 62 {
        return 0;
    }
    let q = v >> shift;
    let rem = v & ((1 << shift) - 1);
    let half = 1 << (shift - 1);
    if rem > half || (rem == half && q & 1 == 1) {
        q + 1
    } else {
        q
    }
}

/// Rounds an fp32 value into `fmt`, returning the encoding in the low bits.
pub fn narrow(x: f32, fmt: FloatFormat) -> u32 {
    let bits = x.to_bits();
    let sign = if bits >> 31 == 1 { fmt.sign_bit() } else { 0 };
    if x.is_nan() {
        if !fmt.ieee_specials {
            return sign | fmt.quiet_nan();
        }
        let payload = (bits & 0x007F_FFFF) >> (23 - fmt.man_bits);
        return sign | fmt.quiet_nan() | payload;
    }
    if x.is_infinite() {
        return sign | if fmt.ieee_specials { fmt.infinity() } else { fmt.max_finite() };
    }
    let abs = bits & 0x7FFF_FFFF;
    if abs == 0 {
        return sign;
    }
    // |x| = mant * 2^exp with mant an integer.
    let field = (abs >> 23) as i32;
    let (mant, exp) = if field == 0 {
        ((abs & 0x007F_FFFF) as u64, -149)
    } else {
        (((abs & 0x007F_FFFF) | 0x0080_0000) as u64, field - 150)
    };
    let e = exp + 63 - mant.leading_zeros() as i32;
    let emin = 1 - fmt.bias;
    let quantum = e.max(emin) - fmt.man_bits as i32;
    let q = if quantum <= exp { mant << (exp - quantum) } else { shift_round_even(mant, (quantum - exp) as u32) };
    // A carry out of the mantissa lands in the exponent field on its own.
    let enc = if e < emin { q } else { (((e + fmt.bias - 1) as u64) << fmt.man_bits) + q };
    let max = fmt.max_finite() as u64;
    let enc = if enc > max {
        if fmt.ieee_specials {
            fmt.infinity()
        } else {
            fmt.max_finite()
        }
    } else {
        enc as u32
    };
    sign | enc
}

/// Exact widening back to fp32.
pub fn widen(enc: u32, fmt: FloatFormat) -> f32 {
    let man_mask = (1u32 << fmt.man_bits) - 1;
    let negative = enc & fmt.sign_bit() != 0;
    let field = (enc >> fmt.man_bits) & fmt.exp_all_ones();
    let man = enc & man_mask;
    let sign = if negative { 0x8000_0000 } else { 0 };
    if field == fmt.exp_all_ones() {
        if fmt.ieee_specials {
            let payload = man << (23 - fmt.man_bits);
            return f32::from_bits(sign | 0x7F80_0000 | payload);
        }
        if man == man_mask {
            return f32::from_bits(sign | 0x7FC0_0000);
        }
    }
    let magnitude = if field == 0 {
        man as f64 * 2f64.powi(1 - fmt.bias - fmt.man_bits as i32)
    } else {
        ((1u64 << fmt.man_bits) + man as u64) as f64 * 2f64.powi(field as i32 - fmt.bias - fmt.man_bits as i32)
    };
    let v = magnitude as f32;
    if negative {
        -v
    } else {
        v
    }
}

pub fn f32_to_f16(x: f32) -> u16 {
    narrow(x, FloatFormat::FP16) as u16
}

pub fn f16_to_f32(h: u16) -> f32 {
    widen(h as u32, FloatFormat::FP16)
}

pub fn f32_to_bf16(x: f32) -> u16 {
    narrow(x, FloatFormat::BF16) as u16
}

pub fn bf16_to_f32(h: u16) -> f32 {
    f32::from_bits((h as u32) << 16)
}

pub fn f32_to_fp8(x: f32, fmt: FloatFormat) -> u8 {
    narrow(x, fmt) as u8
}

fn require_float(spec: QuantSpec) -> Result<FloatFormat> {
    spec.float_format().ok_or_else(|| Error::InvalidConfig(format!("{spec:?} is not a float quantization target")))
}

/// Narrowed little-endian payload: 2 bytes per value for 16-bit targets, 1
/// for fp8.
pub fn quantize_floats(values: &[f32], spec: QuantSpec) -> Result<Vec<u8>> {
    let fmt = require_float(spec)?;
    let mut out = Vec::with_capacity(values.len() * fmt.bytes());
    for v in values {
        let enc = narrow(*v, fmt);
        out.extend_from_slice(&enc.to_le_bytes()[..fmt.bytes()]);
    }
    Ok(out)
}

pub fn dequantize_floats(payload: &[u8], spec: QuantSpec) -> Result<Vec<f32>> {
    let fmt = require_float(spec)?;
    let width = fmt.bytes();
    if payload.len() % width != 0 {
        return Err(Error::LengthMismatch(format!("{} payload bytes is not a multiple of {width}", payload.len())));
    }
    Ok(payload
        .chunks_exact(width)
        .map(|c| {
            let mut b = [0u8; 4];
            b[..width].copy_from_slice(c);
            widen(u32::from_le_bytes(b), fmt)
        })
        .collect())
}

/// Splits each fp32 bit pattern into its top 16 bits (a usable bf16 on its
/// own) and bottom 16 bits.
pub fn split_dual(values: &[f32]) -> (Vec<u16>, Vec<u16>) {
    values
        .iter()
        .map(|v| {
            let b = v.to_bits();
            ((b >> 16) as u16, b as u16)
        })
        .unzip()
}

pub fn join_dual(hi: &[u16], lo: &[u16]) -> Result<Vec<f32>> {
    if hi.len() != lo.len() {
        return Err(Error::LengthMismatch(format!("dual halves have {} and {} values", hi.len(), lo.len())));
    }
    Ok(hi.iter().zip(lo).map(|(h, l)| f32::from_bits((*h as u32) << 16 | *l as u32)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeWidth {
    W8,
    W16,
    W32,
}

impl CodeWidth {
    pub fn bits(self) -> u32 {
        match self {
            CodeWidth::W8 => 8,
            CodeWidth::W16 => 16,
            CodeWidth::W32 => 32,
        }
    }

    /// Narrowest width that can index `distinct` codes.
    pub fn for_distinct(distinct: u64) -> Result<Self> {
        match distinct {
            0..=0x100 => Ok(CodeWidth::W8),
            0x101..=0x1_0000 => Ok(CodeWidth::W16),
            d if d < 1 << 32 => Ok(CodeWidth::W32),
            _ => Err(Error::DistinctOverflow),
        }
    }
}

/// Original values in code order: code `i` maps back to `values[i]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RehashTable {
    pub values: Vec<i64>,
}

impl RehashTable {
    pub fn invert(&self, codes: &[u32]) -> Result<Vec<i64>> {
        codes
            .iter()
            .map(|c| {
                self.values
                    .get(*c as usize)
                    .copied()
                    .ok_or_else(|| Error::corrupt(format!("rehash code {c} outside table")))
            })
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() % 8 != 0 {
            return Err(Error::corrupt("rehash table length not a multiple of 8"));
        }
        Ok(RehashTable { values: bytes.chunks_exact(8).map(|c| i64::from_le_bytes(c.try_into().unwrap())).collect() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rehashed {
    pub codes: Vec<u32>,
    pub width: CodeWidth,
    pub table: RehashTable,
}

/// Dense codes by first occurrence, plus the table that inverts them.
pub fn rehash_ints(values: &[i64]) -> Result<Rehashed> {
    let mut index: HashMap<i64, u32> = HashMap::new();
    let mut table = Vec::new();
    let mut codes = Vec::with_capacity(values.len());
    for &v in values {
        let code = match index.get(&v) {
            Some(c) => *c,
            None => {
                if table.len() as u64 >= u32::MAX as u64 {
                    return Err(Error::DistinctOverflow);
                }
                let c = table.len() as u32;
                index.insert(v, c);
                table.push(v);
                c
            }
        };
        codes.push(code);
    }
    Ok(Rehashed { width: CodeWidth::for_distinct(table.len() as u64)?, codes, table: RehashTable { values: table } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fp16_known_values() {
        assert_eq!(f32_to_f16(1.0), 0x3C00);
        assert_eq!(f32_to_f16(0.1), 0x2E66);
        assert_eq!(f16_to_f32(0x3C00), 1.0);
        assert_eq!(f16_to_f32(0x2E66), 0.099975586);
        assert_eq!(f32_to_f16(65504.0), 0x7BFF);
        assert_eq!(f32_to_f16(65520.0), 0x7C00, "tie above max rounds to inf");
        assert_eq!(f32_to_f16(65519.0), 0x7BFF);
        assert_eq!(f32_to_f16(-0.0), 0x8000);
        assert_eq!(f32_to_f16(f32::INFINITY), 0x7C00);
        assert_eq!(f32_to_f16(f32::NEG_INFINITY), 0xFC00);
        assert!(f16_to_f32(f32_to_f16(f32::NAN)).is_nan());
        // smallest subnormal and half of it (tie to even -> 0)
        assert_eq!(f32_to_f16(2f32.powi(-24)), 0x0001);
        assert_eq!(f32_to_f16(2f32.powi(-25)), 0x0000);
        assert_eq!(f32_to_f16(3.0 * 2f32.powi(-25)), 0x0002);
    }

    #[test]
    fn fp8_saturation_rules() {
        let e4 = FloatFormat::FP8_E4M3;
        let e5 = FloatFormat::FP8_E5M2;
        assert_eq!(widen(e4.max_finite(), e4), 448.0);
        assert_eq!(widen(e5.max_finite(), e5), 57344.0);
        assert_eq!(f32_to_fp8(1e9, e4), 0x7E);
        assert_eq!(f32_to_fp8(-1e9, e4), 0xFE);
        assert_eq!(f32_to_fp8(f32::INFINITY, e4), 0x7E);
        assert_eq!(f32_to_fp8(1e9, e5), 0x7C);
        assert_eq!(f32_to_fp8(f32::NAN, e4), 0x7F);
        assert!(widen(0x7F, e4).is_nan());
        assert_eq!(f32_to_fp8(1.0, e4), 0x38);
    }

    #[test]
    fn payload_sizes() {
        let v = vec![0.5f32; 10];
        assert_eq!(quantize_floats(&v, QuantSpec::Fp16).unwrap().len(), 20);
        assert_eq!(quantize_floats(&v, QuantSpec::Bf16).unwrap().len(), 20);
        assert_eq!(quantize_floats(&v, QuantSpec::Fp8E4m3).unwrap().len(), 10);
        assert!(quantize_floats(&v, QuantSpec::IntRehash).is_err());
        let p = quantize_floats(&[1.0, -2.5], QuantSpec::Fp16).unwrap();
        assert_eq!(dequantize_floats(&p, QuantSpec::Fp16).unwrap(), vec![1.0, -2.5]);
    }

    #[test]
    fn dual_split_examples() {
        let (hi, lo) = split_dual(&[0.3, 0.0]);
        assert_eq!(0.3f32.to_bits(), 0x3E99_999A);
        assert_eq!(hi, vec![0x3E99, 0]);
        assert_eq!(lo, vec![0x999A, 0]);
        assert_eq!(join_dual(&hi, &lo).unwrap()[0].to_bits(), 0x3E99_999A);
        assert!(join_dual(&[1], &[]).is_err());
        let bf = join_dual(&hi, &[0, 0]).unwrap();
        assert_eq!(bf[0], bf16_to_f32(0x3E99));
    }

    #[test]
    fn rehash_examples() {
        let r = rehash_ints(&[1_000_000_000_000, 5, 1_000_000_000_000]).unwrap();
        assert_eq!(r.codes, vec![0, 1, 0]);
        assert_eq!(r.table.values, vec![1_000_000_000_000, 5]);
        assert_eq!(r.width, CodeWidth::W8);
        let distinct: Vec<i64> = (0..300).map(|i| i * 7919).collect();
        let r = rehash_ints(&distinct).unwrap();
        assert_eq!(r.width, CodeWidth::W16);
        assert_eq!(r.table.invert(&r.codes).unwrap(), distinct);
        assert_eq!(CodeWidth::for_distinct(256).unwrap(), CodeWidth::W8);
        assert_eq!(CodeWidth::for_distinct(257).unwrap(), CodeWidth::W16);
        assert!(CodeWidth::for_distinct(1 << 32).is_err());
    }
}
