//! Float narrowing, exact dual split, and integer rehashing.

use bullion::quantization::{
    dequantize_floats, f32_to_fp8, join_dual, quantize_floats, rehash_ints, split_dual, widen, FloatFormat, QuantSpec,
};

fn main() -> bullion::Result<()> {
    let embedding = [0.1f32, -1.75, 2.71828, 1e-6, 70000.0, f32::NAN];
    for spec in [QuantSpec::Fp16, QuantSpec::Bf16, QuantSpec::Fp8E4m3, QuantSpec::Fp8E5m2] {
        let payload = quantize_floats(&embedding, spec)?;
        let back = dequantize_floats(&payload, spec)?;
        println!("{spec:?}: {} bytes -> {back:?}", payload.len());
    }

    // E4M3 has no infinity and saturates at 448.
    let e4m3 = FloatFormat::FP8_E4M3;
    println!("e4m3(1e6) = {:#04x} = {}", f32_to_fp8(1e6, e4m3), widen(f32_to_fp8(1e6, e4m3) as u32, e4m3));

    let (hi, lo) = split_dual(&embedding);
    let joined = join_dual(&hi, &lo)?;
    assert!(embedding.iter().zip(&joined).all(|(a, b)| a.to_bits() == b.to_bits()));
    println!("dual split: hi {hi:04x?}, bit-exact after join");

    let ids = [9_007_199_254_740_993i64, -4, 9_007_199_254_740_993, 12, -4];
    let r = rehash_ints(&ids)?;
    assert_eq!(r.table.invert(&r.codes)?, ids);
    println!("rehash: codes {:?} ({:?}), table {:?}", r.codes, r.width, r.table.values);
    Ok(())
}
