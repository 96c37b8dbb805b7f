//! Acceptance gate: runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each. Exits nonzero if any criterion fails.

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use bullion::bench::{bench_delete, bench_footer, DeleteBenchParams, DeletePattern};
use bullion::compliance::{
    compute_checksum_tree, decode_with_masks, delete_rows, mask_rle, update_checksums_incremental, ComplianceLevel,
};
use bullion::encoding::{decode, encode_as, rle, EncodedBlock, EncodingConfig, SchemeId, SchemeSet, ValueType, Values};
use bullion::format::page::{page_body, PageBody, PageKind};
use bullion::format::{
    hash_bytes, read_footer, recompute_tree, write_file, write_to_path, BullionReader, ColumnData, ColumnSchema,
    LogicalType, MaybeMasked, ProjectedColumn, ReadOptions, RecordBatch, Schema, WriteOptions,
};
use bullion::layout::{ColumnOrderSpec, RowOrderSpec};
use bullion::quantization::{
    f32_to_bf16, f32_to_f16, f32_to_fp8, join_dual, quantize_floats, split_dual, FloatFormat, QuantSpec,
};
use bullion::sparse_delta::{
    decode_sequence_column, encode_sequence_column, SparseDeltaBlock, SparseDeltaEntry, Window, DEFAULT_MIN_OVERLAP,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("rle deletion walkthrough", c1_rle_walkthrough),
        ("deletion i/o reduction", c2_deletion_io),
        ("physical erasure", c3_physical_erasure),
        ("incremental checksum equals batch", c4_incremental_checksum),
        ("footer flatness", c5_footer_flatness),
        ("sparse delta fidelity and ratio", c6_sparse_delta),
        ("codec round trip", c7_codec_roundtrip),
        ("quantization", c8_quantization),
        ("layout transparency", c9_layout),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn c1_rle_walkthrough() -> Outcome {
    let input = Values::UInt64(vec![2, 2, 2, 6, 6, 6, 6, 6, 3]);
    let block = encode_as(&input, SchemeId::Rle, &EncodingConfig::default()).map_err(|e| e.to_string())?;
    let (masked, bits) = mask_rle(&block, ValueType::UInt64, &[5]).map_err(|e| e.to_string())?;
    let runs = rle::decode_runs::<u64>(&masked).map_err(|e| e.to_string())?;
    ensure!(runs == (vec![2, 6, 3], vec![3, 4, 1]), "runs {runs:?}");
    let bits_text: String = bits.iter().map(|b| if *b { '1' } else { '0' }).collect();
    ensure!(bits_text == "000001000", "deletion bits {bits_text}");
    let decoded = decode_with_masks::<u64>(&masked, &bits).map_err(|e| e.to_string())?;
    let text: Vec<String> = decoded
        .iter()
        .map(|m| match m {
            MaybeMasked::Value(v) => v.to_string(),
            MaybeMasked::Mask => "MASK".into(),
            MaybeMasked::Null => "NULL".into(),
        })
        .collect();
    let text = text.join(",");
    ensure!(text == "2,2,2,6,6,MASK,6,6,3", "decoded {text}");
    Ok(format!("runs (2,3)(6,4)(3,1), bits {bits_text}, decoded {text}"))
}

fn c2_deletion_io() -> Outcome {
    let t = Instant::now();
    let p = DeleteBenchParams {
        pages_per_column: 100,
        fraction: 0.02,
        level: ComplianceLevel::PhysicalMask,
        ..Default::default()
    };
    let report = bench_delete(&p, &[DeletePattern::Clustered]).map_err(|e| e.to_string())?;
    let get = |m: &str| report.get("clustered:0.02", m).unwrap_or(f64::NAN);
    let ratio = get("rewrite_ratio");
    let pages = get("pages_rewritten");
    let elapsed = t.elapsed();
    ensure!(pages == 2.0 * p.columns as f64, "{pages} pages rewritten, expected 2 per column");
    ensure!(ratio <= 0.04, "bytes_rewritten/file_bytes = {ratio:.4} > 0.04");
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("ratio {ratio:.4} ({:.1}x less than a full rewrite), {pages} pages", 1.0 / ratio))
}

#[derive(Clone, Copy, Debug)]
enum Erasure {
    Bitpack,
    Varint,
    Dictionary,
    ForDelta,
}

fn erasure_case(kind: Erasure, seed: u64) -> Result<(), String> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let n = r.random_range(64..256usize);
    let rpp = r.random_range(16..64usize);
    let alphabet: Vec<i64> = (0..5).map(|_| r.random::<i64>() >> 8).collect();
    let base: i64 = r.random_range(-1_000_000_000..1_000_000_000);
    let values: Vec<i64> = (0..n)
        .map(|_| match kind {
            Erasure::Bitpack | Erasure::Varint => r.random_range(-5000..5000),
            Erasure::Dictionary => alphabet[r.random_range(0..alphabet.len())],
            Erasure::ForDelta => base + r.random_range(0..1000),
        })
        .collect();
    let schemes: &[SchemeId] = match kind {
        Erasure::Bitpack => &[SchemeId::ZigZag, SchemeId::FixedBitWidth],
        Erasure::Varint => &[SchemeId::ZigZag, SchemeId::Varint],
        Erasure::Dictionary => &[SchemeId::Dictionary, SchemeId::FixedBitWidth],
        Erasure::ForDelta => &[SchemeId::ForDelta],
    };
    let schema = Schema::new(vec![ColumnSchema::new("v", LogicalType::Int64).with_compliance(2)]);
    let opts = WriteOptions {
        rows_per_page: rpp,
        pages_per_group: 2,
        encoding_config: EncodingConfig { candidate_set: SchemeSet::of(schemes), ..EncodingConfig::default() },
        ..WriteOptions::default()
    };
    let batch = RecordBatch::new(vec![ColumnData::Int64(values.iter().map(|v| Some(*v)).collect())]).unwrap();
    let (mut file, _) = write_file(&schema, &[batch], &opts).map_err(|e| e.to_string())?;
    let k = r.random_range(1..=n / 4);
    let deleted: BTreeSet<u64> = (0..k).map(|_| r.random_range(0..n as u64)).collect();
    delete_rows(&mut file, &deleted.iter().copied().collect::<Vec<_>>(), ComplianceLevel::PhysicalMask)
        .map_err(|e| e.to_string())?;

    let survivors: HashSet<i64> =
        values.iter().enumerate().filter(|(i, _)| !deleted.contains(&(*i as u64))).map(|(_, v)| *v).collect();
    let f = read_footer(&file).map_err(|e| e.to_string())?;
    for p in 0..f.num_pages() {
        let page = &file[f.page_offsets().get(p) as usize..f.page_end(p) as usize];
        let body = PageBody::parse(page_body(page).map_err(|e| e.to_string())?, PageKind::Scalar(ValueType::Int64))
            .map_err(|e| e.to_string())?;
        let PageBody::Scalar(block) = body else { return Err("scalar page expected".into()) };
        let first_row = (p * rpp) as u64;
        let local: Vec<usize> = deleted
            .iter()
            .filter(|d| **d >= first_row && **d < first_row + block.len() as u64)
            .map(|d| (d - first_row) as usize)
            .collect();
        if f.page_mask(p).is_some() {
            return Err(format!("{kind:?}: page {p} was compacted instead of masked in place"));
        }
        check_erased(kind, &block, &local, &survivors).map_err(|e| format!("{kind:?} seed {seed} page {p}: {e}"))?;
    }
    // Survivors read back intact.
    let reader = BullionReader::open(&file[..]).map_err(|e| e.to_string())?;
    let got = reader.project(&["v"], &ReadOptions::default()).map_err(|e| e.to_string())?;
    let want: Vec<Option<i64>> =
        values.iter().enumerate().filter(|(i, _)| !deleted.contains(&(*i as u64))).map(|(_, v)| Some(*v)).collect();
    ensure!(got[0].data == ColumnData::Int64(want), "{kind:?} seed {seed}: survivors changed");
    Ok(())
}

fn check_erased(kind: Erasure, block: &EncodedBlock, local: &[usize], survivors: &HashSet<i64>) -> Result<(), String> {
    let expect = |s: SchemeId| if block.scheme == s { Ok(()) } else { Err(format!("top scheme {:?}", block.scheme)) };
    let ints = |b: &EncodedBlock, ty| decode(b, ty).map_err(|e| e.to_string());
    // Trivial is always a candidate; the cascade falls back to it when the forced scheme does not pay off.
    if block.scheme == SchemeId::Trivial {
        let Values::Int64(raw) = ints(block, ValueType::Int64)? else { unreachable!() };
        for &o in local {
            ensure!(raw[o] == 0, "slot {o} holds {}", raw[o]);
        }
        return Ok(());
    }
    match kind {
        Erasure::Bitpack | Erasure::Varint => {
            expect(SchemeId::ZigZag)?;
            let child = &block.children[0];
            let want = if matches!(kind, Erasure::Bitpack) { SchemeId::FixedBitWidth } else { SchemeId::Varint };
            ensure!(child.scheme == want, "child scheme {:?}", child.scheme);
            let Values::UInt64(raw) = ints(child, ValueType::UInt64)? else { unreachable!() };
            for &o in local {
                ensure!(raw[o] == 0, "slot {o} holds {}", raw[o]);
            }
        }
        Erasure::ForDelta => {
            expect(SchemeId::ForDelta)?;
            let base = i64::from_le_bytes(block.payload[..8].try_into().unwrap());
            let Values::Int64(raw) = ints(block, ValueType::Int64)? else { unreachable!() };
            for &o in local {
                ensure!(raw[o] == base, "slot {o} holds {} (base {base})", raw[o]);
            }
        }
        Erasure::Dictionary => {
            expect(SchemeId::Dictionary)?;
            let Values::UInt64(codes) = ints(&block.children[1], ValueType::UInt64)? else { unreachable!() };
            for &o in local {
                ensure!(codes[o] == 0, "code slot {o} holds {}", codes[o]);
            }
            let Values::Int64(entries) = ints(&block.children[0], ValueType::Int64)? else { unreachable!() };
            let referenced: HashSet<u64> = codes.iter().copied().filter(|c| *c != 0).collect();
            for (i, e) in entries.iter().enumerate() {
                let live = referenced.contains(&(i as u64 + 1));
                ensure!(live || *e == 0, "unreferenced entry {i} still holds {e}");
                ensure!(!live || survivors.contains(e), "entry {i} = {e} referenced but not a survivor");
            }
        }
    }
    Ok(())
}

fn c3_physical_erasure() -> Outcome {
    let kinds = [Erasure::Bitpack, Erasure::Varint, Erasure::Dictionary, Erasure::ForDelta];
    for case in 0..1000u64 {
        erasure_case(kinds[case as usize % 4], case)?;
    }
    Ok("1000 randomized cases: masked slots decode to 0 / mask code / base".into())
}

fn c4_incremental_checksum() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(44);
    let mut updates = 0;
    for pair in 0..200 {
        let groups = r.random_range(1..6);
        let ppg: Vec<u32> = (0..groups).map(|_| r.random_range(1..8)).collect();
        let total: u32 = ppg.iter().sum();
        let mut pages: Vec<Vec<u8>> =
            (0..total).map(|_| (0..r.random_range(0..64)).map(|_| r.random()).collect()).collect();
        let mut tree = compute_checksum_tree(&pages, &ppg).map_err(|e| e.to_string())?;
        for _ in 0..r.random_range(1..10) {
            let p = r.random_range(0..total as usize);
            let len = pages[p].len();
            if len > 0 && r.random_bool(0.7) {
                let i = r.random_range(0..len);
                pages[p][i] ^= 1 << r.random_range(0..8);
            } else {
                pages[p] = (0..r.random_range(0..64)).map(|_| r.random()).collect();
            }
            tree = update_checksums_incremental(&tree, p, &pages[p]).map_err(|e| e.to_string())?;
            let batch = compute_checksum_tree(&pages, &ppg).map_err(|e| e.to_string())?;
            ensure!(tree == batch, "pair {pair}: incremental tree differs after updating page {p}");
            updates += 1;
        }
    }
    // The same property through real deletions on files.
    for seed in 0..20u64 {
        let mut file = erasure_fixture(seed)?;
        let n = read_footer(&file).map_err(|e| e.to_string())?.num_rows();
        let mut rr = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..3 {
            let rows: Vec<u64> = (0..rr.random_range(1..8)).map(|_| rr.random_range(0..n)).collect();
            delete_rows(&mut file, &rows, ComplianceLevel::PhysicalMask).map_err(|e| e.to_string())?;
            let stored = read_footer(&file).map_err(|e| e.to_string())?.checksums().to_vec();
            let fresh = recompute_tree(&file).map_err(|e| e.to_string())?.to_words();
            ensure!(stored == fresh, "file {seed}: stored tree differs from recomputation");
        }
    }
    Ok(format!("200 update sequences ({updates} updates) plus 20 files x 3 deletions, bit-exact"))
}

fn erasure_fixture(seed: u64) -> Result<Vec<u8>, String> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let n = 300;
    let schema = Schema::new(vec![
        ColumnSchema::new("a", LogicalType::Int64).with_compliance(2),
        ColumnSchema::new("b", LogicalType::Float32).with_compliance(2),
        ColumnSchema::new("c", LogicalType::Utf8),
    ]);
    let batch = RecordBatch::new(vec![
        ColumnData::Int64((0..n).map(|_| Some(r.random_range(0..50))).collect()),
        ColumnData::Float32((0..n).map(|_| Some(r.random())).collect()),
        ColumnData::Utf8((0..n).map(|i| Some(format!("s{}", i % 7))).collect()),
    ])
    .unwrap();
    let opts = WriteOptions { rows_per_page: 32, pages_per_group: 3, ..WriteOptions::default() };
    Ok(write_file(&schema, &[batch], &opts).map_err(|e| e.to_string())?.0)
}

fn c5_footer_flatness() -> Outcome {
    let t = Instant::now();
    let report = bench_footer(&[100, 20_000], 101, 5).map_err(|e| e.to_string())?;
    let small = report.get("100", "lookup_median").unwrap_or(f64::NAN);
    let large = report.get("20000", "lookup_median").unwrap_or(f64::NAN);
    let ratio = large / small;
    ensure!(ratio <= 3.0, "time(20000)/time(100) = {ratio:.2} ({large:.4} ms vs {small:.4} ms)");
    ensure!(large <= 5.0, "lookup at 20000 columns took {large:.3} ms");
    ensure!(t.elapsed() < Duration::from_secs(120), "took {:?}", t.elapsed());
    Ok(format!("median {small:.4} ms at 100 columns, {large:.4} ms at 20000 (ratio {ratio:.2})"))
}

fn c6_sparse_delta() -> Outcome {
    let block = encode_sequence_column(&common::example_vectors(), DEFAULT_MIN_OVERLAP).map_err(|e| e.to_string())?;
    ensure!(block.entries[0] == SparseDeltaEntry::Base(common::base()), "first entry is not the base vector");
    let second = SparseDeltaEntry::Delta(Window { range_start: 0, range_end: 14, head: vec![76], tail: vec![] });
    let third = SparseDeltaEntry::Delta(Window { range_start: 0, range_end: 15, head: vec![], tail: vec![] });
    ensure!(block.entries[1] == second, "second entry {:?}", block.entries[1]);
    ensure!(block.entries[2] == third, "third entry {:?}", block.entries[2]);

    let v = common::sliding_sequences(10_000, 256, 16, 66);
    let block = encode_sequence_column(&v, DEFAULT_MIN_OVERLAP).map_err(|e| e.to_string())?;
    let bytes = block.to_bytes();
    let back = decode_sequence_column(&SparseDeltaBlock::from_bytes(&bytes).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure!(back == v, "round trip differs");
    let plain: usize = v.iter().map(|x| x.len() * 8).sum();
    let ratio = bytes.len() as f64 / plain as f64;
    ensure!(ratio <= 0.25, "encoded/plain = {ratio:.4}");
    Ok(format!("example entries exact; 10000 vectors round trip at {:.2}% of plain size", ratio * 100.0))
}

/// Random dense values of any element type with a random shape.
fn random_dense(r: &mut ChaCha8Rng, max_len: usize) -> Values {
    let n = r.random_range(0..max_len);
    match r.random_range(0..5) {
        0 => Values::UInt64(random_u64s(r, n)),
        1 => Values::Int64(random_i64s(r, n)),
        2 => {
            let pool: Vec<f32> = vec![0.0, -0.0, f32::NAN, f32::INFINITY, 1.5, f32::from_bits(r.random())];
            Values::Float32(
                (0..n)
                    .map(|_| {
                        if r.random_bool(0.5) {
                            pool[r.random_range(0..pool.len())]
                        } else {
                            f32::from_bits(r.random())
                        }
                    })
                    .collect(),
            )
        }
        3 => Values::Float64((0..n).map(|_| f64::from_bits(r.random())).collect()),
        _ => Values::Bytes(
            (0..n).map(|_| (0..r.random_range(0..10)).map(|_| r.random_range(b'a'..b'e')).collect()).collect(),
        ),
    }
}

fn random_u64s(r: &mut ChaCha8Rng, n: usize) -> Vec<u64> {
    let bits = r.random_range(0..=64u32);
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let runs = r.random_bool(0.3);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = r.random::<u64>() & mask;
        let k = if runs { r.random_range(1..20) } else { 1 };
        out.extend(std::iter::repeat_n(v, k.min(n - out.len())));
    }
    out
}

fn random_i64s(r: &mut ChaCha8Rng, n: usize) -> Vec<i64> {
    match r.random_range(0..4) {
        0 => (0..n).map(|_| r.random()).collect(),
        1 => (0..n).map(|_| r.random_range(-1000..1000)).collect(),
        2 => (0..n).map(|_| [i64::MIN, i64::MAX, 0, -1][r.random_range(0..4)]).collect(),
        _ => {
            let b: i64 = r.random();
            (0..n).map(|_| b.wrapping_add(r.random_range(0..300))).collect()
        }
    }
}

fn values_for(scheme: SchemeId, r: &mut ChaCha8Rng) -> Values {
    match scheme {
        SchemeId::Constant => {
            let n = r.random_range(1..300);
            match r.random_range(0..3) {
                0 => Values::UInt64(vec![r.random(); n]),
                1 => Values::Float32(vec![f32::from_bits(r.random()); n]),
                _ => Values::Bytes(vec![b"xyz".to_vec(); n]),
            }
        }
        SchemeId::MainlyConstant => {
            let n = r.random_range(1..300);
            let mut v = vec![r.random::<i64>(); n];
            for _ in 0..r.random_range(0..10) {
                v[r.random_range(0..n)] = r.random();
            }
            Values::Int64(v)
        }
        SchemeId::Dictionary => loop {
            let v = random_dense(r, 150);
            if !v.is_empty() {
                break v;
            }
        },
        SchemeId::FixedBitWidth | SchemeId::Varint => {
            let n = r.random_range(0..300);
            Values::UInt64(random_u64s(r, n))
        }
        SchemeId::ZigZag => {
            let n = r.random_range(0..300);
            Values::Int64(random_i64s(r, n))
        }
        SchemeId::ForDelta => {
            let n = r.random_range(0..300);
            if r.random_bool(0.5) {
                Values::Int64(random_i64s(r, n))
            } else {
                Values::UInt64(random_u64s(r, n))
            }
        }
        SchemeId::Nullable => {
            let dense = random_dense(r, 150);
            let mut present = vec![true; dense.len()];
            for _ in 0..r.random_range(0..20) {
                let at = r.random_range(0..=present.len());
                present.insert(at, false);
            }
            Values::Nullable { present, values: Box::new(dense) }
        }
        SchemeId::Trivial | SchemeId::Rle | SchemeId::Chunked => random_dense(r, 200),
    }
}

fn roundtrip(values: &Values, scheme: SchemeId, cfg: &EncodingConfig) -> Result<EncodedBlock, String> {
    let block = encode_as(values, scheme, cfg).map_err(|e| format!("{scheme:?}: {e}"))?;
    let bytes = block.to_bytes();
    let (parsed, used) = EncodedBlock::parse(&bytes).map_err(|e| e.to_string())?;
    ensure!(used == bytes.len() && parsed == block, "{scheme:?}: wire form does not parse back");
    let back = decode(&parsed, values.value_type()).map_err(|e| e.to_string())?;
    ensure!(&back == values, "{scheme:?}: decode differs for {values:?}");
    Ok(block)
}

fn c7_codec_roundtrip() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(77);
    let cfg = EncodingConfig::default();
    for scheme in SchemeId::ALL {
        for _ in 0..10_000 {
            let v = values_for(scheme, &mut r);
            roundtrip(&v, scheme, &cfg)?;
        }
    }
    let nested = EncodingConfig {
        candidate_set: SchemeSet::of(&[SchemeId::Dictionary, SchemeId::Rle, SchemeId::FixedBitWidth]),
        ..EncodingConfig::default()
    };
    let mut shaped = 0;
    for _ in 0..10_000 {
        let mut alphabet: Vec<i64> = (0..r.random_range(2..6)).map(|_| r.random()).collect();
        alphabet.sort();
        alphabet.dedup();
        let mut v = Vec::new();
        for _ in 0..r.random_range(2..12) {
            let x = alphabet[r.random_range(0..alphabet.len())];
            v.extend(std::iter::repeat_n(x, r.random_range(1..200)));
        }
        let block = roundtrip(&Values::Int64(v), SchemeId::Dictionary, &nested)?;
        ensure!(block.depth() <= 2, "depth {}", block.depth());
        let codes = &block.children[1];
        if codes.scheme == SchemeId::Rle && codes.children.iter().all(|c| c.scheme == SchemeId::FixedBitWidth) {
            shaped += 1;
        }
    }
    ensure!(shaped > 5_000, "only {shaped} of 10000 nested cases formed dictionary -> rle -> bitpack");
    Ok(format!("11 schemes x 10000 cases; {shaped} of 10000 depth-2 dictionary -> rle -> bitpack trees"))
}

fn c8_quantization() -> Outcome {
    use half::{bf16, f16};
    let values = common::samples(88);
    let mut checked = 0usize;
    for &x in &values {
        let (h, b) = (f32_to_f16(x), f32_to_bf16(x));
        if x.is_nan() {
            ensure!(f16::from_bits(h).is_nan() && bf16::from_bits(b).is_nan(), "NaN {:#010x} lost", x.to_bits());
        } else {
            ensure!(h == f16::from_f32(x).to_bits(), "fp16 of {x:e}: {h:#06x}");
            ensure!(b == bf16::from_f32(x).to_bits(), "bf16 of {x:e}: {b:#06x}");
        }
        checked += 1;
    }
    for fmt in [FloatFormat::FP8_E4M3, FloatFormat::FP8_E5M2] {
        let oracle = common::Fp8Oracle::new(fmt);
        for &x in &values {
            let ours = f32_to_fp8(x, fmt);
            let want = oracle.convert(x);
            if x.is_nan() {
                ensure!(ours & 0x7F == want & 0x7F || (ours & 0x7F) >> fmt.man_bits == 0x7F >> fmt.man_bits, "fp8 NaN");
            } else {
                ensure!(ours == want, "fp8 {fmt:?} of {x:e}: {ours:#04x} vs oracle {want:#04x}");
            }
        }
    }
    let mut specials = common::specials();
    specials.extend((0..=0xFFu32).map(|e| f32::from_bits(e << 23 | 1)));
    for set in [&specials, &values] {
        let (hi, lo) = split_dual(set);
        let back = join_dual(&hi, &lo).map_err(|e| e.to_string())?;
        ensure!(set.iter().zip(&back).all(|(a, b)| a.to_bits() == b.to_bits()), "dual split/join not bit-identical");
    }
    for spec in [QuantSpec::Fp16, QuantSpec::Bf16] {
        let payload = quantize_floats(&values, spec).map_err(|e| e.to_string())?;
        ensure!(payload.len() * 2 == values.len() * 4, "{spec:?} payload is {} bytes", payload.len());
    }
    Ok(format!("{checked} values vs reference for fp16/bf16/fp8; dual split exact; 16-bit payloads half size"))
}

fn layout_fixture(n: usize) -> (Schema, RecordBatch) {
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let mut cols = Vec::new();
    let mut data = Vec::new();
    for i in 0..12 {
        match i % 4 {
            0 => {
                cols.push(ColumnSchema::new(format!("i{i}"), LogicalType::Int64));
                data.push(ColumnData::Int64((0..n).map(|_| Some(r.random_range(0..100))).collect()));
            }
            1 => {
                cols.push(ColumnSchema::new(format!("f{i}"), LogicalType::Float32));
                data.push(ColumnData::Float32((0..n).map(|_| Some(r.random())).collect()));
            }
            2 => {
                cols.push(ColumnSchema::new(format!("s{i}"), LogicalType::Utf8));
                data.push(ColumnData::Utf8((0..n).map(|j| Some(format!("v{}", j % 11))).collect()));
            }
            _ => {
                cols.push(
                    ColumnSchema::new(format!("d{i}"), LogicalType::Float32).with_quantization(QuantSpec::DualSplit16),
                );
                data.push(ColumnData::Float32((0..n).map(|_| Some(f32::from_bits(r.random()))).collect()));
            }
        }
    }
    (Schema::new(cols), RecordBatch::new(data).unwrap())
}

fn project_all(file: &[u8], names: &[&str]) -> Result<Vec<ProjectedColumn>, String> {
    let reader = BullionReader::open(file).map_err(|e| e.to_string())?;
    reader.project(names, &ReadOptions::default()).map_err(|e| e.to_string())
}

fn c9_layout() -> Outcome {
    let (schema, batch) = layout_fixture(1000);
    let names: Vec<String> = schema.columns.iter().map(|c| c.name.clone()).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let opts = WriteOptions { rows_per_page: 100, pages_per_group: 3, ..WriteOptions::default() };
    let (plain, _) = write_file(&schema, std::slice::from_ref(&batch), &opts).map_err(|e| e.to_string())?;
    let expected = project_all(&plain, &name_refs)?;
    let mut r = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..20 {
        let mut ranking = names.clone();
        ranking.shuffle(&mut r);
        ranking.truncate(r.random_range(1..=names.len()));
        let k = ranking.len();
        let o = WriteOptions { column_order: ColumnOrderSpec::Frequency { ranking: ranking.clone() }, ..opts.clone() };
        let (file, _) = write_file(&schema, std::slice::from_ref(&batch), &o).map_err(|e| e.to_string())?;
        ensure!(project_all(&file, &name_refs)? == expected, "trial {trial}: projection differs under {ranking:?}");
        let reader = BullionReader::open(&file[..]).map_err(|e| e.to_string())?;
        let f = reader.footer();
        let mut stored = Vec::new();
        for name in &ranking {
            stored.extend(reader.resolve(name).map_err(|e| e.to_string())?);
        }
        for g in 0..f.num_groups() {
            for w in stored.windows(2) {
                let (_, end) = f.chunk_range(g, w[0]);
                let (start, _) = f.chunk_range(g, w[1]);
                ensure!(
                    end == start,
                    "trial {trial}, group {g}: gap of {} bytes in top-{k}",
                    start as i64 - end as i64
                );
            }
        }
    }
    Ok("20 random rankings: identical projections, zero gaps between ranked chunks".into())
}

fn c10_determinism() -> Outcome {
    let (schema, batch) = layout_fixture(2000);
    let mut cols = schema.columns.clone();
    cols.push(ColumnSchema::new("seq", LogicalType::ListInt64).sparse());
    cols.push(ColumnSchema::new("uid", LogicalType::Int64).with_quantization(QuantSpec::IntRehash));
    cols.push(ColumnSchema::new("emb", LogicalType::ListFloat32).with_quantization(QuantSpec::Fp16));
    let schema = Schema::new(cols);
    let seqs = common::sliding_sequences(2000, 32, 4, 10);
    let mut data = batch.columns.clone();
    data.push(ColumnData::ListInt64(seqs.into_iter().map(Some).collect()));
    data.push(ColumnData::Int64((0..2000).map(|i| Some((i * 7919) % 313 * 1_000_003)).collect()));
    data.push(ColumnData::ListFloat32((0..2000).map(|i| Some(vec![i as f32 * 0.25, -1.0])).collect()));
    let batch = RecordBatch::new(data).unwrap();
    let opts = WriteOptions {
        rows_per_page: 128,
        pages_per_group: 4,
        row_order: RowOrderSpec::QualityDesc { score_column: "f1".into() },
        column_order: ColumnOrderSpec::Frequency { ranking: vec!["s2".into(), "i0".into()] },
        ..WriteOptions::default()
    };
    let dir = std::env::temp_dir();
    let paths = [0, 1].map(|i| dir.join(format!("bullion-determinism-{}-{i}.bln", std::process::id())));
    for p in &paths {
        write_to_path(p, &schema, std::slice::from_ref(&batch), &opts).map_err(|e| e.to_string())?;
    }
    let bytes: Vec<Vec<u8>> = paths.iter().map(std::fs::read).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    for p in &paths {
        let _ = std::fs::remove_file(p);
    }
    let (h0, h1) = (hash_bytes(&bytes[0]), hash_bytes(&bytes[1]));
    ensure!(h0 == h1 && bytes[0] == bytes[1], "hashes {h0:#018x} and {h1:#018x}");
    Ok(format!("two writes of {} bytes hash to {h0:#018x}", bytes[0].len()))
}
