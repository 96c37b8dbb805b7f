//! Cascaded scheme selection on a few column shapes, printing the chosen
//! encoding tree and its size against the plain layout.

use bullion::encoding::{decode, encode_cascading, EncodedBlock, EncodingConfig, Values};

fn tree(b: &EncodedBlock, depth: usize, out: &mut String) {
    out.push_str(&format!(
        "{}{:?} ({} values, {} payload bytes)\n",
        "  ".repeat(depth),
        b.scheme,
        b.len(),
        b.payload.len()
    ));
    for c in &b.children {
        tree(c, depth + 1, out);
    }
}

fn main() -> bullion::Result<()> {
    let columns = [
        ("sorted timestamps", Values::Int64((0..4096).map(|i| 1_700_000_000 + i * 3).collect())),
        ("country codes", Values::Int64((0..4096).map(|i| [44, 1, 33, 49][(i / 300) % 4]).collect())),
        ("mostly zero", Values::UInt64((0..4096).map(|i| if i % 97 == 0 { i } else { 0 }).collect())),
        ("labels", Values::Bytes((0..4096).map(|i| format!("class-{}", i % 5).into_bytes()).collect())),
    ];
    let cfg = EncodingConfig::default();
    for (name, values) in columns {
        let block = encode_cascading(&values, &cfg)?;
        assert_eq!(decode(&block, values.value_type())?, values);
        let mut s = String::new();
        tree(&block, 1, &mut s);
        let plain = match &values {
            Values::Bytes(v) => v.iter().map(|b| b.len() + 4).sum(),
            v => v.len() * 8,
        };
        println!("{name}: {} bytes encoded, {plain} plain\n{s}", block.encoded_len());
    }
    Ok(())
}
