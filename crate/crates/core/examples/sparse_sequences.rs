//! Sliding-window delta coding of user history sequences: each row is the
//! previous row with a few new ids pushed on the front.

use bullion::sparse_delta::{
    decode_sequence_column, encode_sequence_column, SparseDeltaBlock, SparseDeltaEntry, DEFAULT_MIN_OVERLAP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> bullion::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rows: Vec<Vec<i64>> = vec![(0..256).map(|_| rng.random_range(0..1_000_000)).collect()];
    for _ in 1..2000 {
        let prev = rows.last().unwrap();
        let shift = rng.random_range(1..=16);
        let mut next: Vec<i64> = (0..shift).map(|_| rng.random_range(0..1_000_000)).collect();
        next.extend_from_slice(&prev[..256 - shift]);
        rows.push(next);
    }

    let block = encode_sequence_column(&rows, DEFAULT_MIN_OVERLAP)?;
    let bytes = block.to_bytes();
    let back = decode_sequence_column(&SparseDeltaBlock::from_bytes(&bytes)?)?;
    assert_eq!(back, rows);

    let deltas = block.entries.iter().filter(|e| e.delta_flag()).count();
    if let SparseDeltaEntry::Delta(w) = &block.entries[1] {
        println!("row 1: head {:?}, reuses prev[{}..={}]", w.head, w.range_start, w.range_end);
    }
    let plain = rows.len() * 256 * 8;
    println!(
        "{} rows, {deltas} deltas, {} bytes vs {plain} plain ({:.1}%)",
        rows.len(),
        bytes.len(),
        100.0 * bytes.len() as f64 / plain as f64
    );
    Ok(())
}
