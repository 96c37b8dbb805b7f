//! Sliding-window delta codec for `list<int64>` sequence columns.
//!
//! Rows of a user-sorted sequence feature tend to be the previous row shifted
//! by a few positions. Each vector after the first is stored as
//! `head ++ prev[range_start..=range_end] ++ tail`, referencing the vector
//! decoded immediately before it. When no long enough overlap exists the
//! vector is stored literally as a new base.
//!
//! Block layout (integers little-endian, `varint` = LEB128):
//!
//! ```text
//! varint entry_count
//! flags: ceil(entry_count / 8) bytes, LSB-first, 1 = delta
//! per entry: delta -> varint range_start, range_end, head_len, tail_len
//!            base  -> varint base_len
//! bulk: one encoded block (Trivial or Chunked) of int64 values holding every
//!       entry's head then tail, or its base data, in entry order
//! ```

use std::collections::HashMap;

use crate::encoding::{chunked, nullable, trivial, varint, EncodedBlock, SchemeId};
use crate::error::{Error, Result};

pub const DEFAULT_MIN_OVERLAP: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub range_start: usize,
    pub range_end: usize,
    pub head: Vec<i64>,
    pub tail: Vec<i64>,
}

impl Window {
    pub fn overlap(&self) -> usize {
        self.range_end - self.range_start + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SparseDeltaEntry {
    Base(Vec<i64>),
    Delta(Window),
}

impl SparseDeltaEntry {
    pub fn delta_flag(&self) -> bool {
        matches!(self, SparseDeltaEntry::Delta(_))
    }

    /// Length of the vector this entry reconstructs.
    pub fn output_len(&self) -> usize {
        match self {
            SparseDeltaEntry::Base(v) => v.len(),
            SparseDeltaEntry::Delta(w) => w.head.len() + w.overlap() + w.tail.len(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseDeltaBlock {
    pub entries: Vec<SparseDeltaEntry>,
}

/// 64-bit mixing so that small consecutive ids spread across the hash space.
fn mix(v: i64) -> u64 {
    let mut x = v as u64;
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x
}

const BASE: u64 = 0x100_0000_01b3;

/// Rolling polynomial hashes of every length-`len` window of `v`.
fn window_hashes(v: &[i64], len: usize) -> Vec<u64> {
    if len == 0 || len > v.len() {
        return Vec::new();
    }
    let top = (1..len).fold(1u64, |p, _| p.wrapping_mul(BASE));
    let mut h = v[..len].iter().fold(0u64, |h, x| h.wrapping_mul(BASE).wrapping_add(mix(*x)));
    let mut out = Vec::with_capacity(v.len() - len + 1);
    out.push(h);
    for k in len..v.len() {
        h = h.wrapping_sub(mix(v[k - len]).wrapping_mul(top));
        h = h.wrapping_mul(BASE).wrapping_add(mix(v[k]));
        out.push(h);
    }
    out
}

/// First common slice of length `len` as `(curr_pos, prev_pos)`, smallest
/// `curr_pos` first, then smallest `prev_pos`.
fn common_at(prev: &[i64], curr: &[i64], len: usize) -> Option<(usize, usize)> {
    let prev_h = window_hashes(prev, len);
    let mut by_hash: HashMap<u64, Vec<usize>> = HashMap::with_capacity(prev_h.len());
    for (i, h) in prev_h.iter().enumerate() {
        by_hash.entry(*h).or_default().push(i);
    }
    for (j, h) in window_hashes(curr, len).iter().enumerate() {
        if let Some(cands) = by_hash.get(h) {
            if let Some(&i) = cands.iter().find(|&&i| prev[i..i + len] == curr[j..j + len]) {
                return Some((j, i));
            }
        }
    }
    None
}

/// Longest decomposition `curr = head ++ prev[range] ++ tail`. Ties prefer the
/// shortest head, then the smallest `range_start`.
pub fn find_sliding_window(prev: &[i64], curr: &[i64], min_overlap_fraction: f64) -> Option<Window> {
    if prev.is_empty() || curr.is_empty() {
        return None;
    }
    // Existence of a common slice of length L is monotone in L.
    let (mut lo, mut hi) = (0usize, prev.len().min(curr.len()));
    let mut best = None;
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        match common_at(prev, curr, mid) {
            Some(pos) => {
                lo = mid;
                best = Some(pos);
            }
            None => hi = mid - 1,
        }
    }
    let len = lo;
    let (j, i) = best?;
    if (len as f64) < min_overlap_fraction * curr.len() as f64 {
        return None;
    }
    Some(Window { range_start: i, range_end: i + len - 1, head: curr[..j].to_vec(), tail: curr[j + len..].to_vec() })
}

pub fn encode_sequence_column(vectors: &[Vec<i64>], min_overlap_fraction: f64) -> Result<SparseDeltaBlock> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut entries = Vec::with_capacity(vectors.len());
    entries.push(SparseDeltaEntry::Base(vectors[0].clone()));
    for pair in vectors.windows(2) {
        entries.push(match find_sliding_window(&pair[0], &pair[1], min_overlap_fraction) {
            Some(w) => SparseDeltaEntry::Delta(w),
            None => SparseDeltaEntry::Base(pair[1].clone()),
        });
    }
    Ok(SparseDeltaBlock { entries })
}

pub fn decode_sequence_column(block: &SparseDeltaBlock) -> Result<Vec<Vec<i64>>> {
    let mut out: Vec<Vec<i64>> = Vec::with_capacity(block.entries.len());
    for (n, entry) in block.entries.iter().enumerate() {
        let v = match entry {
            SparseDeltaEntry::Base(data) => data.clone(),
            SparseDeltaEntry::Delta(w) => {
                let prev = out.last().ok_or_else(|| Error::corrupt("first sparse-delta entry is not a base vector"))?;
                if w.range_start > w.range_end || w.range_end >= prev.len() {
                    return Err(Error::corrupt(format!(
                        "entry {n}: range [{}, {}] outside previous vector of length {}",
                        w.range_start,
                        w.range_end,
                        prev.len()
                    )));
                }
                let mut v = Vec::with_capacity(entry.output_len());
                v.extend_from_slice(&w.head);
                v.extend_from_slice(&prev[w.range_start..=w.range_end]);
                v.extend_from_slice(&w.tail);
                v
            }
        };
        out.push(v);
    }
    Ok(out)
}

impl SparseDeltaBlock {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        varint::write_u64(self.entries.len() as u64, &mut out);
        let flags: Vec<bool> = self.entries.iter().map(SparseDeltaEntry::delta_flag).collect();
        out.extend_from_slice(&nullable::pack_bits(&flags));
        let mut bulk = Vec::new();
        for e in &self.entries {
            match e {
                SparseDeltaEntry::Base(data) => {
                    varint::write_u64(data.len() as u64, &mut out);
                    bulk.extend_from_slice(data);
                }
                SparseDeltaEntry::Delta(w) => {
                    for v in [w.range_start, w.range_end, w.head.len(), w.tail.len()] {
                        varint::write_u64(v as u64, &mut out);
                    }
                    bulk.extend_from_slice(&w.head);
                    bulk.extend_from_slice(&w.tail);
                }
            }
        }
        let plain = trivial::encode(&bulk);
        let packed = chunked::encode(&bulk);
        if packed.encoded_len() < plain.encoded_len() {
            packed.write_to(&mut out);
        } else {
            plain.write_to(&mut out);
        }
        out
    }

    /// Parses a block, returning it and the number of bytes consumed.
    pub fn parse(bytes: &[u8]) -> Result<(SparseDeltaBlock, usize)> {
        let mut pos = 0;
        let n = varint::read_u64(bytes, &mut pos)? as usize;
        let flag_len = n.div_ceil(8);
        if bytes.len() < pos + flag_len {
            return Err(Error::corrupt("sparse-delta flags truncated"));
        }
        let flags = nullable::unpack_bits(&bytes[pos..pos + flag_len], n)?;
        pos += flag_len;
        let mut shapes = Vec::with_capacity(n.min(bytes.len()));
        let mut total = 0usize;
        for &delta in &flags {
            if delta {
                let mut f = [0usize; 4];
                for slot in &mut f {
                    *slot = varint::read_u64(bytes, &mut pos)? as usize;
                }
                total = total.saturating_add(f[2]).saturating_add(f[3]);
                shapes.push((true, f));
            } else {
                let len = varint::read_u64(bytes, &mut pos)? as usize;
                total = total.saturating_add(len);
                shapes.push((false, [len, 0, 0, 0]));
            }
        }
        let (bulk_block, used) = EncodedBlock::parse(&bytes[pos..])?;
        pos += used;
        let bulk: Vec<i64> = match bulk_block.scheme {
            SchemeId::Trivial => trivial::decode(&bulk_block)?,
            SchemeId::Chunked => chunked::decode(&bulk_block)?,
            other => return Err(Error::corrupt(format!("unexpected sparse-delta bulk scheme {other}"))),
        };
        if bulk.len() != total {
            return Err(Error::corrupt(format!(
                "sparse-delta bulk holds {} values, metadata expects {total}",
                bulk.len()
            )));
        }
        let mut cursor = 0;
        let mut take = |k: usize| {
            let s = bulk[cursor..cursor + k].to_vec();
            cursor += k;
            s
        };
        let entries = shapes
            .into_iter()
            .map(|(delta, f)| {
                if delta {
                    SparseDeltaEntry::Delta(Window {
                        range_start: f[0],
                        range_end: f[1],
                        head: take(f[2]),
                        tail: take(f[3]),
                    })
                } else {
                    SparseDeltaEntry::Base(take(f[0]))
                }
            })
            .collect();
        Ok((SparseDeltaBlock { entries }, pos))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<SparseDeltaBlock> {
        let (block, used) = Self::parse(bytes)?;
        if used != bytes.len() {
            return Err(Error::corrupt("trailing bytes after sparse-delta block"));
        }
        Ok(block)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every (head, range, tail) split, best by overlap, then head, then start.
    fn brute_force(prev: &[i64], curr: &[i64]) -> Option<(usize, usize, usize)> {
        let mut best: Option<(usize, usize, usize)> = None;
        for j in 0..curr.len() {
            for i in 0..prev.len() {
                let mut l = 0;
                while i + l < prev.len() && j + l < curr.len() && prev[i + l] == curr[j + l] {
                    l += 1;
                }
                if l == 0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bl, bj, bi)) => {
                        (l, std::cmp::Reverse(j), std::cmp::Reverse(i))
                            > (bl, std::cmp::Reverse(bj), std::cmp::Reverse(bi))
                    }
                };
                if better {
                    best = Some((l, j, i));
                }
            }
        }
        best
    }

    #[test]
    fn matches_brute_force_on_small_alphabet() {
        let mut s = 0x1234_5678u64;
        let mut next = |m: u64| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s % m) as i64
        };
        for _ in 0..3000 {
            let pn = 1 + next(12) as usize;
            let cn = 1 + next(12) as usize;
            let alpha = 1 + next(4) as u64;
            let prev: Vec<i64> = (0..pn).map(|_| next(alpha)).collect();
            let curr: Vec<i64> = (0..cn).map(|_| next(alpha)).collect();
            let got = find_sliding_window(&prev, &curr, 0.0);
            let want = brute_force(&prev, &curr);
            match (got, want) {
                (None, None) => {}
                (Some(w), Some((l, j, i))) => {
                    assert_eq!((w.overlap(), w.head.len(), w.range_start), (l, j, i), "{prev:?} {curr:?}");
                    assert_eq!(&w.tail[..], &curr[j + l..]);
                }
                (g, w) => panic!("{prev:?} {curr:?}: {g:?} vs {w:?}"),
            }
        }
    }

    #[test]
    fn window_examples() {
        let w = find_sliding_window(&[1, 2, 3, 4], &[9, 1, 2, 3], 0.5).unwrap();
        assert_eq!(w, Window { range_start: 0, range_end: 2, head: vec![9], tail: vec![] });
        let v = vec![4, 8, 15, 16, 23, 42];
        let w = find_sliding_window(&v, &v, 0.5).unwrap();
        assert_eq!((w.range_start, w.range_end, w.head.len(), w.tail.len()), (0, 5, 0, 0));
        assert_eq!(find_sliding_window(&[1, 2], &[7, 8], 0.5), None);
        // overlap of 1 out of 4 is below half
        assert_eq!(find_sliding_window(&[1, 2], &[7, 8, 9, 1], 0.5), None);
    }

    #[test]
    fn single_vector_is_one_base() {
        let b = encode_sequence_column(&[vec![1, 2, 3]], DEFAULT_MIN_OVERLAP).unwrap();
        assert_eq!(b.entries, vec![SparseDeltaEntry::Base(vec![1, 2, 3])]);
        assert!(encode_sequence_column(&[], DEFAULT_MIN_OVERLAP).is_err());
    }

    #[test]
    fn bytes_roundtrip_and_range_check() {
        let vecs = vec![vec![1, 2, 3, 4], vec![0, 1, 2, 3], vec![], vec![5, 6], vec![5, 6, 7]];
        let b = encode_sequence_column(&vecs, DEFAULT_MIN_OVERLAP).unwrap();
        let bytes = b.to_bytes();
        let back = SparseDeltaBlock::from_bytes(&bytes).unwrap();
        assert_eq!(back, b);
        assert_eq!(decode_sequence_column(&back).unwrap(), vecs);

        let bad = SparseDeltaBlock {
            entries: vec![
                SparseDeltaEntry::Base(vec![1, 2]),
                SparseDeltaEntry::Delta(Window { range_start: 0, range_end: 2, head: vec![], tail: vec![] }),
            ],
        };
        assert!(matches!(decode_sequence_column(&bad), Err(Error::CorruptBlock(_))));
    }
}
