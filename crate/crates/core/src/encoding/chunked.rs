//! General-purpose compression of fixed 256 KiB chunks with zstd.
//!
//! Layout: `u32 chunk_count`, then one 13-byte table entry per chunk
//! (`u32 offset`, `u32 stored_len`, `u32 raw_len`, `u8 flag`), then the chunk
//! bodies. Offsets are relative to the end of the table. A chunk that does not
//! shrink under compression is stored raw (`flag = 0`).

use std::cell::RefCell;

use super::block::{EncodedBlock, SchemeId};
use super::trivial;
use super::values::Element;
use crate::error::{Error, Result};

pub const CHUNK_SIZE: usize = 256 * 1024;
const ENTRY_LEN: usize = 13;
const ZSTD_LEVEL: i32 = 3;

const FLAG_RAW: u8 = 0;
const FLAG_ZSTD: u8 = 1;

thread_local! {
    // Allocating a zstd context costs far more than compressing a small page.
    static COMPRESSOR: RefCell<Option<zstd::bulk::Compressor<'static>>> = const { RefCell::new(None) };
}

fn zstd_compress(chunk: &[u8]) -> std::io::Result<Vec<u8>> {
    COMPRESSOR.with(|c| {
        let mut c = c.borrow_mut();
        if c.is_none() {
            *c = Some(zstd::bulk::Compressor::new(ZSTD_LEVEL)?);
        }
        c.as_mut().expect("compressor initialized").compress(chunk)
    })
}

pub fn compress_chunks(data: &[u8]) -> Vec<u8> {
    let chunks: Vec<(u8, Vec<u8>, usize)> = data
        .chunks(CHUNK_SIZE)
        .map(|chunk| match zstd_compress(chunk) {
            Ok(c) if c.len() < chunk.len() => (FLAG_ZSTD, c, chunk.len()),
            _ => (FLAG_RAW, chunk.to_vec(), chunk.len()),
        })
        .collect();
    let body_len: usize = chunks.iter().map(|c| c.1.len()).sum();
    let mut out = Vec::with_capacity(4 + chunks.len() * ENTRY_LEN + body_len);
    out.extend_from_slice(&(chunks.len() as u32).to_le_bytes());
    let mut offset = 0u32;
    for (flag, body, raw_len) in &chunks {
        out.extend_from_slice(&offset.to_le_bytes());
        out.extend_from_slice(&(body.len() as u32).to_le_bytes());
        out.extend_from_slice(&(*raw_len as u32).to_le_bytes());
        out.push(*flag);
        offset += body.len() as u32;
    }
    for (_, body, _) in chunks {
        out.extend_from_slice(&body);
    }
    out
}

/// Per-chunk `(stored_raw, raw_len)` read from the table.
pub fn chunk_flags(buf: &[u8]) -> Result<Vec<(bool, usize)>> {
    let (entries, _) = table(buf)?;
    Ok(entries.iter().map(|e| (e.flag == FLAG_RAW, e.raw_len)).collect())
}

struct Entry {
    offset: usize,
    stored_len: usize,
    raw_len: usize,
    flag: u8,
}

fn table(buf: &[u8]) -> Result<(Vec<Entry>, &[u8])> {
    let short = || Error::corrupt("chunk table truncated");
    let count = u32::from_le_bytes(buf.get(..4).ok_or_else(short)?.try_into().unwrap()) as usize;
    let table_end =
        count.checked_mul(ENTRY_LEN).and_then(|t| t.checked_add(4)).filter(|e| *e <= buf.len()).ok_or_else(short)?;
    let entries = buf[4..table_end]
        .chunks_exact(ENTRY_LEN)
        .map(|e| Entry {
            offset: u32::from_le_bytes(e[0..4].try_into().unwrap()) as usize,
            stored_len: u32::from_le_bytes(e[4..8].try_into().unwrap()) as usize,
            raw_len: u32::from_le_bytes(e[8..12].try_into().unwrap()) as usize,
            flag: e[12],
        })
        .collect();
    Ok((entries, &buf[table_end..]))
}

pub fn decompress_chunks(buf: &[u8]) -> Result<Vec<u8>> {
    let (entries, bodies) = table(buf)?;
    let mut out = Vec::with_capacity(entries.iter().map(|e| e.raw_len).sum());
    for e in entries {
        let body =
            bodies.get(e.offset..e.offset + e.stored_len).ok_or_else(|| Error::corrupt("chunk body out of range"))?;
        match e.flag {
            FLAG_RAW if body.len() == e.raw_len => out.extend_from_slice(body),
            FLAG_ZSTD => {
                let raw = zstd::bulk::decompress(body, e.raw_len)
                    .map_err(|err| Error::corrupt(format!("zstd chunk: {err}")))?;
                if raw.len() != e.raw_len {
                    return Err(Error::corrupt("zstd chunk length mismatch"));
                }
                out.extend_from_slice(&raw);
            }
            _ => return Err(Error::corrupt("bad chunk flag or length")),
        }
    }
    Ok(out)
}

/// Chunked block over the plain layout of `values`.
pub fn encode<T: Element>(values: &[T]) -> EncodedBlock {
    let plain = trivial::encode(values).payload;
    EncodedBlock::leaf(SchemeId::Chunked, values.len(), compress_chunks(&plain))
}

pub fn decode<T: Element>(block: &EncodedBlock) -> Result<Vec<T>> {
    trivial::read_all(&decompress_chunks(&block.payload)?, block.len())
}
