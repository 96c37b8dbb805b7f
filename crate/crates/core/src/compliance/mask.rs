//! Masking deleted elements inside encoded blocks.
//!
//! Fixed-slot schemes (trivial, bit-packed, varint, frame of reference) are
//! overwritten in place. Run-structured schemes (RLE, constant,
//! mainly-constant, chunked) drop the deleted elements and re-encode the
//! rest into no more bytes than before; the caller records the dropped
//! positions as removal bits. Wrappers (zigzag, nullable, dictionary)
//! delegate to their children.

use crate::encoding::{
    bitpack, chunked, constant, for_delta, rle, trivial, varint, zigzag, Element, EncodedBlock, EncodingConfig,
    SchemeId, ValueType, Values,
};
use crate::encoding::{dispatch_type, dispatch_values};
use crate::error::{Error, Result};
use crate::format::MaybeMasked;

/// Result of masking one block.
#[derive(Clone, Debug, PartialEq)]
pub struct Masked {
    pub block: EncodedBlock,
    /// The deleted elements were dropped from the sequence rather than
    /// overwritten, so `block` holds only the survivors.
    pub removed: bool,
}

fn check_positions(block: &EncodedBlock, positions: &[usize]) -> Result<()> {
    let n = block.len();
    if let Some(p) = positions.iter().find(|p| **p >= n) {
        return Err(Error::RowOutOfRange { row: *p as u64, num_rows: n as u64 });
    }
    Ok(())
}

fn expect_scheme(block: &EncodedBlock, scheme: SchemeId) -> Result<()> {
    if block.scheme != scheme {
        return Err(Error::UnsupportedEncoding(format!("expected a {scheme} block, found {}", block.scheme)));
    }
    Ok(())
}

/// Flags of length `n`, set at `positions`.
pub fn position_flags(n: usize, positions: &[usize]) -> Vec<bool> {
    let mut flags = vec![false; n];
    for p in positions {
        flags[*p] = true;
    }
    flags
}

/// Zeroes the fixed-width slot of every deleted element.
pub fn mask_bitpacked(block: &EncodedBlock, positions: &[usize]) -> Result<EncodedBlock> {
    expect_scheme(block, SchemeId::FixedBitWidth)?;
    check_positions(block, positions)?;
    let mut out = block.clone();
    let width = *out.payload.first().ok_or_else(|| Error::corrupt("bit-packed payload is empty"))?;
    for p in positions {
        bitpack::write_slot(&mut out.payload[1..], *p, width, 0);
    }
    Ok(out)
}

/// Keeps each byte's continuation bit and clears the seven payload bits, so
/// every value keeps its byte length and the masked value decodes to 0.
pub fn mask_varint(block: &EncodedBlock, positions: &[usize]) -> Result<EncodedBlock> {
    expect_scheme(block, SchemeId::Varint)?;
    check_positions(block, positions)?;
    let spans = varint::value_spans(&block.payload, block.len())?;
    let mut out = block.clone();
    for p in positions {
        let (s, e) = spans[*p];
        out.payload[s..e].iter_mut().for_each(|b| *b &= 0x80);
    }
    Ok(out)
}

/// Zeroes the offset slot; the element then decodes to the block base.
pub fn mask_for_delta(block: &EncodedBlock, positions: &[usize]) -> Result<EncodedBlock> {
    expect_scheme(block, SchemeId::ForDelta)?;
    check_positions(block, positions)?;
    let (_, width, _) = for_delta::parts(&block.payload)?;
    let mut out = block.clone();
    for p in positions {
        bitpack::write_slot(&mut out.payload[9..], *p, width, 0);
    }
    Ok(out)
}

/// Zeroes the plain bytes of each deleted element. Byte strings keep their
/// length prefix.
pub fn mask_trivial(block: &EncodedBlock, ty: ValueType, positions: &[usize]) -> Result<EncodedBlock> {
    expect_scheme(block, SchemeId::Trivial)?;
    check_positions(block, positions)?;
    dispatch_type!(ty, T => {
        let mut v = trivial::decode::<T>(block)?;
        for p in positions {
            v[*p] = v[*p].zeroed();
        }
        Ok(trivial::encode(&v))
    })
}

/// Code-stream schemes where a zeroed slot decodes to code 0.
fn zeroes_to_mask_code(codes: &EncodedBlock) -> bool {
    matches!(codes.scheme, SchemeId::Trivial | SchemeId::FixedBitWidth | SchemeId::Varint)
}

/// Points every deleted element's code at the mask entry. When the code
/// stream cannot be overwritten in place (RLE and friends) the codes are
/// removed instead and the result is flagged `removed`. Entries no longer
/// referenced by any code are zeroed when the entry column allows it.
pub fn mask_dictionary(block: &EncodedBlock, ty: ValueType, positions: &[usize]) -> Result<Masked> {
    expect_scheme(block, SchemeId::Dictionary)?;
    check_positions(block, positions)?;
    if positions.is_empty() {
        return Ok(Masked { block: block.clone(), removed: false });
    }
    let codes = block.child(1)?;
    let (new_codes, removed) = if zeroes_to_mask_code(codes) {
        (mask_in_place(codes, ValueType::UInt64, positions)?, false)
    } else {
        (remove_elements(codes, ValueType::UInt64, positions)?, true)
    };
    let mut entries = block.child(0)?.clone();
    if in_place_capable(&entries) {
        let referenced = {
            let mut r = vec![false; entries.len() + 1];
            for c in u64::from_values(crate::encoding::decode(&new_codes, ValueType::UInt64)?)? {
                *r.get_mut(c as usize).ok_or_else(|| Error::corrupt("dictionary code out of range"))? = true;
            }
            r
        };
        let stale: Vec<usize> = (0..entries.len()).filter(|i| !referenced[i + 1]).collect();
        entries = mask_in_place(&entries, ty, &stale)?;
    }
    let count = if removed { block.len() - positions.len() } else { block.len() };
    Ok(Masked {
        block: EncodedBlock::with_children(
            SchemeId::Dictionary,
            count,
            block.payload.clone(),
            vec![entries, new_codes],
        ),
        removed,
    })
}

/// Removes the deleted elements from an RLE block and re-encodes the rest
/// (adjacent equal runs merged where that does not grow the block). Returns
/// the new block and one removal flag per original element.
pub fn mask_rle(block: &EncodedBlock, ty: ValueType, positions: &[usize]) -> Result<(EncodedBlock, Vec<bool>)> {
    expect_scheme(block, SchemeId::Rle)?;
    check_positions(block, positions)?;
    Ok((remove_elements(block, ty, positions)?, position_flags(block.len(), positions)))
}

/// Whether every deleted element can be overwritten in its own slot.
fn in_place_capable(block: &EncodedBlock) -> bool {
    match block.scheme {
        SchemeId::Trivial | SchemeId::FixedBitWidth | SchemeId::Varint | SchemeId::ForDelta => true,
        SchemeId::ZigZag => block.children.first().is_some_and(in_place_capable),
        SchemeId::Dictionary => block.children.get(1).is_some_and(zeroes_to_mask_code),
        _ => false,
    }
}

fn mask_in_place(block: &EncodedBlock, ty: ValueType, positions: &[usize]) -> Result<EncodedBlock> {
    if positions.is_empty() {
        return Ok(block.clone());
    }
    match block.scheme {
        SchemeId::Trivial => mask_trivial(block, ty, positions),
        SchemeId::FixedBitWidth => mask_bitpacked(block, positions),
        SchemeId::Varint => mask_varint(block, positions),
        SchemeId::ForDelta => mask_for_delta(block, positions),
        SchemeId::ZigZag => {
            let child = mask_in_place(block.child(0)?, ValueType::UInt64, positions)?;
            Ok(EncodedBlock::with_children(SchemeId::ZigZag, block.len(), block.payload.clone(), vec![child]))
        }
        SchemeId::Dictionary => Ok(mask_dictionary(block, ty, positions)?.block),
        other => Err(Error::UnsupportedEncoding(format!("{other} blocks cannot be overwritten in place"))),
    }
}

/// Masks `positions` (sorted, unique) in `block`, whatever its scheme.
/// The result never has a larger encoded length than the input.
pub fn mask_block(block: &EncodedBlock, ty: ValueType, positions: &[usize]) -> Result<Masked> {
    check_positions(block, positions)?;
    if positions.is_empty() {
        return Ok(Masked { block: block.clone(), removed: false });
    }
    let masked = match block.scheme {
        SchemeId::Trivial | SchemeId::FixedBitWidth | SchemeId::Varint | SchemeId::ForDelta => {
            Masked { block: mask_in_place(block, ty, positions)?, removed: false }
        }
        SchemeId::ZigZag => {
            let child = mask_block(block.child(0)?, ValueType::UInt64, positions)?;
            let count = if child.removed { block.len() - positions.len() } else { block.len() };
            Masked {
                block: EncodedBlock::with_children(SchemeId::ZigZag, count, block.payload.clone(), vec![child.block]),
                removed: child.removed,
            }
        }
        SchemeId::Dictionary => mask_dictionary(block, ty, positions)?,
        SchemeId::Nullable => Masked { block: mask_nullable(block, ty, positions)?, removed: false },
        _ => Masked { block: remove_elements(block, ty, positions)?, removed: true },
    };
    debug_assert!(masked.block.encoded_len() <= block.encoded_len());
    Ok(masked)
}

/// Masks the dense values behind present positions. If the dense child had to
/// drop them, their presence bits are cleared so the row count is unchanged.
fn mask_nullable(block: &EncodedBlock, ty: ValueType, positions: &[usize]) -> Result<EncodedBlock> {
    let present = crate::encoding::nullable::unpack_bits(&block.payload, block.len())?;
    let mut dense_index = Vec::with_capacity(present.len());
    let mut d = 0usize;
    for p in &present {
        dense_index.push(d);
        d += *p as usize;
    }
    let dense_positions: Vec<usize> = positions.iter().filter(|p| present[**p]).map(|p| dense_index[*p]).collect();
    let child = mask_block(block.child(0)?, ty, &dense_positions)?;
    let mut payload = block.payload.clone();
    if child.removed {
        for p in positions {
            payload[p / 8] &= !(1 << (p % 8));
        }
    }
    Ok(EncodedBlock::with_children(SchemeId::Nullable, block.len(), payload, vec![child.block]))
}

fn empty_block() -> EncodedBlock {
    EncodedBlock::leaf(SchemeId::Trivial, 0, Vec::new())
}

/// Drops `positions` from `block` and re-encodes the survivors without
/// growing. Tries, in order: the same scheme tree with merged runs, a fresh
/// cascade under the maskable configuration, and the same scheme tree with
/// the old run boundaries kept (which never grows for the maskable count
/// schemes). Fails with [`Error::SizeExceeded`] if none fits.
pub fn remove_elements(block: &EncodedBlock, ty: ValueType, positions: &[usize]) -> Result<EncodedBlock> {
    check_positions(block, positions)?;
    let limit = block.encoded_len();
    let keep: Vec<bool> = position_flags(block.len(), positions).into_iter().map(|d| !d).collect();
    if !keep.contains(&true) {
        return Ok(empty_block());
    }
    let mut smallest = usize::MAX;
    let mut fits = |b: Result<EncodedBlock>| -> Option<EncodedBlock> {
        let b = b.ok()?;
        smallest = smallest.min(b.encoded_len());
        (b.encoded_len() <= limit).then_some(b)
    };
    if let Some(b) = fits(remove_like(block, ty, &keep, true)) {
        return Ok(b);
    }
    let survivors = crate::encoding::decode(block, ty)?.filter(&keep);
    if let Some(b) = fits(crate::encoding::encode_cascading(&survivors, &EncodingConfig::maskable())) {
        return Ok(b);
    }
    if let Some(b) = fits(remove_like(block, ty, &keep, false)) {
        return Ok(b);
    }
    Err(Error::SizeExceeded { new: smallest, limit })
}

/// Structural removal: rebuilds `t` over the kept elements, reusing the same
/// scheme at every node.
fn remove_like(t: &EncodedBlock, ty: ValueType, keep: &[bool], merge: bool) -> Result<EncodedBlock> {
    if !keep.contains(&true) {
        return Ok(empty_block());
    }
    match t.scheme {
        SchemeId::ZigZag => {
            let child = remove_like(t.child(0)?, ValueType::UInt64, keep, merge)?;
            Ok(EncodedBlock::with_children(SchemeId::ZigZag, child.len(), Vec::new(), vec![child]))
        }
        SchemeId::Nullable => {
            let present = crate::encoding::nullable::unpack_bits(&t.payload, t.len())?;
            let dense_keep: Vec<bool> = present.iter().zip(keep).filter(|(p, _)| **p).map(|(_, k)| *k).collect();
            let new_present: Vec<bool> = present.iter().zip(keep).filter(|(_, k)| **k).map(|(p, _)| *p).collect();
            let child = if dense_keep.contains(&true) {
                remove_like(t.child(0)?, ty, &dense_keep, merge)?
            } else {
                empty_block()
            };
            Ok(EncodedBlock::with_children(
                SchemeId::Nullable,
                new_present.len(),
                crate::encoding::nullable::pack_bits(&new_present),
                vec![child],
            ))
        }
        SchemeId::Dictionary => {
            let codes = remove_like(t.child(1)?, ValueType::UInt64, keep, merge)?;
            Ok(EncodedBlock::with_children(
                SchemeId::Dictionary,
                codes.len(),
                Vec::new(),
                vec![t.child(0)?.clone(), codes],
            ))
        }
        _ => dispatch_type!(ty, T => remove_typed::<T>(t, keep, merge)),
    }
}

fn remove_typed<T: Element>(t: &EncodedBlock, keep: &[bool], merge: bool) -> Result<EncodedBlock> {
    match t.scheme {
        SchemeId::Rle => {
            let (run_values, counts) = rle::decode_runs::<T>(t)?;
            let mut run_keep = Vec::with_capacity(counts.len());
            let mut new_counts: Vec<u64> = Vec::with_capacity(counts.len());
            let mut last_kept: Option<usize> = None;
            let mut at = 0usize;
            for (r, c) in counts.iter().enumerate() {
                let live = keep[at..at + *c as usize].iter().filter(|k| **k).count() as u64;
                at += *c as usize;
                let joins = merge && live > 0 && last_kept.is_some_and(|l| run_values[l].same(&run_values[r]));
                if joins {
                    *new_counts.last_mut().unwrap() += live;
                    run_keep.push(false);
                } else {
                    run_keep.push(live > 0);
                    if live > 0 {
                        new_counts.push(live);
                    }
                }
                if live > 0 {
                    last_kept = Some(r);
                }
            }
            let values_child = remove_like(t.child(0)?, T::TYPE, &run_keep, merge)?;
            let counts_child = encode_like(t.child(1)?, &Values::UInt64(new_counts))?;
            let total = values_child.len();
            let n: usize = keep.iter().filter(|k| **k).count();
            debug_assert!(total <= n);
            Ok(EncodedBlock::with_children(SchemeId::Rle, n, Vec::new(), vec![values_child, counts_child]))
        }
        SchemeId::MainlyConstant => {
            let mut pos = 0;
            let base = T::read_plain(&t.payload, &mut pos)?;
            let positions = u64::from_values(crate::encoding::decode(t.child(0)?, ValueType::UInt64)?)?;
            let mut shift = vec![0u64; keep.len() + 1];
            for (i, k) in keep.iter().enumerate() {
                shift[i + 1] = shift[i] + (!*k) as u64;
            }
            let exc_keep: Vec<bool> = positions.iter().map(|p| keep[*p as usize]).collect();
            let new_positions: Vec<u64> =
                positions.iter().filter(|p| keep[**p as usize]).map(|p| p - shift[*p as usize]).collect();
            let n = keep.iter().filter(|k| **k).count();
            let exceptions = if exc_keep.contains(&true) {
                remove_like(t.child(1)?, T::TYPE, &exc_keep, merge)?
            } else {
                empty_block()
            };
            let positions_child = encode_like(t.child(0)?, &Values::UInt64(new_positions))?;
            Ok(EncodedBlock::with_children(
                SchemeId::MainlyConstant,
                n,
                {
                    let mut p = Vec::new();
                    base.write_plain(&mut p);
                    p
                },
                vec![positions_child, exceptions],
            ))
        }
        _ => {
            let values = T::from_values(crate::encoding::decode(t, T::TYPE)?)?;
            let kept: Vec<T> = values.into_iter().zip(keep).filter(|(_, k)| **k).map(|(v, _)| v).collect();
            encode_like(t, &T::into_values(kept))
        }
    }
}

/// Encodes a fresh sequence with the scheme of `t` on top (children
/// cascaded under the maskable configuration).
fn encode_like(t: &EncodedBlock, values: &Values) -> Result<EncodedBlock> {
    if values.is_empty() {
        return Ok(empty_block());
    }
    match (t.scheme, values) {
        (SchemeId::FixedBitWidth, Values::UInt64(v)) => Ok(bitpack::encode(v)),
        (SchemeId::Varint, Values::UInt64(v)) => Ok(varint::encode(v)),
        (SchemeId::ForDelta, Values::UInt64(v)) => Ok(for_delta::encode(v)),
        (SchemeId::ForDelta, Values::Int64(v)) => Ok(for_delta::encode(v)),
        (SchemeId::ZigZag, Values::Int64(v)) => {
            let mapped: Vec<u64> = v.iter().map(|x| zigzag::zigzag(*x)).collect();
            let child = encode_like(t.child(0)?, &Values::UInt64(mapped))?;
            Ok(EncodedBlock::with_children(SchemeId::ZigZag, v.len(), Vec::new(), vec![child]))
        }
        (SchemeId::Trivial, _) => dispatch_values!(values, v => Ok(trivial::encode(v)),
            nullable => crate::encoding::encode_cascading(values, &EncodingConfig::maskable())),
        (SchemeId::Constant, _) => dispatch_values!(values, v => match constant::encode_constant(v) {
            Ok(b) => Ok(b),
            Err(_) => Ok(trivial::encode(v)),
        }, nullable => crate::encoding::encode_cascading(values, &EncodingConfig::maskable())),
        (SchemeId::Chunked, _) => dispatch_values!(values, v => Ok(chunked::encode(v)),
            nullable => crate::encoding::encode_cascading(values, &EncodingConfig::maskable())),
        (scheme, _) => crate::encoding::encode_as(values, scheme, &EncodingConfig::maskable())
            .or_else(|_| crate::encoding::encode_cascading(values, &EncodingConfig::maskable())),
    }
}

/// Expands survivors back to the original positions, putting
/// [`MaybeMasked::Mask`] where `removed` is set.
pub fn reinsert_masks<T: Clone>(survivors: &[T], removed: &[bool]) -> Result<Vec<MaybeMasked<T>>> {
    let expected = removed.iter().filter(|r| !**r).count();
    if survivors.len() != expected {
        return Err(Error::LengthMismatch(format!("{} survivors for {expected} unremoved positions", survivors.len())));
    }
    let mut it = survivors.iter();
    Ok(removed
        .iter()
        .map(|r| if *r { MaybeMasked::Mask } else { MaybeMasked::Value(it.next().unwrap().clone()) })
        .collect())
}

/// Decodes a block produced by [`mask_rle`] (or any removal) with its
/// removal flags.
pub fn decode_with_masks<T: Element>(block: &EncodedBlock, removed: &[bool]) -> Result<Vec<MaybeMasked<T>>> {
    let survivors = T::from_values(crate::encoding::decode(block, T::TYPE)?)?;
    reinsert_masks(&survivors, removed)
}
