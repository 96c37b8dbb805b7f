//! Data pages: `[live_len: u32][body][zero padding]`.
//!
//! Body by column kind:
//! - scalar: one encoded block;
//! - list: a lengths block (UInt64, nullable when some lists are null)
//!   followed by a block of the flattened elements;
//! - sparse: varint row count, presence bitmap, then a sparse-delta block over
//!   the non-null vectors.

use super::footer::{ColumnDescriptor, StoredQuant, SPARSE_PAGE_TAG};
use super::schema::{ColumnData, LogicalType};
use crate::encoding::{self, nullable, varint, Element, EncodedBlock, EncodingConfig, ValueType, Values};
use crate::error::{Error, Result};
use crate::quantization::{self, RehashTable};
use crate::sparse_delta::{self, SparseDeltaBlock, DEFAULT_MIN_OVERLAP};

pub const PAGE_HEADER_LEN: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PageKind {
    Scalar(ValueType),
    List(ValueType),
    Sparse,
}

pub fn page_kind(desc: &ColumnDescriptor) -> PageKind {
    let quantized = !matches!(desc.quant, StoredQuant::None);
    let float_ty = if quantized { ValueType::UInt64 } else { ValueType::Float32 };
    match desc.logical_type {
        LogicalType::Int64 if desc.quant == StoredQuant::IntRehash => PageKind::Scalar(ValueType::UInt64),
        LogicalType::Int64 => PageKind::Scalar(ValueType::Int64),
        LogicalType::Float32 => PageKind::Scalar(float_ty),
        LogicalType::Float64 => PageKind::Scalar(ValueType::Float64),
        LogicalType::Utf8 => PageKind::Scalar(ValueType::Bytes),
        LogicalType::ListInt64 if desc.is_sparse() => PageKind::Sparse,
        LogicalType::ListInt64 => PageKind::List(ValueType::Int64),
        LogicalType::ListFloat32 => PageKind::List(float_ty),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PageBody {
    Scalar(EncodedBlock),
    List { lengths: EncodedBlock, flat: EncodedBlock },
    Sparse { present: Vec<bool>, block: SparseDeltaBlock },
}

impl PageBody {
    pub fn type_tag(&self) -> u8 {
        match self {
            PageBody::Scalar(b) => b.scheme.tag(),
            PageBody::List { flat, .. } => flat.scheme.tag(),
            PageBody::Sparse { .. } => SPARSE_PAGE_TAG,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            PageBody::Scalar(b) => b.write_to(&mut out),
            PageBody::List { lengths, flat } => {
                lengths.write_to(&mut out);
                flat.write_to(&mut out);
            }
            PageBody::Sparse { present, block } => {
                varint::write_u64(present.len() as u64, &mut out);
                out.extend_from_slice(&nullable::pack_bits(present));
                out.extend_from_slice(&block.to_bytes());
            }
        }
        out
    }

    pub fn parse(body: &[u8], kind: PageKind) -> Result<PageBody> {
        let whole = |used: usize| {
            if used != body.len() {
                Err(Error::corrupt("trailing bytes in page body"))
            } else {
                Ok(())
            }
        };
        match kind {
            PageKind::Scalar(_) => {
                let (b, used) = EncodedBlock::parse(body)?;
                whole(used)?;
                Ok(PageBody::Scalar(b))
            }
            PageKind::List(_) => {
                let (lengths, a) = EncodedBlock::parse(body)?;
                let (flat, b) = EncodedBlock::parse(&body[a..])?;
                whole(a + b)?;
                Ok(PageBody::List { lengths, flat })
            }
            PageKind::Sparse => {
                let mut pos = 0;
                let n = varint::read_u64(body, &mut pos)? as usize;
                let bits = n.div_ceil(8);
                if body.len() < pos + bits {
                    return Err(Error::corrupt("sparse page bitmap truncated"));
                }
                let present = nullable::unpack_bits(&body[pos..pos + bits], n)?;
                pos += bits;
                let (block, used) = SparseDeltaBlock::parse(&body[pos..])?;
                whole(pos + used)?;
                Ok(PageBody::Sparse { present, block })
            }
        }
    }
}

/// Frames a body as a page of exactly `slot` bytes (or its natural size when
/// `slot` is `None`).
pub fn frame_page(body: &[u8], slot: Option<usize>) -> Result<Vec<u8>> {
    let natural = PAGE_HEADER_LEN + body.len();
    let size = slot.unwrap_or(natural);
    if natural > size {
        return Err(Error::SizeExceeded { new: natural, limit: size });
    }
    let mut page = Vec::with_capacity(size);
    page.extend_from_slice(&(body.len() as u32).to_le_bytes());
    page.extend_from_slice(body);
    page.resize(size, 0);
    Ok(page)
}

/// The live body bytes of a framed page.
pub fn page_body(page: &[u8]) -> Result<&[u8]> {
    if page.len() < PAGE_HEADER_LEN {
        return Err(Error::corrupt("page shorter than its header"));
    }
    let live = u32::from_le_bytes(page[..4].try_into().unwrap()) as usize;
    page.get(PAGE_HEADER_LEN..PAGE_HEADER_LEN + live)
        .ok_or_else(|| Error::corrupt(format!("live length {live} exceeds page size {}", page.len())))
}

/// Whole-column cells in their stored representation.
#[derive(Clone, Debug, PartialEq)]
pub enum Cells {
    U64(Vec<Option<u64>>),
    I64(Vec<Option<i64>>),
    F32(Vec<Option<f32>>),
    F64(Vec<Option<f64>>),
    Bytes(Vec<Option<Vec<u8>>>),
    ListU64(Vec<Option<Vec<u64>>>),
    ListI64(Vec<Option<Vec<i64>>>),
    ListF32(Vec<Option<Vec<f32>>>),
}

macro_rules! each_cells {
    ($c:expr, $v:ident => $body:expr) => {
        match $c {
            Cells::U64($v) => $body,
            Cells::I64($v) => $body,
            Cells::F32($v) => $body,
            Cells::F64($v) => $body,
            Cells::Bytes($v) => $body,
            Cells::ListU64($v) => $body,
            Cells::ListI64($v) => $body,
            Cells::ListF32($v) => $body,
        }
    };
}

fn narrow_all(v: &[Option<f32>], q: quantization::QuantSpec) -> Vec<Option<u64>> {
    let fmt = q.float_format().expect("float quantization");
    v.iter().map(|x| x.map(|x| quantization::narrow(x, fmt) as u64)).collect()
}

impl Cells {
    pub fn len(&self) -> usize {
        each_cells!(self, v => v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Converts a logical column into the stored form for `desc`. Rehashed
    /// columns use `table` (built over the whole column by the writer).
    pub fn from_column(data: &ColumnData, desc: &ColumnDescriptor, table: Option<&RehashTable>) -> Result<Cells> {
        Ok(match (data, desc.quant) {
            (ColumnData::Int64(v), StoredQuant::IntRehash) => {
                let table = table.ok_or_else(|| Error::InvalidConfig("rehash table missing".into()))?;
                let index: std::collections::HashMap<i64, u64> =
                    table.values.iter().enumerate().map(|(i, x)| (*x, i as u64)).collect();
                Cells::U64(v.iter().map(|x| x.map(|x| index[&x])).collect())
            }
            (ColumnData::Int64(v), _) => Cells::I64(v.clone()),
            (ColumnData::Float32(v), StoredQuant::Float(q)) => Cells::U64(narrow_all(v, q)),
            (ColumnData::Float32(v), StoredQuant::DualHi) => {
                Cells::U64(v.iter().map(|x| x.map(|x| (x.to_bits() >> 16) as u64)).collect())
            }
            (ColumnData::Float32(v), StoredQuant::DualLo) => {
                Cells::U64(v.iter().map(|x| x.map(|x| (x.to_bits() & 0xFFFF) as u64)).collect())
            }
            (ColumnData::Float32(v), _) => Cells::F32(v.clone()),
            (ColumnData::Float64(v), _) => Cells::F64(v.clone()),
            (ColumnData::Utf8(v), _) => {
                Cells::Bytes(v.iter().map(|s| s.as_ref().map(|s| s.as_bytes().to_vec())).collect())
            }
            (ColumnData::ListInt64(v), _) => Cells::ListI64(v.clone()),
            (ColumnData::ListFloat32(v), StoredQuant::Float(q)) => {
                let fmt = q.float_format().expect("float quantization");
                Cells::ListU64(
                    v.iter()
                        .map(|l| l.as_ref().map(|l| l.iter().map(|x| quantization::narrow(*x, fmt) as u64).collect()))
                        .collect(),
                )
            }
            (ColumnData::ListFloat32(v), _) => Cells::ListF32(v.clone()),
        })
    }

    pub fn slice(&self, start: usize, end: usize) -> Cells {
        match self {
            Cells::U64(v) => Cells::U64(v[start..end].to_vec()),
            Cells::I64(v) => Cells::I64(v[start..end].to_vec()),
            Cells::F32(v) => Cells::F32(v[start..end].to_vec()),
            Cells::F64(v) => Cells::F64(v[start..end].to_vec()),
            Cells::Bytes(v) => Cells::Bytes(v[start..end].to_vec()),
            Cells::ListU64(v) => Cells::ListU64(v[start..end].to_vec()),
            Cells::ListI64(v) => Cells::ListI64(v[start..end].to_vec()),
            Cells::ListF32(v) => Cells::ListF32(v[start..end].to_vec()),
        }
    }
}

fn list_parts<T: encoding::Element>(v: &[Option<Vec<T>>]) -> (Values, Values) {
    let lengths = Values::from_options(v.iter().map(|l| l.as_ref().map(|l| l.len() as u64)).collect());
    let flat: Vec<T> = v.iter().flatten().flat_map(|l| l.iter().cloned()).collect();
    (lengths, T::into_values(flat))
}

fn encode_nonempty(values: &Values, cfg: &EncodingConfig) -> Result<EncodedBlock> {
    if values.is_empty() {
        // An empty element column still needs a block.
        return encoding::encode_as(values, encoding::SchemeId::Trivial, cfg);
    }
    encoding::encode_cascading(values, cfg)
}

/// Encodes one page worth of stored cells.
pub fn encode_page(cells: &Cells, kind: PageKind, cfg: &EncodingConfig) -> Result<PageBody> {
    let scalar = |values: Values| Ok(PageBody::Scalar(encode_nonempty(&values, cfg)?));
    let list = |(lengths, flat): (Values, Values)| {
        Ok(PageBody::List { lengths: encode_nonempty(&lengths, cfg)?, flat: encode_nonempty(&flat, cfg)? })
    };
    match (cells, kind) {
        (Cells::ListI64(v), PageKind::Sparse) => {
            let present: Vec<bool> = v.iter().map(Option::is_some).collect();
            let vectors: Vec<Vec<i64>> = v.iter().flatten().cloned().collect();
            let block = if vectors.is_empty() {
                SparseDeltaBlock::default()
            } else {
                sparse_delta::encode_sequence_column(&vectors, DEFAULT_MIN_OVERLAP)?
            };
            Ok(PageBody::Sparse { present, block })
        }
        (Cells::U64(v), _) => scalar(Values::from_options(v.clone())),
        (Cells::I64(v), _) => scalar(Values::from_options(v.clone())),
        (Cells::F32(v), _) => scalar(Values::from_options(v.clone())),
        (Cells::F64(v), _) => scalar(Values::from_options(v.clone())),
        (Cells::Bytes(v), _) => scalar(Values::from_options(v.clone())),
        (Cells::ListU64(v), _) => list(list_parts(v)),
        (Cells::ListI64(v), _) => list(list_parts(v)),
        (Cells::ListF32(v), _) => list(list_parts(v)),
    }
}

fn options_of<T: encoding::Element>(values: Values, rows: usize) -> Result<Vec<Option<T>>> {
    let out: Vec<Option<T>> = match values {
        Values::Nullable { present, values } => {
            let mut dense = T::from_values(*values)?.into_iter();
            present.iter().map(|p| if *p { dense.next() } else { None }).collect()
        }
        other => T::from_values(other)?.into_iter().map(Some).collect(),
    };
    if out.len() != rows {
        return Err(Error::corrupt(format!("page decoded {} values, expected {rows}", out.len())));
    }
    Ok(out)
}

fn lists_of<T: encoding::Element>(lengths: Vec<Option<u64>>, flat: Vec<T>) -> Result<Vec<Option<Vec<T>>>> {
    let mut it = flat.into_iter();
    let mut out = Vec::with_capacity(lengths.len());
    for l in lengths {
        out.push(match l {
            Some(n) => {
                let v: Vec<T> = it.by_ref().take(n as usize).collect();
                if v.len() != n as usize {
                    return Err(Error::corrupt("list lengths exceed flattened elements"));
                }
                Some(v)
            }
            None => None,
        });
    }
    if it.next().is_some() {
        return Err(Error::corrupt("flattened elements left over after lists"));
    }
    Ok(out)
}

/// Decodes a page body into `rows` stored cells.
pub fn decode_page(body: &PageBody, kind: PageKind, rows: usize) -> Result<Cells> {
    match (body, kind) {
        (PageBody::Scalar(b), PageKind::Scalar(ty)) => {
            let values = encoding::decode(b, ty)?;
            Ok(match ty {
                ValueType::UInt64 => Cells::U64(options_of(values, rows)?),
                ValueType::Int64 => Cells::I64(options_of(values, rows)?),
                ValueType::Float32 => Cells::F32(options_of(values, rows)?),
                ValueType::Float64 => Cells::F64(options_of(values, rows)?),
                ValueType::Bytes => Cells::Bytes(options_of(values, rows)?),
            })
        }
        (PageBody::List { lengths, flat }, PageKind::List(ty)) => {
            let lengths: Vec<Option<u64>> = options_of(encoding::decode(lengths, ValueType::UInt64)?, rows)?;
            let flat = encoding::decode(flat, ty)?;
            Ok(match ty {
                ValueType::UInt64 => Cells::ListU64(lists_of(lengths, u64::from_values(flat)?)?),
                ValueType::Int64 => Cells::ListI64(lists_of(lengths, i64::from_values(flat)?)?),
                ValueType::Float32 => Cells::ListF32(lists_of(lengths, f32::from_values(flat)?)?),
                other => return Err(Error::corrupt(format!("list of {other} is not a stored type"))),
            })
        }
        (PageBody::Sparse { present, block }, PageKind::Sparse) => {
            if present.len() != rows {
                return Err(Error::corrupt("sparse page row count mismatch"));
            }
            let mut vectors = sparse_delta::decode_sequence_column(block)?.into_iter();
            let out: Vec<Option<Vec<i64>>> = present.iter().map(|p| if *p { vectors.next() } else { None }).collect();
            if out.iter().filter(|v| v.is_some()).count() != present.iter().filter(|p| **p).count()
                || vectors.next().is_some()
            {
                return Err(Error::corrupt("sparse page vector count mismatch"));
            }
            Ok(Cells::ListI64(out))
        }
        _ => Err(Error::corrupt("page body does not match column kind")),
    }
}

/// Inserts `None` cells at the positions flagged in `removed`, where the
/// decoded cells hold only the surviving rows.
pub fn reinsert_removed(cells: Cells, removed: &[bool]) -> Result<Cells> {
    fn spread<T>(v: Vec<Option<T>>, removed: &[bool]) -> Result<Vec<Option<T>>> {
        let survivors = removed.iter().filter(|r| !**r).count();
        if v.len() != survivors {
            return Err(Error::corrupt(format!(
                "page holds {} values but its removal bits leave {survivors}",
                v.len()
            )));
        }
        let mut it = v.into_iter();
        Ok(removed.iter().map(|r| if *r { None } else { it.next().flatten() }).collect())
    }
    Ok(match cells {
        Cells::U64(v) => Cells::U64(spread(v, removed)?),
        Cells::I64(v) => Cells::I64(spread(v, removed)?),
        Cells::F32(v) => Cells::F32(spread(v, removed)?),
        Cells::F64(v) => Cells::F64(spread(v, removed)?),
        Cells::Bytes(v) => Cells::Bytes(spread(v, removed)?),
        Cells::ListU64(v) => Cells::ListU64(spread(v, removed)?),
        Cells::ListI64(v) => Cells::ListI64(spread(v, removed)?),
        Cells::ListF32(v) => Cells::ListF32(spread(v, removed)?),
    })
}

impl Cells {
    pub fn append(&mut self, other: Cells) -> Result<()> {
        match (self, other) {
            (Cells::U64(a), Cells::U64(b)) => a.extend(b),
            (Cells::I64(a), Cells::I64(b)) => a.extend(b),
            (Cells::F32(a), Cells::F32(b)) => a.extend(b),
            (Cells::F64(a), Cells::F64(b)) => a.extend(b),
            (Cells::Bytes(a), Cells::Bytes(b)) => a.extend(b),
            (Cells::ListU64(a), Cells::ListU64(b)) => a.extend(b),
            (Cells::ListI64(a), Cells::ListI64(b)) => a.extend(b),
            (Cells::ListF32(a), Cells::ListF32(b)) => a.extend(b),
            _ => return Err(Error::corrupt("mixed stored cell types in one column")),
        }
        Ok(())
    }

    pub fn empty_like(kind: PageKind) -> Cells {
        match kind {
            PageKind::Scalar(ValueType::UInt64) => Cells::U64(Vec::new()),
            PageKind::Scalar(ValueType::Int64) => Cells::I64(Vec::new()),
            PageKind::Scalar(ValueType::Float32) => Cells::F32(Vec::new()),
            PageKind::Scalar(ValueType::Float64) => Cells::F64(Vec::new()),
            PageKind::Scalar(ValueType::Bytes) => Cells::Bytes(Vec::new()),
            PageKind::List(ValueType::UInt64) => Cells::ListU64(Vec::new()),
            PageKind::List(ValueType::Float32) => Cells::ListF32(Vec::new()),
            PageKind::List(_) | PageKind::Sparse => Cells::ListI64(Vec::new()),
        }
    }

    pub fn filter(&self, keep: &[bool]) -> Cells {
        fn f<T: Clone>(v: &[T], keep: &[bool]) -> Vec<T> {
            v.iter().zip(keep).filter(|(_, k)| **k).map(|(x, _)| x.clone()).collect()
        }
        match self {
            Cells::U64(v) => Cells::U64(f(v, keep)),
            Cells::I64(v) => Cells::I64(f(v, keep)),
            Cells::F32(v) => Cells::F32(f(v, keep)),
            Cells::F64(v) => Cells::F64(f(v, keep)),
            Cells::Bytes(v) => Cells::Bytes(f(v, keep)),
            Cells::ListU64(v) => Cells::ListU64(f(v, keep)),
            Cells::ListI64(v) => Cells::ListI64(f(v, keep)),
            Cells::ListF32(v) => Cells::ListF32(f(v, keep)),
        }
    }

    /// Back to logical column data. `lo` carries the low halves of a dual
    /// split column whose high halves are `self`.
    pub fn into_column(self, desc: &ColumnDescriptor, lo: Option<Cells>) -> Result<ColumnData> {
        let wrong = || Error::corrupt(format!("stored cells do not match column {}", desc.name));
        Ok(match (desc.logical_type, desc.quant, self) {
            (LogicalType::Int64, StoredQuant::IntRehash, Cells::U64(v)) => {
                let table = RehashTable::from_bytes(&desc.aux)?;
                let mut out = Vec::with_capacity(v.len());
                for c in v {
                    out.push(match c {
                        Some(c) => Some(
                            *table
                                .values
                                .get(c as usize)
                                .ok_or_else(|| Error::corrupt(format!("rehash code {c} outside table")))?,
                        ),
                        None => None,
                    });
                }
                ColumnData::Int64(out)
            }
            (LogicalType::Int64, _, Cells::I64(v)) => ColumnData::Int64(v),
            (LogicalType::Float32, StoredQuant::Float(q), Cells::U64(v)) => {
                let fmt = q.float_format().ok_or_else(wrong)?;
                ColumnData::Float32(v.into_iter().map(|x| x.map(|x| quantization::widen(x as u32, fmt))).collect())
            }
            (LogicalType::Float32, StoredQuant::DualHi, Cells::U64(hi)) => {
                let Some(Cells::U64(lo)) = lo else { return Err(wrong()) };
                if lo.len() != hi.len() {
                    return Err(wrong());
                }
                ColumnData::Float32(
                    hi.into_iter()
                        .zip(lo)
                        .map(|(h, l)| match (h, l) {
                            (Some(h), Some(l)) => Some(f32::from_bits(((h as u32) << 16) | (l as u32 & 0xFFFF))),
                            _ => None,
                        })
                        .collect(),
                )
            }
            (LogicalType::Float32, StoredQuant::None, Cells::F32(v)) => ColumnData::Float32(v),
            (LogicalType::Float64, _, Cells::F64(v)) => ColumnData::Float64(v),
            (LogicalType::Utf8, _, Cells::Bytes(v)) => {
                let mut out = Vec::with_capacity(v.len());
                for b in v {
                    out.push(match b {
                        Some(b) => Some(
                            String::from_utf8(b).unwrap_or_else(|e| String::from_utf8_lossy(e.as_bytes()).into_owned()),
                        ),
                        None => None,
                    });
                }
                ColumnData::Utf8(out)
            }
            (LogicalType::ListInt64, _, Cells::ListI64(v)) => ColumnData::ListInt64(v),
            (LogicalType::ListFloat32, StoredQuant::Float(q), Cells::ListU64(v)) => {
                let fmt = q.float_format().ok_or_else(wrong)?;
                ColumnData::ListFloat32(
                    v.into_iter()
                        .map(|l| l.map(|l| l.into_iter().map(|x| quantization::widen(x as u32, fmt)).collect()))
                        .collect(),
                )
            }
            (LogicalType::ListFloat32, StoredQuant::None, Cells::ListF32(v)) => ColumnData::ListFloat32(v),
            _ => return Err(wrong()),
        })
    }
}
