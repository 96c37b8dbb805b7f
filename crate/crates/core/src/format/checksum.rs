//! Three-level checksum tree: page leaves, row-group nodes, file root.
//!
//! `leaf = H(page bytes)`, `group = H(leaf_0 || leaf_1 || ...)` and
//! `root = H(group_0 || group_1 || ...)`, with every hash concatenated as
//! 8 little-endian bytes. `H` is XXH3-64.

use xxhash_rust::xxh3::xxh3_64;

use crate::error::{Error, Result};

pub fn hash_bytes(bytes: &[u8]) -> u64 {
    xxh3_64(bytes)
}

pub fn hash_words(words: &[u64]) -> u64 {
    let mut buf = Vec::with_capacity(words.len() * 8);
    for w in words {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    xxh3_64(&buf)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChecksumTree {
    pub page_hashes: Vec<u64>,
    pub group_hashes: Vec<u64>,
    pub root: u64,
    /// First page index of each group, plus the total page count at the end.
    group_starts: Vec<usize>,
}

fn starts(pages_per_group: &[u32], total: usize) -> Result<Vec<usize>> {
    let mut s = Vec::with_capacity(pages_per_group.len() + 1);
    let mut acc = 0usize;
    s.push(0);
    for p in pages_per_group {
        acc += *p as usize;
        s.push(acc);
    }
    if acc != total {
        return Err(Error::LengthMismatch(format!("groups cover {acc} pages but {total} page hashes were given")));
    }
    Ok(s)
}

impl ChecksumTree {
    /// Builds the inner levels from existing leaves.
    pub fn from_leaves(page_hashes: Vec<u64>, pages_per_group: &[u32]) -> Result<Self> {
        let group_starts = starts(pages_per_group, page_hashes.len())?;
        let group_hashes: Vec<u64> = group_starts.windows(2).map(|w| hash_words(&page_hashes[w[0]..w[1]])).collect();
        let root = hash_words(&group_hashes);
        Ok(ChecksumTree { page_hashes, group_hashes, root, group_starts })
    }

    /// Rebuilds a tree from stored words (pages, then groups, then root)
    /// without recomputing anything.
    pub fn from_stored(words: &[u64], pages_per_group: &[u32]) -> Result<Self> {
        let groups = pages_per_group.len();
        if words.len() < groups + 1 {
            return Err(Error::TruncatedFooter("checksum array too short".into()));
        }
        let pages = words.len() - groups - 1;
        let group_starts = starts(pages_per_group, pages)?;
        Ok(ChecksumTree {
            page_hashes: words[..pages].to_vec(),
            group_hashes: words[pages..pages + groups].to_vec(),
            root: words[pages + groups],
            group_starts,
        })
    }

    pub fn to_words(&self) -> Vec<u64> {
        let mut w = self.page_hashes.clone();
        w.extend_from_slice(&self.group_hashes);
        w.push(self.root);
        w
    }

    pub fn group_of(&self, page: usize) -> usize {
        self.group_starts.partition_point(|s| *s <= page) - 1
    }

    pub fn group_pages(&self, group: usize) -> std::ops::Range<usize> {
        self.group_starts[group]..self.group_starts[group + 1]
    }

    pub fn pages_per_group(&self) -> Vec<u32> {
        self.group_starts.windows(2).map(|w| (w[1] - w[0]) as u32).collect()
    }
}

/// Full recompute from page bytes.
pub fn compute_checksum_tree<P: AsRef<[u8]>>(pages: &[P], pages_per_group: &[u32]) -> Result<ChecksumTree> {
    let leaves = pages.iter().map(|p| hash_bytes(p.as_ref())).collect();
    ChecksumTree::from_leaves(leaves, pages_per_group)
}

/// Replaces one page: rehashes that leaf, its group from sibling leaf hashes,
/// and the root from the group hashes. No other page bytes are needed.
pub fn update_checksums_incremental(tree: &ChecksumTree, page: usize, new_page: &[u8]) -> Result<ChecksumTree> {
    if page >= tree.page_hashes.len() {
        return Err(Error::LengthMismatch(format!("page {page} outside tree of {} pages", tree.page_hashes.len())));
    }
    let mut t = tree.clone();
    t.page_hashes[page] = hash_bytes(new_page);
    let g = t.group_of(page);
    t.group_hashes[g] = hash_words(&t.page_hashes[t.group_pages(g)]);
    t.root = hash_words(&t.group_hashes);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_page_tree_is_nested_hash() {
        let page = b"some page bytes\0\0\0";
        let t = compute_checksum_tree(&[&page[..]], &[1]).unwrap();
        let leaf = hash_bytes(page);
        assert_eq!(t.page_hashes, vec![leaf]);
        assert_eq!(t.group_hashes, vec![hash_bytes(&leaf.to_le_bytes())]);
        assert_eq!(t.root, hash_bytes(&t.group_hashes[0].to_le_bytes()));
    }

    #[test]
    fn update_touches_one_path() {
        let pages: Vec<Vec<u8>> = (0..4u8).map(|i| vec![i; 32]).collect();
        let t = compute_checksum_tree(&pages, &[2, 2]).unwrap();
        let mut changed = pages.clone();
        changed[2][5] ^= 1;
        let u = update_checksums_incremental(&t, 2, &changed[2]).unwrap();
        assert_eq!(u, compute_checksum_tree(&changed, &[2, 2]).unwrap());
        assert_eq!(u.page_hashes[0..2], t.page_hashes[0..2]);
        assert_eq!(u.page_hashes[3], t.page_hashes[3]);
        assert_ne!(u.page_hashes[2], t.page_hashes[2]);
        assert_eq!(u.group_hashes[0], t.group_hashes[0]);
        assert_ne!(u.group_hashes[1], t.group_hashes[1]);
        assert_ne!(u.root, t.root);
        assert_eq!(update_checksums_incremental(&t, 1, &pages[1]).unwrap(), t);
        assert_eq!(ChecksumTree::from_stored(&t.to_words(), &[2, 2]).unwrap(), t);
        assert_eq!(t.group_of(0), 0);
        assert_eq!(t.group_of(3), 1);
    }
}
