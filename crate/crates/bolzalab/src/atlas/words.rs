use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::mobius::DiskIsometry;
use super::octagon::FundamentalOctagon;
use crate::error::{Error, Result};

/// Free homotopy class representative: a word in the eight side-pairing
/// generators (letter `k` means `gen[k]`, and `gen[k]⁻¹ = gen[(k+4)%8]`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupWord {
    letters: Vec<u8>,
    cyclically_reduced: bool,
}

fn inv(k: u8) -> u8 {
    (k + 4) % 8
}

impl GroupWord {
    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if letters.iter().any(|&k| k > 7) {
            return Err(Error::input("generator index out of range 0..8"));
        }
        let reduced = is_cyclically_reduced(&letters);
        Ok(GroupWord {
            letters,
            cyclically_reduced: reduced,
        })
    }

    pub fn empty() -> Self {
        GroupWord {
            letters: Vec::new(),
            cyclically_reduced: true,
        }
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.cyclically_reduced
    }

    pub fn inverse(&self) -> GroupWord {
        let letters: Vec<u8> = self.letters.iter().rev().map(|&k| inv(k)).collect();
        let reduced = is_cyclically_reduced(&letters);
        GroupWord {
            letters,
            cyclically_reduced: reduced,
        }
    }

    /// Concatenation (no reduction applied).
    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        let reduced = is_cyclically_reduced(&letters);
        GroupWord {
            letters,
            cyclically_reduced: reduced,
        }
    }

    pub fn power(&self, n: usize) -> GroupWord {
        let mut letters = Vec::with_capacity(self.letters.len() * n);
        for _ in 0..n {
            letters.extend_from_slice(&self.letters);
        }
        let reduced = is_cyclically_reduced(&letters);
        GroupWord {
            letters,
            cyclically_reduced: reduced,
        }
    }

    /// Remove free cancellations, including across the wraparound.
    pub fn cyclically_reduce(&self) -> GroupWord {
        let letters = free_cyclic_reduce(&self.letters);
        GroupWord {
            cyclically_reduced: true,
            letters,
        }
    }
}

pub fn is_cyclically_reduced(w: &[u8]) -> bool {
    let n = w.len();
    if n == 0 {
        return true;
    }
    (0..n).all(|i| w[(i + 1) % n] != inv(w[i]))
}

fn free_cyclic_reduce(w: &[u8]) -> Vec<u8> {
    let mut v: Vec<u8> = Vec::with_capacity(w.len());
    for &k in w {
        if v.last() == Some(&inv(k)) {
            v.pop();
        } else {
            v.push(k);
        }
    }
    while v.len() >= 2 && *v.last().unwrap() == inv(v[0]) {
        v.pop();
        v.remove(0);
    }
    v
}

/// Compose the word's generators in order; the empty word is the identity.
pub fn word_to_isometry(w: &GroupWord, atlas: &FundamentalOctagon) -> DiskIsometry {
    let mut m = DiskIsometry::identity();
    for &k in w.letters() {
        m = m.compose(atlas.generator(k));
    }
    m
}

/// σ-length of the closed geodesic in the class of `m`; zero for
/// elliptic/parabolic/identity elements.
pub fn translation_length(m: &DiskIsometry) -> f64 {
    m.translation_length()
}

// ---------------------------------------------------------------------------
// Conjugacy-class canonical forms.
//
// The surface group is a small-cancellation quotient of the free group on the
// eight letters by the octagon relation (length 8, every piece of length 1).
// Cyclic words shorter than half the relation are conjugate iff related by
// rotation; words containing more than half of a relation cycle shorten by a
// Dehn move; words containing exactly half are identified with the swap by
// the complementary half. The canonical form below closes over all three.
// ---------------------------------------------------------------------------

struct RelatorTables {
    /// piece of length m -> replacement (inverse of the complement)
    by_len: Vec<HashMap<Vec<u8>, Vec<u8>>>,
}

fn relator_tables(relation: &[u8]) -> RelatorTables {
    let mut rots: Vec<Vec<u8>> = Vec::new();
    let inv_rel: Vec<u8> = relation.iter().rev().map(|&k| inv(k)).collect();
    for base in [relation.to_vec(), inv_rel] {
        for i in 0..base.len() {
            let mut r = base[i..].to_vec();
            r.extend_from_slice(&base[..i]);
            if !rots.contains(&r) {
                rots.push(r);
            }
        }
    }
    let n = relation.len();
    let mut by_len = vec![HashMap::new(); n + 1];
    for m in (n / 2)..=n {
        for r in &rots {
            let piece = r[..m].to_vec();
            let rest = &r[m..];
            let replacement: Vec<u8> = rest.iter().rev().map(|&k| inv(k)).collect();
            by_len[m].insert(piece, replacement);
        }
    }
    RelatorTables { by_len }
}

fn find_piece(w: &[u8], tables: &RelatorTables, m: usize) -> Option<Vec<u8>> {
    let n = w.len();
    if n < m {
        return None;
    }
    let table = &tables.by_len[m];
    let mut ww = w.to_vec();
    ww.extend_from_slice(w);
    for i in 0..n {
        let piece = &ww[i..i + m];
        if let Some(rep) = table.get(piece) {
            let mut out = rep.clone();
            out.extend_from_slice(&ww[i + m..i + n]);
            return Some(free_cyclic_reduce(&out));
        }
    }
    None
}

fn dehn_reduce(w: &[u8], tables: &RelatorTables) -> Vec<u8> {
    let mut w = free_cyclic_reduce(w);
    'outer: loop {
        for m in (5..=8).rev() {
            if let Some(next) = find_piece(&w, tables, m) {
                w = next;
                continue 'outer;
            }
        }
        return w;
    }
}

fn min_rotation_or_inverse(w: &[u8]) -> Vec<u8> {
    let mut best: Option<Vec<u8>> = None;
    let iw: Vec<u8> = w.iter().rev().map(|&k| inv(k)).collect();
    for base in [w, iw.as_slice()] {
        let n = base.len();
        if n == 0 {
            return Vec::new();
        }
        let mut d = base.to_vec();
        d.extend_from_slice(base);
        for i in 0..n {
            let cand = d[i..i + n].to_vec();
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or_default()
}

fn canonical_class(w: &[u8], tables: &RelatorTables) -> Vec<u8> {
    let w = dehn_reduce(w, tables);
    let start = min_rotation_or_inverse(&w);
    // close under half-relation swaps (equal-length rewrites)
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut stack = vec![start];
    let mut best: Option<Vec<u8>> = None;
    while let Some(x) = stack.pop() {
        if !seen.insert(x.clone()) {
            continue;
        }
        if best.as_ref().map_or(true, |b| x < *b) {
            best = Some(x.clone());
        }
        let n = x.len();
        if n < 4 {
            continue;
        }
        let table = &tables.by_len[4];
        let mut xx = x.clone();
        xx.extend_from_slice(&x);
        for i in 0..n {
            let piece = &xx[i..i + 4];
            if let Some(rep) = table.get(piece) {
                let mut cand = rep.clone();
                cand.extend_from_slice(&xx[i + 4..i + n]);
                let cand = min_rotation_or_inverse(&free_cyclic_reduce(&cand));
                if !seen.contains(&cand) {
                    stack.push(cand);
                }
            }
        }
    }
    best.unwrap_or_default()
}

/// Dehn-reduce a cyclic word (shorten every over-half relator piece).
#[doc(hidden)]
pub fn dehn_reduce_word(w: &GroupWord, atlas: &FundamentalOctagon) -> GroupWord {
    let tables = relator_tables(&atlas.relation);
    let r = dehn_reduce(w.letters(), &tables);
    GroupWord {
        cyclically_reduced: is_cyclically_reduced(&r),
        letters: r,
    }
}

/// Canonical representative of the conjugacy class of `w`, up to inversion.
pub fn canonical_representative(w: &GroupWord, atlas: &FundamentalOctagon) -> GroupWord {
    let tables = relator_tables(&atlas.relation);
    let c = canonical_class(w.letters(), &tables);
    GroupWord {
        cyclically_reduced: is_cyclically_reduced(&c),
        letters: c,
    }
}

/// One cyclically-reduced representative per conjugacy class up to inversion,
/// over all words of length ≤ `max_len`, in deterministic (length, lex) order.
pub fn enumerate_classes(atlas: &FundamentalOctagon, max_len: usize) -> Result<Vec<GroupWord>> {
    if max_len < 1 {
        return Err(Error::input("max_len must be at least 1"));
    }
    let tables = relator_tables(&atlas.relation);
    let mut classes: HashSet<Vec<u8>> = HashSet::new();
    let mut word = Vec::with_capacity(max_len);
    enumerate_rec(&mut word, max_len, &tables, &mut |c| {
        classes.insert(c);
    });
    let mut out: Vec<Vec<u8>> = classes.into_iter().filter(|c| !c.is_empty()).collect();
    out.sort_by(|a, b| (a.len(), &a[..]).cmp(&(b.len(), &b[..])));
    Ok(out
        .into_iter()
        .map(|letters| GroupWord {
            cyclically_reduced: is_cyclically_reduced(&letters),
            letters,
        })
        .collect())
}

fn enumerate_rec(
    word: &mut Vec<u8>,
    max_len: usize,
    tables: &RelatorTables,
    sink: &mut impl FnMut(Vec<u8>),
) {
    if !word.is_empty() && word[0] != inv(*word.last().unwrap()) {
        sink(canonical_class(word, tables));
    }
    if word.len() == max_len {
        return;
    }
    for k in 0..8u8 {
        if let Some(&last) = word.last() {
            if k == inv(last) {
                continue;
            }
        }
        word.push(k);
        enumerate_rec(word, max_len, tables, sink);
        word.pop();
    }
}

/// Classes together with their σ-translation lengths, filtered to
/// `length ≤ max_sigma_length`, enumerated over words of length ≤ `max_len`.
pub fn enumerate_classes_with_lengths(
    atlas: &FundamentalOctagon,
    max_len: usize,
    max_sigma_length: f64,
) -> Result<Vec<(GroupWord, f64)>> {
    let classes = enumerate_classes_filtered(atlas, max_len, max_sigma_length)?;
    Ok(classes)
}

/// Like `enumerate_classes`, but prunes by translation length during the
/// search so that word lengths well past the interesting σ-length stay cheap.
fn enumerate_classes_filtered(
    atlas: &FundamentalOctagon,
    max_len: usize,
    max_sigma_length: f64,
) -> Result<Vec<(GroupWord, f64)>> {
    if max_len < 1 {
        return Err(Error::input("max_len must be at least 1"));
    }
    let tables = relator_tables(&atlas.relation);
    let mut classes: HashMap<Vec<u8>, f64> = HashMap::new();
    // DFS with incremental isometry products
    let mut stack_words: Vec<u8> = Vec::with_capacity(max_len);
    let mut prods: Vec<DiskIsometry> = Vec::with_capacity(max_len + 1);
    prods.push(DiskIsometry::identity());
    fn rec(
        word: &mut Vec<u8>,
        prods: &mut Vec<DiskIsometry>,
        atlas: &FundamentalOctagon,
        max_len: usize,
        max_l: f64,
        tables: &RelatorTables,
        classes: &mut HashMap<Vec<u8>, f64>,
    ) {
        if !word.is_empty() && word[0] != inv(*word.last().unwrap()) {
            let l = prods.last().unwrap().translation_length();
            if l > 1e-9 && l <= max_l {
                let c = canonical_class(word, tables);
                classes.entry(c).or_insert(l);
            }
        }
        if word.len() == max_len {
            return;
        }
        for k in 0..8u8 {
            if let Some(&last) = word.last() {
                if k == inv(last) {
                    continue;
                }
            }
            word.push(k);
            prods.push(prods.last().unwrap().compose(atlas.generator(k)));
            rec(word, prods, atlas, max_len, max_l, tables, classes);
            prods.pop();
            word.pop();
        }
    }
    rec(
        &mut stack_words,
        &mut prods,
        atlas,
        max_len,
        max_sigma_length,
        &tables,
        &mut classes,
    );
    let mut out: Vec<(Vec<u8>, f64)> = classes.into_iter().collect();
    out.sort_by(|a, b| (a.0.len(), &a.0[..]).cmp(&(b.0.len(), &b.0[..])));
    Ok(out
        .into_iter()
        .map(|(letters, l)| {
            (
                GroupWord {
                    cyclically_reduced: is_cyclically_reduced(&letters),
                    letters,
                },
                l,
            )
        })
        .collect())
}

/// Minimum σ-translation length over cyclically reduced words of each exact
/// length `1..=max_len`. Used for systole/counting certificates.
pub fn min_translation_length_by_word_length(
    atlas: &FundamentalOctagon,
    max_len: usize,
) -> Vec<f64> {
    let mut mins = vec![f64::INFINITY; max_len + 1];
    let mut word: Vec<u8> = Vec::with_capacity(max_len);
    let mut prods: Vec<DiskIsometry> = vec![DiskIsometry::identity()];
    fn rec(
        word: &mut Vec<u8>,
        prods: &mut Vec<DiskIsometry>,
        atlas: &FundamentalOctagon,
        max_len: usize,
        mins: &mut [f64],
    ) {
        if !word.is_empty() && word[0] != inv(*word.last().unwrap()) {
            let l = prods.last().unwrap().translation_length();
            if l > 1e-9 {
                let n = word.len();
                if l < mins[n] {
                    mins[n] = l;
                }
            }
        }
        if word.len() == max_len {
            return;
        }
        for k in 0..8u8 {
            if let Some(&last) = word.last() {
                if k == inv(last) {
                    continue;
                }
            }
            word.push(k);
            prods.push(prods.last().unwrap().compose(atlas.generator(k)));
            rec(word, prods, atlas, max_len, mins);
            prods.pop();
            word.pop();
        }
    }
    rec(&mut word, &mut prods, atlas, max_len, &mut mins);
    mins
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::octagon::build_bolza_atlas;

    #[test]
    fn empty_word_is_identity() {
        let a = build_bolza_atlas();
        let m = word_to_isometry(&GroupWord::empty(), &a);
        assert!(m.is_identity(1e-14));
    }

    #[test]
    fn word_times_inverse_is_identity() {
        let a = build_bolza_atlas();
        let w = GroupWord::new(vec![0, 1, 6, 2]).unwrap();
        let m = word_to_isometry(&w.concat(&w.inverse()), &a);
        assert!(m.is_identity(1e-10));
    }

    #[test]
    fn invalid_index_rejected() {
        assert!(GroupWord::new(vec![0, 9]).is_err());
    }

    #[test]
    fn generator_trace_matches_translation_length() {
        let a = build_bolza_atlas();
        let w = GroupWord::new(vec![3]).unwrap();
        let m = word_to_isometry(&w, &a);
        let ell = 2.0 * (1.0 + 2.0_f64.sqrt()).acosh();
        assert!((m.trace_abs() - 2.0 * (ell / 2.0).cosh()).abs() < 1e-10);
        assert!((translation_length(&m) - 3.057141838961996).abs() < 1e-6);
    }

    #[test]
    fn conjugation_preserves_translation_length() {
        let a = build_bolza_atlas();
        let w = GroupWord::new(vec![0, 1]).unwrap();
        let v = GroupWord::new(vec![2, 5, 3]).unwrap();
        let m = word_to_isometry(&w, &a);
        let conj = word_to_isometry(&v.concat(&w).concat(&v.inverse()), &a);
        assert!((translation_length(&m) - translation_length(&conj)).abs() < 1e-10);
    }

    #[test]
    fn translation_length_is_cyclic_invariant() {
        let a = build_bolza_atlas();
        let letters = vec![0u8, 1, 6, 2, 3];
        let base = translation_length(&word_to_isometry(
            &GroupWord::new(letters.clone()).unwrap(),
            &a,
        ));
        for i in 1..letters.len() {
            let mut rot = letters[i..].to_vec();
            rot.extend_from_slice(&letters[..i]);
            let l = translation_length(&word_to_isometry(&GroupWord::new(rot).unwrap(), &a));
            assert!((l - base).abs() < 1e-10);
        }
    }

    #[test]
    fn cyclic_reduction_no_adjacent_inverses() {
        // 0,4 cancel; then the leading 1 and trailing 5 cancel across the wraparound
        let w = GroupWord::new(vec![0, 4, 1, 2, 5]).unwrap();
        let r = w.cyclically_reduce();
        assert!(r.is_cyclically_reduced());
        assert_eq!(r.letters(), &[2]);
        // a fully cancelling word reduces to the empty word
        let t = GroupWord::new(vec![0, 4, 1, 2, 6, 5]).unwrap();
        assert!(t.cyclically_reduce().is_empty());
    }

    #[test]
    fn enumerate_len1_gives_four_classes() {
        let a = build_bolza_atlas();
        let cl = enumerate_classes(&a, 1).unwrap();
        assert_eq!(cl.len(), 4);
        for w in &cl {
            assert!(w.is_cyclically_reduced());
            assert_eq!(w.len(), 1);
        }
    }

    #[test]
    fn enumerate_counts_small_lengths() {
        // frozen from the exact enumeration (independently cross-checked by
        // the conjugacy-search oracle in tests/atlas_oracle.rs)
        let a = build_bolza_atlas();
        assert_eq!(enumerate_classes(&a, 2).unwrap().len(), 20);
        assert_eq!(enumerate_classes(&a, 3).unwrap().len(), 80);
        assert_eq!(enumerate_classes(&a, 4).unwrap().len(), 386);
    }

    #[test]
    fn enumerated_words_are_cyclically_reduced_and_sorted() {
        let a = build_bolza_atlas();
        let cl = enumerate_classes(&a, 3).unwrap();
        for w in &cl {
            assert!(w.is_cyclically_reduced());
        }
        let mut sorted = cl.clone();
        sorted.sort_by(|x, y| (x.len(), x.letters().to_vec()).cmp(&(y.len(), y.letters().to_vec())));
        assert_eq!(cl, sorted);
    }

    #[test]
    fn length_filtered_enumeration_matches() {
        let a = build_bolza_atlas();
        let all = enumerate_classes(&a, 4).unwrap();
        let filtered = enumerate_classes_with_lengths(&a, 4, 1e9).unwrap();
        assert_eq!(all.len(), filtered.len());
        // spectrum head: 16 classes at the systole length
        let sys = 3.057141838961996;
        let n_sys = filtered.iter().filter(|(_, l)| (l - sys).abs() < 1e-6).count();
        assert_eq!(n_sys, 16);
    }

    #[test]
    fn min_length_table() {
        let a = build_bolza_atlas();
        let mins = min_translation_length_by_word_length(&a, 5);
        assert!((mins[1] - 3.0571418).abs() < 1e-6);
        assert!((mins[2] - 3.0571418).abs() < 1e-6);
        assert!((mins[3] - 3.0571418).abs() < 1e-6);
        assert!((mins[4] - 4.8969054).abs() < 1e-6);
        assert!((mins[5] - 5.8280713).abs() < 1e-6);
    }

    #[test]
    fn dehn_reduction_shortens_long_relator_pieces() {
        let a = build_bolza_atlas();
        let tables = relator_tables(&a.relation);
        // five consecutive letters of the relation are conjugate to a word of
        // length 3 (the inverse of the complementary piece)
        let w: Vec<u8> = a.relation[..5].to_vec();
        let red = dehn_reduce(&w, &tables);
        assert_eq!(red.len(), 3);
        // conjugate words share their translation length
        let m1 = word_to_isometry(&GroupWord::new(w).unwrap(), &a);
        let m2 = word_to_isometry(&GroupWord::new(red).unwrap(), &a);
        assert!((translation_length(&m1) - translation_length(&m2)).abs() < 1e-9);

        // a cyclically reduced word containing an over-half relator piece
        let mut w2: Vec<u8> = a.relation[..5].to_vec();
        w2.push(2);
        assert!(is_cyclically_reduced(&w2));
        let red2 = dehn_reduce(&w2, &tables);
        assert_eq!(red2.len(), 4);
        let m3 = word_to_isometry(&GroupWord::new(w2).unwrap(), &a);
        let m4 = word_to_isometry(&GroupWord::new(red2).unwrap(), &a);
        assert!((translation_length(&m3) - translation_length(&m4)).abs() < 1e-9);
    }
}
