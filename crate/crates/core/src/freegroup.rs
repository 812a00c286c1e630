//! Reduced words and primitive conjugacy classes in the free group of rank g.
//!
//! Letters are nonzero integers: `i` stands for the i-th generator and `-i`
//! for its inverse. Words are compared in the letter order
//! `1 < -1 < 2 < -2 < ...`, see [`letter_key`].
//!
//! A primitive conjugacy class is represented by its unique cyclically
//! reduced representative that is strictly smaller than all of its proper
//! rotations (a Lyndon word under the constraint that cyclically adjacent
//! letters are not mutually inverse). A class and its inverse are distinct
//! classes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sort key realizing the order `1 < -1 < 2 < -2 < ...`.
#[inline]
pub fn letter_key(letter: i32) -> u32 {
    let base = 2 * (letter.unsigned_abs() - 1);
    if letter > 0 {
        base
    } else {
        base + 1
    }
}

#[inline]
fn key_to_letter(key: u32) -> i32 {
    let g = (key / 2 + 1) as i32;
    if key % 2 == 0 {
        g
    } else {
        -g
    }
}

/// All letters of rank `rank` in increasing order.
pub fn alphabet(rank: usize) -> Vec<i32> {
    (0..2 * rank as u32).map(key_to_letter).collect()
}

fn check_letters(letters: &[i32], rank: usize) -> Result<()> {
    match letters.iter().find(|&&x| x == 0 || x.unsigned_abs() as usize > rank) {
        Some(&letter) => Err(Error::BadLetter { letter, rank }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReducedWord {
    letters: Vec<i32>,
    rank: usize,
}

impl ReducedWord {
    pub fn identity(rank: usize) -> Self {
        ReducedWord {
            letters: Vec::new(),
            rank,
        }
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        ReducedWord {
            letters: self.letters.iter().rev().map(|x| -x).collect(),
            rank: self.rank,
        }
    }

    pub fn concat(&self, other: &ReducedWord) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        reduce_unchecked(letters, self.rank.max(other.rank))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&a), Some(&b)) => self.letters.len() == 1 || a != -b,
            _ => true,
        }
    }

    /// Rotation starting at position `k`.
    pub fn rotation(&self, k: usize) -> Self {
        let n = self.letters.len();
        ReducedWord {
            letters: (0..n).map(|j| self.letters[(j + k) % n]).collect(),
            rank: self.rank,
        }
    }

    /// Lexicographic comparison under [`letter_key`].
    pub fn cmp_lex(&self, other: &ReducedWord) -> std::cmp::Ordering {
        self.letters
            .iter()
            .map(|&x| letter_key(x))
            .cmp(other.letters.iter().map(|&x| letter_key(x)))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, x) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

fn reduce_unchecked(letters: Vec<i32>, rank: usize) -> ReducedWord {
    let mut out: Vec<i32> = Vec::with_capacity(letters.len());
    for x in letters {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    ReducedWord { letters: out, rank }
}

/// Free reduction.
pub fn reduce(letters: &[i32], rank: usize) -> Result<ReducedWord> {
    check_letters(letters, rank)?;
    Ok(reduce_unchecked(letters.to_vec(), rank))
}

/// Splits `w = conjugator · core · conjugator^{-1}` with `core` cyclically reduced.
pub fn cyclic_reduce(w: &ReducedWord) -> (ReducedWord, ReducedWord) {
    let x = &w.letters;
    let mut lo = 0;
    let mut hi = x.len();
    while hi - lo >= 2 && x[lo] == -x[hi - 1] {
        lo += 1;
        hi -= 1;
    }
    (
        ReducedWord {
            letters: x[lo..hi].to_vec(),
            rank: w.rank,
        },
        ReducedWord {
            letters: x[..lo].to_vec(),
            rank: w.rank,
        },
    )
}

/// True iff `w` is not a proper power.
pub fn is_primitive(w: &ReducedWord) -> Result<bool> {
    if w.is_empty() || !w.is_cyclically_reduced() {
        return Err(Error::NotCyclicallyReduced);
    }
    Ok(smallest_period(&w.letters) == w.len())
}

/// Smallest `d | n` such that the word is the `n/d`-fold repetition of its first `d` letters.
fn smallest_period(x: &[i32]) -> usize {
    let n = x.len();
    (1..=n)
        .find(|&d| n % d == 0 && (d..n).all(|j| x[j] == x[j - d]))
        .unwrap_or(n)
}

/// Representative of a primitive conjugacy class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConjClass {
    rep: ReducedWord,
}

impl ConjClass {
    /// Canonical class of a nonempty, non-power element; `None` for the
    /// identity or proper powers.
    pub fn of_word(w: &ReducedWord) -> Option<Self> {
        let (core, _) = cyclic_reduce(w);
        if core.is_empty() || !is_primitive(&core).ok()? {
            return None;
        }
        let n = core.len();
        let best = (0..n)
            .map(|k| core.rotation(k))
            .min_by(|a, b| a.cmp_lex(b))
            .expect("nonempty");
        Some(ConjClass { rep: best })
    }

    pub fn rep(&self) -> &ReducedWord {
        &self.rep
    }

    pub fn len(&self) -> usize {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rep.is_empty()
    }

    pub fn inverse(&self) -> Self {
        ConjClass::of_word(&self.rep.inverse()).expect("inverse of primitive class is primitive")
    }
}

impl fmt::Display for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.rep)
    }
}

/// Depth-first traversal of all class representatives of length exactly
/// `len`, optionally restricted to those starting with `first`.
///
/// `extend` computes the state of a prefix extended by one letter from the
/// state of the prefix; `visit` receives every representative together with
/// its final state, in lexicographic order. Only prenecklace prefixes are
/// explored.
pub fn walk_classes<S, E, V>(rank: usize, len: usize, first: Option<i32>, root: S, extend: E, mut visit: V)
where
    E: Fn(&S, i32) -> S,
    V: FnMut(&[i32], &S),
{
    walk_class_prefixes(rank, len, first, root, &extend, |w, prefix| {
        let full = extend(prefix, w[w.len() - 1]);
        visit(w, &full);
    });
}

/// Like [`walk_classes`], but `visit` receives the state of the
/// representative without its last letter, so callers can fold the final
/// letter in more cheaply than a full `extend`.
pub fn walk_class_prefixes<S, E, V>(rank: usize, len: usize, first: Option<i32>, root: S, extend: E, mut visit: V)
where
    E: Fn(&S, i32) -> S,
    V: FnMut(&[i32], &S),
{
    if rank == 0 || len == 0 {
        return;
    }
    let nkeys = 2 * rank as u32;
    let firsts: Vec<u32> = match first {
        Some(f) => {
            if f == 0 || f.unsigned_abs() as usize > rank {
                return;
            }
            vec![letter_key(f)]
        }
        None => (0..nkeys).collect(),
    };

    let mut keys: Vec<u32> = vec![0; len];
    let mut letters: Vec<i32> = vec![0; len];
    // periods[t] = length of the longest Lyndon prefix of keys[..t+1]
    let mut periods: Vec<usize> = vec![0; len];
    let mut states: Vec<S> = Vec::with_capacity(len);
    states.push(root);
    let mut next: Vec<u32> = vec![0; len];

    for f in firsts {
        keys[0] = f;
        letters[0] = key_to_letter(f);
        periods[0] = 1;
        states.truncate(1);
        if len == 1 {
            visit(&letters[..1], &states[0]);
            continue;
        }
        let s = extend(&states[0], letters[0]);
        states.push(s);
        // next candidate key per depth; depth t is the position being filled
        let mut t = 1;
        next[1] = keys[1 - periods[0]].max(f);
        loop {
            if next[t] >= nkeys {
                // backtrack
                if t == 1 {
                    break;
                }
                t -= 1;
                states.pop();
                next[t] = keys[t] + 1;
                continue;
            }
            let k = next[t];
            let x = key_to_letter(k);
            let p = periods[t - 1];
            if x == -letters[t - 1] {
                next[t] = k + 1;
                continue;
            }
            // prenecklace condition: keys[t] >= keys[t - p]
            debug_assert!(k >= keys[t - p]);
            keys[t] = k;
            letters[t] = x;
            periods[t] = if k == keys[t - p] { p } else { t + 1 };
            if t + 1 == len {
                if periods[t] == len && x != -letters[0] {
                    visit(&letters[..], &states[t]);
                }
                next[t] = k + 1;
                continue;
            }
            let s = extend(&states[t], x);
            states.push(s);
            t += 1;
            next[t] = keys[t - periods[t - 1]];
        }
    }
}

/// Class representatives of length exactly `len`, lexicographically ordered.
pub fn classes_of_length(rank: usize, len: usize) -> Vec<ConjClass> {
    classes_of_length_starting(rank, len, None)
}

pub fn classes_of_length_starting(rank: usize, len: usize, first: Option<i32>) -> Vec<ConjClass> {
    let mut out = Vec::new();
    walk_classes(rank, len, first, (), |_, _| (), |w, _| {
        out.push(ConjClass {
            rep: ReducedWord {
                letters: w.to_vec(),
                rank,
            },
        })
    });
    out
}

/// Lazy stream of all primitive conjugacy classes of length `1..=max_len`,
/// ordered by length and then lexicographically. Each length is generated
/// when the stream reaches it.
pub fn enumerate_classes(rank: usize, max_len: usize) -> ClassStream {
    ClassStream {
        rank,
        max_len,
        current_len: 0,
        buffer: Vec::new().into_iter(),
    }
}

pub struct ClassStream {
    rank: usize,
    max_len: usize,
    current_len: usize,
    buffer: std::vec::IntoIter<ConjClass>,
}

impl Iterator for ClassStream {
    type Item = ConjClass;

    fn next(&mut self) -> Option<ConjClass> {
        loop {
            if let Some(c) = self.buffer.next() {
                return Some(c);
            }
            if self.current_len >= self.max_len || self.rank == 0 {
                return None;
            }
            self.current_len += 1;
            self.buffer = classes_of_length(self.rank, self.current_len).into_iter();
        }
    }
}

/// Number of primitive classes of each length `1..=max_len`.
pub fn class_counts(rank: usize, max_len: usize) -> Vec<usize> {
    (1..=max_len)
        .map(|len| {
            let mut n = 0usize;
            walk_classes(rank, len, None, (), |_, _| (), |_, _| n += 1);
            n
        })
        .collect()
}

/// Left coset representatives of `<gamma_i>`: reduced words of length at most
/// `max_len` whose last letter is not `±i`, including the empty word.
/// Ordered by length, then lexicographically.
pub fn enumerate_coset_reps(rank: usize, i: usize, max_len: usize) -> Vec<ReducedWord> {
    assert!(i >= 1 && i <= rank, "generator index out of range");
    let mut out = vec![ReducedWord::identity(rank)];
    let alpha = alphabet(rank);
    let mut level: Vec<Vec<i32>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next_level = Vec::new();
        for w in &level {
            for &x in &alpha {
                if w.last() == Some(&-x) {
                    continue;
                }
                let mut v = w.clone();
                v.push(x);
                next_level.push(v);
            }
        }
        out.extend(
            next_level
                .iter()
                .filter(|w| w.last().map(|x| x.unsigned_abs() as usize) != Some(i))
                .map(|w| ReducedWord {
                    letters: w.clone(),
                    rank,
                }),
        );
        level = next_level;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn word(x: &[i32], rank: usize) -> ReducedWord {
        reduce(x, rank).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert!(word(&[1, -1], 2).is_empty());
        assert_eq!(word(&[1, 2, -2, -1, 1], 2).letters(), &[1]);
        assert_eq!(word(&[1, 2, 3], 3).letters(), &[1, 2, 3]);
        assert_eq!(reduce(&[1, 0], 2), Err(Error::BadLetter { letter: 0, rank: 2 }));
        assert_eq!(reduce(&[3], 2), Err(Error::BadLetter { letter: 3, rank: 2 }));
    }

    #[test]
    fn cyclic_reduce_examples() {
        let (core, conj) = cyclic_reduce(&word(&[1, 2, -1], 2));
        assert_eq!(core.letters(), &[2]);
        assert_eq!(conj.letters(), &[1]);
        let (core, conj) = cyclic_reduce(&word(&[1, 2], 2));
        assert_eq!(core.letters(), &[1, 2]);
        assert!(conj.is_empty());
        let (core, conj) = cyclic_reduce(&ReducedWord::identity(2));
        assert!(core.is_empty() && conj.is_empty());
        // w = conj · core · conj^{-1}
        let w = word(&[2, -1, 1, 1, 2, 1, -2], 2);
        let (core, conj) = cyclic_reduce(&w);
        assert_eq!(conj.concat(&core).concat(&conj.inverse()), w);
    }

    #[test]
    fn primitivity() {
        assert!(!is_primitive(&word(&[1, 1], 2)).unwrap());
        assert!(is_primitive(&word(&[1, 2], 2)).unwrap());
        assert!(!is_primitive(&word(&[1, 2, 1, 2, 1, 2], 2)).unwrap());
        assert!(is_primitive(&word(&[1, 2, 1, 2, 1, -2], 2)).unwrap());
        assert_eq!(is_primitive(&word(&[1, 2, -1], 2)), Err(Error::NotCyclicallyReduced));
        assert_eq!(is_primitive(&ReducedWord::identity(2)), Err(Error::NotCyclicallyReduced));
    }

    #[test]
    fn small_class_counts() {
        assert_eq!(classes_of_length(2, 1).len(), 4);
        assert_eq!(classes_of_length(2, 2).len(), 4);
        assert_eq!(classes_of_length(2, 3).len(), 8);
        let reps: Vec<Vec<i32>> = classes_of_length(2, 1).iter().map(|c| c.rep().letters().to_vec()).collect();
        assert_eq!(reps, vec![vec![1], vec![-1], vec![2], vec![-2]]);
        // genus one: only {1} and {-1}
        assert_eq!(class_counts(1, 6), vec![2, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn stream_order_is_length_then_lex() {
        let all: Vec<ConjClass> = enumerate_classes(2, 5).collect();
        for pair in all.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            assert!(a.len() < b.len() || (a.len() == b.len() && a.rep().cmp_lex(b.rep()).is_lt()));
        }
    }

    #[test]
    fn class_and_inverse_are_distinct() {
        let c = ConjClass::of_word(&word(&[1, 2], 2)).unwrap();
        let ci = c.inverse();
        assert_ne!(c, ci);
        assert_eq!(ci.rep().letters(), &[-1, -2]);
        let all: BTreeSet<Vec<i32>> = enumerate_classes(2, 2).map(|c| c.rep().letters().to_vec()).collect();
        assert!(all.contains(&vec![1, 2]) && all.contains(&vec![-1, -2]));
    }

    #[test]
    fn partition_by_first_letter_is_disjoint_cover() {
        for len in 1..=7 {
            let all = classes_of_length(3, len);
            let mut joined = Vec::new();
            for x in alphabet(3) {
                joined.extend(classes_of_length_starting(3, len, Some(x)));
            }
            assert_eq!(all, joined);
        }
    }

    #[test]
    fn coset_reps_examples() {
        let reps: Vec<Vec<i32>> = enumerate_coset_reps(2, 1, 1).iter().map(|w| w.letters().to_vec()).collect();
        assert_eq!(reps, vec![vec![], vec![2], vec![-2]]);
        assert_eq!(enumerate_coset_reps(1, 1, 5).len(), 1);
        assert_eq!(enumerate_coset_reps(2, 1, 2).len(), 9);
    }

    #[test]
    fn coset_reps_are_distinct_cosets() {
        // w1 <g_i> = w2 <g_i> iff w1^{-1} w2 is a power of g_i
        let reps = enumerate_coset_reps(2, 2, 3);
        for (a, w1) in reps.iter().enumerate() {
            for w2 in &reps[a + 1..] {
                let d = w1.inverse().concat(w2);
                assert!(!d.letters().iter().all(|x| x.abs() == 2), "{w1} ~ {w2}");
            }
        }
    }
}
