//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

/// Plain word-level Levenshtein distance, full-matrix form.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let c = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            d[i][j] = (d[i - 1][j - 1] + c).min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// Every sequence reachable from `seq` by moving one contiguous block to
/// any other position, where the block must occur verbatim somewhere in
/// `reference` (the legal move set of a TER shift).
pub fn legal_block_moves(seq: &[u8], reference: &[u8]) -> Vec<Vec<u8>> {
    let n = seq.len();
    let mut out = Vec::new();
    for start in 0..n {
        for len in 1..=n - start {
            let block = &seq[start..start + len];
            if len > reference.len() || !reference.windows(len).any(|w| w == block) {
                continue;
            }
            let mut rest = seq.to_vec();
            rest.drain(start..start + len);
            for dest in 0..=rest.len() {
                let mut moved = rest.clone();
                moved.splice(dest..dest, block.iter().cloned());
                if moved != seq {
                    out.push(moved);
                }
            }
        }
    }
    out
}

/// Sequences reachable from `hyp` with at most `depth` block moves, keyed by
/// the fewest moves needed to reach them.
pub fn shift_closure(hyp: &[u8], reference: &[u8], depth: usize) -> HashMap<Vec<u8>, usize> {
    let mut seen = HashMap::new();
    seen.insert(hyp.to_vec(), 0);
    let mut frontier = vec![hyp.to_vec()];
    for d in 1..=depth {
        let mut next = Vec::new();
        for s in &frontier {
            for m in legal_block_moves(s, reference) {
                if !seen.contains_key(&m) {
                    seen.insert(m.clone(), d);
                    next.push(m);
                }
            }
        }
        frontier = next;
    }
    seen
}

/// Exhaustive minimum of `moves + edit_distance` over the shift closure.
pub fn brute_force_ter_cost(closure: &HashMap<Vec<u8>, usize>, reference: &[u8]) -> usize {
    closure
        .iter()
        .map(|(s, &d)| d + edit_distance(s, reference))
        .min()
        .unwrap()
}

/// All sequences of length 0..=max_len over `alphabet`.
pub fn all_sequences(alphabet: &[u8], max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &layer {
            for &c in alphabet {
                let mut t: Vec<u8> = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub fn as_words(seq: &[u8]) -> Vec<String> {
    seq.iter().map(|&c| (c as char).to_string()).collect()
}
