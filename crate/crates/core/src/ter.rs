//! Word-level edit alignment with block shifts.
//!
//! The hypothesis is transformed into the reference with unit-cost
//! insertions, deletions, substitutions and shifts of contiguous blocks.
//! Shifts are chosen greedily: at each round the move that lowers the
//! remaining edit distance the most is applied, as long as it pays for
//! itself. A move is either one shift or a pair of shifts; the pair lookahead
//! lets the search step over plateaus where no single shift helps. Only blocks
//! that occur verbatim in the reference may move. A word-level Levenshtein
//! alignment finishes the script.
//!
//! Token comparison is on [`Token::norm`](crate::text::Token::norm).

use serde::{Deserialize, Serialize};

use std::collections::{HashMap, HashSet};

use crate::text::Segment;

/// Upper bound on the number of shifts applied to one pair.
pub const MAX_SHIFTS: usize = 10;
/// Longest block considered for a single shift.
pub const MAX_SHIFT_SIZE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EditKind {
    Match,
    Substitute,
    Insert,
    Delete,
    Shift,
}

/// One step of an edit script.
///
/// `hyp` indices always refer to the hypothesis as given, before any shift
/// was applied; `reference` indices refer to the reference. Shift spans are
/// positions in the intermediate hypothesis at the time of the shift: the
/// block `start..start + len` is cut out and reinserted so that it begins at
/// `dest` in the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EditOp {
    Match { hyp: usize, reference: usize },
    Substitute { hyp: usize, reference: usize },
    Insert { reference: usize },
    Delete { hyp: usize },
    Shift { start: usize, len: usize, dest: usize },
}

impl EditOp {
    pub fn kind(&self) -> EditKind {
        match self {
            EditOp::Match { .. } => EditKind::Match,
            EditOp::Substitute { .. } => EditKind::Substitute,
            EditOp::Insert { .. } => EditKind::Insert,
            EditOp::Delete { .. } => EditKind::Delete,
            EditOp::Shift { .. } => EditKind::Shift,
        }
    }

    pub fn hyp_index(&self) -> Option<usize> {
        match *self {
            EditOp::Match { hyp, .. } | EditOp::Substitute { hyp, .. } | EditOp::Delete { hyp } => {
                Some(hyp)
            }
            _ => None,
        }
    }

    pub fn ref_index(&self) -> Option<usize> {
        match *self {
            EditOp::Match { reference, .. }
            | EditOp::Substitute { reference, .. }
            | EditOp::Insert { reference } => Some(reference),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript {
    /// Shifts first, in application order, then the alignment in reference order.
    pub ops: Vec<EditOp>,
    pub matches: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
    pub shifts: usize,
}

impl EditScript {
    fn from_ops(ops: Vec<EditOp>) -> Self {
        let mut script = EditScript {
            ops,
            ..Default::default()
        };
        for op in &script.ops {
            match op.kind() {
                EditKind::Match => script.matches += 1,
                EditKind::Substitute => script.substitutions += 1,
                EditKind::Insert => script.insertions += 1,
                EditKind::Delete => script.deletions += 1,
                EditKind::Shift => script.shifts += 1,
            }
        }
        script
    }

    /// Number of edits: insertions, deletions, substitutions and shifts.
    pub fn cost(&self) -> usize {
        self.insertions + self.deletions + self.substitutions + self.shifts
    }

    pub fn hyp_len(&self) -> usize {
        self.matches + self.substitutions + self.deletions
    }

    pub fn ref_len(&self) -> usize {
        self.matches + self.substitutions + self.insertions
    }
}

/// Aligns two tokenized segments, `hyp` being rewritten into `reference`.
pub fn ter_align(hyp: &Segment, reference: &Segment) -> EditScript {
    align_words(&hyp.norms(), &reference.norms())
}

/// Same as [`ter_align`] over bare word sequences.
pub fn align_words<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> EditScript {
    let (hyp_ids, ref_ids) = intern(hyp, reference);
    let search = Search::new(&hyp_ids, &ref_ids);

    // order[p] is the original hypothesis index of the word now at position p.
    let mut order: Vec<usize> = (0..hyp_ids.len()).collect();
    let mut words = hyp_ids;
    let mut ops = Vec::new();
    let mut current = search.distance.eval(&words);

    while current > search.floor && ops.len() < MAX_SHIFTS {
        let single = search.best_single(&words, current);
        let single_distance = single.map_or(current, |s| s.distance + 1);
        let pair = if ops.len() + 2 <= MAX_SHIFTS && single_distance > search.floor + 1 {
            search.best_pair(&words, current)
        } else {
            None
        };
        let step = match (single, pair) {
            (Some(s), Some((a, b))) if b.distance + 1 < s.distance => vec![a, b],
            (Some(s), _) => vec![s],
            (None, Some((a, b))) => vec![a, b],
            (None, None) => break,
        };
        for shift in step {
            apply_shift(&mut words, shift);
            apply_shift(&mut order, shift);
            current = shift.distance;
            ops.push(EditOp::Shift {
                start: shift.start,
                len: shift.len,
                dest: shift.dest,
            });
        }
    }

    ops.extend(
        backtrace(&words, &ref_ids)
            .into_iter()
            .map(|op| match op {
                EditOp::Match { hyp, reference } => EditOp::Match {
                    hyp: order[hyp],
                    reference,
                },
                EditOp::Substitute { hyp, reference } => EditOp::Substitute {
                    hyp: order[hyp],
                    reference,
                },
                EditOp::Delete { hyp } => EditOp::Delete { hyp: order[hyp] },
                other => other,
            }),
    );
    EditScript::from_ops(ops)
}

/// Maps words to dense ids shared by both sides.
fn intern<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> (Vec<u32>, Vec<u32>) {
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let mut out = [Vec::with_capacity(reference.len()), Vec::with_capacity(hyp.len())];
    for (side, words) in out.iter_mut().zip([reference, hyp]) {
        for w in words {
            let next = ids.len() as u32;
            side.push(*ids.entry(w.as_ref()).or_insert(next));
        }
    }
    let [ref_ids, hyp_ids] = out;
    (hyp_ids, ref_ids)
}

#[derive(Debug, Clone, Copy)]
struct Shift {
    start: usize,
    len: usize,
    dest: usize,
    distance: usize,
}

fn apply_shift<T: Copy>(seq: &mut Vec<T>, shift: Shift) {
    let block: Vec<T> = seq.drain(shift.start..shift.start + shift.len).collect();
    seq.splice(shift.dest..shift.dest, block);
}

/// Shift search against one fixed reference.
struct Search<'a> {
    blocks: HashSet<&'a [u32]>,
    distance: Distance,
    /// No reordering can bring the edit distance below this: words missing
    /// from one side's multiset cost at least one edit each.
    floor: usize,
}

impl<'a> Search<'a> {
    fn new(hyp: &[u32], reference: &'a [u32]) -> Self {
        let mut blocks = HashSet::new();
        for len in 1..=MAX_SHIFT_SIZE.min(reference.len()) {
            blocks.extend(reference.windows(len));
        }
        Search {
            blocks,
            distance: Distance::new(reference),
            floor: bag_floor(hyp, reference),
        }
    }

    /// Calls `visit` once per distinct word order reachable with one legal
    /// shift, in a fixed enumeration order.
    fn legal_shifts(&self, words: &[u32], mut visit: impl FnMut(Shift, &[u32]) -> bool) {
        let n = words.len();
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        let mut scratch = Vec::with_capacity(n);
        for start in 0..n {
            for len in 1..=MAX_SHIFT_SIZE.min(n - start) {
                if !self.blocks.contains(&words[start..start + len]) {
                    // longer blocks starting here contain this one
                    break;
                }
                for dest in 0..=(n - len) {
                    if dest == start {
                        continue;
                    }
                    scratch.clear();
                    scratch.extend_from_slice(words);
                    let mut shift = Shift {
                        start,
                        len,
                        dest,
                        distance: 0,
                    };
                    apply_shift(&mut scratch, shift);
                    if scratch == words || !seen.insert(scratch.clone()) {
                        continue;
                    }
                    shift.distance = self.distance.eval(&scratch);
                    if !visit(shift, &scratch) {
                        return;
                    }
                }
            }
        }
    }

    /// The single shift with the lowest resulting edit distance, if it saves
    /// more than its own unit cost.
    fn best_single(&self, words: &[u32], current: usize) -> Option<Shift> {
        let mut best: Option<Shift> = None;
        self.legal_shifts(words, |shift, _| {
            if shift.distance + 1 < current && best.is_none_or(|b| shift.distance < b.distance) {
                best = Some(shift);
            }
            shift.distance > self.floor
        });
        best
    }

    /// Best two-shift move. The first shift may leave the edit distance
    /// unchanged; the pair has to pay for both shifts.
    fn best_pair(&self, words: &[u32], current: usize) -> Option<(Shift, Shift)> {
        let mut best: Option<(Shift, Shift)> = None;
        self.legal_shifts(words, |first, shifted| {
            if first.distance > current {
                return true;
            }
            self.legal_shifts(shifted, |second, _| {
                if second.distance + 2 < current
                    && best.is_none_or(|(_, b)| second.distance < b.distance)
                {
                    best = Some((first, second));
                }
                second.distance > self.floor
            });
            best.is_none_or(|(_, b)| b.distance > self.floor)
        });
        best
    }
}

fn bag_floor(a: &[u32], b: &[u32]) -> usize {
    let mut counts: HashMap<u32, isize> = HashMap::new();
    for &w in a {
        *counts.entry(w).or_default() += 1;
    }
    let mut common = 0;
    for &w in b {
        if let Some(c) = counts.get_mut(&w).filter(|c| **c > 0) {
            *c -= 1;
            common += 1;
        }
    }
    a.len().max(b.len()) - common
}

/// Edit distance to a fixed reference. References of up to 64 words use the
/// bit-parallel recurrence; longer ones fall back to the row-by-row DP.
enum Distance {
    BitParallel { peq: Vec<u64>, len: usize },
    Rows(Vec<u32>),
}

impl Distance {
    fn new(reference: &[u32]) -> Self {
        if reference.is_empty() || reference.len() > 64 {
            return Distance::Rows(reference.to_vec());
        }
        let alphabet = reference.iter().max().map_or(0, |&m| m as usize + 1);
        let mut peq = vec![0u64; alphabet];
        for (i, &w) in reference.iter().enumerate() {
            peq[w as usize] |= 1 << i;
        }
        Distance::BitParallel {
            peq,
            len: reference.len(),
        }
    }

    fn eval(&self, text: &[u32]) -> usize {
        match self {
            Distance::Rows(reference) => levenshtein(text, reference),
            Distance::BitParallel { peq, len } => {
                let m = *len;
                let mask = if m == 64 { !0 } else { (1u64 << m) - 1 };
                let last = 1u64 << (m - 1);
                let (mut pv, mut mv) = (mask, 0u64);
                let mut score = m;
                for &c in text {
                    let eq = peq.get(c as usize).copied().unwrap_or(0);
                    let xv = eq | mv;
                    let xh = (((eq & pv).wrapping_add(pv)) ^ pv) | eq;
                    let mut ph = mv | !(xh | pv);
                    let mut mh = pv & xh;
                    if ph & last != 0 {
                        score += 1;
                    } else if mh & last != 0 {
                        score -= 1;
                    }
                    ph = (ph << 1) | 1;
                    mh <<= 1;
                    pv = (mh | !(xv | ph)) & mask;
                    mv = ph & xv & mask;
                }
                score
            }
        }
    }
}

/// Word-level Levenshtein distance with unit costs.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut row = vec![0; b.len() + 1];
    for (i, wa) in a.iter().enumerate() {
        row[0] = i + 1;
        for (j, wb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(wa != wb);
            row[j + 1] = sub.min(prev[j + 1] + 1).min(row[j] + 1);
        }
        std::mem::swap(&mut prev, &mut row);
    }
    prev[b.len()]
}

/// Full DP table and a deterministic backtrace. Ties prefer the diagonal,
/// then deletion, then insertion.
fn backtrace(a: &[u32], b: &[u32]) -> Vec<EditOp> {
    let (n, m) = (a.len(), b.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let same = a[i - 1] == b[j - 1];
            if d[i][j] == d[i - 1][j - 1] + usize::from(!same) {
                ops.push(if same {
                    EditOp::Match {
                        hyp: i - 1,
                        reference: j - 1,
                    }
                } else {
                    EditOp::Substitute {
                        hyp: i - 1,
                        reference: j - 1,
                    }
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[i][j] == d[i - 1][j] + 1 {
            ops.push(EditOp::Delete { hyp: i - 1 });
            i -= 1;
        } else {
            ops.push(EditOp::Insert { reference: j - 1 });
            j -= 1;
        }
    }
    ops.reverse();
    ops
}
