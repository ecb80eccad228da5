//! Zero continued fractions, homology classes of compactifying divisors and a
//! lattice-level certificate that two decorated chains are related by a flip.
//!
//! A class is written `l*L - sum e_i*E_i` style as `(l, e_1, ..., e_N)` with
//! pairing `l*l' - sum e_i*e'_i`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::chain::{contract_to_minimal, dual_string, hj_eval, ChainError, DecoratedChain, Segment};
use crate::flip::flip_sites;
use crate::lattice::{self, LatticeError};
use crate::t0::{t0_recognize, Step};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HomologyError {
    #[error("weights {0:?} do not form a class T0 chain")]
    NotT0(Vec<i64>),
    #[error("not a flip pair: {0}")]
    NotAFlipPair(&'static str),
    #[error("brackets at segments {0} and {1} touch")]
    AdjacentBrackets(usize, usize),
    #[error("class data violates the intersection pattern")]
    Unsound,
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Reduction decider: strips `1`s (leftmost first) until `(1, 1)` is reached.
pub fn is_zero_string(k: &[i64]) -> bool {
    let mut cur = k.to_vec();
    loop {
        if cur.len() < 2 || cur.iter().any(|&x| x <= 0) {
            return false;
        }
        if cur == [1, 1] {
            return true;
        }
        let Some(i) = cur.iter().position(|&x| x == 1) else {
            return false;
        };
        if i > 0 {
            cur[i - 1] -= 1;
        }
        if i + 1 < cur.len() {
            cur[i + 1] -= 1;
        }
        cur.remove(i);
    }
}

/// All zero strings `k` with `len(k) == bounds.len()` and `1 <= k_i <= bounds[i]`,
/// in lexicographic order.
pub fn enumerate_zero_strings(bounds: &[i64]) -> Vec<Vec<i64>> {
    let e = bounds.len();
    let mut out = Vec::new();
    if e < 2 {
        return out;
    }
    let mut cur = Vec::with_capacity(e);
    dfs(bounds, &mut cur, (1, 0), &mut out);
    out
}

/// `cont = (P_i, P_{i-1})`, the numerator continuants of the prefix.
fn dfs(bounds: &[i64], cur: &mut Vec<i64>, cont: (i128, i128), out: &mut Vec<Vec<i64>>) {
    let i = cur.len();
    let e = bounds.len();
    if i == e {
        if cont.0 == 0 && is_zero_string(cur) {
            out.push(cur.clone());
        }
        return;
    }
    for k in 1..=bounds[i] {
        let p = i128::from(k) * cont.0 - cont.1;
        // proper prefixes of a zero string have positive continuant
        if i + 1 < e && p <= 0 {
            continue;
        }
        cur.push(k);
        dfs(bounds, cur, (p, cont.0), out);
        cur.pop();
    }
}

/// A homology class `(l; e_1, ..., e_N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HClass {
    pub l: i64,
    pub e: Vec<i64>,
}

impl HClass {
    pub fn pair(&self, other: &HClass) -> i64 {
        self.l * other.l - self.e.iter().zip(&other.e).map(|(a, b)| a * b).sum::<i64>()
    }

    fn to_row(&self) -> Vec<i64> {
        let mut r = vec![self.l];
        r.extend_from_slice(&self.e);
        r
    }

    fn from_row(r: &[i64]) -> Self {
        HClass { l: r[0], e: r[1..].to_vec() }
    }

    fn add_e(&mut self, i: usize, c: i64) {
        self.e[i] += c;
    }
}

impl fmt::Display for HClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut term = |f: &mut fmt::Formatter<'_>, c: i64, name: &str, idx: Option<usize>| -> fmt::Result {
            if c == 0 {
                return Ok(());
            }
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            let mag = c.unsigned_abs();
            let coeff = if mag == 1 { alloc::string::String::new() } else { alloc::format!("{mag}") };
            first = false;
            match idx {
                Some(i) => write!(f, "{sign}{coeff}{name}{i}"),
                None => write!(f, "{sign}{coeff}{name}"),
            }
        };
        term(f, self.l, "l", None)?;
        for (i, &c) in self.e.iter().enumerate() {
            term(f, c, "e", Some(i + 1))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Classes of a chain of curves in `CP^2 # rank`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EmbeddingData {
    pub rank: usize,
    pub classes: Vec<HClass>,
}

impl EmbeddingData {
    fn push_exceptional(&mut self) -> usize {
        for c in &mut self.classes {
            c.e.push(0);
        }
        self.rank += 1;
        self.rank - 1
    }

    /// True when the classes form a chain with the given self-intersections.
    pub fn is_chain(&self, squares: &[i64]) -> bool {
        let c = &self.classes;
        if c.len() != squares.len() || c.iter().any(|x| x.e.len() != self.rank) {
            return false;
        }
        (0..c.len()).all(|i| {
            (0..c.len()).all(|j| {
                let want = if i == j {
                    squares[i]
                } else if i.abs_diff(j) == 1 {
                    1
                } else {
                    0
                };
                c[i].pair(&c[j]) == want
            })
        })
    }

    /// Self-intersections of the `+1` line followed by `1 - k_1, -k_2, ..., -k_e`.
    pub fn divisor_squares(k: &[i64]) -> Vec<i64> {
        let mut s = vec![1];
        s.extend(k.iter().enumerate().map(|(i, &x)| if i == 0 { 1 - x } else { -x }));
        s
    }
}

impl fmt::Display for EmbeddingData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.classes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Index of the exceptional class with coefficient `-1` in the first divisor
/// class and `+1` in the last one.
fn distinguished(d: &EmbeddingData) -> Result<usize, HomologyError> {
    let first = &d.classes[1];
    let last = d.classes.last().ok_or(HomologyError::Unsound)?;
    let mut hits = (0..d.rank).filter(|&i| first.e[i] == -1 && last.e[i] == 1);
    match (hits.next(), hits.next()) {
        (Some(i), None) => Ok(i),
        _ => Err(HomologyError::Unsound),
    }
}

/// Zero string and compactifying-divisor classes attached to a T0 chain,
/// built along its generation path from `[4]`.
pub fn rhd_tuple(w: &[i64]) -> Result<(Vec<i64>, EmbeddingData), HomologyError> {
    let cert = t0_recognize(w).ok_or_else(|| HomologyError::NotT0(w.to_vec()))?;
    let mut k = vec![2, 1, 2];
    let mut d = EmbeddingData {
        rank: 2,
        classes: vec![
            HClass { l: 1, e: vec![0, 0] },
            HClass { l: 1, e: vec![-1, -1] },
            HClass { l: 0, e: vec![0, 1] },
            HClass { l: 0, e: vec![1, -1] },
        ],
    };
    for step in &cert.generation_path {
        let e11 = distinguished(&d)?;
        let big_e = d.push_exceptional();
        match step {
            Step::R => {
                let old_first = d.classes[1].clone();
                let mut first = HClass { l: 1, e: vec![0; d.rank] };
                first.add_e(e11, -1);
                first.add_e(big_e, -1);
                let mut second = old_first;
                second.l = 0;
                second.add_e(e11, 1);
                second.add_e(big_e, 1);
                let last = d.classes.len() - 1;
                d.classes[last].add_e(big_e, -1);
                d.classes[1] = first;
                d.classes.insert(2, second);
                k.insert(0, 2);
                *k.last_mut().expect("non-empty") += 1;
            }
            Step::L => {
                d.classes[1].add_e(big_e, -1);
                let mut tail = HClass { l: 0, e: vec![0; d.rank] };
                tail.add_e(big_e, 1);
                tail.add_e(e11, -1);
                d.classes.push(tail);
                k[0] += 1;
                k.push(2);
            }
        }
    }
    if !d.is_chain(&EmbeddingData::divisor_squares(&k)) {
        return Err(HomologyError::Unsound);
    }
    Ok((k, d))
}

/// Divisor classes of a zero string, built by replaying its blow-ups from `(1, 1)`.
///
/// Returns `None` when `g` is not a zero string or cannot be reduced without
/// touching its first entry.
pub fn zero_string_classes(g: &[i64]) -> Option<EmbeddingData> {
    let mut cur = g.to_vec();
    let mut removed = Vec::new();
    while cur.len() > 2 {
        let i = (1..cur.len()).rev().find(|&i| cur[i] == 1)?;
        cur[i - 1] -= 1;
        if i + 1 < cur.len() {
            cur[i + 1] -= 1;
        }
        if cur.iter().any(|&x| x <= 0) {
            return None;
        }
        cur.remove(i);
        removed.push(i);
    }
    if cur != [1, 1] {
        return None;
    }
    let mut d = EmbeddingData {
        rank: 1,
        classes: vec![
            HClass { l: 1, e: vec![0] },
            HClass { l: 1, e: vec![-1] },
            HClass { l: 0, e: vec![1] },
        ],
    };
    for &i in removed.iter().rev() {
        // class index = string index + 1
        let big_e = d.push_exceptional();
        d.classes[i].add_e(big_e, -1);
        let mut new = HClass { l: 0, e: vec![0; d.rank] };
        new.add_e(big_e, 1);
        if i + 1 < d.classes.len() {
            d.classes[i + 1].add_e(big_e, -1);
        }
        d.classes.insert(i + 1, new);
    }
    debug_assert!(d.is_chain(&EmbeddingData::divisor_squares(g)));
    Some(d)
}

/// Classes of the compactifying divisor of the filling described by `z`.
///
/// The flattened chain `R` is capped by the dual string of its minimal model
/// through one extra curve; every bracket is then rationally blown down.
pub fn filling_data(z: &DecoratedChain) -> Result<EmbeddingData, HomologyError> {
    let r = z.flatten();
    let minimal = contract_to_minimal(&r)?;
    let a = dual_string(&minimal);
    let e = a.len();
    // the capping curve's weight grows with every blow-up at its meeting point
    let full = (1..=r.len() as i64 + 1)
        .map(|f| {
            let mut g = a.clone();
            g.push(f);
            g.extend(r.iter().rev());
            g
        })
        .find(|g| is_zero_string(g))
        .and_then(|g| zero_string_classes(&g))
        .ok_or(HomologyError::Unsound)?;
    let flat_len = r.len();
    // 0-based flat index j sits at class index e + 1 + (r - j)
    let curve_row = |j: usize| full.classes[e + 1 + flat_len - j].to_row();

    let mut pending: Vec<(usize, i64, Vec<Vec<i64>>)> = Vec::new();
    let mut flat = 0usize;
    let mut last_bracket: Option<usize> = None;
    for (idx, seg) in z.segments().iter().enumerate() {
        let len = seg.weights().len();
        if let Segment::Bracket(w) = seg {
            if last_bracket == Some(idx) {
                return Err(HomologyError::AdjacentBrackets(idx, idx + 1));
            }
            let cert = t0_recognize(w).ok_or_else(|| HomologyError::NotT0(w.clone()))?;
            pending.push((idx + 1, cert.n, (flat..flat + len).map(curve_row).collect()));
            last_bracket = Some(idx + 1);
        }
        flat += len;
    }

    let mut rank = full.rank;
    let mut divisor: Vec<Vec<i64>> = full.classes[..=e].iter().map(HClass::to_row).collect();
    for b in 0..pending.len() {
        let (_, n, ref rows) = pending[b];
        let rows = rows.clone();
        let mut tracked = divisor.clone();
        for (_, _, other) in &pending[b + 1..] {
            tracked.extend(other.iter().cloned());
        }
        let out = lattice::blow_down(&rows, n, &tracked)?;
        rank = out.rank;
        let mut it = out.rows.into_iter();
        divisor = it.by_ref().take(e + 1).collect();
        for (_, _, other) in pending[b + 1..].iter_mut() {
            for row in other.iter_mut() {
                *row = it.next().ok_or(HomologyError::Unsound)?;
            }
        }
    }
    let data = EmbeddingData {
        rank,
        classes: divisor.iter().map(|r| HClass::from_row(r)).collect(),
    };
    if !data.is_chain(&EmbeddingData::divisor_squares(&a)) {
        return Err(HomologyError::Unsound);
    }
    Ok(data)
}

/// Normal form under signed permutations of the exceptional classes.
///
/// Each exceptional column is signed so that its first nonzero entry is
/// negative, then columns are sorted lexicographically.
pub fn canonicalize(d: &EmbeddingData) -> EmbeddingData {
    let rows = d.classes.len();
    let mut cols: Vec<Vec<i64>> = (0..d.rank)
        .map(|j| (0..rows).map(|i| d.classes[i].e[j]).collect())
        .collect();
    for col in &mut cols {
        if col.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0) {
            col.iter_mut().for_each(|x| *x = -*x);
        }
    }
    cols.sort();
    EmbeddingData {
        rank: d.rank,
        classes: (0..rows)
            .map(|i| HClass { l: d.classes[i].l, e: cols.iter().map(|c| c[i]).collect() })
            .collect(),
    }
}

/// Decides whether `y_plus` is the flip of `y` by comparing the homology of
/// their compactifying divisors.
///
/// Fails with `NotAFlipPair` when the pair cannot be compared at all: the
/// underlying singularities differ or `y` has no flip site.
pub fn verify_flip_pair(y: &DecoratedChain, y_plus: &DecoratedChain) -> Result<bool, HomologyError> {
    let fy = contract_to_minimal(&y.flatten())?;
    let fp = contract_to_minimal(&y_plus.flatten())?;
    if hj_eval(&fy) != hj_eval(&fp) {
        return Err(HomologyError::NotAFlipPair("the contracted fractions differ"));
    }
    if flip_sites(y).is_empty() {
        return Err(HomologyError::NotAFlipPair("the first chain has no flip site"));
    }
    let a = canonicalize(&filling_data(y)?);
    let b = canonicalize(&filling_data(y_plus)?);
    Ok(a == b)
}
