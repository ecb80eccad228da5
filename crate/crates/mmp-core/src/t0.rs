//! Class T and T0 chains: recognition, generation from `[4]`, initial curves,
//! discrepancies and the M-resolution checks built on them.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_integer::{Integer, Roots};
use num_traits::{One, Zero};

use crate::chain::{hj_eval, DecoratedChain, Segment};
use crate::Q;

/// One generation move applied to a T0 chain `[b_1, ..., b_r]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    /// `[2, b_1, ..., b_r + 1]`
    L,
    /// `[b_1 + 1, ..., b_r, 2]`
    R,
}

impl Step {
    pub fn apply(self, w: &[i64]) -> Vec<i64> {
        let mut out = Vec::with_capacity(w.len() + 1);
        match self {
            Step::L => {
                out.push(2);
                out.extend_from_slice(w);
                *out.last_mut().expect("nonempty") += 1;
            }
            Step::R => {
                out.extend_from_slice(w);
                out[0] += 1;
                out.push(2);
            }
        }
        out
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Step::L => "L",
            Step::R => "R",
        })
    }
}

/// Witness that a chain is the T0 singularity `1/n^2(1, na-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct T0Certificate {
    pub n: i64,
    pub a: i64,
    /// 1-based position of the curve descending from the seed `[4]`.
    pub initial_index: usize,
    /// Moves that rebuild the chain from `[4]`, in order.
    pub generation_path: Vec<Step>,
}

impl T0Certificate {
    /// Replays the generation path from `[4]`.
    pub fn replay(&self) -> Vec<i64> {
        self.generation_path
            .iter()
            .fold(vec![4], |w, s| s.apply(&w))
    }
}

/// Witness that a chain is of class T.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TCertificate {
    /// All weights are 2.
    Rdp,
    /// `1/(d n^2)(1, d n a - 1)`.
    Tdna { d: i64, n: i64, a: i64 },
}

/// Walks the reverse generation moves over `w` without allocating.
///
/// Calls `on_step(step)` for each move undone, from the last generation move
/// back to the first, and returns whether `[4]` was reached.
fn walk_back(w: &[i64], mut on_step: impl FnMut(Step)) -> bool {
    if w.is_empty() {
        return false;
    }
    let (mut lo, mut hi) = (0usize, w.len() - 1);
    // pending decrements on the current head and tail entries
    let (mut dh, mut dt) = (0i64, 0i64);
    loop {
        if lo == hi {
            return w[lo] - dh - dt == 4;
        }
        let head = w[lo] - dh;
        let tail = w[hi] - dt;
        if head == 2 && tail >= 3 {
            lo += 1;
            dh = 0;
            dt += 1;
            on_step(Step::L);
        } else if tail == 2 && head >= 3 {
            hi -= 1;
            dt = 0;
            dh += 1;
            on_step(Step::R);
        } else {
            return false;
        }
    }
}

/// Allocation-free T0 test by reverse generation.
pub fn is_t0(w: &[i64]) -> bool {
    w.iter().all(|&x| x >= 2) && walk_back(w, |_| {})
}

/// Recognizes a class T0 chain, returning its unique generation certificate.
pub fn t0_recognize(w: &[i64]) -> Option<T0Certificate> {
    if !is_t0(w) {
        return None;
    }
    let mut path = Vec::with_capacity(w.len().saturating_sub(1));
    walk_back(w, |s| path.push(s));
    path.reverse();
    let heads = path.iter().filter(|&&s| s == Step::L).count();

    let v = hj_eval(w);
    let n = v.numer().sqrt();
    assert_eq!(n * n, v.numer(), "T0 chain {w:?} has non-square numerator");
    let (a, rem) = (v.denom() + 1).div_rem(&n);
    assert!(rem == 0 && a >= 1 && a < n && n.gcd(&a) == 1);
    Some(T0Certificate {
        n: i64::try_from(n).expect("n fits i64"),
        a: i64::try_from(a).expect("a fits i64"),
        initial_index: 1 + heads,
        generation_path: path,
    })
}

/// Recognizes a class T chain, preferring the smallest `d`.
pub fn t_recognize(w: &[i64]) -> Option<TCertificate> {
    if w.is_empty() || w.iter().any(|&x| x < 2) {
        return None;
    }
    if w.iter().all(|&x| x == 2) {
        return Some(TCertificate::Rdp);
    }
    let v = hj_eval(w);
    let (num, den) = (v.numer(), v.denom());
    let mut d = 1i128;
    while 4 * d <= num {
        if num % d == 0 {
            let sq = num / d;
            let n = sq.sqrt();
            if n >= 2 && n * n == sq && (den + 1) % (d * n) == 0 {
                let a = (den + 1) / (d * n);
                if a >= 1 && a < n && n.gcd(&a) == 1 {
                    let cast = |x: i128| i64::try_from(x).expect("fits i64");
                    return Some(TCertificate::Tdna { d: cast(d), n: cast(n), a: cast(a) });
                }
            }
        }
        d += 1;
    }
    None
}

/// All T0 chains of length at most `max_len`, in lexicographic order.
pub fn t0_generate(max_len: usize) -> Vec<Vec<i64>> {
    let mut seen = BTreeSet::new();
    if max_len == 0 {
        return Vec::new();
    }
    let mut queue = VecDeque::from([vec![4i64]]);
    while let Some(w) = queue.pop_front() {
        if w.len() < max_len {
            for s in [Step::L, Step::R] {
                queue.push_back(s.apply(&w));
            }
        }
        seen.insert(w);
    }
    seen.into_iter().collect()
}

/// Discrepancies `a_i` with `K = f^*K + sum a_i E_i` over the chain `w`.
///
/// Solves `-w_i a_i + a_{i-1} + a_{i+1} = w_i - 2` by exact forward elimination.
pub fn discrepancies(w: &[i64]) -> Vec<Q> {
    assert!(!w.is_empty() && w.iter().all(|&x| x >= 2), "need weights >= 2");
    let r = w.len();
    // row i: diag_i a_i + a_{i+1} = rhs_i after elimination
    let mut diag = Vec::with_capacity(r);
    let mut rhs = Vec::with_capacity(r);
    for i in 0..r {
        let wi = Q::from_integer(i128::from(w[i]));
        let (mut d, mut b) = (-wi, wi - Q::from_integer(2));
        if i > 0 {
            let m = Q::one() / diag[i - 1];
            d -= m;
            b -= m * rhs[i - 1];
        }
        assert!(!d.is_zero(), "singular intersection matrix");
        diag.push(d);
        rhs.push(b);
    }
    let mut a = vec![Q::zero(); r];
    for i in (0..r).rev() {
        let next = if i + 1 < r { a[i + 1] } else { Q::zero() };
        a[i] = (rhs[i] - next) / diag[i];
    }
    a
}

/// Errors from the M-resolution helpers.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum T0Error {
    #[error("segment {0} is not a (-1)-curve between two brackets")]
    NotFlankedByBrackets(usize),
    #[error("pair does not have the reducible shape")]
    ShapeMismatch,
}

fn end_discrepancy(seg: Option<&Segment>, left_end: bool) -> Q {
    match seg {
        Some(Segment::Bracket(ws)) => {
            let d = discrepancies(ws);
            if left_end {
                d[0]
            } else {
                d[d.len() - 1]
            }
        }
        _ => Q::zero(),
    }
}

/// `K . C` for the plain curve at 1-based segment `pos`.
///
/// Plain neighbors contribute no discrepancy.
pub fn k_dot_plain(ch: &DecoratedChain, pos: usize) -> Q {
    let w = ch
        .segment(pos)
        .and_then(Segment::plain)
        .expect("k_dot_plain needs a plain segment");
    let left = end_discrepancy(pos.checked_sub(1).and_then(|p| ch.segment(p)), false);
    let right = end_discrepancy(ch.segment(pos + 1), true);
    Q::from_integer(i128::from(w - 2)) - left - right
}

/// `K . E` for a (-1)-curve between two brackets.
pub fn k_dot_minus_one(ch: &DecoratedChain, pos: usize) -> Result<Q, T0Error> {
    let flanked = pos >= 2
        && ch.segment(pos) == Some(&Segment::Plain(1))
        && ch.segment(pos - 1).is_some_and(Segment::is_bracket)
        && ch.segment(pos + 1).is_some_and(Segment::is_bracket);
    if !flanked {
        return Err(T0Error::NotFlankedByBrackets(pos));
    }
    Ok(k_dot_plain(ch, pos))
}

/// One failed M-resolution condition. Positions are 1-based segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    BracketNotT0 { position: usize },
    MinusOneNotFlanked { position: usize },
    FirstWeightOrder { position: usize, left_first: i64, right_first: i64 },
    NotNef { position: usize, k_dot: Q },
}

impl Violation {
    /// Rule number in checking order, 1 to 4.
    pub fn rule(&self) -> u8 {
        match self {
            Violation::BracketNotT0 { .. } => 1,
            Violation::MinusOneNotFlanked { .. } => 2,
            Violation::FirstWeightOrder { .. } => 3,
            Violation::NotNef { .. } => 4,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BracketNotT0 { position } => {
                write!(f, "rule 1: bracket at {position} is not of class T0")
            }
            Violation::MinusOneNotFlanked { position } => {
                write!(f, "rule 2: (-1)-curve at {position} does not meet two brackets")
            }
            Violation::FirstWeightOrder { position, left_first, right_first } => write!(
                f,
                "rule 3: (-1)-curve at {position} needs b1 >= a1, got b1 = {right_first} < a1 = {left_first}"
            ),
            Violation::NotNef { position, k_dot } => {
                write!(f, "rule 4: K.E = {k_dot} < 0 on curve at {position}")
            }
        }
    }
}

/// Discrepancies and canonical degrees behind the nef verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NefReport {
    /// Per bracket position, the discrepancies of its curves.
    pub discrepancies: Vec<(usize, Vec<Q>)>,
    /// Per plain position, `K . C`.
    pub k_dot: Vec<(usize, Q)>,
    pub verdict: bool,
}

/// Outcome of [`validate_m_resolution`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub nef: NefReport,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the M-resolution conditions in order: T0 brackets, flanked (-1)-curves,
/// `b_1 >= a_1` across each `[A]-1-[B]`, and `K . C >= 0` on every plain curve.
pub fn validate_m_resolution(ch: &DecoratedChain) -> ValidationReport {
    let segs = ch.segments();
    let mut violations = Vec::new();
    let mut discs = Vec::new();
    for (k, s) in segs.iter().enumerate() {
        if let Segment::Bracket(ws) = s {
            if !is_t0(ws) {
                violations.push(Violation::BracketNotT0 { position: k + 1 });
            }
            discs.push((k + 1, discrepancies(ws)));
        }
    }
    for p in 1..=segs.len() {
        if segs[p - 1] == Segment::Plain(1) && k_dot_minus_one(ch, p).is_err() {
            violations.push(Violation::MinusOneNotFlanked { position: p });
        }
    }
    for p in 2..segs.len() {
        if let (Segment::Bracket(a), Segment::Plain(1), Segment::Bracket(b)) =
            (&segs[p - 2], &segs[p - 1], &segs[p])
        {
            if b[0] < a[0] {
                violations.push(Violation::FirstWeightOrder {
                    position: p,
                    left_first: a[0],
                    right_first: b[0],
                });
            }
        }
    }
    let mut k_dot = Vec::new();
    for p in 1..=segs.len() {
        if !segs[p - 1].is_bracket() {
            let k = k_dot_plain(ch, p);
            if k < Q::zero() {
                violations.push(Violation::NotNef { position: p, k_dot: k });
            }
            k_dot.push((p, k));
        }
    }
    let verdict = k_dot.iter().all(|(_, k)| *k >= Q::zero());
    ValidationReport { violations, nef: NefReport { discrepancies: discs, k_dot, verdict } }
}

/// Strips `[a_1+1, a_2, ..., a_r, 2]-1-[b_1, ..., b_t, 2]` to `[a_1, ..., a_r]-1-[b_1, ..., b_t]`.
///
/// Both outputs must be T0.
pub fn reduce_m_pair(a: &[i64], b: &[i64]) -> Result<(Vec<i64>, Vec<i64>), T0Error> {
    let shaped = |w: &[i64]| w.len() >= 2 && w[w.len() - 1] == 2;
    if !shaped(a) || !shaped(b) || a[0] < 3 {
        return Err(T0Error::ShapeMismatch);
    }
    let mut ra = a[..a.len() - 1].to_vec();
    ra[0] -= 1;
    let rb = b[..b.len() - 1].to_vec();
    if !is_t0(&ra) || !is_t0(&rb) {
        return Err(T0Error::ShapeMismatch);
    }
    Ok((ra, rb))
}
