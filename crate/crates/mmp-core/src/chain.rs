//! Linear chains of rational curves, exact Hirzebruch-Jung arithmetic and
//! ordinary/rational blow-ups and blow-downs.
//!
//! A weight `w` stands for a curve of self-intersection `-w`. Positions in
//! the public API are 1-based, matching the way chains are written by hand.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::RangeInclusive;
use core::str::FromStr;

use num_integer::Integer;

use crate::t0;

/// Errors raised by chain operations and the chain text grammar.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: &'static str },
    #[error("invalid fraction: {0}")]
    InvalidFraction(&'static str),
    #[error("position {0} is out of range")]
    OutOfRange(usize),
    #[error("entry at position {0} is not a (-1)-curve")]
    NotMinusOne(usize),
    #[error("contracting position {0} would create a curve of weight 0")]
    ZeroWeight(usize),
    #[error("chain contracts to nothing")]
    CollapsedToNothing,
    #[error("segment {0} is not a bracket")]
    NotABracket(usize),
    #[error("span contains bracket at segment {0}")]
    ContainsBracket(usize),
    #[error("span contains a (-1)-curve at segment {0}")]
    ContainsMinusOne(usize),
    #[error("weights {0:?} do not form a class T0 chain")]
    NotT0(Vec<i64>),
    #[error("empty chain or bracket")]
    Empty,
    #[error("weight {0} is not allowed here")]
    BadWeight(i64),
}

/// Exact value `p/q` of a continued fraction, including the formal infinity `1/0`.
///
/// Always stored reduced with `q >= 0`; infinity is the single value `(1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectiveRational {
    p: i128,
    q: i128,
}

impl ProjectiveRational {
    pub const ZERO: Self = Self { p: 0, q: 1 };
    pub const INFINITY: Self = Self { p: 1, q: 0 };

    /// Builds the canonical representative of `p/q`.
    ///
    /// # Panics
    /// If both `p` and `q` are zero.
    pub fn new(p: i128, q: i128) -> Self {
        assert!(p != 0 || q != 0, "0/0 is not a projective rational");
        if q == 0 {
            return Self::INFINITY;
        }
        let g = p.gcd(&q);
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 {
            p = -p;
            q = -q;
        }
        Self { p, q }
    }

    pub fn integer(n: i128) -> Self {
        Self { p: n, q: 1 }
    }

    pub fn numer(&self) -> i128 {
        self.p
    }

    pub fn denom(&self) -> i128 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.p == 0
    }

    pub fn is_infinite(&self) -> bool {
        self.q == 0
    }

    /// `w - 1/self`, the step of right-to-left evaluation.
    fn prepend(self, w: i64) -> Self {
        let w = i128::from(w);
        let p = w
            .checked_mul(self.p)
            .and_then(|wp| wp.checked_sub(self.q))
            .expect("continued fraction numerator overflows i128");
        Self::new(p, self.p)
    }
}

impl fmt::Display for ProjectiveRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// The cyclic quotient singularity `1/n(1,q)` with `0 < q < n`, `gcd(n,q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fraction {
    n: i64,
    q: i64,
}

impl Fraction {
    pub fn new(n: i64, q: i64) -> Result<Self, ChainError> {
        if n <= 0 || q <= 0 || q >= n {
            return Err(ChainError::InvalidFraction("need 0 < q < n"));
        }
        if n.gcd(&q) != 1 {
            return Err(ChainError::InvalidFraction("n and q must be coprime"));
        }
        Ok(Self { n, q })
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// Reads a value produced by [`hj_eval`] back as a fraction, if it is one.
    pub fn from_projective(v: ProjectiveRational) -> Result<Self, ChainError> {
        let n = i64::try_from(v.numer()).map_err(|_| ChainError::InvalidFraction("too large"))?;
        let q = i64::try_from(v.denom()).map_err(|_| ChainError::InvalidFraction("too large"))?;
        Self::new(n, q)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.n, self.q)
    }
}

impl FromStr for Fraction {
    type Err = ChainError;

    /// Accepts `n/q` and `1/n(1,q)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = ChainError::InvalidFraction("expected n/q or 1/n(1,q)");
        let num = |t: &str| t.parse::<i64>().map_err(|_| bad.clone());
        if let Some(rest) = s.strip_prefix("1/") {
            if let Some(open) = rest.find('(') {
                let n = num(&rest[..open])?;
                let inner = rest[open..]
                    .strip_prefix("(1,")
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or(bad.clone())?;
                return Fraction::new(n, num(inner)?);
            }
        }
        let (n, q) = s.split_once('/').ok_or(bad.clone())?;
        Fraction::new(num(n)?, num(q)?)
    }
}

/// Evaluates `[w_1, ..., w_r] = w_1 - 1/[w_2, ..., w_r]` exactly.
///
/// Entries may be zero or one (zero strings); division by zero yields infinity.
///
/// # Panics
/// If `w` is empty or intermediate values overflow `i128`.
pub fn hj_eval(w: &[i64]) -> ProjectiveRational {
    let (&last, rest) = w.split_last().expect("hj_eval of an empty sequence");
    rest.iter()
        .rev()
        .fold(ProjectiveRational::integer(i128::from(last)), |acc, &x| acc.prepend(x))
}

/// Minimal resolution chain of `1/n(1,q)` by the round-up expansion.
pub fn chain_from_fraction(f: Fraction) -> Vec<i64> {
    let (mut n, mut q) = (f.n, f.q);
    let mut out = Vec::new();
    while q != 0 {
        let w = (n + q - 1) / q;
        out.push(w);
        let next = w * q - n;
        n = q;
        q = next;
    }
    out
}

/// Dual string `(a_1, ..., a_e)`: the expansion of `n/(n-q)` where `n/q = [w]`.
///
/// `w ++ (1) ++ reverse(a)` evaluates to zero.
pub fn dual_string(w: &[i64]) -> Vec<i64> {
    debug_assert!(w.iter().all(|&x| x >= 2));
    let v = hj_eval(w);
    let n = i64::try_from(v.numer()).expect("fraction too large");
    let q = i64::try_from(v.denom()).expect("fraction too large");
    let dual = chain_from_fraction(Fraction { n, q: n - q });
    debug_assert!({
        let mut cat = w.to_vec();
        cat.push(1);
        cat.extend(dual.iter().rev());
        hj_eval(&cat).is_zero()
    });
    dual
}

/// Contracts the (-1)-curve at 1-based position `i`.
pub fn blow_down_once(w: &[i64], i: usize) -> Result<Vec<i64>, ChainError> {
    if i == 0 || i > w.len() {
        return Err(ChainError::OutOfRange(i));
    }
    if w[i - 1] != 1 {
        return Err(ChainError::NotMinusOne(i));
    }
    if w.len() < 2 {
        return Err(ChainError::CollapsedToNothing);
    }
    let mut out = w.to_vec();
    let idx = i - 1;
    if idx > 0 {
        out[idx - 1] -= 1;
    }
    if idx + 1 < out.len() {
        out[idx + 1] -= 1;
    }
    if out.iter().any(|&x| x <= 0) {
        return Err(ChainError::ZeroWeight(i));
    }
    out.remove(idx);
    Ok(out)
}

/// Contracts (-1)-curves, leftmost first, until none is left.
pub fn contract_to_minimal(w: &[i64]) -> Result<Vec<i64>, ChainError> {
    if w.is_empty() {
        return Err(ChainError::Empty);
    }
    let mut cur = w.to_vec();
    while let Some(pos) = cur.iter().position(|&x| x == 1) {
        match blow_down_once(&cur, pos + 1) {
            Ok(next) => cur = next,
            Err(ChainError::ZeroWeight(_)) if cur.len() <= 2 => {
                return Err(ChainError::CollapsedToNothing)
            }
            Err(e) => return Err(e),
        }
    }
    Ok(cur)
}

/// One piece of a decorated chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    Plain(i64),
    /// Curves that are rationally blown down together; every weight is at least 2.
    Bracket(Vec<i64>),
}

impl Segment {
    pub fn weights(&self) -> &[i64] {
        match self {
            Segment::Plain(w) => core::slice::from_ref(w),
            Segment::Bracket(ws) => ws,
        }
    }

    pub fn is_bracket(&self) -> bool {
        matches!(self, Segment::Bracket(_))
    }

    pub fn plain(&self) -> Option<i64> {
        match self {
            Segment::Plain(w) => Some(*w),
            Segment::Bracket(_) => None,
        }
    }

    fn check(&self) -> Result<(), ChainError> {
        match self {
            Segment::Plain(w) if *w < 1 => Err(ChainError::BadWeight(*w)),
            Segment::Bracket(ws) if ws.is_empty() => Err(ChainError::Empty),
            Segment::Bracket(ws) => match ws.iter().find(|&&x| x < 2) {
                Some(&x) => Err(ChainError::BadWeight(x)),
                None => Ok(()),
            },
            Segment::Plain(_) => Ok(()),
        }
    }

    fn reversed(&self) -> Segment {
        match self {
            Segment::Plain(w) => Segment::Plain(*w),
            Segment::Bracket(ws) => Segment::Bracket(ws.iter().rev().copied().collect()),
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Segment::Plain(w) => write!(f, "{w}"),
            Segment::Bracket(ws) => {
                f.write_str("[")?;
                for (k, w) in ws.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{w}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// A linear chain of curves, some grouped into rationally blown-down brackets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecoratedChain {
    segments: Vec<Segment>,
}

impl DecoratedChain {
    pub fn new(segments: Vec<Segment>) -> Result<Self, ChainError> {
        if segments.is_empty() {
            return Err(ChainError::Empty);
        }
        segments.iter().try_for_each(Segment::check)?;
        Ok(Self { segments })
    }

    /// A chain with no brackets.
    pub fn plain(weights: &[i64]) -> Result<Self, ChainError> {
        Self::new(weights.iter().map(|&w| Segment::Plain(w)).collect())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Segment at a 1-based position.
    pub fn segment(&self, pos: usize) -> Option<&Segment> {
        pos.checked_sub(1).and_then(|i| self.segments.get(i))
    }

    /// 1-based positions of all brackets.
    pub fn bracket_positions(&self) -> Vec<usize> {
        (1..=self.len())
            .filter(|&p| self.segments[p - 1].is_bracket())
            .collect()
    }

    pub fn has_brackets(&self) -> bool {
        self.segments.iter().any(Segment::is_bracket)
    }

    /// Underlying weights with all bracket decorations dropped.
    pub fn flatten(&self) -> Vec<i64> {
        self.segments
            .iter()
            .flat_map(|s| s.weights().iter().copied())
            .collect()
    }

    /// Reverses the chain, including the order inside each bracket.
    pub fn mirror(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
        }
    }

    /// Maps a 1-based position to the matching position of [`Self::mirror`].
    pub fn mirror_position(&self, pos: usize) -> usize {
        self.len() + 1 - pos
    }

    /// Replaces segments `range` (1-based, inclusive) by `with`.
    pub(crate) fn splice(&self, range: RangeInclusive<usize>, with: Vec<Segment>) -> Self {
        let mut segments = self.segments.clone();
        segments.splice(range.start() - 1..*range.end(), with);
        Self { segments }
    }

    /// Text of segments `range` joined by `-`, e.g. `2-[4]-4`.
    pub fn render_span(&self, range: RangeInclusive<usize>) -> String {
        let mut out = String::new();
        for p in range {
            if !out.is_empty() {
                out.push('-');
            }
            out.push_str(&alloc::format!("{}", self.segments[p - 1]));
        }
        out
    }

    /// Value of the underlying chain; blow-ups do not change it.
    pub fn fraction_value(&self) -> ProjectiveRational {
        hj_eval(&self.flatten())
    }
}

impl fmt::Display for DecoratedChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.segments.iter().enumerate() {
            if k > 0 {
                f.write_str("-")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for DecoratedChain {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Parser { src: s.as_bytes(), pos: 0 }.chain()
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, reason: &'static str) -> ChainError {
        ChainError::Parse { offset: self.pos, reason }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<i64, ChainError> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            Some(b'1'..=b'9') => {}
            _ => return Err(self.err("expected a positive integer")),
        }
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        core::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or(ChainError::Parse { offset: start, reason: "integer too large" })
    }

    fn segment(&mut self) -> Result<Segment, ChainError> {
        if self.eat(b'[') {
            let mut ws = alloc::vec![self.int()?];
            while self.eat(b',') {
                ws.push(self.int()?);
            }
            if !self.eat(b']') {
                return Err(self.err("expected ',' or ']'"));
            }
            Ok(Segment::Bracket(ws))
        } else {
            Ok(Segment::Plain(self.int()?))
        }
    }

    fn chain(mut self) -> Result<DecoratedChain, ChainError> {
        let mut segs = alloc::vec![self.segment()?];
        while self.eat(b'-') {
            segs.push(self.segment()?);
        }
        self.skip_ws();
        if self.pos != self.src.len() {
            return Err(self.err("unexpected trailing input"));
        }
        DecoratedChain::new(segs)
    }
}

/// Replaces the bracket at 1-based segment `b` by its plain curves.
pub fn rational_blow_up(ch: &DecoratedChain, b: usize) -> Result<DecoratedChain, ChainError> {
    match ch.segment(b) {
        None => Err(ChainError::OutOfRange(b)),
        Some(Segment::Plain(_)) => Err(ChainError::NotABracket(b)),
        Some(Segment::Bracket(ws)) => Ok(ch.splice(b..=b, ws.iter().map(|&w| Segment::Plain(w)).collect())),
    }
}

/// Groups the plain segments in `span` (1-based, inclusive) into one class T0 bracket.
pub fn rational_blow_down(
    ch: &DecoratedChain,
    span: RangeInclusive<usize>,
) -> Result<DecoratedChain, ChainError> {
    let (a, b) = (*span.start(), *span.end());
    if a == 0 || a > b || b > ch.len() {
        return Err(ChainError::OutOfRange(if a == 0 { a } else { b }));
    }
    let mut ws = Vec::with_capacity(b - a + 1);
    for p in a..=b {
        match ch.segments[p - 1] {
            Segment::Bracket(_) => return Err(ChainError::ContainsBracket(p)),
            Segment::Plain(1) => return Err(ChainError::ContainsMinusOne(p)),
            Segment::Plain(w) => ws.push(w),
        }
    }
    if t0::t0_recognize(&ws).is_none() {
        return Err(ChainError::NotT0(ws));
    }
    Ok(ch.splice(a..=b, alloc::vec![Segment::Bracket(ws)]))
}
