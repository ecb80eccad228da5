//! Symplectic flips and antiflips as exact rewrites of decorated chains.
//!
//! A flip acts on `[b_1, ..., b_t]-1-c` with the bracket on the left
//! (`LeftToRight`) or on its mirror image `c-1-[b_t, ..., b_1]` (`Mirrored`).
//! Let `i` be the last index with `b_i >= 3`.
//!
//! * Case A (`i >= 2`): `b_1-[b_2, ..., b_{i-1}, b_i - 1]-(c - b_1 + 1)`.
//! * Case B (`i = 1`, so the bracket is `[t + 3, 2, ..., 2]`): `(b_1 - 1)-(c - b_1 + 3)`.
//!
//! Antiflips are the inverse rewrites. A flip site is positioned at the bracket,
//! an antiflip site at the curve that becomes the bracket head.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::chain::{DecoratedChain, Segment};
use crate::t0::is_t0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    LeftToRight,
    Mirrored,
}

/// Where and how to apply a flip or antiflip. `position` is a 1-based segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlipSite {
    pub position: usize,
    pub case: Case,
    pub orientation: Orientation,
}

impl FlipSite {
    pub fn ltr(position: usize, case: Case) -> Self {
        Self { position, case, orientation: Orientation::LeftToRight }
    }

    pub fn mirrored(position: usize, case: Case) -> Self {
        Self { position, case, orientation: Orientation::Mirrored }
    }
}

impl fmt::Display for FlipSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let case = match self.case {
            Case::A => "A",
            Case::B => "B",
        };
        let orient = match self.orientation {
            Orientation::LeftToRight => "ltr",
            Orientation::Mirrored => "mir",
        };
        write!(f, "{}:{}:{}", self.position, case, orient)
    }
}

impl FromStr for FlipSite {
    type Err = FlipError;

    /// Parses `pos:case:orient`, e.g. `1:B:ltr` or `3:A:mir`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().split(':');
        let (Some(p), Some(c), Some(o), None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(FlipError::BadSiteSyntax);
        };
        let position = p.parse().map_err(|_| FlipError::BadSiteSyntax)?;
        let case = match c {
            "A" | "a" => Case::A,
            "B" | "b" => Case::B,
            _ => return Err(FlipError::BadSiteSyntax),
        };
        let orientation = match o {
            "ltr" => Orientation::LeftToRight,
            "mir" => Orientation::Mirrored,
            _ => return Err(FlipError::BadSiteSyntax),
        };
        Ok(Self { position, case, orientation })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlipError {
    #[error("no {kind} applies at site {site}")]
    InvalidSite { kind: &'static str, site: FlipSite },
    #[error("flip produced the non-T0 bracket {0:?}")]
    BrokenT0(Vec<i64>),
    #[error("antiflip would produce the non-T0 bracket {0:?}")]
    ResultNotT0(Vec<i64>),
    #[error("site must look like pos:A|B:ltr|mir")]
    BadSiteSyntax,
}

/// Shape data of a left-to-right flip configuration at a bracket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipShape {
    pub case: Case,
    pub bracket: Vec<i64>,
    /// 1-based index of the last entry `>= 3`.
    pub i: usize,
    pub c: i64,
}

/// Reads `[b]-1-c` at 1-based `pos`, checking the flip preconditions.
pub fn ltr_flip_shape(ch: &DecoratedChain, pos: usize) -> Option<FlipShape> {
    let (Some(Segment::Bracket(b)), Some(Segment::Plain(1)), Some(&Segment::Plain(c))) =
        (ch.segment(pos), ch.segment(pos + 1), ch.segment(pos + 2))
    else {
        return None;
    };
    if !is_t0(b) {
        return None;
    }
    let i = b.iter().rposition(|&x| x >= 3)? + 1;
    let (t, b1) = (b.len() as i64, b[0]);
    if i >= 2 {
        (c - b1 + 1 >= 1).then(|| FlipShape { case: Case::A, bracket: b.clone(), i, c })
    } else {
        (b1 == t + 3 && c - b1 + 3 >= 1).then(|| FlipShape { case: Case::B, bracket: b.clone(), i, c })
    }
}

/// Reports the case a left-to-right antiflip at `pos` would use, if the pattern fits.
fn ltr_antiflip_case(ch: &DecoratedChain, pos: usize) -> Option<Case> {
    match (ch.segment(pos), ch.segment(pos + 1), ch.segment(pos + 2)) {
        (Some(&Segment::Plain(v)), Some(Segment::Bracket(_)), Some(Segment::Plain(_))) if v >= 2 => {
            Some(Case::A)
        }
        (Some(&Segment::Plain(d)), Some(Segment::Plain(_)), _) if d >= 3 => Some(Case::B),
        _ => None,
    }
}

fn ltr_flip(ch: &DecoratedChain, pos: usize, case: Case) -> Result<DecoratedChain, FlipError> {
    let invalid = FlipError::InvalidSite { kind: "flip", site: FlipSite::ltr(pos, case) };
    let shape = ltr_flip_shape(ch, pos).ok_or(invalid.clone())?;
    if shape.case != case {
        return Err(invalid);
    }
    let FlipShape { bracket: b, i, c, .. } = shape;
    let b1 = b[0];
    let with = match case {
        Case::A => {
            let mut nb = b[1..i].to_vec();
            *nb.last_mut().expect("i >= 2") -= 1;
            if !is_t0(&nb) {
                return Err(FlipError::BrokenT0(nb));
            }
            vec![Segment::Plain(b1), Segment::Bracket(nb), Segment::Plain(c - b1 + 1)]
        }
        Case::B => vec![Segment::Plain(b1 - 1), Segment::Plain(c - b1 + 3)],
    };
    Ok(ch.splice(pos..=pos + 2, with))
}

fn ltr_antiflip(ch: &DecoratedChain, pos: usize, case: Case) -> Result<DecoratedChain, FlipError> {
    let invalid = FlipError::InvalidSite { kind: "antiflip", site: FlipSite::ltr(pos, case) };
    if ltr_antiflip_case(ch, pos) != Some(case) {
        return Err(invalid);
    }
    match case {
        Case::A => {
            let (Some(&Segment::Plain(v)), Some(Segment::Bracket(w)), Some(&Segment::Plain(c))) =
                (ch.segment(pos), ch.segment(pos + 1), ch.segment(pos + 2))
            else {
                return Err(invalid);
            };
            let mut nb = Vec::with_capacity(w.len() + v as usize - 1);
            nb.push(v);
            nb.extend_from_slice(w);
            *nb.last_mut().expect("nonempty") += 1;
            nb.extend(core::iter::repeat_n(2, v as usize - 2));
            if !is_t0(&nb) {
                return Err(FlipError::ResultNotT0(nb));
            }
            let with = vec![Segment::Bracket(nb), Segment::Plain(1), Segment::Plain(c + v - 1)];
            Ok(ch.splice(pos..=pos + 2, with))
        }
        Case::B => {
            let (Some(&Segment::Plain(d)), Some(&Segment::Plain(c))) = (ch.segment(pos), ch.segment(pos + 1))
            else {
                return Err(invalid);
            };
            let mut nb = vec![d + 1];
            nb.extend(core::iter::repeat_n(2, d as usize - 3));
            let with = vec![Segment::Bracket(nb), Segment::Plain(1), Segment::Plain(c + d - 2)];
            Ok(ch.splice(pos..=pos + 1, with))
        }
    }
}

fn conjugate(
    ch: &DecoratedChain,
    s: FlipSite,
    op: fn(&DecoratedChain, usize, Case) -> Result<DecoratedChain, FlipError>,
) -> Result<DecoratedChain, FlipError> {
    match s.orientation {
        Orientation::LeftToRight => op(ch, s.position, s.case),
        Orientation::Mirrored => {
            if s.position == 0 || s.position > ch.len() {
                return Err(FlipError::InvalidSite { kind: "flip", site: s });
            }
            let m = ch.mirror();
            op(&m, m.mirror_position(s.position), s.case)
                .map(|r| r.mirror())
                .map_err(|e| match e {
                    FlipError::InvalidSite { kind, .. } => FlipError::InvalidSite { kind, site: s },
                    other => other,
                })
        }
    }
}

/// Applies the flip at `s`.
pub fn flip(ch: &DecoratedChain, s: FlipSite) -> Result<DecoratedChain, FlipError> {
    conjugate(ch, s, ltr_flip)
}

/// Applies the antiflip at `s`.
pub fn antiflip(ch: &DecoratedChain, s: FlipSite) -> Result<DecoratedChain, FlipError> {
    conjugate(ch, s, ltr_antiflip).map_err(|e| match e {
        FlipError::InvalidSite { site, .. } => FlipError::InvalidSite { kind: "antiflip", site },
        other => other,
    })
}

/// Every valid flip site, by position, left-to-right before mirrored.
pub fn flip_sites(ch: &DecoratedChain) -> Vec<FlipSite> {
    let m = ch.mirror();
    let mut out = Vec::new();
    for p in 1..=ch.len() {
        if let Some(s) = ltr_flip_shape(ch, p) {
            out.push(FlipSite::ltr(p, s.case));
        }
        if let Some(s) = ltr_flip_shape(&m, m.mirror_position(p)) {
            out.push(FlipSite::mirrored(p, s.case));
        }
    }
    out
}

/// Every antiflip site whose result is valid, ordered like [`flip_sites`].
pub fn antiflip_sites(ch: &DecoratedChain) -> Vec<FlipSite> {
    let mut out = Vec::new();
    for p in 1..=ch.len() {
        for o in [Orientation::LeftToRight, Orientation::Mirrored] {
            for case in [Case::A, Case::B] {
                let s = FlipSite { position: p, case, orientation: o };
                if antiflip(ch, s).is_ok() {
                    out.push(s);
                }
            }
        }
    }
    out
}

/// The antiflip site in the flipped chain that undoes a flip at `s`.
pub fn inverse_of_flip_site(s: FlipSite) -> FlipSite {
    match (s.orientation, s.case) {
        (Orientation::Mirrored, Case::B) => FlipSite { position: s.position - 1, ..s },
        _ => s,
    }
}

/// The flip site in the antiflipped chain that undoes an antiflip at `s`.
pub fn inverse_of_antiflip_site(s: FlipSite) -> FlipSite {
    match (s.orientation, s.case) {
        (Orientation::Mirrored, Case::B) => FlipSite { position: s.position + 1, ..s },
        _ => s,
    }
}
