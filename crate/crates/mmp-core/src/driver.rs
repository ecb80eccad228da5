//! Move traces between a minimal resolution and an M-resolution.
//!
//! [`to_minimal`] walks from the M-resolution down to the minimal resolution by
//! rational blow-ups and flips, always working on the rightmost bracket.
//! [`from_minimal`] is its formal inverse: rational blow-downs and antiflips.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::chain::{
    chain_from_fraction, contract_to_minimal, hj_eval, rational_blow_down, rational_blow_up,
    ChainError, DecoratedChain, Fraction, Segment,
};
use crate::flip::{
    self, inverse_of_antiflip_site, inverse_of_flip_site, ltr_flip_shape, Case, FlipError, FlipSite,
    Orientation,
};
use crate::t0::{t0_recognize, validate_m_resolution, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    RationalBlowUp,
    RationalBlowDown,
    Flip,
    Antiflip,
}

impl MoveKind {
    /// Stable name used in trace files.
    pub fn name(self) -> &'static str {
        match self {
            MoveKind::RationalBlowUp => "blow-up",
            MoveKind::RationalBlowDown => "blow-down",
            MoveKind::Flip => "flip",
            MoveKind::Antiflip => "antiflip",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Self::RationalBlowUp, Self::RationalBlowDown, Self::Flip, Self::Antiflip]
            .into_iter()
            .find(|k| k.name() == s)
    }

    fn inverse(self) -> Self {
        match self {
            MoveKind::RationalBlowUp => MoveKind::RationalBlowDown,
            MoveKind::RationalBlowDown => MoveKind::RationalBlowUp,
            MoveKind::Flip => MoveKind::Antiflip,
            MoveKind::Antiflip => MoveKind::Flip,
        }
    }
}

/// Where a move acts. Positions are 1-based segments of the state before the move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveSite {
    Bracket(usize),
    Span(usize, usize),
    Flip(FlipSite),
}

impl fmt::Display for MoveSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveSite::Bracket(b) => write!(f, "{b}"),
            MoveSite::Span(a, b) => write!(f, "{a}..{b}"),
            MoveSite::Flip(s) => write!(f, "{s}"),
        }
    }
}

impl MoveSite {
    /// Parses a site as written by [`fmt::Display`], given the move kind.
    pub fn parse(kind: MoveKind, s: &str) -> Option<Self> {
        match kind {
            MoveKind::RationalBlowUp => s.trim().parse().ok().map(MoveSite::Bracket),
            MoveKind::RationalBlowDown => {
                let (a, b) = s.trim().split_once("..")?;
                Some(MoveSite::Span(a.parse().ok()?, b.parse().ok()?))
            }
            MoveKind::Flip | MoveKind::Antiflip => s.parse().ok().map(MoveSite::Flip),
        }
    }
}

/// One step with full snapshots on both sides.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Move {
    pub kind: MoveKind,
    pub site: MoveSite,
    pub before: DecoratedChain,
    pub after: DecoratedChain,
}

impl Move {
    /// Applies `kind` at `site` to `ch` and records the step.
    pub fn apply(kind: MoveKind, site: MoveSite, ch: &DecoratedChain) -> Result<Self, DriverError> {
        let after = match (kind, site) {
            (MoveKind::RationalBlowUp, MoveSite::Bracket(b)) => rational_blow_up(ch, b)?,
            (MoveKind::RationalBlowDown, MoveSite::Span(a, b)) => rational_blow_down(ch, a..=b)?,
            (MoveKind::Flip, MoveSite::Flip(s)) => flip::flip(ch, s)?,
            (MoveKind::Antiflip, MoveSite::Flip(s)) => flip::antiflip(ch, s)?,
            _ => return Err(DriverError::SiteKindMismatch),
        };
        Ok(Self { kind, site, before: ch.clone(), after })
    }

    /// The move that undoes this one.
    pub fn inverse(&self) -> Move {
        let site = match (self.kind, self.site) {
            (MoveKind::RationalBlowUp, MoveSite::Bracket(b)) => {
                let len = self.before.segment(b).map_or(1, |s| s.weights().len());
                MoveSite::Span(b, b + len - 1)
            }
            (MoveKind::RationalBlowDown, MoveSite::Span(a, _)) => MoveSite::Bracket(a),
            (MoveKind::Flip, MoveSite::Flip(s)) => MoveSite::Flip(inverse_of_flip_site(s)),
            (MoveKind::Antiflip, MoveSite::Flip(s)) => MoveSite::Flip(inverse_of_antiflip_site(s)),
            (_, s) => s,
        };
        Move {
            kind: self.kind.inverse(),
            site,
            before: self.after.clone(),
            after: self.before.clone(),
        }
    }

    /// 1-based segments of `before` touched by the move.
    pub fn affected_span(&self) -> (usize, usize) {
        match self.site {
            MoveSite::Bracket(b) => (b, b),
            MoveSite::Span(a, b) => (a, b),
            MoveSite::Flip(s) => {
                let width = match (self.kind, s.case) {
                    (MoveKind::Antiflip, Case::B) => 1,
                    _ => 2,
                };
                match s.orientation {
                    Orientation::LeftToRight => (s.position, s.position + width),
                    Orientation::Mirrored => (s.position - width, s.position),
                }
            }
        }
    }

    /// Human-readable line such as `A symplectic antiflip along 4-4: [5,2]-1-6-2-2`.
    pub fn describe(&self) -> String {
        let what = match self.kind {
            MoveKind::RationalBlowUp => "A rational blow-up",
            MoveKind::RationalBlowDown => "A rational blow-down",
            MoveKind::Flip => "A symplectic flip",
            MoveKind::Antiflip => "A symplectic antiflip",
        };
        let (a, b) = self.affected_span();
        format!("{what} along {}: {}", self.before.render_span(a..=b), self.after)
    }

    fn mirror(&self) -> Move {
        let len = self.before.len();
        let site = match self.site {
            MoveSite::Bracket(b) => MoveSite::Bracket(len + 1 - b),
            MoveSite::Span(a, b) => MoveSite::Span(len + 1 - b, len + 1 - a),
            MoveSite::Flip(s) => MoveSite::Flip(FlipSite {
                position: len + 1 - s.position,
                case: s.case,
                orientation: match s.orientation {
                    Orientation::LeftToRight => Orientation::Mirrored,
                    Orientation::Mirrored => Orientation::LeftToRight,
                },
            }),
        };
        Move { kind: self.kind, site, before: self.before.mirror(), after: self.after.mirror() }
    }
}

/// A replayable sequence of moves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MoveTrace {
    pub start: DecoratedChain,
    pub moves: Vec<Move>,
    pub end: DecoratedChain,
}

impl MoveTrace {
    /// Numbered text lines after a `Start:` line.
    pub fn render(&self) -> String {
        let mut out = format!("Start: {}\n", self.start);
        for (k, m) in self.moves.iter().enumerate() {
            out.push_str(&format!("{}. {}\n", k + 1, m.describe()));
        }
        out
    }

    fn mirror(&self) -> MoveTrace {
        MoveTrace {
            start: self.start.mirror(),
            moves: self.moves.iter().map(Move::mirror).collect(),
            end: self.end.mirror(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DriverError {
    #[error("not an M-resolution: {}", first_violation(.0))]
    InvalidMResolution(Vec<Violation>),
    #[error("bracket at {0} meets a (-1)-curve but no flip applies")]
    FlipBlocked(usize),
    #[error("flip at bracket {0} would destroy its initial curve")]
    InitialCurveLost(usize),
    #[error("move {index} does not apply: {reason}")]
    MoveNotApplicable { index: usize, reason: String },
    #[error("move kind and site do not match")]
    SiteKindMismatch,
    #[error("trace ended at {0} instead of the minimal resolution")]
    WrongEnd(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Flip(#[from] FlipError),
}

fn first_violation(v: &[Violation]) -> String {
    v.first().map(|x| format!("{x}")).unwrap_or_default()
}

/// Minimal resolution of the singularity underlying `ch`.
pub fn minimal_resolution(ch: &DecoratedChain) -> Result<Vec<i64>, ChainError> {
    contract_to_minimal(&ch.flatten())
}

fn check_initial_curve(ch: &DecoratedChain, pos: usize, s: FlipSite) -> Result<(), DriverError> {
    let (view, p) = match s.orientation {
        Orientation::LeftToRight => (ch.clone(), pos),
        Orientation::Mirrored => {
            let m = ch.mirror();
            let p = m.mirror_position(pos);
            (m, p)
        }
    };
    let shape = ltr_flip_shape(&view, p).ok_or(DriverError::FlipBlocked(pos))?;
    let k = t0_recognize(&shape.bracket)
        .ok_or(DriverError::FlipBlocked(pos))?
        .initial_index;
    let survives = match shape.case {
        Case::A => k <= shape.i,
        Case::B => k == 1,
    };
    if survives {
        Ok(())
    } else {
        Err(DriverError::InitialCurveLost(pos))
    }
}

fn walk_down(ch: &DecoratedChain) -> Result<MoveTrace, DriverError> {
    let mut state = ch.clone();
    let mut moves = Vec::new();
    while let Some(&p) = state.bracket_positions().last() {
        let mirror = state.mirror();
        let site = if let Some(s) = ltr_flip_shape(&state, p) {
            Some(FlipSite::ltr(p, s.case))
        } else {
            ltr_flip_shape(&mirror, mirror.mirror_position(p)).map(|s| FlipSite::mirrored(p, s.case))
        };
        let mv = match site {
            Some(s) => {
                check_initial_curve(&state, p, s)?;
                Move::apply(MoveKind::Flip, MoveSite::Flip(s), &state)?
            }
            None => {
                if let (Some(Segment::Plain(1)), Some(Segment::Plain(_))) =
                    (state.segment(p + 1), state.segment(p + 2))
                {
                    return Err(DriverError::FlipBlocked(p));
                }
                Move::apply(MoveKind::RationalBlowUp, MoveSite::Bracket(p), &state)?
            }
        };
        state = mv.after.clone();
        moves.push(mv);
    }
    let end = state;
    let expected = Fraction::from_projective(hj_eval(&ch.flatten()))
        .map(chain_from_fraction)
        .map_err(DriverError::Chain)?;
    if end.flatten() != expected || end.segments().iter().any(|s| s.plain() == Some(1)) {
        return Err(DriverError::WrongEnd(format!("{end}")));
    }
    Ok(MoveTrace { start: ch.clone(), moves, end })
}

/// Rational blow-ups and flips from the M-resolution `ch` to the minimal resolution.
///
/// A chain that only validates after mirroring is processed mirrored and the
/// trace is mirrored back.
pub fn to_minimal(ch: &DecoratedChain) -> Result<MoveTrace, DriverError> {
    let report = validate_m_resolution(ch);
    if report.is_valid() {
        return walk_down(ch);
    }
    let m = ch.mirror();
    if validate_m_resolution(&m).is_valid() {
        return walk_down(&m).map(|t| t.mirror());
    }
    Err(DriverError::InvalidMResolution(report.violations))
}

/// Rational blow-downs and antiflips from the minimal resolution to `ch`.
pub fn from_minimal(ch: &DecoratedChain) -> Result<MoveTrace, DriverError> {
    to_minimal(ch).map(|t| invert_trace(&t))
}

/// Reverses a trace, replacing every move by its inverse.
pub fn invert_trace(t: &MoveTrace) -> MoveTrace {
    MoveTrace {
        start: t.end.clone(),
        moves: t.moves.iter().rev().map(Move::inverse).collect(),
        end: t.start.clone(),
    }
}

/// Applies `(kind, site)` moves in order starting from `start`.
pub fn replay(
    start: &DecoratedChain,
    moves: &[(MoveKind, MoveSite)],
) -> Result<MoveTrace, DriverError> {
    let mut state = start.clone();
    let mut out = Vec::with_capacity(moves.len());
    for (index, &(kind, site)) in moves.iter().enumerate() {
        let mv = Move::apply(kind, site, &state).map_err(|e| DriverError::MoveNotApplicable {
            index,
            reason: format!("{e}"),
        })?;
        state = mv.after.clone();
        out.push(mv);
    }
    Ok(MoveTrace { start: start.clone(), moves: out, end: state })
}

/// Replays a stored trace and checks every snapshot against it.
pub fn replay_trace(t: &MoveTrace) -> Result<DecoratedChain, DriverError> {
    let steps: Vec<_> = t.moves.iter().map(|m| (m.kind, m.site)).collect();
    let r = replay(&t.start, &steps)?;
    for (index, (got, want)) in r.moves.iter().zip(&t.moves).enumerate() {
        if got != want {
            return Err(DriverError::MoveNotApplicable {
                index,
                reason: String::from("snapshot mismatch"),
            });
        }
    }
    if r.end != t.end {
        return Err(DriverError::MoveNotApplicable {
            index: t.moves.len(),
            reason: String::from("end snapshot mismatch"),
        });
    }
    Ok(r.end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ch(s: &str) -> DecoratedChain {
        s.parse().unwrap()
    }

    fn shape(t: &MoveTrace) -> Vec<(MoveKind, MoveSite)> {
        t.moves.iter().map(|m| (m.kind, m.site)).collect()
    }

    #[test]
    fn first_example_up() {
        let t = to_minimal(&ch("[5,2]-1-[6,2,2]")).unwrap();
        assert_eq!(t.end, ch("4-4-2-2"));
        assert_eq!(
            shape(&t),
            vec![
                (MoveKind::RationalBlowUp, MoveSite::Bracket(3)),
                (MoveKind::Flip, MoveSite::Flip(FlipSite::ltr(1, Case::B))),
            ]
        );
    }

    #[test]
    fn second_example_up() {
        let t = to_minimal(&ch("[2,5,3]-1-[2,5,3]-2")).unwrap();
        assert_eq!(t.end, ch("2-4-3-3-2"));
        assert_eq!(
            shape(&t),
            vec![
                (MoveKind::RationalBlowUp, MoveSite::Bracket(3)),
                (MoveKind::Flip, MoveSite::Flip(FlipSite::ltr(1, Case::A))),
                (MoveKind::Flip, MoveSite::Flip(FlipSite::ltr(2, Case::B))),
            ]
        );
    }

    #[test]
    fn third_example_up() {
        let t = to_minimal(&ch("[2,5]-1-[5,2]")).unwrap();
        assert_eq!(t.end, ch("2-4-4-2"));
        let kinds: Vec<_> = t.moves.iter().map(|m| m.kind).collect();
        assert_eq!(
            kinds,
            vec![MoveKind::RationalBlowUp, MoveKind::Flip, MoveKind::RationalBlowUp]
        );
    }

    #[test]
    fn rendered_down_traces() {
        let t = from_minimal(&ch("[5,2]-1-[6,2,2]")).unwrap();
        assert_eq!(
            t.render(),
            "Start: 4-4-2-2\n\
             1. A symplectic antiflip along 4-4: [5,2]-1-6-2-2\n\
             2. A rational blow-down along 6-2-2: [5,2]-1-[6,2,2]\n"
        );
        let t = from_minimal(&ch("[2,5]-1-[5,2]")).unwrap();
        assert_eq!(
            t.render(),
            "Start: 2-4-4-2\n\
             1. A rational blow-down along 4: 2-[4]-4-2\n\
             2. A symplectic antiflip along 2-[4]-4: [2,5]-1-5-2\n\
             3. A rational blow-down along 5-2: [2,5]-1-[5,2]\n"
        );
    }

    #[test]
    fn inversion_is_involutive() {
        let t = to_minimal(&ch("[2,5,3]-1-[2,5,3]-2")).unwrap();
        assert_eq!(invert_trace(&invert_trace(&t)), t);
        let empty = MoveTrace { start: ch("2-3"), moves: vec![], end: ch("2-3") };
        assert_eq!(invert_trace(&empty), empty);
    }

    #[test]
    fn replay_examples() {
        let t = from_minimal(&ch("[5,2]-1-[6,2,2]")).unwrap();
        assert_eq!(replay(&ch("4-4-2-2"), &shape(&t)).unwrap().end, ch("[5,2]-1-[6,2,2]"));
        assert_eq!(replay_trace(&t).unwrap(), ch("[5,2]-1-[6,2,2]"));
        assert_eq!(replay(&ch("2-3"), &[]).unwrap().end, ch("2-3"));
        let bad = [(MoveKind::RationalBlowUp, MoveSite::Bracket(1))];
        assert!(matches!(
            replay(&ch("2-3"), &bad),
            Err(DriverError::MoveNotApplicable { index: 0, .. })
        ));
    }

    #[test]
    fn mirrored_input_is_normalized() {
        let x = ch("[2,5,3]-1-[2,5,3]-2").mirror();
        let t = to_minimal(&x).unwrap();
        assert_eq!(t.start, x);
        assert_eq!(t.end, ch("2-4-3-3-2").mirror());
        assert_eq!(replay_trace(&t).unwrap(), t.end);
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(matches!(
            to_minimal(&ch("[4]-1-3")),
            Err(DriverError::InvalidMResolution(_))
        ));
    }

    #[test]
    fn move_site_text() {
        for (k, s) in [
            (MoveKind::RationalBlowUp, MoveSite::Bracket(3)),
            (MoveKind::RationalBlowDown, MoveSite::Span(3, 5)),
            (MoveKind::Flip, MoveSite::Flip(FlipSite::ltr(1, Case::B))),
        ] {
            assert_eq!(MoveSite::parse(k, &format!("{s}")), Some(s));
        }
        assert_eq!(MoveKind::from_name("antiflip"), Some(MoveKind::Antiflip));
    }
}
