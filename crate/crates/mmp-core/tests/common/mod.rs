//! Seeded generators shared by the integration and acceptance tests.
#![allow(dead_code)]

use mmp_core::chain::{contract_to_minimal, rational_blow_down, Segment};
use mmp_core::flip::{antiflip, antiflip_sites, flip, ltr_flip_shape};
use mmp_core::t0::{is_t0, t0_generate, validate_m_resolution};
use mmp_core::{DecoratedChain, FlipSite, Orientation};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn plains(r: &mut ChaCha8Rng, max_len: usize, lo: i64, hi: i64) -> Vec<Segment> {
    let n = r.gen_range(0..=max_len);
    (0..n).map(|_| Segment::Plain(r.gen_range(lo..=hi))).collect()
}

/// A chain carrying a valid flip configuration, and its site.
pub fn flip_config(r: &mut ChaCha8Rng, max_bracket: usize, context: usize) -> (DecoratedChain, FlipSite) {
    let brackets = t0_generate(max_bracket);
    loop {
        let b = brackets.choose(r).expect("nonempty").clone();
        let b1 = b[0];
        let c = r.gen_range((b1 - 2).max(1)..=b1 + 4);
        let mut segs = plains(r, context, 2, 6);
        let pos = segs.len() + 1;
        segs.push(Segment::Bracket(b));
        segs.push(Segment::Plain(1));
        segs.push(Segment::Plain(c));
        segs.extend(plains(r, context, 2, 6));
        let ch = DecoratedChain::new(segs).expect("valid segments");
        let Some(shape) = ltr_flip_shape(&ch, pos) else {
            continue;
        };
        if contract_to_minimal(&ch.flatten()).is_err() {
            continue;
        }
        if r.gen_bool(0.5) {
            let m = ch.mirror();
            let p = m.mirror_position(pos);
            return (m, FlipSite::mirrored(p, shape.case));
        }
        return (ch, FlipSite::ltr(pos, shape.case));
    }
}

pub fn minimal_chain(r: &mut ChaCha8Rng, max_len: usize, max_weight: i64) -> DecoratedChain {
    let len = r.gen_range(1..=max_len);
    let w: Vec<i64> = (0..len).map(|_| r.gen_range(2..=max_weight)).collect();
    DecoratedChain::plain(&w).expect("weights >= 2")
}

/// Plain spans without (-1)-curves whose weights form a T0 chain.
fn t0_spans(ch: &DecoratedChain) -> Vec<(usize, usize)> {
    let segs = ch.segments();
    let mut out = Vec::new();
    for a in 0..segs.len() {
        let mut w = Vec::new();
        for (b, s) in segs.iter().enumerate().skip(a) {
            match s.plain() {
                Some(x) if x >= 2 => w.push(x),
                _ => break,
            }
            if is_t0(&w) {
                out.push((a + 1, b + 1));
            }
        }
    }
    out
}

/// A valid M-resolution with at least one bracket, grown from a random
/// minimal chain by antiflips and rational blow-downs.
pub fn m_resolution(r: &mut ChaCha8Rng) -> DecoratedChain {
    loop {
        let mut ch = minimal_chain(r, 4, 7);
        let steps = r.gen_range(1..=4);
        for _ in 0..steps {
            let spans = t0_spans(&ch);
            let sites = antiflip_sites(&ch);
            let next = if !spans.is_empty() && (sites.is_empty() || r.gen_bool(0.4)) {
                let &(a, b) = spans.choose(r).expect("nonempty");
                rational_blow_down(&ch, a..=b).ok()
            } else if let Some(&s) = sites.choose(r) {
                antiflip(&ch, s).ok()
            } else {
                None
            };
            match next {
                Some(n) => ch = n,
                None => break,
            }
        }
        if ch.has_brackets() && validate_m_resolution(&ch).is_valid() {
            return ch;
        }
    }
}

/// Minimal model of the underlying chain, as weights.
pub fn minimal_of(ch: &DecoratedChain) -> Vec<i64> {
    contract_to_minimal(&ch.flatten()).expect("contractible")
}

/// Left-to-right view of a site: the chain as seen by the rewrite and the position there.
pub fn ltr_view(ch: &DecoratedChain, s: FlipSite) -> (DecoratedChain, usize) {
    match s.orientation {
        Orientation::LeftToRight => (ch.clone(), s.position),
        Orientation::Mirrored => {
            let m = ch.mirror();
            let p = m.mirror_position(s.position);
            (m, p)
        }
    }
}

pub fn flipped(ch: &DecoratedChain, s: FlipSite) -> DecoratedChain {
    flip(ch, s).expect("generated site is valid")
}

/// Exceptional rank of the filling lattice of `ch` after all blow-downs.
pub fn filling_rank(ch: &DecoratedChain) -> usize {
    let e = mmp_core::chain::dual_string(&minimal_of(ch)).len();
    let blown: usize = ch
        .segments()
        .iter()
        .filter(|s| s.is_bracket())
        .map(|s| s.weights().len())
        .sum();
    e + ch.flatten().len() - blown
}
