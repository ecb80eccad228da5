//! Exact integer lattice routines behind the homology certificate.
//!
//! Classes live in `Z^{1+N}` with the form `diag(1, -1, ..., -1)`. Rationally
//! blowing down a T0 chain with class span `L` replaces the lattice by the
//! unimodular overlattice `L^perp + n * pi(Z^{1+N})`, where `pi` is orthogonal
//! projection onto `L^perp` and `n^2` is the order of the chain's fraction.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("bracket classes are linearly dependent")]
    Dependent,
    #[error("a bracket class has a nonzero line coefficient")]
    TouchesLine,
    #[error("a tracked class meets the blown-down chain")]
    NotOrthogonal,
    #[error("blown-down lattice is not unimodular")]
    NotUnimodular,
    #[error("blown-down lattice is not the standard diagonal lattice")]
    NotDiagonal,
    #[error("class has non-integral coordinates in the new basis")]
    NonIntegral,
}

type Row = Vec<BigInt>;

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn eta(x: &[BigInt], y: &[BigInt]) -> BigInt {
    let tail: BigInt = x[1..].iter().zip(&y[1..]).map(|(a, b)| a * b).sum();
    &x[0] * &y[0] - tail
}

fn dot(x: &[BigInt], y: &[BigInt]) -> BigInt {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Integer row echelon form on the first `cols` columns; returns the rank.
///
/// Only unimodular row operations are used, so the row span is preserved.
fn echelon(rows: &mut [Row], cols: usize) -> usize {
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        loop {
            let pivot = (r..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&i, &j| rows[i][c].abs().cmp(&rows[j][c].abs()));
            let Some(p) = pivot else {
                break;
            };
            rows.swap(r, p);
            let piv = rows[r].clone();
            let mut clean = true;
            for row in rows.iter_mut().skip(r + 1) {
                if row[c].is_zero() {
                    continue;
                }
                let q = row[c].div_floor(&piv[c]);
                for (x, y) in row.iter_mut().zip(&piv) {
                    *x -= &q * y;
                }
                clean &= row[c].is_zero();
            }
            if clean {
                r += 1;
                break;
            }
        }
    }
    r
}

/// Basis of the row span of `gens`.
fn span_basis(mut gens: Vec<Row>) -> Vec<Row> {
    let cols = gens.first().map_or(0, Vec::len);
    let r = echelon(&mut gens, cols);
    gens.truncate(r);
    gens
}

/// Basis of `{x in Z^m : a_i . x = 0}` for the rows `a_i`.
fn integer_kernel(a: &[Row], m: usize) -> Vec<Row> {
    let t = a.len();
    let mut rows: Vec<Row> = (0..m)
        .map(|j| {
            let mut row: Row = a.iter().map(|ai| ai[j].clone()).collect();
            row.extend((0..m).map(|k| if k == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let r = echelon(&mut rows, t);
    rows[r..].iter().map(|row| row[t..].to_vec()).collect()
}

fn rat(x: &BigInt) -> BigRational {
    BigRational::from_integer(x.clone())
}

fn inverse(mut g: Vec<Vec<BigRational>>) -> Option<Vec<Vec<BigRational>>> {
    let n = g.len();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !g[i][c].is_zero())?;
        g.swap(c, p);
        inv.swap(c, p);
        let d = g[c][c].clone();
        for k in 0..n {
            g[c][k] = &g[c][k] / &d;
            inv[c][k] = &inv[c][k] / &d;
        }
        for i in 0..n {
            if i != c && !g[i][c].is_zero() {
                let f = g[i][c].clone();
                for k in 0..n {
                    let (gc, ic) = (g[c][k].clone(), inv[c][k].clone());
                    g[i][k] -= &f * gc;
                    inv[i][k] -= &f * ic;
                }
            }
        }
    }
    Some(inv)
}

fn determinant(mut g: Vec<Vec<BigRational>>) -> BigRational {
    let n = g.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !g[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            g.swap(c, p);
            det = -det;
        }
        det *= g[c][c].clone();
        for i in c + 1..n {
            let f = &g[i][c] / &g[c][c];
            for k in c..n {
                let gc = g[c][k].clone();
                g[i][k] -= &f * gc;
            }
        }
    }
    det
}

/// Gram-Schmidt data `(mu, B)` for the Euclidean form.
fn gso(b: &[Row]) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let n = b.len();
    let gram: Vec<Vec<BigRational>> =
        (0..n).map(|i| (0..n).map(|j| rat(&dot(&b[i], &b[j]))).collect()).collect();
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut bn = vec![BigRational::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut s = gram[i][j].clone();
            for k in 0..j {
                s -= &mu[j][k] * &mu[i][k] * &bn[k];
            }
            mu[i][j] = s / &bn[j];
        }
        let mut s = gram[i][i].clone();
        for k in 0..i {
            s -= &mu[i][k] * &mu[i][k] * &bn[k];
        }
        bn[i] = s;
    }
    (mu, bn)
}

/// Nearest integer to `a / b` for `b > 0`.
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let two = big(2);
    (a * &two + b).div_floor(&(b * &two))
}

/// LLL reduction with `delta = 3/4` in all-integer arithmetic.
///
/// `d[i]` is the Gram determinant of the first `i` vectors and `lam[k][j]`
/// the scaled Gram-Schmidt coefficient `d[j+1] * mu[k][j]`.
fn lll(b: &mut [Row]) {
    let n = b.len();
    if n < 2 {
        return;
    }
    let mut d = vec![BigInt::zero(); n + 1];
    let mut lam = vec![vec![BigInt::zero(); n]; n];
    d[0] = BigInt::one();
    d[1] = dot(&b[0], &b[0]);
    let mut k = 1;
    let mut kmax = 0;

    fn reduce(b: &mut [Row], lam: &mut [Vec<BigInt>], d: &[BigInt], k: usize, l: usize) {
        if (&lam[k][l] * big(2)).abs() <= d[l + 1] {
            return;
        }
        let q = round_div(&lam[k][l], &d[l + 1]);
        let bl = b[l].clone();
        for (x, y) in b[k].iter_mut().zip(&bl) {
            *x -= &q * y;
        }
        lam[k][l] -= &q * &d[l + 1];
        for i in 0..l {
            let t = &q * &lam[l][i];
            lam[k][i] -= t;
        }
    }

    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = dot(&b[k], &b[j]);
                for i in 0..j {
                    u = (&d[i + 1] * &u - &lam[k][i] * &lam[j][i]) / &d[i];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    d[k + 1] = u;
                }
            }
        }
        reduce(b, &mut lam, &d, k, k - 1);
        let lhs = &d[k + 1] * &d[k - 1] * big(4);
        let rhs = &d[k] * &d[k] * big(3) - &lam[k][k - 1] * &lam[k][k - 1] * big(4);
        if lhs < rhs {
            b.swap(k, k - 1);
            for j in 0..k - 1 {
                let t = lam[k][j].clone();
                lam[k][j] = core::mem::replace(&mut lam[k - 1][j], t);
            }
            let l = lam[k][k - 1].clone();
            let big_b = (&d[k - 1] * &d[k + 1] + &l * &l) / &d[k];
            for i in k + 1..=kmax {
                let t = lam[i][k].clone();
                lam[i][k] = (&d[k + 1] * &lam[i][k - 1] - &l * &t) / &d[k];
                lam[i][k - 1] = (&big_b * &t + &l * &lam[i][k]) / &d[k + 1];
            }
            d[k] = big_b;
            k = (k - 1).max(1);
        } else {
            for l in (0..k - 1).rev() {
                reduce(b, &mut lam, &d, k, l);
            }
            k += 1;
        }
    }
}

/// All nonzero coefficient vectors `x` with `|sum x_i b_i|^2 == target`.
fn vectors_of_norm(b: &[Row], target: &BigInt) -> Vec<Vec<BigInt>> {
    let (mu, bn) = gso(b);
    let n = b.len();
    let bound = rat(target);
    let mut out = Vec::new();
    let mut x = vec![BigInt::zero(); n];

    fn rec(
        i: usize,
        partial: BigRational,
        x: &mut Vec<BigInt>,
        mu: &[Vec<BigRational>],
        bn: &[BigRational],
        bound: &BigRational,
        out: &mut Vec<Vec<BigInt>>,
    ) {
        let n = x.len();
        let centre: BigRational = -(i + 1..n).map(|j| &mu[j][i] * rat(&x[j])).sum::<BigRational>();
        let cost = |v: &BigInt| {
            let d = rat(v) - &centre;
            &partial + &bn[i] * &d * &d
        };
        let start = centre.floor().to_integer();
        for dir in [1i64, -1] {
            let mut v = if dir == 1 { start.clone() } else { &start - 1 };
            loop {
                let c = cost(&v);
                if c > *bound {
                    break;
                }
                x[i] = v.clone();
                if i == 0 {
                    if c == *bound {
                        out.push(x.clone());
                    }
                } else {
                    rec(i - 1, c, x, mu, bn, bound, out);
                }
                v += dir;
            }
        }
        x[i] = BigInt::zero();
    }

    if n > 0 {
        rec(n - 1, BigRational::zero(), &mut x, &mu, &bn, &bound, &mut out);
    }
    out.retain(|v| v.iter().any(|c| !c.is_zero()));
    out
}

/// Result of a lattice blow-down: new exceptional rank and the tracked rows in the new basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blowdown {
    pub rank: usize,
    pub rows: Vec<Vec<i64>>,
}

/// Rationally blows down the classes `chain` of a T0 chain of order `n^2`,
/// re-expressing each of `tracked` in a standard basis `l, e'_1, ..., e'_k`
/// of the new lattice, where `l` is kept.
pub fn blow_down(chain: &[Vec<i64>], n: i64, tracked: &[Vec<i64>]) -> Result<Blowdown, LatticeError> {
    let m = chain[0].len();
    let v: Vec<Row> = chain.iter().map(|r| r.iter().map(|&x| big(x)).collect()).collect();
    if v.iter().any(|r| !r[0].is_zero()) {
        return Err(LatticeError::TouchesLine);
    }
    let t = v.len();
    // a_i = eta v_i, so a_i . x = v_i .eta x
    let a: Vec<Row> = v
        .iter()
        .map(|r| r.iter().enumerate().map(|(k, x)| if k == 0 { x.clone() } else { -x }).collect())
        .collect();
    let tracked_big: Vec<Row> = tracked.iter().map(|r| r.iter().map(|&x| big(x)).collect()).collect();
    if tracked_big.iter().any(|x| a.iter().any(|ai| !dot(ai, x).is_zero())) {
        return Err(LatticeError::NotOrthogonal);
    }

    let kernel = integer_kernel(&a, m);
    if kernel.len() != m - t {
        return Err(LatticeError::Dependent);
    }
    let gram_l: Vec<Vec<BigRational>> =
        (0..t).map(|i| (0..t).map(|j| rat(&eta(&v[i], &v[j]))).collect()).collect();
    let gi = inverse(gram_l).ok_or(LatticeError::Dependent)?;

    // n * pi(e_j) = n * (e_j - sum_i v_i (G^-1 a[.][j])_i)
    let nq = BigRational::from_integer(big(n));
    let mut projected: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    for j in 0..m {
        let coeff: Vec<BigRational> = (0..t)
            .map(|i| (0..t).map(|s| &gi[i][s] * rat(&a[s][j])).sum())
            .collect();
        let col: Vec<BigRational> = (0..m)
            .map(|k| {
                let unit = if k == j { BigRational::one() } else { BigRational::zero() };
                let sub: BigRational = (0..t).map(|i| &coeff[i] * rat(&v[i][k])).sum();
                &nq * (unit - sub)
            })
            .collect();
        projected.push(col);
    }
    let d = projected
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let dq = rat(&d);
    let mut gens: Vec<Row> = kernel.iter().map(|r| r.iter().map(|x| x * &d).collect()).collect();
    gens.extend(projected.iter().map(|r| r.iter().map(|x| (x * &dq).to_integer()).collect()));
    let basis = span_basis(gens);
    if basis.len() != m - t {
        return Err(LatticeError::NotUnimodular);
    }

    let d2 = &d * &d;
    let mut gram: Vec<Vec<BigRational>> = Vec::with_capacity(basis.len());
    for x in &basis {
        let mut row = Vec::with_capacity(basis.len());
        for y in &basis {
            let (q, r) = eta(x, y).div_rem(&d2);
            if !r.is_zero() {
                return Err(LatticeError::NotUnimodular);
            }
            row.push(rat(&q));
        }
        gram.push(row);
    }
    if determinant(gram).abs() != BigRational::one() {
        return Err(LatticeError::NotUnimodular);
    }

    // l lies in the lattice, so the lattice splits as Z l + (l^perp); the form on
    // l^perp is the negated Euclidean one on the exceptional coordinates
    let mut perp: Vec<Row> = basis
        .iter()
        .map(|x| x[1..].to_vec())
        .collect();
    perp = span_basis(perp);
    let k = m - t - 1;
    if perp.len() != k {
        return Err(LatticeError::NotUnimodular);
    }
    lll(&mut perp);
    let mut units: Vec<Row> = vectors_of_norm(&perp, &d2)
        .into_iter()
        .map(|x| {
            (0..m - 1)
                .map(|c| (0..k).map(|i| &x[i] * &perp[i][c]).sum())
                .collect::<Row>()
        })
        .filter(|u: &Row| u.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_positive()))
        .collect();
    units.sort();
    units.dedup();
    if units.len() != k {
        return Err(LatticeError::NotDiagonal);
    }

    let mut rows = Vec::with_capacity(tracked_big.len());
    for x in &tracked_big {
        let mut out = vec![x[0].to_i64().ok_or(LatticeError::NonIntegral)?];
        let mut rebuilt = vec![BigInt::zero(); m - 1];
        for u in &units {
            let (c, r) = dot(&x[1..], u).div_rem(&d);
            if !r.is_zero() {
                return Err(LatticeError::NonIntegral);
            }
            for (acc, ui) in rebuilt.iter_mut().zip(u) {
                *acc += &c * ui;
            }
            out.push(c.to_i64().ok_or(LatticeError::NonIntegral)?);
        }
        let scaled: Row = x[1..].iter().map(|c| c * &d).collect();
        if rebuilt != scaled {
            return Err(LatticeError::NonIntegral);
        }
        rows.push(out);
    }
    Ok(Blowdown { rank: k, rows })
}
