//! Sparse elimination modulo the Mersenne prime 2^61 − 1.
//!
//! Rank modulo a prime never exceeds the rational rank. Callers use that lower
//! bound together with `∂∂ = 0` to certify exact ranks cheaply.

use num::{BigInt, Integer, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::Q;

pub const PRIME: u64 = (1 << 61) - 1;

#[inline]
fn reduce(x: u128) -> u64 {
    let lo = (x as u64) & PRIME;
    let hi = (x >> 61) as u64;
    let mut s = lo + (hi & PRIME) + (hi >> 61);
    while s >= PRIME {
        s -= PRIME;
    }
    s
}

#[inline]
pub fn mul(a: u64, b: u64) -> u64 {
    reduce(a as u128 * b as u128)
}

#[inline]
pub fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= PRIME {
        s - PRIME
    } else {
        s
    }
}

#[inline]
pub fn neg(a: u64) -> u64 {
    if a == 0 {
        0
    } else {
        PRIME - a
    }
}

pub fn pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    r
}

pub fn inv(a: u64) -> u64 {
    debug_assert!(a != 0);
    pow(a, PRIME - 2)
}

fn bigint_mod(x: &BigInt) -> u64 {
    let m = BigInt::from(PRIME);
    x.mod_floor(&m).to_u64().expect("residue fits in u64")
}

/// Image of a rational in the prime field; fails when the denominator vanishes.
pub fn residue(x: &Q) -> Result<u64> {
    let d = bigint_mod(x.denom());
    if d == 0 {
        return Err(Error::Invariant(
            "denominator divisible by the modulus".into(),
        ));
    }
    Ok(mul(bigint_mod(x.numer()), inv(d)))
}

pub fn residue_i64(x: i64) -> u64 {
    if x >= 0 {
        (x as u64) % PRIME
    } else {
        neg(x.unsigned_abs() % PRIME)
    }
}

pub type ModRow = Vec<(u32, u64)>;

/// Echelon form over the prime field with monic pivot rows.
pub struct ModEchelon {
    pivots: Vec<Option<ModRow>>,
    rank: usize,
}

impl ModEchelon {
    pub fn new(ncols: usize) -> Self {
        ModEchelon {
            pivots: vec![None; ncols],
            rank: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Adds a row (sorted by column, nonzero entries); returns `true` when the rank grew.
    pub fn insert(&mut self, mut row: ModRow) -> bool {
        let mut scratch = Vec::new();
        loop {
            let Some(&(c, lead)) = row.first() else {
                return false;
            };
            match &self.pivots[c as usize] {
                None => {
                    let s = inv(lead);
                    for e in row.iter_mut() {
                        e.1 = mul(e.1, s);
                    }
                    self.pivots[c as usize] = Some(row);
                    self.rank += 1;
                    return true;
                }
                Some(p) => {
                    let f = neg(lead);
                    scratch.clear();
                    let (mut i, mut j) = (1, 1);
                    while i < row.len() || j < p.len() {
                        let ci = row.get(i).map_or(u32::MAX, |e| e.0);
                        let cj = p.get(j).map_or(u32::MAX, |e| e.0);
                        if ci < cj {
                            scratch.push(row[i]);
                            i += 1;
                        } else if cj < ci {
                            scratch.push((cj, mul(f, p[j].1)));
                            j += 1;
                        } else {
                            let v = add(row[i].1, mul(f, p[j].1));
                            if v != 0 {
                                scratch.push((ci, v));
                            }
                            i += 1;
                            j += 1;
                        }
                    }
                    std::mem::swap(&mut row, &mut scratch);
                }
            }
        }
    }
}

/// Rank over the prime field of a set of sparse rows.
pub fn rank<I: IntoIterator<Item = ModRow>>(ncols: usize, rows: I) -> usize {
    let mut rows: Vec<ModRow> = rows.into_iter().filter(|r| !r.is_empty()).collect();
    rows.sort_by_key(|r| (r[0].0, r.len()));
    let mut e = ModEchelon::new(ncols);
    for r in rows {
        e.insert(r);
        if e.rank() == ncols {
            break;
        }
    }
    e.rank()
}

pub fn row_from_q(entries: &[(usize, Q)]) -> Result<ModRow> {
    let mut row = Vec::with_capacity(entries.len());
    for (c, x) in entries {
        if x.is_zero() {
            continue;
        }
        let r = residue(x)?;
        if r != 0 {
            row.push((*c as u32, r));
        }
    }
    row.sort_by_key(|e| e.0);
    Ok(row)
}
