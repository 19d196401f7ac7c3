//! Binary codings and the two iterated function systems.
//!
//! The planar system is `f0(x, y) = (λx, y/2)`, `f1(x, y) = (λx + 1 − λ, y/2 + 1/2)`
//! and its projection to the first coordinate is `g0(x) = λx`, `g1(x) = λx + 1 − λ`.
//! Words are read left to right: `f_w = f_{w1} ∘ … ∘ f_{wn}`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Longest word the library accepts.
pub const MAX_DEPTH: usize = 4096;

/// Relative slack used when an integer scale is defined by a power
/// inequality and both sides agree up to rounding (exact powers).
pub const TIE_RELATIVE: f64 = 1e-12;

/// Finite word over {0,1}, bit-packed little-endian within 64-bit blocks.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct SymbolWord {
    blocks: Vec<u64>,
    len: usize,
}

impl SymbolWord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        SymbolWord {
            blocks: Vec::with_capacity(n.div_ceil(64)),
            len: 0,
        }
    }

    pub fn zeros(n: usize) -> Self {
        SymbolWord {
            blocks: vec![0; n.div_ceil(64)],
            len: n,
        }
    }

    pub fn ones(n: usize) -> Self {
        Self::repeat(&[1], n)
    }

    /// The first `n` symbols of the periodic word `pattern pattern …`.
    pub fn repeat(pattern: &[u8], n: usize) -> Self {
        let mut w = Self::with_capacity(n);
        if pattern.is_empty() {
            return Self::zeros(n);
        }
        for k in 0..n {
            w.push(pattern[k % pattern.len()] & 1);
        }
        w
    }

    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        if digits.len() > MAX_DEPTH {
            return Err(Error::invalid("word", format!("length {} exceeds {MAX_DEPTH}", digits.len())));
        }
        let mut w = Self::with_capacity(digits.len());
        for &d in digits {
            if d > 1 {
                return Err(Error::invalid("word", format!("symbol {d} is not binary")));
            }
            w.push(d);
        }
        Ok(w)
    }

    /// Uniformly random word of length `n`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut blocks: Vec<u64> = (0..n.div_ceil(64)).map(|_| rng.gen()).collect();
        if n % 64 != 0 {
            if let Some(last) = blocks.last_mut() {
                *last &= (1u64 << (n % 64)) - 1;
            }
        }
        SymbolWord { blocks, len: n }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Symbol at 0-based position `i`.
    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        debug_assert!(i < self.len);
        ((self.blocks[i / 64] >> (i % 64)) & 1) as u8
    }

    #[inline]
    pub fn push(&mut self, s: u8) {
        let i = self.len;
        if i % 64 == 0 {
            self.blocks.push(0);
        }
        if s & 1 == 1 {
            self.blocks[i / 64] |= 1u64 << (i % 64);
        }
        self.len += 1;
    }

    pub fn pop(&mut self) -> Option<u8> {
        if self.len == 0 {
            return None;
        }
        let s = self.get(self.len - 1);
        let i = self.len - 1;
        self.blocks[i / 64] &= !(1u64 << (i % 64));
        self.len -= 1;
        if self.len % 64 == 0 {
            self.blocks.pop();
        }
        Some(s)
    }

    pub fn set(&mut self, i: usize, s: u8) {
        assert!(i < self.len, "index {i} out of range for word of length {}", self.len);
        if s & 1 == 1 {
            self.blocks[i / 64] |= 1u64 << (i % 64);
        } else {
            self.blocks[i / 64] &= !(1u64 << (i % 64));
        }
    }

    /// `w|_n`; saturates at the word length.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.min(self.len);
        let mut blocks = self.blocks[..n.div_ceil(64)].to_vec();
        if n % 64 != 0 {
            if let Some(last) = blocks.last_mut() {
                *last &= (1u64 << (n % 64)) - 1;
            }
        }
        SymbolWord { blocks, len: n }
    }

    /// `σⁿ(w)`, the word with its first `n` symbols removed.
    pub fn shift(&self, n: usize) -> Result<Self> {
        if n > self.len {
            return Err(Error::invalid("n", format!("shift by {n} exceeds word length {}", self.len)));
        }
        Ok(self.slice(n, self.len))
    }

    /// Symbols `start..end` (0-based, end exclusive).
    pub fn slice(&self, start: usize, end: usize) -> Self {
        let end = end.min(self.len);
        let mut w = Self::with_capacity(end.saturating_sub(start));
        for i in start..end {
            w.push(self.get(i));
        }
        w
    }

    pub fn concat(&self, other: &SymbolWord) -> Self {
        let mut w = self.clone();
        w.extend_from(other);
        w
    }

    pub fn extend_from(&mut self, other: &SymbolWord) {
        for s in other.iter() {
            self.push(s);
        }
    }

    /// Digit-flipped word (0 ↔ 1), the coding of the mirror point.
    pub fn flipped(&self) -> Self {
        let mut blocks: Vec<u64> = self.blocks.iter().map(|b| !b).collect();
        if self.len % 64 != 0 {
            if let Some(last) = blocks.last_mut() {
                *last &= (1u64 << (self.len % 64)) - 1;
            }
        }
        SymbolWord { blocks, len: self.len }
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_digits(&self) -> Vec<u8> {
        self.iter().collect()
    }

    /// Length of the longest common prefix.
    pub fn wedge(&self, other: &SymbolWord) -> usize {
        let n = self.len.min(other.len);
        for (b, (x, y)) in self.blocks.iter().zip(&other.blocks).enumerate() {
            let diff = x ^ y;
            if diff != 0 {
                return (b * 64 + diff.trailing_zeros() as usize).min(n);
            }
        }
        n
    }

    pub fn starts_with(&self, prefix: &SymbolWord) -> bool {
        prefix.len <= self.len && self.wedge(prefix) == prefix.len
    }
}

impl Ord for SymbolWord {
    /// Lexicographic order; a proper prefix sorts first.
    fn cmp(&self, other: &Self) -> Ordering {
        let k = self.wedge(other);
        if k < self.len && k < other.len {
            self.get(k).cmp(&other.get(k))
        } else {
            self.len.cmp(&other.len)
        }
    }
}

impl PartialOrd for SymbolWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.iter() {
            f.write_str(if s == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymbolWord(\"{self}\")")
    }
}

impl FromStr for SymbolWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::invalid("word", format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        SymbolWord::from_digits(&digits)
    }
}

impl Serialize for SymbolWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SymbolWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which closed-form dimension applies to a parameter pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// λ < 1/(2γ)
    Case1,
    /// λ = 1/(2γ) up to rounding
    Boundary,
    /// λ > 1/(2γ)
    Case23,
}

/// Contraction ratio λ ∈ (1/2, 1) and target shrink rate γ ∈ (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub lambda: f64,
    pub gamma: f64,
}

impl Params {
    pub fn new(lambda: f64, gamma: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invalid("gamma", format!("{gamma} is outside (0, 1)")));
        }
        Ok(Params { lambda, gamma })
    }

    pub fn regime(&self) -> Regime {
        let t = 2.0 * self.lambda * self.gamma;
        if (t - 1.0).abs() <= TIE_RELATIVE {
            Regime::Boundary
        } else if t < 1.0 {
            Regime::Case1
        } else {
            Regime::Case23
        }
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.5 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("lambda", format!("{lambda} is outside (1/2, 1)")))
    }
}

/// A point of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    /// Sup-metric distance.
    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

/// Value with an a-priori truncation error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounded {
    pub value: f64,
    pub error: f64,
}

/// Axis-aligned closed rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderRect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl CylinderRect {
    pub const UNIT: CylinderRect = CylinderRect {
        x_lo: 0.0,
        x_hi: 1.0,
        y_lo: 0.0,
        y_hi: 1.0,
    };

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn center(&self) -> Point {
        Point {
            x: 0.5 * (self.x_lo + self.x_hi),
            y: 0.5 * (self.y_lo + self.y_hi),
        }
    }

    /// Closed square `[c.x − r, c.x + r] × [c.y − r, c.y + r]` (side 2r).
    pub fn cube(c: Point, r: f64) -> Self {
        CylinderRect {
            x_lo: c.x - r,
            x_hi: c.x + r,
            y_lo: c.y - r,
            y_hi: c.y + r,
        }
    }

    pub fn intersects(&self, o: &CylinderRect) -> bool {
        self.x_lo <= o.x_hi && o.x_lo <= self.x_hi && self.y_lo <= o.y_hi && o.y_lo <= self.y_hi
    }

    /// `self ⊆ o` with absolute slack `eps`.
    pub fn contained_in(&self, o: &CylinderRect, eps: f64) -> bool {
        self.x_lo >= o.x_lo - eps && self.x_hi <= o.x_hi + eps && self.y_lo >= o.y_lo - eps && self.y_hi <= o.y_hi + eps
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_lo && p.x <= self.x_hi && p.y >= self.y_lo && p.y <= self.y_hi
    }

    pub fn intersection(&self, o: &CylinderRect) -> Option<CylinderRect> {
        let r = CylinderRect {
            x_lo: self.x_lo.max(o.x_lo),
            x_hi: self.x_hi.min(o.x_hi),
            y_lo: self.y_lo.max(o.y_lo),
            y_hi: self.y_hi.min(o.y_hi),
        };
        (r.x_lo <= r.x_hi && r.y_lo <= r.y_hi).then_some(r)
    }
}

/// Per-λ tables of `(1 − λ)λ^k` and `λ^k`, shared by every enumerator so
/// that prefix sums are accumulated identically everywhere.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub lambda: f64,
    /// `digit[k] = (1 − λ)λ^k`: weight of symbol `k` (0-based) under π_I.
    pub digit: Vec<f64>,
    /// `power[k] = λ^k`.
    pub power: Vec<f64>,
}

impl Coefficients {
    pub fn new(lambda: f64, depth: usize) -> Self {
        let mut power = Vec::with_capacity(depth + 1);
        let mut p = 1.0;
        for _ in 0..=depth {
            power.push(p);
            p *= lambda;
        }
        let digit = power[..depth].iter().map(|p| (1.0 - lambda) * p).collect();
        Coefficients { lambda, digit, power }
    }

    pub fn depth(&self) -> usize {
        self.digit.len()
    }
}

/// π_I on a finite word: `Σ w_k (1 − λ) λ^{k−1}` with truncation error `λ^{|w|}`.
pub fn pi_i(w: &SymbolWord, lambda: f64) -> Bounded {
    let mut value = 0.0;
    let mut p = 1.0;
    for s in w.iter() {
        if s == 1 {
            value += (1.0 - lambda) * p;
        }
        p *= lambda;
    }
    Bounded {
        value: value.min(1.0),
        error: p,
    }
}

fn pi_y(w: &SymbolWord) -> f64 {
    let mut y = 0.0;
    let mut p = 0.5;
    for s in w.iter() {
        if s == 1 {
            y += p;
        }
        p *= 0.5;
    }
    y
}

/// π on a finite word, i.e. `f_w(0, 0)`.
pub fn pi_2d(w: &SymbolWord, lambda: f64) -> Point {
    Point {
        x: pi_i(w, lambda).value,
        y: pi_y(w),
    }
}

/// `π(b) − π(a)` summed from the first index where the words differ, so
/// the result keeps full relative precision however long the common prefix.
/// Both words are read up to the shorter length.
pub fn displacement(a: &SymbolWord, b: &SymbolWord, lambda: f64) -> Point {
    let n = a.len().min(b.len());
    let s = a.wedge(b).min(n);
    let mut px = (1.0 - lambda) * lambda.powi(s as i32);
    let mut py = 0.5f64.powi(s as i32 + 1);
    let (mut dx, mut dy) = (0.0, 0.0);
    for k in s..n {
        let d = b.get(k) as f64 - a.get(k) as f64;
        dx += d * px;
        dy += d * py;
        px *= lambda;
        py *= 0.5;
    }
    Point { x: dx, y: dy }
}

/// `f_w([0,1]²)`: a `λ^{|w|} × 2^{−|w|}` rectangle.
pub fn cylinder_box(w: &SymbolWord, lambda: f64) -> CylinderRect {
    let lo = pi_2d(w, lambda);
    let n = w.len() as i32;
    CylinderRect {
        x_lo: lo.x,
        x_hi: (lo.x + lambda.powi(n)).min(1.0),
        y_lo: lo.y,
        y_hi: (lo.y + 0.5f64.powi(n)).min(1.0),
    }
}

/// Affine image `f_w(r)` of an arbitrary rectangle.
pub fn map_rect(w: &SymbolWord, lambda: f64, r: &CylinderRect) -> CylinderRect {
    let o = pi_2d(w, lambda);
    let sx = lambda.powi(w.len() as i32);
    let sy = 0.5f64.powi(w.len() as i32);
    CylinderRect {
        x_lo: o.x + sx * r.x_lo,
        x_hi: o.x + sx * r.x_hi,
        y_lo: o.y + sy * r.y_lo,
        y_hi: o.y + sy * r.y_hi,
    }
}

/// Length of the longest common prefix, `|i ∧ j|`.
pub fn wedge(i: &SymbolWord, j: &SymbolWord) -> usize {
    i.wedge(j)
}

/// Separation constant of the planar projection.
///
/// `n` is the least integer with `(1 − λ)λ + λ^{n+1} < λ² − λ^{n+1}` and
/// `C = min{2^{−n}, λ² − λ^{n+1} − ((1 − λ)λ + λ^{n+1})}`; then
/// `d(π(i), π(j)) ≥ C·2^{−|i∧j|}`.
pub fn separation_constant(lambda: f64) -> Result<SeparationConstant> {
    check_lambda(lambda)?;
    let base = (1.0 - lambda) * lambda;
    let sq = lambda * lambda;
    let mut n = 1usize;
    let mut p = sq; // λ^{n+1}
    loop {
        if base + p < sq - p {
            let c1 = sq - p - (base + p);
            let c = 0.5f64.powi(n as i32).min(c1);
            return Ok(SeparationConstant { n, c1, c });
        }
        n += 1;
        p *= lambda;
        if p == 0.0 {
            return Err(Error::invalid("lambda", "separation inequality has no solution"));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationConstant {
    pub n: usize,
    pub c1: f64,
    pub c: f64,
}

/// `Eⁿ(π(w))`, computed symbolically as `π(σⁿ w)`.
pub fn expand_orbit(w: &SymbolWord, n: usize, lambda: f64) -> Result<Point> {
    Ok(pi_2d(&w.shift(n)?, lambda))
}

/// Coding of a point of the fractal, read off its `y` coordinate.
///
/// At dyadic rationals both binary expansions code the same `y`; the
/// lexicographically smallest (trailing ones) is returned.
pub fn lift(p: Point, depth: usize) -> SymbolWord {
    let mut w = SymbolWord::with_capacity(depth);
    let mut y = p.y.clamp(0.0, 1.0);
    for _ in 0..depth {
        y *= 2.0;
        // y == 1 exactly means a dyadic tie: take the 0 branch and continue with ones.
        if y > 1.0 {
            w.push(1);
            y -= 1.0;
        } else {
            w.push(0);
        }
    }
    w
}
