use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::target::TargetSpec;
use crate::bernoulli::enumerate_d;
use crate::error::{Error, Result};
use crate::scales::{ell1, ell2};
use crate::symbolic::{Params, Regime, SymbolWord};

pub const MAX_RETURNS: usize = 5;
pub const MIN_GROWTH: usize = 3;
pub const DEFAULT_GROWTH: usize = 4;
/// Cap on the number of ambiguous words stored per return.
pub const MAX_BLOCK_MEMBERS: usize = 5_000_000;
/// Cap on the depth a schedule may cover.
pub const MAX_COVERAGE: usize = 1 << 16;

/// Return times `n_1 < … < n_M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub returns: Vec<usize>,
    pub growth: usize,
}

impl Schedule {
    /// `n_{m+1} = max(c·n_m, n_m + ℓ₂(n_m) + 1)`.
    pub fn geometric(n1: usize, growth: usize, count: usize, p: &Params) -> Result<Self> {
        if n1 == 0 {
            return Err(Error::invalid("n1", "must be at least 1"));
        }
        if count == 0 || count > MAX_RETURNS {
            return Err(Error::invalid("returns", format!("need 1 ≤ M ≤ {MAX_RETURNS}")));
        }
        let mut returns = vec![n1];
        while returns.len() < count {
            let n = *returns.last().unwrap();
            returns.push((growth * n).max(n + ell2(n as u64, p) as usize + 1));
        }
        Self::explicit(returns, growth, p)
    }

    /// Validates `n_{m+1} > n_m + ℓ₂(n_m)` and `n_{m+1} ≥ c·n_m` with `c ≥ 3`.
    pub fn explicit(returns: Vec<usize>, growth: usize, p: &Params) -> Result<Self> {
        if growth < MIN_GROWTH {
            return Err(Error::invalid("growth", format!("must be at least {MIN_GROWTH}")));
        }
        if returns.is_empty() || returns.len() > MAX_RETURNS || returns[0] == 0 {
            return Err(Error::invalid("schedule", format!("need 1 to {MAX_RETURNS} positive returns")));
        }
        for w in returns.windows(2) {
            let l2 = ell2(w[0] as u64, p) as usize;
            if w[1] <= w[0] + l2 {
                return Err(Error::invalid("schedule", format!("n = {} must exceed {} + ℓ₂ = {}", w[1], w[0], w[0] + l2)));
            }
            if w[1] < growth * w[0] {
                return Err(Error::invalid("schedule", format!("n = {} is below {growth}·{}", w[1], w[0])));
            }
        }
        let s = Schedule { returns, growth };
        if s.coverage(p) > MAX_COVERAGE {
            return Err(Error::invalid("schedule", format!("coverage exceeds {MAX_COVERAGE}")));
        }
        Ok(s)
    }

    /// Deepest level at which weights are defined: the return that would
    /// follow the last one.
    pub fn coverage(&self, p: &Params) -> usize {
        let n = *self.returns.last().unwrap();
        (self.growth * n).max(n + ell2(n as u64, p) as usize + 1)
    }

    /// `L_{m−1}/n_m` for each return, the finite-schedule bias of the
    /// local-dimension bounds.
    pub fn bias(&self, p: &Params) -> Vec<f64> {
        let mut acc = 0usize;
        self.returns
            .iter()
            .map(|&n| {
                let b = acc as f64 / n as f64;
                acc += ell2(n as u64, p) as usize;
                b
            })
            .collect()
    }
}

/// Which Cantor measure to build on the return set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeasureCase {
    /// `2λγ ≤ 1`: pin `ℓ₂(n_m)` digits, uniform elsewhere.
    One,
    /// `2λγ > 1`, same pinning rule (unique-expansion centre).
    Two,
    /// `2λγ > 1`: pin `ℓ₁(n_m)` digits, then split evenly over `D`.
    Three,
}

impl MeasureCase {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(MeasureCase::One),
            2 => Ok(MeasureCase::Two),
            3 => Ok(MeasureCase::Three),
            _ => Err(Error::invalid("case", "must be 1, 2 or 3")),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            MeasureCase::One => 1,
            MeasureCase::Two => 2,
            MeasureCase::Three => 3,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Free,
    Pinned(u8),
    Block { index: usize, offset: usize },
}

#[derive(Debug)]
struct Block {
    center: SymbolWord,
    rho: f64,
    members: OnceLock<std::result::Result<Vec<SymbolWord>, Error>>,
}

/// The measure `μ` on codings, evaluated lazily.
#[derive(Debug)]
pub struct MeasureSpec {
    pub case: MeasureCase,
    pub target: TargetSpec,
    pub schedule: Schedule,
    kinds: Vec<Kind>,
    blocks: Vec<Block>,
}

/// Position in the coding tree together with its weight.
///
/// Inside an ambiguous block the cursor also tracks the range of block
/// members that extend the current prefix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cursor {
    pub depth: usize,
    pub weight: f64,
    base: f64,
    lo: usize,
    hi: usize,
}

impl MeasureSpec {
    pub fn new(case: MeasureCase, target: TargetSpec, schedule: Schedule) -> Result<Self> {
        let p = target.params;
        match (case, p.regime()) {
            (MeasureCase::One, Regime::Case23) => {
                return Err(Error::invalid("case", "case 1 needs 2λγ ≤ 1"));
            }
            (MeasureCase::Two | MeasureCase::Three, Regime::Case1) => {
                return Err(Error::invalid("case", "cases 2 and 3 need 2λγ > 1"));
            }
            _ => {}
        }
        let coverage = schedule.coverage(&p);
        let mut kinds = vec![Kind::Free; coverage];
        let mut blocks = Vec::new();
        for &n in &schedule.returns {
            let l2 = ell2(n as u64, &p) as usize;
            let pinned = match case {
                MeasureCase::Three => (ell1(n as u64, p.gamma) as usize).min(l2),
                _ => l2,
            };
            if target.z.len() < l2 {
                return Err(Error::invalid("z", format!("centre coding needs at least {l2} symbols")));
            }
            for i in 0..pinned {
                kinds[n + i] = Kind::Pinned(target.z.get(i));
            }
            let len = l2 - pinned;
            if len > 0 {
                let index = blocks.len();
                blocks.push(Block {
                    center: target.z.slice(pinned, l2),
                    rho: p.lambda.powi(len as i32),
                    members: OnceLock::new(),
                });
                for offset in 0..len {
                    kinds[n + pinned + offset] = Kind::Block { index, offset };
                }
            }
        }
        Ok(MeasureSpec {
            case,
            target,
            schedule,
            kinds,
            blocks,
        })
    }

    pub fn params(&self) -> Params {
        self.target.params
    }

    pub fn coverage(&self) -> usize {
        self.kinds.len()
    }

    /// Sorted members of the ambiguous window `D` of block `index`,
    /// enumerated on first use.
    fn members(&self, index: usize) -> Result<&[SymbolWord]> {
        let b = &self.blocks[index];
        let r = b.members.get_or_init(|| {
            enumerate_d(&b.center, b.rho, b.center.len(), self.target.params.lambda, MAX_BLOCK_MEMBERS)
        });
        match r {
            Ok(v) => Ok(v),
            Err(e) => Err(e.clone()),
        }
    }

    /// `#D` for every ambiguous window, in schedule order.
    pub fn block_sizes(&self) -> Result<Vec<usize>> {
        (0..self.blocks.len()).map(|i| Ok(self.members(i)?.len())).collect()
    }

    pub fn root(&self) -> Cursor {
        Cursor {
            depth: 0,
            weight: 1.0,
            base: 1.0,
            lo: 0,
            hi: 0,
        }
    }

    /// The child of `c` along `symbol`, or `None` when its weight is 0.
    pub fn child(&self, c: &Cursor, symbol: u8) -> Result<Option<Cursor>> {
        let kind = *self.kinds.get(c.depth).ok_or(Error::ScheduleTooShort {
            len: c.depth + 1,
            coverage: self.coverage(),
        })?;
        let depth = c.depth + 1;
        Ok(match kind {
            Kind::Free => Some(Cursor {
                depth,
                weight: 0.5 * c.weight,
                ..*c
            }),
            Kind::Pinned(d) => (d == symbol).then_some(Cursor { depth, ..*c }),
            Kind::Block { index, offset } => {
                let members = self.members(index)?;
                let (base, lo, hi) = if offset == 0 {
                    (c.weight, 0, members.len())
                } else {
                    (c.base, c.lo, c.hi)
                };
                let mid = lo + members[lo..hi].partition_point(|w| w.get(offset) == 0);
                let (lo, hi) = if symbol == 0 { (lo, mid) } else { (mid, hi) };
                (lo < hi).then(|| Cursor {
                    depth,
                    weight: base * (hi - lo) as f64 / members.len() as f64,
                    base,
                    lo,
                    hi,
                })
            }
        })
    }

    /// Cursor at the end of `w`, or `None` if some prefix has weight 0.
    pub fn walk(&self, w: &SymbolWord) -> Result<Option<Cursor>> {
        let mut c = self.root();
        for s in w.iter() {
            match self.child(&c, s)? {
                Some(n) => c = n,
                None => return Ok(None),
            }
        }
        Ok(Some(c))
    }

    /// `μ([w])`.
    pub fn weight(&self, w: &SymbolWord) -> Result<f64> {
        Ok(self.walk(w)?.map_or(0.0, |c| c.weight))
    }

    /// Extends `(c, w)` to `depth` by proportional descent.
    pub fn descend<R: Rng + ?Sized>(&self, mut c: Cursor, w: &mut SymbolWord, depth: usize, rng: &mut R) -> Result<Cursor> {
        while c.depth < depth {
            let a = self.child(&c, 0)?;
            let b = self.child(&c, 1)?;
            let (s, n) = match (a, b) {
                (Some(a), Some(b)) => {
                    if rng.gen::<f64>() * (a.weight + b.weight) < a.weight {
                        (0, a)
                    } else {
                        (1, b)
                    }
                }
                (Some(a), None) => (0, a),
                (None, Some(b)) => (1, b),
                (None, None) => unreachable!("a node of positive weight has a child of positive weight"),
            };
            w.push(s);
            c = n;
        }
        Ok(c)
    }

    /// A `μ`-random word of length `depth`.
    pub fn sample_path(&self, depth: usize, seed: u64) -> Result<SymbolWord> {
        if depth > self.coverage() {
            return Err(Error::ScheduleTooShort {
                len: depth,
                coverage: self.coverage(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = SymbolWord::with_capacity(depth);
        self.descend(self.root(), &mut w, depth, &mut rng)?;
        Ok(w)
    }
}
