//! Exact ground truth for the comparison count: harmonic numbers, the
//! closed-form mean, its low-rank specializations, the linear mean bound,
//! and the full exact distribution of `C_{n,m}` for moderate `n`.
//!
//! The distribution is computed by dynamic programming over the pivot
//! recursion. All probabilities of `C_{n,m}` have denominators dividing
//! `n!`, so each distribution is stored as integer numerators over that
//! common denominator; mixing a size-`n` law out of smaller ones then
//! needs only integer scaling, never rational reduction.

use std::collections::VecDeque;

use num::bigint::BigInt;
use num::rational::{BigRational, Ratio};
use num::{BigUint, One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest `n` for which `exact_pmf` runs by default.
pub const DEFAULT_PMF_N_MAX: usize = 200;

/// Estimated-allocation ceiling for the PMF engine, in bytes.
const PMF_MEMORY_CAP: u64 = 1_500_000_000;

// ---------------------------------------------------------------------------
// Harmonic numbers
// ---------------------------------------------------------------------------

/// Harmonic numbers `h_n = sum_{k<=n} 1/k`, exact and floating, grown on
/// demand. `h_0 = 0` by convention.
#[derive(Debug, Default)]
pub struct HarmonicTable {
    rational: Vec<BigRational>,
    float: Vec<f64>,
    // Kahan compensation carried by the float column.
    float_comp: f64,
}

impl HarmonicTable {
    pub fn new() -> Self {
        HarmonicTable {
            rational: vec![BigRational::zero()],
            float: vec![0.0],
            float_comp: 0.0,
        }
    }

    /// Exact `h_n`.
    pub fn rational(&mut self, n: usize) -> BigRational {
        while self.rational.len() <= n {
            let k = self.rational.len();
            let next = self.rational.last().unwrap()
                + BigRational::new(BigInt::one(), BigInt::from(k));
            self.rational.push(next);
        }
        self.rational[n].clone()
    }

    /// `h_n` in double precision via compensated summation.
    pub fn value(&mut self, n: usize) -> f64 {
        while self.float.len() <= n {
            let k = self.float.len() as f64;
            let y = 1.0 / k - self.float_comp;
            let prev = *self.float.last().unwrap();
            let t = prev + y;
            self.float_comp = (t - prev) - y;
            self.float.push(t);
        }
        self.float[n]
    }

    /// Test hook: shift `h_n` in both columns by `delta` (as a rational
    /// `num/den` for the exact column). Downstream equality checks against
    /// the closed-form mean are expected to fail afterwards.
    pub fn perturb(&mut self, n: usize, num: i64, den: i64) {
        self.rational(n);
        self.value(n);
        self.rational[n] += BigRational::new(BigInt::from(num), BigInt::from(den));
        self.float[n] += num as f64 / den as f64;
    }
}

// ---------------------------------------------------------------------------
// Closed-form means
// ---------------------------------------------------------------------------

fn ratio_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Exact expected comparison count,
/// `E[C_{n,m}] = 2[n + 3 + (n+1)h_n - (m+2)h_m - (n-m+3)h_{n-m+1}]`,
/// or 0 when `n < m`.
pub fn expected_count(table: &mut HarmonicTable, n: usize, m: usize) -> Result<BigRational> {
    if m == 0 {
        return Err(Error::InvalidRank(m));
    }
    if n < m {
        return Ok(BigRational::zero());
    }
    let h_n = table.rational(n);
    let h_m = table.rational(m);
    let h_tail = table.rational(n - m + 1);
    let inner = ratio_int((n + 3) as i64) + ratio_int((n + 1) as i64) * h_n
        - ratio_int((m + 2) as i64) * h_m
        - ratio_int((n - m + 3) as i64) * h_tail;
    Ok(ratio_int(2) * inner)
}

/// Closed-form mean in double precision (for sweeps past the exact range).
pub fn expected_count_f64(table: &mut HarmonicTable, n: usize, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidRank(m));
    }
    if n < m {
        return Ok(0.0);
    }
    let h_n = table.value(n);
    let h_m = table.value(m);
    let h_tail = table.value(n - m + 1);
    Ok(2.0
        * ((n + 3) as f64 + (n + 1) as f64 * h_n
            - (m + 2) as f64 * h_m
            - (n - m + 3) as f64 * h_tail))
}

/// Specialized closed forms for ranks 1..=4. Returns 0 when `n < m`
/// without consulting the formula.
pub fn expected_count_special(
    table: &mut HarmonicTable,
    n: usize,
    m: usize,
) -> Result<BigRational> {
    if m == 0 {
        return Err(Error::InvalidRank(m));
    }
    if !(1..=4).contains(&m) {
        return Err(Error::UnsupportedRank(m));
    }
    if n < m {
        return Ok(BigRational::zero());
    }
    let two_n = ratio_int(2 * n as i64);
    let value = match m {
        1 => two_n - ratio_int(2) * table.rational(n),
        2 => two_n - ratio_int(4) + BigRational::new(BigInt::from(2), BigInt::from(n)),
        3 => {
            two_n - BigRational::new(BigInt::from(25), BigInt::from(3))
                + ratio_int(2) * table.rational(n)
                + BigRational::new(BigInt::from(2), BigInt::from(n - 1))
        }
        4 => {
            two_n - ratio_int(13) + ratio_int(4) * table.rational(n)
                - BigRational::new(BigInt::from(2), BigInt::from(n))
                + BigRational::new(BigInt::from(2), BigInt::from(n - 2))
        }
        _ => unreachable!(),
    };
    Ok(value)
}

/// Specialized closed forms in double precision.
pub fn expected_count_special_f64(table: &mut HarmonicTable, n: usize, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidRank(m));
    }
    if !(1..=4).contains(&m) {
        return Err(Error::UnsupportedRank(m));
    }
    if n < m {
        return Ok(0.0);
    }
    let two_n = 2.0 * n as f64;
    Ok(match m {
        1 => two_n - 2.0 * table.value(n),
        2 => two_n - 4.0 + 2.0 / n as f64,
        3 => two_n - 25.0 / 3.0 + 2.0 * table.value(n) + 2.0 / (n - 1) as f64,
        4 => two_n - 13.0 + 4.0 * table.value(n) - 2.0 / n as f64 + 2.0 / (n - 2) as f64,
        _ => unreachable!(),
    })
}

/// The linear mean bound `E[C_{n,m}] <= 4n`: returns `4n`.
pub fn mean_upper_bound(n: usize, _m: usize) -> f64 {
    4.0 * n as f64
}

// ---------------------------------------------------------------------------
// Exact PMF
// ---------------------------------------------------------------------------

/// Exact, finitely-supported law of `C_{n,m}` with rational probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CountPmf {
    pub n: usize,
    pub m: usize,
    offset: u64,
    probs: Vec<BigRational>,
}

impl CountPmf {
    /// Smallest attainable count.
    pub fn offset(&self) -> u64 {
        self.offset
    }

    /// Dense probability vector starting at `offset()`.
    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    /// `(count, probability)` pairs with nonzero mass, ascending.
    pub fn atoms(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(move |(i, p)| (self.offset + i as u64, p))
    }

    /// `(count, probability)` pairs in double precision.
    pub fn atoms_f64(&self) -> Vec<(f64, f64)> {
        self.atoms()
            .map(|(c, p)| (c as f64, p.to_f64().unwrap()))
            .collect()
    }

    pub fn total(&self) -> BigRational {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> BigRational {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| BigRational::from_integer(BigInt::from(self.offset + i as u64)) * p)
            .sum()
    }
}

/// One distribution in the integer-numerator representation: probabilities
/// are `nums[i] / n!` for count `offset + i`.
#[derive(Debug, Clone)]
pub(crate) struct RawPmf {
    pub n: usize,
    pub m: usize,
    pub offset: u64,
    pub nums: Vec<BigUint>,
}

impl RawPmf {
    fn point_mass_zero(n: usize, m: usize) -> Self {
        RawPmf {
            n,
            m,
            offset: 0,
            nums: vec![BigUint::one()],
        }
    }

    pub fn mean_rational(&self, factorial: &BigUint) -> BigRational {
        let mut acc = BigUint::zero();
        for (i, a) in self.nums.iter().enumerate() {
            acc += a * BigUint::from(self.offset + i as u64);
        }
        BigRational::new(BigInt::from(acc), BigInt::from(factorial.clone()))
    }

    fn to_count_pmf(&self, factorial: &BigUint) -> CountPmf {
        let den = BigInt::from(factorial.clone());
        CountPmf {
            n: self.n,
            m: self.m,
            offset: self.offset,
            probs: self
                .nums
                .iter()
                .map(|a| Ratio::new(BigInt::from(a.clone()), den.clone()))
                .collect(),
        }
    }
}

/// Read-only view of one computed distribution during a triangle build.
pub struct PmfView<'a> {
    raw: &'a RawPmf,
    factorial: &'a BigUint,
}

impl PmfView<'_> {
    pub fn n(&self) -> usize {
        self.raw.n
    }

    pub fn m(&self) -> usize {
        self.raw.m
    }

    pub fn mean(&self) -> BigRational {
        self.raw.mean_rational(self.factorial)
    }

    pub fn to_count_pmf(&self) -> CountPmf {
        self.raw.to_count_pmf(self.factorial)
    }

    /// Numerators over the shared `n!` denominator; equal `(offset, nums)`
    /// at equal `n` means equal distributions, with no reduction involved.
    pub fn raw_parts(&self) -> (u64, &[BigUint]) {
        (self.raw.offset, &self.raw.nums)
    }
}

/// Per-rank production line. `prefix` accumulates
/// `sum_{v=level}^{s} pmf(v, level)` over the denominator `s!`, indexed by
/// absolute count, so that composing size `s+1` is a plain copy.
struct Chain {
    level: usize,
    prefix: Vec<BigUint>,
    recent: VecDeque<RawPmf>,
}

impl Chain {
    fn find(&self, size: usize) -> &RawPmf {
        self.recent
            .iter()
            .rev()
            .find(|p| p.n == size)
            .expect("needed sub-distribution was evicted")
    }
}

struct PmfEngine {
    target_m: usize,
    /// When set, every chain runs to `n_top` (triangle build); otherwise a
    /// chain stops once its last consumer has been served.
    advance_all: bool,
    chains: Vec<Chain>,
    factorials: Vec<BigUint>,
}

impl PmfEngine {
    fn new(target_m: usize, n_top: usize, advance_all: bool) -> Self {
        let mut factorials = Vec::with_capacity(n_top + 1);
        factorials.push(BigUint::one());
        for k in 1..=n_top {
            let next = factorials.last().unwrap() * BigUint::from(k as u64);
            factorials.push(next);
        }
        let chains = (1..=target_m)
            .map(|level| Chain {
                level,
                prefix: Vec::new(),
                recent: VecDeque::new(),
            })
            .collect();
        PmfEngine {
            target_m,
            advance_all,
            chains,
            factorials,
        }
    }

    /// Mix `pmf(s, level)` out of smaller sizes. Contributions, all over
    /// the target denominator `s!`:
    ///   - pivots v in level..s-1: the chain prefix, copied verbatim;
    ///   - pivot v = level-1: a point mass `(s-1)!` at count `s-1`;
    ///   - pivots v < level-1: the diagonal laws `pmf(s-j, level-j)`
    ///     scaled by `(s-1)!/(s-j)!`.
    fn compose(&self, s: usize, level: usize) -> RawPmf {
        let offset = (s - 1) as u64;
        let mut nums: Vec<BigUint> = self.chains[level - 1].prefix.clone();

        if nums.is_empty() {
            nums.push(BigUint::zero());
        }
        nums[0] += &self.factorials[s - 1];

        // m_j = (s-1)!/(s-j)!, built incrementally.
        let mut m_j = BigUint::one();
        for j in 1..level {
            let sub = self.chains[level - j - 1].find(s - j);
            let base = sub.offset as usize;
            if nums.len() < base + sub.nums.len() {
                nums.resize(base + sub.nums.len(), BigUint::zero());
            }
            for (k, a) in sub.nums.iter().enumerate() {
                if !a.is_zero() {
                    nums[base + k] += a * &m_j;
                }
            }
            m_j *= (s - j) as u64;
        }

        RawPmf {
            n: s,
            m: level,
            offset,
            nums,
        }
    }

    /// Fold a freshly composed `pmf(s, level)` into its chain prefix,
    /// rescaling the prefix denominator from `(s-1)!` to `s!`.
    fn absorb(&mut self, pmf: &RawPmf) {
        let s = pmf.n;
        let chain = &mut self.chains[pmf.m - 1];
        for e in chain.prefix.iter_mut() {
            *e *= s as u64;
        }
        let base = pmf.offset as usize;
        if chain.prefix.len() < base + pmf.nums.len() {
            chain.prefix.resize(base + pmf.nums.len(), BigUint::zero());
        }
        for (k, a) in pmf.nums.iter().enumerate() {
            chain.prefix[base + k] += a;
        }
        chain.recent.push_back(pmf.clone());
    }

    fn evict(&mut self, current_size: usize) {
        let target_m = self.target_m;
        for chain in &mut self.chains {
            let keep_from = (current_size + 1).saturating_sub(target_m - chain.level);
            while chain
                .recent
                .front()
                .map(|p| p.n < keep_from)
                .unwrap_or(false)
            {
                chain.recent.pop_front();
            }
        }
    }

    /// Run the synchronized build up to `(n_top, target_m)`, invoking the
    /// callback on every composed state. Chain `level` only advances as
    /// far as its consumers require.
    fn run(&mut self, n_top: usize, mut visit: impl FnMut(PmfView<'_>)) -> RawPmf {
        let mut answer = None;
        for s in 1..=n_top {
            for level in 1..=self.target_m.min(s) {
                let stop = if self.advance_all {
                    n_top
                } else {
                    n_top - (self.target_m - level)
                };
                if s > stop {
                    continue;
                }
                let pmf = self.compose(s, level);
                visit(PmfView {
                    raw: &pmf,
                    factorial: &self.factorials[s],
                });
                if s == n_top && level == self.target_m {
                    answer = Some(pmf.clone());
                }
                self.absorb(&pmf);
            }
            self.evict(s);
        }
        answer.expect("target state never composed")
    }
}

fn estimated_bytes(n: usize, m: usize) -> u64 {
    let entry = (n as f64 * (n as f64 + 1.0).log2() / 8.0) as u64 + 56;
    let pmfs = (m as u64 * (m as u64 + 1)) / 2;
    let support = (n as u64 * n as u64) / 2 + 1;
    pmfs.saturating_mul(support).saturating_mul(entry)
}

/// Exact law of `C_{n,m}` under the default size cap.
pub fn exact_pmf(n: usize, m: usize) -> Result<CountPmf> {
    exact_pmf_with_limit(n, m, DEFAULT_PMF_N_MAX)
}

/// Exact law of `C_{n,m}`; errors if `n` exceeds `n_max` or the dense
/// rational table would outgrow memory.
pub fn exact_pmf_with_limit(n: usize, m: usize, n_max: usize) -> Result<CountPmf> {
    if m == 0 {
        return Err(Error::InvalidRank(m));
    }
    if n > n_max {
        return Err(Error::Resource {
            n,
            m,
            detail: format!(
                "n exceeds the configured cap {n_max}; the table grows like n^2 states \
                 of n^2/2 exact entries each"
            ),
        });
    }
    if n < m {
        return Ok(RawPmf::point_mass_zero(n, m).to_count_pmf(&BigUint::one()));
    }
    let est = estimated_bytes(n, m);
    if est > PMF_MEMORY_CAP {
        return Err(Error::Resource {
            n,
            m,
            detail: format!(
                "estimated working set {est} bytes exceeds cap {PMF_MEMORY_CAP}; \
                 memory grows like m^2 n^2 exact entries"
            ),
        });
    }

    let mut engine = PmfEngine::new(m, n, false);
    let raw = engine.run(n, |_| {});
    let pmf = raw.to_count_pmf(&engine.factorials[n]);
    debug_assert!(pmf.total().is_one());
    Ok(pmf)
}

/// Compute every `pmf(s, level)` with `level <= s <= n_top` in one
/// synchronized pass, feeding each to `visit` as it is produced.
pub fn for_each_pmf_up_to(n_top: usize, visit: impl FnMut(PmfView<'_>)) {
    if n_top == 0 {
        return;
    }
    let mut engine = PmfEngine::new(n_top, n_top, true);
    engine.run(n_top, visit);
}
