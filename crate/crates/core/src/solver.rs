//! Exact `forb(m, 3, F(a,p,p,d))` for small `m`.
//!
//! A matrix avoids `F(a,p,p,d)` exactly when every row pair has some vector whose
//! count stays below its threshold (`a` for 00, `p` for 01 and 10, `d` for 11).
//! The solver enumerates these per-pair choices. For a fixed choice every column
//! without a mark is taken, and the marked columns form a capacitated selection
//! problem: at most `threshold - 1` chosen columns may carry a mark at each pair.
//!
//! Within that problem the one-mark columns are taken first, up to the cap of
//! their pair. Any optimal selection can be rebuilt this way: a multi-mark column
//! occupying a slot that a spare one-mark column could use is swapped out without
//! losing size. What remains is a branch and bound over groups of multi-mark
//! columns with identical mark sets, ordered by mark count, with the bound
//! "take the lightest remaining columns until the residual capacity runs out".
//!
//! Choices that differ by a row permutation give the same value, so only the
//! lexicographically smallest choice in each orbit is solved. A vector that no
//! `m`-rowed universe can realize often enough to reach its threshold is never
//! binding, and pairs admitting one are fixed to it.
//!
//! [`forb_reference`] is an independent direct search over column subsets.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::containment::{avoids_2rowed, contains_generic, num_pairs, row_pairs, ContainmentError, P01, P10};
use crate::decompose::PRIORITY;
use crate::matrix::{Column, ConfigurationF, SMatrix};

/// Largest `m` solved by [`forb_exact`] without opting in to long runs.
pub const EXACT_MAX_M: usize = 4;
/// Largest `m` accepted with [`SolverOptions::allow_m5`].
pub const EXACT_LONG_M: usize = 5;
/// Largest universe the reference solver accepts.
pub const REFERENCE_MAX_UNIVERSE: usize = 27;

const NO_PATTERN: u8 = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("m = {m} exceeds the limit {limit}{hint}")]
    TooLarge { m: usize, limit: usize, hint: &'static str },
    #[error(transparent)]
    Containment(#[from] ContainmentError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Caps,
    Reference,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Caps => "caps",
            Method::Reference => "reference",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverOptions {
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
    pub vacuous_pruning: bool,
    pub symmetry: bool,
    pub allow_m5: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { threads: 1, vacuous_pruning: true, symmetry: true, allow_m5: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    /// Branch-and-bound nodes visited.
    pub nodes: u64,
    /// Per-pair choices in the enumerated space.
    pub assignments: u64,
    /// Choices actually solved (after symmetry reduction and bound pruning).
    pub evaluated: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct ForbResult {
    pub value: u64,
    /// Canonically ordered extremal matrix.
    pub witness: SMatrix,
    pub stats: SolverStats,
    pub method: Method,
}

/// Precomputed universe data for one `m`.
struct Universe {
    m: usize,
    npairs: usize,
    cols: Vec<Column>,
    /// `pattern[col * npairs + pair]`, `NO_PATTERN` when a 2 is involved.
    pattern: Vec<u8>,
}

impl Universe {
    fn new(m: usize) -> Self {
        let u = SMatrix::universe(m, 3).expect("m is within the universe limit");
        let npairs = num_pairs(m);
        let cols = u.into_columns();
        let mut pattern = Vec::with_capacity(cols.len() * npairs);
        for &c in &cols {
            for (i, j) in row_pairs(m) {
                pattern.push(c.pair_pattern(m, i, j).map_or(NO_PATTERN, |p| p as u8));
            }
        }
        Universe { m, npairs, cols, pattern }
    }

    fn mask(&self, col: usize, choice: &[u8]) -> u16 {
        let row = &self.pattern[col * self.npairs..(col + 1) * self.npairs];
        let mut mask = 0u16;
        for (e, (&p, &c)) in row.iter().zip(choice).enumerate() {
            if p == c {
                mask |= 1 << e;
            }
        }
        mask
    }
}

/// Multi-mark columns sharing one mark set.
#[derive(Clone, Debug)]
struct Group {
    mask: u16,
    weight: u32,
    size: u32,
}

/// The capacitated selection problem for one per-pair choice.
struct Subproblem {
    /// Unmarked columns plus the one-mark columns taken.
    base: u64,
    residual: Vec<u32>,
    groups: Vec<Group>,
}

fn build_subproblem(u: &Universe, choice: &[u8], thresholds: &[u32; 4]) -> Subproblem {
    let n = u.npairs;
    let caps: Vec<u32> = choice.iter().map(|&c| thresholds[c as usize] - 1).collect();
    let mut free = 0u64;
    let mut ones = vec![0u32; n];
    let mut multi: Vec<u16> = Vec::new();
    for col in 0..u.cols.len() {
        let mask = u.mask(col, choice);
        match mask.count_ones() {
            0 => free += 1,
            1 => ones[mask.trailing_zeros() as usize] += 1,
            _ => multi.push(mask),
        }
    }
    let mut base = free;
    let mut residual = vec![0u32; n];
    for e in 0..n {
        let taken = ones[e].min(caps[e]);
        base += taken as u64;
        residual[e] = caps[e] - taken;
    }
    let open: u16 = (0..n).filter(|&e| residual[e] > 0).fold(0, |acc, e| acc | (1 << e));
    multi.retain(|&mask| mask & !open == 0);
    multi.sort_unstable_by_key(|&mask| (mask.count_ones(), mask));
    let mut groups: Vec<Group> = Vec::new();
    for mask in multi {
        match groups.last_mut() {
            Some(g) if g.mask == mask => g.size += 1,
            _ => groups.push(Group { mask, weight: mask.count_ones(), size: 1 }),
        }
    }
    Subproblem { base, residual, groups }
}

fn take_limit(mask: u16, size: u32, residual: &[u32]) -> u32 {
    let mut lim = size;
    let mut bits = mask;
    while bits != 0 {
        let e = bits.trailing_zeros() as usize;
        lim = lim.min(residual[e]);
        bits &= bits - 1;
    }
    lim
}

/// Upper bound on further columns: lightest groups first within the total residual capacity.
fn fractional_bound(groups: &[Group], residual: &[u32]) -> u64 {
    let mut budget: u64 = residual.iter().map(|&r| r as u64).sum();
    let mut bound = 0u64;
    for g in groups {
        if budget < g.weight as u64 {
            break;
        }
        let lim = take_limit(g.mask, g.size, residual) as u64;
        let t = lim.min(budget / g.weight as u64);
        bound += t;
        budget -= t * g.weight as u64;
    }
    bound
}

fn apply(mask: u16, t: u32, residual: &mut [u32], sign_add: bool) {
    let mut bits = mask;
    while bits != 0 {
        let e = bits.trailing_zeros() as usize;
        if sign_add {
            residual[e] += t;
        } else {
            residual[e] -= t;
        }
        bits &= bits - 1;
    }
}

struct Search<'a> {
    groups: &'a [Group],
    residual: Vec<u32>,
    take: Vec<u32>,
    /// Best extra count found, or the count that must be beaten.
    best: u64,
    best_take: Option<Vec<u32>>,
    /// Stop as soon as a selection reaching `best` is found.
    first_hit: bool,
    nodes: u64,
}

impl Search<'_> {
    fn run(&mut self, idx: usize, chosen: u64) -> bool {
        self.nodes += 1;
        if idx == self.groups.len() {
            let better = if self.first_hit { chosen >= self.best } else { chosen > self.best };
            if better {
                self.best = chosen;
                self.best_take = Some(self.take.clone());
                return self.first_hit;
            }
            return false;
        }
        let bound = chosen + fractional_bound(&self.groups[idx..], &self.residual);
        if bound < self.best || (!self.first_hit && bound == self.best) {
            return false;
        }
        let g = &self.groups[idx];
        let lim = take_limit(g.mask, g.size, &self.residual);
        for t in (0..=lim).rev() {
            apply(g.mask, t, &mut self.residual, false);
            self.take[idx] = t;
            let done = self.run(idx + 1, chosen + t as u64);
            apply(g.mask, t, &mut self.residual, true);
            self.take[idx] = 0;
            if done {
                return true;
            }
        }
        false
    }
}

fn greedy(groups: &[Group], residual: &[u32]) -> (u64, Vec<u32>) {
    let mut res = residual.to_vec();
    let mut take = vec![0u32; groups.len()];
    let mut total = 0u64;
    for (k, g) in groups.iter().enumerate() {
        let t = take_limit(g.mask, g.size, &res);
        apply(g.mask, t, &mut res, false);
        take[k] = t;
        total += t as u64;
    }
    (total, take)
}

/// Row permutations as pair maps: new pair `q` reads old pair `src[q]`, swapping 01 and 10 when `flip[q]`.
struct PairPermutations {
    maps: Vec<(Vec<usize>, Vec<bool>)>,
}

impl PairPermutations {
    fn new(m: usize) -> Self {
        let index = |i: usize, j: usize| crate::containment::pair_index(m, i, j);
        let mut maps = Vec::new();
        let mut perm: Vec<usize> = (1..=m).collect();
        loop {
            let (mut src, mut flip) = (Vec::new(), Vec::new());
            for (k, l) in row_pairs(m) {
                let (x, y) = (perm[k - 1], perm[l - 1]);
                if x < y {
                    src.push(index(x, y));
                    flip.push(false);
                } else {
                    src.push(index(y, x));
                    flip.push(true);
                }
            }
            maps.push((src, flip));
            if !next_permutation(&mut perm) {
                break;
            }
        }
        PairPermutations { maps }
    }

    fn is_canonical(&self, choice: &[u8]) -> bool {
        let flip_pattern = |p: u8| match p as usize {
            P01 => P10 as u8,
            P10 => P01 as u8,
            _ => p,
        };
        for (src, flip) in &self.maps {
            for q in 0..choice.len() {
                let p = choice[src[q]];
                let image = if flip[q] { flip_pattern(p) } else { p };
                if image != choice[q] {
                    if image < choice[q] {
                        return false;
                    }
                    break;
                }
            }
        }
        true
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Vectors each pair may be assigned, in priority order.
fn pair_choices(m: usize, thresholds: &[u32; 4], vacuous_pruning: bool) -> Vec<u8> {
    let selectable: Vec<u8> = PRIORITY.iter().filter(|&&p| thresholds[p] >= 1).map(|&p| p as u8).collect();
    if vacuous_pruning {
        // every vector occurs in 3^(m-2) universe columns at any pair
        let per_pair = 3u64.pow(m.saturating_sub(2) as u32);
        if let Some(&p) = selectable.iter().find(|&&p| per_pair < thresholds[p as usize] as u64) {
            return vec![p];
        }
    }
    selectable
}

fn for_each_choice(npairs: usize, options: &[u8], mut f: impl FnMut(&[u8])) {
    let k = options.len();
    let mut digits = vec![0usize; npairs];
    let mut choice: Vec<u8> = vec![options[0]; npairs];
    loop {
        f(&choice);
        let mut e = npairs;
        loop {
            if e == 0 {
                return;
            }
            e -= 1;
            digits[e] += 1;
            if digits[e] < k {
                choice[e] = options[digits[e]];
                break;
            }
            digits[e] = 0;
            choice[e] = options[0];
        }
    }
}

fn check_exact_args(m: usize, a: usize, b: usize, c: usize, d: usize, opts: &SolverOptions) -> Result<(), SolverError> {
    if b != c {
        return Err(SolverError::Precondition(format!(
            "the caps method needs b = c, got b={b}, c={c}; use the reference method"
        )));
    }
    if b == 0 {
        return Err(SolverError::Precondition("the caps method needs b = c >= 1".into()));
    }
    if a.max(b).max(d) > 64 {
        return Err(SolverError::Precondition("thresholds above 64 are not supported".into()));
    }
    let limit = if opts.allow_m5 { EXACT_LONG_M } else { EXACT_MAX_M };
    if m == 0 || m > limit {
        let hint = if m == EXACT_LONG_M { " (m = 5 needs the long-running opt-in)" } else { "" };
        return Err(SolverError::TooLarge { m, limit, hint });
    }
    Ok(())
}

/// Exact `forb(m, 3, F(a,b,c,d))` for `b = c >= 1`.
pub fn forb_exact(m: usize, a: usize, b: usize, c: usize, d: usize, opts: &SolverOptions) -> Result<ForbResult, SolverError> {
    check_exact_args(m, a, b, c, d, opts)?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.threads).build().expect("thread pool");
    let mut result = pool.install(|| solve_caps(m, a, b, d, opts));
    result.stats.elapsed = start.elapsed();
    Ok(result)
}

fn solve_caps(m: usize, a: usize, p: usize, d: usize, opts: &SolverOptions) -> ForbResult {
    let u = Universe::new(m);
    let thresholds = [a as u32, p as u32, p as u32, d as u32];
    let options = pair_choices(m, &thresholds, opts.vacuous_pruning);
    let npairs = u.npairs;
    let assignments = (options.len() as u64).pow(npairs as u32);

    let perms = (opts.symmetry && npairs > 0).then(|| PairPermutations::new(m));
    let mut choices: Vec<Vec<u8>> = Vec::new();
    for_each_choice(npairs, &options, |choice| {
        if perms.as_ref().is_none_or(|p| p.is_canonical(choice)) {
            choices.push(choice.to_vec());
        }
    });

    let incumbent = AtomicU64::new(0);
    let nodes = AtomicU64::new(0);
    let evaluated = AtomicU64::new(0);
    choices.par_iter().for_each(|choice| {
        let sub = build_subproblem(&u, choice, &thresholds);
        let current = incumbent.load(Ordering::Relaxed);
        if sub.base + fractional_bound(&sub.groups, &sub.residual) <= current && current > 0 {
            return;
        }
        evaluated.fetch_add(1, Ordering::Relaxed);
        let (g, _) = greedy(&sub.groups, &sub.residual);
        let floor = g.max(current.saturating_sub(sub.base));
        let mut s = Search {
            groups: &sub.groups,
            residual: sub.residual.clone(),
            take: vec![0; sub.groups.len()],
            best: floor,
            best_take: None,
            first_hit: false,
            nodes: 0,
        };
        s.run(0, 0);
        nodes.fetch_add(s.nodes, Ordering::Relaxed);
        incumbent.fetch_max(sub.base + s.best.max(g), Ordering::Relaxed);
    });
    let value = incumbent.load(Ordering::Relaxed);

    // witness: first canonical choice, in enumeration order, that reaches the value
    let mut witness = None;
    for choice in &choices {
        let sub = build_subproblem(&u, choice, &thresholds);
        if sub.base + fractional_bound(&sub.groups, &sub.residual) < value {
            continue;
        }
        let need = value - sub.base;
        let (g, gtake) = greedy(&sub.groups, &sub.residual);
        let take = if g >= need {
            Some(gtake)
        } else {
            let mut s = Search {
                groups: &sub.groups,
                residual: sub.residual.clone(),
                take: vec![0; sub.groups.len()],
                best: need,
                best_take: None,
                first_hit: true,
                nodes: 0,
            };
            s.run(0, 0);
            nodes.fetch_add(s.nodes, Ordering::Relaxed);
            s.best_take
        };
        if let Some(take) = take {
            witness = Some(assemble_witness(&u, choice, &thresholds, &sub, &take));
            break;
        }
    }
    let witness = witness.expect("the optimum is attained by some choice");
    assert_eq!(witness.ncols() as u64, value);
    assert!(witness.is_simple() && avoids_2rowed(&witness, a, p, p, d), "solver witness failed verification");

    ForbResult {
        value,
        witness,
        stats: SolverStats {
            nodes: nodes.load(Ordering::Relaxed),
            assignments,
            evaluated: evaluated.load(Ordering::Relaxed),
            elapsed: Duration::ZERO,
        },
        method: Method::Caps,
    }
}

fn assemble_witness(u: &Universe, choice: &[u8], thresholds: &[u32; 4], sub: &Subproblem, take: &[u32]) -> SMatrix {
    let caps: Vec<u32> = choice.iter().map(|&c| thresholds[c as usize] - 1).collect();
    let mut ones_left = caps;
    let mut group_left: Vec<(u16, u32)> = sub.groups.iter().zip(take).map(|(g, &t)| (g.mask, t)).collect();
    let mut cols = Vec::new();
    for (idx, &col) in u.cols.iter().enumerate() {
        let mask = u.mask(idx, choice);
        let keep = match mask.count_ones() {
            0 => true,
            1 => {
                let e = mask.trailing_zeros() as usize;
                let ok = ones_left[e] > 0;
                if ok {
                    ones_left[e] -= 1;
                }
                ok
            }
            _ => match group_left.iter_mut().find(|(gm, _)| *gm == mask) {
                Some((_, left)) if *left > 0 => {
                    *left -= 1;
                    true
                }
                _ => false,
            },
        };
        if keep {
            cols.push(col);
        }
    }
    SMatrix::from_packed(u.m, 3, cols).expect("universe columns").canonical()
}

/// `forb(m,3,p K_2) - forb(m,3,p I_2)`, both from [`forb_exact`].
pub fn g_empirical(p: usize, m: usize, opts: &SolverOptions) -> Result<u64, SolverError> {
    let k2 = forb_exact(m, p, p, p, p, opts)?.value;
    let i2 = forb_exact(m, 0, p, p, 0, opts)?.value;
    Ok(k2 - i2)
}

/// Avoidance test for the reference search, with incremental state for 2-rowed `F`.
enum Tester {
    TwoRowed { abcd: (usize, usize, usize, usize), counts: Vec<[u32; 4]>, patterns: Vec<Vec<u8>> },
    Generic { f: SMatrix },
}

impl Tester {
    fn addable(&mut self, chosen: &[Column], m: usize, idx: usize, col: Column) -> Result<bool, SolverError> {
        match self {
            Tester::TwoRowed { abcd: (a, b, c, d), counts, patterns } => {
                for (e, &p) in patterns[idx].iter().enumerate() {
                    if p == NO_PATTERN {
                        continue;
                    }
                    let mut cnt = counts[e];
                    cnt[p as usize] += 1;
                    if crate::containment::pair_meets(cnt, *a, *b, *c, *d) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Tester::Generic { f } => {
                let mut cols = chosen.to_vec();
                cols.push(col);
                let trial = SMatrix::from_packed(m, 3, cols).expect("universe columns");
                Ok(!contains_generic(f, &trial)?)
            }
        }
    }

    fn push(&mut self, idx: usize) {
        if let Tester::TwoRowed { counts, patterns, .. } = self {
            for (e, &p) in patterns[idx].iter().enumerate() {
                if p != NO_PATTERN {
                    counts[e][p as usize] += 1;
                }
            }
        }
    }

    fn pop(&mut self, idx: usize) {
        if let Tester::TwoRowed { counts, patterns, .. } = self {
            for (e, &p) in patterns[idx].iter().enumerate() {
                if p != NO_PATTERN {
                    counts[e][p as usize] -= 1;
                }
            }
        }
    }
}

struct Reference {
    m: usize,
    cols: Vec<Column>,
    tester: Tester,
    chosen: Vec<Column>,
    chosen_idx: Vec<usize>,
    best: u64,
    best_set: Vec<usize>,
    nodes: u64,
}

impl Reference {
    /// Include-first search from column `idx`; the bound counts columns still individually addable.
    fn run(&mut self, idx: usize) -> Result<(), SolverError> {
        self.nodes += 1;
        let mut addable = Vec::new();
        for k in idx..self.cols.len() {
            if self.tester.addable(&self.chosen, self.m, k, self.cols[k])? {
                addable.push(k);
            }
        }
        let here = self.chosen.len() as u64;
        let Some(&k) = addable.first() else {
            if here > self.best {
                self.best = here;
                self.best_set = self.chosen_idx.clone();
            }
            return Ok(());
        };
        if here + addable.len() as u64 <= self.best {
            return Ok(());
        }
        self.chosen.push(self.cols[k]);
        self.chosen_idx.push(k);
        self.tester.push(k);
        self.run(k + 1)?;
        self.tester.pop(k);
        self.chosen_idx.pop();
        self.chosen.pop();
        self.run(k + 1)
    }
}

/// Exact `forb(m, 3, F)` by direct search over subsets of the `3^m <= 27` universe.
pub fn forb_reference(m: usize, f: &ConfigurationF) -> Result<ForbResult, SolverError> {
    let start = Instant::now();
    let u = SMatrix::universe(m, 3).map_err(|e| SolverError::Precondition(e.to_string()))?;
    if u.ncols() > REFERENCE_MAX_UNIVERSE {
        return Err(SolverError::TooLarge { m, limit: 3, hint: " (the reference solver needs 3^m <= 27)" });
    }
    let fm = f.expand();
    if fm.is_empty() {
        return Err(SolverError::Precondition("F must have at least one column".into()));
    }
    let cols = u.into_columns();
    let tester = match f.as_fabcd() {
        Some(abcd) => {
            let patterns = cols
                .iter()
                .map(|c| row_pairs(m).map(|(i, j)| c.pair_pattern(m, i, j).map_or(NO_PATTERN, |p| p as u8)).collect())
                .collect();
            Tester::TwoRowed { abcd, counts: vec![[0; 4]; num_pairs(m)], patterns }
        }
        None => Tester::Generic { f: fm.clone() },
    };
    let mut r = Reference {
        m,
        cols,
        tester,
        chosen: Vec::new(),
        chosen_idx: Vec::new(),
        best: 0,
        best_set: Vec::new(),
        nodes: 0,
    };
    r.run(0)?;
    let witness_cols: Vec<Column> = r.best_set.iter().map(|&k| r.cols[k]).collect();
    let witness = SMatrix::from_packed(m, 3, witness_cols).expect("universe columns").canonical();
    let ok = match f.as_fabcd() {
        Some((a, b, c, d)) => avoids_2rowed(&witness, a, b, c, d),
        None => !contains_generic(&fm, &witness)?,
    };
    assert!(ok && witness.is_simple(), "reference witness failed verification");
    Ok(ForbResult {
        value: r.best,
        witness,
        stats: SolverStats { nodes: r.nodes, assignments: 0, evaluated: 0, elapsed: start.elapsed() },
        method: Method::Reference,
    })
}
