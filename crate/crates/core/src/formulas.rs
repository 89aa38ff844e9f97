//! Closed forms, bounds and hypothesis predicates for `forb(m, 3, F(a,b,c,d))`.
//!
//! Every `2^m` term is evaluated with arbitrary precision. Hypotheses never raise:
//! a failed hypothesis clears [`FormulaResult::valid`] and shows up in the
//! per-condition report. Only genuine domain violations (such as `r` being
//! undefined) return [`FormulaError`].
//!
//! Throughout, `r = ceil(log2(p - 1))` and `N_r = C(ceil(r/2)+1, 2) + C(floor(r/2)+1, 2)`.
//! Where a statement involves `2^(r-1)` or `2^(r-3)` the comparison is carried out
//! after scaling both sides, so `r = 0` and `r = 1` need no special casing.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown formula {0:?}")]
    Unknown(String),
    #[error("{name} expects {expected} arguments, got {got}")]
    Arity { name: String, expected: usize, got: usize },
}

fn domain<T>(msg: impl Into<String>) -> Result<T, FormulaError> {
    Err(FormulaError::Domain(msg.into()))
}

/// One named hypothesis and whether it holds for the given arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
}

/// A value together with the validity of the statement that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaResult {
    pub value: BigInt,
    pub valid: bool,
    pub hypotheses: Vec<Hypothesis>,
}

impl FormulaResult {
    fn plain(value: impl Into<BigInt>) -> Self {
        FormulaResult { value: value.into(), valid: true, hypotheses: Vec::new() }
    }

    fn with(value: BigInt, hypotheses: Vec<Hypothesis>) -> Self {
        let valid = hypotheses.iter().all(|h| h.holds);
        FormulaResult { value, valid, hypotheses }
    }

    pub fn failed(&self) -> impl Iterator<Item = &str> {
        self.hypotheses.iter().filter(|h| !h.holds).map(|h| h.name.as_str())
    }
}

impl fmt::Display for FormulaResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "value={} valid={}", self.value, self.valid)?;
        let failed: Vec<&str> = self.failed().collect();
        if !failed.is_empty() {
            write!(f, " [failed: {}]", failed.join(","))?;
        }
        Ok(())
    }
}

fn hyp(name: impl Into<String>, holds: bool) -> Hypothesis {
    Hypothesis { name: name.into(), holds }
}

pub fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

pub fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for t in 0..k {
        acc = acc * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    acc
}

fn binom_u(n: u64, k: u64) -> u64 {
    binom(n, k).to_u64().expect("binomial fits u64")
}

/// `2^m + m 2^(m-1)`: the number of ternary columns with no 0 above a 1.
pub fn no_mark_count(m: u64) -> BigInt {
    // m 2^(m-1) = (m 2^m) / 2, exact for m >= 1 and 0 for m = 0
    pow2(m) + ((BigInt::from(m) * pow2(m)) >> 1u32)
}

/// `sum_{i<k} C(m, i)`, the largest size of a binary matrix avoiding `K_k`.
pub fn sauer(m: u64, k: u64) -> Result<BigInt, FormulaError> {
    if k < 1 || k > m + 1 {
        return domain(format!("sauer needs 1 <= k <= m+1, got m={m}, k={k}"));
    }
    Ok((0..k).map(|i| binom(m, i)).sum())
}

/// `2^m + m 2^(m-1) + (p-1) C(m,2)`, valid when `2^(m-2) >= p-1`.
pub fn forb_pk2(m: u64, p: u64) -> FormulaResult {
    let value = forb_pk2_value(m, p);
    let holds = pow2(m) >= BigInt::from(4) * BigInt::from(p.saturating_sub(1));
    FormulaResult::with(value, vec![hyp("2^(m-2)>=p-1", holds), hyp("m>=2", m >= 2), hyp("p>=1", p >= 1)])
}

fn forb_pk2_value(m: u64, p: u64) -> BigInt {
    no_mark_count(m) + BigInt::from(p.saturating_sub(1)) * binom(m, 2)
}

/// Smallest `r >= 0` with `p - 1 <= 2^r`.
pub fn r_of_p(p: u64) -> Result<u32, FormulaError> {
    if p <= 1 {
        return domain(format!("r is undefined for p = {p} (need p >= 2)"));
    }
    let x = p - 1;
    Ok(if x == 1 { 0 } else { 64 - (x - 1).leading_zeros() })
}

/// `r` with the `p = 1` convention of treating it as 0.
fn r_lenient(p: u64) -> u32 {
    r_of_p(p).unwrap_or(0)
}

pub fn n_r(r: u64) -> u64 {
    binom_u(r.div_ceil(2) + 1, 2) + binom_u(r / 2 + 1, 2)
}

/// Tabulated `g_p` for `p <= 5`.
pub fn g_known(p: u64) -> Option<u64> {
    match p {
        1 | 2 => Some(0),
        3 => Some(1),
        4 => Some(2),
        5 => Some(5),
        _ => None,
    }
}

/// `(p-1) C(r+1,2) - (r-1) 2^r - 1`.
pub fn g_upper(p: u64) -> Result<BigInt, FormulaError> {
    let r = r_of_p(p)? as u64;
    Ok(BigInt::from(p - 1) * binom(r + 1, 2) - (BigInt::from(r) - 1) * pow2(r) - 1)
}

/// Number of divisors of `n >= 1`.
pub fn tau(n: u64) -> u64 {
    (1..=n).filter(|d| n.is_multiple_of(*d)).count() as u64
}

/// `floor( (p-1)k/(k+1) C(r+1,2) - r 2^r sum_{i<=k} tau(i) )`.
pub fn g_lower(p: u64, k: u64) -> Result<BigInt, FormulaError> {
    if k < 2 {
        return domain(format!("g_lower needs k >= 2, got {k}"));
    }
    let r = r_of_p(p)? as u64;
    let taus: u64 = (1..=k).map(tau).sum();
    let num = BigInt::from(p - 1) * BigInt::from(k) * binom(r + 1, 2)
        - BigInt::from(k + 1) * BigInt::from(r) * pow2(r) * BigInt::from(taus);
    Ok(num.div_floor(&BigInt::from(k + 1)))
}

/// Size of the construction using only 0- and 1-mark columns under the all-`01` assignment.
pub fn prelim_count(m: u64, p: u64) -> Result<BigInt, FormulaError> {
    match p {
        0 => domain("prelim_count needs p >= 1"),
        1 => Ok(no_mark_count(m)),
        _ => {
            let r = r_of_p(p)? as u64;
            let scarce = binom(r + 1, 2);
            Ok(no_mark_count(m)
                + BigInt::from(p - 1) * (binom(m, 2) - scarce)
                + (BigInt::from(r) - 1) * pow2(r)
                + 1)
        }
    }
}

/// Upper bound on columns whose marks come from `c` zeros above `b` ones on scarce pairs.
pub fn foursigma_bound(r: u64, b: u64, c: u64) -> Result<BigInt, FormulaError> {
    if b < 1 || c < 1 || b + c > r + 1 {
        return domain(format!("foursigma_bound needs b,c >= 1 and b+c <= r+1, got r={r}, b={b}, c={c}"));
    }
    Ok(pow2(r) * BigInt::from(r + 1 - b - c) + pow2(b + c - 2))
}

fn check_q(q: u64, p: u64) -> Result<(), FormulaError> {
    if p == 0 || q > p - 1 {
        return domain(format!("need 0 <= q <= p-1, got p={p}, q={q}"));
    }
    Ok(())
}

/// `forb(m,3,F(p-q,p,p,p-q)) = forb(m,3,p K_2) - q N_r` under the theorem's hypotheses.
pub fn thm_pk(m: u64, p: u64, q: u64) -> Result<FormulaResult, FormulaError> {
    check_q(q, p)?;
    let r = r_lenient(p) as u64;
    let nr = n_r(r);
    let value = forb_pk2_value(m, p) - BigInt::from(q) * nr;

    // scaled by 2 (or 8) so that 2^(r-1) and 2^(r-3) stay integral
    let p2 = BigInt::from(2 * p);
    let half_pow = pow2(r); // 2 * 2^(r-1)
    let branch1 = p2 >= &half_pow + BigInt::from(4 * q + 2);
    let small_p = p2 <= &half_pow + BigInt::from(4 * q);
    let small_q = BigInt::from(8 * q * nr) <= pow2(r);
    let slack = BigInt::from(r / 2 + 1) * (BigInt::from(2 * p) - 2 - pow2(r)) >= BigInt::from(4 * q);

    let threshold = m >= 2 * nr + 2;
    let branch2 = small_p && small_q && slack;
    let hypotheses = vec![
        hyp("m>=2N_r+2", threshold),
        hyp("p>=2^(r-1)+2q+1", branch1),
        hyp("p<=2^(r-1)+2q", small_p),
        hyp("qN_r<=2^(r-3)", small_q),
        hyp("(floor(r/2)+1)(p-1-2^(r-1))/2>=q", slack),
    ];
    Ok(FormulaResult { value, valid: threshold && (branch1 || branch2), hypotheses })
}

/// Lower bound from the standard layout with `C(r1+1,2)` 0-non-edges and `C(r2+1,2)` 1-non-edges.
pub fn prop_lower_value(m: u64, p: u64, q0: u64, q1: u64, r1: u64, r2: u64) -> Result<FormulaResult, FormulaError> {
    check_q(q0, p)?;
    check_q(q1, p)?;
    let r = r_lenient(p) as u64;
    if r1 + r2 != r {
        return domain(format!("need r1 + r2 = r = {r}, got r1={r1}, r2={r2}"));
    }
    let value = forb_pk2_value(m, p)
        - BigInt::from(q0.min(q1)) * binom(r1 + 1, 2)
        - BigInt::from(q0.max(q1)) * binom(r2 + 1, 2);
    let need = 2 * binom_u(r1 + 1, 2) + 2 * binom_u(r2 + 1, 2) + 2;
    Ok(FormulaResult::with(value, vec![hyp("m>=2C(r1+1,2)+2C(r2+1,2)+2", m >= need)]))
}

fn split_cost(q0: u64, q1: u64, r: u64, r1: u64) -> u64 {
    q0 * binom_u(r1 + 1, 2) + q1 * binom_u(r - r1 + 1, 2)
}

/// The `r1 in [0, r]` minimizing `q0 C(r1+1,2) + q1 C(r-r1+1,2)`, found by scanning.
///
/// Ties go to the larger `r1`, which reproduces the closed form's round-half-up
/// choice (`ceil(r/2)` when `q0 = q1`).
pub fn optimize_r1(q0: u64, q1: u64, r: u64) -> Result<u64, FormulaError> {
    if q0 < 1 || q0 > q1 {
        return domain(format!("optimize_r1 needs 1 <= q0 <= q1, got q0={q0}, q1={q1}"));
    }
    let mut best = 0;
    for r1 in 1..=r {
        if split_cost(q0, q1, r, r1) <= split_cost(q0, q1, r, best) {
            best = r1;
        }
    }
    Ok(best)
}

/// The closest integer to `((2r+1)α - 1) / (2(α+1))` with `α = q1/q0`, or `r` when `α > 2r+1`.
pub fn optimize_r1_closed_form(q0: u64, q1: u64, r: u64) -> Result<u64, FormulaError> {
    if q0 < 1 || q0 > q1 {
        return domain(format!("optimize_r1 needs 1 <= q0 <= q1, got q0={q0}, q1={q1}"));
    }
    if q1 > (2 * r + 1) * q0 {
        return Ok(r);
    }
    // ((2r+1)q1 - q0) / (2(q0+q1)), rounded half up
    let num = (2 * r + 1) * q1 - q0;
    let den = 2 * (q0 + q1);
    Ok((2 * num + den) / (2 * den))
}

/// The lower bound `forb(m,3,p K_2) - q N_r + floor(r/2) d` with `d = q - (ceil(r/2)+1)(p-1-2^(r-1))`.
pub fn notalways_value(m: u64, p: u64, q: u64) -> Result<FormulaResult, FormulaError> {
    check_q(q, p)?;
    let r = r_lenient(p) as u64;
    let nr = n_r(r);
    let twice_d: BigInt = BigInt::from(2 * q) - BigInt::from(r.div_ceil(2) + 1) * (BigInt::from(2 * p) - 2 - pow2(r));
    let bonus = if r == 0 { BigInt::zero() } else { BigInt::from(r / 2) * (&twice_d / 2) };
    let value = forb_pk2_value(m, p) - BigInt::from(q * nr) + bonus;
    let d_name = if r == 0 {
        format!("d>0 (2d={twice_d})")
    } else {
        format!("d>0 (d={})", &twice_d / 2)
    };
    Ok(FormulaResult::with(value, vec![hyp(d_name, twice_d.is_positive()), hyp("m>=2N_r+2", m >= 2 * nr + 2)]))
}

/// `2^(m-2) >= (max{a,b,c,d}-1) m^2` and `min{b,c} >= 1`.
pub fn reduction_valid(m: u64, a: u64, b: u64, c: u64, d: u64) -> bool {
    let mx = a.max(b).max(c).max(d);
    let lhs = pow2(m);
    let rhs = BigInt::from(4) * BigInt::from(mx.saturating_sub(1)) * BigInt::from(m) * BigInt::from(m);
    lhs >= rhs && b.min(c) >= 1
}

/// `forb(m,3,F(p-1,p,p,p-1)) = forb(m,3,p K_2) - N_r` for `m >= 2N_r+2`.
///
/// For `p <= 4` this is also the common value of `forb(m,3,F(a,p,p,d))` over all
/// `max(a,d) < p` (then `N_r = g_p` and the thresholds are `m >= 2, 4, 6`).
pub fn cor_small_p(m: u64, p: u64) -> Result<FormulaResult, FormulaError> {
    let r = r_of_p(p)? as u64;
    let nr = n_r(r);
    let value = forb_pk2_value(m, p) - nr;
    Ok(FormulaResult::with(value, vec![hyp("m>=2N_r+2", m >= 2 * nr + 2)]))
}

/// Upper bound `forb(m,3,p K_2) - k` for `F(a,b,c,d)` with `min(b,c) = p` and `max(a,d) <= p-k`.
///
/// `g_p` comes from the table for `p <= 5`; beyond that the caller may supply an
/// assumed lower bound on `g_p`, which is reported as an assumption.
pub fn minp_bound(m: u64, p: u64, k: u64, maxbc: u64, g_assumed: Option<u64>) -> Result<FormulaResult, FormulaError> {
    let r = r_of_p(p)? as u64;
    let value = forb_pk2_value(m, p) - BigInt::from(k);
    let mut hypotheses = vec![hyp("p>=3", p >= 3)];
    let g = match (g_known(p), g_assumed) {
        (Some(g), _) => Some(g),
        (None, Some(g)) => {
            hypotheses.push(hyp(format!("assumed g_p>={g}"), true));
            Some(g)
        }
        (None, None) => None,
    };
    match g {
        Some(g) => hypotheses.push(hyp("1<=k<=min(p,g_p)", k >= 1 && k <= p.min(g))),
        None => hypotheses.push(hyp("g_p known", false)),
    }
    hypotheses.push(hyp("m>=2r+2", m >= 2 * r + 2));
    let rhs = BigInt::from(4) * BigInt::from(maxbc.saturating_sub(1)) * BigInt::from(m) * BigInt::from(m);
    hypotheses.push(hyp("2^(m-2)>=(maxbc-1)m^2", pow2(m) >= rhs));
    Ok(FormulaResult::with(value, hypotheses))
}

/// Names accepted by [`evaluate`], with their argument lists.
pub const FORMULA_NAMES: &[(&str, &str)] = &[
    ("sauer", "m k"),
    ("forb_pk2", "m p"),
    ("r_of_p", "p"),
    ("n_r", "r"),
    ("g_known", "p"),
    ("g_upper", "p"),
    ("g_lower", "p k"),
    ("prelim_count", "m p"),
    ("foursigma_bound", "r b c"),
    ("thm_pk", "m p q"),
    ("prop_lower_value", "m p q0 q1 r1 r2"),
    ("optimize_r1", "q0 q1 r"),
    ("notalways_value", "m p q"),
    ("reduction_valid", "m a b c d"),
    ("cor_small_p", "m p"),
    ("minp_bound", "m p k maxbc [g_assumed]"),
];

/// Evaluates a formula by name, for the command line.
pub fn evaluate(name: &str, args: &[u64]) -> Result<FormulaResult, FormulaError> {
    let want = |n: usize| -> Result<(), FormulaError> {
        if args.len() != n {
            Err(FormulaError::Arity { name: name.to_string(), expected: n, got: args.len() })
        } else {
            Ok(())
        }
    };
    Ok(match name {
        "sauer" => {
            want(2)?;
            FormulaResult::plain(sauer(args[0], args[1])?)
        }
        "forb_pk2" => {
            want(2)?;
            forb_pk2(args[0], args[1])
        }
        "r_of_p" => {
            want(1)?;
            FormulaResult::plain(r_of_p(args[0])?)
        }
        "n_r" => {
            want(1)?;
            FormulaResult::plain(n_r(args[0]))
        }
        "g_known" => {
            want(1)?;
            match g_known(args[0]) {
                Some(g) => FormulaResult::plain(g),
                None => FormulaResult::with(BigInt::zero(), vec![hyp("tabulated(p<=5)", false)]),
            }
        }
        "g_upper" => {
            want(1)?;
            FormulaResult::plain(g_upper(args[0])?)
        }
        "g_lower" => {
            want(2)?;
            FormulaResult::plain(g_lower(args[0], args[1])?)
        }
        "prelim_count" => {
            want(2)?;
            FormulaResult::plain(prelim_count(args[0], args[1])?)
        }
        "foursigma_bound" => {
            want(3)?;
            FormulaResult::plain(foursigma_bound(args[0], args[1], args[2])?)
        }
        "thm_pk" => {
            want(3)?;
            thm_pk(args[0], args[1], args[2])?
        }
        "prop_lower_value" => {
            want(6)?;
            prop_lower_value(args[0], args[1], args[2], args[3], args[4], args[5])?
        }
        "optimize_r1" => {
            want(3)?;
            FormulaResult::plain(optimize_r1(args[0], args[1], args[2])?)
        }
        "notalways_value" => {
            want(3)?;
            notalways_value(args[0], args[1], args[2])?
        }
        "reduction_valid" => {
            want(5)?;
            let ok = reduction_valid(args[0], args[1], args[2], args[3], args[4]);
            FormulaResult::with(BigInt::from(u8::from(ok)), vec![hyp("reduction hypotheses", ok)])
        }
        "cor_small_p" => {
            want(2)?;
            cor_small_p(args[0], args[1])?
        }
        "minp_bound" => {
            if args.len() != 4 && args.len() != 5 {
                return Err(FormulaError::Arity { name: name.to_string(), expected: 4, got: args.len() });
            }
            minp_bound(args[0], args[1], args[2], args[3], args.get(4).copied())?
        }
        other => return Err(FormulaError::Unknown(other.to_string())),
    })
}
