//! Exact counting of bright, dark, and intermediate collective states, and the
//! excitation bookkeeping before and after atom-mediated dissipation.
//!
//! Closed forms are binomial coefficients over arbitrary-precision integers;
//! every one of them has a brute-force companion (`brute_*`) that evaluates
//! the literal nested sums by recursion over the mode occupations. The brute
//! forms exist so the closed forms can be checked mechanically, both in tests
//! and from the CLI.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// An exact count together with the arguments that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountResult {
    pub value: BigUint,
    pub n: usize,
    pub m: usize,
    pub kind: CountKind,
}

/// Which quantity a [`CountResult`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountKind {
    /// Number of dark states (no photons in the symmetric mode).
    Dark,
    /// Number of all collective states at fixed `N`.
    All,
    /// Number of states with a given symmetric-mode occupation.
    FixedN0,
    /// Total excitations summed over all states before dissipation.
    InitialExcitations,
    /// Total excitations summed over all states after dissipation.
    FinalExcitations,
}

impl CountKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CountKind::Dark => "dark",
            CountKind::All => "all",
            CountKind::FixedN0 => "fixed_n0",
            CountKind::InitialExcitations => "initial_excitations",
            CountKind::FinalExcitations => "final_excitations",
        }
    }
}

/// Binomial coefficient `C(n, k)` as a big integer.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Number of dark states: `C(n + m - 2, m - 2)` ways to put `n` photons in
/// the `m - 1` non-symmetric modes.
pub fn count_dark(n: usize, m: usize) -> Result<BigUint> {
    if m < 2 {
        return Err(Error::Domain(format!("dark states need m >= 2 modes, got {m}")));
    }
    Ok(binomial(n + m - 2, m - 2))
}

/// Number of all collective states at total excitation `n`:
/// `C(n + m - 1, m - 1)`.
pub fn count_all(n: usize, m: usize) -> Result<BigUint> {
    if m < 1 {
        return Err(Error::Domain("count_all needs m >= 1".into()));
    }
    Ok(binomial(n + m - 1, m - 1))
}

/// Number of states with exactly `n0` photons in the symmetric mode:
/// `C(n - n0 + m - 2, m - 2)`.
pub fn count_fixed_n0(n: usize, m: usize, n0: usize) -> Result<BigUint> {
    if m < 2 {
        return Err(Error::Domain(format!("count_fixed_n0 needs m >= 2, got {m}")));
    }
    if n0 > n {
        return Err(Error::Domain(format!("n0 = {n0} exceeds n = {n}")));
    }
    Ok(binomial(n - n0 + m - 2, m - 2))
}

/// The hockey-stick identity: left side `sum_{j=0..k} C(j + r, r)`, right
/// side `C(k + r + 1, r + 1)`. Returns both so callers can assert equality.
pub fn hockey_stick(k: usize, r: usize) -> (BigUint, BigUint) {
    let lhs = (0..=k).fold(BigUint::zero(), |acc, j| acc + binomial(j + r, r));
    let rhs = binomial(k + r + 1, r + 1);
    (lhs, rhs)
}

/// Total excitations over all states before dissipation:
/// `n * C(n + m - 1, m - 1)`.
pub fn initial_excitations(n: usize, m: usize) -> Result<BigUint> {
    if m < 2 {
        return Err(Error::Domain(format!("initial_excitations needs m >= 2, got {m}")));
    }
    Ok(BigUint::from(n) * binomial(n + m - 1, m - 1))
}

/// Total excitations surviving in dark modes after dissipation:
/// `(m - 1) * C(n + m - 1, m)`.
pub fn final_excitations(n: usize, m: usize) -> Result<BigUint> {
    if m < 2 {
        return Err(Error::Domain(format!("final_excitations needs m >= 2, got {m}")));
    }
    Ok(BigUint::from(m - 1) * binomial(n + m - 1, m))
}

/// Ratio of surviving to initial excitations as an exact rational. Equal to
/// `(m - 1) / m` for every `n >= 1`.
pub fn survival_ratio(n: usize, m: usize) -> Result<Ratio<BigUint>> {
    if n == 0 {
        return Err(Error::Domain(
            "survival ratio is undefined at n = 0 (no initial excitations)".into(),
        ));
    }
    let num = final_excitations(n, m)?;
    let den = initial_excitations(n, m)?;
    Ok(Ratio::new(num, den))
}

/// All five counts for `(n, m)` in a fixed order, for bulk emission.
pub fn all_counts(n: usize, m: usize) -> Result<Vec<CountResult>> {
    Ok(vec![
        CountResult { value: count_dark(n, m)?, n, m, kind: CountKind::Dark },
        CountResult { value: count_all(n, m)?, n, m, kind: CountKind::All },
        CountResult { value: count_fixed_n0(n, m, 0)?, n, m, kind: CountKind::FixedN0 },
        CountResult {
            value: initial_excitations(n, m)?,
            n,
            m,
            kind: CountKind::InitialExcitations,
        },
        CountResult { value: final_excitations(n, m)?, n, m, kind: CountKind::FinalExcitations },
    ])
}

// ---------------------------------------------------------------------------
// Brute-force oracles: the literal nested sums, written as a recursion over
// the occupations of the first m-1 modes (the last occupation is fixed by the
// total). Deliberately independent of the binomial route above.
// ---------------------------------------------------------------------------

const BRUTE_MODE_LIMIT: usize = 12;

fn check_brute_depth(m: usize) -> Result<()> {
    if m > BRUTE_MODE_LIMIT {
        return Err(Error::Domain(format!(
            "brute-force enumeration is limited to m <= {BRUTE_MODE_LIMIT}, got {m}"
        )));
    }
    Ok(())
}

/// Count compositions of `budget` photons into `slots` modes by literal
/// nested summation.
fn nested_count(slots: usize, budget: usize) -> BigUint {
    if slots == 0 {
        // No free occupations left; exactly one assignment (the forced one).
        return BigUint::one();
    }
    let mut total = BigUint::zero();
    for take in 0..=budget {
        total += nested_count(slots - 1, budget - take);
    }
    total
}

/// Brute-force number of dark states: occupations of modes `1..m-1` summing
/// to `n`, i.e. `m - 2` free indices.
pub fn brute_count_dark(n: usize, m: usize) -> Result<BigUint> {
    if m < 2 {
        return Err(Error::Domain(format!("dark states need m >= 2 modes, got {m}")));
    }
    check_brute_depth(m)?;
    Ok(nested_count(m - 2, n))
}

/// Brute-force number of all collective states: `m - 1` free indices.
pub fn brute_count_all(n: usize, m: usize) -> Result<BigUint> {
    if m < 1 {
        return Err(Error::Domain("count_all needs m >= 1".into()));
    }
    check_brute_depth(m)?;
    Ok(nested_count(m - 1, n))
}

/// Brute-force count of states with symmetric-mode occupation `n0`.
pub fn brute_count_fixed_n0(n: usize, m: usize, n0: usize) -> Result<BigUint> {
    if m < 2 {
        return Err(Error::Domain(format!("count_fixed_n0 needs m >= 2, got {m}")));
    }
    if n0 > n {
        return Err(Error::Domain(format!("n0 = {n0} exceeds n = {n}")));
    }
    check_brute_depth(m)?;
    Ok(nested_count(m - 2, n - n0))
}

/// Brute-force initial excitations: `sum_{n0} n * Q(n0)`.
pub fn brute_initial_excitations(n: usize, m: usize) -> Result<BigUint> {
    let mut total = BigUint::zero();
    for n0 in 0..=n {
        total += BigUint::from(n) * brute_count_fixed_n0(n, m, n0)?;
    }
    Ok(total)
}

/// Brute-force final excitations: `sum_{n0} (n - n0) * Q(n0)`.
pub fn brute_final_excitations(n: usize, m: usize) -> Result<BigUint> {
    let mut total = BigUint::zero();
    for n0 in 0..=n {
        total += BigUint::from(n - n0) * brute_count_fixed_n0(n, m, n0)?;
    }
    Ok(total)
}

/// Brute-force survival ratio from the nested sums.
pub fn brute_survival_ratio(n: usize, m: usize) -> Result<Ratio<BigUint>> {
    if n == 0 {
        return Err(Error::Domain(
            "survival ratio is undefined at n = 0 (no initial excitations)".into(),
        ));
    }
    Ok(Ratio::new(brute_final_excitations(n, m)?, brute_initial_excitations(n, m)?))
}
