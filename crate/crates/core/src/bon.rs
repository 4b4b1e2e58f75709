//! Best-of-N policies: exact laws, a brute-force oracle and a sampler.
//!
//! Best-of-N draws `N` i.i.d. candidates from the reference `p` and keeps one
//! of maximal reward, breaking ties uniformly. Sorting outcomes into reward
//! levels with cumulative reference mass `S_<` (strictly below) and `S_<=`
//! (at or below), the chosen outcome `y` has probability
//!
//! ```text
//! π_N(y) = (S_<=(r(y))^N - S_<(r(y))^N) · p(y) / P(level of y)
//! ```
//!
//! Over sequences from a memoryless `p` with additive reward `log q`, both the
//! reference probability and the reward depend on a sequence only through its
//! type, so the same formula applies class by class ([`bon_type_law`]).

use rand::Rng;

use crate::dist::{
    enumerate_types, log_type_class_size, CategoricalDistribution, Sequence, SymbolSampler,
    TypeVector,
};
use crate::error::{Error, Result};
use crate::logspace::{log1m_exp, log_add_exp, log_power_gap, log_sum_exp_iter};
use crate::seed::SeedSpec;

/// Rewards closer than this (absolute) share a level.
pub const REWARD_TIE_TOL: f64 = 1e-12;

/// Largest `log N` accepted; beyond it `N` overflows `f64`.
pub const MAX_LOG_N: f64 = 700.0;

/// Default cap on `N · m` symbol draws per [`bon_sample`] call.
pub const DEFAULT_SAMPLE_BUDGET: u128 = 100_000_000;

/// Cap on `(K^m)^N` for [`bon_enumeration_oracle`].
pub const ORACLE_TUPLE_CAP: f64 = 1e7;

/// How ties between maximal candidates are resolved. Only uniform
/// tie-breaking is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    #[default]
    Uniform,
}

/// The number of candidates, either as an integer or through its logarithm.
///
/// Large-deviation regimes set `N = exp(m δ)`, which is not representable as
/// an integer for realistic `m`; the level formula only ever multiplies
/// log-probabilities by `N`, so a real-valued `N` is accepted there and acts
/// as the analytic continuation of the integer case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BonConfig {
    log_n: f64,
    count: Option<u64>,
    pub tie_policy: TiePolicy,
}

impl BonConfig {
    pub fn with_n(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidN("N must be at least 1".into()));
        }
        Ok(Self {
            log_n: (n as f64).ln(),
            count: Some(n),
            tie_policy: TiePolicy::Uniform,
        })
    }

    pub fn with_log_n(log_n: f64) -> Result<Self> {
        if !(log_n >= 0.0) || log_n > MAX_LOG_N {
            return Err(Error::InvalidN(format!("log N = {log_n} outside [0, {MAX_LOG_N}]")));
        }
        Ok(Self {
            log_n,
            count: None,
            tie_policy: TiePolicy::Uniform,
        })
    }

    pub fn log_n(&self) -> f64 {
        self.log_n
    }

    /// The integer count, if the config was built from one.
    pub fn count(&self) -> Option<u64> {
        self.count
    }

    /// `N` as a real multiplier.
    pub fn multiplier(&self) -> f64 {
        match self.count {
            Some(n) => n as f64,
            None => self.log_n.exp(),
        }
    }

    /// True when the policy is the reference itself (`N = 1`).
    pub fn is_identity(&self) -> bool {
        self.log_n == 0.0
    }
}

/// A group of outcomes sharing one reward value, with the cumulative
/// reference mass around it (all in natural log).
#[derive(Debug, Clone, PartialEq)]
pub struct RewardLevel {
    pub value: f64,
    pub member_outcomes: Vec<usize>,
    pub level_log_prob: f64,
    pub cum_log_prob_le: f64,
    pub cum_log_prob_lt: f64,
}

/// Sort outcomes by reward, merge ties within [`REWARD_TIE_TOL`] and attach
/// cumulative masses.
///
/// `log_masses[i]` is the log reference mass carried by outcome `i`. The
/// cumulative masses are taken from below while they are under one half and
/// as `1 - upper tail` above that, which keeps `log S` accurate when a level
/// sits right next to 1.
pub fn reward_levels(log_masses: &[f64], rewards: &[f64]) -> Result<Vec<RewardLevel>> {
    if log_masses.len() != rewards.len() {
        return Err(Error::LengthMismatch {
            left: log_masses.len(),
            right: rewards.len(),
        });
    }
    if let Some(r) = rewards.iter().find(|r| !r.is_finite()) {
        return Err(Error::InvalidArgument(format!("reward {r} is not finite")));
    }
    let mut order: Vec<usize> = (0..rewards.len()).collect();
    order.sort_by(|&a, &b| rewards[a].total_cmp(&rewards[b]).then(a.cmp(&b)));

    let mut levels: Vec<RewardLevel> = Vec::new();
    for idx in order {
        match levels.last_mut() {
            Some(level) if rewards[idx] - level.value <= REWARD_TIE_TOL => {
                level.member_outcomes.push(idx);
                level.level_log_prob = log_add_exp(level.level_log_prob, log_masses[idx]);
            }
            _ => levels.push(RewardLevel {
                value: rewards[idx],
                member_outcomes: vec![idx],
                level_log_prob: log_masses[idx],
                cum_log_prob_le: 0.0,
                cum_log_prob_lt: 0.0,
            }),
        }
    }

    let n = levels.len();
    // upper[i] = log mass of levels i..n
    let mut upper = vec![f64::NEG_INFINITY; n + 1];
    for i in (0..n).rev() {
        upper[i] = log_add_exp(upper[i + 1], levels[i].level_log_prob);
    }
    let half = -std::f64::consts::LN_2;
    let mut lower = f64::NEG_INFINITY;
    for i in 0..n {
        let lt = lower;
        lower = log_add_exp(lower, levels[i].level_log_prob);
        let le = lower;
        levels[i].cum_log_prob_lt = if lt < half {
            lt
        } else {
            log1m_exp(upper[i].min(0.0))
        };
        levels[i].cum_log_prob_le = if i + 1 == n {
            0.0
        } else if le < half {
            le
        } else {
            log1m_exp(upper[i + 1].min(0.0))
        };
    }
    Ok(levels)
}

/// `log(S_<=^N - S_<^N)`, the log probability that best-of-N lands on
/// `level`.
fn level_log_weight(level: &RewardLevel, config: &BonConfig) -> f64 {
    let n = config.multiplier();
    let (ln_a, ln_b) = (level.cum_log_prob_le, level.cum_log_prob_lt.min(level.cum_log_prob_le));
    if ln_a == 0.0 {
        // Top level: 1 - S_<^N, valid even when N overflows to infinity.
        if ln_b == f64::NEG_INFINITY {
            return 0.0;
        }
        return log1m_exp((n * ln_b).min(0.0));
    }
    log_power_gap(ln_a, ln_b, n)
}

/// Log best-of-N probabilities over a flat outcome space with reference
/// log-masses `log_probs` and rewards `rewards`.
pub fn bon_log_pmf(log_probs: &[f64], rewards: &[f64], config: &BonConfig) -> Result<Vec<f64>> {
    if config.is_identity() {
        if log_probs.len() != rewards.len() {
            return Err(Error::LengthMismatch {
                left: log_probs.len(),
                right: rewards.len(),
            });
        }
        return Ok(log_probs.to_vec());
    }
    let levels = reward_levels(log_probs, rewards)?;
    let mut out = vec![f64::NEG_INFINITY; log_probs.len()];
    for level in &levels {
        let w = level_log_weight(level, config) - level.level_log_prob;
        for &i in &level.member_outcomes {
            out[i] = w + log_probs[i];
        }
    }
    Ok(out)
}

/// Exact best-of-N distribution over `outcome_probs.len()` outcomes with
/// uniform tie-breaking. `N = 1` returns `outcome_probs` unchanged.
///
/// ```
/// use aligntilt::bon::bon_exact_pmf;
/// use aligntilt::CategoricalDistribution;
///
/// let p = CategoricalDistribution::from_weights(&[0.4, 0.6]).unwrap();
/// let pi = bon_exact_pmf(&p, &[1.0, 0.0], 3).unwrap();
/// assert!((pi.prob(0) - (1.0 - 0.6f64.powi(3))).abs() < 1e-15);
/// ```
pub fn bon_exact_pmf(
    outcome_probs: &CategoricalDistribution,
    rewards: &[f64],
    n: u64,
) -> Result<CategoricalDistribution> {
    bon_exact_pmf_with(outcome_probs, rewards, &BonConfig::with_n(n)?)
}

/// [`bon_exact_pmf`] for a general [`BonConfig`].
pub fn bon_exact_pmf_with(
    outcome_probs: &CategoricalDistribution,
    rewards: &[f64],
    config: &BonConfig,
) -> Result<CategoricalDistribution> {
    if outcome_probs.len() != rewards.len() {
        return Err(Error::LengthMismatch {
            left: outcome_probs.len(),
            right: rewards.len(),
        });
    }
    if config.is_identity() {
        return Ok(outcome_probs.clone());
    }
    let logs = bon_log_pmf(outcome_probs.log_probs(), rewards, config)?;
    CategoricalDistribution::from_log_weights(&logs)
}

/// Which policy a [`TypeLaw`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyTag {
    Reference,
    Aligned,
    BestOfN,
}

/// One type class of a [`TypeLaw`].
#[derive(Debug, Clone, PartialEq)]
pub struct TypeLawEntry {
    pub tau: TypeVector,
    /// Log probability of each individual sequence in the class.
    pub log_seq_prob: f64,
    pub log_class_size: f64,
}

impl TypeLawEntry {
    /// Log probability of the whole class.
    pub fn log_class_prob(&self) -> f64 {
        self.log_seq_prob + self.log_class_size
    }
}

/// An exchangeable law on length-`m` sequences that is constant on type
/// classes, stored class by class.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeLaw {
    entries: Vec<TypeLawEntry>,
    m: u32,
    alphabet: usize,
    policy: PolicyTag,
}

impl TypeLaw {
    /// The product law `dist^m`.
    pub fn product(dist: &CategoricalDistribution, m: u32, policy: PolicyTag) -> Result<Self> {
        let entries = enumerate_types(m, dist.len())?
            .into_iter()
            .map(|tau| {
                let log_seq_prob = dist.log_prob_of_type(&tau)?;
                Ok(TypeLawEntry {
                    log_class_size: log_type_class_size(&tau),
                    log_seq_prob,
                    tau,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            entries,
            m,
            alphabet: dist.len(),
            policy,
        })
    }

    pub fn entries(&self) -> &[TypeLawEntry] {
        &self.entries
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn policy(&self) -> PolicyTag {
        self.policy
    }

    /// `Σ_classes |class| · P(sequence)`; 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.log_class_prob().exp()).sum()
    }

    /// `E[t(Y^m)]`, a point of the simplex.
    pub fn expected_type(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.alphabet];
        for e in &self.entries {
            let w = e.log_class_prob().exp();
            for (o, f) in out.iter_mut().zip(e.tau.frequencies()) {
                *o += w * f;
            }
        }
        out
    }

    /// `E[Σ_i x(Y_i)]` for per-symbol values `x` (e.g. `log q` for the reward).
    pub fn expected_additive(&self, per_symbol: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|e| e.log_class_prob().exp() * e.tau.dot(per_symbol))
            .sum()
    }

    /// `D(law ‖ dist^m)` summed class by class.
    pub fn kl_to_product(&self, dist: &CategoricalDistribution) -> Result<f64> {
        if dist.len() != self.alphabet {
            return Err(Error::AlphabetMismatch {
                left: self.alphabet,
                right: dist.len(),
            });
        }
        let mut kl = 0.0;
        for e in &self.entries {
            let w = e.log_class_prob().exp();
            if w > 0.0 {
                kl += w * (e.log_seq_prob - dist.log_prob_of_type(&e.tau)?);
            }
        }
        Ok(kl.max(0.0))
    }

    /// The law expanded to all `K^m` sequences, indexed with `y_1` as the
    /// most significant base-`K` digit. Only for small `m`.
    pub fn sequence_pmf(&self) -> Result<Vec<f64>> {
        let total = (self.alphabet as f64).powi(self.m as i32);
        if total > ORACLE_TUPLE_CAP {
            return Err(Error::SizeOverflow {
                what: "sequence expansion",
                required: total,
                cap: ORACLE_TUPLE_CAP,
            });
        }
        let k = self.alphabet;
        let lookup: std::collections::HashMap<&[u32], f64> = self
            .entries
            .iter()
            .map(|e| (e.tau.counts(), e.log_seq_prob.exp()))
            .collect();
        let mut out = Vec::with_capacity(total as usize);
        let mut counts = vec![0u32; k];
        for idx in 0..total as usize {
            counts.iter_mut().for_each(|c| *c = 0);
            let mut i = idx;
            for _ in 0..self.m {
                counts[i % k] += 1;
                i /= k;
            }
            out.push(lookup[counts.as_slice()]);
        }
        Ok(out)
    }
}

/// Exact best-of-N law on length-`m` sequences, grouped by type class.
///
/// The reward of class `τ` is `Σ_k τ_k log q_k` and the reference
/// probability of each of its sequences `Σ_k τ_k log p_k`; classes are merged
/// into reward levels and each sequence receives its level's share.
pub fn bon_type_law(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
    m: u32,
    config: &BonConfig,
) -> Result<TypeLaw> {
    p.check_same_alphabet(q)?;
    let reference = TypeLaw::product(p, m, PolicyTag::BestOfN)?;
    if config.is_identity() {
        return Ok(reference);
    }
    let class_masses: Vec<f64> = reference.entries.iter().map(|e| e.log_class_prob()).collect();
    let rewards: Vec<f64> = reference
        .entries
        .iter()
        .map(|e| e.tau.dot(q.log_probs()))
        .collect();
    let class_log_pi = bon_log_pmf(&class_masses, &rewards, config)?;
    let entries = reference
        .entries
        .into_iter()
        .zip(class_log_pi)
        .map(|(e, log_pi)| TypeLawEntry {
            log_seq_prob: log_pi - e.log_class_size,
            ..e
        })
        .collect();
    Ok(TypeLaw {
        entries,
        m,
        alphabet: p.len(),
        policy: PolicyTag::BestOfN,
    })
}

/// Brute-force best-of-N: enumerate every ordered `N`-tuple of length-`m`
/// sequences, weight it by its product probability and split it uniformly
/// among the positions of maximal reward.
///
/// Returns the PMF over all `K^m` sequences (index convention of
/// [`TypeLaw::sequence_pmf`]). Requires `(K^m)^N <= 1e7`.
pub fn bon_enumeration_oracle(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
    m: u32,
    n: u32,
) -> Result<Vec<f64>> {
    p.check_same_alphabet(q)?;
    if n == 0 {
        return Err(Error::InvalidN("N must be at least 1".into()));
    }
    if m == 0 {
        return Err(Error::EmptySequence);
    }
    let k = p.len();
    let outcomes = (k as f64).powi(m as i32);
    let tuples = outcomes.powi(n as i32);
    if tuples > ORACLE_TUPLE_CAP {
        return Err(Error::SizeOverflow {
            what: "best-of-N enumeration",
            required: tuples,
            cap: ORACLE_TUPLE_CAP,
        });
    }
    let outcomes = outcomes as usize;
    let mut seq_prob = vec![1.0f64; outcomes];
    let mut seq_reward = vec![0.0f64; outcomes];
    for idx in 0..outcomes {
        // Symbols from y_m (least significant) up to y_1.
        let mut i = idx;
        for _ in 0..m {
            let y = i % k;
            seq_prob[idx] *= p.prob(y);
            seq_reward[idx] += q.log_prob(y);
            i /= k;
        }
    }

    let n = n as usize;
    let mut pmf = vec![0.0f64; outcomes];
    let mut draw = vec![0usize; n];
    let mut winners = Vec::with_capacity(n);
    loop {
        let weight: f64 = draw.iter().map(|&d| seq_prob[d]).product();
        let best = draw.iter().map(|&d| seq_reward[d]).fold(f64::NEG_INFINITY, f64::max);
        winners.clear();
        winners.extend(draw.iter().copied().filter(|&d| best - seq_reward[d] <= REWARD_TIE_TOL));
        let share = weight / winners.len() as f64;
        for &w in &winners {
            pmf[w] += share;
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(pmf);
            }
            draw[pos] += 1;
            if draw[pos] < outcomes {
                break;
            }
            draw[pos] = 0;
            pos += 1;
        }
    }
}

/// One draw of best-of-N over length-`m` sequences: `N` i.i.d. sequences
/// from `p`, keep one maximising `Σ_i log q(y_i)`; ties are broken by one
/// extra uniform variate from the same seeded stream.
pub fn bon_sample(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
    m: usize,
    n: u64,
    seed: SeedSpec,
) -> Result<Sequence> {
    bon_sample_with_budget(p, q, m, n, seed, DEFAULT_SAMPLE_BUDGET)
}

/// [`bon_sample`] with an explicit cap on `N · m`.
pub fn bon_sample_with_budget(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
    m: usize,
    n: u64,
    seed: SeedSpec,
    budget: u128,
) -> Result<Sequence> {
    p.check_same_alphabet(q)?;
    if n == 0 {
        return Err(Error::InvalidN("N must be at least 1".into()));
    }
    if m == 0 {
        return Err(Error::EmptySequence);
    }
    let required = n as u128 * m as u128;
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let sampler = SymbolSampler::new(p);
    BonSampler::new(&sampler, q.log_probs(), m, n).draw(&mut seed.rng())
}

/// Reusable best-of-N sequence sampler (buffers are kept between draws).
pub(crate) struct BonSampler<'a> {
    sampler: &'a SymbolSampler,
    log_q: &'a [f64],
    m: usize,
    n: u64,
}

impl<'a> BonSampler<'a> {
    pub(crate) fn new(sampler: &'a SymbolSampler, log_q: &'a [f64], m: usize, n: u64) -> Self {
        Self { sampler, log_q, m, n }
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Sequence> {
        let k = self.sampler.alphabet();
        let mut candidate = vec![0usize; self.m];
        let mut counts = vec![0u32; k];
        let mut best_reward = f64::NEG_INFINITY;
        let mut maximisers: Vec<Vec<usize>> = Vec::new();
        for _ in 0..self.n {
            self.sampler.fill(rng, &mut candidate);
            counts.iter_mut().for_each(|c| *c = 0);
            for &y in &candidate {
                counts[y] += 1;
            }
            // Reward through the type so permuted sequences tie exactly.
            let reward: f64 = counts
                .iter()
                .zip(self.log_q)
                .filter(|(c, _)| **c > 0)
                .map(|(&c, l)| c as f64 * l)
                .sum();
            if reward > best_reward + REWARD_TIE_TOL {
                best_reward = reward;
                maximisers.clear();
                maximisers.push(candidate.clone());
            } else if (reward - best_reward).abs() <= REWARD_TIE_TOL {
                maximisers.push(candidate.clone());
            }
        }
        let pick = if maximisers.len() == 1 {
            0
        } else {
            rng.random_range(0..maximisers.len())
        };
        Sequence::new(maximisers.swap_remove(pick), k)
    }
}

/// `E[t(Y^m)]` under `law`.
pub fn bon_expected_type(law: &TypeLaw) -> Vec<f64> {
    law.expected_type()
}

/// `D(π_N^m ‖ p^m)`, bounded above by `log N`.
pub fn bon_kl_to_reference(law: &TypeLaw, p: &CategoricalDistribution) -> Result<f64> {
    law.kl_to_product(p)
}

/// `(1/m) D(π_N^m ‖ φ_δ^m)` with `N = exp(m δ)`: the per-symbol gap between
/// best-of-N and the optimal aligned model at the same KL budget.
pub fn bon_kl_rate_to_optimal(
    p: &CategoricalDistribution,
    q: &CategoricalDistribution,
    m: u32,
    delta: f64,
) -> Result<f64> {
    let sol = crate::tilt::solve_alpha_for_kl(q, p, delta)?;
    let config = BonConfig::with_log_n(m as f64 * delta)?;
    let law = bon_type_law(p, q, m, &config)?;
    Ok(law.kl_to_product(&sol.phi)? / m as f64)
}

/// Log-sum-exp over a law's class masses; used by cumulant checks.
pub(crate) fn log_expectation<F>(law: &TypeLaw, log_f: F) -> f64
where
    F: Fn(&TypeVector) -> f64,
{
    log_sum_exp_iter(law.entries.iter().map(|e| e.log_class_prob() + log_f(&e.tau)))
}
