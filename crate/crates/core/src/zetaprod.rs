//! Truncated products over primitive conjugacy classes.
//!
//! All products are accumulated as sums of principal logarithms of factors
//! close to 1 and exponentiated once at the end. Classes are visited in the
//! deterministic (length, lexicographic) order, so results do not depend on
//! the number of threads used to compute the multiplier spectrum.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freegroup::{self, walk_class_prefixes};
use crate::moebius::{multiplier_from_trace_squared, MoebiusMap};
use crate::schottky::SchottkyGroup;

/// `d_k = 6k^2 - 6k + 1`.
pub fn d_k(k: u32) -> i64 {
    let k = k as i64;
    6 * k * k - 6 * k + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPolicy {
    /// Longest class representative included.
    pub max_word_len: usize,
    /// Factors `1 - x` with `|x| < term_floor` are dropped.
    pub term_floor: f64,
    /// `converged` requires `|value(L) - value(L - 2)|` below this.
    pub tolerance: f64,
    /// Worker threads for the spectrum; 1 runs on the calling thread.
    pub threads: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            max_word_len: 10,
            term_floor: 1e-18,
            tolerance: 1e-10,
            threads: 1,
        }
    }
}

impl TruncationPolicy {
    pub fn with_len(max_word_len: usize) -> Self {
        TruncationPolicy {
            max_word_len,
            ..Default::default()
        }
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_word_len == 0 {
            return Err(Error::InvalidSpec("max_word_len must be at least 1".into()));
        }
        if !(self.term_floor > 0.0 && self.term_floor < 1.0) {
            return Err(Error::InvalidSpec("term_floor must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// A truncated infinite product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductValue {
    pub value: Complex64,
    /// Part of `value` coming from explicit generator factors (1 if none).
    pub prefactor: Complex64,
    pub max_word_len: usize,
    /// Largest power `m` used in any class factor.
    pub inner_cutoff: usize,
    pub terms_used: usize,
    /// Heuristic size of the omitted classes; not a bound.
    pub tail_estimate: f64,
    /// Value with classes of length at most `max_word_len - 2`.
    pub previous_value: Complex64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Class multipliers grouped by word length, in (length, lex) order.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSpectrum {
    rank: usize,
    by_length: Vec<Vec<Complex64>>,
}

impl MultiplierSpectrum {
    pub fn compute(group: &SchottkyGroup, max_len: usize, threads: usize) -> Result<Self> {
        let rank = group.genus();
        let gens: Vec<MoebiusMap> = freegroup::alphabet(rank).iter().map(|&x| group.generator_map(x)).collect();
        let tasks: Vec<(usize, i32)> = (1..=max_len)
            .flat_map(|len| freegroup::alphabet(rank).into_iter().map(move |x| (len, x)))
            .collect();
        let run = |&(len, first): &(usize, i32)| -> Result<Vec<Complex64>> {
            let mut out = Vec::new();
            let mut err = None;
            walk_class_prefixes(
                rank,
                len,
                Some(first),
                MoebiusMap::identity(),
                |m, x| m.compose(&gens[freegroup::letter_key(x) as usize]),
                |w, m| {
                    let t = m.trace_of_product(&gens[freegroup::letter_key(w[w.len() - 1]) as usize]);
                    match multiplier_from_trace_squared(t * t) {
                        Ok(q) => out.push(q),
                        Err(e) => err = Some(e),
                    }
                },
            );
            match err {
                Some(e) => Err(e),
                None => Ok(out),
            }
        };
        let chunks: Vec<Vec<Complex64>> = if threads <= 1 {
            tasks.iter().map(run).collect::<Result<_>>()?
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
            pool.install(|| tasks.par_iter().map(run).collect::<Result<_>>())?
        };
        let mut by_length = vec![Vec::new(); max_len];
        for ((len, _), chunk) in tasks.iter().zip(chunks) {
            by_length[len - 1].extend(chunk);
        }
        Ok(MultiplierSpectrum { rank, by_length })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn max_len(&self) -> usize {
        self.by_length.len()
    }

    /// Multipliers of classes of length `len` (1-based).
    pub fn of_length(&self, len: usize) -> &[Complex64] {
        &self.by_length[len - 1]
    }

    pub fn class_count(&self) -> usize {
        self.by_length.iter().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.by_length
            .iter()
            .enumerate()
            .flat_map(|(l, qs)| qs.iter().map(move |&q| (l + 1, q)))
    }
}

/// `ln(1 - x)`, accurate for small `|x|`.
pub fn ln_one_minus(x: Complex64) -> Complex64 {
    let r2 = x.norm_sqr();
    if r2 < 1e-6 {
        // terms shrink by |x| <= 1e-3, so stop once relatively negligible
        let stop = r2 * 1e-36;
        let mut term = x;
        let mut sum = -x;
        for n in 2..=8 {
            term *= x;
            if term.norm_sqr() < stop {
                break;
            }
            sum -= term / n as f64;
        }
        sum
    } else {
        (Complex64::new(1.0, 0.0) - x).ln()
    }
}

/// `sum_{m >= m0} ln(1 - q^m)` with terms below `floor` dropped.
/// Returns (sum, terms used, largest m used).
fn tail_log(q: Complex64, m0: u32, floor: f64) -> (Complex64, usize, usize) {
    let mut x = q.powu(m0);
    let mut m = m0 as usize;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut used = 0;
    let mut last = 0;
    let floor2 = floor * floor;
    while x.norm_sqr() >= floor2 {
        sum += ln_one_minus(x);
        used += 1;
        last = m;
        x *= q;
        m += 1;
    }
    (sum, used, last)
}

/// `sum_{m = lo}^{hi} ln(1 - q^m)`.
fn range_log(q: Complex64, lo: u32, hi: u32) -> Complex64 {
    (lo..=hi).map(|m| ln_one_minus(q.powu(m))).sum()
}

/// `(1 - q_1)^2 ... (1 - q_1^{k-1})^2 (1 - q_2^{k-1})` in log form.
fn prefactor_log(q1: Complex64, q2: Option<Complex64>, k: u32) -> Complex64 {
    let mut s = range_log(q1, 1, k - 1) * 2.0;
    if let Some(q2) = q2 {
        s += ln_one_minus(q2.powu(k - 1));
    }
    s
}

/// The factor `(1 - q_1)^2 ... (1 - q_1^{k-1})^2 (1 - q_2^{k-1})` that
/// precedes the double product in `F(k)`.
pub fn mt_prefactor(q1: Complex64, q2: Complex64, k: u32) -> Complex64 {
    prefactor_log(q1, Some(q2), k).exp()
}

struct Accumulated {
    per_length: Vec<Complex64>,
    terms: usize,
    cutoff: usize,
    /// Largest |contribution| among classes of the last length.
    rho: f64,
    /// Power governing a class's leading factor (for the tail model).
    leading_power: f64,
}

/// Products over the primitive classes of one group, sharing a multiplier spectrum.
pub struct ProductEngine<'a> {
    group: &'a SchottkyGroup,
    spectrum: MultiplierSpectrum,
    policy: TruncationPolicy,
    warnings: Vec<String>,
}

impl<'a> ProductEngine<'a> {
    pub fn new(group: &'a SchottkyGroup, policy: TruncationPolicy) -> Result<Self> {
        policy.validate()?;
        let spectrum = MultiplierSpectrum::compute(group, policy.max_word_len, policy.threads)?;
        Ok(ProductEngine {
            group,
            spectrum,
            policy,
            warnings: Vec::new(),
        })
    }

    pub fn spectrum(&self) -> &MultiplierSpectrum {
        &self.spectrum
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    /// Attach a warning to every product produced from now on.
    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    fn accumulate<F>(&self, leading_power: f64, per_class: F) -> Accumulated
    where
        F: Fn(Complex64) -> (Complex64, usize, usize),
    {
        let mut per_length = Vec::with_capacity(self.spectrum.max_len());
        let mut terms = 0;
        let mut cutoff = 0;
        let mut rho = 0.0;
        for len in 1..=self.spectrum.max_len() {
            let mut s = Complex64::new(0.0, 0.0);
            let mut len_max = 0.0f64;
            for &q in self.spectrum.of_length(len) {
                let (v, n, m) = per_class(q);
                s += v;
                terms += n;
                cutoff = cutoff.max(m);
                len_max = len_max.max(q.norm());
            }
            per_length.push(s);
            if len == self.spectrum.max_len() {
                rho = len_max;
            }
        }
        Accumulated {
            per_length,
            terms,
            cutoff,
            rho,
            leading_power,
        }
    }

    fn finish(&self, acc: Accumulated, prefactor_log: Complex64, scale: f64, mut warnings: Vec<String>) -> ProductValue {
        let l = self.spectrum.max_len();
        let total: Complex64 = acc.per_length.iter().sum();
        let earlier: Complex64 = acc.per_length.iter().take(l.saturating_sub(2)).sum();
        let value = (prefactor_log + total * scale).exp();
        let previous_value = (prefactor_log + earlier * scale).exp();
        // tail ~ |value| * N_{L+1} * rho^{(L+1)/L * p} with rho the largest
        // class multiplier at length L and p the leading power per class.
        let count_l = self.spectrum.of_length(l).len() as f64;
        let growth = (2 * self.spectrum.rank()).saturating_sub(1).max(1) as f64;
        let tail_estimate = if count_l == 0.0 || acc.rho == 0.0 {
            0.0
        } else {
            let per_letter = acc.rho.powf(1.0 / l as f64);
            value.norm() * scale.abs() * count_l * growth * per_letter.powf((l + 1) as f64 * acc.leading_power)
        };
        let converged = (value - previous_value).norm() < self.policy.tolerance;
        warnings.extend(self.warnings.iter().cloned());
        if !converged {
            warnings.push(format!(
                "truncation not converged: |value(L) - value(L-2)| = {:.3e}",
                (value - previous_value).norm()
            ));
        }
        ProductValue {
            value,
            prefactor: prefactor_log.exp(),
            max_word_len: l,
            inner_cutoff: acc.cutoff,
            terms_used: acc.terms,
            tail_estimate,
            previous_value,
            converged,
            warnings,
        }
    }

    fn require_genus_two(&self) -> Result<()> {
        match self.group.genus() {
            g if g >= 2 => Ok(()),
            g => Err(Error::GenusTooSmall(g)),
        }
    }

    fn mt_prefactor_log(&self, k: u32, with_second: bool) -> Complex64 {
        let qs = self.group.multipliers();
        prefactor_log(qs[0], with_second.then(|| qs[1]), k)
    }

    /// Zograf's product `prod_{γ} prod_{m >= 0} (1 - q_γ^{1+m})`.
    pub fn zograf_f1(&self) -> ProductValue {
        let floor = self.policy.term_floor;
        let acc = self.accumulate(1.0, |q| tail_log(q, 1, floor));
        self.finish(acc, Complex64::new(0.0, 0.0), 1.0, Vec::new())
    }

    /// McIntyre-Takhtajan's product for `k >= 2`.
    pub fn mt_fk(&self, k: u32) -> Result<ProductValue> {
        self.require_genus_two()?;
        if k < 2 {
            return Err(Error::InvalidSpec("k must be at least 2".into()));
        }
        let floor = self.policy.term_floor;
        let acc = self.accumulate(k as f64, |q| tail_log(q, k, floor));
        Ok(self.finish(acc, self.mt_prefactor_log(k, true), 1.0, Vec::new()))
    }

    /// Ruelle zeta `prod_{γ} (1 - |q_γ|^s)^{-1}`.
    pub fn ruelle(&self, s: f64) -> ProductValue {
        let floor = self.policy.term_floor;
        let acc = self.accumulate(s, |q| {
            let x = q.norm().powf(s);
            if x < floor {
                (Complex64::new(0.0, 0.0), 0, 0)
            } else {
                (Complex64::new(-(-x).ln_1p(), 0.0), 1, 1)
            }
        });
        let mut warnings = Vec::new();
        if s < 2.0 {
            warnings.push(format!("s = {s} < 2: product outside its region of absolute convergence"));
        }
        self.finish(acc, Complex64::new(0.0, 0.0), 1.0, warnings)
    }

    /// `R(k) (1 - q_1^k)^2 (1 - q_2^k) / (1 - q_2^{k-1})`.
    pub fn modified_ruelle(&self, k: u32) -> Result<ProductValue> {
        self.require_genus_two()?;
        if k < 2 {
            return Err(Error::InvalidSpec("k must be at least 2".into()));
        }
        let mut base = self.ruelle(k as f64);
        let qs = self.group.multipliers();
        let extra = ln_one_minus(qs[0].powu(k)) * 2.0 + ln_one_minus(qs[1].powu(k)) - ln_one_minus(qs[1].powu(k - 1));
        let factor = extra.exp();
        base.value *= factor;
        base.previous_value *= factor;
        base.prefactor = factor;
        if !self.group.is_real() {
            base.warnings
                .push("group is not real: modified Ruelle value does not match F(k+1)/F(k)".into());
        }
        Ok(base)
    }

    /// The product
    /// `prod_{γ} [prod_{m<k} (1 - q^m)^{d_k} prod_{m>=k} (1 - q^m)^{d_k - 1}]`
    /// divided by the McIntyre-Takhtajan prefactor. For genus one (only when
    /// `allow_genus_one`) the `q_2` factor is omitted.
    pub fn intro_product(&self, k: u32, allow_genus_one: bool) -> Result<ProductValue> {
        if self.group.genus() < 2 && !allow_genus_one {
            return Err(Error::GenusTooSmall(self.group.genus()));
        }
        if k < 2 {
            return Err(Error::InvalidSpec("k must be at least 2".into()));
        }
        let dk = d_k(k) as f64;
        let floor = self.policy.term_floor;
        let acc = self.accumulate(1.0, |q| {
            let low = range_log(q, 1, k - 1) * dk;
            let (high, n, m) = tail_log(q, k, floor);
            (low + high * (dk - 1.0), n + (k as usize - 1), m.max(k as usize - 1))
        });
        let pre = -self.mt_prefactor_log(k, self.group.genus() >= 2);
        Ok(self.finish(acc, pre, 1.0, Vec::new()))
    }

    /// Both sides of the Mumford-form product identity:
    /// `F(1)^{d_k} / F(k)` and the direct product.
    pub fn mumford_ratio(&self, k: u32) -> Result<(ProductValue, ProductValue)> {
        self.require_genus_two()?;
        let f1 = self.zograf_f1();
        let fk = self.mt_fk(k)?;
        let dk = d_k(k) as f64;
        let via_f_log = f1.value.ln() * dk - fk.value.ln();
        let prev_log = f1.previous_value.ln() * dk - fk.previous_value.ln();
        let value = via_f_log.exp();
        let previous_value = prev_log.exp();
        let mut warnings = f1.warnings.clone();
        warnings.extend(fk.warnings.iter().cloned());
        warnings.dedup();
        let via_f = ProductValue {
            value,
            prefactor: fk.prefactor.inv(),
            max_word_len: f1.max_word_len,
            inner_cutoff: f1.inner_cutoff.max(fk.inner_cutoff),
            terms_used: f1.terms_used + fk.terms_used,
            tail_estimate: value.norm() * (dk * f1.tail_estimate / f1.value.norm() + fk.tail_estimate / fk.value.norm()),
            previous_value,
            converged: (value - previous_value).norm() < self.policy.tolerance,
            warnings,
        };
        Ok((via_f, self.intro_product(k, false)?))
    }
}

pub fn zograf_f1(group: &SchottkyGroup, policy: &TruncationPolicy) -> Result<ProductValue> {
    let mut engine = ProductEngine::new(group, *policy)?;
    if group.circles().is_some() {
        if let Ok(delta) = group.delta_estimate(5.min(policy.max_word_len.max(3))) {
            if delta >= 1.0 {
                engine.warn(format!("delta estimate {delta:.3} >= 1: product may not converge"));
            }
        }
    }
    Ok(engine.zograf_f1())
}

pub fn mt_fk(group: &SchottkyGroup, k: u32, policy: &TruncationPolicy) -> Result<ProductValue> {
    if group.genus() < 2 {
        return Err(Error::GenusTooSmall(group.genus()));
    }
    ProductEngine::new(group, *policy)?.mt_fk(k)
}

pub fn ruelle(group: &SchottkyGroup, s: f64, policy: &TruncationPolicy) -> Result<ProductValue> {
    Ok(ProductEngine::new(group, *policy)?.ruelle(s))
}

pub fn modified_ruelle(group: &SchottkyGroup, k: u32, policy: &TruncationPolicy) -> Result<ProductValue> {
    if group.genus() < 2 {
        return Err(Error::GenusTooSmall(group.genus()));
    }
    ProductEngine::new(group, *policy)?.modified_ruelle(k)
}

pub fn mumford_ratio(group: &SchottkyGroup, k: u32, policy: &TruncationPolicy) -> Result<(ProductValue, ProductValue)> {
    if group.genus() < 2 {
        return Err(Error::GenusTooSmall(group.genus()));
    }
    ProductEngine::new(group, *policy)?.mumford_ratio(k)
}

pub fn intro_product(group: &SchottkyGroup, k: u32, allow_genus_one: bool, policy: &TruncationPolicy) -> Result<ProductValue> {
    ProductEngine::new(group, *policy)?.intro_product(k, allow_genus_one)
}
