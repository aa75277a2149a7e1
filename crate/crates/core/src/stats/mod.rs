//! Hypothesis tests and agreement statistics.
//!
//! Every routine is generic over [`Real`] and computes tail probabilities
//! from the incomplete gamma and beta functions in [`special`].

pub mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Degrees of freedom attached to a test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dof {
    One(usize),
    Two(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult<F> {
    pub statistic: F,
    pub p_value: F,
    pub df: Dof,
    pub group_sizes: Vec<usize>,
}

fn clamp_p<F: Real>(p: F) -> F {
    if p.is_nan() {
        F::one()
    } else {
        p.max(F::zero()).min(F::one())
    }
}

fn check_finite<F: Real>(values: &[F], what: &str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation(format!("{what} contains non-finite values")));
    }
    Ok(())
}

/// Average ranks (1-based) with ties sharing their mean rank.
///
/// Also returns the tie term `sum(t^3 - t)` over tie groups.
pub fn midranks<F: Real>(values: &[F]) -> (Vec<F>, F) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![F::zero(); values.len()];
    let mut tie_term = F::zero();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share rank (i+1 + j)/2
        let rank = F::from_usize_lossy(i + 1 + j) / F::c(2.0);
        for &idx in &order[i..j] {
            ranks[idx] = rank;
        }
        let t = F::from_usize_lossy(j - i);
        tie_term = tie_term + t * t * t - t;
        i = j;
    }
    (ranks, tie_term)
}

/// Kruskal-Wallis H test on midranks with the standard tie correction.
pub fn kruskal_wallis<F: Real, S: AsRef<[F]>>(groups: &[S]) -> Result<TestResult<F>> {
    if groups.len() < 2 {
        return Err(Error::validation("kruskal_wallis needs at least two groups"));
    }
    let sizes: Vec<usize> = groups.iter().map(|g| g.as_ref().len()).collect();
    if let Some(pos) = sizes.iter().position(|&n| n == 0) {
        return Err(Error::validation(format!("kruskal_wallis group {pos} is empty")));
    }
    let pooled: Vec<F> = groups.iter().flat_map(|g| g.as_ref().iter().copied()).collect();
    check_finite(&pooled, "kruskal_wallis sample")?;
    let n = pooled.len();
    if n < 3 {
        return Err(Error::validation("kruskal_wallis needs at least three observations"));
    }
    let (ranks, tie_term) = midranks(&pooled);
    let nf = F::from_usize_lossy(n);
    let mut offset = 0;
    let mut sum_sq = F::zero();
    for &size in &sizes {
        let r: F = ranks[offset..offset + size].iter().copied().sum();
        sum_sq = sum_sq + r * r / F::from_usize_lossy(size);
        offset += size;
    }
    let df = groups.len() - 1;
    let divisor = F::one() - tie_term / (nf * nf * nf - nf);
    if divisor <= F::epsilon() {
        return Ok(TestResult {
            statistic: F::zero(),
            p_value: F::one(),
            df: Dof::One(df),
            group_sizes: sizes,
        });
    }
    let h = (F::c(12.0) / (nf * (nf + F::one())) * sum_sq - F::c(3.0) * (nf + F::one())) / divisor;
    let h = h.max(F::zero());
    Ok(TestResult {
        statistic: h,
        p_value: clamp_p(special::chi_square_sf(h, F::from_usize_lossy(df))),
        df: Dof::One(df),
        group_sizes: sizes,
    })
}

/// Holm step-down adjustment; output keeps the input order.
pub fn holm_bonferroni<F: Real>(p_values: &[F]) -> Result<Vec<F>> {
    if let Some(p) = p_values
        .iter()
        .find(|p| !(**p >= F::zero() && **p <= F::one()))
    {
        return Err(Error::validation(format!("p-value {p} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).expect("p in [0,1]"));
    let mut adjusted = vec![F::zero(); m];
    let mut running = F::zero();
    for (i, &idx) in order.iter().enumerate() {
        let scaled = (p_values[idx] * F::from_usize_lossy(m - i)).min(F::one());
        running = running.max(scaled);
        adjusted[idx] = running;
    }
    Ok(adjusted)
}

/// Pearson correlation with a two-sided t-test of `r = 0`.
pub fn pearson<F: Real>(x: &[F], y: &[F]) -> Result<TestResult<F>> {
    if x.len() != y.len() {
        return Err(Error::validation(format!(
            "pearson samples differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::validation("pearson needs at least three pairs"));
    }
    check_finite(x, "pearson x")?;
    check_finite(y, "pearson y")?;
    let nf = F::from_usize_lossy(n);
    let mx = x.iter().copied().sum::<F>() / nf;
    let my = y.iter().copied().sum::<F>() / nf;
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx <= F::zero() || syy <= F::zero() {
        return Err(Error::UndefinedCorrelation(
            "a sample has zero variance".to_string(),
        ));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).max(-F::one()).min(F::one());
    let df = n - 2;
    let p = if (F::one() - r * r) <= F::zero() {
        F::zero()
    } else {
        let t = r * (F::from_usize_lossy(df) / (F::one() - r * r)).sqrt();
        special::student_t_two_sided(t, F::from_usize_lossy(df))
    };
    Ok(TestResult {
        statistic: r,
        p_value: clamp_p(p),
        df: Dof::One(df),
        group_sizes: vec![n],
    })
}

/// Between- and within-group sums of squares.
pub fn anova_sums<F: Real, S: AsRef<[F]>>(groups: &[S]) -> (F, F) {
    let n: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let grand = groups
        .iter()
        .flat_map(|g| g.as_ref().iter().copied())
        .sum::<F>()
        / F::from_usize_lossy(n.max(1));
    let mut between = F::zero();
    let mut within = F::zero();
    for g in groups {
        let g = g.as_ref();
        if g.is_empty() {
            continue;
        }
        let mean = g.iter().copied().sum::<F>() / F::from_usize_lossy(g.len());
        between = between + F::from_usize_lossy(g.len()) * (mean - grand) * (mean - grand);
        within = within + g.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>();
    }
    (between, within)
}

/// One-way ANOVA F test.
///
/// Zero variance everywhere yields `F = 0`; zero within-group variance
/// with separated means yields the largest finite statistic and `p = 0`.
pub fn anova_oneway<F: Real, S: AsRef<[F]>>(groups: &[S]) -> Result<TestResult<F>> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::validation("anova needs at least two groups"));
    }
    let sizes: Vec<usize> = groups.iter().map(|g| g.as_ref().len()).collect();
    if let Some(pos) = sizes.iter().position(|&n| n < 2) {
        return Err(Error::validation(format!(
            "anova group {pos} has fewer than two observations"
        )));
    }
    for g in groups {
        check_finite(g.as_ref(), "anova sample")?;
    }
    let n: usize = sizes.iter().sum();
    if n <= k {
        return Err(Error::validation("anova within-group degrees of freedom is zero"));
    }
    let (between, within) = anova_sums(groups);
    let df1 = k - 1;
    let df2 = n - k;
    let ms_between = between / F::from_usize_lossy(df1);
    let ms_within = within / F::from_usize_lossy(df2);
    let scale = F::epsilon() * (between + within).max(F::one());
    let (f, p) = if ms_within <= scale {
        if ms_between <= scale {
            (F::zero(), F::one())
        } else {
            (F::max_value(), F::zero())
        }
    } else {
        let f = ms_between / ms_within;
        (
            f,
            special::f_sf(f, F::from_usize_lossy(df1), F::from_usize_lossy(df2)),
        )
    };
    Ok(TestResult {
        statistic: f,
        p_value: clamp_p(p),
        df: Dof::Two(df1, df2),
        group_sizes: sizes,
    })
}

/// Fleiss's kappa over an items x categories count matrix.
pub fn fleiss_kappa<F: Real, R: AsRef<[usize]>>(counts: &[R]) -> Result<F> {
    let first = counts
        .first()
        .ok_or_else(|| Error::validation("fleiss_kappa needs at least one item"))?;
    let raters: usize = first.as_ref().iter().sum();
    let categories = first.as_ref().len();
    if raters < 2 {
        return Err(Error::validation("fleiss_kappa needs at least two raters per item"));
    }
    for (i, row) in counts.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != categories {
            return Err(Error::validation(format!(
                "item {i} has {} categories, expected {categories}",
                row.len()
            )));
        }
        let total: usize = row.iter().sum();
        if total != raters {
            return Err(Error::validation(format!(
                "item {i} has {total} ratings, expected {raters}"
            )));
        }
    }
    let n_items = F::from_usize_lossy(counts.len());
    let n = F::from_usize_lossy(raters);
    let mut p_bar = F::zero();
    let mut marginals = vec![0usize; categories];
    for row in counts {
        let mut sq = F::zero();
        for (j, &c) in row.as_ref().iter().enumerate() {
            let c_f = F::from_usize_lossy(c);
            sq = sq + c_f * c_f;
            marginals[j] += c;
        }
        p_bar = p_bar + (sq - n) / (n * (n - F::one()));
    }
    p_bar = p_bar / n_items;
    let total = n_items * n;
    let p_e: F = marginals
        .iter()
        .map(|&m| {
            let p = F::from_usize_lossy(m) / total;
            p * p
        })
        .sum();
    if (F::one() - p_e).abs() <= F::epsilon() {
        return Err(Error::validation(
            "fleiss_kappa undefined: every rating falls in one category",
        ));
    }
    Ok((p_bar - p_e) / (F::one() - p_e))
}

/// ROC AUC in the Mann-Whitney formulation; tied scores count one half.
pub fn auc<F: Real>(labels: &[bool], scores: &[F]) -> Result<F> {
    if labels.len() != scores.len() {
        return Err(Error::validation(format!(
            "auc: {} labels vs {} scores",
            labels.len(),
            scores.len()
        )));
    }
    check_finite(scores, "auc scores")?;
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::validation("auc needs both positive and negative labels"));
    }
    let (ranks, _) = midranks(scores);
    let rank_sum: F = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(&r, _)| r)
        .sum();
    let np = F::from_usize_lossy(n_pos);
    let nn = F::from_usize_lossy(n_neg);
    let u = rank_sum - np * (np + F::one()) / F::c(2.0);
    Ok((u / (np * nn)).max(F::zero()).min(F::one()))
}
