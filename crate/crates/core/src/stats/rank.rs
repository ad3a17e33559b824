use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Average ranks (1-based) and the tie term `Σ (t³ − t)` over tie groups.
pub fn average_ranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        let t = (end - start) as f64;
        ties += t * t * t - t;
        start = end;
    }
    (ranks, ties)
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::invalid(format!(
            "value {} at index {i} is not finite",
            values[i]
        ))),
        None => Ok(()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KruskalWallis {
    pub h: f64,
    pub p_value: f64,
    /// `log10 p`, still finite when `p` underflows.
    pub log10_p: f64,
    pub df: usize,
}

/// Kruskal-Wallis H test of `values` grouped by `labels`, with tie
/// correction and a chi-squared approximation on `groups − 1` degrees of
/// freedom. Empty classes are ignored.
pub fn kruskal_wallis(values: &[f64], labels: &[usize]) -> Result<KruskalWallis> {
    if values.len() != labels.len() {
        return Err(Error::shape(format!(
            "{} values for {} labels",
            values.len(),
            labels.len()
        )));
    }
    check_finite(values)?;
    let n_groups = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; n_groups];
    for &l in labels {
        sizes[l] += 1;
    }
    let k = sizes.iter().filter(|&&s| s > 0).count();
    if k < 2 {
        return Err(Error::TooFewClasses(k));
    }
    let df = k - 1;
    let n = values.len() as f64;
    let (ranks, ties) = average_ranks(values);
    let correction = 1.0 - ties / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(KruskalWallis {
            h: 0.0,
            p_value: 1.0,
            log10_p: 0.0,
            df,
        });
    }
    let mut rank_sums = vec![0.0; n_groups];
    for (&r, &l) in ranks.iter().zip(labels) {
        rank_sums[l] += r;
    }
    let s: f64 = rank_sums
        .iter()
        .zip(&sizes)
        .filter(|(_, &c)| c > 0)
        .map(|(r, &c)| r * r / c as f64)
        .sum();
    let h = ((12.0 / (n * (n + 1.0)) * s - 3.0 * (n + 1.0)) / correction).max(0.0);
    let p_value = ChiSquared::new(df as f64).expect("positive df").sf(h);
    Ok(KruskalWallis {
        h,
        p_value,
        log10_p: log10_chi2_sf(h, df as f64, p_value),
        df,
    })
}

/// `log10` of the chi-squared upper tail, using the leading term of its
/// asymptotic expansion once the direct value underflows.
fn log10_chi2_sf(x: f64, df: f64, p: f64) -> f64 {
    if p > 1e-300 {
        return p.log10();
    }
    let a = df / 2.0;
    let ln_p = (a - 1.0) * x.ln() - x / 2.0 - (a - 1.0) * 2f64.ln() - ln_gamma(a);
    ln_p / std::f64::consts::LN_10
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// `U` of the first sample: pairs `(a, b)` with `a > b`, ties counting ½.
    pub u: f64,
    pub p_value: f64,
}

/// Two-sided Mann-Whitney U test using the normal approximation with tie and
/// continuity correction.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("both samples must be nonempty"));
    }
    check_finite(a)?;
    check_finite(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = average_ranks(&pooled);
    let ra: f64 = ranks[..a.len()].iter().sum();
    let u = ra - na * (na + 1.0) / 2.0;
    let n = na + nb;
    let mean = na * nb / 2.0;
    let var = na * nb / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
        (2.0 * Normal::standard().sf(z)).min(1.0)
    };
    Ok(MannWhitney { u, p_value })
}
