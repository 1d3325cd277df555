//! Similarity and correlation measures over plain `f64` slices.

use crate::error::{Error, Result};

fn check_pair(x: &[f64], y: &[f64], min_len: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < min_len {
        return Err(Error::InvalidArgument(format!(
            "need at least {min_len} values, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value".into()));
    }
    Ok(())
}

/// `dot(x, y) / (|x| |y|)`. Errors on a zero vector.
pub fn cosine_similarity(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 1)?;
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny = y.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok((dot / (nx * ny)).clamp(-1.0, 1.0))
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    // Checked exactly: the mean of equal values can differ from them by an
    // ulp, which would leave a spurious nonzero variance.
    let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
    if constant(x) || constant(y) {
        return Err(Error::ZeroVariance);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of the average-rank vectors.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Kendall's tau-a, `(concordant - discordant) / (n (n - 1) / 2)`. A pair tied
/// in either argument counts as neither concordant nor discordant.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    let n = x.len();
    let mut score: i64 = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (x[i] - x[j]).signum() * (y[i] - y[j]).signum();
            if x[i] != x[j] && y[i] != y[j] {
                score += s as i64;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(score as f64 / pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const L1: [f64; 7] = [1.0, 2.0, 0.0, 6.0, 3.0, 4.0, 5.0];
    const L2: [f64; 7] = [2.0, 1.0, 0.0, 6.0, 3.0, 4.0, 5.0];
    const L3: [f64; 7] = [1.0, 6.0, 0.0, 2.0, 3.0, 4.0, 5.0];
    const L4: [f64; 7] = [6.0, 1.0, 0.0, 2.0, 3.0, 4.0, 5.0];

    #[test]
    fn measure_comparison_pairs() {
        assert_abs_diff_eq!(cosine_similarity(&L1, &L2).unwrap(), 0.989, epsilon = 1e-3);
        assert_abs_diff_eq!(cosine_similarity(&L3, &L4).unwrap(), 0.725, epsilon = 1e-3);
        assert_abs_diff_eq!(spearman(&L1, &L2).unwrap(), 0.964, epsilon = 1e-3);
        assert_abs_diff_eq!(spearman(&L3, &L4).unwrap(), 0.107, epsilon = 1e-3);
        assert_abs_diff_eq!(kendall_tau(&L1, &L2).unwrap(), 0.905, epsilon = 1e-3);
        assert_abs_diff_eq!(kendall_tau(&L3, &L4).unwrap(), 0.143, epsilon = 1e-3);
    }

    #[test]
    fn cosine_basics() {
        assert_abs_diff_eq!(cosine_similarity(&L1, &L1).unwrap(), 1.0, epsilon = 1e-12);
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 2.0]),
            Err(Error::UndefinedSimilarity)
        ));
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn pearson_basics() {
        let x = [1.0, 2.0, 3.0, 4.0, 7.5];
        let affine: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(pearson(&x, &affine).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pearson(&x, &neg).unwrap(), -1.0, epsilon = 1e-12);
        // means 2.5, deviations (-1.5,-0.5,0.5,1.5) and (-1.5,-0.5,1.5,0.5):
        // sxy = 2.25+0.25+0.75+0.75 = 4, sxx = syy = 5, r = 0.8
        assert_abs_diff_eq!(
            pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 4.0, 3.0]).unwrap(),
            0.8,
            epsilon = 1e-12
        );
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::ZeroVariance)
        ));
        // Summing these three and dividing by three does not give the value back.
        let flat = [0.7445041242206225; 3];
        assert!(matches!(pearson(&flat, &flat), Err(Error::ZeroVariance)));
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rank_measures_basics() {
        assert_abs_diff_eq!(
            spearman(&[1.0, 5.0, 9.0], &[0.1, 0.2, 0.3]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let id = [0.0, 1.0, 2.0, 3.0, 4.0];
        let rev = [4.0, 3.0, 2.0, 1.0, 0.0];
        assert_abs_diff_eq!(kendall_tau(&id, &rev).unwrap(), -1.0, epsilon = 1e-12);
        assert_eq!(
            average_ranks(&[10.0, 20.0, 10.0, 5.0]),
            vec![2.5, 4.0, 2.5, 1.0]
        );
        // one tied pair in x out of 3 pairs: (0 concordant-discordant from it)
        assert_abs_diff_eq!(
            kendall_tau(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cosine_is_the_most_stable_measure() {
        let dc =
            (cosine_similarity(&L1, &L2).unwrap() - cosine_similarity(&L3, &L4).unwrap()).abs();
        let ds = (spearman(&L1, &L2).unwrap() - spearman(&L3, &L4).unwrap()).abs();
        let dk = (kendall_tau(&L1, &L2).unwrap() - kendall_tau(&L3, &L4).unwrap()).abs();
        assert!(dc < ds && dc < dk);
    }

    fn vec_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..12).prop_flat_map(|n| {
            (
                prop::collection::vec(0.01f64..100.0, n),
                prop::collection::vec(0.01f64..100.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn measures_are_symmetric((x, y) in vec_pair()) {
            prop_assert_eq!(cosine_similarity(&x, &y).unwrap(), cosine_similarity(&y, &x).unwrap());
            prop_assert_eq!(kendall_tau(&x, &y).unwrap(), kendall_tau(&y, &x).unwrap());
            if let (Ok(a), Ok(b)) = (pearson(&x, &y), pearson(&y, &x)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            if let (Ok(a), Ok(b)) = (spearman(&x, &y), spearman(&y, &x)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn cosine_scale_invariant((x, y) in vec_pair(), c in 0.001f64..1000.0) {
            let cx: Vec<f64> = x.iter().map(|v| v * c).collect();
            prop_assert!((cosine_similarity(&cx, &y).unwrap() - cosine_similarity(&x, &y).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn rank_measures_monotone_invariant((x, y) in vec_pair()) {
            let tx: Vec<f64> = x.iter().map(|v| v.ln() * 3.0 + v.powi(3)).collect();
            prop_assert_eq!(kendall_tau(&tx, &y).unwrap(), kendall_tau(&x, &y).unwrap());
            if let Ok(r) = spearman(&x, &y) {
                prop_assert!((spearman(&tx, &y).unwrap() - r).abs() < 1e-12);
            }
        }

        #[test]
        fn results_in_range((x, y) in vec_pair()) {
            let c = cosine_similarity(&x, &y).unwrap();
            prop_assert!((0.0..=1.0).contains(&c));
            let k = kendall_tau(&x, &y).unwrap();
            prop_assert!((-1.0..=1.0).contains(&k));
        }
    }
}
