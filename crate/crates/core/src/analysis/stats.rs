//! Survived-to-killed ratios and their cross-project correlation.

use serde::{Deserialize, Serialize};

/// `survived / killed`, undefined when nothing was killed.
pub fn skr(survived: usize, killed: usize) -> Option<f64> {
    (killed > 0).then(|| survived as f64 / killed as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    /// Pearson r; `None` when either side has zero variance.
    pub r: Option<f64>,
    pub r_squared: Option<f64>,
    pub degenerate: bool,
    pub pairs_used: usize,
    /// Projects dropped because one of their SKRs is undefined.
    pub pairs_excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("need at least 3 projects with a defined SKR in both families, got {valid}")]
pub struct InsufficientData {
    pub valid: usize,
}

/// Pearson correlation over `(x, y)` pairs; pairs with a missing side are
/// excluded and counted.
pub fn pearson(pairs: &[(Option<f64>, Option<f64>)]) -> Result<Correlation, InsufficientData> {
    let valid: Vec<(f64, f64)> = pairs.iter().filter_map(|&(x, y)| Some((x?, y?))).collect();
    if valid.len() < 3 {
        return Err(InsufficientData { valid: valid.len() });
    }
    let n = valid.len() as f64;
    let mx = valid.iter().map(|p| p.0).sum::<f64>() / n;
    let my = valid.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &valid {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let excluded = pairs.len() - valid.len();
    if sxx == 0.0 || syy == 0.0 {
        return Ok(Correlation {
            r: None,
            r_squared: None,
            degenerate: true,
            pairs_used: valid.len(),
            pairs_excluded: excluded,
        });
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(Correlation {
        r: Some(r),
        r_squared: Some(r * r),
        degenerate: false,
        pairs_used: valid.len(),
        pairs_excluded: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_pairs_correlate_perfectly() {
        let pairs: Vec<_> = (0..6).map(|i| (Some(i as f64), Some(3.0 * i as f64 - 1.0))).collect();
        let c = pearson(&pairs).unwrap();
        assert!((c.r.unwrap() - 1.0).abs() < 1e-12);
        assert!((c.r_squared.unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<_> = (0..6).map(|i| (Some(i as f64), Some(-(i as f64)))).collect();
        assert!((pearson(&neg).unwrap().r.unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_side_is_degenerate() {
        let pairs: Vec<_> = (0..5).map(|i| (Some(i as f64), Some(0.5))).collect();
        let c = pearson(&pairs).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.r, None);
    }

    #[test]
    fn undefined_pairs_are_excluded_and_counted() {
        let pairs = vec![(Some(1.0), Some(2.0)), (None, Some(1.0)), (Some(2.0), Some(3.0)), (Some(3.0), Some(5.0))];
        let c = pearson(&pairs).unwrap();
        assert_eq!((c.pairs_used, c.pairs_excluded), (3, 1));
        assert_eq!(pearson(&pairs[..2]), Err(InsufficientData { valid: 1 }));
    }

    #[test]
    fn skr_undefined_without_kills() {
        assert_eq!(skr(3, 0), None);
        assert_eq!(skr(24, 318), Some(24.0 / 318.0));
    }
}
