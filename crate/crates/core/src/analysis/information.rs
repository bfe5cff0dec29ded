use serde::{Deserialize, Serialize};

use super::joint::JointDistribution;
use crate::error::{Error, Result};

/// Mutual information a party pair shares, and the resulting one-way key rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub i_ab: f64,
    pub i_ae: f64,
    pub i_be: f64,
    /// `I(A:B) − min(I(A:E), I(B:E))`, bits per sifted symbol.
    pub r: f64,
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// `I(X:Y)` in bits of a finite joint distribution given as rows over `x`.
///
/// The table is normalized first; zero cells contribute nothing.
pub fn mutual_information<R: AsRef<[f64]>>(joint: &[R]) -> Result<f64> {
    let mut total = 0.0;
    for row in joint {
        for &p in row.as_ref() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
            }
            total += p;
        }
    }
    if total <= 0.0 {
        return Err(Error::InvalidDistribution("distribution has no mass".into()));
    }
    let cols = joint.iter().map(|r| r.as_ref().len()).max().unwrap_or(0);
    let px: Vec<f64> = joint.iter().map(|r| r.as_ref().iter().sum::<f64>() / total).collect();
    let mut py = vec![0.0; cols];
    for row in joint {
        for (y, &p) in row.as_ref().iter().enumerate() {
            py[y] += p / total;
        }
    }
    let mut info = 0.0;
    for (x, row) in joint.iter().enumerate() {
        for (y, &p) in row.as_ref().iter().enumerate() {
            let p = p / total;
            if p > 0.0 {
                info += p * (p / (px[x] * py[y])).log2();
            }
        }
    }
    Ok(info.max(0.0))
}

/// Rate bound `R = I(A:B) − min(I(A:E), I(B:E))`, with Eve's abstention as
/// a third symbol.
pub fn key_rate(joint: &JointDistribution<f64>) -> Result<RateReport> {
    let t = &joint.table;
    let mut ab = [[0.0; 2]; 2];
    let mut ae = [[0.0; 3]; 2];
    let mut be = [[0.0; 3]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for e in 0..3 {
                let p = t[a][b][e];
                ab[a][b] += p;
                ae[a][e] += p;
                be[b][e] += p;
            }
        }
    }
    let i_ab = mutual_information(&ab)?;
    let i_ae = mutual_information(&ae)?;
    let i_be = mutual_information(&be)?;
    Ok(RateReport { i_ab, i_ae, i_be, r: i_ab - i_ae.min(i_be) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlated_and_independent_bits() {
        assert!((mutual_information(&[[0.5, 0.0], [0.0, 0.5]]).unwrap() - 1.0).abs() < 1e-12);
        assert!(mutual_information(&[[0.25, 0.25], [0.25, 0.25]]).unwrap().abs() < 1e-12);
        assert!(mutual_information(&[[0.1, 0.3], [0.15, 0.45]]).unwrap().abs() < 1e-12);
    }

    /// Direct summation for a binary symmetric pair checked against `1 − h(ε)`.
    #[test]
    fn binary_symmetric_channel() {
        let eps = 2.0 / 7.0;
        let direct = mutual_information(&[[(1.0 - eps) / 2.0, eps / 2.0], [eps / 2.0, (1.0 - eps) / 2.0]]).unwrap();
        let closed = 1.0 - binary_entropy(eps);
        assert!((direct - closed).abs() < 1e-12);
        assert!((closed - 0.136_879_431_433_369).abs() < 1e-12, "{closed}");
    }

    #[test]
    fn abstention_symbol_carries_no_information() {
        // Eve abstains half the time, otherwise knows the bit
        let m = [[0.25, 0.0, 0.25], [0.0, 0.25, 0.25]];
        assert!((mutual_information(&m).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_entries() {
        assert!(matches!(
            mutual_information(&[[0.6, -0.1], [0.25, 0.25]]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(mutual_information(&[[0.0, 0.0]]).is_err());
        assert!(mutual_information(&[[f64::NAN, 1.0]]).is_err());
    }

    #[test]
    fn entropy_endpoints() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
    }
}
