//! Robust summary statistics over repeated runs.

use crate::{Error, Result};

/// Median; the mean of the two central order statistics for even lengths.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("median of an empty sample".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("sample"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Ok(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

/// Median absolute deviation, `median(|x_i - median(x)|)`, unscaled.
pub fn mad(values: &[f64]) -> Result<f64> {
    let m = median(values)?;
    let dev: Vec<f64> = values.iter().map(|x| (x - m).abs()).collect();
    median(&dev)
}

pub fn median_mad(values: &[f64]) -> Result<(f64, f64)> {
    Ok((median(values)?, mad(values)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
        assert_eq!(mad(&[1.0, 1.0, 2.0, 2.0, 4.0, 6.0, 9.0]).unwrap(), 1.0);
        assert_eq!(mad(&[0.5; 7]).unwrap(), 0.0);
    }

    #[test]
    fn rejects_empty_and_nan() {
        assert!(median(&[]).is_err());
        assert!(mad(&[1.0, f64::NAN]).is_err());
    }
}
