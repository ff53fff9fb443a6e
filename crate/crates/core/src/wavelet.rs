//! Single-scale continuous Haar wavelet transform.
//!
//! Coefficient `w[u]` is the inner product of the signal with a Haar analyzing
//! vector of `m` samples whose window starts at sample `u`:
//! `(sum(v[u..u+m/2]) - sum(v[u+m/2..u+m])) / sqrt(m)`. Positive values mean
//! the average pitch falls across the window. Samples past the end of the
//! signal are read from its mirror image, so every shift is fully supported
//! and the output has the length of the input.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::signal::{qn_to_samples, PitchSignal, Rate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletScale {
    support: usize,
    scale_qn: Option<f64>,
}

impl WaveletScale {
    /// A scale of `scale_qn` quarter notes on a grid of `rate` samples per
    /// quarter note. The support `scale_qn * rate` must be an even integer.
    pub fn from_qn(scale_qn: f64, rate: Rate) -> Result<Self> {
        if scale_qn.is_nan() || scale_qn <= 0.0 {
            return Err(Error::InvalidSupport(format!("scale {scale_qn} qn")));
        }
        let support = qn_to_samples(scale_qn, rate)
            .ok_or_else(|| Error::InvalidSupport(format!("{scale_qn} qn at rate {rate}")))?;
        let mut scale = Self::from_support(support)?;
        scale.scale_qn = Some(scale_qn);
        Ok(scale)
    }

    pub fn from_support(support: usize) -> Result<Self> {
        if support < 2 || !support.is_multiple_of(2) {
            return Err(Error::InvalidSupport(support.to_string()));
        }
        Ok(WaveletScale {
            support,
            scale_qn: None,
        })
    }

    pub fn support(&self) -> usize {
        self.support
    }

    pub fn scale_qn(&self) -> Option<f64> {
        self.scale_qn
    }
}

/// The discrete Haar analyzing vector: `+1/sqrt(m)` over the first half,
/// `-1/sqrt(m)` over the second. Zero sum, unit energy.
pub fn haar_analyzing_function(scale: WaveletScale) -> Vec<f64> {
    let m = scale.support;
    let amp = 1.0 / (m as f64).sqrt();
    (0..m).map(|i| if i < m / 2 { amp } else { -amp }).collect()
}

/// Index into a signal of length `len` extended by whole-sample symmetric
/// reflection (`... v2 v1 | v0 v1 v2 ... | v[len-2] v[len-3] ...`), repeated as
/// often as needed.
pub fn mirror_index(i: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let j = i.rem_euclid(period);
    if j < len as isize {
        j as usize
    } else {
        (period - j) as usize
    }
}

/// Haar coefficients of `values` at every shift.
pub fn haar_transform(values: &[f64], scale: WaveletScale) -> Result<Vec<f64>> {
    let len = values.len();
    if len == 0 {
        return Err(Error::EmptyVector);
    }
    let m = scale.support;
    let half = m / 2;
    // Centering on the first sample keeps the prefix sums small and is exact
    // for integer-valued signals; the wavelet annihilates the offset anyway.
    let origin = values[0];
    let mut prefix = Vec::with_capacity(len + m);
    prefix.push(0.0);
    let mut acc = 0.0;
    for i in 0..len + m - 1 {
        acc += values[mirror_index(i as isize, len)] - origin;
        prefix.push(acc);
    }
    let norm = 1.0 / (m as f64).sqrt();
    Ok((0..len)
        .map(|u| {
            let first = prefix[u + half] - prefix[u];
            let second = prefix[u + m] - prefix[u + half];
            (first - second) * norm
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSignal {
    pub values: Vec<f64>,
    pub scale: WaveletScale,
    pub source_rate: Rate,
}

pub fn haar_coefficients(signal: &PitchSignal, scale: WaveletScale) -> Result<CoefficientSignal> {
    Ok(CoefficientSignal {
        values: haar_transform(signal.samples(), scale)?,
        scale,
        source_rate: signal.rate(),
    })
}

/// Absolute coefficients, one row per scale.
pub fn scalogram(values: &[f64], scales: &[WaveletScale]) -> Result<Vec<Vec<f64>>> {
    if scales.is_empty() {
        return Err(Error::InvalidConfig("no scales given".into()));
    }
    scales
        .par_iter()
        .map(|&s| Ok(haar_transform(values, s)?.into_iter().map(f64::abs).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analyzing_function_shapes() {
        let four = haar_analyzing_function(WaveletScale::from_support(4).unwrap());
        assert_eq!(four, vec![0.5, 0.5, -0.5, -0.5]);
        let two = haar_analyzing_function(WaveletScale::from_support(2).unwrap());
        let r = 1.0 / 2f64.sqrt();
        assert_eq!(two, vec![r, -r]);
        for m in (2..=64).step_by(2) {
            let psi = haar_analyzing_function(WaveletScale::from_support(m).unwrap());
            assert!(psi.iter().sum::<f64>().abs() < 1e-12);
            assert!((psi.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_or_tiny_support_rejected() {
        assert!(WaveletScale::from_support(3).is_err());
        assert!(WaveletScale::from_support(0).is_err());
        assert!(WaveletScale::from_qn(0.125, Rate::from_integer(8)).is_err());
        assert_eq!(
            WaveletScale::from_qn(0.25, Rate::from_integer(8)).unwrap().support(),
            2
        );
    }

    #[test]
    fn step_down_inner_product() {
        let s = WaveletScale::from_support(4).unwrap();
        let w = haar_transform(&[1.0, 1.0, 0.0, 0.0], s).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_signal_is_annihilated() {
        for m in [2, 4, 8, 16, 64] {
            let w = haar_transform(&[67.0; 20], WaveletScale::from_support(m).unwrap()).unwrap();
            assert!(w.iter().all(|c| c.abs() <= 1e-12));
        }
    }

    #[test]
    fn ascending_ramp_has_negative_interior_coefficients() {
        let ramp: Vec<f64> = (0..40).map(f64::from).collect();
        let m = 8;
        let w = haar_transform(&ramp, WaveletScale::from_support(m).unwrap()).unwrap();
        for c in &w[..ramp.len() - m + 1] {
            assert!(*c < 0.0);
        }
    }

    #[test]
    fn mirror_index_reflects_without_edge_repeat() {
        let idx: Vec<usize> = (-3..8).map(|i| mirror_index(i, 4)).collect();
        assert_eq!(idx, vec![3, 2, 1, 0, 1, 2, 3, 2, 1, 0, 1]);
        assert_eq!(mirror_index(17, 1), 0);
    }

    #[test]
    fn scalogram_rows_match_single_scale() {
        let v = [60.0, 62.0, 64.0, 65.0, 67.0, 65.0, 64.0, 62.0];
        let scales = [WaveletScale::from_support(2).unwrap(), WaveletScale::from_support(4).unwrap()];
        let rows = scalogram(&v, &scales).unwrap();
        assert_eq!(rows.len(), 2);
        let direct: Vec<f64> = haar_transform(&v, scales[1]).unwrap().iter().map(|c| c.abs()).collect();
        assert_eq!(rows[1], direct);
        assert!(scalogram(&v, &[]).is_err());
    }
}
