use crate::error::{Error, Result};

/// Concatenated per-channel color histograms, each normalized to sum 1.
///
/// `pixels` is interleaved RGB, three bytes per pixel. A byte value `x`
/// falls in bin `x * bins / 256`. The result has `3 * bins` components and
/// does not depend on pixel order.
pub fn histogram_extract(pixels: &[u8], bins_per_channel: usize) -> Result<Vec<f64>> {
    if bins_per_channel == 0 || bins_per_channel > 256 {
        return Err(Error::InvalidInput(format!(
            "bins per channel must be in 1..=256, got {bins_per_channel}"
        )));
    }
    if pixels.is_empty() || !pixels.len().is_multiple_of(3) {
        return Err(Error::InvalidInput(
            "image must hold a nonzero whole number of RGB pixels".into(),
        ));
    }
    let mut counts = vec![0u64; 3 * bins_per_channel];
    for px in pixels.chunks_exact(3) {
        for (c, &x) in px.iter().enumerate() {
            counts[c * bins_per_channel + x as usize * bins_per_channel / 256] += 1;
        }
    }
    let n = (pixels.len() / 3) as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn black_image() {
        let v = histogram_extract(&[0u8; 5 * 5 * 3], 4).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn one_dark_three_bright() {
        let mut px = vec![0u8; 3];
        px.extend([255u8; 9]);
        let v = histogram_extract(&px, 2).unwrap();
        assert_eq!(v, vec![0.25, 0.75, 0.25, 0.75, 0.25, 0.75]);
    }

    #[test]
    fn rejects_empty_and_bad_bins() {
        assert!(histogram_extract(&[], 4).is_err());
        assert!(histogram_extract(&[1, 2], 4).is_err());
        assert!(histogram_extract(&[1, 2, 3], 0).is_err());
    }

    #[test]
    fn full_resolution_bins() {
        let v = histogram_extract(&[0, 128, 255], 256).unwrap();
        assert_eq!(v[0], 1.0);
        assert_eq!(v[256 + 128], 1.0);
        assert_eq!(v[512 + 255], 1.0);
    }

    proptest! {
        #[test]
        fn sums_to_three(px in prop::collection::vec(any::<[u8; 3]>(), 1..200), bins in 1usize..32) {
            let flat: Vec<u8> = px.concat();
            let v = histogram_extract(&flat, bins).unwrap();
            prop_assert_eq!(v.len(), 3 * bins);
            prop_assert!((v.iter().sum::<f64>() - 3.0).abs() < 1e-9);
        }

        #[test]
        fn permutation_invariant(
            px in prop::collection::vec(any::<[u8; 3]>(), 1..100),
            rot in 0usize..100,
            bins in 1usize..16,
        ) {
            let mut shuffled = px.clone();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let a = histogram_extract(&px.concat(), bins).unwrap();
            let b = histogram_extract(&shuffled.concat(), bins).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
