use crate::error::{Error, Result};
use crate::image::Image;

/// Mean over pixels and channels of the squared difference.
pub fn compute_mse(image: &Image, reference: &Image) -> Result<f64> {
    if image.width != reference.width || image.height != reference.height {
        return Err(Error::DimensionMismatch(image.width, image.height, reference.width, reference.height));
    }
    let sum: f64 = image
        .pixels
        .iter()
        .zip(&reference.pixels)
        .flat_map(|(a, b)| (0..3).map(move |c| (a[c] as f64 - b[c] as f64).powi(2)))
        .sum();
    Ok(sum / (3 * image.pixels.len()).max(1) as f64)
}
