//! Image quality metrics and the characterization analyses behind the
//! significance, contribution, prefix-similarity and order-stability studies.

mod charz;
mod quality;

pub use charz::{
    color_difference_vs_k, contribution_curve, count_inversions, frame_contributions, order_inversion_rate,
    ray_contributions, share_of_top, significant_fraction, CharzReport, InversionStats, KDifference,
    SignificantFraction,
};
pub use quality::{luma, psnr, ssim, PSNR_CAP, SSIM_WINDOW};
