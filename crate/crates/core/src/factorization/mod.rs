//! Spectrogram factorization: thin SVD and the top-bases feature vector.

pub mod features;
pub mod svd;

pub use features::{
    extract_features, extract_features_from_matrix, FeatureVector, DEFAULT_TOP_BASES,
    DEGENERATE_SIGMA,
};
pub use svd::{svd, SvdResult};
