//! Spherical illumination toolkit: quasi-uniform anchor lattices on the
//! sphere, HDR panorama IO, decomposition of panoramas into light
//! distribution / intensity / ambient, entropic optimal transport between
//! spherical distributions with an exact oracle, spherical Gaussian map
//! rendering, distortion-aware spherical convolution sampling, and
//! evaluation metrics.

pub mod decompose;
pub mod error;
pub mod hdr;
pub mod metrics;
pub mod panorama;
pub mod projector;
pub mod sphconv;
pub mod sphere;
pub mod transport;

pub use decompose::{decompose, light_mask, IlluminationParams, LightMask};
pub use error::{Error, Result};
pub use panorama::Panorama;
pub use projector::{render_gaussian_map, GaussianMapConfig};
pub use sphere::{generate_anchors, AnchorSet, CostMatrix, Direction};
pub use transport::{
    exact_emd, sinkhorn, sml, SinkhornConfig, SphericalDistribution, TransportPlan,
};
