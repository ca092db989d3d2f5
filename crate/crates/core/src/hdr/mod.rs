//! HDR image codecs: Radiance RGBE (.hdr) and PFM.

mod pfm;
mod radiance;

pub use pfm::{read_pfm, write_pfm};
pub use radiance::{read_radiance_hdr, write_radiance_hdr};
