pub mod clustering;
pub mod descriptors;
pub mod error;
pub mod funclust;
pub mod mask;
pub mod pipeline;
mod rng;
pub mod synth;
pub mod validity;

pub use error::{Error, Result};

// The guide's snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/segmentation.md")]
    mod segmentation {}
    #[doc = include_str!("../../../book/src/descriptors.md")]
    mod descriptors {}
    #[doc = include_str!("../../../book/src/clustering.md")]
    mod clustering {}
    #[doc = include_str!("../../../book/src/functional.md")]
    mod functional {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
