pub mod backbone;
pub mod corpus;
pub mod diffusion;
pub mod semnet;
pub mod vogue;
pub mod stats;
pub mod fixture;
pub mod pipeline;
