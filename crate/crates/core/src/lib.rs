pub mod corpus;
pub mod embedding;
pub mod clustering;
pub mod temporal;
pub mod community;
pub mod timeline;
pub mod synth;
pub mod eval;
pub mod pipeline;
