pub mod blk;
pub mod complex;
pub mod error;
pub mod fixtures;
pub mod homology;
pub mod hstar;
pub mod oracle;
pub mod path;
pub mod rollout;
