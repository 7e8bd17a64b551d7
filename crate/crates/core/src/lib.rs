pub mod bundle;
pub mod cli;
pub mod config;
pub mod environment;
pub mod experiments;
pub mod export;
pub mod geometry;
pub mod metrics;
pub mod pgf;
pub mod planners;
pub mod seed;
pub mod svg;
