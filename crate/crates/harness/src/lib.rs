pub mod config;
pub mod converge;
pub mod run;
pub mod scenario;
pub mod snapshot;
pub mod validate;
