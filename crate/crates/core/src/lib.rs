pub mod constraints;
pub mod cost;
pub mod enumerate;
pub mod exec;
pub mod generate;
pub mod graph;
pub mod query;
pub mod views;
pub mod workload;
