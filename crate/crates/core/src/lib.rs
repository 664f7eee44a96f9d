#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod channel;
pub mod mimo;
pub mod phy;
pub mod mac_timing;
pub mod strategy;
pub mod config;
pub mod engine;
pub mod cli;
