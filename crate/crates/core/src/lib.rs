pub mod aggregation;
pub mod cli;
pub mod expr;
pub mod oracle;
pub mod probability;
pub mod quadrature;
pub mod reduction;
