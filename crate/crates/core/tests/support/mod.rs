#![allow(dead_code)]

pub mod dense_cases;
pub mod route_oracle;
