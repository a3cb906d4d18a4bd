//! Test-side oracles shared by the integration and acceptance suites.

#![allow(dead_code)]

pub mod reference;
