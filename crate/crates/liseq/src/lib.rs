//! Lazy sequentialization of parameterized concurrent programs under
//! round-bounded schedules, with explicit-state oracles that check the
//! translation on finite-data programs.

pub mod lang;
pub mod machine;
pub mod param_oracle;
pub mod interfaces;
pub mod seq_lazy;
pub mod seq_eager;
pub mod seq_explorer;
pub mod pmpds;
pub mod compare;
