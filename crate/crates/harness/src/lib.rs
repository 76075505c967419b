//! Synthetic economies and brute-force oracles for validating the metric
//! pipeline.
//!
//! Generators ([`synth`]) produce deterministic nested and noisy-nested
//! bipartite economies plus full multi-year firm/panel fixture pairs. The
//! oracles ([`eigen_oracle`], [`ols_oracle`], [`t_oracle`]) re-derive the
//! production results along independent numeric routes (characteristic
//! polynomial, explicit normal equations, quadrature) at double-double
//! precision, and share no kernels with the code they check.

pub mod dd;
pub mod eigen_oracle;
pub mod ols_oracle;
pub mod synth;
pub mod t_oracle;

pub use dd::Dd;
pub use eigen_oracle::{eigen_oracle, EigenPair, OracleError, MAX_ORACLE_DIM};
pub use ols_oracle::{ols_oracle, OlsOracleFit};
pub use synth::{
    gen_firm_records, gen_nested, gen_noisy_nested, gen_panel_table, write_firms_csv,
    write_panel_csv, FixtureSpec, SynthError, SynthSpec,
};
pub use t_oracle::{pearson_oracle, t_two_sided_p_oracle};
