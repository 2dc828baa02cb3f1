//! Parameter estimation from transaction data.

mod benchmarks;
mod chain;
mod data;
mod em;
mod mnl_mle;
mod params;

pub use benchmarks::{fit_ind, fit_multimnl, FittedModel};
pub use chain::{chain_sizes, fit_chain_em, ChainLink, ChainObservation, ChainParams, ChainReport};
pub use data::{check_observations, infer_sizes, read_jsonl, write_jsonl, Observation};
pub use em::{
    em_e_step, em_m_step, expected_complete_loglik, fit_em, fit_em_multistart, random_init, EmOptions,
    EmReport, LatentPosterior, MONOTONE_SLACK,
};
pub use mnl_mle::{fit_mnl_mle, ChoiceGroups, ALPHA_MIN, DEFAULT_CAP};
pub use params::{loglik_a, loglik_observed, LogLik, TwoCatParams};
