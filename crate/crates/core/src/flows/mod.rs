//! Flows of vector fields, the maps `psi_j^eps`, alternating chains
//! `Theta`, coefficient products `b_n`, difference quotients and the
//! three-square function assembled from them.

mod chain;
mod ode;
mod psi;
mod scriptf;

pub use chain::{
    b_n_from_stages, b_n_product, diff_quotient, sharp_diff, theta_chain, write_chain_csv, ChainBuilder,
    ChainPoint, MAX_CHAIN_LEN,
};
pub use ode::{flow, flow_steps, rk4, FlowConfig, DEFAULT_STEPS_PER_UNIT, MIN_STEPS_PER_UNIT};
pub use psi::{annihilator_of_psi, closed_form_v, psi_map, Psi};
pub use scriptf::{
    sample_script_f, script_f, write_script_f_csv, CloudSpec, ScriptF, ScriptFSample, SCRIPT_F_STAGE_STEPS,
};
