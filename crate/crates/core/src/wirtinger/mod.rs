//! π_p and the weighted one-dimensional p-Wirtinger constant.

mod one_dim;
mod pi_p;

pub use one_dim::{
    constraint_shift, minimize_1d, rayleigh_1d, Grid1D, Minimize1dResult, Profile1D, Weight1D,
    Weight1DKind,
};
pub use pi_p::{pi_p_closed, pi_p_quadrature};
