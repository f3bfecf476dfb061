//! Exact and self-similar solutions used as oracles.

pub mod barenblatt;
pub mod graveleau;
pub mod residual;
pub mod traveling_wave;

pub use barenblatt::{barenblatt_eval, barenblatt_match, BarenblattParams};
pub use graveleau::{graveleau_eval, graveleau_match, graveleau_profile, GraveleauProfile, GraveleauSolution};
pub use residual::{pme_residual, SpaceTimeField, SpaceTimeJet};
pub use traveling_wave::{traveling_wave_eval, TravelingWave};
