//! Test corpora: random models, duel triples and canary models.

pub mod canary;
pub mod duels;
pub mod gen;

pub use canary::{canary_model, CanaryModel};
pub use duels::{Duel, DUELS};
pub use gen::{corpus, random_model, random_model_with, GenConfig};
