//! Experiment harness for the co-presence workbench: attack matrices,
//! audio relay grids and protocol simulations over synthetic or
//! user-supplied datasets.

pub mod grid;
pub mod matrix;
pub mod plan;
pub mod render;
pub mod simulate;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("attack {0} is outside the feasibility catalog (pass --force to run it anyway)")]
    Infeasible(String),
    #[error(transparent)]
    Feature(#[from] copresence::features::FeatureError),
    #[error(transparent)]
    Learn(#[from] copresence::learn::LearnError),
    #[error(transparent)]
    Fusion(#[from] copresence::fusion::FusionError),
    #[error(transparent)]
    Attack(#[from] copresence::attack::AttackError),
    #[error(transparent)]
    Gen(#[from] copresence::datagen::GenError),
    #[error(transparent)]
    Dataset(#[from] copresence::dataset::DatasetError),
    #[error(transparent)]
    Session(#[from] copresence::proto::SessionError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// CLI exit code: 2 for invalid plans, 3 for infeasible attacks.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Infeasible(_) => 3,
            _ => 2,
        }
    }
}
