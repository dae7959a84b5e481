//! Dense linear algebra, layers with hand-written gradients, and the GCN.

pub mod gcn;
pub mod layers;
pub mod matrix;
pub mod optim;
pub mod scale;
pub mod sparse;
pub mod train;

pub use gcn::{gcn_forward, loss_and_grad, GcnGrads, GcnModel, GraphInput};
pub use matrix::DenseMatrix;
pub use optim::{Adam, AdamConfig, EarlyStopping};
pub use scale::Standardizer;
pub use sparse::{normalize_adjacency, CsrMatrix};
pub use train::{
    fit_gcn, make_split, train_gcn, GcnCheckpoint, GcnRun, SplitMasks, TrainConfig, TrainOutcome,
};
