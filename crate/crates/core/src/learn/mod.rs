//! Filter learning: a small reverse-mode tape, the training objective,
//! Adam and the synthetic data it trains on.

pub mod adam;
pub mod config;
pub mod graph;
pub mod loss;
pub mod synth;
pub mod tape;
pub mod train;

pub use adam::Adam;
pub use config::TrainConfig;
pub use loss::{
    impulse_response, loss_and_gradient, loss_gaussian_impulse, loss_wavelet_constraint, total_loss, GaussianTarget,
    ImpulseResponse, LossReport, LossWeights, Objective,
};
pub use synth::{dataset, gen_image, gen_signal, SynthConfig};
pub use train::{initial_filters, train, train_from, TrainOutcome};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator for `seed`, with independent `stream`s for
/// data, initialization and batch order.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}
