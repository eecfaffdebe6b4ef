//! Behavioral simulation of unsupervised clustering on a memristor crossbar.
//!
//! Inputs are thresholded onto the vertices of the hypercube `{-1, +1}^N`, which
//! turns a plain dot product with a weight vector into an affine function of the
//! Manhattan distance between the two. Clustering then reduces to a winner-take-all
//! over `M` dot products followed by a Hebbian nudge of the winner towards the input.
//!
//! The crate provides two interchangeable distance engines:
//!
//! * [`clustering::Engine::Ideal`] does the arithmetic in `f64`.
//! * [`clustering::Engine::Circuit`] stores each weight component in a differential
//!   memristor pair ([`device::DiffPair`]) inside a [`crossbar::Crossbar`] and
//!   updates it with threshold-gated write pulses.
//!
//! [`baseline`] holds a Lloyd k-means used as the reference for the clustering cost,
//! [`data`] reads MNIST IDX files and generates synthetic clusters, and [`export`]
//! writes the CSV / PGM / JSON run artifacts.

pub mod baseline;
pub mod clustering;
pub mod crossbar;
pub mod data;
pub mod device;
mod error;
pub mod export;
pub mod rng;

pub use error::{Error, Result};
