//! Coercion-resistant online exam simulator.
//!
//! An exponentiation mixnet turns registered keys into pseudonyms, an exam
//! authority shuffles answers row by row before examiners mark them, and
//! marks travel back to candidates encrypted to their pseudonyms. The crate
//! also carries an injection attack on the plain mixnet, the proof-gated
//! variant that stops it, and coercion games that check what a coercer with
//! a party's real key can learn from the board.

pub mod attack;
pub mod cli;
pub mod coercion;
pub mod config;
pub mod elgamal;
pub mod encoding;
pub mod error;
pub mod group;
pub mod mixnet;
pub mod permutation;
pub mod protocol;
pub mod rng;
pub mod schnorr;
pub mod trials;
