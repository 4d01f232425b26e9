//! Contextual co-presence detection workbench.
//!
//! Detecting relay attacks by comparing the ambient context sensed at a
//! prover and a verifier: audio, WiFi/Bluetooth scans and physical readings
//! are turned into distance features, classified with decision trees or
//! random forests under several fusion strategies, and evaluated against a
//! context-manipulating adversary who can transform the non-co-present test
//! pairs modality by modality.

pub mod attack;
pub mod context;
pub mod datagen;
pub mod dataset;
pub mod features;
pub mod fusion;
pub mod learn;
pub mod proto;
pub mod seed;
